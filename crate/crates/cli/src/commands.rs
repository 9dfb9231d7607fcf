//! Subcommand implementations. Each returns the rendered output plus a
//! JSON-serializable summary for the metadata sidecar.

use crate::io_util::{emit, resolve_scenario, scenario_hash, Sidecar};
use crate::{CliError, OutputFormat};
use ionlink_core::analysis::{
    conversion_snr, fit_histogram, mle_reconstruct, pauli_pair_settings, simulate_counts,
    visibilities_from_counts,
};
use ionlink_core::budget::{infidelity_budget, rate_budget};
use ionlink_core::crosstalk::{
    attempt_heating, equilibrium_phonons, pumping_photon_count, recoil_heating, scattering_rate,
    stark_phase_rate,
};
use ionlink_core::herald::{direct_herald, herald_bsm, herald_single_photon, HeraldScheme};
use ionlink_core::protocol::{
    log_spaced, records_to_csv, run_node_sequence, run_node_sequence_with_workers, swap_curve,
    SwapCurveOptions,
};
use ionlink_core::quantum::{bell_fidelity, bell_pair, visibility_fidelity};
use serde_json::json;
use std::path::Path;

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn map_core(e: ionlink_core::Error) -> CliError {
    use ionlink_core::Error as E;
    match e {
        E::Numerical(m) => CliError::Numerical(m),
        E::DegenerateFit(m) => CliError::Numerical(format!("degenerate fit: {m}")),
        other => CliError::Config(other.to_string()),
    }
}

fn out_path(explicit: Option<&Path>, sc_default: &Option<String>) -> Option<std::path::PathBuf> {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| sc_default.as_ref().map(std::path::PathBuf::from))
}

pub fn budget(scenario: &str, format: OutputFormat, out: Option<&Path>) -> Result<(), CliError> {
    let sc = resolve_scenario(scenario)?;
    let rate = rate_budget(&sc.node).map_err(map_core)?;
    let infidelity = infidelity_budget(&sc.infidelity_terms).map_err(map_core)?;
    for w in &rate.warnings {
        eprintln!("warning: {w}");
    }
    let content = match format {
        OutputFormat::Csv => {
            let mut s = String::from("section,name,value\n");
            for (name, v) in &rate.stages {
                s.push_str(&format!("rate,{name},{v}\n"));
            }
            s.push_str(&format!("rate,Attempting rate,{}\n", rate.attempt_rate_hz));
            s.push_str(&format!("rate,Success rate,{}\n", rate.success_rate_hz));
            for (name, v) in &infidelity.terms {
                s.push_str(&format!("infidelity,{name},{v}\n"));
            }
            s.push_str(&format!(
                "infidelity,Total infidelity,{}\n",
                infidelity.total
            ));
            s
        }
        OutputFormat::Json => {
            serde_json::to_string_pretty(&json!({
                "scenario": sc.name,
                "rate": rate,
                "infidelity": infidelity,
            }))
            .map_err(|e| CliError::Numerical(e.to_string()))?
                + "\n"
        }
    };
    let sidecar = Sidecar {
        command: "budget",
        version: VERSION,
        scenario: Some(scenario),
        scenario_hash: Some(scenario_hash(&sc)),
        seed: None,
        summary: Some(json!({
            "success_rate_hz": rate.success_rate_hz,
            "total_infidelity": infidelity.total,
        })),
    };
    emit(
        out_path(out, &sc.default_output).as_deref(),
        &content,
        &sidecar,
    )
}

pub fn simulate_node(
    scenario: &str,
    seed: u64,
    sequences: u64,
    workers: Option<usize>,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let sc = resolve_scenario(scenario)?;
    let run = match workers {
        None => run_node_sequence(&sc.node, &sc.noise, seed, sequences).map_err(map_core)?,
        Some(n) => run_node_sequence_with_workers(&sc.node, &sc.noise, seed, sequences, n)
            .map_err(map_core)?,
    };
    let content = match format {
        OutputFormat::Csv => records_to_csv(&run.records),
        OutputFormat::Json => {
            serde_json::to_string_pretty(&json!({
                "summary": run.summary,
                "records": run.records,
            }))
            .map_err(|e| CliError::Numerical(e.to_string()))?
                + "\n"
        }
    };
    let sidecar = Sidecar {
        command: "simulate-node",
        version: VERSION,
        scenario: Some(scenario),
        scenario_hash: Some(scenario_hash(&sc)),
        seed: Some(seed),
        summary: Some(&run.summary),
    };
    emit(
        out_path(out, &sc.default_output).as_deref(),
        &content,
        &sidecar,
    )
}

#[allow(clippy::too_many_arguments)]
pub fn swap_curve_cmd(
    rates_spec: &str,
    points: usize,
    t1: f64,
    t2: f64,
    conditioned: bool,
    trials: u64,
    seed: u64,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let rates = parse_rates(rates_spec, points)?;
    let opts = SwapCurveOptions {
        conditioned,
        mc_trials: trials,
        seed,
    };
    let curve = swap_curve(&rates, t1, t2, opts).map_err(map_core)?;
    let content = match format {
        OutputFormat::Csv => {
            let mut s =
                String::from("rate_hz,success_analytic,fidelity_analytic,success_mc,fidelity_mc\n");
            for p in &curve {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    p.rate_hz, p.success_analytic, p.fidelity_analytic, p.success_mc, p.fidelity_mc
                ));
            }
            s
        }
        OutputFormat::Json => {
            serde_json::to_string_pretty(&curve).map_err(|e| CliError::Numerical(e.to_string()))?
                + "\n"
        }
    };
    let sidecar: Sidecar<'_, serde_json::Value> = Sidecar {
        command: "swap-curve",
        version: VERSION,
        scenario: None,
        scenario_hash: None,
        seed: Some(seed),
        summary: Some(json!({
            "t1_prime_s": t1,
            "t2_s": t2,
            "conditioned": conditioned,
            "rates": rates,
        })),
    };
    emit(out, &content, &sidecar)
}

fn parse_rates(spec: &str, points: usize) -> Result<Vec<f64>, CliError> {
    let bad = |m: String| CliError::Config(m);
    if let Some((a, b)) = spec.split_once("..") {
        let lo: f64 = a.parse().map_err(|_| bad(format!("bad rate `{a}`")))?;
        let hi: f64 = b.parse().map_err(|_| bad(format!("bad rate `{b}`")))?;
        if !(lo > 0.0 && hi > lo && points >= 2) {
            return Err(bad("rate range needs 0 < start < end and ≥ 2 points".into()));
        }
        Ok(log_spaced(lo, hi, points))
    } else {
        let rates: Result<Vec<f64>, _> = spec.split(',').map(str::trim).map(str::parse).collect();
        let rates = rates.map_err(|_| bad(format!("bad rate list `{spec}`")))?;
        if rates.is_empty() || rates.iter().any(|&r: &f64| r <= 0.0) {
            return Err(bad("rates must be positive".into()));
        }
        Ok(rates)
    }
}

pub fn crosstalk_report(
    scenario: &str,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let sc = resolve_scenario(scenario)?;
    let ct = sc.crosstalk.clone().ok_or_else(|| {
        CliError::Config(format!(
            "scenario `{scenario}` carries no crosstalk worksheet; try paper-s13"
        ))
    })?;

    // Aggregate per operation group, mirroring the summary table layout.
    let groups = [
        "397 nm picosecond pulse",
        "optical pumping",
        "sympathetic cooling",
    ];
    let mut rows: Vec<(String, f64, f64)> = Vec::new();
    for g in groups {
        let mut decay = 0.0;
        let mut stark = 0.0;
        for op in ct.ops.iter().filter(|o| o.name.starts_with(g)) {
            decay += scattering_rate(&op.scattering_params(&ct), op.ops_per_attempt);
            stark += stark_phase_rate(&op.stark_params(&ct), op.ops_per_attempt);
        }
        rows.push((g.to_string(), decay, stark));
    }
    let total: (f64, f64) = rows
        .iter()
        .fold((0.0, 0.0), |acc, r| (acc.0 + r.1, acc.1 + r.2));

    let recoil = recoil_heating(&ct.heating).map_err(map_core)?;
    let combined = attempt_heating(&ct.heating).map_err(map_core)?;
    let photons = pumping_photon_count(ct.heating.pump_branch, ct.heating.n_pump_rounds);
    let nbar_mean = combined.iter().sum::<f64>() / combined.len() as f64;
    let (nbar_lo, nbar_hi, nbar_avg) = equilibrium_phonons(ct.base_nbar, nbar_mean, 100);

    let content = match format {
        OutputFormat::Csv => {
            let mut s = String::from("operation,population_decay_per_s,decoherence_rad_per_s\n");
            for (name, decay, stark) in &rows {
                s.push_str(&format!("{name},{decay},{stark}\n"));
            }
            s.push_str(&format!("Total influence,{},{}\n", total.0, total.1));
            s
        }
        OutputFormat::Json => {
            serde_json::to_string_pretty(&json!({
                "scenario": sc.name,
                "rows": rows.iter().map(|(n, d, s)| json!({
                    "operation": n,
                    "population_decay_per_s": d,
                    "decoherence_rad_per_s": s,
                })).collect::<Vec<_>>(),
                "total": {
                    "population_decay_per_s": total.0,
                    "decoherence_rad_per_s": total.1,
                },
                "heating": {
                    "recoil_energy_j": recoil.energy_j,
                    "excitation_phonons_per_mode": recoil.phonons_per_mode,
                    "pumping_photons_per_attempt": photons,
                    "combined_phonons_per_mode": combined,
                    "equilibrium_nbar": { "min": nbar_lo, "max": nbar_hi, "mean": nbar_avg },
                },
            }))
            .map_err(|e| CliError::Numerical(e.to_string()))?
                + "\n"
        }
    };
    let sidecar = Sidecar {
        command: "crosstalk-report",
        version: VERSION,
        scenario: Some(scenario),
        scenario_hash: Some(scenario_hash(&sc)),
        seed: None,
        summary: Some(json!({
            "total_population_decay_per_s": total.0,
            "total_decoherence_rad_per_s": total.1,
        })),
    };
    emit(
        out_path(out, &sc.default_output).as_deref(),
        &content,
        &sidecar,
    )
}

pub fn tomography_demo(
    scenario: &str,
    shots: u64,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let sc = resolve_scenario(scenario)?;
    let (_, state) = direct_herald(&sc.node, &sc.noise).map_err(map_core)?;
    let true_fidelity = bell_fidelity(&state).map_err(map_core)?;
    let settings = pauli_pair_settings();
    let table = simulate_counts(&state, &settings, shots, seed).map_err(map_core)?;
    let result = mle_reconstruct(&table).map_err(map_core)?;
    if !result.converged {
        return Err(CliError::Numerical(format!(
            "MLE did not converge in {} iterations (ΔlogL at stop unavailable); last fidelity {}",
            result.iterations,
            bell_fidelity(&result.state).map_err(map_core)?
        )));
    }
    let recon_fidelity = bell_fidelity(&result.state).map_err(map_core)?;
    let vis = visibilities_from_counts(&table).map_err(map_core)?;
    let vis_fid =
        visibility_fidelity(vis.signed.0, vis.signed.1, vis.signed.2).map_err(map_core)?;
    let content = serde_json::to_string_pretty(&json!({
        "scenario": sc.name,
        "shots_per_setting": shots,
        "true_fidelity": true_fidelity,
        "reconstructed_fidelity": recon_fidelity,
        "visibilities": { "vx": vis.values.0, "vy": vis.values.1, "vz": vis.values.2 },
        "visibility_fidelity": vis_fid,
        "bell_flavor": vis.flavor,
        "iterations": result.iterations,
        "log_likelihood": result.log_likelihood,
        "reconstructed_state": result.state.to_json(),
    }))
    .map_err(|e| CliError::Numerical(e.to_string()))?
        + "\n";
    let sidecar = Sidecar {
        command: "tomography-demo",
        version: VERSION,
        scenario: Some(scenario),
        scenario_hash: Some(scenario_hash(&sc)),
        seed: Some(seed),
        summary: Some(json!({
            "true_fidelity": true_fidelity,
            "reconstructed_fidelity": recon_fidelity,
        })),
    };
    emit(
        out_path(out, &sc.default_output).as_deref(),
        &content,
        &sidecar,
    )
}

pub fn fit_histogram_cmd(input: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let text = std::fs::read_to_string(input)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", input.display())))?;
    // One timestamp in nanoseconds per line; a non-numeric header row is
    // skipped.
    let mut samples_ns = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) => samples_ns.push(v),
            Err(_) if lineno == 0 => continue,
            Err(_) => {
                return Err(CliError::Config(format!(
                    "{}:{}: not a timestamp: `{field}`",
                    input.display(),
                    lineno + 1
                )))
            }
        }
    }
    let samples_s: Vec<f64> = samples_ns.iter().map(|t| t * 1e-9).collect();
    let fit = fit_histogram(&samples_s).map_err(map_core)?;
    let content = serde_json::to_string_pretty(&json!({
        "n_samples": fit.n_samples,
        "latency_ns": fit.model.latency_s * 1e9,
        "latency_stderr_ns": fit.stderr_latency_s * 1e9,
        "jitter_sigma_ns": fit.model.jitter_sigma_s * 1e9,
        "jitter_sigma_stderr_ns": fit.stderr_sigma_s * 1e9,
        "decay_tau_ns": fit.model.decay_tau_s * 1e9,
        "decay_tau_stderr_ns": fit.stderr_tau_s * 1e9,
        "log_likelihood": fit.log_likelihood,
        "window_ns": [fit.model.window_s.0 * 1e9, fit.model.window_s.1 * 1e9],
    }))
    .map_err(|e| CliError::Numerical(e.to_string()))?
        + "\n";
    let sidecar: Sidecar<'_, serde_json::Value> = Sidecar {
        command: "fit-histogram",
        version: VERSION,
        scenario: None,
        scenario_hash: None,
        seed: None,
        summary: Some(json!({ "decay_tau_ns": fit.model.decay_tau_s * 1e9 })),
    };
    emit(out, &content, &sidecar)
}

pub fn herald_table(
    scenario: &str,
    scheme: Option<HeraldScheme>,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let sc = resolve_scenario(scenario)?;
    let scheme = scheme.unwrap_or(sc.herald.scheme);
    let outcomes = match scheme {
        HeraldScheme::SinglePhoton => {
            herald_single_photon(sc.herald.chi, sc.herald.eta, sc.herald.eta, 0.0)
                .map_err(map_core)?
        }
        HeraldScheme::Bsm => herald_bsm(
            &bell_pair("ion_a", "photon_a"),
            &bell_pair("ion_b", "photon_b"),
            sc.herald.eta,
            sc.herald.eta,
        )
        .map_err(map_core)?,
        HeraldScheme::Direct => {
            let (p, state) = direct_herald(&sc.node, &sc.noise).map_err(map_core)?;
            let f = bell_fidelity(&state).map_err(map_core)?;
            let content = match format {
                OutputFormat::Csv => format!(
                    "pattern,probability,bell_fidelity\nclick,{p},{f}\nnone,{},\n",
                    1.0 - p
                ),
                OutputFormat::Json => {
                    serde_json::to_string_pretty(&json!([
                        { "pattern": "click", "probability": p, "bell_fidelity": f },
                        { "pattern": "none", "probability": 1.0 - p },
                    ]))
                    .map_err(|e| CliError::Numerical(e.to_string()))?
                        + "\n"
                }
            };
            let sidecar: Sidecar<'_, serde_json::Value> = Sidecar {
                command: "herald-table",
                version: VERSION,
                scenario: Some(scenario),
                scenario_hash: Some(scenario_hash(&sc)),
                seed: None,
                summary: None,
            };
            return emit(
                out_path(out, &sc.default_output).as_deref(),
                &content,
                &sidecar,
            );
        }
    };
    let rows: Vec<serde_json::Value> = outcomes
        .iter()
        .map(|o| {
            let fidelity = o
                .post_state
                .as_ref()
                .filter(|s| s.dims() == [2, 2])
                .and_then(|s| bell_fidelity(s).ok());
            json!({
                "pattern": o.pattern,
                "probability": o.probability,
                "bell_fidelity": fidelity,
            })
        })
        .collect();
    let content = match format {
        OutputFormat::Csv => {
            let mut s = String::from("pattern,probability,bell_fidelity\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{}\n",
                    r["pattern"].as_str().unwrap(),
                    r["probability"],
                    r["bell_fidelity"]
                        .as_f64()
                        .map(|f| f.to_string())
                        .unwrap_or_default(),
                ));
            }
            s
        }
        OutputFormat::Json => {
            serde_json::to_string_pretty(&rows).map_err(|e| CliError::Numerical(e.to_string()))?
                + "\n"
        }
    };
    let sidecar: Sidecar<'_, serde_json::Value> = Sidecar {
        command: "herald-table",
        version: VERSION,
        scenario: Some(scenario),
        scenario_hash: Some(scenario_hash(&sc)),
        seed: None,
        summary: None,
    };
    emit(
        out_path(out, &sc.default_output).as_deref(),
        &content,
        &sidecar,
    )
}

pub fn conversion_point(scenario: &str, pump_w: f64, signal_hz: f64) -> Result<(), CliError> {
    let sc = resolve_scenario(scenario)?;
    let model = sc.conversion.ok_or_else(|| {
        CliError::Config(format!("scenario `{scenario}` has no conversion stage"))
    })?;
    let point = conversion_snr(&model, pump_w, signal_hz).map_err(map_core)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&point).map_err(|e| CliError::Numerical(e.to_string()))?
    );
    Ok(())
}
