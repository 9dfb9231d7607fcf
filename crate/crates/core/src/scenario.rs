//! Named parameter scenarios bundling node, noise, heralding, conversion
//! and crosstalk inputs. The shipped `paper-*` scenarios are read-only
//! fixtures mirroring the three measured link configurations, their
//! projected improvements, and the crosstalk worksheet.

use crate::analysis::conversion::{bandwidth_nm, ConversionModel};
use crate::budget::NodeConfig;
use crate::crosstalk::{gaussian_beam_scale, CrosstalkParams, HeatingParams};
use crate::herald::{HeraldParams, HeraldScheme};
use crate::noise::{ModTone, NoiseParams};
use serde::{Deserialize, Serialize};

const TWO_PI: f64 = std::f64::consts::TAU;
const SPEED_OF_LIGHT: f64 = 2.99792458e8;
/// Atomic mass unit, kg.
const AMU: f64 = 1.66053906892e-27;

/// Angular detuning between a drive at `lambda_drive_m` and a transition
/// at `lambda_transition_m`.
pub fn transition_detuning_rad_s(lambda_drive_m: f64, lambda_transition_m: f64) -> f64 {
    TWO_PI * SPEED_OF_LIGHT * (1.0 / lambda_drive_m - 1.0 / lambda_transition_m).abs()
}

/// One disturbing operation in the crosstalk worksheet.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CrosstalkOpSpec {
    pub name: String,
    /// Rabi frequency at the communication ion, rad/s.
    pub omega_rad_s: f64,
    pub delta_rad_s: f64,
    pub gamma_rad_s: f64,
    pub tau_s: f64,
    pub pol_coeff: f64,
    /// 1 for per-attempt operations, 1/N for every-N-attempts operations.
    pub ops_per_attempt: f64,
    /// Whether the beam is tightly focused so the memory ion sees the
    /// Gaussian-falloff Rabi frequency.
    pub apply_beam_falloff: bool,
}

impl CrosstalkOpSpec {
    /// Parameters for the population-decay estimate. The worksheet uses
    /// the on-axis Rabi frequency here, which overestimates scattering on
    /// the displaced memory ion.
    pub fn scattering_params(&self, sc: &CrosstalkScenario) -> CrosstalkParams {
        CrosstalkParams {
            omega_rad_s: self.omega_rad_s,
            delta_rad_s: self.delta_rad_s,
            gamma_rad_s: self.gamma_rad_s,
            tau_s: self.tau_s,
            pol_coeff: self.pol_coeff,
            echo_alpha: 1.0,
            attempt_rate_hz: sc.attempt_rate_hz,
        }
    }

    /// Parameters for the differential Stark-phase estimate: the beam
    /// falloff applies where flagged and the spin echo suppresses the
    /// accumulated phase.
    pub fn stark_params(&self, sc: &CrosstalkScenario) -> CrosstalkParams {
        let scale = if self.apply_beam_falloff {
            gaussian_beam_scale(sc.beam_radius_m, sc.ion_separation_m)
        } else {
            1.0
        };
        CrosstalkParams {
            omega_rad_s: self.omega_rad_s * scale,
            delta_rad_s: self.delta_rad_s,
            gamma_rad_s: self.gamma_rad_s,
            tau_s: self.tau_s,
            pol_coeff: self.pol_coeff,
            echo_alpha: sc.echo_alpha,
            attempt_rate_hz: sc.attempt_rate_hz,
        }
    }
}

/// Full crosstalk worksheet: disturbing operations, echo suppression,
/// beam geometry and the motional parameters.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CrosstalkScenario {
    pub ops: Vec<CrosstalkOpSpec>,
    pub echo_alpha: f64,
    pub attempt_rate_hz: f64,
    pub beam_radius_m: f64,
    pub ion_separation_m: f64,
    /// Phonon number right after an intermediate cooling block.
    pub base_nbar: f64,
    pub heating: HeatingParams,
}

impl CrosstalkScenario {
    pub fn op(&self, name: &str) -> Option<&CrosstalkOpSpec> {
        self.ops.iter().find(|o| o.name == name)
    }

    /// The worksheet for the measured node: a strong picosecond
    /// excitation pulse, 290 ns optical pumping on two colors, and a
    /// 200 μs sympathetic cooling block every 100 attempts.
    pub fn paper() -> Self {
        let delta_397 = transition_detuning_rad_s(397e-9, 854e-9);
        let delta_866 = transition_detuning_rad_s(866e-9, 854e-9);
        // Upper-state lifetime of 6.9 ns.
        let gamma = 1.45e8;
        let ops = vec![
            CrosstalkOpSpec {
                name: "397 nm picosecond pulse".into(),
                omega_rad_s: TWO_PI * 5.0e10,
                delta_rad_s: delta_397,
                gamma_rad_s: gamma,
                tau_s: 10e-12,
                pol_coeff: 0.40,
                ops_per_attempt: 1.0,
                apply_beam_falloff: true,
            },
            CrosstalkOpSpec {
                name: "optical pumping 397 nm".into(),
                omega_rad_s: TWO_PI * 1.0e7,
                delta_rad_s: delta_397,
                gamma_rad_s: gamma,
                tau_s: 290e-9,
                pol_coeff: 0.01,
                ops_per_attempt: 1.0,
                apply_beam_falloff: false,
            },
            CrosstalkOpSpec {
                name: "optical pumping 866 nm".into(),
                omega_rad_s: TWO_PI * 5.0e6,
                delta_rad_s: delta_866,
                gamma_rad_s: gamma,
                tau_s: 290e-9,
                pol_coeff: 0.05,
                ops_per_attempt: 1.0,
                apply_beam_falloff: false,
            },
            CrosstalkOpSpec {
                name: "sympathetic cooling 397 nm".into(),
                omega_rad_s: TWO_PI * 1.0e7,
                delta_rad_s: delta_397,
                gamma_rad_s: gamma,
                tau_s: 200e-6,
                pol_coeff: 0.01,
                ops_per_attempt: 0.01,
                apply_beam_falloff: false,
            },
            CrosstalkOpSpec {
                name: "sympathetic cooling 866 nm".into(),
                omega_rad_s: TWO_PI * 1.0e6,
                delta_rad_s: delta_866,
                gamma_rad_s: gamma,
                tau_s: 200e-6,
                pol_coeff: 0.05,
                ops_per_attempt: 0.01,
                apply_beam_falloff: false,
            },
        ];
        CrosstalkScenario {
            ops,
            echo_alpha: 0.01,
            attempt_rate_hz: 5.0e3,
            beam_radius_m: 10e-6,
            ion_separation_m: 9e-6,
            base_nbar: 0.26,
            heating: HeatingParams {
                lambda_m: 397e-9,
                mass_kg: 40.0 * AMU,
                p_excite: 0.95,
                n_modes: 6,
                mode_freqs_rad_s: vec![
                    TWO_PI * 1.65e6,
                    TWO_PI * 1.55e6,
                    TWO_PI * 1.57e6,
                    TWO_PI * 1.47e6,
                ],
                pump_branch: 2.0 / 3.0,
                n_pump_rounds: 5,
            },
        }
    }
}

/// A complete named parameter set.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub node: NodeConfig,
    pub noise: NoiseParams,
    pub herald: HeraldParams,
    #[serde(default)]
    pub conversion: Option<ConversionModel>,
    #[serde(default)]
    pub crosstalk: Option<CrosstalkScenario>,
    pub infidelity_terms: Vec<(String, f64)>,
    #[serde(default)]
    pub default_output: Option<String>,
}

impl Scenario {
    pub fn validate(&self) -> crate::Result<()> {
        self.node.validate()?;
        self.noise.validate()?;
        self.herald.validate()?;
        if let Some(c) = &self.conversion {
            c.validate()?;
        }
        if let Some(ct) = &self.crosstalk {
            ct.heating.validate()?;
        }
        Ok(())
    }

    pub fn builtin_names() -> Vec<&'static str> {
        vec![
            "paper-3m",
            "paper-1km",
            "paper-12km",
            "paper-3m-future",
            "paper-1km-future",
            "paper-12km-future",
            "paper-s13",
        ]
    }

    pub fn builtin(name: &str) -> Option<Scenario> {
        let noise_3m = NoiseParams {
            t1_prime_s: 0.79,
            t2_s: 0.323,
            modulation: vec![
                ModTone {
                    freq_hz: 50.0,
                    amplitude_rad: 0.0,
                    phase_rad: 0.0,
                },
                ModTone {
                    freq_hz: 150.0,
                    amplitude_rad: 0.0,
                    phase_rad: 0.0,
                },
            ],
            snr: 749.0,
            raman_pi_fidelity: 0.992,
            merge_fidelity: 0.96,
        };
        let herald_for = |node: &NodeConfig| HeraldParams {
            // Single-photon interference collects one of the three
            // emission components: half the two-polarization weight.
            chi: node.branching_weight / 2.0,
            eta: node.per_attempt_probability() / node.branching_weight,
            scheme: HeraldScheme::SinglePhoton,
        };
        let terms = |values: [f64; 5]| -> Vec<(String, f64)> {
            [
                "Detector dark count and noise photon",
                "State detection",
                "729 nm rotation pulse",
                "850 nm / 854 nm Raman transition",
                "866 nm / 866 nm Raman transition",
            ]
            .iter()
            .zip(values.iter())
            .map(|(n, v)| (n.to_string(), *v))
            .collect()
        };
        let conversion_12km = ConversionModel {
            eta_max: 0.38,
            p_ref_w: 1.1,
            noise_per_nm_hz: 5000.0,
            filter_bandwidth_nm: bandwidth_nm(1558e-9, 200e6),
            dark_rate_hz: 10.0,
        };

        let mut sc = match name {
            "paper-3m" => {
                let node = NodeConfig {
                    objective_eff: 0.06,
                    fiber_coupling: 0.32,
                    fiber_transmission: 0.80,
                    other_optics: 0.75,
                    detector_eff: 0.40,
                    attempt_rate_hz: 264e3,
                    fiber_length_m: 3.0,
                    storage_tau_s: 0.02,
                    ..NodeConfig::default()
                };
                Scenario {
                    name: name.into(),
                    herald: herald_for(&node),
                    node,
                    noise: noise_3m,
                    conversion: None,
                    crosstalk: None,
                    infidelity_terms: terms([0.001, 0.005, 0.010, 0.008, 0.038]),
                    default_output: None,
                }
            }
            "paper-1km" => {
                let node = NodeConfig {
                    objective_eff: 0.06,
                    fiber_coupling: 0.32,
                    fiber_transmission: 0.32,
                    other_optics: 0.75,
                    detector_eff: 0.40,
                    attempt_rate_hz: 49e3,
                    fiber_length_m: 1000.0,
                    storage_tau_s: 0.1,
                    ..NodeConfig::default()
                };
                Scenario {
                    name: name.into(),
                    herald: herald_for(&node),
                    node,
                    noise: NoiseParams {
                        snr: 374.0,
                        ..noise_3m
                    },
                    conversion: None,
                    crosstalk: None,
                    infidelity_terms: terms([0.002, 0.005, 0.014, 0.012, 0.055]),
                    default_output: None,
                }
            }
            "paper-12km" | "paper-s13" => {
                let node = NodeConfig {
                    objective_eff: 0.06,
                    fiber_coupling: 0.32,
                    conversion_eff: Some(0.11),
                    fiber_transmission: 0.40,
                    other_optics: 0.31,
                    detector_eff: 0.65,
                    attempt_rate_hz: 5e3,
                    fiber_length_m: 12_000.0,
                    storage_tau_s: 0.1,
                    ..NodeConfig::default()
                };
                Scenario {
                    name: name.into(),
                    herald: herald_for(&node),
                    node,
                    noise: NoiseParams {
                        snr: 22.0,
                        ..noise_3m
                    },
                    conversion: Some(conversion_12km),
                    crosstalk: if name == "paper-s13" {
                        Some(CrosstalkScenario::paper())
                    } else {
                        None
                    },
                    infidelity_terms: terms([0.034, 0.005, 0.015, 0.012, 0.057]),
                    default_output: None,
                }
            }
            "paper-3m-future" => {
                let node = NodeConfig {
                    objective_eff: 0.09,
                    fiber_coupling: 0.50,
                    fiber_transmission: 0.90,
                    other_optics: 0.90,
                    detector_eff: 0.90,
                    attempt_rate_hz: 300e3,
                    fiber_length_m: 3.0,
                    storage_tau_s: 0.02,
                    ..NodeConfig::default()
                };
                Scenario {
                    name: name.into(),
                    herald: herald_for(&node),
                    node,
                    noise: noise_3m,
                    conversion: None,
                    crosstalk: None,
                    infidelity_terms: terms([0.001, 0.005, 0.010, 0.008, 0.038]),
                    default_output: None,
                }
            }
            "paper-1km-future" => {
                let node = NodeConfig {
                    objective_eff: 0.09,
                    fiber_coupling: 0.50,
                    fiber_transmission: 0.36,
                    other_optics: 0.90,
                    detector_eff: 0.90,
                    attempt_rate_hz: 80e3,
                    fiber_length_m: 1000.0,
                    storage_tau_s: 0.1,
                    ..NodeConfig::default()
                };
                Scenario {
                    name: name.into(),
                    herald: herald_for(&node),
                    node,
                    noise: NoiseParams {
                        snr: 374.0,
                        ..noise_3m
                    },
                    conversion: None,
                    crosstalk: None,
                    infidelity_terms: terms([0.002, 0.005, 0.014, 0.012, 0.055]),
                    default_output: None,
                }
            }
            "paper-12km-future" => {
                let node = NodeConfig {
                    objective_eff: 0.09,
                    fiber_coupling: 0.50,
                    conversion_eff: Some(0.50),
                    fiber_transmission: 0.50,
                    other_optics: 0.75,
                    detector_eff: 0.90,
                    // Multiplexed attempts sidestep the round-trip cap.
                    attempt_rate_hz: 80e3,
                    fiber_length_m: 12_000.0,
                    storage_tau_s: 0.1,
                    ..NodeConfig::default()
                };
                Scenario {
                    name: name.into(),
                    herald: herald_for(&node),
                    node,
                    noise: NoiseParams {
                        snr: 100.0,
                        ..noise_3m
                    },
                    conversion: Some(ConversionModel {
                        eta_max: 0.50,
                        ..conversion_12km
                    }),
                    crosstalk: None,
                    infidelity_terms: terms([0.034, 0.005, 0.015, 0.012, 0.057]),
                    default_output: None,
                }
            }
            _ => return None,
        };
        sc.name = name.to_string();
        Some(sc)
    }
}
