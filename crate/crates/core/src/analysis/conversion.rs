//! Pump-power model of the telecom frequency-conversion stage: conversion
//! efficiency, filtered background noise and the resulting signal-to-noise
//! ratio.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

const SPEED_OF_LIGHT: f64 = 2.99792458e8;

/// Difference-frequency-generation conversion stage with spectral
/// filtering.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConversionModel {
    /// Peak waveguide conversion efficiency, reached at `p_ref_w`.
    pub eta_max: f64,
    /// Pump power of maximum conversion, W.
    pub p_ref_w: f64,
    /// Pump-induced Raman background density at the reference power, Hz/nm.
    pub noise_per_nm_hz: f64,
    /// Spectral width of the filter chain, nm.
    pub filter_bandwidth_nm: f64,
    /// Detector dark-count rate, Hz.
    pub dark_rate_hz: f64,
}

impl ConversionModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta_max) {
            return Err(Error::InvalidParameter("eta_max outside [0,1]".into()));
        }
        if self.p_ref_w <= 0.0
            || self.noise_per_nm_hz < 0.0
            || self.filter_bandwidth_nm < 0.0
            || self.dark_rate_hz < 0.0
        {
            return Err(Error::InvalidParameter(
                "bad conversion model parameters".into(),
            ));
        }
        Ok(())
    }
}

/// Filter bandwidth in nm for a frequency window `bandwidth_hz` centred at
/// `wavelength_m`: Δλ = λ²Δν/c.
pub fn bandwidth_nm(wavelength_m: f64, bandwidth_hz: f64) -> f64 {
    wavelength_m * wavelength_m * bandwidth_hz / SPEED_OF_LIGHT * 1e9
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConversionPoint {
    pub efficiency: f64,
    pub noise_rate_hz: f64,
    pub snr: f64,
}

/// Evaluate the conversion stage at a pump power: the efficiency follows
/// the sin² pump curve of a DFG waveguide anchored at the reference power,
/// the Raman background scales linearly with pump power inside the filter
/// window, and the dark counts are power-independent.
pub fn conversion_snr(
    model: &ConversionModel,
    pump_w: f64,
    signal_rate_hz: f64,
) -> Result<ConversionPoint> {
    model.validate()?;
    if pump_w < 0.0 || signal_rate_hz < 0.0 {
        return Err(Error::InvalidParameter(
            "pump power and signal must be ≥ 0".into(),
        ));
    }
    let x = (pump_w / model.p_ref_w).sqrt() * std::f64::consts::FRAC_PI_2;
    let efficiency = model.eta_max * x.sin() * x.sin();
    let raman = model.noise_per_nm_hz * model.filter_bandwidth_nm * (pump_w / model.p_ref_w);
    let noise_rate_hz = raman + model.dark_rate_hz;
    let snr = if noise_rate_hz > 0.0 {
        signal_rate_hz / noise_rate_hz
    } else {
        f64::INFINITY
    };
    Ok(ConversionPoint {
        efficiency,
        noise_rate_hz,
        snr,
    })
}
