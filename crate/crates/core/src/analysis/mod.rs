//! Measurement simulation and estimation: tomography count sampling, MLE
//! reconstruction, visibility extraction, photon-arrival histogram fits
//! and the frequency-conversion efficiency / SNR model.

pub mod conversion;
pub mod histogram;
pub mod tomography;

pub use conversion::{conversion_snr, ConversionModel, ConversionPoint};
pub use histogram::{fit_histogram, histogram_pdf, sample_histogram, HistogramFit, HistogramModel};
pub use tomography::{
    exact_counts, fit_visibility_scan, mle_reconstruct, pauli_pair_settings, simulate_counts,
    visibilities_from_counts, visibilities_from_state, CountTable, MleResult, Pauli, SinusoidFit,
    VisibilityEstimate,
};
