#![allow(dead_code)]

use subdoppler::config::RunConfig;
use subdoppler::doppler::{averaged_spectrum, default_quadrature, gaussian_quadrature, Quadrature};
use subdoppler::model::{FieldSpec, ScanGrid, Spectrum, ValidConfig};

pub fn preset() -> ValidConfig<f64> {
    RunConfig::<f64>::default().validated().unwrap()
}

pub fn with_coupling(cfg: &ValidConfig<f64>, rabi: f64, detuning: f64) -> ValidConfig<f64> {
    cfg.with_coupling(FieldSpec::new(rabi, detuning)).unwrap()
}

pub fn quad(cfg: &ValidConfig<f64>) -> Quadrature<f64> {
    default_quadrature(cfg.ensemble().doppler_fwhm).unwrap()
}

pub fn quad_n(cfg: &ValidConfig<f64>, n: usize) -> Quadrature<f64> {
    gaussian_quadrature(cfg.ensemble().doppler_fwhm, n, 4.0).unwrap()
}

pub fn spectrum(cfg: &ValidConfig<f64>, start: f64, stop: f64, n: usize) -> Spectrum<f64> {
    let grid = ScanGrid::new(start, stop, n).unwrap();
    averaged_spectrum(cfg, &grid, &quad(cfg)).unwrap()
}

/// Full width at half maximum of the global peak, from linearly
/// interpolated half-maximum crossings.
pub fn half_max_width(spec: &Spectrum<f64>) -> f64 {
    let x = spec.detunings();
    let y = spec.values();
    let (k, peak) = spec.argmax().unwrap();
    let half = peak / 2.0;
    let cross = |i: usize, j: usize| x[i] + (half - y[i]) * (x[j] - x[i]) / (y[j] - y[i]);
    let left = (0..k).rev().find(|&i| y[i] < half).unwrap();
    let right = (k + 1..x.len()).find(|&i| y[i] < half).unwrap();
    cross(right - 1, right) - cross(left, left + 1)
}

/// Olivero-Longbothum approximation to the Voigt FWHM.
pub fn voigt_fwhm(lorentz: f64, gauss: f64) -> f64 {
    0.5346 * lorentz + (0.2166 * lorentz * lorentz + gauss * gauss).sqrt()
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
