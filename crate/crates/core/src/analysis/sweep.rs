//! Width of the narrow two-photon peak as the coupling detuning varies.

use crate::analysis::analytic::{analytic_linewidths, dressed_eigenvalues};
use crate::analysis::convolve::convolve_laser_linewidth;
use crate::analysis::fit::fit_lorentzian;
use crate::analysis::peaks::{find_peaks, nearest_peak};
use crate::doppler::{averaged_spectrum, FineWindow, Quadrature};
use crate::error::{Error, Result};
use crate::model::{FieldSpec, PeakFit, Spectrum, ValidConfig};
use crate::num::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepOptions<T> {
    pub fine: FineWindow<T>,
    /// Fraction of the fine-window dynamic range a peak must stand out by.
    pub min_prominence: T,
    /// Fit half-window in units of the analytic Δν+.
    pub fit_half_width: T,
}

impl<T: Real> Default for SweepOptions<T> {
    fn default() -> Self {
        Self {
            fine: FineWindow::default(),
            min_prominence: T::lit(0.02),
            fit_half_width: T::lit(5.0),
        }
    }
}

/// Measured narrow peak of one sweep row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NarrowPeak<T> {
    pub fwhm_numeric: T,
    /// Detected peak position (parabolic refinement of the sampled maximum).
    pub peak_center: T,
    pub fit: PeakFit<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow<T> {
    pub coupling_detuning: T,
    pub fwhm_analytic: Option<T>,
    pub outcome: std::result::Result<NarrowPeak<T>, String>,
}

impl<T: Real> SweepRow<T> {
    pub fn residual(&self) -> Option<T> {
        self.outcome.as_ref().ok().map(|p| p.fit.residual_norm)
    }
}

/// Locates and fits the peak nearest λ+ in a fine-window spectrum.
pub fn measure_narrow_peak<T: Real>(
    fine: &Spectrum<T>,
    coupling: &FieldSpec<T>,
    analytic_width: T,
    opts: &SweepOptions<T>,
) -> Result<NarrowPeak<T>> {
    let (plus, _) = dressed_eigenvalues(coupling);
    let peaks = find_peaks(fine, opts.min_prominence)?;
    let peak = nearest_peak(&peaks, plus).ok_or_else(|| {
        Error::InvalidArgument(format!("no peak detected near lambda+ = {plus} MHz"))
    })?;
    let half = opts.fit_half_width * analytic_width;
    let fit = fit_lorentzian(fine, (peak.detuning - half, peak.detuning + half))?;
    Ok(NarrowPeak {
        fwhm_numeric: fit.fwhm,
        peak_center: peak.refined_detuning(fine),
        fit,
    })
}

fn run_row<T: Real>(
    cfg: &ValidConfig<T>,
    delta_c: T,
    opts: &SweepOptions<T>,
    quad: &Quadrature<T>,
) -> (Option<T>, Result<NarrowPeak<T>>) {
    let coupling = FieldSpec {
        detuning: delta_c,
        ..*cfg.coupling()
    };
    let analytic = analytic_linewidths(cfg.atom(), cfg.ensemble(), &coupling).map(|p| p.nu_plus);
    let fwhm_analytic = analytic.as_ref().ok().copied();
    let measured = (|| {
        let width = analytic?;
        if !(delta_c.abs() > T::lit(2.0) * coupling.rabi) {
            return Err(Error::InvalidArgument(format!(
                "|coupling detuning| {delta_c} must exceed twice the coupling Rabi frequency {}",
                coupling.rabi
            )));
        }
        let row_cfg = cfg.with_coupling(coupling)?;
        let grid = opts.fine.grid(&coupling)?;
        let mut fine = averaged_spectrum(&row_cfg, &grid, quad)?;
        if let Some(lw) = row_cfg.combined_linewidth() {
            fine = convolve_laser_linewidth(&fine, lw)?;
        }
        measure_narrow_peak(&fine, &coupling, width, opts)
    })();
    (fwhm_analytic, measured)
}

/// One row per coupling detuning, in input order. A failing row records
/// its error and the sweep moves on.
pub fn sweep_linewidth<T: Real>(
    cfg: &ValidConfig<T>,
    detunings: &[T],
    opts: &SweepOptions<T>,
    quad: &Quadrature<T>,
) -> Vec<SweepRow<T>> {
    detunings
        .iter()
        .map(|&dc| {
            let (fwhm_analytic, outcome) = run_row(cfg, dc, opts, quad);
            SweepRow {
                coupling_detuning: dc,
                fwhm_analytic,
                outcome: outcome.map_err(|e| e.to_string()),
            }
        })
        .collect()
}
