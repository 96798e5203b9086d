//! Maxwell-Boltzmann velocity averaging and Beer-Lambert transmission.

use rayon::prelude::*;

use crate::analysis::analytic::dressed_eigenvalues;
use crate::bloch::{response_at, VelocityClass};
use crate::error::{Error, Result};
use crate::model::{
    FieldSpec, Quantity, ScanGrid, SimulationRecord, Spectrum, SpectrumMeta, ValidConfig,
};
use crate::num::Real;

/// FWHM / σ of a Gaussian, 2√(2 ln 2).
pub fn fwhm_to_sigma<T: Real>(fwhm: T) -> T {
    fwhm / (T::lit(2.0) * (T::lit(2.0) * T::LN_2()).sqrt())
}

pub const DEFAULT_NODES: usize = 2001;
pub const DEFAULT_SPAN: f64 = 4.0;

/// Doppler-shift nodes (MHz) and normalized weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    span: T,
}

impl<T: Real> Quadrature<T> {
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }
    pub fn weights(&self) -> &[T] {
        &self.weights
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    /// Half-width of the node range in units of σ.
    pub fn span(&self) -> T {
        self.span
    }

    /// Σ wⱼ f(xⱼ), accumulated in node order.
    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (x, w)| acc + *w * f(*x))
    }
}

/// Trapezoidal rule on `n` uniform nodes over ±`span`·σ with Gaussian
/// weights, renormalized to sum to one.
pub fn gaussian_quadrature<T: Real>(doppler_fwhm: T, n: usize, span: T) -> Result<Quadrature<T>> {
    if n < 11 || n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "quadrature needs an odd node count >= 11, got {n}"
        )));
    }
    if !(span >= T::lit(3.0)) || !span.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "quadrature span must be >= 3 sigma, got {span}"
        )));
    }
    if !(doppler_fwhm > T::zero()) || !doppler_fwhm.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Doppler FWHM must be > 0, got {doppler_fwhm}"
        )));
    }
    let sigma = fwhm_to_sigma(doppler_fwhm);
    let m = T::from_usize_lossy(n - 1);
    let half = T::lit(0.5);
    let nodes: Vec<T> = (0..n)
        .map(|k| {
            // Integer numerator keeps the nodes exactly antisymmetric.
            let num = 2 * k as i64 - (n as i64 - 1);
            sigma * span * T::from_i64(num).unwrap() / m
        })
        .collect();
    let raw: Vec<T> = nodes
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let u = *x / sigma;
            let g = (-half * u * u).exp();
            if k == 0 || k == n - 1 {
                g * half
            } else {
                g
            }
        })
        .collect();
    let total: T = raw.iter().copied().sum();
    let weights = raw.into_iter().map(|w| w / total).collect();
    Ok(Quadrature {
        nodes,
        weights,
        span,
    })
}

/// Default quadrature for a Doppler width.
pub fn default_quadrature<T: Real>(doppler_fwhm: T) -> Result<Quadrature<T>> {
    gaussian_quadrature(doppler_fwhm, DEFAULT_NODES, T::lit(DEFAULT_SPAN))
}

fn record<T: Real>(cfg: &ValidConfig<T>, quad: &Quadrature<T>) -> SimulationRecord<T> {
    SimulationRecord {
        atom: *cfg.atom(),
        ensemble: *cfg.ensemble(),
        probe: *cfg.probe(),
        coupling: *cfg.coupling(),
        quadrature_nodes: quad.len(),
        quadrature_span: quad.span(),
    }
}

/// Velocity-averaged absorption at each probe detuning in `detunings`.
/// Grid points are evaluated in parallel; each point sums its velocity
/// classes in node order, so results do not depend on the thread count.
pub fn averaged_absorption<T: Real>(
    cfg: &ValidConfig<T>,
    detunings: &[T],
    quad: &Quadrature<T>,
) -> Result<Vec<T>> {
    let atom = *cfg.atom();
    let coupling = *cfg.coupling();
    let ens = *cfg.ensemble();
    detunings
        .par_iter()
        .map(|&dp| {
            let probe = FieldSpec {
                detuning: dp,
                ..*cfg.probe()
            };
            let mut acc = T::zero();
            for (&x, &w) in quad.nodes().iter().zip(quad.weights()) {
                let a = response_at(
                    &atom,
                    &probe,
                    &coupling,
                    ens.p1_init,
                    ens.p2_init,
                    VelocityClass(x),
                )
                .map_err(|e| Error::SolverAt {
                    detuning: dp.as_f64(),
                    doppler_shift: x.as_f64(),
                    source: Box::new(e),
                })?;
                acc += w * a;
            }
            Ok(acc)
        })
        .collect()
}

/// Doppler-averaged normalized absorption over a probe scan.
pub fn averaged_spectrum<T: Real>(
    cfg: &ValidConfig<T>,
    grid: &ScanGrid<T>,
    quad: &Quadrature<T>,
) -> Result<Spectrum<T>> {
    let detunings = grid.points();
    let values = averaged_absorption(cfg, &detunings, quad)?;
    Spectrum::new(
        detunings,
        values,
        SpectrumMeta {
            quantity: Quantity::Absorption,
            record: Some(record(cfg, quad)),
            laser_linewidth: None,
            od0: None,
        },
    )
}

/// Fine window placed on the upper dressed state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FineWindow<T> {
    pub half_width: T,
    pub step: T,
}

impl<T: Real> Default for FineWindow<T> {
    fn default() -> Self {
        Self {
            half_width: T::lit(25.0),
            step: T::lit(0.05),
        }
    }
}

impl<T: Real> FineWindow<T> {
    /// Grid centered on λ+ of the configured coupling field.
    pub fn grid(&self, coupling: &FieldSpec<T>) -> Result<ScanGrid<T>> {
        let (plus, _) = dressed_eigenvalues(coupling);
        ScanGrid::centered(plus, self.half_width, self.step)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoPassSpectrum<T> {
    pub coarse: Spectrum<T>,
    pub fine: Spectrum<T>,
}

/// Coarse scan over the full span plus a fine scan around λ+, where the
/// narrow two-photon peak sits.
pub fn two_pass_spectrum<T: Real>(
    cfg: &ValidConfig<T>,
    coarse: &ScanGrid<T>,
    fine: &FineWindow<T>,
    quad: &Quadrature<T>,
) -> Result<TwoPassSpectrum<T>> {
    Ok(TwoPassSpectrum {
        coarse: averaged_spectrum(cfg, coarse, quad)?,
        fine: averaged_spectrum(cfg, &fine.grid(cfg.coupling())?, quad)?,
    })
}

/// Beer-Lambert transmission `exp(−od0 · a)`.
pub fn transmission<T: Real>(spec: &Spectrum<T>, od0: T) -> Result<Spectrum<T>> {
    if !(od0 >= T::zero()) || !od0.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "optical depth must be >= 0, got {od0}"
        )));
    }
    if spec.meta.quantity != Quantity::Absorption {
        return Err(Error::InvalidArgument(
            "transmission needs an absorption spectrum".into(),
        ));
    }
    let values = spec.values().iter().map(|a| (-od0 * *a).exp()).collect();
    let meta = SpectrumMeta {
        quantity: Quantity::Transmission,
        od0: Some(od0),
        ..spec.meta
    };
    Ok(spec.with_values(values, meta))
}

/// Optical depth giving peak absorption `target` when the normalized peak
/// absorption is `a_peak`.
pub fn od_for_peak_absorption<T: Real>(target: T, a_peak: T) -> Result<T> {
    if !(target >= T::zero() && target < T::one()) {
        return Err(Error::InvalidArgument(format!(
            "target peak absorption must lie in [0, 1), got {target}"
        )));
    }
    if !(a_peak > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "peak normalized absorption must be > 0, got {a_peak}"
        )));
    }
    Ok(-(T::one() - target).ln() / a_peak + T::zero())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Calibration<T> {
    pub od0: T,
    /// Maximum of the no-coupling spectrum.
    pub a_peak: T,
}

/// Calibrates the optical depth against the no-coupling line: the returned
/// `od0` makes its peak absorb the fraction `target`.
pub fn calibrate_od<T: Real>(
    target: T,
    cfg: &ValidConfig<T>,
    quad: &Quadrature<T>,
) -> Result<Calibration<T>> {
    // Reject a bad target before paying for a spectrum.
    od_for_peak_absorption(target, T::one())?;
    let uncoupled = cfg.with_coupling(FieldSpec::off())?;
    // The uncoupled profile is even with its maximum at zero detuning.
    let grid = ScanGrid::new(T::lit(-10.0), T::lit(10.0), 201)?;
    let spec = averaged_spectrum(&uncoupled, &grid, quad)?;
    let (_, a_peak) = spec.argmax().expect("non-empty grid");
    Ok(Calibration {
        od0: od_for_peak_absorption(target, a_peak)?,
        a_peak,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{cesium_d2_preset, default_probe, validate};

    #[test]
    fn sigma_conversion() {
        let q = gaussian_quadrature(560.0f64, 2001, 4.0).unwrap();
        let sigma = fwhm_to_sigma(560.0f64);
        assert!((sigma - 237.81).abs() < 0.005, "{sigma}");
        assert!((q.nodes()[2000] - 4.0 * sigma).abs() < 1e-9);
        let total: f64 = q.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nodes_symmetric_and_increasing() {
        let q = gaussian_quadrature(560.0f64, 101, 5.0).unwrap();
        let n = q.len();
        for k in 0..n {
            assert!((q.nodes()[k] + q.nodes()[n - 1 - k]).abs() < 1e-9);
        }
        assert!(q.nodes().windows(2).all(|w| w[1] > w[0]));
        let (imax, _) =
            q.weights()
                .iter()
                .enumerate()
                .fold((0, 0.0), |b, (i, w)| if *w > b.1 { (i, *w) } else { b });
        assert_eq!(imax, n / 2);
        assert_eq!(q.nodes()[n / 2], 0.0);
    }

    #[test]
    fn invalid_quadrature_arguments() {
        assert!(gaussian_quadrature(560.0f64, 10, 4.0).is_err());
        assert!(gaussian_quadrature(560.0f64, 12, 4.0).is_err());
        assert!(gaussian_quadrature(560.0f64, 9, 4.0).is_err());
        assert!(gaussian_quadrature(560.0f64, 11, 2.5).is_err());
        assert!(gaussian_quadrature(0.0f64, 11, 4.0).is_err());
    }

    #[test]
    fn transmission_limits() {
        let m = SpectrumMeta::external(Quantity::Absorption);
        let s = Spectrum::new(vec![0.0f64, 1.0, 2.0], vec![0.0, 0.5, 1.0], m).unwrap();
        let t = transmission(&s, 0.0).unwrap();
        assert!(t.values().iter().all(|v| *v == 1.0));
        let t = transmission(&s, -(0.48f64).ln()).unwrap();
        assert!((t.values()[2] - 0.48).abs() < 1e-12);
        assert!(t.values().windows(2).all(|w| w[1] < w[0]));
        assert!(transmission(&s, -1.0).is_err());
        assert!(transmission(&t, 1.0).is_err());
    }

    #[test]
    fn od_inversion() {
        let od = od_for_peak_absorption(0.52f64, 1.0).unwrap();
        assert!((od - 0.734).abs() < 5e-4, "{od}");
        assert!((od_for_peak_absorption(0.52f64, 0.01).unwrap() - od / 0.01).abs() < 1e-9);
        assert_eq!(od_for_peak_absorption(0.0f64, 0.5).unwrap(), 0.0);
        assert!(od_for_peak_absorption(1.0f64, 0.5).is_err());
        assert!(od_for_peak_absorption(-0.1f64, 0.5).is_err());
    }

    #[test]
    fn small_od_limit() {
        let a = od_for_peak_absorption(1e-9f64, 1.0).unwrap();
        assert!(a > 0.0 && a < 2e-9);
    }

    #[test]
    fn averaged_spectrum_is_deterministic() {
        let (a, e, c) = cesium_d2_preset::<f64>();
        let cfg = validate(a, e, default_probe(), c).unwrap();
        let q = gaussian_quadrature(560.0, 101, 4.0).unwrap();
        let g = ScanGrid::new(-50.0, 50.0, 11).unwrap();
        let s1 = averaged_spectrum(&cfg, &g, &q).unwrap();
        let s2 = averaged_spectrum(&cfg, &g, &q).unwrap();
        assert_eq!(s1, s2);
        assert!(s1.values().iter().all(|v| *v >= -1e-9));
    }
}
