//! Physical parameter types, the cesium D2 preset and configuration
//! validation.
//!
//! Units: every frequency, rate, Rabi frequency and detuning is an ordinary
//! frequency in MHz. Factors of 2π are absorbed uniformly, so a decay rate
//! quoted as "2π × 5.3 MHz" enters as `5.3`.

use crate::error::{Error, Result, ValidationReport};
use crate::num::Real;

/// Decay constants of the Λ system.
///
/// `gamma12` is the ground-state relaxation rate: it damps the ground
/// coherence ρ12 and relaxes the level populations back toward the initial
/// ground distribution (transit-type refresh of the interrogated atoms).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtomSpec<T> {
    /// Spontaneous decay |3⟩ → |1⟩ (MHz).
    pub gamma31: T,
    /// Spontaneous decay |3⟩ → |2⟩ (MHz).
    pub gamma32: T,
    /// Ground-state relaxation (MHz).
    pub gamma12: T,
}

impl<T: Real> AtomSpec<T> {
    pub fn gamma_sum(&self) -> T {
        self.gamma31 + self.gamma32
    }
}

/// One laser field. The Rabi frequency is normalized so that a resonant
/// field splits the addressed level into a doublet separated by `2 * rabi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSpec<T> {
    /// Ω (MHz).
    pub rabi: T,
    /// Δ = laser − transition (MHz), positive toward the blue.
    pub detuning: T,
    /// Laser linewidth FWHM (MHz), if known.
    pub linewidth: Option<T>,
}

impl<T: Real> FieldSpec<T> {
    pub fn new(rabi: T, detuning: T) -> Self {
        Self {
            rabi,
            detuning,
            linewidth: None,
        }
    }

    pub fn off() -> Self {
        Self::new(T::zero(), T::zero())
    }
}

/// Thermal ensemble: Doppler width and the ground populations atoms carry
/// into the beam.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleSpec<T> {
    /// Full Doppler width D (FWHM, MHz).
    pub doppler_fwhm: T,
    pub p1_init: T,
    pub p2_init: T,
}

impl<T: Real> EnsembleSpec<T> {
    /// Populations weighted by the cesium F=3 / F=4 sublevel counts (7 and 9).
    pub fn cesium_degeneracy_weighted(doppler_fwhm: T) -> Self {
        Self {
            doppler_fwhm,
            p1_init: T::lit(7.0 / 16.0),
            p2_init: T::lit(9.0 / 16.0),
        }
    }
}

/// Cesium D2 constants in MHz.
pub mod cesium {
    /// Total excited-state decay, from the 30 ns lifetime.
    pub const GAMMA_SUM: f64 = 5.3;
    pub const DOPPLER_FWHM: f64 = 560.0;
    pub const COUPLING_RABI: f64 = 90.0;
    pub const GROUND_RELAXATION: f64 = 0.001;
    /// Weak compared to both Γ and the ground relaxation, so the probe
    /// neither power-broadens the line nor optically pumps |1⟩.
    pub const PROBE_RABI: f64 = 0.001;
    pub const GROUND_SPLITTING: f64 = 9_192.631_770;
}

/// Cesium D2 preset: equal branching of Γ = 5.3 MHz, D = 560 MHz, symmetric
/// ground populations, and a resonant 90 MHz coupling field.
pub fn cesium_d2_preset<T: Real>() -> (AtomSpec<T>, EnsembleSpec<T>, FieldSpec<T>) {
    let half = T::lit(cesium::GAMMA_SUM / 2.0);
    let atom = AtomSpec {
        gamma31: half,
        gamma32: half,
        gamma12: T::lit(cesium::GROUND_RELAXATION),
    };
    let ensemble = EnsembleSpec {
        doppler_fwhm: T::lit(cesium::DOPPLER_FWHM),
        p1_init: T::lit(0.5),
        p2_init: T::lit(0.5),
    };
    let coupling = FieldSpec::new(T::lit(cesium::COUPLING_RABI), T::zero());
    (atom, ensemble, coupling)
}

/// Weak resonant probe used with the preset.
pub fn default_probe<T: Real>() -> FieldSpec<T> {
    FieldSpec::new(T::lit(cesium::PROBE_RABI), T::zero())
}

/// Inputs that passed [`validate`]. Construction is only possible through it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidConfig<T> {
    atom: AtomSpec<T>,
    ensemble: EnsembleSpec<T>,
    probe: FieldSpec<T>,
    coupling: FieldSpec<T>,
}

impl<T: Real> ValidConfig<T> {
    pub fn atom(&self) -> &AtomSpec<T> {
        &self.atom
    }
    pub fn ensemble(&self) -> &EnsembleSpec<T> {
        &self.ensemble
    }
    pub fn probe(&self) -> &FieldSpec<T> {
        &self.probe
    }
    pub fn coupling(&self) -> &FieldSpec<T> {
        &self.coupling
    }

    /// Same configuration with a different coupling field.
    pub fn with_coupling(&self, coupling: FieldSpec<T>) -> Result<Self> {
        validate(self.atom, self.ensemble, self.probe, coupling)
    }

    pub fn with_ensemble(&self, ensemble: EnsembleSpec<T>) -> Result<Self> {
        validate(self.atom, ensemble, self.probe, self.coupling)
    }

    /// Total laser linewidth seen by the two-photon feature, if any was given.
    pub fn combined_linewidth(&self) -> Option<T> {
        match (self.probe.linewidth, self.coupling.linewidth) {
            (None, None) => None,
            (a, b) => Some(a.unwrap_or_else(T::zero) + b.unwrap_or_else(T::zero)),
        }
    }
}

/// Tolerance on `p1_init + p2_init = 1`.
const POPULATION_SUM_TOL: f64 = 1e-9;

fn check_finite<T: Real>(report: &mut ValidationReport, field: &'static str, x: T) -> bool {
    if x.is_finite() {
        true
    } else {
        report.push(field, format!("must be finite, got {x}"));
        false
    }
}

fn check_field<T: Real>(
    report: &mut ValidationReport,
    names: [&'static str; 3],
    field: &FieldSpec<T>,
) {
    if check_finite(report, names[0], field.rabi) && field.rabi < T::zero() {
        report.push(names[0], format!("must be >= 0, got {}", field.rabi));
    }
    check_finite(report, names[1], field.detuning);
    if let Some(lw) = field.linewidth {
        if check_finite(report, names[2], lw) && lw < T::zero() {
            report.push(names[2], format!("must be >= 0, got {lw}"));
        }
    }
}

/// Checks every invariant of the four parameter records and collects all
/// violations instead of stopping at the first.
pub fn validate<T: Real>(
    atom: AtomSpec<T>,
    ensemble: EnsembleSpec<T>,
    probe: FieldSpec<T>,
    coupling: FieldSpec<T>,
) -> Result<ValidConfig<T>> {
    let mut r = ValidationReport::default();

    let g31_ok = check_finite(&mut r, "gamma31", atom.gamma31);
    let g32_ok = check_finite(&mut r, "gamma32", atom.gamma32);
    if g31_ok && atom.gamma31 < T::zero() {
        r.push("gamma31", format!("must be >= 0, got {}", atom.gamma31));
    }
    if g32_ok && atom.gamma32 < T::zero() {
        r.push("gamma32", format!("must be >= 0, got {}", atom.gamma32));
    }
    if g31_ok && g32_ok && atom.gamma_sum() <= T::zero() {
        r.push("gamma31", "gamma31 + gamma32 must be > 0");
    }
    if check_finite(&mut r, "gamma12", atom.gamma12) && atom.gamma12 < T::zero() {
        r.push("gamma12", format!("must be >= 0, got {}", atom.gamma12));
    }

    if check_finite(&mut r, "doppler_fwhm", ensemble.doppler_fwhm)
        && ensemble.doppler_fwhm <= T::zero()
    {
        r.push(
            "doppler_fwhm",
            format!("must be > 0, got {}", ensemble.doppler_fwhm),
        );
    }
    let p1_ok = check_finite(&mut r, "p1_init", ensemble.p1_init);
    let p2_ok = check_finite(&mut r, "p2_init", ensemble.p2_init);
    if p1_ok && ensemble.p1_init < T::zero() {
        r.push("p1_init", format!("must be >= 0, got {}", ensemble.p1_init));
    }
    if p2_ok && ensemble.p2_init < T::zero() {
        r.push("p2_init", format!("must be >= 0, got {}", ensemble.p2_init));
    }
    if p1_ok && p2_ok {
        let sum = ensemble.p1_init + ensemble.p2_init;
        if (sum - T::one()).abs() > T::lit(POPULATION_SUM_TOL) {
            r.push(
                "p1_init",
                format!("p1_init + p2_init must equal 1, got {sum}"),
            );
        }
    }

    check_field(
        &mut r,
        ["probe_rabi", "probe_detuning", "probe_linewidth"],
        &probe,
    );
    if probe.rabi == T::zero() {
        r.push(
            "probe_rabi",
            "probe response undefined at zero probe Rabi frequency",
        );
    }
    check_field(
        &mut r,
        ["coupling_rabi", "coupling_detuning", "coupling_linewidth"],
        &coupling,
    );

    if r.is_empty() {
        Ok(ValidConfig {
            atom,
            ensemble,
            probe,
            coupling,
        })
    } else {
        Err(Error::Validation(r))
    }
}

/// Uniform probe-detuning grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanGrid<T> {
    start: T,
    stop: T,
    n: usize,
}

impl<T: Real> ScanGrid<T> {
    pub fn new(start: T, stop: T, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 points, got {n}"
            )));
        }
        if !(start.is_finite() && stop.is_finite()) || stop <= start {
            return Err(Error::InvalidArgument(format!(
                "grid stop ({stop}) must exceed start ({start})"
            )));
        }
        Ok(Self { start, stop, n })
    }

    /// Grid of spacing close to `step` covering `center ± half_width`.
    pub fn centered(center: T, half_width: T, step: T) -> Result<Self> {
        if !(step > T::zero()) || !(half_width > T::zero()) {
            return Err(Error::InvalidArgument(
                "window half-width and step must be > 0".into(),
            ));
        }
        let intervals = ((half_width + half_width) / step)
            .round()
            .to_usize()
            .unwrap_or(1)
            .max(1);
        Self::new(center - half_width, center + half_width, intervals + 1)
    }

    pub fn start(&self) -> T {
        self.start
    }
    pub fn stop(&self) -> T {
        self.stop
    }
    pub fn len(&self) -> usize {
        self.n
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn step(&self) -> T {
        (self.stop - self.start) / T::from_usize_lossy(self.n - 1)
    }

    pub fn point(&self, i: usize) -> T {
        if i + 1 == self.n {
            self.stop
        } else {
            self.start + self.step() * T::from_usize_lossy(i)
        }
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.n).map(|i| self.point(i)).collect()
    }
}

/// What the sample values of a [`Spectrum`] represent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    /// Normalized absorption: 1 for a resonant, fully populated, stationary
    /// two-level atom in the weak-probe limit.
    Absorption,
    /// Beer-Lambert transmission.
    Transmission,
}

/// Parameters that produced a simulated spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationRecord<T> {
    pub atom: AtomSpec<T>,
    pub ensemble: EnsembleSpec<T>,
    pub probe: FieldSpec<T>,
    pub coupling: FieldSpec<T>,
    pub quadrature_nodes: usize,
    pub quadrature_span: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumMeta<T> {
    pub quantity: Quantity,
    /// `None` for spectra read from files or built synthetically.
    pub record: Option<SimulationRecord<T>>,
    /// Total Lorentzian laser linewidth folded in, if any.
    pub laser_linewidth: Option<T>,
    pub od0: Option<T>,
}

impl<T> SpectrumMeta<T> {
    pub fn external(quantity: Quantity) -> Self {
        Self {
            quantity,
            record: None,
            laser_linewidth: None,
            od0: None,
        }
    }
}

/// Sampled probe spectrum on strictly increasing detunings (MHz).
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<T> {
    detunings: Vec<T>,
    values: Vec<T>,
    pub meta: SpectrumMeta<T>,
}

impl<T: Real> Spectrum<T> {
    pub fn new(detunings: Vec<T>, values: Vec<T>, meta: SpectrumMeta<T>) -> Result<Self> {
        if detunings.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} detunings but {} samples",
                detunings.len(),
                values.len()
            )));
        }
        if let Some(i) = detunings.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(format!(
                "detunings not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(Self {
            detunings,
            values,
            meta,
        })
    }

    pub fn detunings(&self) -> &[T] {
        &self.detunings
    }

    /// Sample values; absorption or transmission according to `meta.quantity`.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index and value of the largest sample (first one on ties).
    pub fn argmax(&self) -> Option<(usize, T)> {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold(None, |best, (i, v)| match best {
                Some((_, b)) if v <= b => best,
                _ => Some((i, v)),
            })
    }

    pub fn min_value(&self) -> Option<T> {
        self.values.iter().copied().reduce(T::min)
    }

    /// Grid spacing if the detunings are uniform to `rel_tol` of the mean step.
    pub fn uniform_step(&self, rel_tol: T) -> Option<T> {
        let n = self.detunings.len();
        if n < 2 {
            return None;
        }
        let step = (self.detunings[n - 1] - self.detunings[0]) / T::from_usize_lossy(n - 1);
        let uniform = self
            .detunings
            .windows(2)
            .all(|w| ((w[1] - w[0]) - step).abs() <= rel_tol * step);
        uniform.then_some(step)
    }

    /// Samples with `lo <= detuning <= hi`.
    pub fn window(&self, lo: T, hi: T) -> Self {
        let (d, v): (Vec<T>, Vec<T>) = self
            .detunings
            .iter()
            .zip(&self.values)
            .filter(|(d, _)| **d >= lo && **d <= hi)
            .map(|(d, v)| (*d, *v))
            .unzip();
        Self {
            detunings: d,
            values: v,
            meta: self.meta,
        }
    }

    /// Same grid and metadata with replaced sample values.
    pub(crate) fn with_values(&self, values: Vec<T>, meta: SpectrumMeta<T>) -> Self {
        debug_assert_eq!(values.len(), self.detunings.len());
        Self {
            detunings: self.detunings.clone(),
            values,
            meta,
        }
    }
}

/// Result of a Lorentzian line fit,
/// `offset + amplitude * (fwhm/2)^2 / ((x - center)^2 + (fwhm/2)^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakFit<T> {
    pub center: T,
    pub fwhm: T,
    pub amplitude: T,
    pub offset: T,
    /// RMS of model minus data over the fitted samples.
    pub residual_norm: T,
    pub iterations: usize,
}

impl<T: Real> PeakFit<T> {
    pub fn eval(&self, x: T) -> T {
        lorentzian(x, self.center, self.fwhm, self.amplitude, self.offset)
    }
}

#[inline]
pub(crate) fn lorentzian<T: Real>(x: T, center: T, fwhm: T, amplitude: T, offset: T) -> T {
    let h = fwhm / T::lit(2.0);
    let u = x - center;
    offset + amplitude * h * h / (u * u + h * h)
}
