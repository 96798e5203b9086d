//! Rotating-frame master equation of the Λ system for a single velocity
//! class, its steady state, and the probe absorption it implies.
//!
//! Basis order is {|1⟩, |2⟩, |3⟩}: the probe drives |1⟩–|3⟩, the coupling
//! field drives |2⟩–|3⟩. The density matrix is vectorized row-major,
//! `vec(ρ)[3 i + j] = ρ_ij`.

use std::ops::{Add, Sub};

use crate::error::{Error, Result};
use crate::linalg::lu_solve;
use crate::model::{AtomSpec, FieldSpec};
use crate::num::{c, re, Real, C};

const DIM: usize = 3;
const VDIM: usize = DIM * DIM;

#[inline]
const fn idx(i: usize, j: usize) -> usize {
    DIM * i + j
}

/// Doppler shift k·v of one velocity class, in MHz. Probe and coupling
/// co-propagate at nearly equal wavelength, so both see the same shift.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VelocityClass<T>(pub T);

impl<T: Real> VelocityClass<T> {
    pub fn doppler_shift(&self) -> T {
        self.0
    }
}

/// Linear map on vectorized density matrices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Superop<T>(pub [[C<T>; VDIM]; VDIM]);

impl<T: Real> Superop<T> {
    pub fn zero() -> Self {
        Superop([[C::new(T::zero(), T::zero()); VDIM]; VDIM])
    }

    pub fn apply(&self, v: &[C<T>; VDIM]) -> [C<T>; VDIM] {
        let mut out = [C::new(T::zero(), T::zero()); VDIM];
        for (o, row) in out.iter_mut().zip(&self.0) {
            *o = row.iter().zip(v).map(|(a, b)| *a * *b).sum();
        }
        out
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .map(|z| z.norm())
            .fold(T::zero(), T::max)
    }

    /// Largest modulus of `Σ_k G[(k,k), col]` over all columns: zero for a
    /// trace-preserving map.
    pub fn trace_defect(&self) -> T {
        (0..VDIM)
            .map(|col| {
                (0..DIM)
                    .map(|k| self.0[idx(k, k)][col])
                    .sum::<C<T>>()
                    .norm()
            })
            .fold(T::zero(), T::max)
    }
}

impl<T: Real> Add for Superop<T> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += *y;
            }
        }
        self
    }
}

impl<T: Real> Sub for Superop<T> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            for (x, y) in a.iter_mut().zip(b) {
                *x -= *y;
            }
        }
        self
    }
}

/// Rotating-frame Hamiltonian (MHz) for effective detunings
/// Δp′ = Δp − δD and Δc′ = Δc − δD:
///
/// ```text
/// | 0    0          Ωp  |
/// | 0    Δp′ − Δc′  Ωc  |
/// | Ωp   Ωc         Δp′ |
/// ```
pub fn hamiltonian<T: Real>(
    probe: &FieldSpec<T>,
    coupling: &FieldSpec<T>,
    v: VelocityClass<T>,
) -> [[T; DIM]; DIM] {
    let dp = probe.detuning - v.0;
    let dc = coupling.detuning - v.0;
    let z = T::zero();
    [
        [z, z, probe.rabi],
        [z, dp - dc, coupling.rabi],
        [probe.rabi, coupling.rabi, dp],
    ]
}

/// `ρ ↦ −i[H, ρ]`.
pub fn coherent_part<T: Real>(
    probe: &FieldSpec<T>,
    coupling: &FieldSpec<T>,
    v: VelocityClass<T>,
) -> Superop<T> {
    let h = hamiltonian(probe, coupling, v);
    let mut g = Superop::zero();
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                // −i H_ik ρ_kj
                g.0[idx(i, j)][idx(k, j)] = g.0[idx(i, j)][idx(k, j)] + c(T::zero(), -h[i][k]);
                // +i ρ_ik H_kj
                g.0[idx(i, j)][idx(i, k)] = g.0[idx(i, j)][idx(i, k)] + c(T::zero(), h[k][j]);
            }
        }
    }
    g
}

/// Lindblad dissipator of the jump `√rate |to⟩⟨from|`.
pub fn decay_channel<T: Real>(rate: T, from: usize, to: usize) -> Superop<T> {
    let mut g = Superop::zero();
    if rate == T::zero() {
        return g;
    }
    let half = re(rate / T::lit(2.0));
    g.0[idx(to, to)][idx(from, from)] = re(rate);
    for j in 0..DIM {
        g.0[idx(from, j)][idx(from, j)] = g.0[idx(from, j)][idx(from, j)] - half;
        g.0[idx(j, from)][idx(j, from)] = g.0[idx(j, from)][idx(j, from)] - half;
    }
    g
}

/// Uniform loss `ρ ↦ −rate ρ`; the matching refill toward the initial ground
/// populations is added by [`Generator::closed`].
pub fn relaxation_loss<T: Real>(rate: T) -> Superop<T> {
    let mut g = Superop::zero();
    for k in 0..VDIM {
        g.0[k][k] = re(-rate);
    }
    g
}

/// Generator for one velocity class, without the population refill.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Generator<T> {
    pub matrix: Superop<T>,
    /// Ground relaxation rate γ12 whose refill term depends on the initial
    /// populations.
    pub relaxation: T,
}

impl<T: Real> Generator<T> {
    /// Full trace-preserving generator `G + γ12 vec(ρ0) tr(·)` with
    /// ρ0 = diag(p1, p2, 0).
    pub fn closed(&self, p1: T, p2: T) -> Superop<T> {
        self.with_refill(self.relaxation, p1, p2)
    }

    fn with_refill(&self, rate: T, p1: T, p2: T) -> Superop<T> {
        let mut g = self.matrix;
        for k in 0..DIM {
            let col = idx(k, k);
            g.0[idx(0, 0)][col] = g.0[idx(0, 0)][col] + re(rate * p1);
            g.0[idx(1, 1)][col] = g.0[idx(1, 1)][col] + re(rate * p2);
        }
        g
    }
}

/// Liouvillian of the Λ system: coherent driving by both fields, decay of
/// |3⟩ into |1⟩ at Γ31 and into |2⟩ at Γ32, and ground relaxation at γ12
/// (which alone damps ρ12 at γ12).
pub fn build_generator<T: Real>(
    atom: &AtomSpec<T>,
    probe: &FieldSpec<T>,
    coupling: &FieldSpec<T>,
    v: VelocityClass<T>,
) -> Generator<T> {
    let matrix = coherent_part(probe, coupling, v)
        + decay_channel(atom.gamma31, 2, 0)
        + decay_channel(atom.gamma32, 2, 1)
        + relaxation_loss(atom.gamma12);
    Generator {
        matrix,
        relaxation: atom.gamma12,
    }
}

/// 3×3 density matrix over {|1⟩, |2⟩, |3⟩}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix<T>(pub [[C<T>; DIM]; DIM]);

impl<T: Real> DensityMatrix<T> {
    fn from_vec(v: &[C<T>; VDIM]) -> Self {
        let mut m = [[C::new(T::zero(), T::zero()); DIM]; DIM];
        for i in 0..DIM {
            for j in 0..DIM {
                m[i][j] = v[idx(i, j)];
            }
        }
        DensityMatrix(m)
    }

    pub fn to_vec(&self) -> [C<T>; VDIM] {
        let mut v = [C::new(T::zero(), T::zero()); VDIM];
        for i in 0..DIM {
            for j in 0..DIM {
                v[idx(i, j)] = self.0[i][j];
            }
        }
        v
    }

    /// ρ_ij with 1-based level labels, as in ρ31.
    pub fn element(&self, i: usize, j: usize) -> C<T> {
        self.0[i - 1][j - 1]
    }

    pub fn population(&self, level: usize) -> T {
        self.0[level - 1][level - 1].re
    }

    pub fn trace(&self) -> C<T> {
        (0..DIM).map(|k| self.0[k][k]).sum()
    }

    /// max |ρ_ij − conj(ρ_ji)|.
    pub fn hermiticity_error(&self) -> T {
        let mut e = T::zero();
        for i in 0..DIM {
            for j in 0..DIM {
                e = e.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        e
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyState<T> {
    pub rho: DensityMatrix<T>,
    /// The stationary subspace was more than one-dimensional; `rho` is the
    /// limit selected by a vanishing refill toward the initial populations.
    pub degenerate: bool,
}

/// Pivot ratio below which the trace-replaced system counts as singular.
fn degeneracy_threshold<T: Real>() -> T {
    T::epsilon() * T::lit(64.0)
}

fn solve_trace_replaced<T: Real>(g: &Superop<T>) -> Option<(DensityMatrix<T>, T)> {
    let mut a = g.0;
    let one = re(T::one());
    let zero = re(T::zero());
    for (col, entry) in a[idx(0, 0)].iter_mut().enumerate() {
        *entry = if col % (DIM + 1) == 0 { one } else { zero };
    }
    let mut b = [zero; VDIM];
    b[idx(0, 0)] = one;
    lu_solve::<_, T, VDIM>(a, b).map(|s| (DensityMatrix::from_vec(&s.x), s.pivot_ratio))
}

/// Stationary state of the closed generator: solves `G·vec(ρ) = 0` with the
/// ρ11 row replaced by `Tr ρ = 1`.
pub fn steady_state<T: Real>(g: &Generator<T>, p1: T, p2: T) -> Result<SteadyState<T>> {
    let closed = g.closed(p1, p2);
    if let Some((rho, ratio)) = solve_trace_replaced(&closed) {
        if ratio >= degeneracy_threshold() && ratio.is_finite() {
            return Ok(SteadyState {
                rho,
                degenerate: false,
            });
        }
    }
    // Degenerate stationary subspace: pick the γ → 0⁺ limit of a weak refill
    // toward the initial populations.
    let scale = closed.max_abs().max(T::one());
    let eps = T::epsilon().sqrt() * scale;
    let regularized = g.with_refill(g.relaxation, p1, p2)
        + Generator {
            matrix: relaxation_loss(eps),
            relaxation: eps,
        }
        .closed(p1, p2);
    match solve_trace_replaced(&regularized) {
        Some((rho, ratio)) if ratio >= degeneracy_threshold() && ratio.is_finite() => {
            Ok(SteadyState {
                rho,
                degenerate: true,
            })
        }
        _ => Err(Error::Singular(
            "trace-replaced steady-state system has no unique solution".into(),
        )),
    }
}

/// Normalized probe absorption `|Im ρ31| (Γ31 + Γ32) / (2 Ωp)`.
///
/// Equals the lower-level population for a resonant, weakly probed two-level
/// atom, so 1 means a stationary atom with all population in |1⟩.
pub fn probe_response<T: Real>(
    rho: &DensityMatrix<T>,
    probe: &FieldSpec<T>,
    atom: &AtomSpec<T>,
) -> T {
    rho.element(3, 1).im.abs() * atom.gamma_sum() / (T::lit(2.0) * probe.rabi)
}

/// Steady-state probe absorption of one velocity class.
pub fn response_at<T: Real>(
    atom: &AtomSpec<T>,
    probe: &FieldSpec<T>,
    coupling: &FieldSpec<T>,
    p1: T,
    p2: T,
    v: VelocityClass<T>,
) -> Result<T> {
    let g = build_generator(atom, probe, coupling, v);
    let ss = steady_state(&g, p1, p2)?;
    Ok(probe_response(&ss.rho, probe, atom))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::cesium_d2_preset;

    fn preset() -> (AtomSpec<f64>, FieldSpec<f64>, FieldSpec<f64>) {
        let (a, _, c) = cesium_d2_preset();
        (a, FieldSpec::new(0.1, 0.0), c)
    }

    #[test]
    fn trace_preserved_by_closed_generator() {
        let (a, p, c) = preset();
        for dd in [-400.0, 0.0, 37.5] {
            let g = build_generator(&a, &p, &c, VelocityClass(dd));
            assert!(g.closed(0.5, 0.5).trace_defect() < 1e-12);
        }
    }

    #[test]
    fn undriven_generator_is_block_diagonal() {
        let (a, _, _) = preset();
        let off = FieldSpec::off();
        let g = build_generator(&a, &off, &off, VelocityClass(0.0)).closed(0.5, 0.5);
        // Populations never couple to coherences without driving.
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        assert_eq!(g.0[idx(k, k)][idx(i, j)], re(0.0));
                        assert_eq!(g.0[idx(i, j)][idx(k, k)], re(0.0));
                    }
                }
            }
        }
        let ss = steady_state(
            &build_generator(&a, &off, &off, VelocityClass(0.0)),
            0.3,
            0.7,
        )
        .unwrap();
        assert!(ss.rho.population(3).abs() < 1e-12);
        assert!((ss.rho.population(1) - 0.3).abs() < 1e-12);
        assert!(!ss.degenerate);
    }

    #[test]
    fn zero_relaxation_without_driving_is_flagged() {
        let (mut a, _, _) = preset();
        a.gamma12 = 0.0;
        let off = FieldSpec::off();
        let ss = steady_state(
            &build_generator(&a, &off, &off, VelocityClass(0.0)),
            0.25,
            0.75,
        )
        .unwrap();
        assert!(ss.degenerate);
        assert!((ss.rho.population(1) - 0.25).abs() < 1e-6);
        assert!((ss.rho.trace() - re(1.0)).norm() < 1e-10);
    }

    #[test]
    fn dark_state_has_no_probe_coherence() {
        let (mut a, p, mut c) = preset();
        a.gamma12 = 0.0;
        c.detuning = 40.0;
        let p = FieldSpec::new(p.rabi, 40.0);
        let ss = steady_state(
            &build_generator(&a, &p, &c, VelocityClass(-120.0)),
            0.5,
            0.5,
        )
        .unwrap();
        assert!(ss.rho.element(3, 1).norm() < 1e-8);
        assert!(probe_response(&ss.rho, &p, &a) < 1e-8);
    }

    #[test]
    fn dissipators_add() {
        let (mut a, p, c) = preset();
        a.gamma12 = 0.0;
        let v = VelocityClass(12.0);
        let full = build_generator(&a, &p, &c, v).matrix;
        let only31 = build_generator(&AtomSpec { gamma32: 0.0, ..a }, &p, &c, v).matrix;
        let only32 = build_generator(&AtomSpec { gamma31: 0.0, ..a }, &p, &c, v).matrix;
        let diff = only31 + only32 - coherent_part(&p, &c, v) - full;
        assert!(diff.max_abs() < 1e-12);
    }

    #[test]
    fn far_detuned_probe_is_transparent() {
        let (a, _, _) = preset();
        let p = FieldSpec::new(0.1, 1.0e4);
        let r = response_at(&a, &p, &FieldSpec::off(), 0.5, 0.5, VelocityClass(0.0)).unwrap();
        assert!(r < 1e-4);
        // two-level tail (Γ/2)²/Δ² with p1 = 0.5
        assert!((r / (0.5 * 2.65f64.powi(2) / 1.0e8) - 1.0).abs() < 0.01);
    }

    #[test]
    fn f32_steady_state() {
        let (a, _, c) = cesium_d2_preset::<f32>();
        let p = FieldSpec::new(0.01f32, 0.0);
        let ss = steady_state(&build_generator(&a, &p, &c, VelocityClass(0.0)), 0.5, 0.5).unwrap();
        assert!((ss.rho.trace().re - 1.0).abs() < 1e-5);
        assert!(ss.rho.hermiticity_error() < 1e-5);
    }
}
