//! Dressed-state energies and the asymmetric linewidths of the two
//! absorption peaks of a Doppler-broadened Λ system.

use crate::error::{Error, Result};
use crate::model::{AtomSpec, EnsembleSpec, FieldSpec};
use crate::num::Real;

/// Widths (MHz) of the peaks near λ+ (`nu_plus`) and λ− (`nu_minus`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinewidthPair<T> {
    pub nu_plus: T,
    pub nu_minus: T,
}

/// Returns `(1 − r, 1 + r)` for `r = Δ / √(Δ² + 4Ω²)`, rearranged so the
/// small factor keeps full relative precision when |Δ| ≫ Ω.
fn split_factors<T: Real>(delta: T, omega: T) -> (T, T) {
    let two = T::lit(2.0);
    let four_omega2 = T::lit(4.0) * omega * omega;
    let s = (delta * delta + four_omega2).sqrt();
    let small = four_omega2 / (s * (s + delta.abs()));
    let large = two - small;
    if delta >= T::zero() {
        (small, large)
    } else {
        (large, small)
    }
}

/// Δν± = ((Γ31 + Γ32 + 2D) / 4) · (1 ∓ ΔC / √(ΔC² + 4ΩC²)).
///
/// For a blue-detuned coupling field the peak at λ+ is the narrow one.
pub fn analytic_linewidths<T: Real>(
    atom: &AtomSpec<T>,
    ensemble: &EnsembleSpec<T>,
    coupling: &FieldSpec<T>,
) -> Result<LinewidthPair<T>> {
    linewidths_from(
        atom.gamma_sum(),
        ensemble.doppler_fwhm,
        coupling.detuning,
        coupling.rabi,
    )
}

/// [`analytic_linewidths`] on bare numbers: total decay Γ, Doppler FWHM D,
/// coupling detuning ΔC and Rabi frequency ΩC, all in MHz.
pub fn linewidths_from<T: Real>(
    gamma_sum: T,
    doppler_fwhm: T,
    delta_c: T,
    omega_c: T,
) -> Result<LinewidthPair<T>> {
    if omega_c < T::zero() {
        return Err(Error::InvalidArgument(format!(
            "coupling Rabi frequency must be >= 0, got {omega_c}"
        )));
    }
    if omega_c == T::zero() && delta_c == T::zero() {
        return Err(Error::Indeterminate);
    }
    let prefactor = (gamma_sum + T::lit(2.0) * doppler_fwhm) / T::lit(4.0);
    let (minus, plus) = split_factors(delta_c, omega_c);
    Ok(LinewidthPair {
        nu_plus: prefactor * minus,
        nu_minus: prefactor * plus,
    })
}

/// Dressed-state energies λ± = (ΔC ± √(ΔC² + 4ΩC²)) / 2 in MHz, relative
/// to the bare lower level of the coupled transition.
pub fn dressed_eigenvalues<T: Real>(coupling: &FieldSpec<T>) -> (T, T) {
    let (delta, omega) = (coupling.detuning, coupling.rabi);
    let s = (delta * delta + T::lit(4.0) * omega * omega).sqrt();
    let half = T::lit(0.5);
    if s == T::zero() {
        return (T::zero(), T::zero());
    }
    // Take the root without cancellation, recover the other from λ+·λ− = −Ω².
    if delta >= T::zero() {
        let plus = half * (delta + s);
        (plus, -(omega * omega) / plus + T::zero())
    } else {
        let minus = half * (delta - s);
        (-(omega * omega) / minus + T::zero(), minus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const G: f64 = 5.3;
    const D: f64 = 560.0;

    #[test]
    fn symmetric_point() {
        let p = linewidths_from(G, D, 0.0, 90.0).unwrap();
        assert!((p.nu_plus - 281.325).abs() < 1e-12);
        assert!((p.nu_minus - 281.325).abs() < 1e-12);
    }

    #[test]
    fn far_blue_coupling() {
        let p = linewidths_from(G, D, 812.0, 90.0).unwrap();
        assert!((p.nu_plus - 6.667).abs() < 5e-4, "{}", p.nu_plus);
        assert!((p.nu_minus - 555.98).abs() < 5e-3, "{}", p.nu_minus);
    }

    #[test]
    fn red_detuning_swaps() {
        let b = linewidths_from(G, D, 812.0, 90.0).unwrap();
        let r = linewidths_from(G, D, -812.0, 90.0).unwrap();
        assert_eq!(b.nu_plus, r.nu_minus);
        assert_eq!(b.nu_minus, r.nu_plus);
    }

    #[test]
    fn moderate_detuning() {
        let p = linewidths_from(G, D, 346.0, 90.0).unwrap();
        assert!((p.nu_plus - 31.75).abs() < 0.005, "{}", p.nu_plus);
    }

    #[test]
    fn indeterminate_and_invalid() {
        assert_eq!(linewidths_from(G, D, 0.0, 0.0), Err(Error::Indeterminate));
        assert!(linewidths_from(G, D, 10.0, -1.0).is_err());
        let bare = linewidths_from(G, D, 812.0, 0.0).unwrap();
        assert_eq!(bare.nu_plus, 0.0);
        assert_eq!(bare.nu_minus, (G + 2.0 * D) / 2.0);
    }

    #[test]
    fn dressed_examples() {
        let f = |d: f64, o: f64| dressed_eigenvalues(&FieldSpec::new(o, d));
        assert_eq!(f(0.0, 90.0), (90.0, -90.0));
        let (p, m) = f(812.0, 90.0);
        assert!(
            (p - 821.86).abs() < 0.005 && (m + 9.86).abs() < 0.005,
            "{p} {m}"
        );
        let (p, m) = f(812.0, 0.0);
        assert_eq!((p, m), (812.0, 0.0));
        assert!(m.is_sign_positive());
        assert_eq!(f(-812.0, 0.0), (0.0, -812.0));
    }

    #[test]
    fn f32_linewidths() {
        let p = linewidths_from(5.3f32, 560.0, 812.0, 90.0).unwrap();
        assert!((p.nu_plus - 6.667).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn sum_rule(dc in -2000.0f64..2000.0, oc in 1e-3f64..300.0) {
            let p = linewidths_from(G, D, dc, oc).unwrap();
            let want = (G + 2.0 * D) / 2.0;
            prop_assert!(((p.nu_plus + p.nu_minus) - want).abs() <= 1e-9 * want);
            prop_assert!(p.nu_plus >= 0.0 && p.nu_minus >= 0.0);
        }

        #[test]
        fn swap_symmetry(dc in -2000.0f64..2000.0, oc in 1e-3f64..300.0) {
            let a = linewidths_from(G, D, dc, oc).unwrap();
            let b = linewidths_from(G, D, -dc, oc).unwrap();
            prop_assert_eq!(a.nu_plus, b.nu_minus);
            prop_assert_eq!(a.nu_minus, b.nu_plus);
        }

        #[test]
        fn eigenvalue_identities(dc in -3000.0f64..3000.0, oc in 0.0f64..300.0) {
            let (p, m) = dressed_eigenvalues(&FieldSpec::new(oc, dc));
            prop_assert!(p >= m);
            let scale = dc.abs().max(oc).max(1e-300);
            prop_assert!(((p + m) - dc).abs() <= 1e-12 * scale);
            let prod_scale = (oc * oc).max(1e-300);
            prop_assert!((p * m + oc * oc).abs() <= 1e-12 * prod_scale);
        }

        #[test]
        fn large_detuning_asymptote(oc in 1.0f64..300.0, ratio in 10.0f64..100.0) {
            let dc = ratio * oc;
            let p = linewidths_from(G, D, dc, oc).unwrap();
            let approx = (G + 2.0 * D) * oc * oc / (2.0 * dc * dc);
            prop_assert!((p.nu_plus / approx - 1.0).abs() < 4.0 / (ratio * ratio));
        }
    }
}
