//! Lorentzian line fit by damped Gauss-Newton (Levenberg-Marquardt).

use crate::error::{FitError, Result};
use crate::linalg::lu_solve;
use crate::model::{lorentzian, PeakFit, Spectrum};
use crate::num::Real;

pub const MIN_SAMPLES: usize = 8;
pub const MAX_ITERATIONS: usize = 200;

fn tolerance<T: Real>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(16.0))
}

/// Model value and gradient with respect to (center, fwhm, amplitude, offset).
fn model_and_gradient<T: Real>(x: T, p: &[T; 4]) -> (T, [T; 4]) {
    let [c, w, a, o] = *p;
    let h = w / T::lit(2.0);
    let u = x - c;
    let d = u * u + h * h;
    let shape = h * h / d;
    let d2 = d * d;
    let dc = a * T::lit(2.0) * h * h * u / d2;
    let dw = a * h * u * u / d2;
    (o + a * shape, [dc, dw, shape, T::one()])
}

fn cost<T: Real>(x: &[T], y: &[T], p: &[T; 4]) -> T {
    x.iter()
        .zip(y)
        .map(|(x, y)| {
            let r = lorentzian(*x, p[0], p[1], p[2], p[3]) - *y;
            r * r
        })
        .sum()
}

/// Starting point: center at the maximum, amplitude max − min, offset min,
/// width from the half-maximum crossings.
fn initial_guess<T: Real>(x: &[T], y: &[T], imax: usize) -> [T; 4] {
    let ymax = y[imax];
    let ymin = y.iter().copied().fold(T::infinity(), T::min);
    let level = ymin + (ymax - ymin) / T::lit(2.0);
    let cross = |i: usize, j: usize| {
        // Linear interpolation between samples straddling `level`.
        let t = (level - y[i]) / (y[j] - y[i]);
        x[i] + t * (x[j] - x[i])
    };
    let left = (1..=imax)
        .rev()
        .find(|&i| y[i - 1] < level)
        .map(|i| x[imax] - cross(i - 1, i));
    let right = (imax..y.len() - 1)
        .find(|&i| y[i + 1] < level)
        .map(|i| cross(i, i + 1) - x[imax]);
    let span = x[x.len() - 1] - x[0];
    let width = match (left, right) {
        (Some(l), Some(r)) => l + r,
        (Some(h), None) | (None, Some(h)) => h + h,
        (None, None) => span / T::lit(2.0),
    };
    let width = if width > T::zero() {
        width
    } else {
        span / T::lit(2.0)
    };
    [x[imax], width, ymax - ymin, ymin]
}

/// Fits `offset + amplitude·(w/2)² / ((δ − center)² + (w/2)²)` to the
/// samples with `window.0 <= δ <= window.1`.
///
/// Stops when an accepted step changes every parameter by less than 1e-10
/// of its scale, or fails after [`MAX_ITERATIONS`].
pub fn fit_lorentzian<T: Real>(spec: &Spectrum<T>, window: (T, T)) -> Result<PeakFit<T>> {
    let sub = spec.window(window.0, window.1);
    let (x, y) = (sub.detunings(), sub.values());
    if x.len() < MIN_SAMPLES {
        return Err(FitError::TooFewSamples {
            found: x.len(),
            needed: MIN_SAMPLES,
        }
        .into());
    }
    let (imax, _) = sub.argmax().expect("non-empty window");
    if imax == 0 || imax + 1 == x.len() {
        return Err(FitError::NoMaximum.into());
    }

    let tol = tolerance::<T>();
    let mut p = initial_guess(x, y, imax);
    let mut current = cost(x, y, &p);
    let mut lambda = T::lit(1e-3);
    let lambda_max = T::lit(1e16);

    for iteration in 1..=MAX_ITERATIONS {
        let mut jtj = [[T::zero(); 4]; 4];
        let mut jtr = [T::zero(); 4];
        for (xi, yi) in x.iter().zip(y) {
            let (m, g) = model_and_gradient(*xi, &p);
            let r = m - *yi;
            for a in 0..4 {
                jtr[a] += g[a] * r;
                for b in 0..4 {
                    jtj[a][b] += g[a] * g[b];
                }
            }
        }
        let scale = [
            p[0].abs() + p[1].abs(),
            p[1].abs(),
            p[2].abs(),
            p[3].abs() + p[2].abs(),
        ];

        loop {
            let mut m = jtj;
            for k in 0..4 {
                let d = jtj[k][k].max(T::min_positive_value());
                m[k][k] += lambda * d;
            }
            let rhs = jtr.map(|v| -v);
            let step = lu_solve::<T, T, 4>(m, rhs).map(|s| s.x);
            let small = |s: &[T; 4]| (0..4).all(|k| s[k].abs() <= tol * scale[k]);

            if let Some(step) = step.filter(|s| s.iter().all(|v| v.is_finite())) {
                let trial = [
                    p[0] + step[0],
                    p[1] + step[1],
                    p[2] + step[2],
                    p[3] + step[3],
                ];
                let trial_cost = cost(x, y, &trial);
                if trial_cost <= current {
                    p = trial;
                    current = trial_cost;
                    lambda = (lambda / T::lit(10.0)).max(T::lit(1e-12));
                    if small(&step) {
                        return finish(p, current, x.len(), iteration);
                    }
                    break;
                }
                if small(&step) && lambda <= T::lit(1e-3) {
                    // No descent left at machine precision.
                    return finish(p, current, x.len(), iteration);
                }
            }
            lambda *= T::lit(10.0);
            if lambda > lambda_max {
                return finish(p, current, x.len(), iteration);
            }
        }
    }
    Err(FitError::NotConverged {
        iterations: MAX_ITERATIONS,
    }
    .into())
}

fn finish<T: Real>(p: [T; 4], cost: T, n: usize, iterations: usize) -> Result<PeakFit<T>> {
    let fwhm = p[1].abs();
    if !(fwhm > T::zero()) || !(p[2] > T::zero()) {
        return Err(FitError::NonPhysical {
            fwhm: fwhm.as_f64(),
            amplitude: p[2].as_f64(),
        }
        .into());
    }
    Ok(PeakFit {
        center: p[0],
        fwhm,
        amplitude: p[2],
        offset: p[3],
        residual_norm: (cost / T::from_usize_lossy(n)).sqrt(),
        iterations,
    })
}
