use crate::error::{Error, Result};
use crate::model::Spectrum;
use crate::num::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak<T> {
    pub index: usize,
    pub detuning: T,
    pub height: T,
    /// Height above the higher of the two bounding minima.
    pub prominence: T,
}

impl<T: Real> Peak<T> {
    /// Vertex of the parabola through the peak sample and its neighbours.
    pub fn refined_detuning(&self, spec: &Spectrum<T>) -> T {
        let (x, y) = (spec.detunings(), spec.values());
        let i = self.index;
        if i == 0 || i + 1 >= x.len() {
            return self.detuning;
        }
        let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
        let denom = y0 - T::lit(2.0) * y1 + y2;
        if denom >= T::zero() {
            return self.detuning;
        }
        let h = (x[i + 1] - x[i - 1]) / T::lit(2.0);
        x[i] + h * (y0 - y2) / (T::lit(2.0) * denom)
    }
}

fn prominence<T: Real>(y: &[T], i: usize) -> T {
    let h = y[i];
    let mut left_min = h;
    for &v in y[..i].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &y[i + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

/// Strict interior local maxima whose prominence reaches
/// `min_prominence · (max − min)`, sorted by detuning.
pub fn find_peaks<T: Real>(spec: &Spectrum<T>, min_prominence: T) -> Result<Vec<Peak<T>>> {
    if spec.is_empty() {
        return Err(Error::InvalidArgument("empty spectrum".into()));
    }
    if !(min_prominence > T::zero() && min_prominence < T::one()) {
        return Err(Error::InvalidArgument(format!(
            "min_prominence must lie in (0, 1), got {min_prominence}"
        )));
    }
    let y = spec.values();
    let (lo, hi) = y
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(a, b), v| {
            (a.min(*v), b.max(*v))
        });
    let threshold = min_prominence * (hi - lo);
    let mut out = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        if y[i] > y[i - 1] && y[i] > y[i + 1] {
            let p = prominence(y, i);
            if p >= threshold && p > T::zero() {
                out.push(Peak {
                    index: i,
                    detuning: spec.detunings()[i],
                    height: y[i],
                    prominence: p,
                });
            }
        }
    }
    Ok(out)
}

/// Peak closest in detuning to `target`.
pub fn nearest_peak<T: Real>(peaks: &[Peak<T>], target: T) -> Option<Peak<T>> {
    peaks.iter().copied().reduce(|best, p| {
        if (p.detuning - target).abs() < (best.detuning - target).abs() {
            p
        } else {
            best
        }
    })
}
