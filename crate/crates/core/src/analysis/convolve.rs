use crate::error::{Error, Result};
use crate::model::{Spectrum, SpectrumMeta};
use crate::num::Real;

/// Folds a Lorentzian laser lineshape of the given FWHM (MHz) into a
/// uniformly sampled spectrum.
///
/// Kernel weights are the exact Lorentzian mass of each grid cell. Near the
/// grid edges the kernel is cut off, so every output sample is divided by
/// the kernel mass that actually overlaps the grid.
pub fn convolve_laser_linewidth<T: Real>(spec: &Spectrum<T>, fwhm: T) -> Result<Spectrum<T>> {
    if !(fwhm >= T::zero()) || !fwhm.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "laser linewidth must be >= 0, got {fwhm}"
        )));
    }
    let step = spec
        .uniform_step(T::lit(1e-6))
        .ok_or(Error::NonUniformGrid)?;
    let meta = SpectrumMeta {
        laser_linewidth: Some(spec.meta.laser_linewidth.unwrap_or_else(T::zero) + fwhm),
        ..spec.meta
    };
    if fwhm == T::zero() {
        return Ok(spec.with_values(spec.values().to_vec(), meta));
    }

    let n = spec.len();
    let hw = fwhm / T::lit(2.0);
    let half = T::lit(0.5);
    // mass[k] for offsets k = 0..n (even kernel)
    let mass: Vec<T> = (0..n)
        .map(|k| {
            let k = T::from_usize_lossy(k);
            (((k + half) * step / hw).atan() - ((k - half) * step / hw).atan()) / T::PI()
        })
        .collect();
    let y = spec.values();
    let out = (0..n)
        .map(|i| {
            let mut acc = T::zero();
            let mut norm = T::zero();
            for (j, yj) in y.iter().enumerate() {
                let m = mass[i.abs_diff(j)];
                acc += m * *yj;
                norm += m;
            }
            acc / norm
        })
        .collect();
    Ok(spec.with_values(out, meta))
}
