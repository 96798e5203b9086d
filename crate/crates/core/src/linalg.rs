//! Dense LU solve with partial pivoting for the small fixed-size systems
//! used here (9×9 complex steady states, 4×4 real normal equations).

use num_traits::NumAssign;

use crate::num::{Real, C};

/// Modulus used for pivot selection.
pub trait Magnitude<T> {
    fn magnitude(&self) -> T;
}

impl<T: Real> Magnitude<T> for C<T> {
    #[inline]
    fn magnitude(&self) -> T {
        // |re| + |im| orders pivots as well as the true modulus and skips a sqrt.
        self.re.abs() + self.im.abs()
    }
}

impl Magnitude<f32> for f32 {
    #[inline]
    fn magnitude(&self) -> f32 {
        self.abs()
    }
}

impl Magnitude<f64> for f64 {
    #[inline]
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LuSolution<S, T, const N: usize> {
    pub x: [S; N],
    /// Smallest pivot magnitude over the largest matrix entry magnitude.
    pub pivot_ratio: T,
}

/// Solves `a · x = b` in place. Returns `None` only when a pivot is exactly
/// zero; callers judge near-singularity from `pivot_ratio`.
pub fn lu_solve<S, T, const N: usize>(
    mut a: [[S; N]; N],
    mut b: [S; N],
) -> Option<LuSolution<S, T, N>>
where
    S: Copy + NumAssign + Magnitude<T>,
    T: Real,
{
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .map(|v| v.magnitude())
        .fold(T::zero(), T::max);
    if scale == T::zero() {
        return None;
    }
    let mut min_pivot = T::infinity();

    for k in 0..N {
        let (p, pmag) =
            (k..N)
                .map(|i| (i, a[i][k].magnitude()))
                .fold(
                    (k, -T::one()),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if pmag == T::zero() {
            return None;
        }
        min_pivot = min_pivot.min(pmag);
        if p != k {
            a.swap(p, k);
            b.swap(p, k);
        }
        let pivot = a[k][k];
        for i in k + 1..N {
            let f = a[i][k] / pivot;
            if f.is_zero() {
                continue;
            }
            a[i][k] = S::zero();
            for j in k + 1..N {
                let akj = a[k][j];
                a[i][j] -= f * akj;
            }
            let bk = b[k];
            b[i] -= f * bk;
        }
    }

    let mut x = [S::zero(); N];
    for i in (0..N).rev() {
        let mut acc = b[i];
        for j in i + 1..N {
            acc -= a[i][j] * x[j];
        }
        x[i] = acc / a[i][i];
    }
    Some(LuSolution {
        x,
        pivot_ratio: min_pivot / scale,
    })
}
