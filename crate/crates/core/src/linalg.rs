//! Small dense linear-algebra helpers on top of nalgebra's SVD.

use nalgebra::{DMatrix, DVector};

/// Singular values sorted in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `rel_tol × σ_max`.
pub fn numerical_rank(sv: &[f64], rel_tol: f64) -> usize {
    let max = sv.first().copied().unwrap_or(0.0);
    if max <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Solves `J x = v` in the (damped) least-squares sense.
///
/// With `damping > 0` this is `Jᵀ (J Jᵀ + λ² I)⁻¹ v`; with zero damping it is
/// the Moore-Penrose pseudoinverse, dropping singular values below
/// `1e-12 × σ_max`.
pub fn damped_solve(j: &DMatrix<f64>, v: &DVector<f64>, damping: f64) -> DVector<f64> {
    let svd = j.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let utv = u.transpose() * v;
    let mut scaled = DVector::zeros(svd.singular_values.len());
    let lam2 = damping * damping;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        scaled[i] = if damping > 0.0 {
            s / (s * s + lam2) * utv[i]
        } else if s > 1e-12 * smax {
            utv[i] / s
        } else {
            0.0
        };
    }
    vt.transpose() * scaled
}
