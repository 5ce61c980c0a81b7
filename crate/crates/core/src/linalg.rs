//! Small dense vector helpers on slices.

use nalgebra::DMatrix;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `y = H v` for a dense matrix.
pub fn mat_vec(h: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    debug_assert_eq!(h.ncols(), v.len());
    let mut out = vec![0.0; h.nrows()];
    for (j, &vj) in v.iter().enumerate() {
        if vj == 0.0 {
            continue;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += h[(i, j)] * vj;
        }
    }
    out
}

/// `g^T d + 0.5 d^T H d`
pub fn quad_model(g: &[f64], h: &DMatrix<f64>, d: &[f64]) -> f64 {
    let hd = mat_vec(h, d);
    dot(g, d) + 0.5 * dot(d, &hd)
}

pub fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}
