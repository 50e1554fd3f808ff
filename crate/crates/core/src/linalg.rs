//! Small dense helpers over nalgebra complex matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Draws one CN(0, variance) sample.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() * b.len());
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i * b.len() + j] = ai * bj;
        }
    }
    out
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CVec, b: &CVec) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Least squares `argmin_x ||a x - b||` for tall `a` with full column rank.
pub fn least_squares(a: &CMat, b: &CMat) -> Result<CMat> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::RankDeficient { selected: n });
    }
    let qr = a.clone().qr();
    let r = qr.r();
    let scale = (0..n).map(|i| r[(i, i)].norm()).fold(0.0, f64::max);
    if scale == 0.0 || (0..n).any(|i| r[(i, i)].norm() <= 1e-10 * scale) {
        return Err(Error::RankDeficient { selected: n });
    }
    let qtb = qr.q().adjoint() * b;
    r.solve_upper_triangular(&qtb)
        .ok_or(Error::RankDeficient { selected: n })
}

/// Log-determinant of a Hermitian positive definite matrix.
pub fn hermitian_logdet(m: &CMat) -> Result<f64> {
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let chol = sym
        .cholesky()
        .ok_or_else(|| Error::Singular("matrix is not positive definite".into()))?;
    let l = chol.l();
    Ok((0..l.nrows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum())
}

/// Projects `y` onto the orthogonal complement of an orthonormal set.
pub fn deflate(y: &CVec, basis: &[CVec]) -> CVec {
    let mut out = y.clone();
    for q in basis {
        let c = q.dotc(&out);
        out -= q * c;
    }
    out
}

/// Appends `v` to an orthonormal set by modified Gram-Schmidt. Returns false if
/// `v` lies (numerically) in the existing span.
pub fn push_orthonormal(basis: &mut Vec<CVec>, v: &CVec) -> bool {
    let norm0 = v.norm();
    let r = deflate(v, basis);
    let r = deflate(&r, basis);
    let n = r.norm();
    if norm0 == 0.0 || n <= 1e-10 * norm0 {
        return false;
    }
    basis.push(r / Complex64::new(n, 0.0));
    true
}

/// Returns the index of the maximum, ties broken toward the lowest index.
pub fn argmax(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn least_squares_recovers_exact_solution() {
        let a = CMat::from_row_slice(3, 2, &[c(1., 0.), c(0., 1.), c(2., 0.), c(1., 1.), c(0., 0.), c(3., -1.)]);
        let x = CMat::from_row_slice(2, 1, &[c(0.5, -1.0), c(2.0, 0.25)]);
        let b = &a * &x;
        let got = least_squares(&a, &b).unwrap();
        assert!((got - x).norm() < 1e-12);
    }

    #[test]
    fn least_squares_flags_dependent_columns() {
        let a = CMat::from_row_slice(3, 2, &[c(1., 0.), c(2., 0.), c(0., 1.), c(0., 2.), c(1., 1.), c(2., 2.)]);
        let b = CMat::from_element(3, 1, c(1.0, 0.0));
        assert!(matches!(least_squares(&a, &b), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn logdet_of_diagonal() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![c(2.0, 0.0), c(3.0, 0.0)]));
        assert!((hermitian_logdet(&m).unwrap() - 6f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        assert_eq!(argmax([1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(argmax(Vec::<f64>::new()), None);
    }

    #[test]
    fn kron_matches_manual_layout() {
        let a = CVec::from_vec(vec![c(1., 0.), c(2., 0.)]);
        let b = CVec::from_vec(vec![c(0., 1.), c(3., 0.), c(1., 1.)]);
        let k = kron_vec(&a, &b);
        assert_eq!(k.len(), 6);
        assert_eq!(k[4], c(6.0, 0.0));
        assert_eq!(k[5], c(2.0, 2.0));
    }
}

/// Thin SVD `m = u diag(s) v_h`, computed with faer.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: CMat,
    pub singular_values: Vec<f64>,
    pub v_h: CMat,
}

pub fn thin_svd(m: &CMat) -> Result<ThinSvd> {
    let a = faer::Mat::<Complex64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let svd = a.thin_svd().map_err(|e| Error::Singular(format!("svd did not converge: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    Ok(ThinSvd {
        u: CMat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)]),
        singular_values: (0..s.nrows()).map(|i| s[i].re).collect(),
        v_h: CMat::from_fn(v.ncols(), v.nrows(), |i, j| v[(j, i)].conj()),
    })
}
