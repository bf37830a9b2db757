//! Dense complex linear algebra helpers shared by the component blocks.
//!
//! Decompositions are Jacobi-based: a one-sided Jacobi SVD and a two-sided
//! Jacobi eigensolver for Hermitian matrices. Jacobi iterations converge to
//! high relative accuracy on clustered and rank-deficient spectra, which the
//! projector and pseudoinverse arithmetic here depends on. Rank decisions
//! use a cutoff relative to the largest singular value so results are
//! invariant under rescaling.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub fn cone() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

pub fn creal(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

const MAX_SWEEPS: usize = 64;

/// One-sided Jacobi SVD: `m = u diag(sigma) v^H` with `sigma` descending.
/// Columns of `u` beyond the rank are zero.
pub struct Svd {
    pub u: CMat,
    pub sigma: Vec<f64>,
    pub v: CMat,
}

/// Rotation diagonalising the Hermitian 2x2 `[[a, g], [conj(g), b]]`:
/// returns `(c, s, phase)` for the unitary `[[c, s], [-s ph, c ph]]`
/// with `ph = conj(g)/|g|`.
fn jacobi_rotation(a: f64, b: f64, g: Complex64) -> (f64, f64, Complex64) {
    let gn = g.norm();
    let phase = (g / gn).conj();
    let theta = (b - a) / (2.0 * gn);
    let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, c * t, phase)
}

/// One-sided Jacobi: rotates column pairs until all columns are mutually
/// orthogonal, accumulating the rotations in `v`. Columns that fall below
/// the rounding floor of the input are zeroed outright; chasing them into
/// the subnormal range would stall convergence and corrupt the phases.
pub fn jacobi_svd(m: &CMat) -> Svd {
    let (n, k) = (m.nrows(), m.ncols());
    let mut w = m.clone();
    let mut v = CMat::identity(k, k);
    let eps = f64::EPSILON;
    let scale = (0..k).map(|j| w.column(j).norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Svd {
            u: CMat::zeros(n, k),
            sigma: vec![0.0; k],
            v,
        };
    }
    let floor_sq = (eps * scale) * (eps * scale) * (n as f64);
    let zero_column = |w: &mut CMat, j: usize| {
        for i in 0..n {
            w[(i, j)] = czero();
        }
    };
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k.saturating_sub(1) {
            for q in (p + 1)..k {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = czero();
                for i in 0..n {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    app += wp.norm_sqr();
                    aqq += wq.norm_sqr();
                    apq += wp.conj() * wq;
                }
                if app <= floor_sq {
                    zero_column(&mut w, p);
                    continue;
                }
                if aqq <= floor_sq {
                    zero_column(&mut w, q);
                    continue;
                }
                if apq.norm() <= 10.0 * eps * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let (c, s, ph) = jacobi_rotation(app, aqq, apq);
                for i in 0..n {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    w[(i, p)] = wp * c - wq * ph * s;
                    w[(i, q)] = wp * s + wq * ph * c;
                }
                for i in 0..k {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * c - vq * ph * s;
                    v[(i, q)] = vp * s + vq * ph * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    for j in 0..k {
        if w.column(j).norm_squared() <= floor_sq {
            zero_column(&mut w, j);
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    let norms: Vec<f64> = (0..k).map(|j| w.column(j).norm()).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());
    let mut u = CMat::zeros(n, k);
    let mut vv = CMat::zeros(k, k);
    let mut sigma = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        if s > 0.0 {
            u.set_column(dst, &(w.column(src) / creal(s)));
        }
        vv.set_column(dst, &v.column(src));
    }
    Svd { u, sigma, v: vv }
}

/// Two-sided Jacobi eigensolver for the Hermitian part of `m`.
/// Returns eigenvalues ascending with matching orthonormal eigenvectors.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let mut h = hermitize(m);
    let mut v = CMat::identity(n, n);
    let eps = f64::EPSILON;
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let g = h[(p, q)];
                if g.norm() <= 10.0 * eps * scale {
                    continue;
                }
                rotated = true;
                let (c, s, ph) = jacobi_rotation(h[(p, p)].re, h[(q, q)].re, g);
                // h <- j^H h j with j acting on columns/rows p, q
                for i in 0..n {
                    let hp = h[(i, p)];
                    let hq = h[(i, q)];
                    h[(i, p)] = hp * c - hq * ph * s;
                    h[(i, q)] = hp * s + hq * ph * c;
                }
                for jcol in 0..n {
                    let hp = h[(p, jcol)];
                    let hq = h[(q, jcol)];
                    h[(p, jcol)] = hp * c - hq * ph.conj() * s;
                    h[(q, jcol)] = hp * s + hq * ph.conj() * c;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * c - vq * ph * s;
                    v[(i, q)] = vp * s + vq * ph * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| h[(a, a)].re.partial_cmp(&h[(b, b)].re).unwrap());
    let eigvals: Vec<f64> = order.iter().map(|&i| h[(i, i)].re).collect();
    let mut vecs = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &v.column(src));
    }
    (eigvals, vecs)
}

/// Frobenius norm.
#[cfg_attr(not(test), allow(dead_code))]
pub fn fro_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value; 0 for empty matrices.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    jacobi_svd(m).sigma.first().copied().unwrap_or(0.0)
}

/// Smallest singular value of a square matrix; 0 for empty matrices.
pub fn smallest_singular_value(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    jacobi_svd(m).sigma.last().copied().unwrap_or(0.0)
}

/// Hermitian part `(m + m^H) / 2`.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// Deviation from being Hermitian, `||m - m^H||`, as a spectral norm.
pub fn hermitian_defect(m: &CMat) -> f64 {
    spectral_norm(&(m - m.adjoint()))
}

/// Smallest eigenvalue of the Hermitian part together with its eigenvector.
pub fn min_eig(m: &CMat) -> (f64, CVec) {
    let (vals, vecs) = hermitian_eigen(m);
    (vals[0], vecs.column(0).into_owned())
}

/// Largest eigenvalue of the Hermitian part together with its eigenvector.
pub fn max_eig(m: &CMat) -> (f64, CVec) {
    let (vals, vecs) = hermitian_eigen(m);
    let last = vals.len() - 1;
    (vals[last], vecs.column(last).into_owned())
}

/// Positive-semidefinite square root of the Hermitian part of `m`.
/// Eigenvalues below zero are clamped.
pub fn psd_sqrt(m: &CMat) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let n = m.nrows();
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let s = creal(v.max(0.0).sqrt());
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    &scaled * vecs.adjoint()
}

/// Moore-Penrose pseudoinverse with singular values below
/// `tol * sigma_max` treated as zero.
pub fn pinv(m: &CMat, tol: f64) -> CMat {
    let (rows, cols) = (m.nrows(), m.ncols());
    if rows == 0 || cols == 0 {
        return CMat::zeros(cols, rows);
    }
    let svd = jacobi_svd(m);
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    let cutoff = tol * smax;
    let k = svd.sigma.len();
    let mut sinv = CMat::zeros(k, k);
    for (i, &s) in svd.sigma.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            sinv[(i, i)] = creal(1.0 / s);
        }
    }
    &svd.v * sinv * svd.u.adjoint()
}

/// Rank at relative cutoff `tol * sigma_max`.
#[cfg_attr(not(test), allow(dead_code))]
pub fn rank(m: &CMat, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sigma = jacobi_svd(m).sigma;
    let smax = sigma.first().copied().unwrap_or(0.0);
    if smax <= 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > tol * smax).count()
}

/// Basis columns of `m` whose singular values exceed the cutoff:
/// relative to the largest singular value when `relative` is set,
/// absolute otherwise.
fn orthonormal_columns_cutoff(m: &CMat, cutoff: f64, relative: bool) -> CMat {
    let n = m.nrows();
    if m.ncols() == 0 || n == 0 {
        return CMat::zeros(n, 0);
    }
    let svd = jacobi_svd(m);
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    let cutoff = if relative { cutoff * smax } else { cutoff };
    let kept = svd.sigma.iter().filter(|&&s| s > cutoff && s > 0.0).count();
    let mut q = CMat::zeros(n, kept);
    for j in 0..kept {
        q.set_column(j, &svd.u.column(j));
    }
    q
}

/// Orthonormal basis of the column span, rank decided at `tol * sigma_max`.
pub fn orthonormal_columns(m: &CMat, tol: f64) -> CMat {
    orthonormal_columns_cutoff(m, tol, true)
}

/// Orthonormal basis of the orthogonal complement of the span of `q`
/// (columns of `q` are assumed orthonormal).
pub fn orthonormal_complement(q: &CMat) -> CMat {
    let n = q.nrows();
    let p = CMat::identity(n, n) - q * q.adjoint();
    // Singular values of p are 0 or 1; the cutoff must be absolute so an
    // empty complement does not promote rounding noise to basis vectors.
    orthonormal_columns_cutoff(&p, 0.5, false)
}

/// Orthonormal basis of the kernel, i.e. of the complement of the row space.
pub fn kernel_basis(m: &CMat, tol: f64) -> CMat {
    let row_space = orthonormal_columns(&m.adjoint(), tol);
    orthonormal_complement(&row_space)
}

/// Inverse square root of a Hermitian positive definite matrix.
pub fn pd_inv_sqrt(m: &CMat, tol: f64) -> Option<CMat> {
    let (vals, vecs) = hermitian_eigen(m);
    let n = m.nrows();
    if n == 0 {
        return Some(CMat::zeros(0, 0));
    }
    let vmax = vals.iter().cloned().fold(0.0, f64::max);
    if vals[0] <= tol * vmax.max(1.0) {
        return None;
    }
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let s = creal(1.0 / v.sqrt());
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    Some(&scaled * vecs.adjoint())
}

/// Outcome of minimising the generalised Rayleigh quotient
/// `f^H s f / f^H p f` over vectors with `p f != 0`.
pub struct PencilInf {
    pub value: f64,
    /// A vector attaining the infimum.
    pub witness: CVec,
}

/// Infimum of `f^H s f / f^H p f` for Hermitian PSD `s` and `p`.
///
/// Splitting along `Im(p)` and its complement, the quotient at
/// `f = r u + r_perp w` has numerator `u^H G u + 2 Re(u^H F w) + w^H L w`
/// and denominator `u^H H u`. Minimising over the free `w` replaces `G`
/// by its Schur complement `G - F L^+ F^H`, so the infimum is the smallest
/// eigenvalue of `H^{-1/2} (G - F L^+ F^H) H^{-1/2}`.
///
/// Returns `None` when `p` vanishes (the quotient is undefined).
pub fn pencil_inf(s: &CMat, p: &CMat, tol: f64) -> Option<PencilInf> {
    let n = s.nrows();
    let p_norm = spectral_norm(p);
    if p_norm <= tol {
        return None;
    }
    let r = orthonormal_columns(p, tol);
    let r_perp = orthonormal_complement(&r);
    let g = r.adjoint() * s * &r;
    let f = r.adjoint() * s * &r_perp;
    let l = r_perp.adjoint() * s * &r_perp;
    let l_pinv = pinv(&hermitize(&l), tol);
    let g_schur = hermitize(&(&g - &f * &l_pinv * f.adjoint()));
    let h = hermitize(&(r.adjoint() * p * &r));
    let h_inv_sqrt = pd_inv_sqrt(&h, tol * 1e-3)?;
    let m = hermitize(&(&h_inv_sqrt * &g_schur * &h_inv_sqrt));
    let (lam, v) = min_eig(&m);
    let u = &h_inv_sqrt * v;
    let w = -(&l_pinv * f.adjoint() * &u);
    let mut witness = CVec::zeros(n);
    witness += &r * &u;
    if r_perp.ncols() > 0 {
        witness += &r_perp * &w;
    }
    let norm = witness.norm();
    if norm > 0.0 {
        witness /= creal(norm);
    }
    Some(PencilInf {
        value: lam.max(0.0),
        witness,
    })
}

/// Smallest feasible constant `lambda` with `a <= lambda * b` on `Im(b)`,
/// for Hermitian PSD `a`, `b` with `Im(a) ⊆ Im(b)`: the largest eigenvalue
/// of `H^{-1/2} G H^{-1/2}` restricted to an orthonormal basis of `Im(b)`.
pub fn pencil_sup(a: &CMat, b: &CMat, tol: f64) -> Option<f64> {
    let b_norm = spectral_norm(b);
    if b_norm <= tol {
        return if spectral_norm(a) <= tol {
            Some(0.0)
        } else {
            None
        };
    }
    let r = orthonormal_columns(b, tol);
    let g = hermitize(&(r.adjoint() * a * &r));
    let h = hermitize(&(r.adjoint() * b * &r));
    let h_inv_sqrt = pd_inv_sqrt(&h, tol * 1e-3)?;
    let m = hermitize(&(&h_inv_sqrt * &g * &h_inv_sqrt));
    let (lam, _) = max_eig(&m);
    Some(lam.max(0.0))
}
