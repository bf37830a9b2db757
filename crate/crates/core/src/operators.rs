//! Adjointable A-linear operators on `H = A^n` and the operator toolbox:
//! adjoints, norms, Moore-Penrose inverses, range/kernel geometry, the
//! Douglas range-inclusion test, and projection transport.
//!
//! In finite dimension every range is closed, so the closed-range
//! hypotheses of the classical statements reduce to rank decisions at a
//! tolerance.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraElement;
use crate::linalg::{self, CMat};
use crate::module::{ModuleVector, Submodule};
use crate::{Error, Result};

/// An adjointable A-linear operator, one `n x n` complex block per
/// algebra component.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleOperator {
    n: usize,
    blocks: Vec<CMat>,
}

impl ModuleOperator {
    pub fn from_blocks(blocks: Vec<CMat>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::ShapeMismatch("no blocks".into()))?;
        let n = first.nrows();
        for b in &blocks {
            if b.nrows() != n || b.ncols() != n {
                return Err(Error::ShapeMismatch(format!(
                    "block {}x{} is not {n}x{n}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(ModuleOperator { n, blocks })
    }

    pub fn identity(n: usize, d: usize) -> Self {
        ModuleOperator {
            n,
            blocks: vec![CMat::identity(n, n); d],
        }
    }

    pub fn zero(n: usize, d: usize) -> Self {
        ModuleOperator {
            n,
            blocks: vec![CMat::zeros(n, n); d],
        }
    }

    /// Scalar operator `x * I` with a possibly different scalar per
    /// component.
    pub fn scalar(n: usize, factors: &AlgebraElement) -> Self {
        let blocks = factors
            .values()
            .iter()
            .map(|&z| CMat::identity(n, n) * z)
            .collect();
        ModuleOperator { n, blocks }
    }

    /// Diagonal operator from per-component diagonals.
    pub fn diagonal(diags: &[Vec<f64>]) -> Self {
        let n = diags[0].len();
        let blocks = diags
            .iter()
            .map(|ds| {
                CMat::from_fn(n, n, |i, j| {
                    if i == j {
                        linalg::creal(ds[i])
                    } else {
                        linalg::czero()
                    }
                })
            })
            .collect();
        ModuleOperator { n, blocks }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, t: usize) -> &CMat {
        &self.blocks[t]
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.d() != other.d() {
            return Err(Error::ShapeMismatch(format!(
                "operator {}x{} vs {}x{}",
                self.n,
                self.d(),
                other.n,
                other.d()
            )));
        }
        Ok(())
    }

    pub fn apply(&self, x: &ModuleVector) -> Result<ModuleVector> {
        if x.n() != self.n || x.d() != self.d() {
            return Err(Error::ShapeMismatch(format!(
                "operator {}x{} applied to vector {}x{}",
                self.n,
                self.d(),
                x.n(),
                x.d()
            )));
        }
        let mut out = ModuleVector::zeros(self.n, self.d());
        for t in 0..self.d() {
            out.set_component(t, &(&self.blocks[t] * x.component(t)));
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        ModuleOperator {
            n: self.n,
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(ModuleOperator {
            n: self.n,
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(ModuleOperator {
            n: self.n,
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(ModuleOperator {
            n: self.n,
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, z: Complex64) -> Self {
        ModuleOperator {
            n: self.n,
            blocks: self.blocks.iter().map(|b| b * z).collect(),
        }
    }

    /// Left action of a central algebra element: block `t` is scaled by
    /// `a_t`.
    pub fn mul_alg(&self, a: &AlgebraElement) -> Result<Self> {
        if a.d() != self.d() {
            return Err(Error::DescriptorMismatch(self.d(), a.d()));
        }
        Ok(ModuleOperator {
            n: self.n,
            blocks: self
                .blocks
                .iter()
                .enumerate()
                .map(|(t, b)| b * a.component(t))
                .collect(),
        })
    }

    /// Operator norm: the largest block spectral norm.
    pub fn op_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::spectral_norm)
            .fold(0.0, f64::max)
    }

    /// Smallest singular value over all blocks.
    pub fn min_singular_value(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::smallest_singular_value)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_invertible(&self, tol: f64) -> bool {
        self.min_singular_value() > tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.blocks
            .iter()
            .all(|b| linalg::hermitian_defect(b) <= tol * linalg::spectral_norm(b).max(1.0))
    }

    /// Most negative eigenvalue over all Hermitian parts, with a witness
    /// vector supported on the worst component.
    pub fn min_eigenvalue(&self) -> (f64, ModuleVector) {
        let mut worst = f64::INFINITY;
        let mut witness = ModuleVector::zeros(self.n, self.d());
        for (t, b) in self.blocks.iter().enumerate() {
            let (lam, v) = linalg::min_eig(b);
            if lam < worst {
                worst = lam;
                witness = ModuleVector::zeros(self.n, self.d());
                witness.set_component(t, &v);
            }
        }
        (worst, witness)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| linalg::max_eig(b).0)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Membership in `GL^+(H)`: Hermitian, positive semidefinite and
    /// invertible at `tol`.
    pub fn is_gl_plus(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        let (lam, _) = self.min_eigenvalue();
        lam > tol
    }

    pub fn commutation_defect(&self, other: &Self) -> Result<f64> {
        let ab = self.compose(other)?;
        let ba = other.compose(self)?;
        Ok(ab.sub(&ba)?.op_norm())
    }

    pub fn try_inverse(&self) -> Result<Self> {
        let mut blocks = Vec::with_capacity(self.d());
        for b in &self.blocks {
            blocks.push(b.clone().try_inverse().ok_or(Error::SingularOperator)?);
        }
        Ok(ModuleOperator { n: self.n, blocks })
    }

    /// Hermitian positive square root, componentwise.
    pub fn psd_sqrt(&self) -> Self {
        ModuleOperator {
            n: self.n,
            blocks: self.blocks.iter().map(linalg::psd_sqrt).collect(),
        }
    }

    /// Moore-Penrose inverse, blockwise, with rank cutoff `tol` relative
    /// to the largest singular value.
    pub fn moore_penrose(&self, tol: f64) -> Self {
        ModuleOperator {
            n: self.n,
            blocks: self.blocks.iter().map(|b| linalg::pinv(b, tol)).collect(),
        }
    }

    /// Orthonormal basis of the range, componentwise.
    pub fn range_projection(&self, tol: f64) -> Submodule {
        let bases = self
            .blocks
            .iter()
            .map(|b| linalg::orthonormal_columns(b, tol))
            .collect();
        Submodule::from_bases(self.n, bases)
    }

    /// Orthonormal basis of the kernel, componentwise.
    pub fn kernel_projection(&self, tol: f64) -> Submodule {
        let bases = self
            .blocks
            .iter()
            .map(|b| linalg::kernel_basis(b, tol))
            .collect();
        Submodule::from_bases(self.n, bases)
    }
}

/// Checks `<T h, T h> <= ||T||^2 <h, h>` componentwise.
pub fn prop25_check(t: &ModuleOperator, h: &ModuleVector, tol: f64) -> Result<bool> {
    let th = t.apply(h)?;
    let lhs = th.inner(&th)?;
    let rhs = h.inner(h)?.scale(t.op_norm().powi(2));
    lhs.leq(&rhs, tol)
}

/// Surjectivity test: `m` is the bounded-below constant of the adjoint
/// (the smallest singular value over blocks); `T` is surjective iff
/// `m > tol`.
pub fn lemma26_check(t: &ModuleOperator, tol: f64) -> (bool, f64) {
    let m = t.min_singular_value();
    (m > tol, m)
}

/// The case detected by `lemma27_bounds`. On square blocks injectivity
/// with closed range and surjectivity coincide, so a nonsingular operator
/// reports `Both`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InvertibilityCase {
    Injective,
    Surjective,
    Both,
}

/// Eigenvalue sandwich for `T^* T` (equivalently `T T^*`):
/// `lower * I <= T^* T <= upper * I`, with `lower = min sigma^2` and
/// `upper = ||T||^2`. Fails with `NeitherCase` when some block is
/// singular.
pub fn lemma27_bounds(t: &ModuleOperator, tol: f64) -> Result<(f64, f64, InvertibilityCase)> {
    let smin = t.min_singular_value();
    if smin <= tol {
        return Err(Error::NeitherCase);
    }
    let lower = smin * smin;
    let upper = t.op_norm().powi(2);
    // verify the sandwich as PSD checks
    let tt = t.adjoint().compose(t)?;
    let id = ModuleOperator::identity(t.n(), t.d());
    let scale = upper.max(1.0);
    let (low_defect, _) = tt.sub(&id.scale(linalg::creal(lower)))?.min_eigenvalue();
    let (up_defect, _) = id
        .scale(linalg::creal(upper))
        .sub(&tt)?
        .min_eigenvalue();
    if low_defect < -1e-9 * scale || up_defect < -1e-9 * scale {
        return Err(Error::ValidationFailed(format!(
            "eigenvalue sandwich violated: defects {low_defect:.3e}, {up_defect:.3e}"
        )));
    }
    Ok((lower, upper, InvertibilityCase::Both))
}

/// Outcome of the Douglas range-inclusion test.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DouglasReport {
    pub inclusion: bool,
    /// Smallest constant with `T' T'^* <= lambda T T^*` when inclusion
    /// holds.
    pub lambda: Option<f64>,
    /// `sqrt(lambda)`, the factorisation norm bound.
    pub mu: Option<f64>,
}

/// Decides `Im(T') ⊆ Im(T)` by a componentwise rank test and, when the
/// inclusion holds, reports the smallest feasible Douglas constant.
pub fn douglas_check(t_prime: &ModuleOperator, t: &ModuleOperator, tol: f64) -> Result<DouglasReport> {
    if t_prime.n() != t.n() || t_prime.d() != t.d() {
        return Err(Error::ShapeMismatch("operator dims differ".into()));
    }
    let mut lambda: f64 = 0.0;
    for tc in 0..t.d() {
        let range = linalg::orthonormal_columns(t.block(tc), tol);
        let tp = t_prime.block(tc);
        let outside = tp - &range * (range.adjoint() * tp);
        let scale = linalg::spectral_norm(tp).max(1.0);
        if linalg::spectral_norm(&outside) > tol * scale {
            return Ok(DouglasReport {
                inclusion: false,
                lambda: None,
                mu: None,
            });
        }
        let a = tp * tp.adjoint();
        let b = t.block(tc) * t.block(tc).adjoint();
        match linalg::pencil_sup(&a, &b, tol) {
            Some(lam) => lambda = lambda.max(lam),
            None => {
                return Ok(DouglasReport {
                    inclusion: false,
                    lambda: None,
                    mu: None,
                })
            }
        }
    }
    Ok(DouglasReport {
        inclusion: true,
        lambda: Some(lambda),
        mu: Some(lambda.sqrt()),
    })
}

/// Transport of a projection through an invertible operator.
pub struct ProjectionTransport {
    /// `T M`, orthonormalised from the basis image.
    pub image: Submodule,
    /// `T M` via the formula `T pi_M T^{-1}`, when the hypothesis
    /// `T^* T M ⊆ M` holds.
    pub formula: Option<Submodule>,
    /// Projection distance between the two constructions.
    pub residual: Option<f64>,
    /// Residual of the hypothesis check `||(I - pi_M) T^* T pi_M||`,
    /// relative to `||T^* T||`.
    pub hypothesis_residual: f64,
    pub hypothesis_ok: bool,
}

/// Computes `T M` two ways and certifies `pi_{TM} = T pi_M T^{-1}` under
/// the hypothesis `T^* T M ⊆ M`. When the hypothesis fails only the
/// basis-image construction is returned, flagged.
pub fn projection_transport(
    t: &ModuleOperator,
    m: &Submodule,
    tol: f64,
) -> Result<ProjectionTransport> {
    if t.n() != m.n() || t.d() != m.d() {
        return Err(Error::ShapeMismatch("operator vs submodule dims".into()));
    }
    if !t.is_invertible(tol) {
        return Err(Error::SingularOperator);
    }
    let tt = t.adjoint().compose(t)?;
    let pi = m.projection_operator();
    let id = ModuleOperator::identity(t.n(), t.d());
    let leak = id.sub(&pi)?.compose(&tt)?.compose(&pi)?.op_norm();
    let hypothesis_residual = leak / tt.op_norm().max(1.0);
    let hypothesis_ok = hypothesis_residual <= tol.max(1e-12);

    let image = m.image_under(t, tol)?;
    if !hypothesis_ok {
        return Ok(ProjectionTransport {
            image,
            formula: None,
            residual: None,
            hypothesis_residual,
            hypothesis_ok,
        });
    }
    let t_inv = t.try_inverse()?;
    let transported = t.compose(&pi)?.compose(&t_inv)?;
    // the transported operator is the projection onto T M; extract its
    // range at a fixed spectral cutoff
    let formula = transported.range_projection(0.5);
    let residual = image.projection_distance(&formula);
    Ok(ProjectionTransport {
        image,
        formula: Some(formula),
        residual: Some(residual),
        hypothesis_residual,
        hypothesis_ok,
    })
}
