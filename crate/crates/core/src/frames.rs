//! Weighted families of submodules with two positive invertible controls
//! and a range operator `K`: validation, the controlled analysis /
//! synthesis / frame operators, optimal algebra-valued frame bounds,
//! membership tests for every frame class, reconstruction, and the frame
//! transforms (operator images, range-inclusion transfer, combinations of
//! range operators, controlled/uncontrolled conversion, componentwise
//! algebra morphisms).

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraElement;
use crate::certificates::{BoundValue, Certificate, EvidenceLabel};
use crate::instances::random_vector;
use crate::linalg::{self, CMat};
use crate::module::{ModuleVector, SequenceVector, Submodule};
use crate::operators::{douglas_check, ModuleOperator};
use crate::{Error, Result};

/// The membership classes, ordered by how much structure they use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MembershipClass {
    /// Upper inequality only, with the controlled frame operator.
    Bessel,
    /// Both inequalities against `<f, f>`, without controls.
    Fusion,
    /// Lower inequality against `<K^* f, K^* f>`, without controls.
    KFusion,
    /// Both inequalities against `<f, f>`, with controls.
    ControlledFusion,
    /// Lower inequality against `<K^* f, K^* f>`, with controls.
    ControlledKFusion,
}

impl MembershipClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            MembershipClass::Bessel => "bessel",
            MembershipClass::Fusion => "fusion",
            MembershipClass::KFusion => "k_fusion",
            MembershipClass::ControlledFusion => "controlled_fusion",
            MembershipClass::ControlledKFusion => "controlled_k_fusion",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "bessel" => Ok(MembershipClass::Bessel),
            "fusion" => Ok(MembershipClass::Fusion),
            "k_fusion" => Ok(MembershipClass::KFusion),
            "controlled_fusion" => Ok(MembershipClass::ControlledFusion),
            "controlled_k_fusion" => Ok(MembershipClass::ControlledKFusion),
            other => Err(Error::Parse(format!("unknown membership class '{other}'"))),
        }
    }

    fn controlled(&self) -> bool {
        matches!(
            self,
            MembershipClass::Bessel
                | MembershipClass::ControlledFusion
                | MembershipClass::ControlledKFusion
        )
    }

    fn against_k(&self) -> bool {
        matches!(
            self,
            MembershipClass::KFusion | MembershipClass::ControlledKFusion
        )
    }

    fn has_lower(&self) -> bool {
        !matches!(self, MembershipClass::Bessel)
    }
}

/// Optimal algebra-valued frame bounds. Components where the block of `K`
/// vanishes leave the lower inequality vacuous; they are flagged
/// unconstrained, carry a `0` sentinel in `a_opt`, and are excluded from
/// the scalar summary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundsReport {
    pub a_opt: AlgebraElement,
    pub b_opt: AlgebraElement,
    /// Smallest constrained component of `a_opt`; `None` when every
    /// component is unconstrained.
    pub a_scalar: Option<f64>,
    pub b_scalar: f64,
    pub constrained: Vec<bool>,
}

impl BoundsReport {
    /// Frame decision from bound positivity: every constrained component
    /// of the lower bound exceeds `sqrt(tol)`.
    pub fn is_frame(&self, tol: f64) -> bool {
        self.a_opt
            .values()
            .iter()
            .zip(&self.constrained)
            .all(|(a, &c)| !c || a.re * a.re > tol)
    }

    /// Real (first-power) lower bound `A = a_scalar^2`.
    pub fn lower_real(&self) -> Option<f64> {
        self.a_scalar.map(|a| a * a)
    }

    /// Real (first-power) upper bound `B = b_scalar^2`.
    pub fn upper_real(&self) -> f64 {
        self.b_scalar * self.b_scalar
    }
}

/// Witness vectors attaining the scalar bound summaries.
#[derive(Clone, Debug)]
pub struct BoundsWitnesses {
    /// Attains the binding lower bound (when some component is
    /// constrained).
    pub lower: Option<ModuleVector>,
    /// Attains the largest upper bound.
    pub upper: ModuleVector,
}

/// A weighted family `{(W_i, w_i)}` with controls `C, C'` in `GL^+(H)`
/// and a range operator `K`.
#[derive(Clone, Debug)]
pub struct FrameSystem {
    submodules: Vec<Submodule>,
    weights: Vec<AlgebraElement>,
    control_c: ModuleOperator,
    control_cp: ModuleOperator,
    k: ModuleOperator,
    tol: f64,
    positive_cross: bool,
    cross_defect: f64,
}

impl FrameSystem {
    /// Validates shapes, weight positivity and the `GL^+` conditions on
    /// the controls, and records whether every cross operator
    /// `C'^* pi_{W_i} C` is Hermitian positive semidefinite. Systems
    /// failing that last flag can still be built; the operations that
    /// need the positive square root error out instead.
    pub fn new(
        submodules: Vec<Submodule>,
        weights: Vec<AlgebraElement>,
        control_c: ModuleOperator,
        control_cp: ModuleOperator,
        k: ModuleOperator,
        tol: f64,
    ) -> Result<Self> {
        if submodules.is_empty() {
            return Err(Error::ValidationFailed("family needs m >= 1".into()));
        }
        if submodules.len() != weights.len() {
            return Err(Error::ValidationFailed(format!(
                "{} submodules vs {} weights",
                submodules.len(),
                weights.len()
            )));
        }
        let n = submodules[0].n();
        let d = submodules[0].d();
        for (i, w) in submodules.iter().enumerate() {
            if w.n() != n || w.d() != d {
                return Err(Error::ValidationFailed(format!(
                    "submodule {i} has shape {}x{}, expected {}x{}",
                    w.n(),
                    w.d(),
                    n,
                    d
                )));
            }
        }
        for (i, w) in weights.iter().enumerate() {
            if w.d() != d {
                return Err(Error::ValidationFailed(format!(
                    "weight {i} has d = {}, expected {d}",
                    w.d()
                )));
            }
            if !w.is_strictly_nonzero(tol) {
                return Err(Error::ValidationFailed(format!(
                    "weight {i} is not strictly nonzero"
                )));
            }
        }
        for (name, op) in [("C", &control_c), ("C'", &control_cp), ("K", &k)] {
            if op.n() != n || op.d() != d {
                return Err(Error::ValidationFailed(format!(
                    "operator {name} has shape {}x{}, expected {n}x{d}",
                    op.n(),
                    op.d()
                )));
            }
        }
        for (name, op) in [("C", &control_c), ("C'", &control_cp)] {
            if !op.is_gl_plus(tol) {
                return Err(Error::ValidationFailed(format!(
                    "control {name} is not positive invertible"
                )));
            }
        }
        let mut cross_defect: f64 = 0.0;
        let cp_adj = control_cp.adjoint();
        for w in &submodules {
            let x = cp_adj
                .compose(&w.projection_operator())?
                .compose(&control_c)?;
            let scale = x.op_norm().max(1.0);
            for t in 0..d {
                let block = x.block(t);
                let herm = linalg::hermitian_defect(block) / scale;
                let (lam, _) = linalg::min_eig(block);
                cross_defect = cross_defect.max(herm).max((-lam / scale).max(0.0));
            }
        }
        let positive_cross = cross_defect <= tol;
        Ok(FrameSystem {
            submodules,
            weights,
            control_c,
            control_cp,
            k,
            tol,
            positive_cross,
            cross_defect,
        })
    }

    pub fn n(&self) -> usize {
        self.submodules[0].n()
    }

    pub fn d(&self) -> usize {
        self.submodules[0].d()
    }

    pub fn m(&self) -> usize {
        self.submodules.len()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn submodules(&self) -> &[Submodule] {
        &self.submodules
    }

    pub fn weights(&self) -> &[AlgebraElement] {
        &self.weights
    }

    pub fn control_c(&self) -> &ModuleOperator {
        &self.control_c
    }

    pub fn control_cp(&self) -> &ModuleOperator {
        &self.control_cp
    }

    pub fn k(&self) -> &ModuleOperator {
        &self.k
    }

    pub fn positive_cross(&self) -> bool {
        self.positive_cross
    }

    pub fn cross_defect(&self) -> f64 {
        self.cross_defect
    }

    fn require_positive_cross(&self) -> Result<()> {
        if self.positive_cross {
            Ok(())
        } else {
            Err(Error::CrossNotPositive(self.cross_defect))
        }
    }

    /// The cross operator `C'^* pi_{W_i} C`.
    fn cross_operator(&self, i: usize) -> Result<ModuleOperator> {
        self.control_cp
            .adjoint()
            .compose(&self.submodules[i].projection_operator())?
            .compose(&self.control_c)
    }

    /// The controlled frame operator `S = sum_i w_i^2 C'^* pi_{W_i} C`.
    pub fn frame_operator(&self) -> Result<ModuleOperator> {
        let mut s = ModuleOperator::zero(self.n(), self.d());
        for i in 0..self.m() {
            let w2 = self.weights[i].mul(&self.weights[i])?;
            s = s.add(&self.cross_operator(i)?.mul_alg(&w2)?)?;
        }
        Ok(s)
    }

    /// The plain frame operator `sum_i w_i^2 pi_{W_i}` (controls dropped).
    pub fn uncontrolled_frame_operator(&self) -> Result<ModuleOperator> {
        let mut s = ModuleOperator::zero(self.n(), self.d());
        for i in 0..self.m() {
            let w2 = self.weights[i].mul(&self.weights[i])?;
            s = s.add(&self.submodules[i].projection_operator().mul_alg(&w2)?)?;
        }
        Ok(s)
    }

    /// Same family with both controls replaced by the identity.
    pub fn with_identity_controls(&self) -> Result<FrameSystem> {
        FrameSystem::new(
            self.submodules.clone(),
            self.weights.clone(),
            ModuleOperator::identity(self.n(), self.d()),
            ModuleOperator::identity(self.n(), self.d()),
            self.k.clone(),
            self.tol,
        )
    }

    /// The maps `f -> w_i (C'^* pi_{W_i} C)^{1/2} f` entering analysis and
    /// synthesis; requires every cross operator to be positive.
    pub fn analysis_operators(&self) -> Result<Vec<ModuleOperator>> {
        self.require_positive_cross()?;
        (0..self.m())
            .map(|i| self.cross_operator(i)?.psd_sqrt().mul_alg(&self.weights[i]))
            .collect()
    }

    /// Controlled analysis operator.
    pub fn analysis(&self, f: &ModuleVector) -> Result<SequenceVector> {
        let ops = self.analysis_operators()?;
        let items = ops
            .iter()
            .map(|r| r.apply(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(SequenceVector::new(items))
    }

    /// Controlled synthesis operator, the adjoint of analysis.
    pub fn synthesis(&self, seq: &SequenceVector) -> Result<ModuleVector> {
        if seq.len() != self.m() {
            return Err(Error::ShapeMismatch(format!(
                "sequence of length {} vs family of size {}",
                seq.len(),
                self.m()
            )));
        }
        let ops = self.analysis_operators()?;
        let mut out = ModuleVector::zeros(self.n(), self.d());
        for (r, y) in ops.iter().zip(seq.items()) {
            out = out.add(&r.adjoint().apply(y)?)?;
        }
        Ok(out)
    }

    /// The middle term of the frame inequality,
    /// `sum_i w_i^2 <pi_{W_i} C f, pi_{W_i} C' f>`, assembled term by
    /// term.
    pub fn frame_sum(&self, f: &ModuleVector) -> Result<AlgebraElement> {
        let cf = self.control_c.apply(f)?;
        let cpf = self.control_cp.apply(f)?;
        let mut acc = AlgebraElement::zero(self.d());
        for i in 0..self.m() {
            let w2 = self.weights[i].mul(&self.weights[i])?;
            let term = self.submodules[i]
                .project(&cf)?
                .inner(&self.submodules[i].project(&cpf)?)?;
            acc = acc.add(&w2.mul(&term)?)?;
        }
        Ok(acc)
    }

    /// Optimal algebra-valued bounds of the controlled frame inequality.
    pub fn optimal_star_bounds(&self) -> Result<BoundsReport> {
        Ok(self.optimal_star_bounds_detailed()?.0)
    }

    pub fn optimal_star_bounds_detailed(&self) -> Result<(BoundsReport, BoundsWitnesses)> {
        let s = self.frame_operator()?;
        self.bounds_for_operator_detailed(&s, &self.k, true)
    }

    /// Optimal bounds with the lower inequality measured against an
    /// arbitrary operator in place of `K`.
    pub fn bounds_for_operator(&self, k: &ModuleOperator) -> Result<BoundsReport> {
        let s = self.frame_operator()?;
        Ok(self.bounds_for_operator_detailed(&s, k, true)?.0)
    }

    fn bounds_for_operator_detailed(
        &self,
        s: &ModuleOperator,
        k: &ModuleOperator,
        require_cross: bool,
    ) -> Result<(BoundsReport, BoundsWitnesses)> {
        if require_cross {
            self.require_positive_cross()?;
        }
        let (n, d) = (self.n(), self.d());
        let tol = self.tol;
        let mut a_vals = Vec::with_capacity(d);
        let mut b_vals = Vec::with_capacity(d);
        let mut constrained = Vec::with_capacity(d);
        let mut a_scalar: Option<(f64, usize, linalg::CVec)> = None;
        let mut b_best: Option<(f64, usize, linalg::CVec)> = None;
        for t in 0..d {
            let st = linalg::hermitize(s.block(t));
            let (lam_max, bvec) = linalg::max_eig(&st);
            let b_t = lam_max.max(0.0).sqrt();
            b_vals.push(b_t);
            if b_best.as_ref().is_none_or(|(b, _, _)| b_t > *b) {
                b_best = Some((b_t, t, bvec));
            }
            let p = k.block(t) * k.block(t).adjoint();
            match linalg::pencil_inf(&st, &p, tol) {
                None => {
                    a_vals.push(0.0);
                    constrained.push(false);
                }
                Some(out) => {
                    let a_t = out.value.sqrt();
                    a_vals.push(a_t);
                    constrained.push(true);
                    if a_scalar.as_ref().is_none_or(|(a, _, _)| a_t < *a) {
                        a_scalar = Some((a_t, t, out.witness));
                    }
                }
            }
        }
        let (b_scalar, b_t, b_vec) = b_best.expect("d >= 1");
        let mut upper = ModuleVector::zeros(n, d);
        upper.set_component(b_t, &b_vec);
        let lower = a_scalar.as_ref().map(|(_, t, v)| {
            let mut w = ModuleVector::zeros(n, d);
            w.set_component(*t, v);
            w
        });
        let report = BoundsReport {
            a_opt: AlgebraElement::from_reals(&a_vals),
            b_opt: AlgebraElement::from_reals(&b_vals),
            a_scalar: a_scalar.map(|(a, _, _)| a),
            b_scalar,
            constrained,
        };
        Ok((report, BoundsWitnesses { lower, upper }))
    }

    /// Exact membership decision via componentwise PSD tests. With
    /// candidate bounds the tests are
    /// `S_t - |A_t|^2 (K_t K_t^* or I) >= -tol` and
    /// `|B_t|^2 I - S_t >= -tol`; without candidates the decision comes
    /// from the positivity of the optimal bounds. Returns a witness
    /// vector on failure.
    pub fn verify_membership(
        &self,
        class: MembershipClass,
        a: Option<&AlgebraElement>,
        b: Option<&AlgebraElement>,
    ) -> Result<Certificate> {
        let k = if class.against_k() {
            self.k.clone()
        } else {
            ModuleOperator::identity(self.n(), self.d())
        };
        let s = if class.controlled() {
            self.frame_operator()?
        } else {
            self.uncontrolled_frame_operator()?
        };
        self.membership_inner(class.as_str(), &s, &k, class.has_lower(), a, b)
    }

    /// Membership of the controlled inequality against an arbitrary
    /// operator in place of `K`.
    pub fn verify_membership_for_operator(
        &self,
        k: &ModuleOperator,
        a: Option<&AlgebraElement>,
        b: Option<&AlgebraElement>,
    ) -> Result<Certificate> {
        let s = self.frame_operator()?;
        self.membership_inner("controlled_k_fusion(operator)", &s, k, true, a, b)
    }

    fn membership_inner(
        &self,
        class_name: &str,
        s: &ModuleOperator,
        k: &ModuleOperator,
        has_lower: bool,
        a: Option<&AlgebraElement>,
        b: Option<&AlgebraElement>,
    ) -> Result<Certificate> {
        let tol = self.tol;
        let d = self.d();
        if let Some(a) = a {
            if !a.is_strictly_nonzero(tol) {
                return Err(Error::ValidationFailed(
                    "candidate lower bound must be strictly nonzero".into(),
                ));
            }
        }
        if let Some(b) = b {
            if !b.is_strictly_nonzero(tol) {
                return Err(Error::ValidationFailed(
                    "candidate upper bound must be strictly nonzero".into(),
                ));
            }
        }
        let mut cert = Certificate::new(format!("membership: {class_name}"));
        cert.label = EvidenceLabel::Proof;
        let herm_defect = s
            .blocks()
            .iter()
            .map(linalg::hermitian_defect)
            .fold(0.0, f64::max)
            / s.op_norm().max(1.0);
        cert.hypothesis("frame_operator_self_adjoint", herm_defect <= tol, herm_defect);

        let mut ok = true;
        let mut worst: Option<(f64, usize, linalg::CVec)> = None;
        for t in 0..d {
            let st = linalg::hermitize(s.block(t));
            // upper side
            match b {
                Some(b) => {
                    let bound = b.component(t).norm_sqr();
                    let diff = CMat::identity(self.n(), self.n()) * linalg::creal(bound) - &st;
                    let (lam, v) = linalg::min_eig(&diff);
                    cert.residual(format!("upper_defect[{t}]"), (-lam).max(0.0));
                    if lam < -tol {
                        ok = false;
                        if worst.as_ref().is_none_or(|(w, _, _)| lam < *w) {
                            worst = Some((lam, t, v));
                        }
                    }
                }
                None => {
                    let (lam_max, _) = linalg::max_eig(&st);
                    cert.residual(format!("upper_opt[{t}]"), lam_max.max(0.0).sqrt());
                }
            }
            if !has_lower {
                continue;
            }
            let p = k.block(t) * k.block(t).adjoint();
            match a {
                Some(a) => {
                    let bound = a.component(t).norm_sqr();
                    let diff = &st - &p * linalg::creal(bound);
                    let (lam, v) = linalg::min_eig(&diff);
                    cert.residual(format!("lower_defect[{t}]"), (-lam).max(0.0));
                    if lam < -tol {
                        ok = false;
                        if worst.as_ref().is_none_or(|(w, _, _)| lam < *w) {
                            worst = Some((lam, t, v));
                        }
                    }
                }
                None => match linalg::pencil_inf(&st, &p, tol) {
                    None => {
                        // vacuous lower inequality; S_t must merely be PSD
                        let (lam, v) = linalg::min_eig(&st);
                        if lam < -tol {
                            ok = false;
                            if worst.as_ref().is_none_or(|(w, _, _)| lam < *w) {
                                worst = Some((lam, t, v));
                            }
                        }
                    }
                    Some(out) => {
                        cert.residual(format!("lower_opt[{t}]"), out.value.sqrt());
                        if out.value <= tol {
                            ok = false;
                            let lam = -out.value;
                            if worst.as_ref().is_none_or(|(w, _, _)| lam < *w) {
                                worst = Some((lam, t, out.witness.clone()));
                            }
                        }
                    }
                },
            }
        }
        cert.conclusion_verified = ok;
        if let Some((_, t, v)) = worst {
            let mut w = ModuleVector::zeros(self.n(), self.d());
            w.set_component(t, &v);
            cert.witness = Some(w);
        }
        Ok(cert)
    }

    /// An independent upper-bound check: the operator norm of the
    /// synthesis operator, computed from the stacked analysis blocks,
    /// compared against `||B||`, cross-checked with the PSD membership
    /// test for the same bound.
    pub fn verify_bessel_via_synthesis(&self, b: &AlgebraElement) -> Result<Certificate> {
        let ops = self.analysis_operators()?;
        let (n, m) = (self.n(), self.m());
        let mut norm: f64 = 0.0;
        for t in 0..self.d() {
            let mut stacked = CMat::zeros(n, n * m);
            for (i, r) in ops.iter().enumerate() {
                let block = r.block(t);
                for j in 0..n {
                    stacked.set_column(i * n + j, &block.column(j));
                }
            }
            norm = norm.max(linalg::spectral_norm(&stacked));
        }
        let mut cert = Certificate::new("bessel bound via synthesis operator norm");
        cert.label = EvidenceLabel::Proof;
        let bn = b.norm();
        let norm_ok = norm <= bn + self.tol;
        cert.residual("synthesis_norm", norm);
        cert.residual("bound_norm", bn);
        cert.hypothesis("synthesis_norm_le_bound", norm_ok, (norm - bn).max(0.0));
        let psd = self.verify_membership(MembershipClass::Bessel, None, Some(b))?;
        cert.hypothesis(
            "psd_membership_agrees",
            psd.conclusion_verified == norm_ok,
            0.0,
        );
        cert.conclusion_verified = norm_ok;
        Ok(cert)
    }

    /// Sampling check of the norm form of the frame inequality:
    /// `||A^{-1}||^{-2} ||<K^* f, K^* f>|| <= ||sum_i ...|| <= ||B||^2 ||<f, f>||`
    /// over seeded random vectors. Evidence, not proof.
    pub fn norm_characterization(
        &self,
        a: &AlgebraElement,
        b: &AlgebraElement,
        samples: usize,
        seed: u64,
    ) -> Result<Certificate> {
        if !a.is_strictly_nonzero(self.tol) || !b.is_strictly_nonzero(self.tol) {
            return Err(Error::ValidationFailed(
                "bounds must be strictly nonzero".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a_inv_norm = a.inv(self.tol)?.norm();
        let lower_factor = a_inv_norm.powi(-2);
        let upper_factor = b.norm().powi(2);
        let k_adj = self.k.adjoint();
        let mut max_violation: f64 = 0.0;
        let mut probe = |f: &ModuleVector| -> Result<()> {
            let mid = self.frame_sum(f)?.norm();
            let kf = k_adj.apply(f)?;
            let lower = lower_factor * kf.inner(&kf)?.norm();
            let upper = upper_factor * f.inner(f)?.norm();
            let scale = mid.max(upper).max(1e-300);
            max_violation = max_violation
                .max((lower - mid) / scale)
                .max((mid - upper) / scale);
            Ok(())
        };
        // the eigenvector witnesses of the optimal bounds seed the sampler,
        // so infeasible candidates are caught even in thin directions
        if self.positive_cross {
            let (_, witnesses) = self.optimal_star_bounds_detailed()?;
            if let Some(w) = &witnesses.lower {
                probe(w)?;
            }
            probe(&witnesses.upper)?;
        }
        for _ in 0..samples {
            probe(&random_vector(&mut rng, self.n(), self.d()))?;
        }
        let mut cert = Certificate::new("norm characterization of the frame inequality");
        cert.label = EvidenceLabel::Evidence;
        cert.residual("max_relative_violation", max_violation);
        cert.residual("samples", samples as f64);
        cert.conclusion_verified = max_violation <= self.tol.max(1e-12);
        Ok(cert)
    }

    /// Reconstruction through the inverse frame operator: returns
    /// `sum_i w_i^2 C'^* pi_{W_i} C S^{-1} f`, assembled term by term,
    /// together with the residual `||f - fhat||`.
    pub fn reconstruct(&self, f: &ModuleVector) -> Result<(ModuleVector, f64)> {
        let s = self.frame_operator()?;
        let smin = s.min_singular_value();
        if smin <= self.tol {
            return Err(Error::SingularFrameOperator(smin));
        }
        let g = s.try_inverse()?.apply(f)?;
        let mut fhat = ModuleVector::zeros(self.n(), self.d());
        for i in 0..self.m() {
            let w2 = self.weights[i].mul(&self.weights[i])?;
            let term = self.cross_operator(i)?.apply(&g)?.mul_alg(&w2)?;
            fhat = fhat.add(&term)?;
        }
        let residual = f.sub(&fhat)?.module_norm();
        Ok((fhat, residual))
    }

    /// Transforms the family by an invertible operator `U` under the
    /// hypotheses `U^* U W_i ⊆ W_i` and commutation of `U^{-1}` with
    /// `C`, `C'` and `K^*`. Returns the transformed family and the
    /// predicted bound envelope, the input bounds scaled by
    /// `||U|| ||U^{-1}||`.
    pub fn transform_frame(&self, u: &ModuleOperator) -> Result<(FrameSystem, BoundsReport)> {
        if !u.is_invertible(self.tol) {
            return Err(Error::SingularOperator);
        }
        let uu = u.adjoint().compose(u)?;
        let id = ModuleOperator::identity(self.n(), self.d());
        for (i, w) in self.submodules.iter().enumerate() {
            let pi = w.projection_operator();
            let leak = id.sub(&pi)?.compose(&uu)?.compose(&pi)?.op_norm();
            if leak > self.tol * uu.op_norm().max(1.0) {
                return Err(Error::HypothesisFailed(format!(
                    "U^* U does not leave W_{i} invariant (leak {leak:.3e})"
                )));
            }
        }
        let u_inv = u.try_inverse()?;
        for (name, x) in [
            ("C", &self.control_c),
            ("C'", &self.control_cp),
            ("K^*", &self.k.adjoint()),
        ] {
            let defect = u_inv.commutation_defect(x)?;
            if defect > self.tol * (u_inv.op_norm() * x.op_norm()).max(1.0) {
                return Err(Error::HypothesisFailed(format!(
                    "U^{{-1}} does not commute with {name} (defect {defect:.3e})"
                )));
            }
        }
        let submodules = self
            .submodules
            .iter()
            .map(|w| w.image_under(u, self.tol))
            .collect::<Result<Vec<_>>>()?;
        let transformed = FrameSystem::new(
            submodules,
            self.weights.clone(),
            self.control_c.clone(),
            self.control_cp.clone(),
            self.k.clone(),
            self.tol,
        )?;
        let bounds = self.optimal_star_bounds()?;
        let kappa = u.op_norm() * u_inv.op_norm();
        let predicted = BoundsReport {
            a_opt: bounds.a_opt.scale(1.0 / kappa),
            b_opt: bounds.b_opt.scale(kappa),
            a_scalar: bounds.a_scalar.map(|a| a / kappa),
            b_scalar: bounds.b_scalar * kappa,
            constrained: bounds.constrained.clone(),
        };
        Ok((transformed, predicted))
    }

    /// Transfers the frame property to another operator `M` whose range
    /// sits inside the range of `K`, with lower bound `A / sqrt(lambda')`
    /// from the Douglas constant, re-verified by the PSD membership test.
    pub fn transfer_by_range_inclusion(&self, m_op: &ModuleOperator) -> Result<Certificate> {
        let bounds = self.optimal_star_bounds()?;
        if !bounds.is_frame(self.tol) {
            return Err(Error::NotAFrame(
                "lower bound is not strictly positive".into(),
            ));
        }
        let report = douglas_check(m_op, &self.k, self.tol)?;
        if !report.inclusion {
            return Err(Error::InclusionFailed(
                "Im(M) is not contained in Im(K)".into(),
            ));
        }
        let lambda = report.lambda.unwrap_or(0.0);
        let mut cert = Certificate::new("frame transfer under range inclusion");
        cert.label = EvidenceLabel::Proof;
        cert.hypothesis("range_inclusion", true, 0.0);
        cert.residual("lambda", lambda);
        if lambda <= self.tol {
            // M vanishes; the lower inequality is vacuous
            cert.conclusion_verified = true;
            cert.predicted_bound = Some(BoundValue::Element(bounds.a_opt.clone()));
            return Ok(cert);
        }
        let scale = 1.0 / lambda.sqrt();
        let candidate = AlgebraElement::from_reals(
            &bounds
                .a_opt
                .values()
                .iter()
                .zip(&bounds.constrained)
                .map(|(a, &c)| if c { a.re * scale } else { 1.0 })
                .collect::<Vec<_>>(),
        );
        let upper = AlgebraElement::from_reals(
            &bounds
                .b_opt
                .values()
                .iter()
                .map(|b| b.re.max(self.tol.sqrt()))
                .collect::<Vec<_>>(),
        );
        let membership = self.verify_membership_for_operator(m_op, Some(&candidate), Some(&upper))?;
        cert.predicted_bound = Some(BoundValue::Element(candidate));
        let measured = self.bounds_for_operator(m_op)?;
        cert.measured_bound = Some(BoundValue::Element(measured.a_opt.clone()));
        cert.conclusion_verified = membership.conclusion_verified;
        cert.merge_residuals("membership", &membership);
        Ok(cert)
    }

    /// Certifies the frame property for `alpha K1 + beta K2` and for
    /// `K1 K2` when the adjoint ranges of `K1` and `K2` are orthogonal,
    /// using the combination bounds `A1 A2 B^{-1/2}` with
    /// `B = |alpha|^2 A2 A2^* + |beta|^2 A1 A1^* + 1`, and
    /// `A1 ||K2^*||^{-1}`; both are confirmed by the membership test.
    pub fn combine_k_operators(
        &self,
        k1: &ModuleOperator,
        k2: &ModuleOperator,
        alpha: Complex64,
        beta: Complex64,
    ) -> Result<Certificate> {
        let tol = self.tol;
        // orthogonality of the adjoint ranges
        let mut overlap: f64 = 0.0;
        for t in 0..self.d() {
            let b1 = linalg::orthonormal_columns(&k1.block(t).adjoint(), tol);
            let b2 = linalg::orthonormal_columns(&k2.block(t).adjoint(), tol);
            if b1.ncols() > 0 && b2.ncols() > 0 {
                overlap = overlap.max(linalg::spectral_norm(&(b1.adjoint() * b2)));
            }
        }
        if overlap > tol {
            return Err(Error::OrthogonalityFailed(overlap));
        }
        let bounds1 = self.bounds_for_operator(k1)?;
        let bounds2 = self.bounds_for_operator(k2)?;
        for (name, b) in [("K1", &bounds1), ("K2", &bounds2)] {
            if !b.is_frame(tol) {
                return Err(Error::NotAFrame(format!(
                    "family is not a frame for {name}"
                )));
            }
        }
        // unconstrained components contribute a harmless unit factor
        let fill = |b: &BoundsReport| -> Vec<f64> {
            b.a_opt
                .values()
                .iter()
                .zip(&b.constrained)
                .map(|(a, &c)| if c { a.re } else { 1.0 })
                .collect()
        };
        let a1 = fill(&bounds1);
        let a2 = fill(&bounds2);
        let d = self.d();
        let mut lower_sum = Vec::with_capacity(d);
        for t in 0..d {
            let b_elem = alpha.norm_sqr() * a2[t] * a2[t] + beta.norm_sqr() * a1[t] * a1[t] + 1.0;
            lower_sum.push(a1[t] * a2[t] / b_elem.sqrt());
        }
        let lower_sum = AlgebraElement::from_reals(&lower_sum);
        let upper_sum = bounds1.b_opt.add(&bounds2.b_opt)?;
        let upper_sum = AlgebraElement::from_reals(
            &upper_sum
                .values()
                .iter()
                .map(|b| b.re.max(tol.sqrt()))
                .collect::<Vec<_>>(),
        );
        let k_sum = k1.scale(alpha).add(&k2.scale(beta))?;

        let mut cert = Certificate::new("frame property for combined operators");
        cert.label = EvidenceLabel::Proof;
        cert.hypothesis("adjoint_ranges_orthogonal", true, overlap);
        let member_sum =
            self.verify_membership_for_operator(&k_sum, Some(&lower_sum), Some(&upper_sum))?;
        cert.hypothesis(
            "sum_membership",
            member_sum.conclusion_verified,
            0.0,
        );
        cert.merge_residuals("sum", &member_sum);

        let k_prod = k1.compose(k2)?;
        let k2_norm = k2.adjoint().op_norm();
        let member_prod = if k2_norm <= tol {
            // K1 K2 = 0: the lower inequality is vacuous
            self.verify_membership_for_operator(&k_prod, None, Some(&bounds1.b_opt.add(&AlgebraElement::constant(d, tol.sqrt()))?))?
        } else {
            let lower_prod = AlgebraElement::from_reals(
                &a1.iter().map(|a| a / k2_norm).collect::<Vec<_>>(),
            );
            let upper_prod = AlgebraElement::from_reals(
                &bounds1
                    .b_opt
                    .values()
                    .iter()
                    .map(|b| b.re.max(tol.sqrt()))
                    .collect::<Vec<_>>(),
            );
            self.verify_membership_for_operator(&k_prod, Some(&lower_prod), Some(&upper_prod))?
        };
        cert.hypothesis(
            "product_membership",
            member_prod.conclusion_verified,
            0.0,
        );
        cert.merge_residuals("product", &member_prod);
        cert.predicted_bound = Some(BoundValue::Element(lower_sum));
        cert.conclusion_verified =
            member_sum.conclusion_verified && member_prod.conclusion_verified;
        Ok(cert)
    }

    /// Certifies the equivalence between the plain and the controlled
    /// frame inequalities under the commutation hypotheses
    /// (`C C' = C' C`, `K` and the plain frame operator commute with both
    /// controls). Conversion factors: forward, the spectral bounds
    /// `m m'` and `M M'` of the controls; converse, `||(C C')^{1/2}||^2`
    /// down and `||(C C')^{-1/2}||^2` up.
    pub fn uncontrolled_equivalence(&self) -> Result<Certificate> {
        let tol = self.tol;
        let s_plain = self.uncontrolled_frame_operator()?;
        let mut cert = Certificate::new("controlled vs plain frame equivalence");
        cert.label = EvidenceLabel::Proof;
        let pairs: [(&str, &ModuleOperator, &ModuleOperator); 5] = [
            ("CC'=C'C", &self.control_c, &self.control_cp),
            ("KC=CK", &self.k, &self.control_c),
            ("KC'=C'K", &self.k, &self.control_cp),
            ("SC=CS", &s_plain, &self.control_c),
            ("SC'=C'S", &s_plain, &self.control_cp),
        ];
        for (name, x, y) in pairs {
            let defect = x.commutation_defect(y)?;
            let scale = (x.op_norm() * y.op_norm()).max(1.0);
            if defect > tol * scale {
                return Err(Error::HypothesisFailed(format!(
                    "{name} fails (defect {defect:.3e})"
                )));
            }
            cert.hypothesis(name, true, defect / scale);
        }
        // the (C, C) special case additionally wants C to commute with K^*
        let same_controls = self
            .control_c
            .sub(&self.control_cp)?
            .op_norm()
            <= tol * self.control_c.op_norm().max(1.0);
        if same_controls {
            let defect = self.control_c.commutation_defect(&self.k.adjoint())?;
            cert.hypothesis("CK*=K*C", defect <= tol * self.control_c.op_norm().max(1.0), defect);
        }

        let bounds_c = self.optimal_star_bounds()?;
        let bounds_u = self.with_identity_controls()?.optimal_star_bounds()?;
        let verdict_c = bounds_c.is_frame(tol);
        let verdict_u = bounds_u.is_frame(tol);
        cert.hypothesis("membership_verdicts_agree", verdict_c == verdict_u, 0.0);

        let m_low = -self.control_c.scale(linalg::creal(-1.0)).max_eigenvalue();
        let m_hi = self.control_c.max_eigenvalue();
        let mp_low = -self.control_cp.scale(linalg::creal(-1.0)).max_eigenvalue();
        let mp_hi = self.control_cp.max_eigenvalue();
        let cc = self.control_c.compose(&self.control_cp)?;
        let cc_max = cc.max_eigenvalue();
        let cc_min = -cc.scale(linalg::creal(-1.0)).max_eigenvalue();
        cert.residual("control_spectrum_mm'", m_low * mp_low);
        cert.residual("control_spectrum_MM'", m_hi * mp_hi);
        cert.residual("cc_half_norm_sq", cc_max);
        cert.residual("cc_inv_half_norm_sq", 1.0 / cc_min);

        let slack = 1e-8;
        let mut envelope_ok = true;
        if let (Some(a_c), Some(a_u)) = (bounds_c.lower_real(), bounds_u.lower_real()) {
            let forward = a_c >= m_low * mp_low * a_u - slack * (1.0 + a_c);
            let converse = a_u >= a_c / cc_max - slack * (1.0 + a_u);
            cert.hypothesis("lower_forward_envelope", forward, 0.0);
            cert.hypothesis("lower_converse_envelope", converse, 0.0);
            envelope_ok &= forward && converse;
        }
        let b_c = bounds_c.upper_real();
        let b_u = bounds_u.upper_real();
        let upper_forward = b_c <= m_hi * mp_hi * b_u + slack * (1.0 + b_c);
        let upper_converse = b_u <= b_c / cc_min + slack * (1.0 + b_u);
        cert.hypothesis("upper_forward_envelope", upper_forward, 0.0);
        cert.hypothesis("upper_converse_envelope", upper_converse, 0.0);
        envelope_ok &= upper_forward && upper_converse;

        cert.residual("controlled_lower", bounds_c.lower_real().unwrap_or(f64::NAN));
        cert.residual("plain_lower", bounds_u.lower_real().unwrap_or(f64::NAN));
        cert.residual("controlled_upper", b_c);
        cert.residual("plain_upper", b_u);
        cert.conclusion_verified = verdict_c == verdict_u && envelope_ok;
        Ok(cert)
    }

    /// Pushes the family through the coordinate-induced *-homomorphism
    /// `C^d -> C^{d'}` selecting component `index_map[t']` for slot `t'`.
    /// Verifies the intertwining identity
    /// `<S' Theta f, Theta g> = phi(<S f, g>)` on seeded random pairs and
    /// returns the transported family with the observed residual.
    pub fn transport_homomorphism(&self, index_map: &[usize]) -> Result<(FrameSystem, f64)> {
        if index_map.is_empty() {
            return Err(Error::BadIndexMap("empty index map".into()));
        }
        let d = self.d();
        for &t in index_map {
            if t >= d {
                return Err(Error::BadIndexMap(format!(
                    "index {t} out of range for d = {d}"
                )));
            }
        }
        let map_element = |a: &AlgebraElement| {
            AlgebraElement::new(index_map.iter().map(|&t| a.component(t)).collect())
        };
        let map_operator = |op: &ModuleOperator| {
            ModuleOperator::from_blocks(
                index_map.iter().map(|&t| op.block(t).clone()).collect(),
            )
            .expect("square blocks")
        };
        let submodules = self
            .submodules
            .iter()
            .map(|w| {
                Submodule::from_bases(
                    w.n(),
                    index_map.iter().map(|&t| w.basis(t).clone()).collect(),
                )
            })
            .collect::<Vec<_>>();
        let weights = self.weights.iter().map(map_element).collect::<Vec<_>>();
        let transported = FrameSystem::new(
            submodules,
            weights,
            map_operator(&self.control_c),
            map_operator(&self.control_cp),
            map_operator(&self.k),
            self.tol,
        )?;
        // intertwining check on random pairs
        let map_vector = |x: &ModuleVector| {
            let cols = index_map.iter().map(|&t| x.component(t)).collect::<Vec<_>>();
            ModuleVector::from_component_columns(cols)
        };
        let s_a = self.frame_operator()?;
        let s_b = transported.frame_operator()?;
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
        let mut residual: f64 = 0.0;
        for _ in 0..8 {
            let f = random_vector(&mut rng, self.n(), d);
            let g = random_vector(&mut rng, self.n(), d);
            let lhs = s_b.apply(&map_vector(&f))?.inner(&map_vector(&g))?;
            let rhs = map_element(&s_a.apply(&f)?.inner(&g)?);
            residual = residual.max(lhs.sub(&rhs)?.norm());
        }
        let scale = s_a.op_norm().max(1.0);
        if residual > self.tol * scale {
            return Err(Error::ValidationFailed(format!(
                "intertwining identity violated (residual {residual:.3e})"
            )));
        }
        Ok((transported, residual))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    use crate::instances::{
        alternating_example, commuting_instance, generate, parseval_coordinate, random_gl_plus,
        InstanceSpec,
    };
    use crate::operators::lemma26_check;

    fn parseval2() -> FrameSystem {
        parseval_coordinate(2, 1, 2).unwrap()
    }

    fn random_frame(seed: u64, d: usize, n: usize, m: usize, k_rank: usize) -> FrameSystem {
        generate(&InstanceSpec {
            d,
            n,
            m,
            rank_range: (1, n.min(3)),
            weight_range: (0.5, 1.5),
            control_condition: 4.0,
            k_rank,
            seed,
            preset: None,
        })
        .unwrap()
    }

    #[test]
    fn parseval_frame_operator_is_identity() {
        let f = parseval2();
        let s = f.frame_operator().unwrap();
        assert!(s
            .sub(&ModuleOperator::identity(2, 1))
            .unwrap()
            .op_norm()
            < 1e-12);
    }

    #[test]
    fn diagonal_controls_give_diagonal_frame_operator() {
        // W1 = span{e1}, W2 = span{e2}, C = C' = diag(2, 1) => S = diag(4, 1)
        let base = parseval2();
        let c = ModuleOperator::diagonal(&[vec![2.0, 1.0]]);
        let f = FrameSystem::new(
            base.submodules().to_vec(),
            base.weights().to_vec(),
            c.clone(),
            c,
            base.k().clone(),
            1e-9,
        )
        .unwrap();
        let s = f.frame_operator().unwrap();
        let expected = ModuleOperator::diagonal(&[vec![4.0, 1.0]]);
        assert!(s.sub(&expected).unwrap().op_norm() < 1e-12);

        let bounds = f.optimal_star_bounds().unwrap();
        assert!((bounds.a_scalar.unwrap() - 1.0).abs() < 1e-10);
        assert!((bounds.b_scalar - 2.0).abs() < 1e-10);
    }

    #[test]
    fn alternating_example_frame_operator_and_bounds() {
        let f = alternating_example(8, 1.0, 1.0).unwrap();
        let s = f.frame_operator().unwrap();
        let expected =
            ModuleOperator::diagonal(&[vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]]);
        assert!(s.sub(&expected).unwrap().op_norm() < 1e-12);

        let bounds = f.optimal_star_bounds().unwrap();
        assert!((bounds.a_scalar.unwrap() - 2.0).abs() < 1e-10);
        assert!((bounds.b_scalar - 1.0).abs() < 1e-10);
    }

    #[test]
    fn alternating_example_membership_verdicts() {
        let f = alternating_example(8, 1.0, 1.0).unwrap();
        // not a controlled fusion frame: the frame operator has a kernel
        let cert = f
            .verify_membership(MembershipClass::ControlledFusion, None, None)
            .unwrap();
        assert!(!cert.conclusion_verified);
        let witness = cert.witness.unwrap();
        // witness lives on the odd 1-based coordinates (even 0-based)
        let col = witness.component(0);
        let even_mass: f64 = (0..8).filter(|i| i % 2 == 1).map(|i| col[i].norm_sqr()).sum();
        assert!(even_mass < 1e-18);

        // but it is a K-adapted frame with bounds 2 and 1
        let two = AlgebraElement::constant(1, 2.0);
        let one = AlgebraElement::unit(1);
        let cert = f
            .verify_membership(MembershipClass::ControlledKFusion, Some(&two), Some(&one))
            .unwrap();
        assert!(cert.conclusion_verified);
    }

    #[test]
    fn analysis_of_parseval_basis_vector() {
        let f = parseval2();
        let e1 = ModuleVector::basis(2, 1, 0);
        let seq = f.analysis(&e1).unwrap();
        assert!((seq.l2_norm() - 1.0).abs() < 1e-12);
        assert!(seq.items()[0].sub(&e1).unwrap().module_norm() < 1e-12);
        assert!(seq.items()[1].module_norm() < 1e-12);
    }

    #[test]
    fn synthesis_of_analysis_equals_frame_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for seed in 0..5u64 {
            let f = random_frame(seed, 2, 5, 4, 3);
            let s = f.frame_operator().unwrap();
            for _ in 0..10 {
                let x = random_vector(&mut rng, 5, 2);
                let lhs = f.synthesis(&f.analysis(&x).unwrap()).unwrap();
                let rhs = s.apply(&x).unwrap();
                assert!(lhs.sub(&rhs).unwrap().module_norm() < 1e-9);
                // l2 norm of the analysis image matches the frame sum
                let seq_norm = f.analysis(&x).unwrap().l2_norm();
                let sum_norm = f.frame_sum(&x).unwrap().norm().sqrt();
                assert!((seq_norm - sum_norm).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn optimal_bounds_on_parseval() {
        let f = parseval2();
        let bounds = f.optimal_star_bounds().unwrap();
        assert!((bounds.a_scalar.unwrap() - 1.0).abs() < 1e-12);
        assert!((bounds.b_scalar - 1.0).abs() < 1e-12);
        assert!(bounds.constrained.iter().all(|&c| c));
    }

    #[test]
    fn bounds_witnesses_attain_the_scalars() {
        for seed in 0..10u64 {
            let f = random_frame(100 + seed, 2, 6, 4, 4);
            let (bounds, wit) = f.optimal_star_bounds_detailed().unwrap();
            let s = f.frame_operator().unwrap();
            let upper = &wit.upper;
            let quot = upper.inner(&s.apply(upper).unwrap()).unwrap().norm()
                / upper.inner(upper).unwrap().norm();
            assert!((quot - bounds.upper_real()).abs() < 1e-8 * bounds.upper_real());
            if let (Some(lower), Some(a)) = (&wit.lower, bounds.a_scalar) {
                let kf = f.k().adjoint().apply(lower).unwrap();
                let quot = lower.inner(&s.apply(lower).unwrap()).unwrap().norm()
                    / kf.inner(&kf).unwrap().norm();
                assert!((quot - a * a).abs() < 1e-8 * (a * a).max(1.0));
            }
        }
    }

    #[test]
    fn shrinking_weights_never_raises_bounds() {
        let f = random_frame(7, 1, 5, 4, 5);
        let mut weights = f.weights().to_vec();
        weights[2] = weights[2].scale(0.4);
        let g = FrameSystem::new(
            f.submodules().to_vec(),
            weights,
            f.control_c().clone(),
            f.control_cp().clone(),
            f.k().clone(),
            1e-9,
        )
        .unwrap();
        let bf = f.optimal_star_bounds().unwrap();
        let bg = g.optimal_star_bounds().unwrap();
        assert!(bg.b_scalar <= bf.b_scalar + 1e-10);
        assert!(bg.a_scalar.unwrap() <= bf.a_scalar.unwrap() + 1e-10);
    }

    #[test]
    fn norm_sandwich_for_frame_operator() {
        for seed in 0..10u64 {
            let f = random_frame(200 + seed, 2, 5, 4, 3);
            let bounds = f.optimal_star_bounds().unwrap();
            let s_norm = f.frame_operator().unwrap().op_norm();
            assert!(s_norm <= bounds.upper_real() * (1.0 + 1e-8));
            // ||A^{-1}||^{-2} ||K||^2 <= ||S||, constrained components only
            let a_min = bounds
                .a_opt
                .values()
                .iter()
                .zip(&bounds.constrained)
                .filter(|(_, &c)| c)
                .map(|(a, _)| a.re)
                .fold(f64::INFINITY, f64::min);
            if a_min.is_finite() {
                let lhs = a_min * a_min * f.k().op_norm().powi(2);
                assert!(lhs <= s_norm * (1.0 + 1e-8));
            }
        }
    }

    #[test]
    fn surjective_k_membership_transfers_to_plain_fusion() {
        for seed in 0..5u64 {
            let f = random_frame(300 + seed, 1, 4, 4, 4);
            let (surjective, m) = lemma26_check(f.k(), 1e-9);
            assert!(surjective);
            let bounds = f.optimal_star_bounds().unwrap();
            let a = bounds.a_scalar.unwrap();
            let candidate = AlgebraElement::constant(1, a * m * (1.0 - 1e-9));
            let upper = AlgebraElement::constant(1, bounds.b_scalar * (1.0 + 1e-9));
            let cert = f
                .verify_membership(
                    MembershipClass::ControlledFusion,
                    Some(&candidate),
                    Some(&upper),
                )
                .unwrap();
            assert!(cert.conclusion_verified);
        }
    }

    #[test]
    fn bessel_via_synthesis_matches_psd_route() {
        let f = parseval2();
        let one = AlgebraElement::unit(1);
        let cert = f.verify_bessel_via_synthesis(&one).unwrap();
        assert!(cert.conclusion_verified);
        assert!((cert.residuals["synthesis_norm"] - 1.0).abs() < 1e-10);

        // scaling all weights by 3 scales the synthesis norm by 3
        let scaled = FrameSystem::new(
            f.submodules().to_vec(),
            f.weights().iter().map(|w| w.scale(3.0)).collect(),
            f.control_c().clone(),
            f.control_cp().clone(),
            f.k().clone(),
            1e-9,
        )
        .unwrap();
        let cert = scaled.verify_bessel_via_synthesis(&one).unwrap();
        assert!(!cert.conclusion_verified);
        assert!((cert.residuals["synthesis_norm"] - 3.0).abs() < 1e-10);
        let three = AlgebraElement::constant(1, 3.0);
        assert!(scaled
            .verify_bessel_via_synthesis(&three)
            .unwrap()
            .conclusion_verified);

        // agreement between the two routes on random systems with a
        // uniform candidate bound
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        for seed in 0..50u64 {
            let f = random_frame(400 + seed, 1, 4, 3, 2);
            let b = AlgebraElement::constant(1, rng.random_range(0.2..3.0));
            let cert = f.verify_bessel_via_synthesis(&b).unwrap();
            assert_eq!(cert.hypothesis_passed("psd_membership_agrees"), Some(true));
        }
    }

    #[test]
    fn norm_characterization_of_valid_bounds_has_no_violation() {
        let f = parseval2();
        let one = AlgebraElement::unit(1);
        let cert = f.norm_characterization(&one, &one, 200, 9).unwrap();
        assert!(cert.conclusion_verified);
        assert_eq!(cert.residuals["max_relative_violation"], 0.0);

        let f = alternating_example(8, 1.0, 1.0).unwrap();
        let two = AlgebraElement::constant(1, 2.0);
        let cert = f.norm_characterization(&two, &one, 1000, 10).unwrap();
        assert!(cert.conclusion_verified);

        // an infeasible lower bound is falsified by sampling
        let ten = AlgebraElement::constant(1, 10.0);
        let g = random_frame(500, 1, 4, 3, 4);
        let cert = g.norm_characterization(&ten, &ten, 1000, 11).unwrap();
        assert!(cert.residuals["max_relative_violation"] > 0.0);
        assert_eq!(cert.label, EvidenceLabel::Evidence);

        // the witness seeding alone falsifies a barely infeasible bound
        let bounds = g.optimal_star_bounds().unwrap();
        let barely = AlgebraElement::constant(1, bounds.a_scalar.unwrap() * 1.001);
        let upper = AlgebraElement::constant(1, bounds.b_scalar);
        let cert = g.norm_characterization(&barely, &upper, 0, 12).unwrap();
        assert!(cert.residuals["max_relative_violation"] > 0.0);
    }

    #[test]
    fn bounds_are_ordered_for_the_identity_operator() {
        // the lower bound is measured against <f, f> itself when K = I,
        // so the scalar summaries are ordered
        for seed in 0..10u64 {
            let f = random_frame(1500 + seed, 2, 5, 4, 5);
            let g = FrameSystem::new(
                f.submodules().to_vec(),
                f.weights().to_vec(),
                f.control_c().clone(),
                f.control_cp().clone(),
                ModuleOperator::identity(5, 2),
                1e-9,
            )
            .unwrap();
            let bounds = g.optimal_star_bounds().unwrap();
            assert!(bounds.a_scalar.unwrap() <= bounds.b_scalar + 1e-12);
        }
    }

    #[test]
    fn reconstruction_on_parseval_and_random_frames() {
        let f = parseval2();
        let x = ModuleVector::basis(2, 1, 0);
        let (_, residual) = f.reconstruct(&x).unwrap();
        assert!(residual < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let f = random_frame(600, 2, 6, 4, 6);
        for _ in 0..10 {
            let x = random_vector(&mut rng, 6, 2);
            let (_, residual) = f.reconstruct(&x).unwrap();
            assert!(residual < 1e-8 * x.module_norm());
        }

        // singular frame operator is rejected
        let g = alternating_example(8, 1.0, 1.0).unwrap();
        assert!(matches!(
            g.reconstruct(&ModuleVector::basis(8, 1, 0)),
            Err(Error::SingularFrameOperator(_))
        ));
    }

    #[test]
    fn transform_by_identity_and_scalars() {
        let f = random_frame(700, 1, 4, 3, 4);
        let id = ModuleOperator::identity(4, 1);
        let (g, predicted) = f.transform_frame(&id).unwrap();
        for i in 0..f.m() {
            assert!(f.submodules()[i].projection_distance(&g.submodules()[i]) < 1e-10);
        }
        let bounds = f.optimal_star_bounds().unwrap();
        assert!((predicted.a_scalar.unwrap() - bounds.a_scalar.unwrap()).abs() < 1e-10);

        // scalar multiples leave the submodules and the envelope unchanged
        let u = ModuleOperator::identity(4, 1).scale(linalg::creal(3.0));
        let (g, predicted) = f.transform_frame(&u).unwrap();
        for i in 0..f.m() {
            assert!(f.submodules()[i].projection_distance(&g.submodules()[i]) < 1e-9);
        }
        assert!((predicted.b_scalar - bounds.b_scalar).abs() < 1e-9);
    }

    #[test]
    fn transform_by_diagonal_respects_envelope() {
        // coordinate submodules with diagonal everything so the
        // commutation hypotheses hold exactly
        let f = commuting_instance(71, 4, 1, true).unwrap();
        let u = ModuleOperator::diagonal(&[vec![2.0, 1.0, 1.5, 1.0]]);
        let (g, predicted) = f.transform_frame(&u).unwrap();
        let measured = g.optimal_star_bounds().unwrap();
        assert!(measured.a_scalar.unwrap() >= predicted.a_scalar.unwrap() - 1e-9);
        assert!(measured.b_scalar <= predicted.b_scalar + 1e-9);
    }

    #[test]
    fn transform_rejects_broken_hypotheses() {
        let f = parseval2();
        // U^* U = diag(4, 1) leaves the coordinate submodules invariant,
        // but a rotation does not
        let mut b = CMat::identity(2, 2);
        b[(0, 1)] = linalg::creal(1.0);
        let u = ModuleOperator::from_blocks(vec![b]).unwrap();
        assert!(matches!(
            f.transform_frame(&u),
            Err(Error::HypothesisFailed(_))
        ));
        assert!(matches!(
            f.transform_frame(&ModuleOperator::zero(2, 1)),
            Err(Error::SingularOperator)
        ));
    }

    #[test]
    fn range_inclusion_transfer() {
        let f = random_frame(800, 1, 5, 4, 3);
        // M = K: lambda = 1, bound unchanged
        let cert = f.transfer_by_range_inclusion(&f.k().clone()).unwrap();
        assert!(cert.conclusion_verified);
        assert!((cert.residuals["lambda"] - 1.0).abs() < 1e-8);

        // M = K/2: lambda = 1/4, lower bound doubles
        let half = f.k().scale(linalg::creal(0.5));
        let cert = f.transfer_by_range_inclusion(&half).unwrap();
        assert!(cert.conclusion_verified);
        assert!((cert.residuals["lambda"] - 0.25).abs() < 1e-8);

        // an operator escaping Im(K) is rejected
        let outside = ModuleOperator::identity(5, 1);
        assert!(matches!(
            f.transfer_by_range_inclusion(&outside),
            Err(Error::InclusionFailed(_))
        ));
    }

    #[test]
    fn combine_orthogonal_projections() {
        let f = parseval_coordinate(2, 1, 2).unwrap();
        let k1 = Submodule::coordinate(2, 1, &[0]).projection_operator();
        let k2 = Submodule::coordinate(2, 1, &[1]).projection_operator();
        let cert = f
            .combine_k_operators(&k1, &k2, linalg::cone(), linalg::cone())
            .unwrap();
        assert!(cert.conclusion_verified);

        // overlapping adjoint ranges are rejected
        assert!(matches!(
            f.combine_k_operators(&k1, &k1, linalg::cone(), linalg::cone()),
            Err(Error::OrthogonalityFailed(_))
        ));

        // K2 = 0 degenerates gracefully
        let zero = ModuleOperator::zero(2, 1);
        let cert = f
            .combine_k_operators(&k1, &zero, linalg::cone(), linalg::cone())
            .unwrap();
        assert!(cert.conclusion_verified);
    }

    #[test]
    fn uncontrolled_equivalence_identity_and_scalar_controls() {
        let f = parseval2();
        let cert = f.uncontrolled_equivalence().unwrap();
        assert!(cert.conclusion_verified);

        // C = C' = 2 I: controlled bounds are 4x the plain ones
        let two = ModuleOperator::identity(4, 1).scale(linalg::creal(2.0));
        let base = parseval_coordinate(4, 1, 4).unwrap();
        let f = FrameSystem::new(
            base.submodules().to_vec(),
            base.weights().to_vec(),
            two.clone(),
            two,
            base.k().clone(),
            1e-9,
        )
        .unwrap();
        let cert = f.uncontrolled_equivalence().unwrap();
        assert!(cert.conclusion_verified);
        assert!(
            (cert.residuals["controlled_lower"] - 4.0 * cert.residuals["plain_lower"]).abs()
                < 1e-9
        );

        // non-commuting controls are rejected
        let g = random_frame(900, 1, 4, 3, 4);
        if g
            .control_c()
            .commutation_defect(&g.k().clone())
            .unwrap()
            > 1e-6
        {
            assert!(matches!(
                g.uncontrolled_equivalence(),
                Err(Error::HypothesisFailed(_))
            ));
        }
    }

    #[test]
    fn uncontrolled_equivalence_on_commuting_instances() {
        for seed in 0..10u64 {
            let f = commuting_instance(1000 + seed, 5, 2, seed % 2 == 0).unwrap();
            let cert = f.uncontrolled_equivalence().unwrap();
            assert!(cert.conclusion_verified, "{:?}", cert.residuals);
        }
    }

    #[test]
    fn homomorphism_transport_identity_selection_duplication() {
        let f = random_frame(1100, 2, 4, 3, 4);
        // identity map
        let (g, residual) = f.transport_homomorphism(&[0, 1]).unwrap();
        assert!(residual < 1e-10);
        assert_eq!(g.d(), 2);
        for i in 0..f.m() {
            assert!(f.submodules()[i].projection_distance(&g.submodules()[i]) < 1e-12);
        }

        // selection of component 0
        let (g, _) = f.transport_homomorphism(&[0]).unwrap();
        assert_eq!(g.d(), 1);
        let bf = f.optimal_star_bounds().unwrap();
        let bg = g.optimal_star_bounds().unwrap();
        assert!(
            (bg.b_opt.component(0).re - bf.b_opt.component(0).re).abs() < 1e-10
        );

        // duplication from a scalar system doubles the components
        let h = random_frame(1200, 1, 4, 3, 4);
        let (g, _) = h.transport_homomorphism(&[0, 0]).unwrap();
        assert_eq!(g.d(), 2);
        let bh = h.optimal_star_bounds().unwrap();
        let bg = g.optimal_star_bounds().unwrap();
        for t in 0..2 {
            assert!((bg.a_opt.component(t).re - bh.a_opt.component(0).re).abs() < 1e-10);
        }

        assert!(matches!(
            f.transport_homomorphism(&[5]),
            Err(Error::BadIndexMap(_))
        ));
    }

    #[test]
    fn frame_operator_is_self_adjoint_and_psd_under_positive_cross() {
        for seed in 0..10u64 {
            let f = random_frame(1300 + seed, 2, 5, 4, 3);
            assert!(f.positive_cross());
            let s = f.frame_operator().unwrap();
            let defect = s.sub(&s.adjoint()).unwrap().op_norm();
            assert!(defect <= 1e-10 * s.op_norm().max(1.0));
            let (lam, _) = s.min_eigenvalue();
            assert!(lam > -1e-10);
        }
    }

    #[test]
    fn cross_positivity_is_flagged_and_gates_analysis() {
        // independently drawn positive definite controls generically fail
        // the cross-positivity proviso
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let w = crate::instances::random_submodule(&mut rng, 4, 1, 2);
        let c = random_gl_plus(&mut rng, 4, 1, 5.0);
        let cp = random_gl_plus(&mut rng, 4, 1, 5.0);
        let f = FrameSystem::new(
            vec![w, Submodule::full(4, 1)],
            vec![AlgebraElement::unit(1); 2],
            c,
            cp,
            ModuleOperator::identity(4, 1),
            1e-9,
        )
        .unwrap();
        assert!(!f.positive_cross());
        assert!(matches!(
            f.analysis(&ModuleVector::basis(4, 1, 0)),
            Err(Error::CrossNotPositive(_))
        ));
        assert!(matches!(
            f.optimal_star_bounds(),
            Err(Error::CrossNotPositive(_))
        ));
        // the frame operator itself is still available
        assert!(f.frame_operator().is_ok());
    }

    #[test]
    fn validation_rejects_bad_input() {
        let base = parseval2();
        // zero weight
        let zero_w = FrameSystem::new(
            base.submodules().to_vec(),
            vec![AlgebraElement::zero(1); 2],
            base.control_c().clone(),
            base.control_cp().clone(),
            base.k().clone(),
            1e-9,
        );
        assert!(matches!(zero_w, Err(Error::ValidationFailed(_))));

        // control not in GL+
        let bad_c = FrameSystem::new(
            base.submodules().to_vec(),
            base.weights().to_vec(),
            ModuleOperator::zero(2, 1),
            base.control_cp().clone(),
            base.k().clone(),
            1e-9,
        );
        assert!(matches!(bad_c, Err(Error::ValidationFailed(_))));
    }
}
