//! The free Hilbert A-module `H = A^n`: vectors, algebra-valued inner
//! products, and orthogonally complemented submodules with their
//! projections.
//!
//! A vector stores an `n x d` complex array; column `t` is the ordinary
//! `C^n` vector seen by algebra component `t`. A submodule keeps one
//! orthonormal column basis per component, with ranks allowed to differ
//! across components — for the commutative algebra this captures exactly
//! the orthogonally complemented closed submodules.

use num_complex::Complex64;

use crate::algebra::AlgebraElement;
use crate::linalg::{self, CMat, CVec};
use crate::operators::ModuleOperator;
use crate::{Error, Result};

/// An element of `H = A^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleVector {
    /// `n x d`; row `i` is the coefficient of basis element `i`.
    entries: CMat,
}

impl ModuleVector {
    pub fn new(entries: CMat) -> Self {
        assert!(entries.ncols() >= 1, "module vectors need d >= 1");
        ModuleVector { entries }
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        Self::new(CMat::zeros(n, d))
    }

    /// Basis vector `e_i`, identical in every algebra component.
    pub fn basis(n: usize, d: usize, i: usize) -> Self {
        let mut m = CMat::zeros(n, d);
        for t in 0..d {
            m[(i, t)] = linalg::cone();
        }
        Self::new(m)
    }

    pub fn from_component_columns(cols: Vec<CVec>) -> Self {
        let n = cols[0].len();
        let d = cols.len();
        Self::new(CMat::from_fn(n, d, |i, t| cols[t][i]))
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn d(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    /// The `C^n` vector seen by algebra component `t`.
    pub fn component(&self, t: usize) -> CVec {
        self.entries.column(t).into_owned()
    }

    pub fn set_component(&mut self, t: usize, v: &CVec) {
        self.entries.set_column(t, v);
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.n() != other.n() || self.d() != other.d() {
            return Err(Error::ShapeMismatch(format!(
                "vector {}x{} vs {}x{}",
                self.n(),
                self.d(),
                other.n(),
                other.d()
            )));
        }
        Ok(())
    }

    /// The A-valued inner product; component `t` is
    /// `sum_i x_{i,t} conj(y_{i,t})`, so `<a x, y> = a <x, y>` and
    /// `<x, y> = <y, x>*`.
    pub fn inner(&self, other: &Self) -> Result<AlgebraElement> {
        self.check(other)?;
        let values = (0..self.d())
            .map(|t| {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..self.n() {
                    acc += self.entries[(i, t)] * other.entries[(i, t)].conj();
                }
                acc
            })
            .collect();
        Ok(AlgebraElement::new(values))
    }

    /// `||x|| = ||<x,x>||^{1/2}`.
    pub fn module_norm(&self) -> f64 {
        self.inner(self).expect("same shape").norm().sqrt()
    }

    /// `|x| = <x,x>^{1/2}` as an algebra element.
    pub fn abs_vec(&self) -> AlgebraElement {
        self.inner(self)
            .expect("same shape")
            .sqrt_pos()
            .expect("<x,x> is positive")
    }

    /// Left action `a . x` of the algebra: scales component `t` by `a_t`.
    pub fn mul_alg(&self, a: &AlgebraElement) -> Result<Self> {
        if a.d() != self.d() {
            return Err(Error::DescriptorMismatch(self.d(), a.d()));
        }
        let mut out = self.entries.clone();
        for t in 0..self.d() {
            let s = a.component(t);
            for i in 0..self.n() {
                out[(i, t)] *= s;
            }
        }
        Ok(Self::new(out))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::new(&self.entries + &other.entries))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::new(&self.entries - &other.entries))
    }

    pub fn scale(&self, x: f64) -> Self {
        Self::new(self.entries.map(|z| z * x))
    }
}

/// A finite sequence of module vectors, the stand-in for `l^2(I, H)`.
#[derive(Clone, Debug)]
pub struct SequenceVector {
    items: Vec<ModuleVector>,
}

impl SequenceVector {
    pub fn new(items: Vec<ModuleVector>) -> Self {
        SequenceVector { items }
    }

    pub fn items(&self) -> &[ModuleVector] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// `|| sum_i <x_i, x_i> ||^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        match self.items.first() {
            None => 0.0,
            Some(first) => {
                let mut acc = AlgebraElement::zero(first.d());
                for x in &self.items {
                    acc = acc.add(&x.inner(x).expect("same shape")).expect("same d");
                }
                acc.norm().sqrt()
            }
        }
    }
}

/// An orthogonally complemented closed submodule of `H`, stored as one
/// orthonormal column basis per algebra component.
#[derive(Clone, Debug)]
pub struct Submodule {
    n: usize,
    bases: Vec<CMat>,
}

impl Submodule {
    /// Trivial submodule `{0}`.
    pub fn zero(n: usize, d: usize) -> Self {
        Submodule {
            n,
            bases: vec![CMat::zeros(n, 0); d],
        }
    }

    /// The whole module.
    pub fn full(n: usize, d: usize) -> Self {
        Submodule {
            n,
            bases: vec![CMat::identity(n, n); d],
        }
    }

    /// Coordinate submodule spanned by `e_i` for `i` in `coords`, the same
    /// in every component.
    pub fn coordinate(n: usize, d: usize, coords: &[usize]) -> Self {
        let mut bases = Vec::with_capacity(d);
        for _ in 0..d {
            let mut q = CMat::zeros(n, coords.len());
            for (j, &i) in coords.iter().enumerate() {
                q[(i, j)] = linalg::cone();
            }
            bases.push(q);
        }
        Submodule { n, bases }
    }

    /// Coordinate submodule with a separate coordinate set per component.
    pub fn coordinate_per_component(n: usize, coords: &[Vec<usize>]) -> Self {
        let bases = coords
            .iter()
            .map(|cs| {
                let mut q = CMat::zeros(n, cs.len());
                for (j, &i) in cs.iter().enumerate() {
                    q[(i, j)] = linalg::cone();
                }
                q
            })
            .collect();
        Submodule { n, bases }
    }

    pub fn from_bases(n: usize, bases: Vec<CMat>) -> Self {
        debug_assert!(bases.iter().all(|b| b.nrows() == n));
        Submodule { n, bases }
    }

    /// Orthonormalises the component spans of the generators; the rank of
    /// each component is decided at `tol` relative to the largest singular
    /// value, and may differ across components (including rank zero).
    pub fn from_generators(generators: &[ModuleVector], tol: f64) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| Error::ShapeMismatch("no generators".into()))?;
        let (n, d) = (first.n(), first.d());
        for g in generators {
            if g.n() != n || g.d() != d {
                return Err(Error::ShapeMismatch(format!(
                    "generator {}x{} vs {}x{}",
                    g.n(),
                    g.d(),
                    n,
                    d
                )));
            }
        }
        let mut bases = Vec::with_capacity(d);
        for t in 0..d {
            let cols = CMat::from_fn(n, generators.len(), |i, j| generators[j].entries()[(i, t)]);
            bases.push(linalg::orthonormal_columns(&cols, tol));
        }
        Ok(Submodule { n, bases })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.bases.len()
    }

    pub fn rank(&self, t: usize) -> usize {
        self.bases[t].ncols()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.bases.iter().map(|b| b.ncols()).collect()
    }

    pub fn basis(&self, t: usize) -> &CMat {
        &self.bases[t]
    }

    pub fn is_zero(&self) -> bool {
        self.bases.iter().all(|b| b.ncols() == 0)
    }

    fn check_vector(&self, x: &ModuleVector) -> Result<()> {
        if x.n() != self.n || x.d() != self.d() {
            return Err(Error::ShapeMismatch(format!(
                "vector {}x{} vs submodule {}x{}",
                x.n(),
                x.d(),
                self.n,
                self.d()
            )));
        }
        Ok(())
    }

    /// Orthogonal projection onto the submodule.
    pub fn project(&self, x: &ModuleVector) -> Result<ModuleVector> {
        self.check_vector(x)?;
        let mut out = ModuleVector::zeros(self.n, self.d());
        for t in 0..self.d() {
            let q = &self.bases[t];
            let projected = q * (q.adjoint() * x.component(t));
            out.set_component(t, &projected);
        }
        Ok(out)
    }

    /// The projection as an adjointable operator (blocks `Q_t Q_t^H`).
    pub fn projection_operator(&self) -> ModuleOperator {
        let blocks = self
            .bases
            .iter()
            .map(|q| q * q.adjoint())
            .collect::<Vec<_>>();
        ModuleOperator::from_blocks(blocks).expect("square blocks")
    }

    /// Orthogonal complement, componentwise.
    pub fn complement(&self) -> Self {
        let bases = self
            .bases
            .iter()
            .map(linalg::orthonormal_complement)
            .collect();
        Submodule { n: self.n, bases }
    }

    /// Intersection via the double complement
    /// `(W^perp + V^perp)^perp`, componentwise.
    pub fn intersect(&self, other: &Self, tol: f64) -> Result<Self> {
        if self.n != other.n || self.d() != other.d() {
            return Err(Error::ShapeMismatch("submodule dims differ".into()));
        }
        let mut bases = Vec::with_capacity(self.d());
        for t in 0..self.d() {
            let wc = linalg::orthonormal_complement(&self.bases[t]);
            let vc = linalg::orthonormal_complement(&other.bases[t]);
            let mut stacked = CMat::zeros(self.n, wc.ncols() + vc.ncols());
            for j in 0..wc.ncols() {
                stacked.set_column(j, &wc.column(j));
            }
            for j in 0..vc.ncols() {
                stacked.set_column(wc.ncols() + j, &vc.column(j));
            }
            let span = linalg::orthonormal_columns(&stacked, tol);
            bases.push(linalg::orthonormal_complement(&span));
        }
        Ok(Submodule { n: self.n, bases })
    }

    /// Image `U W` under an invertible operator, orthonormalised.
    pub fn image_under(&self, u: &ModuleOperator, tol: f64) -> Result<Self> {
        if u.n() != self.n || u.d() != self.d() {
            return Err(Error::ShapeMismatch("operator dims differ".into()));
        }
        if !u.is_invertible(tol) {
            return Err(Error::SingularOperator);
        }
        let bases = (0..self.d())
            .map(|t| linalg::orthonormal_columns(&(u.block(t) * &self.bases[t]), tol))
            .collect();
        Ok(Submodule { n: self.n, bases })
    }

    /// Canonical generators: one vector per basis column, zero-padded in
    /// components of smaller rank. Regenerating from these recovers the
    /// same subspaces.
    pub fn to_generators(&self) -> Vec<ModuleVector> {
        let rmax = self.bases.iter().map(|b| b.ncols()).max().unwrap_or(0);
        if rmax == 0 {
            return vec![ModuleVector::zeros(self.n, self.d())];
        }
        (0..rmax)
            .map(|j| {
                let mut m = CMat::zeros(self.n, self.d());
                for t in 0..self.d() {
                    if j < self.bases[t].ncols() {
                        m.set_column(t, &self.bases[t].column(j));
                    }
                }
                ModuleVector::new(m)
            })
            .collect()
    }

    /// Spectral-norm distance between the two projection operators.
    pub fn projection_distance(&self, other: &Self) -> f64 {
        (0..self.d())
            .map(|t| {
                let p = &self.bases[t] * self.bases[t].adjoint();
                let q = &other.bases[t] * other.bases[t].adjoint();
                linalg::spectral_norm(&(p - q))
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::instances::random_vector;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inner_on_basis_vectors() {
        let e1 = ModuleVector::basis(2, 1, 0);
        let e2 = ModuleVector::basis(2, 1, 1);
        assert_eq!(e1.inner(&e1).unwrap().component(0), c(1.0, 0.0));
        assert_eq!(e1.inner(&e2).unwrap().component(0), c(0.0, 0.0));
    }

    #[test]
    fn inner_is_left_linear_over_the_algebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random_vector(&mut rng, 4, 2);
        let y = random_vector(&mut rng, 4, 2);
        let a = AlgebraElement::new(vec![c(0.3, -1.2), c(2.0, 0.7)]);
        let lhs = x.mul_alg(&a).unwrap().inner(&y).unwrap();
        let rhs = a.mul(&x.inner(&y).unwrap()).unwrap();
        for t in 0..2 {
            assert!((lhs.component(t) - rhs.component(t)).norm() < 1e-12);
        }
        // conjugate symmetry
        let sym = x.inner(&y).unwrap();
        let conj = y.inner(&x).unwrap().star();
        for t in 0..2 {
            assert!((sym.component(t) - conj.component(t)).norm() < 1e-12);
        }
    }

    #[test]
    fn norms_and_abs() {
        let mut m = CMat::zeros(2, 1);
        m[(0, 0)] = c(3.0, 0.0);
        m[(1, 0)] = c(4.0, 0.0);
        let x = ModuleVector::new(m);
        assert!((x.module_norm() - 5.0).abs() < 1e-12);
        assert_eq!(ModuleVector::zeros(3, 2).module_norm(), 0.0);

        // d = 2 with component norms 1 and 3
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = c(1.0, 0.0);
        m[(0, 1)] = c(3.0, 0.0);
        let x = ModuleVector::new(m);
        assert!((x.module_norm() - 3.0).abs() < 1e-12);
        let a = x.abs_vec();
        assert!((a.component(0) - c(1.0, 0.0)).norm() < 1e-12);
        assert!((a.component(1) - c(3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn from_generators_ranks() {
        let e1 = ModuleVector::basis(3, 1, 0);
        let w = Submodule::from_generators(&[e1.clone(), e1.scale(2.0)], 1e-9).unwrap();
        assert_eq!(w.ranks(), vec![1]);

        let e2 = ModuleVector::basis(3, 1, 1);
        let w = Submodule::from_generators(&[e1, e2], 1e-9).unwrap();
        assert_eq!(w.ranks(), vec![2]);

        // component 0 part zero, component 1 part e1 (d = 2)
        let mut m = CMat::zeros(3, 2);
        m[(0, 1)] = c(1.0, 0.0);
        let g = ModuleVector::new(m);
        let w = Submodule::from_generators(&[g], 1e-9).unwrap();
        assert_eq!(w.ranks(), vec![0, 1]);
    }

    /// Independent modified Gram-Schmidt rank oracle.
    fn gram_schmidt_rank(vectors: &[CVec], tol: f64) -> usize {
        let mut basis: Vec<CVec> = Vec::new();
        for v in vectors {
            let mut w = v.clone();
            for b in &basis {
                let coeff = b.dotc(&w);
                w -= b * coeff;
            }
            if w.norm() > tol {
                let norm = w.norm();
                basis.push(w / c(norm, 0.0));
            }
        }
        basis.len()
    }

    #[test]
    fn from_generators_rank_matches_gram_schmidt_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let gens: Vec<ModuleVector> =
                (0..3).map(|_| random_vector(&mut rng, 5, 1)).collect();
            // introduce a dependent generator
            let dep = gens[0].add(&gens[1].scale(0.5)).unwrap();
            let mut all = gens.clone();
            all.push(dep);
            let w = Submodule::from_generators(&all, 1e-9).unwrap();
            let cols: Vec<CVec> = all.iter().map(|g| g.component(0)).collect();
            assert_eq!(w.rank(0), gram_schmidt_rank(&cols, 1e-9));
        }
    }

    #[test]
    fn projection_behaviour() {
        let w = Submodule::coordinate(2, 1, &[0]);
        let x = ModuleVector::basis(2, 1, 0)
            .add(&ModuleVector::basis(2, 1, 1))
            .unwrap();
        let p = w.project(&x).unwrap();
        assert!((p.sub(&ModuleVector::basis(2, 1, 0)).unwrap().module_norm()) < 1e-12);

        let full = Submodule::full(2, 1);
        assert!(full.project(&x).unwrap().sub(&x).unwrap().module_norm() < 1e-12);

        // orthogonality of the residual on random data
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let gens: Vec<ModuleVector> =
                (0..2).map(|_| random_vector(&mut rng, 5, 2)).collect();
            let w = Submodule::from_generators(&gens, 1e-9).unwrap();
            let x = random_vector(&mut rng, 5, 2);
            let px = w.project(&x).unwrap();
            let resid = x.sub(&px).unwrap();
            assert!(px.inner(&resid).unwrap().norm() < 1e-10);
        }
    }

    #[test]
    fn complement_and_identity_decomposition() {
        let w = Submodule::coordinate(2, 1, &[0]);
        let wc = w.complement();
        assert!(wc.projection_distance(&Submodule::coordinate(2, 1, &[1])) < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let gens: Vec<ModuleVector> = (0..3).map(|_| random_vector(&mut rng, 6, 2)).collect();
        let w = Submodule::from_generators(&gens, 1e-9).unwrap();
        let sum = w
            .projection_operator()
            .add(&w.complement().projection_operator())
            .unwrap();
        let id = ModuleOperator::identity(6, 2);
        assert!(sum.sub(&id).unwrap().op_norm() < 10.0 * 6.0 * f64::EPSILON);
    }

    /// Brute-force intersection oracle via the nullspace of [Qw | -Qv].
    fn intersection_rank_oracle(w: &Submodule, v: &Submodule, t: usize, tol: f64) -> usize {
        let qw = w.basis(t);
        let qv = v.basis(t);
        if qw.ncols() == 0 || qv.ncols() == 0 {
            return 0;
        }
        let mut stacked = CMat::zeros(w.n(), qw.ncols() + qv.ncols());
        for j in 0..qw.ncols() {
            stacked.set_column(j, &qw.column(j));
        }
        for j in 0..qv.ncols() {
            stacked.set_column(qw.ncols() + j, &(-qv.column(j)));
        }
        qw.ncols() + qv.ncols() - linalg::rank(&stacked, tol)
    }

    #[test]
    fn intersection_of_coordinate_spans() {
        let w = Submodule::coordinate(4, 1, &[0, 1]);
        let v = Submodule::coordinate(4, 1, &[1, 2]);
        let i = w.intersect(&v, 1e-9).unwrap();
        assert!(i.projection_distance(&Submodule::coordinate(4, 1, &[1])) < 1e-10);
        assert_eq!(i.rank(0), intersection_rank_oracle(&w, &v, 0, 1e-9));
    }

    #[test]
    fn intersection_matches_nullspace_oracle_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let gw: Vec<ModuleVector> = (0..3).map(|_| random_vector(&mut rng, 5, 1)).collect();
            let gv: Vec<ModuleVector> = (0..3).map(|_| random_vector(&mut rng, 5, 1)).collect();
            // share one generator so the intersection is nontrivial
            let mut gv = gv;
            gv[0] = gw[0].clone();
            let w = Submodule::from_generators(&gw, 1e-9).unwrap();
            let v = Submodule::from_generators(&gv, 1e-9).unwrap();
            let i = w.intersect(&v, 1e-8).unwrap();
            assert_eq!(i.rank(0), intersection_rank_oracle(&w, &v, 0, 1e-8));
            // contained in both
            for g in i.to_generators() {
                assert!(w.project(&g).unwrap().sub(&g).unwrap().module_norm() < 1e-8);
                assert!(v.project(&g).unwrap().sub(&g).unwrap().module_norm() < 1e-8);
            }
        }
    }

    #[test]
    fn image_under_identity_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let gens: Vec<ModuleVector> = (0..2).map(|_| random_vector(&mut rng, 4, 2)).collect();
        let w = Submodule::from_generators(&gens, 1e-9).unwrap();
        let id = ModuleOperator::identity(4, 2);
        let img = w.image_under(&id, 1e-9).unwrap();
        assert!(img.projection_distance(&w) < 1e-10);

        let zero = ModuleOperator::zero(4, 2);
        assert!(matches!(
            w.image_under(&zero, 1e-9),
            Err(Error::SingularOperator)
        ));
    }

    #[test]
    fn cauchy_schwarz_in_module_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..20 {
            let x = random_vector(&mut rng, 5, 3);
            let y = random_vector(&mut rng, 5, 3);
            let xy = x.inner(&y).unwrap();
            let lhs = xy.mul(&xy.star()).unwrap();
            let rhs = x.inner(&x).unwrap().scale(y.inner(&y).unwrap().norm());
            assert!(lhs.leq(&rhs, 1e-9).unwrap());
        }
    }

    #[test]
    fn regenerating_from_projected_samples_recovers_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let gens: Vec<ModuleVector> = (0..2).map(|_| random_vector(&mut rng, 5, 2)).collect();
        let w = Submodule::from_generators(&gens, 1e-9).unwrap();
        let rmax = w.ranks().into_iter().max().unwrap();
        let samples: Vec<ModuleVector> = (0..rmax + 1)
            .map(|_| w.project(&random_vector(&mut rng, 5, 2)).unwrap())
            .collect();
        let w2 = Submodule::from_generators(&samples, 1e-9).unwrap();
        assert!(w.projection_distance(&w2) < 1e-9);
    }

    #[test]
    fn sequence_l2_norm_definition() {
        let e1 = ModuleVector::basis(2, 1, 0);
        let seq = SequenceVector::new(vec![e1.clone(), ModuleVector::zeros(2, 1)]);
        assert!((seq.l2_norm() - 1.0).abs() < 1e-12);
        let seq = SequenceVector::new(vec![e1.clone(), e1]);
        assert!((seq.l2_norm() - 2.0f64.sqrt()).abs() < 1e-12);
    }
}
