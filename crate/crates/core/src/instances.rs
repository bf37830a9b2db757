//! Seeded random instance generation: vectors, operators, frame systems,
//! and the structured families used by the verification suites. All
//! randomness flows from an explicit seed through ChaCha so identical
//! seeds reproduce identical instances bit for bit.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraElement;
use crate::frames::FrameSystem;
use crate::linalg::{self, CMat};
use crate::module::{ModuleVector, Submodule};
use crate::operators::ModuleOperator;
use crate::{Error, Result};

pub fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn random_vector(rng: &mut impl Rng, n: usize, d: usize) -> ModuleVector {
    ModuleVector::new(random_matrix(rng, n, d))
}

/// One seeded random vector, for callers without their own generator.
pub fn seeded_vector(seed: u64, n: usize, d: usize) -> ModuleVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_vector(&mut rng, n, d)
}

/// Dense Gaussian operator; almost surely invertible.
pub fn random_operator(rng: &mut impl Rng, n: usize, d: usize) -> ModuleOperator {
    let blocks = (0..d).map(|_| random_matrix(rng, n, n)).collect();
    ModuleOperator::from_blocks(blocks).expect("square blocks")
}

/// Operator whose blocks all have the given rank, singular values in
/// `[0.5, 2]`.
pub fn random_operator_with_rank(
    rng: &mut impl Rng,
    n: usize,
    d: usize,
    rank: usize,
) -> ModuleOperator {
    let blocks = (0..d)
        .map(|_| {
            if rank == 0 {
                return CMat::zeros(n, n);
            }
            let u = linalg::orthonormal_columns(&random_matrix(rng, n, rank), 1e-12);
            let v = linalg::orthonormal_columns(&random_matrix(rng, n, rank), 1e-12);
            let mut s = CMat::zeros(rank, rank);
            for i in 0..rank {
                s[(i, i)] = linalg::creal(rng.random_range(0.5..2.0));
            }
            &u * s * v.adjoint()
        })
        .collect();
    ModuleOperator::from_blocks(blocks).expect("square blocks")
}

pub fn random_unitary_block(rng: &mut impl Rng, n: usize) -> CMat {
    linalg::orthonormal_columns(&random_matrix(rng, n, n), 1e-14)
}

pub fn random_unitary_operator(rng: &mut impl Rng, n: usize, d: usize) -> ModuleOperator {
    let blocks = (0..d).map(|_| random_unitary_block(rng, n)).collect();
    ModuleOperator::from_blocks(blocks).expect("square blocks")
}

/// Positive definite operator `Q diag(lambda) Q^H` with condition number
/// at most `cond` and largest eigenvalue 1.
pub fn random_gl_plus(rng: &mut impl Rng, n: usize, d: usize, cond: f64) -> ModuleOperator {
    let cond = cond.max(1.0);
    let blocks = (0..d)
        .map(|_| {
            let q = random_unitary_block(rng, n);
            let mut lam = CMat::zeros(n, n);
            for i in 0..n {
                let x: f64 = rng.random_range(0.0..1.0);
                // log-uniform in [1/cond, 1]
                lam[(i, i)] = linalg::creal((-x * cond.ln()).exp());
            }
            &q * lam * q.adjoint()
        })
        .collect();
    ModuleOperator::from_blocks(blocks).expect("square blocks")
}

/// Random submodule with the given rank in every component.
pub fn random_submodule(rng: &mut impl Rng, n: usize, d: usize, rank: usize) -> Submodule {
    let bases = (0..d)
        .map(|_| {
            if rank == 0 {
                CMat::zeros(n, 0)
            } else {
                linalg::orthonormal_columns(&random_matrix(rng, n, rank), 1e-12)
            }
        })
        .collect();
    Submodule::from_bases(n, bases)
}

/// Built-in instance families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Coordinate submodules partitioning the basis, unit weights,
    /// identity controls and identity K: a Parseval family.
    Parseval,
    /// Coordinate cover plus `m` removable low-weight submodules (the
    /// last `m` indices), diagonal `C' = C` and invertible `K`, sized so
    /// the subset-erasure hypothesis holds for that tail.
    Erasure,
}

/// Parameters for seeded random frame-system generation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub rank_range: (usize, usize),
    pub weight_range: (f64, f64),
    /// Condition-number cap for the controls C and C'.
    pub control_condition: f64,
    pub k_rank: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n == 0 || self.m == 0 {
            return Err(Error::ValidationFailed("d, n, m must be >= 1".into()));
        }
        if self.rank_range.0 > self.rank_range.1 || self.rank_range.1 > self.n {
            return Err(Error::ValidationFailed(format!(
                "rank_range {:?} must sit inside [0, {}]",
                self.rank_range, self.n
            )));
        }
        if self.weight_range.0 <= 0.0 || self.weight_range.0 > self.weight_range.1 {
            return Err(Error::ValidationFailed(format!(
                "weight_range {:?} must be positive and ordered",
                self.weight_range
            )));
        }
        if self.control_condition < 1.0 {
            return Err(Error::ValidationFailed(
                "control_condition must be >= 1".into(),
            ));
        }
        if self.k_rank > self.n {
            return Err(Error::ValidationFailed(format!(
                "k_rank {} exceeds n = {}",
                self.k_rank, self.n
            )));
        }
        Ok(())
    }
}

/// Generates a validated frame system from the spec. The controls are
/// built as `Q diag Q^H` with condition at most the cap, with `C'` a
/// positive scalar multiple of `C` so the cross operators `C'^* pi C`
/// stay positive; generation retries a bounded number of times if
/// validation fails.
pub fn generate(spec: &InstanceSpec) -> Result<FrameSystem> {
    if let Some(preset) = spec.preset {
        if spec.d == 0 || spec.n == 0 || spec.m == 0 {
            return Err(Error::ValidationFailed("d, n, m must be >= 1".into()));
        }
        return match preset {
            Preset::Parseval => parseval_coordinate(spec.n, spec.d, spec.m),
            Preset::Erasure => {
                Ok(erasure_instance(spec.seed, spec.n, spec.d, spec.m)?.system)
            }
        };
    }
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let attempts = 32;
    let mut last_err = None;
    for _ in 0..attempts {
        let submodules: Vec<Submodule> = (0..spec.m)
            .map(|_| {
                let r = rng.random_range(spec.rank_range.0..=spec.rank_range.1);
                random_submodule(&mut rng, spec.n, spec.d, r)
            })
            .collect();
        let weights: Vec<AlgebraElement> = (0..spec.m)
            .map(|_| {
                AlgebraElement::from_reals(
                    &(0..spec.d)
                        .map(|_| rng.random_range(spec.weight_range.0..=spec.weight_range.1))
                        .collect::<Vec<_>>(),
                )
            })
            .collect();
        let c = random_gl_plus(&mut rng, spec.n, spec.d, spec.control_condition);
        let gamma: f64 = rng.random_range(0.5..2.0);
        let cp = c.scale(linalg::creal(gamma));
        let k = random_operator_with_rank(&mut rng, spec.n, spec.d, spec.k_rank);
        match FrameSystem::new(submodules, weights, c, cp, k, crate::DEFAULT_TOL) {
            Ok(sys) if sys.positive_cross() => return Ok(sys),
            Ok(_) => last_err = Some("cross operators not positive".to_string()),
            Err(e) => last_err = Some(e.to_string()),
        }
    }
    Err(Error::GenerationFailed(format!(
        "no valid instance after {attempts} attempts: {}",
        last_err.unwrap_or_default()
    )))
}

/// The Parseval coordinate family: `m` coordinate submodules partitioning
/// `{0..n}`, unit weights, identity controls and `K = I`.
pub fn parseval_coordinate(n: usize, d: usize, m: usize) -> Result<FrameSystem> {
    if m > n {
        return Err(Error::ValidationFailed(format!(
            "parseval preset needs m <= n, got m = {m}, n = {n}"
        )));
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); m];
    for i in 0..n {
        groups[i % m].push(i);
    }
    let submodules = groups
        .iter()
        .map(|g| Submodule::coordinate(n, d, g))
        .collect();
    let weights = vec![AlgebraElement::unit(d); m];
    let id = ModuleOperator::identity(n, d);
    FrameSystem::new(
        submodules,
        weights,
        id.clone(),
        id.clone(),
        id,
        crate::DEFAULT_TOL,
    )
}

/// The alternating-coordinate family on `C^size` (scalar algebra):
/// submodules `span{e_{2j}}` for the even coordinates (1-based), unit
/// weights, scalar controls `alpha I` and `beta I`, and `K` halving the
/// even coordinates while killing the odd ones. Its frame operator
/// vanishes on the odd coordinates, so the family fails the plain frame
/// inequality but satisfies the K-adapted one with lower bound `2`.
pub fn alternating_example(size: usize, alpha: f64, beta: f64) -> Result<FrameSystem> {
    if size < 2 || !size.is_multiple_of(2) {
        return Err(Error::ValidationFailed(
            "alternating example needs even size >= 2".into(),
        ));
    }
    if alpha <= 0.0 || beta <= 0.0 {
        return Err(Error::ValidationFailed(
            "alpha and beta must be positive".into(),
        ));
    }
    let n = size;
    let m = size / 2;
    // 1-based even coordinates are the odd 0-based indices
    let submodules = (0..m)
        .map(|j| Submodule::coordinate(n, 1, &[2 * j + 1]))
        .collect();
    let weights = vec![AlgebraElement::unit(1); m];
    let c = ModuleOperator::identity(n, 1).scale(linalg::creal(alpha));
    let cp = ModuleOperator::identity(n, 1).scale(linalg::creal(beta));
    let mut kdiag = vec![0.0; n];
    for j in 0..m {
        kdiag[2 * j + 1] = 0.5;
    }
    let k = ModuleOperator::diagonal(&[kdiag]);
    FrameSystem::new(submodules, weights, c, cp, k, crate::DEFAULT_TOL)
}

/// Instance family for the erasure suites: coordinate submodules with a
/// diagonal control `C' = C`, `||C|| <= 1`, invertible `K`, plus a
/// designated low-weight index set `J`. The base family covers every
/// coordinate; the `J` members carry weights scaled so
/// `||(K^+)^*||^2 sum_J w_i^2` stays below the lower frame bound.
pub struct ErasureInstance {
    pub system: FrameSystem,
    pub subset: Vec<usize>,
}

pub fn erasure_instance(seed: u64, n: usize, d: usize, extra: usize) -> Result<ErasureInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // base cover: one submodule per coordinate plus a few random coordinate sets
    let mut submodules: Vec<Submodule> = Vec::new();
    let mut weights: Vec<AlgebraElement> = Vec::new();
    for i in 0..n {
        submodules.push(Submodule::coordinate(n, d, &[i]));
        weights.push(AlgebraElement::from_reals(
            &(0..d)
                .map(|_| rng.random_range(0.7..1.5))
                .collect::<Vec<_>>(),
        ));
    }
    let m_base = submodules.len();
    let subset: Vec<usize> = (m_base..m_base + extra).collect();
    for _ in 0..extra {
        let size = rng.random_range(1..=n.min(3));
        let coords: Vec<Vec<usize>> = (0..d)
            .map(|_| {
                let mut cs: Vec<usize> = (0..n).collect();
                for i in (1..cs.len()).rev() {
                    let j = rng.random_range(0..=i);
                    cs.swap(i, j);
                }
                cs.truncate(size);
                cs
            })
            .collect();
        submodules.push(Submodule::coordinate_per_component(n, &coords));
        weights.push(AlgebraElement::from_reals(
            &(0..d)
                .map(|_| rng.random_range(0.5..1.0))
                .collect::<Vec<_>>(),
        ));
    }
    // diagonal control with entries in (0, 1]
    let diags: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..n).map(|_| rng.random_range(0.4..1.0)).collect())
        .collect();
    let c = ModuleOperator::diagonal(&diags);
    let k = random_operator(&mut rng, n, d); // invertible a.s.

    let build = |weights: Vec<AlgebraElement>| {
        FrameSystem::new(
            submodules.clone(),
            weights,
            c.clone(),
            c.clone(),
            k.clone(),
            crate::DEFAULT_TOL,
        )
    };
    let kp_norm = k.moore_penrose(crate::DEFAULT_TOL).op_norm();
    // scale the tail weights until the erasure hypothesis holds with
    // margin against the bounds of the scaled system itself
    for _ in 0..16 {
        let sys = build(weights.clone())?;
        let bounds = sys.optimal_star_bounds()?;
        let a_real = bounds
            .a_scalar
            .ok_or_else(|| Error::GenerationFailed("K unconstrained".into()))?
            .powi(2);
        let sum_j: f64 = subset
            .iter()
            .map(|&i| {
                weights[i]
                    .values()
                    .iter()
                    .map(|w| w.norm_sqr())
                    .fold(0.0, f64::max)
            })
            .sum();
        if kp_norm * kp_norm * sum_j < 0.5 * a_real {
            return Ok(ErasureInstance {
                system: sys,
                subset,
            });
        }
        for &i in &subset {
            weights[i] = weights[i].scale(0.25);
        }
    }
    Err(Error::GenerationFailed(
        "could not satisfy the erasure hypothesis".into(),
    ))
}

/// Instance family for the trivial-intersection erasure check: two
/// dominant-weight submodules on disjoint coordinates (the designated
/// subset) plus a light cover of the rest, identity-free diagonal `C`
/// with `||C^{-1}||` close to 1.
pub fn intersection_instance(seed: u64, n: usize, d: usize) -> Result<ErasureInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    assert!(n >= 2);
    let mut submodules = vec![
        Submodule::coordinate(n, d, &[0]),
        Submodule::coordinate(n, d, &[1]),
    ];
    let heavy = rng.random_range(2.0..3.0);
    let mut weights = vec![
        AlgebraElement::constant(d, heavy),
        AlgebraElement::constant(d, heavy),
    ];
    for i in 0..n {
        submodules.push(Submodule::coordinate(n, d, &[i]));
        weights.push(AlgebraElement::from_reals(
            &(0..d)
                .map(|_| rng.random_range(0.2..0.6))
                .collect::<Vec<_>>(),
        ));
    }
    let diags: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..n).map(|_| rng.random_range(0.9..1.0)).collect())
        .collect();
    let c = ModuleOperator::diagonal(&diags);
    let k = random_operator(&mut rng, n, d);
    let system = FrameSystem::new(
        submodules,
        weights,
        c.clone(),
        c,
        k,
        crate::DEFAULT_TOL,
    )?;
    Ok(ErasureInstance {
        system,
        subset: vec![0, 1],
    })
}

/// Base frame for the perturbation suite: scalar controls `c_t I` with
/// `c_t >= 1` per component (so the sequence-norm and quadratic-form
/// views of the frame inequality coincide up to a factor that only helps
/// the predicted envelope), invertible `K`, random submodules.
pub fn perturbation_base(seed: u64, n: usize, d: usize, m: usize) -> Result<FrameSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut submodules: Vec<Submodule> = Vec::new();
    // cover the space so the family is a frame, then add random members
    submodules.push(Submodule::full(n, d));
    for _ in 1..m {
        let r = rng.random_range(1..=n);
        submodules.push(random_submodule(&mut rng, n, d, r));
    }
    let weights: Vec<AlgebraElement> = (0..m)
        .map(|_| {
            AlgebraElement::from_reals(
                &(0..d)
                    .map(|_| rng.random_range(0.5..1.5))
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let scalars: Vec<f64> = (0..d).map(|_| rng.random_range(1.0..2.0)).collect();
    let c = ModuleOperator::scalar(n, &AlgebraElement::from_reals(&scalars));
    let scalars_p: Vec<f64> = (0..d).map(|_| rng.random_range(1.0..2.0)).collect();
    let cp = ModuleOperator::scalar(n, &AlgebraElement::from_reals(&scalars_p));
    let k = random_operator(&mut rng, n, d);
    FrameSystem::new(submodules, weights, c, cp, k, crate::DEFAULT_TOL)
}

/// Coordinate-diagonal instance where everything commutes: diagonal
/// controls, diagonal `K`, coordinate submodules. Used by the
/// controlled/uncontrolled equivalence suite. When `cover` is false one
/// coordinate inside the support of `K` is left uncovered, so the family
/// fails the lower frame inequality in both views.
pub fn commuting_instance(seed: u64, n: usize, d: usize, cover: bool) -> Result<FrameSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let skip = if cover { None } else { Some(rng.random_range(0..n)) };
    let mut submodules: Vec<Submodule> = Vec::new();
    let mut weights: Vec<AlgebraElement> = Vec::new();
    for i in 0..n {
        if Some(i) == skip {
            continue;
        }
        submodules.push(Submodule::coordinate(n, d, &[i]));
        weights.push(AlgebraElement::from_reals(
            &(0..d)
                .map(|_| rng.random_range(0.5..1.5))
                .collect::<Vec<_>>(),
        ));
    }
    let diag = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| -> Vec<Vec<f64>> {
        (0..d)
            .map(|_| (0..n).map(|_| rng.random_range(lo..hi)).collect())
            .collect()
    };
    let c = ModuleOperator::diagonal(&diag(&mut rng, 0.5, 2.0));
    let cp = ModuleOperator::diagonal(&diag(&mut rng, 0.5, 2.0));
    let k = ModuleOperator::diagonal(&diag(&mut rng, 0.3, 1.0));
    FrameSystem::new(submodules, weights, c, cp, k, crate::DEFAULT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let spec = InstanceSpec {
            d: 2,
            n: 5,
            m: 4,
            rank_range: (1, 3),
            weight_range: (0.5, 1.5),
            control_condition: 4.0,
            k_rank: 5,
            seed: 42,
            preset: None,
        };
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.k().blocks(), b.k().blocks());
        assert_eq!(a.control_c().blocks(), b.control_c().blocks());
        for i in 0..a.m() {
            assert_eq!(a.weights()[i], b.weights()[i]);
            assert!(a.submodules()[i].projection_distance(&b.submodules()[i]) == 0.0);
        }
    }

    #[test]
    fn parseval_preset_has_identity_frame_operator() {
        let sys = parseval_coordinate(4, 1, 2).unwrap();
        let s = sys.frame_operator().unwrap();
        let id = ModuleOperator::identity(4, 1);
        assert!(s.sub(&id).unwrap().op_norm() < 1e-12);
    }

    #[test]
    fn spec_validation_rejects_bad_ranges() {
        let mut spec = InstanceSpec {
            d: 1,
            n: 3,
            m: 2,
            rank_range: (1, 2),
            weight_range: (0.5, 1.0),
            control_condition: 2.0,
            k_rank: 3,
            seed: 0,
            preset: None,
        };
        assert!(spec.validate().is_ok());
        spec.rank_range = (2, 5);
        assert!(spec.validate().is_err());
        spec.rank_range = (1, 2);
        spec.control_condition = 0.5;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn zero_k_rank_gives_zero_operator() {
        let spec = InstanceSpec {
            d: 1,
            n: 4,
            m: 3,
            rank_range: (1, 2),
            weight_range: (0.5, 1.0),
            control_condition: 2.0,
            k_rank: 0,
            seed: 9,
            preset: None,
        };
        let sys = generate(&spec).unwrap();
        assert!(sys.k().op_norm() < 1e-12);
        let bounds = sys.optimal_star_bounds().unwrap();
        assert!(bounds.constrained.iter().all(|&c| !c));
        assert!(bounds.a_scalar.is_none());
    }
}
