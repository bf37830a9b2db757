//! JSON persistence. Complex numbers serialize as `[re, im]` pairs,
//! algebra elements as arrays of pairs, vectors as `n x d` arrays,
//! operators as one `n x n` array per component. Submodules store their
//! generators, never the orthonormal bases, which are recomputed on load.

use num_complex::Complex64;
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::AlgebraElement;
use crate::frames::FrameSystem;
use crate::linalg::CMat;
use crate::module::{ModuleVector, Submodule};
use crate::operators::ModuleOperator;
use crate::{Error, Result};

type Pair = [f64; 2];

fn to_pair(z: &Complex64) -> Pair {
    [z.re, z.im]
}

fn from_pair(p: &Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

impl Serialize for AlgebraElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.values()
            .iter()
            .map(to_pair)
            .collect::<Vec<_>>()
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<Pair>::deserialize(d)?;
        if pairs.is_empty() {
            return Err(D::Error::custom("algebra element needs d >= 1"));
        }
        Ok(AlgebraElement::new(pairs.iter().map(from_pair).collect()))
    }
}

impl Serialize for ModuleVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Pair>> = (0..self.n())
            .map(|i| {
                (0..self.d())
                    .map(|t| to_pair(&self.entries()[(i, t)]))
                    .collect()
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ModuleVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<Pair>>::deserialize(d)?;
        if rows.is_empty() || rows[0].is_empty() {
            return Err(D::Error::custom("module vector needs n >= 1 and d >= 1"));
        }
        let (n, dd) = (rows.len(), rows[0].len());
        if rows.iter().any(|r| r.len() != dd) {
            return Err(D::Error::custom("ragged module vector rows"));
        }
        Ok(ModuleVector::new(CMat::from_fn(n, dd, |i, t| {
            from_pair(&rows[i][t])
        })))
    }
}

impl Serialize for ModuleOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let comps: Vec<Vec<Vec<Pair>>> = (0..self.d())
            .map(|t| {
                let b = self.block(t);
                (0..b.nrows())
                    .map(|i| (0..b.ncols()).map(|j| to_pair(&b[(i, j)])).collect())
                    .collect()
            })
            .collect();
        comps.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ModuleOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let comps = Vec::<Vec<Vec<Pair>>>::deserialize(d)?;
        if comps.is_empty() {
            return Err(D::Error::custom("operator needs d >= 1"));
        }
        let n = comps[0].len();
        let mut blocks = Vec::with_capacity(comps.len());
        for comp in &comps {
            if comp.len() != n || comp.iter().any(|r| r.len() != n) {
                return Err(D::Error::custom("operator blocks must be square n x n"));
            }
            blocks.push(CMat::from_fn(n, n, |i, j| from_pair(&comp[i][j])));
        }
        ModuleOperator::from_blocks(blocks).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct SubmoduleJson {
    generators: Vec<ModuleVector>,
}

#[derive(Serialize, Deserialize)]
struct AlgebraJson {
    d: usize,
}

/// The on-disk shape of a frame system.
#[derive(Serialize, Deserialize)]
pub struct FrameSystemJson {
    algebra: AlgebraJson,
    n: usize,
    submodules: Vec<SubmoduleJson>,
    weights: Vec<AlgebraElement>,
    #[serde(rename = "C")]
    c: ModuleOperator,
    #[serde(rename = "Cp")]
    cp: ModuleOperator,
    #[serde(rename = "K")]
    k: ModuleOperator,
}

impl FrameSystemJson {
    pub fn from_system(f: &FrameSystem) -> Self {
        FrameSystemJson {
            algebra: AlgebraJson { d: f.d() },
            n: f.n(),
            submodules: f
                .submodules()
                .iter()
                .map(|w| SubmoduleJson {
                    generators: w.to_generators(),
                })
                .collect(),
            weights: f.weights().to_vec(),
            c: f.control_c().clone(),
            cp: f.control_cp().clone(),
            k: f.k().clone(),
        }
    }

    pub fn into_system(self, tol: f64) -> Result<FrameSystem> {
        let submodules = self
            .submodules
            .iter()
            .map(|s| Submodule::from_generators(&s.generators, tol))
            .collect::<Result<Vec<_>>>()?;
        for w in &submodules {
            if w.n() != self.n || w.d() != self.algebra.d {
                return Err(Error::Parse(format!(
                    "submodule shape {}x{} does not match header {}x{}",
                    w.n(),
                    w.d(),
                    self.n,
                    self.algebra.d
                )));
            }
        }
        FrameSystem::new(submodules, self.weights, self.c, self.cp, self.k, tol)
    }
}

pub fn frame_system_to_json(f: &FrameSystem) -> String {
    serde_json::to_string_pretty(&FrameSystemJson::from_system(f)).expect("serializable")
}

pub fn frame_system_from_json(json: &str, tol: f64) -> Result<FrameSystem> {
    let parsed: FrameSystemJson =
        serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    parsed.into_system(tol)
}

pub fn save_frame_system(f: &FrameSystem, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, frame_system_to_json(f) + "\n").map_err(|e| Error::Io(e.to_string()))
}

pub fn load_frame_system(path: &std::path::Path, tol: f64) -> Result<FrameSystem> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(e.to_string()))?;
    frame_system_from_json(&text, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{generate, InstanceSpec};

    #[test]
    fn round_trip_preserves_operators_and_projections() {
        let spec = InstanceSpec {
            d: 2,
            n: 5,
            m: 4,
            rank_range: (1, 3),
            weight_range: (0.5, 1.5),
            control_condition: 4.0,
            k_rank: 3,
            seed: 31,
            preset: None,
        };
        let f = generate(&spec).unwrap();
        let json = frame_system_to_json(&f);
        let g = frame_system_from_json(&json, 1e-9).unwrap();
        assert!(f.k().sub(g.k()).unwrap().op_norm() < 1e-12);
        assert!(f.control_c().sub(g.control_c()).unwrap().op_norm() < 1e-12);
        assert!(f.control_cp().sub(g.control_cp()).unwrap().op_norm() < 1e-12);
        for i in 0..f.m() {
            assert!(f.submodules()[i].projection_distance(&g.submodules()[i]) < 1e-12);
            assert!(f.weights()[i].sub(&g.weights()[i]).unwrap().norm() < 1e-15);
        }
        // serialization is a pure function of the system
        assert_eq!(json, frame_system_to_json(&f));
    }

    #[test]
    fn vector_and_element_json_shapes() {
        let v = ModuleVector::basis(2, 2, 0);
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, "[[[1.0,0.0],[1.0,0.0]],[[0.0,0.0],[0.0,0.0]]]");
        let back: ModuleVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);

        let a = AlgebraElement::new(vec![Complex64::new(1.0, -2.0)]);
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, "[[1.0,-2.0]]");
        let back: AlgebraElement = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(frame_system_from_json("{}", 1e-9).is_err());
        let ragged = "[[[1.0,0.0]],[[0.0,0.0],[1.0,0.0]]]";
        assert!(serde_json::from_str::<ModuleVector>(ragged).is_err());
    }
}
