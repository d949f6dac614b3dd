//! Game parameters, requests and rule-violation reporting.

use crate::dyadic::Dyadic;
use serde::{Deserialize, Serialize};

pub type Vertex = u64;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    PairPrefixFree,
    PairPrefixStable,
    PairBipartite,
    Set,
}

impl Mode {
    pub fn is_pair(self) -> bool {
        self != Mode::Set
    }

    pub fn is_bipartite(self) -> bool {
        self == Mode::PairBipartite
    }
}

/// A key of the allocation table: the vertex pair or set an interval set is
/// assigned to. Sorted for unordered modes; `[left, right]` in the
/// bipartite game, where the two sides have independent namespaces.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Key(Vec<Vertex>);

impl Key {
    pub fn new(mode: Mode, mut vertices: Vec<Vertex>) -> Self {
        if !mode.is_bipartite() {
            vertices.sort_unstable();
        }
        Key(vertices)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    /// (side, vertex) slots whose occupancy this key touches. The side is
    /// the position in the key for the bipartite game and 0 otherwise.
    pub fn slots(&self, mode: Mode) -> Vec<(u8, Vertex)> {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &v)| (if mode.is_bipartite() { i as u8 } else { 0 }, v))
            .collect()
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Request {
    pub vertices: Vec<Vertex>,
    pub size: Dyadic,
}

impl Request {
    pub fn key(&self, mode: Mode) -> Key {
        Key::new(mode, self.vertices.clone())
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct GameConfig {
    pub mode: Mode,
    /// Bit length of the vertex universe; `None` plays on the unbounded
    /// universe of the qualitative pair games.
    pub n: Option<u32>,
    /// Vertices per request: 2 in pair modes.
    pub s: usize,
    /// Per-vertex budget.
    pub d: Dyadic,
    /// Maximal request size.
    pub delta: Dyadic,
    /// Match factor of the prefix-stable winning check.
    pub c: Dyadic,
    pub allowed_sizes: Vec<Dyadic>,
    pub seed: u64,
}

impl GameConfig {
    pub fn pair(mode: Mode, d: Dyadic, delta: Dyadic, allowed_sizes: Vec<Dyadic>) -> Self {
        GameConfig {
            mode,
            n: None,
            s: 2,
            d,
            delta,
            c: Dyadic::one(),
            allowed_sizes,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("d", &self.d), ("delta", &self.delta), ("c", &self.c)] {
            if v.log2().map_or(true, |l| l > 0) {
                return Err(format!("{name} must be a power of two in (0,1], got {v}"));
            }
        }
        if self.allowed_sizes.is_empty() {
            return Err("allowed_sizes must be nonempty".into());
        }
        for v in &self.allowed_sizes {
            if v.log2().map_or(true, |l| l > 0) {
                return Err(format!("allowed size {v} is not a power of two in (0,1]"));
            }
        }
        match self.mode {
            Mode::Set if self.s < 2 => Err("set mode needs s >= 2".into()),
            Mode::Set => Ok(()),
            _ if self.s != 2 => Err("pair modes need s = 2".into()),
            _ => Ok(()),
        }
    }
}

/// A broken game rule; the referee names the offender and the rule.
#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error, Serialize, Deserialize)]
pub enum Violation {
    #[error("budget exceeded at vertex {vertex}")]
    Budget { vertex: Vertex },
    #[error("request size {size} exceeds delta")]
    SizeAboveDelta { size: Dyadic },
    #[error("request size {size} is not an allowed size")]
    SizeNotAllowed { size: Dyadic },
    #[error("request must have {expected} distinct vertices")]
    Arity { expected: usize },
    #[error("vertex {vertex} outside the 2^n universe")]
    VertexOutOfRange { vertex: Vertex },
    #[error("reply overlaps earlier allocation at vertex {vertex}")]
    Overlap { vertex: Vertex },
    #[error("demand for {key:?} not met")]
    DemandUnmet { key: Key },
}
