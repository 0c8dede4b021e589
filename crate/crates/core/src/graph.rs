//! The allocation digraph, kept implicit. A vertex is a set of `M` plants
//! holding the channel (its stable set); every ordered pair of distinct
//! vertices is an edge. Weights come from the plants' certificate scalars.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::certificates::CertificateScalars;
use crate::scalar::Scalar;

/// Default ceiling on the number of vertices [`enumerate_vertices`] will list.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("need 0 < M < N, got N = {n}, M = {m}")]
    InvalidCapacity { n: usize, m: usize },

    #[error("stable set {set:?} is invalid for N = {n}: {reason}")]
    InvalidStableSet { n: usize, set: Vec<usize>, reason: String },

    #[error("self-loops are not edges of the graph (vertex {0})")]
    SelfLoop(String),

    #[error("expected certificate scalars for {expected} plants, got {found}")]
    MissingCertificates { expected: usize, found: usize },

    #[error("vertex rank {rank} out of range for {count} vertices")]
    RankOutOfRange { rank: String, count: String },

    #[error("graph has {count} vertices, above the enumeration cap {cap}")]
    TooManyVertices { count: String, cap: u64 },

    #[error("cannot parse stable set from {0:?}")]
    Parse(String),
}

/// Mode of one plant at a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Stable,
    Unstable,
}

/// A vertex, identified by its sorted 1-based stable set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexLabel {
    n: usize,
    stable: Vec<usize>,
}

impl VertexLabel {
    /// Indices may come in any order; duplicates and out-of-range indices are
    /// rejected, as are sets of size 0 or `N`.
    pub fn new(n: usize, stable: impl IntoIterator<Item = usize>) -> Result<Self, GraphError> {
        let mut set: Vec<usize> = stable.into_iter().collect();
        set.sort_unstable();
        let invalid = |set: &[usize], reason: &str| GraphError::InvalidStableSet { n, set: set.to_vec(), reason: reason.into() };
        if set.is_empty() || set.len() >= n {
            return Err(invalid(&set, "size must satisfy 0 < M < N"));
        }
        if set[0] == 0 || *set.last().unwrap() > n {
            return Err(invalid(&set, "indices must lie in 1..=N"));
        }
        if set.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid(&set, "indices must be distinct"));
        }
        Ok(Self { n, stable: set })
    }

    pub fn num_plants(&self) -> usize {
        self.n
    }

    pub fn capacity(&self) -> usize {
        self.stable.len()
    }

    pub fn stable_set(&self) -> &[usize] {
        &self.stable
    }

    pub fn contains(&self, plant: usize) -> bool {
        self.stable.binary_search(&plant).is_ok()
    }

    /// Mode of plant `i` (1-based) at this vertex.
    pub fn mode(&self, plant: usize) -> Mode {
        if self.contains(plant) {
            Mode::Stable
        } else {
            Mode::Unstable
        }
    }

    /// 0-based position in the lexicographic order of all `M`-subsets.
    pub fn rank(&self) -> BigUint {
        let m = self.stable.len();
        let mut rank = BigUint::zero();
        let mut prev = 0;
        for (pos, &c) in self.stable.iter().enumerate() {
            for skipped in (prev + 1)..c {
                rank += binomial(self.n - skipped, m - pos - 1);
            }
            prev = c;
        }
        rank
    }

    /// Inverse of [`Self::rank`].
    pub fn from_rank(n: usize, m: usize, rank: &BigUint) -> Result<Self, GraphError> {
        let count = vertex_count(n, m)?;
        if *rank >= count {
            return Err(GraphError::RankOutOfRange { rank: rank.to_string(), count: count.to_string() });
        }
        let mut r = rank.clone();
        let mut set = Vec::with_capacity(m);
        let mut c = 1;
        for pos in 0..m {
            loop {
                let block = binomial(n - c, m - pos - 1);
                if r < block {
                    break;
                }
                r -= block;
                c += 1;
            }
            set.push(c);
            c += 1;
        }
        Self::new(n, set)
    }
}

impl fmt::Display for VertexLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.stable.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Parses the index list of a stable set such as `{2,3}` or `2,3`; the
/// number of plants must be supplied separately via [`parse_stable_set`].
impl FromStr for StableSetText {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s.trim().trim_start_matches('{').trim_end_matches('}');
        inner
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| GraphError::Parse(s.to_string())))
            .collect::<Result<Vec<_>, _>>()
            .map(StableSetText)
    }
}

/// Raw index list parsed from text, before validation against `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StableSetText(pub Vec<usize>);

pub fn parse_stable_set(n: usize, s: &str) -> Result<VertexLabel, GraphError> {
    VertexLabel::new(n, s.parse::<StableSetText>()?.0)
}

/// Exact binomial coefficient.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Number of vertices, `C(N, M)`.
pub fn vertex_count(n: usize, m: usize) -> Result<BigUint, GraphError> {
    if m == 0 || m >= n {
        return Err(GraphError::InvalidCapacity { n, m });
    }
    Ok(binomial(n, m))
}

/// All vertices in lexicographic order, refusing graphs above `cap` vertices.
pub fn enumerate_vertices(n: usize, m: usize, cap: u64) -> Result<Vec<VertexLabel>, GraphError> {
    let count = vertex_count(n, m)?;
    match count.to_u64() {
        Some(c) if c <= cap => {}
        _ => return Err(GraphError::TooManyVertices { count: count.to_string(), cap }),
    }
    let mut out = Vec::new();
    let mut set: Vec<usize> = (1..=m).collect();
    loop {
        out.push(VertexLabel { n, stable: set.clone() });
        // Advance to the next combination.
        let mut i = m;
        while i > 0 && set[i - 1] == n - m + i {
            i -= 1;
        }
        if i == 0 {
            return Ok(out);
        }
        set[i - 1] += 1;
        for j in i..m {
            set[j] = set[j - 1] + 1;
        }
    }
}

/// Per-plant weights of a vertex or edge.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector<T>(pub Vec<T>);

impl<T: Scalar> WeightVector<T> {
    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    /// Weight of plant `i` (1-based).
    pub fn plant(&self, i: usize) -> T {
        self.0[i - 1]
    }
}

fn check_scalars<T>(n: usize, scalars: &[CertificateScalars<T>]) -> Result<(), GraphError> {
    if scalars.len() != n {
        return Err(GraphError::MissingCertificates { expected: n, found: scalars.len() });
    }
    Ok(())
}

/// `−|ln λ_is|` for plants in the stable set, `+|ln λ_iu|` otherwise.
pub fn vertex_weight<T: Scalar>(v: &VertexLabel, scalars: &[CertificateScalars<T>]) -> Result<WeightVector<T>, GraphError> {
    check_scalars(v.n, scalars)?;
    Ok(WeightVector(
        scalars
            .iter()
            .enumerate()
            .map(|(k, s)| match v.mode(k + 1) {
                Mode::Stable => -s.stable_rate(),
                Mode::Unstable => s.unstable_rate(),
            })
            .collect(),
    ))
}

/// `ln μ_su` for plants leaving the channel, `ln μ_us` for plants joining it,
/// zero for plants whose mode is unchanged.
pub fn edge_weight<T: Scalar>(u: &VertexLabel, v: &VertexLabel, scalars: &[CertificateScalars<T>]) -> Result<WeightVector<T>, GraphError> {
    if u == v {
        return Err(GraphError::SelfLoop(u.to_string()));
    }
    if u.n != v.n {
        return Err(GraphError::MissingCertificates { expected: u.n, found: v.n });
    }
    check_scalars(u.n, scalars)?;
    Ok(WeightVector(
        scalars
            .iter()
            .enumerate()
            .map(|(k, s)| match (u.mode(k + 1), v.mode(k + 1)) {
                (Mode::Stable, Mode::Unstable) => s.mu_su.ln(),
                (Mode::Unstable, Mode::Stable) => s.mu_us.ln(),
                _ => T::zero(),
            })
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: usize, s: &[usize]) -> VertexLabel {
        VertexLabel::new(n, s.iter().copied()).unwrap()
    }

    #[test]
    fn counts() {
        assert_eq!(vertex_count(3, 2).unwrap(), BigUint::from(3u32));
        assert_eq!(vertex_count(5, 2).unwrap(), BigUint::from(10u32));
        assert!(vertex_count(3, 3).is_err());
        assert!(vertex_count(3, 0).is_err());
    }

    #[test]
    fn label_validation_and_display() {
        assert!(VertexLabel::new(3, [1, 2, 3]).is_err());
        assert!(VertexLabel::new(3, [1, 1]).is_err());
        assert!(VertexLabel::new(3, [0, 1]).is_err());
        assert_eq!(v(5, &[3, 2]).to_string(), "{2,3}");
        assert_eq!(parse_stable_set(5, " {4, 5} ").unwrap(), v(5, &[4, 5]));
        assert!(parse_stable_set(5, "{a}").is_err());
    }

    #[test]
    fn lexicographic_numbering_of_five_choose_two() {
        let all = enumerate_vertices(5, 2, DEFAULT_ENUMERATION_CAP).unwrap();
        let names: Vec<String> = all.iter().map(|x| x.to_string()).collect();
        assert_eq!(names, ["{1,2}", "{1,3}", "{1,4}", "{1,5}", "{2,3}", "{2,4}", "{2,5}", "{3,4}", "{3,5}", "{4,5}"]);
        for (r, x) in all.iter().enumerate() {
            assert_eq!(x.rank(), BigUint::from(r));
            assert_eq!(&VertexLabel::from_rank(5, 2, &BigUint::from(r)).unwrap(), x);
        }
        assert!(VertexLabel::from_rank(5, 2, &BigUint::from(10u32)).is_err());
    }

    #[test]
    fn enumeration_cap() {
        assert!(matches!(enumerate_vertices(1000, 10, DEFAULT_ENUMERATION_CAP), Err(GraphError::TooManyVertices { .. })));
    }

    #[test]
    fn weights_for_three_plants() {
        let s = vec![CertificateScalars::<f64>::from_f64(1, [0.25, 1.1, 1.1, 1.2]).unwrap(); 3];
        let w = vertex_weight(&v(3, &[1, 2]), &s).unwrap();
        assert!((w.plant(1) + 4f64.ln()).abs() < 1e-15);
        assert!((w.plant(3) - 1.1f64.ln()).abs() < 1e-15);
        let e = edge_weight(&v(3, &[1, 2]), &v(3, &[1, 3]), &s).unwrap();
        assert_eq!(e.plant(1), 0.0);
        assert!((e.plant(2) - 1.1f64.ln()).abs() < 1e-15);
        assert!((e.plant(3) - 1.2f64.ln()).abs() < 1e-15);
        assert!(edge_weight(&v(3, &[1, 2]), &v(3, &[1, 2]), &s).is_err());
        assert!(vertex_weight(&v(3, &[1, 2]), &s[..2]).is_err());
    }
}
