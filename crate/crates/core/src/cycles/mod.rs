//! Cycles on the allocation graph and their contractivity.
//!
//! For a cycle `W = (v_0, …, v_{n−1})` with dwell times `T_j`, plant `i`
//! accumulates
//! `Ξ_i(W) = Σ_j w̄_i(v_j) T_j + Σ_j w̲_i(v_j, v_{j+1})` (closing edge included).
//! The cycle is T-contractive when every `Ξ_i` is negative: one traversal then
//! shrinks every plant's Lyapunov value by the factor `exp(Ξ_i)`.

mod random;
mod search;
mod sufficiency;

pub use random::generate_candidate_cycle;
pub use search::{
    find_t_factors, find_t_factors_with, PlantCoefficients, DEFAULT_T_MAX,
    EXHAUSTIVE_SEARCH_MAX_LEN,
};
pub use sufficiency::{
    check_prop3, check_prop4, construct_prop3_cycle, construct_prop4_cycle, pair_cycle, rotation_cycle, SufficiencyReport,
};

use thiserror::Error;

use crate::certificates::CertificateScalars;
use crate::graph::{edge_weight, vertex_weight, GraphError, Mode, VertexLabel};
use crate::scalar::Scalar;

/// `Ξ_i` must be below `−CONTRACTIVITY_MARGIN` to count as negative.
pub const CONTRACTIVITY_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CycleError {
    #[error("invalid cycle: {0}")]
    InvalidCycle(String),

    #[error("expected {expected} T-factors, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("T-factors must be at least 1")]
    ZeroDwell,

    #[error("construction precondition violated: {0}")]
    Precondition(String),

    #[error("condition fails for plants {plants:?}")]
    ConditionFails { plants: Vec<usize> },

    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Ordered list of distinct vertices; the edge back to the first vertex is implicit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cycle {
    vertices: Vec<VertexLabel>,
}

impl Cycle {
    pub fn new(vertices: Vec<VertexLabel>) -> Result<Self, CycleError> {
        if vertices.len() < 2 {
            return Err(CycleError::InvalidCycle(format!("needs at least 2 vertices, got {}", vertices.len())));
        }
        let (n, m) = (vertices[0].num_plants(), vertices[0].capacity());
        for v in &vertices {
            if v.num_plants() != n || v.capacity() != m {
                return Err(CycleError::InvalidCycle(format!("vertex {v} does not match N = {n}, M = {m}")));
            }
        }
        let mut sorted: Vec<&VertexLabel> = vertices.iter().collect();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(CycleError::InvalidCycle(format!("vertex {} repeats", w[0])));
        }
        Ok(Self { vertices })
    }

    /// Builds a cycle from raw stable sets of `n` plants.
    pub fn from_stable_sets<S: AsRef<[usize]>>(n: usize, sets: &[S]) -> Result<Self, CycleError> {
        let vertices = sets
            .iter()
            .map(|s| VertexLabel::new(n, s.as_ref().iter().copied()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(vertices)
    }

    pub fn vertices(&self) -> &[VertexLabel] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    /// Always `false`: cycles have at least two vertices.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn num_plants(&self) -> usize {
        self.vertices[0].num_plants()
    }

    pub fn capacity(&self) -> usize {
        self.vertices[0].capacity()
    }

    /// Successor of position `j`, wrapping to the start.
    pub fn next_index(&self, j: usize) -> usize {
        (j + 1) % self.vertices.len()
    }

    /// Modes of plant `i` around the cycle.
    pub fn modes(&self, plant: usize) -> Vec<Mode> {
        self.vertices.iter().map(|v| v.mode(plant)).collect()
    }
}

impl std::fmt::Display for Cycle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (k, v) in self.vertices.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Dwell time of each cycle vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TFactors(Vec<u64>);

impl TFactors {
    pub fn new(values: Vec<u64>) -> Result<Self, CycleError> {
        if values.iter().any(|&t| t == 0) {
            return Err(CycleError::ZeroDwell);
        }
        Ok(Self(values))
    }

    pub fn uniform(n: usize, t: u64) -> Result<Self, CycleError> {
        Self::new(vec![t; n])
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Period `T_W = Σ T_j`.
    pub fn period(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn scaled(&self, c: u64) -> Result<Self, CycleError> {
        Self::new(self.0.iter().map(|t| t * c).collect())
    }

    fn check_len(&self, cycle: &Cycle) -> Result<(), CycleError> {
        if self.0.len() != cycle.len() {
            return Err(CycleError::LengthMismatch { expected: cycle.len(), found: self.0.len() });
        }
        Ok(())
    }
}

/// Mode changes of one plant over a full traversal, closing edge included.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransitionCounts {
    /// Stable → unstable.
    pub su: u64,
    /// Unstable → stable.
    pub us: u64,
}

pub fn transition_counts(cycle: &Cycle, plant: usize) -> TransitionCounts {
    let modes = cycle.modes(plant);
    let mut counts = TransitionCounts { su: 0, us: 0 };
    for j in 0..modes.len() {
        match (modes[j], modes[cycle.next_index(j)]) {
            (Mode::Stable, Mode::Unstable) => counts.su += 1,
            (Mode::Unstable, Mode::Stable) => counts.us += 1,
            _ => {}
        }
    }
    counts
}

/// Every plant is stable at some vertex (necessary for T-contractivity).
pub fn is_candidate_contractive(cycle: &Cycle, n: usize) -> bool {
    cycle.num_plants() == n && (1..=n).all(|i| cycle.vertices().iter().any(|v| v.contains(i)))
}

/// `Ξ_i(W)` for every plant, summing vertex and edge weights along the cycle.
pub fn xi<T: Scalar>(cycle: &Cycle, t: &TFactors, scalars: &[CertificateScalars<T>]) -> Result<Vec<T>, CycleError> {
    t.check_len(cycle)?;
    let vs = cycle.vertices();
    let mut total = vec![T::zero(); cycle.num_plants()];
    for (j, v) in vs.iter().enumerate() {
        let tw = T::of(t.as_slice()[j] as f64);
        let wv = vertex_weight(v, scalars)?;
        let we = edge_weight(v, &vs[cycle.next_index(j)], scalars)?;
        for (i, acc) in total.iter_mut().enumerate() {
            *acc += wv.0[i] * tw + we.0[i];
        }
    }
    Ok(total)
}

/// `Ξ_i(W)` from aggregated dwell times and transition counts:
/// `−|ln λ_s| D_s + |ln λ_u| D_u + ln μ_su N_su + ln μ_us N_us`.
pub fn xi_grouped<T: Scalar>(cycle: &Cycle, t: &TFactors, scalars: &[CertificateScalars<T>]) -> Result<Vec<T>, CycleError> {
    t.check_len(cycle)?;
    let n = cycle.num_plants();
    if scalars.len() != n {
        return Err(GraphError::MissingCertificates { expected: n, found: scalars.len() }.into());
    }
    Ok((1..=n)
        .map(|i| {
            let s = &scalars[i - 1];
            let (mut ds, mut du) = (0u64, 0u64);
            for (v, &tj) in cycle.vertices().iter().zip(t.as_slice()) {
                if v.contains(i) {
                    ds += tj;
                } else {
                    du += tj;
                }
            }
            let c = transition_counts(cycle, i);
            -s.stable_rate() * T::of(ds as f64)
                + s.unstable_rate() * T::of(du as f64)
                + s.mu_su.ln() * T::of(c.su as f64)
                + s.mu_us.ln() * T::of(c.us as f64)
        })
        .collect())
}

/// `Ξ` together with the margins `ε_i = −Ξ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractivityReport<T> {
    pub xi: Vec<T>,
    pub margins: Vec<T>,
    pub contractive: bool,
}

impl<T: Scalar> ContractivityReport<T> {
    /// Plants (1-based) whose `Ξ_i` is not below the margin.
    pub fn failing_plants(&self) -> Vec<usize> {
        let thr = -T::of(CONTRACTIVITY_MARGIN);
        self.xi.iter().enumerate().filter(|(_, &x)| !(x < thr)).map(|(i, _)| i + 1).collect()
    }
}

pub fn check_t_contractive<T: Scalar>(
    cycle: &Cycle,
    t: &TFactors,
    scalars: &[CertificateScalars<T>],
) -> Result<ContractivityReport<T>, CycleError> {
    let xi = xi(cycle, t, scalars)?;
    let thr = -T::of(CONTRACTIVITY_MARGIN);
    let contractive = xi.iter().all(|&x| x < thr);
    let margins = xi.iter().map(|&x| -x).collect();
    Ok(ContractivityReport { xi, margins, contractive })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_scalars() -> Vec<CertificateScalars<f64>> {
        vec![CertificateScalars::from_f64(1, [0.25, 1.1, 1.1, 1.2]).unwrap(); 3]
    }

    #[test]
    fn cycle_validation() {
        assert!(Cycle::from_stable_sets(3, &[[1, 2]]).is_err());
        assert!(Cycle::from_stable_sets(3, &[[1, 2], [2, 1]]).is_err());
        assert!(Cycle::from_stable_sets(3, &[vec![1, 2], vec![3]]).is_err());
        assert!(Cycle::from_stable_sets(3, &[[1, 2], [1, 3]]).is_ok());
        assert!(TFactors::new(vec![1, 0]).is_err());
    }

    #[test]
    fn candidate_contractivity() {
        let w = Cycle::from_stable_sets(3, &[[1, 2], [1, 3]]).unwrap();
        assert!(is_candidate_contractive(&w, 3));
        let w = Cycle::from_stable_sets(4, &[[1, 2], [2, 3]]).unwrap();
        assert!(!is_candidate_contractive(&w, 4));
    }

    #[test]
    fn counts_close_the_cycle() {
        let w = Cycle::from_stable_sets(3, &[[1, 2], [1, 3]]).unwrap();
        assert_eq!(transition_counts(&w, 1), TransitionCounts { su: 0, us: 0 });
        assert_eq!(transition_counts(&w, 2), TransitionCounts { su: 1, us: 1 });
        assert_eq!(transition_counts(&w, 3), TransitionCounts { su: 1, us: 1 });
    }

    #[test]
    fn two_vertex_example_values() {
        let w = Cycle::from_stable_sets(3, &[[1, 2], [1, 3]]).unwrap();
        let t = TFactors::new(vec![5, 4]).unwrap();
        let x = xi(&w, &t, &example_scalars()).unwrap();
        assert!((x[0] + 9.0 * 4f64.ln()).abs() < 1e-12);
        let expect2 = -5.0 * 4f64.ln() + 4.0 * 1.1f64.ln() + 1.1f64.ln() + 1.2f64.ln();
        assert!((x[1] - expect2).abs() < 1e-12);
        let g = xi_grouped(&w, &t, &example_scalars()).unwrap();
        for (a, b) in x.iter().zip(&g) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(xi(&w, &TFactors::new(vec![1]).unwrap(), &example_scalars()).is_err());
    }

    #[test]
    fn exact_cancellation_is_not_contractive() {
        let s = vec![CertificateScalars::<f64>::from_f64(1, [0.5, 2.0, 1.0, 1.0]).unwrap(); 2];
        let w = Cycle::from_stable_sets(2, &[[1], [2]]).unwrap();
        let r = check_t_contractive(&w, &TFactors::uniform(2, 3).unwrap(), &s).unwrap();
        assert!(r.xi.iter().all(|x| x.abs() < 1e-15));
        assert!(!r.contractive);
        assert_eq!(r.failing_plants(), vec![1, 2]);
    }
}
