use super::Cycle;
use crate::graph::{GraphError, VertexLabel};
use crate::rng::SeededRng;

/// Draws uniformly random `M`-subsets of `1..=N` (partial Fisher–Yates on the
/// seeded stream) until every plant has appeared in one, and chains the
/// distinct subsets in order of first appearance into a cycle.
pub fn generate_candidate_cycle(n: usize, m: usize, seed: u64) -> Result<Cycle, super::CycleError> {
    if m == 0 || m >= n {
        return Err(GraphError::InvalidCapacity { n, m }.into());
    }
    let mut rng = SeededRng::new(seed);
    let mut covered = vec![false; n + 1];
    let mut remaining = n;
    let mut seen = std::collections::HashSet::new();
    let mut vertices = Vec::new();
    let mut pool: Vec<usize> = (1..=n).collect();
    while remaining > 0 {
        for k in 0..m {
            let j = k + rng.below((n - k) as u64) as usize;
            pool.swap(k, j);
        }
        let label = VertexLabel::new(n, pool[..m].iter().copied())?;
        if seen.insert(label.clone()) {
            for &i in label.stable_set() {
                if !covered[i] {
                    covered[i] = true;
                    remaining -= 1;
                }
            }
            vertices.push(label);
        }
    }
    if vertices.len() < 2 {
        // One subset of size M < N cannot cover all plants.
        unreachable!("coverage needs at least two distinct subsets when M < N");
    }
    Cycle::new(vertices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::is_candidate_contractive;

    #[test]
    fn small_cycles_cover_everything() {
        for seed in 0..50 {
            let w = generate_candidate_cycle(3, 2, seed).unwrap();
            assert!((2..=3).contains(&w.len()));
            assert!(is_candidate_contractive(&w, 3));
        }
    }

    #[test]
    fn deterministic_under_seed() {
        assert_eq!(generate_candidate_cycle(30, 4, 9).unwrap(), generate_candidate_cycle(30, 4, 9).unwrap());
        assert!(generate_candidate_cycle(3, 3, 0).is_err());
    }
}
