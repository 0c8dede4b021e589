//! Search for dwell times making a cycle T-contractive.
//!
//! For plant `i` write `S_i` (`U_i`) for the total dwell at vertices where it
//! is stable (unstable) and `n_i` for its number of round trips between the
//! modes. Then `Ξ_i = −a_s S_i + a_u U_i + c n_i` with `a_s = |ln λ_s|`,
//! `a_u = |ln λ_u|`, `c = ln μ_su + ln μ_us`. `Ξ_i` decreases in every dwell at
//! a stable vertex and increases in every dwell at an unstable one, which is
//! what makes the pruning below sound.
//!
//! A plant may offer several certificate candidates; it is satisfied when at
//! least one of them gives a negative `Ξ_i`. Candidates sharing `a_u` are
//! reduced to the lower convex hull of their `(a_s, c)` Pareto front, the
//! only points that can minimize `c n − a_s S` for `S, n ≥ 0`.

use super::{is_candidate_contractive, transition_counts, Cycle, TFactors, CONTRACTIVITY_MARGIN};
use crate::certificates::CertificateScalars;
use crate::scalar::Scalar;

/// Default upper bound on each T-factor.
pub const DEFAULT_T_MAX: u64 = 100;

/// Cycles up to this length are searched exhaustively (with pruning), so the
/// result is the lexicographically smallest feasible T. Longer cycles use a
/// uniform scan followed by coordinate descent.
pub const EXHAUSTIVE_SEARCH_MAX_LEN: usize = 6;

#[derive(Debug, Clone)]
struct Group<T> {
    a_u: T,
    /// `(a_s, c)` sorted by ascending `a_s`, convex in `c`.
    hull: Vec<(T, T)>,
}

/// The certificate candidates of one plant, reduced for fast minimization of `Ξ_i`.
#[derive(Debug, Clone)]
pub struct PlantCoefficients<T> {
    groups: Vec<Group<T>>,
}

impl<T: Scalar> PlantCoefficients<T> {
    pub fn from_scalars<I: IntoIterator<Item = CertificateScalars<T>>>(candidates: I) -> Self {
        let mut pts: Vec<(T, T, T)> = candidates
            .into_iter()
            .map(|s| (s.unstable_rate(), s.stable_rate(), s.switch_cost()))
            .collect();
        pts.sort_by(|x, y| {
            x.0.partial_cmp(&y.0)
                .unwrap()
                .then(x.1.partial_cmp(&y.1).unwrap())
                .then(x.2.partial_cmp(&y.2).unwrap())
        });
        let mut groups = Vec::new();
        let mut start = 0;
        while start < pts.len() {
            let mut end = start;
            while end < pts.len() && pts[end].0 == pts[start].0 {
                end += 1;
            }
            groups.push(Group { a_u: pts[start].0, hull: reduce(&pts[start..end]) });
            start = end;
        }
        Self { groups }
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Number of points kept after the reduction.
    pub fn reduced_len(&self) -> usize {
        self.groups.iter().map(|g| g.hull.len()).sum()
    }

    /// Smallest `Ξ_i` over all candidates for stable dwell `s`, unstable
    /// dwell `u` and `n` round trips. `+∞` when there are no candidates.
    pub fn min_xi(&self, s: T, u: T, n: T) -> T {
        let mut best = T::infinity();
        for g in &self.groups {
            let f = |k: usize| g.hull[k].1 * n - g.hull[k].0 * s;
            // f is unimodal along the convex chain: find the first k whose
            // successor is no better.
            let (mut lo, mut hi) = (0, g.hull.len() - 1);
            while lo < hi {
                let mid = (lo + hi) / 2;
                if f(mid + 1) < f(mid) {
                    lo = mid + 1;
                } else {
                    hi = mid;
                }
            }
            best = best.min(g.a_u * u + f(lo));
        }
        best
    }
}

/// Pareto front (high `a_s`, low `c`) followed by its lower convex hull.
/// Input points are sorted by ascending `a_s`.
fn reduce<T: Scalar>(pts: &[(T, T, T)]) -> Vec<(T, T)> {
    let mut front: Vec<(T, T)> = Vec::new();
    let mut min_c = T::infinity();
    for &(_, a_s, c) in pts.iter().rev() {
        if c < min_c {
            front.push((a_s, c));
            min_c = c;
        }
    }
    front.reverse();
    let mut hull: Vec<(T, T)> = Vec::with_capacity(front.len());
    for p in front {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross <= T::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

struct Problem<'a, T> {
    n: usize,
    t_max: u64,
    /// `stable[i][j]`: plant `i` is stable at position `j`.
    stable: Vec<Vec<bool>>,
    trips: Vec<T>,
    coeffs: &'a [PlantCoefficients<T>],
    threshold: T,
}

impl<'a, T: Scalar> Problem<'a, T> {
    fn new(cycle: &Cycle, coeffs: &'a [PlantCoefficients<T>], t_max: u64) -> Self {
        let plants = cycle.num_plants();
        Self {
            n: cycle.len(),
            t_max,
            stable: (1..=plants).map(|i| cycle.vertices().iter().map(|v| v.contains(i)).collect()).collect(),
            trips: (1..=plants).map(|i| T::of(transition_counts(cycle, i).su as f64)).collect(),
            coeffs,
            threshold: -T::of(CONTRACTIVITY_MARGIN),
        }
    }

    fn ok(&self, i: usize, s: u64, u: u64) -> bool {
        self.coeffs[i].min_xi(T::of(s as f64), T::of(u as f64), self.trips[i]) < self.threshold
    }

    fn split(&self, i: usize, t: &[u64]) -> (u64, u64) {
        let mut s = 0;
        let mut u = 0;
        for (j, &tj) in t.iter().enumerate() {
            if self.stable[i][j] {
                s += tj;
            } else {
                u += tj;
            }
        }
        (s, u)
    }

    fn feasible(&self, t: &[u64]) -> bool {
        (0..self.stable.len()).all(|i| {
            let (s, u) = self.split(i, t);
            self.ok(i, s, u)
        })
    }

    /// Smallest `t ∈ [1, t_max]` with `pred(t)`, for `pred` monotone false→true.
    fn first_true(&self, pred: impl Fn(u64) -> bool) -> Option<u64> {
        if !pred(self.t_max) {
            return None;
        }
        let (mut lo, mut hi) = (1, self.t_max);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if pred(mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo)
    }

    /// Largest `t ∈ [1, t_max]` with `pred(t)`, for `pred` monotone true→false.
    fn last_true(&self, pred: impl Fn(u64) -> bool) -> Option<u64> {
        if !pred(1) {
            return None;
        }
        let (mut lo, mut hi) = (1, self.t_max);
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if pred(mid) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        Some(lo)
    }

    fn exhaustive(&self) -> Option<Vec<u64>> {
        let plants = self.stable.len();
        // rest[k][i] = (#stable, #unstable) positions of plant i at or after k.
        let mut rest = vec![vec![(0u64, 0u64); plants]; self.n + 1];
        for k in (0..self.n).rev() {
            for i in 0..plants {
                let (s, u) = rest[k + 1][i];
                rest[k][i] = if self.stable[i][k] { (s + 1, u) } else { (s, u + 1) };
            }
        }
        let mut t = vec![0u64; self.n];
        let mut prefix = vec![(0u64, 0u64); plants];
        self.dfs(0, &mut t, &mut prefix, &rest).then_some(t)
    }

    fn dfs(&self, k: usize, t: &mut [u64], prefix: &mut [(u64, u64)], rest: &[Vec<(u64, u64)>]) -> bool {
        // Optimistic bound: remaining stable slots at t_max, unstable at 1.
        for (i, &(s, u)) in prefix.iter().enumerate() {
            let (rs, ru) = rest[k][i];
            if !self.ok(i, s + rs * self.t_max, u + ru) {
                return false;
            }
        }
        if k + 1 == self.n {
            return self.solve_last(k, t, prefix);
        }
        for v in 1..=self.t_max {
            t[k] = v;
            for (i, p) in prefix.iter_mut().enumerate() {
                if self.stable[i][k] {
                    p.0 += v;
                } else {
                    p.1 += v;
                }
            }
            let found = self.dfs(k + 1, t, prefix, rest);
            for (i, p) in prefix.iter_mut().enumerate() {
                if self.stable[i][k] {
                    p.0 -= v;
                } else {
                    p.1 -= v;
                }
            }
            if found {
                return true;
            }
        }
        false
    }

    /// With all but the last T-factor fixed, the feasible values of the last
    /// one form an interval; take its lower end.
    fn solve_last(&self, k: usize, t: &mut [u64], prefix: &[(u64, u64)]) -> bool {
        let mut lo = 1;
        let mut hi = self.t_max;
        for (i, &(s, u)) in prefix.iter().enumerate() {
            if self.stable[i][k] {
                match self.first_true(|v| self.ok(i, s + v, u)) {
                    Some(l) => lo = lo.max(l),
                    None => return false,
                }
            } else {
                match self.last_true(|v| self.ok(i, s, u + v)) {
                    Some(h) => hi = hi.min(h),
                    None => return false,
                }
            }
            if lo > hi {
                return false;
            }
        }
        t[k] = lo;
        true
    }

    fn uniform_then_descend(&self) -> Option<Vec<u64>> {
        let t0 = (1..=self.t_max).find(|&v| self.feasible(&vec![v; self.n]))?;
        let mut t = vec![t0; self.n];
        loop {
            let mut changed = false;
            for j in 0..self.n {
                // Lowering T_j only helps plants unstable at j; the plants
                // stable at j each impose a lower bound.
                let mut lo = 1;
                for i in 0..self.stable.len() {
                    if self.stable[i][j] {
                        let (s, u) = self.split(i, &t);
                        let base = s - t[j];
                        let l = self.first_true(|v| self.ok(i, base + v, u)).expect("current T is feasible");
                        lo = lo.max(l);
                    }
                }
                if lo < t[j] {
                    t[j] = lo;
                    changed = true;
                }
            }
            if !changed {
                return Some(t);
            }
        }
    }
}

/// T-factors in `[1, t_max]` making `cycle` T-contractive for at least one
/// candidate per plant, or `None`. `None` only means the search found nothing:
/// for cycles longer than [`EXHAUSTIVE_SEARCH_MAX_LEN`] the search is not
/// complete.
pub fn find_t_factors_with<T: Scalar>(cycle: &Cycle, coeffs: &[PlantCoefficients<T>], t_max: u64) -> Option<TFactors> {
    let n_plants = cycle.num_plants();
    if t_max == 0 || coeffs.len() != n_plants || !is_candidate_contractive(cycle, n_plants) {
        return None;
    }
    if coeffs.iter().any(|c| c.is_empty()) {
        return None;
    }
    let problem = Problem::new(cycle, coeffs, t_max);
    let t = if cycle.len() <= EXHAUSTIVE_SEARCH_MAX_LEN {
        problem.exhaustive()
    } else {
        problem.uniform_then_descend()
    }?;
    Some(TFactors::new(t).expect("search values are at least 1"))
}

/// [`find_t_factors_with`] for one fixed certificate per plant.
pub fn find_t_factors<T: Scalar>(cycle: &Cycle, scalars: &[CertificateScalars<T>], t_max: u64) -> Option<TFactors> {
    let coeffs: Vec<PlantCoefficients<T>> =
        scalars.iter().map(|s| PlantCoefficients::from_scalars([*s])).collect();
    find_t_factors_with(cycle, &coeffs, t_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(v: [f64; 4]) -> CertificateScalars<f64> {
        CertificateScalars::from_f64(1, v).unwrap()
    }

    #[test]
    fn hull_keeps_only_useful_points() {
        // Same a_u; second point is dominated, fourth lies above the chord.
        let pts = [
            sc([0.5, 1.5, 1.0, 1.0]),
            sc([0.6, 1.5, 1.5, 1.5]),
            sc([0.1, 1.5, 2.0, 2.0]),
            sc([0.2, 1.5, 2.0, 2.0]),
        ];
        let pc = PlantCoefficients::from_scalars(pts);
        assert_eq!(pc.reduced_len(), 2);
        // Brute force agreement on a few directions.
        for (s, u, n) in [(1.0, 2.0, 1.0), (10.0, 1.0, 1.0), (0.1, 0.0, 3.0), (5.0, 5.0, 0.0)] {
            let brute = pts
                .iter()
                .map(|p| -p.stable_rate() * s + p.unstable_rate() * u + p.switch_cost() * n)
                .fold(f64::INFINITY, f64::min);
            assert!((pc.min_xi(s, u, n) - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn non_candidate_cycle_has_no_factors() {
        let w = Cycle::from_stable_sets(4, &[[1, 2], [2, 3]]).unwrap();
        assert_eq!(find_t_factors(&w, &[sc([0.1, 1.1, 1.0, 1.0]); 4], 10), None);
    }

    #[test]
    fn finds_smallest_for_simple_alternation() {
        // Plant 1 stable at v0, plant 2 at v1; symmetric data gives uniform answer.
        let w = Cycle::from_stable_sets(2, &[[1], [2]]).unwrap();
        let s = [sc([0.5, 1.2, 1.5, 1.5]); 2];
        let t = find_t_factors(&w, &s, 20).unwrap();
        let r = super::super::check_t_contractive(&w, &t, &s).unwrap();
        assert!(r.contractive);
        let brute = (1..=20u64)
            .flat_map(|a| (1..=20u64).map(move |b| vec![a, b]))
            .find(|v| super::super::check_t_contractive(&w, &TFactors::new(v.clone()).unwrap(), &s).unwrap().contractive)
            .unwrap();
        assert_eq!(t.as_slice(), &brute[..]);
    }
}
