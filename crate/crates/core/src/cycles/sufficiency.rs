//! Constructive sufficient conditions for a T-contractive cycle with uniform
//! dwell `T̃`: a rotation through single-plant allocations when `M = 1`, and a
//! two-vertex cycle when `M ≥ N/2`.

use super::{check_t_contractive, Cycle, CycleError, TFactors};
use crate::certificates::CertificateScalars;
use crate::graph::VertexLabel;
use crate::scalar::Scalar;

/// Per-plant condition values (positive means satisfied).
#[derive(Debug, Clone, PartialEq)]
pub struct SufficiencyReport<T> {
    pub values: Vec<T>,
    pub passed: bool,
}

impl<T: Scalar> SufficiencyReport<T> {
    fn from_values(values: Vec<T>) -> Self {
        let passed = values.iter().all(|&v| v > T::zero());
        Self { values, passed }
    }

    pub fn failing_plants(&self) -> Vec<usize> {
        self.values.iter().enumerate().filter(|(_, &v)| !(v > T::zero())).map(|(i, _)| i + 1).collect()
    }
}

fn check_len<T>(scalars: &[CertificateScalars<T>], n: usize) -> Result<(), CycleError> {
    if scalars.len() != n || n < 2 {
        return Err(CycleError::Precondition(format!("need scalars for N = {n} ≥ 2 plants, got {}", scalars.len())));
    }
    Ok(())
}

/// `|ln λ_is| − (N−1)|ln λ_iu|` per plant.
pub fn check_prop3<T: Scalar>(scalars: &[CertificateScalars<T>], n: usize) -> Result<SufficiencyReport<T>, CycleError> {
    check_len(scalars, n)?;
    let k = T::of((n - 1) as f64);
    Ok(SufficiencyReport::from_values(
        scalars.iter().map(|s| s.stable_rate() - k * s.unstable_rate()).collect(),
    ))
}

/// `|ln λ_is| − |ln λ_iu|` per plant, after checking `M ≥ N/2`.
pub fn check_prop4<T: Scalar>(scalars: &[CertificateScalars<T>], n: usize, m: usize) -> Result<SufficiencyReport<T>, CycleError> {
    check_len(scalars, n)?;
    if m == 0 || m >= n || 2 * m < n {
        return Err(CycleError::Precondition(format!("two-vertex construction needs N/2 ≤ M < N, got N = {n}, M = {m}")));
    }
    Ok(SufficiencyReport::from_values(
        scalars.iter().map(|s| s.stable_rate() - s.unstable_rate()).collect(),
    ))
}

/// Smallest uniform dwell with `net·T + cost < 0` for every plant, where
/// `net < 0`, then raised until the cycle verifies.
fn smallest_uniform<T: Scalar>(
    cycle: &Cycle,
    scalars: &[CertificateScalars<T>],
    terms: impl Iterator<Item = (T, T)>,
) -> Result<TFactors, CycleError> {
    let mut t = 1u64;
    for (net, cost) in terms {
        if cost > T::zero() {
            let bound = (cost / -net).floor().to_f64_lossy() as u64 + 1;
            t = t.max(bound);
        }
    }
    // Guard the strict margin used by the verifier; at most a step or two.
    for _ in 0..64 {
        let tf = TFactors::uniform(cycle.len(), t)?;
        if check_t_contractive(cycle, &tf, scalars)?.contractive {
            return Ok(tf);
        }
        t += 1;
    }
    Err(CycleError::Precondition("uniform dwell bound did not verify".into()))
}

/// The rotation `({1}, {2}, …, {N})` of single-plant allocations.
pub fn rotation_cycle(n: usize) -> Result<Cycle, CycleError> {
    Cycle::new((1..=n).map(|i| VertexLabel::new(n, [i])).collect::<Result<Vec<_>, _>>()?)
}

/// Two-vertex cycle `(v0, v1)`: `v1` holds every plant outside `v0`, topped
/// up to `M` plants with the highest-index members of `v0`. Needs `M ≥ N/2`.
pub fn pair_cycle(n: usize, m: usize, v0_stable_set: &[usize]) -> Result<Cycle, CycleError> {
    if 2 * m < n {
        return Err(CycleError::Precondition(format!("two-vertex cycle needs M ≥ N/2, got N = {n}, M = {m}")));
    }
    let v0 = VertexLabel::new(n, v0_stable_set.iter().copied())?;
    if v0.capacity() != m {
        return Err(CycleError::Precondition(format!("v0 = {v0} must hold exactly M = {m} plants")));
    }
    let mut v1: Vec<usize> = (1..=n).filter(|&i| !v0.contains(i)).collect();
    let mut fill = v0.stable_set().iter().rev();
    while v1.len() < m {
        v1.push(*fill.next().expect("|v0| = M ≥ M − |complement|"));
    }
    let v1 = VertexLabel::new(n, v1)?;
    Cycle::new(vec![v0, v1])
}

/// Rotation cycle `({1}, {2}, …, {N})` with the smallest uniform `T̃` such that
/// `(−|ln λ_is| + (N−1)|ln λ_iu|) T̃ + ln μ_su + ln μ_us < 0` for every plant.
pub fn construct_prop3_cycle<T: Scalar>(scalars: &[CertificateScalars<T>], n: usize) -> Result<(Cycle, TFactors), CycleError> {
    let report = check_prop3(scalars, n)?;
    if !report.passed {
        return Err(CycleError::ConditionFails { plants: report.failing_plants() });
    }
    let cycle = rotation_cycle(n)?;
    let t = smallest_uniform(&cycle, scalars, report.values.iter().zip(scalars).map(|(&v, s)| (-v, s.switch_cost())))?;
    Ok((cycle, t))
}

/// Two-vertex cycle `(v0, v1)` where `v1` holds every plant outside `v0`,
/// topped up to `M` plants with the highest-index members of `v0`, and the
/// smallest uniform `T̃` with `(−|ln λ_is| + |ln λ_iu|) T̃ + ln μ_su + ln μ_us < 0`
/// for each plant that switches.
pub fn construct_prop4_cycle<T: Scalar>(
    scalars: &[CertificateScalars<T>],
    n: usize,
    m: usize,
    v0_stable_set: &[usize],
) -> Result<(Cycle, TFactors), CycleError> {
    let report = check_prop4(scalars, n, m)?;
    if !report.passed {
        return Err(CycleError::ConditionFails { plants: report.failing_plants() });
    }
    let cycle = pair_cycle(n, m, v0_stable_set)?;
    let (v0, v1) = (&cycle.vertices()[0], &cycle.vertices()[1]);
    let switching = (1..=n).filter(|&i| v0.contains(i) != v1.contains(i));
    let terms = switching.map(|i| (-report.values[i - 1], scalars[i - 1].switch_cost()));
    let t = smallest_uniform(&cycle, scalars, terms)?;
    Ok((cycle, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_rotation() {
        let s = vec![CertificateScalars::<f64>::from_f64(1, [0.5, 1.0, 1.0, 1.0]).unwrap(); 4];
        let (w, t) = construct_prop3_cycle(&s, 4).unwrap();
        assert_eq!(w.len(), 4);
        assert_eq!(t.as_slice(), &[1, 1, 1, 1]);
    }

    #[test]
    fn equal_rates_fail_rotation() {
        let s = vec![CertificateScalars::<f64>::from_f64(1, [0.5, 2.0, 1.0, 1.0]).unwrap(); 3];
        let r = check_prop3(&s, 3).unwrap();
        assert!(!r.passed);
        assert!((r.values[0] + 2f64.ln()).abs() < 1e-15);
        assert!(matches!(construct_prop3_cycle(&s, 3), Err(CycleError::ConditionFails { .. })));
    }

    #[test]
    fn two_vertex_without_filler() {
        let s = vec![CertificateScalars::<f64>::from_f64(1, [0.2, 1.5, 2.0, 2.0]).unwrap(); 4];
        let (w, t) = construct_prop4_cycle(&s, 4, 2, &[1, 2]).unwrap();
        assert_eq!(w.vertices()[1].stable_set(), &[3, 4]);
        let r = check_t_contractive(&w, &t, &s).unwrap();
        assert!(r.contractive);
        let smaller = TFactors::uniform(2, t.as_slice()[0] - 1);
        if let Ok(smaller) = smaller {
            assert!(!check_t_contractive(&w, &smaller, &s).unwrap().contractive);
        }
    }

    #[test]
    fn two_vertex_names_failing_plant() {
        let mut s = vec![CertificateScalars::<f64>::from_f64(1, [0.2, 1.5, 2.0, 2.0]).unwrap(); 3];
        s[2] = CertificateScalars::from_f64(3, [0.9, 1.5, 1.0, 1.0]).unwrap();
        assert_eq!(
            construct_prop4_cycle(&s, 3, 2, &[1, 2]).unwrap_err(),
            CycleError::ConditionFails { plants: vec![3] }
        );
        assert!(check_prop4(&s, 3, 1).is_err());
    }
}
