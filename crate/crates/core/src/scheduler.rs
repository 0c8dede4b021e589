//! Scheduling policies: which `M` plants hold the channel at each time step.
//!
//! A periodic policy traverses a cycle, holding vertex `v_j`'s stable set for
//! `T_j` steps. A concatenated policy plays an explicit prefix of whole
//! periods of other policies and then repeats a tail pattern forever (or
//! stops, when the tail is empty).

use std::fmt::Write as _;

use thiserror::Error;

use crate::cycles::{Cycle, TFactors};
use crate::graph::{parse_stable_set, GraphError, Mode, VertexLabel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("expected {expected} dwell times, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("policy needs at least one slot with positive dwell")]
    Empty,

    #[error("all slots must share N = {n} and M = {m}")]
    Inconsistent { n: usize, m: usize },

    #[error("time {t} lies beyond the end ({end}) of a finite schedule")]
    BeyondSchedule { t: u64, end: u64 },

    #[error("plant {plant} out of range 1..={n}")]
    PlantOutOfRange { plant: usize, n: usize },

    #[error("policy index {index} out of range ({count} policies)")]
    PolicyOutOfRange { index: usize, count: usize },

    #[error("policy text line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub stable_set: VertexLabel,
    pub dwell: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    Periodic,
    ConcatenatedStatic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedulingPolicy {
    kind: PolicyKind,
    n: usize,
    m: usize,
    prefix: Vec<Slot>,
    tail: Vec<Slot>,
    /// Cumulative end times of the prefix slots.
    prefix_ends: Vec<u64>,
    /// Cumulative end times of the tail slots, relative to the tail start.
    tail_ends: Vec<u64>,
}

fn cumulative(slots: &[Slot]) -> Vec<u64> {
    slots
        .iter()
        .scan(0u64, |acc, s| {
            *acc += s.dwell;
            Some(*acc)
        })
        .collect()
}

/// Index of the slot covering offset `t` given cumulative end times.
fn locate(ends: &[u64], t: u64) -> usize {
    ends.partition_point(|&e| e <= t)
}

impl SchedulingPolicy {
    fn build(kind: PolicyKind, prefix: Vec<Slot>, tail: Vec<Slot>) -> Result<Self, ScheduleError> {
        let first = prefix.first().or(tail.first()).ok_or(ScheduleError::Empty)?;
        let (n, m) = (first.stable_set.num_plants(), first.stable_set.capacity());
        for s in prefix.iter().chain(&tail) {
            if s.stable_set.num_plants() != n || s.stable_set.capacity() != m {
                return Err(ScheduleError::Inconsistent { n, m });
            }
            if s.dwell == 0 {
                return Err(ScheduleError::Empty);
            }
        }
        Ok(Self { kind, n, m, prefix_ends: cumulative(&prefix), tail_ends: cumulative(&tail), prefix, tail })
    }

    /// Periodic policy from explicit slots.
    pub fn periodic(slots: Vec<Slot>) -> Result<Self, ScheduleError> {
        Self::build(PolicyKind::Periodic, Vec::new(), slots)
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn num_plants(&self) -> usize {
        self.n
    }

    pub fn capacity(&self) -> usize {
        self.m
    }

    /// Slots played once before the repeating part (empty for periodic policies).
    pub fn prefix(&self) -> &[Slot] {
        &self.prefix
    }

    /// Repeating slots (for periodic policies, one period).
    pub fn tail(&self) -> &[Slot] {
        &self.tail
    }

    pub fn prefix_len(&self) -> u64 {
        self.prefix_ends.last().copied().unwrap_or(0)
    }

    /// Length of the repeating part, `T_W` for periodic policies; zero for
    /// finite schedules.
    pub fn period(&self) -> u64 {
        self.tail_ends.last().copied().unwrap_or(0)
    }

    pub fn is_finite(&self) -> bool {
        self.tail.is_empty()
    }

    /// Slot active at time `t` (index into prefix or tail, and the slot).
    fn slot_at(&self, t: u64) -> Result<&Slot, ScheduleError> {
        let pl = self.prefix_len();
        if t < pl {
            return Ok(&self.prefix[locate(&self.prefix_ends, t)]);
        }
        if self.tail.is_empty() {
            return Err(ScheduleError::BeyondSchedule { t, end: pl });
        }
        let off = (t - pl) % self.period();
        Ok(&self.tail[locate(&self.tail_ends, off)])
    }

    /// Stable set `γ(t)`.
    pub fn gamma_at(&self, t: u64) -> Result<&VertexLabel, ScheduleError> {
        Ok(&self.slot_at(t)?.stable_set)
    }

    /// Mode `σ_i(t)` of plant `i`.
    pub fn sigma_at(&self, plant: usize, t: u64) -> Result<Mode, ScheduleError> {
        if plant == 0 || plant > self.n {
            return Err(ScheduleError::PlantOutOfRange { plant, n: self.n });
        }
        Ok(self.gamma_at(t)?.mode(plant))
    }

    /// Steps per period in which plant `i` holds the channel.
    pub fn stable_dwell_per_period(&self, plant: usize) -> u64 {
        self.tail.iter().filter(|s| s.stable_set.contains(plant)).map(|s| s.dwell).sum()
    }

    /// Text form: a header, then one `t_start t_end {i,j,…}` line per slot.
    /// Prefix slots come first; the repeating part starts at `tail_start`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let kind = match self.kind {
            PolicyKind::Periodic => "periodic",
            PolicyKind::ConcatenatedStatic => "concatenated",
        };
        let _ = writeln!(out, "policy {kind}");
        let _ = writeln!(out, "plants {}", self.n);
        let _ = writeln!(out, "capacity {}", self.m);
        if self.kind == PolicyKind::ConcatenatedStatic {
            let _ = writeln!(out, "tail_start {}", self.prefix_len());
        }
        let _ = writeln!(out, "period {}", self.period());
        let mut t = 0;
        for s in self.prefix.iter().chain(&self.tail) {
            let _ = writeln!(out, "{} {} {}", t, t + s.dwell, s.stable_set);
            t += s.dwell;
        }
        out
    }

    /// Parses the output of [`Self::to_text`]. Slots must be contiguous from 0.
    pub fn from_text(text: &str) -> Result<Self, ScheduleError> {
        let err = |line: usize, message: String| ScheduleError::Parse { line, message };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut header = |key: &str| -> Result<String, ScheduleError> {
            let (no, l) = lines.next().ok_or_else(|| err(0, format!("missing `{key}` header")))?;
            let rest = l.trim().strip_prefix(key).filter(|r| r.starts_with(' '));
            rest.map(|r| r.trim().to_string()).ok_or_else(|| err(no + 1, format!("expected `{key} …`")))
        };
        let num = |s: String, line: &str| s.parse::<u64>().map_err(|_| err(0, format!("bad number in `{line}`: {s}")));
        let kind = match header("policy")?.as_str() {
            "periodic" => PolicyKind::Periodic,
            "concatenated" => PolicyKind::ConcatenatedStatic,
            other => return Err(err(1, format!("unknown policy kind {other:?}"))),
        };
        let n = num(header("plants")?, "plants")? as usize;
        let m = num(header("capacity")?, "capacity")? as usize;
        let tail_start = match kind {
            PolicyKind::ConcatenatedStatic => num(header("tail_start")?, "tail_start")?,
            PolicyKind::Periodic => 0,
        };
        let period = num(header("period")?, "period")?;
        let mut prefix = Vec::new();
        let mut tail = Vec::new();
        let mut t = 0u64;
        for (no, l) in lines {
            let mut parts = l.split_whitespace();
            let (Some(a), Some(b), Some(set), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
                return Err(err(no + 1, format!("expected `t_start t_end {{set}}`, got {l:?}")));
            };
            let a: u64 = a.parse().map_err(|_| err(no + 1, format!("bad start {a:?}")))?;
            let b: u64 = b.parse().map_err(|_| err(no + 1, format!("bad end {b:?}")))?;
            if a != t || b <= a {
                return Err(err(no + 1, format!("slot [{a}, {b}) does not continue from {t}")));
            }
            let label = parse_stable_set(n, set).map_err(|e| err(no + 1, e.to_string()))?;
            if label.capacity() != m {
                return Err(err(no + 1, format!("slot {label} does not hold exactly {m} plants")));
            }
            let slot = Slot { stable_set: label, dwell: b - a };
            if a < tail_start {
                if b > tail_start {
                    return Err(err(no + 1, "slot straddles tail_start".into()));
                }
                prefix.push(slot);
            } else {
                tail.push(slot);
            }
            t = b;
        }
        if t != tail_start + period {
            return Err(err(0, format!("slots end at {t}, header implies {}", tail_start + period)));
        }
        Self::build(kind, prefix, tail)
    }
}

/// Periodic policy holding each cycle vertex's stable set for its T-factor.
pub fn build_policy(cycle: &Cycle, t: &TFactors) -> Result<SchedulingPolicy, ScheduleError> {
    if t.len() != cycle.len() {
        return Err(ScheduleError::LengthMismatch { expected: cycle.len(), found: t.len() });
    }
    let slots = cycle
        .vertices()
        .iter()
        .zip(t.as_slice())
        .map(|(v, &dwell)| Slot { stable_set: v.clone(), dwell })
        .collect();
    SchedulingPolicy::periodic(slots)
}

/// Cycles through `groups`, each held for `dwell` steps. Groups may repeat.
pub fn round_robin(groups: &[VertexLabel], dwell: u64) -> Result<SchedulingPolicy, ScheduleError> {
    if dwell == 0 {
        return Err(ScheduleError::Empty);
    }
    SchedulingPolicy::periodic(groups.iter().map(|g| Slot { stable_set: g.clone(), dwell }).collect())
}

/// Plays one period of `policies[p]` for each `p` in `prefix`, then repeats
/// one period of each policy in `tail` forever. An empty `tail` gives a
/// finite schedule. All policies must be periodic over the same `N` and `M`.
pub fn concatenate(policies: &[SchedulingPolicy], prefix: &[usize], tail: &[usize]) -> Result<SchedulingPolicy, ScheduleError> {
    if prefix.is_empty() && tail.is_empty() {
        return Err(ScheduleError::Empty);
    }
    let gather = |pattern: &[usize]| -> Result<Vec<Slot>, ScheduleError> {
        let mut slots = Vec::new();
        for &p in pattern {
            let pol = policies.get(p).ok_or(ScheduleError::PolicyOutOfRange { index: p, count: policies.len() })?;
            slots.extend(pol.prefix.iter().cloned());
            slots.extend(pol.tail.iter().cloned());
        }
        Ok(slots)
    };
    SchedulingPolicy::build(PolicyKind::ConcatenatedStatic, gather(prefix)?, gather(tail)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label(n: usize, s: &[usize]) -> VertexLabel {
        VertexLabel::new(n, s.iter().copied()).unwrap()
    }

    fn bench_policy() -> SchedulingPolicy {
        let w = Cycle::from_stable_sets(5, &[[2, 3], [1, 5], [4, 5]]).unwrap();
        build_policy(&w, &TFactors::new(vec![4, 3, 5]).unwrap()).unwrap()
    }

    #[test]
    fn lookup_by_cumulative_dwell() {
        let p = bench_policy();
        assert_eq!(p.period(), 12);
        for (t, s) in [(0, "{2,3}"), (3, "{2,3}"), (4, "{1,5}"), (7, "{4,5}"), (11, "{4,5}"), (12, "{2,3}"), (1204, "{1,5}")] {
            assert_eq!(p.gamma_at(t).unwrap().to_string(), s, "t = {t}");
        }
        assert_eq!(p.sigma_at(4, 6).unwrap(), Mode::Unstable);
        assert_eq!(p.sigma_at(4, 7).unwrap(), Mode::Stable);
        assert!(p.sigma_at(6, 0).is_err());
        assert_eq!(p.stable_dwell_per_period(5), 8);
    }

    #[test]
    fn round_robin_periods() {
        let g = [label(5, &[1, 2]), label(5, &[2, 3]), label(5, &[4, 5])];
        assert_eq!(round_robin(&g, 1).unwrap().period(), 3);
        assert_eq!(round_robin(&g, 2).unwrap().period(), 6);
        let single = round_robin(&g[..1], 1).unwrap();
        assert!((0..10).all(|t| single.gamma_at(t).unwrap() == &g[0]));
    }

    #[test]
    fn concatenation() {
        let a = bench_policy();
        let b = round_robin(&[label(5, &[1, 2]), label(5, &[3, 4])], 2).unwrap();
        let same = concatenate(&[a.clone()], &[], &[0]).unwrap();
        assert!((0..40).all(|t| same.gamma_at(t).unwrap() == a.gamma_at(t).unwrap()));
        let ab = concatenate(&[a.clone(), b.clone()], &[], &[0, 1]).unwrap();
        assert_eq!(ab.period(), a.period() + b.period());
        let finite = concatenate(&[a.clone(), b], &[0, 1, 0], &[]).unwrap();
        assert_eq!(finite.prefix_len(), 28);
        assert!(matches!(finite.gamma_at(28), Err(ScheduleError::BeyondSchedule { .. })));
        assert!(concatenate(&[a], &[], &[]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let p = bench_policy();
        let text = p.to_text();
        assert!(text.contains("period 12\n0 4 {2,3}\n4 7 {1,5}\n7 12 {4,5}\n"));
        assert_eq!(SchedulingPolicy::from_text(&text).unwrap(), p);
        let c = concatenate(&[p.clone(), p], &[0], &[1, 0]).unwrap();
        assert_eq!(SchedulingPolicy::from_text(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn malformed_text_rejected() {
        let text = bench_policy().to_text();
        let truncated: String = text.lines().take(6).map(|l| format!("{l}\n")).collect();
        assert!(SchedulingPolicy::from_text(&truncated).is_err());
        assert!(SchedulingPolicy::from_text(&text.replace("4 7", "5 7")).is_err());
        assert!(SchedulingPolicy::from_text("").is_err());
    }
}
