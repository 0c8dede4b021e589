//! End-to-end certificate and dwell-time design for a fixed cycle.
//!
//! Every plant's grid of certificate candidates is computed first. Because
//! `Ξ_i` depends only on plant `i`'s certificate once the dwell times are
//! fixed, the search runs over T-factors (smallest first, see
//! [`crate::cycles::find_t_factors_with`]) asking whether *some* candidate of
//! each plant works; each plant then keeps the first candidate in grid order
//! (ascending `λ_s`, then ascending `λ_u`) that is contractive for those
//! T-factors.

use thiserror::Error;

use crate::certificates::{design_certificates, CertificateError, DesignGrid, ModeCertificate, PlantCertificateSpace};
use crate::cycles::PlantCoefficients;
use crate::cycles::{
    check_t_contractive, find_t_factors_with, is_candidate_contractive, transition_counts, ContractivityReport, Cycle,
    CycleError, TFactors, CONTRACTIVITY_MARGIN, DEFAULT_T_MAX,
};
use crate::matops::LinalgError;
use crate::plants::NcsConfig;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("cycle has N = {cycle_n}, M = {cycle_m} but the configuration has N = {n}, M = {m}")]
    Mismatch { cycle_n: usize, cycle_m: usize, n: usize, m: usize },

    #[error("cycle {0} is not candidate contractive: some plant is never granted the channel")]
    NotCandidateContractive(String),

    #[error("no feasible certificate on the grid for plants {plants:?}")]
    NoFeasibleGridPoint { plants: Vec<usize> },

    #[error(
        "certificates exist, but no T-factors up to T_max = {t_max} make the cycle T-contractive; \
         the search does not conclude about their non-existence"
    )]
    NoTFactors { t_max: u64 },

    #[error(
        "the grid certificates need a combined channel share of {required:.3} but only M = {capacity} \
         slots exist; no cycle and no dwell times can make every plant contract"
    )]
    ChannelShareExceeded { required: f64, capacity: usize },

    #[error("designed cycle failed verification for plants {plants:?}")]
    VerificationFailed { plants: Vec<usize> },

    #[error(transparent)]
    Certificate(#[from] CertificateError),

    #[error(transparent)]
    Cycle(#[from] CycleError),

    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignOptions {
    pub grid: DesignGrid,
    pub t_max: u64,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self { grid: DesignGrid::default(), t_max: DEFAULT_T_MAX }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult<T> {
    pub cycle: Cycle,
    pub t_factors: TFactors,
    /// One certificate per plant, in plant order.
    pub certificates: Vec<ModeCertificate<T>>,
    pub contractivity: ContractivityReport<T>,
}

impl<T: Scalar> DesignResult<T> {
    pub fn scalars(&self) -> Vec<crate::certificates::CertificateScalars<T>> {
        self.certificates.iter().map(|c| c.scalars()).collect()
    }
}

/// Lower bound on `Σ_i f_i`, where `f_i` is the fraction of each period plant
/// `i` must hold the channel. A negative `Ξ_i` needs
/// `|ln λ_s| S_i > |ln λ_u| U_i` (switch costs are nonnegative), i.e.
/// `f_i > |ln λ_u| / (|ln λ_s| + |ln λ_u|)` for the plant's best candidate.
/// Exactly `M` plants hold the channel at every step, so `Σ_i f_i = M`; a
/// bound of at least `M` rules out every cycle and every choice of T-factors.
pub fn channel_share_bound<T: Scalar>(spaces: &[PlantCertificateSpace<T>]) -> T {
    spaces
        .iter()
        .map(|s| {
            s.candidates()
                .map(|c| {
                    let (a_s, a_u) = (c.scalars.stable_rate(), c.scalars.unstable_rate());
                    a_u / (a_s + a_u)
                })
                .fold(T::infinity(), |m, f| m.min(f))
        })
        .sum()
}

pub fn design<T: Scalar>(cfg: &NcsConfig<T>, cycle: &Cycle, opts: &DesignOptions) -> Result<DesignResult<T>, DesignError> {
    let (n, m) = (cfg.num_plants(), cfg.capacity());
    if cycle.num_plants() != n || cycle.capacity() != m {
        return Err(DesignError::Mismatch { cycle_n: cycle.num_plants(), cycle_m: cycle.capacity(), n, m });
    }
    if !is_candidate_contractive(cycle, n) {
        return Err(DesignError::NotCandidateContractive(cycle.to_string()));
    }
    let spaces = design_certificates(cfg, &opts.grid)?;
    if !spaces.empty_plants.is_empty() {
        return Err(DesignError::NoFeasibleGridPoint { plants: spaces.empty_plants });
    }
    let required = channel_share_bound(&spaces.spaces);
    if required >= T::of(m as f64 * (1.0 + 1e-9)) {
        return Err(DesignError::ChannelShareExceeded { required: required.to_f64_lossy(), capacity: m });
    }
    let coeffs: Vec<PlantCoefficients<T>> = spaces
        .spaces
        .iter()
        .map(|s| PlantCoefficients::from_scalars(s.candidates().map(|c| c.scalars)))
        .collect();
    let t = find_t_factors_with(cycle, &coeffs, opts.t_max).ok_or(DesignError::NoTFactors { t_max: opts.t_max })?;

    let threshold = -T::of(CONTRACTIVITY_MARGIN);
    let mut certificates = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (k, space) in spaces.spaces.iter().enumerate() {
        let i = k + 1;
        let (mut ds, mut du) = (0u64, 0u64);
        for (v, &tj) in cycle.vertices().iter().zip(t.as_slice()) {
            if v.contains(i) {
                ds += tj;
            } else {
                du += tj;
            }
        }
        let trips = T::of(transition_counts(cycle, i).su as f64);
        let (ds, du) = (T::of(ds as f64), T::of(du as f64));
        let chosen = space.candidates().find(|c| {
            let s = &c.scalars;
            -s.stable_rate() * ds + s.unstable_rate() * du + s.switch_cost() * trips < threshold
        });
        match chosen {
            Some(c) => certificates.push(space.certificate(c.stable_idx, c.unstable_idx)?),
            None => missing.push(i),
        }
    }
    if !missing.is_empty() {
        return Err(DesignError::VerificationFailed { plants: missing });
    }
    let scalars: Vec<_> = certificates.iter().map(|c| c.scalars()).collect();
    let contractivity = check_t_contractive(cycle, &t, &scalars)?;
    if !contractivity.contractive {
        return Err(DesignError::VerificationFailed { plants: contractivity.failing_plants() });
    }
    Ok(DesignResult { cycle: cycle.clone(), t_factors: t, certificates, contractivity })
}
