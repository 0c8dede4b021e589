//! Simulation of all plants under a scheduling policy, plus the checks that
//! tie a trajectory back to its certificates.
//!
//! Along a schedule, plant `i`'s Lyapunov value obeys
//! `V_{σ(t)}(x(t)) ≤ ψ_i(t) V_{σ(0)}(x(0))` with
//! `ln ψ_i(t) = −|ln λ_s| D_s + |ln λ_u| D_u + ln μ_su N_su + ln μ_us N_us`,
//! where `D_p` counts steps `k ∈ [0, t−1]` spent in mode `p` and `N_pq` counts
//! switches `p → q` at times `k ∈ [1, t]`. With `κ I ⪯ P ⪯ I` for both modes
//! this gives `‖x(t)‖ ≤ c √ψ_i(t) ‖x(0)‖` with `c = sqrt(max λ_max(P) / min λ_min(P))`.

use thiserror::Error;

use crate::certificates::{CertificateScalars, ModeCertificate};
use crate::graph::Mode;
use crate::matops::{self, LinalgError, Matrix};
use crate::plants::NcsConfig;
use crate::scalar::Scalar;
use crate::scheduler::{ScheduleError, SchedulingPolicy};

/// States whose norm exceeds this are flagged as diverged and frozen.
pub const DIVERGENCE_BOUND: f64 = 1e12;

/// Default relative tolerance for per-step certificate checks.
pub const CERTIFICATE_TOL: f64 = 1e-9;

/// Default relative tolerance for the accumulated envelope checks.
pub const ENVELOPE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("policy has N = {policy_n}, M = {policy_m}; configuration has N = {n}, M = {m}")]
    PolicyMismatch { policy_n: usize, policy_m: usize, n: usize, m: usize },

    #[error("expected {expected} initial states, got {found}")]
    InitialCount { expected: usize, found: usize },

    #[error("initial state of plant {plant} has length {found}, expected {expected}")]
    StateDimension { plant: usize, expected: usize, found: usize },

    #[error("expected {expected} certificates, got {found}")]
    CertificateCount { expected: usize, found: usize },

    #[error("trace does not carry full states")]
    NoStates,

    #[error("classification needs horizon ≥ 2·window (horizon {horizon}, window {window})")]
    HorizonTooShort { horizon: usize, window: usize },

    #[error(transparent)]
    Schedule(#[from] ScheduleError),

    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn norm<T: Scalar>(x: &[T]) -> T {
    x.iter().map(|&v| v * v).sum::<T>().sqrt()
}

fn check_policy<T: Scalar>(cfg: &NcsConfig<T>, policy: &SchedulingPolicy) -> Result<(), SimError> {
    if policy.num_plants() != cfg.num_plants() || policy.capacity() != cfg.capacity() {
        return Err(SimError::PolicyMismatch {
            policy_n: policy.num_plants(),
            policy_m: policy.capacity(),
            n: cfg.num_plants(),
            m: cfg.capacity(),
        });
    }
    Ok(())
}

/// Closed- and open-loop matrices of every plant, `(A_s, A_u)`.
fn modes<T: Scalar>(cfg: &NcsConfig<T>) -> Vec<(Matrix<T>, Matrix<T>)> {
    cfg.plants().iter().map(|p| p.mode_matrices()).collect()
}

/// Advances every plant one step from time `t`: closed loop if the plant
/// holds the channel at `t`, open loop otherwise.
pub fn step<T: Scalar>(
    cfg: &NcsConfig<T>,
    policy: &SchedulingPolicy,
    t: u64,
    states: &[Vec<T>],
) -> Result<Vec<Vec<T>>, SimError> {
    check_policy(cfg, policy)?;
    let gamma = policy.gamma_at(t)?;
    cfg.plants()
        .iter()
        .zip(states)
        .map(|(p, x)| {
            let a = if gamma.contains(p.index()) { p.stable_mode() } else { p.unstable_mode().clone() };
            Ok(a.mul_vec(x)?)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace<T> {
    pub horizon: usize,
    /// `norms[i][t] = ‖x_i(t)‖`, `t = 0..=horizon`.
    pub norms: Vec<Vec<T>>,
    /// `states[i][t] = x_i(t)` when recorded.
    pub states: Option<Vec<Vec<Vec<T>>>>,
    /// First time each plant's norm exceeded [`DIVERGENCE_BOUND`].
    pub diverged_at: Vec<Option<usize>>,
    /// `modes[i][t] = σ_i(t)` for `t = 0..horizon` (the mode applied at step `t`).
    pub modes: Vec<Vec<Mode>>,
}

/// Simulates all plants for `horizon` steps from `x0`.
pub fn simulate<T: Scalar>(
    cfg: &NcsConfig<T>,
    policy: &SchedulingPolicy,
    x0: &[Vec<T>],
    horizon: usize,
    record_states: bool,
) -> Result<Trace<T>, SimError> {
    check_policy(cfg, policy)?;
    let n = cfg.num_plants();
    let d = cfg.state_dim();
    if x0.len() != n {
        return Err(SimError::InitialCount { expected: n, found: x0.len() });
    }
    for (i, x) in x0.iter().enumerate() {
        if x.len() != d {
            return Err(SimError::StateDimension { plant: i + 1, expected: d, found: x.len() });
        }
    }
    let mats = modes(cfg);
    let bound = T::of(DIVERGENCE_BOUND);
    let mut x: Vec<Vec<T>> = x0.to_vec();
    let mut norms: Vec<Vec<T>> = x.iter().map(|v| vec![norm(v)]).collect();
    let mut states: Option<Vec<Vec<Vec<T>>>> = record_states.then(|| x.iter().map(|v| vec![v.clone()]).collect());
    let mut diverged_at: Vec<Option<usize>> = norms.iter().map(|v| (v[0] > bound).then_some(0)).collect();
    let mut mode_log: Vec<Vec<Mode>> = vec![Vec::with_capacity(horizon); n];
    for t in 0..horizon {
        let gamma = policy.gamma_at(t as u64)?;
        for i in 0..n {
            let mode = gamma.mode(i + 1);
            mode_log[i].push(mode);
            if diverged_at[i].is_none() {
                let a = match mode {
                    Mode::Stable => &mats[i].0,
                    Mode::Unstable => &mats[i].1,
                };
                x[i] = a.mul_vec(&x[i])?;
            }
            let nx = norm(&x[i]);
            if diverged_at[i].is_none() && !(nx <= bound) {
                diverged_at[i] = Some(t + 1);
            }
            norms[i].push(nx);
            if let Some(s) = states.as_mut() {
                s[i].push(x[i].clone());
            }
        }
    }
    Ok(Trace { horizon, norms, states, diverged_at, modes: mode_log })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    /// `V_p(x(t+1)) ≤ λ_p V_p(x(t))`.
    Decay,
    /// `V_q(x(τ)) ≤ μ_pq V_p(x(τ))` at a switch `p → q`.
    Switch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub plant: usize,
    pub t: usize,
    pub kind: CheckKind,
    /// `lhs / rhs`; above `1 + tol` for a violation.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateCheck {
    pub decay_checks: usize,
    pub switch_checks: usize,
    /// Largest `lhs / rhs` seen over all checks with positive right-hand side.
    pub worst_ratio: f64,
    pub violations: Vec<Violation>,
}

impl CertificateCheck {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn check_count<T>(cfg_n: usize, certs: &[T]) -> Result<(), SimError> {
    if certs.len() != cfg_n {
        return Err(SimError::CertificateCount { expected: cfg_n, found: certs.len() });
    }
    Ok(())
}

fn mode_data<T: Scalar>(c: &ModeCertificate<T>, m: Mode) -> (&Matrix<T>, T) {
    match m {
        Mode::Stable => (&c.p_s, c.lambda_s),
        Mode::Unstable => (&c.p_u, c.lambda_u),
    }
}

/// Checks every per-step decrease and every switch bound along `trace`.
pub fn verify_certificates<T: Scalar>(
    certs: &[ModeCertificate<T>],
    trace: &Trace<T>,
    tol: f64,
) -> Result<CertificateCheck, SimError> {
    let states = trace.states.as_ref().ok_or(SimError::NoStates)?;
    check_count(states.len(), certs)?;
    let mut out = CertificateCheck { decay_checks: 0, switch_checks: 0, worst_ratio: 0.0, violations: Vec::new() };
    let record = |plant: usize, t: usize, kind: CheckKind, lhs: T, rhs: T, out: &mut CertificateCheck| {
        let (lhs, rhs) = (lhs.to_f64_lossy(), rhs.to_f64_lossy());
        let ratio = if rhs > 0.0 { lhs / rhs } else if lhs > 0.0 { f64::INFINITY } else { 0.0 };
        out.worst_ratio = out.worst_ratio.max(ratio);
        if lhs > rhs * (1.0 + tol) {
            out.violations.push(Violation { plant, t, kind, ratio });
        }
    };
    for (i, cert) in certs.iter().enumerate() {
        let horizon = match trace.diverged_at[i] {
            Some(t) => t.saturating_sub(1),
            None => trace.horizon,
        };
        for t in 0..horizon {
            let p = trace.modes[i][t];
            let (pm, lambda) = mode_data(cert, p);
            let v_now = pm.quadratic_form(&states[i][t])?;
            let v_next = pm.quadratic_form(&states[i][t + 1])?;
            out.decay_checks += 1;
            record(i + 1, t, CheckKind::Decay, v_next, lambda * v_now, &mut out);
            if t + 1 < trace.horizon {
                let q = trace.modes[i][t + 1];
                if q != p {
                    let (qm, _) = mode_data(cert, q);
                    let mu = match (p, q) {
                        (Mode::Stable, Mode::Unstable) => cert.mu_su,
                        _ => cert.mu_us,
                    };
                    let vq = qm.quadratic_form(&states[i][t + 1])?;
                    out.switch_checks += 1;
                    record(i + 1, t + 1, CheckKind::Switch, vq, mu * v_next, &mut out);
                }
            }
        }
    }
    Ok(out)
}

/// Running dwell and switch counts of one plant and the resulting `ln ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateTrace<T> {
    pub plant: usize,
    /// Values at `t = 0..=horizon`.
    pub d_s: Vec<u64>,
    pub d_u: Vec<u64>,
    pub n_su: Vec<u64>,
    pub n_us: Vec<u64>,
    pub ln_psi: Vec<T>,
}

fn ln_psi_value<T: Scalar>(s: &CertificateScalars<T>, ds: u64, du: u64, nsu: u64, nus: u64) -> T {
    -s.stable_rate() * T::of(ds as f64)
        + s.unstable_rate() * T::of(du as f64)
        + s.mu_su.ln() * T::of(nsu as f64)
        + s.mu_us.ln() * T::of(nus as f64)
}

/// Counts and `ln ψ_i(t)` for `t = 0..=horizon` under `policy`.
pub fn certificate_trace<T: Scalar>(
    policy: &SchedulingPolicy,
    scalars: &CertificateScalars<T>,
    plant: usize,
    horizon: usize,
) -> Result<CertificateTrace<T>, SimError> {
    let mut tr = CertificateTrace {
        plant,
        d_s: vec![0],
        d_u: vec![0],
        n_su: vec![0],
        n_us: vec![0],
        ln_psi: vec![T::zero()],
    };
    let mut prev = policy.sigma_at(plant, 0)?;
    let (mut ds, mut du, mut nsu, mut nus) = (0u64, 0u64, 0u64, 0u64);
    for t in 1..=horizon as u64 {
        match prev {
            Mode::Stable => ds += 1,
            Mode::Unstable => du += 1,
        }
        let cur = policy.sigma_at(plant, t)?;
        match (prev, cur) {
            (Mode::Stable, Mode::Unstable) => nsu += 1,
            (Mode::Unstable, Mode::Stable) => nus += 1,
            _ => {}
        }
        prev = cur;
        tr.d_s.push(ds);
        tr.d_u.push(du);
        tr.n_su.push(nsu);
        tr.n_us.push(nus);
        tr.ln_psi.push(ln_psi_value(scalars, ds, du, nsu, nus));
    }
    Ok(tr)
}

/// `ψ_i(t)`, accumulated in log space and exponentiated.
pub fn psi<T: Scalar>(policy: &SchedulingPolicy, scalars: &CertificateScalars<T>, plant: usize, t: u64) -> Result<T, SimError> {
    Ok(certificate_trace(policy, scalars, plant, t as usize)?.ln_psi[t as usize].exp())
}

/// `c = sqrt(max λ_max(P) / min λ_min(P))` over both modes of a certificate.
pub fn envelope_constant<T: Scalar>(cert: &ModeCertificate<T>) -> Result<T, LinalgError> {
    let s = matops::symmetric_spectrum(&cert.p_s)?;
    let u = matops::symmetric_spectrum(&cert.p_u)?;
    Ok((s.lambda_max.max(u.lambda_max) / s.lambda_min.min(u.lambda_min)).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantEnvelope {
    pub plant: usize,
    pub c: f64,
    /// Smallest `ln(bound) − ln(value)` over time for the Lyapunov bound;
    /// negative beyond tolerance means a violation.
    pub lyapunov_slack: f64,
    /// Same for the norm bound `c √ψ ‖x(0)‖`.
    pub norm_slack: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeReport {
    pub plants: Vec<PlantEnvelope>,
}

impl EnvelopeReport {
    pub fn passed(&self) -> bool {
        self.plants.iter().all(|p| p.violations == 0)
    }
}

/// Checks `V_{σ(t)}(x(t)) ≤ ψ(t) V_{σ(0)}(x(0))` and `‖x(t)‖ ≤ c √ψ(t) ‖x(0)‖`
/// at every recorded time, with relative tolerance `tol`.
pub fn envelope_check<T: Scalar>(
    certs: &[ModeCertificate<T>],
    policy: &SchedulingPolicy,
    trace: &Trace<T>,
    tol: f64,
) -> Result<EnvelopeReport, SimError> {
    let states = trace.states.as_ref().ok_or(SimError::NoStates)?;
    check_count(states.len(), certs)?;
    let log_tol = tol.ln_1p();
    let mut plants = Vec::with_capacity(certs.len());
    for (i, cert) in certs.iter().enumerate() {
        let ct = certificate_trace(policy, &cert.scalars(), i + 1, trace.horizon)?;
        let c = envelope_constant(cert)?.to_f64_lossy();
        let mode_at = |t: usize| -> Result<Mode, SimError> { Ok(policy.sigma_at(i + 1, t as u64)?) };
        let (p0, _) = mode_data(cert, mode_at(0)?);
        let v0 = p0.quadratic_form(&states[i][0])?.to_f64_lossy();
        let n0 = trace.norms[i][0].to_f64_lossy();
        let mut env = PlantEnvelope { plant: i + 1, c, lyapunov_slack: f64::INFINITY, norm_slack: f64::INFINITY, violations: 0 };
        let last = trace.diverged_at[i].map_or(trace.horizon, |t| t.saturating_sub(1));
        for t in 0..=last {
            let lp = ct.ln_psi[t].to_f64_lossy();
            let (pt, _) = mode_data(cert, mode_at(t)?);
            let vt = pt.quadratic_form(&states[i][t])?.to_f64_lossy();
            let nt = trace.norms[i][t].to_f64_lossy();
            // Zero values satisfy the bounds trivially.
            if vt > 0.0 {
                let slack = lp + v0.ln() - vt.ln();
                env.lyapunov_slack = env.lyapunov_slack.min(slack);
                if slack < -log_tol {
                    env.violations += 1;
                }
            }
            if nt > 0.0 {
                let slack = c.ln() + 0.5 * lp + n0.ln() - nt.ln();
                env.norm_slack = env.norm_slack.min(slack);
                if slack < -log_tol {
                    env.violations += 1;
                }
            }
        }
        plants.push(env);
    }
    Ok(EnvelopeReport { plants })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GasVerdict {
    Converging,
    Diverging,
    Inconclusive,
}

/// Compares the peak norm over the last `window` steps with the peak over
/// the first `window` steps: converging if it shrank by `decay_factor`,
/// diverging if it grew by `1/decay_factor` or the plant overflowed.
pub fn classify_gas<T: Scalar>(trace: &Trace<T>, window: usize, decay_factor: f64) -> Result<Vec<GasVerdict>, SimError> {
    if window == 0 || trace.horizon < 2 * window {
        return Err(SimError::HorizonTooShort { horizon: trace.horizon, window });
    }
    Ok(trace
        .norms
        .iter()
        .zip(&trace.diverged_at)
        .map(|(ns, div)| {
            if div.is_some() {
                return GasVerdict::Diverging;
            }
            let peak = |s: &[T]| s.iter().fold(0.0f64, |m, v| m.max(v.to_f64_lossy()));
            let first = peak(&ns[..window]);
            let last = peak(&ns[ns.len() - window..]);
            if last <= decay_factor * first {
                GasVerdict::Converging
            } else if last * decay_factor >= first {
                GasVerdict::Diverging
            } else {
                GasVerdict::Inconclusive
            }
        })
        .collect())
}

/// State-transition matrix of plant `i` over one period of the repeating
/// part of `policy`.
pub fn monodromy<T: Scalar>(cfg: &NcsConfig<T>, policy: &SchedulingPolicy, plant: usize) -> Result<Matrix<T>, SimError> {
    check_policy(cfg, policy)?;
    let p = cfg.plant(plant).ok_or(ScheduleError::PlantOutOfRange { plant, n: cfg.num_plants() })?;
    if policy.tail().is_empty() {
        return Err(ScheduleError::Empty.into());
    }
    let (a_s, a_u) = p.mode_matrices();
    let mut phi = Matrix::identity(p.state_dim());
    for slot in policy.tail() {
        let a = if slot.stable_set.contains(plant) { &a_s } else { &a_u };
        phi = a.pow(slot.dwell)?.matmul(&phi)?;
    }
    Ok(phi)
}
