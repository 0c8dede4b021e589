//! Quadratic Lyapunov-like certificates for each plant's two modes.
//!
//! A certificate for mode `p` is a pair `(P_p, λ_p)` with
//! `A_pᵀ P_p A_p ⪯ λ_p P_p`, so `V_p(ξ) = ξᵀP_pξ` contracts (or grows at most)
//! by `λ_p` per step. Switching between modes costs `μ_pq = λ_max(P_q P_p⁻¹)`.
//! For a fixed `λ` the matrix inequality is solved constructively through the
//! Lyapunov equation of `A/√λ`, which is feasible exactly when `ρ(A) < √λ`.

use thiserror::Error;

use crate::matops::{self, LinalgError, Matrix};
use crate::plants::{NcsConfig, PlantSpec, DEFAULT_SCHUR_TOL};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertificateError {
    #[error("grid step {step} must lie in (0, 1)")]
    DegenerateStep { step: f64 },

    #[error("invalid grid parameter: {0}")]
    InvalidGrid(String),

    #[error("decay rate must be positive, got {0}")]
    NonPositiveLambda(f64),

    #[error("infeasible: spectral radius {radius} is not below sqrt(lambda) = {sqrt_lambda}")]
    Infeasible { radius: f64, sqrt_lambda: f64 },

    #[error("ill-conditioned certificate: lambda_min(P) = {kappa:e} below kappa_min = {kappa_min:e}")]
    IllConditioned { kappa: f64, kappa_min: f64 },

    #[error("matrix inequality residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("estimate {0} falls outside (0, 1); inputs are inconsistent")]
    EstimateOutOfRange(f64),

    #[error("invalid certificate scalars for plant {plant}: {detail}")]
    InvalidScalars { plant: usize, detail: String },

    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Grid and tolerance parameters for the certificate search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignGrid {
    /// Step of the stable decay-rate grid `{h_s, 2h_s, …}`.
    pub h_s: f64,
    /// Step of the scaling grid `η ∈ {h_u, 2h_u, …}` for the open loop.
    pub h_u: f64,
    /// Lower bound on `λ_min(P)` after normalizing `λ_max(P) = 1`.
    pub kappa_min: f64,
    /// Tolerance on `λ_max(AᵀPA − λP)`.
    pub lmi_tol: f64,
}

impl Default for DesignGrid {
    fn default() -> Self {
        Self { h_s: 1e-2, h_u: 1e-2, kappa_min: 1e-8, lmi_tol: 1e-9 }
    }
}

impl DesignGrid {
    pub fn validate(&self) -> Result<(), CertificateError> {
        for step in [self.h_s, self.h_u] {
            if !(step > 0.0 && step < 1.0) {
                return Err(CertificateError::DegenerateStep { step });
            }
        }
        if !(self.kappa_min > 0.0 && self.kappa_min <= 1.0) {
            return Err(CertificateError::InvalidGrid(format!("kappa_min = {} must lie in (0, 1]", self.kappa_min)));
        }
        if !(self.lmi_tol >= 0.0 && self.lmi_tol.is_finite()) {
            return Err(CertificateError::InvalidGrid(format!("lmi_tol = {} must be finite and nonnegative", self.lmi_tol)));
        }
        Ok(())
    }
}

/// Largest `k` with `k·h < 1`.
fn grid_count(h: f64) -> Result<usize, CertificateError> {
    if !(h > 0.0 && h < 1.0) {
        return Err(CertificateError::DegenerateStep { step: h });
    }
    let mut k = (1.0 / h).ceil() as usize;
    while k > 0 && (k as f64) * h >= 1.0 {
        k -= 1;
    }
    while ((k + 1) as f64) * h < 1.0 {
        k += 1;
    }
    Ok(k)
}

/// `{h_s, 2h_s, …, k_s h_s}` with `k_s` the largest integer such that `k_s h_s < 1`.
pub fn lambda_grid_stable<T: Scalar>(grid: &DesignGrid) -> Result<Vec<T>, CertificateError> {
    let k = grid_count(grid.h_s)?;
    Ok((1..=k).map(|j| T::of(j as f64 * grid.h_s)).collect())
}

/// Pairs `(η, 1/η²)` for `η ∈ {h_u, 2h_u, …}` below 1 with `ηA` Schur
/// stable, sorted by ascending `1/η²`. May be empty.
pub fn lambda_grid_unstable<T: Scalar>(a_u: &Matrix<T>, grid: &DesignGrid) -> Result<Vec<(T, T)>, CertificateError> {
    let k = grid_count(grid.h_u)?;
    let rho = matops::spectral_radius(a_u)?;
    let mut out = Vec::new();
    for j in (1..=k).rev() {
        let eta = T::of(j as f64 * grid.h_u);
        if eta * rho < T::one() - T::of(DEFAULT_SCHUR_TOL) {
            out.push((eta, T::one() / (eta * eta)));
        }
    }
    Ok(out)
}

/// A solution of `AᵀPA ⪯ λP` normalized to `λ_max(P) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LmiSolution<T> {
    pub p: Matrix<T>,
    /// `λ_min(P)`.
    pub kappa: T,
}

/// Solves `AᵀPA − λP ⪯ 0` for `κI ⪯ P ⪯ I` through
/// `(A/√λ)ᵀ P (A/√λ) − P + I = 0`, rescaled so that `λ_max(P) = 1`.
pub fn solve_mode_lmi<T: Scalar>(a: &Matrix<T>, lambda: T, grid: &DesignGrid) -> Result<LmiSolution<T>, CertificateError> {
    if !(lambda > T::zero()) {
        return Err(CertificateError::NonPositiveLambda(lambda.to_f64_lossy()));
    }
    let n = a.require_square()?;
    let sqrt_lambda = lambda.sqrt();
    let scaled = a.scale(T::one() / sqrt_lambda);
    let rho = matops::spectral_radius(&scaled)?;
    if rho >= T::one() {
        return Err(CertificateError::Infeasible {
            radius: (rho * sqrt_lambda).to_f64_lossy(),
            sqrt_lambda: sqrt_lambda.to_f64_lossy(),
        });
    }
    let raw = match matops::solve_discrete_lyapunov(&scaled, &Matrix::identity(n)) {
        Ok(p) => p,
        Err(LinalgError::Singular) | Err(LinalgError::NotSchurStable { .. }) => {
            return Err(CertificateError::Infeasible {
                radius: (rho * sqrt_lambda).to_f64_lossy(),
                sqrt_lambda: sqrt_lambda.to_f64_lossy(),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let spec = matops::symmetric_spectrum(&raw)?;
    let p = raw.scale(T::one() / spec.lambda_max);
    let kappa = spec.lambda_min / spec.lambda_max;
    if kappa < T::of(grid.kappa_min) {
        return Err(CertificateError::IllConditioned {
            kappa: kappa.to_f64_lossy(),
            kappa_min: grid.kappa_min,
        });
    }
    let residual = lmi_residual(a, &p, lambda)?;
    if residual > T::of(grid.lmi_tol) {
        return Err(CertificateError::ResidualTooLarge { residual: residual.to_f64_lossy(), tol: grid.lmi_tol });
    }
    Ok(LmiSolution { p, kappa })
}

/// `λ_max(AᵀPA − λP)`; nonpositive when `(P, λ)` certifies `A`.
pub fn lmi_residual<T: Scalar>(a: &Matrix<T>, p: &Matrix<T>, lambda: T) -> Result<T, LinalgError> {
    let m = a.transpose().matmul(p)?.matmul(a)?.sub(&p.scale(lambda))?.symmetrized()?;
    Ok(matops::symmetric_spectrum(&m)?.lambda_max)
}

/// `μ_pq = λ_max(P_q P_p⁻¹)`, the smallest `μ` with `V_q ≤ μ V_p`.
pub fn compute_mu<T: Scalar>(p_p: &Matrix<T>, p_q: &Matrix<T>) -> Result<T, LinalgError> {
    matops::max_generalized_eigenvalue(p_q, p_p)
}

/// `1 − λ_min(Q)/λ_max(P)`, a decay-rate estimate for a `P` solving
/// `AᵀPA − P + Q = 0`.
pub fn estimate_lambda_s<T: Scalar>(p: &Matrix<T>, q: &Matrix<T>) -> Result<T, CertificateError> {
    let qs = matops::symmetric_spectrum(q)?;
    if !(qs.lambda_min > T::zero()) {
        return Err(LinalgError::NotPositiveDefinite.into());
    }
    let ps = matops::symmetric_spectrum(p)?;
    let est = T::one() - qs.lambda_min / ps.lambda_max;
    if !(est > T::zero() && est < T::one()) {
        return Err(CertificateError::EstimateOutOfRange(est.to_f64_lossy()));
    }
    Ok(est)
}

/// The four scalars of a plant's certificate that enter the graph weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateScalars<T> {
    pub lambda_s: T,
    pub lambda_u: T,
    pub mu_su: T,
    pub mu_us: T,
}

impl<T: Scalar> CertificateScalars<T> {
    /// Checks `0 < λ_s < 1`, `λ_u ≥ 1` and `μ ≥ 1` (up to rounding).
    pub fn new(plant: usize, lambda_s: T, lambda_u: T, mu_su: T, mu_us: T) -> Result<Self, CertificateError> {
        let s = Self { lambda_s, lambda_u, mu_su, mu_us };
        s.validate(plant)?;
        Ok(s)
    }

    pub fn from_f64(plant: usize, values: [f64; 4]) -> Result<Self, CertificateError> {
        Self::new(plant, T::of(values[0]), T::of(values[1]), T::of(values[2]), T::of(values[3]))
    }

    pub fn validate(&self, plant: usize) -> Result<(), CertificateError> {
        let bad = |detail: String| Err(CertificateError::InvalidScalars { plant, detail });
        let slack = T::of(1e-9);
        if !(self.lambda_s > T::zero() && self.lambda_s < T::one()) {
            return bad(format!("lambda_s = {} must lie in (0, 1)", self.lambda_s));
        }
        if !(self.lambda_u >= T::one() - slack) || !self.lambda_u.is_finite() {
            return bad(format!("lambda_u = {} must be at least 1", self.lambda_u));
        }
        for (name, mu) in [("mu_su", self.mu_su), ("mu_us", self.mu_us)] {
            if !(mu >= T::one() - slack) || !mu.is_finite() {
                return bad(format!("{name} = {mu} must be at least 1"));
            }
        }
        Ok(())
    }

    /// `|ln λ_s|`, the per-step decrease of `ln V` in the stable mode.
    pub fn stable_rate(&self) -> T {
        self.lambda_s.ln().abs()
    }

    /// `|ln λ_u|`, the per-step increase of `ln V` in the open loop.
    pub fn unstable_rate(&self) -> T {
        self.lambda_u.ln().abs()
    }

    /// `ln μ_su + ln μ_us`, the cost of one round trip between the modes.
    pub fn switch_cost(&self) -> T {
        self.mu_su.ln() + self.mu_us.ln()
    }
}

/// A full certificate for one plant.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCertificate<T> {
    pub plant: usize,
    pub p_s: Matrix<T>,
    pub lambda_s: T,
    pub p_u: Matrix<T>,
    pub lambda_u: T,
    pub mu_su: T,
    pub mu_us: T,
    pub kappa_s: T,
    pub kappa_u: T,
}

impl<T: Scalar> ModeCertificate<T> {
    /// Assembles a certificate from two mode solutions, computing both `μ`.
    pub fn from_solutions(
        plant: usize,
        lambda_s: T,
        stable: &LmiSolution<T>,
        lambda_u: T,
        unstable: &LmiSolution<T>,
    ) -> Result<Self, LinalgError> {
        Ok(Self {
            plant,
            mu_su: compute_mu(&stable.p, &unstable.p)?,
            mu_us: compute_mu(&unstable.p, &stable.p)?,
            p_s: stable.p.clone(),
            lambda_s,
            p_u: unstable.p.clone(),
            lambda_u,
            kappa_s: stable.kappa,
            kappa_u: unstable.kappa,
        })
    }

    pub fn scalars(&self) -> CertificateScalars<T> {
        CertificateScalars { lambda_s: self.lambda_s, lambda_u: self.lambda_u, mu_su: self.mu_su, mu_us: self.mu_us }
    }
}

/// One stable and one unstable grid point, identified by position in the
/// plant's feasible lists, with the scalars the pair induces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateCandidate<T> {
    pub stable_idx: usize,
    pub unstable_idx: usize,
    pub scalars: CertificateScalars<T>,
}

/// All feasible grid points of one plant. The mode solutions are computed up
/// front; the pairing (and its two `μ`) is produced lazily by [`Self::candidates`].
#[derive(Debug, Clone)]
pub struct PlantCertificateSpace<T> {
    plant: usize,
    stable: Vec<(T, LmiSolution<T>)>,
    unstable: Vec<(T, LmiSolution<T>)>,
}

impl<T: Scalar> PlantCertificateSpace<T> {
    pub fn new(plant: &PlantSpec<T>, grid: &DesignGrid) -> Result<Self, CertificateError> {
        grid.validate()?;
        let (a_s, a_u) = plant.mode_matrices();
        let rho_s = matops::spectral_radius(&a_s)?;
        let mut stable = Vec::new();
        for lambda in lambda_grid_stable::<T>(grid)? {
            // ρ(A) < √λ is necessary; skip hopeless points without a solve.
            if rho_s * rho_s >= lambda {
                continue;
            }
            match solve_mode_lmi(&a_s, lambda, grid) {
                Ok(sol) => stable.push((lambda, sol)),
                Err(CertificateError::Infeasible { .. })
                | Err(CertificateError::IllConditioned { .. })
                | Err(CertificateError::ResidualTooLarge { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        let mut unstable = Vec::new();
        for (_, lambda) in lambda_grid_unstable(&a_u, grid)? {
            match solve_mode_lmi(&a_u, lambda, grid) {
                Ok(sol) => unstable.push((lambda, sol)),
                Err(CertificateError::Infeasible { .. })
                | Err(CertificateError::IllConditioned { .. })
                | Err(CertificateError::ResidualTooLarge { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(Self { plant: plant.index(), stable, unstable })
    }

    pub fn plant(&self) -> usize {
        self.plant
    }

    /// Feasible stable decay rates, ascending.
    pub fn stable_lambdas(&self) -> impl Iterator<Item = T> + '_ {
        self.stable.iter().map(|(l, _)| *l)
    }

    /// Feasible open-loop growth rates, ascending.
    pub fn unstable_lambdas(&self) -> impl Iterator<Item = T> + '_ {
        self.unstable.iter().map(|(l, _)| *l)
    }

    pub fn len(&self) -> usize {
        self.stable.len() * self.unstable.len()
    }

    /// `true` when no grid point is feasible for one of the two modes.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Candidates in grid order: ascending `λ_s`, then ascending `λ_u`.
    pub fn candidates(&self) -> CandidateStream<'_, T> {
        CandidateStream { space: self, next: 0 }
    }

    /// Full certificates in grid order.
    pub fn certificates(&self) -> impl Iterator<Item = Result<ModeCertificate<T>, LinalgError>> + '_ {
        self.candidates().map(move |c| self.certificate(c.stable_idx, c.unstable_idx))
    }

    pub fn certificate(&self, stable_idx: usize, unstable_idx: usize) -> Result<ModeCertificate<T>, LinalgError> {
        let (ls, s) = &self.stable[stable_idx];
        let (lu, u) = &self.unstable[unstable_idx];
        ModeCertificate::from_solutions(self.plant, *ls, s, *lu, u)
    }
}

/// Lazy grid-order enumeration of a plant's certificate candidates.
#[derive(Debug, Clone)]
pub struct CandidateStream<'a, T> {
    space: &'a PlantCertificateSpace<T>,
    next: usize,
}

impl<T: Scalar> Iterator for CandidateStream<'_, T> {
    type Item = CertificateCandidate<T>;

    fn next(&mut self) -> Option<Self::Item> {
        let nu = self.space.unstable.len();
        while self.next < self.space.len() {
            let k = self.next;
            self.next += 1;
            let (stable_idx, unstable_idx) = (k / nu, k % nu);
            let (ls, s) = &self.space.stable[stable_idx];
            let (lu, u) = &self.space.unstable[unstable_idx];
            // μ failures would mean a non-SPD solution, which the LMI solve
            // already excludes; skip defensively rather than abort the stream.
            let (Ok(mu_su), Ok(mu_us)) = (compute_mu(&s.p, &u.p), compute_mu(&u.p, &s.p)) else {
                continue;
            };
            return Some(CertificateCandidate {
                stable_idx,
                unstable_idx,
                scalars: CertificateScalars { lambda_s: *ls, lambda_u: *lu, mu_su, mu_us },
            });
        }
        None
    }
}

/// Per-plant certificate spaces for the whole configuration, together with
/// the plants whose space is empty.
#[derive(Debug, Clone)]
pub struct CertificateDesign<T> {
    pub spaces: Vec<PlantCertificateSpace<T>>,
    pub empty_plants: Vec<usize>,
}

pub fn design_certificates<T: Scalar>(cfg: &NcsConfig<T>, grid: &DesignGrid) -> Result<CertificateDesign<T>, CertificateError> {
    let spaces = cfg
        .plants()
        .iter()
        .map(|p| PlantCertificateSpace::new(p, grid))
        .collect::<Result<Vec<_>, _>>()?;
    let empty_plants = spaces.iter().filter(|s| s.is_empty()).map(|s| s.plant()).collect();
    Ok(CertificateDesign { spaces, empty_plants })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(h_s: f64, h_u: f64) -> DesignGrid {
        DesignGrid { h_s, h_u, ..DesignGrid::default() }
    }

    #[test]
    fn stable_grid_values() {
        assert_eq!(lambda_grid_stable::<f64>(&grid(0.25, 0.1)).unwrap(), vec![0.25, 0.5, 0.75]);
        assert_eq!(lambda_grid_stable::<f64>(&grid(0.5, 0.1)).unwrap(), vec![0.5]);
        let fine = lambda_grid_stable::<f64>(&grid(1e-4, 0.1)).unwrap();
        assert_eq!(fine.len(), 9999);
        assert!((fine[9998] - 0.9999).abs() < 1e-12);
        assert!(matches!(
            lambda_grid_stable::<f64>(&grid(1.0, 0.1)),
            Err(CertificateError::DegenerateStep { .. })
        ));
    }

    #[test]
    fn unstable_grid_for_scaled_identity() {
        let a = Matrix::<f64>::identity(2).scale(2.0);
        let g = lambda_grid_unstable(&a, &grid(0.5, 0.1)).unwrap();
        let lambdas: Vec<f64> = g.iter().map(|p| p.1).collect();
        let expect = [1.0 / 0.16, 1.0 / 0.09, 1.0 / 0.04, 1.0 / 0.01];
        assert_eq!(lambdas.len(), 4);
        for (l, e) in lambdas.iter().zip(expect) {
            assert!((l - e).abs() < 1e-9);
        }
        let a12 = Matrix::<f64>::identity(2).scale(1.2);
        assert!(lambda_grid_unstable(&a12, &grid(0.5, 0.9)).unwrap().is_empty());
    }

    #[test]
    fn lmi_on_zero_and_infeasible() {
        let sol = solve_mode_lmi(&Matrix::<f64>::zeros(2, 2), 0.5, &DesignGrid::default()).unwrap();
        assert_eq!(sol.p, Matrix::identity(2));
        assert_eq!(sol.kappa, 1.0);
        let a = Matrix::from_rows(&[[0.9f64, 0.0], [0.0, 0.1]]).unwrap();
        assert!(matches!(solve_mode_lmi(&a, 0.5, &DesignGrid::default()), Err(CertificateError::Infeasible { .. })));
    }

    #[test]
    fn ill_conditioning_rejected() {
        let a = Matrix::from_rows(&[[0.999f64, 0.0], [0.0, 0.0]]).unwrap();
        let g = DesignGrid { kappa_min: 0.1, ..DesignGrid::default() };
        assert!(matches!(solve_mode_lmi(&a, 1.0, &g), Err(CertificateError::IllConditioned { .. })));
    }

    #[test]
    fn lambda_estimate() {
        let i = Matrix::<f64>::identity(2);
        assert!((estimate_lambda_s(&i.scale(2.0), &i).unwrap() - 0.5).abs() < 1e-15);
        let p = matops::solve_discrete_lyapunov(&i.scale(0.5), &i).unwrap();
        assert!((estimate_lambda_s(&p, &i).unwrap() - 0.25).abs() < 1e-14);
        let singular_q = Matrix::from_diagonal(&[1.0f64, 0.0]);
        assert!(estimate_lambda_s(&i, &singular_q).is_err());
    }

    #[test]
    fn mu_scaling() {
        let p = Matrix::from_rows(&[[1.0f64, 0.2], [0.2, 0.5]]).unwrap();
        assert!((compute_mu(&p, &p).unwrap() - 1.0).abs() < 1e-14);
        assert!((compute_mu(&p, &p.scale(3.0)).unwrap() - 3.0).abs() < 1e-13);
    }

    #[test]
    fn scalars_validation() {
        assert!(CertificateScalars::<f64>::from_f64(1, [0.5, 1.2, 1.1, 1.0]).is_ok());
        assert!(CertificateScalars::<f64>::from_f64(1, [1.5, 1.2, 1.1, 1.0]).is_err());
        assert!(CertificateScalars::<f64>::from_f64(1, [0.5, 0.9, 1.1, 1.0]).is_err());
        assert!(CertificateScalars::<f64>::from_f64(1, [0.5, 1.2, 0.5, 1.0]).is_err());
    }

    #[test]
    fn always_stable_double_starts_above_rho_squared() {
        let a = Matrix::<f64>::identity(2).scale(0.5);
        let plant = PlantSpec::new(1, a, Matrix::zeros(2, 1), Matrix::zeros(1, 2)).unwrap();
        let space = PlantCertificateSpace::new(&plant, &grid(0.01, 0.1)).unwrap();
        let first = space.candidates().next().unwrap();
        assert!((first.scalars.lambda_s - 0.26).abs() < 1e-12);
    }

    #[test]
    fn candidates_come_in_grid_order() {
        let a = Matrix::from_rows(&[[1.1f64, 0.3], [0.0, 0.4]]).unwrap();
        let b = Matrix::column(&[1.0, 0.0]);
        let k = Matrix::from_rows(&[[-0.8f64, 0.0]]).unwrap();
        let plant = PlantSpec::new(1, a, b, k).unwrap();
        let space = PlantCertificateSpace::new(&plant, &grid(0.1, 0.1)).unwrap();
        let keys: Vec<(f64, f64)> = space.candidates().map(|c| (c.scalars.lambda_s, c.scalars.lambda_u)).collect();
        assert_eq!(keys.len(), space.len());
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }
}
