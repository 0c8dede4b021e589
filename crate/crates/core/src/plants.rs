//! Plant and channel configuration: `(A, B, K)` triples, their closed- and
//! open-loop mode matrices, and the stability preconditions the rest of the
//! pipeline relies on.

use thiserror::Error;

use crate::matops::{self, LinalgError, Matrix};
use crate::scalar::Scalar;

/// Default margin for Schur tests on mode matrices.
pub const DEFAULT_SCHUR_TOL: f64 = 1e-9;

/// Relative singular-value threshold for the controllability rank test.
const CONTROLLABILITY_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlantError {
    #[error("plant {plant}: {detail}")]
    Dimensions { plant: usize, detail: String },

    #[error("channel capacity must satisfy 0 < M < N, got M = {capacity}, N = {plants}")]
    Capacity { capacity: usize, plants: usize },

    #[error("plant {plant} has state dimension {found}, expected {expected} like plant 1")]
    StateDimension { plant: usize, expected: usize, found: usize },

    #[error("plant {plant}: pair (A, B) is not controllable")]
    Uncontrollable { plant: usize },

    #[error("plant {plant}: {source}")]
    Linalg {
        plant: usize,
        #[source]
        source: LinalgError,
    },
}

/// One plant `x⁺ = A x + B u` with state feedback `u = K x` while it holds the channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantSpec<T> {
    index: usize,
    a: Matrix<T>,
    b: Matrix<T>,
    k: Matrix<T>,
}

impl<T: Scalar> PlantSpec<T> {
    /// `index` is the 1-based plant number used in labels and reports.
    pub fn new(index: usize, a: Matrix<T>, b: Matrix<T>, k: Matrix<T>) -> Result<Self, PlantError> {
        let dims = |detail: String| PlantError::Dimensions { plant: index, detail };
        if index == 0 {
            return Err(dims("plant indices start at 1".into()));
        }
        if !a.is_square() {
            return Err(dims(format!("A must be square, got {:?}", a.shape())));
        }
        let d = a.rows();
        if b.rows() != d {
            return Err(dims(format!("B has {} rows, A is {d}x{d}", b.rows())));
        }
        if k.shape() != (b.cols(), d) {
            return Err(dims(format!("K must be {}x{d}, got {:?}", b.cols(), k.shape())));
        }
        Ok(Self { index, a, b, k })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn state_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn a(&self) -> &Matrix<T> {
        &self.a
    }

    pub fn b(&self) -> &Matrix<T> {
        &self.b
    }

    pub fn k(&self) -> &Matrix<T> {
        &self.k
    }

    /// Closed-loop matrix `A + BK`.
    pub fn stable_mode(&self) -> Matrix<T> {
        self.a
            .add(&self.b.matmul(&self.k).expect("shapes checked at construction"))
            .expect("shapes checked at construction")
    }

    /// Open-loop matrix `A`.
    pub fn unstable_mode(&self) -> &Matrix<T> {
        &self.a
    }

    /// `(A + BK, A)`.
    pub fn mode_matrices(&self) -> (Matrix<T>, Matrix<T>) {
        (self.stable_mode(), self.a.clone())
    }
}

/// `N` plants sharing a channel with `M` slots.
#[derive(Debug, Clone, PartialEq)]
pub struct NcsConfig<T> {
    plants: Vec<PlantSpec<T>>,
    capacity: usize,
}

impl<T: Scalar> NcsConfig<T> {
    /// Plants must be numbered `1..=N` in order and share one state dimension.
    pub fn new(plants: Vec<PlantSpec<T>>, capacity: usize) -> Result<Self, PlantError> {
        let n = plants.len();
        if capacity == 0 || capacity >= n {
            return Err(PlantError::Capacity { capacity, plants: n });
        }
        let d = plants[0].state_dim();
        for (pos, p) in plants.iter().enumerate() {
            if p.index != pos + 1 {
                return Err(PlantError::Dimensions {
                    plant: p.index,
                    detail: format!("expected plant number {} at position {pos}", pos + 1),
                });
            }
            if p.state_dim() != d {
                return Err(PlantError::StateDimension { plant: p.index, expected: d, found: p.state_dim() });
            }
        }
        Ok(Self { plants, capacity })
    }

    pub fn plants(&self) -> &[PlantSpec<T>] {
        &self.plants
    }

    pub fn plant(&self, index: usize) -> Option<&PlantSpec<T>> {
        index.checked_sub(1).and_then(|i| self.plants.get(i))
    }

    pub fn num_plants(&self) -> usize {
        self.plants.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn state_dim(&self) -> usize {
        self.plants[0].state_dim()
    }
}

/// Outcome of the stability precondition check for one plant.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantCheck {
    pub plant: usize,
    pub rho_open_loop: f64,
    pub rho_closed_loop: f64,
    pub open_loop_unstable: bool,
    pub closed_loop_schur: bool,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assumption1Report {
    pub plants: Vec<PlantCheck>,
    pub passed: bool,
}

/// Checks that every open loop is not Schur stable and every closed loop is.
/// Failures are collected in the report rather than returned as errors.
pub fn validate_assumption1<T: Scalar>(cfg: &NcsConfig<T>, tol: f64) -> Assumption1Report {
    let threshold = 1.0 - tol;
    let plants: Vec<PlantCheck> = cfg
        .plants()
        .iter()
        .map(|p| {
            let mut failures = Vec::new();
            let rho = |m: &Matrix<T>, what: &str, failures: &mut Vec<String>| match matops::spectral_radius(m) {
                Ok(r) => r.to_f64_lossy(),
                Err(e) => {
                    failures.push(format!("{what}: {e}"));
                    f64::NAN
                }
            };
            let rho_open = rho(p.unstable_mode(), "open loop", &mut failures);
            let rho_closed = rho(&p.stable_mode(), "closed loop", &mut failures);
            let open_loop_unstable = rho_open >= threshold;
            let closed_loop_schur = rho_closed < threshold;
            if !open_loop_unstable {
                failures.push(format!("open loop not unstable (spectral radius {rho_open:.6})"));
            }
            if !closed_loop_schur {
                failures.push(format!("closed loop not Schur (spectral radius {rho_closed:.6})"));
            }
            PlantCheck {
                plant: p.index(),
                rho_open_loop: rho_open,
                rho_closed_loop: rho_closed,
                open_loop_unstable,
                closed_loop_schur,
                failures,
            }
        })
        .collect();
    let passed = plants.iter().all(|c| c.failures.is_empty());
    Assumption1Report { plants, passed }
}

/// Rank test on `[B, AB, …, A^{d−1}B]` using the singular values of the
/// controllability matrix with threshold `1e-10·σ_max`.
pub fn is_controllable<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<bool, LinalgError> {
    let d = a.require_square()?;
    if b.rows() != d {
        return Err(LinalgError::DimensionMismatch { op: "controllability", left: a.shape(), right: b.shape() });
    }
    let m = b.cols();
    let mut ctrb = Matrix::zeros(d, d * m);
    let mut block = b.clone();
    for j in 0..d {
        for r in 0..d {
            for c in 0..m {
                ctrb[(r, j * m + c)] = block[(r, c)];
            }
        }
        block = a.matmul(&block)?;
    }
    let gram = ctrb.matmul(&ctrb.transpose())?;
    let sigma2 = matops::symmetric_eigenvalues(&gram)?;
    let smax = sigma2.last().copied().unwrap_or_else(T::zero).max(T::zero()).sqrt();
    if smax == T::zero() {
        return Ok(false);
    }
    let thr = T::of(CONTROLLABILITY_RTOL) * smax;
    let rank = sigma2.iter().filter(|&&s| s.max(T::zero()).sqrt() > thr).count();
    Ok(rank == d)
}

/// LQR gains for every `(A_i, B_i)` with common weights `Q`, `R`.
pub fn design_lqr_gains<T: Scalar>(
    a_list: &[Matrix<T>],
    b_list: &[Matrix<T>],
    q: &Matrix<T>,
    r: &Matrix<T>,
) -> Result<Vec<Matrix<T>>, PlantError> {
    if a_list.len() != b_list.len() {
        return Err(PlantError::Dimensions {
            plant: a_list.len().min(b_list.len()) + 1,
            detail: format!("{} A matrices but {} B matrices", a_list.len(), b_list.len()),
        });
    }
    a_list
        .iter()
        .zip(b_list)
        .enumerate()
        .map(|(i, (a, b))| {
            let plant = i + 1;
            let wrap = |source| PlantError::Linalg { plant, source };
            if !is_controllable(a, b).map_err(wrap)? {
                return Err(PlantError::Uncontrollable { plant });
            }
            matops::solve_dare_lqr(a, b, q, r).map_err(wrap)
        })
        .collect()
}

/// Builds a configuration whose gains come from [`design_lqr_gains`].
pub fn config_with_lqr_gains<T: Scalar>(
    a_list: Vec<Matrix<T>>,
    b_list: Vec<Matrix<T>>,
    q: &Matrix<T>,
    r: &Matrix<T>,
    capacity: usize,
) -> Result<NcsConfig<T>, PlantError> {
    let gains = design_lqr_gains(&a_list, &b_list, q, r)?;
    let plants = a_list
        .into_iter()
        .zip(b_list)
        .zip(gains)
        .enumerate()
        .map(|(i, ((a, b), k))| PlantSpec::new(i + 1, a, b, k))
        .collect::<Result<Vec<_>, _>>()?;
    NcsConfig::new(plants, capacity)
}
