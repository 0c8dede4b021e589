//! Reference systems used by the examples, the CLI `reproduce` command and
//! the test suites.

use crate::certificates::CertificateScalars;
use crate::cycles::{Cycle, TFactors};
use crate::matops::Matrix;
use crate::plants::{self, NcsConfig, PlantError, PlantSpec};
use crate::rng::SeededRng;
use crate::scalar::Scalar;

/// Open-loop matrices of the five-plant benchmark.
pub const FIVE_PLANT_A: [[[f64; 2]; 2]; 5] = [
    [[1.0310, 0.9725], [-0.4311, 0.6219]],
    [[0.8375, 1.0187], [-0.8959, 0.7188]],
    [[1.2571, -1.0259], [1.7171, -0.6001]],
    [[0.7569, 0.9926], [-0.1978, -1.6647]],
    [[0.5294, -1.6098], [-0.8860, 0.1875]],
];

/// Input matrices of the five-plant benchmark (single input).
pub const FIVE_PLANT_B: [[f64; 2]; 5] = [[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];

/// Published LQR gains (weights `Q = 5I`, `R = 1`), rounded to four decimals.
pub const FIVE_PLANT_K: [[f64; 2]; 5] = [
    [-0.9869, -0.7541],
    [0.4978, -1.0887],
    [-0.7247, 0.8152],
    [-0.0933, 0.8329],
    [0.9852, -0.6016],
];

/// Published eigenvalue moduli of `A_i` and `A_i + B_i K_i`, ascending.
pub const FIVE_PLANT_OPEN_LOOP_MODULI: [[f64; 2]; 5] =
    [[1.0298, 1.0298], [1.2307, 1.2307], [1.0036, 1.0036], [0.6729, 1.5807], [0.8480, 1.5649]];
pub const FIVE_PLANT_CLOSED_LOOP_MODULI: [[f64; 2]; 5] =
    [[0.3487, 0.3487], [0.3095, 0.3095], [0.2056, 0.2056], [0.0826, 0.2508], [0.1932, 0.3085]];

/// Published certificate scalars `(λ_s, λ_u, μ_su, μ_us)` for the five plants.
pub const FIVE_PLANT_SCALARS: [[f64; 4]; 5] = [
    [0.1360, 1.2346, 2.8452, 1.3232],
    [0.0720, 1.2346, 1.5681, 1.3509],
    [0.0715, 1.2346, 1.9025, 1.3046],
    [0.1757, 2.7778, 3.0854, 1.1665],
    [0.2430, 2.7778, 3.4664, 1.1576],
];

/// Channel capacity of the five-plant benchmark.
pub const FIVE_PLANT_CAPACITY: usize = 2;

/// Stable sets of the benchmark cycle and its published dwell times.
pub const FIVE_PLANT_CYCLE: [[usize; 2]; 3] = [[2, 3], [1, 5], [4, 5]];
pub const FIVE_PLANT_T: [u64; 3] = [4, 3, 5];

/// Three further T-contractive cycles on the same scalars, with dwell times.
pub const FIVE_PLANT_ALT_CYCLES: [([[usize; 2]; 3], [u64; 3]); 3] = [
    ([[2, 3], [1, 4], [3, 5]], [2, 7, 8]),
    ([[1, 3], [2, 4], [2, 5]], [3, 8, 9]),
    ([[3, 4], [3, 5], [1, 2]], [8, 9, 3]),
];

/// Round-robin baseline groups for the five-plant benchmark.
pub const FIVE_PLANT_ROUND_ROBIN: [[usize; 2]; 3] = [[1, 2], [2, 3], [4, 5]];

/// Three-plant system used for the sufficiency constructions.
pub const THREE_PLANT_A: [[[f64; 2]; 2]; 3] =
    [[[0.2, 0.7], [1.6, 0.1]], [[1.0, 0.1], [0.1, 1.0]], [[1.2, 0.2], [0.1, 0.9]]];
pub const THREE_PLANT_B: [[f64; 2]; 3] = [[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]];
pub const THREE_PLANT_K: [[f64; 2]; 3] = [[-0.2752, -0.6705], [-0.9137, -0.9505], [-1.0757, -0.4839]];
pub const THREE_PLANT_SCALARS: [[f64; 4]; 3] = [
    [0.2787, 1.5625, 4.1786, 1.5338],
    [0.0859, 1.2346, 23.5578, 1.9130],
    [0.2147, 2.0408, 3.6524, 2.5238],
];

/// Uniform scalars of the small three-plant graph example.
pub const UNIFORM_EXAMPLE_SCALARS: [f64; 4] = [0.25, 1.1, 1.1, 1.2];

fn mat<T: Scalar>(rows: &[[f64; 2]]) -> Matrix<T> {
    Matrix::from_f64_rows(rows).expect("benchmark data is well formed")
}

fn col<T: Scalar>(b: &[f64; 2]) -> Matrix<T> {
    Matrix::column(&[T::of(b[0]), T::of(b[1])])
}

pub fn five_plant_a<T: Scalar>() -> Vec<Matrix<T>> {
    FIVE_PLANT_A.iter().map(|a| mat(a)).collect()
}

pub fn five_plant_b<T: Scalar>() -> Vec<Matrix<T>> {
    FIVE_PLANT_B.iter().map(col).collect()
}

/// LQR weights `Q = 5I₂`, `R = 1`.
pub fn lqr_weights<T: Scalar>() -> (Matrix<T>, Matrix<T>) {
    (Matrix::identity(2).scale(T::of(5.0)), Matrix::identity(1))
}

/// Five-plant benchmark with gains recomputed by LQR.
pub fn five_plant_config<T: Scalar>() -> Result<NcsConfig<T>, PlantError> {
    let (q, r) = lqr_weights();
    plants::config_with_lqr_gains(five_plant_a(), five_plant_b(), &q, &r, FIVE_PLANT_CAPACITY)
}

pub fn five_plant_scalars<T: Scalar>() -> Vec<CertificateScalars<T>> {
    scalars_from(&FIVE_PLANT_SCALARS)
}

pub fn five_plant_cycle() -> Cycle {
    Cycle::from_stable_sets(5, &FIVE_PLANT_CYCLE).expect("valid benchmark cycle")
}

pub fn five_plant_t() -> TFactors {
    TFactors::new(FIVE_PLANT_T.to_vec()).expect("positive dwell times")
}

/// Three-plant system with the published gains and capacity `m`.
pub fn three_plant_config<T: Scalar>(m: usize) -> Result<NcsConfig<T>, PlantError> {
    let plants = (0..3)
        .map(|i| {
            PlantSpec::new(
                i + 1,
                mat(&THREE_PLANT_A[i]),
                col(&THREE_PLANT_B[i]),
                Matrix::from_f64_rows(&[THREE_PLANT_K[i]]).expect("row gain"),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    NcsConfig::new(plants, m)
}

pub fn three_plant_scalars<T: Scalar>() -> Vec<CertificateScalars<T>> {
    scalars_from(&THREE_PLANT_SCALARS)
}

pub fn scalars_from<T: Scalar>(rows: &[[f64; 4]]) -> Vec<CertificateScalars<T>> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| CertificateScalars::from_f64(i + 1, *r).expect("benchmark scalars are valid"))
        .collect()
}

/// `n` random two-state single-input plants with LQR gains (`Q = 5I`,
/// `R = 1`) and capacity `m`. Entries of `A` are uniform in `[−2, 2]`, `B` is
/// a random nonzero 0/1 column; draws that are Schur stable in open loop or
/// uncontrollable are rejected and redrawn.
pub fn random_plants(n: usize, m: usize, seed: u64) -> Result<NcsConfig<f64>, PlantError> {
    let mut rng = SeededRng::new(seed);
    let (q, r) = lqr_weights::<f64>();
    let mut a_list = Vec::with_capacity(n);
    let mut b_list = Vec::with_capacity(n);
    while a_list.len() < n {
        let a = Matrix::new(2, 2, (0..4).map(|_| rng.uniform(-2.0, 2.0)).collect()).expect("2x2");
        let b = match rng.below(3) {
            0 => Matrix::column(&[1.0, 0.0]),
            1 => Matrix::column(&[0.0, 1.0]),
            _ => Matrix::column(&[1.0, 1.0]),
        };
        let unstable = crate::matops::spectral_radius(&a).map(|r| r >= 1.0).unwrap_or(false);
        if unstable && plants::is_controllable(&a, &b).unwrap_or(false) {
            a_list.push(a);
            b_list.push(b);
        }
    }
    plants::config_with_lqr_gains(a_list, b_list, &q, &r, m)
}
