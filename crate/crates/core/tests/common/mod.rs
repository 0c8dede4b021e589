//! Independent reference computations for the test suites. Nothing here calls
//! into the library's numerics: matrices are nested `Vec`s and every routine
//! takes a different route from the production code.

#![allow(dead_code)]

use ncs_sched::rng::SeededRng;
use num_complex::Complex64;

pub type Dense = Vec<Vec<f64>>;

pub fn identity(n: usize) -> Dense {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    (0..n).map(|i| (0..m).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect()).collect()
}

pub fn transpose(a: &Dense) -> Dense {
    (0..a[0].len()).map(|j| (0..a.len()).map(|i| a[i][j]).collect()).collect()
}

pub fn max_abs(a: &Dense) -> f64 {
    a.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Characteristic polynomial coefficients `c_0..c_n` (monic, `c_n = 1`) by
/// the Faddeev–LeVerrier recursion.
pub fn char_poly(a: &Dense) -> Vec<f64> {
    let n = a.len();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = vec![vec![0.0; n]; n];
    for k in 1..=n {
        let mut next = matmul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += c[n - k + 1];
        }
        m = next;
        let am = matmul(a, &m);
        let trace: f64 = (0..n).map(|i| am[i][i]).sum();
        c[n - k] = -trace / k as f64;
    }
    c
}

/// Roots of a monic polynomial by Durand–Kerner iteration.
pub fn poly_roots(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let scale = 1.0 + c[..n].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * scale).collect();
    let eval = |x: Complex64| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &ci| acc * x + ci);
    for _ in 0..5000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}

pub fn spectral_radius_oracle(a: &Dense) -> f64 {
    poly_roots(&char_poly(a)).iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// `Σ_k (Aᵀ)^k Q A^k`, summed until the terms stop contributing.
pub fn lyapunov_series(a: &Dense, q: &Dense) -> Dense {
    let at = transpose(a);
    let mut term = q.clone();
    let mut sum = q.clone();
    for _ in 0..200_000 {
        term = matmul(&matmul(&at, &term), a);
        for (srow, trow) in sum.iter_mut().zip(&term) {
            for (s, t) in srow.iter_mut().zip(trow) {
                *s += t;
            }
        }
        if max_abs(&term) <= 1e-18 * max_abs(&sum) {
            break;
        }
    }
    sum
}

/// Random `d×d` matrix with entries in `[−1, 1]`, rescaled so its spectral
/// radius equals `rho`.
pub fn random_with_radius(rng: &mut SeededRng, d: usize, rho: f64) -> Dense {
    loop {
        let a: Dense = (0..d).map(|_| (0..d).map(|_| rng.uniform(-1.0, 1.0)).collect()).collect();
        let r = spectral_radius_oracle(&a);
        if r > 1e-3 {
            return a.iter().map(|row| row.iter().map(|x| x * rho / r).collect()).collect();
        }
    }
}

/// Random symmetric positive definite `GᵀG + εI`.
pub fn random_spd(rng: &mut SeededRng, d: usize, eps: f64) -> Dense {
    let g: Dense = (0..d).map(|_| (0..d).map(|_| rng.uniform(-1.0, 1.0)).collect()).collect();
    let mut p = matmul(&transpose(&g), &g);
    for (i, row) in p.iter_mut().enumerate() {
        row[i] += eps;
    }
    p
}

pub fn quad(p: &Dense, x: &[f64]) -> f64 {
    (0..x.len()).map(|i| (0..x.len()).map(|j| x[i] * p[i][j] * x[j]).sum::<f64>()).sum()
}

/// Largest sampled `xᵀPq x / xᵀPp x` over `samples` random directions: a
/// lower estimate of `λ_max(Pq Pp⁻¹)`.
pub fn mu_sampled(rng: &mut SeededRng, pp: &Dense, pq: &Dense, samples: usize) -> f64 {
    let d = pp.len();
    let mut best = 0.0f64;
    for _ in 0..samples {
        // Uniform direction on the sphere via normalized Gaussians (Box–Muller).
        let x: Vec<f64> = (0..d)
            .map(|_| {
                let (u1, u2) = (1.0 - rng.unit(), rng.unit());
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
            .collect();
        let den = quad(pp, &x);
        if den > 0.0 {
            best = best.max(quad(pq, &x) / den);
        }
    }
    best
}

/// Direct evaluation of `Ξ` from vertex and edge weights: the vertex weight
/// of plant `i` is `−|ln λ_s|` when stable and `|ln λ_u|` otherwise; an edge
/// costs `ln μ_su` when the plant leaves its stable set, `ln μ_us` when it
/// enters, and nothing otherwise. Scalars are `(λ_s, λ_u, μ_su, μ_us)`.
pub fn xi_oracle(sets: &[Vec<usize>], t: &[u64], scalars: &[[f64; 4]]) -> Vec<f64> {
    let n = sets.len();
    (1..=scalars.len())
        .map(|i| {
            let [ls, lu, msu, mus] = scalars[i - 1];
            let mut total = 0.0;
            for j in 0..n {
                let here = sets[j].contains(&i);
                let there = sets[(j + 1) % n].contains(&i);
                total += if here { -ls.ln().abs() } else { lu.ln().abs() } * t[j] as f64;
                total += match (here, there) {
                    (true, false) => msu.ln(),
                    (false, true) => mus.ln(),
                    _ => 0.0,
                };
            }
            total
        })
        .collect()
}

/// Lexicographically first `T ∈ [1, t_max]^n` with every oracle `Ξ_i < −1e-12`.
pub fn exhaustive_t_factors(sets: &[Vec<usize>], scalars: &[[f64; 4]], t_max: u64) -> Option<Vec<u64>> {
    let n = sets.len();
    let mut t = vec![1u64; n];
    loop {
        if xi_oracle(sets, &t, scalars).iter().all(|&x| x < -1e-12) {
            return Some(t);
        }
        let mut k = n;
        loop {
            if k == 0 {
                return None;
            }
            k -= 1;
            if t[k] < t_max {
                t[k] += 1;
                for v in &mut t[k + 1..] {
                    *v = 1;
                }
                break;
            }
        }
    }
}

/// Random cycle of `len` distinct `m`-subsets of `1..=n` in which every plant
/// is stable somewhere.
pub fn random_candidate_cycle(rng: &mut SeededRng, n: usize, m: usize, len: usize) -> Option<Vec<Vec<usize>>> {
    let subsets = (0..m).fold(1usize, |c, k| c * (n - k) / (k + 1));
    if len > subsets {
        return None;
    }
    for _ in 0..1000 {
        let mut sets: Vec<Vec<usize>> = Vec::new();
        while sets.len() < len {
            let mut pool: Vec<usize> = (1..=n).collect();
            let mut s = Vec::new();
            for _ in 0..m {
                let k = rng.below(pool.len() as u64) as usize;
                s.push(pool.swap_remove(k));
            }
            s.sort_unstable();
            if !sets.contains(&s) {
                sets.push(s);
            }
        }
        if (1..=n).all(|i| sets.iter().any(|s| s.contains(&i))) {
            return Some(sets);
        }
    }
    None
}

/// Random certificate scalars `(λ_s, λ_u, μ_su, μ_us)`, both `μ ≥ 1`.
pub fn random_scalars(rng: &mut SeededRng) -> [f64; 4] {
    let ls = rng.uniform(0.02, 0.9);
    let lu = rng.uniform(1.01, 3.0);
    let msu = rng.uniform(1.0, 8.0);
    let mus = rng.uniform(1.0, 4.0);
    [ls, lu, msu, mus]
}

pub fn to_matrix(a: &Dense) -> ncs_sched::Matrix64 {
    ncs_sched::Matrix64::from_rows(a).expect("rectangular")
}

pub fn from_matrix(a: &ncs_sched::Matrix64) -> Dense {
    a.to_rows()
}
