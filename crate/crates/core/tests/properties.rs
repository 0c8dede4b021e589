//! Property tests of the core invariants against the reference routines in
//! `common`.

mod common;

use approx::assert_relative_eq;
use proptest::prelude::*;

use ncs_sched::certificates::{compute_mu, CertificateScalars};
use ncs_sched::cycles::{transition_counts, xi, xi_grouped, Cycle, TFactors};
use ncs_sched::matops::{is_schur, solve_dare_lqr, solve_discrete_lyapunov, spectral_radius, Matrix};
use ncs_sched::plants::{NcsConfig, PlantSpec};
use ncs_sched::rng::SeededRng;
use ncs_sched::scheduler::{build_policy, SchedulingPolicy};
use ncs_sched::simulator::{certificate_trace, psi, simulate};
use ncs_sched::{Matrix32, Matrix64};

use common::*;

fn scalars_of(rows: &[[f64; 4]]) -> Vec<CertificateScalars<f64>> {
    rows.iter().enumerate().map(|(i, r)| CertificateScalars::from_f64(i + 1, *r).unwrap()).collect()
}

/// Random candidate cycle with T-factors and scalars, drawn from one seed.
fn random_instance(seed: u64) -> Option<(Vec<Vec<usize>>, Vec<u64>, Vec<[f64; 4]>)> {
    let mut rng = SeededRng::new(seed);
    let n = 2 + rng.below(4) as usize;
    let m = 1 + rng.below(n as u64 - 1) as usize;
    let len = 2 + rng.below(4) as usize;
    let sets = random_candidate_cycle(&mut rng, n, m, len)?;
    let t: Vec<u64> = (0..sets.len()).map(|_| 1 + rng.below(9)).collect();
    let scalars = (0..n).map(|_| random_scalars(&mut rng)).collect();
    Some((sets, t, scalars))
}

fn instance_policy(sets: &[Vec<usize>], t: &[u64], n: usize) -> SchedulingPolicy {
    let cycle = Cycle::from_stable_sets(n, sets).unwrap();
    build_policy(&cycle, &TFactors::new(t.to_vec()).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectral_radius_matches_characteristic_roots(seed in any::<u64>(), d in 1usize..6, rho in 0.1f64..2.0) {
        let mut rng = SeededRng::new(seed);
        let a = random_with_radius(&mut rng, d, rho);
        let got = spectral_radius(&to_matrix(&a)).unwrap();
        assert_relative_eq!(got, spectral_radius_oracle(&a), max_relative = 1e-6, epsilon = 1e-9);
    }

    #[test]
    fn lyapunov_solution_satisfies_equation(seed in any::<u64>(), d in 1usize..6, rho in 0.05f64..0.9) {
        let mut rng = SeededRng::new(seed);
        let a = random_with_radius(&mut rng, d, rho);
        let q = random_spd(&mut rng, d, 0.1);
        let p = from_matrix(&solve_discrete_lyapunov(&to_matrix(&a), &to_matrix(&q)).unwrap());
        let apa = matmul(&matmul(&transpose(&a), &p), &a);
        let residual: Dense = (0..d).map(|i| (0..d).map(|j| apa[i][j] - p[i][j] + q[i][j]).collect()).collect();
        prop_assert!(max_abs(&residual) <= 1e-9 * max_abs(&p).max(1.0));
        prop_assert!(max_diff(&p, &lyapunov_series(&a, &q)) <= 1e-7 * max_abs(&p).max(1.0));
    }

    #[test]
    fn mu_pair_product_is_at_least_one(seed in any::<u64>(), d in 1usize..5) {
        let mut rng = SeededRng::new(seed);
        let p = to_matrix(&random_spd(&mut rng, d, 0.05));
        let q = to_matrix(&random_spd(&mut rng, d, 0.05));
        let pq = compute_mu(&p, &q).unwrap();
        let qp = compute_mu(&q, &p).unwrap();
        prop_assert!(pq * qp >= 1.0 - 1e-9);
        prop_assert!(compute_mu(&p, &p).unwrap() >= 1.0 - 1e-9);
    }

    #[test]
    fn lqr_closed_loop_is_schur(seed in any::<u64>(), d in 1usize..5, rho in 0.5f64..2.5) {
        let mut rng = SeededRng::new(seed);
        let a = to_matrix(&random_with_radius(&mut rng, d, rho));
        let b = Matrix64::column(&(0..d).map(|_| rng.uniform(-1.0, 1.0)).collect::<Vec<_>>());
        prop_assume!(ncs_sched::plants::is_controllable(&a, &b).unwrap());
        let k = solve_dare_lqr(&a, &b, &Matrix64::identity(d), &Matrix64::identity(1)).unwrap();
        let closed = a.add(&b.matmul(&k).unwrap()).unwrap();
        prop_assert!(is_schur(&closed, 0.0).unwrap());
    }

    #[test]
    fn xi_routes_agree(seed in any::<u64>()) {
        let Some((sets, t, rows)) = random_instance(seed) else { return Ok(()) };
        let n = rows.len();
        let cycle = Cycle::from_stable_sets(n, &sets).unwrap();
        let tf = TFactors::new(t.clone()).unwrap();
        let scalars = scalars_of(&rows);
        let direct = xi(&cycle, &tf, &scalars).unwrap();
        let grouped = xi_grouped(&cycle, &tf, &scalars).unwrap();
        let oracle = xi_oracle(&sets, &t, &rows);
        for i in 0..n {
            assert_relative_eq!(direct[i], oracle[i], max_relative = 1e-10, epsilon = 1e-10);
            assert_relative_eq!(grouped[i], oracle[i], max_relative = 1e-10, epsilon = 1e-10);
        }
    }

    #[test]
    fn switch_counts_differ_by_at_most_one(seed in any::<u64>()) {
        let Some((sets, t, rows)) = random_instance(seed) else { return Ok(()) };
        let n = rows.len();
        let cycle = Cycle::from_stable_sets(n, &sets).unwrap();
        let policy = instance_policy(&sets, &t, n);
        let horizon = 3 * policy.period() as usize + 2;
        for i in 1..=n {
            let c = transition_counts(&cycle, i);
            prop_assert_eq!(c.su, c.us);
            let tr = certificate_trace(&policy, &scalars_of(&rows)[i - 1], i, horizon).unwrap();
            for k in 0..=horizon {
                prop_assert_eq!(tr.d_s[k] + tr.d_u[k], k as u64);
                prop_assert!(tr.n_su[k].abs_diff(tr.n_us[k]) <= 1);
            }
            let per_period = policy.period() as usize;
            prop_assert_eq!(tr.d_s[per_period], policy.stable_dwell_per_period(i));
        }
    }

    #[test]
    fn psi_over_one_period_equals_exp_xi(seed in any::<u64>()) {
        let Some((sets, t, rows)) = random_instance(seed) else { return Ok(()) };
        let n = rows.len();
        let policy = instance_policy(&sets, &t, n);
        let oracle = xi_oracle(&sets, &t, &rows);
        let scalars = scalars_of(&rows);
        let period = policy.period();
        for i in 1..=n {
            let ln_psi = psi(&policy, &scalars[i - 1], i, 2 * period).unwrap().ln();
            let ln_psi_one = psi(&policy, &scalars[i - 1], i, period).unwrap().ln();
            assert_relative_eq!(ln_psi_one, oracle[i - 1], max_relative = 1e-9, epsilon = 1e-9);
            assert_relative_eq!(ln_psi - ln_psi_one, oracle[i - 1], max_relative = 1e-9, epsilon = 1e-9);
        }
    }

    #[test]
    fn policy_text_round_trips(seed in any::<u64>()) {
        let Some((sets, t, rows)) = random_instance(seed) else { return Ok(()) };
        let policy = instance_policy(&sets, &t, rows.len());
        let back = SchedulingPolicy::from_text(&policy.to_text()).unwrap();
        prop_assert_eq!(&back, &policy);
        for k in 0..2 * policy.period() {
            prop_assert_eq!(back.gamma_at(k).unwrap(), policy.gamma_at(k).unwrap());
            prop_assert_eq!(policy.gamma_at(k).unwrap(), policy.gamma_at(k + policy.period()).unwrap());
        }
    }

    #[test]
    fn simulation_is_linear_in_the_initial_state(seed in any::<u64>(), alpha in -3.0f64..3.0) {
        let Some((sets, t, rows)) = random_instance(seed) else { return Ok(()) };
        let n = rows.len();
        let mut rng = SeededRng::new(seed ^ 0x5eed);
        let plants: Vec<PlantSpec<f64>> = (1..=n)
            .map(|i| {
                let a = to_matrix(&random_with_radius(&mut rng, 2, 1.1));
                let b = Matrix64::column(&[1.0, 0.5]);
                let k = Matrix64::from_rows(&[[-0.3, -0.2]]).unwrap();
                PlantSpec::new(i, a, b, k).unwrap()
            })
            .collect();
        let cfg = NcsConfig::new(plants, sets[0].len()).unwrap();
        let policy = instance_policy(&sets, &t, n);
        let x0: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)]).collect();
        let scaled: Vec<Vec<f64>> = x0.iter().map(|x| x.iter().map(|v| alpha * v).collect()).collect();
        let base = simulate(&cfg, &policy, &x0, 25, false).unwrap();
        let other = simulate(&cfg, &policy, &scaled, 25, false).unwrap();
        for i in 0..n {
            for k in 0..=25 {
                assert_relative_eq!(other.norms[i][k], alpha.abs() * base.norms[i][k], max_relative = 1e-9, epsilon = 1e-12);
            }
        }
    }
}

#[test]
fn single_precision_pipeline_runs() {
    let a = Matrix32::from_rows(&[[1.1f32, 0.2], [0.0, 0.9]]).unwrap();
    let b2 = Matrix32::column(&[0.0, 1.0]);
    let k = solve_dare_lqr(&a, &b2, &Matrix32::identity(2), &Matrix32::identity(1)).unwrap();
    assert!(is_schur(&a.add(&b2.matmul(&k).unwrap()).unwrap(), 0.0).unwrap());
    let rho = spectral_radius(&a).unwrap();
    assert!((rho - 1.1).abs() < 1e-5);
    let p: Matrix<f32> = solve_discrete_lyapunov(&Matrix32::from_rows(&[[0.5f32, 0.1], [0.0, 0.3]]).unwrap(), &Matrix32::identity(2)).unwrap();
    assert!(p.max_asymmetry().unwrap() < 1e-5);

    let cycle = Cycle::from_stable_sets(2, &[vec![1], vec![2]]).unwrap();
    let tf = TFactors::new(vec![3, 3]).unwrap();
    let scalars: Vec<CertificateScalars<f32>> = vec![
        CertificateScalars::new(1, 0.2f32, 1.2, 2.0, 1.5).unwrap(),
        CertificateScalars::new(2, 0.3f32, 1.1, 1.5, 1.5).unwrap(),
    ];
    let single = xi(&cycle, &tf, &scalars).unwrap();
    let double = xi_oracle(&[vec![1], vec![2]], &[3, 3], &[[0.2, 1.2, 2.0, 1.5], [0.3, 1.1, 1.5, 1.5]]);
    for (s, d) in single.iter().zip(&double) {
        assert_relative_eq!(*s as f64, *d, max_relative = 1e-5);
    }
}
