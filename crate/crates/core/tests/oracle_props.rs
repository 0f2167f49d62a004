mod common;

use common::*;
use decoy_core::bounds::{analyze, compute_x, compute_z, BoundsOptions};
use decoy_core::model::{ChannelParams, IntensitySet};
use decoy_core::oracle::{
    box_simplex, lp_by_vertex_enumeration, lp_extremize, push_forward, sample_feasible, verify_report, Direction,
    TruncatedLp, AGREEMENT_TOLERANCE,
};
use decoy_core::symfunc::PrecisionConfig;
use decoy_core::{Exact, Real};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;

fn lp_value(mu: &[M], rhs: &[M], n: usize, target: usize, dir: Direction) -> M {
    let lp = TruncatedLp::new(mu.to_vec(), rhs.to_vec(), n, target, dir).unwrap();
    lp_extremize(&lp).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn simplex_matches_vertex_enumeration(
        k in 1usize..=3,
        n in 4usize..=10,
        mu in proptest::collection::vec(0.05..=1.0f64, 3),
        y in proptest::collection::vec(0.0..=1.0f64, 10),
        target in 1usize..=4,
        maximize in any::<bool>(),
    ) {
        let mut mu: Vec<f64> = mu[..k].to_vec();
        mu.sort_by(|a, b| a.partial_cmp(b).unwrap());
        prop_assume!(mu.windows(2).all(|w| w[1] - w[0] > 0.05));
        let rhs: Vec<f64> = mu.iter().map(|x| push_forward(&y[..n], x)).collect();
        let dir = if maximize { Direction::Max } else { Direction::Min };
        let lp = TruncatedLp::new(mu, rhs, n, target, dir).unwrap();
        let simplex = lp_extremize(&lp).unwrap().value;
        let vertices = lp_by_vertex_enumeration(&lp, &1e-9).unwrap().value;
        prop_assert!((simplex - vertices).abs() < 1e-7, "{} vs {}", simplex, vertices);
    }
}

#[test]
fn truncated_minimum_decreases_toward_z_for_odd_m() {
    let mut r = rng(21);
    for _ in 0..6 {
        let k = [1, 3][r.gen_range(0..2)];
        let p = random_params(&mut r);
        let mu = random_mu(&mut r, k, 0.05, 1.0, 0.05);
        let rhs = model_rhs(&mu, &p);
        let z1 = compute_z(&rhs, &mu, &BoundsOptions::default()).unwrap().value(1);
        let mut prev: Option<M> = None;
        for n in (k + 1..=k + 12).chain([60]) {
            let Ok(lp) = TruncatedLp::new(mu.clone(), rhs.clone(), n, 1, Direction::Min) else { continue };
            let Ok(sol) = lp_extremize(&lp) else { continue }; // small N may be infeasible
            if let Some(p) = &prev {
                assert!(sol.value <= p.clone() + dec("1e-60"));
            }
            assert!(sol.value >= z1.clone() - dec("1e-60"));
            prev = Some(sol.value);
        }
        assert!(abs_err(prev.as_ref().unwrap(), &z1) < 1e-10);
    }
}

#[test]
fn maximum_mirrors_parity() {
    let mut r = rng(22);
    for k in 1..=4 {
        let p = random_params(&mut r);
        let mu = random_mu(&mut r, k, 0.05, 1.0, 0.05);
        let rhs = model_rhs(&mu, &p);
        let x1 = compute_x(&rhs, &mu, &PrecisionConfig::default()).unwrap().value(1);
        let z = compute_z(&rhs, &mu, &BoundsOptions::default()).unwrap();
        let n = 60usize.max(z.l0 + 20);
        let max = lp_value(&mu, &rhs, n, 1, Direction::Max);
        // M − 1 even: max is X_1; odd: max is Z_1
        let expect = if (k - 1) % 2 == 0 { x1 } else { z.value(1) };
        assert!(abs_err(&max, &expect) < 1e-10, "M = {k}");
    }
}

#[test]
fn verify_report_agrees_on_model_data() {
    let p = ChannelParams::new(m(0.8), m(2e-6), m(0.03)).unwrap();
    let mu = vec![dec("0.1"), dec("0.25"), dec("0.6"), dec("0.9")];
    let rhs = model_rhs(&mu, &p);
    let set = IntensitySet::new(mu.clone(), p.vacuum_yield()).unwrap();
    let report = analyze(&set, &rhs, Some(&p), &BoundsOptions::default()).unwrap();
    let check = verify_report(&mu, &rhs, &report, None).unwrap();
    assert_eq!(check.n_trunc, 40.max(report.z.l0 + 20));
    assert!(check.agrees(AGREEMENT_TOLERANCE));
}

#[test]
fn sampled_vectors_are_feasible_for_their_own_data() {
    let mut r = rng(23);
    let mu = vec![dec("0.2"), dec("0.5")];
    for y in sample_feasible::<M, _>(&mut r, 12, 5) {
        let rhs: Vec<M> = mu.iter().map(|x| push_forward(&y, x)).collect();
        let lo = lp_value(&mu, &rhs, 12, 3, Direction::Min);
        let hi = lp_value(&mu, &rhs, 12, 3, Direction::Max);
        assert!(lo <= y[2].clone() + dec("1e-60") && y[2] <= hi.clone() + dec("1e-60"));
    }
}

#[test]
fn all_ones_push_forward_is_factorial_tail() {
    let mu = dec("0.5");
    let y = vec![M::one(); 30];
    let got = push_forward(&y, &mu);
    let expect = mu.exp() - M::one() - decoy_core::bounds::poisson_tail(&mu, 30);
    assert!(abs_err(&got, &expect) < 1e-70);
}

#[test]
fn simplex_runs_in_exact_arithmetic() {
    let q = |n: i64, d: i64| Exact::new(n.into(), d.into());
    // min x0 s.t. x0 + 2 x1 + 3 x2 = 5/2, x0 + x1 + x2 = 3/2, box [0, 1]
    let a = vec![vec![q(1, 1), q(2, 1), q(3, 1)], vec![q(1, 1), q(1, 1), q(1, 1)]];
    let b = vec![q(5, 2), q(3, 2)];
    let c = vec![q(1, 1), q(0, 1), q(0, 1)];
    let u = vec![q(1, 1); 3];
    let (x, _) = box_simplex(&a, &b, &c, &u, Exact::zero()).unwrap();
    assert_eq!(x, vec![q(1, 2), q(1, 1), q(0, 1)]);
}
