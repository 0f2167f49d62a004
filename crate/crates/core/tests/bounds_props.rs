mod common;

use common::*;
use decoy_core::bounds::{
    analyze, compute_x, compute_z, find_l0_a0, l0_cap, poisson_weight, w_vector, z_vector, BoundsOptions, ZBranch,
};
use decoy_core::linalg::{determinant, solve};
use decoy_core::model::{yield_q, ChannelParams, IntensitySet};
use decoy_core::oracle::push_forward;
use decoy_core::symfunc::PrecisionConfig;
use decoy_core::Scalar;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::Rng;

fn mu_set(lo_len: usize, hi_len: usize) -> impl Strategy<Value = Vec<f64>> {
    (lo_len..=hi_len)
        .prop_flat_map(|k| proptest::collection::vec(0.02..=1.0f64, k))
        .prop_map(|mut v| {
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v
        })
        .prop_filter("well separated", |v| v.windows(2).all(|w| w[1] - w[0] > 0.03))
}

fn params() -> impl Strategy<Value = ChannelParams<M>> {
    (0.0..=1.0f64, -4.0..=-1.0f64, -9.0..=0.0f64).prop_map(|(a, log_eta, log_frac)| {
        let eta = 10f64.powf(log_eta);
        ChannelParams::new(m(a), m(eta * 10f64.powf(log_frac)), m(eta)).unwrap()
    })
}

fn yields(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(prop_oneof![Just(0.0), Just(1.0), 0.0..=1.0f64], 1..=max_len)
}

fn to_m(v: Vec<f64>) -> Vec<M> {
    v.into_iter().map(m).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// `y_n − X_n = Σ_{m>M} w^{(m)}_n y_m` for `n ≤ M`.
    #[test]
    fn expansion_in_w_vectors(mu in mu_set(1, 4), y in yields(20)) {
        let mu = to_m(mu);
        let y = to_m(y);
        let k = mu.len();
        let rhs: Vec<M> = mu.iter().map(|x| push_forward(&y, x)).collect();
        let x = compute_x(&rhs, &mu, &PrecisionConfig::default()).unwrap();
        for n in 1..=k {
            let truth = y.get(n - 1).cloned().unwrap_or_else(M::zero);
            let expanded = (k + 1..=y.len()).fold(x.value(n), |acc, label| {
                acc + w_vector(label, &mu).entry(n) * y[label - 1].clone()
            });
            let scale = Scalar::max_of(truth.abs(), M::one());
            prop_assert!(((expanded - truth) / scale).abs() < dec("1e-20"));
        }
    }

    #[test]
    fn sandwich_holds(mu in mu_set(1, 5), y in yields(25)) {
        let mu = to_m(mu);
        let y = to_m(y);
        let rhs: Vec<M> = mu.iter().map(|x| push_forward(&y, x)).collect();
        let set = IntensitySet::new(mu, M::zero()).unwrap();
        let report = analyze(&set, &rhs, None, &BoundsOptions::default()).unwrap();
        let tol = dec("1e-40");
        for iv in &report.intervals {
            let truth = y.get(iv.n - 1).cloned().unwrap_or_else(M::zero);
            prop_assert!(iv.lo.clone() - tol.clone() <= truth && truth <= iv.hi.clone() + tol.clone());
        }
    }

    /// `X_n − q_n` carries the sign `(−1)^{M−n}` for data from the channel model.
    #[test]
    fn parity_of_x_minus_q(mu in mu_set(1, 5), p in params()) {
        let mu = to_m(mu);
        let k = mu.len();
        let rhs = model_rhs(&mu, &p);
        let x = compute_x(&rhs, &mu, &PrecisionConfig::default()).unwrap();
        let slack = dec("1e-60");
        for n in 1..=k {
            let d = x.value(n) - yield_q(n, &p);
            if (k - n).is_multiple_of(2) {
                prop_assert!(d >= -slack.clone(), "n = {}", n);
            } else {
                prop_assert!(d <= slack.clone(), "n = {}", n);
            }
        }
    }

    /// The search path is monotone and the closed-form `a0` agrees with bisection.
    #[test]
    fn pivot_search_is_consistent(mu in mu_set(1, 5), p in params()) {
        let mu = to_m(mu);
        let k = mu.len();
        let rhs = model_rhs(&mu, &p);
        let cfg = PrecisionConfig::default();
        let pivot = find_l0_a0(&rhs, &mu, 200, &cfg).unwrap();
        prop_assert!(pivot.path.windows(2).all(|w| w[1] >= w[0]));

        let x_m = compute_x(&rhs, &mu, &cfg).unwrap().value(k);
        if mu.iter().all(|v| *v <= M::one()) {
            prop_assert!(pivot.l0 <= l0_cap(&x_m, k));
        }
        if pivot.branch == ZBranch::Equality {
            let z_m = |a: &M| z_vector(pivot.l0, a, &rhs, &mu, &cfg).unwrap()[k - 1].clone();
            let (mut lo, mut hi) = (M::zero(), M::one());
            prop_assert!(z_m(&hi) <= M::zero());
            for _ in 0..90 {
                let mid = (lo.clone() + hi.clone()) / M::from_int(2);
                if z_m(&mid) >= M::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            prop_assert!((lo - pivot.a0.clone()).abs() < dec("1e-20"));
        }
    }

    /// Cramer's rule and Gaussian elimination give the same head of `Z`.
    #[test]
    fn z_head_by_elimination(mu in mu_set(1, 5), p in params()) {
        let mu = to_m(mu);
        let k = mu.len();
        let rhs = model_rhs(&mu, &p);
        let z = compute_z(&rhs, &mu, &BoundsOptions::default()).unwrap();
        prop_assume!(z.branch != ZBranch::Degenerate);
        // move the known tail to the right-hand side, then eliminate
        let reduced: Vec<M> = mu
            .iter()
            .zip(&rhs)
            .map(|(x, r)| {
                let tail = (k + 1..z.l0 + 200).fold(M::zero(), |acc, n| acc + poisson_weight(x, n) * z.value(n));
                r.clone() - tail
            })
            .collect();
        let a: Vec<Vec<M>> = mu.iter().map(|x| (1..=k).map(|n| poisson_weight(x, n)).collect()).collect();
        let head = solve(a, reduced).unwrap();
        for n in 1..=k {
            prop_assert!(abs_err(&head[n - 1], &z.value(n)) < 1e-50, "n = {}", n);
        }
    }
}

/// `x^{(m)}_n` by direct determinants: columns `μ^1..μ^M` without `μ^n`, then `μ^m`.
fn x_determinant(mu: &[M], label: usize, n: usize) -> M {
    let k = mu.len();
    if n == label {
        let a: Vec<Vec<M>> = mu.iter().map(|x| (1..=k).map(|j| num_traits::pow(x.clone(), j)).collect()).collect();
        return factorial(label) * determinant(a);
    }
    let a: Vec<Vec<M>> = mu
        .iter()
        .map(|x| {
            (1..=k)
                .filter(|&j| j != n)
                .chain(std::iter::once(label))
                .map(|j| num_traits::pow(x.clone(), j))
                .collect()
        })
        .collect();
    let v = factorial(n) * determinant(a);
    if (k - n + 1).is_multiple_of(2) {
        v
    } else {
        -v
    }
}

fn factorial(n: usize) -> M {
    (1..=n).fold(M::one(), |acc, j| acc * M::from_int(j))
}

#[test]
fn w_vectors_match_determinant_forms() {
    let mut r = rng(11);
    for k in 1..=4 {
        for _ in 0..5 {
            let mu = random_mu(&mut r, k, 0.05, 1.5, 0.05);
            for label in k + 1..=k + 6 {
                let w = w_vector(label, &mu);
                let denom = x_determinant(&mu, label, label);
                for n in 1..=k {
                    let expect = x_determinant(&mu, label, n) / denom.clone();
                    assert!(rel_err(&w.entry(n), &expect) < 1e-50, "M = {k}, m = {label}, n = {n}");
                }
            }
        }
    }
}

#[test]
fn search_stays_within_cap_on_sweeps() {
    let mut r = rng(12);
    for _ in 0..100 {
        let k = r.gen_range(1..=5);
        let eta = 10f64.powf(r.gen_range(-4.0..=-1.0));
        let p = ChannelParams::new(m(r.gen_range(0.05..=1.0)), m(0.0), m(eta)).unwrap();
        let mu = random_mu(&mut r, k, 0.02, 1.0, 0.03);
        let z = compute_z(&model_rhs(&mu, &p), &mu, &BoundsOptions::default()).unwrap();
        let x_m = compute_x(&model_rhs(&mu, &p), &mu, &PrecisionConfig::default()).unwrap().value(k);
        assert!(z.l0 <= l0_cap(&x_m, k));
    }
}
