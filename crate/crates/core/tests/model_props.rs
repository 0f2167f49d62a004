mod common;

use common::*;
use decoy_core::model::{synth_qplus, yield_q, ChannelParams};
use decoy_core::{Real, Scalar};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = ChannelParams<M>> {
    (0.0..=1.0f64, -4.0..=-1.0f64, 0.0..=1.0f64)
        .prop_map(|(a, log_eta, frac)| {
            let eta = 10f64.powf(log_eta);
            ChannelParams::new(m(a), m(eta * frac), m(eta)).unwrap()
        })
}

/// `e^{−μ} Σ_{n≥1} μ^n/n! q_n`, stopped once a term is below 1e-30 of the running sum.
fn series_qplus(mu: &M, p: &ChannelParams<M>) -> M {
    let cut = dec("1e-30");
    let mut weight = M::one();
    let mut sum = M::zero();
    for n in 1.. {
        weight = weight * mu.clone() / M::from_int(n);
        let term = weight.clone() * yield_q(n, p);
        sum += term.clone();
        if M::from_int(n) > mu.clone() && term <= cut.clone() * sum.clone() {
            break;
        }
    }
    (-mu.clone()).exp() * sum
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn qplus_is_a_probability(p in params(), mu in 0.001..=1.0f64) {
        let q = synth_qplus(&m(mu), &p);
        prop_assert!(q >= M::zero() && q <= M::one());
    }

    #[test]
    fn closed_form_matches_series(p in params(), mu in 0.001..=1.0f64) {
        let mu = m(mu);
        let closed = synth_qplus(&mu, &p);
        let series = series_qplus(&mu, &p);
        prop_assert!(rel_err(&closed, &series) < 1e-29);
    }

    #[test]
    fn yield_over_factorial_decreases(p in params()) {
        prop_assume!(p.a > M::zero());
        let mut fact = M::one();
        let mut prev = yield_q(1, &p);
        for n in 2..40 {
            fact *= M::from_int(n);
            let cur = yield_q(n, &p) / fact.clone();
            prop_assert!(cur < prev, "n = {}", n);
            prev = cur;
        }
    }

    #[test]
    fn yields_dominate_single_photon_yield(p in params(), big_m in 2usize..12) {
        let q1 = p.a.clone() * p.eta.clone() + p.b.clone();
        prop_assert!(yield_q(big_m - 1, &p) >= q1 - dec("1e-70"));
    }
}
