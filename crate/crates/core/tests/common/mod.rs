//! Random draws and small helpers shared by the integration suites.
#![allow(dead_code)]

use num_traits::{Signed, Zero};

use decoy_core::model::{synth_qplus, ChannelParams};
use decoy_core::{Mp256, Real, Scalar};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type M = Mp256;

pub fn dec(s: &str) -> M {
    s.parse().unwrap()
}

pub fn m(x: f64) -> M {
    M::from_f64_exact(x)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `0 ≤ A ≤ 1`, `η` log-uniform in `[1e-4, 0.1]`, `B` log-uniform in `[1e-9 η, η]`.
pub fn random_params<R: Rng>(rng: &mut R) -> ChannelParams<M> {
    let a = rng.gen_range(0.0..=1.0);
    let eta = 10f64.powf(rng.gen_range(-4.0..=-1.0));
    let b = eta * 10f64.powf(rng.gen_range(-9.0..=0.0));
    ChannelParams::new(m(a), m(b), m(eta)).unwrap()
}

/// `count` increasing intensities in `[lo, hi]` with neighbours at least `gap` apart.
pub fn random_mu<R: Rng>(rng: &mut R, count: usize, lo: f64, hi: f64, gap: f64) -> Vec<M> {
    loop {
        let mut v: Vec<f64> = (0..count).map(|_| rng.gen_range(lo..=hi)).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if v.windows(2).all(|w| w[1] - w[0] >= gap) {
            return v.into_iter().map(m).collect();
        }
    }
}

/// `e^{μ_i} Q_+(μ_i)` for the unclamped model.
pub fn model_rhs(mu: &[M], p: &ChannelParams<M>) -> Vec<M> {
    mu.iter().map(|x| x.exp() * synth_qplus(x, p)).collect()
}

/// `y ∈ [0, 1]^len` with a quarter of the entries pinned to each end of the box.
pub fn random_yields<R: Rng>(rng: &mut R, len: usize) -> Vec<M> {
    (0..len)
        .map(|_| match rng.gen_range(0..4) {
            0 => M::from_int(0),
            1 => M::from_int(1),
            _ => m(rng.gen_range(0.0..=1.0)),
        })
        .collect()
}

pub fn rel_err(a: &M, b: &M) -> f64 {
    let scale = Scalar::max_of(a.clone().abs(), b.clone().abs());
    if scale.is_zero() {
        0.0
    } else {
        ((a.clone() - b.clone()).abs() / scale).to_f64_lossy()
    }
}

pub fn abs_err(a: &M, b: &M) -> f64 {
    (a.clone() - b.clone()).abs().to_f64_lossy()
}
