//! Extremal yield configurations and per-photon-number intervals.
//!
//! The constraints are `Σ_n (μ_i^n / n!) y_n = r_i` for `i = 1..M`, where
//! `r_i = e^{μ_i} Q_+(μ_i)`. Writing `y_n / n! = c_n` turns the first `M` columns into
//! `μ_i · V(μ)` with `V` a Vandermonde matrix, so any choice of the tail `y_{M+1}, …`
//! fixes `y_1..y_M` uniquely.
//!
//! * `X` sets the tail to zero.
//! * `Z` sets it to zeros on `(M, L0)`, `a0` at `L0` and ones after, with `(L0, a0)` the
//!   smallest pair (larger `L` first, then smaller `a`, counts as larger) keeping
//!   `z_M ≥ 0`.
//!
//! For `M − n` odd the interval for `y_n` is `[X_n, Z_n]`; for `M − n` even it is
//! `[Z_n, X_n]`.

use num_traits::pow;

use crate::error::{Error, Result};
use crate::linalg::{cramer_component, determinant, Matrix};
use crate::model::{ChannelParams, IntensitySet};
use crate::scalar::Real;
use crate::symfunc::{hook_schur, vandermonde_product, PrecisionConfig};

/// Default upper limit for the `L0` search.
pub const DEFAULT_SEARCH_CAP: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsOptions {
    pub precision: PrecisionConfig,
    /// User limit on `L0`; tightened automatically when every intensity is at most one.
    pub cap: usize,
}

impl Default for BoundsOptions {
    fn default() -> Self {
        BoundsOptions {
            precision: PrecisionConfig::default(),
            cap: DEFAULT_SEARCH_CAP,
        }
    }
}

/// The `M × M` system `Σ_n μ_i^n c_n = r_i` with its determinant precomputed.
#[derive(Debug, Clone)]
pub struct ConstraintSystem<T> {
    mu: Vec<T>,
    matrix: Matrix<T>,
    det: T,
}

impl<T: Real> ConstraintSystem<T> {
    pub fn new(mu: &[T], cfg: &PrecisionConfig) -> Result<Self> {
        cfg.check_distinct(mu)?;
        if let Some(i) = mu.iter().position(|m| !m.gt_zero()) {
            return Err(Error::Validation(format!("intensity #{i} is not positive")));
        }
        let m = mu.len();
        let matrix: Matrix<T> = mu
            .iter()
            .map(|x| (1..=m).map(|n| pow(x.clone(), n)).collect())
            .collect();
        // det = (Π μ_i) Δ(μ)
        let det = mu.iter().cloned().fold(T::one(), |acc, x| acc * x) * vandermonde_product(mu);
        Ok(ConstraintSystem {
            mu: mu.to_vec(),
            matrix,
            det,
        })
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn mu(&self) -> &[T] {
        &self.mu
    }

    /// `y_n` (not `y_n / n!`) for one `n ∈ 1..=M`, by Cramer's rule.
    pub fn yield_component(&self, rhs: &[T], n: usize) -> T {
        cramer_component(&self.matrix, rhs, n - 1, &self.det) * factorial::<T>(n)
    }

    /// All of `y_1..y_M`.
    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        (1..=self.len()).map(|n| self.yield_component(rhs, n)).collect()
    }

    /// Determinant of the constraint matrix evaluated by elimination, for cross-checks.
    pub fn det_by_elimination(&self) -> T {
        determinant(self.matrix.clone())
    }
}

/// The configuration with `y_n = 0` for every `n > M`.
#[derive(Debug, Clone, PartialEq)]
pub struct XConfiguration<T> {
    /// `X_1..X_M`.
    pub values: Vec<T>,
    pub rhs: Vec<T>,
    pub mu: Vec<T>,
    /// Relative disagreement between the product form and the Cramer solution for `X_1`.
    pub lagrange_cramer_delta: f64,
}

impl<T: Real> XConfiguration<T> {
    /// `X_n`, zero beyond `M`.
    pub fn value(&self, n: usize) -> T {
        assert!(n >= 1, "photon numbers start at one");
        self.values.get(n - 1).cloned().unwrap_or_else(T::zero)
    }
}

/// Solves the constraint system with a zero tail.
///
/// `X_1` comes from the product form
/// `Σ_i (r_i / μ_i) Π_{j≠i} μ_j / (μ_j − μ_i)`; the remaining entries, and an
/// independent `X_1`, come from Cramer's rule.
pub fn compute_x<T: Real>(rhs: &[T], mu: &[T], cfg: &PrecisionConfig) -> Result<XConfiguration<T>> {
    let system = ConstraintSystem::new(mu, cfg)?;
    check_rhs(rhs, mu.len())?;
    let mut values = system.solve(rhs);

    let (x1, scale) = lagrange_x1(rhs, mu);
    let delta = if scale.is_zero() {
        0.0
    } else {
        ((x1.clone() - values[0].clone()).abs() / scale).to_f64_lossy()
    };
    let tolerance = cross_check_tolerance::<T>();
    if delta > tolerance {
        return Err(Error::CrossCheck {
            what: "X_1 product form vs Cramer solution",
            delta,
            tolerance,
        });
    }
    values[0] = x1;
    Ok(XConfiguration {
        values,
        rhs: rhs.to_vec(),
        mu: mu.to_vec(),
        lagrange_cramer_delta: delta,
    })
}

/// Relative tolerance for agreement between two evaluation routes: `1e-20`, or the
/// square root of the unit roundoff when the scalar cannot resolve that.
pub fn cross_check_tolerance<T: Real>() -> f64 {
    T::epsilon().to_f64_lossy().sqrt().max(1e-20)
}

/// Product-form `X_1` and the sum of absolute terms (its natural scale).
fn lagrange_x1<T: Real>(rhs: &[T], mu: &[T]) -> (T, T) {
    let mut total = T::zero();
    let mut scale = T::zero();
    for (i, (r, mi)) in rhs.iter().zip(mu).enumerate() {
        let mut term = r.clone() / mi.clone();
        for (j, mj) in mu.iter().enumerate() {
            if j != i {
                term = term * mj.clone() / (mj.clone() - mi.clone());
            }
        }
        scale = scale + term.abs();
        total = total + term;
    }
    (total, scale)
}

fn check_rhs<T: Real>(rhs: &[T], m: usize) -> Result<()> {
    if rhs.len() != m {
        return Err(Error::Validation(format!(
            "{} right-hand sides for {m} intensities",
            rhs.len()
        )));
    }
    Ok(())
}

/// Basis vector of the kernel of the constraint map, labelled by `m > M`.
#[derive(Debug, Clone, PartialEq)]
pub struct WVector<T> {
    pub m: usize,
    /// `w_1..w_M`; `w_m = 1` and every other entry is zero.
    pub head: Vec<T>,
}

impl<T: Real> WVector<T> {
    pub fn entry(&self, n: usize) -> T {
        assert!(n >= 1, "photon numbers start at one");
        if n <= self.head.len() {
            self.head[n - 1].clone()
        } else if n == self.m {
            T::one()
        } else {
            T::zero()
        }
    }
}

/// `w^{(m)}_n = (−1)^{M−n+1} (n!/m!) s_{α(m−M, M−n)}(μ)` for `n ≤ M`.
///
/// The `n = M` entry uses the one-row shape `(m − M)`.
pub fn w_vector<T: Real>(m: usize, mu: &[T]) -> WVector<T> {
    let vars = mu.len();
    assert!(m > vars, "w-vectors are labelled by m > M");
    let arm = m - vars;
    let head = (1..=vars)
        .map(|n| {
            let mut ratio = T::one();
            for k in n + 1..=m {
                ratio = ratio / T::from_int(k);
            }
            let s = hook_schur(arm, vars - n, mu);
            let v = ratio * s;
            if (vars - n).is_multiple_of(2) {
                -v
            } else {
                v
            }
        })
        .collect();
    WVector { m, head }
}

/// `μ^n / n!`.
pub fn poisson_weight<T: Real>(mu: &T, n: usize) -> T {
    let mut w = T::one();
    for k in 1..=n {
        w = w * mu.clone() / T::from_int(k);
    }
    w
}

/// `Σ_{n > L} μ^n / n!`, summed directly (no cancellation against `e^μ`).
pub fn poisson_tail<T: Real>(mu: &T, l: usize) -> T {
    let mut term = poisson_weight(mu, l + 1);
    let mut sum = T::zero();
    let eps = T::epsilon() / T::from_int(1 << 10);
    let mut n = l + 1;
    loop {
        sum = sum + term.clone();
        n += 1;
        term = term * mu.clone() / T::from_int(n);
        let past_peak = T::from_int(n) > mu.clone();
        if term.is_zero() || (past_peak && term <= eps.clone() * sum.clone()) {
            break;
        }
    }
    sum
}

fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::from_int(k))
}

/// `G(μ; L, a) = e^μ Q_+ − (e^μ − Σ_{n=0}^{L} μ^n/n! + a μ^L/L!)`.
pub fn g_function<T: Real>(mu: &T, l: usize, a: &T, qplus: &T) -> T {
    g_from_rhs(mu, &(mu.exp() * qplus.clone()), l, a)
}

fn g_from_rhs<T: Real>(mu: &T, rhs: &T, l: usize, a: &T) -> T {
    rhs.clone() - poisson_tail(mu, l) - a.clone() * poisson_weight(mu, l)
}

/// `z_1(L, a)..z_M(L, a)`: the head of the configuration with tail
/// `0` on `(M, L)`, `a` at `L` and `1` beyond.
pub fn z_vector<T: Real>(l: usize, a: &T, rhs: &[T], mu: &[T], cfg: &PrecisionConfig) -> Result<Vec<T>> {
    check_tail_args(l, a, mu.len())?;
    check_rhs(rhs, mu.len())?;
    let system = ConstraintSystem::new(mu, cfg)?;
    Ok(system.solve(&tail_rhs(&system, rhs, l, a)))
}

fn check_tail_args<T: Real>(l: usize, a: &T, m: usize) -> Result<()> {
    if l <= m {
        return Err(Error::Validation(format!("L must exceed M = {m}, got {l}")));
    }
    if *a < T::zero() || *a > T::one() {
        return Err(Error::Validation(format!(
            "a must lie in [0, 1], got {}",
            a.to_sci_string(6)
        )));
    }
    Ok(())
}

fn tail_rhs<T: Real>(system: &ConstraintSystem<T>, rhs: &[T], l: usize, a: &T) -> Vec<T> {
    system
        .mu()
        .iter()
        .zip(rhs)
        .map(|(mu, r)| g_from_rhs(mu, r, l, a))
        .collect()
}

/// Values this close to zero are treated as zero: working tolerance times the data scale.
fn zero_band<T: Real>(rhs: &[T]) -> T {
    let scale = rhs.iter().fold(T::one(), |acc, r| T::max_of(acc, r.abs()));
    T::working_tolerance() * scale
}

fn z_last<T: Real>(system: &ConstraintSystem<T>, rhs: &[T], l: usize, a: &T) -> T {
    system.yield_component(&tail_rhs(system, rhs, l, a), system.len())
}

/// How the `Z` configuration was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZBranch {
    /// `z_M(M+1, 1) ≥ 0`: every tail entry is one and `Z_M > 0` may hold.
    Saturated,
    /// `Z_M = 0` with `a0 ∈ (0, 1]` at `L0`.
    Equality,
    /// `X_M = 0`: only the zero tail is consistent, so `Z = X`.
    Degenerate,
}

impl ZBranch {
    pub fn as_str(&self) -> &'static str {
        match self {
            ZBranch::Saturated => "saturated",
            ZBranch::Equality => "equality",
            ZBranch::Degenerate => "degenerate",
        }
    }
}

/// Outcome of the `(L0, a0)` search.
#[derive(Debug, Clone, PartialEq)]
pub struct TailPivot<T> {
    pub l0: usize,
    pub a0: T,
    pub branch: ZBranch,
    /// `z_M(L, 1)` for `L = M+1, …` as visited by the search.
    pub path: Vec<T>,
}

/// Finds the smallest `(L, a)` with `z_M(L, a) ≥ 0`.
///
/// `z_M` is affine and decreasing in `a`, and `z_M(L, 0) = z_M(L + 1, 1)`. The search
/// walks `L` upward until `z_M(L, 0) ≥ 0` while `z_M(L, 1) < 0`, then takes the root
/// of the affine segment. `cap` bounds `L0`.
pub fn find_l0_a0<T: Real>(rhs: &[T], mu: &[T], cap: usize, cfg: &PrecisionConfig) -> Result<TailPivot<T>> {
    let system = ConstraintSystem::new(mu, cfg)?;
    check_rhs(rhs, mu.len())?;
    find_with_system(&system, rhs, cap)
}

fn find_with_system<T: Real>(system: &ConstraintSystem<T>, rhs: &[T], cap: usize) -> Result<TailPivot<T>> {
    let m = system.len();
    let x_m = system.yield_component(rhs, m);
    let band = zero_band(rhs);
    if x_m < -band.clone() {
        return Err(Error::Infeasible(format!(
            "X_{m} = {} < 0, but y_{m} <= X_{m} for every non-negative tail",
            x_m.to_sci_string(6)
        )));
    }
    // Within round-off of zero: only the zero tail is consistent.
    if x_m <= band {
        return Ok(TailPivot {
            l0: m + 1,
            a0: T::zero(),
            branch: ZBranch::Degenerate,
            path: Vec::new(),
        });
    }
    let one = T::one();
    let mut at_one = z_last(system, rhs, m + 1, &one);
    let mut path = vec![at_one.clone()];
    if !at_one.lt_zero() {
        return Ok(TailPivot {
            l0: m + 1,
            a0: one,
            branch: ZBranch::Saturated,
            path,
        });
    }
    let cap = cap.max(m + 1);
    for l in m + 1..=cap {
        let at_zero = z_last(system, rhs, l, &T::zero());
        if !at_zero.lt_zero() {
            if at_zero.is_zero() {
                // The root sits at a = 0, i.e. at (L + 1, 1).
                return Ok(TailPivot {
                    l0: l + 1,
                    a0: one,
                    branch: ZBranch::Equality,
                    path,
                });
            }
            let a0 = at_zero.clone() / (at_zero - at_one);
            return Ok(TailPivot {
                l0: l,
                a0: T::min_of(a0, one),
                branch: ZBranch::Equality,
                path,
            });
        }
        path.push(at_zero.clone());
        at_one = at_zero;
    }
    Err(Error::CapExceeded { cap })
}

/// Largest `L ≥ M + 1` with `L (L − M)! ≤ M e / x_M` (at least `M + 1`).
///
/// Valid as a bound on `L0` when every intensity is at most one. Returns `usize::MAX`
/// for non-positive `x_M`.
pub fn l0_cap<T: Real>(x_m: &T, m: usize) -> usize {
    if !x_m.gt_zero() {
        return usize::MAX;
    }
    let budget = (m as f64 * std::f64::consts::E).ln() - x_m.ln().to_f64_lossy();
    let lhs = |l: usize| (l as f64).ln() + ln_factorial(l - m);
    let mut l = m + 1;
    while lhs(l + 1) <= budget {
        l += 1;
    }
    l
}

/// [`l0_cap`] with the model yield `q_M` as denominator, for when `X_M` is not available.
pub fn l0_cap_from_model<T: Real>(m: usize, params: &ChannelParams<T>) -> usize {
    l0_cap(&crate::model::yield_q(m, params), m)
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Effective search cap: the user cap, tightened by [`l0_cap`] when `max μ ≤ 1`.
pub fn search_cap<T: Real>(user_cap: usize, mu: &[T], x_m: &T) -> usize {
    let all_le_one = mu.iter().all(|m| *m <= T::one());
    if all_le_one {
        user_cap.min(l0_cap(x_m, mu.len()))
    } else {
        user_cap
    }
}

/// The configuration attaining the opposite-parity extremum.
#[derive(Debug, Clone, PartialEq)]
pub struct ZConfiguration<T> {
    /// `Z_1..Z_M`.
    pub values: Vec<T>,
    pub l0: usize,
    pub a0: T,
    pub branch: ZBranch,
    /// Cap the search ran under.
    pub cap: usize,
}

impl<T: Real> ZConfiguration<T> {
    /// `Z_n` including the implicit tail.
    pub fn value(&self, n: usize) -> T {
        assert!(n >= 1, "photon numbers start at one");
        let m = self.values.len();
        if n <= m {
            return self.values[n - 1].clone();
        }
        match self.branch {
            ZBranch::Degenerate => T::zero(),
            _ if n < self.l0 => T::zero(),
            _ if n == self.l0 => self.a0.clone(),
            _ => T::one(),
        }
    }
}

/// Runs the `(L0, a0)` search and solves for the head of `Z`.
pub fn compute_z<T: Real>(rhs: &[T], mu: &[T], opts: &BoundsOptions) -> Result<ZConfiguration<T>> {
    let system = ConstraintSystem::new(mu, &opts.precision)?;
    check_rhs(rhs, mu.len())?;
    let m = system.len();
    let x_m = system.yield_component(rhs, m);
    let cap = search_cap(opts.cap, mu, &x_m);
    let pivot = find_with_system(&system, rhs, cap)?;
    let mut values = match pivot.branch {
        ZBranch::Degenerate => system.solve(rhs),
        _ => system.solve(&tail_rhs(&system, rhs, pivot.l0, &pivot.a0)),
    };
    let last = values[m - 1].clone();
    let tol = zero_band(rhs);
    match pivot.branch {
        ZBranch::Degenerate => values[m - 1] = T::zero(),
        ZBranch::Equality => {
            if last.abs() > tol {
                return Err(Error::CrossCheck {
                    what: "Z_M on the equality branch",
                    delta: last.to_f64_lossy(),
                    tolerance: tol.to_f64_lossy(),
                });
            }
            values[m - 1] = T::zero();
        }
        ZBranch::Saturated => {
            if last < -tol {
                return Err(Error::Infeasible(format!(
                    "Z_{m} = {} is negative",
                    last.to_sci_string(6)
                )));
            }
        }
    }
    Ok(ZConfiguration {
        values,
        l0: pivot.l0,
        a0: pivot.a0,
        branch: pivot.branch,
        cap,
    })
}

/// Which configuration supplies an interval end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Achiever {
    X,
    Z,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interval<T> {
    pub n: usize,
    pub lo: T,
    pub hi: T,
    /// Configuration giving `lo`; the other one gives `hi`.
    pub lower: Achiever,
    /// Both ends are attained (extrema, not just bounds).
    pub exact: bool,
}

/// `[X_n, Z_n]` when `M − n` is odd, `[Z_n, X_n]` when it is even.
pub fn bound_interval<T: Real>(
    n: usize,
    x: &XConfiguration<T>,
    z: &ZConfiguration<T>,
    exact: bool,
) -> Interval<T> {
    let m = x.values.len();
    assert!((1..=m).contains(&n), "intervals exist for 1 <= n <= M");
    let (lo, hi, lower) = if (m - n) % 2 == 1 {
        (x.value(n), z.value(n), Achiever::X)
    } else {
        (z.value(n), x.value(n), Achiever::Z)
    };
    Interval { n, lo, hi, lower, exact }
}

/// Full analysis of one data set.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport<T> {
    pub intervals: Vec<Interval<T>>,
    pub x: XConfiguration<T>,
    pub z: ZConfiguration<T>,
    /// Every interval end is attained: `max μ ≤ 1`, the channel parameters (if known)
    /// lie in the admissible domain, and `X`, `Z` lie in `[0, 1]`.
    pub exact: bool,
    /// `X_n` and `Z_n` all lie in `[0, 1]`.
    pub in_unit_box: bool,
    pub warnings: Vec<String>,
}

impl<T: Real> BoundsReport<T> {
    pub fn interval(&self, n: usize) -> &Interval<T> {
        &self.intervals[n - 1]
    }
}

/// Computes `X`, `Z` and the per-`n` intervals for constraint right-hand sides `rhs`.
///
/// `params`, when known, only enters the exactness flag.
pub fn analyze<T: Real>(
    set: &IntensitySet<T>,
    rhs: &[T],
    params: Option<&ChannelParams<T>>,
    opts: &BoundsOptions,
) -> Result<BoundsReport<T>> {
    let mu = set.mu();
    let m = mu.len();
    let x = compute_x(rhs, mu, &opts.precision)?;
    let z = compute_z(rhs, mu, opts)?;
    let mut warnings = Vec::new();

    let tol = T::working_tolerance();
    let in_box = |v: &T| *v >= -tol.clone() && *v <= T::one() + tol.clone();
    let in_unit_box = x.values.iter().chain(&z.values).all(in_box);
    let le_one = set.all_le_one();
    let domain_ok = params.is_none_or(|p| p.in_domain());

    if !le_one {
        warnings.push(format!(
            "largest intensity {} exceeds 1: intervals are valid bounds but may not be attained",
            mu[m - 1].to_sci_string(6)
        ));
    }
    if !domain_ok {
        warnings.push("channel parameters outside 0 <= A <= 1, 0 <= B <= eta <= 1/10".to_owned());
    }
    if !in_unit_box {
        warnings.push(
            "X or Z leaves [0, 1]: data infeasible under the channel-model assumptions, bounds are not attained"
                .to_owned(),
        );
    }
    let exact = le_one && domain_ok && in_unit_box;

    let intervals: Vec<_> = (1..=m).map(|n| bound_interval(n, &x, &z, exact)).collect();
    let band = zero_band(rhs);
    if let Some(bad) = intervals
        .iter()
        .find(|iv| iv.lo.clone() - iv.hi.clone() > band.clone())
    {
        return Err(Error::Infeasible(format!(
            "empty interval for y_{}: [{}, {}]",
            bad.n,
            bad.lo.to_sci_string(8),
            bad.hi.to_sci_string(8)
        )));
    }
    Ok(BoundsReport {
        intervals,
        x,
        z,
        exact,
        in_unit_box,
        warnings,
    })
}
