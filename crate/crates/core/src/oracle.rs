//! Brute-force check of the bounds: optimize `y_n` directly over a truncated box LP.
//!
//! The LP is `Σ_{n=1}^{N} (μ_i^n / n!) y_n = r_i`, `0 ≤ y_n ≤ 1`. It is solved by a dense
//! bounded-variable primal simplex (phase 1 with artificials, Bland's rule with
//! lowest-index tie breaking) and, for small instances, by exhaustive vertex enumeration.

use itertools::Itertools;
use rand::Rng;

use crate::bounds::{poisson_tail, poisson_weight, BoundsReport};
use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

/// Truncated box-constrained LP over `y_1..y_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedLp<T> {
    pub mu: Vec<T>,
    /// `e^{μ_i} Q_+(μ_i)`.
    pub rhs: Vec<T>,
    pub n_trunc: usize,
    /// Photon number being optimized (1-based).
    pub target: usize,
    pub direction: Direction,
    /// Assume `y_n = 1` for every `n > N` and move that tail to the right-hand side.
    pub tail_ones: bool,
}

impl<T: Real> TruncatedLp<T> {
    pub fn new(mu: Vec<T>, rhs: Vec<T>, n_trunc: usize, target: usize, direction: Direction) -> Result<Self> {
        let lp = TruncatedLp {
            mu,
            rhs,
            n_trunc,
            target,
            direction,
            tail_ones: false,
        };
        lp.validate()?;
        Ok(lp)
    }

    pub fn with_tail_ones(mut self, on: bool) -> Self {
        self.tail_ones = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.mu.len();
        if m == 0 || self.rhs.len() != m {
            return Err(Error::Validation(format!(
                "{} intensities with {} right-hand sides",
                m,
                self.rhs.len()
            )));
        }
        if self.n_trunc < m {
            return Err(Error::Validation(format!("truncation N = {} below M = {m}", self.n_trunc)));
        }
        if !(1..=self.n_trunc).contains(&self.target) {
            return Err(Error::Validation(format!(
                "target y_{} outside 1..={}",
                self.target, self.n_trunc
            )));
        }
        Ok(())
    }

    /// Constraint matrix rows `μ_i^n / n!` and the effective right-hand side.
    pub fn constraints(&self) -> (Vec<Vec<T>>, Vec<T>) {
        let a = self
            .mu
            .iter()
            .map(|m| (1..=self.n_trunc).map(|n| poisson_weight(m, n)).collect())
            .collect();
        let b = self
            .mu
            .iter()
            .zip(&self.rhs)
            .map(|(m, r)| {
                if self.tail_ones {
                    r.clone() - poisson_tail(m, self.n_trunc)
                } else {
                    r.clone()
                }
            })
            .collect();
        (a, b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub value: T,
    /// Optimal `y_1..y_N`.
    pub y: Vec<T>,
    pub iterations: usize,
}

/// Simplex iteration limit per phase, as a multiple of the variable count.
const ITERATION_FACTOR: usize = 50;

/// Optimum of `lp` by the bounded-variable simplex.
pub fn lp_extremize<T: Real>(lp: &TruncatedLp<T>) -> Result<LpSolution<T>> {
    lp.validate()?;
    let (a, b) = lp.constraints();
    let mut cost = vec![T::zero(); lp.n_trunc];
    cost[lp.target - 1] = match lp.direction {
        Direction::Min => T::one(),
        Direction::Max => -T::one(),
    };
    let upper = vec![T::one(); lp.n_trunc];
    let (y, iterations) = box_simplex(&a, &b, &cost, &upper, T::working_tolerance())?;
    Ok(LpSolution {
        value: y[lp.target - 1].clone(),
        y,
        iterations,
    })
}

/// Minimizes `c·x` subject to `A x = b`, `0 ≤ x ≤ u`.
///
/// Columns are scaled by their largest entry and rows by theirs before pivoting, so `tol`
/// is relative to unit-sized data. Returns the optimal `x` and the pivot count.
pub fn box_simplex<T: Scalar>(
    a: &[Vec<T>],
    b: &[T],
    c: &[T],
    u: &[T],
    tol: T,
) -> Result<(Vec<T>, usize)> {
    let rows = a.len();
    let cols = c.len();
    if b.len() != rows || u.len() != cols || a.iter().any(|r| r.len() != cols) {
        return Err(Error::Validation("inconsistent LP dimensions".into()));
    }

    // x_j = s_j y_j with s_j = max_i |a_ij|.
    let col_scale: Vec<T> = (0..cols)
        .map(|j| {
            let s = a.iter().fold(T::zero(), |acc, r| T::max_of(acc, r[j].abs()));
            if s.is_zero() {
                T::one()
            } else {
                s
            }
        })
        .collect();
    let mut tab: Vec<Vec<T>> = Vec::with_capacity(rows);
    let mut rhs: Vec<T> = Vec::with_capacity(rows);
    for (r, bi) in a.iter().zip(b) {
        let mut row: Vec<T> = r.iter().zip(&col_scale).map(|(v, s)| v.clone() / s.clone()).collect();
        let rs = row.iter().fold(T::zero(), |acc, v| T::max_of(acc, v.abs()));
        let rs = if rs.is_zero() { T::one() } else { rs };
        let mut bi = bi.clone() / rs.clone();
        for v in row.iter_mut() {
            *v = v.clone() / rs.clone();
        }
        if bi.lt_zero() {
            bi = -bi;
            for v in row.iter_mut() {
                *v = -v.clone();
            }
        }
        // artificial columns
        for k in 0..rows {
            row.push(if k == tab.len() { T::one() } else { T::zero() });
        }
        tab.push(row);
        rhs.push(bi);
    }
    let mut upper: Vec<T> = u.iter().zip(&col_scale).map(|(ui, s)| ui.clone() * s.clone()).collect();
    let big = rhs.iter().fold(T::one(), |acc, v| acc + v.clone());
    upper.extend(std::iter::repeat_n(big, rows));
    let scaled_cost: Vec<T> = c.iter().zip(&col_scale).map(|(ci, s)| ci.clone() / s.clone()).collect();

    let mut state = Tableau {
        tab,
        basis: (cols..cols + rows).collect(),
        value: {
            let mut v = vec![T::zero(); cols];
            v.extend(rhs.iter().cloned());
            v
        },
        upper,
        tol: tol.clone(),
        iterations: 0,
        limit: ITERATION_FACTOR * (cols + rows),
    };

    // phase 1
    let mut phase1 = vec![T::zero(); cols];
    phase1.extend(std::iter::repeat_n(T::one(), rows));
    state.optimize(&phase1, cols + rows)?;
    let infeas = state.value[cols..].iter().fold(T::zero(), |acc, v| acc + v.clone());
    if infeas > tol.clone() * T::from_int(rows.max(1)) {
        return Err(Error::Infeasible(format!(
            "phase 1 residual {}",
            infeas.to_f64_lossy()
        )));
    }
    for k in cols..cols + rows {
        state.upper[k] = T::zero();
        state.value[k] = T::zero();
    }

    // phase 2: artificials pinned at zero and never entering
    let mut phase2 = scaled_cost;
    phase2.extend(std::iter::repeat_n(T::zero(), rows));
    state.optimize(&phase2, cols)?;

    let x = (0..cols)
        .map(|j| {
            let v = state.value[j].clone() / col_scale[j].clone();
            // snap round-off at the box
            let ub = u[j].clone();
            if v.clone().abs() <= tol {
                T::zero()
            } else if (v.clone() - ub.clone()).abs() <= tol {
                ub
            } else {
                v
            }
        })
        .collect();
    Ok((x, state.iterations))
}

struct Tableau<T> {
    /// `B^{-1} A`, one row per basic variable.
    tab: Vec<Vec<T>>,
    basis: Vec<usize>,
    /// Current value of every variable.
    value: Vec<T>,
    upper: Vec<T>,
    tol: T,
    iterations: usize,
    limit: usize,
}

impl<T: Scalar> Tableau<T> {
    /// Runs simplex pivots for `cost`; only columns below `enter_below` may enter.
    fn optimize(&mut self, cost: &[T], enter_below: usize) -> Result<()> {
        let start = self.iterations;
        loop {
            if self.iterations - start > self.limit {
                return Err(Error::IterationLimit(self.limit));
            }
            let Some((j, increase)) = self.entering(cost, enter_below) else {
                return Ok(());
            };
            self.step(j, increase);
            self.iterations += 1;
        }
    }

    /// Bland: the lowest-index nonbasic column with an improving reduced cost.
    fn entering(&self, cost: &[T], enter_below: usize) -> Option<(usize, bool)> {
        for j in 0..enter_below {
            if self.basis.contains(&j) || self.upper[j].is_zero() {
                continue;
            }
            let mut d = cost[j].clone();
            for (row, &bj) in self.tab.iter().zip(&self.basis) {
                d = d - cost[bj].clone() * row[j].clone();
            }
            let at_upper = self.value[j] >= self.upper[j];
            if !at_upper && d < -self.tol.clone() {
                return Some((j, true));
            }
            if at_upper && d > self.tol {
                return Some((j, false));
            }
        }
        None
    }

    fn step(&mut self, j: usize, increase: bool) {
        // Moving x_j by σt shifts basic x_B(r) by −σ t T_rj.
        let sigma = if increase { T::one() } else { -T::one() };
        let mut best_t = self.upper[j].clone();
        let mut leave: Option<(usize, usize, bool)> = None; // (row, var, goes to upper)
        for (r, row) in self.tab.iter().enumerate() {
            let rate = -(sigma.clone() * row[j].clone());
            if rate.abs() <= self.tol {
                continue;
            }
            let bv = self.basis[r];
            let (t, to_upper) = if rate.lt_zero() {
                (self.value[bv].clone() / (-rate), false)
            } else {
                ((self.upper[bv].clone() - self.value[bv].clone()) / rate, true)
            };
            let t = T::max_of(t, T::zero());
            let better = match &leave {
                None => t < best_t || (t == best_t && bv < j),
                Some((_, cur, _)) => t < best_t || (t == best_t && bv < *cur),
            };
            if better {
                best_t = t;
                leave = Some((r, bv, to_upper));
            }
        }

        let t = best_t;
        let delta = sigma * t;
        for (row, &bv) in self.tab.iter().zip(&self.basis) {
            let v = self.value[bv].clone() - delta.clone() * row[j].clone();
            self.value[bv] = v;
        }
        self.value[j] = self.value[j].clone() + delta;

        let Some((r, bv, to_upper)) = leave else {
            // bound flip
            self.value[j] = if increase { self.upper[j].clone() } else { T::zero() };
            return;
        };
        self.value[bv] = if to_upper { self.upper[bv].clone() } else { T::zero() };

        let p = self.tab[r][j].clone();
        for v in self.tab[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let pivot_row = self.tab[r].clone();
        for (k, row) in self.tab.iter_mut().enumerate() {
            if k == r || row[j].is_zero() {
                continue;
            }
            let f = row[j].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v = v.clone() - f.clone() * pv.clone();
            }
        }
        self.basis[r] = j;
    }
}

/// Optimum of `lp` by enumerating every basic solution: `M` basic columns, the rest at
/// `0` or `1`. Exponential; intended for `N ≤ 12`.
pub fn lp_by_vertex_enumeration<T: Real>(lp: &TruncatedLp<T>, tol: &T) -> Result<LpSolution<T>> {
    lp.validate()?;
    let n = lp.n_trunc;
    if n > 16 {
        return Err(Error::EnumerationTooLarge {
            weight: n,
            variables: lp.mu.len(),
        });
    }
    let (a, b) = lp.constraints();
    let m = a.len();
    let mut best: Option<Vec<T>> = None;
    let better = |cand: &T, cur: &T| match lp.direction {
        Direction::Min => cand < cur,
        Direction::Max => cand > cur,
    };
    for basic in (0..n).combinations(m) {
        let free: Vec<usize> = (0..n).filter(|j| !basic.contains(j)).collect();
        let sub: Vec<Vec<T>> = a.iter().map(|r| basic.iter().map(|&j| r[j].clone()).collect()).collect();
        for mask in 0u32..(1u32 << free.len()) {
            let mut y = vec![T::zero(); n];
            for (k, &j) in free.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    y[j] = T::one();
                }
            }
            let rhs: Vec<T> = a
                .iter()
                .zip(&b)
                .map(|(r, bi)| {
                    free.iter()
                        .fold(bi.clone(), |acc, &j| acc - r[j].clone() * y[j].clone())
                })
                .collect();
            let Some(sol) = crate::linalg::solve(sub.clone(), rhs) else {
                continue;
            };
            if sol.iter().any(|v| *v < -tol.clone() || *v > T::one() + tol.clone()) {
                continue;
            }
            for (&j, v) in basic.iter().zip(sol) {
                y[j] = v;
            }
            let v = y[lp.target - 1].clone();
            if best.as_ref().is_none_or(|cur| better(&v, &cur[lp.target - 1])) {
                best = Some(y);
            }
        }
    }
    let y = best.ok_or_else(|| Error::Infeasible("no feasible vertex".into()))?;
    Ok(LpSolution {
        value: y[lp.target - 1].clone(),
        y,
        iterations: 0,
    })
}

/// `count` random yield vectors in `[0, 1]^N`.
pub fn sample_feasible<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize, count: usize) -> Vec<Vec<T>> {
    (0..count)
        .map(|_| (0..n).map(|_| T::from_f64_exact(rng.gen::<f64>())).collect())
        .collect()
}

/// `Σ_n (μ^n / n!) y_n` for `y = (y_1, y_2, …)`; this is `e^μ Q_+(μ)`.
pub fn push_forward<T: Real>(y: &[T], mu: &T) -> T {
    let mut w = T::one();
    let mut acc = T::zero();
    for (i, v) in y.iter().enumerate() {
        w = w * mu.clone() / T::from_int(i + 1);
        acc = acc + w.clone() * v.clone();
    }
    acc
}

/// Default truncation order: `max(40, L0 + 20)`.
pub fn default_truncation(l0: usize) -> usize {
    40usize.max(l0 + 20)
}

/// Absolute agreement tolerance between LP optima and reported interval ends.
pub const AGREEMENT_TOLERANCE: f64 = 1e-10;

/// LP-minus-bound differences for one photon number.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleDelta<T> {
    pub n: usize,
    pub lp_min: T,
    pub lp_max: T,
    /// `lp_min − lo`.
    pub lo_delta: T,
    /// `lp_max − hi`.
    pub hi_delta: T,
}

impl<T: Real> OracleDelta<T> {
    pub fn agrees(&self, tol: f64) -> bool {
        self.lo_delta.to_f64_lossy().abs() <= tol && self.hi_delta.to_f64_lossy().abs() <= tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport<T> {
    pub n_trunc: usize,
    pub deltas: Vec<OracleDelta<T>>,
}

impl<T: Real> OracleReport<T> {
    pub fn agrees(&self, tol: f64) -> bool {
        self.deltas.iter().all(|d| d.agrees(tol))
    }
}

/// Solves min and max LPs for every `n ≤ M` and compares with the report's intervals.
pub fn verify_report<T: Real>(
    mu: &[T],
    rhs: &[T],
    report: &BoundsReport<T>,
    n_trunc: Option<usize>,
) -> Result<OracleReport<T>> {
    let n_trunc = n_trunc.unwrap_or_else(|| default_truncation(report.z.l0));
    let mut deltas = Vec::with_capacity(mu.len());
    for iv in &report.intervals {
        let solve = |dir| {
            TruncatedLp::new(mu.to_vec(), rhs.to_vec(), n_trunc, iv.n, dir).and_then(|lp| lp_extremize(&lp))
        };
        let lo = solve(Direction::Min)?.value;
        let hi = solve(Direction::Max)?.value;
        deltas.push(OracleDelta {
            n: iv.n,
            lo_delta: lo.clone() - iv.lo.clone(),
            hi_delta: hi.clone() - iv.hi.clone(),
            lp_min: lo,
            lp_max: hi,
        });
    }
    Ok(OracleReport { n_trunc, deltas })
}
