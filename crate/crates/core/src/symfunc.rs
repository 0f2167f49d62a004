//! Vandermonde determinants and Schur polynomials.
//!
//! Three independent evaluations of `s_λ(μ_1, …, μ_M)` are provided:
//!
//! * [`schur_bialternant`]: ratio of a generalized alternant to the Vandermonde
//!   determinant. Works for every partition but cancels badly when intensities are
//!   close, so run it at high precision.
//! * [`schur_tableaux`]: brute-force sum over semistandard tableaux. Exponential, only
//!   meant as a test oracle.
//! * [`hook_schur`]: subtraction-free sum for hook shapes `(a, 1^b)`, the only shapes the
//!   bounds engine evaluates.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{pow, One};

use crate::error::{Error, Result};
use crate::linalg::determinant;
use crate::scalar::Scalar;

/// Largest tableau weight accepted by [`schur_tableaux`].
pub const TABLEAU_MAX_WEIGHT: usize = 20;
/// Largest number of variables accepted by [`schur_tableaux`].
pub const TABLEAU_MAX_VARIABLES: usize = 6;

/// Working precision and the degeneracy guard applied to intensity lists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionConfig {
    pub significand_bits: u32,
    /// Minimum of `|μ_j − μ_i| / max μ` accepted before inputs count as degenerate.
    pub degeneracy_gap: f64,
}

impl PrecisionConfig {
    pub const DEFAULT_BITS: u32 = 256;
    pub const DEFAULT_GAP: f64 = 1e-6;
    pub const MIN_BITS: u32 = 64;

    pub fn new(significand_bits: u32, degeneracy_gap: f64) -> Result<Self> {
        if significand_bits < Self::MIN_BITS {
            return Err(Error::Validation(format!(
                "precision must be at least {} bits, got {significand_bits}",
                Self::MIN_BITS
            )));
        }
        if !(degeneracy_gap >= 0.0 && degeneracy_gap.is_finite()) {
            return Err(Error::Validation(format!(
                "degeneracy gap must be a finite non-negative number, got {degeneracy_gap}"
            )));
        }
        Ok(PrecisionConfig {
            significand_bits,
            degeneracy_gap,
        })
    }

    /// Rejects lists containing two values whose relative spacing is below the gap.
    pub fn check_distinct<T: Scalar>(&self, mu: &[T]) -> Result<()> {
        let scale = mu
            .iter()
            .map(|m| m.abs())
            .fold(T::zero(), |acc, m| T::max_of(acc, m));
        let gap = T::from_f64_exact(self.degeneracy_gap);
        for i in 0..mu.len() {
            for j in i + 1..mu.len() {
                let diff = (mu[j].clone() - mu[i].clone()).abs();
                if diff.is_zero() || diff < gap.clone() * scale.clone() {
                    let spacing = if scale.is_zero() {
                        0.0
                    } else {
                        (diff / scale.clone()).to_f64_lossy()
                    };
                    return Err(Error::DegenerateIntensities {
                        first: i,
                        second: j,
                        spacing,
                    });
                }
            }
        }
        Ok(())
    }
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig {
            significand_bits: Self::DEFAULT_BITS,
            degeneracy_gap: Self::DEFAULT_GAP,
        }
    }
}

/// Integer partition with weakly decreasing positive parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        let ok = parts.iter().all(|&p| p > 0) && parts.windows(2).all(|w| w[0] >= w[1]);
        if ok {
            Ok(Partition { parts })
        } else {
            Err(Error::InvalidPartition(parts))
        }
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    /// One-row shape `(k)`; the empty partition when `k == 0`.
    pub fn single_row(k: usize) -> Self {
        if k == 0 {
            Self::empty()
        } else {
            Partition { parts: vec![k] }
        }
    }

    /// Hook `α(a, b) = (a, 1, …, 1)` with `b` trailing ones.
    pub fn hook(arm: usize, leg: usize) -> Result<Self> {
        if arm == 0 {
            return Err(Error::InvalidPartition(vec![0]));
        }
        let mut parts = vec![arm];
        parts.extend(std::iter::repeat_n(1, leg));
        Ok(Partition { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn weight(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `Some((a, b))` when the partition is the hook `α(a, b)`.
    pub fn as_hook(&self) -> Option<(usize, usize)> {
        let (&first, rest) = self.parts.split_first()?;
        rest.iter().all(|&p| p == 1).then_some((first, rest.len()))
    }

    /// Parts padded with zeros to length `m`.
    pub fn padded(&self, m: usize) -> Vec<usize> {
        let mut v = self.parts.clone();
        v.resize(m.max(v.len()), 0);
        v
    }

    /// All partitions of `weight` with at most `max_len` parts, in reverse lexicographic order.
    pub fn all_of_weight(weight: usize, max_len: usize) -> Vec<Partition> {
        fn go(rest: usize, cap: usize, len_left: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
            if rest == 0 {
                out.push(Partition { parts: cur.clone() });
                return;
            }
            if len_left == 0 {
                return;
            }
            for p in (1..=cap.min(rest)).rev() {
                cur.push(p);
                go(rest - p, p, len_left - 1, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(weight, weight, max_len, &mut Vec::new(), &mut out);
        out
    }

    fn check_fits(&self, variables: usize) -> Result<()> {
        if self.len() > variables {
            Err(Error::PartitionTooLong {
                parts: self.len(),
                variables,
            })
        } else {
            Ok(())
        }
    }
}

/// `Π_{i<j} (μ_j − μ_i)`, the determinant of the matrix with rows `(1, μ_i, …, μ_i^{M−1})`.
pub fn vandermonde<T: Scalar>(mu: &[T], cfg: &PrecisionConfig) -> Result<T> {
    cfg.check_distinct(mu)?;
    Ok(vandermonde_product(mu))
}

pub(crate) fn vandermonde_product<T: Scalar>(mu: &[T]) -> T {
    let mut acc = T::one();
    for j in 0..mu.len() {
        for i in 0..j {
            acc = acc * (mu[j].clone() - mu[i].clone());
        }
    }
    acc
}

/// Schur polynomial as the ratio of the generalized alternant to the Vandermonde determinant.
pub fn schur_bialternant<T: Scalar>(lambda: &Partition, mu: &[T], cfg: &PrecisionConfig) -> Result<T> {
    let m = mu.len();
    lambda.check_fits(m)?;
    let delta = vandermonde(mu, cfg)?;
    let lam = lambda.padded(m);
    let alternant: Vec<Vec<T>> = mu
        .iter()
        .map(|x| {
            (0..m)
                .map(|k| pow(x.clone(), k + lam[m - 1 - k]))
                .collect()
        })
        .collect();
    Ok(determinant(alternant) / delta)
}

/// Schur polynomial as a sum of monomials over semistandard tableaux of shape `λ`
/// with entries in `1..=M`.
pub fn schur_tableaux<T: Scalar>(lambda: &Partition, mu: &[T]) -> Result<T> {
    let m = mu.len();
    lambda.check_fits(m)?;
    check_enumeration_cap(lambda, m)?;
    let mut total = T::zero();
    for_each_tableau_content(lambda, m, |content| {
        let mut term = T::one();
        for (x, &t) in mu.iter().zip(content) {
            term = term * pow(x.clone(), t);
        }
        total = total.clone() + term;
    });
    Ok(total)
}

/// Number of semistandard tableaux of shape `λ` with entries in `1..=M`.
pub fn count_tableaux(lambda: &Partition, m: usize) -> Result<u64> {
    lambda.check_fits(m)?;
    check_enumeration_cap(lambda, m)?;
    let mut count = 0u64;
    for_each_tableau_content(lambda, m, |_| count += 1);
    Ok(count)
}

fn check_enumeration_cap(lambda: &Partition, m: usize) -> Result<()> {
    if lambda.weight() > TABLEAU_MAX_WEIGHT || m > TABLEAU_MAX_VARIABLES {
        Err(Error::EnumerationTooLarge {
            weight: lambda.weight(),
            variables: m,
        })
    } else {
        Ok(())
    }
}

/// Calls `visit` with the content vector `(t_1, …, t_M)` of every semistandard tableau.
fn for_each_tableau_content(lambda: &Partition, m: usize, mut visit: impl FnMut(&[usize])) {
    let shape = lambda.parts();
    let cells: Vec<(usize, usize)> = shape
        .iter()
        .enumerate()
        .flat_map(|(r, &len)| (0..len).map(move |c| (r, c)))
        .collect();
    let mut grid: Vec<Vec<usize>> = shape.iter().map(|&len| vec![0; len]).collect();
    let mut content = vec![0usize; m];

    fn fill(
        k: usize,
        cells: &[(usize, usize)],
        grid: &mut Vec<Vec<usize>>,
        content: &mut Vec<usize>,
        m: usize,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if k == cells.len() {
            visit(content);
            return;
        }
        let (r, c) = cells[k];
        let mut lo = 1;
        if c > 0 {
            lo = lo.max(grid[r][c - 1]);
        }
        if r > 0 {
            lo = lo.max(grid[r - 1][c] + 1);
        }
        for v in lo..=m {
            grid[r][c] = v;
            content[v - 1] += 1;
            fill(k + 1, cells, grid, content, m, visit);
            content[v - 1] -= 1;
        }
    }

    fill(0, &cells, &mut grid, &mut content, m, &mut visit);
}

/// `s_λ(1, …, 1)` with `M` ones, via `Π_{i<j} (λ_i − λ_j + j − i) / (j − i)`.
pub fn schur_at_ones(lambda: &Partition, m: usize) -> Result<BigRational> {
    lambda.check_fits(m)?;
    let lam = lambda.padded(m);
    let mut acc = BigRational::one();
    for i in 0..m {
        for j in i + 1..m {
            let num = BigInt::from(lam[i] as i64 - lam[j] as i64 + (j - i) as i64);
            acc *= BigRational::new(num, BigInt::from((j - i) as i64));
        }
    }
    Ok(acc)
}

/// `(max μ)^d · s_λ(1, …, 1)`, an upper bound on `s_λ(μ)` for positive `μ`.
pub fn schur_upper_bound<T: Scalar>(lambda: &Partition, mu: &[T]) -> Result<T> {
    let at_ones = schur_at_ones(lambda, mu.len())?;
    let mu_max = mu
        .iter()
        .cloned()
        .fold(T::zero(), |acc, x| T::max_of(acc, x));
    let count = T::from_bigint(at_ones.numer()) / T::from_bigint(at_ones.denom());
    Ok(pow(mu_max, lambda.weight()) * count)
}

/// `e_k(μ)`, the elementary symmetric polynomial.
pub fn elementary<T: Scalar>(k: usize, mu: &[T]) -> T {
    let mut e = vec![T::zero(); k + 1];
    e[0] = T::one();
    for x in mu {
        for j in (1..=k).rev() {
            e[j] = e[j].clone() + x.clone() * e[j - 1].clone();
        }
    }
    e.swap_remove(k)
}

/// `h_k(μ) = s_{(k)}(μ)`, the complete homogeneous symmetric polynomial.
pub fn complete_homogeneous<T: Scalar>(k: usize, mu: &[T]) -> T {
    let mut h = vec![T::zero(); k + 1];
    h[0] = T::one();
    for x in mu {
        for j in 1..=k {
            h[j] = h[j].clone() + x.clone() * h[j - 1].clone();
        }
    }
    h.swap_remove(k)
}

/// Hook-shape Schur polynomial `s_{(a, 1^b)}(μ)` without subtractions.
///
/// A tableau of hook shape is fixed by its corner entry `c`, the `b` strictly larger
/// entries below it and the `a − 1` entries `≥ c` to its right, so
/// `s_{(a,1^b)} = Σ_c μ_c · e_b(μ_{c+1..}) · h_{a−1}(μ_{c..})`.
pub fn hook_schur<T: Scalar>(arm: usize, leg: usize, mu: &[T]) -> T {
    assert!(arm >= 1, "hook arm must be positive");
    let m = mu.len();
    if leg + 1 > m {
        return T::zero();
    }
    // e[j] = e_j over the current suffix μ_{c+1..}, h[j] = h_j over μ_{c..}.
    let mut e = vec![T::zero(); leg + 1];
    e[0] = T::one();
    let mut h = vec![T::zero(); arm];
    h[0] = T::one();
    let mut total = T::zero();
    for c in (0..m).rev() {
        let x = &mu[c];
        for j in 1..arm {
            h[j] = h[j].clone() + x.clone() * h[j - 1].clone();
        }
        total = total + x.clone() * e[leg].clone() * h[arm - 1].clone();
        for j in (1..=leg).rev() {
            e[j] = e[j].clone() + x.clone() * e[j - 1].clone();
        }
    }
    total
}

/// `s_λ(μ)` using the hook fast path when possible and the bialternant otherwise.
pub fn schur<T: Scalar>(lambda: &Partition, mu: &[T], cfg: &PrecisionConfig) -> Result<T> {
    lambda.check_fits(mu.len())?;
    match lambda.as_hook() {
        Some((a, b)) => Ok(hook_schur(a, b, mu)),
        None if lambda.is_empty() => Ok(T::one()),
        None => schur_bialternant(lambda, mu, cfg),
    }
}

/// `K_m = s_{α(m−M, M−1)}(μ) / s_{(m−M)}(μ)` for `m > M`.
pub fn k_ratio<T: Scalar>(m: usize, mu: &[T], cfg: &PrecisionConfig) -> Result<T> {
    let vars = mu.len();
    if m <= vars {
        return Err(Error::Validation(format!(
            "K_m is defined for m > M = {vars}, got m = {m}"
        )));
    }
    cfg.check_distinct(mu)?;
    let a = m - vars;
    Ok(hook_schur(a, vars - 1, mu) / complete_homogeneous(a, mu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{MpFloat, Real};
    use num_traits::{Signed, ToPrimitive, Zero};

    type M256 = MpFloat<256>;

    fn cfg() -> PrecisionConfig {
        PrecisionConfig::default()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn vandermonde_examples() {
        assert_eq!(vandermonde(&[1.0, 2.0, 3.0], &cfg()).unwrap(), 2.0);
        assert_eq!(vandermonde(&[0.3], &cfg()).unwrap(), 1.0);
        let v = vandermonde(&[q(7, 100), q(1, 5), q(1, 2)], &cfg()).unwrap();
        // 0.13 · 0.43 · 0.3
        assert_eq!(v, q(1677, 100_000));
    }

    #[test]
    fn degenerate_intensities_rejected() {
        let err = vandermonde(&[0.2, 0.2 + 1e-9, 0.5], &cfg()).unwrap_err();
        assert!(matches!(err, Error::DegenerateIntensities { first: 0, second: 1, .. }));
        assert!(vandermonde(&[0.4, 0.4], &cfg()).is_err());
        let loose = PrecisionConfig::new(256, 0.0).unwrap();
        assert!(vandermonde(&[0.2, 0.2 + 1e-9], &loose).is_ok());
    }

    #[test]
    fn precision_config_validation() {
        assert!(PrecisionConfig::new(32, 1e-6).is_err());
        assert!(PrecisionConfig::new(64, -1.0).is_err());
        assert_eq!(PrecisionConfig::default().significand_bits, 256);
    }

    #[test]
    fn partition_constructors() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert!(Partition::new(vec![2, 0]).is_err());
        let h = Partition::hook(3, 2).unwrap();
        assert_eq!(h.parts(), &[3, 1, 1]);
        assert_eq!(h.as_hook(), Some((3, 2)));
        assert_eq!(Partition::single_row(4).as_hook(), Some((4, 0)));
        assert_eq!(Partition::new(vec![2, 2]).unwrap().as_hook(), None);
        assert_eq!(Partition::single_row(0), Partition::empty());
        assert!(Partition::hook(0, 1).is_err());
        // p(6) = 11, with at most 3 parts: 7
        assert_eq!(Partition::all_of_weight(6, 6).len(), 11);
        assert_eq!(Partition::all_of_weight(6, 3).len(), 7);
        assert_eq!(Partition::all_of_weight(0, 2), vec![Partition::empty()]);
    }

    #[test]
    fn empty_and_full_column_shapes() {
        let mu = [q(1, 3), q(1, 2), q(2, 1)];
        assert_eq!(schur_bialternant(&Partition::empty(), &mu, &cfg()).unwrap(), q(1, 1));
        let col = Partition::new(vec![1, 1, 1]).unwrap();
        assert_eq!(schur_bialternant(&col, &mu, &cfg()).unwrap(), q(1, 3));
    }

    #[test]
    fn two_one_shape_product_form() {
        let lam = Partition::new(vec![2, 1]).unwrap();
        let mu = [q(1, 1), q(2, 1), q(3, 1)];
        assert_eq!(schur_bialternant(&lam, &mu, &cfg()).unwrap(), q(60, 1));
        assert_eq!(schur_tableaux(&lam, &mu).unwrap(), q(60, 1));
        assert_eq!(schur_tableaux(&lam, &[1.0, 1.0, 1.0]).unwrap(), 8.0);
        assert_eq!(count_tableaux(&lam, 3).unwrap(), 8);
    }

    #[test]
    fn single_box_is_power_sum() {
        let mu = [0.1, 0.25, 0.7, 0.9];
        let s = schur_tableaux(&Partition::single_row(1), &mu).unwrap();
        assert!((s - 1.95f64).abs() < 1e-15);
    }

    #[test]
    fn at_ones_examples() {
        let two_one = Partition::new(vec![2, 1]).unwrap();
        assert_eq!(schur_at_ones(&two_one, 3).unwrap(), q(8, 1));
        assert_eq!(schur_at_ones(&Partition::empty(), 5).unwrap(), q(1, 1));
        assert_eq!(schur_at_ones(&Partition::single_row(3), 2).unwrap(), q(4, 1));
        assert_eq!(count_tableaux(&Partition::single_row(3), 2).unwrap(), 4);
        assert!(schur_at_ones(&Partition::new(vec![1, 1, 1]).unwrap(), 2).is_err());
    }

    #[test]
    fn upper_bound_examples() {
        let two_one = Partition::new(vec![2, 1]).unwrap();
        assert_eq!(schur_upper_bound(&two_one, &[1.0, 1.0, 1.0]).unwrap(), 8.0);
        let b = schur_upper_bound(&Partition::single_row(1), &[0.2, 0.5]).unwrap();
        assert!((b - 1.0f64).abs() < 1e-15);
        assert!(b >= 0.7);
        assert_eq!(schur_upper_bound(&Partition::empty(), &[0.3, 0.4]).unwrap(), 1.0);
    }

    #[test]
    fn enumeration_cap_enforced() {
        let big = Partition::single_row(21);
        assert!(matches!(
            schur_tableaux(&big, &[0.1, 0.2]),
            Err(Error::EnumerationTooLarge { .. })
        ));
        assert!(schur_tableaux(&Partition::single_row(1), &[0.1; 7]).is_err());
        assert!(matches!(
            schur_bialternant(&Partition::new(vec![1, 1, 1]).unwrap(), &[0.1, 0.2], &cfg()),
            Err(Error::PartitionTooLong { parts: 3, variables: 2 })
        ));
    }

    #[test]
    fn hook_fast_path_matches_bialternant_exactly() {
        let mu = [q(1, 7), q(2, 5), q(3, 4), q(1, 1)];
        for arm in 1..7 {
            for leg in 0..4 {
                let lam = Partition::hook(arm, leg).unwrap();
                let fast = hook_schur(arm, leg, &mu);
                let slow = schur_bialternant(&lam, &mu, &cfg()).unwrap();
                assert_eq!(fast, slow, "hook ({arm}, {leg})");
            }
        }
        assert_eq!(hook_schur(2, 4, &mu), q(0, 1));
    }

    #[test]
    fn symmetric_function_identities() {
        let mu = [q(1, 3), q(1, 2), q(5, 4)];
        assert_eq!(elementary(3, &mu), mu.iter().cloned().product::<BigRational>());
        assert_eq!(elementary(0, &mu), q(1, 1));
        assert_eq!(elementary(4, &mu), q(0, 1));
        assert_eq!(complete_homogeneous(1, &mu), mu.iter().cloned().sum::<BigRational>());
        // h_2 = e_1^2 − e_2
        let e1 = elementary(1, &mu);
        assert_eq!(complete_homogeneous(2, &mu), e1.clone() * e1 - elementary(2, &mu));
    }

    #[test]
    fn schur_dispatch() {
        let mu = [q(1, 3), q(1, 2), q(5, 4)];
        let lam = Partition::new(vec![2, 2]).unwrap();
        assert_eq!(schur(&lam, &mu, &cfg()).unwrap(), schur_tableaux(&lam, &mu).unwrap());
        assert_eq!(schur(&Partition::empty(), &mu, &cfg()).unwrap(), q(1, 1));
    }

    #[test]
    fn k_ratio_first_value() {
        let mu: Vec<M256> = [0.07, 0.2, 0.5].iter().map(|&x| M256::from_f64_exact(x)).collect();
        let k4 = k_ratio(4, &mu, &cfg()).unwrap();
        let expected = mu.iter().cloned().fold(M256::one(), |a, b| a * b)
            / mu.iter().cloned().fold(M256::zero(), |a, b| a + b);
        assert!((k4.clone() - expected).abs() < M256::epsilon());
        assert!((k4.to_f64().unwrap() - 0.007 / 0.77).abs() < 1e-15);
        assert!(k_ratio(5, &mu, &cfg()).unwrap() > k4);
        assert!(k_ratio(3, &mu, &cfg()).is_err());
    }
}
