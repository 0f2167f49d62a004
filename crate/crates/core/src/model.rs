//! Channel model, validated inputs and forward synthesis of detection data.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Yield model `q_n = A·(1 − (1 − η)^n) + B`.
///
/// The same shape describes error products `b_n = y_n e_n` with `A = e_det`,
/// `B = p_dark / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams<T> {
    pub a: T,
    pub b: T,
    pub eta: T,
}

impl<T: Real> ChannelParams<T> {
    /// Validated constructor: `0 ≤ A ≤ 1` and `0 ≤ B ≤ η ≤ 1/10`.
    pub fn new(a: T, b: T, eta: T) -> Result<Self> {
        let p = ChannelParams { a, b, eta };
        p.validate()?;
        Ok(p)
    }

    /// Skips the domain check; extremality guarantees no longer apply.
    pub fn new_unchecked(a: T, b: T, eta: T) -> Self {
        ChannelParams { a, b, eta }
    }

    /// Detection model with unit gain and dark-count offset.
    pub fn for_yields(eta: T, p_dark: T) -> Result<Self> {
        Self::new(T::one(), p_dark, eta)
    }

    /// Error-product model `Q E = e_det (1 − e^{−ημ}) + p_dark / 2`.
    pub fn for_error_products(eta: T, e_det: T, p_dark: T) -> Result<Self> {
        Self::new(e_det, p_dark / T::from_int(2), eta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_domain() {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "channel parameters outside 0 <= A <= 1, 0 <= B <= eta <= 1/10 (A = {}, B = {}, eta = {})",
                self.a.to_sci_string(6),
                self.b.to_sci_string(6),
                self.eta.to_sci_string(6)
            )))
        }
    }

    pub fn in_domain(&self) -> bool {
        let zero = T::zero();
        let tenth = T::one() / T::from_int(10);
        self.a >= zero
            && self.a <= T::one()
            && self.b >= zero
            && self.b <= self.eta
            && self.eta <= tenth
    }

    /// Vacuum yield `q_0 = B`.
    pub fn vacuum_yield(&self) -> T {
        self.b.clone()
    }
}

/// Ordered decoy intensities together with the vacuum yield.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensitySet<T> {
    mu: Vec<T>,
    y0: T,
}

impl<T: Real> IntensitySet<T> {
    pub fn new(mu: Vec<T>, y0: T) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::Validation("at least one intensity is required".into()));
        }
        if !mu[0].gt_zero() {
            return Err(Error::Validation(format!(
                "intensities must be positive, got {}",
                mu[0].to_sci_string(6)
            )));
        }
        if let Some(i) = mu.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Validation(format!(
                "intensities must be strictly increasing (#{} = {} is followed by {})",
                i,
                mu[i].to_sci_string(6),
                mu[i + 1].to_sci_string(6)
            )));
        }
        if y0 < T::zero() || y0 > T::one() {
            return Err(Error::Validation(format!(
                "vacuum yield must lie in [0, 1], got {}",
                y0.to_sci_string(6)
            )));
        }
        Ok(IntensitySet { mu, y0 })
    }

    pub fn mu(&self) -> &[T] {
        &self.mu
    }

    pub fn y0(&self) -> &T {
        &self.y0
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// True iff the largest intensity is at most one.
    pub fn all_le_one(&self) -> bool {
        self.mu.last().is_none_or(|m| *m <= T::one())
    }
}

/// Measured detection rates `Q_i` and optional error rates `E_i`, one per intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord<T> {
    pub q: Vec<T>,
    pub e: Option<Vec<T>>,
}

impl<T: Real> MeasurementRecord<T> {
    pub fn new(set: &IntensitySet<T>, q: Vec<T>, e: Option<Vec<T>>) -> Result<Self> {
        if q.len() != set.len() {
            return Err(Error::Validation(format!(
                "{} detection rates for {} intensities",
                q.len(),
                set.len()
            )));
        }
        if let Some(i) = q.iter().position(|x| *x < T::zero() || *x > T::one()) {
            return Err(Error::Validation(format!(
                "detection rate #{i} = {} outside [0, 1]",
                q[i].to_sci_string(6)
            )));
        }
        if let Some(e) = &e {
            if e.len() != set.len() {
                return Err(Error::Validation(format!(
                    "{} error rates for {} intensities",
                    e.len(),
                    set.len()
                )));
            }
            let half = T::one() / T::from_int(2);
            if let Some(i) = e.iter().position(|x| *x < T::zero() || *x > half) {
                return Err(Error::Validation(format!(
                    "error rate #{i} = {} outside [0, 0.5]",
                    e[i].to_sci_string(6)
                )));
            }
        }
        Ok(MeasurementRecord { q, e })
    }
}

/// Which constraint family a right-hand side feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// `e^{μ} (Q − e^{−μ} y0)`
    Yields,
    /// `e^{μ} (Q E − ½ e^{−μ} y0)`
    ErrorProducts,
}

/// `A (1 − (1 − η)^n) + B`.
pub fn yield_q<T: Real>(n: usize, p: &ChannelParams<T>) -> T {
    let keep = num_traits::pow(T::one() - p.eta.clone(), n);
    p.a.clone() * (T::one() - keep) + p.b.clone()
}

/// `e^{−μ} Σ_{n≥1} μ^n/n! q_n` in closed form: `A (1 − e^{−ημ}) + B (1 − e^{−μ})`.
pub fn synth_qplus<T: Real>(mu: &T, p: &ChannelParams<T>) -> T {
    let one = T::one();
    p.a.clone() * (one.clone() - (-(p.eta.clone() * mu.clone())).exp())
        + p.b.clone() * (one - (-mu.clone()).exp())
}

/// `Q(μ) E(μ) = e_det (1 − e^{−ημ}) + p_dark / 2`.
pub fn synth_error_rhs<T: Real>(mu: &T, e_det: &T, p_dark: &T, eta: &T) -> T {
    e_det.clone() * (T::one() - (-(eta.clone() * mu.clone())).exp())
        + p_dark.clone() / T::from_int(2)
}

/// Constraint right-hand sides `e^{μ_i} Q_+(μ_i)` (or the error-product analogue).
pub fn to_constraint_rhs<T: Real>(
    rec: &MeasurementRecord<T>,
    set: &IntensitySet<T>,
    kind: ConstraintKind,
) -> Result<Vec<T>> {
    let vacuum_share = match kind {
        ConstraintKind::Yields => set.y0().clone(),
        ConstraintKind::ErrorProducts => set.y0().clone() / T::from_int(2),
    };
    let errors = match kind {
        ConstraintKind::Yields => None,
        ConstraintKind::ErrorProducts => Some(rec.e.as_ref().ok_or_else(|| {
            Error::Validation("error-product analysis needs error rates".into())
        })?),
    };
    set.mu()
        .iter()
        .enumerate()
        .map(|(i, mu)| {
            let detected = match errors {
                Some(e) => rec.q[i].clone() * e[i].clone(),
                None => rec.q[i].clone(),
            };
            let plus = detected - (-mu.clone()).exp() * vacuum_share.clone();
            if plus.lt_zero() {
                return Err(Error::NegativeQPlus {
                    index: i,
                    value: plus.to_f64_lossy(),
                });
            }
            Ok(mu.exp() * plus)
        })
        .collect()
}

/// Forward-synthesized measurement data for a known channel.
#[derive(Debug, Clone)]
pub struct Synthesis<T> {
    pub set: IntensitySet<T>,
    pub record: MeasurementRecord<T>,
    /// Non-vacuum detection rates `Q_+(μ_i)`.
    pub qplus: Vec<T>,
    pub notes: Vec<String>,
}

/// Error model `(e_det, p_dark)` used to synthesize `E(μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorModel<T> {
    pub e_det: T,
    pub p_dark: T,
}

/// Synthesizes `Q(μ_i)` (and `E(μ_i)` when an error model is supplied) for a channel
/// without eavesdropping, with vacuum yield `y0 = q_0 = B`.
///
/// Yields are clamped to one where the model exceeds it.
pub fn synthesize<T: Real>(
    mu: Vec<T>,
    params: &ChannelParams<T>,
    errors: Option<&ErrorModel<T>>,
) -> Result<Synthesis<T>> {
    let y0 = params.vacuum_yield();
    let set = IntensitySet::new(mu, y0.clone())?;
    let mut notes = Vec::new();
    let mut qplus = Vec::with_capacity(set.len());
    let mut q = Vec::with_capacity(set.len());
    for mu in set.mu() {
        let (plus, clamped) = clamped_qplus(mu, params);
        if clamped && notes.is_empty() {
            notes.push(
                "model yield exceeds one for large photon numbers; synthesized with q_n clamped to 1"
                    .to_owned(),
            );
        }
        q.push(plus.clone() + (-mu.clone()).exp() * y0.clone());
        qplus.push(plus);
    }
    let e = errors.map(|em| {
        set.mu()
            .iter()
            .zip(&q)
            .map(|(mu, qi)| synth_error_rhs(mu, &em.e_det, &em.p_dark, &params.eta) / qi.clone())
            .collect()
    });
    let record = MeasurementRecord::new(&set, q, e)?;
    Ok(Synthesis {
        set,
        record,
        qplus,
        notes,
    })
}

/// `Q_+(μ)` with `q_n` replaced by `min(q_n, 1)`; the flag reports whether the clamp is active.
pub fn clamped_qplus<T: Real>(mu: &T, p: &ChannelParams<T>) -> (T, bool) {
    let closed = synth_qplus(mu, p);
    let Some(first) = first_clamped_index(p) else {
        return (closed, false);
    };
    // ln(μ^n / n!) by Stirling; skip the correction once it is far below working precision.
    let n = first as f64;
    let mu_f = mu.to_f64_lossy();
    let log_term = n * mu_f.ln() - (n * n.ln() - n + 0.5 * (2.0 * std::f64::consts::PI * n).ln());
    let floor = closed.to_f64_lossy().max(f64::MIN_POSITIVE).ln()
        - (T::SIGNIFICAND_BITS as f64 + 64.0) * std::f64::consts::LN_2;
    if log_term < floor {
        return (closed, true);
    }
    let mut term = (-mu.clone()).exp();
    for k in 1..=first {
        term = term * mu.clone() / T::from_int(k);
    }
    let stop = T::epsilon() * T::epsilon() * closed.clone().abs();
    let mut correction = T::zero();
    let mut k = first;
    loop {
        let excess = yield_q(k, p) - T::one();
        correction = correction + term.clone() * excess;
        k += 1;
        term = term * mu.clone() / T::from_int(k);
        if term < stop || term.is_zero() {
            break;
        }
    }
    (closed - correction, true)
}

/// Smallest `n` with `q_n > 1`, if any.
fn first_clamped_index<T: Real>(p: &ChannelParams<T>) -> Option<usize> {
    let excess = p.a.clone() + p.b.clone() - T::one();
    if !excess.gt_zero() || !p.eta.gt_zero() || !p.a.gt_zero() {
        return None;
    }
    // (1 − η)^n < (A + B − 1) / A
    let target = excess / p.a.clone();
    let guess = if p.eta >= T::one() || target >= T::one() {
        1.0
    } else {
        (target.ln() / (T::one() - p.eta.clone()).ln()).to_f64_lossy()
    };
    let mut n = guess.max(1.0).floor() as usize;
    while n > 1 && yield_q(n - 1, p) > T::one() {
        n -= 1;
    }
    while yield_q(n, p) <= T::one() {
        n += 1;
    }
    Some(n)
}
