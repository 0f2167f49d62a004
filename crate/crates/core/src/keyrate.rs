//! Secure key rate from decoy-state bounds.
//!
//! `R = −Q f H2(E) + Q0 + Q1 (1 − H2(e1))`, with the error-correction term subtracted.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default error-correction inefficiency.
pub const DEFAULT_F: f64 = 1.22;

/// Binary entropy in bits, with `0 log 0 = 0`.
pub fn h2<T: Real>(e: &T) -> Result<T> {
    if e.lt_zero() || *e > T::one() {
        return Err(Error::Domain(e.to_f64_lossy()));
    }
    let xlog = |x: T| if x.is_zero() { T::zero() } else { x.clone() * x.ln() };
    let ln2 = T::from_int(2).ln();
    Ok(-(xlog(e.clone()) + xlog(T::one() - e.clone())) / ln2)
}

/// `min(1/2, b1_max / y1_min)`.
pub fn e1_upper<T: Real>(b1_max: &T, y1_min: &T) -> Result<T> {
    if !y1_min.gt_zero() {
        return Err(Error::DegenerateYield(y1_min.to_f64_lossy()));
    }
    let half = T::one() / T::from_int(2);
    let ratio = T::max_of(b1_max.clone(), T::zero()) / y1_min.clone();
    Ok(T::min_of(ratio, half))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeyRateInput<T> {
    /// Overall detection rate `Q(μ)`.
    pub q: T,
    /// Overall error rate `E(μ)`.
    pub e: T,
    /// Vacuum contribution `e^{−μ} y0`.
    pub q0: T,
    /// Single-photon contribution `e^{−μ} μ y1_min`.
    pub q1: T,
    pub e1_upper: T,
    /// Error-correction inefficiency, at least one.
    pub f: T,
}

impl<T: Real> KeyRateInput<T> {
    /// Assembles the input for signal intensity `mu` from the bound outputs.
    ///
    /// `Q1` uses the lower bound on `y1`, the conservative choice.
    pub fn from_bounds(mu: &T, q: T, e: T, y0: &T, y1_min: &T, b1_max: &T, f: T) -> Result<Self> {
        let w = (-mu.clone()).exp();
        let input = KeyRateInput {
            q,
            e,
            q0: w.clone() * y0.clone(),
            q1: w * mu.clone() * T::max_of(y1_min.clone(), T::zero()),
            e1_upper: e1_upper(b1_max, y1_min)?,
            f,
        };
        input.validate()?;
        Ok(input)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: &T| {
            if v.lt_zero() || *v > T::one() {
                Err(Error::Validation(format!("{name} = {} outside [0, 1]", v.to_sci_string(6))))
            } else {
                Ok(())
            }
        };
        unit("Q", &self.q)?;
        unit("E", &self.e)?;
        unit("Q0", &self.q0)?;
        unit("Q1", &self.q1)?;
        let half = T::one() / T::from_int(2);
        if self.e1_upper.lt_zero() || self.e1_upper > half {
            return Err(Error::Validation(format!(
                "e1 bound {} outside [0, 0.5]",
                self.e1_upper.to_sci_string(6)
            )));
        }
        if self.f < T::one() {
            return Err(Error::Validation(format!("f = {} below 1", self.f.to_sci_string(6))));
        }
        Ok(())
    }
}

/// `−Q f H2(E) + Q0 + Q1 (1 − H2(e1))`. Negative means no secure key.
pub fn key_rate<T: Real>(input: &KeyRateInput<T>) -> Result<T> {
    let (ec, privacy) = key_rate_terms(input)?;
    Ok(privacy - ec)
}

/// The same expression with the error-correction term added; diagnostic only.
pub fn key_rate_added_sign<T: Real>(input: &KeyRateInput<T>) -> Result<T> {
    let (ec, privacy) = key_rate_terms(input)?;
    Ok(privacy + ec)
}

fn key_rate_terms<T: Real>(input: &KeyRateInput<T>) -> Result<(T, T)> {
    input.validate()?;
    let ec = input.q.clone() * input.f.clone() * h2(&input.e)?;
    let privacy = input.q0.clone() + input.q1.clone() * (T::one() - h2(&input.e1_upper)?);
    Ok((ec, privacy))
}
