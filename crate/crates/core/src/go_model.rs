//! Goel-Okumoto mean value function and its r-th order-statistics form.
//!
//! `m(t) = a(1 - e^{-bt})`, `m_r(t) = [a(1 - e^{-bt})]^r` and the intensity
//! `m_r'(t) = a^r r (1 - e^{-bt})^{r-1} b e^{-bt}`.

use serde::Serialize;

use crate::error::{Error, Result};

/// `1 - e^{-x}` without cancellation for small `x`.
#[inline]
pub fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// `ln(1 - e^{-x})` for `x > 0`, accurate at both ends of the range.
#[inline]
pub fn ln_one_minus_exp_neg(x: f64) -> f64 {
    if x > std::f64::consts::LN_2 {
        (-(-x).exp()).ln_1p()
    } else {
        one_minus_exp_neg(x).ln()
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidTime(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GoParams {
    /// Expected total number of failures.
    a: f64,
    /// Failure detection rate, per unit time.
    b: f64,
}

impl GoParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "a must be finite and > 0, got {a}"
            )));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "b must be finite and > 0, got {b}"
            )));
        }
        Ok(GoParams { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `a(1 - e^{-bt})`.
    pub fn mean_value(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.a * one_minus_exp_neg(self.b * t))
    }

    /// Time at which the mean value reaches `m`, for `0 <= m < a`.
    pub fn inverse_mean_value(&self, m: f64) -> Result<f64> {
        if !(m.is_finite() && m >= 0.0 && m < self.a) {
            return Err(Error::InvalidParameter(format!(
                "mean value {m} outside [0, a={})",
                self.a
            )));
        }
        Ok(-(-m / self.a).ln_1p() / self.b)
    }

    /// Returns parameters with time rescaled: `b` becomes `b / factor`.
    pub fn rescale_time(&self, factor: f64) -> Result<Self> {
        GoParams::new(self.a, self.b / factor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderedGoModel {
    params: GoParams,
    order_r: usize,
}

impl OrderedGoModel {
    pub fn new(params: GoParams, order_r: usize) -> Result<Self> {
        if order_r < 1 || order_r > i32::MAX as usize {
            return Err(Error::InvalidOrder(order_r));
        }
        Ok(OrderedGoModel { params, order_r })
    }

    pub fn params(&self) -> GoParams {
        self.params
    }

    pub fn order_r(&self) -> usize {
        self.order_r
    }

    fn r_i32(&self) -> i32 {
        self.order_r as i32
    }

    /// `a^r`, the asymptote of the ordered mean value function.
    pub fn asymptote(&self) -> f64 {
        self.params.a.powi(self.r_i32())
    }

    pub fn mean_value(&self, t: f64) -> Result<f64> {
        self.params.mean_value(t)
    }

    /// `[a(1 - e^{-bt})]^r`.
    pub fn ordered_mean_value(&self, t: f64) -> Result<f64> {
        Ok(self.params.mean_value(t)?.powi(self.r_i32()))
    }

    pub fn intensity(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        let GoParams { a, b } = self.params;
        let r = self.r_i32();
        let bt = b * t;
        Ok(a.powi(r) * f64::from(r) * one_minus_exp_neg(bt).powi(r - 1) * b * (-bt).exp())
    }
}
