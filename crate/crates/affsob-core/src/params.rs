//! Parameter bundle `(n, p, a, alpha)` for the weighted inequalities.
//!
//! * `n >= 2` is the ambient dimension of the half-space `R_+ x R^{n-1}`.
//! * `p >= 1` is the Lebesgue exponent of the gradient norms; its conjugate
//!   `q = p/(p-1)` is reported as `f64::INFINITY` when `p = 1` rather than
//!   ever being formed by a division that blows up.
//! * `a >= 0` is the exponent of the monomial weight `t^a`.
//! * `alpha` is the optional interpolation exponent of the
//!   Gagliardo-Nirenberg family; when present it must satisfy
//!   `0 < alpha <= (n+a)/(n+a-p)` and `alpha != 1`.
//!
//! The Sobolev-critical exponent `p_a^* = (n+a) p / (n+a-p)` requires
//! `p < n + a`; constructors enforce the unconditional bounds and the
//! mode-specific checks live in [`Params::require_subcritical`] and
//! [`Params::require_alpha`] so that callers that only need exponent
//! formulas (for example limit extrapolation at `p -> 1`) are not blocked
//! by range restrictions that only matter for quadrature.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Params {
    pub n: u32,
    pub p: f64,
    pub a: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub alpha: Option<f64>,
}

impl Params {
    /// Validates the unconditional bounds `n >= 2`, `p >= 1`, `a >= 0`.
    pub fn new(n: u32, p: f64, a: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(alloc::format!("n = {n} but n >= 2 required")));
        }
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::domain(alloc::format!("p = {p} but p >= 1 required")));
        }
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::domain(alloc::format!("a = {a} but a >= 0 required")));
        }
        Ok(Params { n, p, a, alpha: None })
    }

    /// Attaches a Gagliardo-Nirenberg exponent, checking the admissible range
    /// `0 < alpha <= (n+a)/(n+a-p)`, `alpha != 1`.
    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.require_subcritical()?;
        let cap = (self.nd() ) / (self.nd() - self.p);
        if !(alpha > 0.0) || alpha > cap + 1e-12 || alpha == 1.0 {
            return Err(Error::domain(alloc::format!(
                "alpha = {alpha} outside (0, {cap}] \\ {{1}}"
            )));
        }
        self.alpha = Some(alpha);
        Ok(self)
    }

    /// The effective dimension `n + a` that plays the role of `n` throughout.
    #[inline]
    pub fn nd(&self) -> f64 {
        self.n as f64 + self.a
    }

    /// Conjugate exponent `q = p/(p-1)`, `+inf` when `p = 1`.
    #[inline]
    pub fn q(&self) -> f64 {
        if self.p == 1.0 {
            f64::INFINITY
        } else {
            self.p / (self.p - 1.0)
        }
    }

    /// Critical exponent `p_a^* = (n+a) p / (n+a-p)`.
    pub fn p_star(&self) -> Result<f64> {
        self.require_subcritical()?;
        Ok(self.nd() * self.p / (self.nd() - self.p))
    }

    /// Errors unless `p < n + a` (needed by every Sobolev-type statement).
    pub fn require_subcritical(&self) -> Result<()> {
        if self.p < self.nd() {
            Ok(())
        } else {
            Err(Error::domain(alloc::format!(
                "p = {} must be below n + a = {}",
                self.p,
                self.nd()
            )))
        }
    }

    /// Errors unless `p > 1` (the convex-function machinery needs `q` finite).
    pub fn require_p_above_one(&self) -> Result<()> {
        if self.p > 1.0 {
            Ok(())
        } else {
            Err(Error::domain("p > 1 required for this operation"))
        }
    }

    /// Returns `alpha` or a domain error if it was never supplied.
    pub fn require_alpha(&self) -> Result<f64> {
        self.alpha
            .ok_or_else(|| Error::domain("alpha required but not set"))
    }

    /// Spatial dimension `n - 1`.
    #[inline]
    pub fn spatial_dim(&self) -> usize {
        (self.n - 1) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_conjugate() {
        let p = Params::new(3, 2.0, 0.0).unwrap();
        assert_eq!(p.q(), 2.0);
        let p = Params::new(3, 1.5, 0.0).unwrap();
        assert!((1.0 / p.p + 1.0 / p.q() - 1.0).abs() < 1e-15);
        let p = Params::new(3, 1.0, 0.0).unwrap();
        assert!(p.q().is_infinite());
    }

    #[test]
    fn p_star_matches_closed_form() {
        let p = Params::new(3, 2.0, 1.0).unwrap();
        // (n+a)p/(n+a-p) = 4*2/2 = 4
        assert!((p.p_star().unwrap() - 4.0).abs() < 1e-15);
        assert!(p.p_star().unwrap() > p.p);
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(Params::new(1, 2.0, 0.0).is_err());
        assert!(Params::new(3, 0.5, 0.0).is_err());
        assert!(Params::new(3, 2.0, -1.0).is_err());
        assert!(Params::new(3, f64::NAN, 0.0).is_err());
        // p >= n + a: critical exponent undefined
        assert!(Params::new(2, 2.0, 0.0).unwrap().p_star().is_err());
    }

    #[test]
    fn alpha_range() {
        let base = Params::new(3, 2.0, 0.0).unwrap();
        // cap = 3/1 = 3
        assert!(base.with_alpha(2.0).is_ok());
        assert!(base.with_alpha(3.0).is_ok());
        assert!(base.with_alpha(1.0).is_err());
        assert!(base.with_alpha(0.0).is_err());
        assert!(base.with_alpha(3.5).is_err());
    }
}
