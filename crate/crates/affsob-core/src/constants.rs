//! Sharp constants and interpolation exponents of the weighted Sobolev,
//! Gagliardo-Nirenberg and entropy inequalities, euclidean and affine.
//!
//! Every affine constant is evaluated twice: once as the defining product of
//! its derivation chain (the normalizers `a_{n,p}` and `c_{n,p}`, the
//! general-cost sharp constants, and the gauge-volume factor `R_cal`), and
//! once from the fully simplified Gamma-function closed form. The relative
//! gap between the two encodings travels with the value as
//! [`ConstantValue::rel_gap`] and is the module's guard against
//! transcription errors; anything above [`REL_GAP_FLAG`] is suspect.
//!
//! Two formula variants in circulation are kept on purpose so their
//! discrepancies can be measured instead of silently corrected: a weighted
//! half-ball volume whose pi exponent is off by exactly `pi^{(a+1)/2}`
//! (see [`HalfBallMode`]), and a sublinear-case interpolation exponent
//! written with the unweighted dimension (see [`gn_theta_printed`]).
//!
//! At `p = 1` the closed forms degenerate (`q -> infinity`); limit values
//! come from Richardson extrapolation in [`limit_p_to_1`], never from
//! substituting `p = 1` into the `p > 1` formulas.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::params::Params;
use crate::scalar::{self, log_gamma, HalfBallMode};

/// Relative gap between the two encodings of a constant above which the
/// record is considered suspect.
pub const REL_GAP_FLAG: f64 = 1e-10;

/// Identifies one of the sharp constants handled by this module.
///
/// The first six are euclidean / general-cost constants with a single
/// closed form each; the `*Cal` names form the affine family whose records
/// carry both a defining and a simplified evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ConstantName {
    /// Weighted `L^2` Sobolev constant on the half-space (curvature-dimension
    /// route), defined for `n + a > 2`.
    #[cfg_attr(feature = "serde", serde(rename = "S_bgl"))]
    SBgl,
    /// Weighted `L^p` Sobolev constant on the half-space (isoperimetric
    /// route), parametrized by the half-ball volume mode.
    #[cfg_attr(feature = "serde", serde(rename = "S_crs"))]
    SCrs,
    /// Sharp constant of the general-cost weighted `L^p` Sobolev inequality.
    #[cfg_attr(feature = "serde", serde(rename = "S_nguyen"))]
    SNguyen,
    /// Sharp constant of the general-cost Gagliardo-Nirenberg inequality in
    /// the superlinear case `alpha > 1`.
    #[cfg_attr(feature = "serde", serde(rename = "G_nguyen"))]
    GNguyen,
    /// Sharp constant of the general-cost Gagliardo-Nirenberg inequality in
    /// the sublinear case `alpha < 1`.
    #[cfg_attr(feature = "serde", serde(rename = "N_nguyen"))]
    NNguyen,
    /// Sharp constant of the general-cost weighted log-Sobolev inequality.
    #[cfg_attr(feature = "serde", serde(rename = "L_nguyen"))]
    LNguyen,
    /// Gauge-volume factor of the affine reduction; multiplies each
    /// general-cost constant to produce its affine counterpart.
    #[cfg_attr(feature = "serde", serde(rename = "R_cal"))]
    RCal,
    /// Sharp constant of the affine weighted `L^p` Sobolev inequality.
    #[cfg_attr(feature = "serde", serde(rename = "S_cal"))]
    SCal,
    /// Sharp constant of the split-gradient corollary of the affine Sobolev
    /// inequality.
    #[cfg_attr(feature = "serde", serde(rename = "K_cal"))]
    KCal,
    /// Sharp constant of the affine Gagliardo-Nirenberg inequality,
    /// superlinear case.
    #[cfg_attr(feature = "serde", serde(rename = "G_cal"))]
    GCal,
    /// Sharp constant of the affine Gagliardo-Nirenberg inequality,
    /// sublinear case.
    #[cfg_attr(feature = "serde", serde(rename = "N_cal"))]
    NCal,
    /// Sharp constant of the affine weighted log-Sobolev inequality.
    #[cfg_attr(feature = "serde", serde(rename = "L_cal"))]
    LCal,
}

impl ConstantName {
    /// The stable wire name used in JSON output and CLI arguments.
    pub fn wire_name(self) -> &'static str {
        match self {
            ConstantName::SBgl => "S_bgl",
            ConstantName::SCrs => "S_crs",
            ConstantName::SNguyen => "S_nguyen",
            ConstantName::GNguyen => "G_nguyen",
            ConstantName::NNguyen => "N_nguyen",
            ConstantName::LNguyen => "L_nguyen",
            ConstantName::RCal => "R_cal",
            ConstantName::SCal => "S_cal",
            ConstantName::KCal => "K_cal",
            ConstantName::GCal => "G_cal",
            ConstantName::NCal => "N_cal",
            ConstantName::LCal => "L_cal",
        }
    }

    /// All names, in wire order.
    pub fn all() -> [ConstantName; 12] {
        [
            ConstantName::SBgl,
            ConstantName::SCrs,
            ConstantName::SNguyen,
            ConstantName::GNguyen,
            ConstantName::NNguyen,
            ConstantName::LNguyen,
            ConstantName::RCal,
            ConstantName::SCal,
            ConstantName::KCal,
            ConstantName::GCal,
            ConstantName::NCal,
            ConstantName::LCal,
        ]
    }

    /// Whether the name belongs to the affine (double-encoded) family.
    pub fn is_affine(self) -> bool {
        matches!(
            self,
            ConstantName::RCal
                | ConstantName::SCal
                | ConstantName::KCal
                | ConstantName::GCal
                | ConstantName::NCal
                | ConstantName::LCal
        )
    }
}

impl core::fmt::Display for ConstantName {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.wire_name())
    }
}

impl core::str::FromStr for ConstantName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConstantName::all()
            .into_iter()
            .find(|name| name.wire_name() == s)
            .ok_or_else(|| Error::domain(alloc::format!("unknown constant name {s:?}")))
    }
}

/// A sharp constant evaluated through both of its encodings.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstantValue {
    pub name: ConstantName,
    pub params: Params,
    /// Product of the factors that define the constant (normalizers, the
    /// general-cost constant of the matching inequality, gauge volumes).
    pub defining: f64,
    /// The fully simplified Gamma-function closed form.
    pub simplified: f64,
    /// `|defining - simplified| / defining`.
    pub rel_gap: f64,
    /// Set when the value is a `p -> 1` extrapolation limit rather than a
    /// direct evaluation; both encodings then hold the limit value.
    #[cfg_attr(feature = "serde", serde(default))]
    pub limit: bool,
}

impl ConstantValue {
    fn from_pair(name: ConstantName, params: Params, defining: f64, simplified: f64) -> Self {
        ConstantValue {
            name,
            params,
            defining,
            simplified,
            rel_gap: (defining - simplified).abs() / defining,
            limit: false,
        }
    }

    fn from_limit(name: ConstantName, params: Params, value: f64) -> Self {
        ConstantValue {
            name,
            params,
            defining: value,
            simplified: value,
            rel_gap: 0.0,
            limit: true,
        }
    }

    /// Canonical numeric value: the simplified closed form.
    pub fn value(&self) -> f64 {
        self.simplified
    }

    /// Whether the two encodings disagree beyond [`REL_GAP_FLAG`].
    pub fn flagged(&self) -> bool {
        self.rel_gap > REL_GAP_FLAG
    }
}

/// Which branch of the Gagliardo-Nirenberg family an operation refers to:
/// case `a` interpolates with `alpha > 1`, case `b` with `alpha < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum GnCase {
    #[cfg_attr(feature = "serde", serde(rename = "a"))]
    A,
    #[cfg_attr(feature = "serde", serde(rename = "b"))]
    B,
}

impl core::fmt::Display for GnCase {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            GnCase::A => "a",
            GnCase::B => "b",
        })
    }
}

/// Interpolation data of the Gagliardo-Nirenberg family: the exponent
/// `theta` and the auxiliary parameter (`beta` in case a, `gamma` in
/// case b) entering the sharp constants.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GnExponents {
    pub theta: f64,
    pub beta_or_gamma: f64,
}

/// Shared scalar frame for the closed-form evaluations: dimensions, the
/// conjugate exponent, and the weight power, all validated once.
#[derive(Debug, Clone, Copy)]
struct Frame {
    n: u32,
    /// `n` as a float.
    nf: f64,
    /// Spatial dimension `n - 1`.
    sd: f64,
    /// Effective dimension `n + a`.
    m: f64,
    p: f64,
    q: f64,
    a: f64,
}

impl Frame {
    fn new(n: u32, p: f64, a: f64) -> Result<Frame> {
        if n < 2 {
            return Err(Error::domain(alloc::format!("n = {n} but n >= 2 required")));
        }
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::domain(alloc::format!(
                "p = {p} but p > 1 required (p = 1 is served by limit extrapolation)"
            )));
        }
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::domain(alloc::format!("a = {a} but a >= 0 required")));
        }
        let nf = n as f64;
        Ok(Frame {
            n,
            nf,
            sd: nf - 1.0,
            m: nf + a,
            p,
            q: p / (p - 1.0),
            a,
        })
    }

    fn require_subcritical(&self) -> Result<()> {
        if self.p < self.m {
            Ok(())
        } else {
            Err(Error::domain(alloc::format!(
                "p = {} must be below n + a = {}",
                self.p,
                self.m
            )))
        }
    }
}

fn ln(x: f64) -> f64 {
    libm::log(x)
}

/// Sharp constant of the weighted `L^2` Sobolev inequality on the
/// half-space,
/// `S(n,a) = (pi (n+a)(n-2+a))^{-1/2}
///  (2 pi^{(1+a)/2} Gamma(n+a) / (Gamma((1+a)/2) Gamma((n+a)/2)))^{1/(n+a)}`.
pub fn bgl_constant(n: u32, a: f64) -> Result<f64> {
    if n < 2 || !(a >= 0.0) || !a.is_finite() {
        return Err(Error::domain("bgl_constant requires n >= 2, a >= 0"));
    }
    let m = n as f64 + a;
    if !(m > 2.0) {
        return Err(Error::domain(alloc::format!(
            "bgl_constant requires n + a > 2, got {m}"
        )));
    }
    let ln_pi = ln(scalar::PI);
    let front = -0.5 * (ln_pi + ln(m) + ln(m - 2.0));
    let bracket = ln(2.0) + 0.5 * (1.0 + a) * ln_pi + log_gamma(m)?
        - log_gamma(0.5 * (1.0 + a))?
        - log_gamma(0.5 * m)?;
    Ok(libm::exp(front + bracket / m))
}

/// Sharp constant of the weighted `L^p` Sobolev inequality on the
/// half-space,
/// `S(n,p,a) = ((p-1)^{p-1} / ((n+a)(n-p+a)^{p-1}))^{1/p}
///  (Gamma(n+a) / (Gamma((n+a)(p-1)/p + 1) Gamma((n+a)/p) V_+))^{1/(n+a)}`,
/// where `V_+` is the weighted half-ball volume in the selected mode.
pub fn crs_constant(n: u32, p: f64, a: f64, mode: HalfBallMode) -> Result<f64> {
    let f = Frame::new(n, p, a)?;
    f.require_subcritical()?;
    let volume = scalar::weighted_halfball_volume(n, a, mode)?;
    let m = f.m;
    let front = ((p - 1.0) * ln(p - 1.0) - ln(m) - (p - 1.0) * ln(m - p)) / p;
    let bracket = log_gamma(m)?
        - log_gamma(m * (p - 1.0) / p + 1.0)?
        - log_gamma(m / p)?
        - ln(volume);
    Ok(libm::exp(front + bracket / m))
}

/// Log of the family-wide normalization prefactor `p^{1/p} q^{1/q}`.
///
/// The Sobolev constant of the general-cost family carries it explicitly.
/// The closed forms of the interpolation and entropy constants in
/// circulation omit it (to the powers `theta` and `p` respectively), which
/// visibly breaks their equality cases: plugging the stated extremal into
/// both sides leaves a residual gap of exactly `(p^{1/p} q^{1/q})^theta`
/// (interpolation) or `(p^{1/p} q^{1/q})^p` (entropy). The constants
/// produced by this module include the factor; the helper exposes it so a
/// caller can reproduce and measure the circulating variant.
pub fn ln_sharp_prefactor(p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::domain(alloc::format!(
            "prefactor needs finite p > 1, got {p}"
        )));
    }
    let q = p / (p - 1.0);
    Ok(ln(p) / p + ln(q) / q)
}

fn nguyen_sobolev_raw(f: &Frame) -> Result<f64> {
    f.require_subcritical()?;
    let Frame { m, p, .. } = *f;
    let front = ln_sharp_prefactor(p)?
        + ((p - 1.0) * ln(p - 1.0) - ln(m) - (p - 1.0) * ln(m - p)) / p;
    let bracket = log_gamma(m / p)? + log_gamma(m * (p - 1.0) / p + 1.0)? - log_gamma(m)?;
    Ok(libm::exp(front - bracket / m))
}

/// Sharp constant of the general-cost weighted `L^p` Sobolev inequality,
/// `S(n,a,p) = p^{1/p} q^{1/q}
///  ((p-1)^{p-1} / ((n+a)(n+a-p)^{p-1}))^{1/p}
///  (Gamma((n+a)/p) Gamma((n+a)(p-1)/p + 1) / Gamma(n+a))^{-1/(n+a)}`.
///
/// It reduces to [`crs_constant`] through
/// `S(n,a,p) p^{-1/p} q^{-1/q} V_+^{-1/(n+a)} = S(n,p,a)` with the derived
/// half-ball volume.
pub fn nguyen_sobolev_constant(n: u32, p: f64, a: f64) -> Result<f64> {
    nguyen_sobolev_raw(&Frame::new(n, p, a)?)
}

/// Case-side validation plus the scale-covariant exponent formulas. No cap
/// check here: limit extrapolation legitimately evaluates the closed forms
/// at fixed `alpha` while `p` slides toward 1, where the admissible range
/// shrinks past any fixed `alpha > 1`.
fn exponents_raw(f: &Frame, alpha: f64, case: GnCase) -> Result<GnExponents> {
    if !alpha.is_finite() {
        return Err(Error::domain("alpha must be finite"));
    }
    let Frame { m, p, .. } = *f;
    let s1 = alpha * (p - 1.0) + 1.0;
    match case {
        GnCase::A => {
            if !(alpha > 1.0) {
                return Err(Error::domain(alloc::format!(
                    "case a requires alpha > 1, got {alpha}"
                )));
            }
            let denom = m * p - s1 * (m - p);
            if !(denom > 0.0) {
                return Err(Error::domain(alloc::format!(
                    "alpha = {alpha} too large: interpolation denominator {denom} <= 0"
                )));
            }
            Ok(GnExponents {
                theta: m * (alpha - 1.0) / (alpha * denom),
                beta_or_gamma: s1 / (alpha - 1.0),
            })
        }
        GnCase::B => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::domain(alloc::format!(
                    "case b requires 0 < alpha < 1, got {alpha}"
                )));
            }
            Ok(GnExponents {
                theta: m * (1.0 - alpha) / (s1 * (m - alpha * (m - p))),
                beta_or_gamma: s1 / (1.0 - alpha),
            })
        }
    }
}

/// Interpolation exponent `theta` and auxiliary parameter for the
/// Gagliardo-Nirenberg family.
///
/// Case a (`alpha > 1`):
/// `theta = (n+a)(alpha-1) / (alpha ((n+a)p - (alpha p + 1 - alpha)(n+a-p)))`
/// and `beta = (alpha(p-1)+1)/(alpha-1)`.
///
/// Case b (`alpha < 1`):
/// `theta = (n+a)(1-alpha) / ((alpha p + 1 - alpha)((n+a) - alpha((n+a)-p)))`
/// and `gamma = (alpha(p-1)+1)/(1-alpha)`.
///
/// Both exponents satisfy the dilation balance
/// `(n+a)/s_lhs = theta ((n+a)-p)/p + (1-theta)(n+a)/s_rhs` that a scale
/// family forces on any two-norm interpolation inequality; see
/// [`gn_theta_printed`] for the circulating case-b variant that does not.
pub fn gn_exponents(params: &Params, case: GnCase) -> Result<GnExponents> {
    let alpha = params.require_alpha()?;
    let f = Frame::new(params.n, params.p, params.a)?;
    f.require_subcritical()?;
    exponents_raw(&f, alpha, case)
}

/// The case-b exponent as printed in some sources, with denominator factor
/// `n - alpha(n - p)` in place of `(n+a) - alpha((n+a) - p)`.
///
/// The two agree exactly when `a = 0` and diverge otherwise; the variant
/// breaks the dilation balance of the inequality, so it is exposed only for
/// measurement and reporting. Case a has no such discrepancy and returns
/// the same value as [`gn_exponents`].
pub fn gn_theta_printed(params: &Params, case: GnCase) -> Result<f64> {
    let alpha = params.require_alpha()?;
    let f = Frame::new(params.n, params.p, params.a)?;
    f.require_subcritical()?;
    match case {
        GnCase::A => Ok(exponents_raw(&f, alpha, case)?.theta),
        GnCase::B => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::domain(alloc::format!(
                    "case b requires 0 < alpha < 1, got {alpha}"
                )));
            }
            let Frame { nf, m, p, .. } = f;
            let s1 = alpha * (p - 1.0) + 1.0;
            Ok(m * (1.0 - alpha) / (s1 * (nf - alpha * (nf - p))))
        }
    }
}

/// Relative deviation of the printed case-b exponent from the
/// scale-covariant one: zero in case a and at `a = 0`.
pub fn gn_theta_printed_gap(params: &Params, case: GnCase) -> Result<f64> {
    let theta = gn_exponents(params, case)?.theta;
    let printed = gn_theta_printed(params, case)?;
    Ok((theta - printed).abs() / theta)
}

fn nguyen_gn_raw(f: &Frame, alpha: f64, case: GnCase) -> Result<f64> {
    let ex = exponents_raw(f, alpha, case)?;
    let Frame { m, p, q, .. } = *f;
    let theta = ex.theta;
    match case {
        GnCase::A => {
            let beta = ex.beta_or_gamma;
            if !(q * beta - m > 0.0) {
                return Err(Error::domain(alloc::format!(
                    "case a requires q beta > n + a, got q beta = {}",
                    q * beta
                )));
            }
            let first = ln(beta) + p * ln(alpha - 1.0) - ln(m) - (p - 1.0) * ln(q);
            let second = ln((q * beta - m) / (q * beta));
            let third =
                log_gamma(beta)? - log_gamma(beta - m / q)? - log_gamma(m / q + 1.0)?;
            Ok(libm::exp(
                theta * ln_sharp_prefactor(p)?
                    + theta / p * first
                    + second / (alpha * p)
                    + theta / m * third,
            ))
        }
        GnCase::B => {
            let gamma = ex.beta_or_gamma;
            let first = ln(gamma) + p * ln(1.0 - alpha) - ln(m) - (p - 1.0) * ln(q);
            let second = ln(q * gamma / (q * gamma + m));
            let third = log_gamma(gamma + 1.0 + m / q)?
                - log_gamma(gamma + 1.0)?
                - log_gamma(m / q + 1.0)?;
            Ok(libm::exp(
                theta * ln_sharp_prefactor(p)?
                    + theta / p * first
                    + (1.0 - theta) / (alpha * p) * second
                    + theta / m * third,
            ))
        }
    }
}

/// Sharp constant of the general-cost Gagliardo-Nirenberg inequality.
///
/// Case a: `G_{n,a}(alpha,p) = (p^{1/p} q^{1/q})^theta
/// (beta (alpha-1)^p / ((n+a) q^{p-1}))^{theta/p}
/// ((q beta - n - a)/(q beta))^{1/(alpha p)}
/// (Gamma(beta) / (Gamma(beta - (n+a)/q) Gamma((n+a)/q + 1)))^{theta/(n+a)}`.
///
/// Case b: `N_{n,a}(alpha,p) = (p^{1/p} q^{1/q})^theta
/// (gamma (1-alpha)^p / ((n+a) q^{p-1}))^{theta/p}
/// (q gamma/(q gamma + n + a))^{(1-theta)/(alpha p)}
/// (Gamma(gamma+1+(n+a)/q) / (Gamma(gamma+1) Gamma((n+a)/q + 1)))^{theta/(n+a)}`.
///
/// The `(p^{1/p} q^{1/q})^theta` prefactor is required for the stated
/// extremal `(1 + (alpha-1) C)_+^{1/(1-alpha)}` to reach equality; variants
/// in circulation omit it (see [`ln_sharp_prefactor`]). The formula is
/// pinned by a quadrature oracle that plugs the extremal's closed-form
/// level-set integrals into both sides.
pub fn nguyen_gn_constant(params: &Params, case: GnCase) -> Result<f64> {
    let alpha = params.require_alpha()?;
    let f = Frame::new(params.n, params.p, params.a)?;
    f.require_subcritical()?;
    nguyen_gn_raw(&f, alpha, case)
}

fn nguyen_entropy_raw(f: &Frame) -> Result<f64> {
    let Frame { m, p, q, .. } = *f;
    // (p^2/(n+a)) (p/e)^{p-1}; cancelling q (p-1) = p against the
    // prefactor turns ((p-1)/e)^{p-1} q^{p-1} into (p/e)^{p-1}.
    let front = 2.0 * ln(p) - ln(m) + (p - 1.0) * (ln(p) - 1.0);
    Ok(libm::exp(front - p / m * log_gamma((m + q) / q)?))
}

/// Sharp constant of the general-cost weighted log-Sobolev inequality,
/// `L_{n,a}(p) = (p^2/(n+a)) (p/e)^{p-1} Gamma((n+a+q)/q)^{-p/(n+a)}`.
/// Defined for every `p > 1` (no subcritical restriction).
///
/// Equals the circulating form
/// `(p/(n+a)) ((p-1)/e)^{p-1} Gamma((n+a+q)/q)^{-p/(n+a)}` times the
/// normalization `(p^{1/p} q^{1/q})^p = p q^{p-1}`, without which the
/// stated extremal `b exp(-C)` misses equality by exactly that factor
/// inside the logarithm (see [`ln_sharp_prefactor`]).
pub fn nguyen_entropy_constant(n: u32, p: f64, a: f64) -> Result<f64> {
    nguyen_entropy_raw(&Frame::new(n, p, a)?)
}

/// Defining product of the gauge-volume factor: the first line of its
/// derivation, in terms of the centroid-body normalizer `a_{n-1,p}` and the
/// affine-energy normalizer `c_{n-1,p}`.
fn ln_r_defining(f: &Frame) -> Result<f64> {
    let Frame { n, nf, sd, m, p, q, a } = *f;
    let bracket = ln(sd) + ln(q) + log_gamma((m + q) / q)?
        - log_gamma((1.0 + a) / q)?
        - log_gamma((sd + q) / q)?;
    let a_norm = scalar::a_np(n - 1, p)?;
    let c_norm = scalar::c_np(n - 1, p)?;
    Ok(-(1.0 + a) / (p * m) * ln(1.0 + a) - ln(q) / q + bracket / m - ln(p / m) / p
        - sd / (p * m) * ln((nf + p - 1.0) * a_norm)
        - sd / m * ln(c_norm))
}

/// Simplified closed form of the gauge-volume factor: the last line of its
/// derivation, all special-function content reduced to four Gamma values.
fn ln_r_simplified(f: &Frame) -> Result<f64> {
    let Frame { nf, sd, m, p, q, a, .. } = *f;
    let bracket = ln(q) + log_gamma(0.5 * (nf + 1.0))? + log_gamma((m + q) / q)?
        - log_gamma((1.0 + a) / q)?
        - log_gamma((sd + q) / q)?;
    Ok(-ln(q) / q - sd / (2.0 * m) * ln(scalar::PI) - (1.0 + a) / (p * m) * ln(1.0 + a)
        - sd / (p * m) * ln(sd)
        + ln(m / p) / p
        + bracket / m)
}

fn ln_s_simplified(f: &Frame) -> Result<f64> {
    f.require_subcritical()?;
    let Frame { nf, sd, m, p, q, a, .. } = *f;
    let bracket = ln(q) + log_gamma(0.5 * (nf + 1.0))? + log_gamma(m)?
        - log_gamma((1.0 + a) / q)?
        - log_gamma((sd + q) / q)?
        - log_gamma(m / p)?;
    Ok(-sd / (2.0 * m) * ln(scalar::PI) - (1.0 + a) / (p * m) * ln(1.0 + a)
        - sd / (p * m) * ln(sd)
        - ln((m - p) / (p - 1.0)) / q
        + bracket / m)
}

fn ln_g_simplified(f: &Frame, alpha: f64) -> Result<f64> {
    let theta = exponents_raw(f, alpha, GnCase::A)?.theta;
    let Frame { nf, sd, m, p, q, a, .. } = *f;
    let ratio = (-alpha * m + m + alpha * p + q) / (alpha * p + q);
    if !(ratio > 0.0) {
        return Err(Error::domain(alloc::format!(
            "alpha = {alpha} outside the closed-form domain (ratio {ratio} <= 0)"
        )));
    }
    let g1 = p * alpha / (alpha - 1.0) - 1.0;
    let g2 = p * alpha / (alpha - 1.0) - m / q - 1.0;
    if !(g2 > 0.0) {
        return Err(Error::domain(alloc::format!(
            "alpha = {alpha} outside the closed-form domain (Gamma argument {g2} <= 0)"
        )));
    }
    let bracket = ln(q) + log_gamma(0.5 * (nf + 1.0))? + log_gamma(g1)?
        - log_gamma((1.0 + a) / q)?
        - log_gamma(nf / q + 1.0 / p)?
        - log_gamma(g2)?;
    // The leading power of q is -1 once the p^{1/p} q^{1/q} normalization
    // is absorbed: p^{-1/p} q^{-1/q-1} (p^{1/p} q^{1/q}) = q^{-1}.
    Ok(-ln(q) - sd / (2.0 * m) * ln(scalar::PI)
        + ln(alpha - 1.0) / q
        - (1.0 + a) / (p * m) * ln(1.0 + a)
        - sd / (p * m) * ln(sd)
        + ln(alpha * p + q) / p
        + ln(ratio) / (alpha * theta * p)
        + bracket / m)
}

fn ln_n_simplified(f: &Frame, alpha: f64) -> Result<f64> {
    let theta = exponents_raw(f, alpha, GnCase::B)?.theta;
    let Frame { nf, sd, m, p, q, a, .. } = *f;
    // e1 = (1 - theta)/(alpha theta p); the three alpha-dependent powers
    // carry exponents e1 + 1/p, -e1 + 1/q and -e1 respectively.
    let e1 = (1.0 - theta) / (alpha * theta * p);
    let bracket = log_gamma((1.0 + a) / q)? + log_gamma(2.0 - p * alpha / (alpha - 1.0))?
        + log_gamma(nf / q + 1.0 / p)?
        - ln(q)
        - log_gamma(0.5 * (nf + 1.0))?
        - log_gamma(-p * alpha / (alpha - 1.0) + m / q + 2.0)?;
    // The p^{-1/p} q^{-1/q} head cancels exactly against the
    // p^{1/p} q^{1/q} normalization.
    Ok(-sd / (2.0 * m) * ln(scalar::PI)
        - (1.0 + a) / (p * m) * ln(1.0 + a)
        - sd / (p * m) * ln(sd)
        + (e1 + 1.0 / p) * ln(1.0 - alpha * (1.0 - p))
        + (-e1 + 1.0 / q) * ln((1.0 - alpha) / q)
        - e1 * ln(m + (alpha * p + q) / (1.0 - alpha))
        - bracket / m)
}

fn ln_l_simplified(f: &Frame) -> Result<f64> {
    let Frame { nf, sd, m, p, q, a, .. } = *f;
    let bracket = ln(q) + log_gamma(0.5 * (nf + 1.0))?
        - log_gamma((1.0 + a) / q)?
        - log_gamma((sd + q) / q)?;
    // Absorbing the normalization (p^{1/p} q^{1/q})^p = p q^{p-1} turns
    // the head e^{1-p} p^{p-1} q^{2-2p} into e^{1-p} p^p q^{1-p}.
    Ok((1.0 - p) + p * ln(p) - (1.0 + a) / m * ln(1.0 + a) - sd / m * ln(sd)
        + (1.0 - p) * ln(q)
        - sd * p / (2.0 * m) * ln(scalar::PI)
        + p / m * bracket)
}

/// Multiplier turning the affine Sobolev constant into the split-gradient
/// corollary constant:
/// `(1+a)^{(1+a)/(p(n+a))} (n-1)^{(n-1)/(p(n+a))} (n+a)^{-1/p}`.
fn k_factor(m: f64, p: f64, a: f64, sd: f64) -> f64 {
    libm::exp((1.0 + a) / (p * m) * ln(1.0 + a) + sd / (p * m) * ln(sd) - ln(m) / p)
}

/// Evaluates an affine-family constant through both of its encodings.
///
/// `R_cal` and `L_cal` need only `p > 1`; `S_cal` and `K_cal` additionally
/// need `p < n + a`; `G_cal`/`N_cal` need `alpha` in the matching range. At
/// `p = 1` the value is the extrapolated limit (see [`limit_p_to_1`]) and
/// the record carries the `limit` marker; this is available for `S_cal`,
/// `G_cal`, `N_cal`, `L_cal` and, through its explicit `p = 1` multiplier,
/// `K_cal`.
pub fn affine_constant(name: ConstantName, params: &Params) -> Result<ConstantValue> {
    if !name.is_affine() {
        return Err(Error::domain(alloc::format!(
            "affine_constant serves the affine family, not {name}"
        )));
    }
    if params.p == 1.0 {
        let value = match name {
            ConstantName::KCal => {
                let s_limit =
                    limit_p_to_1(ConstantName::SCal, params.n, params.a, params.alpha)?;
                let m = params.nd();
                s_limit * k_factor(m, 1.0, params.a, params.n as f64 - 1.0)
            }
            _ => limit_p_to_1(name, params.n, params.a, params.alpha)?,
        };
        return Ok(ConstantValue::from_limit(name, *params, value));
    }
    let f = Frame::new(params.n, params.p, params.a)?;
    let (defining, simplified) = match name {
        ConstantName::RCal => (
            libm::exp(ln_r_defining(&f)?),
            libm::exp(ln_r_simplified(&f)?),
        ),
        ConstantName::SCal => (
            nguyen_sobolev_raw(&f)? * libm::exp(ln_r_defining(&f)?),
            libm::exp(ln_s_simplified(&f)?),
        ),
        ConstantName::KCal => {
            let factor = k_factor(f.m, f.p, f.a, f.sd);
            (
                nguyen_sobolev_raw(&f)? * libm::exp(ln_r_defining(&f)?) * factor,
                libm::exp(ln_s_simplified(&f)?) * factor,
            )
        }
        ConstantName::GCal => {
            let alpha = params.require_alpha()?;
            require_alpha_cap(&f, alpha)?;
            if !(alpha > 1.0) {
                return Err(Error::domain("G_cal requires alpha > 1"));
            }
            let theta = exponents_raw(&f, alpha, GnCase::A)?.theta;
            let g = nguyen_gn_raw(&f, alpha, GnCase::A)?;
            (
                scalar::powf(g, 1.0 / theta) * libm::exp(ln_r_defining(&f)?),
                libm::exp(ln_g_simplified(&f, alpha)?),
            )
        }
        ConstantName::NCal => {
            let alpha = params.require_alpha()?;
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::domain("N_cal requires 0 < alpha < 1"));
            }
            let theta = exponents_raw(&f, alpha, GnCase::B)?.theta;
            let nval = nguyen_gn_raw(&f, alpha, GnCase::B)?;
            (
                scalar::powf(nval, 1.0 / theta) * libm::exp(ln_r_defining(&f)?),
                libm::exp(ln_n_simplified(&f, alpha)?),
            )
        }
        ConstantName::LCal => (
            nguyen_entropy_raw(&f)? * libm::exp(f.p * ln_r_defining(&f)?),
            libm::exp(ln_l_simplified(&f)?),
        ),
        _ => unreachable!("is_affine filtered the euclidean names"),
    };
    Ok(ConstantValue::from_pair(name, *params, defining, simplified))
}

fn require_alpha_cap(f: &Frame, alpha: f64) -> Result<()> {
    f.require_subcritical()?;
    let cap = f.m / (f.m - f.p);
    if alpha <= cap + 1e-12 {
        Ok(())
    } else {
        Err(Error::domain(alloc::format!(
            "alpha = {alpha} exceeds the admissible bound (n+a)/(n+a-p) = {cap}"
        )))
    }
}

/// Extrapolated `p -> 1` limit of an affine constant, via a three-point
/// Richardson fit with basis `{1, d ln(1/d), d}` at `d = p - 1` in
/// `{1e-3, 1e-4, 1e-5}`. The leading correction of every factor is of
/// `d ln(1/d)` type (for example `q^{-1/q} = 1 - d ln(1/d) + ...`), so this
/// basis clears the model error to `O(d^2 ln^2 d)`.
///
/// Supported names: `S_cal`, `G_cal` (needs `alpha > 1`), `N_cal` (needs
/// `0 < alpha < 1`), `L_cal`. The fixed `alpha` is kept even where it
/// exceeds the `p`-dependent admissible bound, since the closed form stays
/// finite and its limit is the quantity of interest. Reports an error
/// instead of guessing when the three samples do not contract toward the
/// extrapolated value.
pub fn limit_p_to_1(name: ConstantName, n: u32, a: f64, alpha: Option<f64>) -> Result<f64> {
    let eval = |p: f64| -> Result<f64> {
        let f = Frame::new(n, p, a)?;
        match name {
            ConstantName::SCal => Ok(libm::exp(ln_s_simplified(&f)?)),
            ConstantName::GCal => {
                let alpha = alpha
                    .ok_or_else(|| Error::domain("G_cal limit requires alpha"))?;
                if !(alpha > 1.0) {
                    return Err(Error::domain("G_cal limit requires alpha > 1"));
                }
                Ok(libm::exp(ln_g_simplified(&f, alpha)?))
            }
            ConstantName::NCal => {
                let alpha = alpha
                    .ok_or_else(|| Error::domain("N_cal limit requires alpha"))?;
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::domain("N_cal limit requires 0 < alpha < 1"));
                }
                Ok(libm::exp(ln_n_simplified(&f, alpha)?))
            }
            ConstantName::LCal => Ok(libm::exp(ln_l_simplified(&f)?)),
            _ => Err(Error::domain(alloc::format!(
                "p -> 1 limit is defined for S_cal, G_cal, N_cal, L_cal, not {name}"
            ))),
        }
    };
    let deltas = [1e-3, 1e-4, 1e-5];
    let mut rows = alloc::vec::Vec::with_capacity(3);
    let mut values = [0.0; 3];
    for (i, &d) in deltas.iter().enumerate() {
        values[i] = eval(1.0 + d)?;
        rows.push(alloc::vec![1.0, d * ln(1.0 / d), d]);
    }
    let coeffs = Mat::from_rows(&rows)?.solve(values)?;
    let limit = coeffs[0];
    let d01 = (values[0] - values[1]).abs();
    let d12 = (values[1] - values[2]).abs();
    let atol = 1e-12 * values[2].abs().max(1e-300);
    let contracting = d12 <= d01 || d12 <= atol;
    let anchored = (limit - values[2]).abs() <= 4.0 * d12.max(atol);
    if !limit.is_finite() || !(limit > 0.0) || !contracting || !anchored {
        return Err(Error::domain(alloc::format!(
            "p -> 1 extrapolation for {name} did not converge: samples {:?} gave {limit}",
            values
        )));
    }
    Ok(limit)
}
