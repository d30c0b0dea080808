//! Test functions on the weighted half-space and their derived
//! functionals.
//!
//! A [`TestFunction`] bundles closures for `f(t,x)`, the t-partial, and
//! the spatial gradient together with decay metadata that drives
//! integrability checks and quadrature placement. The one-off norm
//! operations here integrate directly; batch evaluation of many
//! functionals over one function goes through [`Profile`], which
//! materializes the node table once and reuses it.

pub mod cost;
pub mod families;
pub mod profile;

pub use cost::{CostFn, CostKind};
pub use families::{gaussian, ExtremalFamily, FamilyKind};
pub use profile::{Profile, QuadBudget};

#[cfg(feature = "serde")]
pub use families::{CostSpec, FunctionSpec};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vec3};
use crate::quadrature::{HalfSpaceRule, Scheme};
use crate::rng::CounterRng;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;

/// Scalar field on the half-space; arguments are `(t, x)`.
pub type HalfFn = Arc<dyn Fn(f64, Vec3) -> f64 + Send + Sync>;
/// Spatial-gradient field on the half-space.
pub type HalfGradFn = Arc<dyn Fn(f64, Vec3) -> Vec3 + Send + Sync>;
/// Pointwise predicate used to steer finite-difference sampling away
/// from the non-smooth loci of positive-part and indicator families.
pub type PointPredicate = Arc<dyn Fn(f64, Vec3) -> bool + Send + Sync>;

/// Far-field behaviour of a function (or of its gradient).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay {
    /// `|f| <= K (1 + |y|)^{-s}` with the given `s > 0`.
    Power(f64),
    /// Faster than any polynomial.
    Exponential,
    /// Supported inside `|y| <= R`.
    Compact(f64),
}

impl Decay {
    /// Whether `int |f|^r t^a` converges, for ambient weighted dimension
    /// `nd = n + a`. Power decay needs `r s > n + a` strictly.
    pub fn integrable(self, r: f64, nd: f64) -> Result<()> {
        match self {
            Decay::Power(s) => {
                let have = r * s;
                if have > nd + 1e-9 {
                    Ok(())
                } else {
                    Err(Error::NonIntegrable { decay: have, needed: nd })
                }
            }
            Decay::Exponential | Decay::Compact(_) => Ok(()),
        }
    }
}

/// A smooth (or piecewise-smooth) function on `(0, inf) x R^{n-1}` with
/// analytic first derivatives and decay metadata.
#[derive(Clone)]
pub struct TestFunction {
    n: u32,
    label: String,
    decay: Decay,
    grad_decay: Decay,
    scale: f64,
    f: HalfFn,
    dt: HalfFn,
    grad_x: HalfGradFn,
    smooth_at: PointPredicate,
}

impl core::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("TestFunction")
            .field("n", &self.n)
            .field("label", &self.label)
            .field("decay", &self.decay)
            .field("grad_decay", &self.grad_decay)
            .field("scale", &self.scale)
            .finish()
    }
}

impl TestFunction {
    pub fn new(
        n: u32,
        label: String,
        decay: Decay,
        grad_decay: Decay,
        scale: f64,
        f: HalfFn,
        dt: HalfFn,
        grad_x: HalfGradFn,
    ) -> Result<Self> {
        if !(2..=4).contains(&n) {
            return Err(Error::domain("test functions support n in 2..=4"));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::domain("length scale must be positive and finite"));
        }
        Ok(TestFunction {
            n,
            label,
            decay,
            grad_decay,
            scale,
            f,
            dt,
            grad_x,
            smooth_at: Arc::new(|_, _| true),
        })
    }

    /// Replace the finite-difference sampling predicate.
    pub fn with_smooth_predicate(mut self, pred: PointPredicate) -> Self {
        self.smooth_at = pred;
        self
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn spatial_dim(&self) -> usize {
        self.n as usize - 1
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn decay(&self) -> Decay {
        self.decay
    }

    pub fn grad_decay(&self) -> Decay {
        self.grad_decay
    }

    /// Natural length scale: quadrature maps and finite-difference boxes
    /// are sized relative to this.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn value(&self, t: f64, x: Vec3) -> f64 {
        (self.f)(t, x)
    }

    pub fn dt(&self, t: f64, x: Vec3) -> f64 {
        (self.dt)(t, x)
    }

    pub fn grad_x(&self, t: f64, x: Vec3) -> Vec3 {
        (self.grad_x)(t, x)
    }

    /// Directional derivative `<grad_x f, xi>`; the identity with the
    /// full gradient holds by construction.
    pub fn directional(&self, t: f64, x: Vec3, xi: Vec3) -> f64 {
        linalg::dot(self.grad_x(t, x), xi)
    }

    pub fn smooth_at(&self, t: f64, x: Vec3) -> bool {
        (self.smooth_at)(t, x)
    }

    /// The function multiplied by a constant.
    pub fn scaled(&self, c: f64) -> TestFunction {
        let f = self.f.clone();
        let dt = self.dt.clone();
        let gx = self.grad_x.clone();
        TestFunction {
            n: self.n,
            label: format!("{} * {c}", self.label),
            decay: self.decay,
            grad_decay: self.grad_decay,
            scale: self.scale,
            f: Arc::new(move |t, x| c * f(t, x)),
            dt: Arc::new(move |t, x| c * dt(t, x)),
            grad_x: Arc::new(move |t, x| linalg::scale(gx(t, x), c)),
            smooth_at: self.smooth_at.clone(),
        }
    }

    /// Quadrature rule sized for this function: compactly supported
    /// functions get an exact-box tensor grid, decaying ones the
    /// unbounded cube map.
    pub fn rule(&self, a: f64, node_budget: usize) -> HalfSpaceRule {
        let mut rule = HalfSpaceRule::new(self.n, a);
        rule.node_budget = node_budget;
        match self.decay {
            Decay::Compact(r) => {
                rule.scheme = Scheme::TensorGauss;
                rule.truncation_radius = r * 1.02;
            }
            _ => {
                rule.scheme = Scheme::MapToCube;
                rule.truncation_radius = 4.0 * self.scale;
            }
        }
        rule
    }
}

/// Weighted Lebesgue norm `||f||_{L^r_omega}`.
pub fn weighted_norm(f: &TestFunction, r: f64, a: f64) -> Result<f64> {
    if !(r >= 1.0) {
        return Err(Error::domain("norm exponent r must be >= 1"));
    }
    let nd = f.n() as f64 + a;
    f.decay().integrable(r, nd)?;
    let rule = f.rule(a, default_norm_budget(f.n()));
    let integral = rule.integrate(decay_hint(f.decay(), r), |t, x| {
        libm::pow(f.value(t, x).abs(), r)
    })?;
    Ok(libm::pow(integral.value, 1.0 / r))
}

/// Weighted L^p norm of the t-partial.
pub fn dt_norm(f: &TestFunction, p: f64, a: f64) -> Result<f64> {
    grad_component_norm(f, p, a, |f, t, x| f.dt(t, x))
}

/// Weighted L^p norm of the directional derivative along a unit spatial
/// direction.
pub fn directional_norm(f: &TestFunction, xi: Vec3, p: f64, a: f64) -> Result<f64> {
    let len = linalg::norm(xi);
    if !((len - 1.0).abs() <= 1e-8) {
        return Err(Error::domain("direction must be a unit vector"));
    }
    grad_component_norm(f, p, a, move |f, t, x| f.directional(t, x, xi))
}

/// Weighted L^p norm of the full spatial gradient magnitude.
pub fn full_spatial_norm(f: &TestFunction, p: f64, a: f64) -> Result<f64> {
    grad_component_norm(f, p, a, |f, t, x| linalg::norm(f.grad_x(t, x)))
}

fn grad_component_norm<G>(f: &TestFunction, p: f64, a: f64, g: G) -> Result<f64>
where
    G: Fn(&TestFunction, f64, Vec3) -> f64,
{
    if !(p >= 1.0) {
        return Err(Error::domain("norm exponent p must be >= 1"));
    }
    let nd = f.n() as f64 + a;
    f.grad_decay().integrable(p, nd)?;
    let rule = f.rule(a, default_norm_budget(f.n()));
    let integral = rule.integrate(decay_hint(f.grad_decay(), p), |t, x| {
        libm::pow(g(f, t, x).abs(), p)
    })?;
    Ok(libm::pow(integral.value, 1.0 / p))
}

fn default_norm_budget(n: u32) -> usize {
    match n {
        2 => 16_384,
        3 => 65_536,
        _ => 160_000,
    }
}

/// Decay rate of `|f|^r` handed to the quadrature integrability guard;
/// compact and exponential tails are reported as safely integrable.
fn decay_hint(decay: Decay, r: f64) -> f64 {
    match decay {
        Decay::Power(s) => r * s,
        Decay::Exponential | Decay::Compact(_) => f64::INFINITY,
    }
}

/// Outcome of the analytic-versus-central-difference derivative check.
#[derive(Debug, Clone, Copy)]
pub struct FiniteDiffReport {
    /// Points that passed the smoothness predicate and were checked.
    pub checked: usize,
    /// Worst relative discrepancy over all checked components.
    pub max_rel: f64,
}

/// Compare analytic derivatives against central differences at random
/// interior points (step `1e-4 * scale`), skipping points the family
/// marks as too close to a non-smooth locus. Relative error is measured
/// against the local gradient magnitude.
pub fn finite_diff_check(f: &TestFunction, seed: u64, target: usize) -> Result<FiniteDiffReport> {
    let rng = CounterRng::new(seed, 0xfd);
    let h = 1e-4 * f.scale();
    let d = f.spatial_dim();
    let mut checked = 0usize;
    let mut max_rel: f64 = 0.0;
    let mut draw = 0u64;
    while checked < target && draw < 40 * target as u64 {
        let base = 8 * draw;
        draw += 1;
        let t = rng.range_at(base, 0.15, 1.6) * f.scale();
        let mut x = [0.0; 3];
        for (j, xj) in x.iter_mut().enumerate().take(d) {
            *xj = rng.range_at(base + 1 + j as u64, -1.6, 1.6) * f.scale();
        }
        if !f.smooth_at(t, x) {
            continue;
        }
        let an_t = f.dt(t, x);
        let an_x = f.grad_x(t, x);
        // scale for the relative comparison: local first-derivative size
        let grad_scale = an_t.abs().max(linalg::norm(an_x)).max(1e-8);

        let fd_t = (f.value(t + h, x) - f.value(t - h, x)) / (2.0 * h);
        max_rel = max_rel.max((fd_t - an_t).abs() / grad_scale);
        for j in 0..d {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let fd = (f.value(t, xp) - f.value(t, xm)) / (2.0 * h);
            max_rel = max_rel.max((fd - an_x[j]).abs() / grad_scale);
        }
        checked += 1;
    }
    if checked < target {
        return Err(Error::domain(format!(
            "could not place {target} finite-difference points ({checked} accepted); \
             smoothness predicate rejects too much of the sampling box"
        )));
    }
    Ok(FiniteDiffReport { checked, max_rel })
}

/// Pull a function back along the block map `A = diag(lambda, B)`:
/// `f_A(t, x) = f(lambda t, B x)`.
pub fn affine_pullback(f: &TestFunction, lambda: f64, b: &Mat) -> Result<TestFunction> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::domain("pullback needs lambda > 0"));
    }
    if b.dim() != f.spatial_dim() {
        return Err(Error::domain("pullback block dimension mismatch"));
    }
    let b_inv = b.inverse()?; // rejects singular B
    let stretch = inverse_stretch_bound(lambda, &b_inv);
    let decay = match f.decay() {
        Decay::Compact(r) => Decay::Compact(r * stretch),
        other => other,
    };
    let grad_decay = match f.grad_decay() {
        Decay::Compact(r) => Decay::Compact(r * stretch),
        other => other,
    };
    let (f0, dt0, gx0, pred0) = (f.f.clone(), f.dt.clone(), f.grad_x.clone(), f.smooth_at.clone());
    let b_val = b.clone();
    let b_dt = b.clone();
    let b_gx = b.clone();
    let b_pred = b.clone();
    let out = TestFunction {
        n: f.n(),
        label: format!("{} o diag({lambda}, B)", f.label()),
        decay,
        grad_decay,
        scale: f.scale() * inverse_scale_hint(lambda, &b_inv),
        f: Arc::new(move |t, x| f0(lambda * t, b_val.matvec(x))),
        dt: Arc::new(move |t, x| lambda * dt0(lambda * t, b_dt.matvec(x))),
        grad_x: Arc::new(move |t, x| {
            let g = gx0(lambda * t, b_gx.matvec(x));
            b_gx.transpose_matvec(g)
        }),
        smooth_at: Arc::new(move |t, x| pred0(lambda * t, b_pred.matvec(x))),
    };
    Ok(out)
}

/// Conservative bound on how much `diag(lambda, B)^{-1}` can stretch a
/// vector: used to enlarge support radii and length scales under
/// pullback.
fn frobenius(m: &Mat) -> f64 {
    let mut fro = 0.0;
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            fro += m.get(i, j) * m.get(i, j);
        }
    }
    libm::sqrt(fro)
}

/// Safe upper bound on how far the pullback stretches a support set:
/// the Frobenius norm dominates the operator norm.
fn inverse_stretch_bound(lambda: f64, b_inv: &Mat) -> f64 {
    frobenius(b_inv).max(1.0 / lambda).max(1e-12)
}

/// Typical rescaling of lengths, for the node-concentration hint; the
/// rms singular value keeps an identity pullback an exact no-op.
fn inverse_scale_hint(lambda: f64, b_inv: &Mat) -> f64 {
    let rms = frobenius(b_inv) / libm::sqrt(b_inv.dim() as f64);
    rms.max(1.0 / lambda).max(1e-12)
}

#[cfg(test)]
mod tests;
