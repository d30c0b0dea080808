//! Closed-form function families: the equality cases of each inequality
//! plus generic bump shapes used as non-extremal probes.
//!
//! The decaying families all share one skeleton: an affine anisotropic
//! gauge `g(t,x) = |lambda t|^q + |B(x - x0)|^q` composed with a scalar
//! profile `phi`. The general-norm families replace the gauge by a
//! caller-supplied cost `C(lambda t, lambda (x - x0))`. Profiles and
//! gauges carry analytic derivatives so every family yields exact
//! first-order data.

use super::cost::CostFn;
use super::{Decay, PointPredicate, TestFunction};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vec3};
use crate::params::Params;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;

/// Which equality family to instantiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// `c (1 + g)^{-(n+a-p)/p}`: equality case of the affine Sobolev
    /// inequality.
    Sobolev,
    /// `c (1 + (alpha-1) g)^{1/(1-alpha)}`, `alpha > 1`: interpolation
    /// case with decaying tails.
    GnA,
    /// Same profile with `alpha < 1`: compactly supported positive part.
    GnB,
    /// `c exp(-g)`: equality case of the entropy inequality.
    Entropy,
    /// `c (1 + C(lambda t, lambda (x-x0)))^{-(n+a-p)/p}` for a general
    /// q-homogeneous cost `C`.
    NguyenHpa,
    /// `c (1 + (alpha-1) C(...))_+^{1/(1-alpha)}`.
    NguyenHalpha,
    /// Mollified ball indicator: the p = 1 equality shape with a quintic
    /// smoothstep shell of width `eps`.
    IndicatorSmoothed,
}

impl FamilyKind {
    pub fn tag(self) -> &'static str {
        match self {
            FamilyKind::Sobolev => "sobolev_extremal",
            FamilyKind::GnA => "gn_a_extremal",
            FamilyKind::GnB => "gn_b_extremal",
            FamilyKind::Entropy => "entropy_extremal",
            FamilyKind::NguyenHpa => "nguyen_h_pa",
            FamilyKind::NguyenHalpha => "nguyen_h_alpha",
            FamilyKind::IndicatorSmoothed => "indicator_smoothed",
        }
    }
}

/// Parameter pack for one family instance.
#[derive(Debug, Clone)]
pub struct ExtremalFamily {
    pub kind: FamilyKind,
    pub params: Params,
    /// Overall amplitude; any nonzero real.
    pub c: f64,
    /// t-block scaling; any nonzero real (only |lambda| enters).
    pub lambda: f64,
    /// Spatial block `B` (invertible, `(n-1) x (n-1)`).
    pub b: Mat,
    /// Spatial translation.
    pub x0: Vec3,
    /// Shell width for the mollified indicator.
    pub eps: Option<f64>,
    /// Cost function for the general-norm families.
    pub cost: Option<CostFn>,
}

impl ExtremalFamily {
    /// Family with default amplitude/scaling: `c = 1`, `lambda = 1`,
    /// `B = I`, `x0 = 0`.
    pub fn plain(kind: FamilyKind, params: Params) -> Result<Self> {
        Ok(ExtremalFamily {
            kind,
            b: Mat::identity(params.spatial_dim())?,
            params,
            c: 1.0,
            lambda: 1.0,
            x0: [0.0; 3],
            eps: None,
            cost: None,
        })
    }

    pub fn with_affine(mut self, c: f64, lambda: f64, b: Mat, x0: Vec3) -> Self {
        self.c = c;
        self.lambda = lambda;
        self.b = b;
        self.x0 = x0;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = Some(eps);
        self
    }

    pub fn with_cost(mut self, cost: CostFn) -> Self {
        self.cost = Some(cost);
        self
    }

    /// Instantiate the family as a concrete test function.
    pub fn build(&self) -> Result<TestFunction> {
        let p = &self.params;
        if self.c == 0.0 || !self.c.is_finite() {
            return Err(Error::domain("amplitude c must be nonzero and finite"));
        }
        if self.lambda == 0.0 || !self.lambda.is_finite() {
            return Err(Error::domain("scaling lambda must be nonzero and finite"));
        }
        if self.b.dim() != p.spatial_dim() {
            return Err(Error::domain(format!(
                "B must be {0} x {0} for n = {1}",
                p.spatial_dim(),
                p.n
            )));
        }
        let b_inv = self.b.inverse()?;
        match self.kind {
            FamilyKind::Sobolev => {
                p.require_p_above_one()?;
                p.require_subcritical()?;
                let e = (p.nd() - p.p) / p.p;
                let profile = Profile1d::rational(self.c, e);
                self.gauge_family(profile, Decay::Power(p.q() * e), Decay::Power(p.q() * e + 1.0))
            }
            FamilyKind::GnA => {
                p.require_p_above_one()?;
                p.require_subcritical()?;
                let alpha = p.require_alpha()?;
                if !(alpha > 1.0) {
                    return Err(Error::domain("the decaying interpolation family needs alpha > 1"));
                }
                let profile = Profile1d::positive_part(self.c, alpha);
                let s = p.q() / (alpha - 1.0);
                self.gauge_family(profile, Decay::Power(s), Decay::Power(s + 1.0))
            }
            FamilyKind::GnB => {
                p.require_p_above_one()?;
                p.require_subcritical()?;
                let alpha = p.require_alpha()?;
                if !(0.0 < alpha && alpha < 1.0) {
                    return Err(Error::domain("the compact interpolation family needs alpha in (0,1)"));
                }
                let profile = Profile1d::positive_part(self.c, alpha);
                let g0 = 1.0 / (1.0 - alpha);
                let r = self.support_radius_gauge(g0, &b_inv);
                self.gauge_family(profile, Decay::Compact(r), Decay::Compact(r))
            }
            FamilyKind::Entropy => {
                p.require_p_above_one()?;
                let profile = Profile1d::exponential(self.c);
                self.gauge_family(profile, Decay::Exponential, Decay::Exponential)
            }
            FamilyKind::NguyenHpa => {
                p.require_p_above_one()?;
                p.require_subcritical()?;
                let cost = self.require_cost()?;
                let e = (p.nd() - p.p) / p.p;
                let profile = Profile1d::rational(self.c, e);
                self.cost_family(profile, cost, Decay::Power(p.q() * e), Decay::Power(p.q() * e + 1.0))
            }
            FamilyKind::NguyenHalpha => {
                p.require_p_above_one()?;
                p.require_subcritical()?;
                let cost = self.require_cost()?;
                let alpha = p.require_alpha()?;
                if alpha == 1.0 {
                    return Err(Error::domain("alpha must differ from 1"));
                }
                let profile = Profile1d::positive_part(self.c, alpha);
                if alpha > 1.0 {
                    let s = p.q() / (alpha - 1.0);
                    self.cost_family(profile, cost, Decay::Power(s), Decay::Power(s + 1.0))
                } else {
                    let g0 = 1.0 / (1.0 - alpha);
                    let r = self.support_radius_cost(g0, cost)?;
                    self.cost_family(profile, cost, Decay::Compact(r), Decay::Compact(r))
                }
            }
            FamilyKind::IndicatorSmoothed => self.indicator(&b_inv),
        }
    }

    fn require_cost(&self) -> Result<&CostFn> {
        let cost = self
            .cost
            .as_ref()
            .ok_or_else(|| Error::domain("this family needs a cost function"))?;
        if cost.ambient_dim() != self.params.n {
            return Err(Error::domain("cost ambient dimension must match n"));
        }
        if (cost.degree() - self.params.q()).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "cost homogeneity {} must equal the conjugate exponent q = {}",
                cost.degree(),
                self.params.q()
            )));
        }
        Ok(cost)
    }

    /// Support radius of `{ |lambda t|^q + |B(x-x0)|^q <= g0 }` in the
    /// original coordinates, with a small safety margin.
    fn support_radius_gauge(&self, g0: f64, b_inv: &Mat) -> f64 {
        let reach = libm::pow(g0, 1.0 / self.params.q());
        let stretch = super::inverse_stretch_bound(self.lambda.abs(), b_inv);
        reach * stretch + linalg::norm(self.x0) + 1e-9
    }

    /// Support radius of `{ C(lambda t, lambda (x-x0)) <= g0 }`, via a
    /// grid lower bound on the cost's norm over the unit sphere.
    fn support_radius_cost(&self, g0: f64, cost: &CostFn) -> Result<f64> {
        let mut nmin = f64::INFINITY;
        let steps = 64usize;
        // coarse sphere scan; 0.9 safety factor below compensates for
        // the grid missing the true minimizer
        for i in 0..=steps {
            let th = core::f64::consts::PI * i as f64 / steps as f64;
            for j in 0..2 * steps {
                let ph = core::f64::consts::PI * j as f64 / steps as f64;
                let y = match self.params.n {
                    2 => [libm::cos(th), libm::sin(th), 0.0],
                    _ => [
                        libm::cos(th),
                        libm::sin(th) * libm::cos(ph),
                        libm::sin(th) * libm::sin(ph),
                    ],
                };
                nmin = nmin.min(cost.norm(y[0], [y[1], y[2], 0.0]));
                if self.params.n == 2 {
                    break;
                }
            }
        }
        if !(nmin > 0.0) {
            return Err(Error::Degenerate("cost norm vanishes on the sphere".into()));
        }
        let reach = libm::pow(g0 * cost.degree(), 1.0 / cost.degree()) / (0.9 * nmin);
        Ok(reach / self.lambda.abs() + linalg::norm(self.x0) + 1e-9)
    }

    /// Assemble `phi(|lambda t|^q + |B(x-x0)|^q)` with analytic
    /// derivatives.
    fn gauge_family(
        &self,
        profile: Profile1d,
        decay: Decay,
        grad_decay: Decay,
    ) -> Result<TestFunction> {
        let q = self.params.q();
        let lam = self.lambda.abs();
        let x0 = self.x0;
        let lam_q = libm::pow(lam, q);

        // gauge value, t-partial, and spatial gradient in one pass; the
        // spatial part is q |u|^{q-1} B^T u-hat with u = B(x - x0)
        let gauge = move |t: f64, x: Vec3, b: &Mat| -> (f64, f64, Vec3) {
            let u = b.matvec(linalg::sub(x, x0));
            let un = linalg::norm(u);
            let g = lam_q * libm::pow(t.abs(), q) + libm::pow(un, q);
            let gt = if t == 0.0 {
                0.0
            } else {
                q * lam_q * libm::pow(t.abs(), q - 1.0) * t.signum()
            };
            let gx = if un < 1e-300 {
                [0.0; 3]
            } else {
                linalg::scale(b.transpose_matvec(u), q * libm::pow(un, q - 2.0))
            };
            (g, gt, gx)
        };

        let (pf, pfd) = profile.split();
        let b_f = self.b.clone();
        let b_dt = self.b.clone();
        let b_gx = self.b.clone();
        let pfd_dt = pfd.clone();
        let f: super::HalfFn = Arc::new(move |t, x| pf(gauge(t, x, &b_f).0));
        let dt: super::HalfFn = Arc::new(move |t, x| {
            let (g, gt, _) = gauge(t, x, &b_dt);
            pfd_dt(g) * gt
        });
        let grad_x: super::HalfGradFn = Arc::new(move |t, x| {
            let (g, _, gx) = gauge(t, x, &b_gx);
            linalg::scale(gx, pfd(g))
        });

        let pred = self.gauge_smooth_predicate(profile_kind_margin(&profile), q);
        let scale = self.natural_scale();
        Ok(TestFunction::new(
            self.params.n,
            self.label(),
            decay,
            grad_decay,
            scale,
            f,
            dt,
            grad_x,
        )?
        .with_smooth_predicate(pred))
    }

    /// Assemble `phi(C(lambda t, lambda (x-x0)))`.
    fn cost_family(
        &self,
        profile: Profile1d,
        cost: &CostFn,
        decay: Decay,
        grad_decay: Decay,
    ) -> Result<TestFunction> {
        let lam = self.lambda.abs();
        let x0 = self.x0;
        let cost_f = cost.clone();
        let cost_g = cost.clone();
        let (pf, pfd) = profile.split();
        let pfd_gx = pfd.clone();

        let shift = move |t: f64, x: Vec3| -> (f64, Vec3) {
            (lam * t, linalg::scale(linalg::sub(x, x0), lam))
        };

        let f: super::HalfFn = {
            let pf = pf.clone();
            Arc::new(move |t, x| {
                let (st, sx) = shift(t, x);
                pf(cost_f.eval(st, sx))
            })
        };
        let dt: super::HalfFn = {
            let cost = cost.clone();
            let pfd = pfd.clone();
            Arc::new(move |t, x| {
                let (st, sx) = shift(t, x);
                let (ct, _) = cost.grad(st, sx);
                pfd(cost.eval(st, sx)) * lam * ct
            })
        };
        let grad_x: super::HalfGradFn = Arc::new(move |t, x| {
            let (st, sx) = shift(t, x);
            let (_, cx) = cost_g.grad(st, sx);
            linalg::scale(cx, pfd_gx(cost_g.eval(st, sx)) * lam)
        });

        let pred = self.cost_smooth_predicate(profile_kind_margin(&profile), cost.clone());
        let scale = self.natural_scale();
        Ok(TestFunction::new(
            self.params.n,
            self.label(),
            decay,
            grad_decay,
            scale,
            f,
            dt,
            grad_x,
        )?
        .with_smooth_predicate(pred))
    }

    fn indicator(&self, b_inv: &Mat) -> Result<TestFunction> {
        let eps = self
            .eps
            .ok_or_else(|| Error::domain("the mollified indicator needs a shell width eps"))?;
        if !(0.0 < eps && eps < 0.5) {
            return Err(Error::domain("shell width eps must lie in (0, 0.5)"));
        }
        let lam = self.lambda.abs();
        let c = self.c;
        let b = self.b.clone();
        let b2 = self.b.clone();
        let x0 = self.x0;

        // N(t,x) = |(lambda t, B(x-x0))|, the ball gauge in transformed
        // coordinates; f = c * smoothstep((1 - N)/eps).
        let gauge = move |t: f64, x: Vec3, b: &Mat| -> (f64, f64, Vec3) {
            let u = b.matvec(linalg::sub(x, x0));
            let nn = libm::sqrt(lam * lam * t * t + linalg::dot(u, u));
            if nn < 1e-300 {
                return (0.0, 0.0, [0.0; 3]);
            }
            (nn, lam * lam * t / nn, linalg::scale(b.transpose_matvec(u), 1.0 / nn))
        };

        let f: super::HalfFn = {
            let b = b.clone();
            Arc::new(move |t, x| {
                let (nn, _, _) = gauge(t, x, &b);
                c * smoothstep((1.0 - nn) / eps)
            })
        };
        let dt: super::HalfFn = {
            let b = b2.clone();
            Arc::new(move |t, x| {
                let (nn, nt, _) = gauge(t, x, &b);
                let s = (1.0 - nn) / eps;
                if !(0.0 < s && s < 1.0) {
                    return 0.0;
                }
                -c * smoothstep_deriv(s) / eps * nt
            })
        };
        let grad_x: super::HalfGradFn = {
            let b = b2;
            Arc::new(move |t, x| {
                let (nn, _, nx) = gauge(t, x, &b);
                let s = (1.0 - nn) / eps;
                if !(0.0 < s && s < 1.0) {
                    return [0.0; 3];
                }
                linalg::scale(nx, -c * smoothstep_deriv(s) / eps)
            })
        };

        let r = self.support_radius_gauge(1.0, b_inv);
        let b_pred = self.b.clone();
        let scale = self.natural_scale();
        let pred: PointPredicate = Arc::new(move |t, x| {
            let u = b_pred.matvec(linalg::sub(x, x0));
            let nn = libm::sqrt(lam * lam * t * t + linalg::dot(u, u));
            let s = (1.0 - nn) / eps;
            // accept plateau/outside points with margin, or shell points
            // clear of the C^2 smoothstep junctions at s = 0 and s = 1
            s > 1.05 || s < -0.05 || (0.05..=0.95).contains(&s)
        });
        Ok(TestFunction::new(
            self.params.n,
            self.label(),
            Decay::Compact(r),
            Decay::Compact(r),
            scale,
            f,
            dt,
            grad_x,
        )?
        .with_smooth_predicate(pred))
    }

    /// Keep finite-difference probes away from the gauge's own kinks
    /// (u = 0 where |u|^q loses higher smoothness) and from the support
    /// boundary of positive parts.
    fn gauge_smooth_predicate(&self, boundary_kappa: Option<f64>, q: f64) -> PointPredicate {
        let b = self.b.clone();
        let x0 = self.x0;
        let lam_q = libm::pow(self.lambda.abs(), q);
        Arc::new(move |t, x| {
            let u = b.matvec(linalg::sub(x, x0));
            let un = linalg::norm(u);
            if un < 0.05 {
                return false;
            }
            if let Some(kappa) = boundary_kappa {
                let g = lam_q * libm::pow(t.abs(), q) + libm::pow(un, q);
                if (1.0 + kappa * g).abs() < 0.05 {
                    return false;
                }
            }
            true
        })
    }

    fn cost_smooth_predicate(&self, boundary_kappa: Option<f64>, cost: CostFn) -> PointPredicate {
        let x0 = self.x0;
        let lam = self.lambda.abs();
        Arc::new(move |t, x| {
            let st = lam * t;
            let sx = linalg::scale(linalg::sub(x, x0), lam);
            if cost.norm(st, sx) < 0.05 {
                return false;
            }
            // l^m gauges kink on the coordinate hyperplanes
            if let super::cost::CostKind::LmGauge { .. } = cost.kind() {
                if st.abs() < 0.05
                    || sx.iter().take(cost.ambient_dim() as usize - 1).any(|v| v.abs() < 0.05)
                {
                    return false;
                }
            }
            if let Some(kappa) = boundary_kappa {
                if (1.0 + kappa * cost.eval(st, sx)).abs() < 0.05 {
                    return false;
                }
            }
            true
        })
    }

    fn natural_scale(&self) -> f64 {
        let b_scale = {
            let mut fro = 0.0;
            for i in 0..self.b.dim() {
                for j in 0..self.b.dim() {
                    fro += self.b.get(i, j) * self.b.get(i, j);
                }
            }
            libm::sqrt(fro / self.b.dim() as f64)
        };
        let s = (1.0 / self.lambda.abs()).max(1.0 / b_scale.max(1e-12));
        s.clamp(1.0 / 16.0, 16.0)
    }

    fn label(&self) -> String {
        let p = &self.params;
        match p.alpha {
            Some(al) => format!("{}(n={}, p={}, a={}, alpha={al})", self.kind.tag(), p.n, p.p, p.a),
            None => format!("{}(n={}, p={}, a={})", self.kind.tag(), p.n, p.p, p.a),
        }
    }
}

/// Scalar profile `phi(g)` with derivative, applied to a gauge value.
enum Profile1d {
    /// `c (1 + g)^{-e}`.
    Rational { c: f64, e: f64 },
    /// `c (1 + (alpha-1) g)_+^{1/(1-alpha)}`; derivative
    /// `-c (1 + (alpha-1) g)_+^{alpha/(1-alpha)}`.
    PositivePart { c: f64, alpha: f64 },
    /// `c e^{-g}`.
    Exponential { c: f64 },
}

impl Profile1d {
    fn rational(c: f64, e: f64) -> Self {
        Profile1d::Rational { c, e }
    }

    fn positive_part(c: f64, alpha: f64) -> Self {
        Profile1d::PositivePart { c, alpha }
    }

    fn exponential(c: f64) -> Self {
        Profile1d::Exponential { c }
    }

    /// Profile and derivative as shareable closures.
    fn split(&self) -> (Arc<dyn Fn(f64) -> f64 + Send + Sync>, Arc<dyn Fn(f64) -> f64 + Send + Sync>) {
        match *self {
            Profile1d::Rational { c, e } => (
                Arc::new(move |g| c * libm::pow(1.0 + g, -e)),
                Arc::new(move |g| -c * e * libm::pow(1.0 + g, -e - 1.0)),
            ),
            Profile1d::PositivePart { c, alpha } => {
                let kappa = alpha - 1.0;
                let expo = 1.0 / (1.0 - alpha);
                (
                    Arc::new(move |g| {
                        let u = 1.0 + kappa * g;
                        if u <= 0.0 {
                            0.0
                        } else {
                            c * libm::pow(u, expo)
                        }
                    }),
                    // d/dg [c u^{1/(1-alpha)}] = c (kappa/(1-alpha)) u^{alpha/(1-alpha)}
                    // and kappa/(1-alpha) = -1 identically
                    Arc::new(move |g| {
                        let u = 1.0 + kappa * g;
                        if u <= 0.0 {
                            0.0
                        } else {
                            -c * libm::pow(u, expo - 1.0)
                        }
                    }),
                )
            }
            Profile1d::Exponential { c } => (
                Arc::new(move |g| c * libm::exp(-g)),
                Arc::new(move |g| -c * libm::exp(-g)),
            ),
        }
    }
}

/// For compactly supported positive-part profiles: `alpha - 1`, so
/// predicates can keep probes away from the support boundary
/// `1 + (alpha-1) g = 0`.
fn profile_kind_margin(profile: &Profile1d) -> Option<f64> {
    match *profile {
        Profile1d::PositivePart { alpha, .. } if alpha < 1.0 => Some(alpha - 1.0),
        _ => None,
    }
}

/// Quintic smoothstep: 0 for s <= 0, 1 for s >= 1, C^2 across the
/// junctions.
fn smoothstep(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
    }
}

fn smoothstep_deriv(s: f64) -> f64 {
    if !(0.0 < s && s < 1.0) {
        0.0
    } else {
        s * s * (30.0 + s * (-60.0 + 30.0 * s))
    }
}

/// Anisotropic Gaussian bump `exp(-w_t t^2 - sum w_i (x_i - c_i)^2)`:
/// the standard non-extremal probe. `widths` holds the t-width followed
/// by the spatial widths; `center` is spatial only.
pub fn gaussian(n: u32, widths: &[f64], center: &[f64]) -> Result<TestFunction> {
    if widths.len() != n as usize {
        return Err(Error::domain("gaussian needs one width per coordinate"));
    }
    if center.len() != n as usize - 1 {
        return Err(Error::domain("gaussian center is spatial only"));
    }
    if widths.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::domain("gaussian widths must be positive"));
    }
    let wt = widths[0];
    let mut wx = [0.0; 3];
    let mut cx = [0.0; 3];
    for i in 0..n as usize - 1 {
        wx[i] = widths[i + 1];
        cx[i] = center[i];
    }
    let d = n as usize - 1;
    let val = move |t: f64, x: Vec3| -> f64 {
        let mut e = wt * t * t;
        for i in 0..d {
            e += wx[i] * (x[i] - cx[i]) * (x[i] - cx[i]);
        }
        libm::exp(-e)
    };
    let f: super::HalfFn = Arc::new(val);
    let dt: super::HalfFn = Arc::new(move |t, x| -2.0 * wt * t * val(t, x));
    let grad_x: super::HalfGradFn = Arc::new(move |t, x| {
        let v = val(t, x);
        let mut g = [0.0; 3];
        for i in 0..d {
            g[i] = -2.0 * wx[i] * (x[i] - cx[i]) * v;
        }
        g
    });
    let wmax = widths.iter().fold(0.0f64, |m, w| m.max(*w));
    TestFunction::new(
        n,
        format!("gaussian(n={n})"),
        Decay::Exponential,
        Decay::Exponential,
        1.0 / libm::sqrt(wmax),
        f,
        dt,
        grad_x,
    )
}

/// Mollified indicator of the cylinder `{max(|lambda| t, |B(x-x0)|) <= 1}`,
/// with the same quintic smoothstep shell of width `eps` as the ball
/// indicator. This is the pointwise limit of the p > 1 extremal family as
/// p -> 1 (the two gauge powers tend to a maximum), and it is the shape
/// that saturates the p = 1 inequality; the mollified ball indicator is
/// admissible but strictly interior (in two unweighted dimensions its
/// ratio settles at (4/pi)^{1/2}, not 1). Crate-internal: the p = 1
/// verification protocol is its only consumer.
pub(crate) fn smoothed_cylinder(
    n: u32,
    c: f64,
    lambda: f64,
    b: &Mat,
    x0: Vec3,
    eps: f64,
) -> Result<TestFunction> {
    if !(0.0 < eps && eps < 0.5) {
        return Err(Error::domain("shell width eps must lie in (0, 0.5)"));
    }
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::domain("the cylinder needs a nonzero finite lambda"));
    }
    let lam = lambda.abs();
    let b_inv = b.inverse()?;

    // N = max(lambda t, |B(x-x0)|); derivative convention: the flat cap
    // wins ties, the ridge between the two regimes is a null set.
    let gauge = move |t: f64, x: Vec3, b: &Mat| -> (f64, f64, Vec3) {
        let u = b.matvec(linalg::sub(x, x0));
        let un = linalg::norm(u);
        let ht = lam * t;
        if ht >= un {
            (ht, lam, [0.0; 3])
        } else {
            (un, 0.0, linalg::scale(b.transpose_matvec(u), 1.0 / un.max(1e-300)))
        }
    };

    let f: super::HalfFn = {
        let b = b.clone();
        Arc::new(move |t, x| {
            let (nn, _, _) = gauge(t, x, &b);
            c * smoothstep((1.0 - nn) / eps)
        })
    };
    let dt: super::HalfFn = {
        let b = b.clone();
        Arc::new(move |t, x| {
            let (nn, nt, _) = gauge(t, x, &b);
            let s = (1.0 - nn) / eps;
            if !(0.0 < s && s < 1.0) {
                return 0.0;
            }
            -c * smoothstep_deriv(s) / eps * nt
        })
    };
    let grad_x: super::HalfGradFn = {
        let b = b.clone();
        Arc::new(move |t, x| {
            let (nn, _, nx) = gauge(t, x, &b);
            let s = (1.0 - nn) / eps;
            if !(0.0 < s && s < 1.0) {
                return [0.0; 3];
            }
            linalg::scale(nx, -c * smoothstep_deriv(s) / eps)
        })
    };

    // The body sits inside the product of the per-factor reaches, so a
    // diagonal bound on the ball radius covers it.
    let stretch = super::inverse_stretch_bound(lam, &b_inv);
    let r = (1.0 + eps) * libm::sqrt(2.0) * stretch + linalg::norm(x0) + 1e-9;
    let scale = stretch.clamp(1.0 / 16.0, 16.0);
    let b_pred = b.clone();
    let pred: PointPredicate = Arc::new(move |t, x| {
        let u = b_pred.matvec(linalg::sub(x, x0));
        let un = linalg::norm(u);
        let ht = lam * t;
        let s = (1.0 - ht.max(un)) / eps;
        // plateau or exterior with margin, or shell points clear of both
        // the smoothstep junctions and the max-gauge ridge
        s > 1.05 || s < -0.05 || ((0.05..=0.95).contains(&s) && (ht - un).abs() > 0.05)
    });
    Ok(TestFunction::new(
        n,
        format!("indicator_smoothed_cylinder(n={n}, eps={eps})"),
        Decay::Compact(r),
        Decay::Compact(r),
        scale,
        f,
        dt,
        grad_x,
    )?
    .with_smooth_predicate(pred))
}

/// Wire format for function specifications.
#[cfg(feature = "serde")]
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct FunctionSpec {
    pub family: String,
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, rename = "B", skip_serializing_if = "Option::is_none")]
    pub b: Option<alloc::vec::Vec<alloc::vec::Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<alloc::vec::Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub widths: Option<alloc::vec::Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<alloc::vec::Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostSpec>,
}

/// Wire format for cost functions.
#[cfg(feature = "serde")]
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostSpec {
    Euclidean { q: f64 },
    QuadraticForm { q: f64, mu: f64, matrix: alloc::vec::Vec<alloc::vec::Vec<f64>> },
    LmGauge { q: f64, m: f64 },
}

#[cfg(feature = "serde")]
impl CostSpec {
    pub fn to_cost(&self, n: u32) -> Result<CostFn> {
        match self {
            CostSpec::Euclidean { q } => CostFn::euclidean(n, *q),
            CostSpec::QuadraticForm { q, mu, matrix } => {
                CostFn::quadratic_form(n, *q, *mu, Mat::from_rows(matrix)?)
            }
            CostSpec::LmGauge { q, m } => CostFn::lm_gauge(n, *q, *m),
        }
    }
}

#[cfg(feature = "serde")]
impl FunctionSpec {
    /// Family parameters required by the spec'd family, if any.
    pub fn params(&self) -> Result<Option<Params>> {
        if self.family == "gaussian" {
            return Ok(None);
        }
        let p = self.p.ok_or_else(|| Error::domain("function spec needs p"))?;
        let a = self.a.ok_or_else(|| Error::domain("function spec needs a"))?;
        let mut params = Params::new(self.n, p, a)?;
        if let Some(alpha) = self.alpha {
            params = params.with_alpha(alpha)?;
        }
        Ok(Some(params))
    }

    pub fn to_test_function(&self) -> Result<TestFunction> {
        if self.family == "gaussian" {
            let widths = self
                .widths
                .clone()
                .ok_or_else(|| Error::domain("gaussian spec needs widths"))?;
            let center = self.center.clone().unwrap_or_else(|| {
                alloc::vec![0.0; self.n as usize - 1]
            });
            return gaussian(self.n, &widths, &center);
        }
        let kind = match self.family.as_str() {
            "sobolev_extremal" => FamilyKind::Sobolev,
            "gn_a_extremal" => FamilyKind::GnA,
            "gn_b_extremal" => FamilyKind::GnB,
            "entropy_extremal" => FamilyKind::Entropy,
            "nguyen_h_pa" => FamilyKind::NguyenHpa,
            "nguyen_h_alpha" => FamilyKind::NguyenHalpha,
            "indicator_smoothed" => FamilyKind::IndicatorSmoothed,
            other => {
                return Err(Error::domain(format!("unknown function family '{other}'")));
            }
        };
        let params = self.params()?.expect("non-gaussian families carry params");
        let mut fam = ExtremalFamily::plain(kind, params)?;
        if let Some(c) = self.c {
            fam.c = c;
        }
        if let Some(lambda) = self.lambda {
            fam.lambda = lambda;
        }
        if let Some(rows) = &self.b {
            fam.b = Mat::from_rows(rows)?;
        }
        if let Some(x0) = &self.x0 {
            if x0.len() != self.n as usize - 1 {
                return Err(Error::domain("x0 must have n-1 entries"));
            }
            let mut v = [0.0; 3];
            for (i, c) in x0.iter().enumerate() {
                v[i] = *c;
            }
            fam.x0 = v;
        }
        fam.eps = self.eps;
        if let Some(cost) = &self.cost {
            fam.cost = Some(cost.to_cost(self.n)?);
        }
        fam.build()
    }
}
