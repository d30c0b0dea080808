//! Cost functions `C` for the general-norm inequalities: even, convex,
//! positively q-homogeneous with `C(y) > 0` away from the origin.
//!
//! Everything an inequality check needs is available in closed form:
//! the gradient (for building matched test functions), the convex
//! conjugate `C*` (for the energy integral), and the weighted volume of
//! the positive half of the sublevel body `K_C = {C <= 1}`. The closed
//! forms are cross-checked against the generic Legendre machinery in the
//! tests below.

use crate::error::{Error, Result};
use crate::geometry::HomogeneousConvexFn;
use crate::linalg::{self, Mat, Vec3};
use crate::scalar::{self, HalfBallMode};
use alloc::format;
use alloc::sync::Arc;

/// Norm shape underlying the cost; the cost itself is `N(y)^q / q`.
#[derive(Debug, Clone)]
pub enum CostKind {
    /// `N(t,x) = ((mu t)^2 + |M x|^2)^{1/2}`: a block-diagonal ellipsoidal
    /// norm. Euclidean when `mu = 1`, `M = I`.
    QuadraticForm { mu: f64, m: Mat },
    /// `N(y) = (|t|^m + sum_i |x_i|^m)^{1/m}`: the l^m norm on the full
    /// ambient space.
    LmGauge { m: f64 },
}

/// Even convex positively q-homogeneous cost `C(y) = N(y)^q / q` on
/// `R x R^{n-1}`, packed as `(t, x)`.
#[derive(Debug, Clone)]
pub struct CostFn {
    n: u32,
    q: f64,
    kind: CostKind,
    /// Cached `M^{-T}` for the quadratic form's dual norm.
    m_inv_t: Option<Mat>,
}

fn conjugate_exponent(m: f64) -> f64 {
    if m.is_infinite() {
        1.0
    } else if m <= 1.0 {
        f64::INFINITY
    } else {
        m / (m - 1.0)
    }
}

impl CostFn {
    /// `C(y) = |y|^q / q` on `R^n`.
    pub fn euclidean(n: u32, q: f64) -> Result<Self> {
        let m = Mat::identity(n as usize - 1)?;
        CostFn::quadratic_form(n, q, 1.0, m)
    }

    /// Block ellipsoidal cost `((mu t)^2 + |M x|^2)^{q/2} / q`.
    pub fn quadratic_form(n: u32, q: f64, mu: f64, m: Mat) -> Result<Self> {
        if !(2..=4).contains(&n) {
            return Err(Error::domain("cost functions support n in 2..=4"));
        }
        if !(q > 1.0) || !q.is_finite() {
            return Err(Error::domain("cost homogeneity degree q must exceed 1"));
        }
        if !(mu > 0.0) {
            return Err(Error::domain("t-block coefficient mu must be positive"));
        }
        if m.dim() != n as usize - 1 {
            return Err(Error::domain(format!(
                "spatial block must be {} x {}, got dim {}",
                n - 1,
                n - 1,
                m.dim()
            )));
        }
        let m_inv_t = m.inverse()?.transpose();
        Ok(CostFn {
            n,
            q,
            kind: CostKind::QuadraticForm { mu, m },
            m_inv_t: Some(m_inv_t),
        })
    }

    /// `C(y) = (sum |y_i|^m)^{q/m} / q`, the l^m-ball gauge raised to the
    /// homogeneity degree. Requires `m >= 1` for convexity.
    pub fn lm_gauge(n: u32, q: f64, m: f64) -> Result<Self> {
        if !(2..=4).contains(&n) {
            return Err(Error::domain("cost functions support n in 2..=4"));
        }
        if !(q > 1.0) || !q.is_finite() {
            return Err(Error::domain("cost homogeneity degree q must exceed 1"));
        }
        if !(m >= 1.0) || !m.is_finite() {
            return Err(Error::domain("l^m gauge needs m >= 1 for convexity"));
        }
        Ok(CostFn {
            n,
            q,
            kind: CostKind::LmGauge { m },
            m_inv_t: None,
        })
    }

    pub fn ambient_dim(&self) -> u32 {
        self.n
    }

    pub fn degree(&self) -> f64 {
        self.q
    }

    pub fn kind(&self) -> &CostKind {
        &self.kind
    }

    /// The underlying norm `N(t,x)`; 1-homogeneous, positive off 0.
    pub fn norm(&self, t: f64, x: Vec3) -> f64 {
        match &self.kind {
            CostKind::QuadraticForm { mu, m } => {
                let mx = m.matvec(x);
                libm::sqrt((mu * t) * (mu * t) + linalg::dot(mx, mx))
            }
            CostKind::LmGauge { m } => {
                let mut s = libm::pow(t.abs(), *m);
                for x_i in x.iter().take(self.n as usize - 1) {
                    s += libm::pow(x_i.abs(), *m);
                }
                libm::pow(s, 1.0 / m)
            }
        }
    }

    /// `C(t,x) = N(t,x)^q / q`.
    pub fn eval(&self, t: f64, x: Vec3) -> f64 {
        libm::pow(self.norm(t, x), self.q) / self.q
    }

    /// Gradient of `C` as `(dC/dt, spatial gradient)`. Well defined away
    /// from the origin; returns zero at the origin (the limit for q > 1).
    pub fn grad(&self, t: f64, x: Vec3) -> (f64, Vec3) {
        match &self.kind {
            CostKind::QuadraticForm { mu, m } => {
                let mx = m.matvec(x);
                let nrm = libm::sqrt((mu * t) * (mu * t) + linalg::dot(mx, mx));
                if nrm < 1e-300 {
                    return (0.0, [0.0; 3]);
                }
                // d(N^q/q) = N^{q-2} (mu^2 t, M^T M x)
                let c = libm::pow(nrm, self.q - 2.0);
                (c * mu * mu * t, linalg::scale(m.transpose_matvec(mx), c))
            }
            CostKind::LmGauge { m } => {
                let mut s = libm::pow(t.abs(), *m);
                for x_i in x.iter().take(self.n as usize - 1) {
                    s += libm::pow(x_i.abs(), *m);
                }
                if s < 1e-300 {
                    return (0.0, [0.0; 3]);
                }
                // C = S^{q/m}/q with S = sum |y_i|^m, so
                // dC/dy_i = S^{q/m - 1} |y_i|^{m-1} sign(y_i).
                let c = libm::pow(s, self.q / m - 1.0);
                let comp = |y: f64| c * libm::pow(y.abs(), m - 1.0) * if y < 0.0 { -1.0 } else { 1.0 };
                let mut g = [0.0; 3];
                for (i, gi) in g.iter_mut().enumerate().take(self.n as usize - 1) {
                    *gi = comp(x[i]);
                }
                (comp(t), g)
            }
        }
    }

    /// Convex conjugate `C*(v) = N°(v)^p / p` with `1/p + 1/q = 1` and
    /// `N°` the dual norm, evaluated at `v = (vt, vx)`.
    pub fn conjugate(&self, vt: f64, vx: Vec3) -> f64 {
        let p = conjugate_exponent(self.q);
        let dual = match &self.kind {
            CostKind::QuadraticForm { mu, .. } => {
                let w = self
                    .m_inv_t
                    .as_ref()
                    .expect("quadratic form caches its inverse transpose")
                    .matvec(vx);
                libm::sqrt((vt / mu) * (vt / mu) + linalg::dot(w, w))
            }
            CostKind::LmGauge { m } => {
                let md = conjugate_exponent(*m);
                if md.is_infinite() {
                    let mut best = vt.abs();
                    for v_i in vx.iter().take(self.n as usize - 1) {
                        best = best.max(v_i.abs());
                    }
                    best
                } else {
                    let mut s = libm::pow(vt.abs(), md);
                    for v_i in vx.iter().take(self.n as usize - 1) {
                        s += libm::pow(v_i.abs(), md);
                    }
                    libm::pow(s, 1.0 / md)
                }
            }
        };
        libm::pow(dual, p) / p
    }

    /// Weighted volume of the positive part of the sublevel body:
    /// `int_{K_C, t>0} t^a dy` with `K_C = {C <= 1}`, in closed form.
    pub fn weighted_sublevel_volume(&self, a: f64) -> Result<f64> {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::domain("weight exponent a must be finite and >= 0"));
        }
        let nd = self.n as f64 + a;
        // K_C is the N-ball of radius q^{1/q}; scaling by r multiplies the
        // weighted volume by r^{n+a}.
        let radius_factor = libm::pow(self.q, nd / self.q);
        match &self.kind {
            CostKind::QuadraticForm { mu, m } => {
                // The unit N-ball is the image of the Euclidean ball under
                // diag(1/mu, M^{-1}); the map scales t by 1/mu, hence the
                // extra mu^{-a} on top of the Jacobian.
                let halfball = scalar::weighted_halfball_volume(self.n, a, HalfBallMode::Derived)?;
                let det = m.det().abs();
                if det < 1e-300 {
                    return Err(Error::Degenerate(
                        "quadratic-form cost has a singular spatial block".into(),
                    ));
                }
                Ok(radius_factor * libm::pow(*mu, -(1.0 + a)) * halfball / det)
            }
            CostKind::LmGauge { m: mm } => {
                let m = *mm;
                // Dirichlet integral over the l^m ball with weight |t|^a,
                // halved for t > 0:
                //   2^{n-1} m^{-n} Gamma((a+1)/m) Gamma(1/m)^{n-1}
                //     / Gamma((n+a+m)/m).
                let nn = self.n as f64;
                let log_v = (nn - 1.0) * core::f64::consts::LN_2 - nn * libm::log(m)
                    + scalar::log_gamma((a + 1.0) / m)?
                    + (nn - 1.0) * scalar::log_gamma(1.0 / m)?
                    - scalar::log_gamma((nd + m) / m)?;
                Ok(radius_factor * libm::exp(log_v))
            }
        }
    }

    /// View as a generic homogeneous convex function (ambient n <= 3),
    /// for interop with the Legendre machinery.
    pub fn as_homogeneous(&self) -> Result<HomogeneousConvexFn> {
        if self.n > 3 {
            return Err(Error::domain(
                "generic homogeneous-function interop caps at ambient dimension 3",
            ));
        }
        let this = self.clone();
        let f = Arc::new(move |y: Vec3| this.eval(y[0], [y[1], y[2], 0.0]));
        HomogeneousConvexFn::new(self.n as usize, self.q, f)
    }
}
