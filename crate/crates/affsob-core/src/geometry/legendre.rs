//! Legendre transforms of positively homogeneous convex functions.
//!
//! For `C` that is `r`-homogeneous (`C(s y) = s^r C(y)`, `r > 1`) and
//! positive away from the origin, the conjugate `C*(v) = sup_y <v,y> - C(y)`
//! is `r'`-homogeneous with `r' = r/(r-1)`, and the radial part of the sup
//! has a closed form: writing `y = rho theta` with `theta` on the sphere,
//!
//! ```text
//!   C*(v) = sup_{theta : <v,theta> > 0}  <v,theta>^{r'} (r C(theta))^{1-r'} / r'.
//! ```
//!
//! Only the spherical sup remains numerical; it reuses the grid-plus-golden
//! machinery of the parent module. The sublevel set `{C <= 1}` is exposed
//! as a gauge body with gauge `C^{1/r}`.

use crate::error::{Error, Result};
use crate::geometry::{ConvexBody, ShapeFn};
use crate::linalg::{dot, Vec3};
use crate::quadrature::sphere::SphereRule;
use alloc::sync::Arc;

#[derive(Clone)]
pub struct HomogeneousConvexFn {
    dim: usize,
    degree: f64,
    f: ShapeFn,
}

impl core::fmt::Debug for HomogeneousConvexFn {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "HomogeneousConvexFn(dim={}, degree={})",
            self.dim, self.degree
        )
    }
}

impl HomogeneousConvexFn {
    /// Wrap a closure claimed to be `degree`-homogeneous and convex. The
    /// closure is trusted on homogeneity (it is cheap for callers to
    /// guarantee, and the property tests exercise it); positivity on the
    /// sphere is checked when a transform or body is built.
    pub fn new(dim: usize, degree: f64, f: ShapeFn) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::domain("homogeneous functions support dim 1..=3"));
        }
        if !(degree > 1.0 && degree.is_finite()) {
            return Err(Error::domain(
                "Legendre machinery needs homogeneity degree > 1",
            ));
        }
        Ok(HomogeneousConvexFn { dim, degree, f })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> f64 {
        self.degree
    }

    pub fn conjugate_degree(&self) -> f64 {
        self.degree / (self.degree - 1.0)
    }

    pub fn eval(&self, y: Vec3) -> f64 {
        (self.f)(y)
    }

    /// Legendre conjugate. The returned function owns a sampled copy of
    /// this one on a sphere grid; each evaluation seeds the spherical sup
    /// from the samples and refines with live closure calls.
    pub fn legendre(&self) -> Result<HomogeneousConvexFn> {
        let r = self.degree;
        let rp = self.conjugate_degree();
        let dim = self.dim;
        let rule = SphereRule::in_dim(dim, if dim == 3 { 1152 } else { 720 })?;
        let mut samples = alloc::vec::Vec::with_capacity(rule.len());
        for theta in rule.nodes() {
            let c = (self.f)(*theta);
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Degenerate(alloc::format!(
                    "function must be positive on the sphere; got {c} at [{}, {}, {}]",
                    theta[0],
                    theta[1],
                    theta[2]
                )));
            }
            // Precompute (r C(theta))^{1-r'}.
            samples.push((*theta, libm::pow(r * c, 1.0 - rp)));
        }
        let live = self.f.clone();
        let conj = move |v: Vec3| -> f64 {
            // Grid seed.
            let mut best = ([0.0_f64; 3], f64::NEG_INFINITY);
            for (theta, factor) in &samples {
                let inner = dot(v, *theta);
                if inner <= 0.0 {
                    continue;
                }
                let val = libm::pow(inner, rp) * factor;
                if val > best.1 {
                    best = (*theta, val);
                }
            }
            if best.1 == f64::NEG_INFINITY {
                // v = 0 (or numerically so): conjugate vanishes there.
                return 0.0;
            }
            if dim == 1 {
                return best.1 / rp;
            }
            // Refine around the seed with live evaluations.
            let objective = |theta: Vec3| -> f64 {
                let inner = dot(v, theta);
                if inner <= 0.0 {
                    return 0.0;
                }
                libm::pow(inner, rp) * libm::pow(r * (live)(theta), 1.0 - rp)
            };
            let refined = crate::geometry::refine_on_sphere(dim, best.0, &objective);
            refined.max(best.1) / rp
        };
        HomogeneousConvexFn::new(dim, rp, Arc::new(conj))
    }

    /// The sublevel body `{ y : C(y) <= 1 }`, whose gauge is `C^{1/degree}`.
    pub fn sublevel_body(&self) -> Result<ConvexBody> {
        let f = self.f.clone();
        let r = self.degree;
        ConvexBody::gauge_body(
            self.dim,
            Arc::new(move |y: Vec3| {
                let c = (f)(y);
                if c <= 0.0 {
                    0.0
                } else {
                    libm::pow(c, 1.0 / r)
                }
            }),
        )
    }

    /// Convenience: the scaled power of a norm-like gauge,
    /// `C(y) = coef * g(y)^degree / degree` for a 1-homogeneous `g`.
    pub fn from_gauge_power(
        dim: usize,
        degree: f64,
        coef: f64,
        g: ShapeFn,
    ) -> Result<Self> {
        if !(coef > 0.0) {
            return Err(Error::domain("gauge power coefficient must be positive"));
        }
        HomogeneousConvexFn::new(
            dim,
            degree,
            Arc::new(move |y: Vec3| coef / degree * libm::pow((g)(y), degree)),
        )
    }
}
