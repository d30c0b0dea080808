//! Computational convex geometry in dimensions one to three.
//!
//! A [`ConvexBody`] is star-shaped about the origin and is stored in
//! whichever representation the producing computation makes natural:
//! an analytic gauge or support closure, an explicit polygon or ellipsoid,
//! an `l_q` ball, or radial values tabulated on a sphere grid. Every
//! representation answers the same queries (support, gauge, radial, polar,
//! volume); polygon and ellipsoid answers are exact, closures are exact by
//! construction in their own representation, and cross-representation
//! queries (the support of a gauge body, say) run a grid scan over the
//! sphere followed by golden-section refinement to an angular tolerance of
//! `1e-8`.
//!
//! The duality conventions, with `K` containing the origin:
//!
//! ```text
//!   gauge_K(y)  = inf { s > 0 : y/s in K },   radial_K(u) = 1 / gauge_K(u),
//!   h_K(u)      = sup { <u, y> : y in K },
//!   K^polar     = { y : <x, y> <= 1 for all x in K },
//!   h_{K^polar} = gauge_K,   gauge_{K^polar} = h_K.
//! ```
//!
//! The last line is why `polar` on a closure-backed body costs nothing: it
//! swaps the representation tag and keeps the closure.

pub mod legendre;
pub mod moments;

pub use legendre::HomogeneousConvexFn;
pub use moments::{bp_check, centroid_body, moment_p, BpReport};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Mat, Vec3};
use crate::quadrature::sphere::SphereRule;
use crate::scalar;
use crate::sum::Accumulator;
use alloc::sync::Arc;
use alloc::vec::Vec;

/// Shared closure evaluating a gauge or support function on `R^d`
/// (1-homogeneous, positive away from the origin).
pub type ShapeFn = Arc<dyn Fn(Vec3) -> f64 + Send + Sync>;

/// Angular tolerance for grid-plus-golden spherical optimization.
const ANGLE_TOL: f64 = 1e-8;

#[derive(Clone)]
pub enum ConvexBody {
    /// `{ y : f(y) <= 1 }` for a 1-homogeneous convex `f`.
    Gauge { dim: usize, f: ShapeFn },
    /// Body with support function `f`.
    Support { dim: usize, f: ShapeFn },
    /// Convex polygon in `R^2`, vertices counter-clockwise, origin strictly
    /// inside.
    Polygon { vertices: Vec<[f64; 2]> },
    /// `{ x : |M x| <= 1 }` for nonsingular `M`.
    Ellipsoid { matrix: Mat },
    /// `{ x : sum |x_i / scale|^q <= 1 }`.
    LqBall { dim: usize, q: f64, scale: f64 },
    /// Radial values on the nodes of `SphereRule::in_dim(dim, resolution)`,
    /// in node order.
    Tabulated {
        dim: usize,
        resolution: usize,
        radii: Vec<f64>,
    },
}

impl core::fmt::Debug for ConvexBody {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ConvexBody::Gauge { dim, .. } => write!(f, "Gauge(dim={dim})"),
            ConvexBody::Support { dim, .. } => write!(f, "Support(dim={dim})"),
            ConvexBody::Polygon { vertices } => {
                write!(f, "Polygon({} vertices)", vertices.len())
            }
            ConvexBody::Ellipsoid { matrix } => write!(f, "Ellipsoid(dim={})", matrix.dim()),
            ConvexBody::LqBall { dim, q, scale } => {
                write!(f, "LqBall(dim={dim}, q={q}, scale={scale})")
            }
            ConvexBody::Tabulated { dim, radii, .. } => {
                write!(f, "Tabulated(dim={dim}, {} nodes)", radii.len())
            }
        }
    }
}

impl ConvexBody {
    pub fn gauge_body(dim: usize, f: ShapeFn) -> Result<Self> {
        check_dim(dim)?;
        Ok(ConvexBody::Gauge { dim, f })
    }

    pub fn support_body(dim: usize, f: ShapeFn) -> Result<Self> {
        check_dim(dim)?;
        Ok(ConvexBody::Support { dim, f })
    }

    /// Validating polygon constructor: at least three vertices, strictly
    /// convex, counter-clockwise, origin strictly inside.
    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let k = vertices.len();
        if k < 3 {
            return Err(Error::domain("polygon needs at least 3 vertices"));
        }
        let mut scale: f64 = 0.0;
        for v in &vertices {
            if !v[0].is_finite() || !v[1].is_finite() {
                return Err(Error::domain("polygon vertices must be finite"));
            }
            scale = scale.max(v[0].abs()).max(v[1].abs());
        }
        for i in 0..k {
            let a = vertices[i];
            let b = vertices[(i + 1) % k];
            let c = vertices[(i + 2) % k];
            let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            if cross <= 1e-12 * scale * scale {
                return Err(Error::domain(
                    "polygon must be strictly convex and counter-clockwise",
                ));
            }
            // Origin strictly inside: positive offset against each edge's
            // outward normal.
            let n = [b[1] - a[1], a[0] - b[0]];
            let offset = n[0] * a[0] + n[1] * a[1];
            if offset <= 1e-12 * scale * scale {
                return Err(Error::domain("polygon must contain the origin strictly"));
            }
        }
        Ok(ConvexBody::Polygon { vertices })
    }

    pub fn ellipsoid(matrix: Mat) -> Result<Self> {
        // Inversion fails on singular matrices, which is exactly the
        // degeneracy to reject here.
        matrix.inverse()?;
        Ok(ConvexBody::Ellipsoid { matrix })
    }

    pub fn lq_ball(dim: usize, q: f64, scale: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(q >= 1.0 && q.is_finite()) || !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::domain("lq ball needs q >= 1 and scale > 0"));
        }
        Ok(ConvexBody::LqBall { dim, q, scale })
    }

    pub fn tabulated(dim: usize, resolution: usize, radii: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        let rule = SphereRule::in_dim(dim, resolution)?;
        if radii.len() != rule.len() {
            return Err(Error::domain(alloc::format!(
                "tabulated body needs {} radii for this grid, got {}",
                rule.len(),
                radii.len()
            )));
        }
        if !radii.iter().all(|r| r.is_finite() && *r > 0.0) {
            return Err(Error::domain("tabulated radii must be finite and positive"));
        }
        Ok(ConvexBody::Tabulated {
            dim,
            resolution,
            radii,
        })
    }

    pub fn unit_ball(dim: usize) -> Result<Self> {
        ConvexBody::lq_ball(dim, 2.0, 1.0)
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Gauge { dim, .. }
            | ConvexBody::Support { dim, .. }
            | ConvexBody::LqBall { dim, .. }
            | ConvexBody::Tabulated { dim, .. } => *dim,
            ConvexBody::Polygon { .. } => 2,
            ConvexBody::Ellipsoid { matrix } => matrix.dim(),
        }
    }

    /// Support function `h(u) = sup_{y in K} <u, y>`. Exact for polygon,
    /// ellipsoid, `l_q` ball, and support closures; grid-plus-golden for
    /// the rest.
    pub fn support(&self, u: Vec3) -> Result<f64> {
        match self {
            ConvexBody::Support { f, .. } => finite((f)(u), "support"),
            ConvexBody::Polygon { vertices } => Ok(vertices
                .iter()
                .map(|v| u[0] * v[0] + u[1] * v[1])
                .fold(f64::NEG_INFINITY, f64::max)),
            ConvexBody::Ellipsoid { matrix } => {
                Ok(norm(matrix.inverse()?.transpose().matvec(u)))
            }
            ConvexBody::LqBall { dim, q, scale } => {
                Ok(scale * lq_norm(u, *dim, conjugate(*q)))
            }
            ConvexBody::Gauge { dim, f } => {
                let g = f.clone();
                Ok(sphere_sup(*dim, move |v| {
                    let num = dot(u, v);
                    if num <= 0.0 {
                        return 0.0;
                    }
                    num / (g)(v)
                })?
                .1)
            }
            ConvexBody::Tabulated { dim, .. } => {
                Ok(sphere_sup(*dim, |v| {
                    let num = dot(u, v);
                    if num <= 0.0 {
                        return 0.0;
                    }
                    num * self.interp_radial(v)
                })?
                .1)
            }
        }
    }

    /// Gauge (Minkowski functional). Exact for gauge closures, polygon,
    /// ellipsoid, `l_q` ball, and tabulated (interpolated radial); the
    /// support representation goes through the dual sup.
    pub fn gauge(&self, y: Vec3) -> Result<f64> {
        match self {
            ConvexBody::Gauge { f, .. } => finite((f)(y), "gauge"),
            ConvexBody::Support { dim, f } => {
                let h = f.clone();
                Ok(sphere_sup(*dim, move |v| {
                    let num = dot(y, v);
                    if num <= 0.0 {
                        return 0.0;
                    }
                    num / (h)(v)
                })?
                .1)
            }
            ConvexBody::Polygon { vertices } => {
                let k = vertices.len();
                let mut best = 0.0_f64;
                for i in 0..k {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % k];
                    let n = [b[1] - a[1], a[0] - b[0], 0.0];
                    let offset = n[0] * a[0] + n[1] * a[1];
                    best = best.max(dot(n, y) / offset);
                }
                Ok(best)
            }
            ConvexBody::Ellipsoid { matrix } => Ok(norm(matrix.matvec(y))),
            ConvexBody::LqBall { dim, q, scale } => Ok(lq_norm(y, *dim, *q) / scale),
            ConvexBody::Tabulated { .. } => {
                let r = norm(y);
                if r == 0.0 {
                    return Ok(0.0);
                }
                let u = [y[0] / r, y[1] / r, y[2] / r];
                Ok(r / self.interp_radial(u))
            }
        }
    }

    /// Radial function at a unit direction, `r(u) = 1 / gauge(u)`.
    pub fn radial(&self, u: Vec3) -> Result<f64> {
        let g = self.gauge(u)?;
        if !(g > 0.0) {
            return Err(Error::Degenerate(alloc::format!(
                "gauge vanishes along [{}, {}, {}]; body is unbounded there",
                u[0],
                u[1],
                u[2]
            )));
        }
        Ok(1.0 / g)
    }

    /// Polar body. Closed form for the explicit representations; closure
    /// representations just swap tag (the gauge of `K` is the support of
    /// the polar and vice versa); a tabulated body is re-tabulated from
    /// its support values.
    pub fn polar(&self) -> Result<ConvexBody> {
        match self {
            ConvexBody::Gauge { dim, f } => Ok(ConvexBody::Support {
                dim: *dim,
                f: f.clone(),
            }),
            ConvexBody::Support { dim, f } => Ok(ConvexBody::Gauge {
                dim: *dim,
                f: f.clone(),
            }),
            ConvexBody::Polygon { vertices } => {
                let k = vertices.len();
                let mut out = Vec::with_capacity(k);
                for i in 0..k {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % k];
                    // Edge on the line <x, n> = c maps to the polar vertex
                    // n / c.
                    let n = [b[1] - a[1], a[0] - b[0]];
                    let c = n[0] * a[0] + n[1] * a[1];
                    out.push([n[0] / c, n[1] / c]);
                }
                ConvexBody::polygon(out)
            }
            ConvexBody::Ellipsoid { matrix } => Ok(ConvexBody::Ellipsoid {
                matrix: matrix.inverse()?.transpose(),
            }),
            ConvexBody::LqBall { dim, q, scale } => Ok(ConvexBody::LqBall {
                dim: *dim,
                q: conjugate(*q),
                scale: 1.0 / scale,
            }),
            ConvexBody::Tabulated {
                dim, resolution, ..
            } => {
                let rule = SphereRule::in_dim(*dim, *resolution)?;
                let mut radii = Vec::with_capacity(rule.len());
                for u in rule.nodes() {
                    // radial of the polar = 1 / h_K.
                    radii.push(1.0 / self.support(*u)?);
                }
                ConvexBody::tabulated(*dim, *resolution, radii)
            }
        }
    }

    /// Volume (length for `dim = 1`, area for `dim = 2`). Closed form for
    /// polygon, ellipsoid, and `l_q` balls; otherwise the polar-coordinate
    /// integral `(1/d) int_{S^{d-1}} r(u)^d du` on a default grid.
    pub fn volume(&self) -> Result<f64> {
        match self {
            ConvexBody::Polygon { vertices } => {
                let k = vertices.len();
                let mut acc = Accumulator::new();
                for i in 0..k {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % k];
                    acc.add(a[0] * b[1] - a[1] * b[0]);
                }
                Ok(0.5 * acc.value())
            }
            ConvexBody::Ellipsoid { matrix } => {
                Ok(scalar::ball_volume(matrix.dim() as f64)? / matrix.det().abs())
            }
            ConvexBody::LqBall { dim, q, scale } => {
                // (2 scale)^d Gamma(1 + 1/q)^d / Gamma(1 + d/q).
                let d = *dim as f64;
                let log = d * libm::log(2.0 * scale) + d * scalar::log_gamma(1.0 + 1.0 / q)?
                    - scalar::log_gamma(1.0 + d / q)?;
                Ok(libm::exp(log))
            }
            _ => self.volume_with(default_volume_resolution(self.dim())),
        }
    }

    /// Polar-coordinate volume on an explicit grid resolution.
    pub fn volume_with(&self, resolution: usize) -> Result<f64> {
        let d = self.dim();
        let rule = SphereRule::in_dim(d, resolution)?;
        // Support-representation bodies get a cached dual scan so each
        // radial query refines a precomputed grid instead of rescanning.
        let cache = match self {
            ConvexBody::Support { .. } => Some(SupportCache::build(self)?),
            _ => None,
        };
        let mut acc = Accumulator::new();
        for (u, w) in rule.nodes().iter().zip(rule.weights()) {
            let r = match &cache {
                Some(c) => c.radial(*u)?,
                None => self.radial(*u)?,
            };
            acc.add(w * libm::pow(r, d as f64));
        }
        Ok(acc.value() / d as f64)
    }

    /// Re-express the body as radial values on a grid.
    pub fn tabulate(&self, resolution: usize) -> Result<ConvexBody> {
        let d = self.dim();
        let rule = SphereRule::in_dim(d, resolution)?;
        let cache = match self {
            ConvexBody::Support { .. } => Some(SupportCache::build(self)?),
            _ => None,
        };
        let mut radii = Vec::with_capacity(rule.len());
        for u in rule.nodes() {
            let r = match &cache {
                Some(c) => c.radial(*u)?,
                None => self.radial(*u)?,
            };
            radii.push(r);
        }
        ConvexBody::tabulated(d, resolution, radii)
    }

    pub fn contains(&self, y: Vec3) -> Result<bool> {
        Ok(self.gauge(y)? <= 1.0 + 1e-12)
    }

    /// Interpolated radial value for tabulated bodies (linear in angle on
    /// `S^1`, bilinear in polar cosine and azimuth on `S^2`, direct lookup
    /// on `S^0`).
    fn interp_radial(&self, u: Vec3) -> f64 {
        let (dim, resolution, radii) = match self {
            ConvexBody::Tabulated {
                dim,
                resolution,
                radii,
            } => (*dim, *resolution, radii),
            _ => unreachable!("interp_radial is only called on tabulated bodies"),
        };
        match dim {
            1 => {
                if u[0] >= 0.0 {
                    radii[0]
                } else {
                    radii[1]
                }
            }
            2 => {
                let m = radii.len();
                let th = wrap_angle(libm::atan2(u[1], u[0]));
                let pos = th / (2.0 * scalar::PI) * m as f64;
                let i = libm::floor(pos) as usize % m;
                let frac = pos - libm::floor(pos);
                radii[i] * (1.0 - frac) + radii[(i + 1) % m] * frac
            }
            _ => {
                // Gauss rings in z, uniform azimuth; node index = ring * m + j.
                let rule = SphereRule::in_dim(3, resolution)
                    .expect("resolution validated at construction");
                let total = radii.len();
                let l = libm::floor(libm::sqrt(total as f64 / 2.0)) as usize;
                let m = 2 * l;
                let ring_z: Vec<f64> = (0..l).map(|r| rule.nodes()[r * m][2]).collect();
                let z = u[2].clamp(-1.0, 1.0);
                // Bracketing rings (clamped at the poles).
                let mut hi = ring_z.len() - 1;
                for (i, rz) in ring_z.iter().enumerate() {
                    if *rz >= z {
                        hi = i;
                        break;
                    }
                }
                let lo = hi.saturating_sub(1);
                let tz = if hi == lo || ring_z[hi] == ring_z[lo] {
                    0.0
                } else {
                    ((z - ring_z[lo]) / (ring_z[hi] - ring_z[lo])).clamp(0.0, 1.0)
                };
                let th = wrap_angle(libm::atan2(u[1], u[0]));
                let pos = th / (2.0 * scalar::PI) * m as f64;
                let j = libm::floor(pos) as usize % m;
                let tj = pos - libm::floor(pos);
                let ring = |r: usize, j0: usize| radii[r * m + j0 % m];
                let lo_val = ring(lo, j) * (1.0 - tj) + ring(lo, j + 1) * tj;
                let hi_val = ring(hi, j) * (1.0 - tj) + ring(hi, j + 1) * tj;
                lo_val * (1.0 - tz) + hi_val * tz
            }
        }
    }
}

/// Map an `atan2` angle into `[0, 2 pi)` without std's `rem_euclid`.
fn wrap_angle(th: f64) -> f64 {
    if th < 0.0 {
        th + 2.0 * scalar::PI
    } else {
        th
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        Err(Error::domain(alloc::format!(
            "convex bodies support dimension 1..=3, got {dim}"
        )))
    }
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(alloc::format!(
            "{what} closure returned {v}"
        )))
    }
}

fn conjugate(q: f64) -> f64 {
    if q.is_infinite() {
        1.0
    } else if q <= 1.0 {
        f64::INFINITY
    } else {
        q / (q - 1.0)
    }
}

fn lq_norm(u: Vec3, dim: usize, q: f64) -> f64 {
    if q.is_infinite() {
        return u[..dim].iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    }
    let mut s = 0.0;
    for x in &u[..dim] {
        s += libm::pow(x.abs(), q);
    }
    libm::pow(s, 1.0 / q)
}

/// Maximize `f` over the unit sphere of `R^dim`: scan a fixed grid, then
/// golden-section along great circles through the best node down to an
/// angular resolution of `1e-8`. Returns `(argmax, max)`.
pub fn sphere_sup<F: Fn(Vec3) -> f64>(dim: usize, f: F) -> Result<(Vec3, f64)> {
    check_dim(dim)?;
    match dim {
        1 => {
            let a = f([1.0, 0.0, 0.0]);
            let b = f([-1.0, 0.0, 0.0]);
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::NonFinite("sphere_sup objective".into()));
            }
            if a >= b {
                Ok(([1.0, 0.0, 0.0], a))
            } else {
                Ok(([-1.0, 0.0, 0.0], b))
            }
        }
        2 => {
            let grid = 720usize;
            let mut best = (0usize, f64::NEG_INFINITY);
            for i in 0..grid {
                let th = 2.0 * scalar::PI * i as f64 / grid as f64;
                let v = f([libm::cos(th), libm::sin(th), 0.0]);
                if !v.is_finite() {
                    return Err(Error::NonFinite("sphere_sup objective".into()));
                }
                if v > best.1 {
                    best = (i, v);
                }
            }
            let spacing = 2.0 * scalar::PI / grid as f64;
            let center = 2.0 * scalar::PI * best.0 as f64 / grid as f64;
            let (th, val) = golden_max(
                |th| f([libm::cos(th), libm::sin(th), 0.0]),
                center - spacing,
                center + spacing,
                ANGLE_TOL,
            );
            Ok(([libm::cos(th), libm::sin(th), 0.0], val))
        }
        _ => {
            let rule = SphereRule::in_dim(3, 1152)?;
            let mut best = ([0.0; 3], f64::NEG_INFINITY);
            for u in rule.nodes() {
                let v = f(*u);
                if !v.is_finite() {
                    return Err(Error::NonFinite("sphere_sup objective".into()));
                }
                if v > best.1 {
                    best = (*u, v);
                }
            }
            // Alternate golden-section passes along two orthogonal great
            // circles through the current best point, shrinking the window.
            let mut u = best.0;
            let mut val = best.1;
            let mut window = 0.2_f64;
            for _ in 0..6 {
                for axis in 0..2 {
                    let e = tangent_direction(u, axis);
                    let (s, v) = golden_max(
                        |s| f(great_circle(u, e, s)),
                        -window,
                        window,
                        ANGLE_TOL,
                    );
                    if v > val {
                        u = great_circle(u, e, s);
                        val = v;
                    }
                }
                window *= 0.25;
                if window < ANGLE_TOL {
                    break;
                }
            }
            Ok((u, val))
        }
    }
}

/// Refine a spherical maximization around `seed`: golden-section passes
/// along great circles, window sized to one cell of the standard scan
/// grids. Returns the refined maximum (never less than the seed value).
pub(crate) fn refine_on_sphere<F: Fn(Vec3) -> f64>(dim: usize, seed: Vec3, f: &F) -> f64 {
    match dim {
        1 => f(seed),
        2 => {
            let th0 = libm::atan2(seed[1], seed[0]);
            let spacing = 0.01;
            let (_, val) = golden_max(
                |th| f([libm::cos(th), libm::sin(th), 0.0]),
                th0 - spacing,
                th0 + spacing,
                ANGLE_TOL,
            );
            val.max(f(seed))
        }
        _ => {
            let mut u = seed;
            let mut val = f(seed);
            let mut window = 0.15_f64;
            for _ in 0..6 {
                for axis in 0..2 {
                    let e = tangent_direction(u, axis);
                    let (s, v) =
                        golden_max(|s| f(great_circle(u, e, s)), -window, window, ANGLE_TOL);
                    if v > val {
                        u = great_circle(u, e, s);
                        val = v;
                    }
                }
                window *= 0.25;
                if window < ANGLE_TOL {
                    break;
                }
            }
            val
        }
    }
}

fn great_circle(u: Vec3, e: Vec3, s: f64) -> Vec3 {
    let (sin, cos) = libm::sincos(s);
    let v = [
        u[0] * cos + e[0] * sin,
        u[1] * cos + e[1] * sin,
        u[2] * cos + e[2] * sin,
    ];
    let n = norm(v);
    [v[0] / n, v[1] / n, v[2] / n]
}

fn tangent_direction(u: Vec3, axis: usize) -> Vec3 {
    // Any vector not parallel to u; pick the coordinate axis with the
    // smallest overlap, then Gram-Schmidt.
    let seed = if u[0].abs() <= u[1].abs() && u[0].abs() <= u[2].abs() {
        [1.0, 0.0, 0.0]
    } else if u[1].abs() <= u[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let mut e1 = crate::linalg::sub(seed, crate::linalg::scale(u, dot(seed, u)));
    let n = norm(e1);
    e1 = [e1[0] / n, e1[1] / n, e1[2] / n];
    if axis == 0 {
        e1
    } else {
        // u x e1 completes the tangent frame.
        [
            u[1] * e1[2] - u[2] * e1[1],
            u[2] * e1[0] - u[0] * e1[2],
            u[0] * e1[1] - u[1] * e1[0],
        ]
    }
}

/// Golden-section maximization on `[lo, hi]`; assumes local unimodality,
/// which the fine pre-scan guarantees in practice. Returns `(argmax, max)`.
fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let mid = 0.5 * (lo + hi);
    let fm = f(mid);
    if fm >= f1 && fm >= f2 {
        (mid, fm)
    } else if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn default_volume_resolution(dim: usize) -> usize {
    match dim {
        1 => 2,
        2 => 1024,
        _ => 4050,
    }
}

/// Precomputed support values on a dual grid, so that repeated
/// radial-from-support queries only do local refinement.
struct SupportCache {
    body: ConvexBody,
    rule: SphereRule,
    values: Vec<f64>,
}

impl SupportCache {
    fn build(body: &ConvexBody) -> Result<Self> {
        let dim = body.dim();
        let rule = SphereRule::in_dim(dim, if dim == 3 { 1152 } else { 720 })?;
        let mut values = Vec::with_capacity(rule.len());
        for u in rule.nodes() {
            values.push(body.support(*u)?);
        }
        Ok(SupportCache {
            body: body.clone(),
            rule,
            values,
        })
    }

    /// `1 / r_K(u) = gauge_K(u) = sup_v <u, v> / h_K(v)`: seed the sup from
    /// the cached grid, then refine with live support evaluations.
    fn radial(&self, u: Vec3) -> Result<f64> {
        let dim = self.body.dim();
        let mut best = ([0.0; 3], f64::NEG_INFINITY);
        for (v, h) in self.rule.nodes().iter().zip(&self.values) {
            let num = dot(u, *v);
            if num <= 0.0 {
                continue;
            }
            let ratio = num / h;
            if ratio > best.1 {
                best = (*v, ratio);
            }
        }
        let objective = |v: Vec3| -> f64 {
            let num = dot(u, v);
            if num <= 0.0 {
                return 0.0;
            }
            num / self.body.support(v).unwrap_or(f64::INFINITY)
        };
        let gauge = refine_on_sphere(dim, best.0, &objective).max(best.1);
        if !(gauge > 0.0) {
            return Err(Error::Degenerate(
                "support body has unbounded radial direction".into(),
            ));
        }
        Ok(1.0 / gauge)
    }
}

/// Data-only mirror of [`ConvexBody`] for (de)serialization. Closure-backed
/// bodies have no faithful serial form; convert them with
/// [`ConvexBody::tabulate`] first.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "snake_case"))]
#[derive(Debug, Clone, PartialEq)]
pub enum BodySpec {
    Polygon { vertices: Vec<[f64; 2]> },
    Ellipsoid { matrix: Vec<Vec<f64>> },
    LqBall { dim: usize, q: f64, scale: f64 },
    Tabulated {
        dim: usize,
        resolution: usize,
        radii: Vec<f64>,
    },
}

impl BodySpec {
    pub fn to_body(&self) -> Result<ConvexBody> {
        match self {
            BodySpec::Polygon { vertices } => ConvexBody::polygon(vertices.clone()),
            BodySpec::Ellipsoid { matrix } => {
                ConvexBody::ellipsoid(Mat::from_rows(matrix)?)
            }
            BodySpec::LqBall { dim, q, scale } => ConvexBody::lq_ball(*dim, *q, *scale),
            BodySpec::Tabulated {
                dim,
                resolution,
                radii,
            } => ConvexBody::tabulated(*dim, *resolution, radii.clone()),
        }
    }

    pub fn from_body(body: &ConvexBody) -> Result<BodySpec> {
        match body {
            ConvexBody::Polygon { vertices } => Ok(BodySpec::Polygon {
                vertices: vertices.clone(),
            }),
            ConvexBody::Ellipsoid { matrix } => Ok(BodySpec::Ellipsoid {
                matrix: matrix.rows(),
            }),
            ConvexBody::LqBall { dim, q, scale } => Ok(BodySpec::LqBall {
                dim: *dim,
                q: *q,
                scale: *scale,
            }),
            ConvexBody::Tabulated {
                dim,
                resolution,
                radii,
            } => Ok(BodySpec::Tabulated {
                dim: *dim,
                resolution: *resolution,
                radii: radii.clone(),
            }),
            other => Err(Error::domain(alloc::format!(
                "{other:?} is closure-backed; tabulate it before serializing"
            ))),
        }
    }
}
