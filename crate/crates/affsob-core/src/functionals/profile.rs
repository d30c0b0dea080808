//! Batch evaluation of all derived functionals of one test function.
//!
//! Building a [`Profile`] materializes the half-space node table once,
//! evaluates `f`, its t-partial and spatial gradient at every node, and
//! computes the full battery of directional norms over the direction
//! sphere in a single fused pass. Every functional after that is a
//! cheap reduction over cached data, and quantities that the theory
//! ties together (directional norms, the direction-sphere measure, the
//! body of bounded directional energy) are guaranteed to share one
//! discretization, so the structural identities between them hold to
//! roundoff rather than to quadrature error.

use super::cost::CostFn;
use super::TestFunction;
use crate::error::{Error, Result};
use crate::geometry::{centroid_body, ConvexBody, HomogeneousConvexFn};
use crate::linalg::{self, Vec3};
use crate::quadrature::{graded_panels, SphereRule, DEFAULT_SEED};
use crate::scalar;
use crate::sum::Accumulator;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

/// Quadrature sizing shared by profile builds.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadBudget {
    /// Total half-space node budget.
    pub node_budget: usize,
    /// Direction-sphere resolution; 0 picks the per-dimension default
    /// (a node pair for n = 2, 256 for n = 3, a ~590-node product rule
    /// on the 2-sphere for n = 4).
    pub sphere_resolution: usize,
    /// Half-space truncation/scale override; 0 sizes it from the
    /// function's decay metadata.
    pub truncation_radius: f64,
    pub seed: u64,
}

impl QuadBudget {
    pub fn default_for(n: u32) -> Self {
        QuadBudget {
            node_budget: match n {
                2 => 16_384,
                3 => 65_536,
                _ => 190_000,
            },
            sphere_resolution: 0,
            truncation_radius: 0.0,
            seed: DEFAULT_SEED,
        }
    }

    /// Same shape at a quarter of the node budget; building a second
    /// profile with this gives an honest convergence estimate.
    pub fn coarser(&self) -> Self {
        QuadBudget {
            node_budget: (self.node_budget / 4).max(256),
            ..*self
        }
    }

    fn sphere_res_for(&self, n: u32) -> usize {
        if self.sphere_resolution > 0 {
            return self.sphere_resolution;
        }
        match n {
            2 => 2,
            3 => 256,
            _ => 590,
        }
    }
}

/// One test function with every first-order quantity tabulated on a
/// fixed quadrature.
pub struct Profile {
    n: u32,
    p: f64,
    a: f64,
    func: TestFunction,
    budget: QuadBudget,
    ws: Vec<f64>,
    ts: Vec<f64>,
    xs: Vec<Vec3>,
    fv: Vec<f64>,
    ftv: Vec<f64>,
    gxv: Vec<Vec3>,
    sphere: SphereRule,
    dir_norms: Vec<f64>,
    /// `||f||_p` when the decay admits it; extremal profiles near the
    /// critical exponent legitimately live outside `L^p`.
    norm_p: Option<f64>,
    dt_nrm: f64,
    full_grad: f64,
}

impl core::fmt::Debug for Profile {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Profile")
            .field("n", &self.n)
            .field("p", &self.p)
            .field("a", &self.a)
            .field("label", &self.func.label())
            .field("nodes", &self.ws.len())
            .field("directions", &self.dir_norms.len())
            .finish()
    }
}

impl Profile {
    pub fn build(func: &TestFunction, p: f64, a: f64, budget: &QuadBudget) -> Result<Profile> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::domain("profile exponent p must be >= 1"));
        }
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::domain("weight exponent a must be >= 0"));
        }
        let n = func.n();
        let nd = n as f64 + a;
        func.grad_decay().integrable(p, nd)?;

        let mut rule = func.rule(a, budget.node_budget);
        if budget.truncation_radius > 0.0 {
            rule.truncation_radius = budget.truncation_radius;
        }
        rule.seed = budget.seed;
        let table = rule.node_table()?;
        let m = table.len();
        let mut fv = Vec::with_capacity(m);
        let mut ftv = Vec::with_capacity(m);
        let mut gxv = Vec::with_capacity(m);
        for i in 0..m {
            let (t, x) = (table.ts[i], table.xs[i]);
            let v = func.value(t, x);
            let vt = func.dt(t, x);
            let vg = func.grad_x(t, x);
            if !v.is_finite() || !vt.is_finite() || vg.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "function data not finite at t = {t}, x = {:?}",
                    &x[..func.spatial_dim()]
                )));
            }
            fv.push(v);
            ftv.push(vt);
            gxv.push(vg);
        }

        let sphere = SphereRule::in_dim(n as usize - 1, budget.sphere_res_for(n))?;
        let dir_norms = directional_norms(p, &table.ws, &gxv, &sphere);

        let norm_p = match func.decay().integrable(p, nd) {
            Ok(()) => Some(power_norm(&table.ws, fv.iter().copied(), p)),
            Err(_) => None,
        };
        let dt_nrm = power_norm(&table.ws, ftv.iter().copied(), p);
        let full_grad = power_norm(&table.ws, gxv.iter().map(|g| linalg::norm(*g)), p);

        let profile = Profile {
            n,
            p,
            a,
            func: func.clone(),
            budget: *budget,
            ws: table.ws,
            ts: table.ts,
            xs: table.xs,
            fv,
            ftv,
            gxv,
            sphere,
            dir_norms,
            norm_p,
            dt_nrm,
            full_grad,
        };
        profile.check_degenerate()?;
        Ok(profile)
    }

    /// The non-degeneracy policy: every directional norm must carry
    /// weight relative to the largest one.
    fn check_degenerate(&self) -> Result<()> {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for d in &self.dir_norms {
            lo = lo.min(*d);
            hi = hi.max(*d);
        }
        if !(hi > 0.0) || !hi.is_finite() {
            return Err(Error::Degenerate(format!(
                "no directional energy for '{}'",
                self.func.label()
            )));
        }
        if lo < 1e-12 * hi {
            return Err(Error::Degenerate(format!(
                "directional norm collapses along some direction for '{}' (min/max = {:e})",
                self.func.label(),
                lo / hi
            )));
        }
        if let Some(np) = self.norm_p {
            if !(np > 0.0) {
                return Err(Error::Degenerate("function is numerically zero".into()));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn nd(&self) -> f64 {
        self.n as f64 + self.a
    }

    pub fn budget(&self) -> &QuadBudget {
        &self.budget
    }

    pub fn function(&self) -> &TestFunction {
        &self.func
    }

    pub fn label(&self) -> &str {
        self.func.label()
    }

    pub fn node_count(&self) -> usize {
        self.ws.len()
    }

    fn q(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    fn require_p_above_one(&self) -> Result<()> {
        if self.p > 1.0 {
            Ok(())
        } else {
            Err(Error::domain(
                "this functional needs p > 1 (conjugate exponent must be finite)",
            ))
        }
    }

    /// `||f||_{L^r_omega}` from the cached values. Exponents in `(0, 1)`
    /// are accepted as the usual quasi-norm: the sublinear interpolation
    /// inequality pairs `||f||_{alpha p}` with `alpha p < 1` whenever
    /// `alpha < 1/p`.
    pub fn weighted_norm(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::domain("norm exponent r must be positive"));
        }
        self.func.decay().integrable(r, self.nd())?;
        Ok(power_norm(&self.ws, self.fv.iter().copied(), r))
    }

    pub fn norm_p(&self) -> Result<f64> {
        match self.norm_p {
            Some(v) => Ok(v),
            // Reconstruct the precise integrability complaint.
            None => match self.func.decay().integrable(self.p, self.nd()) {
                Err(e) => Err(e),
                Ok(()) => Err(Error::domain("p-norm was not materialized")),
            },
        }
    }

    pub fn dt_norm(&self) -> f64 {
        self.dt_nrm
    }

    pub fn full_spatial_norm(&self) -> f64 {
        self.full_grad
    }

    /// `||grad f . xi||_{L^p_omega}` for an arbitrary spatial vector;
    /// 1-homogeneous in `xi`.
    pub fn directional_norm(&self, xi: Vec3) -> f64 {
        let mut acc = Accumulator::new();
        if self.p == 2.0 {
            for (w, g) in self.ws.iter().zip(&self.gxv) {
                let d = linalg::dot(*g, xi);
                acc.add(w * d * d);
            }
        } else {
            for (w, g) in self.ws.iter().zip(&self.gxv) {
                acc.add(w * libm::pow(linalg::dot(*g, xi).abs(), self.p));
            }
        }
        libm::pow(acc.value(), 1.0 / self.p)
    }

    /// The directional norms over the profile's direction rule.
    pub fn dir_norms(&self) -> &[f64] {
        &self.dir_norms
    }

    pub fn sphere(&self) -> &SphereRule {
        &self.sphere
    }

    /// `Z_p(f)`: the (1-n)-power mean of the directional norms.
    pub fn z_p(&self) -> f64 {
        let e = 1.0 - self.n as f64;
        libm::pow(self.z_power(), 1.0 / e)
    }

    /// `Z_p(f)^{1-n}` as the direct quadrature sum (the quantity most
    /// identities are stated in).
    pub fn z_power(&self) -> f64 {
        let e = 1.0 - self.n as f64;
        let mut acc = Accumulator::new();
        for (w, d) in self.sphere.weights().iter().zip(&self.dir_norms) {
            acc.add(w * libm::pow(*d, e));
        }
        acc.value()
    }

    /// Affine energy `E_p(f) = c_{n-1,p} Z_p(f)`.
    pub fn e_p(&self) -> Result<f64> {
        Ok(scalar::c_np(self.n - 1, self.p)? * self.z_p())
    }

    /// Weighted entropy of `|f|^p`; requires the profile to be
    /// normalized to unit L^p norm first.
    pub fn entropy(&self) -> Result<f64> {
        let norm_p = self.norm_p()?;
        if (norm_p - 1.0).abs() > 1e-8 {
            return Err(Error::domain(format!(
                "entropy needs ||f||_p = 1; got {norm_p} (normalize first)"
            )));
        }
        let mut acc = Accumulator::new();
        for (w, v) in self.ws.iter().zip(&self.fv) {
            let u = libm::pow(v.abs(), self.p);
            if u > 0.0 {
                acc.add(w * u * libm::log(u));
            }
        }
        Ok(acc.value())
    }

    /// Same profile rescaled so that `||f||_p = 1`. Exact on the cached
    /// data: every stored value divides by the computed norm.
    pub fn normalized(&self) -> Result<Profile> {
        let s = 1.0 / self.norm_p()?;
        Ok(Profile {
            n: self.n,
            p: self.p,
            a: self.a,
            func: self.func.scaled(s),
            budget: self.budget,
            ws: self.ws.clone(),
            ts: self.ts.clone(),
            xs: self.xs.clone(),
            fv: self.fv.iter().map(|v| v * s).collect(),
            ftv: self.ftv.iter().map(|v| v * s).collect(),
            gxv: self.gxv.iter().map(|g| linalg::scale(*g, s)).collect(),
            sphere: self.sphere.clone(),
            dir_norms: self.dir_norms.iter().map(|d| d * s).collect(),
            norm_p: Some(1.0),
            dt_nrm: self.dt_nrm * s,
            full_grad: self.full_grad * s,
        })
    }

    /// The constant `alpha_f = p (1+a)/(n-1) Z_p^{1-n} ||f_t||^{-p}`.
    pub fn alpha_f(&self) -> Result<f64> {
        self.require_p_above_one()?;
        if !(self.dt_nrm > 0.0) {
            return Err(Error::Degenerate("t-derivative norm vanishes".into()));
        }
        Ok(self.p * (1.0 + self.a) / (self.n as f64 - 1.0) * self.z_power()
            / libm::pow(self.dt_nrm, self.p))
    }

    /// Coefficients `w_xi ||grad_xi f||^{1-n-p}` defining `D_f^*`.
    fn df_star_coefs(&self) -> Vec<(Vec3, f64)> {
        let e = 1.0 - self.n as f64 - self.p;
        self.sphere
            .nodes()
            .iter()
            .zip(self.sphere.weights())
            .zip(&self.dir_norms)
            .map(|((xi, w), d)| (*xi, w * libm::pow(*d, e)))
            .collect()
    }

    /// `D_f^*(x)`: the spherical p-cosine transform of the directional
    /// norms.
    pub fn df_star_at(&self, x: Vec3) -> Result<f64> {
        self.require_p_above_one()?;
        let mut acc = Accumulator::new();
        for ((xi, w), d) in self
            .sphere
            .nodes()
            .iter()
            .zip(self.sphere.weights())
            .zip(&self.dir_norms)
        {
            let e = 1.0 - self.n as f64 - self.p;
            acc.add(w * libm::pow(*d, e) * libm::pow(linalg::dot(x, *xi).abs(), self.p));
        }
        Ok(acc.value())
    }

    /// `D_f^*` as a p-homogeneous convex function on the spatial factor.
    pub fn df_star_fn(&self) -> Result<HomogeneousConvexFn> {
        self.require_p_above_one()?;
        let coefs = self.df_star_coefs();
        let p = self.p;
        let f = Arc::new(move |x: Vec3| {
            let mut acc = Accumulator::new();
            for (xi, c) in &coefs {
                acc.add(c * libm::pow(linalg::dot(x, *xi).abs(), p));
            }
            acc.value()
        });
        HomogeneousConvexFn::new(self.n as usize - 1, self.p, f)
    }

    /// `C_f^*(t, x) = (alpha_f/p) |t|^p + D_f^*(x)` on the full ambient
    /// space, packed as `[t, x_1, ..]`. Ambient dimension must be <= 3
    /// for the generic convex machinery; the weighted-volume path below
    /// never needs the 4-dimensional body.
    pub fn cf_star_fn(&self) -> Result<HomogeneousConvexFn> {
        self.require_p_above_one()?;
        if self.n > 3 {
            return Err(Error::domain(
                "the ambient cost is materialized only for n <= 3; the weighted volume of its \
                 sublevel body uses the slice decomposition in every dimension",
            ));
        }
        let coefs = self.df_star_coefs();
        let p = self.p;
        let tcoef = self.alpha_f()? / self.p;
        let f = Arc::new(move |y: Vec3| {
            let mut acc = Accumulator::new();
            acc.add(tcoef * libm::pow(y[0].abs(), p));
            let x = [y[1], y[2], 0.0];
            for (xi, c) in &coefs {
                acc.add(c * libm::pow(linalg::dot(x, *xi).abs(), p));
            }
            acc.value()
        });
        HomogeneousConvexFn::new(self.n as usize, self.p, f)
    }

    /// `D_f`: Legendre transform of `D_f^*`, q-homogeneous on the
    /// spatial factor.
    pub fn df_fn(&self) -> Result<HomogeneousConvexFn> {
        self.df_star_fn()?.legendre()
    }

    /// `C_f` by the generic Legendre transform of the ambient cost
    /// (n <= 3). The product form built from `D_f` is available via
    /// [`Profile::cf_product_fn`]; the two are compared in tests.
    pub fn cf_fn(&self) -> Result<HomogeneousConvexFn> {
        self.cf_star_fn()?.legendre()
    }

    /// `C_f(t,x) = (alpha_f^{1-q}/q) |t|^q + D_f(x)` assembled from the
    /// product structure.
    pub fn cf_product_fn(&self) -> Result<HomogeneousConvexFn> {
        self.require_p_above_one()?;
        if self.n > 3 {
            return Err(Error::domain("ambient cost product form caps at n <= 3"));
        }
        let q = self.q();
        let tcoef = libm::pow(self.alpha_f()?, 1.0 - q) / q;
        let df = self.df_fn()?;
        let f = Arc::new(move |y: Vec3| {
            tcoef * libm::pow(y[0].abs(), q) + df.eval([y[1], y[2], 0.0])
        });
        HomogeneousConvexFn::new(self.n as usize, q, f)
    }

    /// The unit ball of the directional-norm gauge: a convex body on
    /// the spatial factor whose gauge at `xi` is `||grad_xi f||_p`.
    pub fn lf_body(&self) -> Result<ConvexBody> {
        let ws = self.ws.clone();
        let gxv = self.gxv.clone();
        let p = self.p;
        let gauge = Arc::new(move |y: Vec3| {
            let mut acc = Accumulator::new();
            if p == 2.0 {
                for (w, g) in ws.iter().zip(&gxv) {
                    let d = linalg::dot(*g, y);
                    acc.add(w * d * d);
                }
            } else {
                for (w, g) in ws.iter().zip(&gxv) {
                    acc.add(w * libm::pow(linalg::dot(*g, y).abs(), p));
                }
            }
            libm::pow(acc.value(), 1.0 / p)
        });
        ConvexBody::gauge_body(self.n as usize - 1, gauge)
    }

    /// Volume of the directional-norm body under the profile's own
    /// direction rule (the discretization that makes the volume-mean
    /// identity exact).
    pub fn lf_volume(&self) -> f64 {
        let d = self.n as f64 - 1.0;
        let mut acc = Accumulator::new();
        for (w, dn) in self.sphere.weights().iter().zip(&self.dir_norms) {
            acc.add(w * libm::pow(1.0 / dn, d));
        }
        acc.value() / d
    }

    /// `K_{f,0} = {D_f <= 1}`, the central slice of the cost's sublevel
    /// body.
    pub fn kf0_body(&self) -> Result<ConvexBody> {
        self.df_fn()?.sublevel_body()
    }

    /// Volume of `K_{f,0}` by the polar integral of the `D_f` gauge at
    /// the profile's direction resolution.
    pub fn kf0_volume(&self) -> Result<f64> {
        let body = self.kf0_body()?;
        body.volume_with(self.budget.sphere_res_for(self.n).max(64))
    }

    /// Full sublevel body `K_f = {C_f <= 1}` (n <= 3).
    pub fn kf_body(&self) -> Result<ConvexBody> {
        self.cf_fn()?.sublevel_body()
    }

    /// Largest t reached by `K_f`: where the t-block alone exhausts the
    /// budget.
    pub fn kf_tmax(&self) -> Result<f64> {
        let q = self.q();
        Ok(libm::pow(q, 1.0 / q) * libm::pow(self.alpha_f()?, 1.0 / self.p))
    }

    /// Weighted volume of the positive part of `K_f` via the slice
    /// decomposition: the x-slices are scaled copies of the central
    /// slice, the t-integral reduces to a Beta function, and the volume
    /// of the central slice comes from the `D_f` gauge.
    pub fn weighted_kf_volume(&self) -> Result<f64> {
        self.weighted_kf_volume_from(self.kf0_volume()?)
    }

    /// Slice decomposition with the central-slice volume supplied by the
    /// caller (used to compare independent volume paths).
    pub fn weighted_kf_volume_from(&self, kf0_volume: f64) -> Result<f64> {
        let q = self.q();
        let nd = self.nd();
        let tmax = self.kf_tmax()?;
        // int_0^1 s^a (1 - s^q)^{(n-1)/q} ds
        let log_s_int = scalar::log_gamma((self.a + 1.0) / q)?
            + scalar::log_gamma((self.n as f64 - 1.0 + q) / q)?
            - libm::log(q)
            - scalar::log_gamma((nd + q) / q)?;
        Ok(kf0_volume * libm::pow(tmax, 1.0 + self.a) * libm::exp(log_s_int))
    }

    /// Volume of `K_{f,0}` by the centroid-body route: the central
    /// slice is a dilate of the p-centroid body of the directional-norm
    /// body, so its volume follows from `vol(L_f)` and `vol(Gamma_p L_f)`
    /// without ever forming a Legendre transform.
    pub fn kf0_volume_centroid(&self) -> Result<f64> {
        self.require_p_above_one()?;
        let d = self.n as f64 - 1.0;
        let q = self.q();
        let res = self.budget.sphere_res_for(self.n).max(64);
        let lf = self.lf_body()?.tabulate(res)?;
        let gamma = centroid_body(&lf, self.p)?;
        let gvol = gamma.volume_with(res)?;
        let scale = self.p
            * libm::pow(q, self.p / q)
            * (d + self.p)
            * scalar::a_np(self.n - 1, self.p)?
            * self.lf_volume();
        Ok(libm::pow(scale, d / self.p) * gvol)
    }

    /// Weighted volume of the positive part of `K_f` by direct
    /// quadrature of the slice volumes in t, with graded panels against
    /// the endpoint singularities. Independent of the Beta-function
    /// reduction used by [`Profile::weighted_kf_volume_from`].
    pub fn weighted_kf_volume_tquad(&self, kf0_volume: f64) -> Result<f64> {
        let q = self.q();
        let tcoef = libm::pow(self.alpha_f()?, 1.0 - q) / q;
        let tmax = self.kf_tmax()?;
        let d = self.n as f64 - 1.0;
        let a = self.a;
        graded_panels(0.0, tmax, 14, 0.4, 20, |t| {
            let rem = 1.0 - tcoef * libm::pow(t, q);
            if rem <= 0.0 {
                0.0
            } else {
                libm::pow(t, a) * libm::pow(rem, d / q) * kf0_volume
            }
        })
    }

    /// `int C_f^*(grad f) omega` using the closed reduction: the
    /// directional integrals collapse onto the directional norms.
    pub fn energy_cf_star(&self) -> Result<f64> {
        self.require_p_above_one()?;
        let alpha = self.alpha_f()?;
        let mut acc = Accumulator::new();
        acc.add(alpha / self.p * libm::pow(self.dt_nrm, self.p));
        let e = 1.0 - self.n as f64 - self.p;
        for (w, d) in self.sphere.weights().iter().zip(&self.dir_norms) {
            acc.add(w * libm::pow(*d, e) * libm::pow(*d, self.p));
        }
        Ok(acc.value())
    }

    /// `int D_f^*(grad~ f) omega` evaluated pointwise (no sum swap):
    /// the honest path for the identity checks.
    pub fn energy_df_star_pointwise(&self) -> Result<f64> {
        self.require_p_above_one()?;
        let coefs = self.df_star_coefs();
        let mut acc = Accumulator::new();
        for (w, g) in self.ws.iter().zip(&self.gxv) {
            let mut inner = Accumulator::new();
            for (xi, c) in &coefs {
                inner.add(c * libm::pow(linalg::dot(*g, *xi).abs(), self.p));
            }
            acc.add(w * inner.value());
        }
        Ok(acc.value())
    }

    /// Pointwise `int C_f^*(grad f) omega`.
    pub fn energy_cf_star_pointwise(&self) -> Result<f64> {
        let alpha = self.alpha_f()?;
        let mut acc = Accumulator::new();
        for (w, (ft, _)) in self.ws.iter().zip(self.ftv.iter().zip(&self.gxv)) {
            acc.add(w * alpha / self.p * libm::pow(ft.abs(), self.p));
        }
        acc.add(self.energy_df_star_pointwise()?);
        Ok(acc.value())
    }

    /// `int C*(grad f) omega` for an external cost function (the energy
    /// appearing in the general-norm inequalities).
    pub fn energy_cost(&self, cost: &CostFn) -> Result<f64> {
        if cost.ambient_dim() != self.n {
            return Err(Error::domain("cost ambient dimension mismatch"));
        }
        let mut acc = Accumulator::new();
        for (w, (ft, g)) in self.ws.iter().zip(self.ftv.iter().zip(&self.gxv)) {
            acc.add(w * cost.conjugate(*ft, *g));
        }
        Ok(acc.value())
    }

    /// Access to raw node data for bespoke integrals.
    pub fn nodes(&self) -> (&[f64], &[f64], &[Vec3]) {
        (&self.ws, &self.ts, &self.xs)
    }

    /// Cached pointwise values `(f, f_t, grad~ f)`.
    pub fn values(&self) -> (&[f64], &[f64], &[Vec3]) {
        (&self.fv, &self.ftv, &self.gxv)
    }

    pub fn descriptor(&self) -> String {
        format!(
            "{} @ p={}, a={}, nodes={}, dirs={}",
            self.func.label(),
            self.p,
            self.a,
            self.ws.len(),
            self.dir_norms.len()
        )
    }
}

fn power_norm<I: Iterator<Item = f64>>(ws: &[f64], values: I, r: f64) -> f64 {
    let mut acc = Accumulator::new();
    if r == 2.0 {
        for (w, v) in ws.iter().zip(values) {
            acc.add(w * v * v);
        }
    } else if r == 1.0 {
        for (w, v) in ws.iter().zip(values) {
            acc.add(w * v.abs());
        }
    } else {
        for (w, v) in ws.iter().zip(values) {
            acc.add(w * libm::pow(v.abs(), r));
        }
    }
    libm::pow(acc.value(), 1.0 / r)
}

fn directional_norms(p: f64, ws: &[f64], gxv: &[Vec3], sphere: &SphereRule) -> Vec<f64> {
    let dirs = sphere.nodes();
    let mut accs: Vec<Accumulator> = (0..dirs.len()).map(|_| Accumulator::new()).collect();
    // node-major traversal: the per-direction accumulation sequence is
    // the node order, matching any later per-direction re-computation
    if p == 2.0 {
        for (w, g) in ws.iter().zip(gxv) {
            for (acc, xi) in accs.iter_mut().zip(dirs) {
                let d = linalg::dot(*g, *xi);
                acc.add(w * d * d);
            }
        }
    } else {
        for (w, g) in ws.iter().zip(gxv) {
            for (acc, xi) in accs.iter_mut().zip(dirs) {
                acc.add(w * libm::pow(linalg::dot(*g, *xi).abs(), p));
            }
        }
    }
    accs.into_iter()
        .map(|acc| libm::pow(acc.value(), 1.0 / p))
        .collect()
}
