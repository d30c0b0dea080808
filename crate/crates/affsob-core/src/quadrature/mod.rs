//! Quadrature over the weighted half-space and over spheres.
//!
//! The central object is [`HalfSpaceRule`], a deterministic node/weight
//! generator for integrals of the form
//!
//! ```text
//!   int_0^inf int_{R^{n-1}} g(t, x) t^a dx dt
//! ```
//!
//! The weight `t^a` and all change-of-variable Jacobians are folded into
//! the node weights, so a caller sums `w_i * g(t_i, x_i)` and nothing else.
//! Three schemes are provided:
//!
//! * `MapToCube` (default): a smooth bijection of the open unit cube onto
//!   the half-space, `t = R u^2/(1-u)^2` and `x_j = R tan(pi (v_j - 1/2))`,
//!   with tensor Gauss-Legendre on the cube. For the rational and
//!   exponential profiles this library integrates, the mapped integrand is
//!   smooth up to the boundary and convergence is rapid.
//! * `TensorGauss`: truncation to `[0, R] x [-R, R]^{n-1}` with the kink
//!   substitution `t = R s^{2/(1+a)}` absorbing the weight; useful as an
//!   independent cross-check on compactly supported integrands.
//! * `MonteCarlo`: importance sampling through the same cube map with a
//!   counter-based generator, so results are reproducible from the seed
//!   alone and independent of evaluation order.
//!
//! Node generation and summation are single-threaded and deterministic;
//! callers that parallelize (the CLI does, across verification cases)
//! combine per-case results in a fixed order, so outputs are bit-identical
//! for any thread count.

pub mod gauss;
pub mod sphere;

pub use gauss::{gauss_legendre, gauss_legendre_on, graded_panels};
pub use sphere::SphereRule;

use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::rng::CounterRng;
use crate::sum::Accumulator;
use alloc::vec::Vec;

/// Default RNG seed used everywhere a seed is not supplied explicitly.
pub const DEFAULT_SEED: u64 = 0x5EED_CAFE;

/// Node placement scheme for [`HalfSpaceRule`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Scheme {
    TensorGauss,
    MonteCarlo,
    MapToCube,
}

/// Quadrature rule for the half-space `(0, inf) x R^{n-1}` with weight
/// `t^a`. Fields are public and plain; validation happens when nodes are
/// generated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpaceRule {
    /// Ambient dimension `n` (2..=4): one weight coordinate plus `n - 1`
    /// spatial coordinates.
    pub n: u32,
    /// Weight exponent `a >= 0`.
    pub a: f64,
    /// Box half-width for `TensorGauss`; length scale of the cube map for
    /// the other schemes (nodes concentrate around this scale).
    pub truncation_radius: f64,
    /// Target total node count; tensor schemes realize the largest
    /// per-axis order whose power stays within the budget.
    pub node_budget: usize,
    /// Seed for `MonteCarlo` (ignored by the deterministic grids).
    pub seed: u64,
    pub scheme: Scheme,
}

/// Materialized nodes: `ts[i] > 0`, spatial point `xs[i]`, and weight
/// `ws[i]` with `t^a` and all Jacobians included.
#[derive(Debug, Clone)]
pub struct NodeTable {
    pub ts: Vec<f64>,
    pub xs: Vec<Vec3>,
    pub ws: Vec<f64>,
}

impl NodeTable {
    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ts.is_empty()
    }
}

/// Value of a half-space integral together with a convergence estimate.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    /// `|I_m - I_{m/2}|` for the grid schemes (per-axis refinement), the
    /// Monte Carlo standard error otherwise.
    pub err_estimate: f64,
    pub nodes: usize,
}

impl HalfSpaceRule {
    /// Rule with default scheme (`MapToCube`), scale, budget, and seed.
    pub fn new(n: u32, a: f64) -> Self {
        HalfSpaceRule {
            n,
            a,
            truncation_radius: 4.0,
            node_budget: 262_144,
            seed: DEFAULT_SEED,
            scheme: Scheme::MapToCube,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(2..=4).contains(&self.n) {
            return Err(Error::domain(alloc::format!(
                "half-space rule supports n in 2..=4, got {}",
                self.n
            )));
        }
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return Err(Error::domain("weight exponent a must be finite and >= 0"));
        }
        if !(self.truncation_radius > 0.0) {
            return Err(Error::domain("truncation_radius must be positive"));
        }
        if self.node_budget < 16 {
            return Err(Error::domain("node_budget must be at least 16"));
        }
        Ok(())
    }

    fn per_axis_order(&self) -> usize {
        let n = self.n as f64;
        let m = libm::floor(libm::pow(self.node_budget as f64, 1.0 / n)) as usize;
        m.max(4)
    }

    /// Generate the node table at full budget.
    pub fn node_table(&self) -> Result<NodeTable> {
        self.validate()?;
        match self.scheme {
            Scheme::MapToCube => self.map_to_cube_table(self.per_axis_order()),
            Scheme::TensorGauss => self.tensor_gauss_table(self.per_axis_order()),
            Scheme::MonteCarlo => self.monte_carlo_table(),
        }
    }

    fn map_to_cube_table(&self, m: usize) -> Result<NodeTable> {
        let r = self.truncation_radius;
        let (us, uws) = gauss_legendre_on(m, 0.0, 1.0)?;
        // Weight-direction nodes: t = R u^2 / (1-u)^2.
        let mut t_nodes = Vec::with_capacity(m);
        for (u, w) in us.iter().zip(&uws) {
            let om = 1.0 - u;
            let t = r * u * u / (om * om);
            let jac = r * 2.0 * u / (om * om * om);
            t_nodes.push((t, w * jac * libm::pow(t, self.a)));
        }
        // Spatial nodes: x = R tan(pi (v - 1/2)).
        let mut x_nodes = Vec::with_capacity(m);
        for (v, w) in us.iter().zip(&uws) {
            let th = core::f64::consts::PI * (v - 0.5);
            let tan = libm::tan(th);
            let x = r * tan;
            let jac = r * core::f64::consts::PI * (1.0 + tan * tan);
            x_nodes.push((x, w * jac));
        }
        Ok(self.tensorize(&t_nodes, &x_nodes))
    }

    fn tensor_gauss_table(&self, m: usize) -> Result<NodeTable> {
        let r = self.truncation_radius;
        // t = R s^{2/(1+a)} turns t^a dt into a constant times s ds, which
        // removes both the weight kink at 0 and its derivative jump.
        let (ss, sws) = gauss_legendre_on(m, 0.0, 1.0)?;
        let expo = 2.0 / (1.0 + self.a);
        let coef = libm::pow(r, 1.0 + self.a) * expo;
        let mut t_nodes = Vec::with_capacity(m);
        for (s, w) in ss.iter().zip(&sws) {
            let t = r * libm::pow(*s, expo);
            t_nodes.push((t, w * coef * s));
        }
        let (xs, xws) = gauss_legendre_on(m, -r, r)?;
        let x_nodes: Vec<(f64, f64)> = xs.iter().copied().zip(xws).collect();
        Ok(self.tensorize(&t_nodes, &x_nodes))
    }

    fn tensorize(&self, t_nodes: &[(f64, f64)], x_nodes: &[(f64, f64)]) -> NodeTable {
        let spatial = (self.n - 1) as usize;
        let m = x_nodes.len();
        let total = t_nodes.len() * m.pow(spatial as u32);
        let mut ts = Vec::with_capacity(total);
        let mut xs = Vec::with_capacity(total);
        let mut ws = Vec::with_capacity(total);
        let mut idx = alloc::vec![0usize; spatial];
        for &(t, tw) in t_nodes {
            idx.iter_mut().for_each(|i| *i = 0);
            loop {
                let mut x = [0.0; 3];
                let mut w = tw;
                for (j, &i) in idx.iter().enumerate() {
                    x[j] = x_nodes[i].0;
                    w *= x_nodes[i].1;
                }
                ts.push(t);
                xs.push(x);
                ws.push(w);
                // Odometer increment over the spatial axes.
                let mut k = 0;
                loop {
                    if k == spatial {
                        break;
                    }
                    idx[k] += 1;
                    if idx[k] < m {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == spatial {
                    break;
                }
            }
        }
        NodeTable { ts, xs, ws }
    }

    fn monte_carlo_table(&self) -> Result<NodeTable> {
        let r = self.truncation_radius;
        let dim = self.n as usize;
        let samples = self.node_budget;
        let rng = CounterRng::new(self.seed, 0x4a1f);
        let inv = 1.0 / samples as f64;
        let mut ts = Vec::with_capacity(samples);
        let mut xs = Vec::with_capacity(samples);
        let mut ws = Vec::with_capacity(samples);
        for i in 0..samples {
            let base = (i * dim) as u64;
            let u = rng.f64_open_at(base);
            let om = 1.0 - u;
            let t = r * u * u / (om * om);
            let mut w = r * 2.0 * u / (om * om * om) * libm::pow(t, self.a);
            let mut x = [0.0; 3];
            for j in 0..dim - 1 {
                let v = rng.f64_open_at(base + 1 + j as u64);
                let th = core::f64::consts::PI * (v - 0.5);
                let tan = libm::tan(th);
                x[j] = r * tan;
                w *= r * core::f64::consts::PI * (1.0 + tan * tan);
            }
            ts.push(t);
            xs.push(x);
            ws.push(w * inv);
        }
        Ok(NodeTable { ts, xs, ws })
    }

    /// Integrate `g(t, x)` against `t^a dx dt`.
    ///
    /// `decay` is the caller's bound on the large-radius decay rate:
    /// `|g| = O(|(t,x)|^{-decay})`. Since the weighted half-space has
    /// homogeneous dimension `n + a`, the integral diverges unless
    /// `decay > n + a`, and such calls fail fast with
    /// [`Error::NonIntegrable`] instead of returning a truncation-dependent
    /// number. Any non-finite sample aborts with the node location.
    pub fn integrate<F: FnMut(f64, Vec3) -> f64>(
        &self,
        decay: f64,
        mut g: F,
    ) -> Result<Integral> {
        self.validate()?;
        let needed = self.n as f64 + self.a;
        if !(decay > needed) {
            return Err(Error::NonIntegrable { decay, needed });
        }
        match self.scheme {
            Scheme::MonteCarlo => {
                let table = self.monte_carlo_table()?;
                let mut acc = Accumulator::new();
                let mut sq = Accumulator::new();
                let samples = table.len() as f64;
                for i in 0..table.len() {
                    let v = g(table.ts[i], table.xs[i]);
                    Self::check_finite(v, table.ts[i], table.xs[i])?;
                    // ws already carries 1/samples; undo for the variance.
                    let contrib = table.ws[i] * v;
                    acc.add(contrib);
                    sq.add(contrib * contrib * samples);
                }
                let mean = acc.value();
                let var = (sq.value() - mean * mean).max(0.0);
                Ok(Integral {
                    value: mean,
                    err_estimate: libm::sqrt(var / samples),
                    nodes: table.len(),
                })
            }
            _ => {
                let m = self.per_axis_order();
                let coarse = self.grid_value(m / 2, &mut g)?;
                let fine = self.grid_value(m, &mut g)?;
                Ok(Integral {
                    value: fine.0,
                    err_estimate: (fine.0 - coarse.0).abs(),
                    nodes: fine.1,
                })
            }
        }
    }

    fn grid_value<F: FnMut(f64, Vec3) -> f64>(
        &self,
        m: usize,
        g: &mut F,
    ) -> Result<(f64, usize)> {
        let table = match self.scheme {
            Scheme::MapToCube => self.map_to_cube_table(m.max(4))?,
            Scheme::TensorGauss => self.tensor_gauss_table(m.max(4))?,
            Scheme::MonteCarlo => unreachable!("grid_value is for grid schemes"),
        };
        let mut acc = Accumulator::new();
        for i in 0..table.len() {
            let v = g(table.ts[i], table.xs[i]);
            Self::check_finite(v, table.ts[i], table.xs[i])?;
            acc.add(table.ws[i] * v);
        }
        Ok((acc.value(), table.len()))
    }

    fn check_finite(v: f64, t: f64, x: Vec3) -> Result<()> {
        if v.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(alloc::format!(
                "half-space integrand returned {v} at t = {t}, x = [{}, {}, {}]",
                x[0],
                x[1],
                x[2]
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{gamma_fn, PI};

    /// Closed form for int t^a exp(-t^2 - |x|^2): the t factor gives
    /// Gamma((a+1)/2)/2 and each spatial axis gives sqrt(pi).
    fn gaussian_truth(n: u32, a: f64) -> f64 {
        0.5 * gamma_fn(0.5 * (a + 1.0)).unwrap()
            * libm::pow(libm::sqrt(PI), (n - 1) as f64)
    }

    #[test]
    fn map_to_cube_gaussian() {
        for &(n, a) in &[(2u32, 0.0), (2, 1.0), (3, 0.0), (3, 1.0), (3, 0.5)] {
            let mut rule = HalfSpaceRule::new(n, a);
            rule.truncation_radius = 1.0;
            let got = rule
                .integrate(1e9, |t, x| {
                    libm::exp(-t * t - x[0] * x[0] - x[1] * x[1])
                })
                .unwrap();
            let want = gaussian_truth(n, a);
            assert!(
                (got.value - want).abs() < 5e-9 * want,
                "n = {n}, a = {a}: {} vs {want}, err_est {}",
                got.value,
                got.err_estimate
            );
            assert!(got.err_estimate < 1e-3 * want);
        }
    }

    #[test]
    fn map_to_cube_rational_profile() {
        // f(t,x) = (1 + t^2 + |x|^2)^{-s} over n = 3, a = 1:
        // in polar coordinates, area of upper half sphere with weight:
        // int_{S^2_+} t^a = pi (half of z-moment 2pi * int_0^1 z dz = pi),
        // radial part int_0^inf r^{a + n - 1} (1+r^2)^{-s} dr
        //   = B((n+a)/2, s - (n+a)/2) / 2 with n + a = 4, s = 4:
        //   B(2, 2)/2 = (1/6)/2 = 1/12. Total = pi / 12.
        let mut rule = HalfSpaceRule::new(3, 1.0);
        rule.truncation_radius = 1.0;
        let got = rule
            .integrate(8.0, |t, x| {
                let r2 = t * t + x[0] * x[0] + x[1] * x[1];
                libm::pow(1.0 + r2, -4.0)
            })
            .unwrap();
        let want = PI / 12.0;
        assert!(
            (got.value - want).abs() < 1e-9 * want,
            "{} vs {want}",
            got.value
        );
    }

    #[test]
    fn tensor_gauss_on_compact_support() {
        // Compactly supported bump: (1 - t^2 - x^2)_+^2 on n = 2, a = 1.
        // Polar: int_{S^1_+} t dt integral: int_0^{pi} sin th dth = 2;
        // radial: int_0^1 r^{2} (1-r^2)^2 dr = 8/105... recompute:
        // int_0^1 r^2 (1 - r^2)^2 dr = int r^2 - 2r^4 + r^6 = 1/3 - 2/5 + 1/7 = 8/105.
        let mut rule = HalfSpaceRule::new(2, 1.0);
        rule.scheme = Scheme::TensorGauss;
        rule.truncation_radius = 1.5;
        rule.node_budget = 65_536;
        let got = rule
            .integrate(1e9, |t, x| {
                let s = 1.0 - t * t - x[0] * x[0];
                if s > 0.0 {
                    s * s
                } else {
                    0.0
                }
            })
            .unwrap();
        let want = 2.0 * 8.0 / 105.0;
        // The support boundary cuts through the grid, so expect modest
        // accuracy; the refinement estimate has to notice it too.
        assert!((got.value - want).abs() < 2e-3 * want, "{}", got.value);
    }

    #[test]
    fn monte_carlo_matches_closed_form() {
        let mut rule = HalfSpaceRule::new(2, 1.0);
        rule.scheme = Scheme::MonteCarlo;
        rule.truncation_radius = 1.0;
        rule.node_budget = 200_000;
        let got = rule
            .integrate(1e9, |t, x| libm::exp(-t * t - x[0] * x[0]))
            .unwrap();
        let want = gaussian_truth(2, 1.0);
        assert!(
            (got.value - want).abs() < 4.0 * got.err_estimate,
            "{} vs {want} (stderr {})",
            got.value,
            got.err_estimate
        );
    }

    #[test]
    fn monte_carlo_is_seed_deterministic() {
        let mut rule = HalfSpaceRule::new(3, 0.5);
        rule.scheme = Scheme::MonteCarlo;
        rule.node_budget = 10_000;
        let f = |t: f64, x: Vec3| libm::exp(-t - x[0] * x[0] - x[1] * x[1]);
        let i1 = rule.integrate(1e9, f).unwrap();
        let i2 = rule.integrate(1e9, f).unwrap();
        assert_eq!(i1.value.to_bits(), i2.value.to_bits());
        rule.seed = 7;
        let i3 = rule.integrate(1e9, f).unwrap();
        assert_ne!(i1.value.to_bits(), i3.value.to_bits());
    }

    #[test]
    fn rejects_nonintegrable_decay() {
        let rule = HalfSpaceRule::new(3, 1.0);
        // Needs decay > n + a = 4.
        let err = rule.integrate(3.5, |_, _| 1.0).unwrap_err();
        match err {
            Error::NonIntegrable { decay, needed } => {
                assert!((decay - 3.5).abs() < 1e-15);
                assert!((needed - 4.0).abs() < 1e-15);
            }
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn aborts_on_nan_with_location() {
        let mut rule = HalfSpaceRule::new(2, 0.0);
        rule.node_budget = 256;
        let err = rule
            .integrate(1e9, |t, _| if t > 5.0 { f64::NAN } else { 0.0 })
            .unwrap_err();
        let msg = alloc::format!("{err}");
        assert!(msg.contains("t = "), "{msg}");
    }

    #[test]
    fn refinement_tightens_with_budget() {
        let f = |t: f64, x: Vec3| libm::exp(-t * t - x[0] * x[0]);
        let want = gaussian_truth(2, 0.0);
        let mut errs = alloc::vec::Vec::new();
        for budget in [256usize, 1_024, 16_384] {
            let mut rule = HalfSpaceRule::new(2, 0.0);
            rule.truncation_radius = 1.0;
            rule.node_budget = budget;
            let got = rule.integrate(1e9, f).unwrap();
            errs.push((got.value - want).abs() / want);
        }
        assert!(errs[2] < errs[1] && errs[1] < errs[0], "{errs:?}");
        assert!(errs[2] < 1e-10, "{errs:?}");
    }

    #[test]
    fn node_table_weights_are_positive_and_total_mass_checks() {
        // Summing the raw table against g = exp(-t - x^2) must reproduce
        // Gamma(a+1) * sqrt(pi) (separable closed form).
        let mut rule = HalfSpaceRule::new(2, 2.0);
        rule.truncation_radius = 2.0;
        rule.node_budget = 65_536;
        let table = rule.node_table().unwrap();
        assert!(table.ws.iter().all(|w| *w > 0.0));
        assert!(table.ts.iter().all(|t| *t > 0.0));
        let mut acc = Accumulator::new();
        for i in 0..table.len() {
            let x = table.xs[i][0];
            acc.add(table.ws[i] * libm::exp(-table.ts[i] - x * x));
        }
        let want = gamma_fn(3.0).unwrap() * libm::sqrt(PI);
        assert!((acc.value() - want).abs() < 1e-8 * want, "{}", acc.value());
    }
}
