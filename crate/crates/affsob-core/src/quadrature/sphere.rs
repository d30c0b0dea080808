//! Quadrature on the unit spheres S^0, S^1, S^2.
//!
//! Directional norms integrate over the sphere of spatial directions, so
//! the ambient dimensions that occur are 1, 2, 3. The conventions:
//!
//! * `S^0 = {-1, +1}` carries counting measure, total mass 2;
//! * `S^1` uses the `M`-point trapezoid rule (equal weights `2 pi / M`),
//!   exact for trigonometric polynomials of degree `< M`;
//! * `S^2` uses a Gauss-Legendre grid in the polar cosine crossed with a
//!   trapezoid in azimuth (`M = 2L`), exact through spherical-harmonic
//!   degree `2L - 1`.
//!
//! Every rule is antipodally closed, which the even-in-`xi` directional
//! integrands rely on, and all weights are strictly positive.

use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::quadrature::gauss::gauss_legendre;
use crate::sum::Accumulator;
use alloc::vec::Vec;

#[derive(Debug, Clone)]
pub struct SphereRule {
    ambient_dim: usize,
    nodes: Vec<Vec3>,
    weights: Vec<f64>,
    exact_degree: usize,
}

impl SphereRule {
    /// Rule on the unit sphere of `R^d` (`d` in `1..=3`). `resolution` is a
    /// node budget: ignored for `d = 1` (the two-point sphere), the number
    /// of angles for `d = 2` (rounded up to even, at least 4), and the
    /// total grid size for `d = 3` (realized as `2 L^2` nodes).
    pub fn in_dim(d: usize, resolution: usize) -> Result<Self> {
        match d {
            1 => Ok(SphereRule {
                ambient_dim: 1,
                nodes: alloc::vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]],
                weights: alloc::vec![1.0, 1.0],
                exact_degree: usize::MAX,
            }),
            2 => {
                let m = resolution.max(4).next_multiple_of(2);
                let w = 2.0 * core::f64::consts::PI / m as f64;
                let mut nodes = Vec::with_capacity(m);
                for j in 0..m {
                    let th = 2.0 * core::f64::consts::PI * j as f64 / m as f64;
                    nodes.push([libm::cos(th), libm::sin(th), 0.0]);
                }
                Ok(SphereRule {
                    ambient_dim: 2,
                    nodes,
                    weights: alloc::vec![w; m],
                    exact_degree: m - 1,
                })
            }
            3 => {
                let l = libm::floor(libm::sqrt((resolution as f64 / 2.0).max(4.0))) as usize;
                let m = 2 * l;
                let (zs, zws) = gauss_legendre(l)?;
                let mut nodes = Vec::with_capacity(l * m);
                let mut weights = Vec::with_capacity(l * m);
                let wphi = 2.0 * core::f64::consts::PI / m as f64;
                for (z, zw) in zs.iter().zip(&zws) {
                    let s = libm::sqrt((1.0 - z * z).max(0.0));
                    for j in 0..m {
                        let th = 2.0 * core::f64::consts::PI * j as f64 / m as f64;
                        nodes.push([s * libm::cos(th), s * libm::sin(th), *z]);
                        weights.push(zw * wphi);
                    }
                }
                Ok(SphereRule {
                    ambient_dim: 3,
                    nodes,
                    weights,
                    exact_degree: 2 * l - 1,
                })
            }
            _ => Err(Error::domain(alloc::format!(
                "sphere rules cover ambient dimension 1..=3, got {d}"
            ))),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Highest polynomial degree integrated exactly (`usize::MAX` for the
    /// two-point sphere, where every function is a polynomial).
    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }

    /// Integrate `f` against the surface measure. A non-finite value aborts
    /// with the node index and coordinates so the offending direction can
    /// be reproduced.
    pub fn integrate<F: FnMut(Vec3) -> f64>(&self, mut f: F) -> Result<f64> {
        let mut acc = Accumulator::new();
        for (i, (x, w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let v = f(*x);
            if !v.is_finite() {
                return Err(Error::NonFinite(alloc::format!(
                    "sphere integrand returned {v} at node {i} = [{}, {}, {}]",
                    x[0],
                    x[1],
                    x[2]
                )));
            }
            acc.add(w * v);
        }
        Ok(acc.value())
    }
}
