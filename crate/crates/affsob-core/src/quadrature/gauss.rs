//! Gauss-Legendre nodes and a graded-panel one-dimensional integrator.

use crate::error::{Error, Result};
use crate::sum::Accumulator;
use alloc::vec::Vec;

/// Nodes and weights of the `m`-point Gauss-Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre recurrence. Exact for
/// polynomials of degree `2m - 1`.
pub fn gauss_legendre(m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if m == 0 || m > 4096 {
        return Err(Error::domain("Gauss-Legendre order must be in 1..=4096"));
    }
    let mut nodes = alloc::vec![0.0; m];
    let mut weights = alloc::vec![0.0; m];
    let mf = m as f64;
    // Roots come in +/- pairs; solve for the non-negative half.
    for i in 0..m.div_ceil(2) {
        // Tricomi-style initial guess, accurate enough for Newton from any m.
        let mut x = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence: (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 1..m {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = mf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[m - 1 - i] = x;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    Ok((nodes, weights))
}

/// Nodes and weights mapped to `[lo, hi]`.
pub fn gauss_legendre_on(m: usize, lo: f64, hi: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let (xs, ws) = gauss_legendre(m)?;
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    Ok((
        xs.iter().map(|x| mid + half * x).collect(),
        ws.iter().map(|w| half * w).collect(),
    ))
}

/// Integrate `f` over `[lo, hi]` with panels graded geometrically toward
/// both endpoints, Gauss-Legendre of the given order on each panel.
///
/// Intended for integrands that are smooth inside but have an algebraic
/// kink at one or both endpoints (weighted slice volumes are the main
/// client); the shrinking panels recover nearly full accuracy without any
/// endpoint-specific substitution.
pub fn graded_panels<F: FnMut(f64) -> f64>(
    lo: f64,
    hi: f64,
    panels_per_side: usize,
    ratio: f64,
    order: usize,
    mut f: F,
) -> Result<f64> {
    if !(hi > lo) || !(0.0 < ratio && ratio < 1.0) || panels_per_side == 0 {
        return Err(Error::domain("graded_panels: bad interval or grading"));
    }
    // Breakpoints at lo + (hi-lo) * ratio^k / 2 from the left and mirrored
    // from the right, meeting in the middle.
    let mut cuts = alloc::vec![lo];
    let len = hi - lo;
    let mut frac = 0.5;
    let mut left = Vec::new();
    let mut right = Vec::new();
    for _ in 0..panels_per_side - 1 {
        frac *= ratio;
        left.push(lo + len * frac);
        right.push(hi - len * frac);
    }
    for &c in left.iter().rev() {
        cuts.push(c);
    }
    cuts.push(lo + 0.5 * len);
    cuts.extend(right.iter().copied());
    cuts.push(hi);

    let mut acc = Accumulator::new();
    for pair in cuts.windows(2) {
        let (xs, ws) = gauss_legendre_on(order, pair[0], pair[1])?;
        for (x, w) in xs.iter().zip(&ws) {
            let v = f(*x);
            if !v.is_finite() {
                return Err(Error::NonFinite(alloc::format!(
                    "graded_panels: integrand returned {v} at x = {x}"
                )));
            }
            acc.add(w * v);
        }
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_nodes_match_known_values() {
        let (xs, ws) = gauss_legendre(2).unwrap();
        let r = 1.0 / libm::sqrt(3.0);
        assert!((xs[0] + r).abs() < 1e-15 && (xs[1] - r).abs() < 1e-15);
        assert!((ws[0] - 1.0).abs() < 1e-15 && (ws[1] - 1.0).abs() < 1e-15);

        let (xs, ws) = gauss_legendre(3).unwrap();
        assert!(xs[1].abs() < 1e-15);
        assert!((ws[1] - 8.0 / 9.0).abs() < 1e-15);
        assert!((xs[2] - libm::sqrt(0.6)).abs() < 1e-14);
    }

    #[test]
    fn polynomial_exactness() {
        // m points integrate x^k exactly for k <= 2m - 1.
        for m in [4usize, 9, 16] {
            let (xs, ws) = gauss_legendre(m).unwrap();
            for k in 0..2 * m {
                let got: f64 = xs
                    .iter()
                    .zip(&ws)
                    .map(|(x, w)| w * libm::pow(*x, k as f64))
                    .sum();
                let want = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
                assert!((got - want).abs() < 1e-13, "m = {m}, k = {k}");
            }
        }
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for m in [1usize, 7, 64, 257] {
            let (_, ws) = gauss_legendre(m).unwrap();
            let s: f64 = ws.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "m = {m}");
            assert!(ws.iter().all(|w| *w > 0.0));
        }
    }

    #[test]
    fn graded_panels_handles_endpoint_kinks() {
        // int_0^1 x^{0.5} (1 - x)^{0.5} dx = pi / 8.
        let got = graded_panels(0.0, 1.0, 10, 0.35, 16, |x| {
            libm::sqrt(x) * libm::sqrt(1.0 - x)
        })
        .unwrap();
        assert!((got - core::f64::consts::PI / 8.0).abs() < 1e-10, "{got}");

        // Smooth integrand sanity: int_0^pi sin = 2.
        let got = graded_panels(0.0, core::f64::consts::PI, 4, 0.5, 12, libm::sin).unwrap();
        assert!((got - 2.0).abs() < 1e-12);
    }
}
