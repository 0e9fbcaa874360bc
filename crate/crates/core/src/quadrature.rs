//! Breakpoint-aware composite Simpson quadrature over segmented grids.
//!
//! Every integral is split at integer abscissae so that no panel straddles
//! a kink or jump. Runs with an even number of intervals use Simpson's rule
//! on the stored nodes; an odd leftover interval, or a partial interval at a
//! non-node endpoint, is integrated with three-point Gauss-Legendre applied
//! to the segment-local cubic interpolant. Both pieces are fourth order.

use crate::error::{ParkError, Result};
use crate::grid::{interp_segment, SegmentedGrid};
use crate::params::validate_resolution;

const GL_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GL_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
const SNAP: f64 = 1e-9;

/// Composite Simpson rule at `m` intervals per unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureRule {
    m: usize,
}

impl QuadratureRule {
    pub fn composite_simpson(m: usize) -> Result<Self> {
        validate_resolution(m)?;
        Ok(Self { m })
    }

    pub fn resolution(&self) -> usize {
        self.m
    }

    pub fn step(&self) -> f64 {
        1.0 / self.m as f64
    }

    /// Integral over the local node range `[i0, i1]` of a segment starting
    /// at `origin`. `node(i)` is the integrand at node `i`; `point(t)` is the
    /// integrand at an arbitrary abscissa inside the segment.
    pub(crate) fn node_range<N, P>(&self, origin: f64, i0: usize, i1: usize, node: N, point: P) -> f64
    where
        N: Fn(usize) -> f64,
        P: Fn(f64) -> f64,
    {
        debug_assert!(i0 <= i1 && i1 <= self.m);
        let h = self.step();
        let count = i1 - i0;
        let even_end = i0 + count - count % 2;
        let mut sum = 0.0;
        if even_end > i0 {
            let mut acc = node(i0) + node(even_end);
            let mut i = i0 + 1;
            while i < even_end {
                acc += 4.0 * node(i);
                if i + 1 < even_end {
                    acc += 2.0 * node(i + 1);
                }
                i += 2;
            }
            sum += acc * h / 3.0;
        }
        if count % 2 == 1 {
            let a = origin + (i1 - 1) as f64 * h;
            sum += gauss_legendre(a, a + h, &point);
        }
        sum
    }
}

/// Three-point Gauss-Legendre on `[a, b]`.
pub(crate) fn gauss_legendre<P: Fn(f64) -> f64>(a: f64, b: f64, f: &P) -> f64 {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS.iter())
        .map(|(&z, &w)| w * f(c + r * z))
        .sum::<f64>()
        * r
}

fn snap(s: f64) -> f64 {
    let r = s.round();
    if (s - r).abs() < SNAP {
        r
    } else {
        s
    }
}

/// Approximates `∫_a^b weight(t) grid(t) dt`.
///
/// Panels are split at every integer breakpoint and at `a`, `b`; within each
/// unit segment the segment's own closed-interval extension is used.
pub fn integrate_weighted<W>(grid: &SegmentedGrid, weight: W, a: f64, b: f64) -> Result<f64>
where
    W: Fn(f64) -> f64,
{
    let n = grid.horizon() as f64;
    if !(a.is_finite() && b.is_finite()) || a < 0.0 || b > n || a > b {
        return Err(ParkError::Domain(format!(
            "integration range [{a}, {b}] not inside grid range [0, {n}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let m = grid.resolution();
    let rule = QuadratureRule::composite_simpson(m)?;
    let h = rule.step();
    let first = a.floor() as usize;
    let last = (b.ceil() as usize).min(grid.horizon());
    let mut total = 0.0;
    for k in first..last {
        let origin = k as f64;
        let lo = a.max(origin);
        let hi = b.min(origin + 1.0);
        if hi <= lo {
            continue;
        }
        let seg = grid.segment(k);
        let point = |t: f64| weight(t) * interp_segment(seg, (t - origin) * m as f64);
        let node = |i: usize| weight(origin + i as f64 * h) * seg[i];
        let la = snap((lo - origin) * m as f64);
        let lb = snap((hi - origin) * m as f64);
        let ia = la.ceil() as usize;
        let ib = lb.floor() as usize;
        if ia > ib {
            total += gauss_legendre(lo, hi, &point);
            continue;
        }
        if (ia as f64) > la {
            total += gauss_legendre(lo, origin + ia as f64 * h, &point);
        }
        total += rule.node_range(origin, ia, ib, node, point);
        if lb > ib as f64 {
            total += gauss_legendre(origin + ib as f64 * h, hi, &point);
        }
    }
    Ok(total)
}
