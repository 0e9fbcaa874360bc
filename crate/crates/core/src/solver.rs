//! Method-of-steps solvers.
//!
//! Each solver seeds the first unit segments from closed forms and then
//! fills segment `k` from data on segments `0..k`: the value at `x + 1`
//! needs integrals up to `x`, which lies in the previous, already complete
//! segment. Segments are filled left to right, nodes left to right. Away
//! from the jump points a segment starts at its left neighbour's endpoint.

use crate::error::{ParkError, Result};
use crate::grid::{interp_segment, GridKind, SegmentedGrid};
use crate::model::{closed_m, mprime_first_step, one_minus_exp_neg};
use crate::params::{validate_resolution, Params};
use crate::quadrature::{gauss_legendre, QuadratureRule};

/// `e^{-lambda i h}` for every node position on the grid.
struct ExpTable {
    lambda: f64,
    vals: Vec<f64>,
}

impl ExpTable {
    fn new(lambda: f64, n: usize, m: usize) -> Self {
        let h = 1.0 / m as f64;
        let vals = (0..=n * m).map(|i| (-lambda * i as f64 * h).exp()).collect();
        Self { lambda, vals }
    }

    #[inline]
    fn at(&self, pos: usize) -> f64 {
        self.vals[pos]
    }
}

fn check_seed(seeded: usize, n: usize) -> Result<()> {
    if !(2..=3).contains(&seeded) || seeded > n {
        return Err(ParkError::Precondition(format!(
            "analytic seed must cover 2 or 3 segments of a {n}-segment grid, got {seeded}"
        )));
    }
    Ok(())
}

/// `∫_0^x λ(e^{-λu} + e^{-λ(x-u)}) g(u) du` for `x` at node `(kx, jx)`.
///
/// This is the direct term plus the reflected convolution term of the
/// saturation equation after substituting `u = x - t`; the weight is smooth,
/// so only the integer breakpoints of `g` need splitting.
fn symmetric_kernel(
    segs: &[Vec<f64>],
    kx: usize,
    jx: usize,
    rule: &QuadratureRule,
    table: &ExpTable,
) -> f64 {
    let m = rule.resolution();
    let lambda = table.lambda;
    let px = kx * m + jx;
    let x = kx as f64 + jx as f64 / m as f64;
    let mut total = 0.0;
    for (s, seg) in segs.iter().enumerate().take(kx + 1) {
        let i1 = if s < kx { m } else { jx };
        if i1 == 0 {
            continue;
        }
        let base = s * m;
        let origin = s as f64;
        let node = |i: usize| lambda * (table.at(base + i) + table.at(px - base - i)) * seg[i];
        let point = |t: f64| {
            lambda * ((-lambda * t).exp() + (-lambda * (x - t)).exp())
                * interp_segment(seg, (t - origin) * m as f64)
        };
        total += rule.node_range(origin, 0, i1, node, point);
    }
    total
}

/// `∫_0^x λe^{-λt} M(t) M(x - t) dt` for `x` at node `(kx, jx)`.
///
/// Panels are split where either factor crosses an integer: at integer `t`
/// and at `t = x - integer`, which is node `jx` of every segment.
fn product_convolution(
    msegs: &[&[f64]],
    zero: &[bool],
    kx: usize,
    jx: usize,
    rule: &QuadratureRule,
    table: &ExpTable,
) -> f64 {
    let m = rule.resolution();
    let lambda = table.lambda;
    let x = kx as f64 + jx as f64 / m as f64;
    let mut total = 0.0;
    for s in 0..=kx {
        if zero[s] {
            continue;
        }
        let seg = msegs[s];
        let origin = s as f64;
        let base = s * m;
        // t in [s, s + jx/m]: x - t lies in segment kx - s
        let p = kx - s;
        if jx > 0 && !zero[p] {
            let partner = msegs[p];
            let node = |i: usize| lambda * table.at(base + i) * seg[i] * partner[jx - i];
            let point = |t: f64| {
                lambda * (-lambda * t).exp()
                    * interp_segment(seg, (t - origin) * m as f64)
                    * interp_segment(partner, (x - t - p as f64) * m as f64)
            };
            total += rule.node_range(origin, 0, jx, node, point);
        }
        // t in [s + jx/m, s + 1]: x - t lies in segment kx - s - 1
        if s < kx && jx < m && !zero[p - 1] {
            let q = p - 1;
            let partner = msegs[q];
            let node = |i: usize| lambda * table.at(base + i) * seg[i] * partner[m + jx - i];
            let point = |t: f64| {
                lambda * (-lambda * t).exp()
                    * interp_segment(seg, (t - origin) * m as f64)
                    * interp_segment(partner, (x - t - q as f64) * m as f64)
            };
            total += rule.node_range(origin, jx, m, node, point);
        }
    }
    total
}

fn into_grid(kind: GridKind, lambda: Option<f64>, m: usize, segs: Vec<Vec<f64>>) -> SegmentedGrid {
    let n = segs.len();
    let mut grid = SegmentedGrid::zeros(kind, lambda, n, m);
    for (k, seg) in segs.into_iter().enumerate() {
        grid.segment_mut(k).copy_from_slice(&seg);
    }
    grid
}

/// Expected car count `M_λ` on `[0, n]`.
pub fn solve_m(params: &Params) -> SegmentedGrid {
    solve_m_seeded(params, 3).expect("three-segment seed fits every valid horizon")
}

/// Like [`solve_m`], but only the first `seeded` segments (2 or 3) come from
/// the closed form; the rest are stepped.
pub fn solve_m_seeded(params: &Params, seeded: usize) -> Result<SegmentedGrid> {
    let (lambda, n, m) = (params.lambda(), params.horizon_n(), params.resolution_m());
    check_seed(seeded, n)?;
    let rule = QuadratureRule::composite_simpson(m)?;
    let table = ExpTable::new(lambda, n, m);
    let h = rule.step();
    let mut segs = vec![vec![0.0; m + 1]; n];
    segs[1].fill(1.0);
    if seeded == 3 {
        for (j, v) in segs[2].iter_mut().enumerate() {
            *v = closed_m(2.0 + j as f64 * h, lambda)?;
        }
    }
    for k in seeded..n {
        let next: Vec<f64> = (0..=m)
            .map(|j| {
                let x = (k - 1) as f64 + j as f64 * h;
                if j == 0 {
                    return segs[k - 1][m];
                }
                symmetric_kernel(&segs, k - 1, j, &rule, &table) / one_minus_exp_neg(lambda * x) + 1.0
            })
            .collect();
        segs[k] = next;
    }
    Ok(into_grid(GridKind::M, Some(lambda), m, segs))
}

/// Derivative `M′_λ` on `(0, n]`.
///
/// Below [`crate::params::UNIFORM_SUBSTITUTION_LAMBDA`] the uniform-placement
/// equation is stepped instead; check [`Params::uses_uniform_substitution`].
pub fn solve_mprime(params: &Params) -> SegmentedGrid {
    solve_mprime_seeded(params, 3).expect("three-segment seed fits every valid horizon")
}

pub fn solve_mprime_seeded(params: &Params, seeded: usize) -> Result<SegmentedGrid> {
    let (lambda, n, m) = (params.lambda(), params.horizon_n(), params.resolution_m());
    check_seed(seeded, n)?;
    if params.uses_uniform_substitution() {
        let segs = uniform_mprime_segments(n, m, seeded);
        return Ok(into_grid(GridKind::Mprime, Some(lambda), m, segs));
    }
    let h = 1.0 / m as f64;
    let mut segs = vec![vec![0.0; m + 1]; n];
    if seeded == 3 {
        for (j, v) in segs[2].iter_mut().enumerate() {
            *v = mprime_first_step(1.0 + j as f64 * h, lambda);
        }
    }
    // Running integral ∫_1^x λ sinh(λt) M′(t) dt, carried as e^{-λx} times
    // its value so that large λx cannot overflow.
    let decay = (-lambda * h).exp();
    let seed_term = -lambda * (-2.0 * lambda).exp_m1() / 2.0;
    let mut running = 0.0;
    for s in 1..n - 1 {
        let target = s + 1;
        let origin = s as f64;
        for i in 0..=m {
            let x = origin + i as f64 * h;
            if i > 0 {
                let src = &segs[s];
                let kernel = |t: f64| {
                    -lambda * (-lambda * (x - t)).exp() * (-2.0 * lambda * t).exp_m1() / 2.0
                        * interp_segment(src, (t - origin) * m as f64)
                };
                running = running * decay + gauss_legendre(x - h, x, &kernel);
            }
            if target >= seeded && target >= 3 && i == 0 {
                segs[target][0] = segs[s][m];
            } else if target >= seeded {
                let d = one_minus_exp_neg(lambda * x);
                let numer = running + seed_term * (-lambda * (x - 1.0)).exp();
                segs[target][i] = numer / (0.5 * d * d);
            }
        }
    }
    Ok(into_grid(GridKind::Mprime, Some(lambda), m, segs))
}

fn uniform_mprime_segments(n: usize, m: usize, seeded: usize) -> Vec<Vec<f64>> {
    let h = 1.0 / m as f64;
    let mut segs = vec![vec![0.0; m + 1]; n];
    if seeded == 3 {
        for (j, v) in segs[2].iter_mut().enumerate() {
            let y = 1.0 + j as f64 * h;
            *v = 2.0 / (y * y);
        }
    }
    let mut running = 0.0;
    for s in 1..n - 1 {
        let target = s + 1;
        let origin = s as f64;
        for i in 0..=m {
            let x = origin + i as f64 * h;
            if i > 0 {
                let src = &segs[s];
                let kernel = |t: f64| 2.0 * t * interp_segment(src, (t - origin) * m as f64);
                running += gauss_legendre(x - h, x, &kernel);
            }
            if target >= seeded && target >= 3 && i == 0 {
                segs[target][0] = segs[s][m];
            } else if target >= seeded {
                segs[target][i] = (running + 2.0) / (x * x);
            }
        }
    }
    segs
}

/// Uniform-placement derivative `M′` on `(0, n]`.
pub fn solve_uniform_mprime(horizon_n: usize, resolution_m: usize) -> Result<SegmentedGrid> {
    solve_uniform_mprime_seeded(horizon_n, resolution_m, 3)
}

pub fn solve_uniform_mprime_seeded(
    horizon_n: usize,
    resolution_m: usize,
    seeded: usize,
) -> Result<SegmentedGrid> {
    if horizon_n < 3 {
        return Err(ParkError::InvalidParams(format!(
            "horizon n must be at least 3, got {horizon_n}"
        )));
    }
    validate_resolution(resolution_m)?;
    check_seed(seeded, horizon_n)?;
    let segs = uniform_mprime_segments(horizon_n, resolution_m, seeded);
    Ok(into_grid(GridKind::UniformMprime, None, resolution_m, segs))
}

/// Second moment `M_{2,λ}` on `[0, n]`, given the solved mean grid.
pub fn solve_m2(params: &Params, m_grid: &SegmentedGrid) -> Result<SegmentedGrid> {
    let (lambda, n, m) = (params.lambda(), params.horizon_n(), params.resolution_m());
    if m_grid.kind() != GridKind::M
        || m_grid.lambda() != Some(lambda)
        || m_grid.resolution() != m
        || m_grid.horizon() < n
    {
        return Err(ParkError::Precondition(
            "mean grid must be an M grid solved with the same lambda, resolution and at least the same horizon"
                .into(),
        ));
    }
    let rule = QuadratureRule::composite_simpson(m)?;
    let table = ExpTable::new(lambda, n, m);
    let h = rule.step();
    let msegs: Vec<&[f64]> = (0..n).map(|k| m_grid.segment(k)).collect();
    let zero: Vec<bool> = msegs.iter().map(|s| s.iter().all(|&v| v == 0.0)).collect();

    let mut m2 = vec![vec![0.0; m + 1]; n];
    m2[1].fill(1.0);
    // g = M₂ + 2M on completed segments
    let mut g: Vec<Vec<f64>> = (0..2)
        .map(|k| m2[k].iter().zip(msegs[k]).map(|(a, b)| a + 2.0 * b).collect())
        .collect();
    for k in 2..n {
        let next: Vec<f64> = (0..=m)
            .map(|j| {
                if j == 0 {
                    return m2[k - 1][m];
                }
                let x = (k - 1) as f64 + j as f64 * h;
                let direct = symmetric_kernel(&g, k - 1, j, &rule, &table);
                let product = product_convolution(&msegs, &zero, k - 1, j, &rule, &table);
                (direct + 2.0 * product) / one_minus_exp_neg(lambda * x) + 1.0
            })
            .collect();
        g.push(next.iter().zip(msegs[k]).map(|(a, b)| a + 2.0 * b).collect());
        m2[k] = next;
    }
    Ok(into_grid(GridKind::M2, Some(lambda), m, m2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{bound_ceil_half, bound_floor, closed_mprime};

    fn params(lambda: f64, n: usize, m: usize) -> Params {
        Params::new(lambda, n, m).unwrap()
    }

    #[test]
    fn unit_two_segment_is_one() {
        let g = solve_m(&params(0.7, 5, 32));
        assert!(g.segment(1).iter().all(|&v| v == 1.0));
        assert!(g.segment(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_step_reproduces_closed_form() {
        for &lambda in &[0.5, 1.0, 2.0] {
            let g = solve_m_seeded(&params(lambda, 3, 256), 2).unwrap();
            for (j, &v) in g.segment(2).iter().enumerate() {
                let x = 2.0 + j as f64 / 256.0;
                let want = closed_m(x, lambda).unwrap();
                assert!((v - want).abs() < 1e-10, "lambda={lambda} x={x}: {v} vs {want}");
            }
        }
    }

    #[test]
    fn stepped_and_seeded_solutions_agree_downstream() {
        let p = params(1.0, 6, 128);
        let a = solve_m(&p);
        let b = solve_m_seeded(&p, 2).unwrap();
        let diff = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-9, "{diff}");
    }

    #[test]
    fn m_respects_count_bounds_and_is_monotone() {
        for &lambda in &[0.1, 1.0, 5.0] {
            let g = solve_m(&params(lambda, 7, 64));
            let mut prev = 0.0;
            for (x, v, _) in g.nodes() {
                assert!(v >= bound_ceil_half(x) as f64 - 1e-12, "x={x} v={v}");
                assert!(v <= bound_floor(x) as f64 + 1e-12, "x={x} v={v}");
                assert!(v >= prev - 1e-12, "not monotone at x={x}");
                prev = v;
            }
        }
    }

    #[test]
    fn mprime_first_segment_matches_closed_form() {
        for &lambda in &[0.5, 1.0, 2.0] {
            let g = solve_mprime_seeded(&params(lambda, 4, 256), 2).unwrap();
            for (j, &v) in g.segment(2).iter().enumerate() {
                let x = 2.0 + j as f64 / 256.0;
                let want = closed_mprime(x, lambda, true).unwrap();
                assert!((v - want).abs() < 1e-10);
            }
            assert!(g.values().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn mprime_integrates_back_to_m() {
        let p = params(0.5, 7, 256);
        let mg = solve_m(&p);
        let dg = solve_mprime(&p);
        let mut worst: f64 = 0.0;
        for k in 1..7 {
            for j in (0..=256).step_by(16) {
                let x = k as f64 + j as f64 / 256.0;
                // jump of size 1 at x = 1, none at x = 2
                let integral = crate::quadrature::integrate_weighted(&dg, |_| 1.0, 0.0, x).unwrap();
                worst = worst.max((1.0 + integral - mg.segment(k)[j]).abs());
            }
        }
        assert!(worst < 2e-6, "{worst}");
    }

    #[test]
    fn m2_second_segment_is_three_m_minus_two() {
        // on (2,3] the count is 1 or 2, so v² = 3v − 2
        for &lambda in &[0.3, 1.0, 3.0] {
            let p = params(lambda, 3, 128);
            let m2 = solve_m2(&p, &solve_m(&p)).unwrap();
            assert!(m2.segment(1).iter().all(|&v| v == 1.0));
            for (j, &v) in m2.segment(2).iter().enumerate() {
                let x = 2.0 + j as f64 / 128.0;
                let want = 3.0 * closed_m(x, lambda).unwrap() - 2.0;
                assert!((v - want).abs() < 1e-8, "lambda={lambda} x={x}: {v} vs {want}");
            }
        }
    }

    #[test]
    fn m2_bounds_and_jensen() {
        for &lambda in &[0.1, 1.0, 5.0] {
            let p = params(lambda, 7, 64);
            let mg = solve_m(&p);
            let m2 = solve_m2(&p, &mg).unwrap();
            for ((x, v2, _), (_, v, _)) in m2.nodes().zip(mg.nodes()) {
                let lo = bound_ceil_half(x) as f64;
                let hi = bound_floor(x) as f64;
                assert!(v2 >= v * v - 1e-10, "Jensen fails at x={x}");
                assert!(v2 >= lo * lo - 1e-10 && v2 <= hi * hi + 1e-10, "x={x} v2={v2}");
            }
        }
    }

    #[test]
    fn m2_rejects_mismatched_mean_grid() {
        let p = params(1.0, 5, 32);
        let other = solve_m(&params(1.1, 5, 32));
        assert!(solve_m2(&p, &other).is_err());
        let coarse = solve_m(&params(1.0, 5, 16));
        assert!(solve_m2(&p, &coarse).is_err());
        let short = solve_m(&params(1.0, 4, 32));
        assert!(solve_m2(&p, &short).is_err());
    }

    #[test]
    fn uniform_first_step_and_range() {
        let g = solve_uniform_mprime_seeded(8, 128, 2).unwrap();
        for (j, &v) in g.segment(2).iter().enumerate() {
            let x = 2.0 + j as f64 / 128.0;
            assert!((v - 2.0 / ((x - 1.0) * (x - 1.0))).abs() < 1e-12);
        }
        assert!(g.values().iter().all(|&v| (0.0..=2.0).contains(&v)));
        assert!(solve_uniform_mprime(2, 8).is_err());
    }

    #[test]
    fn tiny_lambda_substitutes_uniform_equation() {
        let p = params(1e-8, 6, 32);
        let a = solve_mprime(&p);
        let b = solve_uniform_mprime(6, 32).unwrap();
        assert_eq!(a.values(), b.values());
        assert_eq!(a.kind(), GridKind::Mprime);
    }

    #[test]
    fn lambda_continuity() {
        let a = solve_m(&params(1.0, 7, 64));
        let b = solve_m(&params(1.001, 7, 64));
        let diff = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-2 && diff > 0.0, "{diff}");
    }

    fn refinement_ratio(solve: impl Fn(usize) -> SegmentedGrid) -> f64 {
        let (g1, g2, g4) = (solve(16), solve(32), solve(64));
        let n = g1.horizon();
        let mut d12: f64 = 0.0;
        let mut d24: f64 = 0.0;
        for k in 0..n {
            for j in 0..=16 {
                let (a, b, c) = (g1.segment(k)[j], g2.segment(k)[2 * j], g4.segment(k)[4 * j]);
                d12 = d12.max((a - b).abs());
                d24 = d24.max((b - c).abs());
            }
        }
        d12 / d24
    }

    #[test]
    fn fourth_order_grid_convergence() {
        let lambda = 1.0;
        let r = refinement_ratio(|m| solve_m(&params(lambda, 7, m)));
        assert!(r > 11.3, "M ratio {r}");
        let r = refinement_ratio(|m| solve_mprime(&params(lambda, 7, m)));
        assert!(r > 11.3, "M' ratio {r}");
        let r = refinement_ratio(|m| {
            let p = params(lambda, 6, m);
            solve_m2(&p, &solve_m(&p)).unwrap()
        });
        assert!(r > 11.3, "M2 ratio {r}");
        let r = refinement_ratio(|m| solve_uniform_mprime(8, m).unwrap());
        assert!(r > 11.3, "uniform ratio {r}");
    }
}
