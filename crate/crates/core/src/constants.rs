//! Brackets for the slope `C_λ`, intercept `B_λ` and variance slope `D_λ`.
//!
//! All three constants are closed expressions in three Laplace quantities
//!
//! * `P = ∫_0^∞ λ M e^{−λx} dx`
//! * `Q = ∫_0^∞ λ² x M e^{−λx} dx`
//! * `R = ∫_0^∞ λ M₂ e^{−λx} dx`
//!
//! each bracketed by a truncated integral over a solved grid plus a tail
//! bound. With `k = λ/(λ+1)` and `γ = (2−λ²)/(2(λ+1)²)`:
//!
//! * `C = k(1+P)`
//! * `B = (e^λ P − 1 − Q)/(λ+1) + γ(1+P)`
//! * `D = 2kγ(1+P)² + 2k(1+P)(λ−Q)/(λ+1) + λ(R−1)/(λ+1)`
//!
//! These are the transform identities with the `e^λ`-sized terms cancelled
//! symbolically. `C` and `B` increase in `P`, `B` and `D` decrease in `Q`,
//! `D` increases in `R` and is quadratic in `P`, so exact ranges over the
//! input box follow from endpoints plus the vertex.

use crate::bracket::Bracket;
use crate::error::{ParkError, Result};
use crate::grid::{GridKind, SegmentedGrid};
use crate::params::Params;
use crate::quadrature::integrate_weighted;
use crate::tails::TailBound;

/// `∫_0^upto x^power f(x) e^{−λx} dx` over a solved grid.
pub fn truncated_laplace(grid: &SegmentedGrid, lambda: f64, power: u8, upto: usize) -> Result<f64> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(ParkError::Domain(format!("lambda must be finite and nonnegative, got {lambda}")));
    }
    if upto > grid.horizon() {
        return Err(ParkError::Domain(format!(
            "truncation point {upto} beyond grid horizon {}",
            grid.horizon()
        )));
    }
    match power {
        0 => integrate_weighted(grid, |t| (-lambda * t).exp(), 0.0, upto as f64),
        1 => integrate_weighted(grid, |t| t * (-lambda * t).exp(), 0.0, upto as f64),
        _ => Err(ParkError::InvalidParams(format!("power must be 0 or 1, got {power}"))),
    }
}

fn gamma(lambda: f64) -> f64 {
    (2.0 - lambda * lambda) / (2.0 * (lambda + 1.0) * (lambda + 1.0))
}

pub fn c_from_p(lambda: f64, p: f64) -> f64 {
    lambda * (1.0 + p) / (lambda + 1.0)
}

pub fn b_from_pq(lambda: f64, p: f64, q: f64) -> f64 {
    (lambda.exp() * p - 1.0 - q) / (lambda + 1.0) + gamma(lambda) * (1.0 + p)
}

pub fn d_from_pqr(lambda: f64, p: f64, q: f64, r: f64) -> f64 {
    let k = lambda / (lambda + 1.0);
    let u = 1.0 + p;
    2.0 * k * gamma(lambda) * u * u + 2.0 * k * u * (lambda - q) / (lambda + 1.0) + lambda * (r - 1.0) / (lambda + 1.0)
}

pub fn c_bracket(lambda: f64, p: Bracket) -> Result<Bracket> {
    Bracket::new(c_from_p(lambda, p.lo), c_from_p(lambda, p.hi))
}

pub fn b_bracket(lambda: f64, p: Bracket, q: Bracket) -> Result<Bracket> {
    Bracket::new(b_from_pq(lambda, p.lo, q.hi), b_from_pq(lambda, p.hi, q.lo))
}

pub fn d_bracket(lambda: f64, p: Bracket, q: Bracket, r: Bracket) -> Result<Bracket> {
    let range = |q: f64, r: f64| {
        let mut candidates = vec![p.lo, p.hi];
        let g = gamma(lambda);
        if g != 0.0 {
            // stationary point of the quadratic in u = 1 + P
            let vertex = -(lambda - q) / (2.0 * g * (lambda + 1.0)) - 1.0;
            if p.lo < vertex && vertex < p.hi {
                candidates.push(vertex);
            }
        }
        let vals: Vec<f64> = candidates.iter().map(|&pp| d_from_pqr(lambda, pp, q, r)).collect();
        (
            vals.iter().copied().fold(f64::INFINITY, f64::min),
            vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    };
    let (lo, _) = range(q.hi, r.lo);
    let (_, hi) = range(q.lo, r.hi);
    Bracket::new(lo, hi)
}

fn check_grid(grid: &SegmentedGrid, kind: GridKind, lambda: f64, tail: &TailBound) -> Result<()> {
    if grid.kind() != kind || grid.lambda() != Some(lambda) {
        return Err(ParkError::Precondition(format!(
            "expected a {} grid solved at lambda={lambda}",
            kind.name()
        )));
    }
    if tail.n > grid.horizon() {
        return Err(ParkError::Precondition(format!(
            "tail starts at {} beyond grid horizon {}",
            tail.n,
            grid.horizon()
        )));
    }
    Ok(())
}

fn with_tail(truncated: f64, tail: &TailBound) -> Result<Bracket> {
    Bracket::new(truncated + tail.lower_tail, truncated + tail.upper_tail)
}

/// Bracket for `P`; `tail` bounds `∫_n^∞ λ M e^{−λx} dx`.
pub fn laplace_p(params: &Params, m_grid: &SegmentedGrid, tail: &TailBound) -> Result<Bracket> {
    let lambda = params.lambda();
    check_grid(m_grid, GridKind::M, lambda, tail)?;
    with_tail(lambda * truncated_laplace(m_grid, lambda, 0, tail.n)?, tail)
}

/// Bracket for `Q`; `xtail` bounds `∫_n^∞ λ² x M e^{−λx} dx`.
pub fn laplace_q(params: &Params, m_grid: &SegmentedGrid, xtail: &TailBound) -> Result<Bracket> {
    let lambda = params.lambda();
    check_grid(m_grid, GridKind::M, lambda, xtail)?;
    with_tail(lambda * lambda * truncated_laplace(m_grid, lambda, 1, xtail.n)?, xtail)
}

/// Bracket for `R`; `tail2` bounds `∫_n^∞ λ M₂ e^{−λx} dx`.
pub fn laplace_r(params: &Params, m2_grid: &SegmentedGrid, tail2: &TailBound) -> Result<Bracket> {
    let lambda = params.lambda();
    check_grid(m2_grid, GridKind::M2, lambda, tail2)?;
    with_tail(lambda * truncated_laplace(m2_grid, lambda, 0, tail2.n)?, tail2)
}

pub fn compute_c(params: &Params, m_grid: &SegmentedGrid, tail: &TailBound) -> Result<Bracket> {
    c_bracket(params.lambda(), laplace_p(params, m_grid, tail)?)
}

/// `B` needs `P` as well as `Q`: bracketing it through `C` alone would
/// discard the correlation between the two and overflow for large `λ`.
pub fn compute_b(params: &Params, m_grid: &SegmentedGrid, tail: &TailBound, xtail: &TailBound) -> Result<Bracket> {
    let p = laplace_p(params, m_grid, tail)?;
    let q = laplace_q(params, m_grid, xtail)?;
    b_bracket(params.lambda(), p, q)
}

pub fn compute_d(
    params: &Params,
    m_grid: &SegmentedGrid,
    m2_grid: &SegmentedGrid,
    tail: &TailBound,
    xtail: &TailBound,
    tail2: &TailBound,
) -> Result<Bracket> {
    let p = laplace_p(params, m_grid, tail)?;
    let q = laplace_q(params, m_grid, xtail)?;
    let r = laplace_r(params, m2_grid, tail2)?;
    d_bracket(params.lambda(), p, q, r)
}
