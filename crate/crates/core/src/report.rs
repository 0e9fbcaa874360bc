//! End-to-end constants pipeline.

use serde::{Deserialize, Serialize};

use crate::bracket::Bracket;
use crate::constants::{b_bracket, c_bracket, d_bracket, laplace_p, laplace_q, laplace_r};
use crate::envelope::window_extrema;
use crate::error::{ParkError, Result};
use crate::params::{validate_resolution, Params};
use crate::solver::{solve_m, solve_m2, solve_mprime};
use crate::tails::{
    tail_crude_m, tail_crude_m2, tail_crude_xm, tail_envelope_m, tail_envelope_m2, TailBound, TailMethod,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub lambda: f64,
    pub horizon_n: usize,
    pub resolution_m: usize,
    pub tail_method: TailMethod,
    pub c: Bracket,
    pub b: Bracket,
    pub d: Bracket,
    pub envelope_inf: Option<f64>,
    pub envelope_sup: Option<f64>,
    /// Largest endpoint change when the run is repeated at another
    /// resolution (`m/2`, or `2m` when `m/2` is not admissible).
    pub quadrature_halving_delta: f64,
    /// True when the uniform-placement derivative equation stood in for a
    /// vanishing rate.
    pub uniform_substitution: bool,
}

/// Brackets and envelope from a single resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Brackets {
    pub p: Bracket,
    pub q: Bracket,
    pub r: Bracket,
    pub c: Bracket,
    pub b: Bracket,
    pub d: Bracket,
    pub envelope: Option<(f64, f64)>,
}

/// Tail bounds for `M`, `xM` and `M₂` at truncation `n`.
pub struct Tails {
    pub m: TailBound,
    pub xm: TailBound,
    pub m2: TailBound,
}

/// Solve to `max(n, 3)`, truncate the Laplace integrals at `n`, and bound
/// the rest with the chosen tail method. `n < 3` is allowed for crude tails.
pub fn compute_brackets(lambda: f64, n: usize, m: usize, method: TailMethod) -> Result<Brackets> {
    if method == TailMethod::Envelope && n < 3 {
        return Err(ParkError::InvalidParams(format!("envelope tails need n >= 3, got {n}")));
    }
    let params = Params::new(lambda, n.max(3), m)?;
    let m_grid = solve_m(&params);
    let m2_grid = solve_m2(&params, &m_grid)?;
    let (tails, envelope) = match method {
        TailMethod::Crude => (
            Tails { m: tail_crude_m(lambda, n), xm: tail_crude_xm(lambda, n), m2: tail_crude_m2(lambda, n) },
            None,
        ),
        TailMethod::Envelope => {
            let (inf, sup) = window_extrema(&solve_mprime(&params), n)?;
            let m_n = m_grid.value_at(n as f64)?;
            (
                Tails {
                    m: tail_envelope_m(lambda, n, m_n, inf, sup, 0)?,
                    xm: tail_envelope_m(lambda, n, m_n, inf, sup, 1)?,
                    m2: tail_envelope_m2(lambda, n, m_n, inf, sup)?,
                },
                Some((inf, sup)),
            )
        }
    };
    let p = laplace_p(&params, &m_grid, &tails.m)?;
    let q = laplace_q(&params, &m_grid, &tails.xm)?;
    let r = laplace_r(&params, &m2_grid, &tails.m2)?;
    Ok(Brackets {
        p,
        q,
        r,
        c: c_bracket(lambda, p)?,
        b: b_bracket(lambda, p, q)?,
        d: d_bracket(lambda, p, q, r)?,
        envelope,
    })
}

fn max_endpoint_delta(a: &Brackets, b: &Brackets) -> f64 {
    [(a.c, b.c), (a.b, b.b), (a.d, b.d)]
        .iter()
        .flat_map(|(x, y)| [(x.lo - y.lo).abs(), (x.hi - y.hi).abs()])
        .fold(0.0, f64::max)
}

fn comparison_resolution(lambda: f64, m: usize) -> usize {
    let half = m / 2;
    if validate_resolution(half).is_ok() && lambda <= half as f64 / 2.0 {
        half
    } else {
        2 * m
    }
}

pub fn compute_report(lambda: f64, n: usize, m: usize, method: TailMethod) -> Result<ConstantsReport> {
    let main = compute_brackets(lambda, n, m, method)?;
    let other = compute_brackets(lambda, n, comparison_resolution(lambda, m), method)?;
    let params = Params::new(lambda, n.max(3), m)?;
    Ok(ConstantsReport {
        lambda,
        horizon_n: n,
        resolution_m: m,
        tail_method: method,
        c: main.c,
        b: main.b,
        d: main.d,
        envelope_inf: main.envelope.map(|e| e.0),
        envelope_sup: main.envelope.map(|e| e.1),
        quadrature_halving_delta: max_endpoint_delta(&main, &other),
        uniform_substitution: params.uses_uniform_substitution(),
    })
}
