//! Closed-form bounds for the Laplace tails `∫_n^∞` of `M`, `xM` and `M₂`.
//!
//! Crude bounds integrate the step functions `⌈(x−1)/2⌉ ≤ M ≤ ⌊x⌋` (and
//! their squares). Envelope bounds integrate the linear enclosure
//! `M(n) + I_n(x−n) ≤ M(x) ≤ M(n) + S_n(x−n)` valid beyond the horizon.
//!
//! Tails are in the normalisation used by the constants:
//! power 0 is `∫_n^∞ λ f e^{−λx} dx`, power 1 is `∫_n^∞ λ² x f e^{−λx} dx`.

use serde::{Deserialize, Serialize};

use crate::error::{ParkError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailMethod {
    Crude,
    Envelope,
}

impl TailMethod {
    pub fn name(self) -> &'static str {
        match self {
            TailMethod::Crude => "crude",
            TailMethod::Envelope => "envelope",
        }
    }
}

impl std::str::FromStr for TailMethod {
    type Err = ParkError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crude" => Ok(TailMethod::Crude),
            "envelope" => Ok(TailMethod::Envelope),
            other => Err(ParkError::InvalidParams(format!(
                "tail method must be crude or envelope, got {other}"
            ))),
        }
    }
}

/// Enclosure of a tail integral starting at `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub method: TailMethod,
    pub lower_tail: f64,
    pub upper_tail: f64,
    pub n: usize,
}

impl TailBound {
    fn new(method: TailMethod, n: usize, lower_tail: f64, upper_tail: f64) -> Self {
        debug_assert!(lower_tail <= upper_tail, "{lower_tail} > {upper_tail}");
        Self { method, lower_tail, upper_tail, n }
    }

    pub fn width(&self) -> f64 {
        self.upper_tail - self.lower_tail
    }
}

/// Integer staircase `Σ_{j≥1} c_j·1[x > a_j]` with `a_j = a0 + d(j−1)` and
/// `c_j = c0 + c1(j−1)`.
#[derive(Debug, Clone, Copy)]
struct Staircase {
    a0: u64,
    d: u64,
    c0: f64,
    c1: f64,
}

const FLOOR: Staircase = Staircase { a0: 1, d: 1, c0: 1.0, c1: 0.0 };
const CEIL_HALF: Staircase = Staircase { a0: 1, d: 2, c0: 1.0, c1: 0.0 };
const FLOOR_SQ: Staircase = Staircase { a0: 1, d: 1, c0: 1.0, c1: 2.0 };
const CEIL_HALF_SQ: Staircase = Staircase { a0: 1, d: 2, c0: 1.0, c1: 2.0 };

impl Staircase {
    /// `∫_n^∞ λ^{1+power} x^power f(x) e^{−λx} dx` for `power ∈ {0, 1}`.
    fn tail(&self, lambda: f64, n: usize, power: u8) -> f64 {
        let n_u = n as u64;
        let (a0, d) = (self.a0, self.d);
        // steps already switched on at x = n
        let j1 = if n_u >= a0 { (n_u - a0) / d + 1 } else { 0 };
        let j1f = j1 as f64;
        let clamped = j1f * self.c0 + self.c1 * j1f * (j1f - 1.0) / 2.0;
        let nf = n as f64;
        let w = |a: f64| match power {
            0 => (-lambda * a).exp(),
            _ => (lambda * a + 1.0) * (-lambda * a).exp(),
        };
        let head = clamped * w(nf);

        let a = (a0 + d * j1) as f64;
        let c = self.c0 + self.c1 * j1f;
        let ld = lambda * d as f64;
        let r = (-ld).exp();
        let one_minus_r = -(-ld).exp_m1();
        let s0 = 1.0 / one_minus_r;
        let s1 = r / (one_minus_r * one_minus_r);
        let s2 = r * (1.0 + r) / (one_minus_r * one_minus_r * one_minus_r);
        let lead = (-lambda * a).exp();
        let rest = match power {
            0 => lead * (c * s0 + self.c1 * s1),
            _ => {
                let la1 = lambda * a + 1.0;
                lead * (c * la1 * s0 + (c * ld + self.c1 * la1) * s1 + self.c1 * ld * s2)
            }
        };
        head + rest
    }
}

/// Crude bound on `∫_n^∞ λ M e^{−λx} dx`.
pub fn tail_crude_m(lambda: f64, n: usize) -> TailBound {
    TailBound::new(TailMethod::Crude, n, CEIL_HALF.tail(lambda, n, 0), FLOOR.tail(lambda, n, 0))
}

/// Crude bound on `∫_n^∞ λ² x M e^{−λx} dx`.
pub fn tail_crude_xm(lambda: f64, n: usize) -> TailBound {
    TailBound::new(TailMethod::Crude, n, CEIL_HALF.tail(lambda, n, 1), FLOOR.tail(lambda, n, 1))
}

/// Crude bound on `∫_n^∞ λ M₂ e^{−λx} dx`.
pub fn tail_crude_m2(lambda: f64, n: usize) -> TailBound {
    TailBound::new(TailMethod::Crude, n, CEIL_HALF_SQ.tail(lambda, n, 0), FLOOR_SQ.tail(lambda, n, 0))
}

fn check_slopes(inf_slope: f64, sup_slope: f64) -> Result<()> {
    if !(inf_slope.is_finite() && sup_slope.is_finite()) || inf_slope < 0.0 || inf_slope > sup_slope {
        return Err(ParkError::Precondition(format!(
            "slopes must satisfy 0 <= inf <= sup, got inf={inf_slope}, sup={sup_slope}"
        )));
    }
    Ok(())
}

/// `∫_n^∞ λ^{1+power} x^power (m_n + c(x−n)) e^{−λx} dx`.
fn linear_tail(lambda: f64, n: f64, m_n: f64, c: f64, power: u8) -> f64 {
    let e = (-lambda * n).exp();
    match power {
        0 => e * (m_n + c / lambda),
        _ => e * (m_n * (lambda * n + 1.0) + c * (lambda * n + 2.0) / lambda),
    }
}

/// Envelope bound on the power-0 or power-1 tail of `M`, from
/// `m_n = M(n)` and the slope window `[inf_slope, sup_slope]` of `M′` on
/// `[n−1, n]`.
pub fn tail_envelope_m(
    lambda: f64,
    n: usize,
    m_n: f64,
    inf_slope: f64,
    sup_slope: f64,
    power: u8,
) -> Result<TailBound> {
    check_slopes(inf_slope, sup_slope)?;
    if power > 1 {
        return Err(ParkError::InvalidParams(format!("power must be 0 or 1, got {power}")));
    }
    let nf = n as f64;
    Ok(TailBound::new(
        TailMethod::Envelope,
        n,
        linear_tail(lambda, nf, m_n, inf_slope, power),
        linear_tail(lambda, nf, m_n, sup_slope, power),
    ))
}

/// Envelope bound on `∫_n^∞ λ M₂ e^{−λx} dx`.
///
/// Lower: `M₂ ≥ M² ≥ (m_n + I(x−n))²`. Upper: the count never exceeds
/// `⌊x⌋`, so `M₂ ≤ ⌊x⌋·M ≤ ⌊x⌋(m_n + S(x−n))`.
pub fn tail_envelope_m2(lambda: f64, n: usize, m_n: f64, inf_slope: f64, sup_slope: f64) -> Result<TailBound> {
    check_slopes(inf_slope, sup_slope)?;
    let nf = n as f64;
    let e = (-lambda * nf).exp();
    let (a, b) = (m_n, inf_slope);
    let lower = e * (a * a + 2.0 * a * b / lambda + 2.0 * b * b / (lambda * lambda));

    let b = sup_slope;
    let r = (-lambda).exp();
    let one_minus_r = -(-lambda).exp_m1();
    let base = a + b / lambda;
    let upper = e * (nf * base + base * r / one_minus_r + b * r / (one_minus_r * one_minus_r));
    if lower > upper {
        // only possible when m_n or the slopes exceed the count bound
        return Err(ParkError::Precondition(format!(
            "inconsistent envelope inputs m_n={m_n}, slopes [{inf_slope}, {sup_slope}] at n={n}"
        )));
    }
    Ok(TailBound::new(TailMethod::Envelope, n, lower, upper))
}
