//! Window extrema of derivative grids and their nesting.
//!
//! For equations of the form `f(x+1) = (∫_0^x K f + c) / ∫_0^x K` with
//! `K ≥ 0`, each value beyond 3 is a weighted mean of earlier values, so
//! the range of `f` over `[x, x+1]` lies inside its range over `[x−1, x]`.
//! The window `[n−1, n]` therefore bounds the slope of `M` for all `x ≥ n`.

use crate::error::{ParkError, Result};
use crate::grid::{GridKind, SegmentedGrid};

/// Slack allowed in the nesting comparison.
pub const NESTING_TOLERANCE: f64 = 1e-9;

fn check_kind(grid: &SegmentedGrid) -> Result<()> {
    match grid.kind() {
        GridKind::Mprime | GridKind::UniformMprime => Ok(()),
        other => Err(ParkError::Precondition(format!(
            "window extrema need a derivative grid, got {}",
            other.name()
        ))),
    }
}

/// `(I_n, S_n)`: min and max of the grid over the closed window `[n−1, n]`.
pub fn window_extrema(grid: &SegmentedGrid, n: usize) -> Result<(f64, f64)> {
    check_kind(grid)?;
    if n < 3 || n > grid.horizon() {
        return Err(ParkError::Precondition(format!(
            "window end must lie in [3, {}], got {n}",
            grid.horizon()
        )));
    }
    let seg = grid.segment(n - 1);
    let lo = seg.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = seg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// For each `k` in `from_n..to_n`, whether `I_k ≤ I_{k+1} ≤ S_{k+1} ≤ S_k`
/// holds within [`NESTING_TOLERANCE`].
pub fn check_nesting(grid: &SegmentedGrid, from_n: usize, to_n: usize) -> Result<Vec<bool>> {
    if from_n >= to_n {
        return Err(ParkError::Precondition(format!(
            "nesting range must be increasing, got {from_n}..{to_n}"
        )));
    }
    let windows = (from_n..=to_n)
        .map(|k| window_extrema(grid, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(windows
        .windows(2)
        .map(|w| {
            let ((i0, s0), (i1, s1)) = (w[0], w[1]);
            i0 <= i1 + NESTING_TOLERANCE && i1 <= s1 && s1 <= s0 + NESTING_TOLERANCE
        })
        .collect())
}
