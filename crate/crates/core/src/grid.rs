use serde::{Deserialize, Serialize};

use crate::error::{ParkError, Result};
use crate::params::validate_resolution;

/// Which function a [`SegmentedGrid`] tabulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GridKind {
    /// Expected car count at saturation.
    M,
    /// Derivative of the expected count.
    Mprime,
    /// Second moment of the car count.
    M2,
    /// Derivative of the expected count under uniform placement.
    UniformMprime,
}

impl GridKind {
    pub fn name(self) -> &'static str {
        match self {
            GridKind::M => "M",
            GridKind::Mprime => "Mprime",
            GridKind::M2 => "M2",
            GridKind::UniformMprime => "uniformMprime",
        }
    }
}

/// Piecewise-smooth tabulation on `[0, n]` in unit segments.
///
/// Segment `k` stores `m + 1` samples of the continuous extension of the
/// function to the closed interval `[k, k + 1]`, so a jump at an integer
/// abscissa shows up as two different values for the shared endpoint, one
/// in each adjacent segment. Quadrature never crosses a segment boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedGrid {
    kind: GridKind,
    lambda: Option<f64>,
    m: usize,
    n: usize,
    values: Vec<f64>,
}

impl SegmentedGrid {
    pub(crate) fn zeros(kind: GridKind, lambda: Option<f64>, n: usize, m: usize) -> Self {
        Self {
            kind,
            lambda,
            m,
            n,
            values: vec![0.0; n * (m + 1)],
        }
    }

    /// Builds a grid by sampling `f(segment, x)` at every node.
    pub fn from_fn<F>(kind: GridKind, lambda: Option<f64>, n: usize, m: usize, f: F) -> Result<Self>
    where
        F: Fn(usize, f64) -> f64,
    {
        validate_resolution(m)?;
        if n == 0 {
            return Err(ParkError::InvalidParams("grid needs at least one segment".into()));
        }
        let mut grid = Self::zeros(kind, lambda, n, m);
        for k in 0..n {
            for j in 0..=m {
                let x = grid.node_x(k, j);
                grid.segment_mut(k)[j] = f(k, x);
            }
        }
        Ok(grid)
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    /// Number of unit segments.
    pub fn horizon(&self) -> usize {
        self.n
    }

    /// Intervals per unit segment.
    pub fn resolution(&self) -> usize {
        self.m
    }

    pub fn step(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn node_x(&self, k: usize, j: usize) -> f64 {
        k as f64 + j as f64 / self.m as f64
    }

    pub fn segment(&self, k: usize) -> &[f64] {
        let w = self.m + 1;
        &self.values[k * w..(k + 1) * w]
    }

    pub(crate) fn segment_mut(&mut self, k: usize) -> &mut [f64] {
        let w = self.m + 1;
        &mut self.values[k * w..(k + 1) * w]
    }

    /// Interpolated value of segment `k`'s smooth piece at `x`.
    pub fn value_in_segment(&self, k: usize, x: f64) -> f64 {
        interp_segment(self.segment(k), (x - k as f64) * self.m as f64)
    }

    /// Right-continuous evaluation; `x = n` reads the last segment.
    pub fn value_at(&self, x: f64) -> Result<f64> {
        if !(0.0..=self.n as f64).contains(&x) {
            return Err(ParkError::Domain(format!(
                "x={x} outside grid range [0, {}]",
                self.n
            )));
        }
        let k = (x.floor() as usize).min(self.n - 1);
        Ok(self.value_in_segment(k, x))
    }

    /// Value stored at the right end of the grid, `x = n`.
    pub fn last_value(&self) -> f64 {
        self.segment(self.n - 1)[self.m]
    }

    /// Iterates `(x, value, segment)` over every stored node.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64, usize)> + '_ {
        (0..self.n).flat_map(move |k| {
            self.segment(k)
                .iter()
                .enumerate()
                .map(move |(j, &v)| (self.node_x(k, j), v, k))
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Copy of the grid with a single node shifted by `delta`.
    pub fn with_node_offset(&self, k: usize, j: usize, delta: f64) -> Self {
        let mut out = self.clone();
        out.segment_mut(k)[j] += delta;
        out
    }

    /// Copy restricted to the first `n` segments.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.n {
            return Err(ParkError::Precondition(format!(
                "cannot truncate a {}-segment grid to {n}",
                self.n
            )));
        }
        Ok(Self {
            kind: self.kind,
            lambda: self.lambda,
            m: self.m,
            n,
            values: self.values[..n * (self.m + 1)].to_vec(),
        })
    }
}

/// Local polynomial interpolation inside one segment.
///
/// `s` is the position in node units, `0 <= s <= m`. Uses the cubic through
/// four consecutive nodes of the segment (quadratic when `m == 2`), never
/// reaching into a neighbouring segment.
pub(crate) fn interp_segment(vals: &[f64], s: f64) -> f64 {
    let m = vals.len() - 1;
    if m == 2 {
        let t = s;
        return vals[0] * (t - 1.0) * (t - 2.0) / 2.0 - vals[1] * t * (t - 2.0)
            + vals[2] * t * (t - 1.0) / 2.0;
    }
    let base = ((s.floor() as isize) - 1).clamp(0, m as isize - 3) as usize;
    let t = s - base as f64;
    let (t1, t2, t3) = (t - 1.0, t - 2.0, t - 3.0);
    let f = &vals[base..base + 4];
    -f[0] * t1 * t2 * t3 / 6.0 + f[1] * t * t2 * t3 / 2.0 - f[2] * t * t1 * t3 / 2.0
        + f[3] * t * t1 * t2 / 6.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_reproduces_cubics() {
        let m = 8;
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x - 3.0 * x * x * x;
        let vals: Vec<f64> = (0..=m).map(|j| p(j as f64 / m as f64)).collect();
        for i in 0..=80 {
            let x = i as f64 / 80.0;
            let got = interp_segment(&vals, x * m as f64);
            assert!((got - p(x)).abs() < 1e-12, "x={x}: {got} vs {}", p(x));
        }
    }

    #[test]
    fn interpolation_quadratic_when_m_is_two() {
        let p = |x: f64| 2.0 + x - 4.0 * x * x;
        let vals = [p(0.0), p(0.5), p(1.0)];
        assert!((interp_segment(&vals, 0.6) - p(0.3)).abs() < 1e-14);
    }

    #[test]
    fn segments_keep_their_own_endpoint_values() {
        let g = SegmentedGrid::from_fn(GridKind::M, Some(1.0), 3, 4, |k, _| k as f64).unwrap();
        assert_eq!(g.segment(0)[4], 0.0);
        assert_eq!(g.segment(1)[0], 1.0);
        assert_eq!(g.value_at(1.0).unwrap(), 1.0);
        assert_eq!(g.value_at(3.0).unwrap(), 2.0);
        assert!(g.value_at(3.5).is_err());
        assert_eq!(g.nodes().count(), 15);
    }

    #[test]
    fn truncation_keeps_prefix() {
        let g = SegmentedGrid::from_fn(GridKind::M, None, 4, 2, |_, x| x).unwrap();
        let t = g.truncated(2).unwrap();
        assert_eq!(t.horizon(), 2);
        assert_eq!(t.last_value(), 2.0);
        assert!(g.truncated(5).is_err());
    }
}
