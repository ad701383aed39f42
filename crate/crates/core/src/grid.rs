//! Time grids and the pair/triple enumerations used by the checks.

use crate::error::{Error, Result};

/// `{0, step, 2·step, …}` up to `t_max`. Points are formed as `i·step`, so
/// two grids with the same step share their points bit for bit.
pub fn uniform_grid(t_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Argument("step must be positive".into()));
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::Argument("t_max must be positive".into()));
    }
    if step > t_max {
        return Err(Error::Argument("step must not exceed t_max".into()));
    }
    let count = (t_max / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| i as f64 * step).collect())
}

/// All `(t, s)` with `t ≥ s`, both drawn from `grid`, ordered by `t` then `s`.
pub fn delta_pairs(grid: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(grid.len() * (grid.len() + 1) / 2);
    for (i, &t) in grid.iter().enumerate() {
        for &s in &grid[..=i] {
            out.push((t, s));
        }
    }
    out
}

/// All `(t, s, t0)` with `t ≥ s ≥ t0` drawn from `grid`.
pub fn ordered_triples(grid: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for (i, &t) in grid.iter().enumerate() {
        for (j, &s) in grid[..=i].iter().enumerate() {
            for &t0 in &grid[..=j] {
                out.push((t, s, t0));
            }
        }
    }
    out
}

pub(crate) fn index_of(grid: &[f64], t: f64) -> Option<usize> {
    grid.iter().position(|&g| g == t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points() {
        let g = uniform_grid(10.0, 0.5).unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[20], 10.0);
        assert_eq!(uniform_grid(1.0, 0.3).unwrap().len(), 4);
        assert!(uniform_grid(1.0, 0.0).is_err());
        assert!(uniform_grid(1.0, 2.0).is_err());
        assert!(uniform_grid(-1.0, 0.1).is_err());
    }

    #[test]
    fn pair_and_triple_counts() {
        let g = [0.0, 1.0, 2.0];
        assert_eq!(delta_pairs(&g).len(), 6);
        assert!(delta_pairs(&g).iter().all(|&(t, s)| t >= s));
        assert_eq!(ordered_triples(&g).len(), 10);
    }
}
