use serde::Serialize;

use crate::error::{Error, Result};

/// Partition of `[0,1]` into `m = ⌈κ⌉` equal cells, applied to each
/// coordinate `t_i` of a uniform point in `[0,1]^n`.
///
/// Cells are half-open `[(k-1)/m, k/m)` except the last, which is closed, so
/// that the indicators sum to exactly one at every point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitScheme {
    pub kappa: f64,
    pub m: usize,
    pub n: usize,
}

pub fn split_scheme(kappa: f64, n: usize) -> Result<SplitScheme> {
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(Error::param(format!("kappa {kappa} must be a finite real ≥ 1")));
    }
    if n == 0 {
        return Err(Error::param("split needs n ≥ 1"));
    }
    Ok(SplitScheme { kappa, m: kappa.ceil() as usize, n })
}

impl SplitScheme {
    /// Cell `k ∈ 1..=m` containing `t ∈ [0,1]`.
    pub fn cell(&self, t: f64) -> usize {
        ((t * self.m as f64).floor() as usize).min(self.m - 1) + 1
    }

    /// Indicator of coordinate `i` falling in cell `k`.
    pub fn indicator(&self, i: usize, k: usize, t: &[f64]) -> bool {
        self.cell(t[i]) == k
    }

    /// `P(indicator = 1)` for every `(i, k)`.
    pub fn cell_probability(&self) -> f64 {
        1.0 / self.m as f64
    }

    /// Interval bounds of cell `k`.
    pub fn interval(&self, k: usize) -> (f64, f64) {
        let m = self.m as f64;
        ((k - 1) as f64 / m, k as f64 / m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use rand::Rng;

    #[test]
    fn cell_counts() {
        let s = split_scheme(2.5, 4).unwrap();
        assert_eq!(s.m, 3);
        assert!((s.cell_probability() - 1.0 / 3.0).abs() < 1e-15);
        let one = split_scheme(1.0, 3).unwrap();
        assert_eq!(one.m, 1);
        assert!((0..=100).all(|j| one.indicator(0, 1, &[j as f64 / 100.0])));
        assert!(split_scheme(0.5, 1).is_err());
    }

    #[test]
    fn indicators_partition_grid() {
        for kappa in [1.0, 2.0, 2.5, 7.3] {
            let s = split_scheme(kappa, 1).unwrap();
            for j in 0..=1000 {
                let t = [j as f64 / 1000.0];
                let total: usize = (1..=s.m).filter(|&k| s.indicator(0, k, &t)).count();
                assert_eq!(total, 1, "kappa {kappa}, t {}", t[0]);
            }
        }
    }

    #[test]
    fn joint_cell_probability() {
        let s = split_scheme(2.0, 2).unwrap();
        let mut rng = StreamKey::new(3, "split-unit").stream(0);
        let n = 1_000_000;
        let hits = (0..n)
            .filter(|_| {
                let t = [rng.random::<f64>(), rng.random::<f64>()];
                s.indicator(0, 1, &t) && s.indicator(1, 1, &t)
            })
            .count();
        assert!((hits as f64 / n as f64 - 0.25).abs() < 0.002);
    }
}
