use nalgebra::{DMatrix, SymmetricEigen};

use super::MIXING_CAP;
use crate::error::{invalid, Error, Result};

// Beyond this dimension n^{-3} is below what the deviation recursion resolves.
const MAX_EXACT_DIM: usize = 24;

/// The lazy walk on Q_d seen through its Hamming distance from a fixed
/// vertex: from level `k` hold with probability 1/2, step down with
/// probability `k / 2d` and up with probability `(d − k) / 2d`.
///
/// By vertex-transitivity, level masses give `P^t_v(w) = mass_k / C(d, k)`
/// for every `w` at distance `k` from `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelChain {
    d: usize,
}

impl LevelChain {
    pub fn new(d: usize) -> Result<LevelChain> {
        if !(1..=crate::graph::MAX_HYPERCUBE_DIM).contains(&d) {
            return Err(invalid(format!("hypercube dimension {d} out of range")));
        }
        Ok(LevelChain { d })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        1 << self.d
    }

    pub fn down(&self, k: usize) -> f64 {
        k as f64 / (2 * self.d) as f64
    }

    pub fn up(&self, k: usize) -> f64 {
        (self.d - k) as f64 / (2 * self.d) as f64
    }

    pub fn transition_matrix(&self) -> DMatrix<f64> {
        let m = self.d + 1;
        DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                0.5
            } else if j + 1 == i {
                self.down(i)
            } else if i + 1 == j {
                self.up(i)
            } else {
                0.0
            }
        })
    }

    /// One step applied to a row vector of level masses.
    pub fn step(&self, mass: &[f64], out: &mut [f64]) {
        let d = self.d;
        for k in 0..=d {
            let mut acc = 0.5 * mass[k];
            if k > 0 {
                acc += mass[k - 1] * self.up(k - 1);
            }
            if k < d {
                acc += mass[k + 1] * self.down(k + 1);
            }
            out[k] = acc;
        }
    }

    /// Level masses after `t` steps from level 0.
    pub fn masses_after(&self, t: u64) -> Vec<f64> {
        let mut mass = vec![0.0; self.d + 1];
        mass[0] = 1.0;
        let mut next = mass.clone();
        for _ in 0..t {
            self.step(&mass, &mut next);
            std::mem::swap(&mut mass, &mut next);
        }
        mass
    }

    /// Per-vertex probabilities by distance class: entry `k` is `P^t_v(w)` for
    /// `dist(v, w) = k`.
    pub fn class_probabilities(&self, t: u64) -> Vec<f64> {
        let binom = binomials(self.d);
        self.masses_after(t)
            .iter()
            .zip(&binom)
            .map(|(m, c)| m / c)
            .collect()
    }

    /// P^k_v(v) for k = 0..=t.
    pub fn return_probabilities(&self, t: u64) -> Vec<f64> {
        let mut mass = vec![0.0; self.d + 1];
        mass[0] = 1.0;
        let mut next = mass.clone();
        let mut out = Vec::with_capacity(t as usize + 1);
        out.push(1.0);
        for _ in 0..t {
            self.step(&mass, &mut next);
            std::mem::swap(&mut mass, &mut next);
            out.push(mass[0]);
        }
        out
    }

    /// R_v = Σ_{k=0}^{t} P^k_v(v).
    pub fn return_sum(&self, t: u64) -> f64 {
        self.return_probabilities(t).iter().sum()
    }

    /// Smallest `t >= 1` with `|P^t_x(y) − 1/n| <= n^{-3}` over all pairs.
    ///
    /// Tracks the deviation from the binomial law directly so that values near
    /// `n^{-3}` are not lost to cancellation against `1/n`.
    pub fn mixing_time(&self) -> Result<u64> {
        if self.d > MAX_EXACT_DIM {
            return Err(Error::Unsupported(format!(
                "exact level-chain mixing time limited to d <= {MAX_EXACT_DIM}"
            )));
        }
        let n = self.n() as f64;
        let tol = n.powi(-3);
        let binom = binomials(self.d);
        let mut dev: Vec<f64> = binom.iter().map(|c| -c / n).collect();
        dev[0] += 1.0;
        let mut next = dev.clone();
        let mut worst = f64::INFINITY;
        for t in 1..=MIXING_CAP {
            self.step(&dev, &mut next);
            std::mem::swap(&mut dev, &mut next);
            worst = dev
                .iter()
                .zip(&binom)
                .map(|(e, c)| (e / c).abs())
                .fold(0.0, f64::max);
            if worst <= tol {
                return Ok(t);
            }
        }
        Err(Error::CapExceeded {
            cap: MIXING_CAP,
            deviation: worst,
        })
    }

    /// Distinct eigenvalues, decreasing. Each equals `1 − k/d` and occurs in
    /// the full chain with multiplicity `C(d, k)`.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let m = self.d + 1;
        let p = self.transition_matrix();
        let pi = binomials(self.d);
        let sym = DMatrix::from_fn(m, m, |i, j| {
            let a = (pi[i] / pi[j]).sqrt() * p[(i, j)];
            let b = (pi[j] / pi[i]).sqrt() * p[(j, i)];
            0.5 * (a + b)
        });
        let eigen = SymmetricEigen::try_new(sym, 1e-14, 10_000)
            .ok_or_else(|| Error::NumericalFailure("level-chain eigensolve failed".into()))?;
        let mut values: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(values)
    }

    pub fn spectral_gap(&self) -> Result<f64> {
        let values = self.eigenvalues()?;
        let lambda = values[1].max(values.last().unwrap().abs());
        Ok(1.0 - lambda)
    }
}

/// C(d, k) for k = 0..=d as floats.
pub(crate) fn binomials(d: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(d + 1);
    let mut c = 1.0f64;
    for k in 0..=d {
        out.push(c);
        c = c * (d - k) as f64 / (k + 1) as f64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_stochastic() {
        for d in [1, 5, 14] {
            let p = LevelChain::new(d).unwrap().transition_matrix();
            for r in p.row_iter() {
                assert!((r.sum() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn eigenvalues_are_one_minus_k_over_d() {
        let chain = LevelChain::new(9).unwrap();
        let values = chain.eigenvalues().unwrap();
        for (k, v) in values.iter().enumerate() {
            assert!((v - (1.0 - k as f64 / 9.0)).abs() < 1e-12);
        }
        assert!((chain.spectral_gap().unwrap() - 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn class_probabilities_sum_to_one() {
        let chain = LevelChain::new(7).unwrap();
        let binom = binomials(7);
        let probs = chain.class_probabilities(33);
        let total: f64 = probs.iter().zip(&binom).map(|(p, c)| p * c).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn binomial_row() {
        assert_eq!(binomials(4), vec![1.0, 4.0, 6.0, 4.0, 1.0]);
    }

    #[test]
    fn too_large_for_exact_mixing() {
        assert!(matches!(
            LevelChain::new(28).unwrap().mixing_time(),
            Err(Error::Unsupported(_))
        ));
        assert!(LevelChain::new(0).is_err());
    }
}
