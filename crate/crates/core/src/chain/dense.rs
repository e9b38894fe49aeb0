use nalgebra::{DMatrix, SymmetricEigen};

use super::{LazyChain, MIXING_CAP, STOCHASTIC_TOL};
use crate::error::{invalid, Error, Result};
use crate::graph::WalkGraph;

/// Largest chain stored as a dense matrix.
pub const DENSE_LIMIT: usize = 2048;

const EIGEN_EPS: f64 = 1e-14;
const EIGEN_MAX_ITER: usize = 10_000;

/// Dense lazy transition matrix, for spectra and all-pairs mixing times.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseChain {
    matrix: DMatrix<f64>,
    stationary: Vec<f64>,
}

/// Eigenvalues of a reversible chain in decreasing order, plus a right
/// eigenvector for the second one.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub second_vector: Vec<f64>,
}

impl Spectrum {
    pub fn lambda2(&self) -> f64 {
        self.eigenvalues.get(1).copied().unwrap_or(0.0)
    }

    pub fn lambda_min(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// `1 − max(λ₂, |λ_min|)`; for a single vertex the gap is 1.
    pub fn gap(&self) -> f64 {
        if self.eigenvalues.len() < 2 {
            return 1.0;
        }
        1.0 - self.lambda2().max(self.lambda_min().abs())
    }
}

impl DenseChain {
    pub fn from_lazy(chain: &LazyChain) -> Result<DenseChain> {
        let n = chain.n();
        if n > DENSE_LIMIT {
            return Err(Error::SizeExceeded {
                n,
                limit: DENSE_LIMIT,
            });
        }
        let mut matrix = DMatrix::zeros(n, n);
        for v in 0..n {
            for (w, p) in chain.row(v as u32) {
                matrix[(v, w as usize)] = p;
            }
        }
        Ok(DenseChain {
            matrix,
            stationary: chain.stationary().to_vec(),
        })
    }

    pub fn from_graph<G: WalkGraph + ?Sized>(g: &G) -> Result<DenseChain> {
        if g.vertex_count() > DENSE_LIMIT {
            return Err(Error::SizeExceeded {
                n: g.vertex_count(),
                limit: DENSE_LIMIT,
            });
        }
        DenseChain::from_lazy(&LazyChain::from_graph(g)?)
    }

    pub fn n(&self) -> usize {
        self.stationary.len()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// Largest |row sum − 1| of `m`.
    pub fn row_sum_drift(m: &DMatrix<f64>) -> f64 {
        m.row_iter()
            .map(|r| (r.sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    fn checked_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let product = a * b;
        let drift = DenseChain::row_sum_drift(&product);
        if drift > STOCHASTIC_TOL {
            return Err(Error::NumericalFailure(format!(
                "row sums drifted by {drift:e} during powering"
            )));
        }
        Ok(product)
    }

    /// `P^t` by repeated squaring.
    pub fn power(&self, t: u64) -> Result<DMatrix<f64>> {
        let n = self.n();
        let mut result = DMatrix::identity(n, n);
        let mut base = self.matrix.clone();
        let mut e = t;
        while e > 0 {
            if e & 1 == 1 {
                result = DenseChain::checked_product(&result, &base)?;
            }
            e >>= 1;
            if e > 0 {
                base = DenseChain::checked_product(&base, &base)?;
            }
        }
        Ok(result)
    }

    /// max over (x, y) of |P^t_x(y) − π_y|.
    pub fn deviation(&self, power: &DMatrix<f64>) -> f64 {
        let mut worst = 0.0f64;
        for (y, &pi) in self.stationary.iter().enumerate() {
            for x in 0..self.n() {
                worst = worst.max((power[(x, y)] - pi).abs());
            }
        }
        worst
    }

    /// Smallest `t >= 1` with `|P^t_x(y) − π_y| <= n_ref^{-3}` for all pairs.
    ///
    /// For fixed `y` the worst deviation over `x` cannot grow with `t` (each
    /// step averages it), so the search doubles until the condition holds and
    /// then bisects over the stored powers.
    pub fn mixing_time(&self, n_ref: usize) -> Result<u64> {
        if n_ref < 1 {
            return Err(invalid("reference size must be positive"));
        }
        let tol = (n_ref as f64).powi(-3);
        let mut powers = vec![self.matrix.clone()];
        loop {
            let last = powers.last().unwrap();
            let dev = self.deviation(last);
            if dev <= tol {
                break;
            }
            let span = 1u64 << (powers.len() - 1);
            if span >= MIXING_CAP {
                return Err(Error::CapExceeded {
                    cap: MIXING_CAP,
                    deviation: dev,
                });
            }
            let squared = DenseChain::checked_product(last, last)?;
            powers.push(squared);
        }
        // bisect: largest t with deviation above tol, built bit by bit
        let n = self.n();
        let mut below = DMatrix::identity(n, n);
        let mut t_below = 0u64;
        for k in (0..powers.len()).rev() {
            let candidate = DenseChain::checked_product(&below, &powers[k])?;
            if self.deviation(&candidate) > tol {
                below = candidate;
                t_below += 1 << k;
            }
        }
        let t = t_below + 1;
        if t > MIXING_CAP {
            return Err(Error::CapExceeded {
                cap: MIXING_CAP,
                deviation: self.deviation(&below),
            });
        }
        Ok(t)
    }

    /// Spectrum of the reversible chain through its symmetrization
    /// `D^{1/2} P D^{-1/2}`, `D = diag(π)`.
    pub fn spectrum(&self) -> Result<Spectrum> {
        let n = self.n();
        let sqrt_pi: Vec<f64> = self.stationary.iter().map(|p| p.sqrt()).collect();
        let sym = DMatrix::from_fn(n, n, |i, j| {
            let a = sqrt_pi[i] * self.matrix[(i, j)] / sqrt_pi[j];
            let b = sqrt_pi[j] * self.matrix[(j, i)] / sqrt_pi[i];
            0.5 * (a + b)
        });
        let eigen = SymmetricEigen::try_new(sym, EIGEN_EPS, EIGEN_MAX_ITER).ok_or_else(|| {
            Error::NumericalFailure(format!(
                "symmetric eigensolve of order {n} did not converge in {EIGEN_MAX_ITER} iterations"
            ))
        })?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));
        let eigenvalues = order.iter().map(|&i| eigen.eigenvalues[i]).collect();
        let second_vector = match order.get(1) {
            Some(&i) => (0..n)
                .map(|x| eigen.eigenvectors[(x, i)] / sqrt_pi[x])
                .collect(),
            None => vec![0.0; n],
        };
        Ok(Spectrum {
            eigenvalues,
            second_vector,
        })
    }

    pub fn spectral_gap(&self) -> Result<f64> {
        Ok(self.spectrum()?.gap())
    }
}
