use crate::error::{invalid, Result};

/// Constant `c` in the `(1 + O(T/n))` half-width bands.
pub const BAND_CONSTANT: f64 = 10.0;

/// Smallest `t >= 1` with `(1 − gap)^t <= n^{-3}`.
pub fn mixing_time_bound(gap: f64, n: usize) -> Result<u64> {
    if !(gap > 0.0 && gap <= 1.0) {
        return Err(invalid(format!(
            "spectral gap must lie in (0, 1], got {gap}"
        )));
    }
    if n < 2 {
        return Ok(1);
    }
    if gap == 1.0 {
        return Ok(1);
    }
    let t = (3.0 * (n as f64).ln() / -(1.0 - gap).ln()).ceil();
    Ok((t as u64).max(1))
}

/// First-visit rate `p_v = 1 / (n R_v)` for a regular graph, with the
/// `(1 + O(T/n))` correction carried as a relative half-width `c·T/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstVisitRate {
    pub p_v: f64,
    pub rel_band: f64,
}

impl FirstVisitRate {
    pub fn lower(&self) -> f64 {
        self.p_v * (1.0 - self.rel_band).max(0.0)
    }

    pub fn upper(&self) -> f64 {
        self.p_v * (1.0 + self.rel_band)
    }

    /// Per-step decay rate `−ln(1 − p_v)` of the survival law.
    pub fn decay_rate(&self) -> f64 {
        -(-self.p_v).ln_1p()
    }
}

pub fn first_visit_rate(r_v: f64, n: usize, t_mix: u64) -> Result<FirstVisitRate> {
    if r_v.is_nan() || r_v < 1.0 {
        return Err(invalid(format!("R_v must be at least 1, got {r_v}")));
    }
    if n == 0 {
        return Err(invalid("empty graph"));
    }
    Ok(FirstVisitRate {
        p_v: 1.0 / (n as f64 * r_v),
        rel_band: BAND_CONSTANT * t_mix as f64 / n as f64,
    })
}

/// `L = ⌈2 K T ln n⌉`, the settling length after which first-visit laws are
/// geometric.
pub fn burn_in_length(k_const: f64, t_mix: u64, n: usize) -> u64 {
    (2.0 * k_const * t_mix as f64 * (n as f64).ln()).ceil() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_examples() {
        assert_eq!(mixing_time_bound(1.0, 1024).unwrap(), 1);
        // ceil(3·10·ln 2 / −ln 0.9) = ceil(197.37)
        assert_eq!(mixing_time_bound(0.1, 1024).unwrap(), 198);
        assert!(mixing_time_bound(0.0, 8).is_err());
        assert!(mixing_time_bound(-0.5, 8).is_err());
        assert!(mixing_time_bound(1.5, 8).is_err());
    }

    #[test]
    fn bound_grows_quadratically_for_hypercube_gaps() {
        let ratio =
            |d: usize| mixing_time_bound(1.0 / d as f64, 1 << d).unwrap() as f64 / (d * d) as f64;
        let (r10, r20) = (ratio(10), ratio(20));
        // 3 ln 2 · d² asymptotically
        assert!((r10 - r20).abs() / r20 < 0.1);
        assert!((r20 - 3.0 * 2f64.ln()).abs() < 0.15);
    }

    #[test]
    fn rate_examples() {
        let r = first_visit_rate(2.2, 1024, 154).unwrap();
        assert!((r.p_v - 4.438_920_454_545_45e-4).abs() < 1e-15);
        assert!((r.rel_band - 10.0 * 154.0 / 1024.0).abs() < 1e-15);
        assert!(r.lower() < r.p_v && r.p_v < r.upper());
        assert_eq!(first_visit_rate(1.0, 64, 1).unwrap().p_v, 1.0 / 64.0);
        assert!(first_visit_rate(0.5, 64, 1).is_err());
    }

    #[test]
    fn settling_length() {
        assert_eq!(burn_in_length(1.0, 10, 1), 0);
        assert_eq!(
            burn_in_length(1.0, 10, 100),
            (20.0 * 100f64.ln()).ceil() as u64
        );
    }
}
