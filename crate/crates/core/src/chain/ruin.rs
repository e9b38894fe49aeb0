use crate::error::{invalid, Error, Result};

/// Probability that a walk on `0..=ell` started at `j`, stepping right with
/// probability `p` and left with probability `q` (holding otherwise), hits 0
/// before `ell`: `(ξ^j − ξ^ℓ) / (1 − ξ^ℓ)` with `ξ = q / p`.
///
/// Holding does not change absorption probabilities. The symmetric case
/// `p == q` makes the formula singular and is rejected.
pub fn gambler_ruin(p: f64, q: f64, ell: u32, j: u32) -> Result<f64> {
    if !(p > 0.0 && q >= 0.0 && p + q <= 1.0 + 1e-15) {
        return Err(invalid(format!(
            "need p > 0, q >= 0, p + q <= 1; got p={p}, q={q}"
        )));
    }
    if ell == 0 || j > ell {
        return Err(invalid(format!(
            "need 0 <= j <= ell, ell >= 1; got j={j}, ell={ell}"
        )));
    }
    if p == q {
        return Err(Error::Unsupported(
            "symmetric walk (p == q) is singular in the closed form".into(),
        ));
    }
    let xi = q / p;
    let xi_ell = xi.powi(ell as i32);
    Ok((xi.powi(j as i32) - xi_ell) / (1.0 - xi_ell))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absorbing_ends() {
        assert_eq!(gambler_ruin(0.3, 0.1, 5, 0).unwrap(), 1.0);
        assert_eq!(gambler_ruin(0.3, 0.1, 5, 5).unwrap(), 0.0);
    }

    #[test]
    fn three_sevenths() {
        let v = gambler_ruin(2.0 / 3.0, 1.0 / 3.0, 3, 1).unwrap();
        assert!((v - 3.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            gambler_ruin(0.25, 0.25, 4, 1),
            Err(Error::Unsupported(_))
        ));
        assert!(gambler_ruin(0.7, 0.4, 4, 1).is_err());
        assert!(gambler_ruin(0.5, 0.2, 4, 5).is_err());
        assert!(gambler_ruin(0.0, 0.2, 4, 1).is_err());
    }

    #[test]
    fn no_left_steps_never_ruins() {
        assert_eq!(gambler_ruin(0.5, 0.0, 4, 1).unwrap(), 0.0);
    }
}
