use crate::error::{Error, Result};

/// The digamma function `psi(x) = d/dx ln Gamma(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "digamma needs a positive finite argument, got {x}"
        )));
    }
    Ok(psi(x))
}

/// Unchecked digamma for positive arguments.
///
/// Shifts the argument above 10 with `psi(x) = psi(x + 1) - 1/x`, then sums
/// the asymptotic series through the `x^-10` term (truncation < 1e-13).
pub(crate) fn psi(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let tail =
        inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    acc + x.ln() - 0.5 * inv - tail
}

#[cfg(test)]
mod tests {
    use super::*;

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    #[test]
    fn known_values() {
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-12);
        assert!((digamma(1.0).unwrap() - -0.5772156649).abs() < 1e-10);
        assert!((digamma(2.0).unwrap() - 0.4227843351).abs() < 1e-10);
        // psi(1/2) = -gamma - 2 ln 2
        assert!((digamma(0.5).unwrap() + EULER_GAMMA + 2.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn recurrence() {
        let d = digamma(7.3).unwrap() - digamma(6.3).unwrap();
        assert!((d - 1.0 / 6.3).abs() < 1e-10);
        for &x in &[0.01, 0.7, 3.3, 9.99, 10.0, 55.5] {
            assert!((psi(x + 1.0) - psi(x) - 1.0 / x).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn harmonic_numbers() {
        // psi(n) = -gamma + H_{n-1}
        let mut h = 0.0;
        for n in 1..=2000u32 {
            assert!((psi(n as f64) - (h - EULER_GAMMA)).abs() < 1e-10, "n = {n}");
            h += 1.0 / n as f64;
        }
    }

    #[test]
    fn agrees_with_statrs() {
        for i in 1..400 {
            let x = i as f64 * 0.173;
            let expected = statrs::function::gamma::digamma(x);
            assert!((psi(x) - expected).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(digamma(0.0).is_err());
        assert!(digamma(-1.5).is_err());
        assert!(digamma(f64::NAN).is_err());
    }
}
