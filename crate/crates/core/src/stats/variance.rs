use crate::error::{Error, Result};

fn check_maxvar(maxvar: f64) -> Result<()> {
    if !(maxvar.is_finite() && maxvar > 0.0) {
        return Err(Error::invalid(format!(
            "maximal scalar variance must be positive, got {maxvar}"
        )));
    }
    Ok(())
}

/// Two-point Padé approximation of the intrinsic scalar variance of a
/// projected normal with ambient variance `v2`:
///
/// ```text
/// η̂(v²) = v² 𝓜 / (𝓜 + v²)
/// ```
///
/// It matches `v²` to first order at zero and saturates at the maximal
/// scalar variance `𝓜` as `v² → ∞`.
pub fn eta_hat(v2: f64, maxvar: f64) -> Result<f64> {
    check_maxvar(maxvar)?;
    if !(v2 >= 0.0) {
        return Err(Error::invalid(format!(
            "ambient variance must be nonnegative, got {v2}"
        )));
    }
    if v2.is_infinite() {
        return Ok(maxvar);
    }
    Ok(v2 * maxvar / (maxvar + v2))
}

/// Inverse of [`eta_hat`]: `η̂⁻¹(P) = P 𝓜 / (𝓜 − P)` on `[0, 𝓜)`.
///
/// An intrinsic variance at or above `𝓜` cannot come from any ambient
/// variance and is reported as [`Error::VarianceExceedsMaximum`].
pub fn eta_hat_inv(p: f64, maxvar: f64) -> Result<f64> {
    check_maxvar(maxvar)?;
    if !(p >= 0.0) {
        return Err(Error::invalid(format!(
            "intrinsic variance must be nonnegative, got {p}"
        )));
    }
    if p >= maxvar {
        return Err(Error::VarianceExceedsMaximum { value: p, maxvar });
    }
    Ok(p * maxvar / (maxvar - p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn eta_hat_examples() {
        let m = PI * PI / 3.0;
        assert_eq!(eta_hat(0.0, m).unwrap(), 0.0);
        assert!((eta_hat(m, m).unwrap() - m / 2.0).abs() < 1e-15);
        let expected = m / (m + 1.0);
        assert!((eta_hat(1.0, m).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.766_892_601_629_148_5).abs() < 1e-15);
    }

    #[test]
    fn eta_hat_inv_examples() {
        let m = 1.7;
        assert_eq!(eta_hat_inv(0.0, m).unwrap(), 0.0);
        assert!((eta_hat_inv(m / 2.0, m).unwrap() - m).abs() < 1e-15);
        assert!(matches!(
            eta_hat_inv(m, m),
            Err(Error::VarianceExceedsMaximum { .. })
        ));
        assert!(eta_hat(-1.0, m).is_err());
        assert!(eta_hat_inv(-0.1, m).is_err());
        assert!(eta_hat(1.0, 0.0).is_err());
    }

    #[test]
    fn sandwich_on_grid() {
        for &m in &[0.2, 1.0, PI * PI / 3.0] {
            for i in 0..=2000 {
                let v2 = i as f64 * 0.01;
                let e = eta_hat(v2, m).unwrap();
                assert!(e >= 0.0 && e <= v2.min(m), "v2={v2} m={m} e={e}");
            }
        }
    }
}
