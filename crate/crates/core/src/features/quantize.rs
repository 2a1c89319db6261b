use crate::error::{Error, Result};
use crate::residuals::ResidualMap;

/// Truncation threshold used throughout the rich model.
pub const TRUNCATION: i32 = 2;

/// Residuals mapped to `{-T, ..., T}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantizedResidualMap {
    values: Vec<i8>,
    width: usize,
    height: usize,
    q: i32,
    threshold: i32,
}

impl QuantizedResidualMap {
    pub fn from_values(
        width: usize,
        height: usize,
        threshold: i32,
        values: Vec<i8>,
    ) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "{} values do not fill {width}x{height}",
                values.len()
            )));
        }
        if values.iter().any(|&v| (v as i32).abs() > threshold) {
            return Err(Error::InvalidInput(format!(
                "quantized value outside [-{threshold}, {threshold}]"
            )));
        }
        Ok(Self {
            values,
            width,
            height,
            q: 1,
            threshold,
        })
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn q(&self) -> i32 {
        self.q
    }

    pub fn threshold(&self) -> i32 {
        self.threshold
    }
}

/// `round(r / q)` with ties away from zero, in exact integer arithmetic.
#[inline]
pub fn round_div(r: i32, q: i32) -> i32 {
    debug_assert!(q > 0);
    if r >= 0 {
        (2 * r + q) / (2 * q)
    } else {
        -((-2 * r + q) / (2 * q))
    }
}

/// `clamp(round(r / q), -t, t)` for every residual.
pub fn quantize_truncate(map: &ResidualMap, q: i32, t: i32) -> Result<QuantizedResidualMap> {
    if q < 1 {
        return Err(Error::InvalidArgument(format!(
            "quantization step must be >= 1, got {q}"
        )));
    }
    if !(0..=i8::MAX as i32).contains(&t) {
        return Err(Error::InvalidArgument(format!("invalid truncation {t}")));
    }
    let values = map
        .values()
        .iter()
        .map(|&r| round_div(r, q).clamp(-t, t) as i8)
        .collect();
    Ok(QuantizedResidualMap {
        values,
        width: map.width(),
        height: map.height(),
        q,
        threshold: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quantize_one(r: i32, q: i32) -> i8 {
        let m = ResidualMap::new(1, 1, (0, 0), vec![r]).unwrap();
        quantize_truncate(&m, q, TRUNCATION).unwrap().values()[0]
    }

    #[test]
    fn examples() {
        assert_eq!(quantize_one(5, 4), 1);
        assert_eq!(quantize_one(-100, 12), -2);
        assert_eq!(quantize_one(3, 1), 2);
    }

    #[test]
    fn rounding_is_odd_and_half_away() {
        assert_eq!(round_div(6, 4), 2);
        assert_eq!(round_div(-6, 4), -2);
        assert_eq!(round_div(2, 4), 1);
        assert_eq!(round_div(-2, 4), -1);
        assert_eq!(round_div(1, 4), 0);
        assert_eq!(round_div(18, 12), 2);
        for q in 1..=12 {
            for r in -300..=300 {
                assert_eq!(round_div(-r, q), -round_div(r, q));
                let exact = (r as f64 / q as f64).abs();
                let expect = (exact + 0.5).floor() * (r as f64).signum();
                assert_eq!(round_div(r, q) as f64, expect, "r={r} q={q}");
            }
        }
    }

    #[test]
    fn invalid_step() {
        let m = ResidualMap::new(1, 1, (0, 0), vec![1]).unwrap();
        assert!(quantize_truncate(&m, 0, 2).is_err());
    }
}
