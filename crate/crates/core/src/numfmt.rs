//! Lossless decimal formatting (17 significant digits) for CSV and JSON output.

use serde_json::{Number, Value};

/// Formats `x` with 17 significant digits in scientific notation.
///
/// Every finite `f64` survives a `format -> parse` round trip bit-exactly.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// JSON number carrying exactly the digits produced by [`fmt17`].
///
/// Non-finite values have no JSON representation and map to `null`.
pub fn json17(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    match fmt17(x).parse::<Number>() {
        Ok(n) => Value::Number(n),
        Err(_) => Value::Null,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt17(0.2), "2.0000000000000001e-1");
        assert_eq!(fmt17(-3.0), "-3.0000000000000000e0");
        assert_eq!(json17(1.5).to_string(), "1.5000000000000000e+0");
        assert_eq!(json17(0.2).as_f64(), Some(0.2));
        assert_eq!(json17(f64::NAN), Value::Null);
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let back: f64 = fmt17(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
