//! Text formatting for the CSV emitters: plain decimal, `.` separator,
//! 10 significant digits, no locale surprises. Deterministic by construction
//! so output files can be compared byte for byte.

/// Formats `v` in plain decimal with 10 significant digits.
///
/// Values at or above 10¹⁰ print with all integer digits (no exponent);
/// magnitudes below 10⁻²¹ saturate the decimal count at 30 places.
pub fn sig10(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    let decimals = (9 - exp).clamp(0, 30) as usize;
    format!("{:.*}", decimals, v)
}

#[cfg(test)]
mod tests {
    use super::sig10;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(sig10(123.456_789_012), "123.4567890");
        assert_eq!(sig10(-3.934_802_200_544_679_3), "-3.934802201");
        assert_eq!(sig10(2.065_197_799_455_320_7), "2.065197799");
        assert_eq!(sig10(0.001_234_567_890_123), "0.001234567890");
        assert_eq!(sig10(1.0), "1.000000000");
        assert_eq!(sig10(0.0), "0");
        assert_eq!(sig10(-0.0), "0");
        assert_eq!(sig10(98591.0), "98591.00000");
    }

    #[test]
    fn big_values_stay_decimal() {
        assert_eq!(sig10(1.23e12), "1230000000000");
        assert!(!sig10(4.9e17).contains('e'));
    }
}
