//! Fixed significant-digit decimal rendering for exports.

/// Renders `x` in plain decimal with exactly `sig` significant digits.
/// Deterministic: the same value always renders to the same bytes.
pub fn format_sig(x: f64, sig: usize) -> String {
    assert!(sig >= 1);
    if x == 0.0 {
        return format!("{:.*}", sig - 1, 0.0f64);
    }
    let scientific = format!("{:.*e}", sig - 1, x);
    let (mantissa, exponent) = scientific
        .split_once('e')
        .expect("scientific format always has an exponent");
    let exponent: i32 = exponent.parse().expect("valid exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();

    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exponent >= 0 {
        let int_len = exponent as usize + 1;
        if int_len >= digits.len() {
            out.push_str(&digits);
            out.extend(std::iter::repeat_n('0', int_len - digits.len()));
        } else {
            out.push_str(&digits[..int_len]);
            out.push('.');
            out.push_str(&digits[int_len..]);
        }
    } else {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exponent - 1) as usize));
        out.push_str(&digits);
    }
    out
}

/// Rounds `x` through its 9-significant-digit export representation.
pub fn canonical9(x: f64) -> f64 {
    format_sig(x, 9).parse().expect("rendered decimal parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_plain_decimals() {
        assert_eq!(format_sig(0.140255648, 9), "0.140255648");
        assert_eq!(format_sig(-0.256709, 9), "-0.256709000");
        assert_eq!(format_sig(0.0, 9), "0.00000000");
        assert_eq!(format_sig(1.0, 9), "1.00000000");
        assert_eq!(format_sig(12345.6789, 9), "12345.6789");
        assert_eq!(format_sig(0.0001234567891, 9), "0.000123456789");
        assert_eq!(format_sig(987654321.0, 9), "987654321");
        assert_eq!(format_sig(9876543210.0, 9), "9876543210");
    }

    #[test]
    fn round_trip_preserves_nine_digits() {
        for &x in &[0.1402556, -0.2567091, 0.589815321, 123.456789, -1e-7] {
            let back: f64 = format_sig(x, 9).parse().unwrap();
            assert!((back - x).abs() <= 1e-8 * x.abs().max(1e-300));
        }
    }
}
