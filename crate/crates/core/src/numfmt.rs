//! Deterministic numeric formatting for CSV and grid-function files.
//!
//! All file and stdout numbers go through [`format_sig10`]: 10 significant
//! digits, `.` decimal separator, plain decimal for moderate magnitudes and
//! `e` notation outside them. Formatting a value, parsing it back, and
//! formatting again yields the same bytes.

/// Format with 10 significant digits.
pub fn format_sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    // "d.dddddddddEe" with 9 fractional digits = 10 significant digits.
    let s = format!("{:.9e}", x);
    let (mant, exp) = s.split_once('e').expect("exponential format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..=14).contains(&exp) {
        return format!("{mant}e{exp}");
    }
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    debug_assert_eq!(digits.len(), 10);
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if exp >= 9 {
        // all digits before the point, pad with zeros
        out.push_str(&digits);
        for _ in 0..(exp - 9) {
            out.push('0');
        }
    } else if exp >= 0 {
        let k = (exp + 1) as usize;
        out.push_str(&digits[..k]);
        out.push('.');
        out.push_str(&digits[k..]);
    } else {
        out.push_str("0.");
        for _ in 0..(-exp - 1) {
            out.push('0');
        }
        out.push_str(&digits);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_documented_constants_row() {
        assert_eq!(format_sig10(1.0 / std::f64::consts::PI), "0.3183098862");
        let rho2 = 2.0 * std::f64::consts::LN_2 - 2.0 * 0.577_215_664_901_532_9;
        assert_eq!(format_sig10(rho2), "0.2318630313");
    }

    #[test]
    fn handles_signs_zeros_and_extremes() {
        assert_eq!(format_sig10(0.0), "0");
        assert_eq!(format_sig10(-0.0), "0");
        assert_eq!(format_sig10(2.0), "2.000000000");
        assert_eq!(format_sig10(-1.5), "-1.500000000");
        assert_eq!(format_sig10(1.0e-7), "1.000000000e-7");
        assert_eq!(format_sig10(3.0e17), "3.000000000e17");
        assert_eq!(format_sig10(123456.789), "123456.7890");
    }

    #[test]
    fn write_read_write_idempotent() {
        for &x in &[
            0.1234567890123,
            -9.87654321e-3,
            4.0,
            1.7e-12,
            6.02e23,
            -0.5,
        ] {
            let s1 = format_sig10(x);
            let y: f64 = s1.parse().unwrap();
            let s2 = format_sig10(y);
            assert_eq!(s1, s2, "not idempotent for {x}");
        }
    }
}
