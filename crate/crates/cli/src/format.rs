//! Number formatting for reports: `printf("%.9g")` semantics.

/// Significant digits used for every float in CSV output.
pub const SIGNIFICANT_DIGITS: usize = 9;

/// Formats `x` like C's `%.9g`: fixed notation for decimal exponents in `[-4, 9)`,
/// scientific otherwise, trailing zeros removed.
pub fn fmt_g(x: f64) -> String {
    fmt_g_digits(x, SIGNIFICANT_DIGITS)
}

pub fn fmt_g_digits(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let precision = digits.max(1);
    // Rounding to the requested digits first fixes the exponent, including carries like 9.99 -> 10.0.
    let sci = format!("{:.*e}", precision - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= precision as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_fraction(mantissa), exp.abs())
    } else {
        let decimals = (precision as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Empty field for absent values.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_g).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf() {
        let cases = [
            (0.75, "0.75"),
            (1.3125, "1.3125"),
            (1.0 / 3.0, "0.333333333"),
            (std::f64::consts::E, "2.71828183"),
            (12f64.exp(), "162754.791"),
            (20f64.exp(), "485165195"),
            (25f64.exp(), "7.20048993e+10"),
            (1e-5, "1e-05"),
            (0.0001234, "0.0001234"),
            (999999999.6, "1e+09"),
            (-2.5, "-2.5"),
            (100.0, "100"),
            (0.0, "0"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_g(x), want, "{x}");
        }
        assert_eq!(fmt_g(f64::NAN), "nan");
        assert_eq!(fmt_g_digits(4.55119, 5), "4.5512");
        assert_eq!(fmt_opt(None), "");
    }
}
