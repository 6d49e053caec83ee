//! Fixed significant-digit formatting for CSV and JSON outputs.
//!
//! Outputs carry 9 significant digits, `%.9g` style: fixed notation for
//! decimal exponents in `[-4, 9)`, scientific otherwise, trailing zeros
//! trimmed.

/// Significant digits used for every numeric text output.
pub const SIGNIFICANT_DIGITS: usize = 9;

/// Format `x` with `digits` significant digits in `%g` style.
pub fn format_sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // `{:e}` rounds correctly; read the decimal exponent back out of it.
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

/// `format_sig` with the crate-wide digit count.
pub fn sig9(x: f64) -> String {
    format_sig(x, SIGNIFICANT_DIGITS)
}

/// Round `x` to 9 significant digits, for JSON emission.
pub fn round_sig9(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    sig9(x).parse().expect("sig9 output parses")
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
