//! Decimal formatting for trace and summary files.

/// Plain decimal with 9 significant digits, trailing zeros trimmed.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    let mut s = with_decimals(x, (8 - mag).max(0) as usize);
    // Rounding can carry into a new leading digit (9.999999999 -> 10.0000000).
    let carried = s
        .parse::<f64>()
        .map(|y| y.abs().log10().floor() as i32 > mag)
        .unwrap_or(false);
    if carried && mag < 8 {
        s = with_decimals(x, (7 - mag).max(0) as usize);
    }
    trim(s)
}

/// `x` rounded to what [`sig9`] prints.
pub fn round9(x: f64) -> f64 {
    sig9(x).parse().unwrap_or(x)
}

fn with_decimals(x: f64, decimals: usize) -> String {
    format!("{x:.decimals$}")
}

fn trim(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".to_string()
    } else {
        t.to_string()
    }
}
