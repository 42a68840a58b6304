/// `0.811±0.001`: metric and half-width at three decimals.
pub fn format_cell(mean: f64, halfwidth: f64) -> String {
    format!("{mean:.3}±{halfwidth:.3}")
}

/// Signed three-decimal difference, `+0.012` / `-0.018`.
pub fn format_delta(delta: f64) -> String {
    format!("{delta:+.3}")
}

/// Three significant digits, C `%g` style: fixed notation down to 1e-4,
/// scientific below it (`0.000523`, `3.58e-05`, `0.5`, `1`).
pub fn format_p(p: f64) -> String {
    if p == 0.0 {
        return "0".to_owned();
    }
    if !p.is_finite() {
        return p.to_string();
    }
    // rounding to three significant digits can bump the exponent
    let sci = format!("{p:.2e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..3).contains(&exp) {
        let decimals = (2 - exp).max(0) as usize;
        trim_zeros(&format!("{p:.decimals$}")).to_owned()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
