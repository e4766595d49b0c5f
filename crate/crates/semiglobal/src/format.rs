//! Shortest round-trip decimal formatting for output files.

/// Shortest decimal string that parses back to exactly `x`.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        // normalize negative zero for byte-stable output
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:?}");
    match s.strip_suffix(".0") {
        Some(t) => t.to_string(),
        None => s,
    }
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0, -2.5, 1e-7, 6.02214076e23, 1.0 / 3.0, -0.0, 123456789.0, 5e-324] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), if x == 0.0 { 0.0 } else { x }, "{s}");
        }
        assert_eq!(num(1.0), "1");
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(-0.0), "0");
    }
}
