//! Float formatting shared by every text output.

/// Rounds to 12 significant digits and prints the shortest decimal that
/// reads back as the rounded value.
pub fn sig12(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("valid float");
    // avoid "-0"
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    rounded.to_string()
}

/// `num/den` rendering of an exact rational (denominator always shown).
pub fn ratio(r: &num_rational::BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(sig12(-2.0), "-2");
        assert_eq!(sig12(0.1 + 0.2), "0.3");
        assert_eq!(sig12(std::f64::consts::PI), "3.14159265359");
        assert_eq!(sig12(-0.0), "0");
        assert_eq!(sig12(1234567.891234567), "1234567.89123");
        let s = sig12(1.0 / 3.0);
        assert_eq!(sig12(s.parse().unwrap()), s);
    }

    #[test]
    fn ratios() {
        let r = num_rational::BigRational::new((-8).into(), 2.into());
        assert_eq!(ratio(&r), "-4/1");
    }
}
