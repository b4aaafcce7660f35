//! Text output: probabilities with 12 significant digits and CSV tables.

use std::io::Write;

use photocount::engine::ProbabilityTable;
use photocount::linalg::OccupationVector;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `%.12g`-style formatting: fixed notation for moderate exponents,
/// scientific otherwise, trailing zeros trimmed.
pub fn sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa.to_string()))
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn pattern(p: &OccupationVector) -> String {
    p.counts().iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

pub fn write_csv(out: &mut impl Write, table: &ProbabilityTable) -> std::io::Result<()> {
    writeln!(out, "pattern,probability,path")?;
    for e in &table.entries {
        writeln!(out, "{},{},{}", pattern(&e.pattern), sig(e.probability), e.path.as_str())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig(0.5), "0.5");
        assert_eq!(sig(0.0625), "0.0625");
        assert_eq!(sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig(2.0 / 3.0 * 1e-7), "6.66666666667e-8");
        assert_eq!(sig(123456.7890123456), "123456.789012");
        assert_eq!(sig(1.0), "1");
        assert_eq!(sig(0.0), "0");
        assert_eq!(sig(-2.5e-17), "-2.5e-17");
    }
}
