//! Small formatting helpers shared by the CSV writers.

/// Seventeen significant digits, enough to round-trip an `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e-300, -7.25e12] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
    }
}
