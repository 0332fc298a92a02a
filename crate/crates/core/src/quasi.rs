//! Low-discrepancy point sets used for deterministic sampling.

/// The `index`-th element (starting at 1) of the van der Corput sequence in
/// base `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while index > 0 {
        out += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    out
}

/// The `index`-th point of the 2-dimensional Halton sequence (bases 2, 3).
pub fn halton2(index: u64) -> [f64; 2] {
    [radical_inverse(index, 2), radical_inverse(index, 3)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_halton_points() {
        assert_eq!(halton2(1), [0.5, 1.0 / 3.0]);
        assert_eq!(halton2(2), [0.25, 2.0 / 3.0]);
        assert_eq!(halton2(3), [0.75, 1.0 / 9.0]);
    }
}
