//! Small order-statistic helpers shared by the bootstrap and envelope code.

/// Linearly interpolated quantile of sorted data (the "type 7" rule).
pub fn quantile_linear(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let p = p.clamp(0.0, 1.0);
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// One-based rank `ceil(alpha * m)`, at least 1, used for pointwise bands.
pub fn band_rank(alpha: f64, m: usize) -> usize {
    ((alpha * m as f64 - 1e-9).ceil() as usize).clamp(1, m)
}

pub fn sort_floats(values: &mut [f64]) {
    values.sort_by(|a, b| a.total_cmp(b));
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    sort_floats(&mut v);
    quantile_linear(&v, 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_linear(&v, 0.0), 1.0);
        assert_eq!(quantile_linear(&v, 1.0), 5.0);
        assert_eq!(quantile_linear(&v, 0.5), 3.0);
        assert!((quantile_linear(&v, 0.1) - 1.4).abs() < 1e-12);
        assert_eq!(quantile_linear(&[7.0; 20], 0.025), 7.0);
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), 2.5);
    }

    #[test]
    fn band_ranks() {
        assert_eq!(band_rank(0.025, 999), 25);
        assert_eq!(band_rank(0.025, 39), 1);
        assert_eq!(band_rank(0.0, 10), 1);
        assert_eq!(band_rank(0.025, 40), 1);
        assert_eq!(band_rank(0.05, 20), 1);
    }
}
