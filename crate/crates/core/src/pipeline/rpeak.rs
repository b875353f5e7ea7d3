/// Minimum normalized amplitude of an R-peak candidate.
pub const RPEAK_THRESHOLD: f64 = 0.9;

/// Local maxima (first difference changes from positive to non-positive)
/// whose normalized amplitude is at least `threshold`, in ascending order.
pub fn find_rpeaks(window: &[f64], threshold: f64) -> Vec<usize> {
    if window.len() < 3 {
        return Vec::new();
    }
    (1..window.len() - 1)
        .filter(|&i| {
            let rising = window[i] - window[i - 1] > 0.0;
            let falling = window[i + 1] - window[i] <= 0.0;
            rising && falling && window[i] >= threshold
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::normalize;

    #[test]
    fn monotone_has_no_peaks() {
        let x: Vec<f64> = (0..100).map(|i| i as f64 / 99.0).collect();
        assert!(find_rpeaks(&x, RPEAK_THRESHOLD).is_empty());
    }

    #[test]
    fn triangular_pulse() {
        let k = 40;
        let x: Vec<f64> = (0..100)
            .map(|i| (1.0 - (i as f64 - k as f64).abs() / 20.0).max(0.0))
            .collect();
        assert_eq!(find_rpeaks(&x, RPEAK_THRESHOLD), vec![k]);
    }

    #[test]
    fn gaussian_train_with_small_bumps() {
        let tall = [100usize, 225, 350, 475];
        let small = [160usize, 290, 410, 540];
        let bump = |i: usize, c: usize, h: f64, w: f64| {
            let d = i as f64 - c as f64;
            h * (-d * d / (2.0 * w * w)).exp()
        };
        let raw: Vec<f64> = (0..600)
            .map(|i| {
                tall.iter().map(|&c| bump(i, c, 1.0, 3.0)).sum::<f64>()
                    + small.iter().map(|&c| bump(i, c, 0.3, 6.0)).sum::<f64>()
            })
            .collect();
        let x = normalize(&raw).samples;
        assert_eq!(find_rpeaks(&x, RPEAK_THRESHOLD), tall.to_vec());
    }

    #[test]
    fn plateau_counts_once() {
        let x = [0.0, 0.95, 0.95, 0.0];
        assert_eq!(find_rpeaks(&x, RPEAK_THRESHOLD), vec![1]);
    }
}
