use crate::linalg::norm1;

/// Stepsize recursion of the adaptive method:
/// `alpha_t = sqrt(sum_{s<t} lambda_s^2 alpha_s^2 ||x_{s+1} - x_s||_1^2 + 1)`
/// with `lambda_s = 2 / (max(||x_s||_1, ||x_{s+1}||_1) + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveState {
    /// Accumulated weighted squared movement (nondecreasing).
    pub accumulated: f64,
    /// Current `alpha_t`, always `sqrt(accumulated + 1)`.
    pub alpha: f64,
}

impl Default for AdaptiveState {
    fn default() -> Self {
        Self::new()
    }
}

impl AdaptiveState {
    pub fn new() -> Self {
        Self {
            accumulated: 0.0,
            alpha: 1.0,
        }
    }

    pub fn lambda(current: &[f64], next: &[f64]) -> f64 {
        2.0 / (norm1(current).max(norm1(next)) + 1.0)
    }

    /// Folds in the step `current -> next` taken with the current `alpha`.
    /// Returns the `lambda_t` used.
    pub fn update(&mut self, current: &[f64], next: &[f64]) -> f64 {
        let lambda = Self::lambda(current, next);
        let moved: f64 = current.iter().zip(next).map(|(a, b)| (b - a).abs()).sum();
        self.accumulated += (lambda * self.alpha * moved).powi(2);
        self.alpha = (self.accumulated + 1.0).sqrt();
        lambda
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_at_one() {
        let s = AdaptiveState::new();
        assert_eq!(s.alpha, 1.0);
        assert_eq!(s.accumulated, 0.0);
    }

    #[test]
    fn no_movement_keeps_alpha() {
        let mut s = AdaptiveState::new();
        s.update(&[0.0, 1.0], &[0.5, 1.0]);
        let before = s;
        s.update(&[0.5, 1.0], &[0.5, 1.0]);
        assert_eq!(s, before);
    }

    #[test]
    fn hand_evaluated_first_step() {
        let mut s = AdaptiveState::new();
        let lambda = s.update(&[0.0, 0.0], &[0.25, -0.75]);
        assert_eq!(lambda, 1.0);
        assert!((s.alpha - 2f64.sqrt()).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn alpha_is_monotone_and_lambda_bounded(
            steps in proptest::collection::vec(proptest::collection::vec(-5f64..5.0, 3), 2..20)
        ) {
            let mut s = AdaptiveState::new();
            let radius = steps.iter().map(|x| norm1(x)).fold(0.0, f64::max);
            for w in steps.windows(2) {
                let prev = s;
                let lambda = s.update(&w[0], &w[1]);
                proptest::prop_assert!(s.alpha >= prev.alpha && prev.alpha >= 1.0);
                proptest::prop_assert!(s.accumulated >= prev.accumulated);
                proptest::prop_assert!((s.alpha - (s.accumulated + 1.0).sqrt()).abs() < 1e-12 * s.alpha);
                proptest::prop_assert!(lambda <= 2.0 && lambda >= 2.0 / (radius + 1.0) - 1e-15);
            }
        }
    }
}
