use nalgebra::{Cholesky, DMatrix};

use super::{check_training, Linear};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeConfig {
    pub alpha: f64,
    /// Fit an unpenalized intercept by centring features and targets.
    pub fit_intercept: bool,
}

impl Default for RidgeConfig {
    fn default() -> Self {
        RidgeConfig {
            alpha: 1.0,
            fit_intercept: true,
        }
    }
}

/// One-vs-all ridge regression on one-hot targets.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    pub linear: Linear,
    pub alpha: f64,
}

impl RidgeModel {
    pub fn classify(&self, queries: &[Vec<f64>]) -> Result<Vec<usize>> {
        self.linear.classify(queries)
    }
}

/// Design and target matrices as the solver sees them (centred when fitting an intercept).
fn system(features: &[Vec<f64>], labels: &[usize], classes: usize, centre: bool) -> (DMatrix<f64>, DMatrix<f64>, Vec<f64>, Vec<f64>) {
    let n = features.len();
    let d = features[0].len();
    let mut x = DMatrix::from_fn(n, d, |i, j| features[i][j]);
    let mut y = DMatrix::from_fn(n, classes, |i, c| if labels[i] == c { 1.0 } else { 0.0 });
    let mut x_mean = vec![0.0; d];
    let mut y_mean = vec![0.0; classes];
    if centre {
        for j in 0..d {
            x_mean[j] = x.column(j).mean();
            x.column_mut(j).add_scalar_mut(-x_mean[j]);
        }
        for c in 0..classes {
            y_mean[c] = y.column(c).mean();
            y.column_mut(c).add_scalar_mut(-y_mean[c]);
        }
    }
    (x, y, x_mean, y_mean)
}

/// Solves `(X'X + alpha I) W = X'Y` by Cholesky factorization.
pub fn fit_ridge(features: &[Vec<f64>], labels: &[usize], classes: usize, cfg: &RidgeConfig) -> Result<RidgeModel> {
    let d = check_training(features, labels, classes)?;
    if !(cfg.alpha >= 0.0) {
        return Err(Error::Config(format!("alpha must be non-negative, got {}", cfg.alpha)));
    }
    let (x, y, x_mean, y_mean) = system(features, labels, classes, cfg.fit_intercept);
    let xt = x.transpose();
    let mut gram = &xt * &x;
    for j in 0..d {
        gram[(j, j)] += cfg.alpha;
    }
    let scale = (0..d).map(|j| gram[(j, j)]).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let singular = || {
        Error::Numeric(format!(
            "ridge normal equations are singular at alpha = {}; use alpha > 0",
            cfg.alpha
        ))
    };
    let chol = Cholesky::new(gram).ok_or_else(singular)?;
    let l = chol.l_dirty();
    if (0..d).any(|j| l[(j, j)] * l[(j, j)] <= 1e-12 * scale) {
        return Err(singular());
    }
    let w = chol.solve(&(&xt * &y));
    let mut linear = Linear::zeros(d, classes);
    for j in 0..d {
        for c in 0..classes {
            linear.weights[j * classes + c] = w[(j, c)];
        }
    }
    for c in 0..classes {
        linear.bias[c] = y_mean[c] - (0..d).map(|j| x_mean[j] * w[(j, c)]).sum::<f64>();
    }
    Ok(RidgeModel {
        linear,
        alpha: cfg.alpha,
    })
}

/// `||(X'X + alpha I) W - X'Y|| / ||X'Y||` (Frobenius) for a fitted model, on
/// the same (centred or raw) system the solver used.
pub fn normal_equation_residual(
    model: &RidgeModel,
    features: &[Vec<f64>],
    labels: &[usize],
    fit_intercept: bool,
) -> f64 {
    let classes = model.linear.classes;
    let d = model.linear.dims;
    let (x, y, _, _) = system(features, labels, classes, fit_intercept);
    let w = DMatrix::from_fn(d, classes, |j, c| model.linear.weights[j * classes + c]);
    let xt = x.transpose();
    let rhs = &xt * &y;
    let lhs = &xt * &x * &w + &w * model.alpha;
    (lhs - &rhs).norm() / rhs.norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_design_recovers_one_hot() {
        let x: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let labels = vec![2, 0, 3, 1];
        let cfg = RidgeConfig {
            alpha: 0.0,
            fit_intercept: false,
        };
        let m = fit_ridge(&x, &labels, 4, &cfg).unwrap();
        for (i, &l) in labels.iter().enumerate() {
            for c in 0..4 {
                let want = if c == l { 1.0 } else { 0.0 };
                assert!((m.linear.weights[i * 4 + c] - want).abs() < 1e-12);
            }
        }
        assert_eq!(m.classify(&x).unwrap(), labels);
    }

    #[test]
    fn singular_system_at_zero_alpha_is_an_error() {
        let x = vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]];
        let cfg = RidgeConfig {
            alpha: 0.0,
            fit_intercept: false,
        };
        let err = fit_ridge(&x, &[0, 1, 0], 2, &cfg).unwrap_err().to_string();
        assert!(err.contains("alpha > 0"), "{err}");
        assert!(fit_ridge(&x, &[0, 1, 0], 2, &RidgeConfig::default()).is_ok());
    }

    #[test]
    fn huge_alpha_collapses_to_bias() {
        let x = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![5.0, 5.0], vec![-1.0, 2.0], vec![0.5, 0.5]];
        let labels = vec![0, 1, 1, 1, 0];
        let cfg = RidgeConfig {
            alpha: 1e12,
            fit_intercept: true,
        };
        let m = fit_ridge(&x, &labels, 2, &cfg).unwrap();
        assert!(m.linear.weights.iter().all(|w| w.abs() < 1e-9));
        // bias is the class frequency: class 1 is the majority
        assert_eq!(m.classify(&x).unwrap(), vec![1; 5]);
    }

    #[test]
    fn residual_is_tiny() {
        let x: Vec<Vec<f64>> = (0..30)
            .map(|i| (0..5).map(|j| ((i * 7 + j * 3) as f64 * 0.41).sin()).collect())
            .collect();
        let labels: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let m = fit_ridge(&x, &labels, 3, &RidgeConfig::default()).unwrap();
        assert!(normal_equation_residual(&m, &x, &labels, true) <= 1e-8);
    }
}
