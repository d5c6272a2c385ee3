use super::{check_training, Linear};
use crate::error::{Error, Result};
use crate::nn::log_softmax;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticConfig {
    pub l2: f64,
    pub max_iters: usize,
    pub tol: f64,
    /// Initial step size of the backtracking line search.
    pub step: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            l2: 1e-4,
            max_iters: 500,
            tol: 1e-6,
            step: 1.0,
        }
    }
}

/// Multinomial logistic regression fitted by full-batch gradient descent.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub linear: Linear,
    pub l2: f64,
    pub iters_run: usize,
    /// Objective value after each accepted step, starting with the initial value.
    pub loss_history: Vec<f64>,
}

impl LogisticModel {
    pub fn classify(&self, queries: &[Vec<f64>]) -> Result<Vec<usize>> {
        self.linear.classify(queries)
    }

    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        crate::nn::softmax(&self.linear.scores(x))
    }
}

/// Mean cross-entropy plus `(l2 / 2) ||W||^2` and its gradient (weights then bias).
pub fn logistic_objective(model: &Linear, features: &[Vec<f64>], labels: &[usize], l2: f64) -> (f64, Linear) {
    let n = features.len() as f64;
    let c = model.classes;
    let mut grad = Linear::zeros(model.dims, c);
    let mut loss = 0.0;
    for (x, &y) in features.iter().zip(labels) {
        let logp = log_softmax(&model.scores(x));
        loss -= logp[y];
        for k in 0..c {
            let r = (logp[k].exp() - if k == y { 1.0 } else { 0.0 }) / n;
            grad.bias[k] += r;
            for (j, &xj) in x.iter().enumerate() {
                grad.weights[j * c + k] += r * xj;
            }
        }
    }
    let penalty: f64 = model.weights.iter().map(|w| w * w).sum::<f64>() * l2 / 2.0;
    for (g, &w) in grad.weights.iter_mut().zip(&model.weights) {
        *g += l2 * w;
    }
    (loss / n + penalty, grad)
}

fn step_to(model: &Linear, grad: &Linear, step: f64) -> Linear {
    let mut next = model.clone();
    for (w, g) in next.weights.iter_mut().zip(&grad.weights) {
        *w -= step * g;
    }
    for (b, g) in next.bias.iter_mut().zip(&grad.bias) {
        *b -= step * g;
    }
    next
}

/// Gradient descent with Armijo backtracking, so the recorded objective never
/// increases. Stops after `max_iters` steps or when the decrease drops below `tol`.
pub fn fit_logreg(features: &[Vec<f64>], labels: &[usize], classes: usize, cfg: &LogisticConfig) -> Result<LogisticModel> {
    let d = check_training(features, labels, classes)?;
    if features.len() < classes {
        return Err(Error::Contract(format!(
            "logistic regression needs at least {classes} rows, got {}",
            features.len()
        )));
    }
    let mut model = Linear::zeros(d, classes);
    let (mut loss, mut grad) = logistic_objective(&model, features, labels, cfg.l2);
    let mut history = vec![loss];
    let mut step = cfg.step;
    let mut iters = 0;
    while iters < cfg.max_iters {
        let gnorm2: f64 = grad.weights.iter().chain(&grad.bias).map(|g| g * g).sum();
        if gnorm2 == 0.0 {
            break;
        }
        let mut accepted = None;
        for _ in 0..60 {
            let candidate = step_to(&model, &grad, step);
            let (cand_loss, cand_grad) = logistic_objective(&candidate, features, labels, cfg.l2);
            if cand_loss.is_nan() {
                return Err(Error::Numeric(format!("logistic loss diverged at step size {step}")));
            }
            if cand_loss <= loss - 1e-4 * step * gnorm2 {
                accepted = Some((candidate, cand_loss, cand_grad));
                break;
            }
            step *= 0.5;
        }
        let Some((next, next_loss, next_grad)) = accepted else {
            break;
        };
        iters += 1;
        let delta = loss - next_loss;
        model = next;
        loss = next_loss;
        grad = next_grad;
        history.push(loss);
        if delta.abs() < cfg.tol {
            break;
        }
        step = (step * 2.0).min(cfg.step * 1e3);
    }
    Ok(LogisticModel {
        linear: model,
        l2: cfg.l2,
        iters_run: iters,
        loss_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let c = i % 2;
            let centre = if c == 0 { -2.0 } else { 2.0 };
            x.push(vec![centre + ((i * 13) as f64).sin() * 0.8, ((i * 7) as f64).cos()]);
            y.push(c);
        }
        (x, y)
    }

    #[test]
    fn separable_data_is_fit() {
        let (x, y) = blobs();
        let m = fit_logreg(&x, &y, 2, &LogisticConfig::default()).unwrap();
        assert_eq!(m.classify(&x).unwrap(), y);
        assert!(m.loss_history.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(m.loss_history.len(), m.iters_run + 1);
    }

    #[test]
    fn heavy_penalty_gives_uniform_predictions() {
        let (x, y) = blobs();
        let cfg = LogisticConfig {
            l2: 1e12,
            ..LogisticConfig::default()
        };
        let m = fit_logreg(&x, &y, 2, &cfg).unwrap();
        assert!(m.linear.weights.iter().all(|w| w.abs() < 1e-9));
        for q in &x {
            let p = m.probabilities(q);
            assert!((p[0] - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn too_few_rows_is_rejected() {
        assert!(fit_logreg(&[vec![0.0]], &[0], 2, &LogisticConfig::default()).is_err());
    }

    #[test]
    fn fit_is_deterministic() {
        let (x, y) = blobs();
        let a = fit_logreg(&x, &y, 2, &LogisticConfig::default()).unwrap();
        let b = fit_logreg(&x, &y, 2, &LogisticConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
