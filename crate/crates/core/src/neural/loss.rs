/// Probabilities below this are clamped before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossEntropy {
    pub loss: f64,
    /// The true-class probability fell below [`PROB_FLOOR`].
    pub clamped: bool,
}

/// `−log probs[label]`, clamped at [`PROB_FLOOR`].
pub fn cross_entropy(probs: &[f64], label: usize) -> CrossEntropy {
    assert!(
        label < probs.len(),
        "label {label} out of range for {} classes",
        probs.len()
    );
    let p = probs[label];
    let clamped = p < PROB_FLOOR;
    CrossEntropy {
        loss: -p.max(PROB_FLOOR).ln(),
        clamped,
    }
}

/// Gradient of softmax + cross-entropy with respect to the logits.
pub fn logits_gradient(probs: &[f64], label: usize) -> Vec<f64> {
    let mut g = probs.to_vec();
    g[label] -= 1.0;
    g
}

pub fn mean_loss(losses: &[f64]) -> f64 {
    if losses.is_empty() {
        return 0.0;
    }
    losses.iter().sum::<f64>() / losses.len() as f64
}
