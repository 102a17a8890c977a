use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{add_assign, softmax, Matrix};

/// `softmax(W2 · relu(W1 x + b1) + b2)`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub w1: Matrix,
    pub b1: Matrix,
    pub w2: Matrix,
    pub b2: Matrix,
}

#[derive(Debug, Clone)]
pub struct MlpTrace {
    input: Vec<f64>,
    hidden: Vec<f64>,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
}

impl MlpParams {
    pub fn zeros(input: usize, hidden: usize, classes: usize) -> Self {
        assert!(classes >= 2, "an MLP head needs at least two classes");
        MlpParams {
            w1: Matrix::zeros(hidden, input),
            b1: Matrix::zeros(hidden, 1),
            w2: Matrix::zeros(classes, hidden),
            b2: Matrix::zeros(classes, 1),
        }
    }

    pub fn init<R: Rng + ?Sized>(input: usize, hidden: usize, classes: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(input, hidden, classes);
        p.w1 = Matrix::glorot(hidden, input, rng);
        p.w2 = Matrix::glorot(classes, hidden, rng);
        p
    }

    pub fn input_size(&self) -> usize {
        self.w1.cols()
    }

    pub fn classes(&self) -> usize {
        self.w2.rows()
    }

    pub fn tensors(&self) -> [(&'static str, &Matrix); 4] {
        [
            ("w1", &self.w1),
            ("b1", &self.b1),
            ("w2", &self.w2),
            ("b2", &self.b2),
        ]
    }

    pub fn tensors_mut(&mut self) -> [(&'static str, &mut Matrix); 4] {
        [
            ("w1", &mut self.w1),
            ("b1", &mut self.b1),
            ("w2", &mut self.w2),
            ("b2", &mut self.b2),
        ]
    }

    pub fn forward(&self, x: &[f64]) -> MlpTrace {
        assert_eq!(x.len(), self.input_size(), "MLP input extent");
        let mut hidden = self.b1.as_slice().to_vec();
        self.w1.matvec_acc(x, &mut hidden);
        for h in &mut hidden {
            *h = h.max(0.0);
        }
        let mut logits = self.b2.as_slice().to_vec();
        self.w2.matvec_acc(&hidden, &mut logits);
        let probs = softmax(&logits);
        MlpTrace {
            input: x.to_vec(),
            hidden,
            logits,
            probs,
        }
    }

    /// Backward from ∂L/∂logits; accumulates into `grads`, returns ∂L/∂x.
    pub fn backward(&self, trace: &MlpTrace, d_logits: &[f64], grads: &mut MlpParams) -> Vec<f64> {
        assert_eq!(d_logits.len(), self.classes(), "MLP upstream extent");
        grads.w2.add_outer(1.0, d_logits, &trace.hidden);
        add_assign(grads.b2.as_mut_slice(), d_logits);
        let mut dh = vec![0.0; trace.hidden.len()];
        self.w2.matvec_t_acc(d_logits, &mut dh);
        for (g, h) in dh.iter_mut().zip(&trace.hidden) {
            if *h <= 0.0 {
                *g = 0.0;
            }
        }
        grads.w1.add_outer(1.0, &dh, &trace.input);
        add_assign(grads.b1.as_mut_slice(), &dh);
        let mut dx = vec![0.0; self.input_size()];
        self.w1.matvec_t_acc(&dh, &mut dx);
        dx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_weights_are_uniform() {
        let p = MlpParams::zeros(4, 5, 3);
        let probs = p.forward(&[1.0, 2.0, 3.0, 4.0]).probs;
        for v in probs {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn forced_logits() {
        // identity hidden layer, output picks out the inputs
        let mut p = MlpParams::zeros(3, 3, 3);
        p.w1 = Matrix::from_vec(3, 3, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        p.w2 = p.w1.clone();
        let probs = p.forward(&[0.0, 0.0, 2f64.ln()]).probs;
        let want = [0.25, 0.25, 0.5];
        for (g, w) in probs.iter().zip(want) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_scalar_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut p = MlpParams::init(5, 6, 4, &mut rng);
        for v in p.b1.as_mut_slice().iter_mut().chain(p.b2.as_mut_slice()) {
            *v = rng.gen_range(-0.5..0.5);
        }
        let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut h = [0.0; 6];
        for (i, hi) in h.iter_mut().enumerate() {
            let mut s = p.b1.get(i, 0);
            for (j, xj) in x.iter().enumerate() {
                s += p.w1.get(i, j) * xj;
            }
            *hi = if s > 0.0 { s } else { 0.0 };
        }
        let mut logits = [0.0; 4];
        for (c, l) in logits.iter_mut().enumerate() {
            let mut s = p.b2.get(c, 0);
            for (i, hi) in h.iter().enumerate() {
                s += p.w2.get(c, i) * hi;
            }
            *l = s;
        }
        let z: f64 = logits.iter().map(|l| l.exp()).sum();
        let got = p.forward(&x).probs;
        for (g, l) in got.iter().zip(logits) {
            assert!((g - l.exp() / z).abs() < 1e-12);
        }
        assert!((got.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let p = MlpParams::init(4, 5, 3, &mut rng);
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let up = [0.3, -1.2, 0.7];
        let loss = |p: &MlpParams, x: &[f64]| -> f64 {
            p.forward(x).logits.iter().zip(up).map(|(a, b)| a * b).sum()
        };
        let tr = p.forward(&x);
        let mut g = MlpParams::zeros(4, 5, 3);
        let dx = p.backward(&tr, &up, &mut g);
        let eps = 1e-6;
        for (gi, (name, gm)) in g.tensors().iter().enumerate() {
            for i in 0..gm.as_slice().len() {
                let mut a = p.clone();
                a.tensors_mut()[gi].1.as_mut_slice()[i] += eps;
                let mut b = p.clone();
                b.tensors_mut()[gi].1.as_mut_slice()[i] -= eps;
                let num = (loss(&a, &x) - loss(&b, &x)) / (2.0 * eps);
                assert!((gm.as_slice()[i] - num).abs() < 1e-7, "{name}[{i}]");
            }
        }
        for j in 0..4 {
            let mut a = x.clone();
            a[j] += eps;
            let mut b = x.clone();
            b[j] -= eps;
            let num = (loss(&p, &a) - loss(&p, &b)) / (2.0 * eps);
            assert!((dx[j] - num).abs() < 1e-7);
        }
    }
}
