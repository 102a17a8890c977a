use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{axpy, dot, softmax, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttentionVariant {
    /// Scores each output against the last output of the same side.
    ContextOnly,
    /// Scores each output against the embedding of the target's base form.
    TargetAware,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionParams {
    pub variant: AttentionVariant,
    pub w: Matrix,
}

#[derive(Debug, Clone)]
pub struct AttentionTrace {
    pub weights: Vec<f64>,
    pub state: Vec<f64>,
    query: Vec<f64>,
}

impl AttentionParams {
    pub fn zeros(variant: AttentionVariant, hidden: usize, emb: usize) -> Self {
        let cols = match variant {
            AttentionVariant::ContextOnly => hidden,
            AttentionVariant::TargetAware => emb,
        };
        AttentionParams {
            variant,
            w: Matrix::zeros(hidden, cols),
        }
    }

    pub fn init<R: Rng + ?Sized>(
        variant: AttentionVariant,
        hidden: usize,
        emb: usize,
        rng: &mut R,
    ) -> Self {
        let mut p = Self::zeros(variant, hidden, emb);
        p.w = Matrix::glorot(p.w.rows(), p.w.cols(), rng);
        p
    }

    pub fn hidden_size(&self) -> usize {
        self.w.rows()
    }

    /// Width of the produced state vector.
    pub fn state_size(&self) -> usize {
        match self.variant {
            AttentionVariant::ContextOnly => 2 * self.w.rows(),
            AttentionVariant::TargetAware => 2 * self.w.rows() + self.w.cols(),
        }
    }

    /// Attends over `outputs` (lo_1..lo_m). `target` is required for
    /// [`AttentionVariant::TargetAware`] and ignored otherwise.
    pub fn forward(&self, outputs: &[Vec<f64>], target: Option<&[f64]>) -> AttentionTrace {
        assert!(!outputs.is_empty(), "attention over an empty sequence");
        let d = self.hidden_size();
        let last = outputs.last().unwrap();
        let query = match self.variant {
            AttentionVariant::ContextOnly => self.w.matvec(last),
            AttentionVariant::TargetAware => {
                let e = target.expect("target-aware attention needs a target embedding");
                self.w.matvec(e)
            }
        };
        let scores: Vec<f64> = outputs.iter().map(|o| dot(o, &query)).collect();
        let weights = softmax(&scores);
        let mut state = vec![0.0; d];
        for (a, o) in weights.iter().zip(outputs) {
            axpy(*a, o, &mut state);
        }
        if self.variant == AttentionVariant::TargetAware {
            state.extend_from_slice(target.unwrap());
        }
        state.extend_from_slice(last);
        AttentionTrace {
            weights,
            state,
            query,
        }
    }

    /// Returns ∂L/∂outputs and, for the target-aware variant, ∂L/∂target.
    pub fn backward(
        &self,
        outputs: &[Vec<f64>],
        target: Option<&[f64]>,
        trace: &AttentionTrace,
        d_state: &[f64],
        grad_w: &mut Matrix,
    ) -> (Vec<Vec<f64>>, Option<Vec<f64>>) {
        assert_eq!(
            d_state.len(),
            self.state_size(),
            "attention upstream extent"
        );
        assert_eq!(trace.weights.len(), outputs.len(), "stale attention trace");
        let d = self.hidden_size();
        let m = outputs.len();
        let dc = &d_state[..d];
        let mut d_out = vec![vec![0.0; d]; m];

        let da: Vec<f64> = outputs.iter().map(|o| dot(o, dc)).collect();
        let mean: f64 = trace.weights.iter().zip(&da).map(|(a, g)| a * g).sum();
        let mut dq = vec![0.0; d];
        for t in 0..m {
            let a = trace.weights[t];
            let ds = a * (da[t] - mean);
            axpy(a, dc, &mut d_out[t]);
            axpy(ds, &trace.query, &mut d_out[t]);
            axpy(ds, &outputs[t], &mut dq);
        }

        match self.variant {
            AttentionVariant::ContextOnly => {
                let last = &outputs[m - 1];
                grad_w.add_outer(1.0, &dq, last);
                let dl = &mut d_out[m - 1];
                self.w.matvec_t_acc(&dq, dl);
                super::matrix::add_assign(dl, &d_state[d..]);
                (d_out, None)
            }
            AttentionVariant::TargetAware => {
                let e = target.expect("target-aware attention needs a target embedding");
                let de_len = e.len();
                grad_w.add_outer(1.0, &dq, e);
                let mut de = d_state[d..d + de_len].to_vec();
                self.w.matvec_t_acc(&dq, &mut de);
                super::matrix::add_assign(&mut d_out[m - 1], &d_state[d + de_len..]);
                (d_out, Some(de))
            }
        }
    }
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_vecs(rng: &mut ChaCha8Rng, m: usize, d: usize) -> Vec<Vec<f64>> {
        (0..m)
            .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }

    /// Scalar-loop softmax over bilinear scores x_tᵀ W q.
    fn oracle_weights(outputs: &[Vec<f64>], w: &Matrix, q: &[f64]) -> Vec<f64> {
        let scores: Vec<f64> = outputs
            .iter()
            .map(|o| {
                let mut s = 0.0;
                for i in 0..w.rows() {
                    for j in 0..w.cols() {
                        s += o[i] * w.get(i, j) * q[j];
                    }
                }
                s
            })
            .collect();
        let z: f64 = scores.iter().map(|s| s.exp()).sum();
        scores.iter().map(|s| s.exp() / z).collect()
    }

    #[test]
    fn single_output_context_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = AttentionParams::init(AttentionVariant::ContextOnly, 3, 0, &mut rng);
        let lo = vec![vec![0.1, -0.2, 0.3]];
        let tr = p.forward(&lo, None);
        assert_eq!(tr.weights, vec![1.0]);
        assert_eq!(tr.state, vec![0.1, -0.2, 0.3, 0.1, -0.2, 0.3]);
    }

    #[test]
    fn single_output_target_aware() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = AttentionParams::init(AttentionVariant::TargetAware, 2, 3, &mut rng);
        let lo = vec![vec![0.5, -0.5]];
        let e = [1.0, 2.0, 3.0];
        let tr = p.forward(&lo, Some(&e));
        assert_eq!(tr.state, vec![0.5, -0.5, 1.0, 2.0, 3.0, 0.5, -0.5]);
    }

    #[test]
    fn zero_matrix_gives_uniform_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lo = rand_vecs(&mut rng, 4, 3);
        let p = AttentionParams::zeros(AttentionVariant::ContextOnly, 3, 0);
        for a in p.forward(&lo, None).weights {
            assert!((a - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_target_gives_uniform_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let lo = rand_vecs(&mut rng, 5, 3);
        let p = AttentionParams::init(AttentionVariant::TargetAware, 3, 2, &mut rng);
        for a in p.forward(&lo, Some(&[0.0, 0.0])).weights {
            assert!((a - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn weights_match_oracle_both_variants() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let lo = rand_vecs(&mut rng, 3, 4);
            let p = AttentionParams::init(AttentionVariant::ContextOnly, 4, 0, &mut rng);
            let got = p.forward(&lo, None).weights;
            let want = oracle_weights(&lo, &p.w, &lo[2]);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-12);
            }

            let lo = rand_vecs(&mut rng, 6, 4);
            let e: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let p = AttentionParams::init(AttentionVariant::TargetAware, 4, 3, &mut rng);
            let tr = p.forward(&lo, Some(&e));
            let want = oracle_weights(&lo, &p.w, &e);
            for (g, w) in tr.weights.iter().zip(&want) {
                assert!((g - w).abs() < 1e-12);
            }
            // weighted sum by explicit loop
            for i in 0..4 {
                let s: f64 = (0..6).map(|t| want[t] * lo[t][i]).sum();
                assert!((tr.state[i] - s).abs() < 1e-12);
            }
        }
    }

    fn check_gradients(variant: AttentionVariant, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (d, de, m) = (4, 3, 3);
        let p = AttentionParams::init(variant, d, de, &mut rng);
        let lo = rand_vecs(&mut rng, m, d);
        let e: Vec<f64> = (0..de).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let tgt = (variant == AttentionVariant::TargetAware).then_some(e.as_slice());
        let up: Vec<f64> = (0..p.state_size())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let loss = |p: &AttentionParams, lo: &[Vec<f64>], t: Option<&[f64]>| {
            dot(&p.forward(lo, t).state, &up)
        };

        let tr = p.forward(&lo, tgt);
        let mut gw = Matrix::zeros(p.w.rows(), p.w.cols());
        let (dlo, de_grad) = p.backward(&lo, tgt, &tr, &up, &mut gw);
        let eps = 1e-6;
        let close = |a: f64, n: f64| (a - n).abs() <= 1e-7 * (1.0 + a.abs().max(n.abs()));
        for i in 0..gw.as_slice().len() {
            let mut pp = p.clone();
            pp.w.as_mut_slice()[i] += eps;
            let mut pm = p.clone();
            pm.w.as_mut_slice()[i] -= eps;
            let num = (loss(&pp, &lo, tgt) - loss(&pm, &lo, tgt)) / (2.0 * eps);
            assert!(close(gw.as_slice()[i], num));
        }
        for t in 0..m {
            for j in 0..d {
                let mut a = lo.clone();
                a[t][j] += eps;
                let mut b = lo.clone();
                b[t][j] -= eps;
                let num = (loss(&p, &a, tgt) - loss(&p, &b, tgt)) / (2.0 * eps);
                assert!(close(dlo[t][j], num), "lo[{t}][{j}]");
            }
        }
        if let Some(de_grad) = de_grad {
            for j in 0..de {
                let mut a = e.clone();
                a[j] += eps;
                let mut b = e.clone();
                b[j] -= eps;
                let num = (loss(&p, &lo, Some(&a)) - loss(&p, &lo, Some(&b))) / (2.0 * eps);
                assert!(close(de_grad[j], num));
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        for seed in 0..5 {
            check_gradients(AttentionVariant::ContextOnly, seed);
            check_gradients(AttentionVariant::TargetAware, seed);
        }
    }

    proptest! {
        #[test]
        fn weights_form_a_distribution(
            seed in 0u64..1000,
            m in 1usize..12,
            target_aware in any::<bool>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let variant = if target_aware { AttentionVariant::TargetAware } else { AttentionVariant::ContextOnly };
            let p = AttentionParams::init(variant, 5, 3, &mut rng);
            let lo = rand_vecs(&mut rng, m, 5);
            let e = [0.3, -0.7, 0.2];
            let w = p.forward(&lo, Some(&e)).weights;
            prop_assert!(w.iter().all(|&a| a > 0.0));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
