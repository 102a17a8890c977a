use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ConfigError, ModelConfig};
use crate::datagen::TrainingExample;
use crate::neural::{
    cross_entropy, logits_gradient, AttentionParams, AttentionTrace, AttentionVariant, Grad,
    GruParams, GruTrace, Matrix, MlpParams, MlpTrace,
};

pub const EMBEDDING_INIT: f64 = 0.05;

/// Split-context classifier: a left GRU reads BOS and the left context, a
/// right GRU reads EOS and the right context backwards, each side is
/// summarized by attention, and an MLP maps both summaries to classes.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub vocab_fingerprint: u64,
    pub embeddings: Matrix,
    pub left_gru: GruParams,
    pub right_gru: GruParams,
    pub left_attention: AttentionParams,
    pub right_attention: AttentionParams,
    pub mlp: MlpParams,
}

/// Gradients with the model's layout. Embedding gradients are kept per
/// touched row.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrads {
    pub embeddings: BTreeMap<usize, Vec<f64>>,
    pub left_gru: GruParams,
    pub right_gru: GruParams,
    pub left_attention: Matrix,
    pub right_attention: Matrix,
    pub mlp: MlpParams,
}

struct Side {
    ids: Vec<usize>,
    inputs: Vec<Vec<f64>>,
    gru: GruTrace,
    attention: AttentionTrace,
}

pub(crate) struct ForwardCache {
    left: Side,
    right: Side,
    target_id: usize,
    target: Option<Vec<f64>>,
    mlp: MlpTrace,
}

impl ForwardCache {
    pub(crate) fn probs(&self) -> &[f64] {
        &self.mlp.probs
    }
}

impl Model {
    /// Fresh model with seeded random initialization.
    pub fn new(
        config: ModelConfig,
        vocab_size: usize,
        vocab_fingerprint: u64,
    ) -> Result<Self, ConfigError> {
        config.validate()?;
        if vocab_size == 0 {
            return Err(ConfigError::Zero("vocab_size"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let (e, h) = (config.embedding_dim, config.gru_hidden);
        let embeddings = Matrix::uniform(vocab_size, e, EMBEDDING_INIT, &mut rng);
        let left_gru = GruParams::init(e, h, &mut rng);
        let right_gru = GruParams::init(e, h, &mut rng);
        let left_attention = AttentionParams::init(config.attention, h, e, &mut rng);
        let right_attention = AttentionParams::init(config.attention, h, e, &mut rng);
        let mlp = MlpParams::init(
            2 * config.state_size(),
            config.mlp_hidden,
            config.classes(),
            &mut rng,
        );
        Ok(Model {
            config,
            vocab_fingerprint,
            embeddings,
            left_gru,
            right_gru,
            left_attention,
            right_attention,
            mlp,
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.embeddings.rows()
    }

    /// Every parameter tensor with a stable name, in a fixed order.
    pub fn named_tensors(&self) -> Vec<(String, &Matrix)> {
        let mut out = vec![("embeddings".to_string(), &self.embeddings)];
        for (prefix, g) in [("left_gru", &self.left_gru), ("right_gru", &self.right_gru)] {
            out.extend(
                g.tensors()
                    .into_iter()
                    .map(|(n, m)| (format!("{prefix}.{n}"), m)),
            );
        }
        out.push(("left_attention.w".into(), &self.left_attention.w));
        out.push(("right_attention.w".into(), &self.right_attention.w));
        out.extend(
            self.mlp
                .tensors()
                .into_iter()
                .map(|(n, m)| (format!("mlp.{n}"), m)),
        );
        out
    }

    /// Mutable counterpart of [`Model::named_tensors`], same order.
    pub fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out = vec![&mut self.embeddings];
        out.extend(self.left_gru.tensors_mut().into_iter().map(|(_, m)| m));
        out.extend(self.right_gru.tensors_mut().into_iter().map(|(_, m)| m));
        out.push(&mut self.left_attention.w);
        out.push(&mut self.right_attention.w);
        out.extend(self.mlp.tensors_mut().into_iter().map(|(_, m)| m));
        out
    }

    pub fn is_finite(&self) -> bool {
        self.named_tensors().iter().all(|(_, m)| m.is_finite())
    }

    fn embed(&self, ids: &[usize]) -> Vec<Vec<f64>> {
        ids.iter()
            .map(|&i| self.embeddings.row(i).to_vec())
            .collect()
    }

    fn run_side(
        &self,
        ids: Vec<usize>,
        gru: &GruParams,
        attn: &AttentionParams,
        target: Option<&[f64]>,
    ) -> Side {
        let inputs = self.embed(&ids);
        let trace = gru.forward(&inputs, &vec![0.0; gru.hidden_size()]);
        let attention = attn.forward(&trace.outputs, target);
        Side {
            ids,
            inputs,
            gru: trace,
            attention,
        }
    }

    pub(crate) fn forward_cached(&self, ex: &TrainingExample) -> ForwardCache {
        assert_eq!(
            ex.error_type, self.config.error_type,
            "example for another error type"
        );
        assert!(
            !ex.left_ids.is_empty() && !ex.right_ids.is_empty(),
            "empty context"
        );
        let v = self.vocab_size();
        let check = |id: u32| {
            assert!((id as usize) < v, "token id {id} outside vocabulary of {v}");
            id as usize
        };
        let left_ids: Vec<usize> = ex.left_ids.iter().map(|&i| check(i)).collect();
        // right context is read from the sentence end towards the target
        let right_ids: Vec<usize> = ex.right_ids.iter().rev().map(|&i| check(i)).collect();
        let target_id = check(ex.target_base_id);
        let target = (self.config.attention == AttentionVariant::TargetAware)
            .then(|| self.embeddings.row(target_id).to_vec());

        let left = self.run_side(
            left_ids,
            &self.left_gru,
            &self.left_attention,
            target.as_deref(),
        );
        let right = self.run_side(
            right_ids,
            &self.right_gru,
            &self.right_attention,
            target.as_deref(),
        );
        let mut state = left.attention.state.clone();
        state.extend_from_slice(&right.attention.state);
        let mlp = self.mlp.forward(&state);
        ForwardCache {
            left,
            right,
            target_id,
            target,
            mlp,
        }
    }

    /// Class probabilities for one example.
    pub fn forward(&self, ex: &TrainingExample) -> Vec<f64> {
        self.forward_cached(ex).mlp.probs
    }

    /// Accumulates `scale` × ∂CE/∂θ for one example into `grads`; returns
    /// the example's unscaled loss.
    pub(crate) fn backward(
        &self,
        ex: &TrainingExample,
        cache: &ForwardCache,
        scale: f64,
        grads: &mut ModelGrads,
    ) -> f64 {
        let probs = &cache.mlp.probs;
        let loss = cross_entropy(probs, ex.label).loss;
        let d_logits: Vec<f64> = logits_gradient(probs, ex.label)
            .into_iter()
            .map(|g| g * scale)
            .collect();
        let d_state = self.mlp.backward(&cache.mlp, &d_logits, &mut grads.mlp);
        let split = self.left_attention.state_size();
        let mut d_target = vec![0.0; self.config.embedding_dim];
        let ModelGrads {
            embeddings,
            left_gru,
            right_gru,
            left_attention,
            right_attention,
            ..
        } = grads;
        for (side, gru, attn, g_gru, g_attn, d_side) in [
            (
                &cache.left,
                &self.left_gru,
                &self.left_attention,
                left_gru,
                left_attention,
                &d_state[..split],
            ),
            (
                &cache.right,
                &self.right_gru,
                &self.right_attention,
                right_gru,
                right_attention,
                &d_state[split..],
            ),
        ] {
            let (d_out, d_e) = attn.backward(
                &side.gru.outputs,
                cache.target.as_deref(),
                &side.attention,
                d_side,
                g_attn,
            );
            if let Some(d_e) = d_e {
                crate::neural::matrix::add_assign(&mut d_target, &d_e);
            }
            let (d_inputs, _) = gru.backward(&side.gru, &d_out, g_gru);
            debug_assert_eq!(d_inputs.len(), side.inputs.len());
            for (&id, d) in side.ids.iter().zip(&d_inputs) {
                add_row(embeddings, id, d);
            }
        }
        if cache.target.is_some() {
            add_row(embeddings, cache.target_id, &d_target);
        }
        loss
    }

    /// Mean cross-entropy and its gradient over `batch`.
    pub fn gradients(&self, batch: &[TrainingExample]) -> (f64, ModelGrads) {
        let mut grads = ModelGrads::zeros_like(self);
        let scale = 1.0 / batch.len().max(1) as f64;
        let mut total = 0.0;
        for ex in batch {
            let cache = self.forward_cached(ex);
            total += self.backward(ex, &cache, scale, &mut grads);
        }
        (total * scale, grads)
    }

    /// Mean cross-entropy over `examples` (0 for an empty slice).
    pub fn mean_loss(&self, examples: &[TrainingExample]) -> f64 {
        if examples.is_empty() {
            return 0.0;
        }
        examples
            .iter()
            .map(|ex| cross_entropy(&self.forward(ex), ex.label).loss)
            .sum::<f64>()
            / examples.len() as f64
    }
}

fn add_row(rows: &mut BTreeMap<usize, Vec<f64>>, id: usize, d: &[f64]) {
    let row = rows.entry(id).or_insert_with(|| vec![0.0; d.len()]);
    crate::neural::matrix::add_assign(row, d);
}

/// Highest-probability class; ties go to the lowest index.
pub fn argmax(probs: &[f64]) -> (usize, f64) {
    let mut best = (0, probs[0]);
    for (i, &p) in probs.iter().enumerate().skip(1) {
        if p > best.1 {
            best = (i, p);
        }
    }
    best
}

impl ModelGrads {
    pub fn zeros_like(model: &Model) -> Self {
        let (e, h) = (model.config.embedding_dim, model.config.gru_hidden);
        ModelGrads {
            embeddings: BTreeMap::new(),
            left_gru: GruParams::zeros(e, h),
            right_gru: GruParams::zeros(e, h),
            left_attention: Matrix::zeros(
                model.left_attention.w.rows(),
                model.left_attention.w.cols(),
            ),
            right_attention: Matrix::zeros(
                model.right_attention.w.rows(),
                model.right_attention.w.cols(),
            ),
            mlp: MlpParams::zeros(
                model.mlp.input_size(),
                model.config.mlp_hidden,
                model.mlp.classes(),
            ),
        }
    }

    /// Adds `other` into `self`.
    pub fn merge(&mut self, other: &ModelGrads) {
        for (&id, row) in &other.embeddings {
            add_row(&mut self.embeddings, id, row);
        }
        let pairs = self
            .left_gru
            .tensors_mut()
            .into_iter()
            .zip(other.left_gru.tensors())
            .chain(
                self.right_gru
                    .tensors_mut()
                    .into_iter()
                    .zip(other.right_gru.tensors()),
            )
            .chain(self.mlp.tensors_mut().into_iter().zip(other.mlp.tensors()))
            .map(|((_, a), (_, b))| (a, b))
            .chain([
                (&mut self.left_attention, &other.left_attention),
                (&mut self.right_attention, &other.right_attention),
            ]);
        for (a, b) in pairs {
            crate::neural::matrix::add_assign(a.as_mut_slice(), b.as_slice());
        }
    }

    /// Gradients in [`Model::tensors_mut`] order, ready for the optimizer.
    pub fn as_grads(&self) -> Vec<Grad<'_>> {
        let mut out = vec![Grad::Rows(&self.embeddings)];
        out.extend(
            self.left_gru
                .tensors()
                .into_iter()
                .map(|(_, m)| Grad::Dense(m)),
        );
        out.extend(
            self.right_gru
                .tensors()
                .into_iter()
                .map(|(_, m)| Grad::Dense(m)),
        );
        out.push(Grad::Dense(&self.left_attention));
        out.push(Grad::Dense(&self.right_attention));
        out.extend(self.mlp.tensors().into_iter().map(|(_, m)| Grad::Dense(m)));
        out
    }

    /// Dense copies in [`Model::named_tensors`] order.
    pub fn to_dense(&self, model: &Model) -> Vec<Matrix> {
        let mut emb = Matrix::zeros(model.embeddings.rows(), model.embeddings.cols());
        for (&id, row) in &self.embeddings {
            emb.row_mut(id).copy_from_slice(row);
        }
        let mut out = vec![emb];
        for g in self.as_grads().into_iter().skip(1) {
            if let Grad::Dense(m) = g {
                out.push(m.clone());
            }
        }
        out
    }
}
