//! Dense f64 numerics for the classifier: GRU, bilinear attention, MLP head,
//! cross-entropy and optimizers, all with hand-written gradients.

pub mod attention;
pub mod gru;
pub mod loss;
pub mod matrix;
pub mod mlp;
pub mod optim;

pub use attention::{AttentionParams, AttentionTrace, AttentionVariant};
pub use gru::{GruParams, GruTrace};
pub use loss::{cross_entropy, logits_gradient, mean_loss, CrossEntropy, PROB_FLOOR};
pub use matrix::{softmax, Matrix};
pub use mlp::{MlpParams, MlpTrace};
pub use optim::{
    global_norm, Grad, OptimError, Optimizer, OptimizerKind, StepReport, DEFAULT_CLIP_NORM,
};
