use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::matrix::Matrix;

pub const DEFAULT_CLIP_NORM: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OptimizerKind {
    Sgd {
        lr: f64,
    },
    Adam {
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
    },
}

impl OptimizerKind {
    pub fn sgd(lr: f64) -> Self {
        OptimizerKind::Sgd { lr }
    }

    pub fn adam(lr: f64) -> Self {
        OptimizerKind::Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn learning_rate(&self) -> f64 {
        match *self {
            OptimizerKind::Sgd { lr } | OptimizerKind::Adam { lr, .. } => lr,
        }
    }
}

/// A gradient for one parameter tensor. Embedding tables only touch a few
/// rows per batch, so they may be passed as a row map.
#[derive(Debug, Clone, Copy)]
pub enum Grad<'a> {
    Dense(&'a Matrix),
    Rows(&'a BTreeMap<usize, Vec<f64>>),
}

impl Grad<'_> {
    fn values(&self) -> Box<dyn Iterator<Item = f64> + '_> {
        match self {
            Grad::Dense(m) => Box::new(m.as_slice().iter().copied()),
            Grad::Rows(rows) => Box::new(rows.values().flatten().copied()),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum OptimError {
    #[error("non-finite gradient in parameter tensor {tensor}")]
    NonFiniteGradient { tensor: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    /// Global gradient norm before clipping.
    pub grad_norm: f64,
    /// Factor applied to every gradient (1 when not clipped).
    pub scale: f64,
}

/// Global L2 norm over all gradients.
pub fn global_norm(grads: &[Grad<'_>]) -> f64 {
    grads
        .iter()
        .flat_map(|g| g.values())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    clip_norm: Option<f64>,
    steps: u64,
    first: Vec<Matrix>,
    second: Vec<Matrix>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind) -> Self {
        Optimizer {
            kind,
            clip_norm: Some(DEFAULT_CLIP_NORM),
            steps: 0,
            first: Vec::new(),
            second: Vec::new(),
        }
    }

    pub fn with_clip_norm(mut self, clip: Option<f64>) -> Self {
        self.clip_norm = clip;
        self
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Applies one update. `params[i]` is updated with `grads[i]`. Nothing
    /// is modified when any gradient is non-finite.
    pub fn step(
        &mut self,
        params: &mut [&mut Matrix],
        grads: &[Grad<'_>],
    ) -> Result<StepReport, OptimError> {
        assert_eq!(params.len(), grads.len(), "parameter/gradient count");
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            match g {
                Grad::Dense(m) => assert_eq!(m.shape(), p.shape(), "gradient shape for tensor {i}"),
                Grad::Rows(rows) => {
                    for (&r, v) in rows.iter() {
                        assert!(
                            r < p.rows() && v.len() == p.cols(),
                            "row gradient for tensor {i}"
                        );
                    }
                }
            }
            if g.values().any(|v| !v.is_finite()) {
                return Err(OptimError::NonFiniteGradient { tensor: i });
            }
        }
        let grad_norm = global_norm(grads);
        let scale = match self.clip_norm {
            Some(c) if grad_norm > c => c / grad_norm,
            _ => 1.0,
        };
        self.steps += 1;
        match self.kind {
            OptimizerKind::Sgd { lr } => {
                for (p, g) in params.iter_mut().zip(grads) {
                    match g {
                        Grad::Dense(m) => {
                            for (w, d) in p.as_mut_slice().iter_mut().zip(m.as_slice()) {
                                *w -= lr * scale * d;
                            }
                        }
                        Grad::Rows(rows) => {
                            for (&r, d) in rows.iter() {
                                for (w, d) in p.row_mut(r).iter_mut().zip(d) {
                                    *w -= lr * scale * d;
                                }
                            }
                        }
                    }
                }
            }
            OptimizerKind::Adam {
                lr,
                beta1,
                beta2,
                eps,
            } => {
                if self.first.len() != params.len() {
                    self.first = params
                        .iter()
                        .map(|p| Matrix::zeros(p.rows(), p.cols()))
                        .collect();
                    self.second = self.first.clone();
                }
                let t = self.steps as i32;
                let c1 = 1.0 - beta1.powi(t);
                let c2 = 1.0 - beta2.powi(t);
                for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
                    let m = &mut self.first[i];
                    let v = &mut self.second[i];
                    let cols = p.cols();
                    let mut update = |idx: usize, g: f64, w: &mut f64| {
                        let mi = &mut m.as_mut_slice()[idx];
                        *mi = beta1 * *mi + (1.0 - beta1) * g;
                        let vi = &mut v.as_mut_slice()[idx];
                        *vi = beta2 * *vi + (1.0 - beta2) * g * g;
                        let m_hat = *mi / c1;
                        let v_hat = *vi / c2;
                        *w -= lr * m_hat / (v_hat.sqrt() + eps);
                    };
                    match g {
                        Grad::Dense(gm) => {
                            for (idx, (w, d)) in
                                p.as_mut_slice().iter_mut().zip(gm.as_slice()).enumerate()
                            {
                                update(idx, scale * d, w);
                            }
                        }
                        Grad::Rows(rows) => {
                            // moments decay on every row, touched or not
                            let mut it = rows.iter().peekable();
                            for r in 0..p.rows() {
                                let grad_row = match it.peek() {
                                    Some((&gr, _)) if gr == r => it.next().map(|(_, v)| v),
                                    _ => None,
                                };
                                let row = p.row_mut(r);
                                for (c, w) in row.iter_mut().enumerate() {
                                    let d = grad_row.map_or(0.0, |v| v[c]);
                                    update(r * cols + c, scale * d, w);
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(StepReport { grad_norm, scale })
    }
}
