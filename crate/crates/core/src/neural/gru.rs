use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{sigmoid, Matrix};

/// Single-layer GRU:
///
/// ```text
/// z = σ(W_z x + U_z h + b_z)
/// r = σ(W_r x + U_r h + b_r)
/// c = tanh(W_h x + U_h (r ⊙ h) + b_h)
/// h' = (1 − z) ⊙ h + z ⊙ c
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GruParams {
    pub w_z: Matrix,
    pub w_r: Matrix,
    pub w_h: Matrix,
    pub u_z: Matrix,
    pub u_r: Matrix,
    pub u_h: Matrix,
    pub b_z: Matrix,
    pub b_r: Matrix,
    pub b_h: Matrix,
}

/// Per-step intermediates kept for the backward pass.
#[derive(Debug, Clone)]
struct Step {
    h_prev: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
    cand: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GruTrace {
    inputs: Vec<Vec<f64>>,
    steps: Vec<Step>,
    pub outputs: Vec<Vec<f64>>,
}

impl GruParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        GruParams {
            w_z: Matrix::zeros(hidden, input),
            w_r: Matrix::zeros(hidden, input),
            w_h: Matrix::zeros(hidden, input),
            u_z: Matrix::zeros(hidden, hidden),
            u_r: Matrix::zeros(hidden, hidden),
            u_h: Matrix::zeros(hidden, hidden),
            b_z: Matrix::zeros(hidden, 1),
            b_r: Matrix::zeros(hidden, 1),
            b_h: Matrix::zeros(hidden, 1),
        }
    }

    pub fn init<R: Rng + ?Sized>(input: usize, hidden: usize, rng: &mut R) -> Self {
        GruParams {
            w_z: Matrix::glorot(hidden, input, rng),
            w_r: Matrix::glorot(hidden, input, rng),
            w_h: Matrix::glorot(hidden, input, rng),
            u_z: Matrix::glorot(hidden, hidden, rng),
            u_r: Matrix::glorot(hidden, hidden, rng),
            u_h: Matrix::glorot(hidden, hidden, rng),
            b_z: Matrix::zeros(hidden, 1),
            b_r: Matrix::zeros(hidden, 1),
            b_h: Matrix::zeros(hidden, 1),
        }
    }

    pub fn input_size(&self) -> usize {
        self.w_z.cols()
    }

    pub fn hidden_size(&self) -> usize {
        self.w_z.rows()
    }

    pub fn tensors(&self) -> [(&'static str, &Matrix); 9] {
        [
            ("w_z", &self.w_z),
            ("w_r", &self.w_r),
            ("w_h", &self.w_h),
            ("u_z", &self.u_z),
            ("u_r", &self.u_r),
            ("u_h", &self.u_h),
            ("b_z", &self.b_z),
            ("b_r", &self.b_r),
            ("b_h", &self.b_h),
        ]
    }

    pub fn tensors_mut(&mut self) -> [(&'static str, &mut Matrix); 9] {
        [
            ("w_z", &mut self.w_z),
            ("w_r", &mut self.w_r),
            ("w_h", &mut self.w_h),
            ("u_z", &mut self.u_z),
            ("u_r", &mut self.u_r),
            ("u_h", &mut self.u_h),
            ("b_z", &mut self.b_z),
            ("b_r", &mut self.b_r),
            ("b_h", &mut self.b_h),
        ]
    }

    /// One recurrence step; returns the new hidden state and the step cache.
    fn step(&self, x: &[f64], h: &[f64]) -> (Vec<f64>, Step) {
        let d = self.hidden_size();
        let mut az = self.b_z.as_slice().to_vec();
        self.w_z.matvec_acc(x, &mut az);
        self.u_z.matvec_acc(h, &mut az);
        let mut ar = self.b_r.as_slice().to_vec();
        self.w_r.matvec_acc(x, &mut ar);
        self.u_r.matvec_acc(h, &mut ar);
        let z: Vec<f64> = az.into_iter().map(sigmoid).collect();
        let r: Vec<f64> = ar.into_iter().map(sigmoid).collect();
        let rh: Vec<f64> = r.iter().zip(h).map(|(a, b)| a * b).collect();
        let mut ac = self.b_h.as_slice().to_vec();
        self.w_h.matvec_acc(x, &mut ac);
        self.u_h.matvec_acc(&rh, &mut ac);
        let cand: Vec<f64> = ac.into_iter().map(f64::tanh).collect();
        let h_new: Vec<f64> = (0..d)
            .map(|k| (1.0 - z[k]) * h[k] + z[k] * cand[k])
            .collect();
        let step = Step {
            h_prev: h.to_vec(),
            z,
            r,
            cand,
        };
        (h_new, step)
    }

    /// Runs the recurrence over `inputs` from `h0`, returning every hidden
    /// state plus the cache needed by [`GruParams::backward`].
    pub fn forward(&self, inputs: &[Vec<f64>], h0: &[f64]) -> GruTrace {
        assert_eq!(h0.len(), self.hidden_size(), "h0 extent");
        let mut h = h0.to_vec();
        let mut steps = Vec::with_capacity(inputs.len());
        let mut outputs = Vec::with_capacity(inputs.len());
        for x in inputs {
            assert_eq!(x.len(), self.input_size(), "GRU input extent");
            let (h_new, step) = self.step(x, &h);
            steps.push(step);
            outputs.push(h_new.clone());
            h = h_new;
        }
        GruTrace {
            inputs: inputs.to_vec(),
            steps,
            outputs,
        }
    }

    /// Backpropagation through time. `d_outputs[t]` is ∂L/∂h_t from
    /// downstream; gradients are accumulated into `grads`. Returns
    /// (∂L/∂inputs, ∂L/∂h0).
    pub fn backward(
        &self,
        trace: &GruTrace,
        d_outputs: &[Vec<f64>],
        grads: &mut GruParams,
    ) -> (Vec<Vec<f64>>, Vec<f64>) {
        assert_eq!(
            d_outputs.len(),
            trace.steps.len(),
            "stale or mismatched GRU trace"
        );
        let d = self.hidden_size();
        let mut d_inputs = vec![vec![0.0; self.input_size()]; trace.steps.len()];
        let mut dh_next = vec![0.0; d];
        for t in (0..trace.steps.len()).rev() {
            let s = &trace.steps[t];
            let x = &trace.inputs[t];
            let dh: Vec<f64> = (0..d).map(|k| d_outputs[t][k] + dh_next[k]).collect();

            let mut dh_prev: Vec<f64> = (0..d).map(|k| dh[k] * (1.0 - s.z[k])).collect();
            let da_z: Vec<f64> = (0..d)
                .map(|k| dh[k] * (s.cand[k] - s.h_prev[k]) * s.z[k] * (1.0 - s.z[k]))
                .collect();
            let da_c: Vec<f64> = (0..d)
                .map(|k| dh[k] * s.z[k] * (1.0 - s.cand[k] * s.cand[k]))
                .collect();

            let rh: Vec<f64> = (0..d).map(|k| s.r[k] * s.h_prev[k]).collect();
            grads.w_h.add_outer(1.0, &da_c, x);
            grads.u_h.add_outer(1.0, &da_c, &rh);
            super::matrix::add_assign(grads.b_h.as_mut_slice(), &da_c);
            let mut d_rh = vec![0.0; d];
            self.u_h.matvec_t_acc(&da_c, &mut d_rh);
            let da_r: Vec<f64> = (0..d)
                .map(|k| d_rh[k] * s.h_prev[k] * s.r[k] * (1.0 - s.r[k]))
                .collect();
            for k in 0..d {
                dh_prev[k] += d_rh[k] * s.r[k];
            }

            grads.w_z.add_outer(1.0, &da_z, x);
            grads.u_z.add_outer(1.0, &da_z, &s.h_prev);
            super::matrix::add_assign(grads.b_z.as_mut_slice(), &da_z);
            grads.w_r.add_outer(1.0, &da_r, x);
            grads.u_r.add_outer(1.0, &da_r, &s.h_prev);
            super::matrix::add_assign(grads.b_r.as_mut_slice(), &da_r);

            self.u_z.matvec_t_acc(&da_z, &mut dh_prev);
            self.u_r.matvec_t_acc(&da_r, &mut dh_prev);

            let dx = &mut d_inputs[t];
            self.w_z.matvec_t_acc(&da_z, dx);
            self.w_r.matvec_t_acc(&da_r, dx);
            self.w_h.matvec_t_acc(&da_c, dx);

            dh_next = dh_prev;
        }
        (d_inputs, dh_next)
    }
}
