//! Fully Elman recurrent cell.
//!
//! Per step `t`, with every context starting at zero:
//!
//! ```text
//! x_c(t)  = W4 x_c(t-1)  + W5 x(t-1)
//! y_c1(t) = W6 y_c1(t-1) + W7 y(t-1)
//! y_c2(t) = W8 y_c2(t-1) + W9 y(t-1)
//! x(t)    = tanh(x_c(t) + W1 u(t) + y_c1(t) + b1)
//! y(t)    = softmax(W2 x(t) + W3 u(t) + y_c2(t) + b2)
//! ```
//!
//! The classical Elman network and a one-layer perceptron are the same cell
//! with some matrices pinned at zero (see [`HeadKind`]).

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::init::he_normal;
use super::loss::{softmax, weighted_cross_entropy, weighted_cross_entropy_grad_probs};
use crate::error::{Error, Result};

pub const DEFAULT_HIDDEN: usize = 20;
pub const DEFAULT_CLASSES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadKind {
    /// Only `W1`, `W2`, `b1`, `b2`.
    Mlp,
    /// Adds the hidden context `W4`, `W5`.
    Enn,
    /// All nine matrices.
    Fenn,
}

impl HeadKind {
    /// Whether matrix `Wk` (1-based) is trainable for this head.
    pub fn uses(self, k: usize) -> bool {
        match self {
            HeadKind::Fenn => true,
            HeadKind::Enn => matches!(k, 1 | 2 | 4 | 5),
            HeadKind::Mlp => matches!(k, 1 | 2),
        }
    }
}

impl std::str::FromStr for HeadKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mlp" => Ok(HeadKind::Mlp),
            "enn" => Ok(HeadKind::Enn),
            "fenn" => Ok(HeadKind::Fenn),
            other => Err(Error::UnknownId(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FennParameters {
    pub kind: HeadKind,
    pub w1: Array2<f64>,
    pub w2: Array2<f64>,
    pub w3: Array2<f64>,
    pub w4: Array2<f64>,
    pub w5: Array2<f64>,
    pub w6: Array2<f64>,
    pub w7: Array2<f64>,
    pub w8: Array2<f64>,
    pub w9: Array2<f64>,
    pub b1: Array1<f64>,
    pub b2: Array1<f64>,
}

impl FennParameters {
    pub fn zeros(inputs: usize, hidden: usize, classes: usize, kind: HeadKind) -> Self {
        FennParameters {
            kind,
            w1: Array2::zeros((hidden, inputs)),
            w2: Array2::zeros((classes, hidden)),
            w3: Array2::zeros((classes, inputs)),
            w4: Array2::zeros((hidden, hidden)),
            w5: Array2::zeros((hidden, hidden)),
            w6: Array2::zeros((hidden, hidden)),
            w7: Array2::zeros((hidden, classes)),
            w8: Array2::zeros((classes, classes)),
            w9: Array2::zeros((classes, classes)),
            b1: Array1::zeros(hidden),
            b2: Array1::zeros(classes),
        }
    }

    /// He-normal weights (variance `2 / fan_in`) on the feed-forward and
    /// context-input matrices. The self-recurrent context matrices `W4`,
    /// `W6`, `W8` use a quarter of that variance so the linear context
    /// recurrences start contractive. Biases start at zero.
    pub fn he_init<R: Rng + ?Sized>(inputs: usize, hidden: usize, classes: usize, kind: HeadKind, rng: &mut R) -> Self {
        let mut p = Self::zeros(inputs, hidden, classes, kind);
        for k in 1..=9 {
            if !kind.uses(k) {
                continue;
            }
            let scale = if matches!(k, 4 | 6 | 8) { 0.5 } else { 1.0 };
            let m = p.matrix_mut(k);
            let fan_in = m.ncols();
            let values = he_normal(m.len(), fan_in, rng);
            m.iter_mut().zip(values).for_each(|(w, v)| *w = scale * v);
        }
        p
    }

    pub fn inputs(&self) -> usize {
        self.w1.ncols()
    }

    pub fn hidden(&self) -> usize {
        self.w1.nrows()
    }

    pub fn classes(&self) -> usize {
        self.w2.nrows()
    }

    pub fn matrix(&self, k: usize) -> &Array2<f64> {
        match k {
            1 => &self.w1,
            2 => &self.w2,
            3 => &self.w3,
            4 => &self.w4,
            5 => &self.w5,
            6 => &self.w6,
            7 => &self.w7,
            8 => &self.w8,
            9 => &self.w9,
            _ => panic!("no matrix W{k}"),
        }
    }

    pub fn matrix_mut(&mut self, k: usize) -> &mut Array2<f64> {
        match k {
            1 => &mut self.w1,
            2 => &mut self.w2,
            3 => &mut self.w3,
            4 => &mut self.w4,
            5 => &mut self.w5,
            6 => &mut self.w6,
            7 => &mut self.w7,
            8 => &mut self.w8,
            9 => &mut self.w9,
            _ => panic!("no matrix W{k}"),
        }
    }

    /// Trainable tensors in canonical order (`W1..W9` that the head uses,
    /// then `b1`, `b2`).
    pub fn trainable_mut(&mut self) -> Vec<&mut [f64]> {
        let kind = self.kind;
        let FennParameters {
            w1,
            w2,
            w3,
            w4,
            w5,
            w6,
            w7,
            w8,
            w9,
            b1,
            b2,
            ..
        } = self;
        let mats = [w1, w2, w3, w4, w5, w6, w7, w8, w9];
        let mut out: Vec<&mut [f64]> = mats
            .into_iter()
            .enumerate()
            .filter(|(i, _)| kind.uses(i + 1))
            .map(|(_, m)| m.as_slice_mut().expect("standard layout"))
            .collect();
        out.push(b1.as_slice_mut().expect("standard layout"));
        out.push(b2.as_slice_mut().expect("standard layout"));
        out
    }

    pub fn trainable(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = (1..=9)
            .filter(|&k| self.kind.uses(k))
            .map(|k| self.matrix(k).as_slice().expect("standard layout"))
            .collect();
        out.push(self.b1.as_slice().expect("standard layout"));
        out.push(self.b2.as_slice().expect("standard layout"));
        out
    }

    /// All tensors with their names, used for serialization.
    pub fn named_tensors(&self) -> Vec<(String, Vec<usize>, &[f64])> {
        let mut out: Vec<(String, Vec<usize>, &[f64])> = (1..=9)
            .map(|k| {
                let m = self.matrix(k);
                (
                    format!("w{k}"),
                    vec![m.nrows(), m.ncols()],
                    m.as_slice().expect("standard layout"),
                )
            })
            .collect();
        out.push((
            "b1".into(),
            vec![self.b1.len()],
            self.b1.as_slice().expect("standard layout"),
        ));
        out.push((
            "b2".into(),
            vec![self.b2.len()],
            self.b2.as_slice().expect("standard layout"),
        ));
        out
    }

    pub fn named_tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let FennParameters {
            w1,
            w2,
            w3,
            w4,
            w5,
            w6,
            w7,
            w8,
            w9,
            b1,
            b2,
            ..
        } = self;
        [w1, w2, w3, w4, w5, w6, w7, w8, w9]
            .into_iter()
            .map(|m| m.as_slice_mut().expect("standard layout"))
            .chain([
                b1.as_slice_mut().expect("standard layout"),
                b2.as_slice_mut().expect("standard layout"),
            ])
            .collect()
    }

    fn zero_unused(&mut self) {
        for k in 1..=9 {
            if !self.kind.uses(k) {
                self.matrix_mut(k).fill(0.0);
            }
        }
    }
}

/// Recurrent state carried between steps.
#[derive(Debug, Clone, PartialEq)]
pub struct FennState {
    pub x_c: Array1<f64>,
    pub y_c1: Array1<f64>,
    pub y_c2: Array1<f64>,
    pub x_prev: Array1<f64>,
    pub y_prev: Array1<f64>,
}

impl FennState {
    pub fn zeros(hidden: usize, classes: usize) -> Self {
        FennState {
            x_c: Array1::zeros(hidden),
            y_c1: Array1::zeros(hidden),
            y_c2: Array1::zeros(classes),
            x_prev: Array1::zeros(hidden),
            y_prev: Array1::zeros(classes),
        }
    }

    pub fn for_params(params: &FennParameters) -> Self {
        Self::zeros(params.hidden(), params.classes())
    }
}

fn check_finite(v: &Array1<f64>, what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("fenn {what}")))
    }
}

/// One recurrent step; returns the class distribution and the next state.
pub fn fenn_step(
    params: &FennParameters,
    state: &FennState,
    input: ArrayView1<'_, f64>,
) -> Result<(Array1<f64>, FennState)> {
    if input.len() != params.inputs() {
        return Err(Error::DimensionMismatch {
            expected: params.inputs(),
            actual: input.len(),
        });
    }
    let x_c = params.w4.dot(&state.x_c) + params.w5.dot(&state.x_prev);
    let y_c1 = params.w6.dot(&state.y_c1) + params.w7.dot(&state.y_prev);
    let y_c2 = params.w8.dot(&state.y_c2) + params.w9.dot(&state.y_prev);
    let pre_hidden = &x_c + &params.w1.dot(&input) + &y_c1 + &params.b1;
    check_finite(&pre_hidden, "hidden pre-activation")?;
    let x = pre_hidden.mapv(f64::tanh);
    let logits = params.w2.dot(&x) + params.w3.dot(&input) + &y_c2 + &params.b2;
    check_finite(&logits, "output logits")?;
    let y = softmax(logits.view());
    let next = FennState {
        x_c,
        y_c1,
        y_c2,
        x_prev: x,
        y_prev: y.clone(),
    };
    Ok((y, next))
}

/// Forward record of a whole sequence, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct FennTrace {
    pub inputs: Array2<f64>,
    /// `states[t]` is the state after step `t`.
    pub states: Vec<FennState>,
    /// Steps at which every context was reset to zero before computing.
    pub resets: Vec<usize>,
}

impl FennTrace {
    pub fn outputs(&self) -> Vec<Array1<f64>> {
        self.states.iter().map(|s| s.y_prev.clone()).collect()
    }

    pub fn final_output(&self) -> &Array1<f64> {
        &self.states.last().expect("non-empty trace").y_prev
    }
}

/// Folds [`fenn_step`] over the rows of `inputs` (`T x m`) from zero state.
pub fn fenn_sequence_forward(params: &FennParameters, inputs: &Array2<f64>) -> Result<FennTrace> {
    fenn_sequence_forward_with_resets(params, inputs, &[])
}

/// As [`fenn_sequence_forward`], zeroing the state before each step in `resets`.
pub fn fenn_sequence_forward_with_resets(
    params: &FennParameters,
    inputs: &Array2<f64>,
    resets: &[usize],
) -> Result<FennTrace> {
    if inputs.nrows() == 0 {
        return Err(Error::contract("sequence must have at least one step"));
    }
    let zero = FennState::for_params(params);
    let mut states: Vec<FennState> = Vec::with_capacity(inputs.nrows());
    for (t, u) in inputs.outer_iter().enumerate() {
        let prev = if t == 0 || resets.contains(&t) {
            &zero
        } else {
            &states[t - 1]
        };
        let (_, next) = fenn_step(params, prev, u)?;
        states.push(next);
    }
    Ok(FennTrace {
        inputs: inputs.clone(),
        states,
        resets: resets.to_vec(),
    })
}

fn outer_add(acc: &mut Array2<f64>, left: &Array1<f64>, right: ArrayView1<'_, f64>) {
    for (i, &l) in left.iter().enumerate() {
        if l == 0.0 {
            continue;
        }
        let mut row = acc.row_mut(i);
        row.scaled_add(l, &right);
    }
}

/// Exact backpropagation through time.
///
/// `output_grads[t]` is dL/dy(t) for each step (zeros where no loss is
/// attached). Returns parameter gradients (matrices unused by the head are
/// zero) and dL/du for every input row.
pub fn fenn_backward(
    params: &FennParameters,
    trace: &FennTrace,
    output_grads: &[Array1<f64>],
) -> Result<(FennParameters, Array2<f64>)> {
    let steps = trace.states.len();
    if output_grads.len() != steps {
        return Err(Error::DimensionMismatch {
            expected: steps,
            actual: output_grads.len(),
        });
    }
    let (h, k) = (params.hidden(), params.classes());
    let mut g = FennParameters::zeros(params.inputs(), h, k, params.kind);
    let mut grad_inputs = Array2::<f64>::zeros(trace.inputs.dim());
    let zero = FennState::zeros(h, k);

    let mut carry_xc = Array1::<f64>::zeros(h);
    let mut carry_x = Array1::<f64>::zeros(h);
    let mut carry_yc1 = Array1::<f64>::zeros(h);
    let mut carry_y = Array1::<f64>::zeros(k);
    let mut carry_yc2 = Array1::<f64>::zeros(k);

    for t in (0..steps).rev() {
        let cur = &trace.states[t];
        let reset_here = t == 0 || trace.resets.contains(&t);
        let prev = if reset_here { &zero } else { &trace.states[t - 1] };
        let u = trace.inputs.row(t);
        let (x, y) = (&cur.x_prev, &cur.y_prev);

        let gy = &output_grads[t] + &carry_y;
        let dot = y.dot(&gy);
        let gz = y * &(gy - dot);
        outer_add(&mut g.w2, &gz, x.view());
        outer_add(&mut g.w3, &gz, u);
        g.b2 += &gz;
        let g_yc2 = &gz + &carry_yc2;

        let gx = params.w2.t().dot(&gz) + &carry_x;
        let ga = gx * &x.mapv(|v| 1.0 - v * v);
        outer_add(&mut g.w1, &ga, u);
        g.b1 += &ga;
        let g_xc = &ga + &carry_xc;
        let g_yc1 = &ga + &carry_yc1;

        let gu = params.w1.t().dot(&ga) + params.w3.t().dot(&gz);
        grad_inputs.row_mut(t).assign(&gu);

        outer_add(&mut g.w4, &g_xc, prev.x_c.view());
        outer_add(&mut g.w5, &g_xc, prev.x_prev.view());
        outer_add(&mut g.w6, &g_yc1, prev.y_c1.view());
        outer_add(&mut g.w7, &g_yc1, prev.y_prev.view());
        outer_add(&mut g.w8, &g_yc2, prev.y_c2.view());
        outer_add(&mut g.w9, &g_yc2, prev.y_prev.view());

        if reset_here {
            carry_xc.fill(0.0);
            carry_x.fill(0.0);
            carry_yc1.fill(0.0);
            carry_y.fill(0.0);
            carry_yc2.fill(0.0);
        } else {
            carry_xc = params.w4.t().dot(&g_xc);
            carry_x = params.w5.t().dot(&g_xc);
            carry_yc1 = params.w6.t().dot(&g_yc1);
            carry_y = params.w7.t().dot(&g_yc1) + params.w9.t().dot(&g_yc2);
            carry_yc2 = params.w8.t().dot(&g_yc2);
        }
    }
    g.zero_unused();
    Ok((g, grad_inputs))
}

/// Weighted cross-entropy on the final step and its gradients.
pub fn fenn_loss_and_gradients(
    params: &FennParameters,
    inputs: &Array2<f64>,
    target: usize,
    class_weights: &[f64],
) -> Result<(f64, FennParameters, Array2<f64>)> {
    let trace = fenn_sequence_forward(params, inputs)?;
    let k = params.classes();
    if target >= k || class_weights.len() != k {
        return Err(Error::contract("target or class weights do not match the class count"));
    }
    let mut onehot = vec![0.0; k];
    onehot[target] = 1.0;
    let p = trace.final_output();
    let loss = weighted_cross_entropy(p.as_slice().expect("contiguous"), &onehot, class_weights);
    let mut grads = vec![Array1::zeros(k); trace.states.len()];
    *grads.last_mut().expect("non-empty") = Array1::from(weighted_cross_entropy_grad_probs(
        p.as_slice().expect("contiguous"),
        &onehot,
        class_weights,
    ));
    let (g, gu) = fenn_backward(params, &trace, &grads)?;
    Ok((loss, g, gu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use ndarray::array;

    #[test]
    fn zero_network_is_uniform() {
        let p = FennParameters::zeros(3, 4, 2, HeadKind::Fenn);
        let s = FennState::for_params(&p);
        let (y, next) = fenn_step(&p, &s, array![0.3, -1.0, 2.0].view()).unwrap();
        assert_eq!(y, array![0.5, 0.5]);
        assert!(next.x_prev.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scalar_hand_trace() {
        let mut p = FennParameters::zeros(1, 1, 2, HeadKind::Fenn);
        for k in 1..=9 {
            p.matrix_mut(k).fill(1.0);
        }
        let s = FennState::for_params(&p);
        let (y, next) = fenn_step(&p, &s, array![1.0].view()).unwrap();
        assert!((next.x_prev[0] - 1f64.tanh()).abs() < 1e-15);
        assert!((next.x_prev[0] - 0.761_594).abs() < 1e-6);
        assert_eq!(y, array![0.5, 0.5]);
    }

    #[test]
    fn state_changes_the_second_output() {
        let mut r = rng::stream(4);
        let mut p = FennParameters::zeros(2, 3, 2, HeadKind::Fenn);
        for k in [1, 2, 5, 7, 9] {
            let m = p.matrix_mut(k);
            let vals = he_normal(m.len(), m.ncols(), &mut r);
            m.iter_mut().zip(vals).for_each(|(w, v)| *w = v);
        }
        let u = array![[0.4, -0.7], [0.4, -0.7]];
        let trace = fenn_sequence_forward(&p, &u).unwrap();
        let out = trace.outputs();
        assert!((&out[0] - &out[1]).iter().any(|d| d.abs() > 1e-6));
    }

    #[test]
    fn single_step_sequence_equals_step() {
        let p = FennParameters::he_init(3, 5, 2, HeadKind::Fenn, &mut rng::stream(1));
        let u = array![[0.1, 0.2, -0.3]];
        let trace = fenn_sequence_forward(&p, &u).unwrap();
        let (y, _) = fenn_step(&p, &FennState::for_params(&p), u.row(0)).unwrap();
        assert_eq!(trace.final_output(), &y);
    }

    #[test]
    fn empty_sequence_rejected() {
        let p = FennParameters::zeros(2, 2, 2, HeadKind::Fenn);
        assert!(fenn_sequence_forward(&p, &Array2::zeros((0, 2))).is_err());
    }

    #[test]
    fn heads_pin_their_unused_matrices() {
        let p = FennParameters::he_init(3, 4, 2, HeadKind::Enn, &mut rng::stream(0));
        for k in [3, 6, 7, 8, 9] {
            assert!(p.matrix(k).iter().all(|&v| v == 0.0));
        }
        assert!(p.w4.iter().any(|&v| v != 0.0));
        let m = FennParameters::he_init(3, 4, 2, HeadKind::Mlp, &mut rng::stream(0));
        assert_eq!(m.trainable().len(), 4);
        assert!(m.w5.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn saturated_correct_output_has_vanishing_gradient() {
        let mut p = FennParameters::he_init(2, 3, 2, HeadKind::Fenn, &mut rng::stream(3));
        p.b2 = array![60.0, -60.0];
        let u = array![[0.1, 0.2], [0.3, -0.1]];
        let (loss, g, _) = fenn_loss_and_gradients(&p, &u, 0, &[0.5, 0.5]).unwrap();
        assert!(loss < 1e-20);
        for t in g.trainable() {
            assert!(t.iter().all(|v| v.abs() < 1e-20));
        }
    }

    #[test]
    fn non_finite_input_is_reported() {
        let p = FennParameters::he_init(2, 3, 2, HeadKind::Fenn, &mut rng::stream(3));
        let s = FennState::for_params(&p);
        let err = fenn_step(&p, &s, array![f64::NAN, 0.0].view()).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
    }
}
