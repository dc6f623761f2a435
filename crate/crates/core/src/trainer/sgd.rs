//! Negative-sampling updates shared by the public single-step API and the
//! training loop.

use std::marker::PhantomData;

use rand::Rng;

use super::model::{output_index, Matrix};
use super::ModelKind;
use crate::vocab::NegativeTable;

const SIGMOID_CLAMP: f32 = 30.0;

/// Logistic function with its input clamped to `[-30, 30]`.
#[inline]
pub fn sigmoid(x: f32) -> f32 {
    let x = x.clamp(-SIGMOID_CLAMP, SIGMOID_CLAMP);
    1.0 / (1.0 + (-x).exp())
}

/// `-ln σ(x)` with the same clamp as [`sigmoid`].
#[inline]
pub fn neg_log_sigmoid(x: f32) -> f64 {
    let x = x.clamp(-SIGMOID_CLAMP, SIGMOID_CLAMP) as f64;
    (-x).exp().ln_1p()
}

#[inline]
pub(crate) fn dot(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0f32; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut sum: f32 = acc.iter().sum();
    for (x, y) in ra.iter().zip(rb) {
        sum += x * y;
    }
    sum
}

/// `y += a * x`
#[inline]
pub(crate) fn axpy(a: f32, x: &[f32], y: &mut [f32]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Raw view of a parameter matrix that hands out mutable rows.
///
/// Single-threaded callers build it from `&mut Matrix` and never hold two
/// rows of the same matrix at once. Multi-worker training shares it across
/// threads and accepts racy, lost updates (Hogwild-style SGD).
#[derive(Clone, Copy)]
pub(crate) struct Rows<'a> {
    ptr: *mut f32,
    rows: usize,
    cols: usize,
    _marker: PhantomData<&'a mut Matrix>,
}

unsafe impl Send for Rows<'_> {}
unsafe impl Sync for Rows<'_> {}

impl<'a> Rows<'a> {
    pub(crate) fn new(matrix: &'a mut Matrix) -> Self {
        Rows {
            rows: matrix.rows(),
            cols: matrix.cols(),
            ptr: matrix.as_mut_slice().as_mut_ptr(),
            _marker: PhantomData,
        }
    }

    /// # Safety
    ///
    /// The caller must not hold another reference to the same row.
    #[inline]
    #[allow(clippy::mut_from_ref)]
    pub(crate) unsafe fn row(&self, i: usize) -> &'a mut [f32] {
        assert!(i < self.rows, "row {i} out of range");
        std::slice::from_raw_parts_mut(self.ptr.add(i * self.cols), self.cols)
    }
}

/// Positive target followed by sampled negatives, each with its label.
pub(crate) fn draw_targets<R: Rng + ?Sized>(
    table: &NegativeTable,
    positive: usize,
    negatives: usize,
    rng: &mut R,
    targets: &mut Vec<(usize, f32)>,
) {
    targets.clear();
    targets.push((positive, 1.0));
    for _ in 0..negatives {
        let mut draw = table.sample(rng);
        if draw == positive {
            draw = table.sample(rng);
            if draw == positive {
                continue;
            }
        }
        targets.push((draw, 0.0));
    }
}

/// One negative-sampling gradient step for hidden vector `hidden` against
/// `targets` in `output`.
///
/// Loss is `-ln σ(h·u⁺) - Σ ln σ(-h·u⁻)`, evaluated before any update. The
/// gradient with respect to `hidden` (scaled by `-alpha`) is accumulated into
/// `hidden_grad`; output rows are updated in place. All terms use the
/// parameters as they were on entry, so repeated targets sum their
/// gradients.
///
/// # Safety
///
/// `hidden` must not alias any row of `output`.
pub(crate) unsafe fn ns_update(
    hidden: &[f32],
    output: Rows<'_>,
    targets: &[(usize, f32)],
    alpha: f32,
    hidden_grad: &mut [f32],
    scales: &mut Vec<f32>,
) -> f64 {
    let mut loss = 0.0;
    scales.clear();
    for &(target, label) in targets {
        let u = output.row(target);
        let f = dot(hidden, u);
        loss += if label > 0.0 {
            neg_log_sigmoid(f)
        } else {
            neg_log_sigmoid(-f)
        };
        let g = (label - sigmoid(f)) * alpha;
        axpy(g, u, hidden_grad);
        scales.push(g);
    }
    for (&(target, _), &g) in targets.iter().zip(scales.iter()) {
        axpy(g, hidden, output.row(target));
    }
    loss
}

/// Scratch space reused across updates.
#[derive(Default)]
pub(crate) struct Scratch {
    pub targets: Vec<(usize, f32)>,
    pub scales: Vec<f32>,
    pub hidden: Vec<f32>,
    pub grad: Vec<f32>,
}

impl Scratch {
    pub(crate) fn new(dim: usize) -> Self {
        Scratch {
            targets: Vec::new(),
            scales: Vec::new(),
            hidden: vec![0.0; dim],
            grad: vec![0.0; dim],
        }
    }
}

/// Parameter views for one training step.
#[derive(Clone, Copy)]
pub(crate) struct Params<'a, 'b> {
    pub kind: ModelKind,
    pub window: usize,
    pub negatives: usize,
    pub input: Rows<'a>,
    pub outputs: &'b [Rows<'a>],
}

impl Params<'_, '_> {
    /// Skip-gram pair: the center's input vector predicts the context's
    /// output vector in the matrix selected by `offset`.
    ///
    /// # Safety
    ///
    /// See [`Rows`].
    pub(crate) unsafe fn train_pair<R: Rng + ?Sized>(
        &self,
        table: &NegativeTable,
        center: usize,
        context: usize,
        offset: isize,
        alpha: f32,
        rng: &mut R,
        scratch: &mut Scratch,
    ) -> f64 {
        let output = self.outputs[output_index(self.kind, self.window, offset)];
        draw_targets(table, context, self.negatives, rng, &mut scratch.targets);
        let hidden = self.input.row(center);
        scratch.grad.iter_mut().for_each(|g| *g = 0.0);
        let loss = ns_update(
            hidden,
            output,
            &scratch.targets,
            alpha,
            &mut scratch.grad,
            &mut scratch.scales,
        );
        axpy(1.0, &scratch.grad, hidden);
        loss
    }

    /// CBOW step: the mean of the context input vectors predicts the center.
    /// The hidden-vector gradient is added to every context input vector.
    ///
    /// # Safety
    ///
    /// See [`Rows`].
    #[allow(clippy::too_many_arguments)]
    pub(crate) unsafe fn train_cbow<R: Rng + ?Sized>(
        &self,
        table: &NegativeTable,
        sentence: &[usize],
        center_pos: usize,
        window: usize,
        alpha: f32,
        rng: &mut R,
        scratch: &mut Scratch,
    ) -> Option<f64> {
        let lo = center_pos.saturating_sub(window);
        let hi = (center_pos + window).min(sentence.len() - 1);
        let context = (lo..=hi).filter(|&p| p != center_pos);

        scratch.hidden.iter_mut().for_each(|h| *h = 0.0);
        let mut n = 0;
        for p in context.clone() {
            axpy(1.0, self.input.row(sentence[p]), &mut scratch.hidden);
            n += 1;
        }
        if n == 0 {
            return None;
        }
        let inv = 1.0 / n as f32;
        scratch.hidden.iter_mut().for_each(|h| *h *= inv);

        draw_targets(table, sentence[center_pos], self.negatives, rng, &mut scratch.targets);
        scratch.grad.iter_mut().for_each(|g| *g = 0.0);
        let loss = ns_update(
            &scratch.hidden,
            self.outputs[0],
            &scratch.targets,
            alpha,
            &mut scratch.grad,
            &mut scratch.scales,
        );
        for p in context {
            axpy(1.0, &scratch.grad, self.input.row(sentence[p]));
        }
        Some(loss)
    }
}
