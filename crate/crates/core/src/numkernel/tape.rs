//! Reverse-mode differentiation over a linear record of primitive operations.
//!
//! Every operation appends a node holding its forward value; nodes only
//! reference earlier nodes, so walking the record backwards visits each node
//! after all of its consumers.

use std::collections::HashMap;

use rand::Rng;

use super::tensor::sigmoid;
use super::{Gradients, KernelError, ParamId, ParamSet, Tensor};

/// Probabilities below this are clamped before taking the log in cross-entropy.
pub const LOG_EPSILON: f64 = 1e-12;

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Constant,
    Param(ParamId),
    MatMul(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Sigmoid(Var),
    Tanh(Var),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    SliceCols(Var, usize),
    SliceRows(Var, usize),
    SoftmaxRows(Var),
    CrossEntropySum(Var, Vec<usize>),
    Dropout(Var, Vec<f64>),
    EmbedWindows {
        table: ParamId,
        rows: Vec<Option<usize>>,
        width: usize,
        scale: f64,
    },
    AdditiveScores(Var, Var, Var),
    Sum(Vec<Var>),
}

struct Node {
    value: Tensor,
    op: Op,
}

/// Record of one forward computation. Borrows the parameters read-only;
/// gradients come back from [`Tape::backward`] as a separate [`Gradients`].
pub struct Tape<'p> {
    params: &'p ParamSet,
    nodes: Vec<Node>,
    param_vars: HashMap<ParamId, Var>,
}

fn mismatch(op: &'static str, a: &Tensor, b: &Tensor) -> KernelError {
    KernelError::ShapeMismatch {
        op,
        left: a.shape().to_vec(),
        right: b.shape().to_vec(),
    }
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p ParamSet) -> Self {
        Tape {
            params,
            nodes: Vec::new(),
            param_vars: HashMap::new(),
        }
    }

    pub fn params(&self) -> &'p ParamSet {
        self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn push(&mut self, value: Tensor, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Constant)
    }

    /// Tracked reference to a parameter; repeated calls share one node.
    pub fn param(&mut self, id: ParamId) -> Var {
        if let Some(&v) = self.param_vars.get(&id) {
            return v;
        }
        let v = self.push(self.params.value(id).clone(), Op::Param(id));
        self.param_vars.insert(id, v);
        v
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, KernelError> {
        let out = self.value(a).matmul(self.value(b))?;
        Ok(self.push(out, Op::MatMul(a, b)))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, KernelError> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(mismatch("add", ta, tb));
        }
        let mut out = ta.clone();
        out.add_assign(tb);
        Ok(self.push(out, Op::Add(a, b)))
    }

    /// Adds a `1 × c` row to every row of an `r × c` matrix.
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var, KernelError> {
        let (ta, tb) = (self.value(a), self.value(row));
        if tb.rows() != 1 || tb.cols() != ta.cols() {
            return Err(mismatch("add_row", ta, tb));
        }
        let mut out = ta.clone();
        let c = ta.cols();
        for r in 0..ta.rows() {
            for (o, b) in out.row_mut(r).iter_mut().zip(&tb.data()[..c]) {
                *o += b;
            }
        }
        Ok(self.push(out, Op::AddRow(a, row)))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, KernelError> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(mismatch("mul", ta, tb));
        }
        let data = ta.data().iter().zip(tb.data()).map(|(x, y)| x * y).collect();
        let out = Tensor::new(ta.shape().to_vec(), data)?;
        Ok(self.push(out, Op::Mul(a, b)))
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        let out = self.value(a).map(|v| v * s);
        self.push(out, Op::Scale(a, s))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let out = self.value(a).map(sigmoid);
        self.push(out, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let out = self.value(a).map(f64::tanh);
        self.push(out, Op::Tanh(a))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var, KernelError> {
        let rows = self.value(parts[0]).rows();
        let mut cols = 0;
        for &p in parts {
            let t = self.value(p);
            if t.rows() != rows {
                return Err(mismatch("concat_cols", self.value(parts[0]), t));
            }
            cols += t.cols();
        }
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for &p in parts {
                data.extend_from_slice(self.value(p).row(r));
            }
        }
        let out = Tensor::new(vec![rows, cols], data)?;
        Ok(self.push(out, Op::ConcatCols(parts.to_vec())))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var, KernelError> {
        let cols = self.value(parts[0]).cols();
        let mut data = Vec::new();
        for &p in parts {
            let t = self.value(p);
            if t.cols() != cols {
                return Err(mismatch("concat_rows", self.value(parts[0]), t));
            }
            data.extend_from_slice(t.data());
        }
        let rows = data.len() / cols;
        let out = Tensor::new(vec![rows, cols], data)?;
        Ok(self.push(out, Op::ConcatRows(parts.to_vec())))
    }

    /// Columns `[start, end)` of a matrix.
    pub fn slice_cols(&mut self, a: Var, start: usize, end: usize) -> Result<Var, KernelError> {
        let t = self.value(a);
        if start >= end || end > t.cols() {
            return Err(KernelError::SliceOutOfRange {
                start,
                end,
                len: t.cols(),
            });
        }
        let mut data = Vec::with_capacity(t.rows() * (end - start));
        for r in 0..t.rows() {
            data.extend_from_slice(&t.row(r)[start..end]);
        }
        let out = Tensor::new(vec![t.rows(), end - start], data)?;
        Ok(self.push(out, Op::SliceCols(a, start)))
    }

    /// Rows `[start, end)` of a matrix.
    pub fn slice_rows(&mut self, a: Var, start: usize, end: usize) -> Result<Var, KernelError> {
        let t = self.value(a);
        if start >= end || end > t.rows() {
            return Err(KernelError::SliceOutOfRange {
                start,
                end,
                len: t.rows(),
            });
        }
        let c = t.cols();
        let out = Tensor::new(vec![end - start, c], t.data()[start * c..end * c].to_vec())?;
        Ok(self.push(out, Op::SliceRows(a, start)))
    }

    pub fn row(&mut self, a: Var, r: usize) -> Result<Var, KernelError> {
        self.slice_rows(a, r, r + 1)
    }

    /// Row-wise softmax with max subtraction.
    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let t = self.value(a);
        let mut out = t.clone();
        for r in 0..t.rows() {
            let p = super::tensor::softmax(t.row(r));
            out.row_mut(r).copy_from_slice(&p);
        }
        self.push(out, Op::SoftmaxRows(a))
    }

    /// Sum over rows of `−ln max(p[r, target_r], ε)`.
    pub fn cross_entropy_sum(&mut self, probs: Var, targets: &[usize]) -> Result<Var, KernelError> {
        let t = self.value(probs);
        if t.rows() != targets.len() {
            return Err(KernelError::TargetCount {
                rows: t.rows(),
                targets: targets.len(),
            });
        }
        let mut total = 0.0;
        for (r, &g) in targets.iter().enumerate() {
            if g >= t.cols() {
                return Err(KernelError::TargetOutOfRange {
                    target: g,
                    classes: t.cols(),
                });
            }
            total -= t.get(r, g).max(LOG_EPSILON).ln();
        }
        Ok(self.push(
            Tensor::scalar(total),
            Op::CrossEntropySum(probs, targets.to_vec()),
        ))
    }

    /// Inverted dropout: keeps each element with probability `keep` and
    /// scales survivors by `1/keep`. Identity when `training` is false or
    /// `keep == 1`.
    pub fn dropout<R: Rng>(
        &mut self,
        a: Var,
        keep: f64,
        training: bool,
        rng: &mut R,
    ) -> Result<Var, KernelError> {
        if !(keep > 0.0 && keep <= 1.0) {
            return Err(KernelError::InvalidKeep(keep));
        }
        if !training || keep == 1.0 {
            return Ok(a);
        }
        let t = self.value(a);
        let mask: Vec<f64> = (0..t.len())
            .map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
            .collect();
        let data = t.data().iter().zip(&mask).map(|(x, m)| x * m).collect();
        let out = Tensor::new(t.shape().to_vec(), data)?;
        Ok(self.push(out, Op::Dropout(a, mask)))
    }

    /// Gathers embedding rows into context windows.
    ///
    /// `rows` holds `n · width` entries; row `i` of the output is the
    /// concatenation of `scale · table[rows[i·width + k]]` for `k < width`,
    /// with `None` contributing a zero (padding) block.
    pub fn embed_windows(
        &mut self,
        table: ParamId,
        rows: Vec<Option<usize>>,
        width: usize,
        scale: f64,
    ) -> Result<Var, KernelError> {
        let t = self.params.value(table);
        let dim = t.cols();
        if width == 0 || rows.is_empty() || !rows.len().is_multiple_of(width) {
            return Err(KernelError::SliceOutOfRange {
                start: 0,
                end: width,
                len: rows.len(),
            });
        }
        let n = rows.len() / width;
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in &rows {
            match r {
                Some(id) if *id < t.rows() => data.extend(t.row(*id).iter().map(|v| v * scale)),
                Some(id) => {
                    return Err(KernelError::TargetOutOfRange {
                        target: *id,
                        classes: t.rows(),
                    })
                }
                None => data.extend(std::iter::repeat_n(0.0, dim)),
            }
        }
        let out = Tensor::new(vec![n, width * dim], data)?;
        Ok(self.push(
            out,
            Op::EmbedWindows {
                table,
                rows,
                width,
                scale,
            },
        ))
    }

    /// Pairwise additive scores `s[i][j] = Σ_k v_k · tanh(p[i][k] + q[j][k])`
    /// for `p, q: n × a` and `v: 1 × a`.
    pub fn additive_scores(&mut self, p: Var, q: Var, v: Var) -> Result<Var, KernelError> {
        let (tp, tq, tv) = (self.value(p), self.value(q), self.value(v));
        if tp.shape() != tq.shape() {
            return Err(mismatch("additive_scores", tp, tq));
        }
        if tv.rows() != 1 || tv.cols() != tp.cols() {
            return Err(mismatch("additive_scores", tp, tv));
        }
        let n = tp.rows();
        let mut out = Tensor::zeros(n, n);
        for i in 0..n {
            let pi = tp.row(i);
            for j in 0..n {
                let qj = tq.row(j);
                let mut s = 0.0;
                for k in 0..pi.len() {
                    s += tv.data()[k] * (pi[k] + qj[k]).tanh();
                }
                out.set(i, j, s);
            }
        }
        Ok(self.push(out, Op::AdditiveScores(p, q, v)))
    }

    /// Sum of scalar nodes.
    pub fn sum(&mut self, parts: &[Var]) -> Result<Var, KernelError> {
        let mut total = 0.0;
        for &p in parts {
            let t = self.value(p);
            if t.len() != 1 {
                return Err(KernelError::NotScalar(t.shape().to_vec()));
            }
            total += t.data()[0];
        }
        Ok(self.push(Tensor::scalar(total), Op::Sum(parts.to_vec())))
    }

    /// Propagates `d loss / d node` back through the record and returns the
    /// gradient of every parameter the loss depends on.
    pub fn backward(&self, loss: Var) -> Result<Gradients, KernelError> {
        if self.nodes.is_empty() || loss.0 >= self.nodes.len() {
            return Err(KernelError::NoLoss);
        }
        let lt = self.value(loss);
        if lt.len() != 1 {
            return Err(KernelError::NotScalar(lt.shape().to_vec()));
        }
        if !lt.is_finite() {
            return Err(KernelError::NonFinite("loss"));
        }
        let mut grads: Vec<Option<Tensor>> = (0..=loss.0).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::scalar(1.0));
        let mut out = Gradients::new(self.params.len());

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Constant => {}
                Op::Param(id) => out.slot(*id, &g).add_assign(&g),
                Op::MatMul(a, b) => {
                    let ga = g.matmul(&self.value(*b).transpose())?;
                    let gb = self.value(*a).transpose().matmul(&g)?;
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, *a, g.clone());
                    accumulate(&mut grads, *b, g);
                }
                Op::AddRow(a, b) => {
                    let mut gb = Tensor::zeros(1, g.cols());
                    for r in 0..g.rows() {
                        for (o, x) in gb.data_mut().iter_mut().zip(g.row(r)) {
                            *o += x;
                        }
                    }
                    accumulate(&mut grads, *a, g);
                    accumulate(&mut grads, *b, gb);
                }
                Op::Mul(a, b) => {
                    let (ta, tb) = (self.value(*a), self.value(*b));
                    let ga = zip_map(&g, tb, |x, y| x * y);
                    let gb = zip_map(&g, ta, |x, y| x * y);
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
                Op::Scale(a, s) => accumulate(&mut grads, *a, g.map(|x| x * s)),
                Op::Sigmoid(a) => {
                    let ga = zip_map(&g, &node.value, |x, y| x * y * (1.0 - y));
                    accumulate(&mut grads, *a, ga);
                }
                Op::Tanh(a) => {
                    let ga = zip_map(&g, &node.value, |x, y| x * (1.0 - y * y));
                    accumulate(&mut grads, *a, ga);
                }
                Op::ConcatCols(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let w = self.value(p).cols();
                        let mut gp = Tensor::zeros(g.rows(), w);
                        for r in 0..g.rows() {
                            gp.row_mut(r).copy_from_slice(&g.row(r)[offset..offset + w]);
                        }
                        offset += w;
                        accumulate(&mut grads, p, gp);
                    }
                }
                Op::ConcatRows(parts) => {
                    let c = g.cols();
                    let mut offset = 0;
                    for &p in parts {
                        let h = self.value(p).rows();
                        let gp = Tensor::new(
                            vec![h, c],
                            g.data()[offset * c..(offset + h) * c].to_vec(),
                        )?;
                        offset += h;
                        accumulate(&mut grads, p, gp);
                    }
                }
                Op::SliceCols(a, start) => {
                    let ta = self.value(*a);
                    let mut ga = Tensor::zeros(ta.rows(), ta.cols());
                    for r in 0..g.rows() {
                        ga.row_mut(r)[*start..*start + g.cols()].copy_from_slice(g.row(r));
                    }
                    accumulate(&mut grads, *a, ga);
                }
                Op::SliceRows(a, start) => {
                    let ta = self.value(*a);
                    let mut ga = Tensor::zeros(ta.rows(), ta.cols());
                    let c = ta.cols();
                    ga.data_mut()[start * c..start * c + g.len()].copy_from_slice(g.data());
                    accumulate(&mut grads, *a, ga);
                }
                Op::SoftmaxRows(a) => {
                    let y = &node.value;
                    let mut ga = g.clone();
                    for r in 0..y.rows() {
                        let dot: f64 = g.row(r).iter().zip(y.row(r)).map(|(x, p)| x * p).sum();
                        for (o, (&x, &p)) in ga.row_mut(r).iter_mut().zip(g.row(r).iter().zip(y.row(r))) {
                            *o = p * (x - dot);
                        }
                    }
                    accumulate(&mut grads, *a, ga);
                }
                Op::CrossEntropySum(probs, targets) => {
                    let tp = self.value(*probs);
                    let upstream = g.data()[0];
                    let mut ga = Tensor::zeros(tp.rows(), tp.cols());
                    for (r, &t) in targets.iter().enumerate() {
                        let p = tp.get(r, t);
                        if p >= LOG_EPSILON {
                            ga.set(r, t, -upstream / p);
                        }
                    }
                    accumulate(&mut grads, *probs, ga);
                }
                Op::Dropout(a, mask) => {
                    let data = g.data().iter().zip(mask).map(|(x, m)| x * m).collect();
                    accumulate(&mut grads, *a, Tensor::new(g.shape().to_vec(), data)?);
                }
                Op::EmbedWindows {
                    table,
                    rows,
                    width,
                    scale,
                } => {
                    let tt = self.params.value(*table);
                    let dim = tt.cols();
                    let slot = out.slot(*table, tt);
                    for (k, r) in rows.iter().enumerate() {
                        if let Some(id) = r {
                            let (i, w) = (k / width, k % width);
                            let src = &g.row(i)[w * dim..(w + 1) * dim];
                            for (o, x) in slot.row_mut(*id).iter_mut().zip(src) {
                                *o += scale * x;
                            }
                        }
                    }
                }
                Op::AdditiveScores(p, q, v) => {
                    let (tp, tq, tv) = (self.value(*p), self.value(*q), self.value(*v));
                    let (n, a) = (tp.rows(), tp.cols());
                    let mut gp = Tensor::zeros(n, a);
                    let mut gq = Tensor::zeros(n, a);
                    let mut gv = Tensor::zeros(1, a);
                    for i in 0..n {
                        for j in 0..n {
                            let up = g.get(i, j);
                            if up == 0.0 {
                                continue;
                            }
                            for k in 0..a {
                                let t = (tp.get(i, k) + tq.get(j, k)).tanh();
                                let d = up * tv.data()[k] * (1.0 - t * t);
                                gp.data_mut()[i * a + k] += d;
                                gq.data_mut()[j * a + k] += d;
                                gv.data_mut()[k] += up * t;
                            }
                        }
                    }
                    accumulate(&mut grads, *p, gp);
                    accumulate(&mut grads, *q, gq);
                    accumulate(&mut grads, *v, gv);
                }
                Op::Sum(parts) => {
                    for &p in parts {
                        accumulate(&mut grads, p, g.clone());
                    }
                }
            }
        }
        Ok(out)
    }
}

fn accumulate(grads: &mut [Option<Tensor>], v: Var, g: Tensor) {
    match &mut grads[v.0] {
        Some(existing) => existing.add_assign(&g),
        slot => *slot = Some(g),
    }
}

fn zip_map(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
    Tensor::new(a.shape().to_vec(), data).expect("same shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn square_gradient() {
        let mut ps = ParamSet::new();
        let x = ps.add("x", Tensor::scalar(3.0));
        let mut tape = Tape::new(&ps);
        let xv = tape.param(x);
        let sq = tape.mul(xv, xv).unwrap();
        let g = tape.backward(sq).unwrap();
        assert_eq!(g.get(x).unwrap().data(), &[6.0]);
    }

    #[test]
    fn softmax_cross_entropy_gradient_is_pred_minus_gold() {
        let mut ps = ParamSet::new();
        let z = ps.add("z", Tensor::row_vector(&[0.3, -1.2, 2.0, 0.1]));
        let mut tape = Tape::new(&ps);
        let zv = tape.param(z);
        let p = tape.softmax_rows(zv);
        let loss = tape.cross_entropy_sum(p, &[2]).unwrap();
        let pred = tape.value(p).clone();
        let g = tape.backward(loss).unwrap();
        for (k, (&gk, &pk)) in g.get(z).unwrap().data().iter().zip(pred.data()).enumerate() {
            let gold = if k == 2 { 1.0 } else { 0.0 };
            assert!((gk - (pk - gold)).abs() < 1e-12);
        }
    }

    #[test]
    fn cross_entropy_values() {
        let ps = ParamSet::new();
        let mut tape = Tape::new(&ps);
        let p = tape.constant(Tensor::row_vector(&[1.0, 0.0]));
        let l = tape.cross_entropy_sum(p, &[0]).unwrap();
        assert_eq!(tape.value(l).data()[0], 0.0);
        let u = tape.constant(Tensor::row_vector(&[0.5, 0.5]));
        let l = tape.cross_entropy_sum(u, &[1]).unwrap();
        assert!((tape.value(l).data()[0] - std::f64::consts::LN_2).abs() < 1e-12);
        let q = tape.constant(Tensor::row_vector(&[0.7, 0.3]));
        let l = tape.cross_entropy_sum(q, &[1]).unwrap();
        assert!((tape.value(l).data()[0] - 1.203_972_804_325_936).abs() < 1e-12);
        // zero probability at the gold index is clamped, not infinite
        let z = tape.constant(Tensor::row_vector(&[1.0, 0.0]));
        let l = tape.cross_entropy_sum(z, &[1]).unwrap();
        assert!((tape.value(l).data()[0] + LOG_EPSILON.ln()).abs() < 1e-9);
    }

    #[test]
    fn dropout_modes() {
        let ps = ParamSet::new();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut tape = Tape::new(&ps);
        let x = tape.constant(Tensor::filled(1, 100_000, 1.0));
        assert_eq!(tape.dropout(x, 1.0, true, &mut rng).unwrap(), x);
        assert_eq!(tape.dropout(x, 0.5, false, &mut rng).unwrap(), x);
        assert!(matches!(
            tape.dropout(x, 0.0, true, &mut rng),
            Err(KernelError::InvalidKeep(_))
        ));
        let d = tape.dropout(x, 0.8, true, &mut rng).unwrap();
        let mean = tape.value(d).sum() / 100_000.0;
        assert!((0.99..=1.01).contains(&mean), "mean {mean}");
    }

    #[test]
    fn backward_without_loss_is_an_error() {
        let ps = ParamSet::new();
        let tape = Tape::new(&ps);
        assert!(matches!(tape.backward(Var(0)), Err(KernelError::NoLoss)));
    }

    #[test]
    fn backward_rejects_non_scalar() {
        let ps = ParamSet::new();
        let mut tape = Tape::new(&ps);
        let x = tape.constant(Tensor::zeros(2, 2));
        assert!(matches!(tape.backward(x), Err(KernelError::NotScalar(_))));
    }

    #[test]
    fn elementwise_ranges() {
        let ps = ParamSet::new();
        let mut tape = Tape::new(&ps);
        let x = tape.constant(Tensor::row_vector(&[-50.0, -1.0, 0.0, 1.0, 50.0]));
        let s = tape.sigmoid(x);
        let t = tape.tanh(x);
        assert_eq!(tape.value(s).data()[2], 0.5);
        assert_eq!(tape.value(t).data()[2], 0.0);
        assert!(tape.value(s).data().iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(tape.value(t).data().iter().all(|v| (-1.0..=1.0).contains(v)));
    }
}
