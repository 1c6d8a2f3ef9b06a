//! Recurrent cells and the (bi)directional encoder.
//!
//! All vectors are `1 × k` rows; weights multiply from the right
//! (`x · W`), so `W` is `in × out`.

use super::ModelError;
use crate::models::Cell;
use crate::numkernel::{ParamId, Tape, Tensor, Var};

/// Parameter IDs of one cell: input weights `w`, recurrent weights `u`, bias `b`.
///
/// For LSTMs the three are fused over the gates in the order
/// input, forget, output, candidate (`4H` columns). For Jordan cells `u`
/// multiplies the previous label distribution instead of the hidden state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellParams {
    pub w: ParamId,
    pub u: ParamId,
    pub b: ParamId,
}

#[derive(Clone, Copy, Debug)]
pub struct CellVars {
    pub w: Var,
    pub u: Var,
    pub b: Var,
}

impl CellParams {
    pub fn on(&self, tape: &mut Tape<'_>) -> CellVars {
        CellVars {
            w: tape.param(self.w),
            u: tape.param(self.u),
            b: tape.param(self.b),
        }
    }
}

fn check(tape: &Tape<'_>, what: &str, v: Var, weights: Var) -> Result<(), ModelError> {
    let (a, b) = (tape.value(v), tape.value(weights));
    if a.rows() != 1 || a.cols() != b.rows() {
        return Err(ModelError::Config(format!(
            "{what}: vector {:?} does not fit weights {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

fn affine(tape: &mut Tape<'_>, x: Var, r: Var, p: &CellVars) -> Result<Var, ModelError> {
    let xw = tape.matmul(x, p.w)?;
    let ru = tape.matmul(r, p.u)?;
    let s = tape.add(xw, ru)?;
    Ok(tape.add_row(s, p.b)?)
}

/// `h = σ(x·W + h_prev·U + b)`
pub fn elman_step(tape: &mut Tape<'_>, x: Var, h_prev: Var, p: &CellVars) -> Result<Var, ModelError> {
    check(tape, "elman input", x, p.w)?;
    check(tape, "elman state", h_prev, p.u)?;
    let z = affine(tape, x, h_prev, p)?;
    Ok(tape.sigmoid(z))
}

/// `h = σ(x·W + y_prev·U + b)` where `y_prev` is the previous label distribution.
pub fn jordan_step(tape: &mut Tape<'_>, x: Var, y_prev: Var, p: &CellVars) -> Result<Var, ModelError> {
    check(tape, "jordan input", x, p.w)?;
    check(tape, "jordan previous output", y_prev, p.u)?;
    let z = affine(tape, x, y_prev, p)?;
    Ok(tape.sigmoid(z))
}

/// Standard LSTM step; returns `(h, c)`.
pub fn lstm_step(
    tape: &mut Tape<'_>,
    x: Var,
    h_prev: Var,
    c_prev: Var,
    p: &CellVars,
) -> Result<(Var, Var), ModelError> {
    check(tape, "lstm input", x, p.w)?;
    check(tape, "lstm state", h_prev, p.u)?;
    let h = tape.value(h_prev).cols();
    if tape.value(p.u).cols() != 4 * h || tape.value(c_prev).cols() != h {
        return Err(ModelError::Config(format!(
            "lstm: recurrent weights {:?} do not match hidden size {h}",
            tape.value(p.u).shape()
        )));
    }
    let z = affine(tape, x, h_prev, p)?;
    let zi = tape.slice_cols(z, 0, h)?;
    let zf = tape.slice_cols(z, h, 2 * h)?;
    let zo = tape.slice_cols(z, 2 * h, 3 * h)?;
    let zg = tape.slice_cols(z, 3 * h, 4 * h)?;
    let i = tape.sigmoid(zi);
    let f = tape.sigmoid(zf);
    let o = tape.sigmoid(zo);
    let g = tape.tanh(zg);
    let fc = tape.mul(f, c_prev)?;
    let ig = tape.mul(i, g)?;
    let c = tape.add(fc, ig)?;
    let tc = tape.tanh(c);
    let h = tape.mul(o, tc)?;
    Ok((h, c))
}

/// Runs an Elman or LSTM cell over the rows of `xs` (`n × in`) and returns
/// the `n × H` hidden states, row `i` aligned with input `i` in both
/// directions. Initial states are zero.
pub fn run_direction(
    tape: &mut Tape<'_>,
    xs: Var,
    cell: Cell,
    p: &CellVars,
    reverse: bool,
) -> Result<Var, ModelError> {
    let n = tape.value(xs).rows();
    let hsize = match cell {
        Cell::Lstm => tape.value(p.u).cols() / 4,
        Cell::Elman => tape.value(p.u).cols(),
        Cell::Jordan => {
            return Err(ModelError::Config(
                "Jordan cells need label feedback; use the Jordan decoder".into(),
            ))
        }
    };
    let mut h = tape.constant(Tensor::zeros(1, hsize));
    let mut c = h;
    let mut states = vec![h; n];
    let order: Vec<usize> = if reverse { (0..n).rev().collect() } else { (0..n).collect() };
    for t in order {
        let x = tape.row(xs, t)?;
        match cell {
            Cell::Lstm => {
                let (nh, nc) = lstm_step(tape, x, h, c, p)?;
                h = nh;
                c = nc;
            }
            _ => h = elman_step(tape, x, h, p)?,
        }
        states[t] = h;
    }
    Ok(tape.concat_rows(&states)?)
}

/// Forward pass, plus a backward pass when `bwd` is given; returns
/// `n × H` or `n × 2H` with rows `[h→_i ; h←_i]`.
pub fn encode_bidirectional(
    tape: &mut Tape<'_>,
    xs: Var,
    cell: Cell,
    fwd: &CellVars,
    bwd: Option<&CellVars>,
) -> Result<Var, ModelError> {
    let f = run_direction(tape, xs, cell, fwd, false)?;
    match bwd {
        None => Ok(f),
        Some(b) => {
            let b = run_direction(tape, xs, cell, b, true)?;
            Ok(tape.concat_cols(&[f, b])?)
        }
    }
}
