//! Global attention over the encoder states and the label decoder.
//!
//! With `H` the `n × D` matrix of encoder states:
//!
//! ```text
//! u[i][j] = v · tanh([h_i ; h_j] · W_α)        W_α: 2D × A, v: 1 × A
//! α_i     = softmax(u[i])
//! t_i     = Σ_j α[i][j] · h_j
//! ŷ_i     = softmax([h_i ; t_i ; y_{i-1} ; f_i] · W_s)
//! ```
//!
//! `[h_i ; h_j] · W_α` splits into `h_i · W_top + h_j · W_bottom`, so the
//! two projections are computed once per sentence.

use super::ModelError;
use crate::numkernel::{Tape, Var};

/// Attention distributions, one row per query position (`n × n`).
pub fn attention_scores(tape: &mut Tape<'_>, states: Var, w_alpha: Var, v: Var) -> Result<Var, ModelError> {
    let (n, d) = (tape.value(states).rows(), tape.value(states).cols());
    if n == 0 || tape.value(w_alpha).rows() != 2 * d {
        return Err(ModelError::Config(format!(
            "attention weights {:?} do not fit states {:?}",
            tape.value(w_alpha).shape(),
            tape.value(states).shape()
        )));
    }
    let top = tape.slice_rows(w_alpha, 0, d)?;
    let bottom = tape.slice_rows(w_alpha, d, 2 * d)?;
    let p = tape.matmul(states, top)?;
    let q = tape.matmul(states, bottom)?;
    let u = tape.additive_scores(p, q, v)?;
    Ok(tape.softmax_rows(u))
}

/// Context vectors `t_i = Σ_j α[i][j] h_j` for every row of `alpha`.
pub fn context_vector(tape: &mut Tape<'_>, alpha: Var, states: Var) -> Result<Var, ModelError> {
    Ok(tape.matmul(alpha, states)?)
}

/// Label distribution for one or more positions: `softmax([h ; t ; y_prev ; extra…] · W_s)`.
///
/// Each argument may hold several rows (one per position) as long as all
/// agree on the row count.
pub fn decode_step(
    tape: &mut Tape<'_>,
    h: Var,
    t: Var,
    y_prev: Var,
    extra: &[Var],
    w_s: Var,
) -> Result<Var, ModelError> {
    let mut parts = vec![h, t, y_prev];
    parts.extend_from_slice(extra);
    let input = tape.concat_cols(&parts)?;
    if tape.value(input).cols() != tape.value(w_s).rows() {
        return Err(ModelError::Config(format!(
            "decoder input width {} does not match W_s {:?}",
            tape.value(input).cols(),
            tape.value(w_s).shape()
        )));
    }
    let logits = tape.matmul(input, w_s)?;
    Ok(tape.softmax_rows(logits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{softmax, ParamSet, Tensor};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_tensor(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Tensor {
        Tensor::new(vec![r, c], (0..r * c).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn zero_v_gives_uniform_attention() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ps = ParamSet::new();
        let mut tape = Tape::new(&ps);
        let h = tape.constant(rand_tensor(&mut rng, 4, 3));
        let w = tape.constant(rand_tensor(&mut rng, 6, 5));
        let v = tape.constant(Tensor::zeros(1, 5));
        let a = attention_scores(&mut tape, h, w, v).unwrap();
        assert!(tape.value(a).data().iter().all(|&x| (x - 0.25).abs() < 1e-15));
    }

    #[test]
    fn single_position_attends_to_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ps = ParamSet::new();
        let mut tape = Tape::new(&ps);
        let h = tape.constant(rand_tensor(&mut rng, 1, 3));
        let w = tape.constant(rand_tensor(&mut rng, 6, 5));
        let v = tape.constant(rand_tensor(&mut rng, 1, 5));
        let a = attention_scores(&mut tape, h, w, v).unwrap();
        assert_eq!(tape.value(a).data(), &[1.0]);
    }

    #[test]
    fn scores_match_scalar_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (ht, wt, vt) = (rand_tensor(&mut rng, 4, 3), rand_tensor(&mut rng, 6, 5), rand_tensor(&mut rng, 1, 5));
        let ps = ParamSet::new();
        let mut tape = Tape::new(&ps);
        let h = tape.constant(ht.clone());
        let w = tape.constant(wt.clone());
        let v = tape.constant(vt.clone());
        let a = attention_scores(&mut tape, h, w, v).unwrap();
        for i in 0..4 {
            let u: Vec<f64> = (0..4)
                .map(|j| {
                    let cat: Vec<f64> = ht.row(i).iter().chain(ht.row(j)).copied().collect();
                    (0..5)
                        .map(|k| {
                            let s: f64 = (0..6).map(|r| cat[r] * wt.get(r, k)).sum();
                            vt.data()[k] * s.tanh()
                        })
                        .sum()
                })
                .collect();
            let want = softmax(&u);
            for j in 0..4 {
                assert!((tape.value(a).get(i, j) - want[j]).abs() < 1e-12);
            }
            assert!((tape.value(a).row(i).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn context_vector_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ht = rand_tensor(&mut rng, 3, 4);
        let ps = ParamSet::new();
        let mut tape = Tape::new(&ps);
        let h = tape.constant(ht.clone());
        let one_hot = tape.constant(Tensor::row_vector(&[0.0, 1.0, 0.0]));
        let t = context_vector(&mut tape, one_hot, h).unwrap();
        assert_eq!(tape.value(t).data(), ht.row(1));

        let same = tape.constant(Tensor::from_rows(&[ht.row(0).to_vec(), ht.row(0).to_vec()]).unwrap());
        let uniform = tape.constant(Tensor::row_vector(&[0.5, 0.5]));
        let t = context_vector(&mut tape, uniform, same).unwrap();
        for (a, b) in tape.value(t).data().iter().zip(ht.row(0)) {
            assert!((a - b).abs() < 1e-15);
        }

        let alpha: Vec<f64> = softmax(&[0.3, -1.0, 2.0]);
        let av = tape.constant(Tensor::row_vector(&alpha));
        let t = context_vector(&mut tape, av, h).unwrap();
        for c in 0..4 {
            let want: f64 = (0..3).map(|j| alpha[j] * ht.get(j, c)).sum();
            assert!((tape.value(t).data()[c] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn decode_step_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ps = ParamSet::new();
        let mut tape = Tape::new(&ps);
        let h = tape.constant(rand_tensor(&mut rng, 1, 2));
        let t = tape.constant(rand_tensor(&mut rng, 1, 2));
        let start = tape.constant(Tensor::row_vector(&[0.0, 0.0, 0.0, 1.0]));
        let zero = tape.constant(Tensor::zeros(8, 3));
        let y = decode_step(&mut tape, h, t, start, &[], zero).unwrap();
        assert!(tape.value(y).data().iter().all(|&p| (p - 1.0 / 3.0).abs() < 1e-15));

        let ws = rand_tensor(&mut rng, 8, 3);
        let wv = tape.constant(ws.clone());
        let y = decode_step(&mut tape, h, t, start, &[], wv).unwrap();
        let cat: Vec<f64> = tape
            .value(h)
            .data()
            .iter()
            .chain(tape.value(t).data())
            .chain(tape.value(start).data())
            .copied()
            .collect();
        let logits: Vec<f64> = (0..3).map(|k| (0..8).map(|r| cat[r] * ws.get(r, k)).sum()).collect();
        for (a, b) in tape.value(y).data().iter().zip(softmax(&logits)) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
