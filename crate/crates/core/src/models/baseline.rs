use super::ModelError;
use crate::numkernel::{Tape, Var};

/// Output layer of the baseline taggers. Bidirectional models keep one
/// matrix per direction; features get their own block, which is the same
/// as concatenating them to the hidden state before a single matrix.
#[derive(Clone, Copy, Debug)]
pub struct BaselineVars {
    pub u_fwd: Var,
    pub u_bwd: Option<Var>,
    pub u_feat: Option<Var>,
    pub bias: Var,
}

/// `softmax(h→·U→ + h←·U← + f·U_f + b)`, row-wise.
pub fn baseline_output(
    tape: &mut Tape<'_>,
    h_fwd: Var,
    h_bwd: Option<Var>,
    features: Option<Var>,
    p: &BaselineVars,
) -> Result<Var, ModelError> {
    let mut logits = tape.matmul(h_fwd, p.u_fwd)?;
    match (h_bwd, p.u_bwd) {
        (Some(h), Some(u)) => {
            let s = tape.matmul(h, u)?;
            logits = tape.add(logits, s)?;
        }
        (None, None) => {}
        _ => return Err(ModelError::Config("direction count does not match the output layer".into())),
    }
    match (features, p.u_feat) {
        (Some(f), Some(u)) => {
            let s = tape.matmul(f, u)?;
            logits = tape.add(logits, s)?;
        }
        (None, None) => {}
        _ => return Err(ModelError::Config("features do not match the output layer".into())),
    }
    let logits = tape.add_row(logits, p.bias)?;
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
    fn zero_backward_matrix_reduces_to_unidirectional() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ps = ParamSet::new();
        let mut tape = Tape::new(&ps);
        let hf = tape.constant(rand_tensor(&mut rng, 2, 3));
        let hb = tape.constant(rand_tensor(&mut rng, 2, 3));
        let uf = tape.constant(rand_tensor(&mut rng, 3, 4));
        let ub = tape.constant(Tensor::zeros(3, 4));
        let b = tape.constant(rand_tensor(&mut rng, 1, 4));
        let bi = BaselineVars { u_fwd: uf, u_bwd: Some(ub), u_feat: None, bias: b };
        let uni = BaselineVars { u_fwd: uf, u_bwd: None, u_feat: None, bias: b };
        let y1 = baseline_output(&mut tape, hf, Some(hb), None, &bi).unwrap();
        let y2 = baseline_output(&mut tape, hf, None, None, &uni).unwrap();
        assert_eq!(tape.value(y1), tape.value(y2));
    }

    #[test]
    fn zero_matrices_give_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ps = ParamSet::new();
        let mut tape = Tape::new(&ps);
        let hf = tape.constant(rand_tensor(&mut rng, 1, 3));
        let hb = tape.constant(rand_tensor(&mut rng, 1, 3));
        let z = tape.constant(Tensor::zeros(3, 5));
        let b = tape.constant(Tensor::zeros(1, 5));
        let p = BaselineVars { u_fwd: z, u_bwd: Some(z), u_feat: None, bias: b };
        let y = baseline_output(&mut tape, hf, Some(hb), None, &p).unwrap();
        assert!(tape.value(y).data().iter().all(|&v| (v - 0.2).abs() < 1e-15));
    }

    #[test]
    fn matches_two_matmul_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (hf, hb, uf, ub, f, uff, b) = (
            rand_tensor(&mut rng, 1, 3),
            rand_tensor(&mut rng, 1, 3),
            rand_tensor(&mut rng, 3, 4),
            rand_tensor(&mut rng, 3, 4),
            Tensor::row_vector(&[1.0, 0.0]),
            rand_tensor(&mut rng, 2, 4),
            rand_tensor(&mut rng, 1, 4),
        );
        let logits: Vec<f64> = (0..4)
            .map(|k| {
                (0..3).map(|r| hf.data()[r] * uf.get(r, k) + hb.data()[r] * ub.get(r, k)).sum::<f64>()
                    + uff.get(0, k)
                    + b.data()[k]
            })
            .collect();
        let ps = ParamSet::new();
        let mut tape = Tape::new(&ps);
        let vars = [hf, hb, uf, ub, f, uff, b].map(|t| tape.constant(t));
        let p = BaselineVars { u_fwd: vars[2], u_bwd: Some(vars[3]), u_feat: Some(vars[5]), bias: vars[6] };
        let y = baseline_output(&mut tape, vars[0], Some(vars[1]), Some(vars[4]), &p).unwrap();
        for (a, b) in tape.value(y).data().iter().zip(softmax(&logits)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn direction_mismatch_is_rejected() {
        let ps = ParamSet::new();
        let mut tape = Tape::new(&ps);
        let h = tape.constant(Tensor::zeros(1, 2));
        let u = tape.constant(Tensor::zeros(2, 3));
        let b = tape.constant(Tensor::zeros(1, 3));
        let p = BaselineVars { u_fwd: u, u_bwd: None, u_feat: None, bias: b };
        assert!(baseline_output(&mut tape, h, Some(h), None, &p).is_err());
    }
}
