use crate::numkernel::Tensor;

/// `[x_{i-d}; …; x_i; …; x_{i+d}]` over the rows of `embeddings`, using `pad`
/// for positions outside the sentence.
pub fn context_window(embeddings: &Tensor, i: usize, d: usize, pad: &[f64]) -> Vec<f64> {
    let n = embeddings.rows() as isize;
    let mut out = Vec::with_capacity((2 * d + 1) * embeddings.cols());
    for k in -(d as isize)..=(d as isize) {
        let j = i as isize + k;
        if (0..n).contains(&j) {
            out.extend_from_slice(embeddings.row(j as usize));
        } else {
            out.extend_from_slice(pad);
        }
    }
    out
}

/// Row indices feeding each window: `n · (2d+1)` entries, `None` where the
/// window runs off the sentence.
pub fn window_rows(ids: &[usize], d: usize) -> Vec<Option<usize>> {
    let n = ids.len() as isize;
    let mut out = Vec::with_capacity(ids.len() * (2 * d + 1));
    for i in 0..n {
        for k in -(d as isize)..=(d as isize) {
            let j = i + k;
            out.push(if (0..n).contains(&j) { Some(ids[j as usize]) } else { None });
        }
    }
    out
}
