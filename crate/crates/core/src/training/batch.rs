use crate::corpus::{LabelId, PAD_ROW};
use crate::models::Instance;
use crate::numkernel::Tensor;

/// Sentences padded to a common length. Row `b` of every matrix belongs to
/// the same sentence; `mask[b][t]` is true exactly on real tokens.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub ids: Vec<Vec<usize>>,
    /// One `len × feature_dim` matrix per sentence, zero on padding.
    pub features: Option<Vec<Tensor>>,
    pub gold: Vec<Vec<LabelId>>,
    pub mask: Vec<Vec<bool>>,
    pub scale: Vec<f64>,
}

impl Batch {
    pub fn size(&self) -> usize {
        self.ids.len()
    }

    /// Padded length.
    pub fn len(&self) -> usize {
        self.ids.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.mask.iter().map(|m| m.iter().filter(|&&b| b).count()).collect()
    }

    /// The sentences with padding stripped.
    pub fn instances(&self) -> Vec<Instance> {
        self.lengths()
            .into_iter()
            .enumerate()
            .map(|(b, n)| Instance {
                ids: self.ids[b][..n].to_vec(),
                features: self.features.as_ref().map(|f| {
                    let cols = f[b].cols();
                    Tensor::new(vec![n, cols], f[b].data()[..n * cols].to_vec()).expect("prefix of a matrix")
                }),
                labels: self.gold[b][..n].to_vec(),
                scale: self.scale[b],
            })
            .collect()
    }
}

/// Groups instances in order into batches of `batch_size`, padding each
/// batch to its longest sentence. Sentences longer than `max_len` are
/// truncated; the second return value counts them.
pub fn make_batches(instances: &[Instance], batch_size: usize, max_len: usize) -> (Vec<Batch>, usize) {
    let batch_size = batch_size.max(1);
    let mut truncated = 0;
    let mut out = Vec::new();
    for chunk in instances.chunks(batch_size) {
        let mut chunk: Vec<Instance> = chunk.to_vec();
        for inst in &mut chunk {
            if inst.len() > max_len {
                log::warn!("sentence of {} tokens truncated to {max_len}", inst.len());
                inst.truncate(max_len);
                truncated += 1;
            }
        }
        let width = chunk.iter().map(Instance::len).max().unwrap_or(0);
        let pad = |v: &[usize], fill: usize| {
            let mut v = v.to_vec();
            v.resize(width, fill);
            v
        };
        let features = if chunk.iter().all(|i| i.features.is_some()) && !chunk.is_empty() {
            Some(
                chunk
                    .iter()
                    .map(|i| {
                        let f = i.features.as_ref().unwrap();
                        let mut data = f.data().to_vec();
                        data.resize(width * f.cols(), 0.0);
                        Tensor::new(vec![width, f.cols()], data).expect("padded matrix")
                    })
                    .collect(),
            )
        } else {
            None
        };
        out.push(Batch {
            ids: chunk.iter().map(|i| pad(&i.ids, PAD_ROW)).collect(),
            features,
            gold: chunk.iter().map(|i| pad(&i.labels, 0)).collect(),
            mask: chunk.iter().map(|i| (0..width).map(|t| t < i.len()).collect()).collect(),
            scale: chunk.iter().map(|i| i.scale).collect(),
        });
    }
    (out, truncated)
}
