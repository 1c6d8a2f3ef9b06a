//! The full tagger: embeddings, encoder and output head behind one type,
//! plus checkpoint (de)serialization.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    attention_scores, baseline_output, context_vector, decode_step, encode_bidirectional,
    jordan_step, BaselineVars, Cell, CellParams, ModelConfig, ModelError,
};
use crate::corpus::{
    encode_tags, pred_iob_bits, window_rows, EmbeddingTable, FeatureTable, LabelId, Sentence,
    TagScheme, Vocab, FEATURE_COUNT, PRED_IOB_WIDTH,
};
use crate::numkernel::{Archive, ParamId, ParamSet, Tape, Tensor, Var};

/// One sentence prepared for the network.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    /// Embedding rows, one per token.
    pub ids: Vec<usize>,
    /// `n × feature_dim`, present when the model uses features.
    pub features: Option<Tensor>,
    pub labels: Vec<LabelId>,
    /// Multiplier on the looked-up embedding vectors (WEIGHTED adaptation).
    pub scale: f64,
}

impl Instance {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Keeps the first `max` tokens.
    pub fn truncate(&mut self, max: usize) {
        if self.ids.len() <= max {
            return;
        }
        self.ids.truncate(max);
        self.labels.truncate(max.min(self.labels.len()));
        if let Some(f) = &self.features {
            let cols = f.cols();
            let data = f.data()[..max * cols].to_vec();
            self.features = Some(Tensor::new(vec![max, cols], data).expect("prefix of a matrix"));
        }
    }
}

/// Source of the previous-label input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Feedback {
    /// Gold one-hot labels (teacher forcing).
    Gold,
    /// The model's own argmax from the previous position.
    Greedy,
}

#[derive(Clone, Debug)]
pub struct Forward {
    /// `n × L` label distributions.
    pub probs: Var,
    /// Encoder states after dropout, `n × state_size`.
    pub states: Var,
    /// `n × n` attention weights (ARNN only).
    pub attention: Option<Var>,
    pub predicted: Vec<LabelId>,
}

#[derive(Clone, Debug)]
enum Head {
    Attention {
        w_alpha: ParamId,
        v: ParamId,
        w_s: ParamId,
    },
    Baseline {
        u_fwd: ParamId,
        u_bwd: Option<ParamId>,
        u_feat: Option<ParamId>,
        b: ParamId,
    },
}

#[derive(Clone, Debug)]
struct Layout {
    embedding: ParamId,
    fwd: CellParams,
    bwd: Option<CellParams>,
    head: Head,
}

#[derive(Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    labels: Vec<String>,
    vocab: Vec<String>,
    feature_table: FeatureTable,
}

#[derive(Clone, Debug)]
pub struct Model {
    config: ModelConfig,
    scheme: TagScheme,
    vocab: Vocab,
    feature_table: FeatureTable,
    params: ParamSet,
    layout: Layout,
}

fn cell_params<R: Rng>(
    ps: &mut ParamSet,
    rng: &mut R,
    prefix: &str,
    input: usize,
    recurrent: usize,
    out: usize,
) -> CellParams {
    CellParams {
        w: ps.add_uniform(format!("{prefix}.w"), input, out, rng),
        u: ps.add_uniform(format!("{prefix}.u"), recurrent, out, rng),
        b: ps.add(format!("{prefix}.b"), Tensor::zeros(1, out)),
    }
}

fn one_hot_rows(ids: impl Iterator<Item = usize>, n: usize, width: usize) -> Tensor {
    let mut t = Tensor::zeros(n, width);
    for (r, id) in ids.enumerate() {
        t.set(r, id, 1.0);
    }
    t
}

impl Model {
    /// Fresh model with embeddings taken from `embeddings` and all other
    /// weights drawn from `rng`.
    pub fn new<R: Rng>(
        config: ModelConfig,
        embeddings: EmbeddingTable,
        feature_table: FeatureTable,
        rng: &mut R,
    ) -> Result<Self, ModelError> {
        config.validate()?;
        if embeddings.dim() != config.embedding_dim {
            return Err(ModelError::Config(format!(
                "embeddings have dimension {}, config says {}",
                embeddings.dim(),
                config.embedding_dim
            )));
        }
        if config.use_features && ![FEATURE_COUNT, FEATURE_COUNT + PRED_IOB_WIDTH].contains(&config.feature_dim) {
            return Err(ModelError::Config(format!(
                "feature width must be {FEATURE_COUNT} or {}, got {}",
                FEATURE_COUNT + PRED_IOB_WIDTH,
                config.feature_dim
            )));
        }
        feature_table.validate()?;
        let scheme = TagScheme::new(config.mode);
        let (vocab, matrix) = embeddings.into_parts();
        let (params, layout) = Self::build(&config, scheme.len(), matrix, rng);
        Ok(Model {
            config,
            scheme,
            vocab,
            feature_table,
            params,
            layout,
        })
    }

    fn build<R: Rng>(config: &ModelConfig, labels: usize, embedding: Tensor, rng: &mut R) -> (ParamSet, Layout) {
        let mut ps = ParamSet::new();
        let emb = ps.add("embedding", embedding);
        ps.get_mut(emb).trainable = !config.freeze_embeddings;

        let hs = config.hidden_size;
        let input = config.input_size();
        let out = if config.cell() == Cell::Lstm { 4 * hs } else { hs };
        let recurrent = if config.cell() == Cell::Jordan { labels + 1 } else { hs };
        let fwd = cell_params(&mut ps, rng, "fwd", input, recurrent, out);
        let bwd = config
            .bidirectional
            .then(|| cell_params(&mut ps, rng, "bwd", input, recurrent, out));

        let state = config.state_size();
        let feats = config.feature_width();
        let head = if config.architecture == super::Architecture::Arnn {
            let a = config.attention_size.unwrap_or(state);
            let last = if config.append_last_state { state } else { 0 };
            Head::Attention {
                w_alpha: ps.add_uniform("attn.w_alpha", 2 * state, a, rng),
                v: ps.add_uniform("attn.v", 1, a, rng),
                w_s: ps.add_uniform("attn.w_s", 2 * state + labels + 1 + feats + last, labels, rng),
            }
        } else {
            Head::Baseline {
                u_fwd: ps.add_uniform("out.u_fwd", hs, labels, rng),
                u_bwd: config
                    .bidirectional
                    .then(|| ps.add_uniform("out.u_bwd", hs, labels, rng)),
                u_feat: (feats > 0).then(|| ps.add_uniform("out.u_feat", feats, labels, rng)),
                b: ps.add("out.b", Tensor::zeros(1, labels)),
            }
        };
        let layout = Layout {
            embedding: emb,
            fwd,
            bwd,
            head,
        };
        (ps, layout)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn scheme(&self) -> &TagScheme {
        &self.scheme
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn feature_table(&self) -> &FeatureTable {
        &self.feature_table
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    /// Parameter IDs multiplying `y_{i-1}` in the decoder (ARNN) or the
    /// recurrence (JRNN), as `(param, first row, end row)`.
    pub fn previous_label_block(&self) -> Option<(ParamId, usize, usize)> {
        let l = self.scheme.len() + 1;
        match (&self.layout.head, self.config.cell()) {
            (Head::Attention { w_s, .. }, _) => {
                let start = 2 * self.config.state_size();
                Some((*w_s, start, start + l))
            }
            (_, Cell::Jordan) => Some((self.layout.fwd.u, 0, l)),
            _ => None,
        }
    }

    /// Converts a sentence using this model's vocabulary, tag scheme and
    /// feature layout.
    pub fn instance(&self, sentence: &Sentence) -> Instance {
        let ids = sentence.tokens.iter().map(|t| self.vocab.lookup(&t.surface)).collect();
        let labels = encode_tags(sentence, &self.scheme).labels;
        let features = self.config.use_features.then(|| {
            let n = sentence.tokens.len();
            let width = self.config.feature_dim;
            let mut data = Vec::with_capacity(n * width);
            for t in &sentence.tokens {
                data.extend(self.feature_table.features(t).to_f64());
                if width > FEATURE_COUNT {
                    data.extend(pred_iob_bits(t).unwrap_or([0.0; PRED_IOB_WIDTH]));
                }
            }
            Tensor::new(vec![n, width], data).unwrap_or_else(|_| Tensor::zeros(0, width))
        });
        Instance {
            ids,
            features,
            labels,
            scale: sentence.weight,
        }
    }

    /// Runs the network over one instance. Returns `None` for an empty
    /// sentence.
    pub fn forward<R: Rng>(
        &self,
        tape: &mut Tape<'_>,
        inst: &Instance,
        training: bool,
        feedback: Feedback,
        rng: &mut R,
    ) -> Result<Option<Forward>, ModelError> {
        let n = inst.len();
        if n == 0 {
            return Ok(None);
        }
        if feedback == Feedback::Gold && inst.labels.len() != n {
            return Err(ModelError::Config(format!(
                "{} gold labels for {n} tokens",
                inst.labels.len()
            )));
        }
        let cfg = &self.config;
        let d = cfg.window;
        let xs = tape.embed_windows(self.layout.embedding, window_rows(&inst.ids, d), 2 * d + 1, inst.scale)?;
        let feats = if cfg.use_features {
            match &inst.features {
                Some(f) if f.rows() == n && f.cols() == cfg.feature_dim => Some(tape.constant(f.clone())),
                _ => {
                    return Err(ModelError::Config(format!(
                        "model expects {n} × {} features",
                        cfg.feature_dim
                    )))
                }
            }
        } else {
            None
        };
        let fwd = self.layout.fwd.on(tape);
        let bwd = self.layout.bwd.map(|b| b.on(tape));
        let labels = self.scheme.len();
        let start = labels;

        if cfg.cell() == Cell::Jordan {
            return self.forward_jordan(tape, inst, xs, feats, &fwd, training, feedback, rng);
        }

        let h = encode_bidirectional(tape, xs, cfg.cell(), &fwd, bwd.as_ref())?;
        let h = tape.dropout(h, cfg.dropout_keep, training, rng)?;
        let hs = cfg.hidden_size;

        match &self.layout.head {
            Head::Baseline { .. } => {
                let out = self.baseline_vars(tape);
                let (hf, hb) = if cfg.bidirectional {
                    (tape.slice_cols(h, 0, hs)?, Some(tape.slice_cols(h, hs, 2 * hs)?))
                } else {
                    (h, None)
                };
                let probs = baseline_output(tape, hf, hb, feats, &out)?;
                let predicted = (0..n).map(|i| tape.value(probs).argmax_row(i)).collect();
                Ok(Some(Forward {
                    probs,
                    states: h,
                    attention: None,
                    predicted,
                }))
            }
            Head::Attention { w_alpha, v, w_s } => {
                let (w_alpha, v, w_s) = (tape.param(*w_alpha), tape.param(*v), tape.param(*w_s));
                let alpha = attention_scores(tape, h, w_alpha, v)?;
                let t = context_vector(tape, alpha, h)?;
                let last = if cfg.append_last_state {
                    let end = tape.row(h, n - 1)?;
                    let mut parts = vec![tape.slice_cols(end, 0, hs)?];
                    if cfg.bidirectional {
                        let first = tape.row(h, 0)?;
                        parts.push(tape.slice_cols(first, hs, 2 * hs)?);
                    }
                    Some(tape.concat_cols(&parts)?)
                } else {
                    None
                };
                let (probs, predicted) = match feedback {
                    Feedback::Gold => {
                        let prev = one_hot_rows(
                            std::iter::once(start).chain(inst.labels[..n - 1].iter().copied()),
                            n,
                            labels + 1,
                        );
                        let y_prev = tape.constant(prev);
                        let mut extra = Vec::new();
                        extra.extend(feats);
                        if let Some(last) = last {
                            extra.push(tape.concat_rows(&vec![last; n])?);
                        }
                        let probs = decode_step(tape, h, t, y_prev, &extra, w_s)?;
                        let predicted = (0..n).map(|i| tape.value(probs).argmax_row(i)).collect();
                        (probs, predicted)
                    }
                    Feedback::Greedy => {
                        let mut prev = start;
                        let mut rows = Vec::with_capacity(n);
                        let mut predicted = Vec::with_capacity(n);
                        for i in 0..n {
                            let hi = tape.row(h, i)?;
                            let ti = tape.row(t, i)?;
                            let y_prev = tape.constant(one_hot_rows(std::iter::once(prev), 1, labels + 1));
                            let mut extra = Vec::new();
                            if let Some(f) = feats {
                                extra.push(tape.row(f, i)?);
                            }
                            extra.extend(last);
                            let p = decode_step(tape, hi, ti, y_prev, &extra, w_s)?;
                            prev = tape.value(p).argmax_row(0);
                            predicted.push(prev);
                            rows.push(p);
                        }
                        (tape.concat_rows(&rows)?, predicted)
                    }
                };
                Ok(Some(Forward {
                    probs,
                    states: h,
                    attention: Some(alpha),
                    predicted,
                }))
            }
        }
    }

    fn baseline_vars(&self, tape: &mut Tape<'_>) -> BaselineVars {
        match &self.layout.head {
            Head::Baseline { u_fwd, u_bwd, u_feat, b } => BaselineVars {
                u_fwd: tape.param(*u_fwd),
                u_bwd: u_bwd.map(|u| tape.param(u)),
                u_feat: u_feat.map(|u| tape.param(u)),
                bias: tape.param(*b),
            },
            Head::Attention { .. } => unreachable!("baseline head requested on an attention model"),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn forward_jordan<R: Rng>(
        &self,
        tape: &mut Tape<'_>,
        inst: &Instance,
        xs: Var,
        feats: Option<Var>,
        p: &super::CellVars,
        training: bool,
        feedback: Feedback,
        rng: &mut R,
    ) -> Result<Option<Forward>, ModelError> {
        let n = inst.len();
        let labels = self.scheme.len();
        let keep = self.config.dropout_keep;
        let out = self.baseline_vars(tape);
        match feedback {
            Feedback::Gold => {
                let prev = one_hot_rows(
                    std::iter::once(labels).chain(inst.labels[..n - 1].iter().copied()),
                    n,
                    labels + 1,
                );
                let y_prev = tape.constant(prev);
                let xw = tape.matmul(xs, p.w)?;
                let yu = tape.matmul(y_prev, p.u)?;
                let z = tape.add(xw, yu)?;
                let z = tape.add_row(z, p.b)?;
                let h = tape.sigmoid(z);
                let h = tape.dropout(h, keep, training, rng)?;
                let probs = baseline_output(tape, h, None, feats, &out)?;
                let predicted = (0..n).map(|i| tape.value(probs).argmax_row(i)).collect();
                Ok(Some(Forward {
                    probs,
                    states: h,
                    attention: None,
                    predicted,
                }))
            }
            Feedback::Greedy => {
                let mut prev = labels;
                let (mut states, mut rows, mut predicted) = (Vec::new(), Vec::new(), Vec::new());
                for i in 0..n {
                    let x = tape.row(xs, i)?;
                    let y_prev = tape.constant(one_hot_rows(std::iter::once(prev), 1, labels + 1));
                    let h = jordan_step(tape, x, y_prev, p)?;
                    let h = tape.dropout(h, keep, training, rng)?;
                    let f = match feats {
                        Some(f) => Some(tape.row(f, i)?),
                        None => None,
                    };
                    let y = baseline_output(tape, h, None, f, &out)?;
                    prev = tape.value(y).argmax_row(0);
                    predicted.push(prev);
                    states.push(h);
                    rows.push(y);
                }
                Ok(Some(Forward {
                    probs: tape.concat_rows(&rows)?,
                    states: tape.concat_rows(&states)?,
                    attention: None,
                    predicted,
                }))
            }
        }
    }

    /// Cross-entropy summed over every token of `batch` and divided by the
    /// number of tokens.
    /// `None` when the batch holds no tokens.
    pub fn loss<R: Rng>(
        &self,
        tape: &mut Tape<'_>,
        batch: &[Instance],
        training: bool,
        rng: &mut R,
    ) -> Result<Option<Var>, ModelError> {
        let mut terms = Vec::new();
        let mut tokens = 0;
        for inst in batch {
            let Some(fwd) = self.forward(tape, inst, training, Feedback::Gold, rng)? else {
                continue;
            };
            let ce = tape.cross_entropy_sum(fwd.probs, &inst.labels)?;
            terms.push(ce);
            tokens += inst.len();
        }
        if tokens == 0 {
            return Ok(None);
        }
        let total = tape.sum(&terms)?;
        Ok(Some(tape.scale(total, 1.0 / tokens as f64)))
    }

    /// Label distributions at inference (greedy feedback, no dropout).
    pub fn probabilities(&self, inst: &Instance) -> Result<Tensor, ModelError> {
        let mut tape = Tape::new(&self.params);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        Ok(match self.forward(&mut tape, inst, false, Feedback::Greedy, &mut rng)? {
            Some(f) => tape.value(f.probs).clone(),
            None => Tensor::zeros(0, self.scheme.len()),
        })
    }

    /// Greedy label sequence.
    pub fn predict(&self, inst: &Instance) -> Result<Vec<LabelId>, ModelError> {
        let mut tape = Tape::new(&self.params);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        Ok(self
            .forward(&mut tape, inst, false, Feedback::Greedy, &mut rng)?
            .map(|f| f.predicted)
            .unwrap_or_default())
    }

    pub fn predict_sentence(&self, sentence: &Sentence) -> Result<Vec<LabelId>, ModelError> {
        self.predict(&self.instance(sentence))
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, ModelError> {
        let header = Header {
            config: self.config.clone(),
            labels: self.scheme.labels().to_vec(),
            vocab: self.vocab.words().to_vec(),
            feature_table: self.feature_table.clone(),
        };
        let header = serde_json::to_string(&header).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
        let tensors = self.params.iter().map(|(_, p)| (p.name.clone(), p.value.clone())).collect();
        Ok(Archive { header, tensors }.to_bytes())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModelError> {
        let archive = Archive::from_bytes(bytes)?;
        let header: Header =
            serde_json::from_str(&archive.header).map_err(|e| ModelError::Checkpoint(format!("header: {e}")))?;
        header.config.validate()?;
        let scheme = TagScheme::new(header.config.mode);
        if scheme.labels() != header.labels.as_slice() {
            return Err(ModelError::Checkpoint(format!(
                "label set {:?} does not match mode {}",
                header.labels, header.config.mode
            )));
        }
        let find = |name: &str| {
            archive
                .tensors
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, t)| t)
                .ok_or_else(|| ModelError::Checkpoint(format!("missing tensor {name:?}")))
        };
        let embedding = find("embedding")?.clone();
        if embedding.rows() != header.vocab.len() {
            return Err(ModelError::Checkpoint(format!(
                "{} vocabulary entries for {} embedding rows",
                header.vocab.len(),
                embedding.rows()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (mut params, layout) = Self::build(&header.config, scheme.len(), embedding, &mut rng);
        if archive.tensors.len() != params.len() {
            return Err(ModelError::Checkpoint(format!(
                "{} tensors stored, architecture needs {}",
                archive.tensors.len(),
                params.len()
            )));
        }
        let ids: Vec<ParamId> = params.iter().map(|(id, _)| id).collect();
        for id in ids {
            let name = params.get(id).name.clone();
            let stored = find(&name)?;
            if stored.shape() != params.value(id).shape() {
                return Err(ModelError::Checkpoint(format!(
                    "tensor {name:?} has shape {:?}, expected {:?}",
                    stored.shape(),
                    params.value(id).shape()
                )));
            }
            *params.value_mut(id) = stored.clone();
        }
        Ok(Model {
            config: header.config,
            scheme,
            vocab: Vocab::from_words(header.vocab),
            feature_table: header.feature_table,
            params,
            layout,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_bytes()?)
            .map_err(|e| ModelError::Checkpoint(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let bytes = std::fs::read(path).map_err(|e| ModelError::Checkpoint(format!("{}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }
}
