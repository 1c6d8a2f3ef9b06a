//! Transfer from a source (SRC) corpus of written reviews to a target (TGT)
//! corpus.
//!
//! * WEIGHTED trains on the union of both corpora, with the embedding
//!   vectors of SRC tokens scaled by `w` at lookup time.
//! * PRED tags TGT with a model trained on SRC (AE mode) and appends the
//!   predicted tag, one-hot, to the linguistic features.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Mode, Polarity, Sentence};
use crate::models::Model;
use crate::training::kfold_split;
use crate::Error;

pub const DEFAULT_WEIGHT: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Weighted,
    Pred,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "weighted" => Ok(Method::Weighted),
            "pred" => Ok(Method::Pred),
            _ => Err(Error::Usage(format!("unknown adaptation method {s:?} (weighted | pred)"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Weighted => "weighted",
            Method::Pred => "pred",
        })
    }
}

/// Sidecar written next to an adapted corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    pub src: String,
    pub tgt: String,
    /// SHA-256 of the source model checkpoint (PRED).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub src_model_sha256: Option<String>,
    pub sentences: usize,
}

fn check_mode(sentences: &[Sentence], mode: Mode, name: &str) -> Result<(), Error> {
    if mode == Mode::Aesc {
        if let Some(s) = sentences.iter().find(|s| s.spans.iter().any(|a| a.polarity == Polarity::None)) {
            return Err(Error::Usage(format!(
                "{name} sentence {} has aspects without polarity and cannot be used for aesc",
                s.source_id
            )));
        }
    }
    Ok(())
}

/// TGT followed by SRC, with every SRC sentence's embedding scale set to `w`.
pub fn weighted_union(src: &[Sentence], tgt: &[Sentence], w: f64, mode: Mode) -> Result<Vec<Sentence>, Error> {
    if !(w > 0.0 && w <= 1.0) {
        return Err(Error::Usage(format!("weight must be in (0, 1], got {w}")));
    }
    check_mode(src, mode, "SRC")?;
    check_mode(tgt, mode, "TGT")?;
    let mut out = tgt.to_vec();
    out.extend(src.iter().cloned().map(|mut s| {
        s.weight = w;
        s
    }));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedFold {
    pub train: Vec<Sentence>,
    pub validation: Vec<Sentence>,
    pub test: Vec<Sentence>,
}

/// k-fold split of TGT in which every fold's training part also receives
/// all of SRC (scaled by `w`), shuffled into the TGT sentences.
pub fn weighted_folds(
    src: &[Sentence],
    tgt: &[Sentence],
    w: f64,
    mode: Mode,
    k: usize,
    val_fraction: f64,
    seed: u64,
) -> Result<Vec<WeightedFold>, Error> {
    let weighted_src = weighted_union(src, &[], w, mode)?;
    check_mode(tgt, mode, "TGT")?;
    let pick = |ids: &[usize]| ids.iter().map(|&i| tgt[i].clone()).collect::<Vec<_>>();
    kfold_split(tgt.len(), k, val_fraction, seed)?
        .into_iter()
        .enumerate()
        .map(|(f, fold)| {
            let mut train = pick(&fold.train);
            train.extend(weighted_src.iter().cloned());
            train.shuffle(&mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(f as u64)));
            Ok(WeightedFold {
                train,
                validation: pick(&fold.validation),
                test: pick(&fold.test),
            })
        })
        .collect()
}

/// Copies of `tgt` whose tokens carry `src_model`'s predicted AE tag in
/// `pred_iob`. Text, tokens and spans are unchanged.
pub fn pred_augment(src_model: &Model, tgt: &[Sentence]) -> Result<Vec<Sentence>, Error> {
    let scheme = src_model.scheme();
    if scheme.mode() != Mode::Ae {
        return Err(Error::Usage(format!(
            "PRED needs a source model trained in ae mode, got {}",
            scheme.mode()
        )));
    }
    tgt.iter()
        .map(|s| {
            let labels = crate::corpus::repair_labels(&src_model.predict_sentence(s)?, scheme).0;
            let mut out = s.clone();
            for (t, l) in out.tokens.iter_mut().zip(labels) {
                t.pred_iob = Some(scheme.label(l).to_string());
            }
            Ok(out)
        })
        .collect()
}
