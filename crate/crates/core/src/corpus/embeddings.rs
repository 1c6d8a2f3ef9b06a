use std::collections::HashMap;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::numkernel::Tensor;

pub const PAD_ROW: usize = 0;
pub const UNK_ROW: usize = 1;
pub const PAD_TOKEN: &str = "<PAD>";
pub const UNK_TOKEN: &str = "<UNK>";

/// Range of the uniform initializer for UNK and randomly initialized rows.
pub const INIT_RANGE: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbeddingFormat {
    /// `count dim` header, then `word v1 .. vd` per line.
    Word2vecText,
    /// Headerless `word v1 .. vd` lines.
    GloveText,
}

impl FromStr for EmbeddingFormat {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "word2vec-text" | "word2vec" => Ok(EmbeddingFormat::Word2vecText),
            "glove-text" | "glove" => Ok(EmbeddingFormat::GloveText),
            _ => Err(CorpusError::EmbeddingFormat {
                line: 0,
                message: format!("unknown embedding format {s:?}"),
            }),
        }
    }
}

/// Word → row mapping with the two reserved rows first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    pub fn from_words(words: Vec<String>) -> Self {
        let index = words
            .iter()
            .enumerate()
            .skip(2)
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Vocab { words, index }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Exact match, then lowercase, then [`UNK_ROW`].
    pub fn lookup(&self, word: &str) -> usize {
        if let Some(&i) = self.index.get(word) {
            return i;
        }
        self.index.get(&word.to_lowercase()).copied().unwrap_or(UNK_ROW)
    }
}

/// Word vectors with two reserved rows: [`PAD_ROW`] (zeros) and [`UNK_ROW`].
#[derive(Clone, Debug)]
pub struct EmbeddingTable {
    vocab: Vocab,
    matrix: Tensor,
    pub warnings: Vec<String>,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    /// Number of rows including the two specials.
    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.len() <= 2
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn matrix(&self) -> &Tensor {
        &self.matrix
    }

    pub fn into_parts(self) -> (Vocab, Tensor) {
        (self.vocab, self.matrix)
    }

    pub fn lookup(&self, word: &str) -> usize {
        self.vocab.lookup(word)
    }

    pub fn vector(&self, word: &str) -> &[f64] {
        self.matrix.row(self.lookup(word))
    }

    /// Rebuilds a table from a saved vocabulary and matrix.
    pub fn from_parts(words: Vec<String>, matrix: Tensor) -> Result<Self, CorpusError> {
        if words.len() != matrix.rows() || words.len() < 2 {
            return Err(CorpusError::EmbeddingFormat {
                line: 0,
                message: format!("{} words for {} rows", words.len(), matrix.rows()),
            });
        }
        Ok(EmbeddingTable {
            vocab: Vocab::from_words(words),
            matrix,
            warnings: Vec::new(),
        })
    }

    /// Randomly initialized table over `vocab` (duplicates ignored).
    pub fn random<'a, R: Rng>(
        vocab: impl IntoIterator<Item = &'a str>,
        dim: usize,
        rng: &mut R,
    ) -> Self {
        let mut words = vec![PAD_TOKEN.to_string(), UNK_TOKEN.to_string()];
        let mut index = HashMap::new();
        for w in vocab {
            if !index.contains_key(w) {
                index.insert(w.to_string(), words.len());
                words.push(w.to_string());
            }
        }
        let mut data = vec![0.0; dim];
        data.extend((dim..words.len() * dim).map(|_| rng.gen_range(-INIT_RANGE..=INIT_RANGE)));
        let matrix = Tensor::new(vec![words.len(), dim], data).expect("dim > 0");
        EmbeddingTable {
            vocab: Vocab { words, index },
            matrix,
            warnings: Vec::new(),
        }
    }
}

pub fn load_embeddings<R: Rng>(
    bytes: &[u8],
    format: EmbeddingFormat,
    rng: &mut R,
) -> Result<EmbeddingTable, CorpusError> {
    let text = std::str::from_utf8(bytes).map_err(|e| CorpusError::EmbeddingFormat {
        line: 0,
        message: format!("not UTF-8 (byte {})", e.valid_up_to()),
    })?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let mut warnings = Vec::new();

    let mut declared: Option<(usize, usize)> = None;
    if format == EmbeddingFormat::Word2vecText {
        let (n, header) = lines.next().ok_or_else(|| CorpusError::EmbeddingFormat {
            line: 1,
            message: "missing `count dim` header".into(),
        })?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| CorpusError::EmbeddingFormat {
                line: n + 1,
                message: "header must be `count dim`".into(),
            })?;
        match nums.as_slice() {
            [count, dim] if *dim > 0 => declared = Some((*count, *dim)),
            _ => {
                return Err(CorpusError::EmbeddingFormat {
                    line: n + 1,
                    message: "header must be `count dim`".into(),
                })
            }
        }
    }

    let mut dim = declared.map(|d| d.1);
    let mut words = vec![PAD_TOKEN.to_string(), UNK_TOKEN.to_string()];
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (n, line) in lines {
        let mut fields = line.split_whitespace();
        let word = fields.next().unwrap();
        let values: Vec<f64> = fields
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| CorpusError::EmbeddingFormat {
                line: n + 1,
                message: format!("non-numeric component for {word:?}"),
            })?;
        let d = *dim.get_or_insert(values.len());
        if values.len() != d || d == 0 {
            return Err(CorpusError::EmbeddingFormat {
                line: n + 1,
                message: format!("{word:?} has {} components, expected {d}", values.len()),
            });
        }
        if let Some(&row) = index.get(word) {
            warnings.push(format!("line {}: duplicate word {word:?}, last occurrence wins", n + 1));
            rows[row - 2] = values;
        } else {
            index.insert(word.to_string(), words.len());
            words.push(word.to_string());
            rows.push(values);
        }
    }
    let dim = dim.ok_or_else(|| CorpusError::EmbeddingFormat {
        line: 0,
        message: "no vectors".into(),
    })?;
    if let Some((count, _)) = declared {
        if count != rows.len() {
            warnings.push(format!("header declares {count} words, found {}", rows.len()));
        }
    }

    let mut data = vec![0.0; dim];
    data.extend((0..dim).map(|_| rng.gen_range(-INIT_RANGE..=INIT_RANGE)));
    for r in rows {
        data.extend(r);
    }
    let matrix = Tensor::new(vec![words.len(), dim], data).expect("dim > 0");
    for w in &warnings {
        log::warn!("embeddings: {w}");
    }
    Ok(EmbeddingTable {
        vocab: Vocab { words, index },
        matrix,
        warnings,
    })
}
