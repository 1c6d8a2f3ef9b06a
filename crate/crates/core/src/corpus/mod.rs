//! Corpus ingestion and the token-level views used by the models.

mod brat;
mod canonical;
mod embeddings;
mod features;
mod semeval;
mod stats;
mod tags;
mod tokenize;
mod types;
mod window;

pub use brat::{parse_brat, write_brat};
pub use canonical::{read_canonical, write_canonical};
pub use embeddings::{
    load_embeddings, EmbeddingFormat, EmbeddingTable, Vocab, INIT_RANGE, PAD_ROW, PAD_TOKEN, UNK_ROW,
    UNK_TOKEN,
};
pub use features::{
    linguistic_features, pred_iob_bits, FeatureTable, FeatureVector, PosClass, FEATURE_COUNT,
    PRED_IOB_WIDTH,
};
pub use semeval::{parse_semeval_xml, write_semeval_xml};
pub use stats::{corpus_stats, CorpusStats};
pub use tags::{
    decode_tags, decode_token_spans, encode_tags, encode_token_spans, repair_labels, Decoding,
    Encoding, LabelId, Mode, Tag, TagScheme, TokenSpan,
};
pub use tokenize::tokenize;
pub use types::{char_slice, AspectSpan, Polarity, Sentence, Sentiment, Token};
pub use window::{context_window, window_rows};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorpusError {
    #[error("XML parse error at {location}: {message}")]
    Xml { location: String, message: String },
    #[error("sentence {sentence}: {detail}")]
    Alignment { sentence: String, detail: String },
    #[error("sentence {sentence}: spans {first:?} and {second:?} overlap")]
    OverlappingSpans {
        sentence: String,
        first: String,
        second: String,
    },
    #[error("annotation line {line}: {message}")]
    Annotation { line: usize, message: String },
    #[error("annotation line {line}: attribute references unknown span {target}")]
    DanglingReference { line: usize, target: String },
    #[error("embeddings line {line}: {message}")]
    EmbeddingFormat { line: usize, message: String },
    #[error("corpus line {line}: {message}")]
    Json { line: usize, message: String },
    #[error("unknown polarity {0:?}")]
    InvalidPolarity(String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("{labels} labels for {tokens} tokens")]
    LengthMismatch { labels: usize, tokens: usize },
    #[error("feature table: {0}")]
    FeatureTable(String),
}
