use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::corpus::{Mode, FEATURE_COUNT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    /// Two-pass LSTM encoder with an attentional decoder.
    Arnn,
    /// Elman network.
    Rnn,
    /// Jordan network (previous output fed back).
    Jrnn,
    Lstm,
    BiRnn,
    BiLstm,
}

impl Architecture {
    pub const ALL: [Architecture; 6] = [
        Architecture::Arnn,
        Architecture::Rnn,
        Architecture::Jrnn,
        Architecture::Lstm,
        Architecture::BiRnn,
        Architecture::BiLstm,
    ];

    pub fn cell(self) -> Cell {
        match self {
            Architecture::Rnn | Architecture::BiRnn => Cell::Elman,
            Architecture::Jrnn => Cell::Jordan,
            Architecture::Arnn | Architecture::Lstm | Architecture::BiLstm => Cell::Lstm,
        }
    }

    pub fn default_bidirectional(self) -> bool {
        matches!(self, Architecture::Arnn | Architecture::BiRnn | Architecture::BiLstm)
    }

    /// Baselines: window 1 (d = 0) when bidirectional, 3 (d = 1) otherwise.
    pub fn default_window(self) -> usize {
        match self {
            Architecture::BiRnn | Architecture::BiLstm | Architecture::Arnn => 0,
            _ => 1,
        }
    }
}

impl FromStr for Architecture {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "arnn" => Ok(Architecture::Arnn),
            "rnn" | "elman" => Ok(Architecture::Rnn),
            "jrnn" | "jordan" => Ok(Architecture::Jrnn),
            "lstm" => Ok(Architecture::Lstm),
            "birnn" => Ok(Architecture::BiRnn),
            "bilstm" => Ok(Architecture::BiLstm),
            _ => Err(ModelError::Config(format!("unknown architecture {s:?}"))),
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Architecture::Arnn => "arnn",
            Architecture::Rnn => "rnn",
            Architecture::Jrnn => "jrnn",
            Architecture::Lstm => "lstm",
            Architecture::BiRnn => "birnn",
            Architecture::BiLstm => "bilstm",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cell {
    Elman,
    Jordan,
    Lstm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub architecture: Architecture,
    pub bidirectional: bool,
    pub hidden_size: usize,
    /// Context-window radius `d`; the window holds `2d + 1` tokens.
    pub window: usize,
    pub embedding_dim: usize,
    pub dropout_keep: f64,
    pub use_features: bool,
    /// Width of the per-token feature vector (14, or 17 with PRED tags).
    pub feature_dim: usize,
    pub mode: Mode,
    /// Output width of the attention projection; defaults to the hidden-state width.
    #[serde(default)]
    pub attention_size: Option<usize>,
    /// Appends `h_n` to every decoder input (ARNN only).
    #[serde(default)]
    pub append_last_state: bool,
    #[serde(default)]
    pub freeze_embeddings: bool,
}

impl ModelConfig {
    pub fn new(architecture: Architecture, mode: Mode) -> Self {
        ModelConfig {
            architecture,
            bidirectional: architecture.default_bidirectional(),
            hidden_size: 100,
            window: architecture.default_window(),
            embedding_dim: 50,
            dropout_keep: 1.0,
            use_features: false,
            feature_dim: FEATURE_COUNT,
            mode,
            attention_size: None,
            append_last_state: false,
            freeze_embeddings: false,
        }
    }

    pub fn cell(&self) -> Cell {
        self.architecture.cell()
    }

    pub fn directions(&self) -> usize {
        if self.bidirectional {
            2
        } else {
            1
        }
    }

    /// Width of `h_i` after direction concatenation.
    pub fn state_size(&self) -> usize {
        self.hidden_size * self.directions()
    }

    pub fn input_size(&self) -> usize {
        (2 * self.window + 1) * self.embedding_dim
    }

    pub fn feature_width(&self) -> usize {
        if self.use_features {
            self.feature_dim
        } else {
            0
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        use Architecture::*;
        match (self.architecture, self.bidirectional) {
            (Jrnn, true) => {
                return Err(ModelError::Config(
                    "the Jordan network feeds back its previous output, which is only available \
                     left-to-right; use --arch jrnn without --bidirectional"
                        .into(),
                ))
            }
            (Rnn, true) | (Lstm, true) => {
                return Err(ModelError::Config(format!(
                    "{} is unidirectional; use bi{} for the bidirectional variant",
                    self.architecture, self.architecture
                )))
            }
            (BiRnn, false) | (BiLstm, false) => {
                return Err(ModelError::Config(format!(
                    "{} is bidirectional by definition",
                    self.architecture
                )))
            }
            _ => {}
        }
        if self.hidden_size == 0 || self.embedding_dim == 0 {
            return Err(ModelError::Config("hidden and embedding sizes must be positive".into()));
        }
        if !(self.dropout_keep > 0.0 && self.dropout_keep <= 1.0) {
            return Err(ModelError::Config(format!(
                "dropout keep probability must be in (0, 1], got {}",
                self.dropout_keep
            )));
        }
        if self.use_features && self.feature_dim == 0 {
            return Err(ModelError::Config("feature width must be positive".into()));
        }
        if self.attention_size == Some(0) {
            return Err(ModelError::Config("attention size must be positive".into()));
        }
        if self.append_last_state && self.architecture != Arnn {
            return Err(ModelError::Config("append_last_state applies to arnn only".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jordan_rejects_bidirectional() {
        let mut c = ModelConfig::new(Architecture::Jrnn, Mode::Ae);
        c.bidirectional = true;
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("Jordan"), "{msg}");
    }

    #[test]
    fn defaults_are_valid() {
        for a in Architecture::ALL {
            ModelConfig::new(a, Mode::Aesc).validate().unwrap();
        }
        assert_eq!(Architecture::Arnn.cell(), Cell::Lstm);
        assert_eq!(Architecture::Lstm.default_window(), 1);
        assert_eq!(Architecture::BiLstm.default_window(), 0);
    }

    #[test]
    fn dropout_range() {
        let mut c = ModelConfig::new(Architecture::Arnn, Mode::Ae);
        c.dropout_keep = 0.0;
        assert!(c.validate().is_err());
    }
}
