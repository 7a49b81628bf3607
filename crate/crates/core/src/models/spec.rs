use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::graph::{Normalization, SkeletonGraph};
use crate::error::{Error, Result};

pub const ENCODER_LAYERS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TransformerSpec {
    pub heads: usize,
    /// Latent width.
    pub d_l: usize,
    /// Feed-forward width.
    pub d_f: usize,
    pub layers: usize,
}

impl TransformerSpec {
    pub fn new(heads: usize, d_l: usize, d_f: usize) -> Self {
        Self {
            heads,
            d_l,
            d_f,
            layers: ENCODER_LAYERS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.heads == 0 || self.d_l == 0 || self.d_f == 0 || self.layers == 0 {
            return Err(Error::InvalidConfig(format!(
                "transformer {self}: sizes must be positive"
            )));
        }
        if !self.d_l.is_multiple_of(self.heads) {
            return Err(Error::InvalidConfig(format!(
                "transformer {self}: d_l {} not divisible by {} heads",
                self.d_l, self.heads
            )));
        }
        Ok(())
    }

    pub fn grid() -> Vec<TransformerSpec> {
        [
            (2, 32, 64),
            (2, 64, 128),
            (4, 64, 128),
            (4, 128, 256),
            (8, 128, 256),
            (8, 256, 512),
        ]
        .into_iter()
        .map(|(h, l, f)| Self::new(h, l, f))
        .collect()
    }
}

impl fmt::Display for TransformerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.heads, self.d_l, self.d_f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GnnGruSpec {
    pub gnn_layers: usize,
    pub hidden_units: usize,
}

impl GnnGruSpec {
    pub fn new(gnn_layers: usize, hidden_units: usize) -> Self {
        Self {
            gnn_layers,
            hidden_units,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gnn_layers == 0 || self.hidden_units == 0 {
            return Err(Error::InvalidConfig(format!("gnn_gru {self}: sizes must be positive")));
        }
        Ok(())
    }

    pub fn grid() -> Vec<GnnGruSpec> {
        [(2, 32), (2, 64), (2, 128), (3, 32), (3, 64), (3, 128)]
            .into_iter()
            .map(|(l, h)| Self::new(l, h))
            .collect()
    }
}

impl fmt::Display for GnnGruSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.gnn_layers, self.hidden_units)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    Transformer(TransformerSpec),
    GnnGru(GnnGruSpec),
}

impl ModelSpec {
    /// The twelve candidate configurations, transformers first.
    pub fn grid() -> Vec<ModelSpec> {
        TransformerSpec::grid()
            .into_iter()
            .map(ModelSpec::Transformer)
            .chain(GnnGruSpec::grid().into_iter().map(ModelSpec::GnnGru))
            .collect()
    }

    pub fn family(&self) -> &'static str {
        match self {
            ModelSpec::Transformer(_) => "transformer",
            ModelSpec::GnnGru(_) => "gnn_gru",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Transformer(s) => s.validate(),
            ModelSpec::GnnGru(s) => s.validate(),
        }
    }

    /// Parses a `;`-separated list of specs, or `all`.
    pub fn parse_grid(text: &str) -> Result<Vec<ModelSpec>> {
        let text = text.trim();
        if text == "all" {
            return Ok(Self::grid());
        }
        text.split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Transformer(s) => write!(f, "transformer:{},{},{}", s.heads, s.d_l, s.d_f),
            ModelSpec::GnnGru(s) => write!(f, "gnn_gru:{},{}", s.gnn_layers, s.hidden_units),
        }
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    /// `transformer:H,DL,DF` or `gnn_gru:L,HIDDEN`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::InvalidConfig(format!(
                "model spec `{s}`; expected transformer:H,DL,DF or gnn_gru:L,HIDDEN"
            ))
        };
        let (family, args) = s.split_once(':').ok_or_else(bad)?;
        let nums = args
            .split(',')
            .map(|v| v.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        let spec = match (family.trim(), nums.as_slice()) {
            ("transformer", [h, l, f]) => ModelSpec::Transformer(TransformerSpec::new(*h, *l, *f)),
            ("gnn_gru", [l, h]) => ModelSpec::GnnGru(GnnGruSpec::new(*l, *h)),
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    #[default]
    Mean,
    LastFrame,
}

/// Architecture choices that are not part of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOptions {
    pub pooling: Pooling,
    pub positional_encoding: bool,
    pub graph: SkeletonGraph,
    pub normalization: Normalization,
    /// Test hook: pins the GRU update gate at 0 and the reset gate at 1.
    #[serde(skip)]
    pub gates_open: bool,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            pooling: Pooling::Mean,
            positional_encoding: true,
            graph: SkeletonGraph::default(),
            normalization: Normalization::Symmetric,
            gates_open: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_has_twelve_valid_rows() {
        let g = ModelSpec::grid();
        assert_eq!(g.len(), 12);
        assert!(g.iter().all(|s| s.validate().is_ok()));
    }

    #[test]
    fn specs_round_trip_through_text() {
        for s in ModelSpec::grid() {
            assert_eq!(s.to_string().parse::<ModelSpec>().unwrap(), s);
        }
        assert_eq!(
            ModelSpec::parse_grid("transformer:4,64,128").unwrap(),
            vec![ModelSpec::Transformer(TransformerSpec::new(4, 64, 128))]
        );
    }

    #[test]
    fn indivisible_heads_are_rejected() {
        assert!("transformer:3,64,128".parse::<ModelSpec>().is_err());
        assert!("lstm:2,3".parse::<ModelSpec>().is_err());
    }
}
