use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions {width}x{height}: {reason}")]
    Dimension {
        width: usize,
        height: usize,
        reason: &'static str,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("no licence plate candidate found")]
    NoPlateFound,

    #[error("plate raster has no foreground after thresholding")]
    EmptyPlate,

    #[error("no character survived segmentation")]
    NoCharacters,

    #[error("glyph {index} has no ink pixels")]
    EmptyGlyph { index: usize },

    #[error("template set has no template for symbol '{0}'")]
    MissingSymbol(char),

    #[error("invalid template set: {0}")]
    InvalidTemplates(String),

    #[error("cannot read {path}: {reason}")]
    UnreadableFile { path: PathBuf, reason: String },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parameter(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}
