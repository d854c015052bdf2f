//! Error type shared by the whole pipeline.

use std::path::PathBuf;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Image byte stream could not be decoded.
    #[error("image decode failed: {0}")]
    ImageDecode(String),

    /// The byte stream is not in a format this crate reads.
    #[error("unsupported image format: {0}")]
    UnsupportedImageFormat(String),

    /// A domain type invariant was violated (bad step function, bad range, ...).
    #[error("invalid {what}: {why}")]
    Invalid { what: &'static str, why: String },

    /// Region expression failed to parse. `pos` is a byte offset into the input.
    #[error("region parse error at position {pos}: {msg}")]
    RegionParse { pos: usize, msg: String },

    /// Meshing produced no geometry (everything clipped away or zero-height).
    #[error("empty solid: {0}")]
    EmptySolid(String),

    /// A shell handed to the assembler failed validation.
    #[error("shell {shell:?} is not watertight: {why}")]
    ShellNotWatertight { shell: String, why: String },

    /// STL stream is malformed. `offset` is a byte offset (binary) or line (ASCII).
    #[error("stl parse error at {unit} {offset}: {msg}")]
    StlParse {
        unit: &'static str,
        offset: usize,
        msg: String,
    },

    /// Triangle count does not fit the binary STL 32-bit count field.
    #[error("triangle count {0} exceeds the binary STL limit")]
    StlTooLarge(usize),

    /// Pipeline configuration is invalid. `layer` names the offending layer when known.
    #[error("config error{}: {msg}", layer.as_ref().map(|l| format!(" in layer {l:?}")).unwrap_or_default())]
    Config { layer: Option<String>, msg: String },

    /// Refusing to overwrite an existing output file.
    #[error("refusing to overwrite {0}; pass --overwrite")]
    WouldOverwrite(PathBuf),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn invalid(what: &'static str, why: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            why: why.into(),
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config {
            layer: None,
            msg: msg.into(),
        }
    }

    pub fn config_in_layer(layer: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            layer: Some(layer.into()),
            msg: msg.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
