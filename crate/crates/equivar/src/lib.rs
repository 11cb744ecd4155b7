//! File formats and the command-line front end over `equivar-core`.

pub mod cli;
pub mod io;

use std::path::Path;

use equivar_core::{Error, Model, ModelName};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    /// 2 for bad input, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(
                Error::Parse { .. }
                | Error::InvalidTree(_)
                | Error::InvalidSplit(_)
                | Error::InvalidPermutation(_)
                | Error::InvalidCharacterTable(_),
            ) => 2,
            _ => 1,
        }
    }
}

/// A built-in model by (case-insensitive) name, or a custom group file when
/// the name is `custom`.
pub fn resolve_model(name: &str, group: Option<&Path>) -> Result<Model, CliError> {
    if name.eq_ignore_ascii_case("custom") {
        let path = group.ok_or_else(|| CliError::Usage("--model custom needs --group FILE".into()))?;
        return io::read_json::<io::CustomGroupJson>(path)?.to_model();
    }
    let parsed: ModelName = name
        .parse()
        .map_err(|_| CliError::Usage(format!("unknown model {name:?} (expected GMM, JC, K2, K3, SS or custom)")))?;
    Ok(Model::builtin(parsed))
}
