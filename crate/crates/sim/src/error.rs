use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Core(#[from] gvif_core::Error),

    #[error("{stage} failed: {source}")]
    Stage { stage: &'static str, source: gvif_core::Error },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error("payload section {section} failed its checksum")]
    Checksum { section: &'static str },

    #[error("config line {line}: {detail}")]
    Config { line: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, SimError>;

pub(crate) fn format_err(what: &'static str, detail: impl Into<String>) -> SimError {
    SimError::Format { what, detail: detail.into() }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> SimError {
    let path = path.into();
    move |source| SimError::Io { path, source }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for gvif_core::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|source| SimError::Stage { stage, source })
    }
}
