use std::fmt;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const INTERNAL: u8 = 1;
    pub const BAD_INPUT: u8 = 2;
    pub const PARTIAL_FAILURE: u8 = 3;
    pub const RENDERER_MISSING: u8 = 4;
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub source: anyhow::Error,
}

impl CliError {
    pub fn bad_input(e: impl Into<anyhow::Error>) -> Self {
        Self {
            code: exit::BAD_INPUT,
            source: e.into(),
        }
    }

    pub fn renderer_missing(e: impl Into<anyhow::Error>) -> Self {
        Self {
            code: exit::RENDERER_MISSING,
            source: e.into(),
        }
    }

    pub fn internal(e: impl Into<anyhow::Error>) -> Self {
        Self {
            code: exit::INTERNAL,
            source: e.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.source)
    }
}
