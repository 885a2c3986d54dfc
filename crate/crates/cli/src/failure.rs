use std::fmt::Display;

pub const USAGE: u8 = 1;
const INPUT: u8 = 2;
const INVARIANT: u8 = 3;

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(e: impl Into<anyhow::Error>) -> Self {
        Self { code: USAGE, error: e.into() }
    }

    pub fn input(e: impl Into<anyhow::Error>) -> Self {
        Self { code: INPUT, error: e.into() }
    }

    pub fn invariant(e: impl Into<anyhow::Error>) -> Self {
        Self { code: INVARIANT, error: e.into() }
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

/// Attaches context and an exit status to a fallible step.
pub trait OrExit<T> {
    fn or_input<C: Display + Send + Sync + 'static>(self, context: C) -> CmdResult<T>;
}

impl<T, E: Into<anyhow::Error>> OrExit<T> for Result<T, E> {
    fn or_input<C: Display + Send + Sync + 'static>(self, context: C) -> CmdResult<T> {
        self.map_err(|e| Failure::input(e.into().context(context)))
    }
}
