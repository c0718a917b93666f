use qnd_core::Error;

/// A failed command: message plus process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub type Outcome<T> = std::result::Result<T, Failure>;

pub const CONFIG: u8 = 2;
pub const DATA: u8 = 3;
pub const NUMERICAL: u8 = 4;

impl Failure {
    pub fn config(message: impl ToString) -> Self {
        Failure { code: CONFIG, message: message.to_string() }
    }

    pub fn data(message: impl ToString) -> Self {
        Failure { code: DATA, message: message.to_string() }
    }

    /// Invalid fit input is bad data rather than a bad configuration.
    pub fn from_fit_input(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) => Failure::data(e),
            other => other.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidParameter(_) => CONFIG,
            Error::Numerical(_) | Error::DegenerateObservation { .. } => NUMERICAL,
            _ => DATA,
        };
        Failure { code, message: e.to_string() }
    }
}
