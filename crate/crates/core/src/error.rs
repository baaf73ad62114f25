use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },

    #[error("expression is not a Laurent polynomial in {var}: offending factor `{factor}`")]
    NotLaurent { var: String, factor: String },

    #[error("unbound symbol `{0}`")]
    Unbound(String),

    #[error("pole or domain error in `{0}`")]
    Pole(String),

    #[error("non-finite value while evaluating `{0}`")]
    NonFinite(String),

    #[error("function `{name}` expects {expected} argument(s), found {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("all sample points were rejected ({attempts} attempts); sampling box is too close to singularities")]
    SamplingStarved { attempts: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("coefficient k(x) vanishes identically")]
    ZeroCoefficient,

    #[error("division by an identically vanishing expression: {0}")]
    DivisionByZero(String),

    #[error("singular coefficient at {var} = {at}: {detail}")]
    SingularCoefficient { var: &'static str, at: f64, detail: String },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("solution blow-up at t = {t} (|y| = {magnitude:e})")]
    BlowUp { t: f64, magnitude: f64 },

    #[error("characteristics cross at or before t = {t}")]
    CharacteristicCrossing { t: f64 },

    #[error("characteristics leave the sampling corridor at t = {t}: covered [{lo}, {hi}]")]
    CorridorExit { t: f64, lo: f64, hi: f64 },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
