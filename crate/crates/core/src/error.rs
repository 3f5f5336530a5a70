use thiserror::Error;

/// Errors raised across the simulation, transpilation and training stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("gate operands must be distinct, got {0:?}")]
    DuplicateOperands(Vec<usize>),
    #[error("register size {0} unsupported (allowed 1..={1})")]
    RegisterSize(usize, usize),
    #[error("measurement cannot be applied as a unitary")]
    MeasureNotUnitary,
    #[error("gate after measurement on qubit {0}")]
    GateAfterMeasure(usize),
    #[error("parameter slot {0} is unbound")]
    UnboundSlot(usize),
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("histogram is empty")]
    EmptyHistogram,
    #[error("circuit too large for dense oracle: {n} qubits (max {max})")]
    TooManyQubits { n: usize, max: usize },
    #[error("invalid calibration: {0}")]
    InvalidCalibration(String),
    #[error("invalid device profile: {0}")]
    InvalidProfile(String),
    #[error("coupling graph is disconnected")]
    DisconnectedCoupling,
    #[error("no decomposition rule for gate kind {0}")]
    NoDecomposition(String),
    #[error("gate kind {0} is not in the device basis")]
    NotInBasis(String),
    #[error("circuit uses coupling edge ({0},{1}) absent on device {2}")]
    LayoutMismatch(usize, usize, String),
    #[error("circuit needs {needed} qubits, device {device} has {available}")]
    DeviceTooSmall { needed: usize, available: usize, device: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("fleet error: {0}")]
    Fleet(String),
    #[error("training finished")]
    TrainingFinished,
    #[error("duplicate report for step {step}, term {term:?}")]
    DuplicateReport { step: u64, term: Option<usize> },
    #[error("staleness {observed} exceeds cap {cap}")]
    StalenessExceeded { observed: u64, cap: u64 },
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
