use leadlag::forecast::ForecastError;
use leadlag::hycorr::HyError;
use leadlag::liquidity::LiquidityError;
use leadlag::network::NetworkError;
use leadlag::response::ResponseError;
use leadlag::simkit::SimError;
use leadlag::tickdata::TickDataError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("data: {0}")]
    Data(String),
    #[error("numerical guard: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<TickDataError> for CliError {
    fn from(e: TickDataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<HyError> for CliError {
    fn from(e: HyError) -> Self {
        match e {
            HyError::InvalidGrid(_) | HyError::InvalidParameter(_) | HyError::UnknownEstimator(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::OverflowGuard(_) => CliError::Numeric(e.to_string()),
            SimError::InvalidConfig(_) | SimError::LagOutOfRange { .. } => CliError::Usage(e.to_string()),
            SimError::EmptyInput => CliError::Data(e.to_string()),
        }
    }
}

impl From<ForecastError> for CliError {
    fn from(e: ForecastError) -> Self {
        match e {
            ForecastError::UnknownForecaster(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ResponseError> for CliError {
    fn from(e: ResponseError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<NetworkError> for CliError {
    fn from(e: NetworkError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<LiquidityError> for CliError {
    fn from(e: LiquidityError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
