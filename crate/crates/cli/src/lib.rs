//! HTTP service exposing a live embedding model for search, visualization
//! data and interactive refitting.

pub mod config;
pub mod error;
pub mod routes;
pub mod state;

pub use config::ServiceConfig;
pub use error::{ApiError, ErrorCode};
pub use routes::router;
pub use state::AppState;
