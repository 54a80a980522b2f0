//! HTTP gateway and command-line front end for the design-space engine.

pub mod cli;
pub mod error;
pub mod routes;
pub mod runs;
pub mod state;

pub use error::{ApiError, ErrorCode};
pub use routes::{router, API_PREFIX, ENDPOINTS, SCHEMA_HEADER, SCHEMA_VERSION};
pub use state::{AppState, Shared};
