//! HTTP service and command line over the museum core: scene and asset
//! delivery, live game sessions with write-ahead logs, and the evaluation
//! statistics.

pub mod app;
pub mod cli;
pub mod report;
pub mod store;

pub use app::{router, ApiError, AppState, StartError, IDEMPOTENCY_HEADER, VERSION_HEADER};
pub use store::{RestoreReport, SessionStore};
