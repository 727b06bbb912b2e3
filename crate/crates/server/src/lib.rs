//! HTTP service for elicitation projects: corpus upload, representative
//! sampling, worker sessions with gold-question qualification, knowledge
//! capture, and per-condition model compilation and evaluation.

pub mod error;
pub mod project;
pub mod routes;
pub mod workbench;

use std::net::SocketAddr;
use std::sync::Arc;

pub use error::{ErrorBody, Result, ServiceError};
pub use project::{GoldAnswer, GoldQuestion, Grading, Project, Qualification, Session, Task};
pub use routes::router;
pub use workbench::{CreateProject, Workbench};

/// Serves the API on `addr` until the process is stopped.
pub async fn serve(addr: SocketAddr, workbench: Workbench) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(workbench))).await
}
