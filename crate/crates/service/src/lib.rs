//! HTTP service and file-backed persistence for health stories.
//!
//! Each story lives in its data directory as one JSON record carrying the
//! story, its revision and timestamps. Mutations take an optional expected
//! revision (the `If-Match` header) and fail with 409 when it is stale.

mod api;
mod error;
mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

pub use api::{router, AppState, EventPatch};
pub use error::ServiceError;
pub use store::{Artifacts, Store, StoryRecord};

use storyline_core::narrative::ParserConfig;
use storyline_core::{HttpRemoteParser, LayoutConfig, ParserMode, RemoteParser, StyleConfig};

pub const DATA_DIR_VAR: &str = "STORYLINE_DATA_DIR";
pub const PORT_VAR: &str = "STORYLINE_PORT";
pub const PARSER_MODE_VAR: &str = "STORYLINE_PARSER_MODE";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    pub port: u16,
    pub width: f64,
    pub parser_mode: ParserMode,
    pub remote_timeout: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("storyline-data"),
            port: 8080,
            width: 1600.0,
            parser_mode: ParserMode::RuleBased,
            remote_timeout: Duration::from_secs(30),
        }
    }
}

impl ServiceConfig {
    /// Defaults overridden by `STORYLINE_DATA_DIR`, `STORYLINE_PORT` and
    /// `STORYLINE_PARSER_MODE`.
    pub fn from_env() -> Result<Self, ServiceError> {
        let mut config = Self::default();
        if let Ok(dir) = std::env::var(DATA_DIR_VAR) {
            config.data_dir = dir.into();
        }
        if let Ok(port) = std::env::var(PORT_VAR) {
            config.port = port
                .parse()
                .map_err(|_| ServiceError::BadRequest(format!("{PORT_VAR}={port:?} is not a port")))?;
        }
        if let Ok(mode) = std::env::var(PARSER_MODE_VAR) {
            config.parser_mode = mode.parse().map_err(ServiceError::BadRequest)?;
        }
        Ok(config)
    }

    pub fn state(&self) -> Result<AppState, ServiceError> {
        let store = Store::open(
            &self.data_dir,
            LayoutConfig::with_width(self.width),
            StyleConfig::default(),
        )?;
        let parser = ParserConfig::new(chrono::Utc::now().date_naive()).with_mode(self.parser_mode);
        let remote =
            HttpRemoteParser::from_env(self.remote_timeout).map(|p| Arc::new(p) as Arc<dyn RemoteParser>);
        Ok(AppState::new(store, parser, remote))
    }
}

/// Binds `0.0.0.0:port` and serves until the process is stopped.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let app = router(config.state()?);
    let addr = SocketAddr::from(([0, 0, 0, 0], config.port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, app).await?;
    Ok(())
}
