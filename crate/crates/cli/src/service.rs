//! `plate serve` and `plate ingest`.

use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use chrono::FixedOffset;
use platetrace_ingest::{HttpSink, IngestConfig, Shutdown, SystemClock};
use platetrace_tracker::{ApiConfig, GeoProvider, HttpGeo, Notifier, OutboxNotifier, SmtpNotifier, StaticGeo, Tracker, TrackerConfig};

use crate::error::{CliError, Result};

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub data_dir: PathBuf,
    pub bind: String,
    pub timezone: FixedOffset,
    pub token: Option<String>,
    pub ui_dir: Option<PathBuf>,
    /// JSON camera map for the static provider.
    pub geo_file: Option<PathBuf>,
    /// Base URL of a geo-IP service; replaces the static provider.
    pub geoip_url: Option<String>,
    pub smtp: Option<String>,
    pub smtp_from: String,
    /// Defaults to `<data_dir>/outbox.jsonl` when SMTP is not configured.
    pub outbox: Option<PathBuf>,
    pub snapshot_every: u64,
}

pub fn open_tracker(o: &ServeOptions) -> Result<Tracker> {
    let geo: Arc<dyn GeoProvider> = match (&o.geoip_url, &o.geo_file) {
        (Some(url), _) => Arc::new(HttpGeo::new(url.clone(), HashMap::new())?),
        (None, Some(file)) => Arc::new(StaticGeo::from_file(file)?),
        (None, None) => Arc::new(StaticGeo::default()),
    };
    let notifier: Arc<dyn Notifier> = match &o.smtp {
        Some(server) => Arc::new(SmtpNotifier::new(server.clone(), o.smtp_from.clone())),
        None => Arc::new(OutboxNotifier::new(o.outbox.clone().unwrap_or_else(|| o.data_dir.join("outbox.jsonl")))),
    };
    let config = TrackerConfig {
        data_dir: o.data_dir.clone(),
        timezone: o.timezone,
        snapshot_every: o.snapshot_every,
    };
    Ok(Tracker::open(config, geo, notifier, Arc::new(platetrace_tracker::SystemClock))?)
}

/// Serves until interrupted. Prints `listening on <addr>` once bound.
pub fn serve(o: ServeOptions) -> Result<()> {
    let tracker = Arc::new(open_tracker(&o)?);
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Usage(format!("runtime: {e}")))?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&o.bind).await.map_err(|e| CliError::Usage(format!("bind {}: {e}", o.bind)))?;
        let addr = listener.local_addr().map_err(|e| CliError::Usage(e.to_string()))?;
        println!("listening on {addr}");
        let _ = std::io::stdout().flush();
        let app = platetrace_tracker::router(
            tracker,
            ApiConfig {
                token: o.token.clone(),
                ui_dir: o.ui_dir.clone(),
            },
        );
        platetrace_tracker::serve(listener, app, async {
            let _ = tokio::signal::ctrl_c().await;
            log::info!("shutting down");
        })
        .await
        .map_err(|e| CliError::Usage(format!("server: {e}")))
    })
}

/// Polls until interrupted, or once with `once`.
pub fn ingest(cfg: IngestConfig, once: bool) -> Result<()> {
    cfg.validate()?;
    let sink = HttpSink::new(cfg.endpoint.clone(), cfg.token.clone()).map_err(|e| CliError::Usage(e.to_string()))?;
    let clock = SystemClock::default();
    if once {
        let r = platetrace_ingest::poll_once(&cfg, &sink, &clock)?;
        println!("shipped {} malformed {} rejected {} consumed {}", r.shipped, r.malformed, r.rejected, r.consumed);
        return Ok(());
    }
    let stop = Arc::new(Shutdown::new());
    {
        let stop = stop.clone();
        std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().expect("signal runtime");
            rt.block_on(async {
                let _ = tokio::signal::ctrl_c().await;
            });
            stop.trigger();
        });
    }
    log::info!("watching {} every {:?}", cfg.watch_path.display(), cfg.interval);
    platetrace_ingest::run_loop(&cfg, &sink, &clock, &stop);
    Ok(())
}
