use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use chrono::FixedOffset;
use clap::{Args, Parser, Subcommand};
use platetrace_cli::manifest::read_manifest;
use platetrace_cli::service::{self, ServeOptions};
use platetrace_cli::{CliError, Pipeline, PipelineParams, Result, RunReport, Truth};
use platetrace_core::synth::CorpusRanges;
use platetrace_ingest::{plate_file, IngestConfig};

#[derive(Parser)]
#[command(name = "plate", version, about = "Licence-plate recognition and vehicle tracing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PipelineArgs {
    /// Append recognised plates to this file, one per line.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Template directory laid out as <symbol>/<style>.pgm.
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Write intermediate rasters here.
    #[arg(long)]
    debug_dir: Option<PathBuf>,
    /// Override a pipeline parameter, e.g. --param box_size=15.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Write the full report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Recognise the plate in one image.
    Run {
        image: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Evaluate a manifest of images with known plates.
    Corpus {
        manifest: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Render a synthetic corpus with a manifest.
    GenCorpus {
        #[arg(long, default_value_t = 95)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 800)]
        width: usize,
        #[arg(long, default_value_t = 450)]
        height: usize,
    },
    /// Write the built-in templates as a template directory.
    GenTemplates {
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the trace service.
    Serve {
        #[arg(long, default_value = "data")]
        data: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        /// UTC offset for stored times, e.g. +05:30.
        #[arg(long, default_value = "+00:00")]
        tz: FixedOffset,
        #[arg(long, env = "PLATE_TOKEN")]
        token: Option<String>,
        /// Serve static files from this directory under /ui/.
        #[arg(long)]
        ui: Option<PathBuf>,
        /// Camera locations as JSON.
        #[arg(long)]
        geo: Option<PathBuf>,
        /// Look cameras up at this geo-IP base URL instead.
        #[arg(long)]
        geoip_url: Option<String>,
        /// SMTP relay host:port; without it alerts go to the outbox file.
        #[arg(long)]
        smtp: Option<String>,
        #[arg(long, default_value = "tracker@localhost")]
        smtp_from: String,
        #[arg(long)]
        outbox: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        snapshot_every: u64,
    },
    /// Ship plates from the output file to the trace service.
    Ingest {
        /// key = value file; flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        watch: Option<PathBuf>,
        #[arg(long)]
        endpoint: Option<String>,
        #[arg(long)]
        camera: Option<String>,
        /// Seconds between polls.
        #[arg(long)]
        interval: Option<f64>,
        #[arg(long)]
        retry_max: Option<u32>,
        #[arg(long, env = "PLATE_TOKEN")]
        token: Option<String>,
        /// Poll once and exit.
        #[arg(long)]
        once: bool,
    },
}

fn pipeline(args: &PipelineArgs) -> Result<Pipeline> {
    let params = PipelineParams::default().with_overrides(&args.params)?;
    let mut p = Pipeline::new(params, args.templates.as_deref())?;
    p.debug_dir = args.debug_dir.clone();
    Ok(p)
}

fn write_report(path: &Path, report: &RunReport) -> Result<()> {
    let json = serde_json::to_string_pretty(report).expect("report serialises");
    std::fs::write(path, json).map_err(|e| CliError::file(path, e))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { image, pipeline: args } => {
            let p = pipeline(&args)?;
            let entry = p.run_file(&image, &Truth::default())?;
            match (&entry.recognized, &entry.failure) {
                (Some(text), _) => {
                    println!("{text}");
                    if let Some(out) = &args.out {
                        plate_file::append_lines(out, &[text])?;
                    }
                }
                (None, Some(why)) => println!("no plate: {why}"),
                (None, None) => println!("no plate"),
            }
            if let Some(r) = &args.report {
                write_report(r, &RunReport::new(vec![entry], 0))?;
            }
            Ok(())
        }
        Command::Corpus { manifest, pipeline: args } => {
            let p = pipeline(&args)?;
            let m = read_manifest(&manifest)?;
            let (report, io_error) = p.run_corpus(&m);
            if let Some(out) = &args.out {
                let lines: Vec<&String> = report.images.iter().filter_map(|r| r.recognized.as_ref()).collect();
                plate_file::append_lines(out, &lines)?;
            }
            for r in report.images.iter().filter(|r| !r.recognition_ok) {
                log::info!("{}: expected {:?}, got {:?} ({:?})", r.path.display(), r.expected, r.recognized, r.failure);
            }
            print!("{}", report.totals);
            if let Some(path) = &args.report {
                write_report(path, &report)?;
            }
            io_error.map_or(Ok(()), Err)
        }
        Command::GenCorpus { count, seed, out, width, height } => {
            let ranges = CorpusRanges {
                width,
                height,
                ..CorpusRanges::default()
            };
            let rows = platetrace_cli::corpus::generate(&out, count, seed, &ranges)?;
            println!("wrote {} frames to {}", rows.len(), out.display());
            Ok(())
        }
        Command::GenTemplates { out } => {
            platetrace_core::ocr::TemplateSet::builtin().save(&out)?;
            println!("wrote templates to {}", out.display());
            Ok(())
        }
        Command::Serve {
            data,
            bind,
            tz,
            token,
            ui,
            geo,
            geoip_url,
            smtp,
            smtp_from,
            outbox,
            snapshot_every,
        } => service::serve(ServeOptions {
            data_dir: data,
            bind,
            timezone: tz,
            token,
            ui_dir: ui,
            geo_file: geo,
            geoip_url,
            smtp,
            smtp_from,
            outbox,
            snapshot_every,
        }),
        Command::Ingest {
            config,
            watch,
            endpoint,
            camera,
            interval,
            retry_max,
            token,
            once,
        } => {
            let mut cfg = match &config {
                Some(path) => IngestConfig::parse(&std::fs::read_to_string(path).map_err(|e| CliError::file(path, e))?)?,
                None => IngestConfig::new(
                    watch.clone().ok_or_else(|| CliError::Usage("--watch or --config is required".into()))?,
                    endpoint.clone().ok_or_else(|| CliError::Usage("--endpoint or --config is required".into()))?,
                    camera.clone().unwrap_or_else(|| "camera-1".into()),
                ),
            };
            if let Some(w) = watch {
                cfg.watch_path = w;
            }
            if let Some(e) = endpoint {
                cfg.endpoint = e;
            }
            if let Some(c) = camera {
                cfg.camera_id = c;
            }
            if let Some(s) = interval {
                if !(s.is_finite() && s > 0.0) {
                    return Err(CliError::Usage("--interval must be positive".into()));
                }
                cfg.interval = Duration::from_secs_f64(s);
            }
            if let Some(r) = retry_max {
                cfg.retry_max = r;
            }
            if token.is_some() {
                cfg.token = token;
            }
            service::ingest(cfg, once)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
