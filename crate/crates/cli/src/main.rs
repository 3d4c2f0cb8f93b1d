mod bench;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use uisuggest_core::ReportId;
use uisuggest_providers::mock::CallCounter;
use uisuggest_providers::ProviderRegistry;
use uisuggest_service::demo::{run_demo_with, DemoOptions};
use uisuggest_service::{http, FaultPlan, RandomIds, ReportStore, Service, ServiceConfig, SystemClock};

#[derive(Parser)]
#[command(name = "uisuggest", version, about = "Feedback-to-suggestion service and evaluation harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP/JSON API.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Use deterministic offline providers with this seed.
        #[arg(long)]
        mock_seed: Option<u64>,
        #[arg(long, hide = true)]
        fault_inject: Option<String>,
    },
    /// Scripted end-to-end session against mock providers.
    Demo {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Skip suggestion generation and edit straight from the feedback.
        #[arg(long)]
        ablation: bool,
        /// Where the finished report is written.
        #[arg(long, default_value = "demo-report")]
        out: PathBuf,
        /// Service data directory; a temporary one by default.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long, hide = true)]
        fault_inject: Option<String>,
    },
    /// Stored reports.
    Report {
        #[command(subcommand)]
        command: ReportCommand,
    },
    /// Benchmark preparation, runs, bundles and statistics.
    Bench(bench::BenchArgs),
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Copy a report's JSON and images into a directory.
    Export {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        id: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: Option<&PathBuf>) -> Result<ServiceConfig> {
    match path {
        Some(p) => Ok(ServiceConfig::load(p)?),
        None => Ok(ServiceConfig::default()),
    }
}

fn fault(spec: Option<&str>) -> Result<FaultPlan> {
    spec.map(FaultPlan::parse)
        .transpose()
        .map_err(anyhow::Error::msg)
        .map(Option::unwrap_or_default)
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(run(cli))
}

async fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Serve {
            config,
            host,
            port,
            mock_seed,
            fault_inject,
        } => {
            let config = load_config(config.as_ref())?;
            let registry = match mock_seed {
                Some(seed) => ProviderRegistry::mock(seed, &config.profiles(), CallCounter::default(), CallCounter::default()),
                None => ProviderRegistry::from_profiles(&config.profiles())?,
            };
            let svc = Service::open(
                config,
                registry,
                Arc::new(SystemClock),
                Arc::new(RandomIds),
                fault(fault_inject.as_deref())?,
            )
            .await?;
            let addr: SocketAddr = format!("{host}:{port}").parse().context("listen address")?;
            let listener = tokio::net::TcpListener::bind(addr).await?;
            eprintln!("listening on http://{}", listener.local_addr()?);
            http::serve(listener, svc, async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        }
        Command::Demo {
            seed,
            ablation,
            out,
            data_dir,
            fault_inject,
        } => {
            let temp = tempfile::tempdir()?;
            let opts = DemoOptions {
                seed,
                ablation,
                data_dir: data_dir.unwrap_or_else(|| temp.path().to_path_buf()),
                out_dir: out,
            };
            let outcome = run_demo_with(&opts, fault(fault_inject.as_deref())?).await?;
            println!("{}", serde_json::to_string_pretty(&outcome)?);
        }
        Command::Report {
            command: ReportCommand::Export { config, id, out },
        } => {
            let config = load_config(config.as_ref())?;
            let store = ReportStore::open(&config.data_dir.join("reports"), FaultPlan::default())?;
            for f in store.export(&ReportId(id), &out)? {
                println!("{}", f.display());
            }
        }
        Command::Bench(args) => bench::run(args).await?,
    }
    Ok(())
}
