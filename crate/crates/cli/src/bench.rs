//! `uisuggest bench ...`: everything under one working directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};
use uisuggest_bench::io::{read_json, read_jsonl, write_json, write_jsonl};
use uisuggest_bench::{
    build_blinded_bundle, build_report, convert_uicrit_csv, ingest_annotations, load_records,
    parse_variants, render_report_tables, run_matrix, stratified_sample, stratified_split,
    Allocation, AnnotationRecord, BenchTask, BundleKey, CritiqueRecord, PlannedTask, Preset,
    RunConfig, Split, DEFAULT_ALLOCATIONS, KEY_FILE,
};
use uisuggest_providers::mock::CallCounter;
use uisuggest_providers::ProviderRegistry;
use uisuggest_service::ServiceConfig;

const RECORDS: &str = "records.jsonl";
const TASKS: &str = "tasks.jsonl";
const SPLITS: &str = "splits.jsonl";
const METRICS: &str = "metrics.json";

#[derive(Args)]
pub struct BenchArgs {
    /// Working directory for all benchmark files.
    #[arg(long, default_value = "bench", global = true)]
    dir: PathBuf,
    #[command(subcommand)]
    command: BenchCommand,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Import critique records (JSONL, or a UICrit CSV export).
    Ingest {
        #[arg(long, conflicts_with = "uicrit_csv")]
        records: Option<PathBuf>,
        #[arg(long, requires = "images")]
        uicrit_csv: Option<PathBuf>,
        /// Screenshot directory for --uicrit-csv.
        #[arg(long)]
        images: Option<PathBuf>,
    },
    /// Draw a stratified sample of tasks, one per screenshot.
    Sample {
        #[arg(long, default_value_t = 300)]
        total: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Partition the sample into the model, mask and ablation splits.
    Split {
        #[arg(long, value_delimiter = ',', default_value = "120,60,120")]
        sizes: Vec<usize>,
        #[arg(long)]
        seed: u64,
        /// One per split: proportional or uniform.
        #[arg(long, value_delimiter = ',')]
        allocation: Option<Vec<String>>,
    },
    /// Generate every missing (task, variant) output.
    Run {
        #[arg(long, conflicts_with = "variants")]
        preset: Option<String>,
        /// e.g. `gpt-image-1+mask,gpt-image-1-no-sg`.
        #[arg(long, requires = "split")]
        variants: Option<String>,
        /// Split the custom variants run on.
        #[arg(long)]
        split: Option<String>,
        /// Output name; defaults to the preset.
        #[arg(long)]
        name: Option<String>,
        /// Offline deterministic providers with this seed.
        #[arg(long)]
        mock_seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        workers: usize,
    },
    /// Build the blinded annotation bundle for a run.
    Bundle {
        #[arg(long)]
        name: String,
        #[arg(long)]
        seed: u64,
    },
    /// Import annotations for a bundle, un-blinding labels with its key.
    AnnotateIngest {
        file: PathBuf,
        #[arg(long)]
        name: String,
    },
    /// Aggregate all annotations into metrics.json.
    Report {
        /// Also print the result tables.
        #[arg(long)]
        tables: bool,
    },
}

fn run_dir(dir: &Path, name: &str) -> PathBuf {
    dir.join("outputs").join(name)
}

fn bundle_dir(dir: &Path, name: &str) -> PathBuf {
    dir.join("bundles").join(name)
}

fn annotations_path(dir: &Path, name: &str) -> PathBuf {
    dir.join("annotations").join(format!("{name}.jsonl"))
}

fn preset_split(p: Preset) -> Split {
    match p {
        Preset::ModelEval => Split::ModelEval,
        Preset::MaskEval => Split::MaskEval,
        Preset::Ablation => Split::AblationEval,
    }
}

pub async fn run(args: BenchArgs) -> Result<()> {
    let dir = args.dir;
    std::fs::create_dir_all(&dir).with_context(|| dir.display().to_string())?;
    match args.command {
        BenchCommand::Ingest {
            records,
            uicrit_csv,
            images,
        } => {
            let records: Vec<CritiqueRecord> = match (records, uicrit_csv) {
                (Some(path), None) => load_records(&path)?,
                (None, Some(csv)) => {
                    let conv = convert_uicrit_csv(&csv, images.as_deref().expect("required by clap"))?;
                    for (line, why) in &conv.skipped {
                        eprintln!("skipped line {line}: {why}");
                    }
                    conv.records
                }
                _ => bail!("give either --records or --uicrit-csv"),
            };
            let mut by_stratum = BTreeMap::new();
            for r in &records {
                *by_stratum.entry(r.stratum().to_string()).or_insert(0usize) += 1;
            }
            write_jsonl(&dir.join(RECORDS), &records)?;
            println!("{} records {:?}", records.len(), by_stratum);
        }
        BenchCommand::Sample { total, seed } => {
            let records: Vec<CritiqueRecord> = read_jsonl(&dir.join(RECORDS))?;
            let tasks = stratified_sample(&records, total, seed)?;
            write_jsonl(&dir.join(TASKS), &tasks)?;
            println!("{} tasks", tasks.len());
        }
        BenchCommand::Split {
            sizes,
            seed,
            allocation,
        } => {
            let allocations: Vec<Allocation> = match allocation {
                Some(a) => a.iter().map(|s| s.parse()).collect::<Result<_, _>>()?,
                None if sizes.len() == 3 => DEFAULT_ALLOCATIONS.to_vec(),
                None => vec![Allocation::Proportional; sizes.len()],
            };
            let tasks: Vec<BenchTask> = read_jsonl(&dir.join(TASKS))?;
            let splits = stratified_split(&tasks, &sizes, &allocations, seed)?;
            for (k, s) in splits.iter().enumerate() {
                let mut counts = [0usize; 3];
                for t in s {
                    counts[t.stratum as usize] += 1;
                }
                println!("split {k}: {} tasks, per stratum {counts:?}", s.len());
            }
            let all: Vec<BenchTask> = splits.into_iter().flatten().collect();
            write_jsonl(&dir.join(SPLITS), &all)?;
        }
        BenchCommand::Run {
            preset,
            variants,
            split,
            name,
            mock_seed,
            config,
            workers,
        } => {
            let tasks: Vec<BenchTask> = read_jsonl(&dir.join(SPLITS))?;
            let (plan, default_name): (Vec<PlannedTask>, String) = match (preset, variants) {
                (Some(p), None) => {
                    let p: Preset = p.parse()?;
                    let mine: Vec<BenchTask> =
                        tasks.into_iter().filter(|t| t.split == Some(preset_split(p))).collect();
                    (p.plan(&mine), p.to_string())
                }
                (None, Some(v)) => {
                    let variants = parse_variants(&v)?;
                    let split: Split = split.expect("required by clap").parse()?;
                    let plan = tasks
                        .into_iter()
                        .filter(|t| t.split == Some(split))
                        .map(|task| PlannedTask {
                            task,
                            variants: variants.clone(),
                        })
                        .collect();
                    (plan, format!("{split}-custom"))
                }
                _ => bail!("give either --preset or --variants"),
            };
            let name = name.unwrap_or(default_name);
            let out_dir = run_dir(&dir, &name);
            let service_config = match &config {
                Some(p) => ServiceConfig::load(p)?,
                None => ServiceConfig::default(),
            };
            let registry = match mock_seed {
                Some(seed) => ProviderRegistry::mock(
                    seed,
                    &service_config.profiles(),
                    CallCounter::default(),
                    CallCounter::default(),
                ),
                None => ProviderRegistry::from_profiles(&service_config.profiles())?,
            };
            std::fs::create_dir_all(&out_dir)?;
            let tasks: Vec<BenchTask> = plan.iter().map(|p| p.task.clone()).collect();
            write_jsonl(&out_dir.join(TASKS), &tasks)?;
            let report = run_matrix(
                &plan,
                &registry,
                &RunConfig {
                    out_dir: out_dir.clone(),
                    workers,
                    generation: service_config.generation,
                },
            )
            .await?;
            println!(
                "{name}: {} executed, {} cached, {} failed",
                report.executed,
                report.cached,
                report.failed.len()
            );
            for f in &report.failed {
                eprintln!("  {} / {}: {}", f.task_id, f.variant, f.error);
            }
        }
        BenchCommand::Bundle { name, seed } => {
            let out_dir = run_dir(&dir, &name);
            let tasks: Vec<BenchTask> = read_jsonl(&out_dir.join(TASKS))?;
            let manifest = build_blinded_bundle(&tasks, &out_dir, &bundle_dir(&dir, &name), seed)?;
            println!("{} tasks bundled into {}", manifest.tasks.len(), bundle_dir(&dir, &name).display());
        }
        BenchCommand::AnnotateIngest { file, name } => {
            let key: BundleKey = read_json(&bundle_dir(&dir, &name).join(KEY_FILE))?;
            let records = ingest_annotations(&file, Some(&key))?;
            let path = annotations_path(&dir, &name);
            std::fs::create_dir_all(path.parent().expect("has a parent"))?;
            write_jsonl(&path, &records)?;
            println!("{} annotation rows", records.len());
        }
        BenchCommand::Report { tables } => {
            let tasks: Vec<BenchTask> = read_jsonl(&dir.join(SPLITS)).unwrap_or_default();
            let mut records: Vec<AnnotationRecord> = Vec::new();
            let ann_dir = dir.join("annotations");
            let mut files: Vec<PathBuf> = std::fs::read_dir(&ann_dir)
                .with_context(|| ann_dir.display().to_string())?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
                .collect();
            files.sort();
            for f in files {
                records.extend(read_jsonl::<AnnotationRecord>(&f)?);
            }
            let report = build_report(&tasks, &records);
            write_json(&dir.join(METRICS), &report)?;
            if tables {
                print!("{}", render_report_tables(&report));
            }
            println!("wrote {}", dir.join(METRICS).display());
        }
    }
    Ok(())
}
