use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use biblionet::config::load_config;
use biblionet::error::Result;
use biblionet::factor_model::Rotation;
use biblionet::journal_citation::JournalCitationMatrix;
use biblionet::pipeline;
use biblionet::record_ingest::CountryOptions;

#[derive(Parser)]
#[command(name = "biblionet", version, about = "Journal citation mapping and country co-authorship analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Process only this year from the config.
        #[arg(long)]
        year: Option<i32>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        env_threshold: Option<f64>,
        #[arg(long)]
        cosine_cutoff: Option<f64>,
        #[arg(long)]
        merge_uk: Option<bool>,
    },
    /// Parse a corpus file into records.json + warnings.csv.
    Parse {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Build a year's citation matrix CSV from records.json.
    Matrix {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        year: i32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract a seed's citation environment from a matrix CSV.
    Env {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        seed: String,
        #[arg(long, default_value_t = 0.01)]
        threshold: f64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Factor-analyze a correlation CSV into loadings + clusters.
    Factors {
        #[arg(long)]
        correlation: PathBuf,
        #[arg(long)]
        n_factors: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        loading_threshold: f64,
        #[arg(long, value_parser = parse_rotation, default_value = "varimax")]
        rotation: Rotation,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Embed a correlation CSV into the 2D stimulus space.
    Map {
        #[arg(long)]
        correlation: PathBuf,
        /// Optional clusters.csv for legend grouping.
        #[arg(long)]
        clusters: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Country collaboration reports from records.json.
    Countries {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        year: i32,
        #[arg(long, default_value_t = false)]
        merge_uk: bool,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Network interchange exports (.net / .dl) from records.json.
    Export {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        year: i32,
        #[arg(long, default_value_t = false)]
        merge_uk: bool,
        #[arg(long, default_value_t = 0.1)]
        cosine_cutoff: f64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn parse_rotation(s: &str) -> std::result::Result<Rotation, String> {
    match s {
        "varimax" => Ok(Rotation::Varimax),
        "none" => Ok(Rotation::None),
        _ => Err("expected varimax or none".to_string()),
    }
}

fn year_records(
    path: &std::path::Path,
    year: i32,
) -> Result<Vec<biblionet::record_ingest::BiblioRecord>> {
    Ok(pipeline::load_records(path)?
        .into_iter()
        .filter(|r| r.pub_year == year)
        .collect())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            year,
            out,
            seed,
            env_threshold,
            cosine_cutoff,
            merge_uk,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(y) = year {
                cfg.years.retain(|c| c.year == y);
                if cfg.years.is_empty() {
                    return Err(biblionet::Error::Config(format!(
                        "year {y} is not defined in the config"
                    )));
                }
            }
            if let Some(out) = out {
                cfg.out = out;
            }
            if let Some(seed) = seed {
                cfg.seed = Some(biblionet::record_ingest::normalize_journal(&seed));
            }
            if let Some(t) = env_threshold {
                cfg.env_threshold = t;
            }
            if let Some(c) = cosine_cutoff {
                cfg.cosine_cutoff = c;
            }
            if let Some(m) = merge_uk {
                cfg.merge_uk = m;
            }
            let runs = pipeline::run(&cfg)?;
            for r in &runs {
                println!(
                    "{}: seed {}, {} factors, {}/{} international ({}%)",
                    r.year,
                    r.seed,
                    r.model.n_factors,
                    r.share.international,
                    r.share.total,
                    r.share.percent
                );
            }
            Ok(())
        }
        Command::Parse { input, out_dir } => {
            let records = pipeline::stage_parse(&input, &out_dir)?;
            println!("{} records", records.len());
            Ok(())
        }
        Command::Matrix { records, year, out } => {
            let recs = pipeline::load_records(&records)?;
            let matrix = pipeline::stage_matrix(&recs, year, &out)?;
            println!("{} journals, {} citations", matrix.journals.len(), matrix.total());
            Ok(())
        }
        Command::Env { matrix, seed, threshold, out_dir } => {
            let text = std::fs::read_to_string(&matrix)?;
            let m = JournalCitationMatrix::from_csv(&text, 0)?;
            let seed = biblionet::record_ingest::normalize_journal(&seed);
            let (env, _) = pipeline::stage_env(
                &m,
                &seed,
                threshold,
                Default::default(),
                &out_dir,
            )?;
            println!("{} members", env.members.len());
            Ok(())
        }
        Command::Factors {
            correlation,
            n_factors,
            loading_threshold,
            rotation,
            out_dir,
        } => {
            let text = std::fs::read_to_string(&correlation)?;
            let (variables, corr) = biblionet::factor_model::parse_correlation_csv(&text)?;
            let model = pipeline::stage_factors(
                &variables,
                &corr,
                n_factors,
                rotation,
                loading_threshold,
                &out_dir,
            )?;
            println!("{} factors", model.n_factors);
            Ok(())
        }
        Command::Map { correlation, clusters, out_dir } => {
            let text = std::fs::read_to_string(&correlation)?;
            let (variables, corr) = biblionet::factor_model::parse_correlation_csv(&text)?;
            let groups = match clusters {
                Some(path) => {
                    pipeline::parse_clusters_csv(&std::fs::read_to_string(&path)?)?
                }
                None => Vec::new(),
            };
            let map = pipeline::stage_map(&variables, &corr, &groups, &out_dir)?;
            println!("stress {:.6}", map.stress);
            Ok(())
        }
        Command::Countries { records, year, merge_uk, out_dir } => {
            let recs = year_records(&records, year)?;
            let opts = CountryOptions { merge_uk };
            let share = pipeline::stage_countries(&recs, year, &opts, &out_dir)?;
            println!("{}/{} international ({}%)", share.international, share.total, share.percent);
            Ok(())
        }
        Command::Export {
            records,
            year,
            merge_uk,
            cosine_cutoff,
            out_dir,
        } => {
            let recs = year_records(&records, year)?;
            let opts = CountryOptions { merge_uk };
            pipeline::stage_export(&recs, year, &opts, cosine_cutoff, &out_dir)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = err.exit_code();
            eprintln!(
                "{}",
                serde_json::json!({ "error": err.to_string(), "exit_code": code })
            );
            ExitCode::from(code as u8)
        }
    }
}
