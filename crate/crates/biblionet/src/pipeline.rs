//! End-to-end orchestration: each CLI stage is a function that reads
//! the previous stage's serialized artifacts and writes its own, and
//! the full run composes exactly the same functions so staged and
//! single-shot executions are byte-identical.

use std::fs;
use std::path::Path;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::country_network::{
    build_affiliation, collaboration_csv, core_groups_csv, cosine_normalize, international_share,
    k_core, project, threshold_network, ShareReport,
};
use crate::error::{Error, Result};
use crate::exchange_formats::{write_dl, write_net, NetFile};
use crate::factor_model::{
    assign_clusters, clusters_csv, compare_years, correlation_csv, fit_with, loadings_csv,
    timeline_csv, FactorModel, Rotation,
};
use crate::journal_citation::{
    build_matrix, citation_environment_with, find_seed_journals, CitationEnvironment,
    JournalCitationMatrix, ThresholdSide,
};
use crate::linalg::Matrix;
use crate::record_ingest::{parse_corpus, warnings_csv, BiblioRecord, CountryOptions};
use crate::stimulus_space::{embed, stimulus_csv, stimulus_svg, StimulusMap};

pub const RECORDS_SCHEMA: &str = "biblionet.records/1";

#[derive(Debug, Serialize, Deserialize)]
pub struct RecordsFile {
    pub schema: String,
    pub records: Vec<BiblioRecord>,
}

/// Parse a corpus file and write `records.json` + `warnings.csv`.
pub fn stage_parse(input: &Path, out_dir: &Path) -> Result<Vec<BiblioRecord>> {
    let file = fs::File::open(input)?;
    let (records, warnings) = parse_corpus(std::io::BufReader::new(file))?;
    fs::create_dir_all(out_dir)?;
    let payload = RecordsFile {
        schema: RECORDS_SCHEMA.to_string(),
        records,
    };
    let mut json = serde_json::to_string(&payload)?;
    json.push('\n');
    fs::write(out_dir.join("records.json"), json)?;
    fs::write(out_dir.join("warnings.csv"), warnings_csv(&warnings))?;
    Ok(payload.records)
}

pub fn load_records(path: &Path) -> Result<Vec<BiblioRecord>> {
    let text = fs::read_to_string(path)?;
    let file: RecordsFile = serde_json::from_str(&text)?;
    if file.schema != RECORDS_SCHEMA {
        return Err(Error::SchemaMismatch {
            expected: RECORDS_SCHEMA.to_string(),
            got: file.schema,
        });
    }
    Ok(file.records)
}

/// Build the year's citation matrix and write `matrix.csv`.
pub fn stage_matrix(
    records: &[BiblioRecord],
    year: i32,
    out_path: &Path,
) -> Result<JournalCitationMatrix> {
    let matrix = build_matrix(records, year)?;
    fs::write(out_path, matrix.to_csv())?;
    Ok(matrix)
}

/// Explicit seed if configured, otherwise the keyword match receiving
/// the most citations (ties to the lexicographically first).
pub fn resolve_seed(
    matrix: &JournalCitationMatrix,
    seed: Option<&str>,
    keywords: &[String],
) -> Result<String> {
    if let Some(s) = seed {
        return match matrix.index_of(s) {
            Some(_) => Ok(s.to_string()),
            None => Err(Error::UnknownJournal(s.to_string())),
        };
    }
    let candidates = find_seed_journals(&matrix.journals, keywords);
    candidates
        .iter()
        .max_by_key(|j| matrix.column_sum(matrix.index_of(j).unwrap()))
        .cloned()
        .ok_or_else(|| Error::UnknownJournal(format!("no journal matches {keywords:?}")))
}

/// Extract the citation environment and write `environment.csv` +
/// `correlation.csv`.
pub fn stage_env(
    matrix: &JournalCitationMatrix,
    seed: &str,
    threshold: f64,
    side: ThresholdSide,
    out_dir: &Path,
) -> Result<(CitationEnvironment, Matrix)> {
    let env = citation_environment_with(matrix, seed, threshold, side)?;
    let corr = crate::factor_model::correlation_matrix(&env)?;
    fs::create_dir_all(out_dir)?;
    let seed_col = matrix.index_of(seed).unwrap();
    let received = matrix.column_sum(seed_col);
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["journal", "cites_seed", "share", "is_seed"]).unwrap();
    for member in &env.members {
        let row = matrix.index_of(member).unwrap();
        let cites = matrix.counts[row][seed_col];
        let share = if received > 0 {
            cites as f64 / received as f64
        } else {
            0.0
        };
        wtr.write_record([
            member.clone(),
            cites.to_string(),
            format!("{share}"),
            (member == seed).to_string(),
        ])
        .unwrap();
    }
    fs::write(
        out_dir.join("environment.csv"),
        String::from_utf8(wtr.into_inner().unwrap()).unwrap(),
    )?;
    fs::write(
        out_dir.join("correlation.csv"),
        correlation_csv(&env.members, &corr),
    )?;
    Ok((env, corr))
}

/// Fit and cluster the factor model; write `loadings.csv` +
/// `clusters.csv`.
pub fn stage_factors(
    variables: &[String],
    corr: &Matrix,
    n_factors: Option<usize>,
    rotation: Rotation,
    loading_threshold: f64,
    out_dir: &Path,
) -> Result<FactorModel> {
    let mut model = fit_with(corr, n_factors, rotation)?;
    model.variables = variables.to_vec();
    assign_clusters(&mut model, loading_threshold);
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("loadings.csv"), loadings_csv(&model))?;
    fs::write(out_dir.join("clusters.csv"), clusters_csv(&model))?;
    Ok(model)
}

/// Legend groups for the map figure: one section per factor.
pub fn legend_groups(model: &FactorModel) -> Vec<(String, Vec<String>)> {
    model
        .clusters
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_empty())
        .map(|(f, c)| (format!("Factor {}", f + 1), c.iter().cloned().collect()))
        .collect()
}

/// Recover legend groups from a written `clusters.csv`.
pub fn parse_clusters_csv(text: &str) -> Result<Vec<(String, Vec<String>)>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut groups: Vec<(String, Vec<String>)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let factor = rec.get(0).unwrap_or("").to_string();
        if factor == "unclustered" {
            continue;
        }
        let journal = rec.get(1).unwrap_or("").to_string();
        let title = format!("Factor {factor}");
        match groups.iter_mut().find(|(t, _)| *t == title) {
            Some((_, members)) => members.push(journal),
            None => groups.push((title, vec![journal])),
        }
    }
    Ok(groups)
}

/// Embed the environment and write `stimulus.csv` + `stimulus.svg`.
pub fn stage_map(
    variables: &[String],
    corr: &Matrix,
    groups: &[(String, Vec<String>)],
    out_dir: &Path,
) -> Result<StimulusMap> {
    let map = embed(corr, variables)?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("stimulus.csv"), stimulus_csv(&map))?;
    fs::write(out_dir.join("stimulus.svg"), stimulus_svg(&map, groups))?;
    Ok(map)
}

/// Country-level reports for one year's records: `collaboration.csv` +
/// `core_groups.csv`.
pub fn stage_countries(
    records: &[BiblioRecord],
    year: i32,
    opts: &CountryOptions,
    out_dir: &Path,
) -> Result<ShareReport> {
    if records.is_empty() {
        return Err(Error::NoRecordsForYear(year));
    }
    let share = international_share(records, opts);
    let aff = build_affiliation(records, opts)?;
    let graph = project(&aff);
    let core = k_core(&graph);
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("collaboration.csv"), collaboration_csv(&[(year, share)]))?;
    fs::write(
        out_dir.join("core_groups.csv"),
        core_groups_csv(&[(year, aff.countries.len(), core.core_group_size())]),
    )?;
    Ok(share)
}

/// Interchange exports for one year's records: `affiliation.dl`,
/// `country.net` (raw co-authorship weights), `cosine.net`
/// (cosine-normalized, thresholded).
pub fn stage_export(
    records: &[BiblioRecord],
    year: i32,
    opts: &CountryOptions,
    cosine_cutoff: f64,
    out_dir: &Path,
) -> Result<()> {
    if records.is_empty() {
        return Err(Error::NoRecordsForYear(year));
    }
    let aff = build_affiliation(records, opts)?;
    let graph = project(&aff);
    let cosine = cosine_normalize(&graph);
    let (thresholded, _isolated) = threshold_network(&cosine, cosine_cutoff);
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("affiliation.dl"), write_dl(&aff))?;
    fs::write(out_dir.join("country.net"), write_net(&NetFile::from_graph(&graph))?)?;
    fs::write(out_dir.join("cosine.net"), write_net(&NetFile::from_graph(&thresholded))?)?;
    Ok(())
}

#[derive(Debug)]
pub struct YearRun {
    pub year: i32,
    pub seed: String,
    pub model: FactorModel,
    pub share: ShareReport,
}

fn run_year(cfg: &RunConfig, year: i32, corpus: &Path) -> Result<YearRun> {
    let out_dir = cfg.out.join(year.to_string());
    let records = stage_parse(corpus, &out_dir)?;
    let matrix = stage_matrix(&records, year, &out_dir.join("matrix.csv"))?;
    let seed = resolve_seed(&matrix, cfg.seed.as_deref(), &cfg.keywords)?;
    let (env, corr) = stage_env(&matrix, &seed, cfg.env_threshold, cfg.threshold_side, &out_dir)?;
    let model = stage_factors(
        &env.members,
        &corr,
        cfg.n_factors,
        cfg.rotation,
        cfg.loading_threshold,
        &out_dir,
    )?;
    stage_map(&env.members, &corr, &legend_groups(&model), &out_dir)?;
    let year_records: Vec<BiblioRecord> =
        records.into_iter().filter(|r| r.pub_year == year).collect();
    let opts = CountryOptions { merge_uk: cfg.merge_uk };
    let share = stage_countries(&year_records, year, &opts, &out_dir)?;
    stage_export(&year_records, year, &opts, cfg.cosine_cutoff, &out_dir)?;
    Ok(YearRun { year, seed, model, share })
}

/// Execute the full pipeline for every configured year, then the
/// cross-year timeline. Years run independently (concurrently when the
/// `parallel` feature is on) and land in disjoint directories.
pub fn run(cfg: &RunConfig) -> Result<Vec<YearRun>> {
    fs::create_dir_all(&cfg.out)?;

    #[cfg(feature = "parallel")]
    let results: Result<Vec<YearRun>> = cfg
        .years
        .par_iter()
        .map(|y| run_year(cfg, y.year, &y.corpus))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let results: Result<Vec<YearRun>> = cfg
        .years
        .iter()
        .map(|y| run_year(cfg, y.year, &y.corpus))
        .collect();

    let mut runs = results?;
    runs.sort_by_key(|r| r.year);

    if runs.len() >= 2 {
        let tracked = runs.last().unwrap().seed.clone();
        let snapshots: Vec<(i32, FactorModel)> =
            runs.iter().map(|r| (r.year, r.model.clone())).collect();
        let timeline = compare_years(&snapshots, &tracked);
        fs::write(cfg.out.join("timeline.csv"), timeline_csv(&timeline))?;
    }
    let mut manifest = crate::config::manifest(cfg);
    for r in &runs {
        manifest.push_str(&format!("resolved seed {} = {}\n", r.year, r.seed));
    }
    fs::write(cfg.out.join("run_manifest.txt"), manifest)?;
    Ok(runs)
}
