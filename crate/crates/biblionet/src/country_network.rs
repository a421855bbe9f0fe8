//! Country-level co-authorship structures: international collaboration
//! shares, affiliation matrices and their one-mode projection, k-core
//! decomposition, and Salton cosine normalization.

use std::collections::{BTreeMap, BTreeSet};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::record_ingest::{extract_country_with, BiblioRecord, CountryOptions, UNKNOWN};

/// Country × article binary incidence. Articles whose every address is
/// UNKNOWN are excluded and listed in `excluded`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffiliationMatrix {
    pub countries: Vec<String>,
    pub articles: Vec<String>,
    /// incidence[c][a] = 1 iff some address of article a resolves to
    /// country c.
    pub incidence: Vec<Vec<u8>>,
    pub excluded: Vec<String>,
}

/// Symmetric country co-authorship graph with zero diagonal. Weights
/// are article counts under whole counting and fractions under
/// fractional counting; thresholded cosine graphs reuse the type with
/// real weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CountryGraph {
    pub countries: Vec<String>,
    pub weights: Vec<Vec<f64>>,
}

impl CountryGraph {
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.countries.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.weights[i][j] > 0.0 {
                    out.push((i, j, self.weights[i][j]));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreDecomposition {
    /// Per-country coreness, aligned with the graph's country order.
    pub coreness: Vec<u32>,
    pub max_core: BTreeSet<String>,
    /// Set when the graph has no edges at all.
    pub degenerate: bool,
}

impl CoreDecomposition {
    pub fn core_group_size(&self) -> usize {
        self.max_core.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CosineMatrix {
    pub countries: Vec<String>,
    pub values: Vec<Vec<f64>>,
    /// Countries whose weight row is all zeros.
    pub isolated: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShareReport {
    pub total: u64,
    pub international: u64,
    /// Percentage rounded half-up to one decimal.
    pub percent: f64,
}

/// 100 * international / total, rounded half-up to one decimal.
pub fn percent_one_decimal(total: u64, international: u64) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = 100.0 * international as f64 / total as f64;
    (p * 10.0).round() / 10.0
}

fn record_countries(record: &BiblioRecord, opts: &CountryOptions) -> BTreeSet<String> {
    record
        .addresses
        .iter()
        .map(|a| extract_country_with(a, opts))
        .filter(|c| c != UNKNOWN)
        .collect()
}

/// An article is international iff its addresses resolve to at least
/// two distinct country tokens (UNKNOWN never counts).
pub fn international_share(records: &[BiblioRecord], opts: &CountryOptions) -> ShareReport {
    assert!(!records.is_empty(), "records must be non-empty");
    let total = records.len() as u64;
    let international = records
        .iter()
        .filter(|r| record_countries(r, opts).len() >= 2)
        .count() as u64;
    ShareReport {
        total,
        international,
        percent: percent_one_decimal(total, international),
    }
}

pub fn build_affiliation(
    records: &[BiblioRecord],
    opts: &CountryOptions,
) -> Result<AffiliationMatrix> {
    assert!(!records.is_empty(), "records must be non-empty");
    let mut per_article: Vec<(&str, BTreeSet<String>)> = Vec::new();
    let mut excluded = Vec::new();
    for r in records {
        let countries = record_countries(r, opts);
        if countries.is_empty() {
            excluded.push(r.record_id.clone());
        } else {
            per_article.push((&r.record_id, countries));
        }
    }
    if per_article.is_empty() {
        return Err(Error::EmptyAffiliation);
    }
    let countries: Vec<String> = per_article
        .iter()
        .flat_map(|(_, cs)| cs.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<&str, usize> =
        countries.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let mut incidence = vec![vec![0u8; per_article.len()]; countries.len()];
    for (a, (_, cs)) in per_article.iter().enumerate() {
        for c in cs {
            incidence[index[c.as_str()]][a] = 1;
        }
    }
    Ok(AffiliationMatrix {
        countries,
        articles: per_article.iter().map(|(id, _)| id.to_string()).collect(),
        incidence,
        excluded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Counting {
    /// Each article counts once per country pair.
    #[default]
    Whole,
    /// Each article distributes a total weight of 1 evenly over its
    /// country pairs.
    Fractional,
}

/// One-mode projection w = A·Aᵀ with the diagonal zeroed.
pub fn project(aff: &AffiliationMatrix) -> CountryGraph {
    project_with(aff, Counting::Whole)
}

pub fn project_with(aff: &AffiliationMatrix, counting: Counting) -> CountryGraph {
    let n = aff.countries.len();
    let mut weights = vec![vec![0.0; n]; n];
    for a in 0..aff.articles.len() {
        let members: Vec<usize> = (0..n).filter(|&c| aff.incidence[c][a] == 1).collect();
        let pairs = members.len() * (members.len().saturating_sub(1)) / 2;
        let w = match counting {
            Counting::Whole => 1.0,
            Counting::Fractional => {
                if pairs == 0 {
                    0.0
                } else {
                    1.0 / pairs as f64
                }
            }
        };
        for (x, &i) in members.iter().enumerate() {
            for &j in &members[x + 1..] {
                weights[i][j] += w;
                weights[j][i] += w;
            }
        }
    }
    CountryGraph { countries: aff.countries.clone(), weights }
}

/// Binary k-core decomposition by min-degree peeling. Edge weights are
/// ignored; an edge exists where w > 0.
pub fn k_core(graph: &CountryGraph) -> CoreDecomposition {
    let n = graph.countries.len();
    assert!(n > 0, "graph must be non-empty");
    let adjacency: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && graph.weights[i][j] > 0.0).collect())
        .collect();
    let mut degree: Vec<usize> = adjacency.iter().map(Vec::len).collect();
    let degenerate = degree.iter().all(|&d| d == 0);
    let mut removed = vec![false; n];
    let mut coreness = vec![0u32; n];
    let mut k = 0usize;
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !removed[v])
            .min_by_key(|&v| (degree[v], v))
            .unwrap();
        k = k.max(degree[v]);
        coreness[v] = k as u32;
        removed[v] = true;
        for &u in &adjacency[v] {
            if !removed[u] {
                degree[u] -= 1;
            }
        }
    }
    let max_k = *coreness.iter().max().unwrap();
    let max_core = graph
        .countries
        .iter()
        .enumerate()
        .filter(|(i, _)| coreness[*i] == max_k)
        .map(|(_, c)| c.clone())
        .collect();
    CoreDecomposition { coreness, max_core, degenerate }
}

fn cosine_row(weights: &[Vec<f64>], i: usize) -> Vec<f64> {
    let n = weights.len();
    let norm_i = weights[i].iter().map(|v| v * v).sum::<f64>().sqrt();
    (0..n)
        .map(|j| {
            if i == j {
                if norm_i > 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                let norm_j = weights[j].iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm_i > 0.0 && norm_j > 0.0 {
                    let dot: f64 = weights[i].iter().zip(&weights[j]).map(|(a, b)| a * b).sum();
                    (dot / (norm_i * norm_j)).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            }
        })
        .collect()
}

/// Salton's cosine between the zero-diagonal weight rows. Zero rows
/// yield 0 against everything (diagonal included) and are flagged
/// isolated.
#[cfg(feature = "parallel")]
pub fn cosine_normalize(graph: &CountryGraph) -> CosineMatrix {
    let n = graph.countries.len();
    let values: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| cosine_row(&graph.weights, i))
        .collect();
    finish_cosine(graph, values)
}

#[cfg(not(feature = "parallel"))]
pub fn cosine_normalize(graph: &CountryGraph) -> CosineMatrix {
    cosine_normalize_seq(graph)
}

/// Sequential reference path for `cosine_normalize`; the parallel path
/// must produce identical values row for row.
pub fn cosine_normalize_seq(graph: &CountryGraph) -> CosineMatrix {
    let n = graph.countries.len();
    let values: Vec<Vec<f64>> = (0..n).map(|i| cosine_row(&graph.weights, i)).collect();
    finish_cosine(graph, values)
}

fn finish_cosine(graph: &CountryGraph, values: Vec<Vec<f64>>) -> CosineMatrix {
    let isolated = graph
        .countries
        .iter()
        .enumerate()
        .filter(|(i, _)| graph.weights[*i].iter().all(|&w| w == 0.0))
        .map(|(_, c)| c.clone())
        .collect();
    CosineMatrix { countries: graph.countries.clone(), values, isolated }
}

/// Keep edges with cosine strictly greater than the cutoff. Isolated
/// nodes are retained in the graph and listed separately.
pub fn threshold_network(cos: &CosineMatrix, cutoff: f64) -> (CountryGraph, Vec<String>) {
    let n = cos.countries.len();
    let mut weights = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && cos.values[i][j] > cutoff {
                weights[i][j] = cos.values[i][j];
            }
        }
    }
    let isolated = cos
        .countries
        .iter()
        .enumerate()
        .filter(|(i, _)| weights[*i].iter().all(|&w| w == 0.0))
        .map(|(_, c)| c.clone())
        .collect();
    (CountryGraph { countries: cos.countries.clone(), weights }, isolated)
}

/// Table-2-shaped CSV row set: year, total, international, percent.
pub fn collaboration_csv(rows: &[(i32, ShareReport)]) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["year", "articles", "international", "percent"]).unwrap();
    for (year, share) in rows {
        wtr.write_record([
            year.to_string(),
            share.total.to_string(),
            share.international.to_string(),
            format!("{:.1}", share.percent),
        ])
        .unwrap();
    }
    String::from_utf8(wtr.into_inner().unwrap()).unwrap()
}

/// Table-3-shaped CSV: year, participating countries, core group size.
pub fn core_groups_csv(rows: &[(i32, usize, usize)]) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["year", "countries", "core_group"]).unwrap();
    for (year, countries, core) in rows {
        wtr.write_record([year.to_string(), countries.to_string(), core.to_string()])
            .unwrap();
    }
    String::from_utf8(wtr.into_inner().unwrap()).unwrap()
}
