//! Factor analysis of citing patterns: principal component extraction
//! on the correlation matrix, varimax rotation, cluster assignment,
//! central tendency journals, and year-over-year cluster tracking.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::journal_citation::CitationEnvironment;
use crate::linalg::{jacobi_eigen, pearson, Matrix};

const SYMMETRY_TOL: f64 = 1e-8;
const PSD_TOL: f64 = 1e-8;
/// Varimax stops when the criterion improves by less than this.
const VARIMAX_TOL: f64 = 1e-10;
const VARIMAX_MAX_SWEEPS: usize = 500;
/// Minimum Jaccard overlap for two clusters to count as the same
/// cluster in adjacent years.
const MATCH_JACCARD: f64 = 0.3;

/// Pearson correlations between the citing-pattern rows of the
/// environment members, taken over the full journal index.
pub fn correlation_matrix(env: &CitationEnvironment) -> Result<Matrix> {
    if env.members.len() < 3 {
        return Err(Error::EnvironmentTooSmall(env.members.len()));
    }
    let n = env.members.len();
    let mut corr = vec![vec![0.0; n]; n];
    for i in 0..n {
        corr[i][i] = 1.0;
        for j in (i + 1)..n {
            let r = pearson(&env.profiles[i], &env.profiles[j]).ok_or_else(|| {
                let degenerate = if crate::linalg::pearson(&env.profiles[i], &env.profiles[i])
                    .is_none()
                {
                    &env.members[i]
                } else {
                    &env.members[j]
                };
                Error::DegenerateVariable(degenerate.clone())
            })?;
            corr[i][j] = r;
            corr[j][i] = r;
        }
    }
    Ok(corr)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rotation {
    None,
    #[default]
    Varimax,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    pub variables: Vec<String>,
    pub correlation: Matrix,
    /// All eigenvalues of the correlation matrix, descending.
    pub eigenvalues: Vec<f64>,
    /// variables × n_factors, after rotation and sign fixing.
    pub loadings: Vec<Vec<f64>>,
    pub n_factors: usize,
    /// Per-factor member sets; empty until `assign_clusters` runs.
    pub clusters: Vec<BTreeSet<String>>,
    pub unclustered: BTreeSet<String>,
    /// Variables whose loadings exceed the threshold on two factors.
    pub complex: BTreeSet<String>,
    /// Per-factor central tendency journal.
    pub ctj: Vec<Option<String>>,
}

impl FactorModel {
    /// Build a model directly from an existing loading table, for
    /// re-deriving cluster decisions without the underlying data.
    pub fn from_loadings(variables: Vec<String>, loadings: Vec<Vec<f64>>) -> Self {
        let n_factors = loadings.first().map_or(0, Vec::len);
        let eigenvalues = (0..n_factors)
            .map(|f| loadings.iter().map(|row| row[f] * row[f]).sum())
            .collect();
        FactorModel {
            variables,
            correlation: Vec::new(),
            eigenvalues,
            loadings,
            n_factors,
            clusters: vec![BTreeSet::new(); n_factors],
            unclustered: BTreeSet::new(),
            complex: BTreeSet::new(),
            ctj: vec![None; n_factors],
        }
    }

    /// Communality (row sum of squared loadings) of variable `i`.
    pub fn communality(&self, i: usize) -> f64 {
        self.loadings[i].iter().map(|l| l * l).sum()
    }

    /// Is `journal` the central tendency journal of any factor?
    pub fn is_ctj(&self, journal: &str) -> bool {
        self.ctj.iter().any(|c| c.as_deref() == Some(journal))
    }
}

fn validate_correlation(corr: &Matrix) -> Result<()> {
    let n = corr.len();
    for (i, row) in corr.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidCorrelation("not square".into()));
        }
        if (row[i] - 1.0).abs() > SYMMETRY_TOL {
            return Err(Error::InvalidCorrelation(format!("diagonal entry {i} is not 1")));
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() || v.abs() > 1.0 + SYMMETRY_TOL {
                return Err(Error::InvalidCorrelation(format!("entry ({i},{j}) out of [-1,1]")));
            }
            if (v - corr[j][i]).abs() > SYMMETRY_TOL {
                return Err(Error::InvalidCorrelation(format!("asymmetric at ({i},{j})")));
            }
        }
    }
    Ok(())
}

fn varimax_criterion(loadings: &[Vec<f64>]) -> f64 {
    let n = loadings.len() as f64;
    let k = loadings.first().map_or(0, Vec::len);
    let mut total = 0.0;
    for f in 0..k {
        let sq: Vec<f64> = loadings.iter().map(|row| row[f] * row[f]).collect();
        let mean = sq.iter().sum::<f64>() / n;
        total += sq.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
    }
    total
}

/// Normalized (Kaiser) varimax rotation by pairwise planar rotations.
///
/// Returns the rotated loadings and the accumulated orthogonal
/// rotation matrix R with `rotated = unrotated · R`.
pub fn varimax(loadings: &Matrix) -> (Matrix, Matrix) {
    let n = loadings.len();
    let k = loadings.first().map_or(0, Vec::len);
    let mut rot = vec![vec![0.0; k]; k];
    for (i, row) in rot.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    if k < 2 || n == 0 {
        return (loadings.clone(), rot);
    }
    // Kaiser normalization: rotate rows scaled to unit communality.
    let comm: Vec<f64> = loadings
        .iter()
        .map(|row| row.iter().map(|l| l * l).sum::<f64>().sqrt())
        .collect();
    let mut a: Matrix = loadings
        .iter()
        .zip(&comm)
        .map(|(row, &h)| {
            if h > 0.0 {
                row.iter().map(|l| l / h).collect()
            } else {
                row.clone()
            }
        })
        .collect();
    let mut prev = varimax_criterion(&a);
    for _ in 0..VARIMAX_MAX_SWEEPS {
        for p in 0..k - 1 {
            for q in p + 1..k {
                let mut sum_u = 0.0;
                let mut sum_v = 0.0;
                let mut sum_u2v2 = 0.0;
                let mut sum_uv = 0.0;
                for row in &a {
                    let u = row[p] * row[p] - row[q] * row[q];
                    let v = 2.0 * row[p] * row[q];
                    sum_u += u;
                    sum_v += v;
                    sum_u2v2 += u * u - v * v;
                    sum_uv += u * v;
                }
                let nf = n as f64;
                let num = 2.0 * (sum_uv - sum_u * sum_v / nf);
                let den = sum_u2v2 - (sum_u * sum_u - sum_v * sum_v) / nf;
                let phi = 0.25 * num.atan2(den);
                if phi.abs() < 1e-15 {
                    continue;
                }
                let (s, c) = phi.sin_cos();
                for row in a.iter_mut() {
                    let xp = row[p];
                    let xq = row[q];
                    row[p] = c * xp + s * xq;
                    row[q] = -s * xp + c * xq;
                }
                for row in rot.iter_mut() {
                    let xp = row[p];
                    let xq = row[q];
                    row[p] = c * xp + s * xq;
                    row[q] = -s * xp + c * xq;
                }
            }
        }
        let crit = varimax_criterion(&a);
        if (crit - prev).abs() < VARIMAX_TOL {
            break;
        }
        prev = crit;
    }
    let rotated: Matrix = a
        .iter()
        .zip(&comm)
        .map(|(row, &h)| {
            if h > 0.0 {
                row.iter().map(|l| l * h).collect()
            } else {
                row.clone()
            }
        })
        .collect();
    (rotated, rot)
}

pub fn fit(correlation: &Matrix, n_factors: Option<usize>) -> Result<FactorModel> {
    fit_with(correlation, n_factors, Rotation::Varimax)
}

/// Principal component extraction on the correlation matrix.
///
/// The factor count defaults to the Kaiser criterion (eigenvalue >= 1);
/// unrotated loadings are eigenvector × sqrt(eigenvalue); rotation per
/// `rotation`; each factor's sign is fixed so its largest-magnitude
/// loading is positive; factors are ordered by descending explained
/// variance after rotation.
pub fn fit_with(
    correlation: &Matrix,
    n_factors: Option<usize>,
    rotation: Rotation,
) -> Result<FactorModel> {
    validate_correlation(correlation)?;
    let n = correlation.len();
    let eig = jacobi_eigen(correlation);
    if eig.values.last().copied().unwrap_or(0.0) < -PSD_TOL {
        return Err(Error::InvalidCorrelation(format!(
            "not positive semidefinite (min eigenvalue {:.3e})",
            eig.values.last().unwrap()
        )));
    }
    let k = match n_factors {
        Some(k) => k.clamp(1, n),
        None => eig.values.iter().filter(|&&v| v >= 1.0).count().max(1),
    };
    let mut loadings: Matrix = (0..n)
        .map(|i| {
            (0..k)
                .map(|f| eig.vectors[f][i] * eig.values[f].max(0.0).sqrt())
                .collect()
        })
        .collect();
    if rotation == Rotation::Varimax {
        loadings = varimax(&loadings).0;
    }
    // sign convention: largest-magnitude loading of each factor positive
    for f in 0..k {
        let dominant = loadings
            .iter()
            .map(|row| row[f])
            .max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
            .unwrap_or(0.0);
        if dominant < 0.0 {
            for row in loadings.iter_mut() {
                row[f] = -row[f];
            }
        }
    }
    // order factors by descending explained variance after rotation
    let mut order: Vec<usize> = (0..k).collect();
    let explained: Vec<f64> = (0..k)
        .map(|f| loadings.iter().map(|row| row[f] * row[f]).sum())
        .collect();
    order.sort_by(|&a, &b| explained[b].partial_cmp(&explained[a]).unwrap());
    let loadings: Matrix = loadings
        .iter()
        .map(|row| order.iter().map(|&f| row[f]).collect())
        .collect();
    Ok(FactorModel {
        variables: Vec::new(),
        correlation: correlation.clone(),
        eigenvalues: eig.values,
        loadings,
        n_factors: k,
        clusters: vec![BTreeSet::new(); k],
        unclustered: BTreeSet::new(),
        complex: BTreeSet::new(),
        ctj: vec![None; k],
    })
}

/// Fit a model for an environment's correlation matrix and carry the
/// member names as variable names.
pub fn fit_environment(
    env: &CitationEnvironment,
    n_factors: Option<usize>,
    rotation: Rotation,
) -> Result<FactorModel> {
    let corr = correlation_matrix(env)?;
    let mut model = fit_with(&corr, n_factors, rotation)?;
    model.variables = env.members.clone();
    Ok(model)
}

pub const DEFAULT_LOAD_THRESHOLD: f64 = 0.5;

/// Assign each variable to the factor of its largest absolute loading,
/// clustered iff that (signed) loading reaches the threshold; flag
/// interfactorial complexity when a second loading also reaches it.
/// Fills `clusters`, `unclustered`, `complex`, and the per-factor CTJ.
pub fn assign_clusters(model: &mut FactorModel, load_threshold: f64) {
    let k = model.n_factors;
    model.clusters = vec![BTreeSet::new(); k];
    model.unclustered.clear();
    model.complex.clear();
    for (i, name) in model.variables.iter().enumerate() {
        let row = &model.loadings[i];
        let dominant = (0..k)
            .max_by(|&a, &b| row[a].abs().partial_cmp(&row[b].abs()).unwrap())
            .unwrap();
        if row[dominant] >= load_threshold {
            model.clusters[dominant].insert(name.clone());
            let above = (0..k).filter(|&f| row[f] >= load_threshold).count();
            if above >= 2 {
                model.complex.insert(name.clone());
            }
        } else {
            model.unclustered.insert(name.clone());
        }
    }
    model.ctj = (0..k)
        .map(|f| central_tendency_journal(model, f).unwrap())
        .collect();
}

/// The cluster member with the highest loading on the factor; ties go
/// to the lexicographically first name; `None` for an empty cluster.
pub fn central_tendency_journal(model: &FactorModel, factor: usize) -> Result<Option<String>> {
    if factor >= model.n_factors {
        return Err(Error::FactorOutOfRange(factor, model.n_factors));
    }
    let mut best: Option<(f64, &String)> = None;
    for (i, name) in model.variables.iter().enumerate() {
        if !model.clusters[factor].contains(name) {
            continue;
        }
        let l = model.loadings[i][factor];
        best = match best {
            None => Some((l, name)),
            Some((bl, bn)) => {
                if l > bl || (l == bl && name < bn) {
                    Some((l, name))
                } else {
                    Some((bl, bn))
                }
            }
        };
    }
    Ok(best.map(|(_, n)| n.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Emerged,
    Merged,
    Receded,
    CtjGained,
    CtjLost,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EventKind::Emerged => "EMERGED",
            EventKind::Merged => "MERGED",
            EventKind::Receded => "RECEDED",
            EventKind::CtjGained => "CTJ_GAINED",
            EventKind::CtjLost => "CTJ_LOST",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimelineEvent {
    pub year: i32,
    pub kind: EventKind,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTimeline {
    pub years: Vec<i32>,
    pub snapshots: Vec<Vec<BTreeSet<String>>>,
    pub events: Vec<TimelineEvent>,
}

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

fn set_label(s: &BTreeSet<String>) -> String {
    let names: Vec<&str> = s.iter().map(String::as_str).collect();
    format!("{{{}}}", names.join("; "))
}

/// Track cluster structure across years by maximum-Jaccard matching of
/// adjacent snapshots, and the tracked seed's CTJ status.
///
/// Models must have clusters assigned. Snapshots are ordered by year.
pub fn compare_years(snapshots: &[(i32, FactorModel)], seed: &str) -> ClusterTimeline {
    assert!(snapshots.len() >= 2, "need at least 2 years");
    let mut ordered: Vec<&(i32, FactorModel)> = snapshots.iter().collect();
    ordered.sort_by_key(|(y, _)| *y);
    let years: Vec<i32> = ordered.iter().map(|(y, _)| *y).collect();
    let sets: Vec<Vec<BTreeSet<String>>> = ordered
        .iter()
        .map(|(_, m)| m.clusters.iter().filter(|c| !c.is_empty()).cloned().collect())
        .collect();
    let mut events = Vec::new();
    for w in 0..years.len() - 1 {
        let year = years[w + 1];
        let prev = &sets[w];
        let next = &sets[w + 1];
        // each previous cluster maps to its best Jaccard successor
        let mut mapped_to: Vec<Vec<usize>> = vec![Vec::new(); next.len()];
        for (pi, p) in prev.iter().enumerate() {
            let best = (0..next.len())
                .filter(|&si| jaccard(p, &next[si]) >= MATCH_JACCARD)
                .max_by(|&a, &b| {
                    jaccard(p, &next[a]).partial_cmp(&jaccard(p, &next[b])).unwrap()
                });
            match best {
                Some(si) => mapped_to[si].push(pi),
                None => events.push(TimelineEvent {
                    year,
                    kind: EventKind::Receded,
                    detail: set_label(p),
                }),
            }
        }
        for (si, s) in next.iter().enumerate() {
            let has_predecessor = prev.iter().any(|p| jaccard(p, s) >= MATCH_JACCARD);
            if !has_predecessor {
                events.push(TimelineEvent {
                    year,
                    kind: EventKind::Emerged,
                    detail: set_label(s),
                });
            } else if mapped_to[si].len() >= 2 {
                let sources: Vec<String> =
                    mapped_to[si].iter().map(|&pi| set_label(&prev[pi])).collect();
                events.push(TimelineEvent {
                    year,
                    kind: EventKind::Merged,
                    detail: format!("{} -> {}", sources.join(" + "), set_label(s)),
                });
            }
        }
        let was_ctj = ordered[w].1.is_ctj(seed);
        let is_ctj = ordered[w + 1].1.is_ctj(seed);
        if is_ctj && !was_ctj {
            events.push(TimelineEvent {
                year,
                kind: EventKind::CtjGained,
                detail: seed.to_string(),
            });
        } else if was_ctj && !is_ctj {
            events.push(TimelineEvent {
                year,
                kind: EventKind::CtjLost,
                detail: seed.to_string(),
            });
        }
    }
    ClusterTimeline { years, snapshots: sets, events }
}

/// Loadings table CSV in the conventional layout:
/// journal, factor1..factorK.
pub fn loadings_csv(model: &FactorModel) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["journal".to_string()];
    header.extend((1..=model.n_factors).map(|f| format!("factor{f}")));
    wtr.write_record(&header).unwrap();
    for (i, name) in model.variables.iter().enumerate() {
        let mut rec = vec![name.clone()];
        rec.extend(model.loadings[i].iter().map(|l| format!("{l:.5}")));
        wtr.write_record(&rec).unwrap();
    }
    String::from_utf8(wtr.into_inner().unwrap()).unwrap()
}

/// Cluster membership CSV: factor, journal, loading, flags.
pub fn clusters_csv(model: &FactorModel) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["factor", "journal", "loading", "ctj", "complex"]).unwrap();
    for (f, cluster) in model.clusters.iter().enumerate() {
        for name in cluster {
            let i = model.variables.iter().position(|v| v == name).unwrap();
            wtr.write_record([
                (f + 1).to_string(),
                name.clone(),
                format!("{:.5}", model.loadings[i][f]),
                (model.ctj[f].as_deref() == Some(name)).to_string(),
                model.complex.contains(name).to_string(),
            ])
            .unwrap();
        }
    }
    for name in &model.unclustered {
        let i = model.variables.iter().position(|v| v == name).unwrap();
        let dominant = model.loadings[i]
            .iter()
            .cloned()
            .max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
            .unwrap_or(0.0);
        wtr.write_record([
            "unclustered".to_string(),
            name.clone(),
            format!("{dominant:.5}"),
            "false".to_string(),
            "false".to_string(),
        ])
        .unwrap();
    }
    String::from_utf8(wtr.into_inner().unwrap()).unwrap()
}

pub fn timeline_csv(timeline: &ClusterTimeline) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["year", "event", "detail"]).unwrap();
    for e in &timeline.events {
        wtr.write_record([e.year.to_string(), e.kind.to_string(), e.detail.clone()])
            .unwrap();
    }
    String::from_utf8(wtr.into_inner().unwrap()).unwrap()
}

/// Correlation matrix CSV with full-precision cells (round-trips
/// exactly through parse).
pub fn correlation_csv(variables: &[String], corr: &Matrix) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec![String::new()];
    header.extend(variables.iter().cloned());
    wtr.write_record(&header).unwrap();
    for (i, row) in corr.iter().enumerate() {
        let mut rec = vec![variables[i].clone()];
        rec.extend(row.iter().map(|v| format!("{v}")));
        wtr.write_record(&rec).unwrap();
    }
    String::from_utf8(wtr.into_inner().unwrap()).unwrap()
}

pub fn parse_correlation_csv(text: &str) -> Result<(Vec<String>, Matrix)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut rows = rdr.records();
    let header = rows
        .next()
        .ok_or_else(|| Error::Config("correlation csv: empty".into()))??;
    let variables: Vec<String> = header.iter().skip(1).map(String::from).collect();
    let mut corr = Vec::new();
    for rec in rows {
        let rec = rec?;
        let row: std::result::Result<Vec<f64>, _> =
            rec.iter().skip(1).map(|c| c.parse::<f64>()).collect();
        corr.push(row.map_err(|e| Error::Config(format!("correlation csv: {e}")))?);
    }
    if corr.len() != variables.len() {
        return Err(Error::Config("correlation csv: not square".into()));
    }
    Ok((variables, corr))
}
