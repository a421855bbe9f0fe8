//! Aggregated journal-journal citation matrices and citation
//! environments around a seed journal.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::record_ingest::BiblioRecord;

/// Citing × cited count matrix over a lexicographically sorted journal
/// index. The index is the union of citing and cited journal names, so
/// the matrix is square; journals that never cite have zero rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JournalCitationMatrix {
    pub journals: Vec<String>,
    pub counts: Vec<Vec<u64>>,
    pub year: i32,
}

impl JournalCitationMatrix {
    pub fn index_of(&self, journal: &str) -> Option<usize> {
        self.journals.binary_search_by(|j| j.as_str().cmp(journal)).ok()
    }

    /// Total citations received by the journal at `col`.
    pub fn column_sum(&self, col: usize) -> u64 {
        self.counts.iter().map(|row| row[col]).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// CSV export: header row of cited journal names, first column
    /// citing journal names, integer cells.
    pub fn to_csv(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let mut header = vec![String::new()];
        header.extend(self.journals.iter().cloned());
        wtr.write_record(&header).unwrap();
        for (i, row) in self.counts.iter().enumerate() {
            let mut rec = vec![self.journals[i].clone()];
            rec.extend(row.iter().map(|c| c.to_string()));
            wtr.write_record(&rec).unwrap();
        }
        String::from_utf8(wtr.into_inner().unwrap()).unwrap()
    }

    pub fn from_csv(text: &str, year: i32) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(text.as_bytes());
        let mut rows = rdr.records();
        let header = rows
            .next()
            .ok_or_else(|| Error::Config("matrix csv: empty".into()))??;
        let journals: Vec<String> = header.iter().skip(1).map(String::from).collect();
        let mut counts = Vec::new();
        for rec in rows {
            let rec = rec?;
            let name = rec.get(0).unwrap_or("");
            if journals.get(counts.len()).map(String::as_str) != Some(name) {
                return Err(Error::Config(format!(
                    "matrix csv: row label {name:?} does not match column order"
                )));
            }
            let row: std::result::Result<Vec<u64>, _> =
                rec.iter().skip(1).map(|c| c.parse::<u64>()).collect();
            counts.push(row.map_err(|e| Error::Config(format!("matrix csv: {e}")))?);
        }
        if counts.len() != journals.len() {
            return Err(Error::Config("matrix csv: not square".into()));
        }
        Ok(JournalCitationMatrix { journals, counts, year })
    }
}

/// Build the citation matrix for one corpus year.
///
/// Cited references are counted as a multiset: a journal cited twice by
/// one article contributes two. Set `binary_per_article` to count each
/// (article, cited journal) pair once instead.
pub fn build_matrix(records: &[BiblioRecord], year: i32) -> Result<JournalCitationMatrix> {
    build_matrix_with(records, year, false)
}

pub fn build_matrix_with(
    records: &[BiblioRecord],
    year: i32,
    binary_per_article: bool,
) -> Result<JournalCitationMatrix> {
    let in_year: Vec<&BiblioRecord> = records.iter().filter(|r| r.pub_year == year).collect();
    if in_year.is_empty() {
        return Err(Error::NoRecordsForYear(year));
    }
    let mut names: Vec<&str> = Vec::new();
    for r in &in_year {
        names.push(r.journal.as_str());
        for c in &r.cited_refs {
            names.push(c.cited_journal.as_str());
        }
    }
    names.sort_unstable();
    names.dedup();
    let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let n = names.len();
    let mut counts = vec![vec![0u64; n]; n];
    for r in &in_year {
        let i = index[r.journal.as_str()];
        if binary_per_article {
            let mut cited: Vec<usize> =
                r.cited_refs.iter().map(|c| index[c.cited_journal.as_str()]).collect();
            cited.sort_unstable();
            cited.dedup();
            for j in cited {
                counts[i][j] += 1;
            }
        } else {
            for c in &r.cited_refs {
                counts[i][index[c.cited_journal.as_str()]] += 1;
            }
        }
    }
    Ok(JournalCitationMatrix {
        journals: names.into_iter().map(String::from).collect(),
        counts,
        year,
    })
}

/// Case-insensitive substring search over the journal index.
pub fn find_seed_journals(journals: &[String], keywords: &[String]) -> Vec<String> {
    let keys: Vec<String> = keywords.iter().map(|k| k.to_uppercase()).collect();
    let mut hits: Vec<String> = journals
        .iter()
        .filter(|j| {
            let upper = j.to_uppercase();
            keys.iter().any(|k| upper.contains(k.as_str()))
        })
        .cloned()
        .collect();
    hits.sort();
    hits
}

/// Which citation direction qualifies a journal for the environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdSide {
    /// Journals that cite the seed (default; the seed's citing galaxy).
    #[default]
    Citing,
    /// Journals the seed cites.
    Cited,
    /// Either direction.
    Union,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CitationEnvironment {
    pub seed: String,
    pub year: i32,
    /// Sorted member journals, seed included.
    pub members: Vec<String>,
    /// Counts restricted to members × members.
    pub submatrix: Vec<Vec<u64>>,
    /// Each member's full citing row over the complete journal index,
    /// kept for correlating citing patterns downstream.
    pub profiles: Vec<Vec<f64>>,
}

pub fn citation_environment(
    matrix: &JournalCitationMatrix,
    seed: &str,
    threshold: f64,
) -> Result<CitationEnvironment> {
    citation_environment_with(matrix, seed, threshold, ThresholdSide::Citing)
}

/// Members are the seed plus every journal whose citation traffic with
/// the seed reaches `threshold` (inclusive) as a fraction of the seed's
/// received (citing side) or given (cited side) totals.
pub fn citation_environment_with(
    matrix: &JournalCitationMatrix,
    seed: &str,
    threshold: f64,
    side: ThresholdSide,
) -> Result<CitationEnvironment> {
    assert!(threshold > 0.0 && threshold < 1.0, "threshold must be in (0, 1)");
    let s = matrix
        .index_of(seed)
        .ok_or_else(|| Error::UnknownJournal(seed.to_string()))?;
    let received = matrix.column_sum(s);
    let given: u64 = matrix.counts[s].iter().sum();
    let qualifies = |j: usize| -> bool {
        let by_citing =
            received > 0 && matrix.counts[j][s] as f64 >= threshold * received as f64;
        let by_cited = given > 0 && matrix.counts[s][j] as f64 >= threshold * given as f64;
        match side {
            ThresholdSide::Citing => by_citing,
            ThresholdSide::Cited => by_cited,
            ThresholdSide::Union => by_citing || by_cited,
        }
    };
    let uncited = match side {
        ThresholdSide::Citing => received == 0,
        ThresholdSide::Cited => given == 0,
        ThresholdSide::Union => received == 0 && given == 0,
    };
    if uncited {
        return Err(Error::SeedUncited(seed.to_string()));
    }
    let mut idx: Vec<usize> = (0..matrix.journals.len())
        .filter(|&j| j == s || qualifies(j))
        .collect();
    idx.sort_unstable(); // journal index is sorted, so members stay sorted
    let members: Vec<String> = idx.iter().map(|&j| matrix.journals[j].clone()).collect();
    let submatrix: Vec<Vec<u64>> = idx
        .iter()
        .map(|&i| idx.iter().map(|&j| matrix.counts[i][j]).collect())
        .collect();
    let profiles: Vec<Vec<f64>> = idx
        .iter()
        .map(|&i| matrix.counts[i].iter().map(|&c| c as f64).collect())
        .collect();
    Ok(CitationEnvironment {
        seed: seed.to_string(),
        year: matrix.year,
        members,
        submatrix,
        profiles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record_ingest::CitedRef;

    fn rec(id: &str, journal: &str, year: i32, cited: &[&str]) -> BiblioRecord {
        BiblioRecord {
            record_id: id.into(),
            journal: journal.into(),
            pub_year: year,
            authors: vec![],
            addresses: vec![],
            cited_refs: cited
                .iter()
                .map(|c| CitedRef { cited_journal: c.to_string(), cited_year: None })
                .collect(),
        }
    }

    #[test]
    fn multiset_counting() {
        let records: Vec<_> = (0..3)
            .map(|i| rec(&format!("r{i}"), "A", 2000, &["B", "B"]))
            .collect();
        let m = build_matrix(&records, 2000).unwrap();
        let a = m.index_of("A").unwrap();
        let b = m.index_of("B").unwrap();
        assert_eq!(m.counts[a][b], 6);
    }

    #[test]
    fn self_citation_hits_diagonal() {
        let records = vec![rec("r0", "A", 2000, &["A"])];
        let m = build_matrix(&records, 2000).unwrap();
        let a = m.index_of("A").unwrap();
        assert_eq!(m.counts[a][a], 1);
    }

    #[test]
    fn wrong_year_only_is_error() {
        let records = vec![rec("r0", "A", 1999, &["B"])];
        assert!(matches!(build_matrix(&records, 2000), Err(Error::NoRecordsForYear(2000))));
    }

    #[test]
    fn total_count_conservation() {
        let records = vec![
            rec("r0", "A", 2000, &["B", "B", "C"]),
            rec("r1", "B", 2000, &["A"]),
            rec("r2", "C", 1999, &["A", "A"]),
        ];
        let m = build_matrix(&records, 2000).unwrap();
        assert_eq!(m.total(), 4); // 1999 record filtered out
    }

    #[test]
    fn seed_search() {
        let journals: Vec<String> = ["BULL SEISMOL SOC AM", "J GEOPHYS RES", "J SEISMOL"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let hits = find_seed_journals(&journals, &["SEISMOL".into()]);
        assert_eq!(hits, vec!["BULL SEISMOL SOC AM", "J SEISMOL"]);
        assert!(find_seed_journals(&journals, &["EARTHQUAKE".into()]).is_empty());
        let all = find_seed_journals(&journals, &["".into()]);
        assert_eq!(all.len(), 3);
    }

    fn env_fixture() -> JournalCitationMatrix {
        // SEED receives 200 citations: A gives 3 (1.5%), B gives 1
        // (0.5%), C gives 2 (exactly 1%), SEED itself 194.
        let journals: Vec<String> =
            ["A", "B", "C", "SEED"].iter().map(|s| s.to_string()).collect();
        let counts = vec![
            vec![0, 0, 0, 3],
            vec![0, 0, 0, 1],
            vec![0, 0, 0, 2],
            vec![0, 0, 0, 194],
        ];
        JournalCitationMatrix { journals, counts, year: 2000 }
    }

    #[test]
    fn environment_threshold_arithmetic() {
        let env = citation_environment(&env_fixture(), "SEED", 0.01).unwrap();
        // A (1.5%) in, B (0.5%) out, C (1.0%) in by the inclusive rule.
        assert_eq!(env.members, vec!["A", "C", "SEED"]);
    }

    #[test]
    fn self_cited_only_seed() {
        let journals: Vec<String> = ["SEED", "X"].iter().map(|s| s.to_string()).collect();
        let counts = vec![vec![10, 0], vec![0, 0]];
        let m = JournalCitationMatrix { journals, counts, year: 2000 };
        let env = citation_environment(&m, "SEED", 0.01).unwrap();
        assert_eq!(env.members, vec!["SEED"]);
    }

    #[test]
    fn uncited_seed_is_error() {
        let journals: Vec<String> = ["SEED", "X"].iter().map(|s| s.to_string()).collect();
        let counts = vec![vec![0, 5], vec![0, 0]];
        let m = JournalCitationMatrix { journals, counts, year: 2000 };
        assert!(matches!(
            citation_environment(&m, "SEED", 0.01),
            Err(Error::SeedUncited(_))
        ));
    }

    #[test]
    fn raising_threshold_never_adds_members() {
        let m = env_fixture();
        let lo = citation_environment(&m, "SEED", 0.005).unwrap();
        let hi = citation_environment(&m, "SEED", 0.012).unwrap();
        assert!(hi.members.iter().all(|j| lo.members.contains(j)));
    }

    #[test]
    fn csv_round_trip() {
        let m = env_fixture();
        let csv = m.to_csv();
        let back = JournalCitationMatrix::from_csv(&csv, 2000).unwrap();
        assert_eq!(m, back);
    }
}
