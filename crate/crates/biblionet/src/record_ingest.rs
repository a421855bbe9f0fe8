//! Parser for field-tagged bibliographic export files and address
//! normalization down to country tokens.
//!
//! # Input grammar
//!
//! A corpus file is a sequence of records. A record starts at a `PT`
//! tag line and ends at an `ER` line; an optional trailing `EF` marks
//! the end of the file. Each field line is a two-letter tag, a space,
//! and a value; continuation lines are indented with whitespace and
//! extend the value list of the preceding tag. Recognized tags are
//! `PT`, `AU`, `TI`, `SO`, `PY`, `C1`, `CR`, `UT`; unknown tags are
//! consumed and ignored. Both LF and CRLF line endings are accepted.
//!
//! A `CR` value is a comma-separated cited reference. If some segment
//! parses as a year in [1800, 2100], the following segment is the
//! cited journal (`AUTHOR, 1998, J GEOPHYS RES` style); otherwise the
//! last segment is taken as the journal name.

use std::collections::BTreeSet;
use std::collections::HashMap;
use std::io::BufRead;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const UNKNOWN: &str = "UNKNOWN";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitedRef {
    pub cited_journal: String,
    pub cited_year: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiblioRecord {
    pub record_id: String,
    pub journal: String,
    pub pub_year: i32,
    pub authors: Vec<String>,
    pub addresses: Vec<String>,
    pub cited_refs: Vec<CitedRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseWarning {
    pub line: usize,
    pub record_id: String,
    pub reason: String,
}

/// Uppercase, collapse internal whitespace, strip trailing punctuation.
pub fn normalize_journal(raw: &str) -> String {
    let upper = raw.trim().to_uppercase();
    let collapsed: Vec<&str> = upper.split_whitespace().collect();
    let mut s = collapsed.join(" ");
    while s.ends_with(['.', ',', ';', ':']) {
        s.pop();
        s.truncate(s.trim_end().len());
    }
    s
}

struct RawField {
    tag: String,
    values: Vec<String>,
    line: usize,
}

fn year_in_range(y: i32) -> bool {
    (1800..=2100).contains(&y)
}

fn parse_cited_ref(value: &str) -> Option<CitedRef> {
    let segments: Vec<&str> = value.split(',').map(str::trim).collect();
    for (i, seg) in segments.iter().enumerate() {
        if let Ok(y) = seg.parse::<i32>() {
            if year_in_range(y) {
                let journal = segments
                    .iter()
                    .skip(i + 1)
                    .find(|s| !s.is_empty())
                    .map(|s| normalize_journal(s))?;
                if journal.is_empty() {
                    return None;
                }
                return Some(CitedRef {
                    cited_journal: journal,
                    cited_year: Some(y),
                });
            }
        }
    }
    let journal = normalize_journal(segments.last()?);
    if journal.is_empty() {
        return None;
    }
    Some(CitedRef {
        cited_journal: journal,
        cited_year: None,
    })
}

fn build_record(
    fields: &[RawField],
    start_line: usize,
    warnings: &mut Vec<ParseWarning>,
) -> Option<BiblioRecord> {
    let get = |tag: &str| -> Option<&RawField> { fields.iter().find(|f| f.tag == tag) };
    let record_id = get("UT")
        .and_then(|f| f.values.first())
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .unwrap_or_else(|| format!("REC:{start_line}"));

    let journal = match get("SO").and_then(|f| f.values.first()) {
        Some(v) => normalize_journal(v),
        None => String::new(),
    };
    if journal.is_empty() {
        warnings.push(ParseWarning {
            line: start_line,
            record_id,
            reason: "missing journal (SO)".into(),
        });
        return None;
    }

    let py = get("PY");
    let pub_year = match py.and_then(|f| f.values.first()).map(|v| v.trim().parse::<i32>()) {
        Some(Ok(y)) if year_in_range(y) => y,
        _ => {
            warnings.push(ParseWarning {
                line: py.map(|f| f.line).unwrap_or(start_line),
                record_id,
                reason: "invalid year".into(),
            });
            return None;
        }
    };

    let authors: Vec<String> = fields
        .iter()
        .filter(|f| f.tag == "AU")
        .flat_map(|f| f.values.iter())
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect();
    let addresses: Vec<String> = fields
        .iter()
        .filter(|f| f.tag == "C1")
        .flat_map(|f| f.values.iter())
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect();

    let mut cited_refs = Vec::new();
    for field in fields.iter().filter(|f| f.tag == "CR") {
        for value in &field.values {
            if value.trim().is_empty() {
                continue;
            }
            match parse_cited_ref(value) {
                Some(r) => cited_refs.push(r),
                None => warnings.push(ParseWarning {
                    line: field.line,
                    record_id: record_id.clone(),
                    reason: "unparseable cited reference".into(),
                }),
            }
        }
    }

    Some(BiblioRecord {
        record_id,
        journal,
        pub_year,
        authors,
        addresses,
        cited_refs,
    })
}

/// Parse a field-tagged corpus stream.
///
/// Malformed records are skipped and reported as warnings with line
/// numbers; a stream yielding zero well-formed records is an error.
pub fn parse_corpus<R: BufRead>(reader: R) -> Result<(Vec<BiblioRecord>, Vec<ParseWarning>)> {
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut seen_ids: BTreeSet<String> = BTreeSet::new();

    let mut fields: Vec<RawField> = Vec::new();
    let mut in_record = false;
    let mut record_start = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let raw = line?;
        let line = raw.strip_suffix('\r').unwrap_or(&raw);
        if line.trim().is_empty() {
            continue;
        }
        if !in_record {
            if line.starts_with("PT ") || line == "PT" {
                in_record = true;
                record_start = line_no;
                fields.clear();
                fields.push(RawField {
                    tag: "PT".into(),
                    values: vec![line.get(3..).unwrap_or("").to_string()],
                    line: line_no,
                });
            }
            continue;
        }
        if line == "ER" {
            if let Some(rec) = build_record(&fields, record_start, &mut warnings) {
                if seen_ids.contains(&rec.record_id) {
                    warnings.push(ParseWarning {
                        line: record_start,
                        record_id: rec.record_id.clone(),
                        reason: "duplicate record id".into(),
                    });
                } else {
                    seen_ids.insert(rec.record_id.clone());
                    records.push(rec);
                }
            }
            in_record = false;
            continue;
        }
        if line.starts_with(' ') || line.starts_with('\t') {
            // continuation of the previous tag
            if let Some(last) = fields.last_mut() {
                last.values.push(line.trim().to_string());
            }
            continue;
        }
        let is_tag =
            |t: &str| t.len() == 2 && t.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit());
        let (tag, value) = match line.split_once(' ') {
            Some((t, v)) if is_tag(t) => (t.to_string(), v.to_string()),
            _ if is_tag(line) => (line.to_string(), String::new()),
            _ => {
                warnings.push(ParseWarning {
                    line: line_no,
                    record_id: String::new(),
                    reason: "unrecognized line".into(),
                });
                continue;
            }
        };
        fields.push(RawField {
            tag,
            values: vec![value],
            line: line_no,
        });
    }
    if in_record {
        warnings.push(ParseWarning {
            line: record_start,
            record_id: String::new(),
            reason: "record not terminated by ER".into(),
        });
    }
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok((records, warnings))
}

/// Render warnings as a CSV report (`line,record_id,reason`).
pub fn warnings_csv(warnings: &[ParseWarning]) -> String {
    let mut out = String::from("line,record_id,reason\n");
    for w in warnings {
        out.push_str(&format!("{},{},{}\n", w.line, w.record_id, w.reason));
    }
    out
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CountryOptions {
    /// Merge ENGLAND / SCOTLAND / WALES / NORTH-IRELAND into UK.
    pub merge_uk: bool,
}

/// Canonical country tokens in the source-data convention.
const COUNTRIES: &[&str] = &[
    "ALBANIA",
    "ALGERIA",
    "ARGENTINA",
    "ARMENIA",
    "AUSTRALIA",
    "AUSTRIA",
    "AZERBAIJAN",
    "BANGLADESH",
    "BELARUS",
    "BELGIUM",
    "BOLIVIA",
    "BOSNIA-&-HERCEG",
    "BRAZIL",
    "BULGARIA",
    "CANADA",
    "CHILE",
    "COLOMBIA",
    "COSTA-RICA",
    "CROATIA",
    "CUBA",
    "CYPRUS",
    "CZECH-REPUBLIC",
    "DENMARK",
    "ECUADOR",
    "EGYPT",
    "ENGLAND",
    "ESTONIA",
    "ETHIOPIA",
    "FINLAND",
    "FRANCE",
    "GEORGIA",
    "GERMANY",
    "GHANA",
    "GREECE",
    "GUATEMALA",
    "HUNGARY",
    "ICELAND",
    "INDIA",
    "INDONESIA",
    "IRAN",
    "IRAQ",
    "IRELAND",
    "ISRAEL",
    "ITALY",
    "JAPAN",
    "JORDAN",
    "KAZAKHSTAN",
    "KENYA",
    "KUWAIT",
    "KYRGYZSTAN",
    "LATVIA",
    "LEBANON",
    "LITHUANIA",
    "LUXEMBOURG",
    "MACEDONIA",
    "MALAYSIA",
    "MEXICO",
    "MONGOLIA",
    "MOROCCO",
    "NEPAL",
    "NETHERLANDS",
    "NEW-ZEALAND",
    "NICARAGUA",
    "NIGERIA",
    "NORTH-IRELAND",
    "NORWAY",
    "PAKISTAN",
    "PANAMA",
    "PARAGUAY",
    "PEOPLES-R-CHINA",
    "PERU",
    "PHILIPPINES",
    "POLAND",
    "PORTUGAL",
    "ROMANIA",
    "RUSSIA",
    "SAUDI-ARABIA",
    "SCOTLAND",
    "SERBIA",
    "SINGAPORE",
    "SLOVAKIA",
    "SLOVENIA",
    "SOUTH-AFRICA",
    "SOUTH-KOREA",
    "SPAIN",
    "SRI-LANKA",
    "SWEDEN",
    "SWITZERLAND",
    "SYRIA",
    "TAIWAN",
    "TAJIKISTAN",
    "THAILAND",
    "TUNISIA",
    "TURKEY",
    "TURKMENISTAN",
    "UK",
    "UKRAINE",
    "UNITED-ARAB-EMIRATES",
    "URUGUAY",
    "USA",
    "UZBEKISTAN",
    "VENEZUELA",
    "VIETNAM",
    "WALES",
    "YUGOSLAVIA",
];

/// Irregular spellings seen in source data, mapped to canonical tokens.
const ALIASES: &[(&str, &str)] = &[
    ("BOSNIA & HERCEG", "BOSNIA-&-HERCEG"),
    ("BYELARUS", "BELARUS"),
    ("FED REP GER", "GERMANY"),
    ("HOLLAND", "NETHERLANDS"),
    ("KOREA", "SOUTH-KOREA"),
    ("P R CHINA", "PEOPLES-R-CHINA"),
    ("PEOPLES R CHINA", "PEOPLES-R-CHINA"),
    ("PR CHINA", "PEOPLES-R-CHINA"),
    ("REP OF GEORGIA", "GEORGIA"),
    ("U ARAB EMIRATES", "UNITED-ARAB-EMIRATES"),
    ("UNITED KINGDOM", "UK"),
    ("USSR", "RUSSIA"),
    ("VIET NAM", "VIETNAM"),
];

static STATE_ZIP: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[A-Z]{2} \d{5}(-\d{4})?( USA)?$").unwrap());
static TABLE: LazyLock<(BTreeSet<&'static str>, HashMap<&'static str, &'static str>)> =
    LazyLock::new(|| {
        (
            COUNTRIES.iter().copied().collect(),
            ALIASES.iter().copied().collect(),
        )
    });

/// Resolve the country of a raw address string.
///
/// Takes the last comma-separated segment, uppercased and trimmed; a
/// US-state-plus-ZIP segment maps to USA; aliases map to canonical
/// tokens; anything else is UNKNOWN. Total over non-empty strings.
pub fn extract_country(address: &str) -> String {
    extract_country_with(address, &CountryOptions::default())
}

pub fn extract_country_with(address: &str, opts: &CountryOptions) -> String {
    let (canonical, aliases) = &*TABLE;
    let segment = address.rsplit(',').next().unwrap_or("");
    let norm = normalize_journal(segment); // same uppercase/collapse rules
    if norm.is_empty() {
        return UNKNOWN.to_string();
    }
    let token = if STATE_ZIP.is_match(&norm) {
        "USA".to_string()
    } else if let Some(&canon) = aliases.get(norm.as_str()) {
        canon.to_string()
    } else {
        let hyphenated = norm.replace(' ', "-");
        match canonical.get(hyphenated.as_str()) {
            Some(&c) => c.to_string(),
            None => return UNKNOWN.to_string(),
        }
    };
    if opts.merge_uk && matches!(token.as_str(), "ENGLAND" | "SCOTLAND" | "WALES" | "NORTH-IRELAND")
    {
        return "UK".to_string();
    }
    token
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "PT J\nAU Smith, J\n   Tanaka, K\nTI Some title\nSO Bull Seismol Soc Am\nPY 2000\nC1 Stanford Univ, Dept Geophys, Stanford, CA 94305 USA\nCR Jones A, 1998, J GEOPHYS RES\n   Lee B, 1999, GEOPHYS RES LETT\nUT ISI:000001\nER\n";

    #[test]
    fn minimal_record() {
        let (records, warnings) = parse_corpus(MINIMAL.as_bytes()).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert_eq!(r.journal, "BULL SEISMOL SOC AM");
        assert_eq!(r.pub_year, 2000);
        assert_eq!(r.authors.len(), 2);
        assert_eq!(r.addresses.len(), 1);
        assert_eq!(r.cited_refs.len(), 2);
        assert_eq!(r.cited_refs[0].cited_journal, "J GEOPHYS RES");
        assert_eq!(r.cited_refs[0].cited_year, Some(1998));
        assert_eq!(r.record_id, "ISI:000001");
    }

    #[test]
    fn crlf_accepted() {
        let crlf = MINIMAL.replace('\n', "\r\n");
        let (records, _) = parse_corpus(crlf.as_bytes()).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].journal, "BULL SEISMOL SOC AM");
    }

    #[test]
    fn missing_addresses_is_legal() {
        let input = "PT J\nSO J SEISMOL\nPY 1999\nER\n";
        let (records, warnings) = parse_corpus(input.as_bytes()).unwrap();
        assert_eq!(records.len(), 1);
        assert!(records[0].addresses.is_empty());
        assert!(warnings.is_empty());
    }

    #[test]
    fn invalid_year_skips_record_only() {
        let input = format!("PT J\nSO J SEISMOL\nPY 20x0\nER\n{MINIMAL}");
        let (records, warnings) = parse_corpus(input.as_bytes()).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].journal, "BULL SEISMOL SOC AM");
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].reason, "invalid year");
        assert_eq!(warnings[0].line, 3);
    }

    #[test]
    fn empty_corpus_is_fatal() {
        assert!(matches!(
            parse_corpus("PT J\nSO X\nPY bad\nER\n".as_bytes()),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn parse_is_deterministic() {
        let a = parse_corpus(MINIMAL.as_bytes()).unwrap();
        let b = parse_corpus(MINIMAL.as_bytes()).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn country_last_segment() {
        assert_eq!(
            extract_country("Univ Amsterdam, Kloveniersburgwal 48, NL-1012 DX Amsterdam, Netherlands"),
            "NETHERLANDS"
        );
    }

    #[test]
    fn country_state_zip() {
        assert_eq!(
            extract_country("Stanford Univ, Dept Geophys, Stanford, CA 94305 USA"),
            "USA"
        );
        assert_eq!(extract_country("Somewhere, CA 94025"), "USA");
    }

    #[test]
    fn country_unknown_fallback() {
        assert_eq!(extract_country("Acme Inst, Atlantis"), "UNKNOWN");
    }

    #[test]
    fn country_aliases() {
        assert_eq!(extract_country("Inst Geophys, Beijing, Peoples R China"), "PEOPLES-R-CHINA");
        assert_eq!(extract_country("Univ Tbilisi, Rep of Georgia"), "GEORGIA");
    }

    #[test]
    fn merge_uk_flag() {
        let opts = CountryOptions { merge_uk: true };
        assert_eq!(extract_country_with("Univ Cambridge, England", &opts), "UK");
        assert_eq!(extract_country("Univ Cambridge, England"), "ENGLAND");
    }

    #[test]
    fn journal_normalization() {
        assert_eq!(normalize_journal("  Bull   Seismol Soc Am. "), "BULL SEISMOL SOC AM");
    }
}
