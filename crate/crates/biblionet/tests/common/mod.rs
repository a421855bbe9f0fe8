//! Shared synthetic-corpus generator for integration tests.
//!
//! Corpora are built with a planted block structure in the citing
//! patterns: journals of one block cite the same six target journals
//! heavily (30 ± noise) and the other six lightly (8 ± noise), so
//! within-block citing correlations land near 0.9 while between-block
//! correlations land near 0.
#![allow(dead_code)] // each test target uses a different subset

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SEED_JOURNAL: &str = "BULL SEISMOL SOC AM";

pub const BLOCK_SEISMOLOGY: &[&str] = &[
    "BULL SEISMOL SOC AM",
    "J SEISMOL",
    "SOIL DYNAM EARTHQ ENG",
];

pub const BLOCK_GEOPHYSICS: &[&str] = &[
    "GEOPHYS J INT",
    "GEOPHYS RES LETT",
    "J GEOPHYS RES",
    "PHYS EARTH PLANET IN",
    "TECTONOPHYSICS",
];

const TARGETS: &[&str] = &[
    "REF ACTA GEOPHYS",
    "REF ANN GEOFIS",
    "REF EARTH PLANET SP",
    "REF EARTHQ SPECTRA",
    "REF GEOL SOC AM BULL",
    "REF GEOPHYSICS",
    "REF J ACOUST SOC AM",
    "REF J STRUCT GEOL",
    "REF NAT HAZARDS",
    "REF PURE APPL GEOPHYS",
    "REF SCIENCE",
    "REF TECTONICS",
];

const HEAVY: i64 = 30;
const LIGHT: i64 = 8;
const NOISE: i64 = 8;
const RECORDS_PER_JOURNAL: usize = 12;
const SEED_CITATIONS: i64 = 10;

/// Address pool: (country token, address line).
const ADDRESSES: &[(&str, &str)] = &[
    ("ITALY", "Ist Nazl Geofis & Vulcanol, Via Vigna Murata 605, Rome, Italy"),
    ("GERMANY", "GeoForschungsZentrum Potsdam, Telegrafenberg, Potsdam, Germany"),
    ("SWITZERLAND", "ETH Zurich, Inst Geophys, Zurich, Switzerland"),
    ("USA", "US Geol Survey, 345 Middlefield Rd, Menlo Pk, CA 94025 USA"),
    ("JAPAN", "Univ Tokyo, Earthquake Res Inst, Tokyo, Japan"),
    ("FRANCE", "Inst Phys Globe, 4 Pl Jussieu, Paris, France"),
    ("RUSSIA", "Russian Acad Sci, Inst Phys Earth, Moscow, Russia"),
    ("ENGLAND", "Univ Cambridge, Dept Earth Sci, Cambridge, England"),
];

/// One block: member journals cite the first six targets heavily when
/// `heavy_first` and the last six otherwise.
pub struct Block<'a> {
    pub journals: &'a [&'a str],
    pub heavy_first: bool,
}

/// Render a corpus with the given citing blocks for one year.
pub fn synth_corpus(year: i32, blocks: &[Block<'_>], rng_seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut out = String::new();
    let mut serial = 0usize;
    for block in blocks {
        for journal in block.journals {
            // per-journal citing pattern over the targets
            let pattern: Vec<i64> = (0..TARGETS.len())
                .map(|t| {
                    let base = if (t < 6) == block.heavy_first { HEAVY } else { LIGHT };
                    (base + rng.gen_range(-NOISE..=NOISE)).max(0)
                })
                .collect();
            for k in 0..RECORDS_PER_JOURNAL {
                serial += 1;
                out.push_str("PT J\n");
                out.push_str(&format!("AU Author, {serial:04}\n"));
                out.push_str(&format!("TI Synthetic article {serial:04}\n"));
                out.push_str(&format!("SO {journal}\n"));
                out.push_str(&format!("PY {year}\n"));
                let primary = ADDRESSES[serial % ADDRESSES.len()];
                out.push_str(&format!("C1 {}\n", primary.1));
                if serial.is_multiple_of(3) {
                    out.push_str(&format!("   {}\n", ADDRESSES[(serial + 1) % ADDRESSES.len()].1));
                }
                if serial.is_multiple_of(7) {
                    out.push_str(&format!("   {}\n", ADDRESSES[(serial + 2) % ADDRESSES.len()].1));
                    out.push_str(&format!("   {}\n", ADDRESSES[(serial + 3) % ADDRESSES.len()].1));
                }
                let mut first_cr = true;
                let mut push_cr = |target: &str, times: i64| {
                    for _ in 0..times {
                        if first_cr {
                            out.push_str(&format!("CR Ref A, {}, {target}\n", year - 2));
                            first_cr = false;
                        } else {
                            out.push_str(&format!("   Ref A, {}, {target}\n", year - 2));
                        }
                    }
                };
                // spread each target's citations evenly over the
                // journal's records; only the totals matter downstream
                for (t, name) in TARGETS.iter().enumerate() {
                    let total = pattern[t];
                    let share = total / RECORDS_PER_JOURNAL as i64
                        + if (k as i64) < total % RECORDS_PER_JOURNAL as i64 { 1 } else { 0 };
                    push_cr(name, share);
                }
                let seed_share = SEED_CITATIONS / RECORDS_PER_JOURNAL as i64
                    + if (k as i64) < SEED_CITATIONS % RECORDS_PER_JOURNAL as i64 { 1 } else { 0 };
                push_cr(SEED_JOURNAL, seed_share);
                out.push_str(&format!("UT SYN:{year}:{serial:04}\n"));
                out.push_str("ER\n");
            }
        }
    }
    out.push_str("EF\n");
    out
}

/// Two planted blocks sharing one year: the standard recovery fixture.
pub fn two_block_corpus(year: i32, rng_seed: u64) -> String {
    synth_corpus(
        year,
        &[
            Block { journals: BLOCK_SEISMOLOGY, heavy_first: true },
            Block { journals: BLOCK_GEOPHYSICS, heavy_first: false },
        ],
        rng_seed,
    )
}

/// Single merged block: every journal shares the geophysics pattern.
pub fn one_block_corpus(year: i32, rng_seed: u64) -> String {
    let all: Vec<&str> = [&["BULL SEISMOL SOC AM"][..], BLOCK_GEOPHYSICS].concat();
    synth_corpus(year, &[Block { journals: &all, heavy_first: false }], rng_seed)
}
