//! 2D embedding of a citation environment by classical (Torgerson)
//! multidimensional scaling of correlation-derived dissimilarities.

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, Matrix};

const EIG_TOL: f64 = 1e-12;

/// How a correlation is turned into a dissimilarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dissimilarity {
    /// d = 1 - r
    #[default]
    OneMinusR,
    /// d = sqrt(2 (1 - r))
    SqrtTwoOneMinusR,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StimulusMap {
    /// (plot key, journal name) in input order.
    pub labels: Vec<(String, String)>,
    pub coords: Vec<(f64, f64)>,
    /// Kruskal stress-1 against the input dissimilarities.
    pub stress: f64,
}

/// Single-letter plot keys A, B, ... then AA, AB, ... past 26.
pub fn plot_key(index: usize) -> String {
    let mut i = index;
    let mut key = String::new();
    loop {
        key.insert(0, (b'A' + (i % 26) as u8) as char);
        i /= 26;
        if i == 0 {
            break;
        }
        i -= 1;
    }
    key
}

/// Embed a correlation matrix: dissimilarity per `transform`, then
/// classical MDS.
pub fn embed(correlation: &Matrix, labels: &[String]) -> Result<StimulusMap> {
    embed_with(correlation, labels, Dissimilarity::OneMinusR)
}

pub fn embed_with(
    correlation: &Matrix,
    labels: &[String],
    transform: Dissimilarity,
) -> Result<StimulusMap> {
    let n = correlation.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            d[i][j] = match transform {
                Dissimilarity::OneMinusR => 1.0 - correlation[i][j],
                Dissimilarity::SqrtTwoOneMinusR => (2.0 * (1.0 - correlation[i][j])).max(0.0).sqrt(),
            };
        }
    }
    embed_dissimilarity(&d, labels)
}

/// Classical MDS of a symmetric dissimilarity matrix.
///
/// Double-centers the squared dissimilarities, takes the top-2
/// eigenpairs, and scales eigenvectors by sqrt(eigenvalue). When the
/// second eigenvalue is not positive the configuration collapses to
/// dimension 1 and y is identically zero. Orientation is fixed by
/// reflecting axes so the first label sits at x >= 0 and y >= 0.
pub fn embed_dissimilarity(d: &Matrix, labels: &[String]) -> Result<StimulusMap> {
    let n = d.len();
    assert_eq!(labels.len(), n, "one label per journal");
    if n < 2 {
        return Err(Error::DegenerateEmbedding("need at least 2 journals".into()));
    }
    // B = -1/2 J D^2 J with J the centering matrix
    let sq: Matrix = d
        .iter()
        .map(|row| row.iter().map(|v| v * v).collect())
        .collect();
    let row_mean: Vec<f64> = sq.iter().map(|r| r.iter().sum::<f64>() / n as f64).collect();
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    let mut b = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            b[i][j] = -0.5 * (sq[i][j] - row_mean[i] - row_mean[j] + grand);
        }
    }
    let eig = jacobi_eigen(&b);
    if eig.values[0] <= EIG_TOL {
        return Err(Error::DegenerateEmbedding(
            "no positive eigenvalue: input carries no metric spread".into(),
        ));
    }
    let sx = eig.values[0].sqrt();
    let use_y = eig.values.len() > 1 && eig.values[1] > EIG_TOL;
    let sy = if use_y { eig.values[1].sqrt() } else { 0.0 };
    let mut coords: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            (
                eig.vectors[0][i] * sx,
                if use_y { eig.vectors[1][i] * sy } else { 0.0 },
            )
        })
        .collect();
    // eigenvectors of the centered matrix are already mean-free; nudge
    // out accumulated rounding so the centering invariant holds exactly
    let mx = coords.iter().map(|c| c.0).sum::<f64>() / n as f64;
    let my = coords.iter().map(|c| c.1).sum::<f64>() / n as f64;
    for c in coords.iter_mut() {
        c.0 -= mx;
        c.1 -= my;
    }
    if coords[0].0 < 0.0 {
        for c in coords.iter_mut() {
            c.0 = -c.0;
        }
    }
    if coords[0].1 < 0.0 {
        for c in coords.iter_mut() {
            c.1 = -c.1;
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = coords[i].0 - coords[j].0;
            let dy = coords[i].1 - coords[j].1;
            let embedded = (dx * dx + dy * dy).sqrt();
            num += (d[i][j] - embedded) * (d[i][j] - embedded);
            den += d[i][j] * d[i][j];
        }
    }
    let stress = if den > 0.0 { (num / den).sqrt().min(1.0) } else { 0.0 };
    Ok(StimulusMap {
        labels: labels
            .iter()
            .enumerate()
            .map(|(i, l)| (plot_key(i), l.clone()))
            .collect(),
        coords,
        stress,
    })
}

/// CSV of (label, journal, x, y) with full-precision coordinates.
pub fn stimulus_csv(map: &StimulusMap) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["label", "journal", "x", "y"]).unwrap();
    for ((key, journal), (x, y)) in map.labels.iter().zip(&map.coords) {
        wtr.write_record([key.clone(), journal.clone(), format!("{x}"), format!("{y}")])
            .unwrap();
    }
    String::from_utf8(wtr.into_inner().unwrap()).unwrap()
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// SVG scatter plot with letter keys and a legend table.
///
/// `groups` pairs a legend heading with the journal names under it;
/// journals missing from every group land under a trailing
/// "Related but not Clustered" section.
pub fn stimulus_svg(map: &StimulusMap, groups: &[(String, Vec<String>)]) -> String {
    const PLOT: f64 = 480.0;
    const MARGIN: f64 = 40.0;
    let span = map
        .coords
        .iter()
        .flat_map(|&(x, y)| [x.abs(), y.abs()])
        .fold(0.0f64, f64::max)
        .max(1e-9);
    let scale = (PLOT / 2.0 - 10.0) / span;
    let cx = MARGIN + PLOT / 2.0;
    let cy = MARGIN + PLOT / 2.0;

    let mut legend: Vec<(String, Vec<(String, String)>)> = Vec::new();
    let mut placed: Vec<&String> = Vec::new();
    for (title, members) in groups {
        let mut rows = Vec::new();
        for (key, journal) in &map.labels {
            if members.contains(journal) {
                rows.push((key.clone(), journal.clone()));
                placed.push(journal);
            }
        }
        legend.push((title.clone(), rows));
    }
    let leftovers: Vec<(String, String)> = map
        .labels
        .iter()
        .filter(|(_, j)| !placed.contains(&j))
        .cloned()
        .collect();
    if !leftovers.is_empty() {
        legend.push(("Related but not Clustered".to_string(), leftovers));
    }
    let legend_rows: usize = legend.iter().map(|(_, rows)| rows.len() + 1).sum();
    let height = MARGIN * 2.0 + PLOT + 30.0 + legend_rows as f64 * 16.0 + 10.0;
    let width = MARGIN * 2.0 + PLOT;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{PLOT}\" height=\"{PLOT}\" \
         fill=\"none\" stroke=\"black\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{cx:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\" \
         font-family=\"monospace\">X = DIMENSION 1, Y = DIMENSION 2 (stress {:.4})</text>\n",
        MARGIN - 12.0,
        map.stress
    ));
    for ((key, journal), &(x, y)) in map.labels.iter().zip(&map.coords) {
        let px = cx + x * scale;
        let py = cy - y * scale;
        svg.push_str(&format!(
            "<text x=\"{px:.2}\" y=\"{py:.2}\" text-anchor=\"middle\" font-size=\"14\" \
             font-family=\"monospace\"><title>{}</title>{key}</text>\n",
            xml_escape(journal)
        ));
    }
    let mut ly = MARGIN + PLOT + 30.0;
    for (title, rows) in &legend {
        svg.push_str(&format!(
            "<text x=\"{MARGIN}\" y=\"{ly:.1}\" font-size=\"13\" font-weight=\"bold\" \
             font-family=\"monospace\">{}</text>\n",
            xml_escape(title)
        ));
        ly += 16.0;
        for (key, journal) in rows {
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{ly:.1}\" font-size=\"12\" \
                 font-family=\"monospace\">{key}  {}</text>\n",
                MARGIN + 12.0,
                xml_escape(journal)
            ));
            ly += 16.0;
        }
    }
    svg.push_str("</svg>\n");
    svg
}
