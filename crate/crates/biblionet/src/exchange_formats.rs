//! Byte-exact writers (and a reader for round-trip checking) for the
//! network interchange formats consumed by external tools.
//!
//! One dialect of each format is pinned:
//!
//! `.net`: `*Vertices N`, per-vertex `i "LABEL"` with 1-based
//! contiguous ids in lexicographic label order, `*Edges`, per-edge
//! `i j w` with `i < j` and the weight printed as the shortest decimal
//! that round-trips. LF endings throughout.
//!
//! `.dl`: two-mode fullmatrix with `dl nr=<R>, nc=<C>,
//! format=fullmatrix`, a `row labels:` block, a `col labels:` block,
//! and a `data:` block of space-separated binary rows.

use crate::country_network::{AffiliationMatrix, CountryGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NetFile {
    /// 1-based contiguous ids with their labels.
    pub vertices: Vec<(u32, String)>,
    /// Undirected edges, `i < j`.
    pub edges: Vec<(u32, u32, f64)>,
}

impl NetFile {
    /// Reorder a graph into the pinned vertex order (lexicographic by
    /// label) and collect its positive-weight edges.
    pub fn from_graph(graph: &CountryGraph) -> NetFile {
        let mut order: Vec<usize> = (0..graph.countries.len()).collect();
        order.sort_by(|&a, &b| graph.countries[a].cmp(&graph.countries[b]));
        let position: Vec<u32> = {
            let mut pos = vec![0u32; order.len()];
            for (rank, &old) in order.iter().enumerate() {
                pos[old] = rank as u32 + 1;
            }
            pos
        };
        let vertices: Vec<(u32, String)> = order
            .iter()
            .enumerate()
            .map(|(rank, &old)| (rank as u32 + 1, graph.countries[old].clone()))
            .collect();
        let mut edges: Vec<(u32, u32, f64)> = graph
            .edges()
            .into_iter()
            .map(|(a, b, w)| {
                let (i, j) = (position[a], position[b]);
                if i < j {
                    (i, j, w)
                } else {
                    (j, i, w)
                }
            })
            .collect();
        edges.sort_by_key(|e| (e.0, e.1));
        NetFile { vertices, edges }
    }
}

/// Serialize to the pinned `.net` dialect, byte-for-byte deterministic.
pub fn write_net(net: &NetFile) -> Result<String> {
    let mut out = String::new();
    out.push_str(&format!("*Vertices {}\n", net.vertices.len()));
    for (id, label) in &net.vertices {
        if label.contains('"') {
            return Err(Error::UnescapableLabel(label.clone()));
        }
        out.push_str(&format!("{id} \"{label}\"\n"));
    }
    out.push_str("*Edges\n");
    for &(i, j, w) in &net.edges {
        out.push_str(&format!("{i} {j} {w}\n"));
    }
    Ok(out)
}

fn net_err(line: usize, msg: impl Into<String>) -> Error {
    Error::NetParse { line, msg: msg.into() }
}

/// Parse the pinned `.net` dialect; inverse of `write_net`.
pub fn read_net(text: &str) -> Result<NetFile> {
    let mut lines = text.lines().enumerate();
    let (line_no, header) = lines
        .next()
        .ok_or_else(|| net_err(1, "missing *Vertices"))?;
    let count: usize = header
        .strip_prefix("*Vertices ")
        .ok_or_else(|| net_err(line_no + 1, "missing *Vertices"))?
        .trim()
        .parse()
        .map_err(|_| net_err(line_no + 1, "bad vertex count"))?;
    let mut vertices = Vec::with_capacity(count);
    for expected in 1..=count as u32 {
        let (idx, line) = lines
            .next()
            .ok_or_else(|| net_err(count + 1, "truncated vertex list"))?;
        let line_no = idx + 1;
        let (id_part, label_part) = line
            .split_once(' ')
            .ok_or_else(|| net_err(line_no, "malformed vertex line"))?;
        let id: u32 = id_part
            .parse()
            .map_err(|_| net_err(line_no, "bad vertex id"))?;
        if id != expected {
            return Err(net_err(line_no, format!("vertex ids must be contiguous, got {id}")));
        }
        let label = label_part
            .strip_prefix('"')
            .and_then(|s| s.strip_suffix('"'))
            .ok_or_else(|| net_err(line_no, "vertex label must be quoted"))?;
        vertices.push((id, label.to_string()));
    }
    let (idx, marker) = lines
        .next()
        .ok_or_else(|| net_err(count + 2, "missing *Edges"))?;
    if marker != "*Edges" {
        return Err(net_err(idx + 1, "missing *Edges"));
    }
    let mut edges = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(net_err(line_no, "malformed edge line"));
        }
        let i: u32 = parts[0].parse().map_err(|_| net_err(line_no, "bad edge index"))?;
        let j: u32 = parts[1].parse().map_err(|_| net_err(line_no, "bad edge index"))?;
        let w: f64 = parts[2].parse().map_err(|_| net_err(line_no, "bad edge weight"))?;
        for v in [i, j] {
            if v == 0 || v as usize > count {
                return Err(net_err(line_no, format!("edge references vertex {v} of {count}")));
            }
        }
        edges.push((i.min(j), i.max(j), w));
    }
    Ok(NetFile { vertices, edges })
}

/// Serialize a two-mode affiliation matrix to the pinned DL dialect.
pub fn write_dl(aff: &AffiliationMatrix) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "dl nr={}, nc={}, format=fullmatrix\n",
        aff.countries.len(),
        aff.articles.len()
    ));
    out.push_str("row labels:\n");
    for c in &aff.countries {
        out.push_str(c);
        out.push('\n');
    }
    out.push_str("col labels:\n");
    for a in &aff.articles {
        out.push_str(a);
        out.push('\n');
    }
    out.push_str("data:\n");
    for row in &aff.incidence {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(countries: &[&str], edges: &[(usize, usize, f64)]) -> CountryGraph {
        let n = countries.len();
        let mut weights = vec![vec![0.0; n]; n];
        for &(i, j, w) in edges {
            weights[i][j] = w;
            weights[j][i] = w;
        }
        CountryGraph {
            countries: countries.iter().map(|s| s.to_string()).collect(),
            weights,
        }
    }

    #[test]
    fn net_format_exact_bytes() {
        let g = graph(&["JAPAN", "USA"], &[(0, 1, 3.0)]);
        let text = write_net(&NetFile::from_graph(&g)).unwrap();
        assert_eq!(text, "*Vertices 2\n1 \"JAPAN\"\n2 \"USA\"\n*Edges\n1 2 3\n");
    }

    #[test]
    fn net_node_only_graph() {
        let g = graph(&["USA"], &[]);
        let text = write_net(&NetFile::from_graph(&g)).unwrap();
        assert_eq!(text, "*Vertices 1\n1 \"USA\"\n*Edges\n");
    }

    #[test]
    fn net_real_weight_no_trailing_zeros() {
        let g = graph(&["A", "B"], &[(0, 1, 0.8)]);
        let text = write_net(&NetFile::from_graph(&g)).unwrap();
        assert!(text.ends_with("1 2 0.8\n"));
    }

    #[test]
    fn net_vertex_order_is_lexicographic() {
        let g = graph(&["USA", "JAPAN"], &[(0, 1, 1.0)]);
        let net = NetFile::from_graph(&g);
        assert_eq!(net.vertices[0].1, "JAPAN");
        assert_eq!(net.edges, vec![(1, 2, 1.0)]);
    }

    #[test]
    fn net_round_trip() {
        let g = graph(&["FRANCE", "ITALY", "JAPAN"], &[(0, 1, 2.0), (1, 2, 0.25)]);
        let written = write_net(&NetFile::from_graph(&g)).unwrap();
        let read = read_net(&written).unwrap();
        assert_eq!(write_net(&read).unwrap(), written);
    }

    #[test]
    fn net_dangling_edge_index() {
        let text = "*Vertices 2\n1 \"A\"\n2 \"B\"\n*Edges\n1 99 1\n";
        match read_net(text) {
            Err(Error::NetParse { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn net_empty_input() {
        match read_net("") {
            Err(Error::NetParse { line, msg }) => {
                assert_eq!(line, 1);
                assert!(msg.contains("*Vertices"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn net_quote_in_label_rejected() {
        let g = graph(&["BAD\"LABEL"], &[]);
        assert!(matches!(
            write_net(&NetFile::from_graph(&g)),
            Err(Error::UnescapableLabel(_))
        ));
    }

    #[test]
    fn dl_format_exact_bytes() {
        let aff = AffiliationMatrix {
            countries: vec!["JAPAN".into(), "USA".into()],
            articles: vec!["r0".into()],
            incidence: vec![vec![1], vec![1]],
            excluded: vec![],
        };
        assert_eq!(
            write_dl(&aff),
            "dl nr=2, nc=1, format=fullmatrix\nrow labels:\nJAPAN\nUSA\ncol labels:\nr0\ndata:\n1\n1\n"
        );
    }

    #[test]
    fn distinct_graphs_distinct_bytes() {
        let a = write_net(&NetFile::from_graph(&graph(&["A", "B"], &[(0, 1, 1.0)]))).unwrap();
        let b = write_net(&NetFile::from_graph(&graph(&["A", "B"], &[(0, 1, 2.0)]))).unwrap();
        let c = write_net(&NetFile::from_graph(&graph(&["A", "B"], &[]))).unwrap();
        assert_ne!(a, b);
        assert_ne!(a, c);
    }
}
