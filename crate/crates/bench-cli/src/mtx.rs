//! Matrix Market coordinate files: reading with the preprocessing used for
//! real-world graphs, and writing for generated ones.
//!
//! Ingestion accepts real, integer, and pattern fields with general or
//! symmetric symmetry. Preprocessing: self-loops dropped, duplicate entries
//! of the same ordered pair summed, the two directions symmetrized by the
//! larger magnitude, weights replaced by absolute values, then the largest
//! connected component extracted and relabeled contiguously (original
//! indices kept as node labels).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use lapcond::graph::{connected_components, WeightedGraph};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

/// Raw coordinate contents: dimension and 0-based (row, col, value) entries.
pub struct RawMtx {
    pub n: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

pub fn read_mtx_raw(path: impl AsRef<Path>) -> Result<RawMtx> {
    let file = File::open(path.as_ref())?;
    let mut lines = BufReader::new(file).lines();

    let header = lines
        .next()
        .ok_or_else(|| BenchError::Mtx("empty file".into()))??;
    let lowered = header.to_ascii_lowercase();
    let tokens: Vec<&str> = lowered.split_whitespace().collect();
    if tokens.len() < 4 || !tokens[0].starts_with("%%matrixmarket") || tokens[1] != "matrix" {
        return Err(BenchError::Mtx(format!("malformed header: {header}")));
    }
    if tokens[2] != "coordinate" {
        return Err(BenchError::Mtx(format!(
            "only coordinate format is supported, got {}",
            tokens[2]
        )));
    }
    let field = match tokens[3] {
        "real" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => {
            return Err(BenchError::Mtx(format!("unsupported field type {other}")));
        }
    };
    let symmetry = match tokens.get(4).copied().unwrap_or("general") {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => {
            return Err(BenchError::Mtx(format!("unsupported symmetry {other}")));
        }
    };

    // skip comments, read the size line
    let mut size_line = None;
    for line in lines.by_ref() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        size_line = Some(trimmed.to_string());
        break;
    }
    let size_line = size_line.ok_or_else(|| BenchError::Mtx("missing size line".into()))?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| BenchError::Mtx(format!("bad size line `{size_line}`: {e}")))?;
    if dims.len() != 3 {
        return Err(BenchError::Mtx(format!("bad size line `{size_line}`")));
    }
    let (nrows, ncols, nnz) = (dims[0], dims[1], dims[2]);
    if nrows != ncols {
        return Err(BenchError::Mtx(format!(
            "adjacency must be square, got {nrows} x {ncols}"
        )));
    }

    let mut entries = Vec::with_capacity(nnz);
    for line in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let i: usize = it
            .next()
            .ok_or_else(|| BenchError::Mtx("missing row index".into()))?
            .parse()
            .map_err(|e| BenchError::Mtx(format!("bad row index: {e}")))?;
        let j: usize = it
            .next()
            .ok_or_else(|| BenchError::Mtx("missing column index".into()))?
            .parse()
            .map_err(|e| BenchError::Mtx(format!("bad column index: {e}")))?;
        if i == 0 || j == 0 || i > nrows || j > ncols {
            return Err(BenchError::Mtx(format!(
                "index ({i}, {j}) outside 1..={nrows}"
            )));
        }
        let v = match field {
            Field::Pattern => 1.0,
            Field::Real | Field::Integer => it
                .next()
                .ok_or_else(|| BenchError::Mtx("missing value".into()))?
                .parse::<f64>()
                .map_err(|e| BenchError::Mtx(format!("bad value: {e}")))?,
        };
        entries.push((i - 1, j - 1, v));
        if symmetry == Symmetry::Symmetric && i != j {
            entries.push((j - 1, i - 1, v));
        }
    }
    Ok(RawMtx { n: nrows, entries })
}

/// Read a coordinate file and apply the graph preprocessing.
pub fn ingest_mtx(path: impl AsRef<Path>) -> Result<WeightedGraph<f64>> {
    let raw = read_mtx_raw(path)?;

    // sum duplicates of the same ordered pair, dropping self-loops
    let mut ordered: std::collections::HashMap<(usize, usize), f64> = Default::default();
    for (i, j, v) in raw.entries {
        if i == j {
            continue;
        }
        *ordered.entry((i, j)).or_insert(0.0) += v;
    }
    // symmetrize by the larger magnitude of the two directions, then take
    // absolute values
    let mut undirected: std::collections::HashMap<(usize, usize), f64> = Default::default();
    for (&(i, j), &v) in &ordered {
        let key = (i.min(j), i.max(j));
        let mag = v.abs();
        let slot = undirected.entry(key).or_insert(0.0);
        if mag > *slot {
            *slot = mag;
        }
    }
    let mut edges: Vec<(usize, usize, f64)> = undirected
        .into_iter()
        .filter(|&(_, w)| w > 0.0)
        .map(|((u, v), w)| (u, v, w))
        .collect();
    edges.sort_by_key(|&(u, v, _)| (u, v));

    let full = WeightedGraph::new(raw.n, edges.iter().copied())?;
    let components = connected_components(&full);
    let largest = components
        .iter()
        .max_by_key(|c| c.len())
        .ok_or_else(|| BenchError::Mtx("empty graph".into()))?;
    if largest.is_empty() {
        return Err(BenchError::Mtx("empty component".into()));
    }

    let mut relabel = vec![usize::MAX; raw.n];
    for (new, &old) in largest.iter().enumerate() {
        relabel[old] = new;
    }
    let component_edges: Vec<(usize, usize, f64)> = edges
        .iter()
        .filter(|&&(u, v, _)| relabel[u] != usize::MAX && relabel[v] != usize::MAX)
        .map(|&(u, v, w)| (relabel[u], relabel[v], w))
        .collect();
    Ok(WeightedGraph::new(largest.len(), component_edges)?.with_labels(largest.clone()))
}

/// Write a positively weighted graph as a symmetric real coordinate file.
pub fn write_mtx(g: &WeightedGraph<f64>, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path.as_ref())?;
    let mut w = BufWriter::new(file);
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(w, "{} {} {}", g.n(), g.n(), g.m())?;
    for e in g.edges() {
        // symmetric convention: store the lower triangle
        writeln!(w, "{} {} {}", e.v + 1, e.u + 1, e.w)?;
    }
    Ok(())
}
