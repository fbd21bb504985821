//! Sparse directed graphs in compressed-row form.
//!
//! Column indices within a row are strictly increasing and every stored
//! value is positive. Binary adjacency matrices store `1.0`; sparsified
//! surrogates store `1/p` on kept edges.

use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Largest node count for which dense materialization is allowed.
pub const DENSE_GUARD: usize = 20_000;

const ROW_CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseDirectedGraph {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

/// Reader options for edge-list files.
#[derive(Debug, Clone, Copy, Default)]
pub struct EdgeListFormat {
    /// Minimum node count; ids at or above it are rejected.
    pub n_hint: Option<usize>,
    /// Node ids in the file start at 1.
    pub one_based: bool,
}

impl SparseDirectedGraph {
    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            row_offsets: vec![0; n + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Build from raw CSR arrays, checking every invariant.
    pub fn from_csr(
        n: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != n + 1 || row_offsets[0] != 0 {
            return Err(Error::validation("row_offsets", "must have length n+1 and start at 0"));
        }
        if row_offsets[n] != col_indices.len() || col_indices.len() != values.len() {
            return Err(Error::validation(
                "row_offsets",
                "last offset must equal the number of stored entries",
            ));
        }
        for i in 0..n {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return Err(Error::validation("row_offsets", "must be non-decreasing"));
            }
            let cols = &col_indices[lo..hi];
            if cols.iter().any(|&j| j >= n) {
                return Err(Error::validation("col_indices", "index out of range"));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::validation("col_indices", "must be strictly increasing per row"));
            }
        }
        if values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::validation("values", "must be positive and finite"));
        }
        Ok(Self {
            n,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Binary graph from an edge iterator; duplicates collapse to one edge.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut edges: Vec<(usize, usize)> = edges.into_iter().collect();
        if let Some(&(i, j)) = edges.iter().find(|&&(i, j)| i >= n || j >= n) {
            return Err(Error::validation(
                "edges",
                format!("edge ({i}, {j}) out of range for {n} nodes"),
            ));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self::from_sorted_edges(n, &edges))
    }

    fn from_sorted_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut row_offsets = vec![0usize; n + 1];
        for &(i, _) in edges {
            row_offsets[i + 1] += 1;
        }
        for i in 0..n {
            row_offsets[i + 1] += row_offsets[i];
        }
        Self {
            n,
            row_offsets,
            col_indices: edges.iter().map(|&(_, j)| j).collect(),
            values: vec![1.0; edges.len()],
        }
    }

    /// Weighted graph from `(src, dst, weight)` triplets. Weights must be
    /// positive and pairs unique.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        triplets.sort_unstable_by_key(|t| (t.0, t.1));
        if triplets.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::validation("triplets", "duplicate (src, dst) pair"));
        }
        let mut row_offsets = vec![0usize; n + 1];
        for &(i, j, _) in &triplets {
            if i >= n || j >= n {
                return Err(Error::validation("triplets", format!("({i}, {j}) out of range")));
            }
            row_offsets[i + 1] += 1;
        }
        for i in 0..n {
            row_offsets[i + 1] += row_offsets[i];
        }
        let col_indices = triplets.iter().map(|t| t.1).collect();
        let values = triplets.iter().map(|t| t.2).collect();
        Self::from_csr(n, row_offsets, col_indices, values)
    }

    /// Weighted graph holding the nonzero entries of a square non-negative matrix.
    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::dimension("square matrix", format!("{:?}", m.shape())));
        }
        let n = m.rows();
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for i in 0..n {
            for (j, &v) in m.row(i).iter().enumerate() {
                if v < 0.0 {
                    return Err(Error::validation("matrix", "entries must be non-negative"));
                }
                if v > 0.0 {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Self::from_csr(n, row_offsets, col_indices, values)
    }

    /// Parse a `src<TAB>dst` edge list with 0-based ids.
    pub fn from_edge_list<R: BufRead>(source: R, n_hint: Option<usize>) -> Result<Self> {
        Self::from_edge_list_with(
            source,
            EdgeListFormat {
                n_hint,
                one_based: false,
            },
        )
    }

    /// Parse an edge list. Blank lines and lines starting with `#` are
    /// skipped; fields may be separated by tabs or spaces.
    pub fn from_edge_list_with<R: BufRead>(source: R, format: EdgeListFormat) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_id: Option<usize> = None;
        for (idx, line) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut fields = trimmed.split_whitespace();
            let (src, dst) = match (fields.next(), fields.next(), fields.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("expected `src<TAB>dst`, got {trimmed:?}"),
                    })
                }
            };
            let src = parse_id(src, line_no, format.one_based)?;
            let dst = parse_id(dst, line_no, format.one_based)?;
            if let Some(n) = format.n_hint {
                for id in [src, dst] {
                    if id >= n {
                        return Err(Error::NodeOutOfBounds { line: line_no, id, n });
                    }
                }
            }
            max_id = Some(max_id.map_or(src.max(dst), |m| m.max(src).max(dst)));
            edges.push((src, dst));
        }
        let n = max_id.map_or(0, |m| m + 1).max(format.n_hint.unwrap_or(0));
        Self::from_edges(n, edges)
    }

    /// Write sorted `src<TAB>dst` lines with 0-based ids.
    pub fn to_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        for i in 0..self.n {
            for &j in self.row_indices(i) {
                writeln!(out, "{i}\t{j}")?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row_indices(&self, i: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[i]..self.row_offsets[i + 1]]
    }

    pub fn row_values(&self, i: usize) -> &[f64] {
        &self.values[self.row_offsets[i]..self.row_offsets[i + 1]]
    }

    /// Stored value at `(i, j)`, zero when absent.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self.row_indices(i).binary_search(&j) {
            Ok(pos) => self.row_values(i)[pos],
            Err(_) => 0.0,
        }
    }

    /// Iterator over `(src, dst, value)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.row_indices(i)
                .iter()
                .zip(self.row_values(i))
                .map(move |(&j, &v)| (i, j, v))
        })
    }

    pub(crate) fn from_parts_unchecked(
        n: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert!(Self::from_csr(n, row_offsets.clone(), col_indices.clone(), values.clone()).is_ok());
        Self {
            n,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// Transpose via a counting sort over columns; the result is canonical.
    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut row_offsets = vec![0usize; n + 1];
        for &j in &self.col_indices {
            row_offsets[j + 1] += 1;
        }
        for j in 0..n {
            row_offsets[j + 1] += row_offsets[j];
        }
        let mut cursor = row_offsets.clone();
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..n {
            for (&j, &v) in self.row_indices(i).iter().zip(self.row_values(i)) {
                let slot = cursor[j];
                col_indices[slot] = i;
                values[slot] = v;
                cursor[j] += 1;
            }
        }
        Self {
            n,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// `A * m`, or `A^T * m` when `transposed`.
    ///
    /// Each output entry is accumulated in ascending order of the summed
    /// index, so the result is bitwise identical for any thread count and
    /// `multiply_dense(g, m, true) == multiply_dense(&g.transpose(), m, false)`.
    pub fn multiply_dense(&self, m: &DenseMatrix, transposed: bool) -> Result<DenseMatrix> {
        if m.rows() != self.n {
            return Err(Error::dimension(format!("{} rows", self.n), m.rows()));
        }
        let width = m.cols();
        let mut out = DenseMatrix::zeros(self.n, width);
        if width == 0 || self.nnz() == 0 {
            return Ok(out);
        }
        if transposed {
            let dst = out.as_mut_slice();
            for i in 0..self.n {
                let src = m.row(i);
                for (&j, &v) in self.row_indices(i).iter().zip(self.row_values(i)) {
                    let row = &mut dst[j * width..(j + 1) * width];
                    for (o, &x) in row.iter_mut().zip(src) {
                        *o += v * x;
                    }
                }
            }
            return Ok(out);
        }
        out.as_mut_slice()
            .par_chunks_mut(ROW_CHUNK * width)
            .enumerate()
            .for_each(|(chunk, block)| {
                for (r, row) in block.chunks_mut(width).enumerate() {
                    let i = chunk * ROW_CHUNK + r;
                    for (&j, &v) in self.row_indices(i).iter().zip(self.row_values(i)) {
                        for (o, &x) in row.iter_mut().zip(m.row(j)) {
                            *o += v * x;
                        }
                    }
                }
            });
        Ok(out)
    }

    /// Out- and in-degree counts (stored entries, ignoring values).
    pub fn degrees(&self) -> (Vec<usize>, Vec<usize>) {
        let out_deg = self.row_offsets.windows(2).map(|w| w[1] - w[0]).collect();
        let mut in_deg = vec![0usize; self.n];
        for &j in &self.col_indices {
            in_deg[j] += 1;
        }
        (out_deg, in_deg)
    }

    /// Dense copy, refused above [`DENSE_GUARD`] nodes.
    pub fn to_dense(&self) -> Result<DenseMatrix> {
        if self.n > DENSE_GUARD {
            return Err(Error::Capacity {
                n: self.n,
                limit: DENSE_GUARD,
            });
        }
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.entries() {
            m[(i, j)] = v;
        }
        Ok(m)
    }
}

fn parse_id(field: &str, line: usize, one_based: bool) -> Result<usize> {
    let id: usize = field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid node id {field:?}"),
    })?;
    if one_based {
        id.checked_sub(1).ok_or_else(|| Error::Parse {
            line,
            message: "node id 0 in a one-based file".into(),
        })
    } else {
        Ok(id)
    }
}
