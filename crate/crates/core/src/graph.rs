//! Immutable simple undirected graphs in compressed sparse row form.
//!
//! Every undirected edge `{u, v}` is stored twice, once in row `u` and once in
//! row `v`. Rows are sorted and free of duplicates and self-loops, so two
//! graphs with the same edge set always have identical arrays.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
}

impl Graph {
    /// Builds the canonical CSR form from an unordered edge list.
    ///
    /// Edges may be given in either orientation, but each unordered pair may
    /// appear only once.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut counts = vec![0usize; n];
        for &(u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::IndexOutOfRange { index: x, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            counts[u] += 1;
            counts[v] += 1;
        }

        let mut row_offsets = Vec::with_capacity(n + 1);
        row_offsets.push(0);
        for c in &counts {
            row_offsets.push(row_offsets.last().unwrap() + c);
        }

        let mut cursor = row_offsets[..n].to_vec();
        let mut col_indices = vec![0usize; 2 * edges.len()];
        for &(u, v) in edges {
            col_indices[cursor[u]] = v;
            cursor[u] += 1;
            col_indices[cursor[v]] = u;
            cursor[v] += 1;
        }

        for i in 0..n {
            let row = &mut col_indices[row_offsets[i]..row_offsets[i + 1]];
            row.sort_unstable();
            if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
                let (a, b) = (i.min(w[0]), i.max(w[0]));
                return Err(Error::DuplicateEdge(a, b));
            }
        }

        Ok(Self {
            n,
            row_offsets,
            col_indices,
        })
    }

    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            row_offsets: vec![0; n + 1],
            col_indices: Vec::new(),
        }
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Number of undirected edges.
    #[inline]
    pub fn edge_count(&self) -> usize {
        self.col_indices.len() / 2
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[i]..self.row_offsets[i + 1]]
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.row_offsets[i + 1] - self.row_offsets[i]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.row_offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in row order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// True when every node has the same degree.
    pub fn is_regular(&self) -> bool {
        let d = self.degrees();
        d.windows(2).all(|w| w[0] == w[1])
    }

    /// Parses the edge-list text format: an `n <count>` header, then one
    /// `u v` pair per line. Lines starting with `#` and blank lines are
    /// skipped.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let parse_err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            match n {
                None => {
                    if parts.next() != Some("n") {
                        return Err(parse_err("expected header `n <count>`".into()));
                    }
                    let count = parts
                        .next()
                        .ok_or_else(|| parse_err("missing node count".into()))?;
                    n = Some(
                        count
                            .parse()
                            .map_err(|_| parse_err(format!("invalid node count `{count}`")))?,
                    );
                }
                Some(_) => {
                    let mut field = || -> Result<usize> {
                        let tok = parts
                            .next()
                            .ok_or_else(|| parse_err("expected `u v`".into()))?;
                        tok.parse()
                            .map_err(|_| parse_err(format!("invalid node id `{tok}`")))
                    };
                    let u = field()?;
                    let v = field()?;
                    edges.push((u, v));
                }
            }
            if parts.next().is_some() {
                return Err(parse_err("trailing tokens".into()));
            }
        }
        let n = n.ok_or(Error::Parse {
            line: 0,
            message: "missing `n <count>` header".into(),
        })?;
        Self::from_edges(n, &edges)
    }

    /// Serializes to the edge-list text format with each edge once, `u < v`,
    /// in row order. `comment` lines are emitted first, prefixed with `# `.
    pub fn to_edge_list(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "n {}", self.n);
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

/// Convenience wrapper around [`Graph::from_edges`].
pub fn build_graph(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
    Graph::from_edges(n, edges)
}
