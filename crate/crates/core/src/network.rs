//! Finite multigraph with household membership and edge kinds, plus the
//! edge-list file format.
//!
//! ```text
//! #n 6
//! #households 3,2,1
//! #discarded 1 0
//! 0 1 local
//! 4 5 global 0 2
//! ```
//!
//! Household members are contiguous node ranges in the order listed.
//! Global edges may carry the degree quantiles (0-based) of their two stubs.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Local,
    Global,
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeKind::Local => "local",
            EdgeKind::Global => "global",
        })
    }
}

impl FromStr for EdgeKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "local" => Ok(EdgeKind::Local),
            "global" => Ok(EdgeKind::Global),
            other => Err(format!("unknown edge kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub kind: EdgeKind,
    /// Degree quantiles of the stubs at `u` and `v` (global edges only).
    pub quantiles: Option<(u32, u32)>,
}

impl Edge {
    pub fn local(u: usize, v: usize) -> Self {
        Self {
            u,
            v,
            kind: EdgeKind::Local,
            quantiles: None,
        }
    }

    pub fn global(u: usize, v: usize, quantiles: Option<(u32, u32)>) -> Self {
        Self {
            u,
            v,
            kind: EdgeKind::Global,
            quantiles,
        }
    }

    pub fn is_self_loop(&self) -> bool {
        self.u == self.v
    }

    fn key(&self) -> (usize, usize) {
        (self.u.min(self.v), self.u.max(self.v))
    }
}

/// Construction artefacts, counted rather than removed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Imperfections {
    pub self_loops: usize,
    /// Edges duplicating an earlier edge between the same two nodes.
    pub parallel_edges: usize,
    pub discarded_global_stubs: usize,
    pub discarded_local_stubs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    n: usize,
    household_sizes: Vec<usize>,
    household_of: Vec<usize>,
    edges: Vec<Edge>,
    imperfections: Imperfections,
}

impl Network {
    /// Assembles a network. Self-loop and parallel-edge counts are derived
    /// from `edges`; discard counts are taken as given.
    pub fn new(
        household_sizes: Vec<usize>,
        edges: Vec<Edge>,
        discarded_global_stubs: usize,
        discarded_local_stubs: usize,
    ) -> Result<Self> {
        let n: usize = household_sizes.iter().sum();
        if household_sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidParameter("households must be non-empty".into()));
        }
        if let Some(e) = edges.iter().find(|e| e.u >= n || e.v >= n) {
            return Err(Error::InvalidParameter(format!(
                "edge ({}, {}) refers to a node outside 0..{n}",
                e.u, e.v
            )));
        }
        let household_of = household_sizes
            .iter()
            .enumerate()
            .flat_map(|(h, &s)| std::iter::repeat_n(h, s))
            .collect();
        let mut net = Self {
            n,
            household_sizes,
            household_of,
            edges,
            imperfections: Imperfections {
                discarded_global_stubs,
                discarded_local_stubs,
                ..Default::default()
            },
        };
        net.recount();
        Ok(net)
    }

    fn recount(&mut self) {
        self.imperfections.self_loops = self.edges.iter().filter(|e| e.is_self_loop()).count();
        let mut keys: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter(|e| !e.is_self_loop())
            .map(Edge::key)
            .collect();
        keys.sort_unstable();
        self.imperfections.parallel_edges = keys.windows(2).filter(|w| w[0] == w[1]).count();
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn household_sizes(&self) -> &[usize] {
        &self.household_sizes
    }

    pub fn household_of(&self, v: usize) -> usize {
        self.household_of[v]
    }

    /// Size of the household containing `v`.
    pub fn household_size_of(&self, v: usize) -> usize {
        self.household_sizes[self.household_of[v]]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn imperfections(&self) -> Imperfections {
        self.imperfections
    }

    /// `(self-loops + parallel edges) / edges`.
    pub fn imperfection_fraction(&self) -> f64 {
        if self.edges.is_empty() {
            return 0.0;
        }
        (self.imperfections.self_loops + self.imperfections.parallel_edges) as f64
            / self.edges.len() as f64
    }

    pub fn count_kind(&self, kind: EdgeKind) -> usize {
        self.edges.iter().filter(|e| e.kind == kind).count()
    }

    /// Edge-endpoint count per node; a self-loop counts twice.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }

    /// Edge multiset as sorted unordered pairs with kinds, for comparisons.
    pub fn edge_multiset(&self) -> Vec<(usize, usize, EdgeKind)> {
        let mut out: Vec<_> = self
            .edges
            .iter()
            .map(|e| {
                let (a, b) = e.key();
                (a, b, e.kind)
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Outgoing adjacency with one entry per edge copy and direction.
    /// Self-loops are omitted.
    pub fn adjacency(&self) -> Adjacency {
        let mut counts = vec![0usize; self.n + 1];
        for e in self.edges.iter().filter(|e| !e.is_self_loop()) {
            counts[e.u + 1] += 1;
            counts[e.v + 1] += 1;
        }
        for i in 0..self.n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts.clone();
        let mut fill = counts;
        let mut targets = vec![0usize; offsets[self.n]];
        for e in self.edges.iter().filter(|e| !e.is_self_loop()) {
            targets[fill[e.u]] = e.v;
            fill[e.u] += 1;
            targets[fill[e.v]] = e.u;
            fill[e.v] += 1;
        }
        Adjacency { offsets, targets }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "#n {}", self.n)?;
        write!(w, "#households ")?;
        for (i, s) in self.household_sizes.iter().enumerate() {
            if i > 0 {
                write!(w, ",")?;
            }
            write!(w, "{s}")?;
        }
        writeln!(w)?;
        writeln!(
            w,
            "#discarded {} {}",
            self.imperfections.discarded_global_stubs, self.imperfections.discarded_local_stubs
        )?;
        for e in &self.edges {
            match e.quantiles {
                Some((a, b)) => writeln!(w, "{} {} {} {a} {b}", e.u, e.v, e.kind)?,
                None => writeln!(w, "{} {} {}", e.u, e.v, e.kind)?,
            }
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let f = File::open(path)?;
        Self::read_from(BufReader::new(f), path)
    }

    /// Parses the edge-list format; `path` is used only in error messages.
    pub fn read_from<R: BufRead>(r: R, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut n: Option<usize> = None;
        let mut households: Option<Vec<usize>> = None;
        let mut discarded = (0usize, 0usize);
        let mut edges = Vec::new();
        for (idx, line) in r.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut parts = rest.splitn(2, char::is_whitespace);
                let key = parts.next().unwrap_or("");
                let value = parts.next().unwrap_or("").trim();
                match key {
                    "n" => {
                        n = Some(value.parse().map_err(|_| err(lineno, format!("bad node count `{value}`")))?)
                    }
                    "households" => {
                        let sizes = value
                            .split(',')
                            .filter(|s| !s.trim().is_empty())
                            .map(|s| {
                                s.trim()
                                    .parse::<usize>()
                                    .map_err(|_| err(lineno, format!("bad household size `{}`", s.trim())))
                            })
                            .collect::<Result<Vec<_>>>()?;
                        households = Some(sizes);
                    }
                    "discarded" => {
                        let nums: Vec<&str> = value.split_whitespace().collect();
                        let parse = |s: &str| {
                            s.parse::<usize>()
                                .map_err(|_| err(lineno, format!("bad discard count `{s}`")))
                        };
                        match nums.as_slice() {
                            [g, l] => discarded = (parse(g)?, parse(l)?),
                            _ => return Err(err(lineno, "expected `#discarded <global> <local>`".into())),
                        }
                    }
                    _ => {}
                }
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 3 && tokens.len() != 5 {
                return Err(err(lineno, format!("expected `u v kind [qi qj]`, got `{line}`")));
            }
            let node = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| err(lineno, format!("bad node id `{s}`")))
            };
            let u = node(tokens[0])?;
            let v = node(tokens[1])?;
            let kind: EdgeKind = tokens[2].parse().map_err(|m| err(lineno, m))?;
            let quantiles = if tokens.len() == 5 {
                let q = |s: &str| {
                    s.parse::<u32>()
                        .map_err(|_| err(lineno, format!("bad quantile `{s}`")))
                };
                Some((q(tokens[3])?, q(tokens[4])?))
            } else {
                None
            };
            if let Some(n) = n {
                if u >= n || v >= n {
                    return Err(err(lineno, format!("node id out of range 0..{n}")));
                }
            }
            edges.push(Edge { u, v, kind, quantiles });
        }
        let households = households.ok_or_else(|| err(0, "missing `#households` header".into()))?;
        let total: usize = households.iter().sum();
        if let Some(n) = n {
            if n != total {
                return Err(err(0, format!("`#n {n}` disagrees with household total {total}")));
            }
        }
        Network::new(households, edges, discarded.0, discarded.1)
    }
}

/// Compressed adjacency lists.
#[derive(Debug, Clone)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Adjacency {
    #[inline]
    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }
}
