//! Influence networks: validated DAGs of "firm i observes and is influenced by
//! firm j" relations, with cached path counts.
//!
//! An edge `i -> j` means firm `j` takes firm `i`'s price as given when
//! setting its own. Equilibrium analysis needs the network to be acyclic and
//! transitively closed, so every constructor funnels through [`validate`].

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

/// A single rule broken by a candidate adjacency matrix. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NonZeroDiagonal(usize),
    /// Node sequence of a directed cycle, without repeating the first node.
    Cycle(Vec<usize>),
    /// `i -> j -> k` present but `i -> k` missing.
    IntransitiveTriple(usize, usize, usize),
}

impl Violation {
    fn describe(&self, labels: &[String]) -> String {
        let name = |i: &usize| labels.get(*i).cloned().unwrap_or_else(|| (i + 1).to_string());
        match self {
            Violation::NonZeroDiagonal(i) => format!("NonZeroDiagonal: {} influences itself", name(i)),
            Violation::Cycle(nodes) => {
                let mut path: Vec<String> = nodes.iter().map(name).collect();
                if let Some(first) = nodes.first() {
                    path.push(name(first));
                }
                format!("Cycle: {}", path.join("→"))
            }
            Violation::IntransitiveTriple(i, j, k) => format!(
                "IntransitiveTriple: {}→{}→{} without {}→{}",
                name(i),
                name(j),
                name(k),
                name(i),
                name(k)
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("adjacency matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("duplicate firm name {0:?}")]
    DuplicateLabel(String),
    #[error("unknown firm {0:?}")]
    UnknownFirm(String),
    #[error("duplicate edge {0}→{1}")]
    DuplicateEdge(String, String),
    #[error("firm index {index} out of range for a network of {n} firms")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("cannot merge firm {0} with itself")]
    SelfMerge(usize),
    #[error("{}", describe_all(.violations, .labels))]
    Invalid { violations: Vec<Violation>, labels: Vec<String> },
    #[error("merged network is cyclic: {}", describe_all(.violations, .labels))]
    ResultCyclic { violations: Vec<Violation>, labels: Vec<String> },
}

fn describe_all(violations: &[Violation], labels: &[String]) -> String {
    violations
        .iter()
        .map(|v| v.describe(labels))
        .collect::<Vec<_>>()
        .join("; ")
}

impl NetworkError {
    /// Rule violations carried by this error, if it is a validation failure.
    pub fn violations(&self) -> &[Violation] {
        match self {
            NetworkError::Invalid { violations, .. } | NetworkError::ResultCyclic { violations, .. } => {
                violations
            }
            _ => &[],
        }
    }
}

/// Directed path counts of an influence network.
///
/// `totals[k]` is the number of `k`-edge paths (so `totals[0] = n`) and
/// `per_firm[i][k]` the number of `k`-edge paths starting at firm `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathCounts {
    pub totals: Vec<u128>,
    pub per_firm: Vec<Vec<u128>>,
}

impl PathCounts {
    fn compute(adjacency: &[Vec<bool>]) -> Self {
        let n = adjacency.len();
        let mut per_firm = vec![vec![0u128; n]; n];
        let mut current = vec![1u128; n];
        for k in 0..n {
            for (row, count) in per_firm.iter_mut().zip(&current) {
                row[k] = *count;
            }
            // A^{k+1} 1 = A (A^k 1)
            current = adjacency
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(&current)
                        .filter(|(edge, _)| **edge)
                        .map(|(_, c)| *c)
                        .sum()
                })
                .collect();
        }
        let totals = (0..n).map(|k| per_firm.iter().map(|row| row[k]).sum()).collect();
        PathCounts { totals, per_firm }
    }

    /// Totals as floating point weights, convenient for equilibrium sums.
    pub fn totals_f64(&self) -> Vec<f64> {
        self.totals.iter().map(|&t| t as f64).collect()
    }

    pub fn firm_f64(&self, i: usize) -> Vec<f64> {
        self.per_firm[i].iter().map(|&t| t as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Canonical {
    /// No influences: all firms decide simultaneously.
    Empty,
    /// Transitive tournament: firm `i` influences every `j > i`.
    Chain,
}

/// A validated influence network. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfluenceNetwork {
    adjacency: Vec<Vec<bool>>,
    labels: Vec<String>,
    paths: PathCounts,
}

/// Checks every network rule and returns the validated network, or an error
/// listing all violations found.
pub fn validate(
    adjacency: Vec<Vec<bool>>,
    labels: Option<Vec<String>>,
) -> Result<InfluenceNetwork, NetworkError> {
    let n = adjacency.len();
    for (row, entries) in adjacency.iter().enumerate() {
        if entries.len() != n {
            return Err(NetworkError::NotSquare { row, len: entries.len(), expected: n });
        }
    }
    let labels = match labels {
        Some(labels) => {
            if labels.len() != n {
                return Err(NetworkError::LabelCount { expected: n, got: labels.len() });
            }
            let mut seen = HashSet::new();
            for label in &labels {
                if !seen.insert(label.as_str()) {
                    return Err(NetworkError::DuplicateLabel(label.clone()));
                }
            }
            labels
        }
        None => (1..=n).map(|i| i.to_string()).collect(),
    };

    let violations = find_violations(&adjacency);
    if !violations.is_empty() {
        return Err(NetworkError::Invalid { violations, labels });
    }
    let paths = PathCounts::compute(&adjacency);
    Ok(InfluenceNetwork { adjacency, labels, paths })
}

fn find_violations(adjacency: &[Vec<bool>]) -> Vec<Violation> {
    let n = adjacency.len();
    let mut violations: Vec<Violation> =
        (0..n).filter(|&i| adjacency[i][i]).map(Violation::NonZeroDiagonal).collect();
    if let Some(cycle) = find_cycle(adjacency) {
        violations.push(Violation::Cycle(cycle));
    }
    for i in 0..n {
        for j in 0..n {
            if i == j || !adjacency[i][j] {
                continue;
            }
            for k in 0..n {
                if k != i && k != j && adjacency[j][k] && !adjacency[i][k] {
                    violations.push(Violation::IntransitiveTriple(i, j, k));
                }
            }
        }
    }
    violations
}

/// Depth-first search for a directed cycle of length >= 2 (self loops are
/// reported separately).
fn find_cycle(adjacency: &[Vec<bool>]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let n = adjacency.len();
    let mut mark = vec![Mark::New; n];
    let mut stack: Vec<usize> = Vec::new();

    fn visit(
        v: usize,
        adjacency: &[Vec<bool>],
        mark: &mut [Mark],
        stack: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        mark[v] = Mark::Active;
        stack.push(v);
        for w in 0..adjacency.len() {
            if w == v || !adjacency[v][w] {
                continue;
            }
            match mark[w] {
                Mark::Active => {
                    let start = stack.iter().position(|&x| x == w).expect("active node on stack");
                    return Some(stack[start..].to_vec());
                }
                Mark::New => {
                    if let Some(cycle) = visit(w, adjacency, mark, stack) {
                        return Some(cycle);
                    }
                }
                Mark::Done => {}
            }
        }
        stack.pop();
        mark[v] = Mark::Done;
        None
    }

    for v in 0..n {
        if mark[v] == Mark::New {
            if let Some(cycle) = visit(v, adjacency, &mut mark, &mut stack) {
                return Some(cycle);
            }
        }
    }
    None
}

/// Warshall transitive closure, in place.
pub fn transitive_closure(adjacency: &mut [Vec<bool>]) {
    let n = adjacency.len();
    for k in 0..n {
        for i in 0..n {
            if adjacency[i][k] {
                for j in 0..n {
                    if adjacency[k][j] {
                        adjacency[i][j] = true;
                    }
                }
            }
        }
    }
}

impl InfluenceNetwork {
    /// Builds a network from firm names and labelled edges.
    pub fn from_labelled_edges<S: AsRef<str>>(
        labels: Vec<String>,
        edges: &[(S, S)],
    ) -> Result<Self, NetworkError> {
        let n = labels.len();
        let index = |name: &str| {
            labels
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| NetworkError::UnknownFirm(name.to_string()))
        };
        let mut adjacency = vec![vec![false; n]; n];
        for (from, to) in edges {
            let (i, j) = (index(from.as_ref())?, index(to.as_ref())?);
            if adjacency[i][j] {
                return Err(NetworkError::DuplicateEdge(
                    from.as_ref().to_string(),
                    to.as_ref().to_string(),
                ));
            }
            adjacency[i][j] = true;
        }
        validate(adjacency, Some(labels))
    }

    /// Builds a network from 0-based index edges with default labels.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, NetworkError> {
        let mut adjacency = vec![vec![false; n]; n];
        for &(i, j) in edges {
            for index in [i, j] {
                if index >= n {
                    return Err(NetworkError::IndexOutOfRange { index, n });
                }
            }
            adjacency[i][j] = true;
        }
        validate(adjacency, None)
    }

    pub fn canonical(kind: Canonical, n: usize) -> Self {
        let adjacency = (0..n)
            .map(|i| (0..n).map(|j| kind == Canonical::Chain && i < j).collect())
            .collect();
        validate(adjacency, None).expect("canonical networks are valid")
    }

    pub fn empty(n: usize) -> Self {
        Self::canonical(Canonical::Empty, n)
    }

    pub fn chain(n: usize) -> Self {
        Self::canonical(Canonical::Chain, n)
    }

    /// Number of monopolist firms.
    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn adjacency(&self) -> &[Vec<bool>] {
        &self.adjacency
    }

    /// True iff firm `i` influences firm `j`.
    pub fn influences(&self, i: usize, j: usize) -> bool {
        self.adjacency[i][j]
    }

    /// Firms whose prices react to firm `i`'s price.
    pub fn influenced_by(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[i].iter().enumerate().filter(|(_, &e)| e).map(|(j, _)| j)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.adjacency[i][j])
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    pub fn path_counts(&self) -> &PathCounts {
        &self.paths
    }

    /// Length of the longest path counted in nodes: the smallest `d` with
    /// `A^d = 0`. An edgeless network with firms has depth 1.
    pub fn depth(&self) -> usize {
        self.paths.totals.iter().take_while(|&&t| t > 0).count()
    }

    /// Out-degree of every firm.
    pub fn out_degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(|row| row.iter().filter(|&&e| e).count()).collect()
    }

    /// Contracts firms `i` and `j` into one firm labelled `"i+j"`.
    ///
    /// The merged firm takes the union of both firms' in- and out-edges
    /// (edges between them are dropped), then `extra_edges` are added, using
    /// indices of the merged network. The merged firm sits at position
    /// `min(i, j)`. The result is transitively closed before validation.
    pub fn merge_nodes(
        &self,
        i: usize,
        j: usize,
        extra_edges: &[(usize, usize)],
    ) -> Result<Self, NetworkError> {
        let n = self.len();
        for index in [i, j] {
            if index >= n {
                return Err(NetworkError::IndexOutOfRange { index, n });
            }
        }
        if i == j {
            return Err(NetworkError::SelfMerge(i));
        }
        let (keep, drop) = (i.min(j), i.max(j));
        let new_index = |v: usize| -> usize {
            match v {
                v if v == drop => keep,
                v if v > drop => v - 1,
                v => v,
            }
        };
        let m = n - 1;
        let mut adjacency = vec![vec![false; m]; m];
        for (u, v) in self.edges() {
            let (a, b) = (new_index(u), new_index(v));
            if a != b {
                adjacency[a][b] = true;
            }
        }
        for &(a, b) in extra_edges {
            for index in [a, b] {
                if index >= m {
                    return Err(NetworkError::IndexOutOfRange { index, n: m });
                }
            }
            adjacency[a][b] = true;
        }
        transitive_closure(&mut adjacency);

        let mut labels: Vec<String> = self
            .labels
            .iter()
            .enumerate()
            .filter(|&(v, _)| v != drop)
            .map(|(_, l)| l.clone())
            .collect();
        labels[keep] = format!("{}+{}", self.labels[i], self.labels[j]);

        validate(adjacency, Some(labels)).map_err(|err| match err {
            NetworkError::Invalid { violations, labels } => {
                NetworkError::ResultCyclic { violations, labels }
            }
            other => other,
        })
    }
}

impl fmt::Display for InfluenceNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self
            .edges()
            .into_iter()
            .map(|(i, j)| format!("{}→{}", self.labels[i], self.labels[j]))
            .collect();
        write!(f, "{} firms [{}]", self.len(), edges.join(", "))
    }
}
