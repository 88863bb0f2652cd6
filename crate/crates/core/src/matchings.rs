//! The family `M_n` of `n − 1` perfect, pairwise edge-disjoint matchings on
//! `n` nodes, built with the round-robin circle method.
//!
//! Node `n` is held fixed while nodes `1..n−1` rotate. Rotation `r`
//! (0-based, nodes 0-based internally) pairs `r` with the fixed node and
//! `(r + i) mod (n−1)` with `(r − i) mod (n−1)` for `i = 1..n/2`. Matching
//! index `i` is rotation `n − 1 − i`, which reproduces the textbook numbering
//! for `n = 4`:
//!
//! ```text
//! σ1 = {(1,2),(3,4)}  σ2 = {(1,3),(2,4)}  σ3 = {(1,4),(2,3)}
//! ```
//!
//! Because `n − 1` is odd, 2 is invertible modulo `n − 1` and the rotation
//! containing an edge `(a, b)` is `(a + b)·2⁻¹ mod (n − 1)`. Large sets use
//! that closed form instead of storing all `n(n−1)/2` edges.

use std::borrow::Cow;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sets with more nodes than this are represented implicitly.
pub const DEFAULT_EXPLICIT_THRESHOLD: usize = 1024;

/// An unordered pair of 1-based nodes stored as `k < l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "(usize, usize)", into = "(usize, usize)")]
pub struct Edge {
    k: usize,
    l: usize,
}

impl Edge {
    /// Canonicalizes the pair so that `k < l`.
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::invalid(format!(
                "node indices are 1-based, got ({a},{b})"
            )));
        }
        if a == b {
            return Err(Error::invalid(format!(
                "self-loop ({a},{b}) is not an edge"
            )));
        }
        Ok(Edge {
            k: a.min(b),
            l: a.max(b),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn contains(&self, node: usize) -> bool {
        self.k == node || self.l == node
    }
}

impl TryFrom<(usize, usize)> for Edge {
    type Error = Error;

    fn try_from((a, b): (usize, usize)) -> Result<Self> {
        Edge::new(a, b)
    }
}

impl From<Edge> for (usize, usize) {
    fn from(e: Edge) -> Self {
        (e.k, e.l)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k, self.l)
    }
}

/// One perfect matching `σ_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub index: usize,
    pub edges: Vec<Edge>,
}

impl Matching {
    /// Number of nodes covered when the matching is perfect.
    pub fn node_count(&self) -> usize {
        self.edges.len() * 2
    }

    /// Partner table: `partners()[k-1]` is the node matched with `k`.
    pub fn partners(&self) -> Vec<usize> {
        let mut p = vec![0; self.node_count()];
        for e in &self.edges {
            if e.l <= p.len() {
                p[e.k - 1] = e.l;
                p[e.l - 1] = e.k;
            }
        }
        p
    }

    pub fn contains(&self, e: &Edge) -> bool {
        self.edges.contains(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Repr {
    Explicit {
        matchings: Vec<Matching>,
        // edge (triangular index) -> matching index
        lookup: Vec<u32>,
        // (index - 1) * n + (node - 1) -> partner node, 0 when unmatched
        partners: Vec<u32>,
    },
    Implicit,
}

/// The family `M_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingSet {
    n: usize,
    repr: Repr,
}

/// Builds `M_n` with the default explicit/implicit threshold.
pub fn build_matching_set(n: usize) -> Result<MatchingSet> {
    MatchingSet::build(n)
}

/// Index `i` of the unique matching containing `e`.
pub fn matching_of_edge(ms: &MatchingSet, e: Edge) -> Result<usize> {
    ms.matching_of_edge(e)
}

impl MatchingSet {
    pub fn build(n: usize) -> Result<Self> {
        Self::build_with_threshold(n, DEFAULT_EXPLICIT_THRESHOLD)
    }

    /// Stores the set explicitly when `n <= threshold`, implicitly otherwise.
    pub fn build_with_threshold(n: usize, threshold: usize) -> Result<Self> {
        check_n(n)?;
        if n > threshold {
            return Ok(MatchingSet {
                n,
                repr: Repr::Implicit,
            });
        }
        let matchings = (1..n).map(|i| circle_matching(n, i)).collect();
        Self::from_matchings(n, matchings)
    }

    /// Wraps an arbitrary list of matchings without checking the family
    /// invariants; use [`validate_matching_set`] to inspect it.
    pub fn from_matchings(n: usize, matchings: Vec<Matching>) -> Result<Self> {
        check_n(n)?;
        let mut lookup = vec![0u32; n * (n - 1) / 2];
        let mut partners = vec![0u32; (n - 1) * n];
        for m in &matchings {
            let row = (1..n).contains(&m.index).then(|| (m.index - 1) * n);
            for e in &m.edges {
                if e.l > n {
                    return Err(Error::invalid(format!("edge {e} outside 1..={n}")));
                }
                lookup[tri_index(n, e.k - 1, e.l - 1)] = m.index as u32;
                if let Some(row) = row {
                    partners[row + e.k - 1] = e.l as u32;
                    partners[row + e.l - 1] = e.k as u32;
                }
            }
        }
        Ok(MatchingSet {
            n,
            repr: Repr::Explicit {
                matchings,
                lookup,
                partners,
            },
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of matchings held (`n − 1` for a valid family).
    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Explicit { matchings, .. } => matchings.len(),
            Repr::Implicit => self.n - 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_implicit(&self) -> bool {
        matches!(self.repr, Repr::Implicit)
    }

    /// Matching `σ_i` for `i` in `1..=n−1`.
    pub fn matching(&self, i: usize) -> Result<Cow<'_, Matching>> {
        match &self.repr {
            Repr::Explicit { matchings, .. } => matchings
                .iter()
                .find(|m| m.index == i)
                .map(Cow::Borrowed)
                .ok_or_else(|| Error::invalid(format!("no matching with index {i}"))),
            Repr::Implicit => {
                if i == 0 || i >= self.n {
                    return Err(Error::invalid(format!(
                        "matching index {i} outside 1..={}",
                        self.n - 1
                    )));
                }
                Ok(Cow::Owned(circle_matching(self.n, i)))
            }
        }
    }

    pub fn matchings(&self) -> impl Iterator<Item = Cow<'_, Matching>> + '_ {
        let explicit = match &self.repr {
            Repr::Explicit { matchings, .. } => Some(matchings.iter().map(Cow::Borrowed)),
            Repr::Implicit => None,
        };
        let implicit = match &self.repr {
            Repr::Explicit { .. } => None,
            Repr::Implicit => Some((1..self.n).map(|i| Cow::Owned(circle_matching(self.n, i)))),
        };
        explicit
            .into_iter()
            .flatten()
            .chain(implicit.into_iter().flatten())
    }

    pub fn matching_of_edge(&self, e: Edge) -> Result<usize> {
        if e.l > self.n {
            return Err(Error::invalid(format!("edge {e} outside 1..={}", self.n)));
        }
        let (a, b) = (e.k - 1, e.l - 1);
        Ok(match &self.repr {
            Repr::Explicit { lookup, .. } => lookup[tri_index(self.n, a, b)] as usize,
            Repr::Implicit => self.n - 1 - rotation_of(self.n, a, b),
        })
    }

    /// Node matched with `node` in `σ_i`. O(1) for the circle family.
    pub fn partner(&self, i: usize, node: usize) -> Result<usize> {
        if node == 0 || node > self.n {
            return Err(Error::invalid(format!(
                "node {node} outside 1..={}",
                self.n
            )));
        }
        match &self.repr {
            Repr::Explicit { partners, .. } => {
                if i == 0 || i >= self.n {
                    return Err(Error::invalid(format!("matching index {i} out of range")));
                }
                match partners[(i - 1) * self.n + node - 1] {
                    0 => Err(Error::invalid(format!("node {node} unmatched in σ{i}"))),
                    p => Ok(p as usize),
                }
            }
            Repr::Implicit => {
                if i == 0 || i >= self.n {
                    return Err(Error::invalid(format!("matching index {i} out of range")));
                }
                let m = self.n - 1;
                let r = m - i;
                let a = node - 1;
                let p = if a == m {
                    r
                } else if a == r {
                    m
                } else {
                    (2 * r + m - a) % m
                };
                Ok(p + 1)
            }
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::invalid(format!(
            "matching family needs an even n >= 2, got {n}"
        )));
    }
    Ok(())
}

/// Row-major index of 0-based pair `a < b` in the strict upper triangle.
fn tri_index(n: usize, a: usize, b: usize) -> usize {
    a * n - a * (a + 1) / 2 + (b - a - 1)
}

fn rotation_of(n: usize, a: usize, b: usize) -> usize {
    let m = n - 1;
    if b == m {
        a
    } else {
        // (m + 1) / 2 is the inverse of 2 modulo odd m
        ((a + b) % m) * m.div_ceil(2) % m
    }
}

fn circle_matching(n: usize, index: usize) -> Matching {
    let m = n - 1;
    let r = m - index;
    let mut edges = Vec::with_capacity(n / 2);
    edges.push(Edge { k: r + 1, l: n });
    for i in 1..n / 2 {
        let a = (r + i) % m;
        let b = (r + m - i) % m;
        edges.push(Edge {
            k: a.min(b) + 1,
            l: a.max(b) + 1,
        });
    }
    edges.sort_unstable();
    Matching { index, edges }
}

/// Outcome of one structural check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub failures: Vec<String>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failure_count(&self) -> usize {
        self.checks.iter().map(|c| c.failures.len()).sum()
    }
}

/// Checks count, perfectness, disjointness and coverage of a matching set.
pub fn validate_matching_set(ms: &MatchingSet) -> ValidationReport {
    let n = ms.n();
    let mut count = CheckResult {
        name: "count",
        failures: vec![],
    };
    let mut perfect = CheckResult {
        name: "perfectness",
        failures: vec![],
    };
    let mut disjoint = CheckResult {
        name: "disjointness",
        failures: vec![],
    };
    let mut coverage = CheckResult {
        name: "coverage",
        failures: vec![],
    };

    if ms.len() != n - 1 {
        count
            .failures
            .push(format!("expected {} matchings, found {}", n - 1, ms.len()));
    }
    let mut seen_index = vec![false; n];
    let mut edge_hits = vec![0u32; n * (n - 1) / 2];

    for m in ms.matchings() {
        if m.index == 0 || m.index >= n {
            count
                .failures
                .push(format!("matching index {} out of range", m.index));
        } else if std::mem::replace(&mut seen_index[m.index], true) {
            count
                .failures
                .push(format!("matching index {} repeated", m.index));
        }

        let mut degree = vec![0u32; n];
        for e in &m.edges {
            if e.l > n {
                perfect
                    .failures
                    .push(format!("σ{}: edge {e} outside 1..={n}", m.index));
                continue;
            }
            degree[e.k - 1] += 1;
            degree[e.l - 1] += 1;
            edge_hits[tri_index(n, e.k - 1, e.l - 1)] += 1;
        }
        if m.edges.len() != n / 2 {
            perfect.failures.push(format!(
                "σ{}: {} edges, expected {}",
                m.index,
                m.edges.len(),
                n / 2
            ));
        }
        for (node, &d) in degree.iter().enumerate() {
            if d != 1 {
                perfect
                    .failures
                    .push(format!("σ{}: node {} covered {d} times", m.index, node + 1));
            }
        }
    }

    for a in 0..n {
        for b in a + 1..n {
            match edge_hits[tri_index(n, a, b)] {
                0 => coverage
                    .failures
                    .push(format!("edge ({},{}) not covered", a + 1, b + 1)),
                1 => {}
                h => {
                    disjoint
                        .failures
                        .push(format!("edge ({},{}) appears {h} times", a + 1, b + 1))
                }
            }
        }
    }

    ValidationReport {
        checks: vec![count, perfect, disjoint, coverage],
    }
}
