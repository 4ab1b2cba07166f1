//! Greedy rewrite driver for the DSP patterns.
//!
//! Patterns are tried in their fixed priority order; for each pattern the
//! ops are scanned in topological order and the first match is applied.
//! After every application the graph is swept of dead ops, renumbered,
//! re-shaped and re-verified, and the scan restarts. The driver stops when a
//! full scan finds nothing.

mod patterns;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{infer_shapes, verify_graph, DspGraph, GraphError, OpCode, ValueId, Violation};
use patterns::IdGen;
pub use patterns::Rewrite;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum PatternId {
    SymmetricFilter,
    SymmetricFilterResponse,
    FilterYSymm,
    DftConjSymm,
    Parseval,
    DftFusion,
    LmsGainFusion,
    IdentityDftIdft,
    IdentityUpDown,
}

type PatternFn = fn(&DspGraph, usize, &mut IdGen) -> Option<Rewrite>;

impl PatternId {
    /// All patterns in priority order.
    pub const ALL: [PatternId; 9] = [
        PatternId::SymmetricFilter,
        PatternId::SymmetricFilterResponse,
        PatternId::FilterYSymm,
        PatternId::DftConjSymm,
        PatternId::Parseval,
        PatternId::DftFusion,
        PatternId::LmsGainFusion,
        PatternId::IdentityDftIdft,
        PatternId::IdentityUpDown,
    ];

    /// Short label: `1`..`7` for the optimizations, `C3a`/`C3b` for the
    /// identity eliminations.
    pub fn label(self) -> &'static str {
        match self {
            PatternId::SymmetricFilter => "1",
            PatternId::SymmetricFilterResponse => "2",
            PatternId::FilterYSymm => "3",
            PatternId::DftConjSymm => "4",
            PatternId::Parseval => "5",
            PatternId::DftFusion => "6",
            PatternId::LmsGainFusion => "7",
            PatternId::IdentityDftIdft => "C3a",
            PatternId::IdentityUpDown => "C3b",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PatternId::SymmetricFilter => "SymmetricFilter",
            PatternId::SymmetricFilterResponse => "SymmetricFilterResponse",
            PatternId::FilterYSymm => "FilterYSymm",
            PatternId::DftConjSymm => "DftConjSymm",
            PatternId::Parseval => "Parseval",
            PatternId::DftFusion => "DftFusion",
            PatternId::LmsGainFusion => "LmsGainFusion",
            PatternId::IdentityDftIdft => "IdentityDftIdft",
            PatternId::IdentityUpDown => "IdentityUpDown",
        }
    }

    fn matcher(self) -> PatternFn {
        match self {
            PatternId::SymmetricFilter => patterns::symmetric_filter,
            PatternId::SymmetricFilterResponse => patterns::symmetric_filter_response,
            PatternId::FilterYSymm => patterns::filter_y_symm,
            PatternId::DftConjSymm => patterns::dft_conj_symm,
            PatternId::Parseval => patterns::parseval,
            PatternId::DftFusion => patterns::dft_fusion,
            PatternId::LmsGainFusion => patterns::lms_gain_fusion,
            PatternId::IdentityDftIdft => patterns::identity_dft_idft,
            PatternId::IdentityUpDown => patterns::identity_up_down,
        }
    }

    /// Tries this pattern at `ops[site]` without modifying the graph.
    pub fn match_at(self, graph: &DspGraph, site: usize) -> Option<Rewrite> {
        (self.matcher())(graph, site, &mut IdGen(graph.next_id()))
    }
}

impl fmt::Display for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PatternId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        PatternId::ALL
            .into_iter()
            .find(|p| p.label().eq_ignore_ascii_case(s) || p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown pattern `{s}` (expected 1-7, C3a or C3b)"))
    }
}

pub type PatternSet = BTreeSet<PatternId>;

pub fn all_patterns() -> PatternSet {
    PatternId::ALL.into_iter().collect()
}

/// Parses a comma separated list such as `1,2,C3a`.
pub fn parse_pattern_list(list: &str) -> Result<PatternSet, String> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RewriteStats {
    pub applications: BTreeMap<PatternId, usize>,
    pub ops_before: usize,
    pub ops_after: usize,
    pub passes: usize,
}

impl RewriteStats {
    pub fn fired(&self) -> PatternSet {
        self.applications
            .iter()
            .filter(|(_, n)| **n > 0)
            .map(|(p, _)| *p)
            .collect()
    }

    pub fn count(&self, p: PatternId) -> usize {
        self.applications.get(&p).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewriteError {
    #[error("rewriting did not reach a fixpoint within {limit} passes")]
    NonTermination { limit: usize },
    #[error("input graph is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidInput(Vec<Violation>),
    #[error("pattern {pattern} produced an invalid graph: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidResult {
        pattern: PatternId,
        violations: Vec<Violation>,
    },
    #[error(transparent)]
    Shape(#[from] GraphError),
}

/// Removes ops whose results are never read. `print` and `input` ops stay.
pub fn eliminate_dead_ops(graph: &mut DspGraph) -> usize {
    let mut uses: HashMap<ValueId, usize> = graph.use_counts();
    let mut keep = vec![true; graph.ops.len()];
    for (i, op) in graph.ops.iter().enumerate().rev() {
        if matches!(op.opcode, OpCode::Print | OpCode::Input) {
            continue;
        }
        if op
            .results
            .iter()
            .all(|r| uses.get(r).copied().unwrap_or(0) == 0)
        {
            keep[i] = false;
            for v in &op.operands {
                if let Some(n) = uses.get_mut(v) {
                    *n -= 1;
                }
            }
        }
    }
    let before = graph.ops.len();
    let mut it = keep.iter();
    graph.ops.retain(|_| *it.next().unwrap());
    before - graph.ops.len()
}

/// Applies one rewrite and cleans up. The result is renumbered and shaped.
pub fn apply_rewrite(graph: &DspGraph, rewrite: Rewrite) -> Result<DspGraph, GraphError> {
    let mut g = graph.clone();
    let map: HashMap<ValueId, ValueId> = rewrite.replace.iter().copied().collect();
    for op in &mut g.ops {
        for v in &mut op.operands {
            if let Some(n) = map.get(v) {
                *v = *n;
            }
        }
    }
    let at = rewrite.insert_at;
    g.ops.splice(at..at, rewrite.new_ops);
    eliminate_dead_ops(&mut g);
    g.renumber();
    infer_shapes(&g)
}

fn find_rewrite(graph: &DspGraph, enabled: &PatternSet) -> Option<(PatternId, Rewrite)> {
    PatternId::ALL
        .into_iter()
        .filter(|p| enabled.contains(p))
        .find_map(|p| (0..graph.ops.len()).find_map(|site| p.match_at(graph, site).map(|r| (p, r))))
}

/// Rewrites `graph` to a fixpoint of the enabled patterns. The input must be
/// verified and shape-inferred.
pub fn apply_dsp_patterns(
    graph: &DspGraph,
    enabled: &PatternSet,
) -> Result<(DspGraph, RewriteStats), RewriteError> {
    let violations = verify_graph(graph);
    if !violations.is_empty() {
        return Err(RewriteError::InvalidInput(violations));
    }
    let mut stats = RewriteStats {
        applications: enabled.iter().map(|p| (*p, 0)).collect(),
        ops_before: graph.ops.len(),
        ..Default::default()
    };
    let limit = graph.ops.len() + 8;
    let mut g = graph.clone();
    loop {
        stats.passes += 1;
        if stats.passes > limit {
            return Err(RewriteError::NonTermination { limit });
        }
        let Some((pattern, rewrite)) = find_rewrite(&g, enabled) else {
            break;
        };
        g = apply_rewrite(&g, rewrite)?;
        let violations = verify_graph(&g);
        if !violations.is_empty() {
            return Err(RewriteError::InvalidResult {
                pattern,
                violations,
            });
        }
        *stats.applications.entry(pattern).or_insert(0) += 1;
    }
    eliminate_dead_ops(&mut g);
    g.renumber();
    let g = infer_shapes(&g)?;
    stats.ops_after = g.ops.len();
    Ok((g, stats))
}
