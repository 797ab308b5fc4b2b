use std::fmt;

use serde::{Deserialize, Serialize};

use crate::digraph::{Digraph, NodeId, NodeSet, Path, PathCount};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Condition {
    Sc,
    Nc,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Sc => "SC",
            Condition::Nc => "NC",
        })
    }
}

/// Evidence that `target` has at most `f` disjoint paths from `sources`
/// avoiding the fault set internally: `cut` meets every such path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutCertificate {
    pub target: NodeId,
    pub sources: NodeSet,
    pub cut: NodeSet,
    pub paths: Vec<Path>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScViolation {
    pub fault_set: NodeSet,
    pub a: NodeSet,
    pub b: NodeSet,
    /// Why `a` does not reach every node of `b - F`.
    pub a_to_b: CutCertificate,
    /// Why `b` does not reach every node of `a - F`.
    pub b_to_a: CutCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NcViolation {
    pub fault_set: NodeSet,
    pub l: NodeSet,
    pub c: NodeSet,
    pub r: NodeSet,
    /// In-neighborhood of `L - F` inside `R ∪ C`.
    pub into_left: NodeSet,
    /// In-neighborhood of `R - F` inside `L ∪ C`.
    pub into_right: NodeSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Sc(ScViolation),
    Nc(NcViolation),
}

impl Violation {
    pub fn fault_set(&self) -> NodeSet {
        match self {
            Violation::Sc(v) => v.fault_set,
            Violation::Nc(v) => v.fault_set,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// `vacuous` is set when no partition was eligible at all.
    Holds { vacuous: bool },
    Violated(Violation),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionWitness {
    pub condition: Condition,
    pub f: usize,
    #[serde(flatten)]
    pub verdict: Verdict,
}

impl ConditionWitness {
    pub fn holds(&self) -> bool {
        matches!(self.verdict, Verdict::Holds { .. })
    }

    pub fn violation(&self) -> Option<&Violation> {
        match &self.verdict {
            Verdict::Violated(v) => Some(v),
            Verdict::Holds { .. } => None,
        }
    }

    /// Re-checks a violation against the graph primitives. A `Holds` verdict
    /// is accepted as is.
    pub fn validate(&self, g: &Digraph) -> Result<(), String> {
        match &self.verdict {
            Verdict::Holds { .. } => Ok(()),
            Verdict::Violated(Violation::Sc(v)) => validate_sc(g, self.f, v),
            Verdict::Violated(Violation::Nc(v)) => validate_nc(g, self.f, v),
        }
    }
}

fn validate_sc(g: &Digraph, f: usize, v: &ScViolation) -> Result<(), String> {
    let all = g.nodes();
    if v.fault_set.len() > f {
        return Err(format!("fault set {} larger than {f}", v.fault_set));
    }
    if v.a & v.b != NodeSet::EMPTY || v.a | v.b != all {
        return Err(format!("({}, {}) is not a partition", v.a, v.b));
    }
    if (v.a - v.fault_set).is_empty() || (v.b - v.fault_set).is_empty() {
        return Err("both sides must keep a non-faulty node".into());
    }
    check_cut(g, f, v.fault_set, v.a, v.b, &v.a_to_b)?;
    check_cut(g, f, v.fault_set, v.b, v.a, &v.b_to_a)
}

fn check_cut(
    g: &Digraph,
    f: usize,
    fault: NodeSet,
    from: NodeSet,
    to: NodeSet,
    cert: &CutCertificate,
) -> Result<(), String> {
    if cert.sources != from || !(to - fault).contains(cert.target) {
        return Err(format!("certificate for target {} does not match the partition", cert.target));
    }
    if cert.cut.len() > f || cert.cut.contains(cert.target) {
        return Err(format!("cut {} is not a valid size-{f} cut", cert.cut));
    }
    // Removing the cut must leave no qualifying path: cut nodes can neither
    // start nor relay one.
    let remaining = g
        .count_disjoint_paths(from - cert.cut, cert.target, fault | cert.cut)
        .map_err(|e| e.to_string())?;
    if remaining != PathCount::Finite(0) {
        return Err(format!("cut {} leaves a path to {}", cert.cut, cert.target));
    }
    let count = g
        .count_disjoint_paths(from, cert.target, fault)
        .map_err(|e| e.to_string())?;
    if count.at_least(f + 1) {
        return Err(format!("{} has {count:?} disjoint paths", cert.target));
    }
    Ok(())
}

fn validate_nc(g: &Digraph, f: usize, v: &NcViolation) -> Result<(), String> {
    let all = g.nodes();
    if v.fault_set.len() > f {
        return Err(format!("fault set {} larger than {f}", v.fault_set));
    }
    let disjoint = !(v.l.intersects(v.c) || v.l.intersects(v.r) || v.c.intersects(v.r));
    if !disjoint || v.l | v.c | v.r != all {
        return Err("(L, C, R) is not a partition".into());
    }
    let lf = v.l - v.fault_set;
    let rf = v.r - v.fault_set;
    if lf.is_empty() || rf.is_empty() {
        return Err("L - F and R - F must be non-empty".into());
    }
    let into_left = g.in_neighborhood(v.r | v.c, lf);
    let into_right = g.in_neighborhood(v.l | v.c, rf);
    if into_left != v.into_left || into_right != v.into_right {
        return Err("recorded in-neighborhoods do not match the graph".into());
    }
    if into_left.len() > f || into_right.len() > f {
        return Err("an in-neighborhood exceeds f".into());
    }
    Ok(())
}

impl fmt::Display for ConditionWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.verdict {
            Verdict::Holds { vacuous: false } => write!(f, "{}: holds", self.condition),
            Verdict::Holds { vacuous: true } => write!(f, "{}: holds (vacuously)", self.condition),
            Verdict::Violated(Violation::Sc(v)) => write!(
                f,
                "SC: violated, F={}, A={}, B={}; {} is cut off from {} by {}; {} is cut off from {} by {}",
                v.fault_set,
                v.a,
                v.b,
                v.a_to_b.target,
                v.a,
                v.a_to_b.cut,
                v.b_to_a.target,
                v.b,
                v.b_to_a.cut
            ),
            Verdict::Violated(Violation::Nc(v)) => write!(
                f,
                "NC: violated, F={}, L={}, C={}, R={}; N(L-F)={}, N(R-F)={}",
                v.fault_set, v.l, v.c, v.r, v.into_left, v.into_right
            ),
        }
    }
}
