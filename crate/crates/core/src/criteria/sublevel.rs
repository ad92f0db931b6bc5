use crate::error::Result;
use crate::lattice::{GridFunction, NodeSet};

/// `{i : V(i) ≤ n}`. Nodes where `V = ∞` are never included.
pub fn sublevel_set(v: &GridFunction, n: f64) -> Result<NodeSet> {
    v.check_defined()?;
    Ok(NodeSet::from_predicate_values(v, |x| x < f64::INFINITY && x <= n))
}
