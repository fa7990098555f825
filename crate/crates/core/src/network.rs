//! Discrete Bayesian-network data model.
//!
//! Variables are addressed by their position in [`Network::variables`].
//! State values are addressed by index into [`Variable::states`]; labels are
//! only used at the I/O boundary.
//!
//! CPT rows are ordered by parent configuration with the **last-listed
//! parent varying fastest**: for parents `(P1, P2)` with two states each the
//! rows are `(0,0), (0,1), (1,0), (1,1)`.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};
use std::fmt;

use crate::error::{BnError, Result};

/// Tolerance on CPT row sums.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub id: String,
    pub states: Vec<String>,
}

impl Variable {
    pub fn new(id: impl Into<String>, states: &[&str]) -> Self {
        Self {
            id: id.into(),
            states: states.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn binary(id: impl Into<String>) -> Self {
        Self::new(id, &["true", "false"])
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }
}

/// Conditional probability table of one variable given its ordered parents.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    pub parents: Vec<usize>,
    pub rows: Vec<Vec<f64>>,
}

impl Cpt {
    pub fn new(parents: Vec<usize>, rows: Vec<Vec<f64>>) -> Self {
        Self { parents, rows }
    }

    pub fn root(prior: Vec<f64>) -> Self {
        Self {
            parents: Vec::new(),
            rows: vec![prior],
        }
    }
}

/// One violated structural or numeric invariant, with its location.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateId { node: String },
    TooFewStates { node: String, count: usize },
    DuplicateState { node: String, state: String },
    CptCount { variables: usize, cpts: usize },
    DanglingParent { node: String, parent: String },
    DuplicateParent { node: String, parent: String },
    Cycle { nodes: Vec<String> },
    RowCount { node: String, expected: usize, found: usize },
    RowWidth { node: String, row: usize, expected: usize, found: usize },
    ProbabilityRange { node: String, row: usize, state: usize, value: f64 },
    RowSum { node: String, row: usize, sum: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId { node } => write!(f, "node `{node}` declared more than once"),
            Violation::TooFewStates { node, count } => {
                write!(f, "node `{node}` has {count} states, at least 2 required")
            }
            Violation::DuplicateState { node, state } => {
                write!(f, "node `{node}` repeats state label `{state}`")
            }
            Violation::CptCount { variables, cpts } => {
                write!(f, "{variables} variables but {cpts} CPTs")
            }
            Violation::DanglingParent { node, parent } => {
                write!(f, "node `{node}` references unknown parent `{parent}`")
            }
            Violation::DuplicateParent { node, parent } => {
                write!(f, "node `{node}` lists parent `{parent}` more than once")
            }
            Violation::Cycle { nodes } => write!(f, "cycle through nodes {}", nodes.join(", ")),
            Violation::RowCount { node, expected, found } => {
                write!(f, "node `{node}` has {found} CPT rows, expected {expected}")
            }
            Violation::RowWidth { node, row, expected, found } => write!(
                f,
                "node `{node}` row {row} has {found} entries, expected {expected}"
            ),
            Violation::ProbabilityRange { node, row, state, value } => write!(
                f,
                "node `{node}` row {row} state {state}: probability {value} outside [0, 1]"
            ),
            Violation::RowSum { node, row, sum } => {
                write!(f, "node `{node}` row {row} sums to {sum}, expected 1")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    name: Option<String>,
    variables: Vec<Variable>,
    cpts: Vec<Cpt>,
}

impl Network {
    /// Builds a network and rejects it if [`validate_network`] reports anything.
    pub fn new(name: Option<String>, variables: Vec<Variable>, cpts: Vec<Cpt>) -> Result<Self> {
        let net = Self::from_parts_unchecked(name, variables, cpts);
        let report = validate_network(&net);
        if report.is_empty() {
            Ok(net)
        } else {
            Err(BnError::Validation(report))
        }
    }

    /// Builds a network without checking any invariant. Only
    /// [`validate_network`] is safe to call on the result until it has been
    /// validated.
    pub fn from_parts_unchecked(
        name: Option<String>,
        variables: Vec<Variable>,
        cpts: Vec<Cpt>,
    ) -> Self {
        Self {
            name,
            variables,
            cpts,
        }
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, node: usize) -> &Variable {
        &self.variables[node]
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn cpt(&self, node: usize) -> &Cpt {
        &self.cpts[node]
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.cpts[node].parents
    }

    pub fn cardinality(&self, node: usize) -> usize {
        self.variables[node].states.len()
    }

    pub fn id(&self, node: usize) -> &str {
        &self.variables[node].id
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.id == id)
    }

    pub fn require_index(&self, id: &str) -> Result<usize> {
        self.index_of(id)
            .ok_or_else(|| BnError::UnknownNode(id.to_string()))
    }

    pub fn has_arc(&self, from: usize, to: usize) -> bool {
        self.cpts[to].parents.contains(&from)
    }

    /// Child lists for every node, each in declaration order.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.len()];
        for (node, cpt) in self.cpts.iter().enumerate() {
            for &p in &cpt.parents {
                children[p].push(node);
            }
        }
        children
    }

    /// Product of all state-space sizes, saturating.
    pub fn state_space_size(&self) -> u128 {
        self.variables
            .iter()
            .fold(1u128, |acc, v| acc.saturating_mul(v.states.len() as u128))
    }

    /// Number of parent configurations (= expected CPT rows) of `node`.
    pub fn configuration_count(&self, node: usize) -> usize {
        self.cpts[node]
            .parents
            .iter()
            .map(|&p| self.cardinality(p))
            .product()
    }

    /// Row index of `node`'s CPT for the parent values found in `states`,
    /// which is indexed by variable.
    #[inline]
    pub fn configuration_index(&self, node: usize, states: &[usize]) -> usize {
        configuration_index(&self.cpts[node].parents, states, |p| {
            self.variables[p].states.len()
        })
    }

    /// CPT row of `node` for the parent values found in `states`.
    #[inline]
    pub fn row_for(&self, node: usize, states: &[usize]) -> &[f64] {
        &self.cpts[node].rows[self.configuration_index(node, states)]
    }

    /// Joint probability of a dense full assignment (one state per variable).
    pub fn joint_probability_dense(&self, states: &[usize]) -> f64 {
        (0..self.len())
            .map(|node| self.row_for(node, states)[states[node]])
            .product()
    }
}

/// Mixed-radix index of the values of `parents` in `states`, last parent fastest.
#[inline]
pub fn configuration_index(
    parents: &[usize],
    states: &[usize],
    cardinality: impl Fn(usize) -> usize,
) -> usize {
    parents
        .iter()
        .fold(0, |acc, &p| acc * cardinality(p) + states[p])
}

/// Checks every invariant of the data model. An empty report means the
/// network is valid.
pub fn validate_network(net: &Network) -> Vec<Violation> {
    let mut report = Vec::new();
    let n = net.variables.len();
    let name = |i: usize| -> String {
        net.variables
            .get(i)
            .map(|v| v.id.clone())
            .unwrap_or_else(|| format!("#{i}"))
    };

    let mut seen = HashSet::new();
    for v in &net.variables {
        if !seen.insert(v.id.as_str()) {
            report.push(Violation::DuplicateId { node: v.id.clone() });
        }
        if v.states.len() < 2 {
            report.push(Violation::TooFewStates {
                node: v.id.clone(),
                count: v.states.len(),
            });
        }
        let mut labels = HashSet::new();
        for s in &v.states {
            if !labels.insert(s.as_str()) {
                report.push(Violation::DuplicateState {
                    node: v.id.clone(),
                    state: s.clone(),
                });
            }
        }
    }

    if net.cpts.len() != n {
        report.push(Violation::CptCount {
            variables: n,
            cpts: net.cpts.len(),
        });
        return report;
    }

    let mut parents_ok = true;
    for (node, cpt) in net.cpts.iter().enumerate() {
        let mut listed = HashSet::new();
        for &p in &cpt.parents {
            if p >= n {
                parents_ok = false;
                report.push(Violation::DanglingParent {
                    node: name(node),
                    parent: format!("#{p}"),
                });
            } else if !listed.insert(p) {
                report.push(Violation::DuplicateParent {
                    node: name(node),
                    parent: name(p),
                });
            }
        }
    }
    if !parents_ok {
        return report;
    }

    if let Err(remaining) = kahn_order(net) {
        report.push(Violation::Cycle {
            nodes: remaining.into_iter().map(name).collect(),
        });
    }

    for (node, cpt) in net.cpts.iter().enumerate() {
        let expected_rows = cpt
            .parents
            .iter()
            .map(|&p| net.variables[p].states.len())
            .product::<usize>();
        if cpt.rows.len() != expected_rows {
            report.push(Violation::RowCount {
                node: name(node),
                expected: expected_rows,
                found: cpt.rows.len(),
            });
        }
        let width = net.variables[node].states.len();
        for (r, row) in cpt.rows.iter().enumerate() {
            if row.len() != width {
                report.push(Violation::RowWidth {
                    node: name(node),
                    row: r,
                    expected: width,
                    found: row.len(),
                });
                continue;
            }
            let mut range_ok = true;
            for (s, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    range_ok = false;
                    report.push(Violation::ProbabilityRange {
                        node: name(node),
                        row: r,
                        state: s,
                        value: p,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if range_ok && (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
                report.push(Violation::RowSum {
                    node: name(node),
                    row: r,
                    sum,
                });
            }
        }
    }
    report
}

/// Kahn's algorithm, always releasing the lowest declaration index first.
/// On a cycle returns the nodes that could not be ordered.
fn kahn_order(net: &Network) -> std::result::Result<Vec<usize>, Vec<usize>> {
    let n = net.len();
    let mut indegree: Vec<usize> = net.cpts.iter().map(|c| c.parents.len()).collect();
    let children = net.children();
    let mut ready: BinaryHeap<Reverse<usize>> = (0..n)
        .filter(|&i| indegree[i] == 0)
        .map(Reverse)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(node)) = ready.pop() {
        order.push(node);
        for &c in &children[node] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).filter(|&i| indegree[i] > 0).collect())
    }
}

/// Parents-before-children ordering; ties are broken by declaration order so
/// the result is deterministic.
pub fn topological_order(net: &Network) -> Result<Vec<usize>> {
    kahn_order(net).map_err(|remaining| {
        BnError::Cycle(
            remaining
                .iter()
                .map(|&i| net.id(i).to_string())
                .collect::<Vec<_>>()
                .join(", "),
        )
    })
}

/// A (possibly partial) mapping from variable index to state index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Assignment(BTreeMap<usize, usize>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Full assignment from a dense state vector indexed by variable.
    pub fn from_dense(states: &[usize]) -> Self {
        Self(states.iter().copied().enumerate().collect())
    }

    /// Resolves `(node id, state label)` pairs against `net`.
    pub fn from_labels(net: &Network, pairs: &[(&str, &str)]) -> Result<Self> {
        let mut out = Self::new();
        for &(node, state) in pairs {
            let idx = net.require_index(node)?;
            let s = net
                .variable(idx)
                .state_index(state)
                .ok_or_else(|| BnError::UnknownState {
                    node: node.to_string(),
                    state: state.to_string(),
                })?;
            out.insert(idx, s);
        }
        Ok(out)
    }

    pub fn insert(&mut self, node: usize, state: usize) -> Option<usize> {
        self.0.insert(node, state)
    }

    pub fn get(&self, node: usize) -> Option<usize> {
        self.0.get(&node).copied()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.0.contains_key(&node)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().map(|(&k, &v)| (k, v))
    }

    /// Checks that every referenced variable exists and every state is in range.
    pub fn check(&self, net: &Network) -> Result<()> {
        for (node, state) in self.iter() {
            if node >= net.len() {
                return Err(BnError::UnknownNode(format!("#{node}")));
            }
            if state >= net.cardinality(node) {
                return Err(BnError::UnknownState {
                    node: net.id(node).to_string(),
                    state: format!("#{state}"),
                });
            }
        }
        Ok(())
    }

    /// Dense state vector; fails unless every variable of `net` is assigned.
    pub fn to_dense(&self, net: &Network) -> Result<Vec<usize>> {
        self.check(net)?;
        (0..net.len())
            .map(|i| {
                self.get(i).ok_or_else(|| {
                    BnError::Precondition(format!("assignment is missing node `{}`", net.id(i)))
                })
            })
            .collect()
    }
}

/// Observed values of the evidence nodes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evidence(Assignment);

impl Evidence {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(net: &Network, observations: Assignment) -> Result<Self> {
        observations.check(net)?;
        Ok(Self(observations))
    }

    pub fn from_labels(net: &Network, pairs: &[(&str, &str)]) -> Result<Self> {
        Self::new(net, Assignment::from_labels(net, pairs)?)
    }

    pub fn assignment(&self) -> &Assignment {
        &self.0
    }

    pub fn get(&self, node: usize) -> Option<usize> {
        self.0.get(node)
    }

    pub fn is_observed(&self, node: usize) -> bool {
        self.0.contains(node)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter()
    }

    /// Per-variable observed value, `None` for state nodes.
    pub fn dense(&self, len: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; len];
        for (node, state) in self.iter() {
            out[node] = Some(state);
        }
        out
    }

    /// Re-resolves the observations by node id against another network.
    pub fn remap(&self, from: &Network, to: &Network) -> Result<Evidence> {
        let mut out = Assignment::new();
        for (node, state) in self.iter() {
            out.insert(to.require_index(from.id(node))?, state);
        }
        Evidence::new(to, out)
    }
}

/// The CPT row of `node` for the given parent values.
pub fn local_distribution<'a>(
    net: &'a Network,
    node: usize,
    parent_values: &Assignment,
) -> Result<&'a [f64]> {
    if node >= net.len() {
        return Err(BnError::UnknownNode(format!("#{node}")));
    }
    let mut idx = 0;
    for &p in net.parents(node) {
        let value = parent_values.get(p).ok_or_else(|| {
            BnError::Precondition(format!(
                "parent `{}` of `{}` is unassigned",
                net.id(p),
                net.id(node)
            ))
        })?;
        if value >= net.cardinality(p) {
            return Err(BnError::UnknownState {
                node: net.id(p).to_string(),
                state: format!("#{value}"),
            });
        }
        idx = idx * net.cardinality(p) + value;
    }
    Ok(&net.cpt(node).rows[idx])
}

/// Product of local probabilities of a full assignment.
pub fn joint_probability(net: &Network, full: &Assignment) -> Result<f64> {
    let dense = full.to_dense(net)?;
    Ok(net.joint_probability_dense(&dense))
}

/// Id → index lookup table.
pub(crate) fn id_index(net: &Network) -> HashMap<&str, usize> {
    net.variables()
        .iter()
        .enumerate()
        .map(|(i, v)| (v.id.as_str(), i))
        .collect()
}
