//! Arc reversal, evidential integration and conditioning.
//!
//! Every transform returns a new [`Network`] whose joint distribution over
//! the original variables is unchanged (reversal, integration) or equals the
//! posterior over the surviving state nodes (conditioning).

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{BnError, Result};
use crate::network::{configuration_index, topological_order, Cpt, Evidence, Network};

/// Record of one reversed arc.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReversalStep {
    pub from: String,
    pub to: String,
    pub from_parents_before: Vec<String>,
    pub from_parents_after: Vec<String>,
    pub to_parents_before: Vec<String>,
    pub to_parents_after: Vec<String>,
    /// Rows of `from`'s new CPT whose Bayes-rule denominator was zero; these
    /// configurations are unreachable and were filled uniformly.
    pub uniform_rows: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReversalPlan {
    pub steps: Vec<ReversalStep>,
}

impl ReversalPlan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The reversed arcs as `(from, to)` ids, in order.
    pub fn arcs(&self) -> Vec<(String, String)> {
        self.steps
            .iter()
            .map(|s| (s.from.clone(), s.to.clone()))
            .collect()
    }

    pub fn has_uniform_fill(&self) -> bool {
        self.steps.iter().any(|s| !s.uniform_rows.is_empty())
    }

    /// Re-applies every reversal to `net`.
    pub fn replay(&self, net: &Network) -> Result<Network> {
        let mut current = net.clone();
        for step in &self.steps {
            let from = current.require_index(&step.from)?;
            let to = current.require_index(&step.to)?;
            current = reverse_arc(&current, from, to)?;
        }
        Ok(current)
    }
}

/// Reverses `from → to` by Bayes' rule. Both nodes end up with the union of
/// their former parents; `to` becomes a parent of `from`.
pub fn reverse_arc(net: &Network, from: usize, to: usize) -> Result<Network> {
    reverse_arc_recorded(net, from, to).map(|(net, _)| net)
}

pub fn reverse_arc_recorded(net: &Network, from: usize, to: usize) -> Result<(Network, ReversalStep)> {
    let n = net.len();
    if from >= n || to >= n {
        return Err(BnError::Structural(format!("node index out of range ({from} → {to})")));
    }
    if !net.has_arc(from, to) {
        return Err(BnError::Structural(format!(
            "no arc {} → {}",
            net.id(from),
            net.id(to)
        )));
    }
    if has_indirect_path(net, from, to) {
        return Err(BnError::Cycle(format!(
            "reversing {} → {} would close a cycle through another directed path",
            net.id(from),
            net.id(to)
        )));
    }

    let from_parents = net.parents(from).to_vec();
    let to_parents = net.parents(to).to_vec();

    let mut to_new: Vec<usize> = to_parents.iter().copied().filter(|&p| p != from).collect();
    for &p in &from_parents {
        if !to_new.contains(&p) {
            to_new.push(p);
        }
    }
    let mut from_new = from_parents.clone();
    for &p in &to_new {
        if !from_new.contains(&p) {
            from_new.push(p);
        }
    }
    from_new.push(to);

    let card = |v: usize| net.cardinality(v);
    let from_card = card(from);
    let to_card = card(to);
    let to_rows_len: usize = to_new.iter().map(|&p| card(p)).product();
    let from_rows_len = to_rows_len * to_card;

    let mut to_rows = Vec::with_capacity(to_rows_len);
    let mut from_rows: Vec<Vec<f64>> = vec![Vec::new(); from_rows_len];
    let mut uniform_rows = Vec::new();

    let mut states = vec![0usize; n];
    let mut joint = vec![0.0; from_card * to_card];
    for _ in 0..to_rows_len {
        // joint[x * to_card + y] = P(to = y | x, v) · P(from = x | w)
        for x in 0..from_card {
            states[from] = x;
            let p_from = net.row_for(from, &states)[x];
            let to_row = net.row_for(to, &states);
            for y in 0..to_card {
                joint[x * to_card + y] = to_row[y] * p_from;
            }
        }
        let marginal: Vec<f64> = (0..to_card)
            .map(|y| (0..from_card).map(|x| joint[x * to_card + y]).sum())
            .collect();

        for (y, &denominator) in marginal.iter().enumerate() {
            states[to] = y;
            let idx = configuration_index(&from_new, &states, card);
            from_rows[idx] = if denominator > 0.0 {
                (0..from_card)
                    .map(|x| joint[x * to_card + y] / denominator)
                    .collect()
            } else {
                uniform_rows.push(idx);
                vec![1.0 / from_card as f64; from_card]
            };
        }
        states[to] = 0;
        to_rows.push(marginal);
        step_odometer(&to_new, &mut states, card);
    }
    uniform_rows.sort_unstable();

    let mut cpts = net.cpts().to_vec();
    cpts[to] = Cpt::new(to_new.clone(), to_rows);
    cpts[from] = Cpt::new(from_new.clone(), from_rows);
    let out = Network::from_parts_unchecked(
        net.name().map(str::to_string),
        net.variables().to_vec(),
        cpts,
    );

    let ids = |v: &[usize]| v.iter().map(|&i| net.id(i).to_string()).collect::<Vec<_>>();
    let step = ReversalStep {
        from: net.id(from).to_string(),
        to: net.id(to).to_string(),
        from_parents_before: ids(&from_parents),
        from_parents_after: ids(&from_new),
        to_parents_before: ids(&to_parents),
        to_parents_after: ids(&to_new),
        uniform_rows,
    };
    Ok((out, step))
}

/// Advances the values of `vars` in `states` as a mixed-radix counter, last
/// variable fastest. Wraps to all zeros after the final configuration.
fn step_odometer(vars: &[usize], states: &mut [usize], card: impl Fn(usize) -> usize) {
    for &v in vars.iter().rev() {
        states[v] += 1;
        if states[v] < card(v) {
            return;
        }
        states[v] = 0;
    }
}

/// True if `to` is reachable from `from` without using the arc `from → to`.
fn has_indirect_path(net: &Network, from: usize, to: usize) -> bool {
    let children = net.children();
    let mut seen = vec![false; net.len()];
    let mut queue: VecDeque<usize> = children[from].iter().copied().filter(|&c| c != to).collect();
    while let Some(v) = queue.pop_front() {
        if v == to {
            return true;
        }
        if std::mem::replace(&mut seen[v], true) {
            continue;
        }
        queue.extend(children[v].iter().copied());
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrationMode {
    /// Reverse until every evidence node has only evidence-node parents.
    Full,
    /// Reverse exactly the arcs from each evidence node's original
    /// state-node parents, once. Parents inherited along the way stay.
    Partial,
}

impl IntegrationMode {
    pub fn label(self) -> &'static str {
        match self {
            IntegrationMode::Full => "full",
            IntegrationMode::Partial => "partial",
        }
    }
}

impl std::str::FromStr for IntegrationMode {
    type Err = BnError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(IntegrationMode::Full),
            "partial" => Ok(IntegrationMode::Partial),
            other => Err(BnError::Parse(format!("unknown integration mode `{other}`"))),
        }
    }
}

/// Integrates `evidence` into `net` by arc reversal.
///
/// Evidence nodes are handled in topological order of the input. For each,
/// the candidate parents are tried latest in the current topological order
/// first; the next candidate is tried only if that reversal would close a
/// cycle. Full mode keeps going while the evidence node has any state-node
/// parent; partial mode reverses each original state-node parent once.
pub fn integrate_evidence(
    net: &Network,
    evidence: &Evidence,
    mode: IntegrationMode,
) -> Result<(Network, ReversalPlan)> {
    if evidence.is_empty() {
        return Err(BnError::Precondition("evidential integration needs evidence".into()));
    }
    evidence.assignment().check(net)?;
    let order = topological_order(net)?;
    let evidence_nodes: Vec<usize> = order.iter().copied().filter(|&v| evidence.is_observed(v)).collect();

    let arcs: usize = net.cpts().iter().map(|c| c.parents.len()).sum();
    let step_bound = net.len() * arcs.max(1);

    let mut current = net.clone();
    let mut plan = ReversalPlan::default();
    for e in evidence_nodes {
        let state_parents =
            |g: &Network| -> Vec<usize> { g.parents(e).iter().copied().filter(|&p| !evidence.is_observed(p)).collect() };
        let mut remaining = state_parents(&current);
        while !remaining.is_empty() {
            let position = topo_positions(&current)?;
            remaining.sort_by_key(|&p| std::cmp::Reverse(position[p]));
            let mut blocked = None;
            let mut reversed = None;
            for (slot, &parent) in remaining.iter().enumerate() {
                match reverse_arc_recorded(&current, parent, e) {
                    Ok(done) => {
                        reversed = Some((slot, done));
                        break;
                    }
                    Err(BnError::Cycle(reason)) => blocked = blocked.or(Some(reason)),
                    Err(other) => return Err(other),
                }
            }
            let Some((slot, (next, step))) = reversed else {
                return Err(BnError::Integration {
                    node: net.id(e).to_string(),
                    reason: blocked.unwrap_or_default(),
                });
            };
            remaining.remove(slot);
            current = next;
            plan.steps.push(step);
            if plan.len() > step_bound {
                return Err(BnError::Integration {
                    node: net.id(e).to_string(),
                    reason: format!("exceeded {step_bound} reversals"),
                });
            }
            if mode == IntegrationMode::Full {
                remaining = state_parents(&current);
            }
        }
    }
    Ok((current, plan))
}

fn topo_positions(net: &Network) -> Result<Vec<usize>> {
    let order = topological_order(net)?;
    let mut position = vec![0; net.len()];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    Ok(position)
}

/// A network over the state nodes of a fully integrated network, sliced at
/// the observed values.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionedNetwork {
    pub network: Network,
    /// `kept[i]` is the index in the source network of conditioned node `i`.
    pub kept: Vec<usize>,
    /// Product of the removed evidence factors, i.e. P(E).
    pub evidence_probability: f64,
}

/// Removes the evidence nodes of a network in which no evidence node has a
/// state-node parent. The result's joint is P(states | E).
pub fn condition_network(net: &Network, evidence: &Evidence) -> Result<ConditionedNetwork> {
    evidence.assignment().check(net)?;
    let n = net.len();
    let mut states = vec![0usize; n];
    for (node, value) in evidence.iter() {
        if let Some(&p) = net.parents(node).iter().find(|&&p| !evidence.is_observed(p)) {
            return Err(BnError::Precondition(format!(
                "evidence node `{}` still has state-node parent `{}`",
                net.id(node),
                net.id(p)
            )));
        }
        states[node] = value;
    }

    let evidence_probability: f64 = evidence
        .iter()
        .map(|(node, value)| net.row_for(node, &states)[value])
        .product();
    if evidence_probability <= 0.0 {
        return Err(BnError::ImpossibleEvidence(
            "observed configuration has probability zero".into(),
        ));
    }

    let kept: Vec<usize> = (0..n).filter(|&v| !evidence.is_observed(v)).collect();
    let mut new_index = vec![usize::MAX; n];
    for (i, &v) in kept.iter().enumerate() {
        new_index[v] = i;
    }

    let card = |v: usize| net.cardinality(v);
    let mut cpts = Vec::with_capacity(kept.len());
    for &v in &kept {
        let free_parents: Vec<usize> = net
            .parents(v)
            .iter()
            .copied()
            .filter(|&p| !evidence.is_observed(p))
            .collect();
        let rows_len: usize = free_parents.iter().map(|&p| card(p)).product();
        let mut rows = Vec::with_capacity(rows_len);
        for &p in &free_parents {
            states[p] = 0;
        }
        for _ in 0..rows_len {
            rows.push(net.row_for(v, &states).to_vec());
            step_odometer(&free_parents, &mut states, card);
        }
        cpts.push(Cpt::new(
            free_parents.iter().map(|&p| new_index[p]).collect(),
            rows,
        ));
    }
    let variables = kept.iter().map(|&v| net.variable(v).clone()).collect();
    let network = Network::new(net.name().map(str::to_string), variables, cpts)?;
    Ok(ConditionedNetwork {
        network,
        kept,
        evidence_probability,
    })
}
