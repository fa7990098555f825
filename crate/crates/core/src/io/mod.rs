//! Interchange formats.
//!
//! Networks are JSON documents:
//!
//! ```json
//! { "name": "example",
//!   "nodes": [
//!     { "id": "A", "states": ["true", "false"], "parents": [], "cpt": [[0.2, 0.8]] },
//!     { "id": "B", "states": ["true", "false"], "parents": ["A"],
//!       "cpt": [[0.8, 0.2], [0.2, 0.8]] } ] }
//! ```
//!
//! `cpt` holds one row per parent configuration, ordered with the
//! last-listed parent varying fastest, and one probability per state in
//! `states` order. Evidence is a flat object of node id → state label.

mod results;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{BnError, Result};
use crate::network::{id_index, topological_order, Assignment, Cpt, Evidence, Network, Variable, Violation};

pub use results::{
    write_compare_csv, write_estimate_csv, write_exact_csv, write_plot_table, RESULT_COLUMNS,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub nodes: Vec<NodeDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDocument {
    pub id: String,
    pub states: Vec<String>,
    #[serde(default)]
    pub parents: Vec<String>,
    pub cpt: Vec<Vec<f64>>,
}

fn syntax_error(e: serde_json::Error) -> BnError {
    BnError::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
}

impl NetworkDocument {
    pub fn into_network(self) -> Result<Network> {
        let index: BTreeMap<&str, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect();
        let mut dangling = Vec::new();
        let mut cpts = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let mut parents = Vec::with_capacity(node.parents.len());
            for p in &node.parents {
                match index.get(p.as_str()) {
                    Some(&i) => parents.push(i),
                    None => dangling.push(Violation::DanglingParent {
                        node: node.id.clone(),
                        parent: p.clone(),
                    }),
                }
            }
            cpts.push(Cpt::new(parents, node.cpt.clone()));
        }
        if !dangling.is_empty() {
            return Err(BnError::Validation(dangling));
        }
        let variables = self
            .nodes
            .into_iter()
            .map(|n| Variable {
                id: n.id,
                states: n.states,
            })
            .collect();
        Network::new(self.name, variables, cpts)
    }

    /// Canonical document: nodes in topological order, everything else in
    /// declared order.
    pub fn from_network(net: &Network) -> Result<Self> {
        let order = topological_order(net)?;
        let nodes = order
            .into_iter()
            .map(|i| NodeDocument {
                id: net.id(i).to_string(),
                states: net.variable(i).states.clone(),
                parents: net.parents(i).iter().map(|&p| net.id(p).to_string()).collect(),
                cpt: net.cpt(i).rows.clone(),
            })
            .collect();
        Ok(Self {
            name: net.name().map(str::to_string),
            nodes,
        })
    }
}

/// Parses and validates a network document.
pub fn parse_network(text: &str) -> Result<Network> {
    let doc: NetworkDocument = serde_json::from_str(text).map_err(syntax_error)?;
    doc.into_network()
}

pub fn serialize_network(net: &Network) -> Result<String> {
    let doc = NetworkDocument::from_network(net)?;
    Ok(serde_json::to_string_pretty(&doc).expect("network documents always serialize"))
}

/// True if both networks declare the same variables (by id, in any order)
/// with identical states, parent lists and CPT rows.
pub fn same_structure(a: &Network, b: &Network) -> bool {
    if a.len() != b.len() || a.name() != b.name() {
        return false;
    }
    let b_index = id_index(b);
    (0..a.len()).all(|i| {
        let Some(&j) = b_index.get(a.id(i)) else {
            return false;
        };
        a.variable(i) == b.variable(j)
            && a.parents(i).len() == b.parents(j).len()
            && a.parents(i)
                .iter()
                .zip(b.parents(j))
                .all(|(&p, &q)| a.id(p) == b.id(q))
            && a.cpt(i).rows == b.cpt(j).rows
    })
}

/// Parses `{"node": "state", ...}` against `net`. Boolean and numeric
/// values are read as their textual labels.
pub fn parse_evidence(text: &str, net: &Network) -> Result<Evidence> {
    let doc: BTreeMap<String, serde_json::Value> = serde_json::from_str(text).map_err(syntax_error)?;
    let mut observed = Assignment::new();
    for (node, value) in doc {
        let label = match value {
            serde_json::Value::String(s) => s,
            serde_json::Value::Bool(b) => b.to_string(),
            serde_json::Value::Number(n) => n.to_string(),
            other => {
                return Err(BnError::Parse(format!(
                    "evidence for `{node}` must be a state label, got {other}"
                )))
            }
        };
        let idx = net.require_index(&node)?;
        let state = net
            .variable(idx)
            .state_index(&label)
            .ok_or_else(|| BnError::UnknownState {
                node: node.clone(),
                state: label.clone(),
            })?;
        observed.insert(idx, state);
    }
    Evidence::new(net, observed)
}

pub fn serialize_evidence(net: &Network, evidence: &Evidence) -> String {
    let doc: BTreeMap<&str, &str> = evidence
        .iter()
        .map(|(node, state)| (net.id(node), net.variable(node).states[state].as_str()))
        .collect();
    serde_json::to_string_pretty(&doc).expect("evidence documents always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cancer_network, CANCER_NETWORK_JSON};
    use crate::transform::reverse_arc;

    #[test]
    fn bundled_cancer_document() {
        let net = parse_network(CANCER_NETWORK_JSON).unwrap();
        assert_eq!(net.len(), 5);
        assert_eq!(net.cpt(3).rows[3], vec![0.05, 0.95]);
    }

    #[test]
    fn empty_node_list_is_valid() {
        let net = parse_network(r#"{"nodes": []}"#).unwrap();
        assert!(net.is_empty());
    }

    #[test]
    fn bad_row_sum_names_node_and_row() {
        let text = r#"{"nodes": [{"id": "X", "states": ["a", "b"], "cpt": [[0.5, 0.4]]}]}"#;
        match parse_network(text) {
            Err(BnError::Validation(v)) => {
                assert!(matches!(&v[..], [Violation::RowSum { node, row: 0, .. }] if node == "X"));
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_location() {
        let err = parse_network("{\n  \"nodes\": [ }").unwrap_err();
        assert!(matches!(&err, BnError::Parse(m) if m.starts_with("line 2")));
    }

    #[test]
    fn unknown_parent_is_a_violation() {
        let text = r#"{"nodes": [{"id": "X", "states": ["a", "b"], "parents": ["Q"], "cpt": [[0.5, 0.5]]}]}"#;
        assert!(matches!(
            parse_network(text),
            Err(BnError::Validation(v)) if matches!(&v[..], [Violation::DanglingParent { .. }])
        ));
    }

    #[test]
    fn round_trips() {
        let net = cancer_network();
        let again = parse_network(&serialize_network(&net).unwrap()).unwrap();
        assert!(same_structure(&net, &again));

        let reversed = reverse_arc(&net, 2, 4).unwrap();
        let again = parse_network(&serialize_network(&reversed).unwrap()).unwrap();
        assert!(same_structure(&reversed, &again));
        // E now precedes C
        assert!(again.index_of("E").unwrap() < again.index_of("C").unwrap());

        let single = parse_network(r#"{"nodes": [{"id": "X", "states": ["a", "b"], "cpt": [[0.25, 0.75]]}]}"#).unwrap();
        let text = serialize_network(&single).unwrap();
        assert!(!text.contains("name"));
        assert!(same_structure(&single, &parse_network(&text).unwrap()));
    }

    #[test]
    fn evidence_documents() {
        let net = cancer_network();
        let ev = parse_evidence(r#"{"E": "true", "D": "false"}"#, &net).unwrap();
        assert_eq!(ev.get(4), Some(0));
        assert_eq!(ev.get(3), Some(1));
        assert_eq!(ev.len(), 2);
        assert!(parse_evidence("{}", &net).unwrap().is_empty());
        assert_eq!(parse_evidence(r#"{"E": true}"#, &net).unwrap().get(4), Some(0));
        assert!(matches!(
            parse_evidence(r#"{"E": "maybe"}"#, &net),
            Err(BnError::UnknownState { node, .. }) if node == "E"
        ));
        assert!(matches!(
            parse_evidence(r#"{"Q": "true"}"#, &net),
            Err(BnError::UnknownNode(_))
        ));
        let text = serialize_evidence(&net, &ev);
        assert_eq!(parse_evidence(&text, &net).unwrap(), ev);
    }
}
