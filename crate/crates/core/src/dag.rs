//! Explored part of the search space: a leveled DAG in which transposed
//! states share one node (or a plain tree, when transpositions are not
//! collapsed).

use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use crate::domains::Domain;
use crate::error::DagError;

pub type NodeId = usize;

/// Canonical byte encoding of a domain state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateKey(Box<[u8]>);

impl StateKey {
    pub fn new(bytes: impl Into<Box<[u8]>>) -> Self {
        StateKey(bytes.into())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.0.len() * 2);
        for b in self.0.iter() {
            let _ = write!(s, "{b:02x}");
        }
        s
    }
}

impl fmt::Display for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NodeKind {
    Max,
    Min,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Max => "MAX",
            NodeKind::Min => "MIN",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeStatus {
    /// Explored node whose children are not (all) known yet.
    Boundary,
    Interior,
    Terminal,
}

/// Whether transposed states are collapsed into one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    #[default]
    Dag,
    Tree,
}

#[derive(Debug, Clone)]
pub struct Node<S> {
    pub id: NodeId,
    pub key: StateKey,
    pub state: S,
    pub kind: NodeKind,
    pub level: usize,
    pub children: Vec<NodeId>,
    pub parents: Vec<NodeId>,
    pub visits: u64,
    pub status: NodeStatus,
}

#[derive(Debug, Clone)]
pub struct SearchDag<S> {
    nodes: Vec<Node<S>>,
    transposition: HashMap<StateKey, NodeId>,
    root: NodeId,
    representation: Representation,
}

impl<S: Clone> SearchDag<S> {
    /// A DAG holding only the root node (a boundary node at level 0).
    pub fn new(root_state: S, root_key: StateKey, root_kind: NodeKind, representation: Representation) -> Self {
        let mut dag = SearchDag {
            nodes: Vec::new(),
            transposition: HashMap::new(),
            root: 0,
            representation,
        };
        dag.push(root_state, root_key, 0, root_kind);
        dag
    }

    pub fn from_domain<D: Domain<State = S>>(domain: &D, representation: Representation) -> Self {
        let root = domain.root();
        let key = domain.key(&root);
        let mut dag = Self::new(root, key, domain.node_kind(0), representation);
        if domain.is_terminal(&dag.nodes[0].state) {
            dag.nodes[0].status = NodeStatus::Terminal;
        }
        dag
    }

    fn push(&mut self, state: S, key: StateKey, level: usize, kind: NodeKind) -> NodeId {
        let id = self.nodes.len();
        if self.representation == Representation::Dag {
            self.transposition.insert(key.clone(), id);
        }
        self.nodes.push(Node {
            id,
            key,
            state,
            kind,
            level,
            children: Vec::new(),
            parents: Vec::new(),
            visits: 0,
            status: NodeStatus::Boundary,
        });
        id
    }

    /// Returns the node holding `key`, inserting a new boundary node if there
    /// is none. In the tree representation every call inserts.
    pub fn get_or_insert(
        &mut self,
        state: S,
        key: StateKey,
        level: usize,
        kind: NodeKind,
    ) -> Result<(NodeId, bool), DagError> {
        if self.representation == Representation::Dag {
            if let Some(&id) = self.transposition.get(&key) {
                let node = &self.nodes[id];
                if node.level != level || node.kind != kind {
                    return Err(DagError::Inconsistent {
                        key: key.to_hex(),
                        existing_level: node.level,
                        existing_kind: node.kind,
                        level,
                        kind,
                    });
                }
                return Ok((id, false));
            }
        }
        Ok((self.push(state, key, level, kind), true))
    }

    /// Inserts every domain successor of a boundary node and links it.
    /// Successors that are domain terminals are marked terminal on insertion.
    pub fn expand<D: Domain<State = S>>(&mut self, id: NodeId, domain: &D) -> Result<Vec<NodeId>, DagError> {
        let node = self.nodes.get(id).ok_or(DagError::UnknownNode(id))?;
        if node.status != NodeStatus::Boundary || !node.children.is_empty() {
            return Err(DagError::NotBoundary(id));
        }
        let successors = domain.successors(&node.state);
        if successors.is_empty() {
            self.nodes[id].status = NodeStatus::Terminal;
            return Ok(Vec::new());
        }
        let mut ids = Vec::with_capacity(successors.len());
        for child in successors {
            let (cid, _) = self.attach_child(id, child, domain)?;
            ids.push(cid);
        }
        self.nodes[id].status = NodeStatus::Interior;
        Ok(ids)
    }

    /// Links one successor state below `parent` (inserting it if needed)
    /// without changing the parent's status. Used by partial expansion.
    pub fn attach_child<D: Domain<State = S>>(
        &mut self,
        parent: NodeId,
        child: S,
        domain: &D,
    ) -> Result<(NodeId, bool), DagError> {
        let level = self.nodes.get(parent).ok_or(DagError::UnknownNode(parent))?.level + 1;
        let key = domain.key(&child);
        let terminal = domain.is_terminal(&child);
        let (cid, was_new) = self.get_or_insert(child, key, level, domain.node_kind(level))?;
        if was_new && terminal {
            self.nodes[cid].status = NodeStatus::Terminal;
        }
        self.link(parent, cid);
        Ok((cid, was_new))
    }

    /// Adds the edge `parent -> child` unless it already exists.
    pub fn link(&mut self, parent: NodeId, child: NodeId) {
        if !self.nodes[parent].children.contains(&child) {
            self.nodes[parent].children.push(child);
            self.nodes[child].parents.push(parent);
        }
    }

    pub fn set_status(&mut self, id: NodeId, status: NodeStatus) {
        self.nodes[id].status = status;
    }
}

impl<S> SearchDag<S> {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn node(&self, id: NodeId) -> &Node<S> {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node<S>] {
        &self.nodes
    }

    pub fn lookup(&self, key: &StateKey) -> Option<NodeId> {
        self.transposition.get(key).copied()
    }

    pub fn increment_visits(&mut self, id: NodeId) {
        self.nodes[id].visits += 1;
    }

    /// All nodes reachable upward through parent links, excluding `id`.
    pub fn ancestors(&self, id: NodeId) -> BTreeSet<NodeId> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<NodeId> = self.nodes[id].parents.clone();
        while let Some(p) = stack.pop() {
            if seen.insert(p) {
                stack.extend(self.nodes[p].parents.iter().copied());
            }
        }
        seen
    }

    pub fn max_level(&self) -> usize {
        self.nodes.iter().map(|n| n.level).max().unwrap_or(0)
    }

    /// Line-oriented dump: `id key_hex level kind visits status children`.
    pub fn export_text(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            let children: Vec<String> = n.children.iter().map(|c| c.to_string()).collect();
            let status = match n.status {
                NodeStatus::Boundary => "boundary",
                NodeStatus::Interior => "interior",
                NodeStatus::Terminal => "terminal",
            };
            let _ = writeln!(
                out,
                "{} {} {} {} {} {} [{}]",
                n.id,
                n.key.to_hex(),
                n.level,
                n.kind.as_str(),
                n.visits,
                status,
                children.join(",")
            );
        }
        out
    }
}
