//! Heap of binary-tree nodes that always forms a forest.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

/// Node identifier. Ids start at 1 and are handed out densely in
/// allocation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("node {0} does not exist")]
    NotLive(NodeId),
    #[error("node {child} is already a child of node {parent}")]
    AlreadyAttached { child: NodeId, parent: NodeId },
    #[error("attaching node {child} under node {parent} would create a cycle")]
    Cycle { parent: NodeId, child: NodeId },
}

/// One node in a [`ForestSnapshot`], serialized as
/// `{"id","value","left","right"}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NodeEntry {
    pub id: NodeId,
    pub value: i64,
    pub left: Option<NodeId>,
    pub right: Option<NodeId>,
}

/// Immutable copy of a store at one instant.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ForestSnapshot {
    /// Ascending by id.
    pub nodes: Vec<NodeEntry>,
    /// Ids without a parent, ascending.
    pub roots: Vec<NodeId>,
    pub selected: Option<NodeId>,
}

#[derive(Debug, Clone)]
struct Node {
    value: i64,
    left: Option<NodeId>,
    right: Option<NodeId>,
    parent: Option<NodeId>,
}

/// Mutable node heap. Every node has at most one parent and no node is its
/// own ancestor; nodes are never freed.
#[derive(Debug, Clone, Default)]
pub struct NodeStore {
    nodes: Vec<Node>,
    selected: Option<NodeId>,
    cached: Option<Arc<ForestSnapshot>>,
}

impl NodeStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The id the next [`alloc`](Self::alloc) will return.
    pub fn next_id(&self) -> NodeId {
        NodeId(self.nodes.len() as u64 + 1)
    }

    fn index(&self, id: NodeId) -> Result<usize, TreeError> {
        let idx = id.0.checked_sub(1).ok_or(TreeError::NotLive(id))? as usize;
        if idx < self.nodes.len() {
            Ok(idx)
        } else {
            Err(TreeError::NotLive(id))
        }
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index(id).is_ok()
    }

    fn node(&self, id: NodeId) -> Result<&Node, TreeError> {
        self.index(id).map(|i| &self.nodes[i])
    }

    fn node_mut(&mut self, id: NodeId) -> Result<&mut Node, TreeError> {
        let i = self.index(id)?;
        self.cached = None;
        Ok(&mut self.nodes[i])
    }

    pub fn alloc(&mut self, value: i64) -> NodeId {
        let id = self.next_id();
        self.cached = None;
        self.nodes.push(Node {
            value,
            left: None,
            right: None,
            parent: None,
        });
        id
    }

    pub fn value(&self, id: NodeId) -> Result<i64, TreeError> {
        self.node(id).map(|n| n.value)
    }

    pub fn set_value(&mut self, id: NodeId, value: i64) -> Result<(), TreeError> {
        self.node_mut(id)?.value = value;
        Ok(())
    }

    pub fn child(&self, id: NodeId, side: Side) -> Result<Option<NodeId>, TreeError> {
        let node = self.node(id)?;
        Ok(match side {
            Side::Left => node.left,
            Side::Right => node.right,
        })
    }

    pub fn parent(&self, id: NodeId) -> Result<Option<NodeId>, TreeError> {
        self.node(id).map(|n| n.parent)
    }

    /// Links `child` under `parent` on `side`, detaching whatever occupied
    /// that side before. `None` just detaches.
    ///
    /// Fails with `AlreadyAttached` if `child` already has a parent, and with
    /// `Cycle` if `parent` lies in `child`'s subtree (including
    /// `child == parent`). The store is unchanged on failure.
    pub fn set_child(
        &mut self,
        parent: NodeId,
        side: Side,
        child: Option<NodeId>,
    ) -> Result<(), TreeError> {
        self.index(parent)?;
        if let Some(child) = child {
            if let Some(existing) = self.node(child)?.parent {
                return Err(TreeError::AlreadyAttached {
                    child,
                    parent: existing,
                });
            }
            // `child` is a root here, so `parent` is in its subtree exactly
            // when walking up from `parent` reaches `child`.
            let mut cur = Some(parent);
            while let Some(id) = cur {
                if id == child {
                    return Err(TreeError::Cycle { parent, child });
                }
                cur = self.node(id)?.parent;
            }
        }

        let old = self.child(parent, side)?;
        if let Some(old) = old {
            self.node_mut(old)?.parent = None;
        }
        if let Some(child) = child {
            self.node_mut(child)?.parent = Some(parent);
        }
        let node = self.node_mut(parent)?;
        match side {
            Side::Left => node.left = child,
            Side::Right => node.right = child,
        }
        Ok(())
    }

    pub fn selected(&self) -> Option<NodeId> {
        self.selected
    }

    pub fn select(&mut self, id: Option<NodeId>) -> Result<(), TreeError> {
        if let Some(id) = id {
            self.index(id)?;
        }
        if self.selected != id {
            self.selected = id;
            self.cached = None;
        }
        Ok(())
    }

    /// Point-in-time copy. Consecutive snapshots with no mutation in
    /// between share one allocation.
    pub fn snapshot(&mut self) -> Arc<ForestSnapshot> {
        if let Some(snap) = &self.cached {
            return Arc::clone(snap);
        }
        let mut nodes = Vec::with_capacity(self.nodes.len());
        let mut roots = Vec::new();
        for (i, node) in self.nodes.iter().enumerate() {
            let id = NodeId(i as u64 + 1);
            nodes.push(NodeEntry {
                id,
                value: node.value,
                left: node.left,
                right: node.right,
            });
            if node.parent.is_none() {
                roots.push(id);
            }
        }
        let snap = Arc::new(ForestSnapshot {
            nodes,
            roots,
            selected: self.selected,
        });
        self.cached = Some(Arc::clone(&snap));
        snap
    }

    /// Full scan of the forest invariant. Returns a description of the first
    /// violation found.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (i, node) in self.nodes.iter().enumerate() {
            let id = NodeId(i as u64 + 1);
            for child in [node.left, node.right].into_iter().flatten() {
                let c = self.node(child).map_err(|e| e.to_string())?;
                if c.parent != Some(id) {
                    return Err(format!(
                        "node {child} is a child of {id} but its parent is {:?}",
                        c.parent
                    ));
                }
            }
            if let Some(p) = node.parent {
                let pn = self.node(p).map_err(|e| e.to_string())?;
                if pn.left != Some(id) && pn.right != Some(id) {
                    return Err(format!(
                        "node {id} names parent {p} which does not link back"
                    ));
                }
            }
            if node.left.is_some() && node.left == node.right {
                return Err(format!("node {id} has the same child on both sides"));
            }
            // Walking up must terminate within len steps.
            let mut cur = node.parent;
            let mut steps = 0;
            while let Some(p) = cur {
                steps += 1;
                if p == id || steps > self.nodes.len() {
                    return Err(format!("node {id} is its own ancestor"));
                }
                cur = self.nodes[p.0 as usize - 1].parent;
            }
        }
        if let Some(sel) = self.selected {
            if !self.contains(sel) {
                return Err(format!("selected node {sel} does not exist"));
            }
        }
        Ok(())
    }
}
