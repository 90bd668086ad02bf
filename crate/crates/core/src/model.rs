//! Node and message state shared by the mobility, PHY, protocol and engine
//! layers.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

/// Message identity. Message `i` originates at source node `i`, so the
/// index doubles as the source id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MessageId(pub u32);

impl MessageId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn source(self) -> usize {
        self.0 as usize
    }
}

/// Subsquare coordinates `(row, col)`; row indexes y, col indexes x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: u32,
    pub col: u32,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Self {
        Cell {
            row: row as u32,
            col: col as u32,
        }
    }

    pub fn index(self, side: usize) -> usize {
        self.row as usize * side + self.col as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn dist2(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(self, other: Point) -> f64 {
        self.dist2(other).sqrt()
    }
}

/// One node: where it is, what it originated and what it holds.
///
/// Possessed messages are kept both as an insertion-ordered list (for
/// uniform selection) and as a bit set (for membership). The list only grows.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub id: usize,
    pub cell: Cell,
    pub pos: Point,
    own_msg: Option<MessageId>,
    own_slot: usize,
    held: Vec<MessageId>,
    present: FixedBitSet,
}

impl NodeState {
    pub fn new(id: usize, k: usize, cell: Cell, pos: Point) -> Self {
        NodeState {
            id,
            cell,
            pos,
            own_msg: None,
            own_slot: 0,
            held: Vec::new(),
            present: FixedBitSet::with_capacity(k),
        }
    }

    pub fn own_msg(&self) -> Option<MessageId> {
        self.own_msg
    }

    /// Position of the own message inside [`NodeState::msgs`], if any.
    pub(crate) fn own_slot(&self) -> Option<usize> {
        self.own_msg.map(|_| self.own_slot)
    }

    /// Makes this node the source of `msg`; the node then holds it.
    pub fn make_source(&mut self, msg: MessageId) {
        self.insert(msg);
        self.own_slot = self
            .held
            .iter()
            .position(|&m| m == msg)
            .expect("inserted above");
        self.own_msg = Some(msg);
    }

    /// Messages in arrival order.
    pub fn msgs(&self) -> &[MessageId] {
        &self.held
    }

    pub fn len(&self) -> usize {
        self.held.len()
    }

    pub fn is_empty(&self) -> bool {
        self.held.is_empty()
    }

    pub fn has(&self, msg: MessageId) -> bool {
        self.present.contains(msg.index())
    }

    /// Adds `msg`; returns `false` when it was already held.
    pub fn insert(&mut self, msg: MessageId) -> bool {
        if msg.index() >= self.present.len() {
            self.present.grow(msg.index() + 1);
        }
        if self.present.put(msg.index()) {
            false
        } else {
            self.held.push(msg);
            true
        }
    }
}
