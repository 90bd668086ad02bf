//! One-sided push message selection and the delivery rule.
//!
//! Selection reads only the sender's own state and the slot parity; nothing
//! about the receiver flows in.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::Protocol;
use crate::model::{MessageId, NodeState};

/// Slot parity with 1-indexed slots: slot 1 is odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of_slot(slot: u64) -> Self {
        if slot % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

/// RANDOM PUSH: a uniform draw over everything the node holds.
pub fn select_random_push<R: Rng + ?Sized>(node: &NodeState, rng: &mut R) -> Option<MessageId> {
    let msgs = node.msgs();
    if msgs.is_empty() {
        None
    } else {
        Some(msgs[rng.gen_range(0..msgs.len())])
    }
}

/// MOBILE PUSH: odd slots push the node's own message when it has one; even
/// slots draw uniformly over received messages, falling back to the own
/// message when nothing else is held.
pub fn select_mobile_push<R: Rng + ?Sized>(
    node: &NodeState,
    parity: Parity,
    rng: &mut R,
) -> Option<MessageId> {
    let msgs = node.msgs();
    match (parity, node.own_slot()) {
        (Parity::Odd, Some(own)) => Some(msgs[own]),
        (_, None) => select_random_push(node, rng),
        (Parity::Even, Some(own)) => {
            if msgs.len() == 1 {
                return Some(msgs[own]);
            }
            // Uniform over the len-1 received messages: the own slot is
            // swapped for the last position.
            let mut idx = rng.gen_range(0..msgs.len() - 1);
            if idx == own {
                idx = msgs.len() - 1;
            }
            Some(msgs[idx])
        }
    }
}

pub fn select<R: Rng + ?Sized>(
    protocol: Protocol,
    node: &NodeState,
    parity: Parity,
    rng: &mut R,
) -> Option<MessageId> {
    match protocol {
        Protocol::RandomPush => select_random_push(node, rng),
        Protocol::MobilePush => select_mobile_push(node, parity, rng),
    }
}

/// Adds `msg` to the receiver. Returns `true` when it was new; a `false`
/// return is a wasted transmission.
pub fn deliver(receiver: &mut NodeState, msg: MessageId) -> bool {
    receiver.insert(msg)
}
