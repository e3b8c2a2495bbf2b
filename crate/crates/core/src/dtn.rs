//! Epidemic store-carry-forward networking over users and UAVs.
//!
//! Time advances in whole-second ticks. Within a tick, every pair of nodes in
//! range exchanges the messages the other lacks, oldest first, sharing one
//! per-pair byte budget. Only messages held at the start of the tick are
//! forwarded, so a message crosses at most one hop per tick. Transfers that
//! do not fit into the budget continue on the next tick while the contact
//! lasts and are dropped when it breaks.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::geometry::Point2;

pub type MessageId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub id: MessageId,
    pub source: usize,
    pub destination: usize,
    pub created_at: u64,
    pub size: u64,
    pub ttl: u64,
    pub delivered_at: Option<u64>,
}

impl Message {
    pub fn ttd(&self) -> Option<u64> {
        self.delivered_at.map(|d| d - self.created_at)
    }

    fn expired(&self, now: u64) -> bool {
        now.saturating_sub(self.created_at) > self.ttl
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtnParams {
    pub range: f64,
    /// bytes per second per contact
    pub speed: u64,
    pub buffer: u64,
    pub msg_size: u64,
    pub ttl: u64,
}

impl DtnParams {
    pub fn from_config(c: &ScenarioConfig) -> Self {
        Self { range: c.dtn_range, speed: c.dtn_speed, buffer: c.dtn_buffer, msg_size: c.dtn_msg_size, ttl: c.dtn_ttl }
    }
}

/// Messages held by one node, sorted by id (equivalently by creation time).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodeBuffer {
    held: Vec<MessageId>,
    used_bytes: u64,
    /// bumped on every change
    version: u64,
}

impl NodeBuffer {
    pub fn held(&self) -> &[MessageId] {
        &self.held
    }

    pub fn used_bytes(&self) -> u64 {
        self.used_bytes
    }

    pub fn contains(&self, id: MessageId) -> bool {
        self.held.binary_search(&id).is_ok()
    }

    fn insert(&mut self, id: MessageId, size: u64) -> bool {
        match self.held.binary_search(&id) {
            Ok(_) => false,
            Err(pos) => {
                self.held.insert(pos, id);
                self.used_bytes += size;
                self.version += 1;
                true
            }
        }
    }

    fn pop_oldest(&mut self, messages: &[Message]) -> Option<MessageId> {
        if self.held.is_empty() {
            return None;
        }
        let id = self.held.remove(0);
        self.used_bytes -= messages[id as usize].size;
        self.version += 1;
        Some(id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Transfer {
    msg: MessageId,
    from: usize,
    to: usize,
    bytes_remaining: u64,
}

#[derive(Debug, Clone, Default)]
struct PairState {
    active: Option<Transfer>,
    /// buffer versions at the end of the last complete exchange
    synced: Option<(u64, u64)>,
}

/// Buffers for users `0..n_users` followed by UAVs, plus the message ledger.
#[derive(Debug, Clone)]
pub struct DtnWorld {
    params: DtnParams,
    n_users: usize,
    buffers: Vec<NodeBuffer>,
    messages: Vec<Message>,
    pairs: HashMap<(usize, usize), PairState>,
    /// messages with smaller ids are expired everywhere
    expired_upto: usize,
}

impl DtnWorld {
    pub fn new(params: DtnParams, n_users: usize, n_uavs: usize) -> Self {
        Self {
            params,
            n_users,
            buffers: vec![NodeBuffer::default(); n_users + n_uavs],
            messages: Vec::new(),
            pairs: HashMap::new(),
            expired_upto: 0,
        }
    }

    pub fn params(&self) -> &DtnParams {
        &self.params
    }

    pub fn n_nodes(&self) -> usize {
        self.buffers.len()
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn buffer(&self, node: usize) -> &NodeBuffer {
        &self.buffers[node]
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn created(&self) -> usize {
        self.messages.len()
    }

    pub fn delivered(&self) -> usize {
        self.messages.iter().filter(|m| m.delivered_at.is_some()).count()
    }

    /// Create a message from `source` to `destination` at time `now`.
    pub fn inject(&mut self, source: usize, destination: usize, now: u64) -> MessageId {
        assert!(source < self.n_users && destination < self.n_users && source != destination);
        let id = self.messages.len() as MessageId;
        self.messages.push(Message {
            id,
            source,
            destination,
            created_at: now,
            size: self.params.msg_size,
            ttl: self.params.ttl,
            delivered_at: None,
        });
        self.store(source, id);
        id
    }

    /// Create one message between two distinct uniformly drawn users.
    pub fn spawn_message<R: Rng + ?Sized>(&mut self, now: u64, rng: &mut R) -> MessageId {
        let m = self.n_users;
        let source = rng.random_range(0..m);
        let mut destination = rng.random_range(0..m - 1);
        if destination >= source {
            destination += 1;
        }
        self.inject(source, destination, now)
    }

    /// Put a message into a buffer, evicting the oldest held messages to make
    /// room. The incoming message is refused instead when it is older than
    /// everything it would displace.
    fn store(&mut self, node: usize, id: MessageId) -> bool {
        let size = self.messages[id as usize].size;
        if size > self.params.buffer {
            return false;
        }
        let buf = &mut self.buffers[node];
        if buf.contains(id) {
            return false;
        }
        while buf.used_bytes + size > self.params.buffer {
            match buf.held.first() {
                Some(&oldest) if oldest < id => {
                    buf.pop_oldest(&self.messages);
                }
                _ => return false,
            }
        }
        buf.insert(id, size)
    }

    fn receive(&mut self, node: usize, id: MessageId, at: u64) {
        let msg = &mut self.messages[id as usize];
        if msg.destination == node && msg.delivered_at.is_none() {
            msg.delivered_at = Some(at);
        }
        self.store(node, id);
    }

    /// Drop messages older than their TTL from every buffer.
    pub fn expire(&mut self, now: u64) {
        let mut upto = self.expired_upto;
        while upto < self.messages.len() && self.messages[upto].expired(now) {
            upto += 1;
        }
        if upto == self.expired_upto {
            return;
        }
        self.expired_upto = upto;
        let limit = upto as MessageId;
        for buf in &mut self.buffers {
            let k = buf.held.partition_point(|&id| id < limit);
            if k > 0 {
                let freed: u64 = buf.held[..k].iter().map(|&id| self.messages[id as usize].size).sum();
                buf.held.drain(..k);
                buf.used_bytes -= freed;
                buf.version += 1;
            }
        }
        for state in self.pairs.values_mut() {
            if state.active.is_some_and(|t| t.msg < limit) {
                state.active = None;
            }
        }
    }

    /// Advance one tick of length `dt` starting at `now`, with every node at
    /// `positions[node]`. Receptions are stamped with the tick end.
    pub fn step(&mut self, positions: &[Point2<f64>], now: u64, dt: u64) {
        assert_eq!(positions.len(), self.buffers.len(), "one position per node");
        self.expire(now);
        let contacts = contacts(positions, self.params.range);

        // contact lost: abort and forget
        let live: std::collections::HashSet<(usize, usize)> = contacts.iter().copied().collect();
        self.pairs.retain(|k, _| live.contains(k));

        let budget_per_pair = self.params.speed.saturating_mul(dt);
        let at = now + dt;
        let mut arrivals: Vec<(usize, MessageId)> = Vec::new();

        for &(a, b) in &contacts {
            let mut state = self.pairs.remove(&(a, b)).unwrap_or_default();
            let mut budget = budget_per_pair;

            if let Some(mut t) = state.active.take() {
                if self.buffers[t.from].contains(t.msg) {
                    if t.bytes_remaining <= budget {
                        budget -= t.bytes_remaining;
                        arrivals.push((t.to, t.msg));
                    } else {
                        t.bytes_remaining -= budget;
                        budget = 0;
                        state.active = Some(t);
                    }
                }
            }

            let versions = (self.buffers[a].version, self.buffers[b].version);
            if state.active.is_none() && state.synced != Some(versions) {
                let mut complete = true;
                for (msg, from, to) in missing_pairs(&self.buffers[a].held, &self.buffers[b].held, a, b) {
                    let size = self.messages[msg as usize].size;
                    if size <= budget {
                        budget -= size;
                        arrivals.push((to, msg));
                    } else {
                        state.active = Some(Transfer { msg, from, to, bytes_remaining: size - budget });
                        complete = false;
                        break;
                    }
                }
                state.synced = complete.then_some(versions);
            }
            self.pairs.insert((a, b), state);
        }

        for (node, msg) in arrivals {
            self.receive(node, msg, at);
        }
    }

    /// Share every message among the members of each group, ignoring
    /// bandwidth and buffer limits. Deliveries are stamped `at`.
    pub fn idealized_cluster_sync(&mut self, groups: &[Vec<usize>], at: u64) {
        let limit = self.expired_upto as MessageId;
        for group in groups {
            let mut union: Vec<MessageId> = group.iter().flat_map(|&n| self.buffers[n].held.iter().copied()).filter(|&id| id >= limit).collect();
            union.sort_unstable();
            union.dedup();
            for &node in group {
                for &id in &union {
                    let msg = &mut self.messages[id as usize];
                    if msg.destination == node && msg.delivered_at.is_none() {
                        msg.delivered_at = Some(at);
                    }
                }
                let buf = &mut self.buffers[node];
                if buf.held != union {
                    buf.held.clone_from(&union);
                    buf.used_bytes = union.iter().map(|&id| self.messages[id as usize].size).sum();
                    buf.version += 1;
                }
            }
        }
    }
}

/// Messages held by exactly one side, ascending by id, as `(msg, from, to)`.
fn missing_pairs(a: &[MessageId], b: &[MessageId], na: usize, nb: usize) -> Vec<(MessageId, usize, usize)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
            }
            (Some(&x), Some(&y)) if x < y => {
                out.push((x, na, nb));
                i += 1;
            }
            (Some(&x), None) => {
                out.push((x, na, nb));
                i += 1;
            }
            (_, Some(&y)) => {
                out.push((y, nb, na));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// All node pairs `(a, b)`, `a < b`, within `range`, in ascending order.
pub fn contacts(positions: &[Point2<f64>], range: f64) -> Vec<(usize, usize)> {
    let cell = range.max(1e-9);
    let key = |p: &Point2<f64>| ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in positions.iter().enumerate() {
        grid.entry(key(p)).or_default().push(i);
    }
    let mut out = Vec::new();
    for (i, p) in positions.iter().enumerate() {
        let (cx, cy) = key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = grid.get(&(cx + dx, cy + dy)) {
                    for &j in bucket {
                        if j > i && p.distance(&positions[j]) <= range {
                            out.push((i, j));
                        }
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out
}
