//! Discrete-event engine: integer-nanosecond clock, ordered event queue and
//! named random streams derived from one master seed.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;
use std::ops::{Add, Sub};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Simulation time in integer nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const MAX: SimTime = SimTime(u64::MAX);

    pub const fn from_nanos(ns: u64) -> Self {
        SimTime(ns)
    }

    pub const fn from_micros(us: u64) -> Self {
        SimTime(us * 1_000)
    }

    pub const fn from_millis(ms: u64) -> Self {
        SimTime(ms * 1_000_000)
    }

    pub const fn from_secs(s: u64) -> Self {
        SimTime(s * 1_000_000_000)
    }

    /// Rounds to the nearest nanosecond. Negative or non-finite input is a
    /// programming error.
    pub fn from_secs_f64(s: f64) -> Self {
        assert!(s.is_finite() && s >= 0.0, "invalid time {s} s");
        SimTime((s * 1e9).round() as u64)
    }

    pub const fn as_nanos(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 * 1e-9
    }

    /// Index of the whole simulation second this instant falls in.
    pub const fn second_index(self) -> u64 {
        self.0 / 1_000_000_000
    }

    pub fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.checked_add(rhs.0).expect("simulation time overflow"))
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.checked_sub(rhs.0).expect("negative simulation time"))
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.9}s", self.as_secs_f64())
    }
}

/// A queued event. Ordered by `(fire_time, sequence)`.
#[derive(Debug, Clone)]
pub struct Event<K> {
    pub fire_time: SimTime,
    pub sequence: u64,
    pub kind: K,
}

impl<K> PartialEq for Event<K> {
    fn eq(&self, other: &Self) -> bool {
        self.fire_time == other.fire_time && self.sequence == other.sequence
    }
}

impl<K> Eq for Event<K> {}

impl<K> PartialOrd for Event<K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<K> Ord for Event<K> {
    // Reversed so the std max-heap pops the earliest event first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .fire_time
            .cmp(&self.fire_time)
            .then_with(|| other.sequence.cmp(&self.sequence))
    }
}

/// Clock plus pending-event queue.
///
/// The engine does not own the simulated world; callers pop events with
/// [`Scheduler::next_before`] and dispatch them, or use [`Scheduler::run_until`]
/// with a handler closure.
#[derive(Debug)]
pub struct Scheduler<K> {
    now: SimTime,
    next_sequence: u64,
    queue: BinaryHeap<Event<K>>,
    dispatched: u64,
}

impl<K> Default for Scheduler<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K> Scheduler<K> {
    pub fn new() -> Self {
        Scheduler {
            now: SimTime::ZERO,
            next_sequence: 0,
            queue: BinaryHeap::new(),
            dispatched: 0,
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    pub fn dispatched(&self) -> u64 {
        self.dispatched
    }

    /// Queues `kind` to fire at `at`.
    ///
    /// # Panics
    ///
    /// Scheduling before the current clock is a contract violation and aborts
    /// the run.
    pub fn schedule(&mut self, at: SimTime, kind: K) {
        assert!(
            at >= self.now,
            "event scheduled in the past: {at} < clock {}",
            self.now
        );
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        self.queue.push(Event {
            fire_time: at,
            sequence,
            kind,
        });
    }

    pub fn schedule_in(&mut self, delay: SimTime, kind: K) {
        let at = self.now + delay;
        self.schedule(at, kind);
    }

    /// Pops the next event if it fires at or before `end`, advancing the clock
    /// to its fire time.
    pub fn next_before(&mut self, end: SimTime) -> Option<Event<K>> {
        if self.queue.peek()?.fire_time > end {
            return None;
        }
        let ev = self.queue.pop()?;
        debug_assert!(ev.fire_time >= self.now);
        self.now = ev.fire_time;
        self.dispatched += 1;
        Some(ev)
    }

    /// Moves the clock forward to `end` once no more events are due.
    pub fn advance_to(&mut self, end: SimTime) {
        if end > self.now {
            self.now = end;
        }
    }

    /// Dispatches every event with `fire_time <= end` in order, including
    /// events scheduled by the handler itself, then sets the clock to `end`.
    pub fn run_until<F>(&mut self, end: SimTime, mut handler: F)
    where
        F: FnMut(&mut Self, Event<K>),
    {
        while let Some(ev) = self.next_before(end) {
            handler(self, ev);
        }
        self.advance_to(end);
    }
}

/// Deterministic random stream bound to a name.
pub type RngStream = ChaCha8Rng;

/// Hands out one independent generator per stream name.
///
/// Every stream uses the master seed as its ChaCha key and a 64-bit hash of
/// the name as its stream id, so adding a new consumer never shifts the draws
/// of an existing one.
#[derive(Debug)]
pub struct RngStreams {
    master_seed: u64,
    streams: BTreeMap<String, RngStream>,
}

impl RngStreams {
    pub fn new(master_seed: u64) -> Self {
        RngStreams {
            master_seed,
            streams: BTreeMap::new(),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Returns the stream for `name`, creating it on first use.
    pub fn stream(&mut self, name: &str) -> &mut RngStream {
        let seed = self.master_seed;
        self.streams
            .entry(name.to_owned())
            .or_insert_with(|| derive_stream(seed, name))
    }

    /// A fresh copy of the stream for `name` at its initial state.
    pub fn detached(&self, name: &str) -> RngStream {
        derive_stream(self.master_seed, name)
    }
}

fn derive_stream(master_seed: u64, name: &str) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(fnv1a64(name.as_bytes()));
    rng
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
