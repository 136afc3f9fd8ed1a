//! Double-ended priority queue built from a min-heap and a max-heap that share
//! one entry table. Removal only flips a presence flag; both heaps discard
//! dead ids lazily when they surface at the top.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Where a breakpoint value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    /// `α_k = l_k / a_k` of variable `k`.
    InitialLower,
    /// `β_k = u_k / a_k` of variable `k`.
    InitialUpper,
    /// Collective lower multiplier `κ^k`.
    MultiplierLower,
    /// Collective upper multiplier `λ^k`.
    MultiplierUpper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntryId(u32);

impl EntryId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub id: EntryId,
    pub value: f64,
    pub tag: Tag,
    pub owner: usize,
}

/// Operation counters, cumulative since construction or the last `clear`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub inserts: u64,
    pub pops: u64,
    pub removals: u64,
    pub peeks: u64,
    /// Key comparisons made inside either heap.
    pub comparisons: u64,
}

impl Counters {
    pub fn operations(&self) -> u64 {
        self.inserts + self.pops + self.removals + self.peeks
    }

    pub fn add(&mut self, other: &Counters) {
        self.inserts += other.inserts;
        self.pops += other.pops;
        self.removals += other.removals;
        self.peeks += other.peeks;
        self.comparisons += other.comparisons;
    }
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    value: f64,
    owner: u32,
    tag: Tag,
    live: bool,
}

#[derive(Debug, Clone, Default)]
pub struct DepqPool {
    slots: Vec<Slot>,
    min_heap: Vec<u32>,
    max_heap: Vec<u32>,
    live: usize,
    counters: Counters,
}

#[derive(Clone, Copy)]
enum Side {
    Min,
    Max,
}

impl DepqPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            slots: Vec::with_capacity(capacity),
            min_heap: Vec::with_capacity(capacity),
            max_heap: Vec::with_capacity(capacity),
            live: 0,
            counters: Counters::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    /// Drops every entry and resets the counters; keeps the allocation.
    pub fn clear(&mut self) {
        self.slots.clear();
        self.min_heap.clear();
        self.max_heap.clear();
        self.live = 0;
        self.counters = Counters::default();
    }

    pub fn insert(&mut self, value: f64, tag: Tag, owner: usize) -> EntryId {
        debug_assert!(value.is_finite(), "non-finite breakpoint {value}");
        let id = u32::try_from(self.slots.len()).expect("pool exceeds u32 ids");
        let owner = u32::try_from(owner).expect("owner exceeds u32");
        self.slots.push(Slot { value, owner, tag, live: true });
        self.live += 1;
        self.counters.inserts += 1;
        self.min_heap.push(id);
        self.sift_up(Side::Min, self.min_heap.len() - 1);
        self.max_heap.push(id);
        self.sift_up(Side::Max, self.max_heap.len() - 1);
        EntryId(id)
    }

    pub fn get(&self, id: EntryId) -> Option<Entry> {
        let slot = self.slots.get(id.index())?;
        slot.live.then(|| self.entry(id.0))
    }

    pub fn peek_min(&mut self) -> Option<Entry> {
        self.counters.peeks += 1;
        self.purge(Side::Min).map(|id| self.entry(id))
    }

    pub fn peek_max(&mut self) -> Option<Entry> {
        self.counters.peeks += 1;
        self.purge(Side::Max).map(|id| self.entry(id))
    }

    pub fn pop_min(&mut self) -> Option<Entry> {
        self.pop(Side::Min)
    }

    pub fn pop_max(&mut self) -> Option<Entry> {
        self.pop(Side::Max)
    }

    pub fn remove(&mut self, id: EntryId) -> Result<Entry> {
        let slot =
            self.slots.get_mut(id.index()).ok_or_else(|| Error::internal(format!("unknown depq entry {}", id.0)))?;
        if !slot.live {
            return Err(Error::internal(format!("depq entry {} already removed", id.0)));
        }
        slot.live = false;
        self.live -= 1;
        self.counters.removals += 1;
        self.compact_if_sparse();
        Ok(self.entry(id.0))
    }

    /// Changes the owner of a live entry in place.
    pub fn set_owner(&mut self, id: EntryId, owner: usize) -> Result<()> {
        match self.slots.get_mut(id.index()) {
            Some(slot) if slot.live => {
                slot.owner = u32::try_from(owner).expect("owner exceeds u32");
                Ok(())
            }
            _ => Err(Error::internal(format!("set_owner on dead depq entry {}", id.0))),
        }
    }

    fn entry(&self, id: u32) -> Entry {
        let s = &self.slots[id as usize];
        Entry { id: EntryId(id), value: s.value, tag: s.tag, owner: s.owner as usize }
    }

    fn pop(&mut self, side: Side) -> Option<Entry> {
        let id = self.purge(side)?;
        let entry = self.entry(id);
        self.take_top(side);
        self.slots[id as usize].live = false;
        self.live -= 1;
        self.counters.pops += 1;
        self.compact_if_sparse();
        Some(entry)
    }

    /// Rebuilds a heap once dead ids outnumber live ones, so heap depth
    /// tracks the live size rather than the insert history.
    fn compact_if_sparse(&mut self) {
        for side in [Side::Min, Side::Max] {
            if self.heap(side).len() > 2 * self.live + 32 {
                let slots = &self.slots;
                let heap = match side {
                    Side::Min => &mut self.min_heap,
                    Side::Max => &mut self.max_heap,
                };
                heap.retain(|&id| slots[id as usize].live);
                let len = self.heap(side).len();
                for pos in (0..len / 2).rev() {
                    self.sift_down(side, pos);
                }
            }
        }
    }

    /// Discards dead ids from the top of one heap and returns the live top.
    fn purge(&mut self, side: Side) -> Option<u32> {
        loop {
            let &top = self.heap(side).first()?;
            if self.slots[top as usize].live {
                return Some(top);
            }
            self.take_top(side);
        }
    }

    fn take_top(&mut self, side: Side) {
        let heap = self.heap_mut(side);
        let last = heap.len() - 1;
        heap.swap(0, last);
        heap.pop();
        if !self.heap(side).is_empty() {
            self.sift_down(side, 0);
        }
    }

    fn heap(&self, side: Side) -> &Vec<u32> {
        match side {
            Side::Min => &self.min_heap,
            Side::Max => &self.max_heap,
        }
    }

    fn heap_mut(&mut self, side: Side) -> &mut Vec<u32> {
        match side {
            Side::Min => &mut self.min_heap,
            Side::Max => &mut self.max_heap,
        }
    }

    /// True when `x` belongs above `y` in the heap for `side`.
    fn before(&mut self, side: Side, x: u32, y: u32) -> bool {
        self.counters.comparisons += 1;
        let ord = self.slots[x as usize].value.total_cmp(&self.slots[y as usize].value).then(x.cmp(&y));
        match side {
            Side::Min => ord == Ordering::Less,
            Side::Max => ord == Ordering::Greater,
        }
    }

    fn sift_up(&mut self, side: Side, mut pos: usize) {
        while pos > 0 {
            let parent = (pos - 1) / 2;
            let (x, y) = (self.heap(side)[pos], self.heap(side)[parent]);
            if !self.before(side, x, y) {
                break;
            }
            self.heap_mut(side).swap(pos, parent);
            pos = parent;
        }
    }

    fn sift_down(&mut self, side: Side, mut pos: usize) {
        let len = self.heap(side).len();
        loop {
            let left = 2 * pos + 1;
            if left >= len {
                break;
            }
            let mut child = left;
            if left + 1 < len {
                let (l, r) = (self.heap(side)[left], self.heap(side)[left + 1]);
                if self.before(side, r, l) {
                    child = left + 1;
                }
            }
            let (c, p) = (self.heap(side)[child], self.heap(side)[pos]);
            if !self.before(side, c, p) {
                break;
            }
            self.heap_mut(side).swap(pos, child);
            pos = child;
        }
    }
}
