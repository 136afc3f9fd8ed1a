//! Random operation sequences run against the pool and a sorted list.

use qrapnc::depq::{Counters, DepqPool, EntryId, Tag};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TAGS: [Tag; 4] = [Tag::InitialLower, Tag::InitialUpper, Tag::MultiplierLower, Tag::MultiplierUpper];

/// Ascending by `(value, id)`.
#[derive(Default)]
struct SortedList {
    items: Vec<(f64, usize, Tag, usize)>,
}

impl SortedList {
    fn position(&self, value: f64, id: usize) -> Result<usize, usize> {
        self.items.binary_search_by(|e| e.0.total_cmp(&value).then(e.1.cmp(&id)))
    }

    fn insert(&mut self, item: (f64, usize, Tag, usize)) {
        let at = self.position(item.0, item.1).unwrap_err();
        self.items.insert(at, item);
    }
}

/// Returns the pool's counters after `ops` operations, or the first
/// divergence.
pub fn run(ops: usize, seed: u64) -> Result<Counters, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = DepqPool::new();
    let mut model = SortedList::default();
    let mut ids: Vec<EntryId> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for step in 0..ops {
        let fail = |what: &str| format!("step {step}: {what}");
        let observed = |e: Option<qrapnc::depq::Entry>| e.map(|e| (e.value, e.id.index(), e.tag, e.owner));
        match rng.gen_range(0..100) {
            0..=39 => {
                let value = if rng.gen_bool(0.5) { f64::from(rng.gen_range(0..40)) } else { rng.gen_range(-1e3..1e3) };
                let (tag, owner) = (TAGS[rng.gen_range(0..4)], rng.gen_range(0..1000));
                let id = pool.insert(value, tag, owner);
                if id.index() != ids.len() {
                    return Err(fail("ids are not sequential"));
                }
                ids.push(id);
                values.push(value);
                model.insert((value, id.index(), tag, owner));
            }
            40..=51 => {
                if observed(pool.pop_min()) != (!model.items.is_empty()).then(|| model.items.remove(0)) {
                    return Err(fail("pop_min"));
                }
            }
            52..=63 => {
                if observed(pool.pop_max()) != model.items.pop() {
                    return Err(fail("pop_max"));
                }
            }
            64..=71 => {
                if observed(pool.peek_min()) != model.items.first().copied() {
                    return Err(fail("peek_min"));
                }
            }
            72..=79 => {
                if observed(pool.peek_max()) != model.items.last().copied() {
                    return Err(fail("peek_max"));
                }
            }
            80..=93 => {
                if ids.is_empty() {
                    continue;
                }
                let k = rng.gen_range(0..ids.len());
                let expected = model.position(values[k], k).ok().map(|at| model.items.remove(at));
                match (pool.remove(ids[k]), expected) {
                    (Ok(e), Some(m)) if (e.value, e.id.index(), e.tag, e.owner) == m => {}
                    (Err(_), None) => {}
                    _ => return Err(fail("remove")),
                }
            }
            _ => {
                if ids.is_empty() {
                    continue;
                }
                let k = rng.gen_range(0..ids.len());
                let owner = rng.gen_range(0..1000);
                let live = model.position(values[k], k).ok();
                match (pool.set_owner(ids[k], owner), live) {
                    (Ok(()), Some(at)) => model.items[at].3 = owner,
                    (Err(_), None) => {}
                    _ => return Err(fail("set_owner")),
                }
            }
        }
        if pool.len() != model.items.len() {
            return Err(fail("len"));
        }
    }
    Ok(pool.counters())
}
