//! Counter-based seed derivation.
//!
//! One global seed expands into independent per-task and per-episode rng
//! streams by mixing the seed with a tag path through splitmix64. Streams
//! depend only on their tags, never on sampling order, so parallel schedules
//! cannot change results.

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Derives a child seed from `seed` and a tag path such as
/// `[step, task_index, member]`.
pub fn derive(seed: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix64(seed ^ 0x5bd1e995);
    for &tag in tags {
        state = splitmix64(state ^ splitmix64(tag));
    }
    state
}
