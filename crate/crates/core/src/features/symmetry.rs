//! Bin merging under sign flip and sequence reversal.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::cooc::{quad_from_index, quad_index, CoocHistogram, BINS};

pub const SPAM_ORBITS: usize = 169;
pub const MINMAX_ORBITS: usize = 325;

fn negate(q: [i8; 4]) -> [i8; 4] {
    q.map(|d| -d)
}

fn reverse(q: [i8; 4]) -> [i8; 4] {
    [q[3], q[2], q[1], q[0]]
}

/// Maps each bin to the position of its orbit; orbits are ordered by their
/// lexicographically smallest member.
fn orbit_table(members: impl Fn([i8; 4]) -> Vec<[i8; 4]>) -> (Vec<usize>, usize) {
    let reps: Vec<usize> = (0..BINS)
        .map(|i| {
            members(quad_from_index(i))
                .into_iter()
                .map(quad_index)
                .min()
                .unwrap()
        })
        .collect();
    let mut distinct: Vec<usize> = reps.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let table = reps
        .iter()
        .map(|r| distinct.binary_search(r).unwrap())
        .collect();
    (table, distinct.len())
}

/// Orbit position of every bin under `{id, neg, rev, neg . rev}`.
pub fn spam_orbits() -> &'static [usize] {
    static TABLE: OnceLock<Vec<usize>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let (t, n) = orbit_table(|q| vec![q, negate(q), reverse(q), negate(reverse(q))]);
        assert_eq!(n, SPAM_ORBITS);
        t
    })
}

/// Orbit position of every bin under `{id, rev}`.
pub fn minmax_orbits() -> &'static [usize] {
    static TABLE: OnceLock<Vec<usize>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let (t, n) = orbit_table(|q| vec![q, reverse(q)]);
        assert_eq!(n, MINMAX_ORBITS);
        t
    })
}

fn check_nonempty(h: &CoocHistogram, what: &str) -> Result<()> {
    if h.group_count() == 0 {
        return Err(Error::DegenerateInput(format!("empty {what} histogram")));
    }
    Ok(())
}

fn normalized<T: Real>(sums: &[u64], total: u64) -> Vec<T> {
    let total = T::from_count(total as usize);
    sums.iter()
        .map(|&c| T::from_count(c as usize) / total)
        .collect()
}

/// Folds one histogram into its 169 sign/reversal orbits, normalized to sum 1.
pub fn spam_block<T: Real>(hist: &CoocHistogram) -> Result<Vec<T>> {
    check_nonempty(hist, "spam")?;
    let table = spam_orbits();
    let mut sums = vec![0u64; SPAM_ORBITS];
    for (bin, &c) in hist.counts().iter().enumerate() {
        sums[table[bin]] += c;
    }
    Ok(normalized(&sums, hist.group_count()))
}

/// Horizontal block followed by vertical block, 338 values.
pub fn symmetrize_spam<T: Real>(hist_h: &CoocHistogram, hist_v: &CoocHistogram) -> Result<Vec<T>> {
    let mut out = spam_block(hist_h)?;
    out.extend(spam_block::<T>(hist_v)?);
    Ok(out)
}

/// Merges `min(d)` with `max(-d)`, then `d` with `rev(d)`: 325 values summing to 1.
pub fn symmetrize_minmax<T: Real>(
    hist_min: &CoocHistogram,
    hist_max: &CoocHistogram,
) -> Result<Vec<T>> {
    check_nonempty(hist_min, "min")?;
    check_nonempty(hist_max, "max")?;
    if hist_min.group_count() != hist_max.group_count() {
        return Err(Error::InvalidInput(format!(
            "min/max histograms disagree on group count ({} vs {})",
            hist_min.group_count(),
            hist_max.group_count()
        )));
    }
    let table = minmax_orbits();
    let mut sums = vec![0u64; MINMAX_ORBITS];
    for bin in 0..BINS {
        let neg = quad_index(negate(quad_from_index(bin)));
        sums[table[bin]] += hist_min.counts()[bin] + hist_max.counts()[neg];
    }
    Ok(normalized(
        &sums,
        hist_min.group_count() + hist_max.group_count(),
    ))
}
