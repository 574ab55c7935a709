use crate::Dibit;

/// Where recovered data starts to match the reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyncPoint {
    /// First recovered dibit of the verified region.
    pub index: usize,
    /// Reference position aligned with `index`. For a periodic reference this
    /// is the cyclic rotation of the expected sequence.
    pub rotation: usize,
}

/// Finds the first index where `k_periods` full periods of `expected` (in
/// any cyclic rotation) appear verbatim.
///
/// Returns `None` if `expected` is empty or no such window exists. The
/// returned window is always verified, so a hit is never a false positive
/// by construction (only by coincidence of the data).
pub fn find_sync(dibits: &[Dibit], expected: &[Dibit], k_periods: usize) -> Option<SyncPoint> {
    let period = expected.len();
    if period == 0 {
        return None;
    }
    let span = period * k_periods.max(1);
    if dibits.len() < span {
        return None;
    }
    (0..=dibits.len() - span).find_map(|index| {
        (0..period)
            .filter(|&r| expected[r] == dibits[index])
            .find(|&r| {
                dibits[index..index + span]
                    .iter()
                    .enumerate()
                    .all(|(j, &d)| d == expected[(r + j) % period])
            })
            .map(|rotation| SyncPoint { index, rotation })
    })
}

/// Aligns recovered dibits against a non-periodic transmitted stream.
///
/// The delay `lag` (recovered index minus transmitted index) is chosen in
/// `0..=max_lag` to maximize agreement over the second half of the stream.
/// The sync index is then the first position from which `run` consecutive
/// dibits agree at that lag.
pub fn find_stream_alignment(
    rx: &[Dibit],
    tx: &[Dibit],
    max_lag: usize,
    run: usize,
) -> Option<SyncPoint> {
    let run = run.max(1);
    let start = rx.len() / 2;
    let (lag, hits) = (0..=max_lag)
        .map(|lag| {
            let hits = (start.max(lag)..rx.len())
                .filter(|&i| i - lag < tx.len() && rx[i] == tx[i - lag])
                .count();
            (lag, hits)
        })
        .max_by_key(|&(lag, hits)| (hits, std::cmp::Reverse(lag)))?;
    if hits == 0 {
        return None;
    }
    let end = rx.len().min(tx.len() + lag);
    (lag..end.saturating_sub(run - 1))
        .find(|&i| (i..i + run).all(|j| rx[j] == tx[j - lag]))
        .map(|index| SyncPoint {
            index,
            rotation: index - lag,
        })
}
