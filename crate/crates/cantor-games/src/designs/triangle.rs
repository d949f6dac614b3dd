//! Brute-force count showing the triangle-style upper bound on the number
//! of strings at bounded distance from 0^n is not tight: the union over
//! all splits k + l = n/2 of the strings differing from 0^n only in the
//! first k and last l positions grows like n·2^(n/2), not 2^(n/2).

use crate::dyadic::Dyadic;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TriangleCount {
    /// Size of the union over all splits.
    pub count: u64,
    /// count / 2^(n/2).
    pub ratio: Dyadic,
    /// Sum over splits of 2^(n/2), counted with multiplicity.
    pub multiset_total: u64,
    /// multiset_total - count: how often strings repeat across splits.
    pub overlap: u64,
}

/// Exhaustive count for even n <= 24. A string y qualifies for the split
/// (k, l) when its ones sit inside the first k and last l positions.
pub fn triangle_counterexample(n: u32) -> TriangleCount {
    assert!(n % 2 == 0 && n >= 2 && n <= 24, "need even n in [2, 24]");
    let half = n / 2;
    // bit i of y is position i, counted from the left
    let allowed: Vec<u64> = (0..=half)
        .map(|k| {
            let l = half - k;
            let first = (1u64 << k) - 1;
            let last = ((1u64 << l) - 1) << (n - l);
            first | last
        })
        .collect();
    let mut count = 0u64;
    for y in 0u64..1 << n {
        if allowed.iter().any(|&mask| y & !mask == 0) {
            count += 1;
        }
    }
    let multiset_total = (half as u64 + 1) << half;
    TriangleCount {
        count,
        ratio: Dyadic::from_ratio(count, half),
        multiset_total,
        overlap: multiset_total - count,
    }
}
