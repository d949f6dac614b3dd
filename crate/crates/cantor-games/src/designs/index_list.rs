//! Random index-set lists with extractor-like intersection regularity, and
//! their verifiers.
//!
//! A list holds N subsets of [ell]; every element joins every set
//! independently with probability 1/r. Small intersections of t sets
//! concentrate near ell/r^t, and that regularity is what the block
//! strategies lean on.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

/// A rational tolerance 0 < xi < 1, kept exact.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Xi {
    pub num: u64,
    pub den: u64,
}

impl Xi {
    pub const ONE_EIGHTH: Xi = Xi { num: 1, den: 8 };

    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0 && num < den, "xi must be in (0,1)");
        Xi { num, den }
    }
}

impl fmt::Display for Xi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Xi {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || format!("malformed xi: {s:?}");
        if let Some((n, d)) = s.split_once('/') {
            let num = n.trim().parse().map_err(|_| err())?;
            let den = d.trim().parse().map_err(|_| err())?;
            if den == 0 || num >= den {
                return Err(err());
            }
            Ok(Xi { num, den })
        } else if let Some((int, frac)) = s.split_once('.') {
            // decimal like "0.45"
            if int != "0" || frac.is_empty() || frac.len() > 9 {
                return Err(err());
            }
            let num: u64 = frac.parse().map_err(|_| err())?;
            let den = 10u64.pow(frac.len() as u32);
            if num == 0 {
                return Err(err());
            }
            Ok(Xi { num, den })
        } else {
            Err(err())
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DesignList {
    pub ell: u64,
    pub r: u64,
    pub s: u64,
    pub xi: Xi,
    pub seed: u64,
    /// N sorted index sets over [ell] = {0, .., ell-1}.
    pub sets: Vec<Vec<u64>>,
}

/// First violation found by a design check.
#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum DesignCounterexample {
    #[error("intersection of items {items:?} has {count} elements, outside (1±xi)·ell/r^{t}", t = .items.len())]
    Item1 { items: Vec<usize>, count: u64 },
    #[error("item {item}: a quarter-subset admits {count} qualifying selections, above the bound {bound}")]
    Item2 { item: usize, count: u64, bound: u64 },
}

/// Places every element of [ell] into each of the N sets independently
/// with probability 1/r, from a seeded generator.
pub fn gen_index_list(ell: u64, r: u64, n_sets: u64, xi: Xi, s: u64, seed: u64) -> DesignList {
    assert!(r >= 1, "r must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sets = Vec::with_capacity(n_sets as usize);
    for _ in 0..n_sets {
        let mut set = Vec::new();
        for i in 0..ell {
            if rng.gen_range(0..r) == 0 {
                set.push(i);
            }
        }
        sets.push(set);
    }
    DesignList { ell, r, s, xi, seed, sets }
}

/// The smallest power of two >= e * r^3 * log2(N) (pairwise lists) or
/// >= e * s * r^(s+1) * log2(N) (set lists).
pub fn design_length(e: u64, r: u64, n_sets: u64, s: u64) -> u64 {
    let log = 64 - u64::leading_zeros(n_sets.max(2) - 1) as u64; // ceil(log2 N)
    let base = if s <= 2 {
        e * r.pow(3) * log
    } else {
        e * s * r.pow(s as u32 + 1) * log
    };
    base.next_power_of_two()
}

fn bitset(ell: u64, set: &[u64]) -> Vec<u64> {
    let words = (ell as usize + 63) / 64;
    let mut bits = vec![0u64; words];
    for &i in set {
        bits[(i / 64) as usize] |= 1 << (i % 64);
    }
    bits
}

fn popcount_and(a: &[u64], b: &[u64]) -> u64 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as u64).sum()
}

/// Exhaustively checks all intersections of up to `depth` distinct items:
/// each must have size within (1 ± xi) · ell / r^t. Subtrees rooted at
/// different first items are independent, so they run in parallel when the
/// `parallel` feature is on; the reported counterexample is the same
/// either way (smallest first item wins).
pub fn verify_item1(d: &DesignList, depth: usize) -> Result<(), DesignCounterexample> {
    let bitsets: Vec<Vec<u64>> = d.sets.iter().map(|s| bitset(d.ell, s)).collect();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let results: Vec<_> = (0..d.sets.len())
            .into_par_iter()
            .map(|i| check_item1_subtree(d, &bitsets, i, depth))
            .collect();
        return results.into_iter().collect();
    }
    #[cfg(not(feature = "parallel"))]
    verify_item1_seq_inner(d, &bitsets, depth)
}

/// The sequential path, kept callable for benchmarking against the
/// parallel one.
pub fn verify_item1_seq(d: &DesignList, depth: usize) -> Result<(), DesignCounterexample> {
    let bitsets: Vec<Vec<u64>> = d.sets.iter().map(|s| bitset(d.ell, s)).collect();
    verify_item1_seq_inner(d, &bitsets, depth)
}

fn verify_item1_seq_inner(
    d: &DesignList,
    bitsets: &[Vec<u64>],
    depth: usize,
) -> Result<(), DesignCounterexample> {
    for i in 0..d.sets.len() {
        check_item1_subtree(d, bitsets, i, depth)?;
    }
    Ok(())
}

fn check_item1_subtree(
    d: &DesignList,
    bitsets: &[Vec<u64>],
    root: usize,
    depth: usize,
) -> Result<(), DesignCounterexample> {
    let n = d.sets.len();
    let mut stack: Vec<(Vec<usize>, Vec<u64>)> = vec![(vec![root], bitsets[root].clone())];
    while let Some((items, inter)) = stack.pop() {
        let t = items.len();
        let count = inter.iter().map(|w| w.count_ones() as u64).sum::<u64>();
        // count within [(1-xi)·ell/r^t, (1+xi)·ell/r^t], exactly:
        // den·r^t·count in [ (den-num)·ell, (den+num)·ell ]
        let rt = d.r.pow(t as u32) as u128;
        let lhs = d.xi.den as u128 * rt * count as u128;
        let lo = (d.xi.den - d.xi.num) as u128 * d.ell as u128;
        let hi = (d.xi.den + d.xi.num) as u128 * d.ell as u128;
        if lhs < lo || lhs > hi {
            return Err(DesignCounterexample::Item1 { items, count });
        }
        if t < depth {
            for j in items[t - 1] + 1..n {
                let next: Vec<u64> = inter.iter().zip(&bitsets[j]).map(|(a, b)| a & b).collect();
                let mut it = items.clone();
                it.push(j);
                stack.push((it, next));
            }
        }
    }
    Ok(())
}

/// Exhaustive second-item check, feasible only for tiny lists
/// (ell <= 20, N <= 12). For pair lists (s = 2): for every item I and
/// every I' ⊆ I of size ⌊#I/4⌋, at most b·r items J may satisfy
/// #(I'∩J) >= (1/2 − 3ξ)·#(I∩J). For set lists the qualifying objects are
/// pairwise disjoint (s−1)-selections and the bound is b·s·r^(s−1).
pub fn verify_item2_small(d: &DesignList, b: u64) -> Result<u64, DesignCounterexample> {
    assert!(d.ell <= 20 && d.sets.len() <= 12, "outside the exhaustive regime");
    let s = d.s.max(2) as usize;
    let bound = if s == 2 { b * d.r } else { b * d.s * d.r.pow(s as u32 - 1) };
    let bitsets: Vec<Vec<u64>> = d.sets.iter().map(|set| bitset(d.ell, set)).collect();
    let n = d.sets.len();
    let mut worst = 0u64;
    for i in 0..n {
        let isize = d.sets[i].len();
        let sub_size = if s == 2 { isize / 4 } else { isize / (2 * s) };
        if sub_size == 0 {
            continue;
        }
        for sub in subsets_of_size(&d.sets[i], sub_size) {
            let sub_bits = bitset(d.ell, &sub);
            let count = if s == 2 {
                let mut count = 0u64;
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let ij = popcount_and(&bitsets[i], &bitsets[j]);
                    let sj = popcount_and(&sub_bits, &bitsets[j]);
                    // qualifying: sj >= (1/2 - 3xi)·ij, exactly
                    if 2 * d.xi.den as u128 * sj as u128
                        >= (d.xi.den as i128 - 6 * d.xi.num as i128).max(0) as u128 * ij as u128
                    {
                        count += 1;
                    }
                }
                count
            } else {
                max_disjoint_qualifying(d, &bitsets, i, &sub_bits, s)
            };
            worst = worst.max(count);
            if count > bound {
                return Err(DesignCounterexample::Item2 { item: i, count, bound });
            }
        }
    }
    Ok(worst)
}

fn subsets_of_size(set: &[u64], k: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(set: &[u64], k: usize, start: usize, current: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..set.len() {
            current.push(set[i]);
            rec(set, k, i + 1, current, out);
            current.pop();
        }
    }
    rec(set, k, 0, &mut current, &mut out);
    out
}

/// Maximum number of pairwise disjoint qualifying (s-1)-selections, by
/// exhaustive search over the tiny list.
fn max_disjoint_qualifying(
    d: &DesignList,
    bitsets: &[Vec<u64>],
    i: usize,
    sub_bits: &[u64],
    s: usize,
) -> u64 {
    let n = d.sets.len();
    let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    let mut qualifying: Vec<Vec<usize>> = Vec::new();
    for sel in subsets_of_size(&others.iter().map(|&x| x as u64).collect::<Vec<_>>(), s - 1) {
        let mut inter = bitsets[i].clone();
        for &j in &sel {
            inter.iter_mut().zip(&bitsets[j as usize]).for_each(|(a, b)| *a &= b);
        }
        let full = inter.iter().map(|w| w.count_ones() as u64).sum::<u64>();
        let hit = popcount_and(sub_bits, &inter);
        // qualifying: hit >= ((1-xi)/s)·full, exactly
        if s as u128 * d.xi.den as u128 * hit as u128
            >= (d.xi.den - d.xi.num) as u128 * full as u128
            && full > 0
        {
            qualifying.push(sel.iter().map(|&x| x as usize).collect());
        }
    }
    fn best(qual: &[Vec<usize>], from: usize, used: &mut Vec<usize>) -> u64 {
        let mut max = 0;
        for i in from..qual.len() {
            if qual[i].iter().all(|v| !used.contains(v)) {
                used.extend(&qual[i]);
                max = max.max(1 + best(qual, i + 1, used));
                for _ in &qual[i] {
                    used.pop();
                }
            }
        }
        max
    }
    best(&qualifying, 0, &mut Vec::new())
}

impl DesignList {
    /// Writes the list: header "ell r N s xi seed", then one line of
    /// sorted indices per set.
    pub fn write(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{} {} {} {} {} {}", self.ell, self.r, self.sets.len(), self.s, self.xi, self.seed)?;
        for set in &self.sets {
            let line: Vec<String> = set.iter().map(|i| i.to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read(r: impl BufRead) -> Result<Self, String> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or("empty design file")?
            .map_err(|e| e.to_string())?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(format!("bad design header: {header:?}"));
        }
        let ell: u64 = fields[0].parse().map_err(|_| "bad ell")?;
        let r_param: u64 = fields[1].parse().map_err(|_| "bad r")?;
        let n_sets: usize = fields[2].parse().map_err(|_| "bad N")?;
        let s: u64 = fields[3].parse().map_err(|_| "bad s")?;
        let xi: Xi = fields[4].parse()?;
        let seed: u64 = fields[5].parse().map_err(|_| "bad seed")?;
        let mut sets = Vec::with_capacity(n_sets);
        for line in lines {
            let line = line.map_err(|e| e.to_string())?;
            let set: Result<Vec<u64>, _> = line.split_whitespace().map(str::parse).collect();
            let set = set.map_err(|_| format!("bad index line: {line:?}"))?;
            if set.windows(2).any(|w| w[0] >= w[1]) || set.iter().any(|&i| i >= ell) {
                return Err(format!("indices not sorted or out of range: {line:?}"));
            }
            sets.push(set);
        }
        if sets.len() != n_sets {
            return Err(format!("expected {n_sets} sets, found {}", sets.len()));
        }
        Ok(DesignList { ell, r: r_param, s, xi, seed, sets })
    }
}
