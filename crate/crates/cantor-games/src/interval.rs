//! Cantor-space intervals and finite disjoint unions of them.
//!
//! An address `z` names the interval [z]: all infinite bit sequences
//! extending `z`. Interval sets are kept canonical (sibling intervals
//! merged, no address a prefix of another) by construction: the backing
//! store is a binary trie whose leaves are either fully inside or fully
//! outside the set.

use crate::dyadic::Dyadic;
use std::fmt;
use std::str::FromStr;

/// A finite bit string addressing the interval [z]; the empty string is
/// the whole space. [z] has size 2^(-|z|).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CantorAddress {
    bits: Vec<bool>,
}

impl CantorAddress {
    pub fn root() -> Self {
        CantorAddress { bits: Vec::new() }
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        CantorAddress { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn size(&self) -> Dyadic {
        Dyadic::pow2_neg(self.bits.len() as u32)
    }

    pub fn child(&self, bit: bool) -> Self {
        let mut bits = self.bits.clone();
        bits.push(bit);
        CantorAddress { bits }
    }

    pub fn is_prefix_of(&self, other: &CantorAddress) -> bool {
        other.bits.starts_with(&self.bits)
    }

    /// The i-th of 2^depth equal cells, left to right.
    pub fn nth_cell(depth: u32, i: u64) -> Self {
        let bits = (0..depth).rev().map(|b| (i >> b) & 1 == 1).collect();
        CantorAddress { bits }
    }

    /// Index of this address among the cells of its own depth.
    pub fn cell_index(&self) -> u64 {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
    }
}

impl fmt::Display for CantorAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", b as u8)?;
        }
        Ok(())
    }
}

impl fmt::Debug for CantorAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("malformed address: {0:?} (expected a bit string)")]
pub struct ParseAddressError(pub String);

impl FromStr for CantorAddress {
    type Err = ParseAddressError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(ParseAddressError(s.to_string())),
            }
        }
        Ok(CantorAddress { bits })
    }
}

impl serde::Serialize for CantorAddress {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for CantorAddress {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("interval [{address}] overlaps the set")]
pub struct Overlap {
    pub address: CantorAddress,
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Node {
    Empty,
    Full,
    Split(Box<Node>, Box<Node>),
}

impl Node {
    fn split(zero: Node, one: Node) -> Node {
        match (&zero, &one) {
            (Node::Empty, Node::Empty) => Node::Empty,
            (Node::Full, Node::Full) => Node::Full,
            _ => Node::Split(Box::new(zero), Box::new(one)),
        }
    }

    fn union(&self, other: &Node) -> Node {
        match (self, other) {
            (Node::Full, _) | (_, Node::Full) => Node::Full,
            (Node::Empty, x) | (x, Node::Empty) => x.clone(),
            (Node::Split(a0, a1), Node::Split(b0, b1)) => {
                Node::split(a0.union(b0), a1.union(b1))
            }
        }
    }

    fn intersection(&self, other: &Node) -> Node {
        match (self, other) {
            (Node::Empty, _) | (_, Node::Empty) => Node::Empty,
            (Node::Full, x) | (x, Node::Full) => x.clone(),
            (Node::Split(a0, a1), Node::Split(b0, b1)) => {
                Node::split(a0.intersection(b0), a1.intersection(b1))
            }
        }
    }

    fn difference(&self, other: &Node) -> Node {
        match (self, other) {
            (Node::Empty, _) | (_, Node::Full) => Node::Empty,
            (x, Node::Empty) => x.clone(),
            (Node::Full, Node::Split(b0, b1)) => {
                Node::split(Node::Full.difference(b0), Node::Full.difference(b1))
            }
            (Node::Split(a0, a1), Node::Split(b0, b1)) => {
                Node::split(a0.difference(b0), a1.difference(b1))
            }
        }
    }

    fn complement(&self) -> Node {
        match self {
            Node::Empty => Node::Full,
            Node::Full => Node::Empty,
            Node::Split(a, b) => Node::split(a.complement(), b.complement()),
        }
    }

    fn measure(&self, depth: u32) -> Dyadic {
        match self {
            Node::Empty => Dyadic::zero(),
            Node::Full => Dyadic::pow2_neg(depth),
            Node::Split(a, b) => &a.measure(depth + 1) + &b.measure(depth + 1),
        }
    }

    /// Size of the largest interval fully contained in the set.
    fn nu(&self, depth: u32) -> Dyadic {
        match self {
            Node::Empty => Dyadic::zero(),
            Node::Full => Dyadic::pow2_neg(depth),
            Node::Split(a, b) => a.nu(depth + 1).max(b.nu(depth + 1)),
        }
    }

    fn insert_disjoint(&self, bits: &[bool]) -> Result<Node, ()> {
        match self {
            Node::Full => Err(()),
            Node::Empty if bits.is_empty() => Ok(Node::Full),
            Node::Empty => {
                let inner = Node::Empty.insert_disjoint(&bits[1..])?;
                Ok(if bits[0] {
                    Node::split(Node::Empty, inner)
                } else {
                    Node::split(inner, Node::Empty)
                })
            }
            Node::Split(..) if bits.is_empty() => Err(()),
            Node::Split(a, b) => {
                if bits[0] {
                    Ok(Node::split((**a).clone(), b.insert_disjoint(&bits[1..])?))
                } else {
                    Ok(Node::split(a.insert_disjoint(&bits[1..])?, (**b).clone()))
                }
            }
        }
    }

    fn descend(&self, bit: bool) -> &Node {
        match self {
            Node::Split(a, b) => {
                if bit {
                    b
                } else {
                    a
                }
            }
            leaf => leaf,
        }
    }

    /// Round up to granularity 2^(-k): any cell of depth k meeting the set
    /// becomes fully included.
    fn coarsen(&self, k: u32) -> Node {
        match self {
            Node::Empty => Node::Empty,
            Node::Full => Node::Full,
            Node::Split(a, b) => {
                if k == 0 {
                    Node::Full
                } else {
                    Node::split(a.coarsen(k - 1), b.coarsen(k - 1))
                }
            }
        }
    }

    fn collect(&self, prefix: &mut Vec<bool>, out: &mut Vec<CantorAddress>) {
        match self {
            Node::Empty => {}
            Node::Full => out.push(CantorAddress::from_bools(prefix.clone())),
            Node::Split(a, b) => {
                prefix.push(false);
                a.collect(prefix, out);
                prefix.pop();
                prefix.push(true);
                b.collect(prefix, out);
                prefix.pop();
            }
        }
    }

    fn is_subset(&self, other: &Node) -> bool {
        match (self, other) {
            (Node::Empty, _) | (_, Node::Full) => true,
            (_, Node::Empty) => false,
            (Node::Full, Node::Split(..)) => false,
            (Node::Split(a0, a1), Node::Split(b0, b1)) => {
                a0.is_subset(b0) && a1.is_subset(b1)
            }
        }
    }

    /// Carve a leftmost subset of exact measure `want` out of the set.
    /// Returns the carved node; `want` is decremented by what was taken.
    fn carve(&self, depth: u32, want: &mut Dyadic) -> Node {
        if want.is_zero() {
            return Node::Empty;
        }
        match self {
            Node::Empty => Node::Empty,
            Node::Full => {
                let size = Dyadic::pow2_neg(depth);
                if *want >= size {
                    *want = want.checked_sub(&size).unwrap();
                    Node::Full
                } else {
                    let left = Node::Full.carve(depth + 1, want);
                    let right = Node::Full.carve(depth + 1, want);
                    Node::split(left, right)
                }
            }
            Node::Split(a, b) => {
                let left = a.carve(depth + 1, want);
                let right = b.carve(depth + 1, want);
                Node::split(left, right)
            }
        }
    }
}

/// A finite union of pairwise disjoint intervals, canonical at all times.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntervalSet {
    root: Node,
}

impl Default for IntervalSet {
    fn default() -> Self {
        Self::empty()
    }
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { root: Node::Empty }
    }

    pub fn full() -> Self {
        IntervalSet { root: Node::Full }
    }

    pub fn from_address(a: &CantorAddress) -> Self {
        IntervalSet::empty().insert_disjoint(a).unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.root == Node::Empty
    }

    pub fn is_full(&self) -> bool {
        self.root == Node::Full
    }

    pub fn measure(&self) -> Dyadic {
        self.root.measure(0)
    }

    /// Adds [a]; fails if [a] meets the current set.
    pub fn insert_disjoint(&self, a: &CantorAddress) -> Result<IntervalSet, Overlap> {
        self.root
            .insert_disjoint(a.bits())
            .map(|root| IntervalSet { root })
            .map_err(|()| Overlap { address: a.clone() })
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet { root: self.root.union(&other.root) }
    }

    pub fn intersection(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet { root: self.root.intersection(&other.root) }
    }

    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet { root: self.root.difference(&other.root) }
    }

    pub fn complement(&self) -> IntervalSet {
        IntervalSet { root: self.root.complement() }
    }

    pub fn is_subset(&self, other: &IntervalSet) -> bool {
        self.root.is_subset(&other.root)
    }

    pub fn intersects(&self, a: &CantorAddress) -> bool {
        let mut node = &self.root;
        for &bit in a.bits() {
            match node {
                Node::Empty => return false,
                Node::Full => return true,
                Node::Split(..) => node = node.descend(bit),
            }
        }
        *node != Node::Empty
    }

    pub fn contains(&self, a: &CantorAddress) -> bool {
        let mut node = &self.root;
        for &bit in a.bits() {
            match node {
                Node::Empty => return false,
                Node::Full => return true,
                Node::Split(..) => node = node.descend(bit),
            }
        }
        *node == Node::Full
    }

    /// ν: the size of the largest interval fully contained in the set.
    pub fn nu(&self) -> Dyadic {
        self.root.nu(0)
    }

    /// The canonical list of addresses, in left-to-right order.
    pub fn addresses(&self) -> Vec<CantorAddress> {
        let mut out = Vec::new();
        self.root.collect(&mut Vec::new(), &mut out);
        out
    }

    /// Measure of the part of the set inside the interval [a].
    pub fn measure_within(&self, a: &CantorAddress) -> Dyadic {
        let mut node = &self.root;
        for &bit in a.bits() {
            match node {
                Node::Empty => return Dyadic::zero(),
                Node::Full => return a.size(),
                Node::Split(..) => node = node.descend(bit),
            }
        }
        node.measure(a.len() as u32)
    }

    /// Union of all intervals of size eps (a power of two) meeting the set.
    pub fn eps_neighborhood(&self, eps: &Dyadic) -> IntervalSet {
        let k = pow2_depth(eps);
        IntervalSet { root: self.root.coarsen(k) }
    }

    /// Carves a leftmost subset of exact measure `amount` out of this set.
    /// Returns `None` when the set is smaller than `amount`.
    pub fn carve(&self, amount: &Dyadic) -> Option<IntervalSet> {
        let mut want = amount.clone();
        let root = self.root.carve(0, &mut want);
        if want.is_zero() {
            Some(IntervalSet { root })
        } else {
            None
        }
    }
}

impl fmt::Debug for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let addrs: Vec<String> = self.addresses().iter().map(|a| a.to_string()).collect();
        write!(f, "{{{}}}", addrs.join(","))
    }
}

/// Depth of intervals of size eps; panics if eps is not a power of two in (0,1].
fn pow2_depth(eps: &Dyadic) -> u32 {
    let log = eps.log2().expect("size must be a power of two");
    assert!(log <= 0, "size must be at most 1");
    (-log) as u32
}

/// Size of the largest dyadic interval disjoint from `occupied`.
pub fn max_free_interval_size(occupied: &IntervalSet) -> Dyadic {
    occupied.complement().nu()
}

/// The leftmost address `a` with 2^(-|a|) = `size`, [a] inside `within` and
/// [a] disjoint from every set in `obstacles`; `None` when no cell qualifies.
pub fn find_free_interval(
    obstacles: &[&IntervalSet],
    size: &Dyadic,
    within: &IntervalSet,
) -> Option<CantorAddress> {
    let depth = pow2_depth(size);
    let obs: Vec<&Node> = obstacles.iter().map(|s| &s.root).collect();
    let mut prefix = Vec::with_capacity(depth as usize);
    if walk_free(&within.root, &obs, depth, &mut prefix) {
        Some(CantorAddress::from_bools(prefix))
    } else {
        None
    }
}

fn walk_free(within: &Node, obstacles: &[&Node], depth: u32, prefix: &mut Vec<bool>) -> bool {
    if *within == Node::Empty || obstacles.iter().any(|o| **o == Node::Full) {
        return false;
    }
    if depth == 0 {
        return *within == Node::Full && obstacles.iter().all(|o| **o == Node::Empty);
    }
    for bit in [false, true] {
        let w = within.descend(bit);
        let obs: Vec<&Node> = obstacles.iter().map(|o| o.descend(bit)).collect();
        prefix.push(bit);
        if walk_free(w, &obs, depth - 1, prefix) {
            return true;
        }
        prefix.pop();
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn addr(s: &str) -> CantorAddress {
        s.parse().unwrap()
    }

    fn set(addrs: &[&str]) -> IntervalSet {
        let mut s = IntervalSet::empty();
        for a in addrs {
            s = s.insert_disjoint(&addr(a)).unwrap();
        }
        s
    }

    fn dy(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn measure_examples() {
        assert_eq!(IntervalSet::empty().measure(), Dyadic::zero());
        assert_eq!(set(&["0", "10"]).measure(), dy("3/2^2"));
        let merged = set(&["00", "01"]);
        assert_eq!(merged.measure(), dy("1/2^1"));
        assert_eq!(merged, set(&["0"]));
        assert_eq!(merged.addresses(), vec![addr("0")]);
    }

    #[test]
    fn insert_disjoint_examples() {
        assert_eq!(set(&["00", "01"]), set(&["0"]));
        let s = set(&["01"]);
        assert!(s.insert_disjoint(&addr("0")).is_err());
        assert!(s.insert_disjoint(&addr("010")).is_err());
        assert_eq!(set(&["1"]).addresses(), vec![addr("1")]);
    }

    #[test]
    fn set_ops_examples() {
        assert!(set(&["0"]).union(&set(&["1"])).is_full());
        assert_eq!(set(&["0"]).intersection(&set(&["01"])), set(&["01"]));
        assert_eq!(set(&["0"]).difference(&set(&["00"])), set(&["01"]));
    }

    #[test]
    fn eps_neighborhood_examples() {
        assert_eq!(set(&["0101"]).eps_neighborhood(&dy("1/2^2")), set(&["01"]));
        assert!(set(&["001", "100"]).eps_neighborhood(&dy("1/2^1")).is_full());
        assert!(IntervalSet::empty().eps_neighborhood(&dy("1/2^3")).is_empty());
    }

    #[test]
    fn free_interval_examples() {
        let obstacle = set(&["00"]);
        assert_eq!(
            find_free_interval(&[&obstacle], &dy("1/2^2"), &set(&["0"])),
            Some(addr("01"))
        );
        assert_eq!(find_free_interval(&[&obstacle], &dy("1/2^1"), &set(&["0"])), None);
        assert_eq!(
            find_free_interval(&[], &dy("1/2^0"), &IntervalSet::full()),
            Some(CantorAddress::root())
        );
    }

    #[test]
    fn max_free_size_examples() {
        assert_eq!(max_free_interval_size(&IntervalSet::empty()), dy("1/2^0"));
        assert_eq!(max_free_interval_size(&set(&["01"])), dy("1/2^1"));
        assert_eq!(max_free_interval_size(&set(&["00", "10"])), dy("1/2^2"));
        assert_eq!(max_free_interval_size(&IntervalSet::full()), Dyadic::zero());
    }

    #[test]
    fn carve_exact() {
        let free = IntervalSet::full();
        let got = free.carve(&dy("3/2^3")).unwrap();
        assert_eq!(got.measure(), dy("3/2^3"));
        assert_eq!(got, set(&["00", "010"]));
        assert!(set(&["01"]).carve(&dy("1/2^1")).is_none());
    }

    #[test]
    fn address_cells() {
        assert_eq!(CantorAddress::nth_cell(3, 5), addr("101"));
        assert_eq!(addr("101").cell_index(), 5);
        assert_eq!(CantorAddress::nth_cell(0, 0), CantorAddress::root());
    }
}
