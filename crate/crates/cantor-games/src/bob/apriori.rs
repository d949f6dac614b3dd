//! Measure-exact online allocator: each increment (x, y, r) extends the
//! shared set U_{x,y} by exactly r/2, disjoint from everything else
//! touching x or y. Feasible as long as every row sum stays at most 1.

use crate::dyadic::Dyadic;
use crate::game::Vertex;
use crate::interval::IntervalSet;
use std::collections::BTreeMap;

#[derive(Default)]
pub struct AprioriAllocator {
    u: BTreeMap<(Vertex, Vertex), Dyadic>,
    sets: BTreeMap<(Vertex, Vertex), IntervalSet>,
    row_sums: BTreeMap<Vertex, Dyadic>,
    /// Union of U_{x, .} over all neighbors of x.
    occupied: BTreeMap<Vertex, IntervalSet>,
}

pub fn apriori_allocator() -> AprioriAllocator {
    AprioriAllocator::default()
}

fn pair(x: Vertex, y: Vertex) -> (Vertex, Vertex) {
    (x.min(y), x.max(y))
}

impl AprioriAllocator {
    pub fn weight(&self, x: Vertex, y: Vertex) -> Dyadic {
        self.u.get(&pair(x, y)).cloned().unwrap_or_else(Dyadic::zero)
    }

    /// U_{x,y} and U_{y,x} are the same object.
    pub fn set(&self, x: Vertex, y: Vertex) -> IntervalSet {
        self.sets.get(&pair(x, y)).cloned().unwrap_or_default()
    }

    pub fn row_sum(&self, x: Vertex) -> Dyadic {
        self.row_sums.get(&x).cloned().unwrap_or_else(Dyadic::zero)
    }

    pub fn occupied(&self, x: Vertex) -> IntervalSet {
        self.occupied.get(&x).cloned().unwrap_or_default()
    }

    /// Adds r to u(x, y) and measure r/2 to U_{x,y}, outside everything
    /// already allocated at x or at y.
    pub fn increment(&mut self, x: Vertex, y: Vertex, r: &Dyadic) -> Result<(), String> {
        if x == y {
            return Err("increments need two distinct vertices".into());
        }
        for v in [x, y] {
            if &self.row_sum(v) + r > Dyadic::one() {
                return Err(format!("row sum at vertex {v} would exceed 1"));
            }
        }
        let blocked = self.occupied(x).union(&self.occupied(y));
        let piece = blocked
            .complement()
            .carve(&r.shr(1))
            .ok_or("free measure exhausted despite bounded row sums")?;
        let key = pair(x, y);
        let entry = self.sets.entry(key).or_default();
        *entry = entry.union(&piece);
        for v in [x, y] {
            let occ = self.occupied.entry(v).or_default();
            *occ = occ.union(&piece);
            let sum = self.row_sums.entry(v).or_insert_with(Dyadic::zero);
            *sum += r;
        }
        let w = self.u.entry(key).or_insert_with(Dyadic::zero);
        *w += r;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dy(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn first_increment_gets_half_its_weight() {
        let mut a = apriori_allocator();
        a.increment(0, 1, &dy("1/2^2")).unwrap();
        assert_eq!(a.set(0, 1).measure(), dy("1/2^3"));
        assert_eq!(a.set(1, 0), a.set(0, 1));
    }

    #[test]
    fn saturating_four_neighbors() {
        let mut a = apriori_allocator();
        for y in 1..=4 {
            a.increment(0, y, &dy("1/2^2")).unwrap();
        }
        assert_eq!(a.row_sum(0), dy("1"));
        assert_eq!(a.occupied(0).measure(), dy("1/2^1"));
        for y in 1..=4 {
            assert_eq!(a.set(0, y).measure(), dy("1/2^3"));
            for z in y + 1..=4 {
                assert!(a.set(0, y).intersection(&a.set(0, z)).is_empty());
            }
        }
    }

    #[test]
    fn row_sum_violations_are_rejected() {
        let mut a = apriori_allocator();
        a.increment(0, 1, &dy("1/2^1")).unwrap();
        a.increment(0, 2, &dy("1/2^1")).unwrap();
        assert!(a.increment(0, 3, &dy("1/2^3")).is_err());
        // the symmetric row at 3 is still open
        a.increment(3, 4, &dy("1")).unwrap();
    }
}
