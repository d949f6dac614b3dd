//! Projective planes over prime fields, used as hard schedules for the
//! bipartite game: every two lines meet, so every pair of line-vertices
//! carries weight.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

/// Incidence structure of the projective plane PG(2, q).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProjectivePlane {
    pub q: u64,
    /// Normalized homogeneous point coordinates, first nonzero entry 1.
    pub points: Vec<[u64; 3]>,
    /// Line coefficients, normalized the same way.
    pub lines: Vec<[u64; 3]>,
    /// incidence[line] = sorted point indices on that line.
    pub incidence: Vec<Vec<usize>>,
}

fn is_prime(q: u64) -> bool {
    q >= 2 && (2..q).take_while(|d| d * d <= q).all(|d| q % d != 0)
}

fn normalized_triples(q: u64) -> Vec<[u64; 3]> {
    let mut out = Vec::new();
    for y in 0..q {
        for z in 0..q {
            out.push([1, y, z]);
        }
    }
    for z in 0..q {
        out.push([0, 1, z]);
    }
    out.push([0, 0, 1]);
    out
}

/// Builds PG(2, q) for prime q and checks its counting properties before
/// returning.
pub fn projective_plane(q: u64) -> Result<ProjectivePlane, String> {
    if !is_prime(q) {
        return Err(format!("{q} is not prime"));
    }
    let points = normalized_triples(q);
    let lines = normalized_triples(q);
    let expected = (q * q + q + 1) as usize;
    let incidence: Vec<Vec<usize>> = lines
        .iter()
        .map(|l| {
            points
                .iter()
                .enumerate()
                .filter(|(_, p)| (l[0] * p[0] + l[1] * p[1] + l[2] * p[2]) % q == 0)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let plane = ProjectivePlane { q, points, lines, incidence };
    if plane.points.len() != expected || plane.lines.len() != expected {
        return Err("wrong point or line count".into());
    }
    verify_plane_properties(q, &plane.incidence, plane.points.len())?;
    Ok(plane)
}

/// Checks the five defining counts of a projective plane of order q on a
/// bare incidence list: q+1 points per line, q^2+q+1 points, q+1 lines
/// through each point, any two lines meet in exactly one point, and
/// q^2+q+1 lines.
pub fn verify_plane_properties(
    q: u64,
    incidence: &[Vec<usize>],
    point_count: usize,
) -> Result<(), String> {
    let expected = (q * q + q + 1) as usize;
    if incidence.len() != expected {
        return Err(format!("expected {expected} lines, found {}", incidence.len()));
    }
    if point_count != expected {
        return Err(format!("expected {expected} points, found {point_count}"));
    }
    let mut lines_through = vec![0u64; point_count];
    for (li, line) in incidence.iter().enumerate() {
        if line.len() != (q + 1) as usize {
            return Err(format!("line {li} carries {} points, expected {}", line.len(), q + 1));
        }
        let distinct: BTreeSet<_> = line.iter().collect();
        if distinct.len() != line.len() {
            return Err(format!("line {li} repeats a point"));
        }
        for &p in line {
            if p >= point_count {
                return Err(format!("line {li} names unknown point {p}"));
            }
            lines_through[p] += 1;
        }
    }
    for (p, &count) in lines_through.iter().enumerate() {
        if count != q + 1 {
            return Err(format!("point {p} lies on {count} lines, expected {}", q + 1));
        }
    }
    let sets: Vec<BTreeSet<usize>> =
        incidence.iter().map(|l| l.iter().copied().collect()).collect();
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            let common = sets[a].intersection(&sets[b]).count();
            if common != 1 {
                return Err(format!("lines {a} and {b} meet in {common} points, expected 1"));
            }
        }
    }
    Ok(())
}

/// Any labelling of the q^2+q+1 lines by distinct bit strings must use a
/// string of length at least floor(log2(q^2)): the shorter strings are
/// too few.
pub struct LabelBound {
    pub min_length: u32,
    /// Number of strings strictly shorter than min_length.
    pub shorter_strings: u64,
    pub lines: u64,
}

pub fn line_label_bound(plane: &ProjectivePlane) -> LabelBound {
    let q = plane.q;
    let min_length = (q * q).ilog2();
    // 2^0 + 2^1 + ... + 2^(min_length-1) = 2^min_length - 1
    let shorter_strings = (1u64 << min_length) - 1;
    let lines = plane.lines.len() as u64;
    assert!(shorter_strings < lines, "pigeonhole witness failed");
    LabelBound { min_length, shorter_strings, lines }
}

impl ProjectivePlane {
    /// Writes incidence as CSV rows "line-id,point-id".
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "line-id,point-id")?;
        for (li, line) in self.incidence.iter().enumerate() {
            for &p in line {
                writeln!(w, "{li},{p}")?;
            }
        }
        Ok(())
    }
}

/// Reads an incidence CSV and re-checks all plane properties, inferring q
/// from the line size. Returns q.
pub fn verify_plane_csv(r: impl BufRead) -> Result<u64, String> {
    let mut incidence: Vec<Vec<usize>> = Vec::new();
    let mut points: BTreeSet<usize> = BTreeSet::new();
    for (ln, line) in r.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if ln == 0 {
            if line.trim() != "line-id,point-id" {
                return Err(format!("bad header: {line:?}"));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (a, b) = line.split_once(',').ok_or_else(|| format!("bad row: {line:?}"))?;
        let li: usize = a.trim().parse().map_err(|_| format!("bad line id: {a:?}"))?;
        let p: usize = b.trim().parse().map_err(|_| format!("bad point id: {b:?}"))?;
        if incidence.len() <= li {
            incidence.resize(li + 1, Vec::new());
        }
        incidence[li].push(p);
        points.insert(p);
    }
    let first = incidence.first().ok_or("no incidence rows")?;
    if first.is_empty() {
        return Err("line 0 has no points".into());
    }
    let q = first.len() as u64 - 1;
    verify_plane_properties(q, &incidence, points.len())?;
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fano_plane() {
        let plane = projective_plane(2).unwrap();
        assert_eq!(plane.points.len(), 7);
        assert_eq!(plane.lines.len(), 7);
        for line in &plane.incidence {
            assert_eq!(line.len(), 3);
        }
    }

    #[test]
    fn q3_counts_and_label_bound() {
        let plane = projective_plane(3).unwrap();
        assert_eq!(plane.lines.len(), 13);
        let bound = line_label_bound(&plane);
        assert_eq!(bound.min_length, 3);
        assert_eq!(bound.shorter_strings, 7);
    }

    #[test]
    fn q4_rejected() {
        assert!(projective_plane(4).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let plane = projective_plane(5).unwrap();
        let mut buf = Vec::new();
        plane.write_csv(&mut buf).unwrap();
        assert_eq!(verify_plane_csv(buf.as_slice()).unwrap(), 5);
    }

    #[test]
    fn tampered_csv_fails() {
        let plane = projective_plane(3).unwrap();
        let mut buf = Vec::new();
        plane.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        // drop the last row: one line loses a point
        let tampered: Vec<&str> = text.lines().collect();
        let tampered = tampered[..tampered.len() - 1].join("\n");
        assert!(verify_plane_csv(tampered.as_bytes()).is_err());
    }
}
