//! Exhaustive search for embedded grids and doilies.

use std::collections::BTreeSet;
use std::str::FromStr;

use super::{Geometry, GeometryError, PointId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubgeometryKind {
    /// 9 points, 6 lines in two parallel classes (GQ(2,1)).
    Grid,
    /// 15 points, 15 lines forming a GQ(2,2).
    Doily,
}

impl FromStr for SubgeometryKind {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "grid" => Ok(SubgeometryKind::Grid),
            "doily" => Ok(SubgeometryKind::Doily),
            other => Err(GeometryError::UnsupportedKind(other.to_string())),
        }
    }
}

/// All embedded grids or doilies of `g`, deduplicated and sorted by their
/// canonical key (the sorted line-index set for grids, the sorted point set
/// for doilies).
pub fn enumerate_subgeometries(
    g: &Geometry,
    kind: SubgeometryKind,
) -> Result<Vec<Geometry>, GeometryError> {
    match kind {
        SubgeometryKind::Grid => {
            let order: Vec<usize> = (0..g.num_lines()).collect();
            grid_keys(g, &order)
                .into_iter()
                .enumerate()
                .map(|(i, key)| g.with_lines(format!("grid-{i}"), &key))
                .collect()
        }
        SubgeometryKind::Doily => {
            let order: Vec<usize> = (0..g.num_points()).collect();
            doily_keys(g, &order)
                .into_iter()
                .enumerate()
                .map(|(i, ids)| g.induced(format!("doily-{i}"), &ids))
                .collect()
        }
    }
}

fn shared_points(g: &Geometry, a: usize, b: usize) -> usize {
    let ma = g.members(a);
    g.members(b).iter().filter(|p| ma.contains(p)).count()
}

/// Grids as sorted 6-line keys. Rows are triples of pairwise disjoint lines
/// taken in `order`; columns are triples of disjoint transversals meeting
/// every row once. Each grid is found twice (rows and columns swap), the
/// key set removes the duplicate.
pub(crate) fn grid_keys(g: &Geometry, order: &[usize]) -> BTreeSet<Vec<usize>> {
    let n = order.len();
    let mut keys = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (order[i], order[j]);
            if shared_points(g, a, b) != 0 {
                continue;
            }
            for &c in &order[j + 1..] {
                if shared_points(g, a, c) != 0 || shared_points(g, b, c) != 0 {
                    continue;
                }
                let transversals: Vec<usize> = order
                    .iter()
                    .copied()
                    .filter(|&t| t != a && t != b && t != c)
                    .filter(|&t| [a, b, c].iter().all(|&r| shared_points(g, t, r) == 1))
                    .collect();
                for x in 0..transversals.len() {
                    for y in x + 1..transversals.len() {
                        for z in y + 1..transversals.len() {
                            let cols = [transversals[x], transversals[y], transversals[z]];
                            let disjoint = shared_points(g, cols[0], cols[1]) == 0
                                && shared_points(g, cols[0], cols[2]) == 0
                                && shared_points(g, cols[1], cols[2]) == 0;
                            if disjoint {
                                let mut key = vec![a, b, c, cols[0], cols[1], cols[2]];
                                key.sort_unstable();
                                keys.insert(key);
                            }
                        }
                    }
                }
            }
        }
    }
    keys
}

/// Doilies as sorted point-id sets.
///
/// Backtracks over points in `order`, deciding membership. A line of the
/// ambient quadrangle can never meet an embedded GQ(2,2) in exactly two
/// points (the two points would either be joined by a second line, or have
/// common neighbours inside the doily and close a triangle), so any line
/// with two chosen points and one rejected point prunes the branch. Leaves
/// with 15 points are revalidated as GQ(2,2).
pub(crate) fn doily_keys(g: &Geometry, order: &[usize]) -> BTreeSet<Vec<PointId>> {
    struct Search<'a> {
        g: &'a Geometry,
        order: &'a [usize],
        chosen: Vec<bool>,
        line_in: Vec<u8>,
        line_out: Vec<u8>,
        size: usize,
        found: BTreeSet<Vec<PointId>>,
    }

    const TARGET: usize = 15;

    impl Search<'_> {
        fn run(&mut self, depth: usize) {
            if self.size > TARGET || self.size + (self.order.len() - depth) < TARGET {
                return;
            }
            if depth == self.order.len() {
                self.leaf();
                return;
            }
            let p = self.order[depth];
            for take in [true, false] {
                let lines = self.g.incident_lines(p);
                let ok = lines.iter().all(|&l| {
                    let (i, o) = (self.line_in[l] + take as u8, self.line_out[l] + !take as u8);
                    !(i == 2 && o == 1)
                });
                if !ok {
                    continue;
                }
                for &l in lines {
                    if take {
                        self.line_in[l] += 1;
                    } else {
                        self.line_out[l] += 1;
                    }
                }
                self.chosen[p] = take;
                self.size += take as usize;
                self.run(depth + 1);
                self.size -= take as usize;
                self.chosen[p] = false;
                for &l in lines {
                    if take {
                        self.line_in[l] -= 1;
                    } else {
                        self.line_out[l] -= 1;
                    }
                }
            }
        }

        fn leaf(&mut self) {
            let inside = self.line_in.iter().filter(|&&c| c == 3).count();
            if inside != TARGET {
                return;
            }
            let ids: Vec<PointId> = (0..self.g.num_points())
                .filter(|&p| self.chosen[p])
                .map(|p| self.g.points()[p].id)
                .collect();
            if let Ok(sub) = self.g.induced("doily", &ids) {
                if sub.check_gq(2).is_ok() {
                    self.found.insert(ids);
                }
            }
        }
    }

    let mut s = Search {
        g,
        order,
        chosen: vec![false; g.num_points()],
        line_in: vec![0; g.num_lines()],
        line_out: vec![0; g.num_lines()],
        size: 0,
        found: BTreeSet::new(),
    };
    s.run(0);
    s.found
}

/// Triples of pairwise point-disjoint embedded subgeometries, as ascending
/// indices into the list from [`enumerate_subgeometries`].
pub fn disjoint_triples(
    g: &Geometry,
    kind: SubgeometryKind,
) -> Result<Vec<[usize; 3]>, GeometryError> {
    let subs = enumerate_subgeometries(g, kind)?;
    let sets: Vec<BTreeSet<PointId>> = subs.iter().map(|s| s.point_ids().collect()).collect();
    let apart = |a: usize, b: usize| sets[a].is_disjoint(&sets[b]);
    let mut out = Vec::new();
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            if !apart(a, b) {
                continue;
            }
            out.extend(
                (b + 1..sets.len())
                    .filter(|&c| apart(a, c) && apart(b, c))
                    .map(|c| [a, b, c]),
            );
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_doily, build_eloily, build_w32, canonical_q};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eloily_contains_120_grids() {
        let g = build_eloily(&canonical_q()).unwrap();
        let grids = enumerate_subgeometries(&g, SubgeometryKind::Grid).unwrap();
        assert_eq!(grids.len(), 120);
        for grid in &grids {
            assert_eq!((grid.num_points(), grid.num_lines()), (9, 6));
            assert!((0..9).all(|p| grid.incident_lines(p).len() == 2));
            assert_eq!(grid.gq_order(), Some((2, 1)));
        }
    }

    #[test]
    fn eloily_contains_36_doilies() {
        let g = build_eloily(&canonical_q()).unwrap();
        let doilies = enumerate_subgeometries(&g, SubgeometryKind::Doily).unwrap();
        assert_eq!(doilies.len(), 36);
        for d in &doilies {
            d.check_gq(2).unwrap();
        }
        let canonical = build_doily(&canonical_q()).unwrap();
        assert!(doilies.contains(&canonical));
    }

    #[test]
    fn eloily_splits_into_grids_not_doilies() {
        let g = build_eloily(&canonical_q()).unwrap();
        assert!(disjoint_triples(&g, SubgeometryKind::Doily)
            .unwrap()
            .is_empty());
        let grids = enumerate_subgeometries(&g, SubgeometryKind::Grid).unwrap();
        let triples = disjoint_triples(&g, SubgeometryKind::Grid).unwrap();
        // the split by position of the identity factor is one of them
        let by_identity: Vec<usize> = (0..3)
            .map(|k| {
                let ids: BTreeSet<PointId> = g
                    .point_ids()
                    .filter(|&id| {
                        g.label_of(g.point_index(id).unwrap()).symbol(k) == crate::pauli::Pauli::I
                    })
                    .collect();
                grids
                    .iter()
                    .position(|gr| gr.point_ids().collect::<BTreeSet<_>>() == ids)
                    .unwrap()
            })
            .collect();
        let mut key = [by_identity[0], by_identity[1], by_identity[2]];
        key.sort();
        assert!(triples.contains(&key));
    }

    #[test]
    fn doily_contains_ten_grids() {
        let g = build_w32().unwrap();
        assert_eq!(
            enumerate_subgeometries(&g, SubgeometryKind::Grid)
                .unwrap()
                .len(),
            10
        );
        assert_eq!(
            enumerate_subgeometries(&g, SubgeometryKind::Doily)
                .unwrap()
                .len(),
            1
        );
    }

    #[test]
    fn search_is_independent_of_visiting_order() {
        let g = build_eloily(&canonical_q()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut lines: Vec<usize> = (0..g.num_lines()).collect();
        let mut points: Vec<usize> = (0..g.num_points()).collect();
        let base_grids = grid_keys(&g, &lines);
        let base_doilies = doily_keys(&g, &points);
        lines.shuffle(&mut rng);
        points.shuffle(&mut rng);
        assert_eq!(grid_keys(&g, &lines), base_grids);
        assert_eq!(doily_keys(&g, &points), base_doilies);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!(
            "grid".parse::<SubgeometryKind>().unwrap(),
            SubgeometryKind::Grid
        );
        assert_eq!(
            "Doily".parse::<SubgeometryKind>().unwrap(),
            SubgeometryKind::Doily
        );
        assert!(matches!(
            "ovoid".parse::<SubgeometryKind>(),
            Err(GeometryError::UnsupportedKind(_))
        ));
    }
}
