//! Exact nearest-neighbor search under the max (Chebyshev) norm.
//!
//! [`NeighborIndex`] is a kd-tree over a fixed point set. Queries return
//! exactly what a linear scan would: neighbors are ordered by
//! `(distance, id)`, so equal distances resolve to the lower id.
//! Points are identified by their row in the input matrix.

use ndarray::ArrayView2;

use crate::error::{Error, Result};

const LEAF_SIZE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub id: usize,
    pub distance: f64,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        dim: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct NeighborIndex {
    dim: usize,
    /// Coordinates in tree order, row-major.
    points: Vec<f64>,
    /// Original row id of each tree-order slot.
    ids: Vec<usize>,
    nodes: Vec<Node>,
}

#[inline]
fn max_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut d = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let t = (x - y).abs();
        if t > d {
            d = t;
        }
    }
    d
}

/// Max-norm distance, or `None` as soon as it provably exceeds `bound`.
#[inline]
fn max_dist_within(a: &[f64], b: &[f64], bound: f64) -> Option<f64> {
    let mut d = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let t = (x - y).abs();
        if t > d {
            if t > bound {
                return None;
            }
            d = t;
        }
    }
    Some(d)
}

/// The `k` best candidates so far, sorted by `(distance, id)`.
struct Best {
    k: usize,
    items: Vec<Neighbor>,
}

impl Best {
    fn new(k: usize) -> Self {
        Self {
            k,
            items: Vec::with_capacity(k + 1),
        }
    }

    #[inline]
    fn worst(&self) -> f64 {
        if self.items.len() < self.k {
            f64::INFINITY
        } else {
            self.items[self.k - 1].distance
        }
    }

    #[inline]
    fn offer(&mut self, id: usize, distance: f64) {
        let before = |n: &Neighbor| (n.distance, n.id) < (distance, id);
        if self.items.len() == self.k {
            let last = &self.items[self.k - 1];
            if !((distance, id) < (last.distance, last.id)) {
                return;
            }
            self.items.pop();
        }
        let pos = self.items.partition_point(before);
        self.items.insert(pos, Neighbor { id, distance });
    }
}

impl NeighborIndex {
    /// Indexes every row of `points`. Duplicate rows stay distinct entries.
    pub fn build(points: ArrayView2<'_, f64>) -> Result<Self> {
        let (n, dim) = points.dim();
        if n == 0 || dim == 0 {
            return Err(Error::EmptyInput);
        }
        if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: pos / dim });
        }
        let flat: Vec<f64> = points.iter().cloned().collect();
        let mut order: Vec<usize> = (0..n).collect();
        let mut nodes = Vec::with_capacity(2 * n / LEAF_SIZE + 1);
        build_node(&flat, dim, &mut order, 0, &mut nodes);

        let mut tree_points = Vec::with_capacity(n * dim);
        for &id in &order {
            tree_points.extend_from_slice(&flat[id * dim..(id + 1) * dim]);
        }
        Ok(Self {
            dim,
            points: tree_points,
            ids: order,
            nodes,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check_query(&self, query: &[f64]) -> Result<()> {
        if query.len() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "query has dimension {}, index has {}",
                query.len(),
                self.dim
            )));
        }
        Ok(())
    }

    /// The `k` nearest points not listed in `exclude`, nearest first.
    pub fn knn(&self, query: &[f64], k: usize, exclude: &[usize]) -> Result<Vec<Neighbor>> {
        self.check_query(query)?;
        let excluded = count_distinct_valid(exclude, self.len());
        let available = self.len() - excluded;
        if k == 0 || k > available {
            return Err(Error::KTooLarge { k, available });
        }
        Ok(self.knn_filtered(query, k, |id| !exclude.contains(&id)))
    }

    /// The `k` nearest points whose id passes `keep`. Returns fewer than
    /// `k` entries when fewer points pass. `query` must have length `dim()`.
    pub fn knn_filtered<F: Fn(usize) -> bool>(&self, query: &[f64], k: usize, keep: F) -> Vec<Neighbor> {
        debug_assert_eq!(query.len(), self.dim);
        if k == 0 {
            return Vec::new();
        }
        let mut best = Best::new(k);
        self.knn_node(0, query, 0.0, &keep, &mut best);
        best.items
    }

    fn knn_node<F: Fn(usize) -> bool>(&self, node: usize, q: &[f64], bound: f64, keep: &F, best: &mut Best) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                let d = self.dim;
                for slot in start..end {
                    let id = self.ids[slot];
                    if !keep(id) {
                        continue;
                    }
                    let p = &self.points[slot * d..(slot + 1) * d];
                    if let Some(dist) = max_dist_within(p, q, best.worst()) {
                        best.offer(id, dist);
                    }
                }
            }
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let diff = q[dim] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.knn_node(near, q, bound, keep, best);
                let far_bound = bound.max(diff.abs());
                if far_bound <= best.worst() {
                    self.knn_node(far, q, far_bound, keep, best);
                }
            }
        }
    }

    /// Number of points within `radius` of `query`, not counting `exclude`.
    pub fn count_within(&self, query: &[f64], radius: f64, inclusive: bool, exclude: &[usize]) -> Result<usize> {
        self.check_query(query)?;
        if radius < 0.0 || radius.is_nan() {
            return Err(Error::NegativeRadius(radius));
        }
        Ok(self.count_within_filtered(query, radius, inclusive, |id| !exclude.contains(&id)))
    }

    pub fn count_within_filtered<F: Fn(usize) -> bool>(
        &self,
        query: &[f64],
        radius: f64,
        inclusive: bool,
        keep: F,
    ) -> usize {
        debug_assert_eq!(query.len(), self.dim);
        let mut count = 0;
        if inclusive {
            self.count_node(0, query, 0.0, &|d| d <= radius, &|b| b > radius, &keep, &mut count);
        } else {
            self.count_node(0, query, 0.0, &|d| d < radius, &|b| b >= radius, &keep, &mut count);
        }
        count
    }

    #[allow(clippy::too_many_arguments)]
    fn count_node<F: Fn(usize) -> bool>(
        &self,
        node: usize,
        q: &[f64],
        bound: f64,
        inside: &dyn Fn(f64) -> bool,
        prune: &dyn Fn(f64) -> bool,
        keep: &F,
        count: &mut usize,
    ) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                let d = self.dim;
                for slot in start..end {
                    let p = &self.points[slot * d..(slot + 1) * d];
                    if inside(max_dist(p, q)) && keep(self.ids[slot]) {
                        *count += 1;
                    }
                }
            }
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let diff = q[dim] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.count_node(near, q, bound, inside, prune, keep, count);
                let far_bound = bound.max(diff.abs());
                if !prune(far_bound) {
                    self.count_node(far, q, far_bound, inside, prune, keep, count);
                }
            }
        }
    }
}

fn count_distinct_valid(ids: &[usize], n: usize) -> usize {
    let mut v: Vec<usize> = ids.iter().cloned().filter(|&i| i < n).collect();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Recursively splits `order[..]` (ids) at the median of the widest axis.
/// `offset` is the position of `order[0]` in the final tree order.
fn build_node(flat: &[f64], dim: usize, order: &mut [usize], offset: usize, nodes: &mut Vec<Node>) -> usize {
    let me = nodes.len();
    if order.len() <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            start: offset,
            end: offset + order.len(),
        });
        return me;
    }
    let mut split_dim = 0;
    let mut widest = -1.0;
    for d in 0..dim {
        let (lo, hi) = order.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
            let v = flat[i * dim + d];
            (lo.min(v), hi.max(v))
        });
        if hi - lo > widest {
            widest = hi - lo;
            split_dim = d;
        }
    }
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        flat[a * dim + split_dim]
            .total_cmp(&flat[b * dim + split_dim])
            .then(a.cmp(&b))
    });
    let value = flat[order[mid] * dim + split_dim];
    nodes.push(Node::Leaf { start: 0, end: 0 });
    let (lo, hi) = order.split_at_mut(mid);
    let left = build_node(flat, dim, lo, offset, nodes);
    let right = build_node(flat, dim, hi, offset + mid, nodes);
    nodes[me] = Node::Split {
        dim: split_dim,
        value,
        left,
        right,
    };
    me
}

/// Sorted copy of a 1-D sample for fast, exact radius counts.
#[derive(Debug, Clone)]
pub struct SortedAxis {
    sorted: Vec<f64>,
}

impl SortedAxis {
    pub fn new(values: impl IntoIterator<Item = f64>) -> Self {
        let mut sorted: Vec<f64> = values.into_iter().collect();
        sorted.sort_by(f64::total_cmp);
        Self { sorted }
    }

    /// Points `v` with `|v - center| <= radius` (or `<` when exclusive),
    /// counting `center` itself if it is in the sample.
    pub fn count_within(&self, center: f64, radius: f64, inclusive: bool) -> usize {
        let s = &self.sorted;
        let (lo, hi) = if inclusive {
            (
                s.partition_point(|&v| v < center && center - v > radius),
                s.partition_point(|&v| v <= center || v - center <= radius),
            )
        } else {
            (
                s.partition_point(|&v| v < center && center - v >= radius),
                s.partition_point(|&v| v <= center || v - center < radius),
            )
        };
        // With radius 0 and exclusive counting the center itself is outside.
        if !inclusive && radius == 0.0 {
            return 0;
        }
        hi.saturating_sub(lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(xs: &[f64]) -> Array2<f64> {
        Array2::from_shape_vec((xs.len(), 1), xs.to_vec()).unwrap()
    }

    fn random_points(n: usize, d: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, d), |_| rng.random::<f64>())
    }

    fn brute_knn(points: &Array2<f64>, q: &[f64], k: usize, exclude: &[usize]) -> Vec<(usize, f64)> {
        let mut all: Vec<(f64, usize)> = points
            .outer_iter()
            .enumerate()
            .filter(|(i, _)| !exclude.contains(i))
            .map(|(i, p)| {
                let d = p.iter().zip(q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                (d, i)
            })
            .collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        all.into_iter().take(k).map(|(d, i)| (i, d)).collect()
    }

    fn brute_count(points: &Array2<f64>, q: &[f64], r: f64, inclusive: bool, exclude: &[usize]) -> usize {
        points
            .outer_iter()
            .enumerate()
            .filter(|(i, _)| !exclude.contains(i))
            .filter(|(_, p)| {
                let d = p.iter().zip(q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if inclusive {
                    d <= r
                } else {
                    d < r
                }
            })
            .count()
    }

    fn as_pairs(v: Vec<Neighbor>) -> Vec<(usize, f64)> {
        v.into_iter().map(|n| (n.id, n.distance)).collect()
    }

    #[test]
    fn tiny_cases() {
        let pts = line(&[5.0]);
        assert_eq!(NeighborIndex::build(pts.view()).unwrap().len(), 1);

        let pts = line(&[0.0, 1.0, 3.0]);
        let idx = NeighborIndex::build(pts.view()).unwrap();
        let nn = idx.knn(&[0.0], 1, &[0]).unwrap();
        assert_eq!(nn, vec![Neighbor { id: 1, distance: 1.0 }]);
        assert_eq!(idx.knn(&[0.0], 2, &[0]).unwrap().len(), 2);
        assert!(matches!(idx.knn(&[0.0], 3, &[0]), Err(Error::KTooLarge { .. })));

        let pts = line(&[0.0, 1.0, 2.0]);
        let idx = NeighborIndex::build(pts.view()).unwrap();
        assert_eq!(idx.count_within(&[1.0], 1.0, true, &[1]).unwrap(), 2);
        assert_eq!(idx.count_within(&[1.0], 0.0, true, &[1]).unwrap(), 0);
        assert!(idx.count_within(&[1.0], -1.0, true, &[]).is_err());
    }

    #[test]
    fn duplicates_are_kept() {
        let pts = line(&[2.0, 2.0, 2.0, 7.0]);
        let idx = NeighborIndex::build(pts.view()).unwrap();
        assert_eq!(idx.len(), 4);
        assert_eq!(idx.count_within(&[2.0], 0.0, true, &[]).unwrap(), 3);
        let ids: Vec<usize> = idx.knn(&[2.0], 3, &[]).unwrap().iter().map(|n| n.id).collect();
        assert_eq!(ids, vec![0, 1, 2]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            NeighborIndex::build(Array2::<f64>::zeros((0, 2)).view()),
            Err(Error::EmptyInput)
        ));
        let pts = line(&[0.0, f64::INFINITY]);
        assert!(matches!(
            NeighborIndex::build(pts.view()),
            Err(Error::NonFinite { index: 1 })
        ));
    }

    #[test]
    fn knn_matches_linear_scan() {
        let pts = random_points(1000, 2, 1);
        let idx = NeighborIndex::build(pts.view()).unwrap();
        let queries = random_points(100, 2, 2);
        for q in queries.outer_iter() {
            let q = q.to_vec();
            assert_eq!(as_pairs(idx.knn(&q, 5, &[]).unwrap()), brute_knn(&pts, &q, 5, &[]));
        }

        let pts = random_points(500, 3, 3);
        let idx = NeighborIndex::build(pts.view()).unwrap();
        for i in 0..pts.nrows() {
            let q = pts.row(i).to_vec();
            for k in [1, 4, 10] {
                assert_eq!(as_pairs(idx.knn(&q, k, &[i]).unwrap()), brute_knn(&pts, &q, k, &[i]));
            }
        }
    }

    #[test]
    fn ties_resolve_to_lower_id() {
        // Integer grid: many equal max-norm distances.
        let pts = Array2::from_shape_fn((400, 2), |(i, c)| ((i * (c + 3)) % 7) as f64);
        let idx = NeighborIndex::build(pts.view()).unwrap();
        for i in (0..400).step_by(13) {
            let q = pts.row(i).to_vec();
            assert_eq!(as_pairs(idx.knn(&q, 12, &[i]).unwrap()), brute_knn(&pts, &q, 12, &[i]));
        }
    }

    #[test]
    fn exhaustive_knn_returns_everything_else() {
        let pts = random_points(37, 4, 9);
        let idx = NeighborIndex::build(pts.view()).unwrap();
        let got = idx.knn(&pts.row(5).to_vec(), 36, &[5]).unwrap();
        let mut ids: Vec<usize> = got.iter().map(|n| n.id).collect();
        ids.sort();
        assert_eq!(ids, (0..37).filter(|&i| i != 5).collect::<Vec<_>>());
    }

    #[test]
    fn counts_match_linear_scan() {
        let pts = random_points(800, 3, 4);
        let idx = NeighborIndex::build(pts.view()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let q: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
            let r = rng.random::<f64>() * 0.3;
            for inclusive in [true, false] {
                assert_eq!(
                    idx.count_within(&q, r, inclusive, &[]).unwrap(),
                    brute_count(&pts, &q, r, inclusive, &[])
                );
            }
        }
        // Radii that land exactly on data distances.
        for i in 0..50 {
            let q = pts.row(i).to_vec();
            let nn = idx.knn(&q, 7, &[i]).unwrap();
            let r = nn[6].distance;
            for inclusive in [true, false] {
                assert_eq!(
                    idx.count_within(&q, r, inclusive, &[i]).unwrap(),
                    brute_count(&pts, &q, r, inclusive, &[i])
                );
            }
        }
    }

    #[test]
    fn sorted_axis_matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let vals: Vec<f64> = (0..300).map(|_| (rng.random::<f64>() * 50.0).round() / 10.0).collect();
        let axis = SortedAxis::new(vals.iter().cloned());
        let pts = line(&vals);
        for &c in vals.iter().take(60) {
            for r in [0.0, 0.1, 0.3, 1.0, 2.5] {
                for inclusive in [true, false] {
                    assert_eq!(
                        axis.count_within(c, r, inclusive),
                        brute_count(&pts, &[c], r, inclusive, &[])
                    );
                }
            }
        }
    }

    proptest! {
        #[test]
        fn count_monotone_in_radius(seed in 0u64..1000, r1 in 0.0f64..0.5, r2 in 0.0f64..0.5) {
            let pts = random_points(200, 2, seed);
            let idx = NeighborIndex::build(pts.view()).unwrap();
            let q = [0.5, 0.5];
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            let a = idx.count_within(&q, lo, true, &[]).unwrap();
            let b = idx.count_within(&q, hi, true, &[]).unwrap();
            prop_assert!(a <= b);
            prop_assert!(idx.count_within(&q, lo, false, &[]).unwrap() <= a);
        }

        #[test]
        fn scaling_preserves_neighbors(seed in 0u64..1000, c in prop::sample::select(vec![0.25, 2.0, 8.0, 1024.0])) {
            // Powers of two keep the arithmetic exact.
            let pts = random_points(150, 3, seed);
            let scaled = pts.mapv(|v| v * c);
            let a = NeighborIndex::build(pts.view()).unwrap();
            let b = NeighborIndex::build(scaled.view()).unwrap();
            for i in 0..20 {
                let na = a.knn(&pts.row(i).to_vec(), 4, &[i]).unwrap();
                let nb = b.knn(&scaled.row(i).to_vec(), 4, &[i]).unwrap();
                for (x, y) in na.iter().zip(&nb) {
                    prop_assert_eq!(x.id, y.id);
                    prop_assert_eq!(x.distance * c, y.distance);
                }
            }
        }
    }
}
