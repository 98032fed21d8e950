//! Nested grid partitions of a dataset.
//!
//! Level `i` splits every axis of the data's bounding box into `2^i` equal
//! slabs, so each level-`i` cell is the union of at most `2^d` level-`(i+1)`
//! cells and the level sequence is a chain of ever thinner partitions. Only
//! nonempty cells are stored.
//!
//! Representatives are built once at the finest level from coordinate sums
//! and then aggregated backward: a parent's count and coordinate sum are the
//! totals over its children, so every level summarizes the same data exactly.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{Dataset, Representatives, WeightedPoints};

/// Deepest supported level; cell coordinates are stored as `u32`.
pub const MAX_LEVEL: u32 = 31;

/// Axis-aligned box enclosing a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl BoundingBox {
    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(self.min.iter().zip(&self.max))
                .all(|(p, (lo, hi))| lo <= p && p <= hi)
    }
}

/// Tight coordinate-wise min/max box.
pub fn bounding_box(dataset: &Dataset) -> BoundingBox {
    let mut min = dataset.point(0).to_vec();
    let mut max = min.clone();
    for row in dataset.rows().skip(1) {
        for (j, &x) in row.iter().enumerate() {
            if x < min[j] {
                min[j] = x;
            }
            if x > max[j] {
                max[j] = x;
            }
        }
    }
    BoundingBox { min, max }
}

/// Grid cell at a given level: `coords[j] ∈ [0, 2^level)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex {
    pub level: u32,
    pub coords: Vec<u32>,
}

impl CellIndex {
    pub fn parent(&self) -> Option<CellIndex> {
        (self.level > 1).then(|| CellIndex {
            level: self.level - 1,
            coords: self.coords.iter().map(|c| c >> 1).collect(),
        })
    }
}

fn check_level(level: u32) -> Result<()> {
    if level == 0 || level > MAX_LEVEL {
        return Err(Error::invalid(format!(
            "grid level must lie in 1..={MAX_LEVEL}, got {level}"
        )));
    }
    Ok(())
}

#[inline]
fn axis_coord(x: f64, lo: f64, hi: f64, level: u32) -> u32 {
    let slabs = 1u64 << level;
    if hi <= lo {
        return 0;
    }
    let width = (hi - lo) / slabs as f64;
    let c = ((x - lo) / width).floor();
    if c < 0.0 {
        0
    } else {
        (c as u64).min(slabs - 1) as u32
    }
}

/// Cell of `point` at `level`. Points on the upper face fall into the last
/// cell of that axis; zero-extent axes map to slab 0.
pub fn cell_index(point: &[f64], bbox: &BoundingBox, level: u32) -> Result<CellIndex> {
    check_level(level)?;
    if point.len() != bbox.dim() {
        return Err(Error::DimensionMismatch {
            expected: bbox.dim(),
            got: point.len(),
        });
    }
    if !bbox.contains(point) {
        return Err(Error::invalid(format!("point {point:?} lies outside the box")));
    }
    let coords = point
        .iter()
        .enumerate()
        .map(|(j, &x)| axis_coord(x, bbox.min[j], bbox.max[j], level))
        .collect();
    Ok(CellIndex { level, coords })
}

/// All nonempty cells of one grid level with their representatives.
///
/// Cells are sorted lexicographically by coordinates; representative `i`
/// summarizes cell `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionLevel {
    level: u32,
    dim: usize,
    coords: Vec<u32>,
    sums: Vec<f64>,
    reps: Representatives,
}

impl PartitionLevel {
    fn from_parts(level: u32, dim: usize, coords: Vec<u32>, weights: Vec<u64>, sums: Vec<f64>) -> Self {
        let means = sums
            .chunks_exact(dim)
            .zip(&weights)
            .flat_map(|(s, &w)| s.iter().map(move |v| v / w as f64))
            .collect();
        let reps = Representatives::new(weights, means, dim)
            .expect("grid cells are nonempty and data is finite");
        Self {
            level,
            dim,
            coords,
            sums,
            reps,
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of nonempty cells, `|P_i|`.
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn representatives(&self) -> &Representatives {
        &self.reps
    }

    pub fn total_weight(&self) -> u64 {
        self.reps.total_count()
    }

    pub fn cell_coords(&self, i: usize) -> &[u32] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn cell(&self, i: usize) -> CellIndex {
        CellIndex {
            level: self.level,
            coords: self.cell_coords(i).to_vec(),
        }
    }

    /// Coordinate sum of the points in cell `i`.
    pub fn coordinate_sum(&self, i: usize) -> &[f64] {
        &self.sums[i * self.dim..(i + 1) * self.dim]
    }

    /// Position of the cell with these coordinates, if it is nonempty.
    pub fn locate(&self, coords: &[u32]) -> Option<usize> {
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.cell_coords(mid).cmp(coords) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }
}

impl WeightedPoints for PartitionLevel {
    fn len(&self) -> usize {
        self.reps.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn point(&self, i: usize) -> &[f64] {
        self.reps.mean(i)
    }

    #[inline]
    fn weight(&self, i: usize) -> f64 {
        self.reps.weights()[i] as f64
    }
}

/// Output of [`build_finest`]: the level plus the cell of every point.
#[derive(Debug, Clone)]
pub struct FinestLevel {
    pub level: PartitionLevel,
    pub point_cells: Vec<usize>,
}

/// One pass over the data: each point's count and coordinates go to its
/// level-`depth` cell. No distances are evaluated.
pub fn build_finest(dataset: &Dataset, bbox: &BoundingBox, depth: u32) -> Result<FinestLevel> {
    check_level(depth)?;
    let dim = dataset.dim();
    if bbox.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bbox.dim(),
        });
    }
    let n = dataset.len();
    let mut point_coords = Vec::with_capacity(n * dim);
    for row in dataset.rows() {
        if !bbox.contains(row) {
            return Err(Error::invalid("dataset point lies outside the box"));
        }
        for (j, &x) in row.iter().enumerate() {
            point_coords.push(axis_coord(x, bbox.min[j], bbox.max[j], depth));
        }
    }
    let key = |i: usize| &point_coords[i * dim..(i + 1) * dim];

    // stable: points inside a cell are summed in dataset order
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| key(a).cmp(key(b)));

    let mut coords = Vec::new();
    let mut weights = Vec::new();
    let mut sums = Vec::new();
    let mut point_cells = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        if pos == 0 || key(order[pos - 1]) != key(i) {
            coords.extend_from_slice(key(i));
            weights.push(0);
            sums.extend(std::iter::repeat_n(0.0, dim));
        }
        let cell = weights.len() - 1;
        weights[cell] += 1;
        for (s, x) in sums[cell * dim..].iter_mut().zip(dataset.point(i)) {
            *s += x;
        }
        point_cells[i] = cell;
    }
    Ok(FinestLevel {
        level: PartitionLevel::from_parts(depth, dim, coords, weights, sums),
        point_cells,
    })
}

/// Aggregates a level into the next coarser one by halving cell coordinates.
pub fn coarsen(child: &PartitionLevel) -> Result<PartitionLevel> {
    if child.level < 2 {
        return Err(Error::invalid("level 1 has no coarser grid level"));
    }
    let dim = child.dim;
    let parent_key = |i: usize| child.cell_coords(i).iter().map(|c| c >> 1);
    let mut order: Vec<usize> = (0..child.len()).collect();
    order.sort_by(|&a, &b| parent_key(a).cmp(parent_key(b)));

    let mut coords: Vec<u32> = Vec::new();
    let mut weights: Vec<u64> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if pos == 0 || !parent_key(order[pos - 1]).eq(parent_key(i)) {
            coords.extend(parent_key(i));
            weights.push(0);
            sums.extend(std::iter::repeat_n(0.0, dim));
        }
        let cell = weights.len() - 1;
        weights[cell] += child.reps.weights()[i];
        for (s, x) in sums[cell * dim..].iter_mut().zip(child.coordinate_sum(i)) {
            *s += x;
        }
    }
    Ok(PartitionLevel::from_parts(child.level - 1, dim, coords, weights, sums))
}

/// Grid levels `1..=depth` of one dataset, with the maps needed to relate
/// cells across levels and back to points.
#[derive(Debug, Clone)]
pub struct PartitionSequence {
    bbox: BoundingBox,
    levels: Vec<PartitionLevel>,
    /// `parents[i][c]`: index in level `i` (1-based) of the parent of cell `c`
    /// of level `i + 1`.
    parents: Vec<Vec<usize>>,
    point_cells: Vec<usize>,
}

impl PartitionSequence {
    pub fn depth(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }

    /// Level `i`, 1-based.
    pub fn level(&self, i: u32) -> &PartitionLevel {
        &self.levels[(i - 1) as usize]
    }

    pub fn levels(&self) -> &[PartitionLevel] {
        &self.levels
    }

    /// `|P_1|, …, |P_m|`.
    pub fn sizes(&self) -> Vec<usize> {
        self.levels.iter().map(PartitionLevel::len).collect()
    }

    /// Index into level `level - 1` of the parent of `cell`.
    pub fn parent_of(&self, level: u32, cell: usize) -> usize {
        self.parents[(level - 2) as usize][cell]
    }

    /// Cell index at `level` of every point.
    pub fn point_cells(&self, level: u32) -> Vec<usize> {
        let mut cells = self.point_cells.clone();
        for l in (level + 1..=self.depth()).rev() {
            let up = &self.parents[(l - 2) as usize];
            cells.iter_mut().for_each(|c| *c = up[*c]);
        }
        cells
    }

    /// Ancestor at `coarse` of each cell of level `fine`.
    pub fn ancestor_map(&self, fine: u32, coarse: u32) -> Vec<usize> {
        assert!(coarse <= fine && fine <= self.depth());
        let mut map: Vec<usize> = (0..self.level(fine).len()).collect();
        for l in (coarse + 1..=fine).rev() {
            let up = &self.parents[(l - 2) as usize];
            map.iter_mut().for_each(|c| *c = up[*c]);
        }
        map
    }

    /// Expresses per-cell labels of level `from` on the cells of the thinner level `to`.
    pub fn lift_labels(&self, from: u32, labels: &[usize], to: u32) -> Vec<usize> {
        self.ancestor_map(to, from).iter().map(|&c| labels[c]).collect()
    }

    /// Expresses per-cell labels of `level` on the points of the dataset.
    pub fn labels_to_points(&self, level: u32, labels: &[usize]) -> Vec<usize> {
        self.point_cells(level).iter().map(|&c| labels[c]).collect()
    }
}

/// Builds the finest level from the data, then coarsens backward.
pub fn build_sequence(dataset: &Dataset, depth: u32) -> Result<PartitionSequence> {
    check_level(depth)?;
    let bbox = bounding_box(dataset);
    let finest = build_finest(dataset, &bbox, depth)?;
    let mut levels = vec![finest.level];
    while levels.last().map(|l| l.level()).unwrap_or(1) > 1 {
        let parent = coarsen(levels.last().expect("nonempty"))?;
        levels.push(parent);
    }
    levels.reverse();

    let parents = levels
        .windows(2)
        .map(|pair| {
            let (coarse, fine) = (&pair[0], &pair[1]);
            (0..fine.len())
                .map(|c| {
                    let key: Vec<u32> = fine.cell_coords(c).iter().map(|x| x >> 1).collect();
                    coarse.locate(&key).expect("parent cell exists")
                })
                .collect()
        })
        .collect();
    Ok(PartitionSequence {
        bbox,
        levels,
        parents,
        point_cells: finest.point_cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn square4() -> BoundingBox {
        BoundingBox {
            min: vec![0.0, 0.0],
            max: vec![4.0, 4.0],
        }
    }

    #[test]
    fn bounding_box_cases() {
        let d = Dataset::from_rows(&[[0.0, 0.0], [2.0, 4.0]]).unwrap();
        let b = bounding_box(&d);
        assert_eq!(b.min, vec![0.0, 0.0]);
        assert_eq!(b.max, vec![2.0, 4.0]);
        let d = Dataset::from_rows(&[[1.5, -2.0]]).unwrap();
        let b = bounding_box(&d);
        assert_eq!(b.min, b.max);
        assert_eq!(b.min, vec![1.5, -2.0]);
    }

    #[test]
    fn cell_index_cases() {
        let b = square4();
        assert_eq!(cell_index(&[3.5, 0.5], &b, 1).unwrap().coords, vec![1, 0]);
        assert_eq!(cell_index(&[4.0, 4.0], &b, 1).unwrap().coords, vec![1, 1]);
        assert_eq!(cell_index(&[1.0, 2.0], &b, 2).unwrap().coords, vec![1, 2]);
    }

    #[test]
    fn cell_index_rejects_outside_points() {
        assert!(cell_index(&[4.5, 0.0], &square4(), 1).is_err());
        assert!(cell_index(&[1.0, 1.0], &square4(), 0).is_err());
    }

    #[test]
    fn degenerate_axis_collapses() {
        let b = BoundingBox {
            min: vec![0.0, 3.0],
            max: vec![4.0, 3.0],
        };
        assert_eq!(cell_index(&[2.5, 3.0], &b, 3).unwrap().coords, vec![5, 0]);
    }

    #[test]
    fn build_finest_cases() {
        let d = Dataset::from_rows(&[[0.0, 0.0], [4.0, 0.0], [0.0, 4.0]]).unwrap();
        let f = build_finest(&d, &bounding_box(&d), 1).unwrap();
        assert_eq!(f.level.len(), 3);
        assert!(f.level.representatives().weights().iter().all(|&w| w == 1));

        let d = Dataset::from_rows(&[[1.0, 2.0]; 7]).unwrap();
        let f = build_finest(&d, &bounding_box(&d), 4).unwrap();
        assert_eq!(f.level.len(), 1);
        assert_eq!(f.level.representatives().get(0).weight, 7);
        assert_eq!(f.level.representatives().mean(0), &[1.0, 2.0]);
    }

    #[test]
    fn coarsen_cases() {
        // level-2 cells (0,0) and (1,1) share the level-1 parent (0,0)
        let child = PartitionLevel::from_parts(2, 2, vec![0, 0, 1, 1], vec![2, 2], vec![0.0, 0.0, 4.0, 4.0]);
        let parent = coarsen(&child).unwrap();
        assert_eq!(parent.len(), 1);
        assert_eq!(parent.cell_coords(0), &[0, 0]);
        assert_eq!(parent.representatives().get(0).weight, 4);
        assert_eq!(parent.representatives().mean(0), &[1.0, 1.0]);

        let level1 = PartitionLevel::from_parts(1, 2, vec![0, 0, 1, 1], vec![2, 2], vec![0.0, 0.0, 4.0, 4.0]);
        assert!(coarsen(&level1).is_err());
    }

    #[test]
    fn single_level_sequence() {
        let d = Dataset::from_rows(&[[0.0, 0.0], [1.0, 1.0], [0.2, 0.9], [0.7, 0.1], [0.5, 0.5]]).unwrap();
        let seq = build_sequence(&d, 1).unwrap();
        assert_eq!(seq.depth(), 1);
        assert!(seq.level(1).len() <= 4);
    }

    #[test]
    fn sequence_is_nested_and_consistent() {
        let d = Dataset::from_rows(&[
            [0.1, 0.2],
            [0.9, 0.8],
            [0.4, 0.4],
            [0.45, 0.41],
            [0.0, 1.0],
            [1.0, 0.0],
            [0.3, 0.7],
        ])
        .unwrap();
        let seq = build_sequence(&d, 4).unwrap();
        for l in 2..=4 {
            let fine = seq.level(l);
            let coarse = seq.level(l - 1);
            for p in 0..coarse.len() {
                let kids: Vec<usize> = (0..fine.len()).filter(|&c| seq.parent_of(l, c) == p).collect();
                let w: u64 = kids.iter().map(|&c| fine.representatives().weights()[c]).sum();
                assert_eq!(w, coarse.representatives().weights()[p]);
                for axis in 0..2 {
                    let m: f64 = kids
                        .iter()
                        .map(|&c| fine.representatives().weights()[c] as f64 * fine.representatives().mean(c)[axis])
                        .sum::<f64>()
                        / w as f64;
                    assert!((m - coarse.representatives().mean(p)[axis]).abs() < 1e-12);
                }
            }
        }
        // cell lookup per point agrees with direct indexing at every level
        for l in 1..=4 {
            let cells = seq.point_cells(l);
            for (i, row) in d.rows().enumerate() {
                let direct = cell_index(row, seq.bounding_box(), l).unwrap();
                assert_eq!(seq.level(l).cell_coords(cells[i]), direct.coords.as_slice());
            }
        }
    }

    proptest! {
        #[test]
        fn levels_preserve_totals_and_bound(
            pts in prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 3), 1..120),
            depth in 1u32..6,
        ) {
            let d = Dataset::from_rows(&pts).unwrap();
            let seq = build_sequence(&d, depth).unwrap();
            let mean = d.mean();
            let norm = mean.iter().map(|x| x * x).sum::<f64>().sqrt();
            for (i, level) in seq.levels().iter().enumerate() {
                let i = i as u32 + 1;
                prop_assert_eq!(level.total_weight(), d.len() as u64);
                let bound = (d.len() as u64).min(1u64 << (3 * i));
                prop_assert!(level.len() as u64 <= bound);
                let wm = level.representatives().weighted_mean();
                let err = wm.iter().zip(&mean).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                prop_assert!(err <= 1e-12 * (1.0 + norm));
            }
        }
    }
}
