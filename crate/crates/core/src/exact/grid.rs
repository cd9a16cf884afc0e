//! Score statistics over the whole sample space and tail sets built from them.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::foundation::pmf::ArmDistribution;
use crate::foundation::score::score_with_mle;
use crate::foundation::sum::CompensatedSum;
use crate::foundation::types::{DifferenceConstraint, Shape};
use crate::par;

/// Relative tolerance under which two score values are treated as tied.
///
/// Balanced designs produce many tables whose statistics coincide
/// mathematically but differ in the last bits after the MLE solve.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Which side of the observed statistic forms the tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    /// `z ≥ z_obs`
    Upper,
    /// `z ≤ z_obs`
    Lower,
}

impl Tail {
    /// Threshold that includes ties with `z_obs`.
    pub fn threshold(self, z_obs: f64) -> f64 {
        if z_obs.is_infinite() {
            return z_obs;
        }
        let tol = TIE_TOLERANCE * z_obs.abs().max(1.0);
        match self {
            Tail::Upper => z_obs - tol,
            Tail::Lower => z_obs + tol,
        }
    }

    #[inline]
    fn admits(self, z: f64, threshold: f64) -> bool {
        match self {
            Tail::Upper => z >= threshold,
            Tail::Lower => z <= threshold,
        }
    }
}

/// Score statistic `z(i, j; Δ)` and restricted MLE `P̃_T(i, j; Δ)` for every
/// table of a sample space, stored row-major with `i` the test-arm count.
#[derive(Debug, Clone)]
pub struct TableGrid {
    shape: Shape,
    delta: f64,
    z: Vec<f64>,
    p_test: Vec<f64>,
    /// Row `i` has `z` non-increasing in `j`.
    monotone: Vec<bool>,
}

impl TableGrid {
    pub fn new(shape: Shape, constraint: DifferenceConstraint) -> Self {
        let delta = constraint.delta();
        let (nt, nc) = (shape.n_test, shape.n_control);
        let rows = par::map_indices(shape.rows(), |i| {
            let i = i as u32;
            let mut z = Vec::with_capacity(shape.row_len());
            let mut p = Vec::with_capacity(shape.row_len());
            for j in 0..=nc {
                let (s, pt) = score_with_mle(i, nt, j, nc, delta);
                z.push(s.z);
                p.push(pt);
            }
            let monotone = z.windows(2).all(|w| w[1] <= w[0]);
            (z, p, monotone)
        });
        let mut z = Vec::with_capacity(shape.len());
        let mut p_test = Vec::with_capacity(shape.len());
        let mut monotone = Vec::with_capacity(shape.rows());
        for (rz, rp, m) in rows {
            z.extend(rz);
            p_test.extend(rp);
            monotone.push(m);
        }
        Self {
            shape,
            delta,
            z,
            p_test,
            monotone,
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    #[inline]
    fn index(&self, i: u32, j: u32) -> usize {
        i as usize * self.shape.row_len() + j as usize
    }

    #[inline]
    pub fn z(&self, i: u32, j: u32) -> f64 {
        self.z[self.index(i, j)]
    }

    /// Restricted MLE `(P̃_T, P̃_C)` of table `(i, j)`.
    #[inline]
    pub fn mle(&self, i: u32, j: u32) -> (f64, f64) {
        let pt = self.p_test[self.index(i, j)];
        (pt, (pt - self.delta).clamp(0.0, 1.0))
    }

    #[inline]
    pub(crate) fn row(&self, i: u32) -> &[f64] {
        let start = self.index(i, 0);
        &self.z[start..start + self.shape.row_len()]
    }

    pub fn row_is_monotone(&self, i: u32) -> bool {
        self.monotone[i as usize]
    }

    /// Number of rows in which `z` is not non-increasing in `j`.
    pub fn non_monotone_rows(&self) -> usize {
        self.monotone.iter().filter(|m| !**m).count()
    }

    /// All tables ordered by decreasing `z` (ties in row-major order).
    pub fn sort_order(&self) -> Vec<(u32, u32)> {
        let rl = self.shape.row_len();
        let mut idx: Vec<usize> = (0..self.z.len()).collect();
        idx.sort_by(|&a, &b| self.z[b].total_cmp(&self.z[a]).then(a.cmp(&b)));
        idx.into_iter().map(|k| ((k / rl) as u32, (k % rl) as u32)).collect()
    }

    /// Probability of `{(i, j): z(i, j) in tail of threshold}` under the given arm
    /// distributions.
    pub fn tail_mass(&self, tail: Tail, threshold: f64, test: &ArmDistribution, control: &ArmDistribution) -> f64 {
        let (lo, hi) = test.window();
        let (clo, chi) = control.window();
        let end = self.shape.n_control + 1;
        let mut acc = CompensatedSum::default();
        for i in lo..=hi {
            let bt = test.prob(i);
            if bt == 0.0 {
                continue;
            }
            let row = self.row(i);
            let m = if self.monotone[i as usize] {
                match tail {
                    Tail::Upper => control.range_mass(0, row.partition_point(|&z| z >= threshold) as u32),
                    Tail::Lower => control.range_mass(row.partition_point(|&z| z > threshold) as u32, end),
                }
            } else {
                let mut s = CompensatedSum::default();
                for j in clo..=chi {
                    if tail.admits(row[j as usize], threshold) {
                        s.add(control.prob(j));
                    }
                }
                s.value()
            };
            acc.add(bt * m);
        }
        acc.value()
    }

    /// The set of tables in the tail of `threshold`.
    pub fn tail_set(&self, tail: Tail, threshold: f64) -> TableSet {
        let end = self.shape.n_control + 1;
        let rows = (0..=self.shape.n_test)
            .map(|i| {
                let row = self.row(i);
                if self.monotone[i as usize] {
                    let run = match tail {
                        Tail::Upper => (0, row.partition_point(|&z| z >= threshold) as u32),
                        Tail::Lower => (row.partition_point(|&z| z > threshold) as u32, end),
                    };
                    RowSet::from_runs(vec![run])
                } else {
                    RowSet::from_flags(row.iter().map(|&z| tail.admits(z, threshold)))
                }
            })
            .collect();
        TableSet {
            shape: self.shape,
            rows,
        }
    }
}

/// Members of one row of the sample space as sorted, disjoint half-open runs of `j`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RowSet {
    runs: Vec<(u32, u32)>,
}

impl RowSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `{ j : j < k }`
    pub fn prefix(k: u32) -> Self {
        Self::from_runs(vec![(0, k)])
    }

    fn from_runs(runs: Vec<(u32, u32)>) -> Self {
        Self {
            runs: runs.into_iter().filter(|(a, b)| b > a).collect(),
        }
    }

    pub fn from_flags(flags: impl IntoIterator<Item = bool>) -> Self {
        let mut runs = Vec::new();
        let mut start = None;
        let mut j = 0u32;
        for f in flags {
            match (f, start) {
                (true, None) => start = Some(j),
                (false, Some(s)) => {
                    runs.push((s, j));
                    start = None;
                }
                _ => {}
            }
            j += 1;
        }
        if let Some(s) = start {
            runs.push((s, j));
        }
        Self { runs }
    }

    pub fn runs(&self) -> &[(u32, u32)] {
        &self.runs
    }

    pub fn contains(&self, j: u32) -> bool {
        self.runs.iter().any(|&(a, b)| a <= j && j < b)
    }

    pub fn len(&self) -> usize {
        self.runs.iter().map(|(a, b)| (b - a) as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Whether the row is `{ j : j < k }` for some `k`.
    pub fn is_prefix(&self) -> bool {
        self.runs.is_empty() || (self.runs.len() == 1 && self.runs[0].0 == 0)
    }

    fn mass(&self, control: &ArmDistribution) -> f64 {
        match self.runs.as_slice() {
            [] => 0.0,
            [(a, b)] => control.range_mass(*a, *b),
            runs => {
                let mut s = CompensatedSum::default();
                for &(a, b) in runs {
                    s.add(control.range_mass(a, b));
                }
                s.value()
            }
        }
    }
}

/// A subset of the sample space stored row by row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableSet {
    shape: Shape,
    rows: Vec<RowSet>,
}

impl TableSet {
    pub fn from_rows(shape: Shape, rows: Vec<RowSet>) -> Self {
        assert_eq!(rows.len(), shape.rows(), "one row set per test-arm count");
        Self { shape, rows }
    }

    pub fn empty(shape: Shape) -> Self {
        Self {
            shape,
            rows: vec![RowSet::empty(); shape.rows()],
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn row(&self, i: u32) -> &RowSet {
        &self.rows[i as usize]
    }

    pub fn rows(&self) -> &[RowSet] {
        &self.rows
    }

    pub fn contains(&self, i: u32, j: u32) -> bool {
        self.shape.contains(i, j) && self.rows[i as usize].contains(j)
    }

    /// Number of member tables.
    pub fn len(&self) -> usize {
        self.rows.iter().map(RowSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(RowSet::is_empty)
    }

    /// Probability of the set under independent arm distributions.
    pub fn mass(&self, test: &ArmDistribution, control: &ArmDistribution) -> f64 {
        let (lo, hi) = test.window();
        let mut acc = CompensatedSum::default();
        for i in lo..=hi {
            let bt = test.prob(i);
            if bt > 0.0 {
                acc.add(bt * self.rows[i as usize].mass(control));
            }
        }
        acc.value()
    }

    /// Member tables in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.runs.iter().flat_map(move |&(a, b)| (a..b).map(move |j| (i as u32, j))))
    }
}

/// Shared grids keyed by shape and constraint. Concurrent callers may build
/// the same grid twice; the first insert wins and both receive equal grids.
#[derive(Debug, Default)]
pub struct GridCache {
    map: Mutex<HashMap<(u32, u32, u64), Arc<TableGrid>>>,
}

impl GridCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_build(&self, shape: Shape, constraint: DifferenceConstraint) -> Arc<TableGrid> {
        let key = (shape.n_test, shape.n_control, constraint.delta().to_bits());
        if let Some(g) = self.map.lock().unwrap().get(&key) {
            return Arc::clone(g);
        }
        let grid = Arc::new(TableGrid::new(shape, constraint));
        Arc::clone(self.map.lock().unwrap().entry(key).or_insert(grid))
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        self.map.lock().unwrap().clear();
    }
}
