//! Greedy binary CART with donor-pool leaves.
//!
//! Categorical responses split on Gini impurity, integer responses on
//! variance. Categorical predictors with at most 8 observed levels get an
//! exhaustive subset search; wider predictors are ordered by mean response
//! encoding and scanned over contiguous partitions. Leaves keep the
//! training row indices so synthesis can draw donor values.

use crate::error::{Error, Result};
use crate::tabular::{Column, Dataset};

const EXHAUSTIVE_SUBSET_LIMIT: usize = 8;
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CartParams {
    pub min_leaf: usize,
    pub max_depth: usize,
}

impl Default for CartParams {
    fn default() -> Self {
        CartParams {
            min_leaf: 5,
            max_depth: 30,
        }
    }
}

/// One routed cell value: category index or optional integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellValue {
    Cat(u32),
    Int(Option<i64>),
}

#[derive(Debug, Clone)]
pub enum SplitTest {
    /// value <= threshold routes left; missing routes left.
    IntLe(i64),
    /// membership mask over the full category list; true routes left.
    CatIn(Vec<bool>),
}

impl SplitTest {
    fn goes_left(&self, value: CellValue) -> bool {
        match (self, value) {
            (SplitTest::IntLe(t), CellValue::Int(v)) => v.map_or(true, |x| x <= *t),
            (SplitTest::CatIn(mask), CellValue::Cat(i)) => {
                mask.get(i as usize).copied().unwrap_or(false)
            }
            _ => unreachable!("split test matched against wrong value kind"),
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Split {
        var: usize,
        test: SplitTest,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        rows: Vec<u32>,
    },
}

#[derive(Debug, Clone)]
pub struct CartModel {
    pub response: String,
    pub predictors: Vec<String>,
    predictor_idxs: Vec<usize>,
    root: Node,
    /// Set when the response had zero criterion gain everywhere at the root.
    pub response_constant: bool,
}

impl CartModel {
    /// Routes a record to its leaf donor pool. `lookup` supplies the value
    /// of a predictor by schema index.
    pub fn leaf_rows(&self, lookup: &dyn Fn(usize) -> CellValue) -> &[u32] {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { rows } => return rows,
                Node::Split {
                    var, test, left, right, ..
                } => {
                    node = if test.goes_left(lookup(*var)) {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn leaves(&self) -> Vec<&[u32]> {
        let mut out = Vec::new();
        let mut stack = vec![&self.root];
        while let Some(node) = stack.pop() {
            match node {
                Node::Leaf { rows } => out.push(rows.as_slice()),
                Node::Split { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        out
    }

    pub fn depth(&self) -> usize {
        fn rec(node: &Node) -> usize {
            match node {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + rec(left).max(rec(right)),
            }
        }
        rec(&self.root)
    }

    pub fn predictor_idxs(&self) -> &[usize] {
        &self.predictor_idxs
    }
}

/// Response encoding used for impurity computations.
enum ResponseValues {
    /// class index per row, plus class count
    Classes(Vec<u32>, usize),
    /// numeric value per row (missing encoded below the schema minimum)
    Numeric(Vec<f64>),
}

impl ResponseValues {
    fn from(ds: &Dataset, idx: usize) -> Self {
        match ds.column_at(idx) {
            Column::Cat(vals) => {
                let k = ds.schema().variables[idx].categories().len();
                ResponseValues::Classes(vals.clone(), k)
            }
            Column::Int(vals) => {
                let lo = ds.schema().variables[idx].min.unwrap();
                ResponseValues::Numeric(
                    vals.iter()
                        .map(|v| v.unwrap_or(lo - 1) as f64)
                        .collect(),
                )
            }
        }
    }
}

/// Sufficient statistics for one side of a candidate split.
#[derive(Clone)]
enum Stats {
    Classes { counts: Vec<u64>, n: u64 },
    Numeric { sum: f64, sumsq: f64, n: u64 },
}

impl Stats {
    fn empty(resp: &ResponseValues) -> Stats {
        match resp {
            ResponseValues::Classes(_, k) => Stats::Classes {
                counts: vec![0; *k],
                n: 0,
            },
            ResponseValues::Numeric(_) => Stats::Numeric {
                sum: 0.0,
                sumsq: 0.0,
                n: 0,
            },
        }
    }

    fn add_row(&mut self, resp: &ResponseValues, row: usize) {
        match (self, resp) {
            (Stats::Classes { counts, n }, ResponseValues::Classes(vals, _)) => {
                counts[vals[row] as usize] += 1;
                *n += 1;
            }
            (Stats::Numeric { sum, sumsq, n }, ResponseValues::Numeric(vals)) => {
                *sum += vals[row];
                *sumsq += vals[row] * vals[row];
                *n += 1;
            }
            _ => unreachable!(),
        }
    }

    fn merge(&mut self, other: &Stats) {
        match (self, other) {
            (Stats::Classes { counts, n }, Stats::Classes { counts: oc, n: on }) => {
                for (a, b) in counts.iter_mut().zip(oc) {
                    *a += b;
                }
                *n += on;
            }
            (
                Stats::Numeric { sum, sumsq, n },
                Stats::Numeric {
                    sum: os,
                    sumsq: osq,
                    n: on,
                },
            ) => {
                *sum += os;
                *sumsq += osq;
                *n += on;
            }
            _ => unreachable!(),
        }
    }

    fn subtract(&mut self, other: &Stats) {
        match (self, other) {
            (Stats::Classes { counts, n }, Stats::Classes { counts: oc, n: on }) => {
                for (a, b) in counts.iter_mut().zip(oc) {
                    *a -= b;
                }
                *n -= on;
            }
            (
                Stats::Numeric { sum, sumsq, n },
                Stats::Numeric {
                    sum: os,
                    sumsq: osq,
                    n: on,
                },
            ) => {
                *sum -= os;
                *sumsq -= osq;
                *n -= on;
            }
            _ => unreachable!(),
        }
    }

    fn n(&self) -> u64 {
        match self {
            Stats::Classes { n, .. } | Stats::Numeric { n, .. } => *n,
        }
    }

    /// Gini impurity or variance times n (so gains add up in counts).
    fn weighted_impurity(&self) -> f64 {
        match self {
            Stats::Classes { counts, n } => {
                if *n == 0 {
                    return 0.0;
                }
                let n_f = *n as f64;
                let sum_sq: f64 = counts.iter().map(|&c| (c as f64).powi(2)).sum();
                n_f * (1.0 - sum_sq / (n_f * n_f))
            }
            Stats::Numeric { sum, sumsq, n } => {
                if *n == 0 {
                    return 0.0;
                }
                (sumsq - sum * sum / *n as f64).max(0.0)
            }
        }
    }

    /// Scalar used to order categories for the contiguous-partition scan.
    fn encoding(&self) -> f64 {
        match self {
            Stats::Classes { counts, n } => {
                if *n == 0 {
                    0.0
                } else {
                    // share of the first class; any fixed class works as a
                    // one-dimensional ordering heuristic
                    counts[0] as f64 / *n as f64
                }
            }
            Stats::Numeric { sum, n, .. } => {
                if *n == 0 {
                    0.0
                } else {
                    sum / *n as f64
                }
            }
        }
    }
}

struct BestSplit {
    var: usize,
    test: SplitTest,
    gain: f64,
}

fn best_split_for_predictor(
    ds: &Dataset,
    resp: &ResponseValues,
    rows: &[u32],
    var: usize,
    parent: &Stats,
    min_leaf: usize,
) -> Option<BestSplit> {
    let parent_impurity = parent.weighted_impurity();
    match ds.column_at(var) {
        Column::Int(vals) => {
            let mut order: Vec<u32> = rows.to_vec();
            // missing sorts first so it always lands left of any threshold
            order.sort_by_key(|&r| vals[r as usize].unwrap_or(i64::MIN));
            let mut left = Stats::empty(resp);
            let mut right = parent.clone();
            let mut best: Option<(f64, i64)> = None;
            for w in 0..order.len().saturating_sub(1) {
                let r = order[w] as usize;
                left.add_row(resp, r);
                right.subtract(&{
                    let mut s = Stats::empty(resp);
                    s.add_row(resp, r);
                    s
                });
                let here = vals[r].unwrap_or(i64::MIN);
                let next = vals[order[w + 1] as usize].unwrap_or(i64::MIN);
                if here == next {
                    continue; // not a boundary between distinct values
                }
                if (left.n() as usize) < min_leaf || (right.n() as usize) < min_leaf {
                    continue;
                }
                let gain = parent_impurity - left.weighted_impurity() - right.weighted_impurity();
                if best.map_or(true, |(g, _)| gain > g) {
                    best = Some((gain, here));
                }
            }
            best.map(|(gain, t)| BestSplit {
                var,
                test: SplitTest::IntLe(t),
                gain,
            })
        }
        Column::Cat(vals) => {
            let k = ds.schema().variables[var].categories().len();
            let mut per_cat: Vec<Stats> = (0..k).map(|_| Stats::empty(resp)).collect();
            for &r in rows {
                per_cat[vals[r as usize] as usize].add_row(resp, r as usize);
            }
            let observed: Vec<usize> = (0..k).filter(|&c| per_cat[c].n() > 0).collect();
            if observed.len() < 2 {
                return None;
            }

            let eval = |left_cats: &[usize]| -> Option<f64> {
                let mut left = Stats::empty(resp);
                for &c in left_cats {
                    left.merge(&per_cat[c]);
                }
                let mut right = parent.clone();
                right.subtract(&left);
                if (left.n() as usize) < min_leaf || (right.n() as usize) < min_leaf {
                    return None;
                }
                Some(parent_impurity - left.weighted_impurity() - right.weighted_impurity())
            };

            let mut best: Option<(f64, Vec<usize>)> = None;
            if observed.len() <= EXHAUSTIVE_SUBSET_LIMIT {
                // subsets containing the first observed category, proper
                let rest = &observed[1..];
                for mask in 0..(1u32 << rest.len()) {
                    let mut left_cats = vec![observed[0]];
                    for (b, &c) in rest.iter().enumerate() {
                        if mask & (1 << b) != 0 {
                            left_cats.push(c);
                        }
                    }
                    if left_cats.len() == observed.len() {
                        continue;
                    }
                    if let Some(gain) = eval(&left_cats) {
                        if best.as_ref().map_or(true, |(g, _)| gain > *g) {
                            best = Some((gain, left_cats));
                        }
                    }
                }
            } else {
                let mut ordered = observed.clone();
                ordered.sort_by(|&a, &b| {
                    per_cat[a]
                        .encoding()
                        .partial_cmp(&per_cat[b].encoding())
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then(a.cmp(&b))
                });
                for cut in 1..ordered.len() {
                    let left_cats = &ordered[..cut];
                    if let Some(gain) = eval(left_cats) {
                        if best.as_ref().map_or(true, |(g, _)| gain > *g) {
                            best = Some((gain, left_cats.to_vec()));
                        }
                    }
                }
            }

            best.map(|(gain, left_cats)| {
                let mut mask = vec![false; k];
                for c in left_cats {
                    mask[c] = true;
                }
                BestSplit {
                    var,
                    test: SplitTest::CatIn(mask),
                    gain,
                }
            })
        }
    }
}

fn grow(
    ds: &Dataset,
    resp: &ResponseValues,
    rows: Vec<u32>,
    predictors: &[usize],
    params: &CartParams,
    depth: usize,
) -> Node {
    if depth >= params.max_depth || rows.len() < 2 * params.min_leaf {
        return Node::Leaf { rows };
    }
    let mut parent = Stats::empty(resp);
    for &r in &rows {
        parent.add_row(resp, r as usize);
    }
    if parent.weighted_impurity() <= MIN_GAIN {
        return Node::Leaf { rows }; // pure node
    }

    let mut best: Option<BestSplit> = None;
    for &var in predictors {
        if let Some(cand) =
            best_split_for_predictor(ds, resp, &rows, var, &parent, params.min_leaf)
        {
            if best.as_ref().map_or(true, |b| cand.gain > b.gain) {
                best = Some(cand);
            }
        }
    }
    let Some(split) = best else {
        return Node::Leaf { rows };
    };
    if split.gain <= MIN_GAIN {
        return Node::Leaf { rows };
    }

    let (left_rows, right_rows): (Vec<u32>, Vec<u32>) = rows.iter().partition(|&&r| {
        let value = match ds.column_at(split.var) {
            Column::Cat(vals) => CellValue::Cat(vals[r as usize]),
            Column::Int(vals) => CellValue::Int(vals[r as usize]),
        };
        split.test.goes_left(value)
    });
    let left = grow(ds, resp, left_rows, predictors, params, depth + 1);
    let right = grow(ds, resp, right_rows, predictors, params, depth + 1);
    Node::Split {
        var: split.var,
        test: split.test,
        left: Box::new(left),
        right: Box::new(right),
    }
}

/// Fits a tree of `response` on `predictors` over the full training data.
/// A constant response yields a flagged single-leaf model, not an error.
pub fn fit_cart(
    train: &Dataset,
    response: &str,
    predictors: &[&str],
    params: &CartParams,
) -> Result<CartModel> {
    assert!(params.min_leaf >= 1 && params.max_depth >= 1);
    if train.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let resp_idx = train.schema().var_index(response)?;
    let predictor_idxs: Vec<usize> = predictors
        .iter()
        .map(|p| train.schema().var_index(p))
        .collect::<Result<_>>()?;
    let resp = ResponseValues::from(train, resp_idx);
    let rows: Vec<u32> = (0..train.n_rows() as u32).collect();

    let mut parent = Stats::empty(&resp);
    for &r in &rows {
        parent.add_row(&resp, r as usize);
    }
    let response_constant = parent.weighted_impurity() <= MIN_GAIN;

    let root = if predictor_idxs.is_empty() || response_constant {
        Node::Leaf { rows }
    } else {
        grow(train, &resp, rows, &predictor_idxs, params, 0)
    };
    Ok(CartModel {
        response: response.to_string(),
        predictors: predictors.iter().map(|s| s.to_string()).collect(),
        predictor_idxs,
        root,
        response_constant,
    })
}

/// Checks the structural invariants of a fitted tree: leaf pools at least
/// `min_leaf` (unless the whole tree is one leaf), and the pools partition
/// the training rows.
pub fn check_leaf_integrity(model: &CartModel, n_train: usize, min_leaf: usize) -> bool {
    let leaves = model.leaves();
    let mut seen = vec![false; n_train];
    for rows in &leaves {
        if leaves.len() > 1 && rows.len() < min_leaf {
            return false;
        }
        for &r in *rows {
            if seen[r as usize] {
                return false; // row in two pools
            }
            seen[r as usize] = true;
        }
    }
    seen.into_iter().all(|s| s)
}
