//! d-dimensional arrays over `[q]`, subarray containment and universality.
//!
//! Cells are stored row-major (last coordinate fastest). All coordinates and
//! indices in the public API are 1-based.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::bounds::{counting_floor, lower_bound_fd, FdLowerBound};
use crate::output::Json;
use crate::random::{run_trials, ExperimentRecord, RandomSource};
use crate::words::{self, Alphabet};
use crate::{Error, Result, ENUMERATION_LIMIT};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shape(Vec<usize>);

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("dimension d must be at least 1".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidShape(format!("zero extent in {dims:?}")));
        }
        Ok(Shape(dims))
    }

    /// Shape `(n, ..., n)` with `d` coordinates.
    pub fn cube(d: usize, n: usize) -> Result<Self> {
        Shape::new(vec![n; d])
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn d(&self) -> usize {
        self.0.len()
    }

    pub fn cell_count(&self) -> usize {
        self.0.iter().product()
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.0.len()];
        for j in (0..self.0.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * self.0[j + 1];
        }
        strides
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DArray {
    alphabet: Alphabet,
    shape: Shape,
    cells: Vec<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ArrayFile {
    q: u32,
    shape: Vec<usize>,
    cells: Vec<u64>,
}

impl DArray {
    pub fn new(alphabet: Alphabet, shape: Shape, cells: Vec<u32>) -> Result<Self> {
        if cells.len() != shape.cell_count() {
            return Err(Error::InvalidArray(format!(
                "{} cells for shape {:?}",
                cells.len(),
                shape.dims()
            )));
        }
        if let Some(&bad) = cells.iter().find(|&&c| !alphabet.contains(c)) {
            return Err(Error::SymbolOutOfRange {
                symbol: u64::from(bad),
                q: alphabet.size(),
            });
        }
        Ok(DArray {
            alphabet,
            shape,
            cells,
        })
    }

    fn from_trusted(alphabet: Alphabet, shape: Shape, cells: Vec<u32>) -> Self {
        debug_assert_eq!(cells.len(), shape.cell_count());
        DArray {
            alphabet,
            shape,
            cells,
        }
    }

    /// A word viewed as a 1-array.
    pub fn from_word(word: &words::Word) -> Result<Self> {
        DArray::new(
            word.alphabet(),
            Shape::new(vec![word.len()])?,
            word.symbols().to_vec(),
        )
    }

    /// Parses `{"q": .., "shape": [..], "cells": [..]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ArrayFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("array JSON: {e}")))?;
        let alphabet = Alphabet::new(file.q)?;
        let cells = file
            .cells
            .into_iter()
            .map(|c| alphabet.check(c))
            .collect::<Result<Vec<_>>>()?;
        DArray::new(alphabet, Shape::new(file.shape)?, cells)
    }

    /// Parses a 2-array written as rows of digits (`q <= 9`); whitespace
    /// inside a row is ignored.
    pub fn from_grid(alphabet: Alphabet, text: &str) -> Result<Self> {
        if alphabet.size() > 9 {
            return Err(Error::Parse("text grids need q <= 9".into()));
        }
        let mut rows: Vec<Vec<u32>> = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let row = line
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| {
                    let digit = c
                        .to_digit(10)
                        .ok_or_else(|| Error::Parse(format!("bad grid character {c:?}")))?;
                    alphabet.check(u64::from(digit))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let width = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || width == 0 || rows.iter().any(|r| r.len() != width) {
            return Err(Error::Parse(
                "grid rows must be non-empty and equally long".into(),
            ));
        }
        let shape = Shape::new(vec![rows.len(), width])?;
        DArray::new(alphabet, shape, rows.concat())
    }

    /// JSON if the text starts with `{`, otherwise a digit grid over `[q]`.
    pub fn parse(text: &str, q: Option<u32>) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            DArray::from_json(text)
        } else {
            let q = q.ok_or_else(|| Error::Parse("grid input needs an alphabet size".into()))?;
            DArray::from_grid(Alphabet::new(q)?, text)
        }
    }

    pub fn to_json(&self) -> Json {
        Json::object()
            .field("q", self.alphabet.size())
            .field("shape", self.shape.dims().to_vec())
            .field("cells", self.cells.clone())
            .build()
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn d(&self) -> usize {
        self.shape.d()
    }

    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    /// Cell at a 1-based index vector.
    pub fn get(&self, index: &[usize]) -> Option<u32> {
        if index.len() != self.d() {
            return None;
        }
        let mut offset = 0;
        for ((&i, &n), stride) in index
            .iter()
            .zip(self.shape.dims())
            .zip(self.shape.strides())
        {
            if i == 0 || i > n {
                return None;
            }
            offset += (i - 1) * stride;
        }
        Some(self.cells[offset])
    }

    /// Deletes slice `index` along `coordinate`.
    pub fn coordinate_restrict(&self, coordinate: usize, index: usize) -> Result<DArray> {
        let d = self.d();
        if coordinate == 0 || coordinate > d {
            return Err(Error::InvalidSelection(format!(
                "coordinate {coordinate} outside [1, {d}]"
            )));
        }
        let j = coordinate - 1;
        let extent = self.shape.dims()[j];
        if index == 0 || index > extent {
            return Err(Error::InvalidSelection(format!(
                "index {index} outside [1, {extent}] on coordinate {coordinate}"
            )));
        }
        if extent == 1 {
            return Err(Error::DimensionCollapse { coordinate });
        }
        let mut sets: Vec<Vec<usize>> = self
            .shape
            .dims()
            .iter()
            .map(|&n| (1..=n).collect())
            .collect();
        sets[j].remove(index - 1);
        self.subarray(&IndexSelection::new(sets)?)
    }

    /// The subarray induced by `T_1 x ... x T_d`.
    pub fn subarray(&self, selection: &IndexSelection) -> Result<DArray> {
        selection.validate_for(&self.shape)?;
        let zero_based: Vec<Vec<usize>> = selection
            .sets
            .iter()
            .map(|s| s.iter().map(|i| i - 1).collect())
            .collect();
        let shape = Shape::new(zero_based.iter().map(Vec::len).collect())?;
        let cells = gather(self, &zero_based);
        Ok(DArray::from_trusted(self.alphabet, shape, cells))
    }
}

/// Cells of `a` on the product of 0-based index sets, row-major.
fn gather(a: &DArray, sets: &[Vec<usize>]) -> Vec<u32> {
    let strides = a.shape.strides();
    let mut offsets = vec![0usize];
    for (set, stride) in sets.iter().zip(&strides) {
        offsets = offsets
            .iter()
            .flat_map(|&base| set.iter().map(move |&i| base + i * stride))
            .collect();
    }
    offsets.into_iter().map(|o| a.cells[o]).collect()
}

/// Per-coordinate strictly increasing, non-empty, 1-based index sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSelection {
    sets: Vec<Vec<usize>>,
}

impl IndexSelection {
    pub fn new(sets: Vec<Vec<usize>>) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::InvalidSelection("no coordinates".into()));
        }
        for (j, set) in sets.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::InvalidSelection(format!(
                    "empty set on coordinate {}",
                    j + 1
                )));
            }
            if set[0] == 0 || set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidSelection(format!(
                    "coordinate {} set {set:?} is not strictly increasing in [1, n]",
                    j + 1
                )));
            }
        }
        Ok(IndexSelection { sets })
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    fn validate_for(&self, shape: &Shape) -> Result<()> {
        if self.sets.len() != shape.d() {
            return Err(Error::InvalidSelection(format!(
                "{} index sets for a {}-array",
                self.sets.len(),
                shape.d()
            )));
        }
        for (j, (set, &n)) in self.sets.iter().zip(shape.dims()).enumerate() {
            if set.last().is_some_and(|&i| i > n) {
                return Err(Error::InvalidSelection(format!(
                    "coordinate {} index exceeds extent {n}",
                    j + 1
                )));
            }
        }
        Ok(())
    }
}

/// Depth-first search for an embedding of `b` into `a`.
///
/// Coordinates `1..d-1` are assigned in order, each by enumerating index
/// sets in lexicographic order. Once they are fixed, every cell of `b` is
/// determined by its last index, so the last coordinate reduces to matching
/// the sequence of `b`'s last-axis slices against `a`'s as a subsequence;
/// the leftmost greedy match finds one iff any exists, and abandons the
/// branch at the first slice that cannot be placed.
struct Embedder<'a> {
    a: &'a DArray,
    b: &'a DArray,
    a_strides: Vec<usize>,
    b_strides: Vec<usize>,
    chosen: Vec<Vec<usize>>,
}

impl<'a> Embedder<'a> {
    fn new(a: &'a DArray, b: &'a DArray) -> Self {
        Embedder {
            a,
            b,
            a_strides: a.shape.strides(),
            b_strides: b.shape.strides(),
            chosen: vec![Vec::new(); a.d()],
        }
    }

    fn run(mut self) -> Option<Vec<Vec<usize>>> {
        if self.assign(0) {
            Some(self.chosen)
        } else {
            None
        }
    }

    fn assign(&mut self, j: usize) -> bool {
        let d = self.a.d();
        if j == d - 1 {
            return self.match_last();
        }
        self.extend(j, 0)
    }

    fn extend(&mut self, j: usize, start: usize) -> bool {
        let want = self.b.shape.dims()[j];
        let have = self.chosen[j].len();
        if have == want {
            return self.assign(j + 1);
        }
        let extent = self.a.shape.dims()[j];
        for i in start..=extent - (want - have) {
            self.chosen[j].push(i);
            if self.extend(j, i + 1) {
                return true;
            }
            self.chosen[j].pop();
        }
        false
    }

    fn match_last(&mut self) -> bool {
        let d = self.a.d();
        // Offsets of every fiber (fixed first d-1 indices) in a and b.
        let mut a_base = vec![0usize];
        let mut b_base = vec![0usize];
        for j in 0..d - 1 {
            let (sa, sb) = (self.a_strides[j], self.b_strides[j]);
            let set = &self.chosen[j];
            a_base = a_base
                .iter()
                .flat_map(|&o| set.iter().map(move |&i| o + i * sa))
                .collect();
            b_base = b_base
                .iter()
                .flat_map(|&o| (0..set.len()).map(move |t| o + t * sb))
                .collect();
        }
        let a_extent = self.a.shape.dims()[d - 1];
        let b_extent = self.b.shape.dims()[d - 1];
        let mut last = Vec::with_capacity(b_extent);
        let mut next = 0;
        for t in 0..b_extent {
            let remaining = b_extent - t;
            let found = (next..=a_extent - remaining).find(|&s| {
                a_base
                    .iter()
                    .zip(&b_base)
                    .all(|(&ao, &bo)| self.a.cells[ao + s] == self.b.cells[bo + t])
            });
            match found {
                Some(s) => {
                    last.push(s);
                    next = s + 1;
                }
                None => return false,
            }
        }
        self.chosen[d - 1] = last;
        true
    }
}

/// Lexicographically least selection inducing `b` in `a`, if any.
pub fn find_embedding_array(a: &DArray, b: &DArray) -> Option<IndexSelection> {
    if a.d() != b.d()
        || b.shape
            .dims()
            .iter()
            .zip(a.shape.dims())
            .any(|(m, n)| m > n)
    {
        return None;
    }
    Embedder::new(a, b).run().map(|sets| IndexSelection {
        sets: sets
            .into_iter()
            .map(|s| s.into_iter().map(|i| i + 1).collect())
            .collect(),
    })
}

pub fn contains_array(a: &DArray, b: &DArray) -> bool {
    if a.d() != b.d()
        || b.shape
            .dims()
            .iter()
            .zip(a.shape.dims())
            .any(|(m, n)| m > n)
    {
        return false;
    }
    Embedder::new(a, b).run().is_some()
}

/// All arrays of a shape over `[q]`, cells in lexicographic order.
pub struct AllArrays {
    alphabet: Alphabet,
    shape: Shape,
    current: Option<Vec<u32>>,
}

impl AllArrays {
    pub fn new(alphabet: Alphabet, shape: Shape) -> Self {
        let cells = vec![1; shape.cell_count()];
        AllArrays {
            alphabet,
            shape,
            current: Some(cells),
        }
    }
}

impl Iterator for AllArrays {
    type Item = DArray;

    fn next(&mut self) -> Option<DArray> {
        let current = self.current.as_mut()?;
        let out = DArray::from_trusted(self.alphabet, self.shape.clone(), current.clone());
        let q = self.alphabet.size();
        let mut advanced = false;
        for slot in current.iter_mut().rev() {
            if *slot < q {
                *slot += 1;
                advanced = true;
                break;
            }
            *slot = 1;
        }
        if !advanced {
            self.current = None;
        }
        Some(out)
    }
}

/// `base^exponent` if it fits in `u64`.
fn checked_power(base: u64, exponent: u64) -> Option<u64> {
    u32::try_from(exponent)
        .ok()
        .and_then(|e| base.checked_pow(e))
}

fn checked_binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 1..=k {
        acc = acc * u128::from(n - k + j) / u128::from(j);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}

/// How a universality question for order-`k` patterns in shape `shape`
/// will be answered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UniversalityPlan {
    /// Fewer selections than patterns (or `k` exceeds some extent).
    CountingImpossible,
    /// Collect the distinct induced subarrays of all selections.
    Selections {
        selections: u64,
        targets: Option<u64>,
    },
    /// Test every pattern for containment.
    Targets { targets: u64 },
}

pub fn universality_plan(q: u32, shape: &Shape, k: usize) -> Result<UniversalityPlan> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    let d = shape.d() as u64;
    let targets = u64::try_from(k)
        .ok()
        .and_then(|k| checked_power(k, d))
        .and_then(|cells| checked_power(u64::from(q), cells));
    let mut selections: Option<u64> = Some(1);
    for &n in shape.dims() {
        if k > n {
            return Ok(UniversalityPlan::CountingImpossible);
        }
        selections = selections
            .zip(checked_binomial(n as u64, k as u64))
            .and_then(|(acc, c)| acc.checked_mul(c));
    }
    match (selections, targets) {
        (Some(s), Some(t)) if s < t => Ok(UniversalityPlan::CountingImpossible),
        (Some(_), None) => Ok(UniversalityPlan::CountingImpossible),
        (Some(s), t) if s <= ENUMERATION_LIMIT => Ok(UniversalityPlan::Selections {
            selections: s,
            targets: t,
        }),
        (_, Some(t)) if t <= ENUMERATION_LIMIT => Ok(UniversalityPlan::Targets { targets: t }),
        _ => Err(Error::InstanceTooLarge(format!(
            "both C(n,{k})^{d} selections and {q}^({k}^{d}) patterns exceed {ENUMERATION_LIMIT}"
        ))),
    }
}

/// Whether `a` contains every array of order `k` over its alphabet.
pub fn is_k_universal_array(a: &DArray, k: usize) -> Result<bool> {
    match universality_plan(a.alphabet.size(), &a.shape, k)? {
        UniversalityPlan::CountingImpossible => Ok(false),
        UniversalityPlan::Selections { targets, .. } => {
            let targets = targets.expect("selections >= targets when planned");
            Ok(distinct_subarrays(a, k, Some(targets)) as u64 == targets)
        }
        UniversalityPlan::Targets { .. } => is_k_universal_array_by_targets(a, k),
    }
}

/// Number of distinct order-`k` subarrays of `a`, stopping early once
/// `stop_at` is reached.
fn distinct_subarrays(a: &DArray, k: usize, stop_at: Option<u64>) -> usize {
    let d = a.d();
    let combos: Vec<Vec<Vec<usize>>> = a.shape.dims().iter().map(|&n| combinations(n, k)).collect();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut choice = vec![0usize; d];
    loop {
        let sets: Vec<Vec<usize>> = (0..d).map(|j| combos[j][choice[j]].clone()).collect();
        // Key: shape prefix followed by row-major cells.
        let mut key: Vec<u32> = vec![k as u32; d];
        key.extend(gather(a, &sets));
        seen.insert(key);
        if stop_at.is_some_and(|t| seen.len() as u64 >= t) {
            return seen.len();
        }
        let mut j = d;
        loop {
            if j == 0 {
                return seen.len();
            }
            j -= 1;
            choice[j] += 1;
            if choice[j] < combos[j].len() {
                break;
            }
            choice[j] = 0;
        }
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=n - (k - cur.len()) {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(n, k, 0, &mut Vec::new(), &mut out);
    }
    out
}

/// Universality by testing containment of each of the `q^{k^d}` patterns.
pub fn is_k_universal_array_by_targets(a: &DArray, k: usize) -> Result<bool> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    let d = a.d() as u64;
    let feasible = checked_power(k as u64, d)
        .and_then(|cells| checked_power(u64::from(a.alphabet.size()), cells))
        .is_some_and(|t| t <= ENUMERATION_LIMIT);
    if !feasible {
        return Err(Error::InstanceTooLarge(format!(
            "{}^({k}^{d}) patterns",
            a.alphabet.size()
        )));
    }
    let shape = Shape::cube(a.d(), k)?;
    let patterns: Vec<DArray> = AllArrays::new(a.alphabet, shape).collect();
    Ok(patterns.par_iter().all(|b| contains_array(a, b)))
}

/// Progress of a long search, for callers that report to a terminal.
#[derive(Debug, Clone, Copy)]
pub struct SearchProgress {
    pub order: usize,
    pub examined: u64,
    pub total: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Enumerate every order-`n` array for `n = k, k+1, ...`; errors once an
    /// order needs more than `max_candidates` arrays.
    Exhaustive { max_candidates: u64 },
    /// Try `attempts_per_order` uniform arrays at each order from the counting
    /// floor up to `max_order`; the result is only an upper bound.
    Randomized {
        attempts_per_order: u64,
        max_order: usize,
        master_seed: u64,
    },
}

impl SearchMode {
    /// Exhaustive for `d = 2, q = 2, k <= 2`, randomized otherwise.
    pub fn default_for(d: usize, q: u32, k: usize, master_seed: u64) -> Self {
        if d == 2 && q == 2 && k <= 2 {
            SearchMode::Exhaustive {
                max_candidates: 1 << 16,
            }
        } else {
            SearchMode::Randomized {
                attempts_per_order: 200,
                max_order: 64,
                master_seed,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderSearch {
    pub order: usize,
    pub witness: DArray,
    /// True when minimality is proven.
    pub exact: bool,
    pub method: &'static str,
    pub counting_floor: u64,
    pub lower_bound: FdLowerBound,
    pub candidates_examined: u64,
}

impl OrderSearch {
    pub fn to_json(&self) -> Json {
        Json::object()
            .field("order", self.order)
            .field("exact", self.exact)
            .field("method", self.method)
            .field("counting_floor", self.counting_floor)
            .field("log_lower_bound", self.lower_bound.value.ln())
            .field("candidates_examined", self.candidates_examined)
            .field("witness", self.witness.to_json())
            .build()
    }
}

/// Smallest order with an exhibited k-universal d-array.
///
/// For `d = 1` the answer is `qk`, realized by `(12...q)^k`, and is returned
/// directly in randomized mode; exhaustive mode searches for every `d`.
pub fn minimal_universal_order(
    d: usize,
    alphabet: Alphabet,
    k: usize,
    mode: SearchMode,
    progress: &mut dyn FnMut(SearchProgress),
) -> Result<OrderSearch> {
    if d == 0 {
        return Err(Error::InvalidShape("dimension d must be at least 1".into()));
    }
    if k == 0 {
        return Err(Error::ZeroK);
    }
    let q = alphabet.size();
    let floor = counting_floor(d as u32, q, k as u64)?;
    let lower_bound = lower_bound_fd(d as u32, q, k as u64)?;
    let found = |order, witness, exact, method, examined| OrderSearch {
        order,
        witness,
        exact,
        method,
        counting_floor: floor,
        lower_bound,
        candidates_examined: examined,
    };
    match mode {
        SearchMode::Exhaustive { max_candidates } => {
            let mut examined = 0u64;
            for n in k.. {
                let cells = (n as u64).pow(d as u32);
                let total = checked_power(u64::from(q), cells)
                    .filter(|&t| t <= max_candidates)
                    .ok_or_else(|| {
                        Error::InstanceTooLarge(format!(
                            "exhaustive search at order {n} needs {q}^{cells} candidates (budget {max_candidates})"
                        ))
                    })?;
                let shape = Shape::cube(d, n)?;
                universality_plan(q, &shape, k)?;
                for (i, candidate) in AllArrays::new(alphabet, shape).enumerate() {
                    examined += 1;
                    if i % 4096 == 0 {
                        progress(SearchProgress {
                            order: n,
                            examined: i as u64,
                            total,
                        });
                    }
                    if is_k_universal_array(&candidate, k)? {
                        return Ok(found(n, candidate, true, "exhaustive", examined));
                    }
                }
            }
            unreachable!("the order loop only exits by returning")
        }
        SearchMode::Randomized { .. } if d == 1 => {
            let word = words::minimal_universal_word(alphabet, k);
            let witness = DArray::from_word(&word)?;
            Ok(found(
                q as usize * k,
                witness,
                true,
                "closed form (12...q)^k",
                0,
            ))
        }
        SearchMode::Randomized {
            attempts_per_order,
            max_order,
            master_seed,
        } => {
            let mut examined = 0u64;
            for n in floor as usize..=max_order {
                for attempt in 0..attempts_per_order {
                    examined += 1;
                    let stream = ((n as u64) << 32) | attempt;
                    let mut rng = RandomSource::new(master_seed, stream).rng();
                    let candidate = sample_uniform_array(d, alphabet, n, &mut rng)?;
                    if attempt % 64 == 0 {
                        progress(SearchProgress {
                            order: n,
                            examined: attempt,
                            total: attempts_per_order,
                        });
                    }
                    if is_k_universal_array(&candidate, k)? {
                        return Ok(found(
                            n,
                            candidate,
                            false,
                            "randomized upper bound",
                            examined,
                        ));
                    }
                }
            }
            Err(Error::Domain(format!(
                "no k-universal array found up to order {max_order}"
            )))
        }
    }
}

pub fn sample_uniform_array<R: Rng + ?Sized>(
    d: usize,
    alphabet: Alphabet,
    n: usize,
    rng: &mut R,
) -> Result<DArray> {
    let shape = Shape::cube(d, n)?;
    let q = alphabet.size();
    let cells = (0..shape.cell_count())
        .map(|_| rng.gen_range(1..=q))
        .collect();
    Ok(DArray::from_trusted(alphabet, shape, cells))
}

/// Monte Carlo estimate of `P[a uniform order-n d-array is k-universal]`.
pub fn estimate_array_universal_probability(
    d: usize,
    alphabet: Alphabet,
    k: usize,
    n: usize,
    trials: u64,
    master_seed: u64,
) -> Result<ExperimentRecord> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let shape = Shape::cube(d, n)?;
    let plan = universality_plan(alphabet.size(), &shape, k)?;
    let outcomes = run_trials(master_seed, trials, |rng| {
        if plan == UniversalityPlan::CountingImpossible {
            return Ok(false);
        }
        let a = sample_uniform_array(d, alphabet, n, rng)?;
        is_k_universal_array(&a, k)
    });
    let mut successes = 0;
    for outcome in outcomes {
        successes += u64::from(outcome?);
    }
    Ok(ExperimentRecord::from_counts(
        alphabet.size(),
        k,
        n,
        trials,
        successes,
        master_seed,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arr(q: u32, dims: &[usize], cells: &[u32]) -> DArray {
        DArray::new(
            Alphabet::new(q).unwrap(),
            Shape::new(dims.to_vec()).unwrap(),
            cells.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn restrict_examples() {
        let a = arr(4, &[2, 2], &[1, 2, 3, 4]);
        assert_eq!(
            a.coordinate_restrict(1, 1).unwrap(),
            arr(4, &[1, 2], &[3, 4])
        );
        assert_eq!(
            a.coordinate_restrict(2, 1).unwrap(),
            arr(4, &[2, 1], &[2, 4])
        );
        let w = arr(3, &[3], &[1, 2, 3]);
        assert_eq!(w.coordinate_restrict(1, 2).unwrap(), arr(3, &[2], &[1, 3]));
        let thin = arr(2, &[1, 2], &[1, 2]);
        assert_eq!(
            thin.coordinate_restrict(1, 1),
            Err(Error::DimensionCollapse { coordinate: 1 })
        );
        assert!(a.coordinate_restrict(3, 1).is_err());
        assert!(a.coordinate_restrict(1, 3).is_err());
    }

    #[test]
    fn subarray_examples() {
        let a = arr(4, &[2, 2], &[1, 2, 3, 4]);
        let full = IndexSelection::new(vec![vec![1, 2], vec![1, 2]]).unwrap();
        assert_eq!(a.subarray(&full).unwrap(), a);
        let single = IndexSelection::new(vec![vec![2], vec![1]]).unwrap();
        assert_eq!(a.subarray(&single).unwrap(), arr(4, &[1, 1], &[3]));
        let column = IndexSelection::new(vec![vec![1, 2], vec![2]]).unwrap();
        assert_eq!(a.subarray(&column).unwrap(), arr(4, &[2, 1], &[2, 4]));
        let out_of_range = IndexSelection::new(vec![vec![1, 3], vec![2]]).unwrap();
        assert!(a.subarray(&out_of_range).is_err());
        assert!(IndexSelection::new(vec![vec![2, 1]]).is_err());
        assert!(IndexSelection::new(vec![vec![]]).is_err());
        assert!(IndexSelection::new(vec![vec![0, 1]]).is_err());
    }

    #[test]
    fn containment_examples() {
        let a = arr(2, &[2, 2], &[1, 2, 2, 1]);
        assert!(contains_array(&a, &a));
        let ones = arr(2, &[3, 3], &[1; 9]);
        assert!(!contains_array(&ones, &arr(2, &[1, 2], &[1, 2])));
        let b = arr(2, &[2, 1], &[1, 2]);
        assert!(contains_array(&a, &b));
        let sel = find_embedding_array(&a, &b).unwrap();
        assert_eq!(sel.sets(), &[vec![1, 2], vec![1]]);
        assert_eq!(a.subarray(&sel).unwrap(), b);
        // too big, or wrong dimension
        assert!(!contains_array(&b, &a));
        assert!(!contains_array(&a, &arr(2, &[1], &[1])));
    }

    #[test]
    fn embedding_is_lexicographically_least() {
        let a = arr(2, &[3, 3], &[2, 1, 2, 1, 2, 1, 2, 1, 2]);
        let b = arr(2, &[1, 2], &[1, 2]);
        let sel = find_embedding_array(&a, &b).unwrap();
        assert_eq!(sel.sets(), &[vec![1], vec![2, 3]]);
        assert_eq!(find_embedding_array(&a, &arr(2, &[1, 3], &[1, 1, 1])), None);
    }

    #[test]
    fn universality_examples() {
        let square = arr(2, &[2, 2], &[1, 2, 2, 1]);
        assert!(!is_k_universal_array(&square, 2).unwrap());
        let unary = arr(1, &[2, 2], &[1; 4]);
        assert!(is_k_universal_array(&unary, 2).unwrap());
        assert!(is_k_universal_array(&arr(2, &[2, 2], &[1, 2, 1, 1]), 1).unwrap());
        assert!(!is_k_universal_array(&arr(2, &[2, 2], &[1, 1, 1, 1]), 1).unwrap());
        assert!(is_k_universal_array(&square, 0).is_err());
    }

    #[test]
    fn plans() {
        let a = Shape::cube(2, 3).unwrap();
        assert_eq!(
            universality_plan(2, &a, 2).unwrap(),
            UniversalityPlan::CountingImpossible
        );
        let b = Shape::cube(2, 4).unwrap();
        assert_eq!(
            universality_plan(2, &b, 2).unwrap(),
            UniversalityPlan::Selections {
                selections: 36,
                targets: Some(16)
            }
        );
        let huge = Shape::cube(2, 4000).unwrap();
        assert_eq!(
            universality_plan(2, &huge, 2).unwrap(),
            UniversalityPlan::Targets { targets: 16 }
        );
        assert!(matches!(
            universality_plan(2, &Shape::cube(2, 4000).unwrap(), 5),
            Err(Error::InstanceTooLarge(_))
        ));
        assert_eq!(
            universality_plan(2, &b, 5).unwrap(),
            UniversalityPlan::CountingImpossible
        );
    }

    #[test]
    fn minimal_order_small() {
        let two = Alphabet::new(2).unwrap();
        let exhaustive = SearchMode::Exhaustive {
            max_candidates: 1 << 16,
        };
        let r = minimal_universal_order(2, two, 1, exhaustive, &mut |_| {}).unwrap();
        assert_eq!(r.order, 2);
        assert!(r.exact);
        assert!(is_k_universal_array(&r.witness, 1).unwrap());

        let r = minimal_universal_order(1, two, 2, exhaustive, &mut |_| {}).unwrap();
        assert_eq!((r.order, r.exact), (4, true));

        let closed = SearchMode::default_for(1, 3, 3, 0);
        let r =
            minimal_universal_order(1, Alphabet::new(3).unwrap(), 3, closed, &mut |_| {}).unwrap();
        assert_eq!(r.order, 9);
        assert_eq!(r.witness.cells(), &[1, 2, 3, 1, 2, 3, 1, 2, 3]);

        let tiny = SearchMode::Exhaustive {
            max_candidates: 100,
        };
        assert!(matches!(
            minimal_universal_order(2, two, 2, tiny, &mut |_| {}),
            Err(Error::InstanceTooLarge(_))
        ));
    }

    #[test]
    fn randomized_search_flags_non_exact() {
        let two = Alphabet::new(2).unwrap();
        let mode = SearchMode::Randomized {
            attempts_per_order: 50,
            max_order: 8,
            master_seed: 3,
        };
        let r = minimal_universal_order(2, two, 2, mode, &mut |_| {}).unwrap();
        assert!(!r.exact);
        assert!(r.order as u64 >= r.counting_floor);
        assert!(is_k_universal_array(&r.witness, 2).unwrap());
    }

    #[test]
    fn sampling() {
        let one = Alphabet::new(1).unwrap();
        let mut rng = RandomSource::new(1, 0).rng();
        let a = sample_uniform_array(3, one, 3, &mut rng).unwrap();
        assert!(a.cells().iter().all(|&c| c == 1));
        let single = sample_uniform_array(2, Alphabet::new(5).unwrap(), 1, &mut rng).unwrap();
        assert_eq!(single.cells().len(), 1);
        let big = sample_uniform_array(2, Alphabet::new(4).unwrap(), 1000, &mut rng).unwrap();
        for s in 1..=4 {
            let f = big.cells().iter().filter(|&&c| c == s).count() as f64 / 1e6;
            assert!((f - 0.25).abs() < 0.003, "{s}: {f}");
        }
    }

    #[test]
    fn counting_floor_forces_zero() {
        let r = estimate_array_universal_probability(2, Alphabet::new(2).unwrap(), 2, 3, 200, 1)
            .unwrap();
        assert_eq!(r.successes, 0);
    }

    #[test]
    fn formats() {
        let a = DArray::parse(r#"{"q": 2, "shape": [2, 2], "cells": [1, 2, 2, 1]}"#, None).unwrap();
        assert_eq!(a, arr(2, &[2, 2], &[1, 2, 2, 1]));
        assert_eq!(DArray::parse("12\n21\n", Some(2)).unwrap(), a);
        assert_eq!(DArray::parse("1 2\n2 1", Some(2)).unwrap(), a);
        assert!(DArray::parse("12\n2", Some(2)).is_err());
        assert!(DArray::parse("13\n21", Some(2)).is_err());
        assert!(DArray::parse("12", None).is_err());
        assert!(DArray::from_json(r#"{"q": 2, "shape": [2], "cells": [1]}"#).is_err());
        assert!(DArray::from_json(r#"{"q": 2, "shape": [2], "cells": [1, 3]}"#).is_err());
        let round = DArray::from_json(&a.to_json().to_json_string()).unwrap();
        assert_eq!(round, a);
        assert_eq!(a.get(&[2, 1]), Some(2));
        assert_eq!(a.get(&[3, 1]), None);
    }

    #[test]
    fn combinations_lex() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(4, 2)[0], vec![0, 1]);
        assert_eq!(combinations(4, 2)[5], vec![2, 3]);
        assert!(combinations(2, 3).is_empty());
    }
}
