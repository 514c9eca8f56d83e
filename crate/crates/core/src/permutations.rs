//! Permutations, d-permutations and d-pattern containment.
//!
//! A d-permutation of order `n` is a `(d+1)`-dimensional 0/1 array in which
//! every line contains exactly one 1; it is stored sparsely as the `n^d`
//! index vectors of its 1-cells. A d-pattern of order `k` is a tuple of `d`
//! permutations of `[k]`.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::output::Json;
use crate::{Error, Result};

/// A bijection `sigma` of `[l]`, stored as `sigma(1), ..., sigma(l)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(values: Vec<usize>) -> Result<Self> {
        let n = values.len();
        let mut seen = vec![false; n + 1];
        for &v in &values {
            if v == 0 || v > n || seen[v] {
                return Err(Error::InvalidPermutation(format!(
                    "{values:?} is not a permutation of [1, {n}]"
                )));
            }
            seen[v] = true;
        }
        Ok(Permutation(values))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((1..=n).collect())
    }

    pub fn reverse(n: usize) -> Self {
        Permutation((1..=n).rev().collect())
    }

    /// Digit string for orders up to 9 (`"2413"`), otherwise comma-separated.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let values = if text.contains(',') {
            text.split(',')
                .map(|p| {
                    p.trim()
                        .parse::<usize>()
                        .map_err(|e| Error::Parse(e.to_string()))
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            text.chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|d| d as usize)
                        .ok_or_else(|| Error::Parse(format!("bad permutation character {c:?}")))
                })
                .collect::<Result<Vec<_>>>()?
        };
        Permutation::new(values)
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }
}

impl std::fmt::Display for Permutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sep = if self.order() > 9 { "," } else { "" };
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join(sep))
    }
}

/// All permutations of `[k]` in lexicographic order.
pub fn all_permutations(k: usize) -> Vec<Permutation> {
    let mut current: Vec<usize> = (1..=k).collect();
    let mut out = vec![Permutation(current.clone())];
    loop {
        let Some(i) = (1..current.len())
            .rev()
            .find(|&i| current[i - 1] < current[i])
        else {
            return out;
        };
        let j = (i..current.len())
            .rev()
            .find(|&j| current[j] > current[i - 1])
            .expect("pivot");
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(Permutation(current.clone()));
    }
}

/// Whether some `i_1 < ... < i_k` gives `sigma(i_a) < sigma(i_b)` exactly
/// when `tau(a) < tau(b)`.
pub fn permutation_contains(sigma: &Permutation, tau: &Permutation) -> bool {
    let points: Vec<Vec<usize>> = sigma.values().iter().map(|&v| vec![v]).collect();
    PatternSearch::new(&points, sigma.order(), &[tau]).run()
}

/// Backtracking over points sorted by strictly increasing first coordinate.
/// `points[p]` holds the remaining coordinates of point `p`; a point can only
/// follow another with a strictly larger first coordinate, which the caller
/// encodes through `first`.
struct PatternSearch<'a> {
    points: &'a [Vec<usize>],
    first: Option<&'a [usize]>,
    perms: Vec<&'a [usize]>,
    k: usize,
    n: usize,
    chosen: Vec<usize>,
}

impl<'a> PatternSearch<'a> {
    /// `n` bounds every coordinate value from above.
    fn new(points: &'a [Vec<usize>], n: usize, perms: &[&'a Permutation]) -> Self {
        let k = perms.first().map_or(0, |p| p.order());
        PatternSearch {
            points,
            first: None,
            perms: perms.iter().map(|p| p.values()).collect(),
            k,
            n,
            chosen: Vec::with_capacity(k),
        }
    }

    fn with_first(mut self, first: &'a [usize]) -> Self {
        self.first = Some(first);
        self
    }

    fn run(&mut self) -> bool {
        if self.k == 0 {
            return true;
        }
        self.extend(0)
    }

    fn consistent(&self, candidate: usize) -> bool {
        let t = self.chosen.len();
        let point = &self.points[candidate];
        self.chosen.iter().enumerate().all(|(s, &prev)| {
            let other = &self.points[prev];
            self.perms.iter().enumerate().all(|(l, perm)| {
                let (x_s, x_t) = (other[l], point[l]);
                (x_s < x_t) == (perm[s] < perm[t]) && (x_t < x_s) == (perm[t] < perm[s])
            })
        })
    }

    /// In coordinate `l` the candidate must be the `perm[t]`-th smallest of
    /// `k` distinct values from `[1, n]`.
    fn rank_feasible(&self, candidate: usize) -> bool {
        let t = self.chosen.len();
        let point = &self.points[candidate];
        self.perms.iter().enumerate().all(|(l, perm)| {
            let rank = perm[t];
            point[l] >= rank && point[l] + self.k <= self.n + rank
        })
    }

    fn extend(&mut self, start: usize) -> bool {
        let t = self.chosen.len();
        if t == self.k {
            return true;
        }
        let remaining = self.k - t;
        if self.points.len() < start + remaining {
            return false;
        }
        for candidate in start..=self.points.len() - remaining {
            if let (Some(first), Some(&prev)) = (self.first, self.chosen.last()) {
                if first[candidate] <= first[prev] {
                    continue;
                }
            }
            if !self.rank_feasible(candidate) || !self.consistent(candidate) {
                continue;
            }
            self.chosen.push(candidate);
            if self.extend(candidate + 1) {
                return true;
            }
            self.chosen.pop();
        }
        false
    }
}

/// Sparse d-permutation: the 1-cells of a `(d+1)`-array of order `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DPermutation {
    d: usize,
    n: usize,
    /// Sorted lexicographically, hence by first coordinate.
    support: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DPermutationFile {
    d: usize,
    n: usize,
    support: Vec<Vec<usize>>,
}

impl DPermutation {
    /// Validates that every line of the `(d+1)`-array holds exactly one 1.
    pub fn new(d: usize, n: usize, mut support: Vec<Vec<usize>>) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::InvalidDPermutation(
                "d and n must be at least 1".into(),
            ));
        }
        for v in &support {
            if v.len() != d + 1 || v.iter().any(|&c| c == 0 || c > n) {
                return Err(Error::InvalidDPermutation(format!(
                    "support vector {v:?} is not in [1, {n}]^{}",
                    d + 1
                )));
            }
        }
        support.sort();
        if let Some(w) = support.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidDPermutation(format!(
                "duplicate support vector {:?}",
                w[0]
            )));
        }
        for axis in 0..=d {
            let mut lines: HashSet<Vec<usize>> = HashSet::with_capacity(support.len());
            for v in &support {
                let fixed = without(v, axis);
                if !lines.insert(fixed.clone()) {
                    return Err(Error::LineViolation {
                        axis: axis + 1,
                        fixed,
                        count: support
                            .iter()
                            .filter(|u| without(u, axis) == without(v, axis))
                            .count(),
                    });
                }
            }
            if let Some(empty) = first_missing_line(d, n, &lines) {
                return Err(Error::LineViolation {
                    axis: axis + 1,
                    fixed: empty,
                    count: 0,
                });
            }
        }
        Ok(DPermutation { d, n, support })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DPermutationFile = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("d-permutation JSON: {e}")))?;
        DPermutation::new(file.d, file.n, file.support)
    }

    pub fn to_json(&self) -> Json {
        Json::object()
            .field("d", self.d)
            .field("n", self.n)
            .field(
                "support",
                Json::Array(self.support.iter().map(|v| v.clone().into()).collect()),
            )
            .build()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &[Vec<usize>] {
        &self.support
    }
}

fn without(v: &[usize], axis: usize) -> Vec<usize> {
    v.iter()
        .enumerate()
        .filter(|&(i, _)| i != axis)
        .map(|(_, &c)| c)
        .collect()
}

/// First line fixing (in lexicographic order) not present in `lines`.
fn first_missing_line(d: usize, n: usize, lines: &HashSet<Vec<usize>>) -> Option<Vec<usize>> {
    if lines.len() == n.pow(d as u32) {
        return None;
    }
    let mut fixed = vec![1; d];
    loop {
        if !lines.contains(&fixed) {
            return Some(fixed);
        }
        let mut j = d;
        loop {
            if j == 0 {
                return None;
            }
            j -= 1;
            if fixed[j] < n {
                fixed[j] += 1;
                break;
            }
            fixed[j] = 1;
        }
    }
}

/// The permutation matrix `{(i, sigma(i))}` as a 1-permutation.
pub fn permutation_to_dpermutation(sigma: &Permutation) -> DPermutation {
    let support = sigma
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| vec![i + 1, v])
        .collect();
    DPermutation {
        d: 1,
        n: sigma.order(),
        support,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DPattern {
    perms: Vec<Permutation>,
}

impl DPattern {
    pub fn new(perms: Vec<Permutation>) -> Result<Self> {
        let Some(k) = perms.first().map(Permutation::order) else {
            return Err(Error::InvalidPermutation(
                "a d-pattern needs d >= 1 permutations".into(),
            ));
        };
        if perms.iter().any(|p| p.order() != k) {
            return Err(Error::InvalidPermutation(
                "pattern components differ in order".into(),
            ));
        }
        Ok(DPattern { perms })
    }

    /// Components separated by `;`, each in [`Permutation::parse`] format.
    pub fn parse(text: &str) -> Result<Self> {
        DPattern::new(
            text.split(';')
                .map(Permutation::parse)
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn monotone(d: usize, k: usize) -> Self {
        DPattern {
            perms: vec![Permutation::identity(k); d],
        }
    }

    pub fn order(&self) -> usize {
        self.perms[0].order()
    }

    pub fn d(&self) -> usize {
        self.perms.len()
    }

    pub fn components(&self) -> &[Permutation] {
        &self.perms
    }
}

impl std::fmt::Display for DPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.perms.iter().map(Permutation::to_string).collect();
        f.write_str(&parts.join(";"))
    }
}

/// Whether `k` support vectors of `m` with increasing first coordinates
/// realize each component order on the remaining coordinates.
pub fn dperm_contains_pattern(m: &DPermutation, pattern: &DPattern) -> Result<bool> {
    if pattern.d() != m.d {
        return Err(Error::Domain(format!(
            "pattern has d = {}, d-permutation has d = {}",
            pattern.d(),
            m.d
        )));
    }
    if pattern.order() > m.n {
        return Ok(false);
    }
    let first: Vec<usize> = m.support.iter().map(|v| v[0]).collect();
    let rest: Vec<Vec<usize>> = m.support.iter().map(|v| v[1..].to_vec()).collect();
    let perms: Vec<&Permutation> = pattern.perms.iter().collect();
    Ok(PatternSearch::new(&rest, m.n, &perms)
        .with_first(&first)
        .run())
}

/// Conjunction of containment over all `(k!)^d` patterns.
pub fn is_k_pattern_universal(m: &DPermutation, k: usize) -> Result<bool> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    let base = all_permutations_checked(k)?;
    let count = (base.len() as u64)
        .checked_pow(m.d as u32)
        .filter(|&c| c <= 1_000_000)
        .ok_or_else(|| Error::InstanceTooLarge(format!("({k}!)^{} patterns exceed 10^6", m.d)))?;
    let d = m.d;
    let base_len = base.len() as u64;
    let result = (0..count).into_par_iter().map(|mut code| {
        let mut perms = Vec::with_capacity(d);
        for _ in 0..d {
            perms.push(base[(code % base_len) as usize].clone());
            code /= base_len;
        }
        dperm_contains_pattern(m, &DPattern { perms })
    });
    let outcomes: Vec<Result<bool>> = result.collect();
    for outcome in outcomes {
        if !outcome? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn all_permutations_checked(k: usize) -> Result<Vec<Permutation>> {
    if k > 9 {
        return Err(Error::InstanceTooLarge(format!("{k}! permutations")));
    }
    Ok(all_permutations(k))
}

/// Longest chain of support vectors increasing in every coordinate.
pub fn longest_monotone_subsequence(m: &DPermutation) -> usize {
    if m.d == 1 {
        // One vector per first coordinate: classical LIS by patience sorting.
        let values: Vec<usize> = m.support.iter().map(|v| v[1]).collect();
        return longest_increasing(&values);
    }
    let s = &m.support;
    let mut best = vec![1usize; s.len()];
    for i in 0..s.len() {
        for j in 0..i {
            if best[j] + 1 > best[i] && s[j].iter().zip(&s[i]).all(|(a, b)| a < b) {
                best[i] = best[j] + 1;
            }
        }
    }
    best.into_iter().max().unwrap_or(0)
}

fn longest_increasing(values: &[usize]) -> usize {
    let mut tails: Vec<usize> = Vec::new();
    for &v in values {
        let pos = tails.partition_point(|&t| t < v);
        if pos == tails.len() {
            tails.push(v);
        } else {
            tails[pos] = v;
        }
    }
    tails.len()
}

/// Uniform permutation of `[n]` by Fisher-Yates shuffle.
pub fn sample_random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
    let mut values: Vec<usize> = (1..=n).collect();
    values.shuffle(rng);
    Permutation(values)
}
