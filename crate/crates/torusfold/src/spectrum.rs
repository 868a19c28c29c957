//! Integer-arithmetic layer: multi-indices, box spectra, folding sequences,
//! the fold map, admissibility checks and brute-force injectivity oracles.
//!
//! A box spectrum with per-axis bounds `(a_1, ..., a_n)` is the set of
//! integer vectors with `|lambda_k| <= a_k`. A folding sequence
//! `(tau_1, ..., tau_n)` maps each such vector to the single integer
//! `sum_k tau_k * lambda_k`. Everything here is exact integer arithmetic;
//! fold values are carried in `i128` with checked operations so that a
//! wraparound can never fake or hide a collision.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default cap on box enumeration (number of lattice points).
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// An integer frequency vector `lambda` in `Z^n`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<i64>);

impl MultiIndex {
    /// Fails on an empty entry list; the length is fixed afterwards.
    pub fn new(entries: Vec<i64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty);
        }
        Ok(MultiIndex(entries))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    /// Componentwise sum; errors on length mismatch or overflow.
    pub fn add(&self, other: &MultiIndex) -> Result<MultiIndex> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        let entries = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_add(*b).ok_or(Error::Overflow("multi-index sum")))
            .collect::<Result<Vec<_>>>()?;
        MultiIndex::new(entries)
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Per-axis degree bounds `(a_1, ..., a_n)` defining a box spectrum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxSpec {
    bounds: Vec<u64>,
}

impl BoxSpec {
    pub fn new(bounds: Vec<u64>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::Empty);
        }
        Ok(BoxSpec { bounds })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[u64] {
        &self.bounds
    }

    /// Exact number of lattice points, `prod_k (2 a_k + 1)`.
    pub fn cardinality(&self) -> Result<u128> {
        let mut card: u128 = 1;
        for &a in &self.bounds {
            let side = 2 * a as u128 + 1;
            card = card
                .checked_mul(side)
                .ok_or(Error::Overflow("box cardinality"))?;
        }
        Ok(card)
    }

    /// True when `lambda` lies inside the box.
    pub fn contains(&self, lambda: &MultiIndex) -> bool {
        lambda.len() == self.dim()
            && lambda
                .entries()
                .iter()
                .zip(&self.bounds)
                .all(|(&l, &a)| l.unsigned_abs() <= a)
    }
}

/// A folding sequence `(tau_1, ..., tau_n)` of nonzero integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldingSeq {
    taus: Vec<i64>,
}

impl FoldingSeq {
    /// Rejects empty sequences and zero entries (a zero collapses an axis).
    pub fn new(taus: Vec<i64>) -> Result<Self> {
        if taus.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(index) = taus.iter().position(|&t| t == 0) {
            return Err(Error::ZeroTau { index });
        }
        Ok(FoldingSeq { taus })
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn taus(&self) -> &[i64] {
        &self.taus
    }
}

/// Outcome of the growth-condition check for a `(BoxSpec, FoldingSeq)` pair.
///
/// `growth_ok[k]` records whether `tau_{k+2} >= 3 a_{k+1} |tau_{k+1}|` in
/// 1-based paper indexing, i.e. entry `k` compares `taus[k]` with
/// `taus[k+1]` (0-based). `tail_sum` is
/// `sum_j a_j |tau_j| a_{j+1} / |tau_{j+1}|`, the quantity the isomorphism
/// constant depends on.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub growth_ok: Vec<bool>,
    pub tail_sum: f64,
    pub overall_ok: bool,
}

/// Exact integer dot product `sum_k tau_k * lambda_k` in `i128`.
pub fn fold(lambda: &MultiIndex, taus: &FoldingSeq) -> Result<i128> {
    if lambda.len() != taus.len() {
        return Err(Error::DimensionMismatch {
            expected: taus.len(),
            got: lambda.len(),
        });
    }
    let mut acc: i128 = 0;
    for (&l, &t) in lambda.entries().iter().zip(taus.taus()) {
        let term = (l as i128)
            .checked_mul(t as i128)
            .ok_or(Error::Overflow("fold term"))?;
        acc = acc.checked_add(term).ok_or(Error::Overflow("fold sum"))?;
    }
    Ok(acc)
}

/// Lexicographic iterator over the lattice points of a box.
#[derive(Debug)]
pub struct BoxIter {
    bounds: Vec<i64>,
    current: Option<Vec<i64>>,
}

impl Iterator for BoxIter {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        let current = self.current.as_mut()?;
        let item = MultiIndex(current.clone());
        // Odometer increment, last axis fastest.
        let mut axis = current.len();
        loop {
            if axis == 0 {
                self.current = None;
                break;
            }
            axis -= 1;
            if current[axis] < self.bounds[axis] {
                current[axis] += 1;
                break;
            }
            current[axis] = -self.bounds[axis];
        }
        Some(item)
    }
}

/// Yields every `lambda` with `|lambda_k| <= a_k` exactly once, in
/// lexicographic order, refusing boxes larger than `cap` points.
pub fn enumerate_box(spec: &BoxSpec, cap: u128) -> Result<BoxIter> {
    let cardinality = spec.cardinality()?;
    if cardinality > cap {
        return Err(Error::CapExceeded { cardinality, cap });
    }
    let bounds: Vec<i64> = spec.bounds().iter().map(|&a| a as i64).collect();
    let start: Vec<i64> = bounds.iter().map(|&a| -a).collect();
    Ok(BoxIter {
        bounds,
        current: Some(start),
    })
}

/// Growth flags and compensated tail sum for a `(spec, taus)` pair.
pub fn check_admissibility(spec: &BoxSpec, taus: &FoldingSeq) -> Result<AdmissibilityReport> {
    if spec.dim() != taus.len() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: taus.len(),
        });
    }
    let a = spec.bounds();
    let t = taus.taus();
    let n = t.len();

    let mut growth_ok = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n - 1 {
        // tau_{k+1} >= 3 a_k |tau_k|, exact in i128.
        let rhs = 3i128 * a[k] as i128 * (t[k] as i128).abs();
        growth_ok.push(t[k + 1] as i128 >= rhs);
    }

    // Kahan summation of a_j |tau_j| a_{j+1} / |tau_{j+1}|.
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for j in 0..n - 1 {
        let term = (a[j] as f64) * (t[j].unsigned_abs() as f64) * (a[j + 1] as f64)
            / (t[j + 1].unsigned_abs() as f64);
        let y = term - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }

    let overall_ok = growth_ok.iter().all(|&g| g);
    Ok(AdmissibilityReport {
        growth_ok,
        tail_sum: sum,
        overall_ok,
    })
}

/// All unordered pairs `lambda != mu` in the box with equal fold value.
///
/// An empty result certifies that the folded spectrum is in bijection with
/// the box. Pairs come out sorted, each pair with its lexicographically
/// smaller member first.
pub fn collision_scan(
    spec: &BoxSpec,
    taus: &FoldingSeq,
    cap: u128,
) -> Result<Vec<(MultiIndex, MultiIndex)>> {
    let folds = fold_table(spec, taus, cap)?;
    let mut tagged: Vec<(i128, MultiIndex)> = folds;
    tagged.par_sort_unstable();

    let mut pairs = Vec::new();
    let mut i = 0;
    while i < tagged.len() {
        let mut j = i + 1;
        while j < tagged.len() && tagged[j].0 == tagged[i].0 {
            j += 1;
        }
        for p in i..j {
            for q in p + 1..j {
                pairs.push((tagged[p].1.clone(), tagged[q].1.clone()));
            }
        }
        i = j;
    }
    pairs.sort();
    Ok(pairs)
}

/// Sorted, deduplicated image of the box under the fold map.
pub fn folded_spectrum(spec: &BoxSpec, taus: &FoldingSeq, cap: u128) -> Result<Vec<i128>> {
    let folds = fold_table(spec, taus, cap)?;
    let mut values: Vec<i128> = folds.into_iter().map(|(b, _)| b).collect();
    values.par_sort_unstable();
    values.dedup();
    Ok(values)
}

fn fold_table(spec: &BoxSpec, taus: &FoldingSeq, cap: u128) -> Result<Vec<(i128, MultiIndex)>> {
    if spec.dim() != taus.len() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: taus.len(),
        });
    }
    let indices: Vec<MultiIndex> = enumerate_box(spec, cap)?.collect();
    indices
        .into_par_iter()
        .map(|lambda| fold(&lambda, taus).map(|beta| (beta, lambda)))
        .collect()
}

/// Constructs an admissible folding sequence whose tail sum stays below
/// `target_tail`.
///
/// Heuristic, not minimal: `tau_1 = 1` and each later entry is the smallest
/// integer meeting both the growth condition and an equal per-term split of
/// the tail budget. Equal split minimises the top entry over all budget
/// splits, which is what keeps the folded degree manageable.
pub fn suggest_tau(spec: &BoxSpec, target_tail: f64) -> Result<FoldingSeq> {
    if !(target_tail > 0.0) {
        return Err(Error::Config(format!(
            "target tail must be positive, got {target_tail}"
        )));
    }
    let a = spec.bounds();
    let n = spec.dim();
    let mut taus: Vec<i64> = Vec::with_capacity(n);
    taus.push(1);
    if n >= 2 {
        let budget = target_tail / (n - 1) as f64;
        for k in 0..n - 1 {
            let prev = taus[k] as i128;
            let growth = 3i128 * a[k] as i128 * prev.abs();
            // Smallest t with a_k |tau_k| a_{k+1} / t <= budget.
            let weight = a[k] as i128 * prev.abs() * a[k + 1] as i128;
            // Never shrink across a zero axis; a smaller tau after a large
            // one can fold injectively-checked boxes onto each other even
            // though the growth condition is vacuous there.
            let mut next = growth.max(prev.abs()).max(1);
            if weight > 0 {
                let mut tail_floor = (weight as f64 / budget).ceil() as i128;
                // f64 rounding guard: enforce the exact inequality.
                while (weight as f64) / (tail_floor as f64) > budget {
                    tail_floor += 1;
                }
                next = next.max(tail_floor);
            }
            let next = i64::try_from(next).map_err(|_| Error::Overflow("suggested tau"))?;
            taus.push(next);
        }
    }
    let seq = FoldingSeq::new(taus)?;
    debug_assert!(check_admissibility(spec, &seq)?.overall_ok);
    Ok(seq)
}
