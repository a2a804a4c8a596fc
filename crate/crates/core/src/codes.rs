//! Array geometries and erasure recoverability.
//!
//! A complete two-dimensional array has `n` parity stripes that pairwise
//! intersect in exactly one data disk. Each stripe holds one parity disk, so
//! the array has `n(n-1)/2` data disks and `n` parity disks. Over GF(2) the
//! parity-check structure has one row per stripe; the column of parity disk
//! `P_i` is the unit vector `e_i` and the column of data disk `D_ij` is
//! `e_i + e_j`. An erasure pattern is decodable exactly when its columns are
//! linearly independent.
//!
//! Group schemes (RAID-6 or triple-parity stripes) are treated as MDS codes:
//! a group survives as long as it has no more erasures than its parity count.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rng::{Lane, Stream};

/// Exact non-negative rational used for profile fractions.
pub type Fraction = Ratio<BigUint>;

/// Widest two-dimensional array supported: columns are packed in a `u128`.
pub const MAX_STRIPES: usize = 128;

/// Default ceiling on the number of subsets enumerated per profile level.
pub const DEFAULT_SUBSET_BUDGET: u128 = 30_000_000;

/// Organization of an array, before its positions are materialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layout {
    /// Complete two-dimensional array with `stripes` parity stripes.
    TwoD { stripes: usize },
    /// `groups` RAID-6 stripes of `disks_per_group` disks each.
    Raid6Groups { groups: usize, disks_per_group: usize },
    /// `groups` triple-parity stripes of `disks_per_group` disks each.
    TripleParityGroups { groups: usize, disks_per_group: usize },
}

impl Layout {
    /// Number of simultaneous failures always tolerated (`n_f`).
    pub fn tolerated(&self) -> usize {
        match self {
            Layout::TwoD { .. } | Layout::Raid6Groups { .. } => 2,
            Layout::TripleParityGroups { .. } => 3,
        }
    }

    /// Parity-disk equivalents per group; `None` for the two-dimensional layout.
    pub fn parity_per_group(&self) -> Option<usize> {
        match self {
            Layout::TwoD { .. } => None,
            Layout::Raid6Groups { .. } => Some(2),
            Layout::TripleParityGroups { .. } => Some(3),
        }
    }

    pub fn total_disks(&self) -> usize {
        match *self {
            Layout::TwoD { stripes: n } => n * (n + 1) / 2,
            Layout::Raid6Groups { groups, disks_per_group }
            | Layout::TripleParityGroups { groups, disks_per_group } => groups * disks_per_group,
        }
    }

    pub fn parity_disks(&self) -> usize {
        match *self {
            Layout::TwoD { stripes } => stripes,
            Layout::Raid6Groups { groups, .. } => 2 * groups,
            Layout::TripleParityGroups { groups, .. } => 3 * groups,
        }
    }

    pub fn data_disks(&self) -> usize {
        self.total_disks() - self.parity_disks()
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Layout::TwoD { stripes } => {
                if stripes < 3 {
                    return Err(Error::InvalidScheme(format!(
                        "a two-dimensional array needs at least 3 parity stripes, got {stripes}"
                    )));
                }
                if stripes > MAX_STRIPES {
                    return Err(Error::InvalidScheme(format!(
                        "at most {MAX_STRIPES} parity stripes are supported, got {stripes}"
                    )));
                }
            }
            Layout::Raid6Groups { groups, disks_per_group }
            | Layout::TripleParityGroups { groups, disks_per_group } => {
                let parity = self.parity_per_group().unwrap_or(0);
                if groups == 0 {
                    return Err(Error::InvalidScheme("group count must be at least 1".into()));
                }
                if disks_per_group <= parity {
                    return Err(Error::InvalidScheme(format!(
                        "groups with {parity} parity disks need more than {parity} disks, got {disks_per_group}"
                    )));
                }
                if groups.checked_mul(disks_per_group).is_none_or(|t| t > u32::MAX as usize) {
                    return Err(Error::InvalidScheme("array is too large".into()));
                }
            }
        }
        Ok(())
    }

    /// Materializes the position set.
    pub fn build(self) -> Result<ArrayScheme> {
        ArrayScheme::new(self)
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Layout::TwoD { stripes } => write!(f, "twod:{stripes}"),
            Layout::Raid6Groups { groups, disks_per_group } => {
                write!(f, "raid6:{groups}x{disks_per_group}")
            }
            Layout::TripleParityGroups { groups, disks_per_group } => {
                write!(f, "tp:{groups}x{disks_per_group}")
            }
        }
    }
}

impl FromStr for Layout {
    type Err = Error;

    /// Parses `twod:N`, `raid6:MxN` or `tp:MxN`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidScheme(format!("cannot parse scheme {s:?}; expected twod:N, raid6:MxN or tp:MxN"));
        let (kind, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let groups = |rest: &str| -> Result<(usize, usize)> {
            let (m, n) = rest.split_once(['x', 'X']).ok_or_else(bad)?;
            Ok((m.trim().parse().map_err(|_| bad())?, n.trim().parse().map_err(|_| bad())?))
        };
        let layout = match kind.trim().to_ascii_lowercase().as_str() {
            "twod" | "2d" => Layout::TwoD { stripes: rest.trim().parse().map_err(|_| bad())? },
            "raid6" => {
                let (groups, disks_per_group) = groups(rest)?;
                Layout::Raid6Groups { groups, disks_per_group }
            }
            "tp" | "triple" => {
                let (groups, disks_per_group) = groups(rest)?;
                Layout::TripleParityGroups { groups, disks_per_group }
            }
            _ => return Err(bad()),
        };
        Ok(layout)
    }
}

/// Logical slot of a disk inside an array.
///
/// Stripe indices of the two-dimensional layout are 1-based; group and slot
/// indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DiskPosition {
    /// Data disk at the intersection of stripes `i < j`.
    Data { i: usize, j: usize },
    /// Parity disk of stripe `i`.
    Parity { i: usize },
    GroupMember { group: usize, slot: usize },
}

impl DiskPosition {
    /// Data disk shared by stripes `a` and `b`, in either order.
    pub fn data(a: usize, b: usize) -> Self {
        DiskPosition::Data { i: a.min(b), j: a.max(b) }
    }

    pub fn parity(i: usize) -> Self {
        DiskPosition::Parity { i }
    }

    pub fn member(group: usize, slot: usize) -> Self {
        DiskPosition::GroupMember { group, slot }
    }
}

impl fmt::Display for DiskPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiskPosition::Data { i, j } => write!(f, "D{i},{j}"),
            DiskPosition::Parity { i } => write!(f, "P{i}"),
            DiskPosition::GroupMember { group, slot } => write!(f, "G{group}.{slot}"),
        }
    }
}

/// Set of unreadable positions, stored as sorted, distinct scheme indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ErasurePattern {
    indices: Vec<usize>,
}

impl ErasurePattern {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }
}

/// A materialized array: every position with its canonical index.
///
/// Two-dimensional positions are numbered data disks first, in
/// lexicographic `(i, j)` order, then parity disks `P_1..P_n`. Group
/// positions are numbered `group * n + slot`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayScheme {
    layout: Layout,
    positions: Vec<DiskPosition>,
    /// Parity-check column of each position (two-dimensional layout only).
    columns: Vec<u128>,
}

impl ArrayScheme {
    pub fn new(layout: Layout) -> Result<Self> {
        layout.validate()?;
        let mut positions = Vec::with_capacity(layout.total_disks());
        let mut columns = Vec::new();
        match layout {
            Layout::TwoD { stripes: n } => {
                columns.reserve(layout.total_disks());
                for i in 1..=n {
                    for j in (i + 1)..=n {
                        positions.push(DiskPosition::Data { i, j });
                        columns.push(unit(i) | unit(j));
                    }
                }
                for i in 1..=n {
                    positions.push(DiskPosition::Parity { i });
                    columns.push(unit(i));
                }
            }
            Layout::Raid6Groups { groups, disks_per_group }
            | Layout::TripleParityGroups { groups, disks_per_group } => {
                for group in 0..groups {
                    for slot in 0..disks_per_group {
                        positions.push(DiskPosition::GroupMember { group, slot });
                    }
                }
            }
        }
        Ok(ArrayScheme { layout, positions, columns })
    }

    pub fn two_d(stripes: usize) -> Result<Self> {
        Self::new(Layout::TwoD { stripes })
    }

    pub fn raid6(groups: usize, disks_per_group: usize) -> Result<Self> {
        Self::new(Layout::Raid6Groups { groups, disks_per_group })
    }

    pub fn triple_parity(groups: usize, disks_per_group: usize) -> Result<Self> {
        Self::new(Layout::TripleParityGroups { groups, disks_per_group })
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn positions(&self) -> &[DiskPosition] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn tolerated(&self) -> usize {
        self.layout.tolerated()
    }

    /// Canonical index of `position`, if it belongs to this scheme.
    pub fn index_of(&self, position: DiskPosition) -> Option<usize> {
        match (self.layout, position) {
            (Layout::TwoD { stripes: n }, DiskPosition::Data { i, j }) => {
                let (i, j) = (i.min(j), i.max(j));
                if i == 0 || i == j || j > n {
                    return None;
                }
                Some((i - 1) * n - (i - 1) * i / 2 + (j - i - 1))
            }
            (Layout::TwoD { stripes: n }, DiskPosition::Parity { i }) => {
                (1..=n).contains(&i).then(|| n * (n - 1) / 2 + i - 1)
            }
            (
                Layout::Raid6Groups { groups, disks_per_group }
                | Layout::TripleParityGroups { groups, disks_per_group },
                DiskPosition::GroupMember { group, slot },
            ) => (group < groups && slot < disks_per_group).then(|| group * disks_per_group + slot),
            _ => None,
        }
    }

    /// Builds an erasure pattern from positions; duplicates collapse.
    pub fn pattern<I>(&self, positions: I) -> Result<ErasurePattern>
    where
        I: IntoIterator<Item = DiskPosition>,
    {
        let mut indices = Vec::new();
        for p in positions {
            indices.push(self.index_of(p).ok_or_else(|| Error::UnknownPosition(format!("{p}")))?);
        }
        self.pattern_from_indices(indices)
    }

    pub fn pattern_from_indices<I>(&self, indices: I) -> Result<ErasurePattern>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::UnknownPosition(format!("#{bad}")));
        }
        indices.sort_unstable();
        indices.dedup();
        Ok(ErasurePattern { indices })
    }

    /// Group of the position at `index` (group schemes only).
    #[inline]
    pub fn group_of(&self, index: usize) -> Option<usize> {
        match self.layout {
            Layout::TwoD { .. } => None,
            Layout::Raid6Groups { disks_per_group, .. }
            | Layout::TripleParityGroups { disks_per_group, .. } => Some(index / disks_per_group),
        }
    }

    /// Parity-check column of the position at `index` (two-dimensional only).
    #[inline]
    pub fn column(&self, index: usize) -> Option<u128> {
        self.columns.get(index).copied()
    }

    /// The explicit parity-check structure; `None` for group schemes.
    pub fn parity_check(&self) -> Option<ParityCheckStructure> {
        match self.layout {
            Layout::TwoD { stripes } => Some(ParityCheckStructure::from_columns(stripes, &self.columns)),
            _ => None,
        }
    }

    /// Exact decodability of `erased`.
    pub fn is_recoverable(&self, erased: &ErasurePattern) -> bool {
        self.is_recoverable_indices(erased.indices())
    }

    /// Like [`is_recoverable`](Self::is_recoverable) on raw, distinct indices.
    pub fn is_recoverable_indices(&self, erased: &[usize]) -> bool {
        match self.layout {
            Layout::TwoD { .. } => {
                let mut basis = XorBasis::new();
                erased.iter().all(|&i| basis.insert(self.columns[i]))
            }
            Layout::Raid6Groups { groups, disks_per_group }
            | Layout::TripleParityGroups { groups, disks_per_group } => {
                let parity = self.layout.parity_per_group().unwrap_or(0);
                if erased.len() <= parity {
                    return true;
                }
                let mut counts = vec![0usize; groups];
                erased.iter().all(|&i| {
                    let c = &mut counts[i / disks_per_group];
                    *c += 1;
                    *c <= parity
                })
            }
        }
    }

    /// Iterative stripe peeling: repeatedly rebuild any stripe with exactly
    /// one erasure. Returns `None` for group schemes, where stripes are not
    /// single-parity.
    pub fn peeling_recovers(&self, erased: &ErasurePattern) -> Option<bool> {
        let Layout::TwoD { stripes } = self.layout else {
            return None;
        };
        let mut pending: Vec<u128> = erased.indices().iter().map(|&i| self.columns[i]).collect();
        loop {
            if pending.is_empty() {
                return Some(true);
            }
            let mut progressed = false;
            for stripe in 1..=stripes {
                let bit = unit(stripe);
                let mut hits = pending.iter().enumerate().filter(|(_, c)| *c & bit != 0);
                if let (Some((k, _)), None) = (hits.next(), hits.next()) {
                    pending.swap_remove(k);
                    progressed = true;
                }
            }
            if !progressed {
                return Some(false);
            }
        }
    }

    /// Number of `k`-subsets of positions that remain decodable.
    pub fn count_recoverable(&self, k: usize) -> u64 {
        (0..self.len()).map(|first| self.count_recoverable_from(k, first)).sum()
    }

    /// Number of decodable `k`-subsets whose smallest index is `first`.
    ///
    /// Summing over every `first` gives [`count_recoverable`](Self::count_recoverable);
    /// callers may spread the range over workers.
    pub fn count_recoverable_from(&self, k: usize, first: usize) -> u64 {
        let n = self.len();
        if k == 0 {
            return u64::from(first == 0);
        }
        if first >= n || n - first < k {
            return 0;
        }
        match self.layout {
            Layout::TwoD { .. } => {
                let mut basis = XorBasis::new();
                basis.insert(self.columns[first]);
                self.dfs_two_d(first + 1, k - 1, &mut basis)
            }
            Layout::Raid6Groups { groups, disks_per_group }
            | Layout::TripleParityGroups { groups, disks_per_group } => {
                let parity = self.layout.parity_per_group().unwrap_or(0);
                let mut counts = vec![0usize; groups];
                counts[first / disks_per_group] = 1;
                if parity == 0 {
                    return 0;
                }
                dfs_groups(n, disks_per_group, parity, first + 1, k - 1, &mut counts)
            }
        }
    }

    fn dfs_two_d(&self, start: usize, remaining: usize, basis: &mut XorBasis) -> u64 {
        if remaining == 0 {
            return 1;
        }
        let n = self.len();
        let mut total = 0;
        for idx in start..=(n - remaining) {
            if remaining == 1 {
                total += u64::from(basis.is_independent(self.columns[idx]));
            } else if basis.insert(self.columns[idx]) {
                total += self.dfs_two_d(idx + 1, remaining - 1, basis);
                basis.pop();
            }
        }
        total
    }

    /// Exhaustive survival profile; see [`survival_profile_with`](Self::survival_profile_with).
    pub fn survival_profile(&self) -> Result<SurvivalProfile> {
        self.survival_profile_with(&EnumerationBudget::default())
    }

    /// Fractions of `(n_f + j)`-failure patterns that are decodable, for
    /// `j = 1, 2, 3`. Levels whose subset count exceeds the budget are sampled
    /// when the budget allows it and rejected otherwise.
    pub fn survival_profile_with(&self, budget: &EnumerationBudget) -> Result<SurvivalProfile> {
        self.survival_profile_by(budget, |scheme, k| scheme.count_recoverable(k))
    }

    /// Profile computation with a caller-supplied exhaustive counter, used to
    /// parallelize [`count_recoverable_from`](Self::count_recoverable_from).
    pub fn survival_profile_by<F>(&self, budget: &EnumerationBudget, mut count: F) -> Result<SurvivalProfile>
    where
        F: FnMut(&ArrayScheme, usize) -> u64,
    {
        let size = self.len();
        let tolerated = self.tolerated();
        let mut exact: Vec<Fraction> = Vec::with_capacity(3);
        let mut sampled = [None; 3];
        for j in 1..=3 {
            let k = tolerated + j;
            let subsets = binomial_u128(size, k);
            if subsets == 0 {
                // fewer disks than the level: no such pattern can occur
                exact.push(Fraction::zero());
                continue;
            }
            if subsets <= budget.max_subsets {
                let ok = count(self, k);
                exact.push(Fraction::new(BigUint::from(ok), BigUint::from(subsets)));
            } else if let Some(plan) = budget.sampling {
                sampled[j - 1] = Some(self.sample_level(k, plan, j as u64));
                exact.push(Fraction::zero());
            } else {
                return Err(Error::BudgetExceeded { level: k, subsets, budget: budget.max_subsets });
            }
        }
        let mut fractions = [0.0; 3];
        let mut std_error = [0.0; 3];
        let mut any_sampled = false;
        for j in 0..3 {
            match sampled[j] {
                Some((est, se)) => {
                    fractions[j] = est;
                    std_error[j] = se;
                    any_sampled = true;
                }
                None => fractions[j] = exact[j].to_f64().unwrap_or(0.0),
            }
        }
        if any_sampled {
            // sampling noise can break monotonicity by a hair; clamp it
            fractions[1] = fractions[1].min(fractions[0]);
            fractions[2] = fractions[2].min(fractions[1]);
            SurvivalProfile::sampled(size, tolerated, fractions, std_error)
        } else {
            let exact: [Fraction; 3] = [exact[0].clone(), exact[1].clone(), exact[2].clone()];
            SurvivalProfile::exact(size, tolerated, exact)
        }
    }

    /// Simple random sampling of `k`-subsets; returns (estimate, standard error).
    fn sample_level(&self, k: usize, plan: SamplingPlan, level: u64) -> (f64, f64) {
        let mut stream = Stream::new(plan.seed, level, Lane::Survival);
        let mut subset = Vec::with_capacity(k);
        let mut hits = 0u64;
        let n = self.len() as u64;
        for _ in 0..plan.samples {
            // Floyd's algorithm for a uniform k-subset
            subset.clear();
            for j in (n - k as u64)..n {
                let t = stream.below(j + 1) as usize;
                if subset.contains(&t) {
                    subset.push(j as usize);
                } else {
                    subset.push(t);
                }
            }
            hits += u64::from(self.is_recoverable_indices(&subset));
        }
        let samples = plan.samples.max(1) as f64;
        let p = hits as f64 / samples;
        (p, libm::sqrt(p * (1.0 - p) / samples))
    }

    /// Incremental erasure tracker for this scheme.
    pub fn tracker(&self) -> ErasureTracker<'_> {
        ErasureTracker::new(self)
    }
}

fn dfs_groups(
    n: usize,
    per_group: usize,
    parity: usize,
    start: usize,
    remaining: usize,
    counts: &mut [usize],
) -> u64 {
    if remaining == 0 {
        return 1;
    }
    let mut total = 0;
    for idx in start..=(n - remaining) {
        let g = idx / per_group;
        if counts[g] == parity {
            continue;
        }
        counts[g] += 1;
        total += dfs_groups(n, per_group, parity, idx + 1, remaining - 1, counts);
        counts[g] -= 1;
    }
    total
}

#[inline]
fn unit(stripe: usize) -> u128 {
    1u128 << (stripe - 1)
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        let Some(m) = acc.checked_mul((n - i) as u128) else {
            return u128::MAX;
        };
        acc = m / (i as u128 + 1);
    }
    acc
}

/// Reduced GF(2) basis of packed columns, indexed by leading bit.
#[derive(Clone)]
pub struct XorBasis {
    by_lead: [u128; MAX_STRIPES],
    leads: Vec<u8>,
}

impl XorBasis {
    pub fn new() -> Self {
        XorBasis { by_lead: [0; MAX_STRIPES], leads: Vec::with_capacity(16) }
    }

    #[inline]
    fn reduce(&self, mut v: u128) -> u128 {
        while v != 0 {
            let lead = 127 - v.leading_zeros() as usize;
            let b = self.by_lead[lead];
            if b == 0 {
                return v;
            }
            v ^= b;
        }
        0
    }

    #[inline]
    pub fn is_independent(&self, v: u128) -> bool {
        self.reduce(v) != 0
    }

    /// Adds `v`; returns false (and leaves the basis unchanged) if `v` is
    /// already in the span.
    #[inline]
    pub fn insert(&mut self, v: u128) -> bool {
        let r = self.reduce(v);
        if r == 0 {
            return false;
        }
        let lead = 127 - r.leading_zeros() as usize;
        self.by_lead[lead] = r;
        self.leads.push(lead as u8);
        true
    }

    /// Removes the most recently inserted vector.
    #[inline]
    pub fn pop(&mut self) {
        if let Some(lead) = self.leads.pop() {
            self.by_lead[lead as usize] = 0;
        }
    }

    pub fn rank(&self) -> usize {
        self.leads.len()
    }

    pub fn clear(&mut self) {
        for &l in &self.leads {
            self.by_lead[l as usize] = 0;
        }
        self.leads.clear();
    }
}

impl Default for XorBasis {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Debug for XorBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("XorBasis").field("rank", &self.rank()).finish()
    }
}

/// Erased-set bookkeeping with an incremental recoverability verdict.
#[derive(Debug, Clone)]
pub struct ErasureTracker<'a> {
    scheme: &'a ArrayScheme,
    erased: Vec<usize>,
    basis: XorBasis,
    group_counts: Vec<usize>,
    overloaded_groups: usize,
    dependent: bool,
}

impl<'a> ErasureTracker<'a> {
    pub fn new(scheme: &'a ArrayScheme) -> Self {
        let groups = match scheme.layout {
            Layout::TwoD { .. } => 0,
            Layout::Raid6Groups { groups, .. } | Layout::TripleParityGroups { groups, .. } => groups,
        };
        ErasureTracker {
            scheme,
            erased: Vec::with_capacity(16),
            basis: XorBasis::new(),
            group_counts: vec![0; groups],
            overloaded_groups: 0,
            dependent: false,
        }
    }

    pub fn reset(&mut self) {
        self.erased.clear();
        self.basis.clear();
        self.group_counts.iter_mut().for_each(|c| *c = 0);
        self.overloaded_groups = 0;
        self.dependent = false;
    }

    pub fn len(&self) -> usize {
        self.erased.len()
    }

    pub fn is_empty(&self) -> bool {
        self.erased.is_empty()
    }

    pub fn erased(&self) -> &[usize] {
        &self.erased
    }

    pub fn is_erased(&self, index: usize) -> bool {
        self.erased.contains(&index)
    }

    /// Whether the current erased set is decodable.
    pub fn is_recoverable(&self) -> bool {
        !self.dependent && self.overloaded_groups == 0
    }

    /// Marks `index` erased and returns the new verdict. Erasing an already
    /// erased position changes nothing.
    pub fn erase(&mut self, index: usize) -> bool {
        if self.is_erased(index) {
            return self.is_recoverable();
        }
        self.erased.push(index);
        match self.scheme.group_of(index) {
            None => {
                if !self.dependent && !self.basis.insert(self.scheme.columns[index]) {
                    self.dependent = true;
                }
            }
            Some(g) => {
                let parity = self.scheme.layout.parity_per_group().unwrap_or(0);
                self.group_counts[g] += 1;
                if self.group_counts[g] == parity + 1 {
                    self.overloaded_groups += 1;
                }
            }
        }
        self.is_recoverable()
    }

    /// Clears `index` from the erased set (a rebuild finished).
    pub fn restore(&mut self, index: usize) {
        let Some(k) = self.erased.iter().position(|&e| e == index) else {
            return;
        };
        self.erased.swap_remove(k);
        match self.scheme.group_of(index) {
            None => {
                self.basis.clear();
                self.dependent = false;
                for &e in &self.erased {
                    if !self.basis.insert(self.scheme.columns[e]) {
                        self.dependent = true;
                        break;
                    }
                }
            }
            Some(g) => {
                let parity = self.scheme.layout.parity_per_group().unwrap_or(0);
                if self.group_counts[g] == parity + 1 {
                    self.overloaded_groups -= 1;
                }
                self.group_counts[g] -= 1;
            }
        }
    }
}

/// Fixed-width bit row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitRow {
    words: Vec<u64>,
    len: usize,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        BitRow { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, bit: usize) -> bool {
        bit < self.len && self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn set(&mut self, bit: usize) {
        assert!(bit < self.len, "bit {bit} out of range {}", self.len);
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

/// Row view of a two-dimensional array's parity checks: one row per stripe,
/// one bit per position in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckStructure {
    rows: Vec<BitRow>,
}

impl ParityCheckStructure {
    fn from_columns(stripes: usize, columns: &[u128]) -> Self {
        let mut rows = vec![BitRow::zeros(columns.len()); stripes];
        for (col, &mask) in columns.iter().enumerate() {
            for (r, row) in rows.iter_mut().enumerate() {
                if mask >> r & 1 == 1 {
                    row.set(col);
                }
            }
        }
        ParityCheckStructure { rows }
    }

    pub fn rows(&self) -> &[BitRow] {
        &self.rows
    }

    pub fn n_checks(&self) -> usize {
        self.rows.len()
    }

    pub fn n_positions(&self) -> usize {
        self.rows.first().map_or(0, BitRow::len)
    }

    /// Column `index`, read back from the rows.
    pub fn column(&self, index: usize) -> Vec<bool> {
        self.rows.iter().map(|r| r.get(index)).collect()
    }

    /// GF(2) rank of the columns in `indices`, by row reduction on the
    /// restricted row vectors.
    pub fn rank_of_columns(&self, indices: &[usize]) -> usize {
        // restrict each row to the selected columns, then eliminate rows
        let width = indices.len();
        let mut restricted: Vec<BitRow> = self
            .rows
            .iter()
            .map(|row| {
                let mut r = BitRow::zeros(width);
                for (c, &idx) in indices.iter().enumerate() {
                    if row.get(idx) {
                        r.set(c);
                    }
                }
                r
            })
            .collect();
        let mut rank = 0;
        for col in 0..width {
            let Some(pivot) = (rank..restricted.len()).find(|&r| restricted[r].get(col)) else {
                continue;
            };
            restricted.swap(rank, pivot);
            let pivot_words = restricted[rank].words.clone();
            for (r, row) in restricted.iter_mut().enumerate() {
                if r != rank && row.get(col) {
                    for (w, p) in row.words.iter_mut().zip(&pivot_words) {
                        *w ^= p;
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

/// Limits for exhaustive profile enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerationBudget {
    /// Largest subset count enumerated exhaustively at any level.
    pub max_subsets: u128,
    /// Fallback for levels above `max_subsets`; `None` refuses instead.
    pub sampling: Option<SamplingPlan>,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget { max_subsets: DEFAULT_SUBSET_BUDGET, sampling: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingPlan {
    pub samples: u64,
    pub seed: u64,
}

/// Tolerance to simultaneous failures: array size, the number of failures
/// always survived, and the fractions of `n_f + 1`, `n_f + 2` and `n_f + 3`
/// failure patterns that are survivable.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalProfile {
    pub size: usize,
    pub tolerated: usize,
    pub fractions: [f64; 3],
    /// Exact fractions when every level was enumerated or derived in closed form.
    pub exact: Option<[Fraction; 3]>,
    /// Per-level standard errors when any level was sampled.
    pub std_error: Option<[f64; 3]>,
}

impl SurvivalProfile {
    /// A profile from plain fractions; must satisfy `1 >= f1 >= f2 >= f3 >= 0`.
    pub fn new(size: usize, tolerated: usize, fractions: [f64; 3]) -> Result<Self> {
        check_monotone(&fractions)?;
        Ok(SurvivalProfile { size, tolerated, fractions, exact: None, std_error: None })
    }

    pub fn exact(size: usize, tolerated: usize, exact: [Fraction; 3]) -> Result<Self> {
        let one = Fraction::one();
        if exact.iter().any(|f| *f > one) || exact[1] > exact[0] || exact[2] > exact[1] {
            return Err(Error::InvalidProfile("fractions must satisfy 1 >= f1 >= f2 >= f3 >= 0".into()));
        }
        let fractions = [
            exact[0].to_f64().unwrap_or(0.0),
            exact[1].to_f64().unwrap_or(0.0),
            exact[2].to_f64().unwrap_or(0.0),
        ];
        Ok(SurvivalProfile { size, tolerated, fractions, exact: Some(exact), std_error: None })
    }

    fn sampled(size: usize, tolerated: usize, fractions: [f64; 3], std_error: [f64; 3]) -> Result<Self> {
        check_monotone(&fractions)?;
        Ok(SurvivalProfile { size, tolerated, fractions, exact: None, std_error: Some(std_error) })
    }

    /// Survivable fraction at `level` failures beyond `tolerated`; level 0 is 1.
    pub fn fraction(&self, level: usize) -> f64 {
        match level {
            0 => 1.0,
            1..=3 => self.fractions[level - 1],
            _ => 0.0,
        }
    }

    /// Probability of surviving the step from `level - 1` to `level`
    /// failures beyond `tolerated`, given the previous step was survived.
    pub fn conditional_survival(&self, level: usize) -> f64 {
        if level == 0 {
            return 1.0;
        }
        let prev = self.fraction(level - 1);
        if prev <= 0.0 {
            0.0
        } else {
            (self.fraction(level) / prev).min(1.0)
        }
    }
}

fn check_monotone(f: &[f64; 3]) -> Result<()> {
    let ok = f.iter().all(|x| x.is_finite() && (0.0..=1.0).contains(x)) && f[0] >= f[1] && f[1] >= f[2];
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidProfile(format!("fractions {f:?} must satisfy 1 >= f1 >= f2 >= f3 >= 0")))
    }
}

/// `C(n, 2) + C(n, 3)`: fatal triples of a complete two-dimensional array
/// (a data disk with both of its parity disks, or the three data disks
/// pairwise shared by three stripes).
pub fn fatal_triple_count_closed(stripes: usize) -> Result<u64> {
    if stripes < 3 {
        return Err(Error::InvalidScheme(format!("need at least 3 stripes, got {stripes}")));
    }
    let n = stripes as u64;
    Ok(n * (n - 1) / 2 + n * (n - 1) * (n - 2) / 6)
}
