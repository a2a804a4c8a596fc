//! Fatal-pattern fractions for `m` identical groups of `n` disks.
//!
//! A group with `p` parity equivalents loses data once it holds `p + 1`
//! concurrent erasures. For `k` erasures spread uniformly over `mn` disks the
//! fatal fraction is the share of `k`-subsets that put at least `p + 1` of
//! them into one group. Up to `k = p + 3`, at most one group can be
//! overloaded, so summing over the overloaded group and its excess count is
//! exact:
//!
//! ```text
//! k = p+1:  m C(n,p+1)
//! k = p+2:  m C(n,p+2) + m(m-1) n C(n,p+1)
//! k = p+3:  m C(n,p+3) + m(m-1) n C(n,p+2) + m C((m-1)n, 2) C(n,p+1)
//! ```
//!
//! each divided by `C(mn, k)`.

use alloc::format;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::codes::{Fraction, Layout, SurvivalProfile};
use crate::error::{Error, Result};

/// One fatal-fraction evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupFatalQuery {
    pub groups: usize,
    pub disks_per_group: usize,
    pub failures: usize,
    pub parity: usize,
}

impl GroupFatalQuery {
    pub fn validate(&self) -> Result<()> {
        let lo = self.parity + 1;
        let hi = self.parity + 3;
        if !(lo..=hi).contains(&self.failures) {
            return Err(Error::UnsupportedLevel { k: self.failures, lo, hi });
        }
        if self.groups == 0 {
            return Err(Error::InvalidQuery("group count must be at least 1".into()));
        }
        if self.disks_per_group <= self.parity {
            return Err(Error::InvalidQuery(format!(
                "groups need more than {} disks, got {}",
                self.parity, self.disks_per_group
            )));
        }
        if self.groups * self.disks_per_group < self.failures {
            return Err(Error::InvalidQuery(format!(
                "{} failures exceed the {} disks of the array",
                self.failures,
                self.groups * self.disks_per_group
            )));
        }
        Ok(())
    }

    /// Exact fatal fraction.
    pub fn evaluate(&self) -> Result<Fraction> {
        self.validate()?;
        let m = BigUint::from(self.groups);
        let n = self.disks_per_group;
        let p = self.parity;
        let others = (self.groups - 1) * n;
        let m_minus_1 = BigUint::from(self.groups - 1);
        let n_big = BigUint::from(n);

        // all k in one group
        let mut fatal = &m * binomial(n, self.failures);
        let excess = self.failures - p;
        if excess >= 2 {
            // k-1 in one group, one elsewhere
            fatal += &m * &m_minus_1 * &n_big * binomial(n, self.failures - 1);
        }
        if excess >= 3 {
            // k-2 in one group, two elsewhere
            fatal += &m * binomial(others, 2) * binomial(n, self.failures - 2);
        }
        Ok(Fraction::new(fatal, binomial(self.groups * n, self.failures)))
    }
}

/// Exact binomial coefficient.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Fatal fraction of `k`-failure patterns (`k` in 3..=5) across `m` RAID-6 groups.
pub fn raid6_fatal_fraction(groups: usize, disks_per_group: usize, failures: usize) -> Result<Fraction> {
    GroupFatalQuery { groups, disks_per_group, failures, parity: 2 }.evaluate()
}

/// Fatal fraction of `k`-failure patterns (`k` in 4..=6) across `m` triple-parity groups.
pub fn triple_parity_fatal_fraction(groups: usize, disks_per_group: usize, failures: usize) -> Result<Fraction> {
    GroupFatalQuery { groups, disks_per_group, failures, parity: 3 }.evaluate()
}

/// Survival profile of a group layout, `f_j = 1 - fatal(n_f + j)`.
///
/// Levels with more failures than disks have no patterns and report 0.
pub fn profile_from_closed_form(groups: usize, disks_per_group: usize, parity: usize) -> Result<SurvivalProfile> {
    if parity != 2 && parity != 3 {
        return Err(Error::InvalidQuery(format!("parity equivalents must be 2 or 3, got {parity}")));
    }
    let mut f: [Fraction; 3] = [Fraction::zero(), Fraction::zero(), Fraction::zero()];
    for (j, slot) in f.iter_mut().enumerate() {
        let failures = parity + 1 + j;
        if groups * disks_per_group < failures {
            GroupFatalQuery { groups, disks_per_group, failures: parity + 1, parity }.validate()?;
            continue;
        }
        let fatal = GroupFatalQuery { groups, disks_per_group, failures, parity }.evaluate()?;
        *slot = Fraction::one() - fatal;
    }
    SurvivalProfile::exact(groups * disks_per_group, parity, f)
}

/// Closed-form profile for a group layout; `None` for two-dimensional arrays.
pub fn profile_for_layout(layout: Layout) -> Option<Result<SurvivalProfile>> {
    match layout {
        Layout::TwoD { .. } => None,
        Layout::Raid6Groups { groups, disks_per_group } => Some(profile_from_closed_form(groups, disks_per_group, 2)),
        Layout::TripleParityGroups { groups, disks_per_group } => {
            Some(profile_from_closed_form(groups, disks_per_group, 3))
        }
    }
}
