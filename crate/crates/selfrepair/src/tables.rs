//! Published reference rows for the `table` command.

use selfrepair_core::{Layout, SpareCount};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub layout: Layout,
    pub spares: SpareCount,
    /// Overhead cell as printed ("∞" for unlimited spares).
    pub overhead: &'static str,
    /// Published 95 % interval in nines.
    pub nines: (f64, f64),
}

const fn twod(stripes: usize, spares: u64, overhead: &'static str, lo: f64, hi: f64) -> ReferenceRow {
    ReferenceRow { layout: Layout::TwoD { stripes }, spares: SpareCount::Finite(spares), overhead, nines: (lo, hi) }
}

const fn raid6(groups: usize, spares: SpareCount, overhead: &'static str, lo: f64, hi: f64) -> ReferenceRow {
    ReferenceRow {
        layout: Layout::Raid6Groups { groups, disks_per_group: 12 },
        spares,
        overhead,
        nines: (lo, hi),
    }
}

const fn tp(groups: usize, spares: u64, overhead: &'static str, lo: f64, hi: f64) -> ReferenceRow {
    ReferenceRow {
        layout: Layout::TripleParityGroups { groups, disks_per_group: 15 },
        spares: SpareCount::Finite(spares),
        overhead,
        nines: (lo, hi),
    }
}

/// Complete two-dimensional arrays.
pub const TABLE_1: [ReferenceRow; 11] = [
    twod(7, 19, "55.32%", 4.99, 5.05),
    twod(7, 20, "56.25%", 5.17, 5.25),
    twod(8, 23, "52.54%", 5.00, 5.06),
    twod(8, 24, "53.33%", 5.12, 5.20),
    twod(9, 27, "50.00%", 4.89, 4.94),
    twod(9, 28, "50.68%", 5.03, 5.09),
    twod(10, 33, "48.86%", 4.98, 5.04),
    twod(10, 34, "49.44%", 5.07, 5.13),
    twod(11, 53, "53.78%", 4.98, 5.04),
    twod(11, 54, "54.17%", 5.00, 5.06),
    ReferenceRow { layout: Layout::TwoD { stripes: 12 }, spares: SpareCount::Unlimited, overhead: "∞", nines: (4.79, 4.84) },
];

/// Sets of 12-disk RAID-6 arrays.
pub const TABLE_2: [ReferenceRow; 4] = [
    raid6(1, SpareCount::Finite(18), "66.67%", 5.02, 5.09),
    raid6(2, SpareCount::Unlimited, "∞", 4.48, 4.84),
    raid6(3, SpareCount::Unlimited, "∞", 4.35, 4.64),
    raid6(4, SpareCount::Unlimited, "∞", 4.33, 4.63),
];

/// Sets of 15-disk triple-parity arrays.
pub const TABLE_3: [ReferenceRow; 5] = [
    tp(1, 13, "57.14%", 4.98, 5.17),
    tp(1, 14, "58.62%", 5.36, 5.66),
    tp(2, 20, "52.00%", 4.90, 5.19),
    tp(3, 26, "49.30%", 4.98, 5.30),
    tp(3, 27, "50.00%", 5.23, 5.97),
];

pub fn table(id: u8) -> Option<&'static [ReferenceRow]> {
    match id {
        1 => Some(&TABLE_1),
        2 => Some(&TABLE_2),
        3 => Some(&TABLE_3),
        _ => None,
    }
}
