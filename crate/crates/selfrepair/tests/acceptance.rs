//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Monte Carlo criteria use exact loss detection, hazard-rate reading of the
//! bathtub, unrepaired positions on spare exhaustion and seed 1. Run with
//! `cargo test --release -p selfrepair --test acceptance`.

use std::fmt::Write as _;
use std::process::ExitCode;
use std::sync::atomic::AtomicBool;
use std::time::Instant;

use num_bigint::BigUint;
use num_rational::Ratio;
use selfrepair::cli::run_cli;
use selfrepair::config::profile_of;
use selfrepair::runner::{worker_count, Runner};
use selfrepair::tables::{TABLE_1, TABLE_2, TABLE_3};
use selfrepair_core::closed_form::{binomial, raid6_fatal_fraction, triple_parity_fatal_fraction};
use selfrepair_core::codes::{binomial_u128, fatal_triple_count_closed};
use selfrepair_core::rng::{Lane, Stream};
use selfrepair_core::stats::space_overhead;
use selfrepair_core::{
    ArrayScheme, BathtubProfile, FailureLaw, Layout, LossMode, RateInterpretation, ReliabilityEstimate, SimConfig,
    Simulator, SpareCount,
};

const SEED: u64 = 1;
const LONG_RUNS: u64 = 20_000_000;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

struct Suite {
    runner: Runner,
    never: AtomicBool,
}

impl Suite {
    fn estimate(&self, layout: Layout, spares: SpareCount, runs: u64) -> ReliabilityEstimate {
        let mut cfg = SimConfig::new(layout, spares);
        cfg.runs = runs;
        cfg.seed = SEED;
        self.estimate_cfg(cfg)
    }

    fn estimate_cfg(&self, cfg: SimConfig) -> ReliabilityEstimate {
        let sim = Simulator::new(cfg).expect("valid configuration");
        self.runner.tally(&sim, &self.never).expect("not interrupted").estimate().expect("runs > 0")
    }
}

fn describe(e: &ReliabilityEstimate) -> String {
    format!(
        "{} losses / {} runs, nines {:.3} CI ({:.3}, {:.3}), {} exhaustions",
        e.losses,
        e.runs,
        e.nines(),
        e.nines_ci.0,
        e.nines_ci.1,
        e.exhaustions
    )
}

fn c1_combinatorics(_: &Suite) -> Verdict {
    let started = Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    for n in 3..=8usize {
        let scheme = ArrayScheme::two_d(n).unwrap();
        let p = scheme.survival_profile().unwrap();
        let fatal = binomial_u128(scheme.len(), 3) - u128::from(scheme.count_recoverable(3));
        let expected = (n * (n - 1) / 2 + n * (n - 1) * (n - 2) / 6) as u128;
        let fatal_ok = fatal == expected && u128::from(fatal_triple_count_closed(n).unwrap()) == expected;
        let monotone = p.fractions[0] >= p.fractions[1] && p.fractions[1] >= p.fractions[2];
        ok &= fatal_ok && monotone;
        let _ = write!(detail, "n={n}: {} fatal triples, f=({:.4}, {:.4}, {:.4}); ", fatal, p.fractions[0], p.fractions[1], p.fractions[2]);
    }
    let secs = started.elapsed().as_secs_f64();
    ok &= secs < 60.0;
    let _ = write!(detail, "{secs:.2}s");
    verdict(ok, detail)
}

fn c2_closed_form(_: &Suite) -> Verdict {
    let started = Instant::now();
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for m in 1..=3usize {
        for (parity, lo_n) in [(2usize, 3usize), (3, 4)] {
            for n in lo_n..=8 {
                let layout = if parity == 2 {
                    Layout::Raid6Groups { groups: m, disks_per_group: n }
                } else {
                    Layout::TripleParityGroups { groups: m, disks_per_group: n }
                };
                let scheme = ArrayScheme::new(layout).unwrap();
                for k in parity + 1..=parity + 3 {
                    if m * n < k {
                        continue;
                    }
                    let all = binomial(m * n, k);
                    let survivors = BigUint::from(scheme.count_recoverable(k));
                    let enumerated = Ratio::new(&all - survivors, all);
                    let formula = if parity == 2 {
                        raid6_fatal_fraction(m, n, k).unwrap()
                    } else {
                        triple_parity_fatal_fraction(m, n, k).unwrap()
                    };
                    checked += 1;
                    if formula != enumerated {
                        mismatches.push(format!("{layout} k={k}: formula {formula} vs enumeration {enumerated}"));
                    }
                }
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    let detail = if mismatches.is_empty() {
        format!("{checked} (m, n, k) cases agree exactly, including m=3 at k=5,6; {secs:.2}s")
    } else {
        format!("{} of {checked} cases differ: {}", mismatches.len(), mismatches.join("; "))
    };
    verdict(mismatches.is_empty() && secs < 300.0, detail)
}

fn overlaps(e: &ReliabilityEstimate, lo: f64, hi: f64) -> bool {
    e.nines_overlap(lo, hi)
}

fn c3_anchor(s: &Suite) -> Verdict {
    let started = Instant::now();
    let e = s.estimate(Layout::TwoD { stripes: 10 }, SpareCount::Finite(33), LONG_RUNS);
    let overhead = space_overhead(45, 10, SpareCount::Finite(33)).unwrap().to_string();
    let ok = overlaps(&e, 4.88, 5.14) && overhead == "48.86%";
    verdict(ok, format!("twod:10 + 33 spares: {}; overhead {overhead}; {:.0}s", describe(&e), started.elapsed().as_secs_f64()))
}

fn c4_impossible(s: &Suite) -> Verdict {
    let e = s.estimate(Layout::TwoD { stripes: 12 }, SpareCount::Unlimited, LONG_RUNS);
    let ok = e.nines() < 5.0 && overlaps(&e, 4.69, 4.94);
    verdict(ok, format!("twod:12 + unlimited spares: {}", describe(&e)))
}

fn c5_raid6(s: &Suite) -> Verdict {
    let one = s.estimate(Layout::Raid6Groups { groups: 1, disks_per_group: 12 }, SpareCount::Finite(18), LONG_RUNS);
    let two = s.estimate(Layout::Raid6Groups { groups: 2, disks_per_group: 12 }, SpareCount::Unlimited, LONG_RUNS);
    let ok = overlaps(&one, 4.92, 5.19) && two.nines() < 5.0;
    verdict(ok, format!("raid6:1x12 + 18: {}; raid6:2x12 + unlimited: {}", describe(&one), describe(&two)))
}

fn c6_triple_parity(s: &Suite) -> Verdict {
    let layout = Layout::TripleParityGroups { groups: 1, disks_per_group: 15 };
    let thirteen = s.estimate(layout, SpareCount::Finite(13), LONG_RUNS);
    let fourteen = s.estimate(layout, SpareCount::Finite(14), LONG_RUNS);
    let overlap = overlaps(&thirteen, 4.88, 5.27);
    let improves = fourteen.reliability > thirteen.reliability;
    verdict(
        overlap && improves,
        format!(
            "13 spares: {} [overlap with (4.88, 5.27): {}]; 14 spares: {} [improves: {}]",
            describe(&thirteen),
            if overlap { "yes" } else { "no" },
            describe(&fourteen),
            if improves { "yes" } else { "no" }
        ),
    )
}

fn c7_modes(s: &Suite) -> Verdict {
    let layout = Layout::TwoD { stripes: 7 };
    let mut exact = SimConfig::new(layout, SpareCount::Finite(20));
    exact.runs = 1_000_000;
    exact.seed = SEED;
    let mut profile = exact.clone();
    profile.loss_mode = LossMode::Profile(profile_of(layout).unwrap());
    let a = s.estimate_cfg(exact);
    let b = s.estimate_cfg(profile);
    let se = (a.std_error().powi(2) + b.std_error().powi(2)).sqrt();
    let gap = (a.loss_probability() - b.loss_probability()).abs();
    let ok = gap <= 3.0 * se;
    verdict(
        ok,
        format!(
            "twod:7 + 20 spares: exact {} losses, profile {} losses in 1e6 runs; gap {:.2e} vs 3 SE {:.2e}",
            a.losses,
            b.losses,
            gap,
            3.0 * se
        ),
    )
}

fn c8_failure_model(_: &Suite) -> Verdict {
    let law = FailureLaw::new(&BathtubProfile::backblaze(), RateInterpretation::HazardRate).unwrap();
    let draws = 1_000_000u64;
    let mut stream = Stream::new(SEED, 0, Lane::Disks);
    let mut failed = 0u64;
    let mut worst_round_trip = 0.0f64;
    for _ in 0..draws {
        let u = stream.open01();
        let t = law.sample_failure_time(0.0, u).unwrap();
        if t <= 4.0 {
            failed += 1;
            let back = (-law.cumulative_hazard(0.0, t).unwrap()).exp();
            worst_round_trip = worst_round_trip.max((back - u).abs());
        }
    }
    let p = 1.0 - (-0.2155f64).exp();
    let sigma = (p * (1.0 - p) / draws as f64).sqrt();
    let observed = failed as f64 / draws as f64;
    let z = (observed - p) / sigma;
    let ok = z.abs() <= 4.0 && worst_round_trip < 1e-12;
    verdict(
        ok,
        format!("P(fail <= 4 yr) = {observed:.5} vs {p:.5} ({z:+.2} sigma); worst round-trip error {worst_round_trip:.1e}"),
    )
}

fn c9_determinism(_: &Suite) -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let campaign = dir.path().join("campaign.toml");
    std::fs::write(
        &campaign,
        "seed = 11\n\n\
         [config.twod7]\nscheme = \"twod:7\"\nspares = 20\nruns = 300000\n\n\
         [config.harsh]\nscheme = \"raid6:2x6\"\nspares = 3\nruns = 100000\n\
         [[config.harsh.bathtub]]\nstart_age_years = 0.0\nrate_per_year = 0.2\n\n\
         [config.profile]\nscheme = \"tp:2x7\"\nspares = \"unlimited\"\nruns = 100000\nmode = \"profile\"\n\
         [[config.profile.bathtub]]\nstart_age_years = 0.0\nrate_per_year = 0.3\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for workers in [1, 4, 16] {
        let out = dir.path().join(format!("w{workers}"));
        let args = [
            "selfrepair".to_string(),
            "simulate".into(),
            campaign.display().to_string(),
            "--workers".into(),
            workers.to_string(),
            "--no-timing".into(),
            "--out".into(),
            out.display().to_string(),
        ];
        let mut stdout = Vec::new();
        run_cli(args, &mut stdout).unwrap();
        outputs.push((std::fs::read(out.join("results.csv")).unwrap(), stdout));
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    let lines = String::from_utf8_lossy(&outputs[0].0).lines().count();
    verdict(same && lines == 4, format!("CSV ({lines} lines) and printed table identical at 1, 4 and 16 workers: {same}"))
}

fn c10_overhead(_: &Suite) -> Verdict {
    let mut finite = 0;
    let mut wrong = Vec::new();
    for row in TABLE_1.iter().chain(&TABLE_2).chain(&TABLE_3) {
        let l = row.layout;
        let got = space_overhead(l.data_disks() as u64, l.parity_disks() as u64, row.spares).unwrap().to_string();
        if row.spares != SpareCount::Unlimited {
            finite += 1;
        }
        if got != row.overhead {
            wrong.push(format!("{l} + {}: {got} vs {}", row.spares, row.overhead));
        }
    }
    verdict(
        wrong.is_empty(),
        if wrong.is_empty() {
            format!("all {finite} finite cells (and the infinite ones) print as published")
        } else {
            wrong.join("; ")
        },
    )
}

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let workers = worker_count(None, None).unwrap();
    let suite = Suite { runner: Runner::new(workers).unwrap(), never: AtomicBool::new(false) };
    let criteria: [(&str, fn(&Suite) -> Verdict); 10] = [
        ("1 combinatorics oracle", c1_combinatorics),
        ("2 closed form vs enumeration", c2_closed_form),
        ("3 two-dimensional anchor row", c3_anchor),
        ("4 two-dimensional impossibility row", c4_impossible),
        ("5 RAID-6 rows", c5_raid6),
        ("6 triple-parity rows", c6_triple_parity),
        ("7 profile vs exact mode", c7_modes),
        ("8 failure-model distribution", c8_failure_model),
        ("9 determinism across workers", c9_determinism),
        ("10 overhead cells", c10_overhead),
    ];
    println!("acceptance: {workers} worker(s), seed {SEED}");
    let mut failed = 0;
    let mut ran = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let started = Instant::now();
        let v = check(&suite);
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {name}: {} ({:.1}s) {}",
            if v.pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
