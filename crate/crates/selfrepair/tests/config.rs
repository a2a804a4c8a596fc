use indexmap::IndexMap;
use proptest::prelude::*;
use selfrepair::config::{
    CampaignConfig, ExhaustionChoice, InterpChoice, ModeChoice, Overrides, PhaseSpec, RunSpec, SchemeSpec, SpareSpec,
    DEFAULT_RUNS,
};
use selfrepair::CliError;
use selfrepair_core::{Layout, SpareCount};

const EXAMPLE: &str = include_str!("../campaigns/table1-anchor.toml");

fn layout() -> impl Strategy<Value = Layout> {
    prop_oneof![
        (3usize..40).prop_map(|stripes| Layout::TwoD { stripes }),
        (1usize..5, 3usize..20).prop_map(|(groups, disks_per_group)| Layout::Raid6Groups { groups, disks_per_group }),
        (1usize..5, 4usize..20)
            .prop_map(|(groups, disks_per_group)| Layout::TripleParityGroups { groups, disks_per_group }),
    ]
}

fn spares() -> impl Strategy<Value = SpareCount> {
    prop_oneof![Just(SpareCount::Unlimited), (0u64..1000).prop_map(SpareCount::Finite)]
}

fn phases() -> impl Strategy<Value = Vec<PhaseSpec>> {
    prop::collection::vec((0.0f64..10.0, 0.0f64..1.0), 1..5).prop_map(|v| {
        let mut start = 0.0;
        v.into_iter()
            .enumerate()
            .map(|(i, (step, rate))| {
                if i > 0 {
                    start += step + 0.01;
                }
                PhaseSpec { start_age_years: start, rate_per_year: rate }
            })
            .collect()
    })
}

fn run_spec() -> impl Strategy<Value = RunSpec> {
    (
        layout(),
        spares(),
        prop::option::of(1u64..1 << 40),
        prop::option::of(0.1f64..20.0),
        prop::option::of(0.0f64..500.0),
        prop::option::of(prop_oneof![Just(InterpChoice::Hazard), Just(InterpChoice::Afr)]),
        prop::option::of(prop_oneof![Just(ModeChoice::Exact), Just(ModeChoice::Profile)]),
        prop::option::of(prop_oneof![Just(ExhaustionChoice::Continue), Just(ExhaustionChoice::Loss)]),
        prop::option::of(any::<u32>().prop_map(u64::from)),
        prop::option::of("[a-z]{1,8}\\.csv"),
        prop::option::of(phases()),
    )
        .prop_map(|(scheme, spares, runs, mission, repair, interp, mode, exhaustion, seed, csv, bathtub)| RunSpec {
            scheme: SchemeSpec(scheme),
            spares: SpareSpec(spares),
            runs,
            mission_years: mission,
            repair_hours: repair,
            interp,
            mode,
            exhaustion,
            seed,
            csv: csv.map(Into::into),
            json: None,
            bathtub,
        })
}

fn campaign() -> impl Strategy<Value = CampaignConfig> {
    (
        prop::option::of(any::<u32>().prop_map(u64::from)),
        prop::option::of(1usize..64),
        prop::collection::vec(("[a-z][a-z0-9_-]{0,10}", run_spec()), 1..5),
    )
        .prop_map(|(seed, workers, entries)| CampaignConfig {
            seed,
            workers,
            config: entries.into_iter().collect::<IndexMap<_, _>>(),
        })
}

proptest! {
    #[test]
    fn toml_round_trip(c in campaign()) {
        let text = c.to_toml().unwrap();
        let back = CampaignConfig::parse(&text).unwrap();
        prop_assert_eq!(back, c);
    }
}

#[test]
fn example_campaign_round_trips_and_resolves() {
    let c = CampaignConfig::parse(EXAMPLE).unwrap();
    assert_eq!(CampaignConfig::parse(&c.to_toml().unwrap()).unwrap(), c);
    let resolved = c.resolve(&Overrides::default()).unwrap();
    assert_eq!(resolved.len(), c.config.len());
    assert!(resolved.iter().all(|r| r.seed == 1));
}

#[test]
fn unknown_keys_are_rejected() {
    for text in [
        "colour = 1\n[config.a]\nscheme = \"twod:5\"\nspares = 3\n",
        "[config.a]\nscheme = \"twod:5\"\nspares = 3\nsparse = 4\n",
        "[config.a]\nscheme = \"twod:5\"\nspares = 3\n[[config.a.bathtub]]\nstart_age_years = 0.0\nrate = 0.1\n",
    ] {
        assert!(matches!(CampaignConfig::parse(text), Err(CliError::Config(_))), "{text}");
    }
}

#[test]
fn malformed_values_are_rejected() {
    for text in [
        "",
        "seed = 1\n",
        "[config.a]\nscheme = \"twod:5\"\n",
        "[config.a]\nscheme = \"raid5:1x4\"\nspares = 3\n",
        "[config.a]\nscheme = \"twod:5\"\nspares = \"many\"\n",
        "[config.a]\nscheme = \"twod:5\"\nspares = -1\n",
        "[config.a]\nscheme = \"twod:5\"\nspares = 3\nmode = \"fast\"\n",
    ] {
        assert!(matches!(CampaignConfig::parse(text), Err(CliError::Config(_))), "{text:?}");
    }
}

#[test]
fn semantic_errors_name_the_configuration() {
    let c = CampaignConfig::parse("[config.bad]\nscheme = \"twod:5\"\nspares = 3\nruns = 0\n").unwrap();
    match c.resolve(&Overrides::default()) {
        Err(CliError::Config(m)) => {
            assert!(m.starts_with("[config.bad]"), "{m}");
            assert!(!m.contains("configuration error: configuration error"), "{m}");
        }
        other => panic!("expected a configuration error, got {other:?}"),
    }
    let c = CampaignConfig::parse(
        "[config.b]\nscheme = \"twod:5\"\nspares = 3\n[[config.b.bathtub]]\nstart_age_years = 1.0\nrate_per_year = 0.1\n",
    )
    .unwrap();
    assert!(matches!(c.resolve(&Overrides::default()), Err(CliError::Config(_))));
}

#[test]
fn precedence_is_flag_then_section_then_global_then_default() {
    let c = CampaignConfig::parse(
        "seed = 7\n[config.a]\nscheme = \"twod:5\"\nspares = 3\nseed = 9\nruns = 100\nmode = \"profile\"\n\
         [config.b]\nscheme = \"raid6:1x12\"\nspares = \"unlimited\"\n",
    )
    .unwrap();
    let plain = c.resolve(&Overrides::default()).unwrap();
    assert_eq!((plain[0].seed, plain[0].runs, plain[0].mode), (9, 100, ModeChoice::Profile));
    assert_eq!((plain[1].seed, plain[1].runs, plain[1].mode), (7, DEFAULT_RUNS, ModeChoice::Exact));
    assert_eq!(plain[1].spares, SpareSpec(SpareCount::Unlimited));
    assert_eq!((plain[1].mission_years, plain[1].repair_hours), (4.0, 24.0));
    assert_eq!(plain[1].interp, InterpChoice::Hazard);
    assert_eq!(plain[1].exhaustion, ExhaustionChoice::Continue);

    let flags = Overrides { runs: Some(5), seed: Some(3), mode: Some(ModeChoice::Exact), ..Overrides::default() };
    let over = c.resolve(&flags).unwrap();
    assert!(over.iter().all(|r| r.seed == 3 && r.runs == 5 && r.mode == ModeChoice::Exact));
    assert_eq!(over.iter().map(|r| r.name.as_str()).collect::<Vec<_>>(), ["a", "b"]);
}
