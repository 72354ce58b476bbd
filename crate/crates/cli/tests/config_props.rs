use proptest::prelude::*;
use vortibc::scenarios::{BoundaryData, InitialCondition};
use vortibc::stokes::TimeScheme;
use vortibc_cli::RunConfig;

fn initial() -> impl Strategy<Value = InitialCondition> {
    prop_oneof![
        Just(InitialCondition::Zero),
        any::<f64>().prop_filter("finite", |v| v.is_finite()).prop_map(|c| InitialCondition::Circulation { c }),
        (-1e3f64..1e3, -1e3f64..1e3, -1e3f64..1e3).prop_map(|(a, b, c)| InitialCondition::Swirl { a, b, c }),
    ]
}

fn boundary() -> impl Strategy<Value = BoundaryData> {
    prop_oneof![
        Just(BoundaryData::Zero),
        (-1e3f64..1e3).prop_map(|value| BoundaryData::Constant { value }),
        (-1e3f64..1e3).prop_map(|offset| BoundaryData::MatchInitial { offset }),
        (-1e3f64..1e3, 0u32..20).prop_map(|(amp, mode)| BoundaryData::Sine { amp, mode }),
        (-1e3f64..1e3, -1e3f64..1e3).prop_map(|(amp, freq)| BoundaryData::Oscillating { amp, freq }),
    ]
}

proptest! {
    #[test]
    fn config_text_round_trip(
        r_inner in 1e-3f64..1.0,
        extra in 1e-3f64..10.0,
        n1 in 8usize..300,
        n2 in 8usize..300,
        mu in 1e-9f64..10.0,
        t_final in 1e-6f64..100.0,
        dt in proptest::option::of(1e-8f64..1.0),
        initial in initial(),
        boundary in boundary(),
        cn in any::<bool>(),
        mu_list in proptest::collection::vec(1e-9f64..10.0, 1..6),
        seed in any::<u64>(),
        stride in 0usize..100,
    ) {
        let mut cfg = RunConfig::default();
        cfg.domain.r_inner = r_inner;
        cfg.domain.r_outer = r_inner + extra;
        cfg.n1 = n1;
        cfg.n2 = n2;
        cfg.mu = mu;
        cfg.t_final = t_final;
        cfg.dt = dt;
        cfg.initial = initial;
        cfg.boundary = boundary;
        cfg.scheme = if cn { TimeScheme::CrankNicolson } else { TimeScheme::BackwardEuler };
        cfg.mu_list = mu_list;
        cfg.seed = seed;
        cfg.stride = stride;
        let text = cfg.to_text();
        let back = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_text(), text);
    }
}
