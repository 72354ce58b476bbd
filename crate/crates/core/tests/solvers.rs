use vortibc::euler_inviscid::{solve_euler, sweep_mu, SweepConfig};
use vortibc::fieldcalc::l2;
use vortibc::fixedpoint::{picard_solve, NsProblem, PicardConfig};
use vortibc::geometry::{build_grid, BoundaryFrame, DomainSpec};
use vortibc::scenarios::{BoundaryData, InitialCondition};
use vortibc::stokes::{solve_stokes, BoundarySeries, StokesRun, TimeScheme};

#[test]
fn stokes_keeps_irrotational_circulation() {
    let g = build_grid(DomainSpec::annulus(1.0, 2.0), 24, 32).unwrap();
    let fr = BoundaryFrame::new(&g).unwrap();
    let u0 = InitialCondition::Circulation { c: 0.7 }.velocity(&g).unwrap();
    for scheme in [TimeScheme::BackwardEuler, TimeScheme::CrankNicolson] {
        let run = StokesRun {
            dt: Some(0.01),
            scheme,
            ..StokesRun::new(u0.clone(), BoundarySeries::zero(fr.len()), 0.1, 0.2)
        };
        let sol = solve_stokes(&run).unwrap();
        assert!(sol.w.iter().all(|w| l2(&w.sub(&u0)) < 1e-9), "{scheme:?}");
    }
}

#[test]
fn navier_stokes_with_zero_data_is_zero() {
    let g = build_grid(DomainSpec::channel(2.0, 1.0), 12, 12).unwrap();
    let fr = BoundaryFrame::new(&g).unwrap();
    let prob = NsProblem {
        dt: Some(0.02),
        ..NsProblem::new(vortibc::fieldcalc::VectorField::zeros(g), BoundarySeries::zero(fr.len()), 0.1, 0.1)
    };
    let sol = picard_solve(&prob, &PicardConfig::default()).unwrap();
    assert!(sol.u.iter().all(|u| u.max_abs() == 0.0));
}

#[test]
fn euler_keeps_taylor_green() {
    let g = build_grid(DomainSpec::torus(std::f64::consts::TAU, std::f64::consts::TAU), 24, 24).unwrap();
    let u0 = InitialCondition::TaylorGreen { amp: 1.0 }.velocity(&g).unwrap();
    let e = solve_euler(&u0, 0.5, 0.01).unwrap();
    assert!(e.u.iter().all(|u| l2(&u.sub(&u0)) < 1e-10));
}

#[test]
fn sweep_is_deterministic_and_ordered() {
    let g = build_grid(DomainSpec::annulus(1.0, 2.0), 16, 16).unwrap();
    let fr = BoundaryFrame::new(&g).unwrap();
    let ic = InitialCondition::Swirl { a: 0.5, b: 0.3, c: 0.0 };
    let cfg = SweepConfig {
        mu_list: vec![0.1, 0.03, 0.01],
        u0: ic.velocity(&g).unwrap(),
        a: BoundarySeries::Steady(BoundaryData::MatchInitial { offset: 1.0 }.sample(0.0, &g, &fr, &ic)),
        t_final: 0.1,
        dt: 0.01,
        scheme: TimeScheme::BackwardEuler,
        picard: PicardConfig::default(),
        threads: None,
    };
    let a = sweep_mu(&cfg).unwrap();
    let b = sweep_mu(&SweepConfig { threads: Some(1), ..cfg.clone() }).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.rows.iter().map(|r| r.mu).collect::<Vec<_>>(), cfg.mu_list);
    assert!(a.rows.windows(2).all(|w| w[1].e_sup < w[0].e_sup));
    let bad = SweepConfig { mu_list: vec![0.01, 0.1], ..cfg };
    assert!(sweep_mu(&bad).is_err());
}
