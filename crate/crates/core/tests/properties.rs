use proptest::prelude::*;
use vortibc::elliptic::{NeumannProblem, NeumannSolver};
use vortibc::fieldcalc::{l2, ScalarField};
use vortibc::geometry::{build_grid, DomainSpec};
use vortibc::io::{Checkpoint, DiagnosticsRecord};

proptest! {
    #[test]
    fn checkpoint_bytes_round_trip(
        n1 in 1u32..6,
        n2 in 1u32..6,
        comps in 1u32..3,
        seed in any::<u64>(),
    ) {
        let len = (n1 * n2 * comps) as usize;
        let data: Vec<f64> = (0..len).map(|k| f64::from_bits(seed.rotate_left(k as u32) ^ (k as u64) << 7)).collect();
        let ck = Checkpoint { dims: vec![n1, n2], components: comps, data };
        let bytes = ck.to_bytes();
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        prop_assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn csv_round_trip(values in proptest::collection::vec(-1e300f64..1e300, 1..40)) {
        let mut r = DiagnosticsRecord::new(&["a", "b"]);
        for pair in values.chunks(2) {
            r.push(vec![pair[0], *pair.last().unwrap()]);
        }
        let back = DiagnosticsRecord::from_csv(&r.to_csv()).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn neumann_solve_is_linear(alpha in -5.0f64..5.0, k in 1u32..4) {
        let g = build_grid(DomainSpec::annulus(1.0, 2.0), 12, 16).unwrap();
        let s = NeumannSolver::new(g.clone()).unwrap();
        let rho = ScalarField::from_fn(g.clone(), |x, y| (k as f64 * x).sin() * y).recentered();
        let base = s.solve(&NeumannProblem { rho: rho.clone(), g: vec![0.0; s.frame().unwrap().len()] }).unwrap();
        let scaled = s
            .solve(&NeumannProblem { rho: rho.scale(alpha), g: vec![0.0; s.frame().unwrap().len()] })
            .unwrap();
        prop_assert!(l2(&scaled.sub(&base.scale(alpha))) <= 1e-10 * (1.0 + l2(&base) * alpha.abs()));
    }
}
