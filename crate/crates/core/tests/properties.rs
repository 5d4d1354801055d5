use proptest::prelude::*;

use roa_core::config::{DynamicsSection, Experiment, RunConfig};
use roa_core::grid::{signed_distance_circle, Grid2D, ScalarField};
use roa_core::hjsolver::{hamiltonian_value, numerical_flux, solve, SolveConfig};
use roa_core::netmodel::{
    full_rhs, gershgorin_certify, linear_jacobian, DynamicsSpec, ReducedSystem, Topology,
};
use roa_core::oracle::{compare, BasinMask};
use roa_core::roa::{sublevel_mask, Mask, RoaEstimate};
use roa_core::weno::{weno5, weno5_weights};

fn topology() -> impl Strategy<Value = Topology> {
    (1usize..6).prop_flat_map(|n| {
        prop::collection::vec(0.0..2.0f64, n * n).prop_map(move |mut w| {
            for i in 0..n {
                w[i * n + i] = 0.0;
            }
            Topology::new(n, w).unwrap()
        })
    })
}

fn small_grid() -> Grid2D {
    Grid2D::new(-0.5, 2.5, -0.5, 2.5, 31, 31).unwrap()
}

proptest! {
    #[test]
    fn in_degree_is_column_sum(top in topology()) {
        let n = top.n();
        let w = top.weighted_in_degree();
        for (i, wi) in w.iter().enumerate() {
            let col: f64 = (0..n).map(|j| top.weight(j, i)).sum();
            prop_assert!((wi - col).abs() <= 1e-12);
        }
    }

    #[test]
    fn uniform_state_moves_uniformly(top in topology(), x in -2.0..3.0f64) {
        let d = DynamicsSpec::nonlinear();
        let rhs = full_rhs(&vec![x; top.n()], &top, &d).unwrap();
        for r in &rhs {
            prop_assert!((r - x * (1.0 - x)).abs() <= 1e-12);
        }
    }

    #[test]
    fn gershgorin_margin_is_beta(top in topology(), beta in 0.01..2.0f64, gamma in 0.01..2.0f64) {
        let cert = gershgorin_certify(&linear_jacobian(&top, beta, gamma).unwrap());
        prop_assert!(cert.certified);
        prop_assert!((cert.margin - beta).abs() <= 1e-12 * (1.0 + gamma * 10.0));
    }

    #[test]
    fn weno_weights_are_convex(d in prop::array::uniform5(-10.0..10.0f64)) {
        let w = weno5_weights(d);
        prop_assert!(w.iter().all(|&x| (0.0..=1.0).contains(&x)));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn weno_is_exact_on_affine_data(c in -100.0..100.0f64) {
        prop_assert!((weno5([c; 5]) - c).abs() <= 1e-12 * c.abs().max(1.0));
    }

    #[test]
    fn weno_is_odd(d in prop::array::uniform5(-10.0..10.0f64)) {
        let neg = d.map(|x| -x);
        prop_assert!((weno5(neg) + weno5(d)).abs() <= 1e-12);
    }

    #[test]
    fn ghost_fill_is_exact_on_affine_and_idempotent(
        a in -3.0..3.0f64, b in -3.0..3.0f64, c in -3.0..3.0f64,
    ) {
        let g = Grid2D::new(0.0, 1.0, -1.0, 2.0, 9, 11).unwrap();
        let exact = ScalarField::from_fn(g, |x, y| a + b * x + c * y);
        let mut f = ScalarField::zeros(g);
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                f.set(i, j, exact.at(i, j));
            }
        }
        f.fill_ghost();
        for (u, v) in f.values().iter().zip(exact.values()) {
            prop_assert!((u - v).abs() <= 1e-12);
        }
        let again = f.clone().with_ghosts_filled();
        prop_assert_eq!(again.values(), f.values());
    }

    #[test]
    fn hamiltonian_is_nonpositive(p in -5.0..5.0f64, q in -5.0..5.0f64, h1 in -5.0..5.0f64, h2 in -5.0..5.0f64) {
        prop_assert!(hamiltonian_value(p, q, h1, h2) <= 0.0);
    }

    #[test]
    fn flux_is_consistent(p in -5.0..5.0f64, q in -5.0..5.0f64, h1 in -5.0..5.0f64, h2 in -5.0..5.0f64) {
        let f = numerical_flux(p, p, q, q, h1, h2, h1.abs(), h2.abs());
        prop_assert!((f + hamiltonian_value(p, q, h1, h2)).abs() <= 1e-12);
    }

    #[test]
    fn flux_is_monotone(
        base in prop::array::uniform4(-3.0..3.0f64),
        h1 in -3.0..3.0f64, h2 in -3.0..3.0f64,
        extra in 0.0..1.0f64, bump in 0.0..1.0f64,
    ) {
        let [pm, pp, qm, qp] = base;
        let (ax, ay) = (h1.abs() + extra, h2.abs() + extra);
        let f = |pm, pp, qm, qp| numerical_flux(pm, pp, qm, qp, h1, h2, ax, ay);
        let f0 = f(pm, pp, qm, qp);
        prop_assert!(f(pm + bump, pp, qm, qp) >= f0 - 1e-12);
        prop_assert!(f(pm, pp + bump, qm, qp) <= f0 + 1e-12);
        prop_assert!(f(pm, pp, qm + bump, qp) >= f0 - 1e-12);
        prop_assert!(f(pm, pp, qm, qp + bump) <= f0 + 1e-12);
    }

    #[test]
    fn sublevel_mask_grows_with_level(r in 0.1..1.0f64, lo in -0.5..0.5f64, gap in 0.0..0.5f64) {
        let field = signed_distance_circle(&small_grid(), 1.0, 1.0, r).unwrap();
        let a = sublevel_mask(&field, lo).unwrap();
        let b = sublevel_mask(&field, lo + gap).unwrap();
        prop_assert!(a.is_subset_of(&b));
    }

    #[test]
    fn comparison_fractions_are_bounded(
        r in 0.1..1.2f64,
        bits in prop::collection::vec(any::<bool>(), 31 * 31),
        dilation in 0usize..3,
    ) {
        let g = small_grid();
        let est = RoaEstimate::from_field(&signed_distance_circle(&g, 1.0, 1.0, r).unwrap()).unwrap();
        let basin = BasinMask { mask: Mask::new(g, bits).unwrap(), eps: 1e-3, t_max: 50.0, escape_radius: 100.0 };
        let c = compare(&est, &basin, dilation).unwrap();
        prop_assert!((0.0..=1.0).contains(&c.conservative_fraction));
        prop_assert!((0.0..=1.0).contains(&c.jaccard));
        prop_assert!(c.violations.len() <= c.checked);
    }

    #[test]
    fn config_round_trips(
        ws in prop::collection::vec(0.0..10.0f64, 1..5),
        beta in 0.1..3.0f64,
        n in 7usize..300,
        t_final in 0.5..10.0f64,
    ) {
        let mut cfg = RunConfig {
            experiments: vec![Experiment {
                name: "probe".into(),
                dynamics: DynamicsSection::Linear { beta, gamma: 1.0 },
                w_values: ws,
            }],
            ..RunConfig::default()
        };
        cfg.grid.nx = n;
        cfg.solver.t_final = t_final;
        cfg.solver.snapshots = vec![t_final];
        let back = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn solve_snapshots_are_nested(w in 0.0..4.0f64, r in 0.1..0.4f64, linear in any::<bool>()) {
        let g = small_grid();
        let d = if linear { DynamicsSpec::linear(1.0, 1.0).unwrap() } else { DynamicsSpec::nonlinear() };
        let sys = ReducedSystem::new(w, d).unwrap();
        let init = signed_distance_circle(&g, 1.0, 1.0, r).unwrap();
        let cfg = SolveConfig::new(1.0, 0.5, vec![0.25, 0.5, 1.0]).unwrap();
        let snaps = solve(&g, &sys, &init, &cfg).unwrap();
        let mut prev = sublevel_mask(&init, 0.0).unwrap();
        for s in &snaps {
            let m = sublevel_mask(s, 0.0).unwrap();
            prop_assert!(prev.is_subset_of(&m));
            prev = m;
        }
        for pair in snaps.windows(2) {
            for (a, b) in pair[0].interior().zip(pair[1].interior()) {
                prop_assert!(b <= a);
            }
        }
    }
}
