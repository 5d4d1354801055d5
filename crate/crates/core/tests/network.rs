use roa_core::netmodel::{DynamicsSpec, ReducedSystem, Topology};
use roa_core::oracle::{integrate_full, integrate_reduced, OracleParams};

#[test]
fn ring_node_tracks_reduced_model() {
    let top = Topology::ring(5, 2).unwrap();
    let dynamics = DynamicsSpec::linear(1.0, 1.0).unwrap();
    let ic = [1.8, 1.3, 1.3, 1.3, 1.3];
    let mean = ic.iter().sum::<f64>() / ic.len() as f64;
    let p = OracleParams { t_max: 10.0, ..OracleParams::default() };
    let full = integrate_full(&ic, &top, &dynamics, &p).unwrap();
    let red = integrate_reduced((1.8, mean), &ReducedSystem::new(2.0, dynamics).unwrap(), &p).unwrap();
    let k = full.times.len().min(red.times.len());
    let gap = (0..k).map(|s| (full.states[s][0] - red.states[s][0]).abs()).fold(0.0, f64::max);
    // measured gap is 0.0159
    assert!(gap < 0.05, "sup gap {gap}");
}

#[test]
fn complete_graph_matches_reduced_model_exactly_for_uniform_neighbours() {
    let top = Topology::complete(4).unwrap();
    let dynamics = DynamicsSpec::nonlinear();
    let p = OracleParams { t_max: 3.0, ..OracleParams::default() };
    let full = integrate_full(&[0.7, 0.7, 0.7, 0.7], &top, &dynamics, &p).unwrap();
    let red = integrate_reduced((0.7, 0.7), &ReducedSystem::new(3.0, dynamics).unwrap(), &p).unwrap();
    for s in 0..full.times.len().min(red.times.len()) {
        assert!((full.states[s][2] - red.states[s][0]).abs() < 1e-10);
    }
}
