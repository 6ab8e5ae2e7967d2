use rankone_core::envs::{
    gen_garnet, gen_graph, gen_graph_with_layout, gen_gridworld, GarnetSpec, GridworldSpec,
    GridworldVariant,
};
use rankone_core::mdp::validate_mdp;
use rankone_core::Policy;

#[test]
fn generators_emit_valid_models() {
    for seed in 0..20 {
        let g = gen_garnet::<f64>(&GarnetSpec { n: 30, m: 3, branching: 1 + seed as usize % 30, seed }, 0.95).unwrap();
        validate_mdp(&g).unwrap();
        for row in g.kernel().chunks_exact(30) {
            assert_eq!(row.iter().filter(|&&p| p > 0.0).count(), 1 + seed as usize % 30);
        }
        let slip = (seed as f64) / 21.0;
        let (graph, layout) = gen_graph_with_layout::<f64>(2 + seed as usize, slip, seed, 0.9).unwrap();
        validate_mdp(&graph).unwrap();
        assert_eq!(graph.m(), layout.max_out_degree());
        for row in graph.kernel().chunks_exact(graph.n()) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }
    let g32 = gen_garnet::<f32>(&GarnetSpec { n: 20, m: 2, branching: 5, seed: 1 }, 0.9).unwrap();
    validate_mdp(&g32).unwrap();
}

#[test]
fn graph_default_is_small() {
    let mdp = gen_graph::<f64>(6, 0.2, 0, 0.9).unwrap();
    assert_eq!(mdp.n(), 6);
    assert!(mdp.kernel().iter().all(|&p| p >= 0.0));
}

#[test]
fn gridworld_chains_are_reducible() {
    for variant in [GridworldVariant::TerminalZeroReward, GridworldVariant::AbsorbingPositiveReward] {
        let spec = GridworldSpec::default_for(variant);
        let mdp = gen_gridworld::<f64>(&spec, 0.9).unwrap();
        validate_mdp(&mdp).unwrap();
        for a in 0..4 {
            let pi = Policy(vec![a; mdp.n()]);
            let chain = mdp.induced_chain(&pi).unwrap();
            let goal = spec.goal_state();
            // Nothing leaves the goal, so the goal cannot reach any other cell.
            for j in 0..mdp.n() {
                assert_eq!(chain.p_state[(goal, j)], if j == goal { 1.0 } else { 0.0 });
            }
        }
    }
}
