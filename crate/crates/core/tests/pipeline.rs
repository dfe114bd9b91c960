use cohesive_pf::assembly::{
    assemble_momentum, Constraints, Discretization, MomentumAssembly, MomentumOptions,
    SparsePattern, SystemVectors,
};
use cohesive_pf::constitutive::{IpState, MaterialParams};
use cohesive_pf::mesh::generate_plate_with_hole;
use cohesive_pf::sim::{build_simulation, parse_config, run_simulation};
use cohesive_pf::solver::linear_solve;

/// Elastic plate-with-hole system: bottom clamped, top pulled up by `lift`.
#[test]
fn direct_solve_of_an_assembled_plate() {
    let disc = Discretization::new(generate_plate_with_hole(0.08).unwrap()).unwrap();
    let params = MaterialParams::default();
    let lift = 1e-6;
    let mut constraints = Constraints::new();
    constraints
        .apply_dirichlet(&disc.mesh, &disc.dofs, "bottom", 0, 0.0)
        .unwrap();
    constraints
        .apply_dirichlet(&disc.mesh, &disc.dofs, "bottom", 1, 0.0)
        .unwrap();
    constraints
        .apply_dirichlet(&disc.mesh, &disc.dofs, "top", 1, lift)
        .unwrap();
    let (to_free, free) = constraints.free_numbering(disc.dofs.n_u());
    let dofs: Vec<usize> = disc
        .mesh
        .elements
        .iter()
        .flat_map(|el| disc.dofs.element_u_dofs(el).map(|d| to_free[d]))
        .collect();
    let pattern = SparsePattern::build(free.len(), 18, &dofs);
    let mut out = MomentumAssembly::new(&disc, &pattern, false);
    let mut state = SystemVectors::zeros(&disc.dofs);
    constraints.impose(&mut state.u);
    let ip_states = vec![IpState::default(); disc.ip_count()];
    assemble_momentum(
        &mut out,
        &disc,
        &pattern,
        &state,
        &params,
        &ip_states,
        &MomentumOptions::default(),
    )
    .unwrap();
    assert_eq!(out.inelastic_ips, 0);
    assert!(out.matrix.relative_asymmetry() < 1e-12);

    let rhs: Vec<f64> = free.iter().map(|&d| -out.residual[d]).collect();
    let du = linear_solve(&out.matrix, &rhs).unwrap();
    let mut r = vec![0.0; rhs.len()];
    out.matrix.matvec(&du, &mut r);
    let res = r
        .iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let norm = rhs.iter().map(|b| b * b).sum::<f64>().sqrt();
    assert!(res <= 1e-10 * norm, "relative residual {:e}", res / norm);

    // linear problem: one correction lands on equilibrium
    for (i, &d) in free.iter().enumerate() {
        state.u[d] += du[i];
    }
    assemble_momentum(
        &mut out,
        &disc,
        &pattern,
        &state,
        &params,
        &ip_states,
        &MomentumOptions::default(),
    )
    .unwrap();
    let free_res = free
        .iter()
        .map(|&d| out.residual[d].powi(2))
        .sum::<f64>()
        .sqrt();
    assert!(free_res <= 1e-8 * norm);
    // the top lifts, the plate contracts laterally
    let top = disc.mesh.set("top").unwrap();
    let reaction: f64 = top
        .nodes
        .iter()
        .map(|&n| out.residual[disc.dofs.u(n, 1)])
        .sum();
    assert!(reaction > 0.0);
}

#[test]
fn zero_rate_gives_flat_zero_trace() {
    let config =
        parse_config("geometry = plate_hole\ndx = 0.08\nrate = 0\nn_steps = 3\ndt = 1\n").unwrap();
    let mut sim = build_simulation(&config).unwrap();
    let outcome = run_simulation(&mut sim, &config, None).unwrap();
    assert_eq!(outcome.records.len(), 3);
    assert!(outcome
        .records
        .iter()
        .all(|r| r.reaction == 0.0 && r.crack_length == 0.0));
    assert!(outcome.invariants.holds());
}

#[test]
fn elastic_reaction_scales_with_applied_strain() {
    // damping off, otherwise the first step from rest carries a viscous share
    let config =
        parse_config("geometry = plate_hole\ndx = 0.08\nn_steps = 4\ndt = 1\nc = 0\n").unwrap();
    let mut sim = build_simulation(&config).unwrap();
    let outcome = run_simulation(&mut sim, &config, None).unwrap();
    let r: Vec<f64> = outcome
        .records
        .iter()
        .map(|r| r.reaction / r.applied)
        .collect();
    for w in r.windows(2) {
        assert!((w[1] - w[0]).abs() <= 1e-6 * w[0].abs(), "{r:?}");
    }
    // effective stiffness sits below the plane-strain modulus because of the hole
    let m = sim.params.moduli.p_wave_modulus();
    assert!(r[0] > 0.3 * m && r[0] < m, "{} vs {m}", r[0]);
}
