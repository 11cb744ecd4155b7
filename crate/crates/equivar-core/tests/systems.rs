//! End-to-end checks of the assembled equation systems against simulated
//! tensors and points of no evolution.

use equivar_core::ci_builder::build_ci;
use equivar_core::model_param::{evaluate_psi, random_parameters, SampleOptions};
use equivar_core::tree::parse_newick;
use equivar_core::verify::{check_vanishing, claw_hypothesis_check, generic_no_evolution, RANK_TOL};
use equivar_core::{Model, ModelName, Provenance};

fn system_report(name: ModelName, newick: &str, expected: usize) {
    let model = Model::builtin(name);
    let tree = parse_newick(newick).unwrap();
    let sys = build_ci(&model, &tree).unwrap();
    assert_eq!(sys.len(), expected, "{name:?} {newick}");
    for seed in 0..5 {
        let params = random_parameters(&model, &tree, seed, SampleOptions::default()).unwrap();
        let p = evaluate_psi(&model, &tree, &params).unwrap();
        let r = check_vanishing(&sys, &p, 1e-8).unwrap();
        assert!(r.pass, "{name:?} {newick} seed {seed}: {}", r.observed);
    }
    for seed in 0..3 {
        let p = generic_no_evolution(&model, tree.n_leaves(), seed).unwrap();
        let q = sys.coords_of(&p).unwrap();
        assert_eq!(sys.jacobian_rank(&q, RANK_TOL), expected, "{name:?} {newick} rank");
    }
}

#[test]
fn jc_quartet() {
    let model = Model::builtin(ModelName::Jc);
    let sys = build_ci(&model, &parse_newick("((1,2),(3,4));").unwrap()).unwrap();
    assert_eq!((sys.count(Provenance::ClawA), sys.count(Provenance::ClawB), sys.count(Provenance::Edge)), (1, 1, 7));
    system_report(ModelName::Jc, "((1,2),(3,4));", 9);
}

#[test]
fn gmm_tripod() {
    system_report(ModelName::Gmm, "(1,2,3);", 24);
}

#[test]
fn ss_quartet() {
    system_report(ModelName::Ss, "((1,2),(3,4));", 96);
}

#[test]
fn claw_hypothesis() {
    for (name, d) in [(ModelName::Gmm, 3), (ModelName::Ss, 3), (ModelName::Jc, 3)] {
        let r = claw_hypothesis_check(&Model::builtin(name), d, 3, 0, RANK_TOL).unwrap();
        assert!(r.pass, "{name:?}: {} vs {}", r.observed, r.expected);
    }
}
