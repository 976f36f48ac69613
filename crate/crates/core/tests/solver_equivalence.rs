mod common;

use common::{random_instance, right_constrained};
use divmatch::exact::warm_start;
use divmatch::{
    brute_force, check_matching, f2, solve_dwbm_exact, solve_wbm, EnumerationBudget, Objective,
    Status,
};

const TOL: f64 = 1e-9;

#[test]
fn wbm_and_exact_match_oracle_on_small_instances() {
    let budget = EnumerationBudget::default();
    for seed in 1000..1300 {
        let inst = random_instance(seed, (2, 4), (2, 4), 3);
        let o1 = brute_force(&inst, Objective::F1, &budget).unwrap();
        let o2 = brute_force(&inst, Objective::F2, &budget).unwrap();
        let w = solve_wbm(&inst);
        let d = solve_dwbm_exact(&inst, None);
        if o1.status == Status::Infeasible {
            assert_eq!(w.status, Status::Infeasible, "seed {seed}");
            assert_eq!(d.status, Status::Infeasible, "seed {seed}");
            continue;
        }
        assert_eq!(w.status, Status::Optimal, "seed {seed}");
        assert_eq!(d.status, Status::Optimal, "seed {seed}");
        assert!(
            (w.objective_f1 - o1.objective_f1).abs() <= TOL,
            "seed {seed}"
        );
        assert!(
            (d.objective_f2 - o2.objective_f2).abs() <= TOL,
            "seed {seed}"
        );
        assert!(check_matching(&inst, &w.matching).unwrap().is_feasible());
        assert!(check_matching(&inst, &d.matching).unwrap().is_feasible());
        if let Some(ws) = warm_start(&inst) {
            assert!(f2(&inst, &ws) >= d.objective_f2 - TOL, "seed {seed}");
        }
    }
}

#[test]
fn single_cluster_right_constrained_exact_matches_oracle() {
    let budget = EnumerationBudget::default();
    for seed in 0..100 {
        let inst = right_constrained(seed, 4, 3, 1);
        let o = brute_force(&inst, Objective::F2, &budget).unwrap();
        let d = solve_dwbm_exact(&inst, None);
        assert_eq!(d.status, Status::Optimal);
        assert!(
            (d.objective_f2 - o.objective_f2).abs() <= TOL,
            "seed {seed}"
        );
        // One cluster: each right node takes its R- lightest edges, as WBM does.
        let w = solve_wbm(&inst);
        assert!(
            (w.objective_f1 - d.objective_f1).abs() <= TOL,
            "seed {seed}"
        );
    }
}
