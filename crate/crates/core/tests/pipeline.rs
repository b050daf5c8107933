use period_lattice::infra::from_corners_1d;
use period_lattice::pipeline::{distance_to_basis, run_pipeline, PipelineSettings};
use period_lattice::planner::{input_from_infra, plan, PlanMode};
use period_lattice::sampler::targets::Rounding;
use period_lattice::sampler::TERM_BUDGET;
use period_lattice::{q, qi, Lattice};

#[test]
fn distance_to_nearest_exact_basis() {
    let l = Lattice::from_ints(&[vec![40]]).unwrap();
    assert_eq!(distance_to_basis(&l, &[vec![q(403, 10)]]).unwrap(), Some(q(3, 10)));
    assert_eq!(distance_to_basis(&l, &[vec![q(-399, 10)]]).unwrap(), Some(q(1, 10)));
    // coordinates round half up; a vector rounding to zero gives no basis
    assert_eq!(distance_to_basis(&l, &[vec![qi(20)]]).unwrap(), Some(qi(20)));
    assert_eq!(distance_to_basis(&l, &[vec![qi(15)]]).unwrap(), None);
    let sq = Lattice::from_ints(&[vec![10, 0], vec![0, 10]]).unwrap();
    let b = vec![vec![qi(10), q(1, 10)], vec![qi(10), qi(10)]];
    assert_eq!(distance_to_basis(&sq, &b).unwrap(), Some(q(1, 10)));
    let doubled = vec![vec![qi(20), qi(0)], vec![qi(0), qi(10)]];
    assert_eq!(distance_to_basis(&sq, &doubled).unwrap(), None);
}

#[test]
fn pipeline_attempts_are_reproducible() {
    let infra = from_corners_1d(&qi(40), &[qi(0), qi(13), qi(27)], &qi(1)).unwrap();
    let mut inp = input_from_infra(&infra, qi(1)).unwrap();
    inp.big_n = Some(32);
    inp.q = Some(17126);
    inp.kappa = Some(q(1, 9).into());
    let planned = plan(&inp, PlanMode::DeskPipeline).unwrap();
    assert!(planned.mode_satisfied());
    let settings = PipelineSettings { attempts: 6, seed: 1, reduction: None, rounding: Rounding::Nearest, budget_terms: TERM_BUDGET };
    let a = run_pipeline(&infra, &planned, &settings).unwrap();
    let b = run_pipeline(&infra, &planned, &settings).unwrap();
    assert_eq!(a.attempts.len(), 6);
    let key = |r: &period_lattice::pipeline::PipelineReport| {
        r.attempts.iter().map(|x| (x.seed, x.good_shift, x.generated, x.success, x.distance.map(f64::to_bits))).collect::<Vec<_>>()
    };
    assert_eq!(key(&a), key(&b));
    for att in &a.attempts {
        assert_eq!(att.samples.len(), 2);
        // success is exactly an accepted distance
        assert_eq!(att.success, att.distance.is_some_and(|d| d <= 1.0));
    }
}
