use num_traits::{One, Signed};
use period_lattice::generation::{brute_force_generation_probability, exact_generation_probability, FiniteAbelianGroup, WindowSample};
use period_lattice::lattice::random::{random_lattice, random_unimodular};
use period_lattice::lattice::{covering_radius_bound, kz, lll, quality_factor_sq, successive_minima, ReductionMode};
use period_lattice::linalg::{abs_det, to_q_cols};
use period_lattice::planner::{plan, PlanMode, PlannerInput};
use period_lattice::rational::{norm2, pow};
use period_lattice::real::cos_q;
use period_lattice::rng::stream;
use period_lattice::sampler::{premise_grid, premise_window};
use period_lattice::{q, qi, Lattice, Q, Z};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 500, ..ProptestConfig::default() }
}

fn lattice(seed: u64, k: usize) -> Lattice {
    random_lattice(k, 5, 3, &mut stream(seed, "prop-lattice", k as u64))
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn reductions_are_unimodular(seed in any::<u64>(), k in 1usize..=4) {
        let l = lattice(seed, k);
        for red in [lll(&l.basis).unwrap(), kz(&l.basis).unwrap()] {
            prop_assert_eq!(abs_det(&to_q_cols(&red.transform)), Q::one());
            prop_assert!(Lattice::new(red.basis).unwrap().same_lattice(&l));
        }
    }

    #[test]
    fn reduction_quality_against_minima(seed in any::<u64>(), k in 1usize..=4) {
        let l = lattice(seed, k);
        let mins = successive_minima(&l.basis).unwrap();
        for mode in [ReductionMode::Lll, ReductionMode::Kz] {
            let red = if mode == ReductionMode::Lll { lll(&l.basis).unwrap() } else { kz(&l.basis).unwrap() };
            let f2 = quality_factor_sq(mode, k);
            for (b, (_, m2)) in red.basis.iter().zip(&mins) {
                prop_assert!(norm2(b) <= &f2 * m2);
            }
        }
    }

    #[test]
    fn dual_is_an_involution(seed in any::<u64>(), k in 1usize..=4) {
        let l = lattice(seed, k);
        let d = l.dual().unwrap();
        prop_assert!(d.dual().unwrap().same_lattice(&l));
        prop_assert_eq!((d.det().unwrap() * l.det().unwrap()).abs(), Q::one());
        // unimodular change of basis leaves the dual unchanged
        let u = random_unimodular(k, 8, 2, &mut stream(seed, "prop-unimodular", 0));
        let cols: Vec<Vec<Q>> = u
            .iter()
            .map(|c| (0..k).map(|i| c.iter().zip(&l.basis).map(|(&x, b)| qi(x) * &b[i]).sum()).collect())
            .collect();
        let l2 = Lattice::new(cols).unwrap();
        prop_assert!(l2.same_lattice(&l));
        prop_assert!(l2.dual().unwrap().same_lattice(&d));
    }

    #[test]
    fn window_count_sandwich(seed in any::<u64>(), k in 1usize..=3, extra in 1i64..8) {
        let l = lattice(seed, k);
        let b = covering_radius_bound(&l).unwrap() * q(2 * extra + 1, 1) + q(1, 3);
        let ws = WindowSample::new(&l, &b, 5_000_000).unwrap();
        let (lo, count, hi) = ws.sandwich(&l).unwrap();
        let c = qi(count as i64);
        prop_assert!(lo <= c && c <= hi, "{} {} {}", lo, count, hi);
    }

    #[test]
    fn cosine_encloses(num in 0i64..=4000) {
        let x = q(num, 1000);
        let c = cos_q(&x);
        let want = (num as f64 / 1000.0).cos();
        prop_assert!(period_lattice::rational::to_f64(&c.lo) <= want + 1e-15);
        prop_assert!(period_lattice::rational::to_f64(&c.hi) >= want - 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 60, ..ProptestConfig::default() })]

    #[test]
    fn group_probability_matches_enumeration(d1 in 2i64..5, m in 1i64..3, count in 1usize..4) {
        let g = FiniteAbelianGroup::new(vec![d1, d1 * m]).unwrap();
        prop_assert_eq!(exact_generation_probability(&g, count), brute_force_generation_probability(&g, count));
    }
}

fn desk_input(n: usize, a: i64, c_den: i64, d: i64, lambda1: i64, det_extra: i64) -> PlannerInput {
    let det = pow(&qi(lambda1), n as u32) * qi(det_extra);
    let lambda1 = if n == 1 { det.clone() } else { qi(lambda1) };
    PlannerInput::new(n, qi(a), q(1, c_den), qi(d), lambda1, det, qi(1))
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn desk_ledger_is_sound(n in 1usize..=3, a in 1i64..20, c_den in 1i64..4, d in 1i64..4, l1 in 1i64..12, extra in 1i64..4) {
        let inp = desk_input(n, a, c_den, d, l1, extra);
        let p = plan(&inp, PlanMode::Desk).unwrap();
        prop_assert!(p.mode_satisfied());
        // the chosen values satisfy the premises re-derived independently
        let (big_n, _, q_, l) = p.desk_values().unwrap();
        let l1sq = &inp.lambda1.0 * &inp.lambda1.0;
        prop_assert!(premise_grid(n, big_n, &l1sq));
        let need = qi(4 * n as i64) * &inp.d.0 * pow(&((qi(q_ as i64) + &inp.a.0 + &inp.c.0 + qi(2)) / &inp.c.0), n as u32);
        prop_assert!(qi(l as i64) >= need);
        prop_assert!(p.kappa.0 < q(1, 8 * n as i64) - Q::new(Z::one(), Z::from(4 * n as u64 * q_ * big_n)));
    }

    #[test]
    fn desk_plan_is_monotone(n in 1usize..=2, a in 1i64..20, d in 1i64..4, l1 in 1i64..12, bump in 1i64..5) {
        let base = plan(&desk_input(n, a, 1, d, l1, 1), PlanMode::Desk).unwrap();
        // more cells per period or wider boxes never shrink the shift count
        let more_d = plan(&desk_input(n, a, 1, d + bump, l1, 1), PlanMode::Desk).unwrap();
        prop_assert!(more_d.l_z() >= base.l_z());
        let more_a = plan(&desk_input(n, a + bump, 1, d, l1, 1), PlanMode::Desk).unwrap();
        prop_assert!(more_a.l_z() >= base.l_z());
        // a longer shortest vector never needs a finer grid
        if n > 1 {
            let longer = plan(&desk_input(n, a, 1, d, l1 + bump, 1), PlanMode::Desk).unwrap();
            prop_assert!(longer.big_n_z() <= base.big_n_z());
        }
    }

    #[test]
    fn theorem_plan_meets_desk_plan(n in 1usize..=2, a in 1i64..10, d in 1i64..3, l1 in 2i64..6) {
        let inp = desk_input(n, a, 1, d, l1, 1);
        let t = plan(&inp, PlanMode::Theorem).unwrap();
        let desk = plan(&inp, PlanMode::Desk).unwrap();
        prop_assert!(t.mode_satisfied());
        prop_assert!(t.q_z() >= desk.q_z());
        prop_assert!(t.big_n_z() >= desk.big_n_z());
    }
}

#[test]
fn premise_window_matches_definition() {
    // q > 2 n nu + 3n/N
    assert!(premise_window(1, 41, 32, &qi(20)));
    assert!(!premise_window(1, 40, 32, &qi(20)));
}
