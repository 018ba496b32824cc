use netbell::accept::triangle_lp;
use netbell::bell;
use netbell::engine::ConditionalDistribution;
use netbell::nslp::{self, NsLpProblem};
use netbell::simplex::LpStatus;
use netbell::testkit;
use proptest::prelude::*;

fn chsh(floor: f64, observed: Option<ConditionalDistribution>) -> NsLpProblem {
    NsLpProblem { arities: vec![2, 2], e_arity: 2, u_arity: 1, observed, functional: nslp::chsh_functional(), floor, target_party: 0, guess_inputs: None }
}

fn brute(floor: f64) -> f64 {
    let v = testkit::ns_vertex_oracle(2, 2, 2).unwrap();
    let f = nslp::chsh_functional();
    testkit::brute_force_guess(&v, |d| bell::functional_value(&f, d).unwrap(), &[0, 0], floor).unwrap()
}

#[test]
fn lp_file_parses_and_solves() {
    let p: NsLpProblem = serde_json::from_str(&std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/lp-chsh.json")).unwrap()).unwrap();
    let s = nslp::solve(&p).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.optimum - 0.875).abs() < 1e-9);
}

#[test]
fn deterministic_box_is_guessable() {
    let det = ConditionalDistribution::from_fn(&[2, 2], |_, a| if a == [1, 1] { 1.0 } else { 0.0 });
    let s = nslp::solve(&chsh(2.0, Some(det))).unwrap();
    assert!((s.optimum - 1.0).abs() < 1e-8);
}

#[test]
fn above_algebraic_max_is_infeasible() {
    assert_eq!(nslp::solve(&chsh(4.5, None)).unwrap().status, LpStatus::Infeasible);
    assert!((chsh(0.0, None).algebraic_max().unwrap() - 4.0).abs() < 1e-12);
}

#[test]
fn sweep_rejects_descending_floors() {
    assert!(nslp::sweep(&chsh(0.0, None), &[3.0, 2.5]).is_err());
}

#[test]
fn lp_size_is_limited() {
    assert!(nslp::build_lp(&chsh(2.0, None), 10).is_err());
    assert!(nslp::build_lp(&chsh(2.0, None), nslp::DEFAULT_SIZE_LIMIT).is_ok());
}

// Tsirelson-box statistics admit the same guess as the NS bound at S = 2√2
#[test]
fn triangle_observed_fixture() {
    let s = nslp::solve(&triangle_lp(7.657).unwrap()).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.optimum - (1.5 - 0.5f64.sqrt())).abs() < 1e-9, "{}", s.optimum);
    assert!(s.residual < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // mixing a PR box (S = 4, guess ½) with a deterministic box (S = 2, guess 1): 3/2 − S/4
    #[test]
    fn chsh_closed_form(s in 2.0f64..4.0) {
        let lp = nslp::solve(&chsh(s, None)).unwrap();
        prop_assert_eq!(lp.status, LpStatus::Optimal);
        prop_assert!((lp.optimum - (1.5 - s / 4.0)).abs() < 1e-8);
        prop_assert!((lp.optimum - brute(s)).abs() < 1e-8);
    }

    #[test]
    fn optimum_is_monotone(a in 0.0f64..4.0, b in 0.0f64..4.0) {
        let (lo, hi) = (a.min(b), a.max(b));
        let pts = nslp::sweep(&chsh(0.0, None), &[lo, hi]).unwrap();
        prop_assert!(pts[1].optimum <= pts[0].optimum + 1e-9);
    }

    #[test]
    fn dual_and_direct_routes_agree(w in prop::collection::vec(0.0f64..1.0, 24), floor in 0.0f64..3.0) {
        prop_assume!(w.iter().sum::<f64>() > 1e-3);
        let v = testkit::ns_vertex_oracle(2, 2, 2).unwrap();
        let total: f64 = w.iter().sum();
        let mut table = vec![0.0; v[0].table.len()];
        for (wi, d) in w.iter().zip(&v) {
            for (t, p) in table.iter_mut().zip(&d.table) {
                *t += wi / total * p;
            }
        }
        let p = chsh(floor, Some(ConditionalDistribution { arities: vec![2, 2], table }));
        let a = nslp::solve(&p).unwrap();
        let b = nslp::solve_direct(&p).unwrap();
        prop_assert_eq!(a.status, b.status);
        if a.status == LpStatus::Optimal {
            prop_assert!((a.optimum - b.optimum).abs() < 1e-8, "{} vs {}", a.optimum, b.optimum);
        }
    }
}
