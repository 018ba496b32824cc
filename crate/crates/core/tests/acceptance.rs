//! Acceptance criteria A1..A13, one line each. Runs without the libtest
//! harness so the lines always reach the output.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};
use std::process::ExitCode;
use std::time::Instant;

use netbell::accept::{max_over_theta, triangle_lp};
use netbell::engine::{dense_expectation, expectation, ConditionalDistribution, DEFAULT_DENSE_LIMIT};
use netbell::network::{instances, Network, SourceKind};
use netbell::nslp::{self, NsLpProblem};
use netbell::observables::{Letter, PartyObservable, PauliWord};
use netbell::sim::{self, SimConfig};
use netbell::simplex::LpStatus;
use netbell::testkit::{self, RandomNetworkSpec};
use netbell::{bell, bounds, locc, transform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = netbell::Result<(bool, String)>;

fn a1() -> Check {
    let t = Instant::now();
    let (theta, r) = bell::optimize_theta(&instances::triangle_max())?;
    let secs = t.elapsed().as_secs_f64();
    let err = (r.value - 6.0 * SQRT_2).abs();
    Ok((err <= 1e-8 && secs < 1.0, format!("{:.12} at theta {theta:.6}, err {err:.1e}, {secs:.3} s", r.value)))
}

fn a2() -> Check {
    let tri = instances::triangle_max();
    let tv = transform::prepare_variants(&tri)?;
    let mut worst = f64::NEG_INFINITY;
    for p in 0..3 {
        worst = worst.max(max_over_theta(&testkit::cut_variants(&tv, &[p])?, &tri)? - (4.0 * SQRT_2 + 2.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for seed in 0..100 {
        let net = testkit::gen_connected_network(&RandomNetworkSpec { parties: 3..=4, max_particles: 0, seed: 500 + seed, ..Default::default() })?;
        let n = net.parties;
        let mask = rng.gen_range(1..(1usize << n) - 1);
        let cut: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
        let bound = if n == 3 { 4.0 * SQRT_2 + 2.0 } else { 16.0 * SQRT_2 - 4.0 * SQRT_2 + 2.0 };
        let v = max_over_theta(&testkit::cut_variants(&transform::prepare_variants(&net)?, &cut)?, &net)?;
        worst = worst.max(v - bound);
    }
    Ok((worst <= 1e-9, format!("max value - bound over 103 cuts {worst:.3e}")))
}

fn a3() -> Check {
    let v = bell::visibility_threshold(&instances::triangle_max())?;
    let closed = (1.0 - (2.0 - SQRT_2) / 6.0).powf(1.0 / 3.0);
    let ok = (v.bisection - 0.9663).abs() <= 0.0005 && (v.bisection - closed).abs() <= 1e-9;
    Ok((ok, format!("v* = {:.9}, closed form {closed:.9}", v.bisection)))
}

fn a4() -> Check {
    let t = bell::violation_threshold(3)?;
    let s = bell::c2_pairwise_threshold();
    let b = bell::c2_theta3_boundary() / PI;
    let ok = (t - 0.7928).abs() <= 1e-4 && (s - 2.37841).abs() <= 1e-4 && (s - 2.0 * 2f64.powf(0.25)).abs() <= 1e-4 && (b - 0.121).abs() <= 0.001;
    Ok((ok, format!("threshold {t:.6}, pairwise {s:.6}, theta3 > {b:.5} pi")))
}

fn a5() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let letters = [Letter::I, Letter::Z, Letter::X];
    let mut worst = 0.0f64;
    for seed in 0..200 {
        let spec = RandomNetworkSpec { parties: 2..=5, ghz_size: 3..=5, max_particles: 12, seed: 9000 + seed, ..Default::default() };
        let net = testkit::gen_connected_network(&spec)?;
        let obs: Vec<PartyObservable> = (0..net.parties)
            .map(|p| {
                let len = net.particle_count(p).unwrap();
                let terms = (0..rng.gen_range(1..=3))
                    .map(|_| (rng.gen_range(-1.0..1.0), PauliWord((0..len).map(|_| letters[rng.gen_range(0..3)]).collect())))
                    .collect();
                PartyObservable { party: p, terms }
            })
            .collect();
        worst = worst.max((expectation(&net, &obs)? - dense_expectation(&net, &obs, DEFAULT_DENSE_LIMIT)?).abs());
    }
    Ok((worst <= 1e-10, format!("max |analytic - dense| {worst:.2e} over 200 cases")))
}

fn kinds(n: &Network) -> (usize, usize) {
    let e = n.sources.iter().filter(|s| s.kind == SourceKind::Epr).count();
    (e, n.sources.iter().filter(|s| s.kind == SourceKind::Ghz { m: 4 }).count())
}

fn a6() -> Check {
    let (sq, _) = transform::to_odd_parity(&instances::square_cycle())?;
    let (tc, _) = transform::to_odd_parity(&instances::two_cycle())?;
    let mut bad = 0;
    for seed in 0..100u64 {
        let n = if seed % 2 == 0 { 4 } else { 6 };
        let spec = RandomNetworkSpec { parties: n..=n, sources: n - 1..=n + 3, max_particles: 0, seed: 300 + seed, ..Default::default() };
        let net = transform::ghz_even_normalize(&testkit::gen_connected_network(&spec)?);
        bad += usize::from(transform::to_odd_parity(&net)?.0.particle_counts().iter().any(|c| c % 2 == 0));
    }
    let ok = kinds(&sq) == (2, 2) && sq.particle_counts() == vec![3; 4] && kinds(&tc) == (3, 2) && bad == 0;
    Ok((ok, format!("square cycle {:?}, two cycle {:?}, random failures {bad}/100", kinds(&sq), kinds(&tc))))
}

fn a7() -> Check {
    let hi = bounds::guessing_bound(6.0 * SQRT_2)?;
    let lo = bounds::guessing_bound(4.0 * SQRT_2 + 2.0)?;
    // ½ + √(72 − ϖ²)/12 at ϖ = 4√2 + 2
    let oracle = 0.5 + (72.0 - (4.0 * SQRT_2 + 2.0f64).powi(2)).sqrt() / 12.0;
    let (a, b) = (4.0 * SQRT_2 + 2.0, 6.0 * SQRT_2);
    let h = 1e-4;
    let curv = (1..50)
        .map(|k| testkit::second_difference(|v| bounds::guessing_bound(v).unwrap(), a + h + (b - a - 2.0 * h) * k as f64 / 50.0, h))
        .fold(f64::NEG_INFINITY, f64::max);
    let ok = hi == 0.5 && (lo - 0.80474).abs() <= 1e-4 && (lo - oracle).abs() <= 1e-12 && curv <= 0.0;
    Ok((ok, format!("P(6sqrt2) = {hi}, P(4sqrt2+2) = {lo:.6}, max second difference {curv:.3e}")))
}

fn a8() -> Check {
    let t = Instant::now();
    let (a, b) = (4.0 * SQRT_2 + 2.0, 6.0 * SQRT_2 - 0.01);
    let (mut res, mut eig) = (0.0f64, f64::INFINITY);
    for k in 0..20u64 {
        let r = bounds::verify_sos_certificate(a + (b - a) * k as f64 / 19.0, 50, 80 + k)?;
        res = res.max(r.max_residual);
        eig = eig.min(r.min_eigenvalue);
    }
    let secs = t.elapsed().as_secs_f64();
    Ok((res <= 1e-8 && eig >= -1e-9 && secs < 30.0, format!("residual {res:.2e}, min eigenvalue {eig:.3e}, {secs:.2} s")))
}

fn a9() -> Check {
    let net = instances::triangle_max();
    let varpi = bell::evaluate(&net, FRAC_PI_4)?.value;
    let (plan, dist) = bell::observed_statistics(&net, FRAC_PI_4, DEFAULT_DENSE_LIMIT)?;
    let key = bell::all_z_inputs(&plan).expect("all-Z inputs");
    let r = bounds::key_rate(varpi, &dist, &key)?;
    Ok((r.raw >= 1.0 - 1e-9, format!("R = {:.12}, H(a|b,c) = {:.1e}", r.raw, r.conditional_entropy)))
}

fn a10() -> Check {
    let slope = (bounds::monogamy_bound(3, 8.0)? - bounds::monogamy_bound(3, 6.0)?) / 2.0;
    let at = bounds::monogamy_bound(3, 6.0 * SQRT_2)?;
    let want = 6.0 - (6.0 * SQRT_2 - 2.0 * SQRT_2 / 3.0) / 4.0;
    Ok(((slope + 0.25).abs() <= 1e-12 && (at - want).abs() <= 1e-12, format!("slope {slope}, value {at:.12}")))
}

fn toy(floor: f64, observed: Option<ConditionalDistribution>) -> NsLpProblem {
    NsLpProblem { arities: vec![2, 2], e_arity: 2, u_arity: 1, observed, functional: nslp::chsh_functional(), floor, target_party: 0, guess_inputs: None }
}

fn a11() -> Check {
    let det = ConditionalDistribution::from_fn(&[2, 2], |_, a| if a == [1, 1] { 1.0 } else { 0.0 });
    let i = nslp::solve(&toy(2.0, Some(det)))?;
    let ok1 = i.status == LpStatus::Optimal && (i.optimum - 1.0).abs() <= 1e-8;
    let ok2 = nslp::solve(&toy(4.5, None))?.status == LpStatus::Infeasible;
    let sweep = nslp::sweep(&triangle_lp(0.0)?, &[7.657, 8.0, 8.4])?;
    let ok3 = sweep.iter().all(|p| p.status == LpStatus::Optimal) && sweep.windows(2).all(|w| w[1].optimum <= w[0].optimum + 1e-9);
    let vertices = testkit::ns_vertex_oracle(2, 2, 2)?;
    let f = nslp::chsh_functional();
    let mut gap = 0.0f64;
    for floor in [0.0, 2.0, 2.5, 3.0, 3.5, 4.0] {
        let bf = testkit::brute_force_guess(&vertices, |v| bell::functional_value(&f, v).unwrap(), &[0, 0], floor).unwrap();
        gap = gap.max((nslp::solve(&toy(floor, None))?.optimum - bf).abs());
    }
    let opt: Vec<f64> = sweep.iter().map(|p| p.optimum).collect();
    Ok((ok1 && ok2 && ok3 && gap <= 1e-8, format!("(i) {:.10} (ii) {ok2} (iii) {opt:.9?} (iv) gap {gap:.1e}", i.optimum)))
}

fn a12() -> Check {
    let mut worst = 0.0f64;
    for k in 0..10u64 {
        let (ta, tb) = (0.31 * k as f64, 0.5 + 0.4 * k as f64);
        let r = sim::simulate_singlet(sim::xz(ta), sim::xz(tb), 1_000_000, 700 + k)?;
        worst = worst.max((r.estimate - r.target).abs() / r.stderr);
    }
    let mut ident = 0.0f64;
    for i in 0..10 {
        for j in 0..10 {
            let (ta, tb) = (i as f64 * 0.7, j as f64 * 0.65);
            let a = sim::chain_algebra(ta, tb);
            ident = ident.max(((a.branches[0] + a.branches[1]) / 2.0 - (ta - tb).cos()).abs());
        }
    }
    let mut bits = true;
    for k in 2..=6 {
        let cfg = SimConfig { k, theta_a: PI / 3.0, theta_b: PI / 6.0, samples: 1000, seed: 1 };
        bits &= sim::compose_chain(&cfg)?.result.bits_per_round as usize <= 2 * (k - 1);
    }
    Ok((worst <= 4.0 && ident <= 1e-12 && bits, format!("max deviation {worst:.2} stderr, identity {ident:.1e}, bits ok {bits}")))
}

/// Swap fidelity against the stated (v1+v2)/2, and the dense value against
/// (1+3v1v2)/4, on a 5x5 grid; GHZ reduction against the dense route.
fn a13_parts() -> netbell::Result<(f64, f64, f64, f64)> {
    let grid = [0.2, 0.4, 0.6, 0.8, 1.0];
    let (mut stated, mut werner, mut model) = (0.0f64, 0.0f64, 0.0f64);
    for &v1 in &grid {
        for &v2 in &grid {
            let (avg, _) = locc::swap_werner_dense(v1, v2);
            let f = 0.5 * (avg[(0, 0)] + avg[(0, 3)] + avg[(3, 0)] + avg[(3, 3)]);
            stated = stated.max((f - (v1 + v2) / 2.0).abs());
            werner = werner.max((f - (1.0 + 3.0 * v1 * v2) / 4.0).abs());
            model = model.max((f - locc::swap_werner(v1, v2)?.fidelity).abs());
        }
    }
    let mut red = 0.0f64;
    for k in 3..=5 {
        let want = locc::werner(&locc::ghz_vector(k - 1), 0.8);
        let v = locc::ghz_reduce_werner(k, 0.8)?.visibility;
        for (_, r) in locc::ghz_reduce_dense(k, v) {
            red = red.max((r - &want).abs().max());
        }
    }
    Ok((stated, werner, model, red))
}

fn a13() -> Check {
    let (stated, werner, model, red) = a13_parts()?;
    Ok((stated <= 1e-10 && red <= 1e-10, format!("gap to (v1+v2)/2 {stated:.4}; to (1+3v1v2)/4 {werner:.1e}; swap_werner {model:.1e}; GHZ reduction {red:.1e}")))
}

fn main() -> ExitCode {
    let checks: [(&str, fn() -> Check); 13] = [
        ("A1", a1),
        ("A2", a2),
        ("A3", a3),
        ("A4", a4),
        ("A5", a5),
        ("A6", a6),
        ("A7", a7),
        ("A8", a8),
        ("A9", a9),
        ("A10", a10),
        ("A11", a11),
        ("A12", a12),
        ("A13", a13),
    ];
    let mut unexpected = Vec::new();
    for (id, f) in checks {
        let t = Instant::now();
        let (ok, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        let known = id == "A13" && !ok;
        println!("{id:<4} {}  {detail} ({:.2} s){}", if ok { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64(), if known { " [known deviation]" } else { "" });
        if !ok && !known {
            unexpected.push(id);
        }
    }
    // A13 fails because the stated swap fidelity is wrong; pin that it fails
    // for exactly that reason and nothing else.
    match a13_parts() {
        Ok((stated, werner, model, red)) => {
            let exact = (stated - 0.2).abs() <= 1e-12 && werner <= 1e-10 && model <= 1e-10 && red <= 1e-10;
            println!("A13 deviation is the documented one: {exact}");
            if !exact {
                unexpected.push("A13 deviation");
            }
        }
        Err(e) => {
            println!("A13 error: {e}");
            unexpected.push("A13");
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
