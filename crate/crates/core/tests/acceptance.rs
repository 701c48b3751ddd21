//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use qmdl::estim::{mle, predict_next, uniform_grid, ParamModel};
use qmdl::opcore::{norms, Density, Op};
use qmdl::projlat::{classify, q_project, ComplexityTag, ProjSystem};
use qmdl::qsource::{
    conjugate, convex_combine, marginal_residual, outcome_prob, universality_check, MixtureSource,
    QuadratureSource, UniformPriorSource, UniversalityMode,
};
use qmdl::rng::{haar_unitary, random_density, random_hermitian, seeded};
use qmdl::words::OutcomeWord;
use qmdl::xplab::{bound_run, consistency_run, markov_run, redundancy_run, ExperimentConfig, RunStatus};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, elapsed: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn laplace_rule() -> Check {
    let start = Instant::now();
    let q = ProjSystem::computational(2);
    let mut worst = (0.0f64, 0.0f64);
    for c in [0.0, 1.0] {
        let exact = UniformPriorSource::new(c).map_err(e)?;
        let quad = QuadratureSource::example_uniform(c, 2048).map_err(e)?;
        for n in 0..=20 {
            for k in 0..=n {
                let w = OutcomeWord::binary(n, k).map_err(e)?;
                let want = (k + 1) as f64 / (n + 2) as f64;
                let a = (predict_next(&exact, &q, &w).map_err(e)?[0] - want).abs();
                let b = (predict_next(&quad, &q, &w).map_err(e)?[0] - want).abs();
                ensure(a <= 1e-12, || format!("closed form n={n} k={k} c={c}: error {a:e}"))?;
                ensure(b <= 1e-6, || format!("quadrature n={n} k={k} c={c}: error {b:e}"))?;
                worst = (worst.0.max(a), worst.1.max(b));
            }
        }
    }
    within(Duration::from_secs(5), start.elapsed())?;
    Ok(format!("max error closed form {:.1e}, quadrature {:.1e}", worst.0, worst.1))
}

fn mixture_marginal() -> Check {
    let q = ProjSystem::computational(2);
    let src = UniformPriorSource::new(0.0).map_err(e)?;
    let mut worst = 0.0f64;
    for n in 0..=12u32 {
        for k in 0..=n {
            let w = OutcomeWord::binary(n as usize, k as usize).map_err(e)?;
            let binom = statrs::function::factorial::binomial(n as u64, k as u64);
            let want = 1.0 / ((n + 1) as f64 * binom);
            let got = outcome_prob(&src, &q, &w).map_err(e)?;
            let err = (got - want).abs();
            ensure(err <= 1e-12, || format!("n={n} k={k}: {got} vs {want}"))?;
            worst = worst.max(err);
        }
    }
    let spot = outcome_prob(&src, &q, &OutcomeWord::binary(5, 2).map_err(e)?).map_err(e)?;
    ensure((spot - 1.0 / 60.0).abs() <= 1e-12, || format!("n=5 k=2 gave {spot}"))?;
    Ok(format!("max error {worst:.1e}, n=5 k=2 -> {spot:.15}"))
}

fn mle_closed_form() -> Check {
    let q = ProjSystem::computational(2);
    let mut cases = 0;
    for n in 1..=100usize {
        let grid = uniform_grid(n + 1);
        let model = ParamModel::example(0.5, grid.clone()).map_err(e)?;
        for k in 0..=n {
            let w = OutcomeWord::binary(n, k).map_err(e)?;
            let got = mle(&model, &q, &w).map_err(e)?.theta_hat;
            let want = k as f64 / n as f64;
            ensure(got == Some(want), || format!("n={n} k={k}: {got:?} vs {want}"))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} words, all exact"))
}

fn random_partition<R: Rng>(d: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut cols: Vec<usize> = (0..d).collect();
    cols.shuffle(rng);
    let mut groups = Vec::new();
    let mut start = 0;
    while start < d {
        let len = rng.random_range(1..=d - start);
        groups.push(cols[start..start + len].to_vec());
        start += len;
    }
    groups
}

/// Merges consecutive groups at random.
fn coarsen<R: Rng>(groups: &[Vec<usize>], rng: &mut R) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![groups[0].clone()];
    for g in &groups[1..] {
        if rng.random_bool(0.5) {
            out.last_mut().unwrap().extend(g);
        } else {
            out.push(g.clone());
        }
    }
    out
}

fn q_projection_suite() -> Check {
    let start = Instant::now();
    let mut rng = seeded(4);
    let mut checks = 0usize;
    for i in 0..1000 {
        let d = [2, 4, 8][i % 3];
        let u = haar_unitary(d, &mut rng);
        let fine_groups = random_partition(d, &mut rng);
        let coarse_groups = coarsen(&fine_groups, &mut rng);
        let fine = ProjSystem::from_basis_groups(&u, &fine_groups).map_err(e)?;
        let coarse = ProjSystem::from_basis_groups(&u, &coarse_groups).map_err(e)?;
        let minimal = ProjSystem::from_basis(&u).map_err(e)?;
        let t = random_hermitian(d, &mut rng).into_op();
        let s = random_hermitian(d, &mut rng).into_op();
        let tol = 1e-9 * (1.0 + t.op_norm() * s.op_norm());
        let proj = |x: &Op, q: &ProjSystem| q_project(x, q).map_err(e);
        let fail = |what: &str, v: f64| format!("instance {i} (dim {d}): {what} off by {v:e}");

        for q in [&fine, &coarse, &minimal] {
            let tq = proj(&t, q)?;
            let dt = (tq.trace() - t.trace()).norm();
            ensure(dt <= 1e-9, || fail("trace", dt))?;
            let (a, b) = (norms(&tq), norms(&t));
            ensure(a.op_norm <= b.op_norm + 1e-10, || fail("operator norm", a.op_norm - b.op_norm))?;
            ensure(a.trace_inner_norm <= b.trace_inner_norm + 1e-10, || {
                fail("trace-inner norm", a.trace_inner_norm - b.trace_inner_norm)
            })?;
            let idem = proj(&tq, q)?.max_abs_diff(&tq);
            ensure(idem <= tol, || fail("idempotence", idem))?;
            let sq = proj(&s, q)?;
            let prod = &tq * &sq;
            let closed = proj(&prod, q)?.max_abs_diff(&prod);
            ensure(closed <= tol, || fail("product closure", closed))?;
            checks += 5;
        }
        // The finer system wins in either order.
        let tf = proj(&t, &fine)?;
        let collapse = tf
            .max_abs_diff(&proj(&proj(&t, &coarse)?, &fine)?)
            .max(tf.max_abs_diff(&proj(&tf, &coarse)?));
        ensure(collapse <= tol, || fail("refinement collapse", collapse))?;

        let tp = proj(&t, &coarse)?;
        let module = proj(&(&s * &tp), &coarse)?.max_abs_diff(&(&proj(&s, &coarse)? * &tp));
        ensure(module <= tol, || fail("module property", module))?;

        let (tm, sm) = (proj(&t, &minimal)?, proj(&s, &minimal)?);
        let comm = tm.commutator(&sm).op_norm();
        ensure(comm <= tol, || fail("minimal commutativity", comm))?;
        checks += 3;
    }
    within(Duration::from_secs(30), start.elapsed())?;
    Ok(format!("{checks} checks over 1000 instances, zero failures"))
}

fn pauli_classification() -> Check {
    let q = ProjSystem::computational(2);
    let z = classify(&Op::pauli_z(), &q).map_err(e)?;
    let x = classify(&Op::pauli_x(), &q).map_err(e)?;
    let y = classify(&Op::pauli_y(), &q).map_err(e)?;
    ensure(z.tag == ComplexityTag::Classical && z.nu.abs() <= 1e-12, || format!("Z: {z:?}"))?;
    for (name, c) in [("X", x), ("Y", y)] {
        ensure(c.tag == ComplexityTag::MaximallyNonclassical && (c.nu - 1.0).abs() <= 1e-12, || {
            format!("{name}: {c:?}")
        })?;
    }
    Ok(format!("nu(Z) = {}, nu(X) = {}, nu(Y) = {}", z.nu, x.nu, y.nu))
}

fn three_member_model(seed: u64) -> Vec<Density> {
    let mut rng = seeded(seed);
    (0..3).map(|_| random_density(2, &mut rng)).collect()
}

fn mixture(model: &[Density], weights: [f64; 3]) -> Result<MixtureSource, String> {
    MixtureSource::source(weights.iter().copied().zip(model.iter().cloned()).collect()).map_err(e)
}

fn universality() -> Check {
    let start = Instant::now();
    let model = three_member_model(6);
    let src = mixture(&model, [0.5, 0.25, 0.25])?;
    let matrix = universality_check(&src, &model, 0.5, 1..=8, UniversalityMode::Matrix, None).map_err(e)?;
    let expected = universality_check(&src, &model, 0.5, 1..=8, UniversalityMode::Expected, None).map_err(e)?;
    let n0 = matrix.n0.ok_or("matrix mode never passes")?;
    ensure(n0 <= 4, || format!("n0 = {n0}"))?;
    for lm in &matrix.per_level {
        if lm.n >= 4 {
            ensure(lm.margin >= -1e-10, || format!("n = {}: min eigenvalue margin {:e}", lm.n, lm.margin))?;
        }
        if lm.margin >= -1e-10 {
            let s = expected.per_level.iter().find(|x| x.n == lm.n).unwrap();
            ensure(s.margin >= -1e-7, || format!("n = {}: relative-entropy margin {:e}", lm.n, s.margin))?;
        }
    }
    within(Duration::from_secs(60), start.elapsed())?;
    let worst = matrix.per_level.iter().filter(|l| l.n >= 4).map(|l| l.margin).fold(f64::INFINITY, f64::min);
    Ok(format!("n0 = {n0}, smallest margin on 4..=8: {worst:.3e}"))
}

fn convexity() -> Check {
    let mut checked = 0;
    for seed in 0..20 {
        let model = three_member_model(100 + seed);
        let a = mixture(&model, [0.5, 0.25, 0.25])?;
        let b = mixture(&model, [0.25, 0.25, 0.5])?;
        let run = |s: &MixtureSource| {
            universality_check(s, &model, 0.5, 4..=8, UniversalityMode::Matrix, None).map_err(e)
        };
        ensure(run(&a)?.pass && run(&b)?.pass, || format!("seed {seed}: inputs do not pass"))?;
        let c = convex_combine(&[&a, &b], &[0.5, 0.5]).map_err(e)?;
        ensure(run(&c)?.pass, || format!("seed {seed}: combination fails"))?;
        checked += 1;
    }
    Ok(format!("{checked} combinations pass"))
}

fn source_laws() -> Check {
    let mut rng = seeded(8);
    let comp = ProjSystem::computational(2);
    let mut worst = 0.0f64;
    for inst in 0..10 {
        let k = 1 + inst % 3;
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let items = raw.iter().map(|w| (w / total, random_density(2, &mut rng))).collect();
        let src = MixtureSource::source(items).map_err(e)?;
        let u = haar_unitary(2, &mut rng);
        let conj = conjugate(&src, &u).map_err(e)?;
        let rotated = ProjSystem::from_basis(&u).map_err(e)?;
        for n in 0..=5 {
            let r = marginal_residual(&src, n).map_err(e)?;
            let rc = marginal_residual(&conj, n).map_err(e)?;
            ensure(r <= 1e-9 && rc <= 1e-9, || format!("instance {inst}, n = {n}: residuals {r:e}, {rc:e}"))?;
            ensure((r - rc).abs() <= 1e-10, || format!("instance {inst}, n = {n}: residual moved"))?;
            worst = worst.max(r).max(rc);
            let w = OutcomeWord::new((0..n).map(|_| rng.random_range(0..2)).collect(), 2).map_err(e)?;
            let p = outcome_prob(&src, &comp, &w).map_err(e)?;
            let pc = outcome_prob(&conj, &rotated, &w).map_err(e)?;
            ensure((p - pc).abs() <= 1e-10, || format!("instance {inst}, word {w}: {p} vs {pc}"))?;
        }
    }
    Ok(format!("max residual {worst:.1e}"))
}

fn config(text: &str) -> Result<ExperimentConfig, String> {
    ExperimentConfig::from_json(text).map_err(e)
}

fn expected_divergence_bound() -> Check {
    let start = Instant::now();
    let mut summary = Vec::new();
    for alpha in [2.0, 4.0] {
        let cfg = config(&format!(
            r#"{{"experiment":"bound","true_state":{{"model":"example","theta":0.2,"c":0}},
                "model":{{"c":0,"thetas":[0.2,0.8],"code_weights":[0.5,0.25]}},
                "alpha":{alpha},"n_schedule":[2,3,4,5,6,7,8,9,10,11,12]}}"#
        ))?;
        let r = bound_run(&cfg).map_err(e)?;
        ensure(r.status() != RunStatus::Fail, || format!("alpha = {alpha}: {:?}", r.metadata.notes))?;
        let gated: Vec<usize> = (2..=12).filter(|&n| r.exact("hypothesis", n) == Some(1.0)).collect();
        let held = (2..=12).filter(|&n| r.exact("holds", n) == Some(1.0)).count();
        summary.push(format!("alpha {alpha}: hypothesis at n in {gated:?}, inequality at {held}/11 levels"));
    }
    within(Duration::from_secs(60), start.elapsed())?;
    Ok(summary.join("; "))
}

fn redundancy() -> Check {
    let start = Instant::now();
    let cfg = config(
        r#"{"experiment":"redundancy","true_state":{"model":"example","theta":0.5},
            "source":{"exact":{"model":"example"}},"n_schedule":[2,4,8,16,32,64,128]}"#,
    )?;
    let r = redundancy_run(&cfg).map_err(e)?;
    ensure(r.status() == RunStatus::Pass, || format!("{:?}", r.metadata.notes))?;
    within(Duration::from_secs(10), start.elapsed())?;
    Ok(format!(
        "S(128) = {:.4} bits, tail band ratio {:.4}",
        r.exact("rel_entropy", 128).unwrap(),
        r.exact("tail_band_ratio", 128).unwrap()
    ))
}

fn distinguishability() -> Check {
    let cfg = config(
        r#"{"experiment":"markov","source":{"components":[{"weight":1,"probabilities":[0.3,0.7]}]},
            "competitors":[
              {"components":[{"weight":1,"probabilities":[0.7,0.3]}]},
              {"kind":"generalized","components":[{"weight":0.5,"probabilities":[0.7,0.3]}]},
              {"kind":"generalized","components":[{"weight":0.5,"probabilities":[0.3,0.7]}]},
              {"kind":"generalized","components":[{"weight":0.25,"probabilities":[0.9,0.1]},
                                                   {"weight":0.25,"probabilities":[0.5,0.5]}]}],
            "deltas":[1,2,4,8,1000000],"n_schedule":[4,8,16,32]}"#,
    )?;
    let r = markov_run(&cfg).map_err(e)?;
    ensure(r.status() == RunStatus::Pass, || format!("{:?}", r.metadata.notes))?;
    let masses: Vec<f64> = [4, 8, 16, 32].iter().map(|&n| r.exact("mass_0_delta_1", n).unwrap()).collect();
    ensure(masses.windows(2).all(|w| w[1] < w[0]), || format!("masses {masses:?}"))?;
    Ok(format!("masses at delta 1: {masses:.4?}"))
}

fn consistency() -> Check {
    let start = Instant::now();
    let cfg = config(
        r#"{"experiment":"consistency","true_state":{"model":"example","theta":0.3,"c":0.5},
            "model":{"c":0.5},"n_schedule":[25,400],"replicas":200,"seed":12}"#,
    )?;
    let a = consistency_run(&cfg).map_err(e)?;
    let b = consistency_run(&cfg).map_err(e)?;
    ensure(a.to_csv() == b.to_csv(), || "CSV differs between runs".into())?;
    let (m25, m400) = (a.median("hellinger_sq", 25).unwrap(), a.median("hellinger_sq", 400).unwrap());
    ensure(m400 <= m25, || format!("median rose from {m25:e} to {m400:e}"))?;
    within(Duration::from_secs(120), start.elapsed())?;
    Ok(format!("median He2 {m25:.3e} at n=25, {m400:.3e} at n=400; reruns identical"))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("laplace rule", laplace_rule),
        ("mixture marginal", mixture_marginal),
        ("mle closed form", mle_closed_form),
        ("q-projection suite", q_projection_suite),
        ("pauli classification", pauli_classification),
        ("universality", universality),
        ("convexity", convexity),
        ("source laws", source_laws),
        ("expected divergence bound", expected_divergence_bound),
        ("redundancy", redundancy),
        ("distinguishability", distinguishability),
        ("consistency decay", consistency),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let t = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({t:.2} s): {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL {:>2} {name} ({t:.2} s): {why}", i + 1);
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} criteria failed");
        std::process::exit(1);
    }
}
