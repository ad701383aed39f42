//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p tricho-cli --test acceptance`.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tricho_core::evolution::{check_cocycle, check_identity};
use tricho_core::grid::{delta_pairs, ordered_triples, uniform_grid};
use tricho_core::lyapunov::{
    check_compatibility, classify_uniform, instantiate_corollary, verify_main_theorem, verify_sufficiency,
    RateFamily,
};
use tricho_core::projectors::{check_inverse_properties, check_orthogonal};
use tricho_core::trichotomy::{check_nonuniform, check_dichotomy, check_uniform};
use tricho_core::{
    EvolutionOperator, ExampleRates, Generator, GeneratorSpec, GrowthRate, Inequality, InverseFamily,
    LyapunovNormFamily, NBound, NormConfig, NormStyle, ProjectorFamily, RateSet, TestVectors,
};

const SEED: u64 = 20;
const EXPONENTS: [f64; 4] = [1.0, 2.0, 0.5, 0.25];
const CONFIG: NormConfig = NormConfig {
    horizon: 10.0,
    resolution: 0.5,
};

type Outcome = Result<String, String>;

fn rates() -> RateSet {
    RateSet::exponential(EXPONENTS).unwrap()
}

fn split() -> ProjectorFamily {
    ProjectorFamily::coordinate_split(1, 1, 1).unwrap()
}

fn unit_rate() -> GrowthRate {
    GrowthRate::unit(1e6).unwrap()
}

fn linear_rate() -> GrowthRate {
    GrowthRate::polynomial(1.0).unwrap()
}

fn example_with(u: GrowthRate, r: &RateSet, family: &ProjectorFamily) -> EvolutionOperator {
    let ex = ExampleRates {
        u,
        h: r.h.clone(),
        k: r.k.clone(),
        mu: r.mu.clone(),
        nu: r.nu.clone(),
    };
    EvolutionOperator::closed_form_example(&ex, family).unwrap()
}

fn example(u: GrowthRate) -> EvolutionOperator {
    example_with(u, &rates(), &split())
}

fn grid10() -> Vec<f64> {
    uniform_grid(10.0, 0.5).unwrap()
}

fn require(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn random_triples(rng: &mut ChaCha8Rng, t_max: f64, count: usize) -> Vec<(f64, f64, f64)> {
    (0..count)
        .map(|_| {
            let mut v = [rng.random_range(0.0..t_max), rng.random_range(0.0..t_max), rng.random_range(0.0..t_max)];
            v.sort_by(|a, b| b.total_cmp(a));
            (v[0], v[1], v[2])
        })
        .collect()
}

/// Structural suite.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let grid = grid10();
    let orth = check_orthogonal(&split(), &grid, 1e-12).map_err(|e| e.to_string())?;
    require(orth.passed, || format!("orthogonality worst {:e}", orth.worst()))?;
    let mut worst: f64 = orth.worst();
    for (name, u) in [("u = 1", unit_rate()), ("u = t + 1", linear_rate())] {
        let op = example(u);
        let id = check_identity(&op, &grid, 1e-12).map_err(|e| e.to_string())?;
        let co = check_cocycle(&op, &ordered_triples(&grid), 1e-12).map_err(|e| e.to_string())?;
        require(id.passed && co.passed, || {
            format!("{name}: identity {:e}, cocycle {:e}", id.worst(), co.worst())
        })?;
        worst = worst.max(id.worst()).max(co.worst());
    }
    let elapsed = start.elapsed();
    require(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("worst residual {worst:.2e} in {:.3} s", elapsed.as_secs_f64()))
}

/// Inverse-family properties, including the inverse cocycle on sampled triples.
fn criterion_2() -> Outcome {
    let grid = grid10();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let ode = EvolutionOperator::from_generator(GeneratorSpec::new(Generator::block_diagonal(), 1e-3), &grid)
        .map_err(|e| e.to_string())?;
    let cases = [
        ("example u = 1", example(unit_rate()), split()),
        ("example u = t + 1", example(linear_rate()), split()),
        ("ODE block-diagonal", ode, ProjectorFamily::coordinate_split(1, 2, 1).unwrap()),
    ];
    let mut worst: f64 = 0.0;
    for (name, op, family) in &cases {
        let triples = random_triples(&mut rng, 10.0, 50);
        let mut pairs = delta_pairs(&grid);
        pairs.extend(triples.iter().flat_map(|&(t, s, t0)| [(t, s), (s, t0), (t, t0)]));
        for j in [2, 3] {
            let inv = InverseFamily::new(op, family, j).map_err(|e| e.to_string())?;
            let r = check_inverse_properties(&inv, &pairs, &triples, 1e-10).map_err(|e| e.to_string())?;
            require(r.passed, || format!("{name}, P{j}: {r}"))?;
            worst = worst.max(r.worst());
        }
    }
    Ok(format!("worst v2-v6 residual {worst:.2e} over 3 operators, 50 sampled triples each"))
}

/// Nonuniform but not uniform.
fn criterion_3() -> Outcome {
    let start = Instant::now();
    let op = example(linear_rate());
    let grid = uniform_grid(20.0, 0.5).unwrap();
    let bound = NBound::Affine {
        slope: 3.0,
        intercept: 3.0,
    };
    let definition = check_nonuniform(&op, &split(), &rates(), &grid, Some(&bound)).map_err(|e| e.to_string())?;
    require(definition.passed, || format!("definition check failed: {:?}", definition.notes))?;
    let mut constants = Vec::new();
    for t_max in [5.0, 10.0, 20.0] {
        let grid = uniform_grid(t_max, 0.5).unwrap();
        let u = check_uniform(&op, &split(), &rates(), &grid, None).map_err(|e| e.to_string())?;
        require(u.uniform_constant >= t_max + 0.9, || {
            format!("T = {t_max}: uniform constant {} < T + 0.9", u.uniform_constant)
        })?;
        require(!u.passed && u.nonuniform_evidence, || format!("T = {t_max}: no non-uniform evidence"))?;
        constants.push(format!("{t_max}: {:.4}", u.uniform_constant));
    }
    let elapsed = start.elapsed();
    require(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "N(a) = 3(a+1) suffices; uniform constants {{{}}} in {:.3} s",
        constants.join(", "),
        elapsed.as_secs_f64()
    ))
}

fn norm_pair(op: &EvolutionOperator, family: &ProjectorFamily, r: &RateSet, grid: &[f64]) -> Result<(LyapunovNormFamily, LyapunovNormFamily), String> {
    let f = LyapunovNormFamily::build(NormStyle::Forward, op, family, r, grid, CONFIG).map_err(|e| e.to_string())?;
    let b = LyapunovNormFamily::build(NormStyle::Backward, op, family, r, grid, CONFIG).map_err(|e| e.to_string())?;
    Ok((f, b))
}

/// Constant-free inequalities in the Lyapunov norms.
fn criterion_4() -> Outcome {
    let grid = grid10();
    let vectors = TestVectors::new(3, 32, SEED);
    let mut notes = Vec::new();
    for (name, u) in [("u = 1", unit_rate()), ("u = t + 1", linear_rate())] {
        let (f, b) = norm_pair(&example(u), &split(), &rates(), &grid)?;
        for n in [&f, &b] {
            require(n.horizon_sensitivity() < 1e-6, || {
                format!("{name}: {} horizon sensitivity {:e}", n.style().name(), n.horizon_sensitivity())
            })?;
        }
        let r = verify_main_theorem(&f, &b, &grid, &vectors, 1e-9).map_err(|e| e.to_string())?;
        require(r.passed, || format!("{name}: {r}"))?;
        notes.push(format!("{name}: worst margin {:.2e}, slack {:.1e}", r.worst_margin(), r.slack));
    }
    Ok(notes.join("; "))
}

/// The sufficiency candidate `N` from measured `C(t)` bounds the definition-form factors.
fn criterion_5() -> Outcome {
    let grid = grid10();
    let vectors = TestVectors::new(3, 32, SEED);
    let mut notes = Vec::new();
    for (name, u) in [("u = 1", unit_rate()), ("u = t + 1", linear_rate())] {
        let (f, b) = norm_pair(&example(u), &split(), &rates(), &grid)?;
        let r = verify_sufficiency(&f, &b, &grid, &vectors, 1e-9).map_err(|e| e.to_string())?;
        require(r.passed, || format!("{name}: {:?}", r.trichotomy.notes))?;
        let last = r.candidate.last().map_or(f64::NAN, |c| c.1);
        notes.push(format!("{name}: N(10) = {last:.4}"));
    }
    Ok(notes.join("; "))
}

/// Uniform case: `c ≤ 3` and a uniform classification with constant at most 3.
fn criterion_6() -> Outcome {
    let grid = grid10();
    let vectors = TestVectors::new(3, 32, SEED);
    let op = example(unit_rate());
    let (f, b) = norm_pair(&op, &split(), &rates(), &grid)?;
    let cf = check_compatibility(&f, &grid, &vectors, 1e-12, None).map_err(|e| e.to_string())?;
    let cb = check_compatibility(&b, &grid, &vectors, 1e-12, None).map_err(|e| e.to_string())?;
    let theorem = verify_main_theorem(&f, &b, &grid, &vectors, 1e-9).map_err(|e| e.to_string())?;
    require(theorem.passed, || theorem.to_string())?;
    let uniform = check_uniform(&op, &split(), &rates(), &grid, Some(3.0)).map_err(|e| e.to_string())?;
    let class = classify_uniform(&uniform, &cf, &cb);
    require(class.passed && class.c <= 3.0 && class.n <= 3.0, || format!("{class:?}"))?;
    Ok(format!("c = {:.6}, N = {:.6}, worst margin {:.2e}", class.c, class.n, theorem.worst_margin()))
}

/// Corollary forms and the dichotomy special case.
fn criterion_7() -> Outcome {
    let grid = grid10();
    let vectors = TestVectors::new(3, 32, SEED);
    let exp = instantiate_corollary(
        RateFamily::Exponential,
        EXPONENTS,
        &example(unit_rate()),
        &split(),
        &grid,
        CONFIG,
        &vectors,
        1e-9,
    )
    .map_err(|e| e.to_string())?;
    require(exp.passed, || exp.to_string())?;
    let poly_rates = RateSet::polynomial([1.0; 4]).unwrap();
    let poly_op = example_with(unit_rate(), &poly_rates, &split());
    let poly = instantiate_corollary(RateFamily::Polynomial, [1.0; 4], &poly_op, &split(), &grid, CONFIG, &vectors, 1e-9)
        .map_err(|e| e.to_string())?;
    require(poly.passed, || poly.to_string())?;

    let family = ProjectorFamily::coordinate_split(1, 1, 0).unwrap();
    let op = example_with(unit_rate(), &rates(), &family);
    let r = rates();
    let dich = check_dichotomy(&op, &family, &r.h, &r.k, &grid, Some(&NBound::Constant(1.0))).map_err(|e| e.to_string())?;
    require(dich.passed, || format!("dichotomy: {:?}", dich.notes))?;
    let central_vacuous = dich
        .records
        .iter()
        .filter(|rec| matches!(rec.inequality, Inequality::CentralUpper | Inequality::CentralLower))
        .all(|rec| rec.vacuous);
    require(central_vacuous, || "dichotomy: a central row is not vacuous".into())?;
    Ok(format!(
        "exponential worst {:.2e}, polynomial worst {:.2e}, dichotomy N = {}",
        exp.worst_margin(),
        poly.worst_margin(),
        dich.uniform_constant
    ))
}

fn scenarios() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    out.sort();
    out
}

fn run_cli(scenario: &Path, out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_tricho"))
        .arg("--scenario")
        .arg(scenario)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?
        .status;
    match status.code() {
        Some(0 | 1) => Ok(()),
        other => Err(format!("{} exited with {other:?}", scenario.display())),
    }
}

/// Byte-identical reports from repeated runs.
fn criterion_8() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let list = scenarios();
    require(!list.is_empty(), || "no scenarios found".into())?;
    let mut files = 0;
    for path in &list {
        let stem = path.file_stem().unwrap().to_string_lossy().to_string();
        let (a, b) = (tmp.path().join(format!("{stem}-a")), tmp.path().join(format!("{stem}-b")));
        run_cli(path, &a)?;
        run_cli(path, &b)?;
        for name in ["report.json", "records.csv", "summary.csv"] {
            let (fa, fb) = (a.join(name), b.join(name));
            if !fa.exists() && !fb.exists() {
                continue;
            }
            let (x, y) = (std::fs::read(&fa).map_err(|e| e.to_string())?, std::fs::read(&fb).map_err(|e| e.to_string())?);
            require(x == y, || format!("{stem}/{name} differs between runs"))?;
            files += 1;
        }
    }
    Ok(format!("{} scenarios, {files} report files identical", list.len()))
}

fn main() {
    // `cargo test` passes harness flags such as `--list`; nothing to list here.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("structural residuals", criterion_1),
        ("inverse-family properties", criterion_2),
        ("nonuniform but not uniform", criterion_3),
        ("main theorem, necessity", criterion_4),
        ("main theorem, sufficiency", criterion_5),
        ("uniform theorem", criterion_6),
        ("corollaries and dichotomy", criterion_7),
        ("determinism", criterion_8),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.2} s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
