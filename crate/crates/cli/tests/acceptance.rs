//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line; the
//! process exits non-zero if any criterion fails. All comparisons are exact.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use freemetric::action::GroupAction;
use freemetric::free::{affine_extend, moving_lower_bound, norm_distance, Molecule};
use freemetric::katetov::{prop_k_gap, KatetovFunction};
use freemetric::quotient::{covers, min_fvf_cover};
use freemetric::suites::run_suite;
use freemetric::{q, FiniteGroup, FiniteMetricSpace, PointedSpace};

const SEED: u64 = 20_240_601;

type Check = Result<String, String>;
type Criterion = fn() -> Check;

fn suite(name: &str, trials: usize) -> Check {
    let r = run_suite(name, trials, SEED, None).map_err(|e| e.to_string())?;
    match r.failure {
        None if r.passed == trials => Ok(format!("{name} {}/{trials}", r.passed)),
        None => Err(format!("{name}: only {} of {trials} trials ran", r.passed)),
        Some(f) => Err(format!(
            "{name} trial {}: {} {}",
            f.trial, f.message, f.counterexample
        )),
    }
}

fn both(a: Check, b: Check) -> Check {
    Ok(format!("{}; {}", a?, b?))
}

fn embedding() -> Check {
    let start = Instant::now();
    let r = suite("embedding", 500)?;
    let took = start.elapsed();
    if took > Duration::from_secs(60) {
        return Err(format!("took {took:?}"));
    }
    Ok(format!("{r} in {:.1}s", took.as_secs_f64()))
}

fn prop_k() -> Check {
    let line = FiniteMetricSpace::line(&[0, 5]).map_err(|e| e.to_string())?;
    let phi = KatetovFunction::point(0);
    let psi = KatetovFunction::point(1);
    let r = prop_k_gap(&line, &phi, &psi).map_err(|e| e.to_string())?;
    if !(r.gap == 5 && r.epsilon == 5 && r.certified) {
        return Err(format!("line {{0,5}}: {r:?}"));
    }
    let random = suite("prop-k", 1000)?;
    Ok(format!("line {{0,5}} gap 5; {random}"))
}

/// Every Φ ⊆ C₁₂ \ {∗} with |Φ| ≤ 2, every rotation attaining the gap of
/// Φ ∪ {∗}, and every pair from a grid of molecules supported on Φ.
fn c12_extension() -> Check {
    let c12 = FiniteMetricSpace::cycle(12).map_err(|e| e.to_string())?;
    let action = GroupAction::left_regular(FiniteGroup::cyclic(12), c12.clone())
        .map_err(|e| e.to_string())?;
    let space = Arc::new(PointedSpace::new(c12.clone(), 0).map_err(|e| e.to_string())?);
    let grid = [q(0, 1), q(1, 1), q(-3, 2)];
    let mut phis: Vec<Vec<usize>> = (1..12).map(|x| vec![x]).collect();
    for x in 1..12 {
        for y in x + 1..12 {
            phis.push(vec![x, y]);
        }
    }
    let mut checked = 0usize;
    for phi in &phis {
        let mut set = phi.clone();
        set.push(0);
        let (eps0, _) = action.moving_gap(&set).map_err(|e| e.to_string())?;
        let mols: Vec<Molecule> = (0..grid.len().pow(phi.len() as u32))
            .map(|mut code| {
                let terms = phi.iter().map(|&x| {
                    let c = grid[code % grid.len()].clone();
                    code /= grid.len();
                    (x, c)
                });
                Molecule::from_terms(space.clone(), terms.collect::<Vec<_>>())
            })
            .collect();
        for g in 0..12 {
            let iso = action.image(g);
            if c12
                .set_distance(&set, &iso.image_of(&set))
                .map_err(|e| e.to_string())?
                != eps0
            {
                continue;
            }
            for v in &mols {
                let gv = affine_extend(iso, v).map_err(|e| e.to_string())?;
                for w in &mols {
                    let d = norm_distance(&gv, w).map_err(|e| e.to_string())?;
                    let b = moving_lower_bound(phi, iso, &eps0, v, w).map_err(|e| e.to_string())?;
                    if d < eps0 || b.bound != eps0 {
                        return Err(format!(
                            "C12 phi={phi:?} g={g}: distance {d}, bound {}, eps0 {eps0}",
                            b.bound
                        ));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("C12 {checked} pairs"))
}

fn fvf() -> Check {
    let z5 = FiniteGroup::cyclic(5);
    let v = [4, 0, 1];
    let cover = min_fvf_cover(&z5, &v).map_err(|e| e.to_string())?;
    // independent oracle: no single element f has {f}·V·{f} = G
    let single = (0..5).any(|f| covers(&z5, &[f], &v));
    let witness_ok = cover.f.len() == 2
        && (0..5).all(|g| {
            cover.f.iter().any(|&a| {
                v.iter()
                    .any(|&x| cover.f.iter().any(|&b| z5.mul(z5.mul(a, x), b) == g))
            })
        });
    if cover.k != 2 || single || !witness_ok {
        return Err(format!("Z5: {cover:?}"));
    }
    let mono = suite("fvf", 100)?;
    Ok(format!("Z5 k=2 F={:?}; {mono}", cover.f))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn run_cli(args: &[String]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freemetric"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Every subcommand on the shipped fixtures, run twice: identical bytes and
/// the expected exit status.
fn determinism() -> Check {
    let dir = fixtures();
    let f = |name: &str| dir.join(name).display().to_string();
    let cases: Vec<(Vec<String>, i32)> = vec![
        (
            vec![
                "validate".into(),
                "--in".into(),
                f("validate.json"),
                "--in".into(),
                f("metric_corrupted.json"),
            ],
            0,
        ),
        (
            vec![
                "norm".into(),
                "--in".into(),
                f("norm_point.json"),
                "--in".into(),
                f("norm_molecule.json"),
            ],
            0,
        ),
        (
            vec![
                "katetov-check".into(),
                "--in".into(),
                f("katetov_check.json"),
                "--in".into(),
                f("katetov_check_fails.json"),
            ],
            0,
        ),
        (
            vec!["hat-extend".into(), "--in".into(), f("hat_extend.json")],
            0,
        ),
        (vec!["star".into(), "--in".into(), f("star.json")], 0),
        (vec!["tower".into(), "--in".into(), f("tower.json")], 0),
        (
            vec![
                "tower".into(),
                "--in".into(),
                f("tower.json"),
                "--budget".into(),
                "2".into(),
            ],
            1,
        ),
        (
            vec!["iso-enum".into(), "--in".into(), f("iso_enum.json")],
            0,
        ),
        (
            vec!["moving-gap".into(), "--in".into(), f("moving_gap.json")],
            0,
        ),
        (
            vec![
                "extend-affine".into(),
                "--in".into(),
                f("extend_affine.json"),
            ],
            0,
        ),
        (
            vec!["fixed-point".into(), "--in".into(), f("fixed_point.json")],
            0,
        ),
        (
            vec!["quotient".into(), "--in".into(), f("quotient.json")],
            0,
        ),
        (
            vec!["pullback".into(), "--in".into(), f("pullback.json")],
            0,
        ),
        (vec!["fvf".into(), "--in".into(), f("fvf.json")], 0),
        (vec!["prop-k".into(), "--in".into(), f("prop_k.json")], 0),
        (
            vec![
                "th-extension-check".into(),
                "--in".into(),
                f("th_extension.json"),
            ],
            0,
        ),
        (
            vec![
                "proptest".into(),
                "duality".into(),
                "--trials".into(),
                "50".into(),
                "--seed".into(),
                "7".into(),
            ],
            0,
        ),
        (
            vec![
                "proptest".into(),
                "metric".into(),
                "--in".into(),
                f("metric_corrupted.json"),
                "--seed".into(),
                "7".into(),
            ],
            1,
        ),
        (vec!["proptest".into(), "no-such-suite".into()], 2),
    ];
    for (args, code) in &cases {
        let a = run_cli(args);
        let b = run_cli(args);
        if a.stdout != b.stdout || a.status != b.status {
            return Err(format!("{args:?}: runs differ"));
        }
        if a.status.code() != Some(*code) {
            return Err(format!(
                "{args:?}: exit {:?}, expected {code}",
                a.status.code()
            ));
        }
        serde_json::from_slice::<Value>(&a.stdout)
            .map_err(|e| format!("{args:?}: output is not JSON: {e}"))?;
    }
    Ok(format!("{} invocations", cases.len()))
}

/// Byte-level checks of the documented example outputs.
fn cli_examples() -> Check {
    let dir = fixtures();
    let out = |sub: &str, file: &str| -> Result<Value, String> {
        let o = run_cli(&[
            sub.into(),
            "--in".into(),
            dir.join(file).display().to_string(),
        ]);
        serde_json::from_slice(&o.stdout).map_err(|e| e.to_string())
    };
    let norm = out("norm", "norm_point.json")?;
    let prop = out("prop-k", "prop_k.json")?;
    if norm["dual"] != json!("1") || norm["primal"] != json!("1") || norm["equal"] != json!(true) {
        return Err(format!("norm: {norm}"));
    }
    if prop != json!({ "gap": "5", "epsilon": "5", "certified": true }) {
        return Err(format!("prop-k: {prop}"));
    }
    Ok("norm and prop-k examples".into())
}

fn main() {
    let criteria: Vec<(&str, Criterion)> = vec![
        ("isometric embedding of X into the free space", embedding),
        ("strong duality: dual LP = transshipment primal", || {
            suite("duality", 1000)
        }),
        (
            "hat extensions of separated functions stay separated",
            prop_k,
        ),
        ("moving sets stay moved by affine extensions", || {
            both(c12_extension(), suite("extension", 120))
        }),
        ("affine extensions form an isometric action", || {
            suite("action-laws", 50)
        }),
        ("orbit barycenters are fixed points", || {
            suite("fixed-point", 200)
        }),
        (
            "quotients by invariant pseudometrics are well defined",
            || suite("quotient", 200),
        ),
        ("FVF covering numbers", fvf),
        (
            "Katetov extensions, Kuratowski embedding, star fragments",
            || both(suite("katetov", 1000), suite("equivariance", 100)),
        ),
        ("CLI output is deterministic", || {
            both(determinism(), cli_examples())
        }),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
