//! Randomized invariant suites with seeded instance streams and greedy
//! shrinking of counterexamples.
//!
//! Trial `i` of a run with seed `s` draws from a ChaCha stream keyed by
//! `(s, i)`, so a report is reproducible from the seed alone and a single
//! trial can be replayed without running the ones before it.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::action::{enumerate_isometries, GroupAction};
use crate::error::{Error, Result};
use crate::free::{
    aell_norm_dual, aell_norm_primal, affine_extend, fixed_point, is_fixed, moving_lower_bound,
    norm_distance, Molecule, MoleculeRecord,
};
use crate::group::FiniteGroup;
use crate::katetov::{
    act_on_katetov, hat_extension, hat_values, is_katetov, prop_k_gap, star_fragment, sup_distance,
    KatetovFunction,
};
use crate::metric::{validate, FiniteMetricSpace, PointedSpace, SpaceRecord};
use crate::quotient::{covers, min_fvf_cover, pullback_pseudometric, quotient_space};
use crate::random;
use crate::rational::Rational;

pub const SUITES: &[&str] = &[
    "metric",
    "embedding",
    "duality",
    "katetov",
    "equivariance",
    "prop-k",
    "extension",
    "action-laws",
    "fixed-point",
    "quotient",
    "fvf",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    pub passed: usize,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
}

impl SuiteReport {
    pub fn is_pass(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub trial: usize,
    pub message: String,
    pub shrink_steps: usize,
    pub counterexample: Value,
}

trait Property {
    type Instance: Clone;
    fn generate(&self, rng: &mut ChaCha8Rng) -> Self::Instance;
    fn check(&self, inst: &Self::Instance) -> std::result::Result<(), String>;
    fn shrink(&self, _inst: &Self::Instance) -> Vec<Self::Instance> {
        Vec::new()
    }
    fn to_json(&self, inst: &Self::Instance) -> Value;
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn guarded<P: Property>(p: &P, inst: &P::Instance) -> std::result::Result<(), String> {
    match catch_unwind(AssertUnwindSafe(|| p.check(inst))) {
        Ok(r) => r,
        Err(panic) => Err(match panic.downcast_ref::<String>() {
            Some(s) => format!("panic: {s}"),
            None => match panic.downcast_ref::<&str>() {
                Some(s) => format!("panic: {s}"),
                None => "panic".to_string(),
            },
        }),
    }
}

/// Repeatedly replaces the counterexample by its first failing shrink.
fn minimize<P: Property>(
    p: &P,
    mut inst: P::Instance,
    mut message: String,
) -> (P::Instance, String, usize) {
    let mut steps = 0;
    'outer: loop {
        for cand in p.shrink(&inst) {
            if let Err(m) = guarded(p, &cand) {
                inst = cand;
                message = m;
                steps += 1;
                continue 'outer;
            }
        }
        return (inst, message, steps);
    }
}

fn run_instances<P: Property>(
    p: &P,
    name: &str,
    seed: u64,
    instances: impl Iterator<Item = P::Instance>,
) -> SuiteReport {
    let mut passed = 0;
    let mut trials = 0;
    for (trial, inst) in instances.enumerate() {
        trials += 1;
        if let Err(message) = guarded(p, &inst) {
            let (inst, message, shrink_steps) = minimize(p, inst, message);
            return SuiteReport {
                suite: name.to_string(),
                seed,
                trials,
                passed,
                status: "fail",
                failure: Some(Failure {
                    trial,
                    message,
                    shrink_steps,
                    counterexample: p.to_json(&inst),
                }),
            };
        }
        passed += 1;
    }
    SuiteReport {
        suite: name.to_string(),
        seed,
        trials,
        passed,
        status: "pass",
        failure: None,
    }
}

fn run<P: Property>(p: &P, name: &str, trials: usize, seed: u64) -> SuiteReport {
    run_instances(
        p,
        name,
        seed,
        (0..trials).map(|t| p.generate(&mut trial_rng(seed, t))),
    )
}

/// Runs a named suite. Only the `metric` suite accepts a fixture: a raw space
/// record that is validated and then restricted to random subsets.
pub fn run_suite(
    name: &str,
    trials: usize,
    seed: u64,
    fixture: Option<&Value>,
) -> Result<SuiteReport> {
    if fixture.is_some() && name != "metric" {
        return Err(Error::Precondition(format!(
            "suite {name:?} does not take an input fixture"
        )));
    }
    Ok(match name {
        "metric" => match fixture {
            Some(v) => {
                let rec: SpaceRecord =
                    serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
                let p = MetricFixture;
                let first = RawSpace {
                    points: rec.points,
                    dist: rec.dist,
                    pseudo: rec.pseudo,
                    planted: None,
                };
                let mut rng = trial_rng(seed, 0);
                let instances = std::iter::once(first.clone())
                    .chain((1..trials.max(1)).map(move |_| first.random_restriction(&mut rng)));
                run_instances(&p, name, seed, instances)
            }
            None => run(&MetricPlanted, name, trials, seed),
        },
        "embedding" => run(&Embedding, name, trials, seed),
        "duality" => run(&Duality, name, trials, seed),
        "katetov" => run(&KatetovSuite, name, trials, seed),
        "equivariance" => run(&Equivariance, name, trials, seed),
        "prop-k" => run(&PropK, name, trials, seed),
        "extension" => run(&Extension, name, trials, seed),
        "action-laws" => run(&ActionLaws, name, trials, seed),
        "fixed-point" => run(&FixedPointSuite, name, trials, seed),
        "quotient" => run(&QuotientSuite, name, trials, seed),
        "fvf" => run(&FvfMonotone, name, trials, seed),
        other => return Err(Error::Precondition(format!("unknown suite {other:?}"))),
    })
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn space_json(space: &FiniteMetricSpace) -> Value {
    serde_json::to_value(space).expect("space serializes")
}

fn molecule_json(m: &Molecule) -> Value {
    json!({
        "basepoint": m.space().label(m.space().basepoint()),
        "coeffs": m.to_labels(),
    })
}

fn drop_point(
    space: &FiniteMetricSpace,
    x: usize,
) -> Option<(FiniteMetricSpace, Vec<Option<usize>>)> {
    if space.len() <= 1 {
        return None;
    }
    let keep: Vec<usize> = (0..space.len()).filter(|&i| i != x).collect();
    let sub = space.restrict(&keep).ok()?;
    let map = (0..space.len())
        .map(|i| keep.iter().position(|&k| k == i))
        .collect();
    Some((sub, map))
}

// ---------------------------------------------------------------- metric

#[derive(Debug, Clone)]
struct RawSpace {
    points: Vec<String>,
    dist: Vec<Vec<Rational>>,
    pseudo: bool,
    planted: Option<&'static str>,
}

impl RawSpace {
    fn restrict(&self, keep: &[usize]) -> RawSpace {
        RawSpace {
            points: keep.iter().map(|&i| self.points[i].clone()).collect(),
            dist: keep
                .iter()
                .map(|&i| keep.iter().map(|&j| self.dist[i][j].clone()).collect())
                .collect(),
            pseudo: self.pseudo,
            planted: self.planted,
        }
    }

    fn random_restriction(&self, rng: &mut ChaCha8Rng) -> RawSpace {
        let n = self.points.len();
        if n == 0 || self.dist.len() != n || self.dist.iter().any(|r| r.len() != n) {
            return self.clone();
        }
        self.restrict(&random::subset(rng, n, n))
    }

    fn json(&self) -> Value {
        let mut v = json!({ "points": self.points, "dist": self.dist, "pseudo": self.pseudo });
        if let Some(c) = self.planted {
            v["planted"] = json!(c);
        }
        v
    }

    fn shrinks(&self) -> Vec<RawSpace> {
        let n = self.points.len();
        if n <= 1 || self.dist.len() != n || self.dist.iter().any(|r| r.len() != n) {
            return Vec::new();
        }
        (0..n)
            .map(|x| self.restrict(&(0..n).filter(|&i| i != x).collect::<Vec<_>>()))
            .collect()
    }
}

/// Random metrics with one planted violation (or none); validation must
/// report exactly the planted class.
struct MetricPlanted;

impl Property for MetricPlanted {
    type Instance = RawSpace;

    fn generate(&self, rng: &mut ChaCha8Rng) -> RawSpace {
        let n = rng.gen_range(3..=7);
        let s = random::metric_space(rng, n, false);
        let mut raw = RawSpace {
            points: s.labels().to_vec(),
            dist: s.matrix().to_vec(),
            pseudo: false,
            planted: None,
        };
        let class = *["none", "diagonal", "symmetry", "separation", "triangle"]
            .choose(rng)
            .expect("non-empty");
        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(rng);
        let (x, y, z) = (ids[0], ids[1], ids[2]);
        match class {
            "diagonal" => raw.dist[x][x] = random::rational_in(rng, 1, 3),
            "symmetry" => raw.dist[x][y] += Rational::one(),
            "separation" => {
                raw.dist[x][y] = Rational::zero();
                raw.dist[y][x] = Rational::zero();
            }
            "triangle" => {
                let long = &raw.dist[x][y] + &raw.dist[y][z] + Rational::one();
                raw.dist[x][z] = long.clone();
                raw.dist[z][x] = long;
            }
            _ => {}
        }
        raw.planted = (class != "none").then_some(class);
        raw
    }

    fn check(&self, inst: &RawSpace) -> std::result::Result<(), String> {
        let found = lib(validate(&inst.points, &inst.dist, inst.pseudo))?;
        let class = found.as_ref().map(|v| v.class());
        ensure(class == inst.planted, || {
            format!(
                "planted {:?} but validation reported {:?}",
                inst.planted, found
            )
        })?;
        if found.is_none() {
            let s = lib(FiniteMetricSpace::new(
                inst.points.clone(),
                inst.dist.clone(),
                inst.pseudo,
            ))?;
            for k in 1..=s.len() {
                let sub = lib(s.restrict(&(0..k).collect::<Vec<_>>()))?;
                ensure(lib(sub.validate())?.is_none(), || {
                    "restriction failed validation".into()
                })?;
            }
        }
        Ok(())
    }

    fn to_json(&self, inst: &RawSpace) -> Value {
        inst.json()
    }
}

/// A user-supplied space that must validate, along with its restrictions.
struct MetricFixture;

impl Property for MetricFixture {
    type Instance = RawSpace;

    fn generate(&self, _rng: &mut ChaCha8Rng) -> RawSpace {
        unreachable!("fixture instances are supplied by the caller")
    }

    fn check(&self, inst: &RawSpace) -> std::result::Result<(), String> {
        match lib(validate(&inst.points, &inst.dist, inst.pseudo))? {
            None => Ok(()),
            Some(v) => Err(serde_json::to_string(&v).expect("violation serializes")),
        }
    }

    fn shrink(&self, inst: &RawSpace) -> Vec<RawSpace> {
        inst.shrinks()
    }

    fn to_json(&self, inst: &RawSpace) -> Value {
        inst.json()
    }
}

// ---------------------------------------------------------------- free space

/// Point molecules are at free-norm distance equal to the metric distance.
struct Embedding;

impl Property for Embedding {
    type Instance = PointedSpace;

    fn generate(&self, rng: &mut ChaCha8Rng) -> PointedSpace {
        let n = rng.gen_range(1..=8);
        let s = random::metric_space(rng, n, false);
        let base = rng.gen_range(0..n);
        PointedSpace::new(s, base).expect("valid basepoint")
    }

    fn check(&self, p: &PointedSpace) -> std::result::Result<(), String> {
        let p = Arc::new(p.clone());
        for x in 0..p.len() {
            for y in x..p.len() {
                let a = Molecule::point(p.clone(), x);
                let b = Molecule::point(p.clone(), y);
                let nd = lib(norm_distance(&a, &b))?;
                ensure(nd == *p.d(x, y), || {
                    format!(
                        "‖{} - {}‖ = {nd} but d = {}",
                        p.label(x),
                        p.label(y),
                        p.d(x, y)
                    )
                })?;
            }
        }
        Ok(())
    }

    fn shrink(&self, p: &PointedSpace) -> Vec<PointedSpace> {
        (0..p.len())
            .filter(|&x| x != p.basepoint())
            .filter_map(|x| {
                let (sub, map) = drop_point(p, x)?;
                PointedSpace::new(sub, map[p.basepoint()]?).ok()
            })
            .collect()
    }

    fn to_json(&self, p: &PointedSpace) -> Value {
        serde_json::to_value(p).expect("serializes")
    }
}

/// Dual LP value, primal transshipment cost, witness and plan all agree.
struct Duality;

impl Property for Duality {
    type Instance = Molecule;

    fn generate(&self, rng: &mut ChaCha8Rng) -> Molecule {
        let n = rng.gen_range(1..=9);
        let pseudo = rng.gen_bool(0.2);
        let s = random::metric_space(rng, n, pseudo);
        let base = rng.gen_range(0..n);
        let p = Arc::new(PointedSpace::new(s, base).expect("valid basepoint"));
        let others: Vec<usize> = (0..n).filter(|&x| x != base).collect();
        let terms: Vec<(usize, Rational)> = if others.is_empty() {
            Vec::new()
        } else {
            random::subset(rng, others.len(), 8)
                .into_iter()
                .map(|i| (others[i], random::rational_in(rng, -5, 5)))
                .collect()
        };
        Molecule::from_terms(p, terms)
    }

    fn check(&self, m: &Molecule) -> std::result::Result<(), String> {
        let dual = lib(aell_norm_dual(m))?;
        let primal = lib(aell_norm_primal(m))?;
        ensure(dual.norm == primal.cost, || {
            format!("dual {} != primal {}", dual.norm, primal.cost)
        })?;
        let space = m.space();
        ensure(dual.witness.is_valid(space), || {
            "dual witness is not 1-Lipschitz".into()
        })?;
        ensure(m.pair(&dual.witness.0) == dual.norm, || {
            "witness does not attain the dual value".into()
        })?;
        let mut net = vec![Rational::zero(); space.len()];
        let mut cost = Rational::zero();
        for f in &primal.plan {
            ensure(f.amount.is_positive(), || {
                "non-positive flow in plan".into()
            })?;
            net[f.from] += &f.amount;
            net[f.to] -= &f.amount;
            cost += &f.amount * space.d(f.from, f.to);
        }
        for x in 0..space.len() {
            let want = if x == space.basepoint() {
                -m.mass()
            } else {
                m.coeff(x)
            };
            ensure(net[x] == want, || {
                format!("plan imbalance at {}", space.label(x))
            })?;
        }
        ensure(cost == primal.cost, || {
            "plan cost differs from reported cost".into()
        })
    }

    fn shrink(&self, m: &Molecule) -> Vec<Molecule> {
        let mut out: Vec<Molecule> = m
            .support()
            .into_iter()
            .map(|x| {
                let terms = m
                    .coeffs()
                    .iter()
                    .filter(|(&y, _)| y != x)
                    .map(|(&y, c)| (y, c.clone()));
                Molecule::from_terms(m.space().clone(), terms)
            })
            .collect();
        let p = m.space();
        for x in (0..p.len()).filter(|&x| x != p.basepoint() && m.coeff(x).is_zero()) {
            if let Some((sub, map)) = drop_point(p, x) {
                if let Some(b) = map[p.basepoint()] {
                    let sp = Arc::new(PointedSpace::new(sub, b).expect("valid basepoint"));
                    let terms = m
                        .coeffs()
                        .iter()
                        .map(|(&y, c)| (map[y].expect("kept"), c.clone()));
                    out.push(Molecule::from_terms(sp, terms));
                }
            }
        }
        out
    }

    fn to_json(&self, m: &Molecule) -> Value {
        let rec = MoleculeRecord {
            space: m.space().space().clone(),
            basepoint: m.space().label(m.space().basepoint()).to_string(),
            coeffs: m.to_labels(),
        };
        serde_json::to_value(rec).expect("serializes")
    }
}

// ---------------------------------------------------------------- katetov

#[derive(Clone)]
struct KatetovInstance {
    space: FiniteMetricSpace,
    f: KatetovFunction,
    /// Fractions in [0, 1] choosing each value of a random Katětov extension of `f`.
    extension_choices: Vec<Rational>,
    attachments: Vec<KatetovFunction>,
}

/// Hat extensions are Katětov, restrict to `f`, dominate every Katětov
/// extension; Kuratowski images are isometric; star fragments are metrics that
/// realize their attachments.
struct KatetovSuite;

/// Extends `f` one point at a time, choosing each new value in the admissible
/// interval `[max_y |d(z,y) - f(y)|, min_y f(y) + d(z,y)]`.
fn random_extension(
    space: &FiniteMetricSpace,
    f: &KatetovFunction,
    choices: &[Rational],
) -> Vec<Option<Rational>> {
    let mut vals: Vec<Option<Rational>> = vec![None; space.len()];
    for (&y, v) in f.support().iter().zip(f.values()) {
        vals[y] = Some(v.clone());
    }
    let mut k = 0;
    for z in 0..space.len() {
        if vals[z].is_some() {
            continue;
        }
        let known: Vec<(usize, Rational)> = vals
            .iter()
            .enumerate()
            .filter_map(|(y, v)| v.clone().map(|v| (y, v)))
            .collect();
        let lo = known
            .iter()
            .map(|(y, v)| (space.d(z, *y) - v).abs())
            .max()
            .expect("non-empty");
        let hi = known
            .iter()
            .map(|(y, v)| v + space.d(z, *y))
            .min()
            .expect("non-empty");
        let t = &choices[k % choices.len()];
        k += 1;
        vals[z] = Some(&lo + t * (&hi - &lo));
    }
    vals
}

impl Property for KatetovSuite {
    type Instance = KatetovInstance;

    fn generate(&self, rng: &mut ChaCha8Rng) -> KatetovInstance {
        let n = rng.gen_range(1..=7);
        let pseudo = rng.gen_bool(0.2);
        let space = random::metric_space(rng, n, pseudo);
        let support = random::subset(rng, n, n);
        let f = random::katetov_function(rng, &space, &support);
        let extension_choices = (0..n)
            .map(|_| Rational::new(rng.gen_range(0..=4), 4))
            .collect();
        let attachments = (0..rng.gen_range(0..=4))
            .map(|_| {
                let sup = random::subset(rng, n, 3);
                random::katetov_function(rng, &space, &sup)
            })
            .collect();
        KatetovInstance {
            space,
            f,
            extension_choices,
            attachments,
        }
    }

    fn check(&self, inst: &KatetovInstance) -> std::result::Result<(), String> {
        let space = &inst.space;
        let hat = hat_extension(space, &inst.f);
        let all: Vec<usize> = (0..space.len()).collect();
        ensure(
            lib(is_katetov(space, &all, hat.values()))?.is_none(),
            || "hat is not Katetov".into(),
        )?;
        for (&y, v) in inst.f.support().iter().zip(inst.f.values()) {
            ensure(hat.get(y) == Some(v), || {
                format!("hat differs from f at {}", space.label(y))
            })?;
        }

        let ext = random_extension(space, &inst.f, &inst.extension_choices);
        let ext: Vec<Rational> = ext.into_iter().map(|v| v.expect("filled")).collect();
        ensure(lib(is_katetov(space, &all, &ext))?.is_none(), || {
            "random extension is not Katetov".into()
        })?;
        for x in 0..space.len() {
            ensure(ext[x] <= hat.values()[x], || {
                format!(
                    "extension exceeds hat at {}: {} > {}",
                    space.label(x),
                    ext[x],
                    hat.values()[x]
                )
            })?;
        }

        for x in 0..space.len() {
            for y in 0..space.len() {
                let kx = hat_extension(space, &KatetovFunction::point(x));
                let ky = hat_extension(space, &KatetovFunction::point(y));
                let s = lib(sup_distance(&kx, &ky))?;
                ensure(s == *space.d(x, y), || {
                    "Kuratowski embedding is not isometric".into()
                })?;
            }
        }

        let frag = lib(star_fragment(space, &inst.attachments, "p"))?;
        ensure(lib(frag.space.validate())?.is_none(), || {
            "star fragment is not a metric".into()
        })?;
        let base: Vec<usize> = (0..space.len()).collect();
        ensure(lib(frag.space.restrict(&base))? == *space, || {
            "star fragment changed X".into()
        })?;
        for f in &inst.attachments {
            let h = hat_values(space, f);
            let realized = (0..frag.space.len()).any(|p| {
                f.support()
                    .iter()
                    .zip(f.values())
                    .all(|(&y, v)| frag.space.d(p, y) == v)
                    && (0..space.len()).all(|x| *frag.space.d(p, x) == h[x])
            });
            ensure(realized, || {
                "attachment not realized in the star fragment".into()
            })?;
        }
        Ok(())
    }

    fn to_json(&self, inst: &KatetovInstance) -> Value {
        json!({
            "space": space_json(&inst.space),
            "function": inst.f.to_record(&inst.space),
            "extension_choices": inst.extension_choices,
            "attachments": inst.attachments.iter().map(|a| a.to_record(&inst.space)).collect::<Vec<_>>(),
        })
    }
}

/// `hat(g·f) = hat(f) ∘ g⁻¹` for every isometry `g`.
struct Equivariance;

impl Property for Equivariance {
    type Instance = (FiniteMetricSpace, KatetovFunction);

    fn generate(&self, rng: &mut ChaCha8Rng) -> Self::Instance {
        let space = random::symmetric_space(rng, 7);
        let support = random::subset(rng, space.len(), 4);
        let f = random::katetov_function(rng, &space, &support);
        (space, f)
    }

    fn check(&self, (space, f): &Self::Instance) -> std::result::Result<(), String> {
        let hat = hat_values(space, f);
        for g in lib(enumerate_isometries(space))? {
            let lhs = hat_values(space, &lib(act_on_katetov(space, &g, f))?);
            let ginv = g.inverse();
            let rhs: Vec<Rational> = (0..space.len())
                .map(|x| hat[ginv.apply(x)].clone())
                .collect();
            ensure(lhs == rhs, || {
                format!("equivariance fails for {:?}", g.as_slice())
            })?;
        }
        Ok(())
    }

    fn to_json(&self, (space, f): &Self::Instance) -> Value {
        json!({ "space": space_json(space), "function": f.to_record(space) })
    }
}

#[derive(Clone)]
struct PropKInstance {
    space: FiniteMetricSpace,
    phi: KatetovFunction,
    psi: KatetovFunction,
}

/// `‖φ̂ - ψ̂‖ >= d(A, B)`.
struct PropK;

impl Property for PropK {
    type Instance = PropKInstance;

    fn generate(&self, rng: &mut ChaCha8Rng) -> PropKInstance {
        let n = rng.gen_range(2..=8);
        let space = random::metric_space(rng, n, false);
        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(rng);
        let cut = rng.gen_range(1..n);
        let mut a: Vec<usize> = ids[..cut]
            .iter()
            .copied()
            .take(rng.gen_range(1..=cut))
            .collect();
        let rest = n - cut;
        let mut b: Vec<usize> = ids[cut..]
            .iter()
            .copied()
            .take(rng.gen_range(1..=rest))
            .collect();
        a.sort_unstable();
        b.sort_unstable();
        let phi = random::katetov_function(rng, &space, &a);
        let psi = random::katetov_function(rng, &space, &b);
        PropKInstance { space, phi, psi }
    }

    fn check(&self, inst: &PropKInstance) -> std::result::Result<(), String> {
        let r = lib(prop_k_gap(&inst.space, &inst.phi, &inst.psi))?;
        ensure(r.epsilon.is_positive(), || {
            "supports are not separated".into()
        })?;
        ensure(r.certified && r.gap >= r.epsilon, || {
            format!("gap {} < epsilon {}", r.gap, r.epsilon)
        })
    }

    fn shrink(&self, inst: &PropKInstance) -> Vec<PropKInstance> {
        let used: Vec<usize> = inst
            .phi
            .support()
            .iter()
            .chain(inst.psi.support())
            .copied()
            .collect();
        (0..inst.space.len())
            .filter(|x| !used.contains(x))
            .filter_map(|x| {
                let (sub, map) = drop_point(&inst.space, x)?;
                let remap = |f: &KatetovFunction| {
                    let sup = f.support().iter().map(|&y| map[y].expect("kept")).collect();
                    KatetovFunction::new(&sub, sup, f.values().to_vec()).ok()
                };
                Some(PropKInstance {
                    phi: remap(&inst.phi)?,
                    psi: remap(&inst.psi)?,
                    space: sub,
                })
            })
            .collect()
    }

    fn to_json(&self, inst: &PropKInstance) -> Value {
        json!({
            "space": space_json(&inst.space),
            "phi": inst.phi.to_record(&inst.space),
            "psi": inst.psi.to_record(&inst.space),
        })
    }
}

// ---------------------------------------------------------------- actions

#[derive(Clone)]
struct ExtensionInstance {
    action: GroupAction,
    basepoint: usize,
    phi: Vec<usize>,
    molecules: Vec<BTreeMap<usize, Rational>>,
}

/// If `g` moves `Φ ∪ {∗}` by `ε₀`, then `‖g̃v - w‖ >= ε₀` for molecules
/// supported there, and the distance witness pairs to exactly `ε₀`.
struct Extension;

impl Property for Extension {
    type Instance = ExtensionInstance;

    fn generate(&self, rng: &mut ChaCha8Rng) -> ExtensionInstance {
        let mut attempt = 0;
        loop {
            attempt += 1;
            let action = random::transitive_action(rng, 24);
            let n = action.space().len();
            let basepoint = rng.gen_range(0..n);
            let mut phi = random::subset(rng, n, 3);
            phi.retain(|&x| x != basepoint);
            let mut set = phi.clone();
            set.push(basepoint);
            let (gap, _) = action.moving_gap(&set).expect("non-empty");
            if gap.is_zero() && attempt < 20 {
                continue;
            }
            let molecules = (0..3)
                .map(|_| {
                    let mut m = BTreeMap::new();
                    for &x in &phi {
                        if rng.gen_bool(0.7) {
                            m.insert(x, random::rational_in(rng, -5, 5));
                        }
                    }
                    m
                })
                .collect();
            return ExtensionInstance {
                action,
                basepoint,
                phi,
                molecules,
            };
        }
    }

    fn check(&self, inst: &ExtensionInstance) -> std::result::Result<(), String> {
        let space = Arc::new(lib(PointedSpace::new(
            inst.action.space().clone(),
            inst.basepoint,
        ))?);
        let mut set = inst.phi.clone();
        set.push(inst.basepoint);
        let (eps0, _) = lib(inst.action.moving_gap(&set))?;
        let mols: Vec<Molecule> = inst
            .molecules
            .iter()
            .map(|c| Molecule::from_terms(space.clone(), c.iter().map(|(&x, v)| (x, v.clone()))))
            .collect();
        for g in 0..inst.action.group().order() {
            let iso = inst.action.image(g);
            if lib(inst.action.space().set_distance(&set, &iso.image_of(&set)))? != eps0 {
                continue;
            }
            for v in &mols {
                let gv = lib(affine_extend(iso, v))?;
                for w in &mols {
                    let bound = lib(moving_lower_bound(&inst.phi, iso, &eps0, v, w))?;
                    ensure(bound.bound == eps0, || {
                        format!("witness pairs to {} not {eps0}", bound.bound)
                    })?;
                    let lp = lib(norm_distance(&gv, w))?;
                    ensure(lp >= eps0, || format!("‖g̃v - w‖ = {lp} < ε₀ = {eps0}"))?;
                }
            }
        }
        Ok(())
    }

    fn to_json(&self, inst: &ExtensionInstance) -> Value {
        let s = inst.action.space();
        json!({
            "action": inst.action,
            "basepoint": s.label(inst.basepoint),
            "phi": inst.phi.iter().map(|&x| s.label(x)).collect::<Vec<_>>(),
            "molecules": inst.molecules.iter().map(|m| m.iter().map(|(&x, c)| (s.label(x).to_string(), c.clone())).collect::<BTreeMap<_, _>>()).collect::<Vec<_>>(),
        })
    }
}

fn random_molecule_on(rng: &mut ChaCha8Rng, space: &Arc<PointedSpace>) -> Molecule {
    let mut terms = Vec::new();
    for x in 0..space.len() {
        if rng.gen_bool(0.6) {
            terms.push((x, random::rational_in(rng, -5, 5)));
        }
    }
    Molecule::from_terms(space.clone(), terms)
}

#[derive(Clone)]
struct ActionLawsInstance {
    space: FiniteMetricSpace,
    basepoint: usize,
    seed: u64,
}

/// Affine extensions compose like the group, fix nothing extra at the
/// identity, and preserve free-norm distances.
struct ActionLaws;

/// Spaces whose isometry group exceeds this order are redrawn, keeping the
/// all-pairs composition check (quadratic in the order) affordable.
const MAX_ISOMETRY_ORDER: usize = 720;

impl Property for ActionLaws {
    type Instance = ActionLawsInstance;

    fn generate(&self, rng: &mut ChaCha8Rng) -> ActionLawsInstance {
        let space = loop {
            let s = random::symmetric_space(rng, 7);
            if enumerate_isometries(&s).expect("metric space").len() <= MAX_ISOMETRY_ORDER {
                break s;
            }
        };
        let basepoint = rng.gen_range(0..space.len());
        ActionLawsInstance {
            space,
            basepoint,
            seed: rng.gen(),
        }
    }

    fn check(&self, inst: &ActionLawsInstance) -> std::result::Result<(), String> {
        let action = lib(GroupAction::isometry_group(&inst.space))?;
        let p = Arc::new(lib(PointedSpace::new(inst.space.clone(), inst.basepoint))?);
        let mut rng = ChaCha8Rng::seed_from_u64(inst.seed);
        let a = random_molecule_on(&mut rng, &p);
        let b = random_molecule_on(&mut rng, &p);
        let dist_ab = lib(norm_distance(&a, &b))?;
        let group = action.group();
        let order = group.order();
        let ext: Vec<Molecule> = action
            .images()
            .iter()
            .map(|g| lib(affine_extend(g, &a)))
            .collect::<std::result::Result<_, _>>()?;
        ensure(ext[group.identity()] == a, || {
            "identity does not extend to the identity".into()
        })?;
        for g in 0..order {
            let gb = lib(affine_extend(action.image(g), &b))?;
            let d = lib(norm_distance(&ext[g], &gb))?;
            ensure(d == dist_ab, || {
                format!("extension of {} changes a distance", group.label(g))
            })?;
            for h in 0..order {
                let lhs = &ext[group.mul(g, h)];
                let rhs = lib(affine_extend(action.image(g), &ext[h]))?;
                ensure(*lhs == rhs, || {
                    format!(
                        "extend({}·{}) != extend({}) ∘ extend({})",
                        group.label(g),
                        group.label(h),
                        group.label(g),
                        group.label(h)
                    )
                })?;
            }
        }
        Ok(())
    }

    fn to_json(&self, inst: &ActionLawsInstance) -> Value {
        json!({
            "space": space_json(&inst.space),
            "basepoint": inst.space.label(inst.basepoint),
            "molecule_seed": inst.seed,
        })
    }
}

#[derive(Clone)]
struct FixedPointInstance {
    action: GroupAction,
    seed: Molecule,
}

/// The orbit barycenter is fixed by every element.
struct FixedPointSuite;

impl Property for FixedPointSuite {
    type Instance = FixedPointInstance;

    fn generate(&self, rng: &mut ChaCha8Rng) -> FixedPointInstance {
        let action = if rng.gen_bool(0.5) {
            random::transitive_action(rng, 24)
        } else {
            let s = random::symmetric_space(rng, 6);
            GroupAction::isometry_group(&s).expect("metric space")
        };
        let base = rng.gen_range(0..action.space().len());
        let p = Arc::new(PointedSpace::new(action.space().clone(), base).expect("valid basepoint"));
        let seed = random_molecule_on(rng, &p);
        FixedPointInstance { action, seed }
    }

    fn check(&self, inst: &FixedPointInstance) -> std::result::Result<(), String> {
        let fp = lib(fixed_point(&inst.action, &inst.seed))?;
        ensure(lib(is_fixed(&inst.action, &fp))?, || {
            "barycenter not fixed".into()
        })?;
        for g in inst.action.images() {
            ensure(lib(affine_extend(g, &fp))? == fp, || {
                format!("moved by {:?}", g.as_slice())
            })?;
        }
        Ok(())
    }

    fn to_json(&self, inst: &FixedPointInstance) -> Value {
        json!({ "action": inst.action, "seed": molecule_json(&inst.seed) })
    }
}

// ---------------------------------------------------------------- groups

/// The quotient metric is constant on coset pairs, the translation action is
/// isometric and transitive, and pulling back at the coset `H` recovers `d`.
struct QuotientSuite;

impl Property for QuotientSuite {
    type Instance = crate::quotient::InvariantPseudometric;

    fn generate(&self, rng: &mut ChaCha8Rng) -> Self::Instance {
        let g = random::group(rng, 24);
        random::invariant_pseudometric(rng, &g, true)
    }

    fn check(&self, pm: &Self::Instance) -> std::result::Result<(), String> {
        let q = lib(quotient_space(pm))?;
        let group = pm.group();
        for g in 0..group.order() {
            for k in 0..group.order() {
                ensure(
                    q.space.d(q.coset_of[g], q.coset_of[k]) == pm.d(g, k),
                    || {
                        format!(
                            "d_X(gH, kH) != d(g, k) at ({}, {})",
                            group.label(g),
                            group.label(k)
                        )
                    },
                )?;
            }
        }
        for (g, img) in q.action.images().iter().enumerate() {
            for x in 0..q.space.len() {
                for y in 0..q.space.len() {
                    ensure(
                        q.space.d(img.apply(x), img.apply(y)) == q.space.d(x, y),
                        || format!("translation by {} is not isometric", group.label(g)),
                    )?;
                }
            }
        }
        ensure(q.action.orbit(0).len() == q.space.len(), || {
            "action not transitive".into()
        })?;
        let back = lib(pullback_pseudometric(
            &q.action,
            q.coset_of[group.identity()],
        ))?;
        ensure(back.pseudometric == *pm, || {
            "pullback at H does not recover d".into()
        })
    }

    fn to_json(&self, pm: &Self::Instance) -> Value {
        serde_json::to_value(pm).expect("serializes")
    }
}

/// `V ⊆ V'` implies `k(V') <= k(V)`, and both witnesses cover.
struct FvfMonotone;

impl Property for FvfMonotone {
    type Instance = (FiniteGroup, Vec<usize>, Vec<usize>);

    fn generate(&self, rng: &mut ChaCha8Rng) -> Self::Instance {
        let g = random::group(rng, 12);
        let n = g.order();
        let v = random::subset(rng, n, 3);
        let mut big = v.clone();
        big.extend(random::subset(rng, n, 3));
        big.sort_unstable();
        big.dedup();
        (g, v, big)
    }

    fn check(&self, (g, v, big): &Self::Instance) -> std::result::Result<(), String> {
        let small = lib(min_fvf_cover(g, v))?;
        let large = lib(min_fvf_cover(g, big))?;
        ensure(covers(g, &small.f, v) && covers(g, &large.f, big), || {
            "witness does not cover".into()
        })?;
        ensure(large.k <= small.k, || {
            format!("k(V') = {} > k(V) = {}", large.k, small.k)
        })
    }

    fn to_json(&self, (g, v, big): &Self::Instance) -> Value {
        let labels = |s: &[usize]| {
            s.iter()
                .map(|&x| g.label(x).to_string())
                .collect::<Vec<_>>()
        };
        json!({ "group": g, "v": labels(v), "v_prime": labels(big) })
    }
}

/// Runs every suite with the given trial count.
pub fn run_all(trials: usize, seed: u64) -> Vec<SuiteReport> {
    SUITES
        .iter()
        .map(|s| run_suite(s, trials, seed, None).expect("known suite"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes_a_few_trials() {
        for s in SUITES {
            let r = run_suite(s, 5, 42, None).unwrap();
            assert!(r.is_pass(), "{s}: {:?}", r.failure);
            assert_eq!(r.passed, 5);
        }
    }

    #[test]
    fn reports_are_reproducible() {
        let a = run_suite("duality", 20, 9, None).unwrap();
        let b = run_suite("duality", 20, 9, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn corrupted_fixture_shrinks_to_the_witness_triple() {
        let fixture = json!({
            "points": ["a", "b", "c", "d", "e"],
            "dist": [
                ["0", "1", "2", "1", "1"],
                ["1", "0", "1", "1", "1"],
                ["2", "1", "0", "1", "5"],
                ["1", "1", "1", "0", "1"],
                ["1", "1", "5", "1", "0"]
            ]
        });
        let r = run_suite("metric", 3, 1, Some(&fixture)).unwrap();
        let f = r.failure.expect("corrupted fixture fails");
        assert!(f.message.contains("triangle"));
        assert_eq!(f.counterexample["points"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn fixture_only_for_metric_suite() {
        assert!(run_suite("duality", 1, 0, Some(&json!({}))).is_err());
        assert!(run_suite("nope", 1, 0, None).is_err());
    }
}
