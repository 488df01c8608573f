//! `freemetric`: JSON in, JSON out.
//!
//! Exit status is 0 on success, 1 when the input is malformed or a
//! computation rejects it, and 2 when the command line itself is wrong. Errors
//! are reported on standard output as `{"error": {"kind", "message"}}`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use freemetric::action::{enumerate_isometries, GroupAction, Isometry};
use freemetric::free::{
    aell_norm_dual, aell_norm_primal, affine_extend, fixed_point, is_fixed, moving_lower_bound,
    norm_distance, Molecule, MoleculeRecord,
};
use freemetric::katetov::{
    hat_extension, is_katetov, prop_k_gap, star_fragment, tower, KatetovFunction, KatetovRecord,
    TowerPolicy,
};
use freemetric::metric::{validate, PointedSpace, SpaceRecord};
use freemetric::quotient::{
    covers, min_fvf_cover, pullback_pseudometric, quotient_space, Quotient,
};
use freemetric::suites::{run_suite, SUITES};
use freemetric::{Error, FiniteGroup, FiniteMetricSpace, InvariantPseudometric, Rational};

#[derive(Parser, Debug)]
#[command(
    name = "freemetric",
    version,
    about = "Exact computations on finite metric spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Input JSON file; repeat to process several. Reads stdin when absent.
    #[arg(long = "in", value_name = "FILE", global = true)]
    inputs: Vec<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long, value_name = "FILE", global = true)]
    out: Option<PathBuf>,
    /// Seed for the property-test instance stream.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Number of property-test trials.
    #[arg(long, default_value_t = 100, global = true)]
    trials: usize,
    /// Maximum number of new points a tower may create.
    #[arg(long, global = true)]
    budget: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the (pseudo)metric axioms.
    Validate,
    /// Free-space norm of a molecule by LP duality and by optimal transport.
    Norm,
    /// Check whether a partial function is Katětov.
    KatetovCheck,
    /// Extend a Katětov function to the whole space.
    HatExtend,
    /// Adjoin one point per attached Katětov function.
    Star,
    /// Iterated one-point extensions over a value grid.
    Tower,
    /// List every isometry of a metric space.
    IsoEnum,
    /// Largest displacement of a finite set under the action.
    MovingGap,
    /// Apply the affine extension of an isometry to a molecule.
    ExtendAffine,
    /// Average a molecule over the group orbit.
    FixedPoint,
    /// Quotient a group by an invariant pseudometric.
    Quotient,
    /// Pull an action back to an invariant pseudometric on the group.
    Pullback,
    /// Smallest F with F·V·F covering the group.
    Fvf,
    /// Gap between hat extensions of functions with separated supports.
    PropK,
    /// Check that a moving set stays moved in the free space.
    ThExtensionCheck,
    /// Run a randomized invariant suite.
    Proptest {
        /// Suite name.
        suite: String,
    },
}

enum Failure {
    Usage(String),
    Io(String),
    Json(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            _ => 1,
        }
    }

    fn to_json(&self) -> Value {
        let (kind, message) = match self {
            Failure::Usage(m) => ("usage", m.clone()),
            Failure::Io(m) => ("io", m.clone()),
            Failure::Json(m) => ("malformed_json", m.clone()),
            Failure::Lib(e) => (e.kind(), e.to_string()),
        };
        json!({ "error": { "kind": kind, "message": message } })
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            return report(&Failure::Usage(msg.trim_end().to_string()));
        }
    };
    match execute(&cli) {
        Ok((value, code)) => match emit(&cli, &value) {
            Ok(()) => ExitCode::from(code),
            Err(f) => report(&f),
        },
        Err(f) => report(&f),
    }
}

fn report(f: &Failure) -> ExitCode {
    println!("{}", pretty(&f.to_json()));
    ExitCode::from(f.code())
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize")
}

fn emit(cli: &Cli, value: &Value) -> Outcome<()> {
    let text = pretty(value) + "\n";
    match &cli.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
        }
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(e.to_string())),
    }
}

fn read_inputs(cli: &Cli) -> Outcome<Vec<Value>> {
    let texts = if cli.inputs.is_empty() {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Io(e.to_string()))?;
        vec![s]
    } else {
        cli.inputs
            .iter()
            .map(|p| {
                fs::read_to_string(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))
            })
            .collect::<Outcome<_>>()?
    };
    texts
        .iter()
        .map(|t| serde_json::from_str(t).map_err(|e| Failure::Json(e.to_string())))
        .collect()
}

/// Returns the JSON result and the exit code to use on success.
fn execute(cli: &Cli) -> Outcome<(Value, u8)> {
    if let Command::Proptest { suite } = &cli.command {
        return proptest(cli, suite);
    }
    let inputs = read_inputs(cli)?;
    let mut results = inputs
        .into_iter()
        .map(|input| dispatch(cli, input))
        .collect::<Outcome<Vec<Value>>>()?;
    let value = if results.len() == 1 {
        results.pop().expect("one result")
    } else {
        Value::Array(results)
    };
    Ok((value, 0))
}

fn proptest(cli: &Cli, suite: &str) -> Outcome<(Value, u8)> {
    if !SUITES.contains(&suite) {
        return Err(Failure::Usage(format!(
            "unknown suite {suite:?}; expected one of {}",
            SUITES.join(", ")
        )));
    }
    if cli.inputs.len() > 1 {
        return Err(Failure::Usage(
            "proptest takes at most one --in fixture".into(),
        ));
    }
    if !cli.inputs.is_empty() && suite != "metric" {
        return Err(Failure::Usage(format!(
            "suite {suite:?} does not take an input fixture"
        )));
    }
    let fixture = if cli.inputs.is_empty() {
        None
    } else {
        read_inputs(cli)?.pop()
    };
    let report = run_suite(suite, cli.trials, cli.seed, fixture.as_ref())?;
    let code = if report.is_pass() { 0 } else { 1 };
    Ok((
        serde_json::to_value(&report).expect("report serializes"),
        code,
    ))
}

fn parse<T: DeserializeOwned>(v: Value) -> Outcome<T> {
    serde_json::from_value(v).map_err(|e| Failure::Json(e.to_string()))
}

fn dispatch(cli: &Cli, input: Value) -> Outcome<Value> {
    match &cli.command {
        Command::Validate => validate_cmd(parse(input)?),
        Command::Norm => norm_cmd(parse(input)?),
        Command::KatetovCheck => katetov_check_cmd(parse(input)?),
        Command::HatExtend => hat_extend_cmd(parse(input)?),
        Command::Star => star_cmd(parse(input)?),
        Command::Tower => tower_cmd(parse(input)?, cli.budget),
        Command::IsoEnum => iso_enum_cmd(parse(input)?),
        Command::MovingGap => moving_gap_cmd(parse(input)?),
        Command::ExtendAffine => extend_affine_cmd(parse(input)?),
        Command::FixedPoint => fixed_point_cmd(parse(input)?),
        Command::Quotient => quotient_cmd(parse(input)?),
        Command::Pullback => pullback_cmd(parse(input)?),
        Command::Fvf => fvf_cmd(parse(input)?),
        Command::PropK => prop_k_cmd(parse(input)?),
        Command::ThExtensionCheck => th_extension_cmd(parse(input)?),
        Command::Proptest { .. } => unreachable!("handled before reading inputs"),
    }
}

fn group_labels(group: &FiniteGroup, xs: impl IntoIterator<Item = usize>) -> Vec<String> {
    xs.into_iter().map(|x| group.label(x).to_string()).collect()
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("result serializes")
}

/// The space is validated here rather than on deserialization so that an
/// axiom failure is a result, not an error.
fn validate_cmd(rec: SpaceRecord) -> Outcome<Value> {
    Ok(match validate(&rec.points, &rec.dist, rec.pseudo)? {
        None => json!({ "valid": true }),
        Some(v) => json!({ "valid": false, "violation": v }),
    })
}

fn norm_cmd(rec: MoleculeRecord) -> Outcome<Value> {
    let m = rec.into_molecule()?;
    let dual = aell_norm_dual(&m)?;
    let primal = aell_norm_primal(&m)?;
    let space = m.space();
    let plan: Vec<Value> = primal
        .plan
        .iter()
        .map(
            |f| json!({ "from": space.label(f.from), "to": space.label(f.to), "amount": f.amount }),
        )
        .collect();
    Ok(json!({
        "dual": dual.norm,
        "primal": primal.cost,
        "equal": dual.norm == primal.cost,
        "witness": dual.witness.labelled(space),
        "plan": plan,
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionRequest {
    space: FiniteMetricSpace,
    function: KatetovRecord,
}

fn katetov_check_cmd(req: FunctionRequest) -> Outcome<Value> {
    let support = req.space.indices_of(&req.function.support)?;
    let values = req
        .function
        .support
        .iter()
        .map(|l| {
            req.function.values.get(l).cloned().ok_or_else(|| {
                Failure::Lib(Error::Structure(format!(
                    "no value for support point {l:?}"
                )))
            })
        })
        .collect::<Outcome<Vec<Rational>>>()?;
    Ok(match is_katetov(&req.space, &support, &values)? {
        None => json!({ "katetov": true }),
        Some(v) => json!({ "katetov": false, "violation": v }),
    })
}

fn hat_extend_cmd(req: FunctionRequest) -> Outcome<Value> {
    let f = KatetovFunction::from_record(&req.space, &req.function)?;
    Ok(to_value(
        &hat_extension(&req.space, &f).to_record(&req.space),
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StarRequest {
    space: FiniteMetricSpace,
    attachments: Vec<KatetovRecord>,
    #[serde(default = "default_prefix")]
    prefix: String,
}

fn default_prefix() -> String {
    "p".into()
}

fn star_cmd(req: StarRequest) -> Outcome<Value> {
    let fs = req
        .attachments
        .iter()
        .map(|r| KatetovFunction::from_record(&req.space, r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(to_value(&star_fragment(&req.space, &fs, &req.prefix)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TowerRequest {
    space: FiniteMetricSpace,
    depth: usize,
    policy: PolicyRequest,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyRequest {
    support_size: usize,
    step: Rational,
    cap: Rational,
    budget: Option<usize>,
}

const DEFAULT_TOWER_BUDGET: usize = 256;

fn tower_cmd(req: TowerRequest, budget: Option<usize>) -> Outcome<Value> {
    let policy = TowerPolicy {
        support_size: req.policy.support_size,
        step: req.policy.step,
        cap: req.policy.cap,
        budget: budget.or(req.policy.budget).unwrap_or(DEFAULT_TOWER_BUDGET),
    };
    Ok(to_value(&tower(&req.space, req.depth, &policy)?))
}

fn iso_enum_cmd(space: FiniteMetricSpace) -> Outcome<Value> {
    let isos = enumerate_isometries(&space)?;
    Ok(json!({ "count": isos.len(), "isometries": isos }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MovingGapRequest {
    action: GroupAction,
    set: Vec<String>,
}

fn moving_gap_cmd(req: MovingGapRequest) -> Outcome<Value> {
    let set = req.action.space().indices_of(&req.set)?;
    let (gap, g) = req.action.moving_gap(&set)?;
    Ok(json!({ "gap": gap, "witness": req.action.group().label(g) }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExtendAffineRequest {
    space: FiniteMetricSpace,
    basepoint: String,
    isometry: Vec<usize>,
    coeffs: BTreeMap<String, Rational>,
}

fn extend_affine_cmd(req: ExtendAffineRequest) -> Outcome<Value> {
    let g = Isometry::new(&req.space, req.isometry)?;
    let p = Arc::new(PointedSpace::with_label(req.space, &req.basepoint)?);
    let m = Molecule::from_labels(p, &req.coeffs)?;
    let gm = affine_extend(&g, &m)?;
    Ok(json!({ "coeffs": gm.to_labels() }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FixedPointRequest {
    action: GroupAction,
    basepoint: String,
    seed: BTreeMap<String, Rational>,
}

fn fixed_point_cmd(req: FixedPointRequest) -> Outcome<Value> {
    let p = Arc::new(PointedSpace::with_label(
        req.action.space().clone(),
        &req.basepoint,
    )?);
    let seed = Molecule::from_labels(p, &req.seed)?;
    let fp = fixed_point(&req.action, &seed)?;
    Ok(json!({ "coeffs": fp.to_labels(), "fixed": is_fixed(&req.action, &fp)? }))
}

fn quotient_json(group: &FiniteGroup, q: &Quotient) -> Value {
    json!({
        "kernel": group_labels(group, q.kernel.iter().copied()),
        "cosets": q.cosets.iter().map(|c| group_labels(group, c.iter().copied())).collect::<Vec<_>>(),
        "space": q.space,
        "action": q.action,
    })
}

fn quotient_cmd(pm: InvariantPseudometric) -> Outcome<Value> {
    let q = quotient_space(&pm)?;
    Ok(quotient_json(pm.group(), &q))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PullbackRequest {
    action: GroupAction,
    point: String,
}

fn pullback_cmd(req: PullbackRequest) -> Outcome<Value> {
    let xi = req.action.space().index_of(&req.point)?;
    let pb = pullback_pseudometric(&req.action, xi)?;
    let group = req.action.group();
    let orbit: BTreeMap<&str, &str> = pb
        .orbit_map
        .iter()
        .enumerate()
        .map(|(g, &x)| (group.label(g), req.action.space().label(x)))
        .collect();
    Ok(json!({
        "pseudometric": pb.pseudometric,
        "orbit_map": orbit,
        "quotient": quotient_json(group, &pb.quotient),
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FvfRequest {
    group: FiniteGroup,
    v: Vec<String>,
}

fn fvf_cmd(req: FvfRequest) -> Outcome<Value> {
    let v = req
        .v
        .iter()
        .map(|l| req.group.index_of(l))
        .collect::<Result<Vec<_>, _>>()?;
    let cover = min_fvf_cover(&req.group, &v)?;
    debug_assert!(covers(&req.group, &cover.f, &v));
    Ok(json!({ "k": cover.k, "F": group_labels(&req.group, cover.f.iter().copied()) }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PropKRequest {
    space: FiniteMetricSpace,
    a: KatetovRecord,
    b: KatetovRecord,
}

fn prop_k_cmd(req: PropKRequest) -> Outcome<Value> {
    let phi = KatetovFunction::from_record(&req.space, &req.a)?;
    let psi = KatetovFunction::from_record(&req.space, &req.b)?;
    Ok(to_value(&prop_k_gap(&req.space, &phi, &psi)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ThExtensionRequest {
    action: GroupAction,
    basepoint: String,
    phi: Vec<String>,
    molecules: Vec<BTreeMap<String, Rational>>,
}

/// Computes `ε₀` and its witness `g` for `Φ ∪ {∗}`, then checks every ordered
/// pair of the given molecules: the LP distance `‖g̃v - w‖` is at least `ε₀`
/// and the explicit 1-Lipschitz witness pairs to exactly `ε₀`.
fn th_extension_cmd(req: ThExtensionRequest) -> Outcome<Value> {
    let action = &req.action;
    let space = action.space();
    let p = Arc::new(PointedSpace::with_label(space.clone(), &req.basepoint)?);
    let phi = space.indices_of(&req.phi)?;
    let mut set = phi.clone();
    set.push(p.basepoint());
    let (eps0, g) = action.moving_gap(&set)?;
    let iso = action.image(g);
    let mols = req
        .molecules
        .iter()
        .map(|c| Molecule::from_labels(p.clone(), c))
        .collect::<Result<Vec<_>, _>>()?;
    for m in &mols {
        if m.support().iter().any(|x| !phi.contains(x)) {
            return Err(Error::Precondition(
                "molecule not supported in phi and the basepoint".into(),
            )
            .into());
        }
    }
    let mut pairs = Vec::new();
    let mut holds = true;
    for (i, v) in mols.iter().enumerate() {
        let gv = affine_extend(iso, v)?;
        for (j, w) in mols.iter().enumerate() {
            let distance = norm_distance(&gv, w)?;
            let bound = moving_lower_bound(&phi, iso, &eps0, v, w)?;
            let ok = distance >= eps0 && bound.bound == eps0;
            holds &= ok;
            pairs.push(
                json!({ "v": i, "w": j, "distance": distance, "bound": bound.bound, "holds": ok }),
            );
        }
    }
    Ok(json!({
        "epsilon0": eps0,
        "g": action.group().label(g),
        "holds": holds,
        "pairs": pairs,
    }))
}
