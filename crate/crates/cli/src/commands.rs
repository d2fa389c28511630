use std::io::{self, Write};
use std::ops::ControlFlow;
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use cyclotile::cyclotomic::{average_property_check, cyclotomic_poly, phi_divides};
use cyclotile::divsets::{
    dilate_check, div_between, div_set, is_factorization_brute, is_factorization_sands,
    lemma24_check_axis,
};
use cyclotile::search::{complement_search_with, random_instance, verify_theorem, SearchOptions};
use cyclotile::szabo::{
    build_a, build_b, check_div_structure, check_prop210, classify_b_form, verify_szabo_pair,
    ComplementPlan, SumsetFactors,
};
use cyclotile::{Axis, ModulusContext, ZmSet};
use serde_json::{json, Value};

use crate::args::{
    AxisArg, Command, Format, Method, OptPrimes, PairArgs, Primes, PropsCommand, SearchArgs,
    SearchCommand, SzaboCommand,
};
use crate::io::{load_set, save_set};

/// Outcome of a command that completed without an input error.
pub struct Report {
    pub value: Value,
    /// The checked property holds (or the computation simply succeeded).
    pub holds: bool,
}

impl Report {
    fn new(value: Value, holds: bool) -> Report {
        Report { value, holds }
    }
}

fn context(&[p, q, r]: &[u64; 3]) -> Result<ModulusContext> {
    Ok(ModulusContext::new(p, q, r)?)
}

fn optional_modulus(primes: &OptPrimes) -> Result<Option<u64>> {
    primes
        .primes
        .as_ref()
        .map(|p| context(p).map(|c| c.modulus()))
        .transpose()
}

fn axis(a: AxisArg) -> Axis {
    match a {
        AxisArg::P => Axis::P,
        AxisArg::Q => Axis::Q,
        AxisArg::R => Axis::R,
    }
}

fn load_pair(args: &PairArgs) -> Result<(ModulusContext, ZmSet, ZmSet)> {
    let ctx = context(&args.primes.primes)?;
    let a = load_set(&args.a, Some(ctx.modulus()))?;
    let b = load_set(&args.b, Some(ctx.modulus()))?;
    Ok((ctx, a, b))
}

fn same_modulus(a: &ZmSet, b: &ZmSet) -> Result<()> {
    if a.modulus() != b.modulus() {
        return Err(cyclotile::Error::ModulusMismatch {
            expected: a.modulus(),
            found: b.modulus(),
        }
        .into());
    }
    Ok(())
}

pub fn run(command: Command, format: Format) -> Result<Report> {
    match command {
        Command::Verify {
            primes,
            a,
            b,
            method,
        } => verify(&primes, &a, &b, method),
        Command::Divset {
            primes,
            set,
            against,
        } => divset(&primes, &set, against.as_deref()),
        Command::Cyclotomic { s, set } => cyclotomic(s, set.as_deref()),
        Command::Szabo(SzaboCommand::Check(pair)) => szabo_check(&pair),
        Command::Szabo(SzaboCommand::Build {
            primes,
            u,
            v,
            w,
            plan,
            seed,
            out_a,
            out_b,
        }) => {
            let lists = u.zip(v).zip(w).map(|((u, v), w)| [u, v, w]);
            let report = szabo_build(&primes, lists, plan.as_deref(), seed)?;
            for (path, key) in [(out_a, "a"), (out_b, "b")] {
                if let Some(path) = path {
                    let set: ZmSet = serde_json::from_value(report.value[key].clone())?;
                    save_set(&path, &set)?;
                }
            }
            Ok(report)
        }
        Command::Search(SearchCommand::Complement { primes, a, search }) => {
            search_complement(&primes, &a, &search, format)
        }
        Command::Search(SearchCommand::Theorem { primes, a, search }) => {
            theorem(&primes, &a, &search)
        }
        Command::Props(p) => props(p),
    }
}

fn verify(primes: &OptPrimes, a: &Path, b: &Path, method: Method) -> Result<Report> {
    let m = optional_modulus(primes)?;
    let a = load_set(a, m)?;
    let b = load_set(b, m)?;
    same_modulus(&a, &b)?;
    let brute = matches!(method, Method::Brute | Method::Both).then(|| is_factorization_brute(&a, &b));
    let sands = matches!(method, Method::Sands | Method::Both).then(|| is_factorization_sands(&a, &b));
    if let (Some(x), Some(y)) = (brute, sands) {
        if x != y {
            bail!("brute-force and Sands checks disagree ({x} vs {y})");
        }
    }
    let factorization = brute.or(sands).unwrap_or(false);
    Ok(Report::new(
        json!({
            "modulus": a.modulus(),
            "size_a": a.len(),
            "size_b": b.len(),
            "brute": brute,
            "sands": sands,
            "factorization": factorization,
        }),
        factorization,
    ))
}

fn divset(primes: &OptPrimes, set: &Path, against: Option<&Path>) -> Result<Report> {
    let m = optional_modulus(primes)?;
    let e = load_set(set, m)?;
    let div = match against {
        Some(path) => {
            let f = load_set(path, m)?;
            same_modulus(&e, &f)?;
            div_between(&e, &f)?
        }
        None => div_set(&e)?,
    };
    Ok(Report::new(
        json!({ "modulus": e.modulus(), "divisors": div.to_vec() }),
        true,
    ))
}

fn cyclotomic(s: u64, set: Option<&Path>) -> Result<Report> {
    let phi = cyclotomic_poly(s)?;
    let coeffs: Vec<String> = phi.coeffs().iter().map(ToString::to_string).collect();
    let mut value = json!({ "s": s, "degree": phi.degree(), "coefficients": coeffs });
    let mut holds = true;
    if let Some(path) = set {
        let e = load_set(path, None)?;
        holds = phi_divides(s, &e)?;
        value["divides_mask"] = json!(holds);
    }
    Ok(Report::new(value, holds))
}

fn szabo_check(pair: &PairArgs) -> Result<Report> {
    let (ctx, a, b) = load_pair(pair)?;
    let (order, witness) = match verify_szabo_pair(&a, &b, &ctx) {
        Some(w) => ("ab", Some(w)),
        None => ("ba", verify_szabo_pair(&b, &a, &ctx)),
    };
    let form = classify_b_form(&b, &ctx).ok();
    let certified = witness.is_some();
    Ok(Report::new(
        json!({
            "certified": certified,
            "order": certified.then_some(order),
            "witness": witness,
            "b_form": form,
        }),
        certified,
    ))
}

fn szabo_build(
    primes: &Primes,
    lists: Option<[Vec<i64>; 3]>,
    plan: Option<&Path>,
    seed: u64,
) -> Result<Report> {
    let ctx = context(&primes.primes)?;
    let (a, b, factors, plan) = match (lists, plan) {
        (Some([u, v, w]), Some(path)) => {
            let factors = SumsetFactors::from_lists(&ctx, &u, &v, &w);
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let plan: ComplementPlan = serde_json::from_str(&text)
                .with_context(|| format!("{}: bad plan", path.display()))?;
            (build_a(&factors, &ctx)?, build_b(&plan, &ctx)?, factors, plan)
        }
        (None, None) => {
            let inst = random_instance(seed, &ctx)?;
            (inst.a, inst.b, inst.factors, inst.plan)
        }
        _ => bail!("give --u/--v/--w together with --plan, or neither for a random instance"),
    };
    let factorization = is_factorization_brute(&a, &b);
    Ok(Report::new(
        json!({ "a": a, "b": b, "factors": factors, "plan": plan, "factorization": factorization }),
        factorization,
    ))
}

fn search_options(args: &SearchArgs) -> Result<SearchOptions> {
    let time_budget = match args.budget {
        Some(s) if !(s.is_finite() && s >= 0.0) => bail!("--budget must be a nonnegative number"),
        Some(s) => Some(Duration::from_secs_f64(s)),
        None => None,
    };
    Ok(SearchOptions {
        max_solutions: args.limit,
        time_budget,
        require_not_subgroup: args.require_nonsubgroup,
        seed: args.seed,
        stable: args.stable,
    })
}

fn search_complement(
    primes: &OptPrimes,
    a: &Path,
    args: &SearchArgs,
    format: Format,
) -> Result<Report> {
    let m = optional_modulus(primes)?;
    let a = load_set(a, m)?;
    let opts = search_options(args)?;
    let out = Mutex::new((io::BufWriter::new(io::stdout()), 0usize));
    let sink = |b: ZmSet| {
        let line = match format {
            Format::Json => b.to_json(),
            Format::Text => b.elements().iter().map(u64::to_string).collect::<Vec<_>>().join(" "),
        };
        let mut guard = out.lock().expect("output lock poisoned");
        guard.1 += 1;
        match writeln!(guard.0, "{line}") {
            Ok(()) => ControlFlow::Continue(()),
            Err(_) => ControlFlow::Break(()),
        }
    };
    let (complete, budget_exceeded) = complement_search_with(&a, &opts, &sink)?;
    let (mut stdout, found) = out.into_inner().expect("output lock poisoned");
    stdout.flush().ok();
    if budget_exceeded {
        eprintln!("warning: time budget exhausted after {found} complement(s)");
    }
    eprintln!("found {found} complement(s){}", if complete { ", enumeration complete" } else { "" });
    Ok(Report::new(Value::Null, true))
}

fn theorem(primes: &Primes, a: &Path, args: &SearchArgs) -> Result<Report> {
    let ctx = context(&primes.primes)?;
    let a = load_set(a, Some(ctx.modulus()))?;
    let report = verify_theorem(&a, &search_options(args)?, &ctx)?;
    let holds = report.passed();
    Ok(Report::new(json!(report), holds))
}

fn props(command: PropsCommand) -> Result<Report> {
    match command {
        PropsCommand::Check210(pair) => {
            let (ctx, a, b) = load_pair(&pair)?;
            let rep = check_prop210(&a, &b, &ctx)?;
            Ok(Report::new(json!(rep), rep.passed()))
        }
        PropsCommand::Average { pair, axis: which } => {
            let (ctx, a, b) = load_pair(&pair)?;
            let axes = match which {
                Some(x) => vec![axis(x)],
                None => Axis::ALL.to_vec(),
            };
            let reports = axes
                .into_iter()
                .map(|ax| average_property_check(&a, &b, ax, &ctx))
                .collect::<cyclotile::Result<Vec<_>>>()?;
            let holds = reports.iter().all(|r| r.passed());
            Ok(Report::new(json!({ "axes": reports }), holds))
        }
        PropsCommand::Divstructure { primes, a } => {
            let ctx = context(&primes.primes)?;
            let a = load_set(&a, Some(ctx.modulus()))?;
            let rep = check_div_structure(&a, &ctx)?;
            Ok(Report::new(json!(rep), rep.passed()))
        }
        PropsCommand::Lemma24 {
            primes,
            set,
            axis: which,
        } => {
            let ctx = context(&primes.primes)?;
            let e = load_set(&set, Some(ctx.modulus()))?;
            let rep = lemma24_check_axis(&e, &ctx, axis(which));
            Ok(Report::new(
                json!({
                    "axis": rep.axis,
                    "hypothesis_holds": rep.hypothesis_holds,
                    "conclusion_holds": rep.conclusion_holds,
                    "consistent": rep.consistent(),
                }),
                rep.consistent(),
            ))
        }
        PropsCommand::Dilate { primes, a, b, k } => {
            let m = optional_modulus(&primes)?;
            let a = load_set(&a, m)?;
            let b = load_set(&b, m)?;
            same_modulus(&a, &b)?;
            let holds = dilate_check(&a, &b, k)?;
            Ok(Report::new(json!({ "k": k, "factorization": holds }), holds))
        }
    }
}
