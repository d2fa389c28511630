//! Acceptance criteria. Runs as a plain binary so each criterion prints one
//! PASS/FAIL line; the process fails if any criterion does.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cyclotile::cyclotomic::{average_property_check, cyclotomic_poly, phi_power_identity_check, IntPoly};
use cyclotile::divsets::{dilate_check, is_factorization_brute, is_factorization_sands};
use cyclotile::search::{complement_search, random_instance, verify_theorem, RandomInstance, SearchOptions};
use cyclotile::szabo::{
    build_a, build_b, check_prop210, eligible_swap_orbits, swap_periodic, verify_szabo_pair,
    ComplementPlan, SumsetFactors,
};
use cyclotile::{Axis, Error, ModulusContext, ZmSet};

const TRIPLES: [(u64, u64, u64); 4] = [(2, 3, 5), (2, 3, 7), (2, 5, 7), (3, 5, 7)];
const SEEDS: std::ops::RangeInclusive<u64> = 1..=100;
const SEARCH_BUDGET: Duration = Duration::from_secs(600);
const INSTANCE_BUDGET: Duration = Duration::from_secs(300);
const CANONICAL_BUDGET: Duration = Duration::from_secs(1);
const SLICE_SAMPLES: usize = 100_000;
/// Above this many `(A, B)` pairs a size class is sampled instead of exhausted.
const EXHAUSTIVE_PAIR_LIMIT: u64 = 2_000_000;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn canonical() -> (ModulusContext, ZmSet, ZmSet) {
    let ctx = ModulusContext::new(2, 3, 5).unwrap();
    let a = build_a(
        &SumsetFactors::from_lists(&ctx, &[0, 1], &[0, 1, 2], &[0, 1, 2, 3, 4]),
        &ctx,
    )
    .unwrap();
    let plan = ComplementPlan::uniform([vec![1, 16], vec![2, 12, 22], vec![3, 9, 15, 21, 27]]);
    let b = build_b(&plan, &ctx).unwrap();
    (ctx, a, b)
}

fn criterion1() -> Outcome {
    let start = Instant::now();
    let (ctx, a, b) = canonical();
    let brute = is_factorization_brute(&a, &b);
    let sands = is_factorization_sands(&a, &b);
    let witness = verify_szabo_pair(&a, &b, &ctx);
    let elapsed = start.elapsed();
    let offset = witness.as_ref().map(|w| w.offset);
    let certified = witness.is_some_and(|w| w.check(&a, &b, &ctx));
    check(
        brute && sands && b.generates() && offset == Some(0) && certified && elapsed < CANONICAL_BUDGET,
        format!(
            "brute={brute} sands={sands} B generates={} witness offset={offset:?} in {elapsed:?}",
            b.generates()
        ),
    )
}

fn subsets_with_zero(m: u64, k: usize, out: &mut Vec<ZmSet>) {
    fn go(m: u64, k: usize, next: u64, cur: &mut Vec<u64>, out: &mut Vec<ZmSet>) {
        if cur.len() == k {
            out.push(ZmSet::new(m, cur.iter().copied()).unwrap());
            return;
        }
        let need = (k - cur.len()) as u64;
        for x in next..=m - need {
            cur.push(x);
            go(m, k, x + 1, cur, out);
            cur.pop();
        }
    }
    go(m, k, 1, &mut vec![0], out);
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn random_with_zero<R: Rng>(rng: &mut R, m: u64, k: usize) -> ZmSet {
    let mut rest: Vec<u64> = (1..m).collect();
    rest.shuffle(rng);
    ZmSet::new(m, std::iter::once(0).chain(rest.into_iter().take(k - 1))).unwrap()
}

fn criterion2() -> Outcome {
    let mut pairs = 0u64;
    let mut factorizations = 0u64;
    let mut disagreements = 0u64;
    let mut sampled_classes = Vec::new();
    let mut compare = |a: &ZmSet, b: &ZmSet| {
        pairs += 1;
        let brute = is_factorization_brute(a, b);
        factorizations += brute as u64;
        disagreements += (brute != is_factorization_sands(a, b)) as u64;
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for m in [12u64, 36] {
        let mut sampled_sizes = Vec::new();
        for k in 1..=4usize {
            if m % k as u64 != 0 {
                continue;
            }
            let kb = (m / k as u64) as usize;
            let count = binomial(m - 1, k as u64 - 1).saturating_mul(binomial(m - 1, kb as u64 - 1));
            if count > EXHAUSTIVE_PAIR_LIMIT {
                sampled_sizes.push(k);
                continue;
            }
            let (mut sa, mut sb) = (Vec::new(), Vec::new());
            subsets_with_zero(m, k, &mut sa);
            subsets_with_zero(m, kb, &mut sb);
            for a in &sa {
                for b in &sb {
                    compare(a, b);
                }
            }
        }
        if sampled_sizes.is_empty() {
            continue;
        }
        sampled_classes.push(format!("Z_{m} |A| in {sampled_sizes:?}"));
        // A third uniform, a third genuine complements, a third genuine
        // complements with one element moved.
        for i in 0..SLICE_SAMPLES {
            let k = *sampled_sizes.choose(&mut rng).unwrap();
            let kb = (m / k as u64) as usize;
            let a = random_with_zero(&mut rng, m, k);
            let b = match i % 3 {
                0 => random_with_zero(&mut rng, m, kb),
                _ => {
                    let opts = SearchOptions {
                        max_solutions: Some(1),
                        seed: rng.gen(),
                        stable: true,
                        ..Default::default()
                    };
                    match complement_search(&a, &opts).unwrap().solutions.pop() {
                        Some(b) if i % 3 == 1 => b,
                        Some(b) if kb > 1 => {
                            let drop = b.elements()[rng.gen_range(1..kb)];
                            let outside: Vec<u64> = (1..m).filter(|&x| !b.contains(x)).collect();
                            let add = *outside.choose(&mut rng).unwrap();
                            b.difference(&ZmSet::new(m, [drop]).unwrap())
                                .union(&ZmSet::new(m, [add]).unwrap())
                        }
                        _ => random_with_zero(&mut rng, m, kb),
                    }
                }
            };
            compare(&a, &b);
        }
    }
    check(
        disagreements == 0 && factorizations > 0,
        format!(
            "{pairs} pairs, {factorizations} factorizations, {disagreements} disagreements; sampled: {}",
            sampled_classes.join(", ")
        ),
    )
}

fn canonical_search_options() -> SearchOptions {
    SearchOptions {
        max_solutions: Some(50),
        time_budget: Some(SEARCH_BUDGET),
        require_not_subgroup: true,
        seed: 0,
        stable: true,
    }
}

fn criterion3() -> Outcome {
    let (ctx, a, _) = canonical();
    let start = Instant::now();
    match verify_theorem(&a, &canonical_search_options(), &ctx) {
        Ok(rep) => check(
            rep.violations.is_empty() && rep.instances_checked == 50,
            format!(
                "{} complements, {} certified, {} in subgroups, {} violations in {:?}",
                rep.instances_checked,
                rep.szabo_confirmed,
                rep.subgroup_excluded,
                rep.violations.len(),
                start.elapsed()
            ),
        ),
        Err(e) => Err(e.to_string()),
    }
}

fn criterion4(instances: &[(ModulusContext, RandomInstance)], elapsed: Duration) -> Outcome {
    let mut failures = 0;
    for (ctx, inst) in instances {
        let ok = is_factorization_brute(&inst.a, &inst.b)
            && inst.witness.check(&inst.a, &inst.b, ctx)
            && verify_szabo_pair(&inst.a, &inst.b, ctx).is_some()
            && inst.a.generates()
            && inst.b.generates();
        failures += (!ok) as usize;
    }
    let expected = TRIPLES.len() * SEEDS.count();
    check(
        failures == 0 && instances.len() == expected && elapsed < INSTANCE_BUDGET,
        format!("{} instances, {failures} failures in {elapsed:?}", instances.len()),
    )
}

fn product_of_divisor_cyclotomics(s: u64) -> IntPoly {
    (1..=s)
        .filter(|d| s.is_multiple_of(*d))
        .fold(IntPoly::one(), |acc, d| &acc * &*cyclotomic_poly(d).unwrap())
}

/// `Some(p)` when `s` is a power of the prime `p`.
fn prime_power_base(s: u64) -> Option<u64> {
    let p = (2..=s).find(|d| s.is_multiple_of(*d))?;
    let mut t = s;
    while t.is_multiple_of(p) {
        t /= p;
    }
    (t == 1).then_some(p)
}

fn criterion5() -> Outcome {
    let mut failures = Vec::new();
    for s in 1..=210u64 {
        if product_of_divisor_cyclotomics(s) != IntPoly::x_pow_minus_one(s as usize) {
            failures.push(format!("product s={s}"));
        }
        if s > 1 {
            let value = cyclotomic_poly(s).unwrap().eval_at_one();
            let expected = prime_power_base(s).unwrap_or(1);
            if value != expected.into() {
                failures.push(format!("value at 1, s={s}"));
            }
        }
    }
    let mut identities = 0;
    for n in 1..=60u64 {
        for p in [2u64, 3, 5, 7] {
            identities += 1;
            if !phi_power_identity_check(n, p).unwrap() {
                failures.push(format!("power identity n={n} p={p}"));
            }
        }
    }
    check(
        failures.is_empty(),
        format!(
            "s <= 210 products and values, {identities} power identities; failures: {failures:?}"
        ),
    )
}

fn criterion6(instances: &[(ModulusContext, RandomInstance)]) -> Outcome {
    let (mut checks, mut divisible, mut failures) = (0, 0, 0);
    for (ctx, inst) in instances {
        for axis in Axis::ALL {
            checks += 1;
            match average_property_check(&inst.a, &inst.b, axis, ctx) {
                Ok(rep) => {
                    divisible += rep.phi_l_divides_a as usize;
                    failures += (!rep.passed()) as usize;
                }
                Err(_) => failures += 1,
            }
        }
    }
    check(
        failures == 0,
        format!("{checks} checks ({divisible} with Phi_l | A), {failures} failures"),
    )
}

fn criterion7(instances: &[(ModulusContext, RandomInstance)]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut cases, mut failures, mut draws) = (0, 0, 0);
    let mut swapped_sizes = 0usize;
    while cases < 100 && draws < 10_000 {
        draws += 1;
        let (ctx, inst) = instances.choose(&mut rng).unwrap();
        let axis = *Axis::ALL.choose(&mut rng).unwrap();
        let orbits = eligible_swap_orbits(&inst.b, axis, ctx);
        if orbits.is_empty() {
            continue;
        }
        let take = rng.gen_range(1..=orbits.len());
        let d = orbits
            .choose_multiple(&mut rng, take)
            .fold(ZmSet::empty(ctx.modulus()), |acc, o| acc.union(o));
        cases += 1;
        swapped_sizes += d.len();
        match swap_periodic(&inst.a, &inst.b, &d, axis, ctx) {
            Ok(hat) if is_factorization_brute(&inst.a, &hat) => {}
            _ => failures += 1,
        }
    }
    check(
        failures == 0 && cases == 100,
        format!("{cases} swaps ({swapped_sizes} elements moved), {failures} failures"),
    )
}

fn criterion8(instances: &[(ModulusContext, RandomInstance)]) -> Outcome {
    let (ctx, a, _) = canonical();
    let found = complement_search(&a, &canonical_search_options())
        .map_err(|e| e.to_string())?
        .solutions;
    let mut pairs: Vec<(&ModulusContext, ZmSet, ZmSet)> =
        found.into_iter().map(|b| (&ctx, a.clone(), b)).collect();
    pairs.extend(instances.iter().map(|(c, i)| (c, i.a.clone(), i.b.clone())));
    let (mut evaluated, mut skipped, mut failures) = (0, 0, 0);
    for (ctx, a, b) in &pairs {
        match check_prop210(a, b, ctx) {
            Ok(rep) => {
                evaluated += 1;
                failures += (!rep.passed()) as usize;
            }
            Err(Error::PreconditionViolated(_)) => skipped += 1,
            Err(_) => failures += 1,
        }
    }
    check(
        failures == 0 && evaluated > 0,
        format!("{evaluated} pairs evaluated, {skipped} outside the hypotheses, {failures} failures"),
    )
}

fn criterion9(instances: &[(ModulusContext, RandomInstance)]) -> Outcome {
    let (mut checks, mut failures) = (0, 0);
    for (ctx, inst) in instances {
        for k in (1..=50u64).filter(|k| k.gcd(&ctx.pqr()) == 1) {
            checks += 1;
            if dilate_check(&inst.a, &inst.b, k) != Ok(true) {
                failures += 1;
            }
        }
    }
    check(failures == 0, format!("{checks} dilations, {failures} failures"))
}

fn main() -> ExitCode {
    let mut all_passed = true;
    let mut report = |n: u32, name: &str, outcome: Outcome| {
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                all_passed = false;
                ("FAIL", d)
            }
        };
        println!("criterion {n} [{tag}] {name}: {detail}");
    };

    report(1, "canonical pair", criterion1());
    report(2, "coverage table agrees with divisor criterion", criterion2());
    report(3, "found complements of the canonical tile are certified", criterion3());

    let start = Instant::now();
    let mut instances = Vec::new();
    let mut generation_errors = Vec::new();
    for (p, q, r) in TRIPLES {
        let ctx = ModulusContext::new(p, q, r).unwrap();
        for seed in SEEDS {
            match random_instance(seed, &ctx) {
                Ok(inst) => instances.push((ctx, inst)),
                Err(e) => generation_errors.push(format!("({p},{q},{r}) seed {seed}: {e}")),
            }
        }
    }
    let outcome = criterion4(&instances, start.elapsed());
    let outcome = if generation_errors.is_empty() {
        outcome
    } else {
        Err(format!("generation errors: {generation_errors:?}"))
    };
    report(4, "random constructed pairs verify", outcome);
    report(5, "cyclotomic identities", criterion5());
    report(6, "residue-class averages", criterion6(&instances));
    report(7, "periodic swaps preserve factorization", criterion7(&instances));
    report(8, "structural predicates", criterion8(&instances));
    report(9, "dilations preserve factorization", criterion9(&instances));

    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
