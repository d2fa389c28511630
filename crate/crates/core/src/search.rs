//! Complement search by exact cover, the theorem check built on it, and a
//! generator of random certified instances.

use std::ops::ControlFlow;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use num_integer::Integer;

use crate::divsets::{div_set, is_factorization_brute, is_factorization_sands};
use crate::error::{Error, Result};
use crate::modulus::{Axis, ModulusContext};
use crate::set::ZmSet;
use crate::szabo::{
    build_a, build_b, random_hsets, recover_uvw, verify_szabo_pair, ComplementPlan,
    SumsetFactors, SzaboWitness,
};

/// Environment variable capping the number of search workers.
pub const THREADS_ENV: &str = "CYCLOTILE_THREADS";

#[derive(Debug, Clone, Default)]
pub struct SearchOptions {
    pub max_solutions: Option<usize>,
    pub time_budget: Option<Duration>,
    /// Drop complements lying in a proper subgroup; they do not count
    /// towards `max_solutions`.
    pub require_not_subgroup: bool,
    /// Permutes the order in which branches are tried.
    pub seed: u64,
    /// Single-threaded, so the emitted order is reproducible.
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchOutcome {
    pub solutions: Vec<ZmSet>,
    /// Every complement was enumerated.
    pub complete: bool,
    /// The time budget ran out first.
    pub budget_exceeded: bool,
}

impl SearchOutcome {
    /// The solutions, or `BudgetExceeded` if the budget cut the search short.
    pub fn into_result(self) -> Result<Vec<ZmSet>> {
        if self.budget_exceeded {
            Err(Error::BudgetExceeded {
                found: self.solutions.len(),
            })
        } else {
            Ok(self.solutions)
        }
    }
}

struct Control<'a> {
    deadline: Option<Instant>,
    max: Option<usize>,
    require_not_subgroup: bool,
    found: AtomicUsize,
    stop: AtomicBool,
    timed_out: AtomicBool,
    sink: &'a (dyn Fn(ZmSet) -> ControlFlow<()> + Sync),
}

impl Control<'_> {
    fn out_of_time(&self) -> bool {
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.timed_out.store(true, Ordering::Relaxed);
            self.stop.store(true, Ordering::Relaxed);
            true
        } else {
            false
        }
    }

    fn emit(&self, m: u64, chosen: &[usize], a: &ZmSet) {
        let b = ZmSet::new(m, chosen.iter().map(|&x| x as u64)).expect("residues are in range");
        debug_assert!(is_factorization_brute(a, &b));
        debug_assert!(is_factorization_sands(a, &b));
        if self.require_not_subgroup && !b.generates() {
            return;
        }
        let index = self.found.fetch_add(1, Ordering::SeqCst);
        match self.max {
            Some(max) if index >= max => {
                self.stop.store(true, Ordering::Relaxed);
            }
            Some(max) => {
                if (self.sink)(b).is_break() || index + 1 >= max {
                    self.stop.store(true, Ordering::Relaxed);
                }
            }
            None => {
                if (self.sink)(b).is_break() {
                    self.stop.store(true, Ordering::Relaxed);
                }
            }
        }
    }
}

type Bits = Vec<u64>;

fn bit(words: &[u64], i: usize) -> bool {
    words[i >> 6] >> (i & 63) & 1 == 1
}

fn set_bit(words: &mut [u64], i: usize) {
    words[i >> 6] |= 1 << (i & 63);
}

fn flip(words: &mut [u64], i: usize) {
    words[i >> 6] ^= 1 << (i & 63);
}

fn ones(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(w, &word)| {
        let mut rest = word;
        std::iter::from_fn(move || {
            (rest != 0).then(|| {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                w * 64 + i
            })
        })
    })
}

/// Shared, read-only description of the exact-cover problem.
struct Problem<'a> {
    m: usize,
    /// `A` in branch order.
    order: Vec<usize>,
    target: usize,
    /// `allowed[d]`: a difference `d` between two elements of `B` is compatible
    /// with `Div(A)`, i.e. `gcd(d, M)` is not a nonzero difference divisor of `A`.
    allowed: Vec<bool>,
    a: &'a ZmSet,
}

impl Problem<'_> {
    fn toggle(&self, cover: &mut [u64], b: usize) {
        for &x in &self.order {
            let s = b + x;
            flip(cover, if s >= self.m { s - self.m } else { s });
        }
    }

    /// Candidates still compatible with every chosen element and with `b`.
    fn restrict(&self, cands: &[u64], b: usize) -> Bits {
        let mut out = vec![0u64; cands.len()];
        for y in ones(cands) {
            let d = if y >= b { y - b } else { y + self.m - b };
            if self.allowed[d] {
                set_bit(&mut out, y);
            }
        }
        out
    }

    /// Picks the uncovered residue with the fewest ways to be covered and
    /// lists them. `None` marks a dead end.
    fn branch(&self, cover: &[u64], cands: &[u64], remaining: usize) -> Option<Vec<usize>> {
        let available: usize = cands.iter().map(|w| w.count_ones() as usize).sum();
        if available < remaining {
            return None;
        }
        let mut best: Option<(usize, usize)> = None;
        for g in 0..self.m {
            if bit(cover, g) {
                continue;
            }
            let mut count = 0;
            for &x in &self.order {
                let b = if g >= x { g - x } else { g + self.m - x };
                if bit(cands, b) {
                    count += 1;
                }
            }
            if count == 0 {
                return None;
            }
            if best.is_none_or(|(_, c)| count < c) {
                best = Some((g, count));
                if count == 1 {
                    break;
                }
            }
        }
        let (g, _) = best?;
        Some(
            self.order
                .iter()
                .map(|&x| if g >= x { g - x } else { g + self.m - x })
                .filter(|&b| bit(cands, b))
                .collect(),
        )
    }
}

struct Frame {
    cands: Bits,
    branches: Vec<usize>,
    next: usize,
}

/// Depth-first exact cover from a partial state. Every residue must be
/// `a + b` for exactly one chosen `b`; the residue with the fewest options is
/// covered next. Candidates are kept pairwise compatible with `Div(A)`, which
/// also keeps the translates `A + b` disjoint.
fn explore(p: &Problem<'_>, mut cover: Bits, mut chosen: Vec<usize>, cands: Bits, ctl: &Control<'_>) {
    if chosen.len() == p.target {
        ctl.emit(p.m as u64, &chosen, p.a);
        return;
    }
    let Some(branches) = p.branch(&cover, &cands, p.target - chosen.len()) else {
        return;
    };
    let depth0 = chosen.len();
    let mut stack = vec![Frame {
        cands,
        branches,
        next: 0,
    }];
    let mut nodes = 0u32;
    while let Some(frame) = stack.last_mut() {
        nodes = nodes.wrapping_add(1);
        if nodes.is_multiple_of(1024) && (ctl.stop.load(Ordering::Relaxed) || ctl.out_of_time()) {
            return;
        }
        if frame.next == frame.branches.len() {
            stack.pop();
            if chosen.len() > depth0 {
                let b = chosen.pop().expect("inner frames record a choice");
                p.toggle(&mut cover, b);
            }
            continue;
        }
        let b = frame.branches[frame.next];
        frame.next += 1;
        let child = p.restrict(&frame.cands, b);
        p.toggle(&mut cover, b);
        chosen.push(b);
        if chosen.len() == p.target {
            ctl.emit(p.m as u64, &chosen, p.a);
            chosen.pop();
            p.toggle(&mut cover, b);
            if ctl.stop.load(Ordering::Relaxed) {
                return;
            }
            continue;
        }
        match p.branch(&cover, &child, p.target - chosen.len()) {
            Some(branches) => stack.push(Frame {
                cands: child,
                branches,
                next: 0,
            }),
            None => {
                chosen.pop();
                p.toggle(&mut cover, b);
            }
        }
    }
}

fn worker_count() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Streams every `B ∋ 0` with `A ⊕ B = Z_M` to `sink`, within the option
/// bounds; the sink may end the search early by returning `Break`. Returns
/// `(complete, budget_exceeded)`.
pub fn complement_search_with(
    a: &ZmSet,
    opts: &SearchOptions,
    sink: &(dyn Fn(ZmSet) -> ControlFlow<()> + Sync),
) -> Result<(bool, bool)> {
    let m = a.modulus();
    if !a.contains(0) {
        return Err(Error::PreconditionViolated("0 must belong to A".into()));
    }
    if !m.is_multiple_of(a.len() as u64) {
        return Err(Error::PreconditionViolated(format!(
            "|A| = {} does not divide {m}",
            a.len()
        )));
    }
    let ctl = Control {
        deadline: opts.time_budget.map(|t| Instant::now() + t),
        max: opts.max_solutions,
        require_not_subgroup: opts.require_not_subgroup,
        found: AtomicUsize::new(0),
        stop: AtomicBool::new(opts.max_solutions == Some(0)),
        timed_out: AtomicBool::new(false),
        sink,
    };
    let finish = |ctl: &Control<'_>| {
        let timed_out = ctl.timed_out.load(Ordering::Relaxed);
        let stopped = ctl.stop.load(Ordering::Relaxed);
        Ok((!stopped && !timed_out, timed_out))
    };
    if ctl.stop.load(Ordering::Relaxed) || ctl.out_of_time() {
        return finish(&ctl);
    }

    let mut order: Vec<usize> = a.iter().map(|x| x as usize).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(opts.seed));
    let mu = m as usize;
    let div_a = div_set(a)?;
    let allowed: Vec<bool> = (0..m)
        .map(|d| d != 0 && !div_a.contains(d.gcd(&m)))
        .collect();
    let problem = Problem {
        m: mu,
        order,
        target: mu / a.len(),
        allowed,
        a,
    };
    let mut cover = vec![0u64; mu.div_ceil(64)];
    problem.toggle(&mut cover, 0);
    let mut cands = vec![0u64; mu.div_ceil(64)];
    for y in (0..mu).filter(|&y| problem.allowed[y]) {
        set_bit(&mut cands, y);
    }
    if problem.target == 1 {
        explore(&problem, cover, vec![0], cands, &ctl);
        return finish(&ctl);
    }
    let Some(branches) = problem.branch(&cover, &cands, problem.target - 1) else {
        return finish(&ctl);
    };
    let run_branch = |b: usize| {
        if ctl.stop.load(Ordering::Relaxed) {
            return;
        }
        let mut cover = cover.clone();
        problem.toggle(&mut cover, b);
        let child = problem.restrict(&cands, b);
        explore(&problem, cover, vec![0, b], child, &ctl);
    };
    if opts.stable {
        branches.into_iter().for_each(run_branch);
    } else {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = worker_count() {
            builder = builder.num_threads(n);
        }
        match builder.build() {
            Ok(pool) => pool.install(|| branches.into_par_iter().for_each(run_branch)),
            Err(_) => branches.into_iter().for_each(run_branch),
        }
    }
    finish(&ctl)
}

/// Collects the complements found by [`complement_search_with`]. With
/// `stable` unset the order depends on thread scheduling.
pub fn complement_search(a: &ZmSet, opts: &SearchOptions) -> Result<SearchOutcome> {
    let found = Mutex::new(Vec::new());
    let (complete, budget_exceeded) = complement_search_with(a, opts, &|b| {
        found.lock().expect("sink poisoned").push(b);
        ControlFlow::Continue(())
    })?;
    Ok(SearchOutcome {
        solutions: found.into_inner().expect("sink poisoned"),
        complete,
        budget_exceeded,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TheoremReport {
    pub instances_checked: usize,
    pub szabo_confirmed: usize,
    pub subgroup_excluded: usize,
    /// Generating complements certified in neither order.
    pub violations: Vec<(ZmSet, ZmSet)>,
    /// The search enumerated every complement.
    pub complete: bool,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Every complement found for the tile `A` either lies in a proper subgroup
/// or forms a certified pair with `A` in one order or the other.
pub fn verify_theorem(
    a: &ZmSet,
    opts: &SearchOptions,
    ctx: &ModulusContext,
) -> Result<TheoremReport> {
    recover_uvw(a, ctx)?;
    let outcome = complement_search(a, opts)?;
    let mut report = TheoremReport {
        instances_checked: 0,
        szabo_confirmed: 0,
        subgroup_excluded: 0,
        violations: Vec::new(),
        complete: outcome.complete,
    };
    for b in outcome.solutions {
        report.instances_checked += 1;
        if !b.generates() {
            report.subgroup_excluded += 1;
        } else if verify_szabo_pair(a, &b, ctx).is_some() || verify_szabo_pair(&b, a, ctx).is_some()
        {
            report.szabo_confirmed += 1;
        } else {
            report.violations.push((a.clone(), b));
        }
    }
    if outcome.budget_exceeded {
        log::warn!(
            "budget exhausted after {} complements, {} violations",
            report.instances_checked,
            report.violations.len()
        );
        return Err(Error::BudgetExceeded {
            found: report.instances_checked,
        });
    }
    Ok(report)
}

/// A generated pair together with the data it was built from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RandomInstance {
    pub a: ZmSet,
    pub b: ZmSet,
    pub witness: SzaboWitness,
    pub factors: SumsetFactors,
    pub plan: ComplementPlan,
}

const MAX_ATTEMPTS: usize = 1000;

fn random_factors<R: Rng>(rng: &mut R, ctx: &ModulusContext) -> SumsetFactors {
    let mut pick = |axis: Axis| -> Vec<i64> {
        let a = ctx.prime(axis);
        (0..a)
            .map(|i| if i == 0 { 0 } else { (i + a * rng.gen_range(0..a)) as i64 })
            .collect()
    };
    let (u, v, w) = (pick(Axis::P), pick(Axis::Q), pick(Axis::R));
    SumsetFactors::from_lists(ctx, &u, &v, &w)
}

/// A random certified pair, reproducible from `seed`. Every output is
/// re-checked by the coverage oracle and the certificate verifier.
pub fn random_instance(seed: u64, ctx: &ModulusContext) -> Result<RandomInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors = random_factors(&mut rng, ctx);
    let a = build_a(&factors, ctx)?;
    for _ in 0..MAX_ATTEMPTS {
        let Some(plan) = random_hsets(&mut rng, ctx) else {
            continue;
        };
        let b = build_b(&plan, ctx)?;
        if !is_factorization_brute(&a, &b) {
            return Err(Error::InternalContradiction(
                "generated pair does not factor Z_M".into(),
            ));
        }
        let witness = verify_szabo_pair(&a, &b, ctx).ok_or_else(|| {
            Error::InternalContradiction("generated pair has no certificate".into())
        })?;
        return Ok(RandomInstance {
            a,
            b,
            witness,
            factors,
            plan,
        });
    }
    Err(Error::GenerationFailed(MAX_ATTEMPTS))
}
