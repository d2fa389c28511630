//! Szabó pairs: the sumset tile `A`, the four-part complement `B`, and the
//! certificate tying them together.
//!
//! A pair `(A, B)` in `Z_M`, `M = (pqr)^2`, with `0 ∈ A` and `|A| = |B| = pqr`
//! qualifies when, after replacing `B` by `B - b` for some `b ∈ B`:
//!
//! 1. `A = q²r²U + r²p²V + p²q²W` with `U`, `V`, `W` each holding exactly one
//!    element per residue class mod `p`, `q`, `r` and containing `0`;
//! 2. `B` splits into nonempty parts `B_qr`, `B_rp`, `B_pq` (multiples of the
//!    partner product, not of `pqr`) plus `B_pqr = B ∩ pqrZ`;
//! 3. every nonzero residue class of `B_qr` mod `p` is `pq²r²`-periodic, and
//!    cyclically for the other two parts;
//! 4. shifting class `i` of `B_qr` back by `τ_p(i) q²r²` (cyclically for the
//!    others) and adding `B_pqr` gives exactly `pqr·{0, …, pqr − 1}`.

mod construct;
mod forms;
mod lemmas;

pub use construct::{build_b, random_hsets, ComplementPlan};
pub use forms::{classify_b_form, check_part_periodicity, match_form, BForm, FormReport, PartPeriodicityReport};
pub use lemmas::{
    check_div_structure, check_prop210, eligible_swap_orbits, swap_periodic, DivStructureReport,
    Prop210Report,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::modulus::{mod_inverse, Axis, ModulusContext};
use crate::set::ZmSet;

/// `τ_a(ℓ)`: the unique `τ ∈ [0, a)` with `τ · b²c² ≡ ℓ (mod a)`, where `b²c²`
/// is the cofactor square of the axis.
pub fn tau(axis: Axis, l: u64, ctx: &ModulusContext) -> u64 {
    let a = ctx.prime(axis);
    let inv = mod_inverse(ctx.cofactor_square(axis) % a, a)
        .expect("distinct primes make the cofactor a unit");
    (l % a) * inv % a
}

/// `τ_a(0), …, τ_a(a − 1)`.
pub fn tau_table(axis: Axis, ctx: &ModulusContext) -> Vec<u64> {
    (0..ctx.prime(axis)).map(|l| tau(axis, l, ctx)).collect()
}

/// The index sets `U ⊂ Z_{p²}`, `V ⊂ Z_{q²}`, `W ⊂ Z_{r²}` of a sumset tile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct SumsetFactors {
    pub u: ZmSet,
    pub v: ZmSet,
    pub w: ZmSet,
}

impl SumsetFactors {
    pub fn get(&self, axis: Axis) -> &ZmSet {
        match axis {
            Axis::P => &self.u,
            Axis::Q => &self.v,
            Axis::R => &self.w,
        }
    }

    /// Builds the factors from integer representatives, reducing each index
    /// set modulo the square of its prime.
    pub fn from_lists(ctx: &ModulusContext, u: &[i64], v: &[i64], w: &[i64]) -> SumsetFactors {
        SumsetFactors {
            u: ZmSet::from_residues(ctx.square(Axis::P), u.iter().copied()),
            v: ZmSet::from_residues(ctx.square(Axis::Q), v.iter().copied()),
            w: ZmSet::from_residues(ctx.square(Axis::R), w.iter().copied()),
        }
    }
}

fn check_index_set(set: &ZmSet, axis: Axis, ctx: &ModulusContext) -> Result<()> {
    let a = ctx.prime(axis);
    if set.modulus() != ctx.square(axis) {
        return Err(Error::ModulusMismatch {
            expected: ctx.square(axis),
            found: set.modulus(),
        });
    }
    if set.len() != a as usize {
        return Err(Error::WrongCardinality {
            expected: a as usize,
            found: set.len(),
        });
    }
    let mut seen = vec![false; a as usize];
    for x in set.iter() {
        let class = (x % a) as usize;
        if seen[class] {
            return Err(Error::BadIndexResidues {
                modulus: set.modulus(),
                detail: format!("two elements in class {class} mod {a}"),
            });
        }
        seen[class] = true;
    }
    if !set.contains(0) {
        return Err(Error::BadIndexResidues {
            modulus: set.modulus(),
            detail: "the class-0 representative must be 0".into(),
        });
    }
    Ok(())
}

/// `A = q²r²U + r²p²V + p²q²W mod M`.
pub fn build_a(factors: &SumsetFactors, ctx: &ModulusContext) -> Result<ZmSet> {
    for axis in Axis::ALL {
        check_index_set(factors.get(axis), axis, ctx)?;
    }
    let m = ctx.modulus();
    let mut out = Vec::with_capacity(ctx.pqr() as usize);
    for u in factors.u.iter() {
        let xu = u * ctx.q2r2() % m;
        for v in factors.v.iter() {
            let xv = (xu + v * ctx.r2p2()) % m;
            for w in factors.w.iter() {
                out.push((xv + w * ctx.p2q2()) % m);
            }
        }
    }
    let expected = out.len();
    let a = ZmSet::new(m, out)?;
    if a.len() != expected {
        return Err(Error::InternalContradiction(
            "sumset elements collided".into(),
        ));
    }
    Ok(a)
}

/// Reads `U`, `V`, `W` off the residues of `A` mod `p²`, `q²`, `r²` and
/// confirms by rebuilding. Requires `0 ∈ A`; any translate of a sumset tile
/// that keeps `0` is again a sumset tile, so no renormalization is needed.
pub fn recover_uvw(a: &ZmSet, ctx: &ModulusContext) -> Result<SumsetFactors> {
    if a.modulus() != ctx.modulus() || !a.contains(0) {
        return Err(Error::NotSumsetForm);
    }
    let project = |axis: Axis| {
        let sq = ctx.square(axis);
        let inv = mod_inverse(ctx.cofactor_square(axis) % sq, sq)
            .expect("distinct primes make the cofactor a unit");
        ZmSet::from_residues(sq, a.iter().map(|x| ((x % sq) * inv % sq) as i64))
    };
    let factors = SumsetFactors {
        u: project(Axis::P),
        v: project(Axis::Q),
        w: project(Axis::R),
    };
    match build_a(&factors, ctx) {
        Ok(rebuilt) if rebuilt == *a => Ok(factors),
        _ => Err(Error::NotSumsetForm),
    }
}

/// The four parts of a set lying in `qrZ ∪ rpZ ∪ pqZ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BDecomposition {
    pub source: ZmSet,
    /// `B_qr`, `B_rp`, `B_pq` in axis order.
    pub parts: [ZmSet; 3],
    pub pqr_part: ZmSet,
}

impl BDecomposition {
    /// The part whose classes are indexed modulo the axis prime: `B_qr` for `p`.
    pub fn part(&self, axis: Axis) -> &ZmSet {
        &self.parts[axis.index()]
    }

    /// Every part, including `B_pqr`, is nonempty.
    pub fn all_nonempty(&self) -> bool {
        self.parts.iter().all(|p| !p.is_empty()) && !self.pqr_part.is_empty()
    }
}

/// Splits `B` by divisibility; `None` when some element lies outside
/// `qrZ ∪ rpZ ∪ pqZ`.
pub fn decompose_b(b: &ZmSet, ctx: &ModulusContext) -> Option<BDecomposition> {
    if b.modulus() != ctx.modulus() {
        return None;
    }
    let pqr = ctx.pqr();
    let mut parts: [Vec<u64>; 3] = Default::default();
    let mut pqr_part = Vec::new();
    for x in b.iter() {
        if x % pqr == 0 {
            pqr_part.push(x);
            continue;
        }
        let axis = Axis::ALL
            .into_iter()
            .find(|&ax| x % ctx.partner_product(ax) == 0)?;
        parts[axis.index()].push(x);
    }
    let m = ctx.modulus();
    Some(BDecomposition {
        source: b.clone(),
        parts: parts.map(|v| ZmSet::from_sorted_unchecked(m, v)),
        pqr_part: ZmSet::from_sorted_unchecked(m, pqr_part),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionIiiReport {
    /// `(axis, class)` pairs whose class is not periodic.
    pub failures: Vec<(Axis, u64)>,
}

impl ConditionIiiReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Each nonzero class of the axis part, taken modulo the axis prime, must be
/// periodic under `a b² c²`.
pub fn check_condition_iii(d: &BDecomposition, ctx: &ModulusContext) -> ConditionIiiReport {
    let mut failures = Vec::new();
    for axis in Axis::ALL {
        let a = ctx.prime(axis);
        let period = ctx.period(axis);
        for i in 1..a {
            if !d.part(axis).residue_class(a, i).is_periodic(period) {
                failures.push((axis, i));
            }
        }
    }
    ConditionIiiReport { failures }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionIvReport {
    /// The hatted parts in axis order.
    pub hatted: [ZmSet; 3],
    /// Hatted parts together with `B_pqr`.
    pub union: ZmSet,
    /// Multiples of `pqr` not reached.
    pub missing: Vec<u64>,
    /// Residues hit by more than one piece, or landing outside `pqrZ`.
    pub stray: Vec<u64>,
}

impl ConditionIvReport {
    pub fn passed(&self) -> bool {
        self.missing.is_empty() && self.stray.is_empty()
    }
}

/// Hatted part for one axis: class `i` shifted back by `τ_a(i) b²c²`.
pub fn hatted_part(d: &BDecomposition, axis: Axis, ctx: &ModulusContext) -> ZmSet {
    let a = ctx.prime(axis);
    let m = ctx.modulus();
    let unit = ctx.cofactor_square(axis);
    ZmSet::from_residues(
        m,
        d.part(axis).iter().map(|x| {
            let shift = tau(axis, x % a, ctx) * unit % m;
            ((x + m - shift) % m) as i64
        }),
    )
}

pub fn check_condition_iv(d: &BDecomposition, ctx: &ModulusContext) -> ConditionIvReport {
    let m = ctx.modulus();
    let pqr = ctx.pqr();
    let mut hits = vec![0u32; pqr as usize];
    let mut stray = Vec::new();
    let mut place = |x: u64| {
        if x.is_multiple_of(pqr) {
            hits[(x / pqr) as usize] += 1;
        } else {
            stray.push(x);
        }
    };
    for axis in Axis::ALL {
        let a = ctx.prime(axis);
        let unit = ctx.cofactor_square(axis);
        for x in d.part(axis).iter() {
            place((x + m - tau(axis, x % a, ctx) * unit % m) % m);
        }
    }
    d.pqr_part.iter().for_each(&mut place);
    let mut missing = Vec::new();
    for (k, &h) in hits.iter().enumerate() {
        let x = k as u64 * pqr;
        match h {
            0 => missing.push(x),
            1 => {}
            _ => stray.push(x),
        }
    }
    stray.sort_unstable();
    let hatted = Axis::ALL.map(|a| hatted_part(d, a, ctx));
    let union = hatted
        .iter()
        .fold(d.pqr_part.clone(), |acc, p| acc.union(p));
    ConditionIvReport {
        hatted,
        union,
        missing,
        stray,
    }
}

/// A complete, self-contained certificate that `(A, B)` is a Szabó pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SzaboWitness {
    pub offset: u64,
    pub factors: SumsetFactors,
    pub decomposition: BDecomposition,
    /// `τ_p`, `τ_q`, `τ_r` tables.
    pub tau: [Vec<u64>; 3],
    pub hatted: [ZmSet; 3],
    pub hatted_union: ZmSet,
}

impl SzaboWitness {
    /// Re-checks every condition from the stored fields against `(A, B)`.
    pub fn check(&self, a: &ZmSet, b: &ZmSet, ctx: &ModulusContext) -> bool {
        let Ok(rebuilt) = build_a(&self.factors, ctx) else {
            return false;
        };
        if rebuilt != *a || !b.contains(self.offset) {
            return false;
        }
        let shifted = b.translate(self.offset);
        let Some(d) = decompose_b(&shifted, ctx) else {
            return false;
        };
        if d != self.decomposition || !d.all_nonempty() {
            return false;
        }
        if self.tau != Axis::ALL.map(|ax| tau_table(ax, ctx)) {
            return false;
        }
        for (axis, table) in Axis::ALL.iter().zip(&self.tau) {
            let a_prime = ctx.prime(*axis);
            let unit = ctx.cofactor_square(*axis) % a_prime;
            if table.iter().enumerate().any(|(l, &t)| t * unit % a_prime != l as u64) {
                return false;
            }
        }
        let iv = check_condition_iv(&d, ctx);
        check_condition_iii(&d, ctx).passed()
            && iv.passed()
            && iv.hatted == self.hatted
            && self.hatted_union == ZmSet::progression(ctx.modulus(), ctx.pqr(), ctx.pqr())
            && iv.union == self.hatted_union
    }
}

fn witness_at(
    b: &ZmSet,
    offset: u64,
    factors: &SumsetFactors,
    ctx: &ModulusContext,
) -> Option<SzaboWitness> {
    let d = decompose_b(&b.translate(offset), ctx)?;
    if !d.all_nonempty() || !check_condition_iii(&d, ctx).passed() {
        return None;
    }
    let iv = check_condition_iv(&d, ctx);
    if !iv.passed() {
        return None;
    }
    Some(SzaboWitness {
        offset,
        factors: factors.clone(),
        decomposition: d,
        tau: Axis::ALL.map(|ax| tau_table(ax, ctx)),
        hatted: iv.hatted,
        hatted_union: iv.union,
    })
}

/// Searches the translates `B - b`, `b ∈ B` ascending, for one satisfying the
/// `B`-side conditions, after confirming `A` is a sumset tile. Inputs of the
/// wrong shape simply yield `None`.
pub fn verify_szabo_pair(a: &ZmSet, b: &ZmSet, ctx: &ModulusContext) -> Option<SzaboWitness> {
    let n = ctx.pqr() as usize;
    if a.modulus() != ctx.modulus() || b.modulus() != ctx.modulus() {
        return None;
    }
    if a.len() != n || b.len() != n || !a.contains(0) {
        return None;
    }
    let factors = recover_uvw(a, ctx).ok()?;
    b.iter().find_map(|offset| witness_at(b, offset, &factors, ctx))
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn ctx() -> ModulusContext {
        ModulusContext::new(2, 3, 5).unwrap()
    }

    pub fn canon_factors() -> SumsetFactors {
        SumsetFactors::from_lists(&ctx(), &[0, 1], &[0, 1, 2], &[0, 1, 2, 3, 4])
    }

    pub fn canon_a() -> ZmSet {
        build_a(&canon_factors(), &ctx()).unwrap()
    }

    pub fn canon_plan() -> ComplementPlan {
        ComplementPlan::uniform([vec![1, 16], vec![2, 12, 22], vec![3, 9, 15, 21, 27]])
    }

    pub fn canon_b() -> ZmSet {
        build_b(&canon_plan(), &ctx()).unwrap()
    }
}
