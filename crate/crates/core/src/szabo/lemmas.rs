use serde::Serialize;

use crate::cyclotomic::phi_divides;
use crate::divsets::{div_set, is_factorization_brute};
use crate::error::{Error, Result};
use crate::modulus::{Axis, ModulusContext};
use crate::set::ZmSet;
use crate::strata::{exact_part, stratify, Label};

fn same_modulus(sets: &[&ZmSet], ctx: &ModulusContext) -> Result<()> {
    for s in sets {
        if s.modulus() != ctx.modulus() {
            return Err(Error::ModulusMismatch {
                expected: ctx.modulus(),
                found: s.modulus(),
            });
        }
    }
    Ok(())
}

fn has_tile_divisors(a: &ZmSet, ctx: &ModulusContext) -> Result<bool> {
    Ok(div_set(a)?.to_vec() == ctx.tile_divisors())
}

/// Not inside any coset of a proper subgroup.
fn spans(e: &ZmSet) -> bool {
    e.elements()
        .first()
        .is_some_and(|&x0| e.translate(x0).generates())
}

/// `(B \ D) ∪ (D + b²c²)` where `D ⊆ B` is invariant under the axis period
/// `a b² c²`. For axis `r` the shift is `p²q²` and the period `rp²q²`.
pub fn swap_periodic(
    a: &ZmSet,
    b: &ZmSet,
    d: &ZmSet,
    axis: Axis,
    ctx: &ModulusContext,
) -> Result<ZmSet> {
    same_modulus(&[a, b, d], ctx)?;
    if !d.is_subset(b) {
        return Err(Error::PreconditionViolated("D is not a subset of B".into()));
    }
    let period = ctx.period(axis);
    if !d.is_periodic(period) {
        return Err(Error::PreconditionViolated(format!(
            "D is not invariant under +{period}"
        )));
    }
    if !has_tile_divisors(a, ctx)? {
        return Err(Error::PreconditionViolated(
            "Div(A) is not the tile division set".into(),
        ));
    }
    if !is_factorization_brute(a, b) {
        return Err(Error::PreconditionViolated("A ⊕ B != Z_M".into()));
    }
    Ok(b.difference(d).union(&d.shift(ctx.cofactor_square(axis))))
}

/// The minimal sets `D ⊆ B` accepted by [`swap_periodic`] for this axis: full
/// orbits of `B` under the axis period. Any union of them is also eligible.
pub fn eligible_swap_orbits(b: &ZmSet, axis: Axis, ctx: &ModulusContext) -> Vec<ZmSet> {
    let period = ctx.period(axis);
    let m = b.modulus();
    let size = m / period;
    let mut out = Vec::new();
    for x in b.iter().filter(|&x| x < period) {
        let orbit = ZmSet::progression(m, period, size).shift(x);
        if orbit.is_subset(b) {
            out.push(orbit);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Prop210Report {
    /// `Phi_p Phi_q Phi_r` divides the mask polynomial of `A`.
    pub cyclotomic: bool,
    /// `p, q, r ∈ Div(B)` and `p², q², r² ∉ Div(B)`.
    pub b_divisors: bool,
    /// `p²qr, p²q²r, p²qr² ∉ Div(A)`.
    pub a_divisors: bool,
}

impl Prop210Report {
    pub fn passed(&self) -> bool {
        self.cyclotomic && self.b_divisors && self.a_divisors
    }
}

/// Structural consequences of a factorization whose factors both generate
/// `Z_M` and where `1 ∉ Div(B)`.
pub fn check_prop210(a: &ZmSet, b: &ZmSet, ctx: &ModulusContext) -> Result<Prop210Report> {
    same_modulus(&[a, b], ctx)?;
    if !is_factorization_brute(a, b) {
        return Err(Error::PreconditionViolated("A ⊕ B != Z_M".into()));
    }
    let n = ctx.pqr() as usize;
    if a.len() != n || b.len() != n {
        return Err(Error::PreconditionViolated(format!("need |A| = |B| = {n}")));
    }
    if !spans(a) || !spans(b) {
        return Err(Error::PreconditionViolated(
            "a factor lies in a proper subgroup".into(),
        ));
    }
    let div_b = div_set(b)?;
    if div_b.contains(1) {
        return Err(Error::PreconditionViolated("1 ∈ Div(B)".into()));
    }
    let div_a = div_set(a)?;
    let mut cyclotomic = true;
    for axis in Axis::ALL {
        cyclotomic &= phi_divides(ctx.prime(axis), a)?;
    }
    let b_divisors = Axis::ALL.iter().all(|&ax| {
        div_b.contains(ctx.prime(ax)) && !div_b.contains(ctx.square(ax))
    });
    let a_divisors = ctx
        .forcing_divisors(Axis::P)
        .iter()
        .all(|&d| !div_a.contains(d));
    Ok(Prop210Report {
        cyclotomic,
        b_divisors,
        a_divisors,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivStructureReport {
    pub div_a: Vec<u64>,
    /// `Div(A)` is exactly `{1, p², q², r², p²q², q²r², r²p², M}`.
    pub div_matches: bool,
    /// Sizes of the parts of `A ∩ pZ` with `gcd` exactly `p²`, `p²q²`, `p²r²`.
    pub counts: [usize; 3],
    pub expected_counts: [usize; 3],
    /// `A ∩ pZ` is exactly those three parts and `{0}`.
    pub partition_matches: bool,
}

impl DivStructureReport {
    pub fn passed(&self) -> bool {
        self.div_matches && self.partition_matches && self.counts == self.expected_counts
    }
}

/// Division set and class-zero stratification of a tile, along the smallest prime.
pub fn check_div_structure(a: &ZmSet, ctx: &ModulusContext) -> Result<DivStructureReport> {
    same_modulus(&[a], ctx)?;
    let div_a = div_set(a)?.to_vec();
    let div_matches = div_a == ctx.tile_divisors();
    let (p, q, r) = (ctx.p(), ctx.q(), ctx.r());
    let class0 = a.residue_class(p, 0);
    let labels = [Label::new(2, 0, 0), Label::new(2, 2, 0), Label::new(2, 0, 2)];
    let counts = labels.map(|l| exact_part(&class0, ctx, l).len());
    let expected_counts = [((q - 1) * (r - 1)) as usize, (r - 1) as usize, (q - 1) as usize];
    let top = Label::new(2, 2, 2);
    let partition_matches = stratify(&class0, ctx)
        .parts
        .iter()
        .all(|(l, part)| labels.contains(l) || (*l == top && part.elements() == [0]))
        && class0.contains(0);
    Ok(DivStructureReport {
        div_a,
        div_matches,
        counts,
        expected_counts,
        partition_matches,
    })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::szabo::decompose_b;

    #[test]
    fn swap_on_canonical_pair() {
        let ctx = ctx();
        let (a, b) = (canon_a(), canon_b());
        let d = decompose_b(&b, &ctx).unwrap().part(Axis::R).clone();
        let swapped = swap_periodic(&a, &b, &d, Axis::R, &ctx).unwrap();
        assert!(d.shift(36).is_subset(&swapped));
        assert!(is_factorization_brute(&a, &swapped));
        let empty = ZmSet::empty(900);
        assert_eq!(swap_periodic(&a, &b, &empty, Axis::R, &ctx).unwrap(), b);
        let single = ZmSet::new(900, [255]).unwrap();
        assert!(matches!(
            swap_periodic(&a, &b, &single, Axis::R, &ctx),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn every_eligible_orbit_swaps_to_a_factorization() {
        let ctx = ctx();
        let (a, b) = (canon_a(), canon_b());
        for axis in Axis::ALL {
            let orbits = eligible_swap_orbits(&b, axis, &ctx);
            assert!(!orbits.is_empty());
            for d in orbits {
                let s = swap_periodic(&a, &b, &d, axis, &ctx).unwrap();
                assert!(is_factorization_brute(&a, &s), "axis {axis}, D = {d:?}");
            }
        }
    }

    #[test]
    fn generating_pair_consequences_on_canonical_pair() {
        let ctx = ctx();
        let rep = check_prop210(&canon_a(), &canon_b(), &ctx).unwrap();
        assert!(rep.cyclotomic && rep.b_divisors && rep.a_divisors);
        assert!(matches!(
            check_prop210(&canon_a(), &ZmSet::progression(900, 30, 30), &ctx),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn div_structure_examples() {
        let ctx = ctx();
        let rep = check_div_structure(&canon_a(), &ctx).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.counts, [8, 4, 2]);
        let rep = check_div_structure(&ZmSet::progression(900, 30, 30), &ctx).unwrap();
        assert!(!rep.div_matches);
        assert!(!rep.passed());
        let generic = ZmSet::new(900, 0..30).unwrap();
        assert!(!check_div_structure(&generic, &ctx).unwrap().passed());
    }
}
