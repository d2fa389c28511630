use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tau;
use crate::error::{Error, Result};
use crate::modulus::{Axis, ModulusContext};
use crate::set::ZmSet;

/// Recipe for a complement: three disjoint subsets of `Z_pqr` and the target
/// residue class of each of their orbits.
///
/// `h[P]` must be invariant under `+qr` (mod `pqr`), `h[Q]` under `+rp`,
/// `h[R]` under `+pq`. `assign[axis]` maps elements of `h[axis]` to a nonzero
/// class modulo the axis prime; the class must be constant on each orbit, and
/// orbits without an entry go to class 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplementPlan {
    pub h: [Vec<u64>; 3],
    #[serde(default)]
    pub assign: [BTreeMap<u64, u64>; 3],
}

impl ComplementPlan {
    /// Every orbit assigned to class 1.
    pub fn uniform(h: [Vec<u64>; 3]) -> Self {
        ComplementPlan {
            h,
            assign: Default::default(),
        }
    }

    fn class_of(&self, axis: Axis, x: u64, step: u64, n: u64) -> Result<u64> {
        let table = &self.assign[axis.index()];
        let mut class = None;
        let mut y = x;
        loop {
            if let Some(&c) = table.get(&y) {
                if class.is_some_and(|k| k != c) {
                    return Err(Error::BadAssignment(format!(
                        "orbit of {x} under +{step} has two classes"
                    )));
                }
                class = Some(c);
            }
            y = (y + step) % n;
            if y == x {
                break;
            }
        }
        Ok(class.unwrap_or(1))
    }
}

/// `B = pqr·(Z_pqr \ ∪H) ∪ ⋃_axis {pqr·h + τ_a(class(h))·b²c²}`.
pub fn build_b(plan: &ComplementPlan, ctx: &ModulusContext) -> Result<ZmSet> {
    let n = ctx.pqr();
    let m = ctx.modulus();
    let mut owner = vec![None::<Axis>; n as usize];
    for axis in Axis::ALL {
        let h = &plan.h[axis.index()];
        if h.is_empty() {
            return Err(Error::EmptyHSet(axis.letter()));
        }
        for &x in h {
            if x >= n {
                return Err(Error::OutOfRange {
                    value: x,
                    modulus: n,
                });
            }
            if x == 0 {
                return Err(Error::ZeroInH);
            }
            match owner[x as usize] {
                Some(other) if other != axis => return Err(Error::NotDisjoint(x)),
                _ => owner[x as usize] = Some(axis),
            }
        }
    }
    for axis in Axis::ALL {
        let step = ctx.partner_product(axis);
        let h = &plan.h[axis.index()];
        for &x in h {
            let y = (x + step) % n;
            if owner[y as usize] != Some(axis) {
                return Err(Error::NotInvariant {
                    axis: axis.letter(),
                    step,
                    missing: y,
                });
            }
        }
        for &key in plan.assign[axis.index()].keys() {
            if key >= n || owner[key as usize] != Some(axis) {
                return Err(Error::BadAssignment(format!(
                    "{key} is not in the {axis}-set"
                )));
            }
        }
    }

    let mut out = Vec::with_capacity(n as usize);
    for x in 0..n {
        let base = x * n;
        match owner[x as usize] {
            None => out.push(base),
            Some(axis) => {
                let a = ctx.prime(axis);
                let class = plan.class_of(axis, x, ctx.partner_product(axis), n)?;
                if class == 0 || class >= a {
                    return Err(Error::BadAssignment(format!(
                        "class {class} is not a nonzero residue mod {a}"
                    )));
                }
                let shift = tau(axis, class, ctx) * ctx.cofactor_square(axis) % m;
                out.push((base + shift) % m);
            }
        }
    }
    let b = ZmSet::new(m, out)?;
    if b.len() != n as usize {
        return Err(Error::InternalContradiction(
            "complement construction collided".into(),
        ));
    }
    Ok(b)
}

/// Random disjoint invariant sets with random orbit classes.
///
/// An invariant set for axis `a` is the preimage of a set of residue pairs
/// modulo the partner primes. Two such sets are disjoint exactly when their
/// projections onto the shared prime are disjoint, so the residues of each
/// prime are first dealt to one of the two axes that see them.
pub fn random_hsets<R: Rng + ?Sized>(rng: &mut R, ctx: &ModulusContext) -> Option<ComplementPlan> {
    let n = ctx.pqr();
    // side[c][x] = which of the two axes other than c may use residue x mod prime(c).
    let mut side: [Vec<Axis>; 3] = Default::default();
    for c in Axis::ALL {
        let (b1, b2) = c.partners();
        side[c.index()] = (0..ctx.prime(c))
            .map(|_| if rng.gen_bool(0.5) { b1 } else { b2 })
            .collect();
    }
    let mut plan = ComplementPlan::uniform(Default::default());
    for axis in Axis::ALL {
        let (b, c) = axis.partners();
        let allowed = |prime_axis: Axis| -> Vec<u64> {
            (0..ctx.prime(prime_axis))
                .filter(|&x| side[prime_axis.index()][x as usize] == axis)
                .collect()
        };
        let (rb, rc) = (allowed(b), allowed(c));
        let mut pairs: Vec<(u64, u64)> = rb
            .iter()
            .flat_map(|&x| rc.iter().map(move |&y| (x, y)))
            .filter(|&pair| pair != (0, 0))
            .collect();
        if pairs.is_empty() {
            return None;
        }
        pairs.shuffle(rng);
        let keep = rng.gen_range(1..=pairs.len());
        pairs.truncate(keep);
        let (pb, pc) = (ctx.prime(b), ctx.prime(c));
        let a = ctx.prime(axis);
        let mut h = Vec::new();
        for &(xb, xc) in &pairs {
            let orbit: Vec<u64> = (0..n).filter(|&x| x % pb == xb && x % pc == xc).collect();
            let class = rng.gen_range(1..a);
            plan.assign[axis.index()].insert(orbit[0], class);
            h.extend(orbit);
        }
        h.sort_unstable();
        plan.h[axis.index()] = h;
    }
    Some(plan)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::divsets::is_factorization_brute;
    use crate::szabo::verify_szabo_pair;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn canonical_complement() {
        let b = canon_b();
        let mut expected: Vec<u64> = [0, 4, 5, 6, 7, 8, 10, 11, 13, 14, 17, 18, 19, 20, 23, 24, 25, 26, 28, 29]
            .iter()
            .map(|x| 30 * x)
            .collect();
        expected.extend([255, 705, 160, 460, 760, 126, 306, 486, 666, 846]);
        assert_eq!(b, ZmSet::new(900, expected).unwrap());
        assert!(b.generates());
    }

    #[test]
    fn invalid_plans() {
        let ctx = ctx();
        let mut plan = canon_plan();
        plan.h[0] = vec![1];
        assert!(matches!(build_b(&plan, &ctx), Err(Error::NotInvariant { .. })));
        let mut plan = canon_plan();
        plan.h[1] = vec![1, 11, 21];
        assert_eq!(build_b(&plan, &ctx), Err(Error::NotDisjoint(1)));
        let mut plan = canon_plan();
        plan.h[2] = vec![0, 6, 12, 18, 24];
        assert_eq!(build_b(&plan, &ctx), Err(Error::ZeroInH));
        let mut plan = canon_plan();
        plan.h[2].clear();
        assert_eq!(build_b(&plan, &ctx), Err(Error::EmptyHSet('r')));
        let mut plan = canon_plan();
        plan.assign[2].insert(3, 1);
        plan.assign[2].insert(9, 2);
        assert!(matches!(build_b(&plan, &ctx), Err(Error::BadAssignment(_))));
        let mut plan = canon_plan();
        plan.assign[0].insert(1, 0);
        assert!(matches!(build_b(&plan, &ctx), Err(Error::BadAssignment(_))));
    }

    #[test]
    fn assignments_move_orbits_between_classes() {
        let ctx = ctx();
        let mut plan = canon_plan();
        // r-set orbits {3,9,15,21,27} are one orbit under +6; send it to class 3.
        plan.assign[2].insert(3, 3);
        let b = build_b(&plan, &ctx).unwrap();
        // τ_r(3) = 3 since p²q² = 36 ≡ 1 (mod 5): shift 108.
        assert!(b.contains(90 + 108));
        assert!(is_factorization_brute(&canon_a(), &b));
        assert!(verify_szabo_pair(&canon_a(), &b, &ctx).is_some());
    }

    #[test]
    fn random_plans_build_valid_complements() {
        for (p, q, r) in [(2, 3, 5), (2, 3, 7), (3, 5, 7)] {
            let ctx = ModulusContext::new(p, q, r).unwrap();
            let a = build_a(
                &SumsetFactors::from_lists(
                    &ctx,
                    &(0..p as i64).collect::<Vec<_>>(),
                    &(0..q as i64).collect::<Vec<_>>(),
                    &(0..r as i64).collect::<Vec<_>>(),
                ),
                &ctx,
            )
            .unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let mut built = 0;
            while built < 20 {
                let Some(plan) = random_hsets(&mut rng, &ctx) else {
                    continue;
                };
                let b = build_b(&plan, &ctx).unwrap();
                assert!(is_factorization_brute(&a, &b));
                assert!(verify_szabo_pair(&a, &b, &ctx).is_some());
                built += 1;
            }
        }
    }

    use crate::szabo::{build_a, SumsetFactors};
}
