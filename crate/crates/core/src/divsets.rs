//! Division sets, the two factorization tests, dilation, and the
//! divisor-forcing lemma.

use std::collections::BTreeSet;

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modulus::{Axis, ModulusContext};
use crate::set::ZmSet;

/// A set of divisors of `M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivSet {
    pub modulus: u64,
    pub divisors: BTreeSet<u64>,
}

impl DivSet {
    pub fn contains(&self, d: u64) -> bool {
        self.divisors.contains(&d)
    }

    pub fn len(&self) -> usize {
        self.divisors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.divisors.is_empty()
    }

    pub fn to_vec(&self) -> Vec<u64> {
        self.divisors.iter().copied().collect()
    }

    pub fn intersection(&self, other: &DivSet) -> BTreeSet<u64> {
        self.divisors.intersection(&other.divisors).copied().collect()
    }
}

/// `gcd(x - y mod M, M)`, with `gcd(0, M) = M`.
pub fn div_pair(x: u64, y: u64, m: u64) -> u64 {
    let d = (x % m + m - y % m) % m;
    d.gcd(&m)
}

fn collect_divisors(d: &ZmSet, e: &ZmSet) -> DivSet {
    let m = d.modulus();
    // Distinct differences first: gcd is the expensive step.
    let mut seen = vec![false; m as usize];
    let mut divisors = BTreeSet::new();
    for x in d.iter() {
        for y in e.iter() {
            let diff = ((x + m - y) % m) as usize;
            if !seen[diff] {
                seen[diff] = true;
                divisors.insert((diff as u64).gcd(&m));
            }
        }
    }
    DivSet {
        modulus: m,
        divisors,
    }
}

/// `Div(E) = {gcd(a - a', M) : a, a' in E}`.
pub fn div_set(e: &ZmSet) -> Result<DivSet> {
    if e.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(collect_divisors(e, e))
}

/// `Div(D, E) = {gcd(a - b, M) : a in D, b in E}`.
pub fn div_between(d: &ZmSet, e: &ZmSet) -> Result<DivSet> {
    if d.is_empty() || e.is_empty() {
        return Err(Error::EmptySet);
    }
    if d.modulus() != e.modulus() {
        return Err(Error::ModulusMismatch {
            expected: d.modulus(),
            found: e.modulus(),
        });
    }
    Ok(collect_divisors(d, e))
}

/// Ground truth: every residue of `Z_M` is `a + b` for exactly one pair.
/// Works for any modulus and uses nothing but a coverage table.
pub fn is_factorization_brute(a: &ZmSet, b: &ZmSet) -> bool {
    let m = a.modulus();
    if b.modulus() != m || (a.len() as u128) * (b.len() as u128) != m as u128 {
        return false;
    }
    let mut covered = vec![false; m as usize];
    for x in a.iter() {
        for y in b.iter() {
            let s = (x + y) % m;
            if covered[s as usize] {
                return false;
            }
            covered[s as usize] = true;
        }
    }
    covered.iter().all(|&c| c)
}

/// Sands' criterion: `|A||B| = M` and `Div(A) ∩ Div(B) = {M}`.
/// Empty inputs simply fail the cardinality test.
pub fn is_factorization_sands(a: &ZmSet, b: &ZmSet) -> bool {
    let m = a.modulus();
    if b.modulus() != m || (a.len() as u128) * (b.len() as u128) != m as u128 {
        return false;
    }
    let (Ok(da), Ok(db)) = (div_set(a), div_set(b)) else {
        return false;
    };
    da.intersection(&db) == BTreeSet::from([m])
}

/// Checks that `kA ⊕ B = Z_M` for `k` coprime to `|A|`, given `A ⊕ B = Z_M`.
pub fn dilate_check(a: &ZmSet, b: &ZmSet, k: u64) -> Result<bool> {
    if k.gcd(&(a.len() as u64)) != 1 {
        return Err(Error::PreconditionViolated(format!(
            "dilation factor {k} is not coprime to |A| = {}",
            a.len()
        )));
    }
    if !is_factorization_brute(a, b) {
        return Err(Error::PreconditionViolated(
            "inputs do not factor Z_M".into(),
        ));
    }
    let ka = a.dilate(k);
    Ok(ka.len() == a.len() && is_factorization_brute(&ka, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Lemma24Report {
    pub axis: Axis,
    pub hypothesis_holds: bool,
    pub conclusion_holds: bool,
}

impl Lemma24Report {
    /// The implication itself: a true hypothesis forces the conclusion.
    pub fn consistent(&self) -> bool {
        !self.hypothesis_holds || self.conclusion_holds
    }
}

/// Divisor forcing for the smallest prime `p`: if all differences in `E` are
/// multiples of `p^2 qr` and `|E| > max(q, r)`, then `p^2qr, p^2q^2r, p^2qr^2`
/// all lie in `Div(E)`.
pub fn lemma24_check(e: &ZmSet, ctx: &ModulusContext) -> Lemma24Report {
    lemma24_check_axis(e, ctx, Axis::P)
}

/// Same check with any prime of the triple in the squared role.
pub fn lemma24_check_axis(e: &ZmSet, ctx: &ModulusContext, axis: Axis) -> Lemma24Report {
    let forcing = ctx.forcing_divisors(axis);
    let base = forcing[0];
    let (b, c) = axis.partners();
    let bound = ctx.prime(b).max(ctx.prime(c)) as usize;
    let congruent = e
        .elements()
        .first()
        .is_none_or(|&x0| e.iter().all(|x| (x + e.modulus() - x0).is_multiple_of(base)));
    let hypothesis_holds = e.modulus() == ctx.modulus() && congruent && e.len() > bound;
    let conclusion_holds = match div_set(e) {
        Ok(d) => forcing.iter().all(|&f| d.contains(f)),
        Err(_) => false,
    };
    Lemma24Report {
        axis,
        hypothesis_holds,
        conclusion_holds,
    }
}
