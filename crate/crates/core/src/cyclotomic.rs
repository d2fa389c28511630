//! Exact integer polynomials, cyclotomic polynomials and `Phi_s`-divisibility
//! of mask polynomials.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::divsets::is_factorization_brute;
use crate::error::{Error, Result};
use crate::modulus::{Axis, ModulusContext};
use crate::set::ZmSet;

/// Integer polynomial, coefficient `i` multiplying `x^i`. Trailing zeros are
/// trimmed so the zero polynomial has no coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        IntPoly::monomial(1, 0)
    }

    pub fn monomial(c: i64, deg: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); deg + 1];
        coeffs[deg] = BigInt::from(c);
        IntPoly::from_big(coeffs)
    }

    /// `x^n - 1`.
    pub fn x_pow_minus_one(n: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); n + 1];
        coeffs[0] = BigInt::from(-1);
        coeffs[n] += 1;
        IntPoly::from_big(coeffs)
    }

    pub fn from_coeffs(coeffs: impl IntoIterator<Item = i64>) -> Self {
        IntPoly::from_big(coeffs.into_iter().map(BigInt::from).collect())
    }

    pub fn from_big(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficients as `i64`, if they all fit.
    pub fn coeffs_i64(&self) -> Option<Vec<i64>> {
        self.coeffs.iter().map(ToPrimitive::to_i64).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(One::is_one)
    }

    pub fn eval_at_one(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    /// `f(x^k)`.
    pub fn compose_power(&self, k: usize) -> IntPoly {
        assert!(k > 0);
        if self.is_zero() {
            return IntPoly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); (self.coeffs.len() - 1) * k + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * k] = c.clone();
        }
        IntPoly::from_big(coeffs)
    }

    /// Quotient and remainder by a monic divisor.
    pub fn div_rem_monic(&self, divisor: &IntPoly) -> (IntPoly, IntPoly) {
        assert!(divisor.is_monic(), "divisor must be monic");
        let dn = divisor.coeffs.len() - 1;
        if self.coeffs.len() <= dn {
            return (IntPoly::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigInt::zero(); rem.len() - dn];
        let support: Vec<(usize, &BigInt)> = divisor.coeffs[..dn]
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        for top in (dn..rem.len()).rev() {
            let lead = std::mem::take(&mut rem[top]);
            if lead.is_zero() {
                continue;
            }
            let shift = top - dn;
            for &(i, c) in &support {
                rem[shift + i] -= &lead * c;
            }
            quot[shift] = lead;
        }
        rem.truncate(dn);
        (IntPoly::from_big(quot), IntPoly::from_big(rem))
    }

    /// Exact division by a monic divisor; `None` if the remainder is nonzero.
    pub fn exact_div_monic(&self, divisor: &IntPoly) -> Option<IntPoly> {
        let (q, r) = self.div_rem_monic(divisor);
        r.is_zero().then_some(q)
    }

    /// Folds exponents modulo `n`, i.e. reduces modulo `x^n - 1`.
    pub fn reduce_cyclic(&self, n: usize) -> IntPoly {
        let mut coeffs = vec![BigInt::zero(); n.min(self.coeffs.len())];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i % n] += c;
        }
        IntPoly::from_big(coeffs)
    }
}

impl Add for &IntPoly {
    type Output = IntPoly;

    fn add(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = vec![BigInt::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, c) in rhs.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        IntPoly::from_big(coeffs)
    }
}

impl Sub for &IntPoly {
    type Output = IntPoly;

    fn sub(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = vec![BigInt::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, c) in rhs.coeffs.iter().enumerate() {
            coeffs[i] -= c;
        }
        IntPoly::from_big(coeffs)
    }
}

impl Mul for &IntPoly {
    type Output = IntPoly;

    fn mul(self, rhs: &IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return IntPoly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    coeffs[i + j] += a * b;
                }
            }
        }
        IntPoly::from_big(coeffs)
    }
}

impl fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = !mag.is_one() || i == 0;
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for IntPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            match c.to_i64() {
                Some(v) => seq.serialize_element(&v)?,
                None => seq.serialize_element(&c.to_string())?,
            }
        }
        seq.end()
    }
}

fn cache() -> &'static RwLock<HashMap<u64, Arc<IntPoly>>> {
    static CACHE: OnceLock<RwLock<HashMap<u64, Arc<IntPoly>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// `Phi_s`, computed as `x^s - 1` divided exactly by `Phi_d` for every proper
/// divisor `d` of `s`. Results are memoized process-wide.
pub fn cyclotomic_poly(s: u64) -> Result<Arc<IntPoly>> {
    if s == 0 {
        return Err(Error::PreconditionViolated("Phi_0 is undefined".into()));
    }
    if let Some(p) = cache().read().expect("cache poisoned").get(&s) {
        return Ok(Arc::clone(p));
    }
    let mut poly = IntPoly::x_pow_minus_one(s as usize);
    for d in divisors(s) {
        if d == s {
            continue;
        }
        let phi_d = cyclotomic_poly(d)?;
        poly = poly.exact_div_monic(&phi_d).ok_or_else(|| {
            Error::InternalContradiction(format!("Phi_{d} does not divide x^{s} - 1"))
        })?;
    }
    let mut w = cache().write().expect("cache poisoned");
    Ok(Arc::clone(w.entry(s).or_insert_with(|| Arc::new(poly))))
}

/// The characteristic polynomial `sum_{e in E} x^e`.
pub fn mask_poly(e: &ZmSet) -> IntPoly {
    let Some(&top) = e.elements().last() else {
        return IntPoly::zero();
    };
    let mut coeffs = vec![0i64; top as usize + 1];
    for x in e.iter() {
        coeffs[x as usize] = 1;
    }
    IntPoly::from_coeffs(coeffs)
}

/// Remainder of `counts(x)` by the monic `phi`, in `i128`. `None` on overflow.
fn rem_small(counts: &[i64], phi: &[i64]) -> Option<Vec<i128>> {
    let dn = phi.len() - 1;
    let mut rem: Vec<i128> = counts.iter().map(|&c| c as i128).collect();
    if rem.len() <= dn {
        return Some(rem);
    }
    let support: Vec<(usize, i128)> = phi[..dn]
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| (i, c as i128))
        .collect();
    for top in (dn..rem.len()).rev() {
        let lead = rem[top];
        if lead == 0 {
            continue;
        }
        rem[top] = 0;
        let shift = top - dn;
        for &(i, c) in &support {
            let v = rem[shift + i].checked_sub(lead.checked_mul(c)?)?;
            rem[shift + i] = v;
        }
    }
    rem.truncate(dn);
    Some(rem)
}

/// True iff `Phi_s(x)` divides the mask polynomial of `E` over the integers.
///
/// Exponents are folded modulo `s` first (`Phi_s | x^s - 1`), then the exact
/// remainder by `Phi_s` is taken. The remainder runs in `i128` and falls back
/// to arbitrary precision if an intermediate value overflows.
pub fn phi_divides(s: u64, e: &ZmSet) -> Result<bool> {
    let phi = cyclotomic_poly(s)?;
    let mut counts = vec![0i64; s as usize];
    for x in e.iter() {
        counts[(x % s) as usize] += 1;
    }
    if let Some(phi_small) = phi.coeffs_i64() {
        if let Some(rem) = rem_small(&counts, &phi_small) {
            return Ok(rem.iter().all(|&c| c == 0));
        }
    }
    let (_, rem) = IntPoly::from_coeffs(counts).div_rem_monic(&phi);
    Ok(rem.is_zero())
}

/// Checks `Phi_n(x^p) = Phi_n(x) Phi_{np}(x)` when `p ∤ n`, and
/// `Phi_n(x^p) = Phi_{np}(x)` when `p | n`.
pub fn phi_power_identity_check(n: u64, p: u64) -> Result<bool> {
    if n == 0 || p < 2 {
        return Err(Error::PreconditionViolated(format!(
            "need n >= 1 and prime p, got n={n}, p={p}"
        )));
    }
    let lhs = cyclotomic_poly(n)?.compose_power(p as usize);
    let phi_np = cyclotomic_poly(n * p)?;
    let rhs = if n.is_multiple_of(p) {
        (*phi_np).clone()
    } else {
        &*cyclotomic_poly(n)? * &*phi_np
    };
    Ok(lhs == rhs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AverageReport {
    pub axis: Axis,
    pub prime: u64,
    pub phi_l_divides_a: bool,
    pub phi_l2_divides_b: bool,
    pub biconditional_holds: bool,
    /// `Some` only when `Phi_l | A`: whether every `|C^l_j(A)| = pqr / l`.
    pub a_classes_balanced: Option<bool>,
    /// `Some` only when `Phi_l | A`: whether every `|C^l_{j,k}(B)| = |C^l_j(B)| / l`.
    pub b_subclasses_balanced: Option<bool>,
    /// First `(j, k)` (with `k = None` for an `A`-class failure) that broke a count.
    pub counterexample: Option<(u64, Option<u64>)>,
}

impl AverageReport {
    pub fn passed(&self) -> bool {
        self.biconditional_holds
            && self.a_classes_balanced != Some(false)
            && self.b_subclasses_balanced != Some(false)
    }
}

/// Averaged residue-class counts of a factorization `A ⊕ B = Z_M` along one axis.
pub fn average_property_check(
    a: &ZmSet,
    b: &ZmSet,
    axis: Axis,
    ctx: &ModulusContext,
) -> Result<AverageReport> {
    let m = ctx.modulus();
    let n = ctx.pqr() as usize;
    if a.modulus() != m || b.modulus() != m {
        return Err(Error::PreconditionViolated(format!(
            "sets must live in Z_{m}"
        )));
    }
    if a.len() != n || b.len() != n {
        return Err(Error::PreconditionViolated(format!(
            "need |A| = |B| = {n}"
        )));
    }
    if !is_factorization_brute(a, b) {
        return Err(Error::PreconditionViolated("A ⊕ B != Z_M".into()));
    }
    let l = ctx.prime(axis);
    let phi_l_divides_a = phi_divides(l, a)?;
    let phi_l2_divides_b = phi_divides(l * l, b)?;
    let mut report = AverageReport {
        axis,
        prime: l,
        phi_l_divides_a,
        phi_l2_divides_b,
        biconditional_holds: phi_l_divides_a == phi_l2_divides_b,
        a_classes_balanced: None,
        b_subclasses_balanced: None,
        counterexample: None,
    };
    if phi_l_divides_a {
        let target = n as u64 / l;
        let bad_a = (0..l).find(|&j| a.residue_class(l, j).len() as u64 != target);
        report.a_classes_balanced = Some(bad_a.is_none());
        let mut bad_b = None;
        'outer: for j in 0..l {
            let whole = b.residue_class(l, j).len() as u64;
            for k in 0..l {
                let part = b.residue_class2(l, j, k).len() as u64;
                if part * l != whole {
                    bad_b = Some((j, k));
                    break 'outer;
                }
            }
        }
        report.b_subclasses_balanced = Some(bad_b.is_none());
        report.counterexample = bad_a
            .map(|j| (j, None))
            .or(bad_b.map(|(j, k)| (j, Some(k))));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(m: u64, xs: &[u64]) -> ZmSet {
        ZmSet::new(m, xs.iter().copied()).unwrap()
    }

    #[test]
    fn small_cyclotomics() {
        assert_eq!(*cyclotomic_poly(1).unwrap(), IntPoly::from_coeffs([-1, 1]));
        assert_eq!(*cyclotomic_poly(4).unwrap(), IntPoly::from_coeffs([1, 0, 1]));
        assert_eq!(*cyclotomic_poly(6).unwrap(), IntPoly::from_coeffs([1, -1, 1]));
        assert_eq!(cyclotomic_poly(6).unwrap().to_string(), "x^2 - x + 1");
        assert_eq!(cyclotomic_poly(2).unwrap().eval_at_one(), BigInt::from(2));
        assert_eq!(cyclotomic_poly(9).unwrap().eval_at_one(), BigInt::from(3));
        assert_eq!(cyclotomic_poly(6).unwrap().eval_at_one(), BigInt::from(1));
        assert!(cyclotomic_poly(0).is_err());
    }

    #[test]
    fn phi_105_has_a_minus_two() {
        let phi = cyclotomic_poly(105).unwrap();
        assert_eq!(phi.degree(), Some(48));
        assert_eq!(phi.coeffs()[7], BigInt::from(-2));
        assert_eq!(phi.coeffs()[41], BigInt::from(-2));
    }

    #[test]
    fn masks() {
        assert_eq!(mask_poly(&set(900, &[0, 2])), IntPoly::from_coeffs([1, 0, 1]));
        assert!(mask_poly(&ZmSet::empty(900)).is_zero());
        let e = set(900, &[3, 17, 899]);
        assert_eq!(mask_poly(&e).eval_at_one(), BigInt::from(3));
    }

    #[test]
    fn divisibility_examples() {
        assert!(phi_divides(2, &set(4, &[0, 1])).unwrap());
        assert!(phi_divides(4, &set(4, &[0, 2])).unwrap());
        assert!(!phi_divides(5, &set(5, &[0, 1, 2, 3])).unwrap());
        assert!(phi_divides(5, &set(5, &[0, 1, 2, 3, 4])).unwrap());
    }

    #[test]
    fn power_identity_examples() {
        assert!(phi_power_identity_check(3, 2).unwrap());
        assert!(phi_power_identity_check(2, 2).unwrap());
        assert!(phi_power_identity_check(6, 5).unwrap());
    }

    #[test]
    fn division_round_trip() {
        let f = IntPoly::from_coeffs([3, -1, 4, 1, -5, 9]);
        let g = IntPoly::from_coeffs([2, 7, 1]);
        let (q, r) = f.div_rem_monic(&g);
        assert_eq!(&(&q * &g) + &r, f);
        assert!(r.degree().is_none_or(|d| d < 2));
        assert_eq!(&(&f - &f), &IntPoly::zero());
    }

    #[test]
    fn average_check_rejects_foreign_modulus() {
        let ctx = ModulusContext::new(2, 3, 5).unwrap();
        assert!(matches!(
            average_property_check(&set(4, &[0, 1]), &set(4, &[0, 2]), Axis::P, &ctx),
            Err(Error::PreconditionViolated(_))
        ));
    }
}
