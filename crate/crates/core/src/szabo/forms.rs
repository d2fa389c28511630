use std::fmt;

use serde::Serialize;

use super::decompose_b;
use crate::divsets::div_set;
use crate::error::{Error, Result};
use crate::modulus::{Axis, ModulusContext};
use crate::set::ZmSet;

/// Shapes a complement can take once translated so that it contains `0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BForm {
    /// Nonempty `B_qr`, `B_rp`, `B_pq` plus `B_pqr`: the shape the
    /// verifier's decomposition expects.
    FourPart,
    /// Everything lies in `bcZ`, except a nonempty `B_b` and a nonempty `B_c`
    /// sitting in one common nonzero class `index` mod `a`.
    Concentrated { axis: Axis, index: u64 },
    None,
}

impl fmt::Display for BForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BForm::FourPart => write!(f, "four-part"),
            BForm::Concentrated { axis, index } => write!(f, "concentrated-{axis} (class {index})"),
            BForm::None => write!(f, "none"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FormReport {
    pub form: BForm,
    /// The `b ∈ B` with `B - b` in `form`; absent when nothing matched.
    pub offset: Option<u64>,
}

impl FormReport {
    /// The distinguished class of a concentrated form.
    pub fn index(&self) -> Option<u64> {
        match self.form {
            BForm::Concentrated { index, .. } => Some(index),
            _ => None,
        }
    }
}

fn divides(ctx: &ModulusContext, axis: Axis, x: u64) -> bool {
    x.is_multiple_of(ctx.prime(axis))
}

/// `E_b`: divisible by `b`, by neither of the other two primes.
fn only_divisible_by(ctx: &ModulusContext, axis: Axis, x: u64) -> bool {
    let (b, c) = axis.partners();
    divides(ctx, axis, x) && !divides(ctx, b, x) && !divides(ctx, c, x)
}

fn concentrated_index(b: &ZmSet, axis: Axis, ctx: &ModulusContext) -> Option<u64> {
    let (pb, pc) = axis.partners();
    let a = ctx.prime(axis);
    let bc = ctx.partner_product(axis);
    let mut class = None;
    let (mut seen_b, mut seen_c) = (false, false);
    for x in b.iter() {
        if x % bc == 0 {
            continue;
        }
        if only_divisible_by(ctx, pb, x) {
            seen_b = true;
        } else if only_divisible_by(ctx, pc, x) {
            seen_c = true;
        } else {
            return None;
        }
        let i = x % a;
        if i == 0 || class.is_some_and(|k| k != i) {
            return None;
        }
        class = Some(i);
    }
    (seen_b && seen_c).then_some(class?)
}

/// The form `B` has as given, without translating.
pub fn match_form(b: &ZmSet, ctx: &ModulusContext) -> BForm {
    if b.modulus() != ctx.modulus() || !b.contains(0) {
        return BForm::None;
    }
    if decompose_b(b, ctx).is_some_and(|d| d.all_nonempty()) {
        return BForm::FourPart;
    }
    for axis in Axis::ALL {
        if let Some(index) = concentrated_index(b, axis, ctx) {
            return BForm::Concentrated { axis, index };
        }
    }
    BForm::None
}

/// First `b ∈ B` (ascending) for which `B - b` has a recognised form. At each
/// offset the four-part form is tried before the concentrated ones.
pub fn classify_b_form(b: &ZmSet, ctx: &ModulusContext) -> Result<FormReport> {
    if b.modulus() != ctx.modulus() {
        return Err(Error::ModulusMismatch {
            expected: ctx.modulus(),
            found: b.modulus(),
        });
    }
    if div_set(b)?.contains(1) {
        return Err(Error::DivOneViolation);
    }
    for offset in b.iter() {
        let form = match_form(&b.translate(offset), ctx);
        if form != BForm::None {
            return Ok(FormReport {
                form,
                offset: Some(offset),
            });
        }
    }
    Ok(FormReport {
        form: BForm::None,
        offset: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartPeriodicityReport {
    pub axis: Axis,
    pub index: u64,
    /// `B_pqr` is invariant under the axis period.
    pub pqr_part: bool,
    /// Classes `i != index` of the `bc`-part that are not invariant.
    pub class_failures: Vec<u64>,
    /// Class `index` of `B_b` under the period of `c`.
    pub b_part: bool,
    /// Class `index` of `B_c` under the period of `b`.
    pub c_part: bool,
}

impl PartPeriodicityReport {
    pub fn passed(&self) -> bool {
        self.pqr_part && self.class_failures.is_empty() && self.b_part && self.c_part
    }
}

/// Periodicity of the pieces of a concentrated complement. `B` itself must
/// be in a concentrated form; `Div(A)` must be the eight-element tile set.
pub fn check_part_periodicity(
    a: &ZmSet,
    b: &ZmSet,
    ctx: &ModulusContext,
) -> Result<PartPeriodicityReport> {
    let BForm::Concentrated { axis, index } = match_form(b, ctx) else {
        return Err(Error::FormMismatch);
    };
    if a.modulus() != ctx.modulus() || div_set(a)?.to_vec() != ctx.tile_divisors() {
        return Err(Error::PreconditionViolated(
            "Div(A) is not the tile division set".into(),
        ));
    }
    let (pb, pc) = axis.partners();
    let p = ctx.prime(axis);
    let pqr = ctx.pqr();
    let bc = ctx.partner_product(axis);
    let period = ctx.period(axis);
    let pqr_part = b.filter(|x| x % pqr == 0);
    let bc_part = b.filter(|x| x % bc == 0 && x % pqr != 0);
    let class_failures = (1..p)
        .filter(|&i| i != index && !bc_part.residue_class(p, i).is_periodic(period))
        .collect();
    let b_only = b.filter(|x| only_divisible_by(ctx, pb, x) && x % p == index);
    let c_only = b.filter(|x| only_divisible_by(ctx, pc, x) && x % p == index);
    Ok(PartPeriodicityReport {
        axis,
        index,
        pqr_part: pqr_part.is_periodic(period),
        class_failures,
        b_part: b_only.is_periodic(ctx.period(pc)),
        c_part: c_only.is_periodic(ctx.period(pb)),
    })
}
