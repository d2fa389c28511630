//! Stratification of a set by the prime-power content of `gcd(x, M)`.
//!
//! Two families of sets are exposed. [`stratify`] partitions `E` by the exact
//! exponent triple of `gcd(x, M)`; its parts are the sets `E*_l` with
//! `l = gcd(x, M)` (and `E*` for `l = 1`). [`notation_part`] returns the
//! coarser sets `E_{p^i q^j r^k}`, which keep every element whose exponent is
//! at least the label's on the listed primes and zero on the unlisted ones.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::modulus::{Axis, ModulusContext};
use crate::set::ZmSet;

/// Exponents of `p`, `q`, `r`, each in `0..=2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub exps: [u8; 3],
}

impl Label {
    pub const STAR: Label = Label { exps: [0, 0, 0] };

    pub fn new(p: u8, q: u8, r: u8) -> Label {
        assert!(p <= 2 && q <= 2 && r <= 2, "exponents are capped at 2");
        Label { exps: [p, q, r] }
    }

    pub fn of(ctx: &ModulusContext, x: u64) -> Label {
        Label {
            exps: Axis::ALL.map(|a| ctx.valuation(a, x)),
        }
    }

    pub fn exp(&self, axis: Axis) -> u8 {
        self.exps[axis.index()]
    }

    /// The divisor `p^i q^j r^k` of `M` this label names.
    pub fn divisor(&self, ctx: &ModulusContext) -> u64 {
        Axis::ALL
            .iter()
            .map(|&a| ctx.prime(a).pow(self.exp(a) as u32))
            .product()
    }

    /// Parses `"p2q"`, `"qr"`, `"p2q2r2"`, `"star"`, ...
    pub fn parse(s: &str) -> Option<Label> {
        if s == "star" || s == "*" {
            return Some(Label::STAR);
        }
        let mut exps = [0u8; 3];
        let mut chars = s.chars().peekable();
        let mut last = None;
        while let Some(c) = chars.next() {
            let axis = Axis::from_letter(c)?;
            if last.is_some_and(|l: Axis| l >= axis) || exps[axis.index()] != 0 {
                return None;
            }
            last = Some(axis);
            exps[axis.index()] = if chars.peek() == Some(&'2') {
                chars.next();
                2
            } else {
                1
            };
        }
        (exps != [0, 0, 0]).then_some(Label { exps })
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Label::STAR {
            return write!(f, "star");
        }
        for a in Axis::ALL {
            match self.exp(a) {
                0 => {}
                1 => write!(f, "{a}")?,
                e => write!(f, "{a}{e}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Disjoint parts of a set keyed by exact label; empty parts are omitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stratification {
    pub parts: BTreeMap<Label, ZmSet>,
}

impl Stratification {
    pub fn part(&self, label: Label) -> Option<&ZmSet> {
        self.parts.get(&label)
    }

    /// Size of the exact part (zero when absent).
    pub fn count(&self, label: Label) -> usize {
        self.part(label).map_or(0, ZmSet::len)
    }
}

pub fn stratify(e: &ZmSet, ctx: &ModulusContext) -> Stratification {
    let mut buckets: BTreeMap<Label, Vec<u64>> = BTreeMap::new();
    for x in e.iter() {
        buckets.entry(Label::of(ctx, x)).or_default().push(x);
    }
    Stratification {
        parts: buckets
            .into_iter()
            .map(|(l, xs)| (l, ZmSet::from_sorted_unchecked(e.modulus(), xs)))
            .collect(),
    }
}

/// `E_{p^i q^j r^k}`: exponent `>=` the label on listed primes, `0` on the rest.
pub fn notation_part(e: &ZmSet, ctx: &ModulusContext, label: Label) -> ZmSet {
    e.filter(|x| {
        Axis::ALL.iter().all(|&a| {
            let want = label.exp(a);
            let have = ctx.valuation(a, x);
            if want == 0 {
                have == 0
            } else {
                have >= want
            }
        })
    })
}

/// `E*_l`: elements with `gcd(x, M) = l` exactly.
pub fn exact_part(e: &ZmSet, ctx: &ModulusContext, label: Label) -> ZmSet {
    e.filter(|x| Label::of(ctx, x) == label)
}
