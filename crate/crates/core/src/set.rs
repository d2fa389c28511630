//! Canonical subsets of `Z_M` and the residue-class operators on them.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A subset of `Z_M` stored as a strictly increasing list of residues in `[0, M)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "SetRepr", into = "SetRepr")]
pub struct ZmSet {
    modulus: u64,
    elements: Vec<u64>,
}

/// The serialized shape: `{"modulus": M, "elements": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetRepr {
    pub modulus: u64,
    pub elements: Vec<u64>,
}

impl TryFrom<SetRepr> for ZmSet {
    type Error = Error;

    fn try_from(repr: SetRepr) -> Result<Self> {
        ZmSet::new(repr.modulus, repr.elements)
    }
}

impl From<ZmSet> for SetRepr {
    fn from(set: ZmSet) -> Self {
        SetRepr {
            modulus: set.modulus,
            elements: set.elements,
        }
    }
}

impl ZmSet {
    /// Builds a set from residues that must already lie in `[0, M)`.
    /// Order and duplicates are normalized away.
    pub fn new(modulus: u64, elements: impl IntoIterator<Item = u64>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::ZeroModulus);
        }
        let mut elements: Vec<u64> = elements.into_iter().collect();
        if let Some(&value) = elements.iter().find(|&&x| x >= modulus) {
            return Err(Error::OutOfRange { value, modulus });
        }
        elements.sort_unstable();
        elements.dedup();
        Ok(ZmSet { modulus, elements })
    }

    /// Builds a set from arbitrary integers, reducing each mod `M`.
    pub fn from_residues(modulus: u64, elements: impl IntoIterator<Item = i64>) -> Self {
        assert!(modulus > 0, "modulus must be positive");
        let m = modulus as i128;
        let mut elements: Vec<u64> = elements
            .into_iter()
            .map(|x| (x as i128).rem_euclid(m) as u64)
            .collect();
        elements.sort_unstable();
        elements.dedup();
        ZmSet { modulus, elements }
    }

    /// Constructor for callers that already hold sorted, distinct, in-range data.
    pub(crate) fn from_sorted_unchecked(modulus: u64, elements: Vec<u64>) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(elements.last().is_none_or(|&x| x < modulus));
        ZmSet { modulus, elements }
    }

    pub fn empty(modulus: u64) -> Self {
        ZmSet {
            modulus,
            elements: Vec::new(),
        }
    }

    /// `step * {0, 1, ..., count - 1}` reduced mod `M`.
    pub fn progression(modulus: u64, step: u64, count: u64) -> Self {
        Self::from_map(modulus, 0..count, |k| (step as u128 * k as u128 % modulus as u128) as u64)
    }

    fn from_map(modulus: u64, it: impl Iterator<Item = u64>, f: impl Fn(u64) -> u64) -> Self {
        let mut elements: Vec<u64> = it.map(f).collect();
        elements.sort_unstable();
        elements.dedup();
        ZmSet { modulus, elements }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<u64> {
        self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.elements.iter().copied()
    }

    /// `{e - x0 mod M : e in E}`.
    pub fn translate(&self, x0: u64) -> ZmSet {
        let m = self.modulus;
        let shift = m - x0 % m;
        self.shift(shift)
    }

    /// `{e + t mod M : e in E}`.
    pub fn shift(&self, t: u64) -> ZmSet {
        let m = self.modulus;
        let t = t % m;
        // The image of a sorted list under +t is a rotation of a sorted list.
        let split = self.elements.partition_point(|&e| e < m - t);
        let mut out = Vec::with_capacity(self.len());
        out.extend(self.elements[split..].iter().map(|&e| e + t - m));
        out.extend(self.elements[..split].iter().map(|&e| e + t));
        ZmSet::from_sorted_unchecked(m, out)
    }

    /// `{k e mod M : e in E}`. The result may be smaller than `E` when `k` is
    /// not a unit.
    pub fn dilate(&self, k: u64) -> ZmSet {
        let m = self.modulus as u128;
        Self::from_map(self.modulus, self.iter(), |e| (e as u128 * k as u128 % m) as u64)
    }

    /// `C^l_j(E) = {x in E : x = j mod l}`.
    pub fn residue_class(&self, l: u64, j: u64) -> ZmSet {
        self.filter(|x| x % l == j)
    }

    /// `C^l_{j,k}(E) = {x in E : x = j + k l mod l^2}`.
    pub fn residue_class2(&self, l: u64, j: u64, k: u64) -> ZmSet {
        let target = j + k * l;
        self.filter(|x| x % (l * l) == target)
    }

    pub fn filter(&self, pred: impl Fn(u64) -> bool) -> ZmSet {
        ZmSet::from_sorted_unchecked(
            self.modulus,
            self.elements.iter().copied().filter(|&x| pred(x)).collect(),
        )
    }

    /// True iff `E + t = E` in `Z_M`.
    pub fn is_periodic(&self, t: u64) -> bool {
        let t = t % self.modulus;
        t == 0 || self.shift(t) == *self
    }

    /// `gcd` of `M` and every element; `Some(g)` when `g > 1`, meaning the set
    /// lies in the proper subgroup `gZ_M` (or `{0}` when `g = M`).
    pub fn subgroup_containment(&self) -> Result<Option<u64>> {
        if self.is_empty() {
            return Err(Error::EmptySet);
        }
        let g = self.iter().fold(self.modulus, |g, x| g.gcd(&x));
        Ok((g > 1).then_some(g))
    }

    /// True iff the set is not contained in any proper subgroup of `Z_M`.
    pub fn generates(&self) -> bool {
        matches!(self.subgroup_containment(), Ok(None))
    }

    pub fn union(&self, other: &ZmSet) -> ZmSet {
        debug_assert_eq!(self.modulus, other.modulus);
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.elements, &other.elements);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        ZmSet::from_sorted_unchecked(self.modulus, out)
    }

    pub fn difference(&self, other: &ZmSet) -> ZmSet {
        self.filter(|x| !other.contains(x))
    }

    pub fn intersection(&self, other: &ZmSet) -> ZmSet {
        self.filter(|x| other.contains(x))
    }

    pub fn is_subset(&self, other: &ZmSet) -> bool {
        self.modulus == other.modulus && self.iter().all(|x| other.contains(x))
    }

    pub fn is_disjoint(&self, other: &ZmSet) -> bool {
        self.iter().all(|x| !other.contains(x))
    }

    /// One-line text form: `M` on the first line, elements on the second.
    pub fn to_text(&self) -> String {
        let body: Vec<String> = self.elements.iter().map(u64::to_string).collect();
        format!("{}\n{}\n", self.modulus, body.join(" "))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("set serialization cannot fail")
    }
}

impl fmt::Debug for ZmSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z_{}{:?}", self.modulus, self.elements)
    }
}

impl fmt::Display for ZmSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}} mod {}", self.modulus)
    }
}

/// A parsed set file before normalization, so callers can report duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawSet {
    pub modulus: u64,
    pub elements: Vec<u64>,
}

impl RawSet {
    /// Accepts either the JSON object form or the two-line text form.
    pub fn parse(input: &str) -> Result<RawSet> {
        let trimmed = input.trim_start();
        if trimmed.starts_with('{') {
            let repr: SetRepr =
                serde_json::from_str(trimmed).map_err(|e| Error::Parse(e.to_string()))?;
            return Ok(RawSet {
                modulus: repr.modulus,
                elements: repr.elements,
            });
        }
        let mut lines = trimmed.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty input".into()))?;
        let modulus: u64 = header
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad modulus line {header:?}")))?;
        let mut elements = Vec::new();
        for line in lines {
            for tok in line.split(|c: char| c.is_whitespace() || c == ',') {
                if tok.is_empty() {
                    continue;
                }
                elements.push(
                    tok.parse()
                        .map_err(|_| Error::Parse(format!("bad element {tok:?}")))?,
                );
            }
        }
        Ok(RawSet { modulus, elements })
    }

    pub fn duplicate_count(&self) -> usize {
        let mut v = self.elements.clone();
        v.sort_unstable();
        let before = v.len();
        v.dedup();
        before - v.len()
    }

    pub fn into_set(self) -> Result<ZmSet> {
        ZmSet::new(self.modulus, self.elements)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(m: u64, xs: &[u64]) -> ZmSet {
        ZmSet::new(m, xs.iter().copied()).unwrap()
    }

    #[test]
    fn translate_examples() {
        let e = set(900, &[0, 255, 705]);
        assert_eq!(e.translate(255), set(900, &[0, 450, 645]));
        assert_eq!(e.translate(0), e);
        assert_eq!(e.translate(255).translate(900 - 255), e);
    }

    #[test]
    fn residue_classes() {
        let e = set(900, &[0, 4, 45, 60]);
        assert_eq!(e.residue_class(2, 0), set(900, &[0, 4, 60]));
        assert_eq!(e.residue_class(3, 0), set(900, &[0, 45, 60]));
        assert_eq!(e.residue_class2(2, 0, 0), set(900, &[0, 4, 60]));
        assert!(e.residue_class2(2, 0, 1).is_empty());
        assert_eq!(e.residue_class2(2, 1, 0), set(900, &[45]));
    }

    #[test]
    fn periodicity() {
        assert!(set(900, &[0, 450]).is_periodic(450));
        assert!(!set(900, &[0, 30]).is_periodic(450));
        assert!(set(900, &[0, 30]).is_periodic(0));
        assert!(ZmSet::empty(900).is_periodic(7));
    }

    #[test]
    fn subgroup_examples() {
        assert_eq!(set(900, &[0, 30, 60]).subgroup_containment(), Ok(Some(30)));
        assert_eq!(set(900, &[0, 255, 160, 126]).subgroup_containment(), Ok(None));
        assert_eq!(set(900, &[0]).subgroup_containment(), Ok(Some(900)));
        assert_eq!(ZmSet::empty(900).subgroup_containment(), Err(Error::EmptySet));
    }

    #[test]
    fn construction_validates_range() {
        assert_eq!(
            ZmSet::new(900, [900]),
            Err(Error::OutOfRange {
                value: 900,
                modulus: 900
            })
        );
        assert_eq!(ZmSet::from_residues(900, [-1, 901]).elements(), &[1, 899]);
        assert_eq!(ZmSet::progression(900, 30, 30).len(), 30);
    }

    #[test]
    fn parse_both_formats() {
        let raw = RawSet::parse(r#"{"modulus":900,"elements":[0,30]}"#).unwrap();
        assert_eq!(raw.into_set().unwrap().len(), 2);
        let raw = RawSet::parse("900\n0 30 30\n").unwrap();
        assert_eq!(raw.duplicate_count(), 1);
        assert_eq!(raw.into_set().unwrap().len(), 2);
        let raw = RawSet::parse(r#"{"modulus":900,"elements":[900]}"#).unwrap();
        assert!(raw.into_set().is_err());
        assert!(RawSet::parse("900\n1 x").is_err());
        assert!(serde_json::from_str::<ZmSet>(r#"{"modulus":900,"elements":[900]}"#).is_err());
    }

    fn arb_set() -> impl Strategy<Value = ZmSet> {
        (1u64..200).prop_flat_map(|m| {
            proptest::collection::vec(0..m, 0..40).prop_map(move |xs| ZmSet::new(m, xs).unwrap())
        })
    }

    proptest! {
        #[test]
        fn class_sizes_sum_to_cardinality(e in arb_set(), l in prop::sample::select(vec![2u64, 3, 5, 7])) {
            let total: usize = (0..l).map(|j| e.residue_class(l, j).len()).sum();
            prop_assert_eq!(total, e.len());
            for j in 0..l {
                let fine = (0..l).fold(ZmSet::empty(e.modulus()), |acc, k| {
                    let part = e.residue_class2(l, j, k);
                    assert!(acc.is_disjoint(&part));
                    acc.union(&part)
                });
                prop_assert_eq!(fine, e.residue_class(l, j));
            }
        }

        #[test]
        fn translate_is_invertible(e in arb_set(), x in 0u64..1000) {
            let m = e.modulus();
            let t = e.translate(x);
            prop_assert_eq!(t.len(), e.len());
            prop_assert_eq!(t.translate((m - x % m) % m), e);
        }

        #[test]
        fn periods_compose(e in arb_set(), t in 0u64..200, s in 0u64..200) {
            let m = e.modulus();
            if e.is_periodic(t) && e.is_periodic(s) {
                prop_assert!(e.is_periodic((t + s) % m));
            }
        }

        #[test]
        fn json_and_text_round_trip(e in arb_set()) {
            let back: ZmSet = serde_json::from_str(&e.to_json()).unwrap();
            prop_assert_eq!(&back, &e);
            prop_assert_eq!(RawSet::parse(&e.to_text()).unwrap().into_set().unwrap(), e);
        }
    }

    #[test]
    fn periodic_sets_compose_on_real_periods() {
        let e = ZmSet::progression(900, 150, 6);
        assert!(e.is_periodic(300) && e.is_periodic(450));
        assert!(e.is_periodic(750));
    }
}
