//! The prime triple `p < q < r` and the constants of `M = (pqr)^2`.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the three primes of a [`ModulusContext`].
///
/// Axes come with the cyclic assignment `P -> (p, q, r)`, `Q -> (q, r, p)`,
/// `R -> (r, p, q)`: for axis `a` the "partners" are the other two primes in
/// that order. Every per-axis constant below follows this convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    P,
    Q,
    R,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::P, Axis::Q, Axis::R];

    pub fn next(self) -> Axis {
        match self {
            Axis::P => Axis::Q,
            Axis::Q => Axis::R,
            Axis::R => Axis::P,
        }
    }

    /// The two partner axes `(b, c)` in cyclic order.
    pub fn partners(self) -> (Axis, Axis) {
        (self.next(), self.next().next())
    }

    pub fn index(self) -> usize {
        match self {
            Axis::P => 0,
            Axis::Q => 1,
            Axis::R => 2,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Axis::P => 'p',
            Axis::Q => 'q',
            Axis::R => 'r',
        }
    }

    pub fn from_letter(c: char) -> Option<Axis> {
        match c.to_ascii_lowercase() {
            'p' => Some(Axis::P),
            'q' => Some(Axis::Q),
            'r' => Some(Axis::R),
            _ => None,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Trial division; inputs are below 2^16 so this is instantaneous.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// `x^-1 mod m`, if it exists.
pub fn mod_inverse(x: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let e = (x as i128 % m as i128).extended_gcd(&(m as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i128) as u64)
}

/// The prime triple with `M = (pqr)^2` and the products used throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ModulusContext {
    primes: [u64; 3],
    squares: [u64; 3],
    modulus: u64,
    pqr: u64,
}

impl ModulusContext {
    /// Validates and sorts the primes. Inputs must be distinct primes below 2^16.
    pub fn new(p: u64, q: u64, r: u64) -> Result<Self> {
        for x in [p, q, r] {
            if x >= 1 << 16 {
                return Err(Error::PrimeOutOfRange(x));
            }
            if !is_prime(x) {
                return Err(Error::NonPrime(x));
            }
        }
        if p == q || q == r || p == r {
            return Err(Error::NotDistinct(p, q, r));
        }
        let mut primes = [p, q, r];
        primes.sort_unstable();
        let pqr = primes[0] * primes[1] * primes[2];
        let modulus = pqr.checked_mul(pqr).ok_or(Error::ModulusOverflow)?;
        Ok(ModulusContext {
            primes,
            squares: primes.map(|x| x * x),
            modulus,
            pqr,
        })
    }

    pub fn p(&self) -> u64 {
        self.primes[0]
    }

    pub fn q(&self) -> u64 {
        self.primes[1]
    }

    pub fn r(&self) -> u64 {
        self.primes[2]
    }

    pub fn primes(&self) -> [u64; 3] {
        self.primes
    }

    /// `M = p^2 q^2 r^2`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn pqr(&self) -> u64 {
        self.pqr
    }

    pub fn prime(&self, axis: Axis) -> u64 {
        self.primes[axis.index()]
    }

    pub fn square(&self, axis: Axis) -> u64 {
        self.squares[axis.index()]
    }

    /// `b^2 c^2 = M / a^2`: the multiplier of the axis' index set in `A`, and
    /// the unit shift used on the `bc`-part of `B`.
    pub fn cofactor_square(&self, axis: Axis) -> u64 {
        self.modulus / self.square(axis)
    }

    /// `a b^2 c^2 = M / a`: the period of the `bc`-part classes of `B`.
    pub fn period(&self, axis: Axis) -> u64 {
        self.modulus / self.prime(axis)
    }

    /// `bc = pqr / a`: the divisor defining the `bc`-part of `B`.
    pub fn partner_product(&self, axis: Axis) -> u64 {
        self.pqr / self.prime(axis)
    }

    pub fn q2r2(&self) -> u64 {
        self.cofactor_square(Axis::P)
    }

    pub fn r2p2(&self) -> u64 {
        self.cofactor_square(Axis::Q)
    }

    pub fn p2q2(&self) -> u64 {
        self.cofactor_square(Axis::R)
    }

    /// `pq^2r^2`, `qr^2p^2`, `rp^2q^2` in axis order.
    pub fn periods(&self) -> [u64; 3] {
        Axis::ALL.map(|a| self.period(a))
    }

    /// The three divisors `a^2 bc, a^2 b^2 c, a^2 b c^2` probed by the
    /// divisor-forcing lemma for axis `a`.
    pub fn forcing_divisors(&self, axis: Axis) -> [u64; 3] {
        let a2 = self.square(axis);
        let (b, c) = axis.partners();
        let (b, c) = (self.prime(b), self.prime(c));
        [a2 * b * c, a2 * b * b * c, a2 * b * c * c]
    }

    /// `{1, p^2, q^2, r^2, p^2q^2, q^2r^2, r^2p^2, M}`, sorted.
    pub fn tile_divisors(&self) -> Vec<u64> {
        let mut d = vec![
            1,
            self.square(Axis::P),
            self.square(Axis::Q),
            self.square(Axis::R),
            self.p2q2(),
            self.q2r2(),
            self.r2p2(),
            self.modulus,
        ];
        d.sort_unstable();
        d
    }

    /// Exponent of the axis prime in `gcd(x, M)`, i.e. capped at 2; `x = 0`
    /// gives 2.
    pub fn valuation(&self, axis: Axis, x: u64) -> u8 {
        let a = self.prime(axis);
        if x.is_multiple_of(self.square(axis)) {
            2
        } else if x.is_multiple_of(a) {
            1
        } else {
            0
        }
    }
}

impl fmt::Display for ModulusContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{}) M={}",
            self.p(),
            self.q(),
            self.r(),
            self.modulus
        )
    }
}
