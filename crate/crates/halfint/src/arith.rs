//! Exact number-theoretic primitives: Kronecker symbols, p-adic valuations,
//! Hilbert symbols at all places, the quartic roots eps_d, and the cyclotomic
//! field Q(zeta_8) in which every scalar of the Hecke-algebra layer lives.
//!
//! Everything here is pure rational arithmetic; there is no floating point
//! anywhere in this crate.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator (num-rational maintains both invariants).
pub type Rat = BigRational;
/// Arbitrary-precision integer.
pub type Int = BigInt;

/// Shorthand for an integer as a `Rat`.
pub fn rat_int<T: Into<Int>>(n: T) -> Rat {
    Rat::from_integer(n.into())
}

/// Shorthand for `n/d` as a `Rat`. Panics if `d == 0`.
pub fn rat_frac<T: Into<Int>, U: Into<Int>>(n: T, d: U) -> Rat {
    Rat::new(n.into(), d.into())
}

/// A place of Q at which local symbols are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Place {
    /// Finite prime p.
    Finite(u64),
    /// The archimedean place.
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArithError {
    /// An operation that requires a nonzero input received zero.
    ZeroInput,
    /// eps_d is only defined for odd d.
    EvenInput,
}

impl fmt::Display for ArithError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithError::ZeroInput => write!(f, "zero input where a nonzero value is required"),
            ArithError::EvenInput => write!(f, "even input where an odd integer is required"),
        }
    }
}

impl std::error::Error for ArithError {}

/// Trial-division primality check, adequate for the prime moduli used here.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Full Kronecker symbol (a|n), extending the Jacobi symbol to all integers n:
/// (a|0) = 1 iff a = +-1, (a|-1) = -1 iff a < 0, (a|2) determined by a mod 8.
pub fn kronecker(a: &Int, n: &Int) -> i32 {
    if n.is_zero() {
        return if a.abs().is_one() { 1 } else { 0 };
    }
    let mut sign = 1i32;
    let mut n = n.clone();
    if n.is_negative() {
        n = -n;
        if a.is_negative() {
            sign = -sign;
        }
    }
    // Split off the even part of n.
    let mut e = 0u64;
    while n.is_even() {
        n /= 2;
        e += 1;
    }
    if e > 0 {
        let a8 = a
            .mod_floor(&Int::from(8))
            .to_u64_digits()
            .1
            .first()
            .copied()
            .unwrap_or(0);
        let k2 = match a8 {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => return 0, // a even
        };
        if e % 2 == 1 {
            sign *= k2;
        }
    }
    if n.is_one() {
        return sign;
    }
    sign * jacobi_odd(a, &n)
}

/// `kronecker` on machine integers.
pub fn kronecker_i64(a: i64, n: i64) -> i32 {
    kronecker(&Int::from(a), &Int::from(n))
}

/// Jacobi symbol (a|n) for odd n > 1, by quadratic reciprocity.
fn jacobi_odd(a: &Int, n: &Int) -> i32 {
    let mut a = a.mod_floor(n);
    let mut n = n.clone();
    let mut t = 1i32;
    while !a.is_zero() {
        while a.is_even() {
            a /= 2;
            let r = n
                .mod_floor(&Int::from(8))
                .to_u64_digits()
                .1
                .first()
                .copied()
                .unwrap_or(0);
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a.mod_floor(&Int::from(4)) == Int::from(3) && n.mod_floor(&Int::from(4)) == Int::from(3)
        {
            t = -t;
        }
        a = a.mod_floor(&n);
    }
    if n.is_one() {
        t
    } else {
        0
    }
}

/// p-adic valuation of a nonzero integer.
pub fn int_valuation(n: &Int, p: u64) -> i64 {
    assert!(!n.is_zero(), "valuation of zero integer");
    let p = Int::from(p);
    let mut n = n.clone();
    let mut v = 0i64;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// ord_p of a nonzero rational: x = p^v * u with u a p-adic unit.
pub fn valuation(x: &Rat, p: u64) -> Result<i64, ArithError> {
    if x.is_zero() {
        return Err(ArithError::ZeroInput);
    }
    Ok(int_valuation(x.numer(), p) - int_valuation(x.denom(), p))
}

/// The p-adic unit part of x: x / p^{ord_p x}, as an exact rational.
pub fn unit_part(x: &Rat, p: u64) -> Result<Rat, ArithError> {
    let v = valuation(x, p)?;
    Ok(x * pow_rat(p, -v))
}

/// p^e as a rational, e possibly negative.
pub fn pow_rat(p: u64, e: i64) -> Rat {
    let pp = Int::from(p);
    if e >= 0 {
        Rat::from_integer(pp.pow(e as u32))
    } else {
        Rat::new(Int::one(), pp.pow((-e) as u32))
    }
}

/// Residue of a p-adic unit rational modulo p^k, as an integer in [0, p^k).
pub fn unit_residue(x: &Rat, p: u64, k: u32) -> u64 {
    let m = Int::from(p).pow(k);
    let num = x.numer().mod_floor(&m);
    let den = x.denom().mod_floor(&m);
    let den_inv = mod_inverse(&den, &m).expect("denominator not a p-adic unit");
    let r = (num * den_inv).mod_floor(&m);
    let digits = r.to_u64_digits().1;
    digits.first().copied().unwrap_or(0)
}

/// Modular inverse of a mod m, if gcd(a, m) = 1.
pub fn mod_inverse(a: &Int, m: &Int) -> Option<Int> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Hilbert symbol (a, b)_v in {-1, +1}, computed from the closed local
/// formulas after factoring out the p-part of each argument.
pub fn hilbert(a: &Rat, b: &Rat, place: Place) -> Result<i32, ArithError> {
    if a.is_zero() || b.is_zero() {
        return Err(ArithError::ZeroInput);
    }
    match place {
        Place::Infinite => Ok(if a.is_negative() && b.is_negative() {
            -1
        } else {
            1
        }),
        Place::Finite(2) => {
            let s = valuation(a, 2)?;
            let t = valuation(b, 2)?;
            let u = unit_residue(&unit_part(a, 2)?, 2, 3) as i64; // mod 8
            let v = unit_residue(&unit_part(b, 2)?, 2, 3) as i64;
            // (-1)^{(u-1)(v-1)/4} (2|u)^t (2|v)^s for odd units u, v.
            let mut r = 1i32;
            if u % 4 == 3 && v % 4 == 3 {
                r = -r;
            }
            let two = |w: i64| -> i32 {
                if w == 1 || w == 7 {
                    1
                } else {
                    -1
                }
            };
            if t % 2 != 0 {
                r *= two(u);
            }
            if s % 2 != 0 {
                r *= two(v);
            }
            Ok(r)
        }
        Place::Finite(p) => {
            debug_assert!(is_prime(p), "hilbert: place must be prime");
            let s = valuation(a, p)?;
            let t = valuation(b, p)?;
            let u = unit_residue(&unit_part(a, p)?, p, 1);
            let v = unit_residue(&unit_part(b, p)?, p, 1);
            let mut r = 1i32;
            if (s * t) % 2 != 0 && p % 4 == 3 {
                r = -r; // (-1|p)^{st}
            }
            if t % 2 != 0 {
                r *= kronecker_i64(u as i64, p as i64);
            }
            if s % 2 != 0 {
                r *= kronecker_i64(v as i64, p as i64);
            }
            Ok(r)
        }
    }
}

/// Element of Q(zeta_8) with dense rational coordinates in the power basis
/// {1, z, z^2, z^3}, z a primitive 8th root of unity (z^4 = -1).
///
/// i = z^2 and sqrt(2) = z - z^3; these identities hold exactly.
#[derive(Clone, PartialEq, Eq)]
pub struct CycQ8 {
    pub c: [Rat; 4],
}

impl CycQ8 {
    pub fn new(c0: Rat, c1: Rat, c2: Rat, c3: Rat) -> Self {
        CycQ8 {
            c: [c0, c1, c2, c3],
        }
    }

    pub fn zero() -> Self {
        CycQ8::from_rat(Rat::zero())
    }

    pub fn one() -> Self {
        CycQ8::from_rat(Rat::one())
    }

    pub fn from_rat(r: Rat) -> Self {
        CycQ8::new(r, Rat::zero(), Rat::zero(), Rat::zero())
    }

    pub fn from_int(n: i64) -> Self {
        CycQ8::from_rat(rat_int(n))
    }

    /// The chosen primitive 8th root of unity z.
    pub fn zeta() -> Self {
        CycQ8::new(Rat::zero(), Rat::one(), Rat::zero(), Rat::zero())
    }

    /// i = z^2.
    pub fn i() -> Self {
        CycQ8::new(Rat::zero(), Rat::zero(), Rat::one(), Rat::zero())
    }

    /// sqrt(2) = z - z^3.
    pub fn sqrt2() -> Self {
        CycQ8::new(Rat::zero(), Rat::one(), Rat::zero(), -Rat::one())
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.c[1].is_zero() && self.c[2].is_zero() && self.c[3].is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rat> {
        if self.is_rational() {
            Some(&self.c[0])
        } else {
            None
        }
    }

    pub fn add(&self, o: &CycQ8) -> CycQ8 {
        CycQ8::new(
            &self.c[0] + &o.c[0],
            &self.c[1] + &o.c[1],
            &self.c[2] + &o.c[2],
            &self.c[3] + &o.c[3],
        )
    }

    pub fn sub(&self, o: &CycQ8) -> CycQ8 {
        CycQ8::new(
            &self.c[0] - &o.c[0],
            &self.c[1] - &o.c[1],
            &self.c[2] - &o.c[2],
            &self.c[3] - &o.c[3],
        )
    }

    pub fn neg(&self) -> CycQ8 {
        CycQ8::new(-&self.c[0], -&self.c[1], -&self.c[2], -&self.c[3])
    }

    pub fn mul(&self, o: &CycQ8) -> CycQ8 {
        let mut acc = [Rat::zero(), Rat::zero(), Rat::zero(), Rat::zero()];
        for i in 0..4 {
            if self.c[i].is_zero() {
                continue;
            }
            for j in 0..4 {
                if o.c[j].is_zero() {
                    continue;
                }
                let prod = &self.c[i] * &o.c[j];
                let k = i + j;
                if k < 4 {
                    acc[k] += prod;
                } else {
                    acc[k - 4] -= prod; // z^4 = -1
                }
            }
        }
        let [a, b, c, d] = acc;
        CycQ8::new(a, b, c, d)
    }

    pub fn scale(&self, r: &Rat) -> CycQ8 {
        CycQ8::new(
            &self.c[0] * r,
            &self.c[1] * r,
            &self.c[2] * r,
            &self.c[3] * r,
        )
    }

    /// The Galois automorphism z -> z^k for odd k in {1,3,5,7}.
    pub fn galois(&self, k: usize) -> CycQ8 {
        assert!(k % 2 == 1 && k < 8);
        let mut acc = [Rat::zero(), Rat::zero(), Rat::zero(), Rat::zero()];
        for (j, cj) in self.c.iter().enumerate() {
            if cj.is_zero() {
                continue;
            }
            let e = (j * k) % 8;
            if e < 4 {
                acc[e] += cj;
            } else {
                acc[e - 4] -= cj;
            }
        }
        let [a, b, c, d] = acc;
        CycQ8::new(a, b, c, d)
    }

    /// Complex conjugation, z -> z^{-1} = z^7.
    pub fn conj(&self) -> CycQ8 {
        self.galois(7)
    }

    /// Multiplicative inverse; panics on zero (check `is_zero` first).
    pub fn inv(&self) -> CycQ8 {
        assert!(!self.is_zero(), "inverse of zero in Q(zeta_8)");
        let cof = self.galois(3).mul(&self.galois(5)).mul(&self.galois(7));
        let norm = self.mul(&cof);
        let n = norm
            .as_rational()
            .expect("field norm must be rational")
            .clone();
        assert!(!n.is_zero());
        cof.scale(&n.recip())
    }

    pub fn pow(&self, e: u32) -> CycQ8 {
        let mut r = CycQ8::one();
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }
}

impl fmt::Debug for CycQ8 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for CycQ8 {
    /// Canonical file rendering: "c0+c1*z+c2*z^2+c3*z^3".
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}+{}*z+{}*z^2+{}*z^3",
            fmt_rat(&self.c[0]),
            fmt_rat(&self.c[1]),
            fmt_rat(&self.c[2]),
            fmt_rat(&self.c[3])
        )
    }
}

/// Render a rational as "num/den", omitting "/den" when den = 1.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Compact human rendering of a Q(zeta_8) scalar for report tables.
pub fn pretty_cyc(x: &CycQ8) -> String {
    if x.is_zero() {
        return "0".into();
    }
    let mut parts = Vec::new();
    let names = ["", "z", "z^2", "z^3"];
    for (j, c) in x.c.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let coeff = fmt_rat(c);
        if j == 0 {
            parts.push(coeff);
        } else if c.is_one() {
            parts.push(names[j].to_string());
        } else if (-c).is_one() {
            parts.push(format!("-{}", names[j]));
        } else {
            parts.push(format!("{}*{}", coeff, names[j]));
        }
    }
    let mut s = parts[0].clone();
    for p in &parts[1..] {
        if let Some(stripped) = p.strip_prefix('-') {
            s.push_str(" - ");
            s.push_str(stripped);
        } else {
            s.push_str(" + ");
            s.push_str(p);
        }
    }
    s
}

/// eps_d for odd d: 1 if d = 1 (mod 4), i if d = 3 (mod 4). Satisfies
/// eps_d^2 = (-1|d).
pub fn eps_quartic(d: &Int) -> Result<CycQ8, ArithError> {
    if d.is_even() {
        return Err(ArithError::EvenInput);
    }
    let r = d.mod_floor(&Int::from(4));
    if r.is_one() {
        Ok(CycQ8::one())
    } else {
        Ok(CycQ8::i())
    }
}

/// eps_p for an odd prime p.
pub fn eps_p(p: u64) -> CycQ8 {
    eps_quartic(&Int::from(p)).expect("p must be odd")
}
