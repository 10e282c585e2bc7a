//! The double cover of SL2(Qp) as exact data.
//!
//! Elements are pairs (g, eps) with g a rational SL2 matrix viewed inside
//! SL2(Qp) and eps = +-1; multiplication twists the sign by the Kubota
//! 2-cocycle sigma_p built from Hilbert symbols. All p-adic conditions
//! (integrality, congruences, valuations) are decided exactly on rationals.

use std::fmt;

use num_traits::{One, Zero};

use crate::arith::{
    eps_p, hilbert, pow_rat, unit_part, unit_residue, valuation, CycQ8, Int, Place, Rat,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetaError {
    /// Two cover elements at different places were combined.
    PlaceMismatch,
    /// The matrix is not in the required congruence subgroup.
    NotInK0,
    /// gamma is only defined on K0bar and the torus normalizer family.
    OutsideDomain,
}

impl fmt::Display for MetaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetaError::PlaceMismatch => write!(f, "cover elements live at different places"),
            MetaError::NotInK0 => write!(f, "matrix is not in the required congruence subgroup"),
            MetaError::OutsideDomain => {
                write!(f, "element is outside K0bar and the torus normalizer")
            }
        }
    }
}

impl std::error::Error for MetaError {}

/// A rational matrix of determinant 1.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat2 {
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
    pub d: Rat,
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

impl Mat2 {
    /// Builds a matrix, asserting det = 1.
    pub fn new(a: Rat, b: Rat, c: Rat, d: Rat) -> Mat2 {
        let det = &a * &d - &b * &c;
        assert!(det.is_one(), "Mat2 must have determinant 1, got {}", det);
        Mat2 { a, b, c, d }
    }

    pub fn identity() -> Mat2 {
        Mat2::new(Rat::one(), Rat::zero(), Rat::zero(), Rat::one())
    }

    /// Upper unipotent [[1, s], [0, 1]].
    pub fn upper(s: Rat) -> Mat2 {
        Mat2::new(Rat::one(), s, Rat::zero(), Rat::one())
    }

    /// Lower unipotent [[1, 0], [s, 1]].
    pub fn lower(s: Rat) -> Mat2 {
        Mat2::new(Rat::one(), Rat::zero(), s, Rat::one())
    }

    /// Torus element diag(t, 1/t), t nonzero.
    pub fn torus(t: Rat) -> Mat2 {
        assert!(!t.is_zero());
        let ti = t.recip();
        Mat2::new(t, Rat::zero(), Rat::zero(), ti)
    }

    /// Weyl-type element [[0, t], [-1/t, 0]], t nonzero.
    pub fn weyl(t: Rat) -> Mat2 {
        assert!(!t.is_zero());
        let ti = -t.recip();
        Mat2::new(Rat::zero(), t, ti, Rat::zero())
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: &self.a * &o.a + &self.b * &o.c,
            b: &self.a * &o.b + &self.b * &o.d,
            c: &self.c * &o.a + &self.d * &o.c,
            d: &self.c * &o.b + &self.d * &o.d,
        }
    }

    pub fn inv(&self) -> Mat2 {
        Mat2 {
            a: self.d.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: self.a.clone(),
        }
    }

    pub fn neg(&self) -> Mat2 {
        Mat2 {
            a: -self.a.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: -self.d.clone(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.b.is_zero() && self.c.is_zero()
    }

    pub fn is_antidiagonal(&self) -> bool {
        self.a.is_zero() && self.d.is_zero()
    }
}

/// tau(g): the lower-left entry when nonzero, else the lower-right.
pub fn tau(g: &Mat2) -> Rat {
    if !g.c.is_zero() {
        g.c.clone()
    } else {
        g.d.clone()
    }
}

/// Kubota's correction factor s_p(g) = (c, d)_p when cd != 0 and ord_p(c) is
/// odd, else 1.
pub fn s_factor(g: &Mat2, p: u64) -> i32 {
    if g.c.is_zero() || g.d.is_zero() {
        return 1;
    }
    if valuation(&g.c, p).unwrap() % 2 == 0 {
        return 1;
    }
    hilbert(&g.c, &g.d, Place::Finite(p)).unwrap()
}

/// The 2-cocycle sigma_p(g, h) defining the double cover.
pub fn sigma(g: &Mat2, h: &Mat2, p: u64) -> i32 {
    let gh = g.mul(h);
    let tgh = tau(&gh);
    let tg = tau(g);
    let th = tau(h);
    let hs = hilbert(&(&tgh * &tg), &(&tgh * &th), Place::Finite(p)).unwrap();
    hs * s_factor(g, p) * s_factor(h, p) * s_factor(&gh, p)
}

/// An element (g, eps) of the double cover of SL2(Qp).
#[derive(Clone, PartialEq, Eq)]
pub struct MetaElement {
    pub m: Mat2,
    pub eps: i32,
    pub place: u64,
}

impl fmt::Debug for MetaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {})@{}", self.m, self.eps, self.place)
    }
}

impl MetaElement {
    pub fn new(m: Mat2, eps: i32, place: u64) -> MetaElement {
        assert!(eps == 1 || eps == -1);
        MetaElement { m, eps, place }
    }

    pub fn identity(place: u64) -> MetaElement {
        MetaElement::new(Mat2::identity(), 1, place)
    }

    /// The central element (I, -1).
    pub fn central_sign(place: u64) -> MetaElement {
        MetaElement::new(Mat2::identity(), -1, place)
    }

    pub fn lift(m: Mat2, place: u64) -> MetaElement {
        MetaElement::new(m, 1, place)
    }
}

/// Group law of the double cover: (g, e1)(h, e2) = (gh, e1 e2 sigma_p(g, h)).
pub fn meta_mul(x: &MetaElement, y: &MetaElement) -> Result<MetaElement, MetaError> {
    if x.place != y.place {
        return Err(MetaError::PlaceMismatch);
    }
    let s = sigma(&x.m, &y.m, x.place);
    Ok(MetaElement::new(x.m.mul(&y.m), x.eps * y.eps * s, x.place))
}

/// sigma_p(A, A^{-1}) by the closed case analysis.
pub fn inversion_sigma(a: &Mat2, p: u64) -> i32 {
    let place = Place::Finite(p);
    if a.c.is_zero() {
        return hilbert(&a.a, &a.a, place).unwrap();
    }
    if valuation(&a.c, p).unwrap() % 2 == 0 {
        return 1;
    }
    let mut r = 1i32;
    if !a.d.is_zero() {
        r *= hilbert(&a.c, &a.d, place).unwrap();
    }
    if !a.a.is_zero() {
        r *= hilbert(&(-a.c.clone()), &a.a, place).unwrap();
    }
    r
}

/// Inverse in the double cover: (A, e)^{-1} = (A^{-1}, e * sigma_p(A, A^{-1})).
pub fn meta_inv(x: &MetaElement) -> MetaElement {
    let s = inversion_sigma(&x.m, x.place);
    MetaElement::new(x.m.inv(), x.eps * s, x.place)
}

/// The sign component of the commutator [(B,e2)^{-1}, (A,e1)^{-1}], which is
/// independent of e1 and e2; computed by the five-cocycle product
/// sigma(A,A^{-1}) sigma(B,B^{-1}) sigma(B,A) sigma(A^{-1},BA) sigma(B^{-1},A^{-1}BA).
pub fn commutator_sigma(a: &Mat2, b: &Mat2, p: u64) -> i32 {
    let ai = a.inv();
    let bi = b.inv();
    let ba = b.mul(a);
    let aiba = ai.mul(&ba);
    inversion_sigma(a, p)
        * inversion_sigma(b, p)
        * sigma(b, a, p)
        * sigma(&ai, &ba, p)
        * sigma(&bi, &aiba, p)
}

/// True iff x is p-integral (zero counts as integral).
fn p_integral(x: &Rat, p: u64) -> bool {
    x.is_zero() || valuation(x, p).unwrap() >= 0
}

/// ord_p(x) with None standing for +infinity at x = 0.
fn val_opt(x: &Rat, p: u64) -> Option<i64> {
    if x.is_zero() {
        None
    } else {
        Some(valuation(x, p).unwrap())
    }
}

/// Membership in K0^p(p^n): integral entries, det 1, ord_p(c) >= n.
pub fn in_k0(g: &Mat2, p: u64, n: u32) -> bool {
    for e in [&g.a, &g.b, &g.c, &g.d] {
        if !p_integral(e, p) {
            return false;
        }
    }
    match val_opt(&g.c, p) {
        None => true,
        Some(v) => v >= n as i64,
    }
}

/// Membership in K1^p(p^n): K0 plus a = 1 (mod p^n) as p-adic congruence.
pub fn in_k1(g: &Mat2, p: u64, n: u32) -> bool {
    if !in_k0(g, p, n) {
        return false;
    }
    let am1 = &g.a - Rat::one();
    match val_opt(&am1, p) {
        None => true,
        Some(v) => v >= n as i64,
    }
}

/// Triangular decomposition of (A, eps) in K0bar^p(p^n):
/// (A, eps) = (x(s),1)(h(u),1)(y(t),1)(I, eps*delta), returning (s, u, t, delta).
pub fn triangular_decompose(x: &MetaElement, n: u32) -> Result<(Rat, Rat, Rat, i32), MetaError> {
    let p = x.place;
    let g = &x.m;
    if !in_k0(g, p, n) {
        return Err(MetaError::NotInK0);
    }
    if g.d.is_zero() || valuation(&g.d, p).unwrap() != 0 {
        return Err(MetaError::NotInK0);
    }
    let u = g.d.recip();
    let s = &g.b * &u;
    let t = &g.c * &u;
    let delta = if g.c.is_zero() {
        1
    } else if valuation(&g.c, p).unwrap() % 2 != 0 {
        hilbert(&g.d, &-Rat::one(), Place::Finite(p)).unwrap()
    } else {
        hilbert(&-g.c.clone(), &g.d, Place::Finite(p)).unwrap()
    };
    Ok((s, u, t, delta))
}

/// The finite part of a genuine character: for odd p a character of
/// (Z/p)^x (trivial, the Legendre symbol, or a synthetic quartic character
/// used to exercise the support criterion), and for p = 2 the character of
/// K0bar^2(4) attached to a weight k + 1/2, recorded through k mod 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharKind {
    Trivial,
    Legendre,
    /// Order-4 character of (Z/p)^x, defined for p = 1 (mod 4). Not quadratic,
    /// so Weyl-type double cosets fall outside the algebra's support.
    Quartic,
    /// The 2-adic character determined by gamma((-I,1)) = -i^{2k+1}.
    TwoAdic {
        k_mod_4: u8,
    },
}

/// A genuine character of K0bar^p(p) (odd p) or K0bar^2(4) (p = 2), together
/// with its extension to the torus normalizer used to normalize the Hecke
/// algebra basis functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalCharacter {
    pub place: u64,
    pub kind: CharKind,
}

impl LocalCharacter {
    pub fn odd_trivial(p: u64) -> LocalCharacter {
        assert!(p % 2 == 1 && p > 1);
        LocalCharacter {
            place: p,
            kind: CharKind::Trivial,
        }
    }

    pub fn odd_legendre(p: u64) -> LocalCharacter {
        assert!(p % 2 == 1 && p > 1);
        LocalCharacter {
            place: p,
            kind: CharKind::Legendre,
        }
    }

    pub fn odd_quartic(p: u64) -> LocalCharacter {
        assert!(p % 4 == 1, "an order-4 character needs p = 1 (mod 4)");
        LocalCharacter {
            place: p,
            kind: CharKind::Quartic,
        }
    }

    pub fn two_adic(k: u32) -> LocalCharacter {
        LocalCharacter {
            place: 2,
            kind: CharKind::TwoAdic {
                k_mod_4: (k % 4) as u8,
            },
        }
    }

    /// Congruence level exponent of the underlying subgroup: K0^p(p) for odd
    /// p and K0^2(4) for p = 2.
    pub fn level_exponent(&self) -> u32 {
        if self.place == 2 {
            2
        } else {
            1
        }
    }

    /// True when the finite character is quadratic (the only cases in which
    /// the Weyl-type double cosets support the algebra).
    pub fn is_quadratic(&self) -> bool {
        !matches!(self.kind, CharKind::Quartic)
    }

    /// Value of the finite character on a p-adic unit (odd p only).
    fn unit_value(&self, u: &Rat) -> CycQ8 {
        let p = self.place;
        match self.kind {
            CharKind::Trivial => CycQ8::one(),
            CharKind::Legendre => {
                let r = unit_residue(u, p, 1);
                CycQ8::from_int(crate::arith::kronecker_i64(r as i64, p as i64) as i64)
            }
            CharKind::Quartic => {
                let g = primitive_root(p);
                let r = unit_residue(u, p, 1);
                let mut x = 1u64;
                let mut log = 0u64;
                while x != r {
                    x = x * g % p;
                    log += 1;
                    assert!(log < p, "unit not in (Z/p)^x");
                }
                // i^(log mod 4) through the order-4 quotient
                CycQ8::i().pow((log % 4) as u32)
            }
            CharKind::TwoAdic { .. } => unreachable!("unit_value is for odd p"),
        }
    }

    /// gamma~_2(t) for a 2-adic unit t: 1 if t = 1 (mod 4), -i otherwise.
    fn gamma2_tilde(t: &Rat) -> CycQ8 {
        if unit_residue(t, 2, 2) == 1 {
            CycQ8::one()
        } else {
            CycQ8::i().neg()
        }
    }

    /// chi_{0,2}(d) = ((-1)^k | d) on 2-adic units.
    fn chi02(&self, d: &Rat) -> CycQ8 {
        let k = match self.kind {
            CharKind::TwoAdic { k_mod_4 } => k_mod_4,
            _ => unreachable!(),
        };
        if k % 2 == 0 || unit_residue(d, 2, 2) == 1 {
            CycQ8::one()
        } else {
            CycQ8::from_int(-1)
        }
    }

    /// The 8th root of unity gamma((w(1),1)) = (1 + gamma((-I,1)))/sqrt(2)
    /// at p = 2.
    pub fn zeta8(&self) -> CycQ8 {
        let k = match self.kind {
            CharKind::TwoAdic { k_mod_4 } => k_mod_4,
            _ => panic!("zeta8 is a 2-adic datum"),
        };
        let minus_i_pow = if k % 2 == 0 {
            CycQ8::i().neg()
        } else {
            CycQ8::i()
        };
        CycQ8::one().add(&minus_i_pow).mul(&CycQ8::sqrt2().inv())
    }

    /// epsilon~_2(k0) for k0 in K0^2(4) per the 2-adic character description.
    fn eps2_tilde(&self, g: &Mat2) -> CycQ8 {
        if g.c.is_zero() {
            Self::gamma2_tilde(&g.d)
        } else {
            let h = hilbert(&g.c, &g.d, Place::Finite(2)).unwrap();
            let s2 = s_factor(g, 2);
            Self::gamma2_tilde(&g.d)
                .inv()
                .scale(&crate::arith::rat_int((h * s2) as i64))
        }
    }
}

fn primitive_root(p: u64) -> u64 {
    // Smallest generator of (Z/p)^x; p is a small prime here.
    'outer: for g in 2..p {
        let mut x = 1u64;
        for _ in 0..p - 2 {
            x = x * g % p;
            if x == 1 {
                continue 'outer;
            }
        }
        return g;
    }
    panic!("no primitive root found for {}", p);
}

/// Evaluates the genuine character on an element of K0bar or of the torus
/// normalizer family {(h(t), eps), (w(t), eps)}.
pub fn gamma_eval(chi: &LocalCharacter, x: &MetaElement) -> Result<CycQ8, MetaError> {
    let p = chi.place;
    if x.place != p {
        return Err(MetaError::PlaceMismatch);
    }
    let e = chi.level_exponent();
    let sign = |s: i32| CycQ8::from_int(s as i64);
    if in_k0(&x.m, p, e) {
        if p == 2 {
            let v = chi.eps2_tilde(&x.m).mul(&chi.chi02(&x.m.d));
            return Ok(v.scale(&crate::arith::rat_int(x.eps as i64)));
        }
        let (_s, u, _t, delta) = triangular_decompose(x, e)?;
        let v = chi.unit_value(&u);
        return Ok(v.mul(&sign(x.eps * delta)));
    }
    if x.m.is_diagonal() {
        // (h(t), eps)
        let t = x.m.a.clone();
        return Ok(gamma_torus(chi, &t).mul(&sign(x.eps)));
    }
    if x.m.is_antidiagonal() {
        // (w(t), eps) with t the upper-right entry
        let t = x.m.b.clone();
        return Ok(gamma_weyl(chi, &t).mul(&sign(x.eps)));
    }
    Err(MetaError::OutsideDomain)
}

/// gamma((h(t),1)) on the normalizer extension.
fn gamma_torus(chi: &LocalCharacter, t: &Rat) -> CycQ8 {
    let p = chi.place;
    let n = valuation(t, p).unwrap();
    let u = unit_part(t, p).unwrap();
    if p == 2 {
        // (h(t),1) = (h(2^n),1)(h(u),1)(I, (2^n, u)_2) with gamma(h(2^n)) = 1.
        let hs = hilbert(&pow_rat(2, n), &u, Place::Finite(2)).unwrap();
        let hu = MetaElement::lift(Mat2::torus(u), 2);
        let gu = gamma_eval(chi, &hu).expect("h(u) with unit u lies in K0bar");
        return gu.scale(&crate::arith::rat_int(hs as i64));
    }
    if n % 2 == 0 {
        CycQ8::one()
    } else {
        let r = unit_residue(&u, p, 1);
        eps_p(p).scale(&crate::arith::rat_int(
            crate::arith::kronecker_i64(r as i64, p as i64) as i64,
        ))
    }
}

/// gamma((w(t),1)) on the normalizer extension.
fn gamma_weyl(chi: &LocalCharacter, t: &Rat) -> CycQ8 {
    let p = chi.place;
    if p == 2 {
        // (w(t),1) = (h(t),1)(w(1),1)(I, (t,-1)_2).
        let hs = hilbert(t, &-Rat::one(), Place::Finite(2)).unwrap();
        return gamma_torus(chi, t)
            .mul(&chi.zeta8())
            .scale(&crate::arith::rat_int(hs as i64));
    }
    let n = valuation(t, p).unwrap();
    if n % 2 == 0 {
        CycQ8::one()
    } else {
        let u = unit_part(t, p).unwrap();
        let r = unit_residue(&-u, p, 1);
        eps_p(p).scale(&crate::arith::rat_int(
            crate::arith::kronecker_i64(r as i64, p as i64) as i64,
        ))
    }
}

/// Deterministic generator of pseudo-random rational matrices in SL2(Q) with
/// denominators supported at p; used by the fuzz subcommand and tests.
pub struct MatrixSampler {
    state: u64,
    p: u64,
}

impl MatrixSampler {
    pub fn new(p: u64, seed: u64) -> MatrixSampler {
        MatrixSampler {
            state: seed.wrapping_mul(0x9e3779b97f4a7c15).max(1),
            p,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        // splitmix64
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn small_rat(&mut self) -> Rat {
        let n = (self.next_u64() % 41) as i64 - 20;
        let vp = (self.next_u64() % 5) as i64 - 2;
        crate::arith::rat_int(n) * pow_rat(self.p, vp)
    }

    /// A random SL2(Q) matrix with entries of the form m * p^k, produced from
    /// unipotent and torus generators so the determinant is exactly 1.
    pub fn sl2(&mut self) -> Mat2 {
        let mut g = Mat2::identity();
        for _ in 0..3 {
            match self.next_u64() % 3 {
                0 => g = g.mul(&Mat2::upper(self.small_rat())),
                1 => g = g.mul(&Mat2::lower(self.small_rat())),
                _ => {
                    let mut t = self.small_rat();
                    if t.is_zero() {
                        t = Rat::one();
                    }
                    g = g.mul(&Mat2::torus(t));
                }
            }
        }
        if self.next_u64() % 2 == 0 {
            let mut t = self.small_rat();
            if t.is_zero() {
                t = Rat::one();
            }
            g = g.mul(&Mat2::weyl(t));
        }
        g
    }

    /// A random element of K0^p(p^n) built from integral generators.
    pub fn k0(&mut self, n: u32) -> Mat2 {
        let p = self.p;
        let mut g = Mat2::identity();
        for _ in 0..4 {
            match self.next_u64() % 3 {
                0 => {
                    let s = (self.next_u64() % 19) as i64 - 9;
                    g = g.mul(&Mat2::upper(crate::arith::rat_int(s)));
                }
                1 => {
                    let s = ((self.next_u64() % 19) as i64 - 9) * (p as i64).pow(n);
                    g = g.mul(&Mat2::lower(crate::arith::rat_int(s)));
                }
                _ => {
                    let mut u = (self.next_u64() % 19) as i64 - 9;
                    if u % p as i64 == 0 {
                        u += 1;
                    }
                    g = g.mul(&Mat2::torus(crate::arith::rat_frac(u, 1)));
                }
            }
        }
        debug_assert!(in_k0(&g, p, n));
        g
    }
}

/// Checks the 2-cocycle identity sigma(g,h) sigma(gh,k) = sigma(g,hk) sigma(h,k)
/// on `trials` pseudo-random triples; returns the number of failures.
pub fn cocycle_fuzz(p: u64, trials: u64, seed: u64) -> u64 {
    let mut sampler = MatrixSampler::new(p, seed);
    let mut failures = 0;
    for _ in 0..trials {
        let g = sampler.sl2();
        let h = sampler.sl2();
        let k = sampler.sl2();
        let lhs = sigma(&g, &h, p) * sigma(&g.mul(&h), &k, p);
        let rhs = sigma(&g, &h.mul(&k), p) * sigma(&h, &k, p);
        if lhs != rhs {
            failures += 1;
        }
    }
    failures
}

pub fn rat(n: i64) -> Rat {
    crate::arith::rat_int(n)
}

pub fn int(n: i64) -> Int {
    Int::from(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{kronecker_i64, rat_frac, rat_int};

    fn meta(m: Mat2, eps: i32, p: u64) -> MetaElement {
        MetaElement::new(m, eps, p)
    }

    #[test]
    fn tau_cases() {
        assert_eq!(tau(&Mat2::upper(rat(5))), rat(1));
        assert_eq!(tau(&Mat2::weyl(rat(1))), rat(-1));
        assert_eq!(tau(&Mat2::new(rat(2), rat(1), rat(3), rat(2))), rat(3));
    }

    #[test]
    fn s_factor_cases() {
        assert_eq!(s_factor(&Mat2::lower(rat(3)), 3), 1);
        assert_eq!(
            s_factor(&Mat2::new(rat(2), rat(1), rat(3), rat(2)), 3),
            kronecker_i64(2, 3)
        );
        assert_eq!(s_factor(&Mat2::new(rat(1), rat(1), rat(9), rat(10)), 3), 1);
    }

    #[test]
    fn sigma_examples() {
        // (h(s),1)(h(t),1) = (h(st), (s,t)_p)
        assert_eq!(sigma(&Mat2::torus(rat(3)), &Mat2::torus(rat(3)), 3), -1);
        // (w(s),1)(w(t),1) = (h(-s/t), (s,t)_p)
        assert_eq!(sigma(&Mat2::weyl(rat(1)), &Mat2::weyl(rat(1)), 3), 1);
        assert_eq!(sigma(&Mat2::weyl(rat(1)), &Mat2::weyl(rat(1)), 2), 1);
        // cocycle normalization at the identity
        let mut s = MatrixSampler::new(5, 7);
        for _ in 0..20 {
            let g = s.sl2();
            assert_eq!(sigma(&Mat2::identity(), &g, 5), 1);
            assert_eq!(sigma(&g, &Mat2::identity(), 5), 1);
        }
    }

    #[test]
    fn torus_relations_from_cocycle() {
        // The four structural relations for torus and Weyl elements.
        let ps = [2u64, 3, 5, 7];
        let vals = [
            rat(1),
            rat(2),
            rat(3),
            rat(-1),
            rat_frac(1, 3),
            rat(6),
            rat_frac(-2, 5),
        ];
        for &p in &ps {
            for s in &vals {
                for t in &vals {
                    let hs = Mat2::torus(s.clone());
                    let ht = Mat2::torus(t.clone());
                    let ws = Mat2::weyl(s.clone());
                    let wt = Mat2::weyl(t.clone());
                    let pf = Place::Finite(p);
                    assert_eq!(sigma(&hs, &ht, p), hilbert(s, t, pf).unwrap());
                    assert_eq!(sigma(&ws, &wt, p), hilbert(s, t, pf).unwrap());
                    assert_eq!(sigma(&hs, &wt, p), hilbert(s, &-t.clone(), pf).unwrap());
                    assert_eq!(sigma(&ws, &ht, p), hilbert(&-s.clone(), t, pf).unwrap());
                }
            }
        }
    }

    #[test]
    fn cocycle_identity_random() {
        for &p in &[2u64, 3, 5, 7] {
            assert_eq!(
                cocycle_fuzz(p, 300, 42 + p),
                0,
                "cocycle identity failed at p={}",
                p
            );
        }
    }

    #[test]
    fn meta_mul_examples() {
        let p = 3;
        let h3 = meta(Mat2::torus(rat(3)), 1, p);
        let sq = meta_mul(&h3, &h3).unwrap();
        assert_eq!(sq.m, Mat2::torus(rat(9)));
        assert_eq!(sq.eps, -1);

        let id = MetaElement::identity(p);
        let g = meta(Mat2::weyl(rat(1)), -1, p);
        assert_eq!(meta_mul(&id, &g).unwrap(), g);

        let w = meta(Mat2::weyl(rat(1)), 1, p);
        let w2 = meta_mul(&w, &w).unwrap();
        assert_eq!(w2.m, Mat2::torus(rat(-1)));
        assert_eq!(w2.eps, 1);

        let other = meta(Mat2::identity(), 1, 5);
        assert_eq!(meta_mul(&h3, &other), Err(MetaError::PlaceMismatch));
    }

    #[test]
    fn meta_inv_cases_and_oracle() {
        // h(p^n) with odd n picks up (-1|p).
        for &p in &[3u64, 5, 7] {
            for n in [-3i64, -1, 1, 3] {
                let x = meta(Mat2::torus(pow_rat(p, n)), 1, p);
                let xi = meta_inv(&x);
                assert_eq!(xi.m, Mat2::torus(pow_rat(p, -n)));
                assert_eq!(xi.eps, kronecker_i64(-1, p as i64));
            }
            for n in [-2i64, 0, 2] {
                let x = meta(Mat2::torus(pow_rat(p, n)), 1, p);
                assert_eq!(meta_inv(&x).eps, 1);
            }
        }
        // x(s) family inverts with trivial sign.
        let x = meta(Mat2::upper(rat_frac(5, 9)), 1, 3);
        let xi = meta_inv(&x);
        assert_eq!(xi.m, Mat2::upper(rat_frac(-5, 9)));
        assert_eq!(xi.eps, 1);
        // central sign is its own inverse
        let c = MetaElement::central_sign(3);
        assert_eq!(meta_inv(&c), c);

        // Case-list sign agrees with sigma(A, A^{-1}) and gives a two-sided
        // inverse, on random elements.
        for &p in &[2u64, 3, 5, 7] {
            let mut s = MatrixSampler::new(p, 1000 + p);
            for _ in 0..200 {
                let g = s.sl2();
                assert_eq!(
                    inversion_sigma(&g, p),
                    sigma(&g, &g.inv(), p),
                    "g={:?} p={}",
                    g,
                    p
                );
                let x = meta(g, if s.next_u64() % 2 == 0 { 1 } else { -1 }, p);
                let xi = meta_inv(&x);
                assert_eq!(meta_mul(&x, &xi).unwrap(), MetaElement::identity(p));
                assert_eq!(meta_mul(&xi, &x).unwrap(), MetaElement::identity(p));
            }
        }
    }

    #[test]
    fn meta_mul_associativity() {
        for &p in &[2u64, 3, 5, 7] {
            let mut s = MatrixSampler::new(p, 99 + p);
            for _ in 0..150 {
                let x = meta(s.sl2(), 1, p);
                let y = meta(s.sl2(), -1, p);
                let z = meta(s.sl2(), 1, p);
                let l = meta_mul(&meta_mul(&x, &y).unwrap(), &z).unwrap();
                let r = meta_mul(&x, &meta_mul(&y, &z).unwrap()).unwrap();
                assert_eq!(l, r);
            }
        }
    }

    #[test]
    fn commutator_sigma_against_direct_composition() {
        for &p in &[2u64, 3, 5, 7] {
            let mut s = MatrixSampler::new(p, 555 + p);
            for _ in 0..120 {
                let a = s.sl2();
                let b = s.sl2();
                let xa = meta(a.clone(), 1, p);
                let xb = meta(b.clone(), 1, p);
                // [(B,1)^{-1}, (A,1)^{-1}] computed directly in the cover
                let direct = meta_mul(
                    &meta_mul(&meta_inv(&xb), &meta_inv(&xa)).unwrap(),
                    &meta_mul(&xb, &xa).unwrap(),
                )
                .unwrap();
                assert_eq!(direct.m, b.inv().mul(&a.inv()).mul(&b).mul(&a));
                assert_eq!(
                    commutator_sigma(&a, &b, p),
                    direct.eps,
                    "a={:?} b={:?} p={}",
                    a,
                    b,
                    p
                );
                // independence of the epsilon components
                let direct2 = meta_mul(
                    &meta_mul(
                        &meta_inv(&meta(b.clone(), -1, p)),
                        &meta_inv(&meta(a.clone(), -1, p)),
                    )
                    .unwrap(),
                    &meta_mul(&meta(b.clone(), -1, p), &meta(a.clone(), -1, p)).unwrap(),
                )
                .unwrap();
                assert_eq!(direct.eps, direct2.eps);
            }
        }
    }

    #[test]
    fn commutator_sigma_closed_forms() {
        // For B in the unipotent/torus families the sign is s_p(B^-1 A^-1 B A).
        for &p in &[3u64, 5, 7, 2] {
            let mut smp = MatrixSampler::new(p, 777 + p);
            for _ in 0..100 {
                let a = smp.sl2();
                let which = smp.next_u64() % 3;
                let b = match which {
                    0 => Mat2::upper(smp.small_rat()),
                    1 => {
                        let mut u = smp.small_rat();
                        if u.is_zero() {
                            u = rat(2);
                        }
                        Mat2::torus(u)
                    }
                    _ => Mat2::lower(smp.small_rat()),
                };
                let comm = b.inv().mul(&a.inv()).mul(&b).mul(&a);
                assert_eq!(
                    commutator_sigma(&a, &b, p),
                    s_factor(&comm, p),
                    "closed form failed: a={:?} b={:?} p={}",
                    a,
                    b,
                    p
                );
            }
        }
    }

    #[test]
    fn commutator_trivial_cases() {
        // B = h(+-1) commutes.
        for &p in &[3u64, 5] {
            let mut s = MatrixSampler::new(p, 31);
            for _ in 0..20 {
                let a = s.sl2();
                assert_eq!(commutator_sigma(&a, &Mat2::torus(rat(1)), p), 1);
                assert_eq!(commutator_sigma(&a, &Mat2::torus(rat(-1)), p), 1);
            }
        }
        // A = h(p^n), B = x(s) with ord_p(s) >= 2n gives a trivial commutator sign.
        for &p in &[3u64, 5] {
            for n in 0..3i64 {
                let a = Mat2::torus(pow_rat(p, n));
                let s = pow_rat(p, 2 * n) * rat(4);
                assert_eq!(commutator_sigma(&a, &Mat2::upper(s), p), 1);
            }
        }
    }

    #[test]
    fn k0_k1_membership() {
        assert!(in_k0(&Mat2::new(rat(1), rat(1), rat(3), rat(4)), 3, 1));
        assert!(!in_k0(&Mat2::lower(rat(1)), 3, 1));
        assert!(!in_k0(&Mat2::torus(rat(3)), 3, 1)); // entry 1/3
        assert!(in_k1(&Mat2::new(rat(1), rat(1), rat(3), rat(4)), 3, 1));
        assert!(!in_k1(&Mat2::new(rat(2), rat(1), rat(3), rat(2)), 3, 1));
        assert!(in_k0(&Mat2::lower(rat(4)), 2, 2));
        assert!(!in_k0(&Mat2::lower(rat(2)), 2, 2));
    }

    #[test]
    fn triangular_decomposition() {
        // c = 0 gives delta = 1.
        let x = meta(Mat2::upper(rat(4)), 1, 3);
        let (s, u, t, d) = triangular_decompose(&x, 1).unwrap();
        assert_eq!((s, u, t, d), (rat(4), rat(1), rat(0), 1));

        // [[1,1],[p,1+p]] has delta = (1+p, -1)_p = 1.
        for &p in &[3u64, 5, 7] {
            let g = Mat2::new(rat(1), rat(1), rat(p as i64), rat(1 + p as i64));
            let x = meta(g, 1, p);
            let (_, _, _, d) = triangular_decompose(&x, 1).unwrap();
            assert_eq!(d, 1);
        }

        // (I, -1) decomposes with delta = 1 and the sign carried through.
        let c = MetaElement::central_sign(3);
        let (s, u, t, d) = triangular_decompose(&c, 1).unwrap();
        assert_eq!((s, u, t, d), (rat(0), rat(1), rat(0), 1));

        // reconstruction: (A, eps) = (x(s),1)(h(u),1)(y(t),1)(I, eps*delta)
        for &p in &[2u64, 3, 5, 7] {
            let e = if p == 2 { 2 } else { 1 };
            let mut smp = MatrixSampler::new(p, 4242 + p);
            for _ in 0..150 {
                let g = smp.k0(e);
                let eps = if smp.next_u64() % 2 == 0 { 1 } else { -1 };
                let x = meta(g, eps, p);
                let (s, u, t, d) = triangular_decompose(&x, e).unwrap();
                let rebuilt = meta_mul(
                    &meta_mul(
                        &meta_mul(&meta(Mat2::upper(s), 1, p), &meta(Mat2::torus(u), 1, p))
                            .unwrap(),
                        &meta(Mat2::lower(t), 1, p),
                    )
                    .unwrap(),
                    &meta(Mat2::identity(), eps * d, p),
                )
                .unwrap();
                assert_eq!(rebuilt, x);
            }
        }

        let bad = meta(Mat2::lower(rat(1)), 1, 3);
        assert_eq!(triangular_decompose(&bad, 1), Err(MetaError::NotInK0));
    }

    #[test]
    fn gamma_eval_examples() {
        // gamma trivial, odd p, (h(p),1) -> eps_p
        for &p in &[3u64, 5, 7] {
            let chi = LocalCharacter::odd_trivial(p);
            let x = meta(Mat2::torus(rat(p as i64)), 1, p);
            assert_eq!(gamma_eval(&chi, &x).unwrap(), eps_p(p));
        }
        // Legendre character is trivial on K1^p(p).
        let chi = LocalCharacter::odd_legendre(5);
        let mut s = MatrixSampler::new(5, 9);
        for _ in 0..50 {
            let g = s.k0(1);
            if in_k1(&g, 5, 1) {
                assert_eq!(gamma_eval(&chi, &meta(g, 1, 5)).unwrap(), CycQ8::one());
            }
        }
        // genuineness: (I,-1) -> -1
        for chi in [
            LocalCharacter::odd_trivial(3),
            LocalCharacter::odd_legendre(3),
            LocalCharacter::two_adic(0),
            LocalCharacter::two_adic(1),
        ] {
            let c = MetaElement::central_sign(chi.place);
            assert_eq!(gamma_eval(&chi, &c).unwrap(), CycQ8::from_int(-1));
        }
        // p = 2, k = 0 (mod 4): gamma((w(1),1)) = (1 - i)/sqrt(2) = zeta^{-1} = -zeta^3
        let chi = LocalCharacter::two_adic(0);
        let w = meta(Mat2::weyl(rat(1)), 1, 2);
        let want = CycQ8::new(rat_int(0), rat_int(0), rat_int(0), rat_int(-1));
        assert_eq!(gamma_eval(&chi, &w).unwrap(), want);
        // and for odd k it is (1 + i)/sqrt(2) = zeta
        let chi = LocalCharacter::two_adic(1);
        assert_eq!(gamma_eval(&chi, &w).unwrap(), CycQ8::zeta());
        // gamma((-I,1)) = -i^{2k+1}
        for k in 0..4u32 {
            let chi = LocalCharacter::two_adic(k);
            let mi = meta(Mat2::torus(rat(-1)), 1, 2);
            let want = if k % 2 == 0 {
                CycQ8::i().neg()
            } else {
                CycQ8::i()
            };
            assert_eq!(gamma_eval(&chi, &mi).unwrap(), want);
        }
        // outside the domain
        let chi = LocalCharacter::odd_trivial(3);
        let out = meta(Mat2::new(rat_frac(1, 3), rat(0), rat(1), rat(3)), 1, 3);
        assert_eq!(gamma_eval(&chi, &out), Err(MetaError::OutsideDomain));
    }

    #[test]
    fn gamma_eval_multiplicative_on_k0bar() {
        for chi in [
            LocalCharacter::odd_trivial(3),
            LocalCharacter::odd_legendre(3),
            LocalCharacter::odd_trivial(7),
            LocalCharacter::odd_legendre(7),
            LocalCharacter::two_adic(0),
            LocalCharacter::two_adic(1),
            LocalCharacter::two_adic(2),
            LocalCharacter::two_adic(3),
        ] {
            let p = chi.place;
            let e = chi.level_exponent();
            let mut s = MatrixSampler::new(p, 2024 + p + chi.level_exponent() as u64);
            for _ in 0..120 {
                let x = meta(s.k0(e), if s.next_u64() % 2 == 0 { 1 } else { -1 }, p);
                let y = meta(s.k0(e), if s.next_u64() % 2 == 0 { 1 } else { -1 }, p);
                let xy = meta_mul(&x, &y).unwrap();
                let gx = gamma_eval(&chi, &x).unwrap();
                let gy = gamma_eval(&chi, &y).unwrap();
                let gxy = gamma_eval(&chi, &xy).unwrap();
                assert_eq!(gxy, gx.mul(&gy), "chi={:?}", chi);
            }
        }
    }

    #[test]
    fn normalizer_values_odd_p() {
        let chi = LocalCharacter::odd_trivial(3);
        // ord even -> 1
        let x = meta(Mat2::torus(rat(9)), 1, 3);
        assert_eq!(gamma_eval(&chi, &x).unwrap(), CycQ8::one());
        // w(p^-1): eps_p * (-1|p)
        let w = meta(Mat2::weyl(rat_frac(1, 3)), 1, 3);
        let want = eps_p(3).scale(&rat_int(kronecker_i64(-1, 3) as i64));
        assert_eq!(gamma_eval(&chi, &w).unwrap(), want);
    }
}
