//! Truncated formal q-series with exact rational coefficients, and the
//! classical operators acting on them: U_m, V_m, the integral-weight Hecke
//! operator T_p and the half-integral T_{q^2}.
//!
//! Precision bookkeeping is pessimistic and explicit: a QExpansion knows its
//! coefficients for all indices n <= prec and every operation computes the
//! exact output precision. Reading past the precision is a hard error, never
//! a silent zero.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::arith::{kronecker_i64, Int, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QExpError {
    /// Coefficient index beyond the known precision.
    PrecisionExceeded { index: u64, prec: u64 },
}

impl fmt::Display for QExpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QExpError::PrecisionExceeded { index, prec } => {
                write!(
                    f,
                    "coefficient {} requested but only n <= {} are known",
                    index, prec
                )
            }
        }
    }
}

impl std::error::Error for QExpError {}

/// f = sum a_n q^n known exactly for all 0 <= n <= prec; absent indices are 0.
#[derive(Clone, PartialEq, Eq)]
pub struct QExpansion {
    coeffs: BTreeMap<u64, Rat>,
    prec: u64,
}

impl fmt::Debug for QExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q-series(prec {}): ", self.prec)?;
        let mut shown = 0;
        for (n, c) in &self.coeffs {
            if shown >= 8 {
                write!(f, " + ...")?;
                break;
            }
            write!(f, "{}{}*q^{}", if shown == 0 { "" } else { " + " }, c, n)?;
            shown += 1;
        }
        Ok(())
    }
}

impl QExpansion {
    pub fn zero(prec: u64) -> QExpansion {
        QExpansion {
            coeffs: BTreeMap::new(),
            prec,
        }
    }

    /// Builds a series from (index, coefficient) pairs; indices beyond prec
    /// are rejected by assertion.
    pub fn from_coeffs(pairs: impl IntoIterator<Item = (u64, Rat)>, prec: u64) -> QExpansion {
        let mut coeffs = BTreeMap::new();
        for (n, c) in pairs {
            assert!(
                n <= prec,
                "coefficient index {} beyond declared precision {}",
                n,
                prec
            );
            if !c.is_zero() {
                coeffs.insert(n, c);
            }
        }
        QExpansion { coeffs, prec }
    }

    pub fn from_int_coeffs(pairs: &[(u64, i64)], prec: u64) -> QExpansion {
        QExpansion::from_coeffs(
            pairs
                .iter()
                .map(|&(n, c)| (n, Rat::from_integer(Int::from(c)))),
            prec,
        )
    }

    pub fn prec(&self) -> u64 {
        self.prec
    }

    /// The exact coefficient a_n; n must be within the known precision.
    pub fn get(&self, n: u64) -> Result<Rat, QExpError> {
        if n > self.prec {
            return Err(QExpError::PrecisionExceeded {
                index: n,
                prec: self.prec,
            });
        }
        Ok(self.coeffs.get(&n).cloned().unwrap_or_else(Rat::zero))
    }

    pub fn set(&mut self, n: u64, c: Rat) {
        assert!(n <= self.prec);
        if c.is_zero() {
            self.coeffs.remove(&n);
        } else {
            self.coeffs.insert(n, c);
        }
    }

    /// Iterator over the nonzero known coefficients in index order.
    pub fn iter(&self) -> impl Iterator<Item = (&u64, &Rat)> {
        self.coeffs.iter()
    }

    /// Index of the lowest nonzero known coefficient.
    pub fn order(&self) -> Option<u64> {
        self.coeffs.keys().next().copied()
    }

    /// True iff every known coefficient vanishes.
    pub fn is_zero_series(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Restricts the declared precision (dropping coefficients beyond it).
    pub fn truncate(&self, prec: u64) -> QExpansion {
        let coeffs = self
            .coeffs
            .range(..=prec)
            .map(|(n, c)| (*n, c.clone()))
            .collect();
        QExpansion {
            coeffs,
            prec: prec.min(self.prec),
        }
    }
}

pub fn add(f: &QExpansion, g: &QExpansion) -> QExpansion {
    let prec = f.prec.min(g.prec);
    let mut out = QExpansion::zero(prec);
    for (n, c) in f.coeffs.range(..=prec) {
        out.set(*n, c.clone());
    }
    for (n, c) in g.coeffs.range(..=prec) {
        let cur = out.get(*n).unwrap();
        out.set(*n, cur + c);
    }
    out
}

pub fn sub(f: &QExpansion, g: &QExpansion) -> QExpansion {
    add(f, &scale(&-Rat::one(), g))
}

pub fn scale(r: &Rat, f: &QExpansion) -> QExpansion {
    if r.is_zero() {
        return QExpansion::zero(f.prec);
    }
    let mut out = QExpansion::zero(f.prec);
    for (n, c) in &f.coeffs {
        out.set(*n, c * r);
    }
    out
}

/// Exact truncated product. The output precision is
/// min(prec_f + ord(g), prec_g + ord(f)): every reported coefficient of the
/// product only involves known coefficients of the factors.
pub fn mul(f: &QExpansion, g: &QExpansion) -> QExpansion {
    let ord_f = f.order().unwrap_or(f.prec + 1);
    let ord_g = g.order().unwrap_or(g.prec + 1);
    let prec = (f.prec + ord_g).min(g.prec + ord_f);
    let mut acc: BTreeMap<u64, Rat> = BTreeMap::new();
    for (i, ci) in &f.coeffs {
        for (j, cj) in &g.coeffs {
            let n = i + j;
            if n > prec {
                break; // g.coeffs is index-ordered
            }
            let term = ci * cj;
            acc.entry(n).and_modify(|x| *x += &term).or_insert(term);
        }
    }
    acc.retain(|_, v| !v.is_zero());
    QExpansion { coeffs: acc, prec }
}

/// Exact quotient f / g for g with a unit (nonzero) constant term; the output
/// precision is min(prec_f, prec_g).
pub fn div_unit(f: &QExpansion, g: &QExpansion) -> QExpansion {
    let g0 = g.get(0).expect("divisor constant term");
    assert!(!g0.is_zero(), "division requires a unit constant term");
    let prec = f.prec.min(g.prec);
    let mut out = QExpansion::zero(prec);
    for n in 0..=prec {
        // a_n = (f_n - sum_{m<n} out_m g_{n-m}) / g_0
        let mut s = f.get(n).unwrap();
        for (m, om) in out.coeffs.range(..n) {
            let gk = g.get(n - m).unwrap();
            if !gk.is_zero() {
                s -= om * &gk;
            }
        }
        out.set(n, s / &g0);
    }
    out
}

/// U_m: a_n -> a_{mn}. Output precision floor(prec / m).
pub fn u_op(m: u64, f: &QExpansion) -> QExpansion {
    assert!(m >= 1);
    let prec = f.prec / m;
    let mut out = QExpansion::zero(prec);
    for n in 0..=prec {
        let c = f.get(m * n).unwrap();
        out.set(n, c);
    }
    out
}

/// V_m: sends a_n to the coefficient of q^{mn}. Output precision m * prec.
pub fn v_op(m: u64, f: &QExpansion) -> QExpansion {
    assert!(m >= 1);
    let prec = f.prec.saturating_mul(m);
    let mut out = QExpansion::zero(prec);
    for (n, c) in &f.coeffs {
        out.set(n * m, c.clone());
    }
    out
}

/// Integral-weight Hecke operator at a prime p on weight-k2 series:
/// T_p(f)_n = a_{pn} + p^{k2-1} a_{n/p}.
pub fn t_op_integral(p: u64, k2: u32, f: &QExpansion) -> QExpansion {
    assert!(crate::arith::is_prime(p));
    let prec = f.prec / p;
    let pk = Rat::from_integer(Int::from(p).pow(k2 - 1));
    let mut out = QExpansion::zero(prec);
    for n in 1..=prec {
        let mut c = f.get(p * n).unwrap();
        if n % p == 0 {
            c += f.get(n / p).unwrap() * &pk;
        }
        out.set(n, c);
    }
    out
}

/// Half-integral weight Hecke operator T_{q^2} on weight k + 1/2 series of
/// level 4M with trivial character, for a prime q coprime to 2M:
/// T_{q^2}(f)_n = a_{q^2 n} + ((-1)^k n | q) q^{k-1} a_n + q^{2k-1} a_{n/q^2}.
pub fn t_op_half(q: u64, k: u32, f: &QExpansion, level: u64) -> QExpansion {
    assert!(crate::arith::is_prime(q));
    assert!(
        level % 4 == 0,
        "half-integral weight level must be divisible by 4"
    );
    assert!(level % q != 0, "T_{{q^2}} requires q coprime to the level");
    let q2 = q * q;
    let prec = f.prec / q2;
    let qk1 = Rat::from_integer(Int::from(q).pow(k - 1));
    let q2k1 = Rat::from_integer(Int::from(q).pow(2 * k - 1));
    let sign_k = if k % 2 == 0 { 1i64 } else { -1 };
    let mut out = QExpansion::zero(prec);
    for n in 1..=prec {
        let mut c = f.get(q2 * n).unwrap();
        let chi = kronecker_i64(sign_k * n as i64, q as i64);
        if chi != 0 {
            c += f.get(n).unwrap() * &qk1 * Rat::from_integer(Int::from(chi));
        }
        if n % q2 == 0 {
            c += f.get(n / q2).unwrap() * &q2k1;
        }
        out.set(n, c);
    }
    out
}

/// Plus-space coefficient condition: a_n = 0 whenever (-1)^k n = 2 or 3
/// (mod 4), checked for all n within the precision.
pub fn plus_condition(f: &QExpansion, k: u32) -> bool {
    for (n, c) in &f.coeffs {
        if c.is_zero() {
            continue;
        }
        let r = if k % 2 == 0 { n % 4 } else { (4 - n % 4) % 4 };
        if r == 2 || r == 3 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat_frac, rat_int};

    /// The printed truncation of the level-28 weight-3/2 generator, used as a
    /// reference fixture throughout.
    fn f28_printed() -> QExpansion {
        QExpansion::from_int_coeffs(
            &[
                (1, 1),
                (2, -1),
                (4, -1),
                (7, 1),
                (8, 1),
                (9, -1),
                (14, 1),
                (15, -2),
                (16, 1),
                (18, 3),
                (21, -2),
            ],
            21,
        )
    }

    #[test]
    fn add_scale_mul_basics() {
        let f = QExpansion::from_int_coeffs(&[(1, 1), (2, -1)], 5);
        let z = QExpansion::zero(5);
        assert_eq!(add(&f, &z), f);
        let q = QExpansion::from_int_coeffs(&[(1, 1)], 5);
        let q2 = mul(&q, &q);
        assert_eq!(q2.get(2).unwrap(), rat_int(1));
        assert_eq!(q2.prec(), 6); // ord 1 on both sides extends the window
        let s = scale(&rat_int(2), &f);
        assert_eq!(s.get(1).unwrap(), rat_int(2));
        assert_eq!(s.get(2).unwrap(), rat_int(-2));
    }

    #[test]
    fn precision_is_hard() {
        let f = QExpansion::from_int_coeffs(&[(1, 1)], 5);
        assert!(f.get(5).is_ok());
        assert_eq!(
            f.get(6),
            Err(QExpError::PrecisionExceeded { index: 6, prec: 5 })
        );
        // mul precision: both constant terms nonzero -> min of precisions
        let a = QExpansion::from_int_coeffs(&[(0, 1), (1, 1)], 10);
        let b = QExpansion::from_int_coeffs(&[(0, 2)], 7);
        assert_eq!(mul(&a, &b).prec(), 7);
    }

    #[test]
    fn u_v_identities() {
        let f = QExpansion::from_coeffs((1..=30).map(|n| (n, rat_frac(n as i64, 7))), 30);
        let m = 3;
        // U_m V_m = id at reduced precision
        let uv = u_op(m, &v_op(m, &f));
        assert_eq!(uv.truncate(30), f.truncate(uv.prec()));
        // V_m U_m projects onto indices divisible by m
        let vu = v_op(m, &u_op(m, &f));
        for n in 1..=vu.prec().min(30) {
            let want = if n % m == 0 {
                f.get(n).unwrap()
            } else {
                Rat::zero()
            };
            assert_eq!(vu.get(n).unwrap(), want);
        }
        // U compose and V compose
        let a = u_op(2, &u_op(3, &f));
        let b = u_op(6, &f);
        assert_eq!(a, b);
        let a = v_op(2, &v_op(3, &f));
        let b = v_op(6, &f);
        assert_eq!(a, b);
        // V_2(q) = q^2
        let q = QExpansion::from_int_coeffs(&[(1, 1)], 1);
        assert_eq!(v_op(2, &q).get(2).unwrap(), rat_int(1));
    }

    #[test]
    fn t_integral_basics() {
        let z = QExpansion::zero(50);
        assert!(t_op_integral(3, 2, &z).is_zero_series());
        // a_n supported away from multiples of p: T_p picks a_{pn}
        let f = QExpansion::from_int_coeffs(&[(3, 5), (6, 7)], 20);
        let t2 = t_op_integral(2, 2, &f);
        assert_eq!(t2.get(3).unwrap(), rat_int(7));
        assert_eq!(t2.get(1).unwrap(), rat_int(0));
    }

    #[test]
    fn u4_eigenvalue_on_printed_truncation() {
        // U_4 f = -f on the level-28 generator, to the available precision.
        let f = f28_printed();
        let u4 = u_op(4, &f);
        let want = scale(&rat_int(-1), &f).truncate(u4.prec());
        assert_eq!(u4, want);
    }

    #[test]
    fn t9_eigenvalue_on_printed_truncation() {
        // T_9 (k=1, level 28): eigenvalue -2, derivable from the printed
        // coefficients at n = 1, 2.
        let f = f28_printed();
        let t9 = t_op_half(3, 1, &f, 28);
        assert_eq!(t9.prec(), 2);
        assert_eq!(t9.get(1).unwrap(), rat_int(-2)); // a9 + (-1|3) a1 = -1 - 1
        assert_eq!(t9.get(2).unwrap(), rat_int(2)); // a18 + (-2|3) a2 = 3 - 1
        let want = scale(&rat_int(-2), &f).truncate(2);
        assert_eq!(t9, want);
    }

    #[test]
    fn t_half_operators_commute() {
        let f = QExpansion::from_coeffs((1..=400).map(|n| (n, rat_int((n % 11) as i64 - 5))), 400);
        let a = t_op_half(5, 3, &t_op_half(3, 3, &f, 4), 4);
        let b = t_op_half(3, 3, &t_op_half(5, 3, &f, 4), 4);
        assert_eq!(a.prec(), b.prec());
        assert_eq!(a, b);
    }

    #[test]
    fn plus_condition_cases() {
        // k = 8 (even): support must avoid n = 2, 3 (mod 4)
        let h1 = QExpansion::from_int_coeffs(&[(5, 1), (8, 7), (12, -27), (17, -80)], 20);
        assert!(plus_condition(&h1, 8));
        let g1 = QExpansion::from_int_coeffs(&[(1, 1), (3, 21)], 10);
        assert!(!plus_condition(&g1, 8));
        assert!(plus_condition(&QExpansion::zero(10), 8));
        // k = 1 (odd): allowed classes are n = 0, 3 (mod 4); the level-28
        // generator has support in all residue classes.
        assert!(!plus_condition(&f28_printed(), 1));
        let ok = QExpansion::from_int_coeffs(&[(3, 1), (4, 2), (7, -1)], 10);
        assert!(plus_condition(&ok, 1));
    }

    /// Formal normalized Hecke eigenseries of weight k2 with prescribed prime
    /// coefficients, built from the standard recurrences; the independent
    /// oracle for operator tests.
    fn eigen_series(prec: u64, k2: u32, ap: impl Fn(u64) -> i64) -> QExpansion {
        let mut a: Vec<Rat> = vec![Rat::zero(); (prec + 1) as usize];
        if prec >= 1 {
            a[1] = Rat::one();
        }
        let pk = |p: u64| Rat::from_integer(Int::from(p).pow(k2 - 1));
        for n in 2..=prec {
            // factor n = p^r * m
            let mut p = 2;
            while n % p != 0 {
                p += 1;
            }
            let mut pr = 1u64;
            let mut m = n;
            while m % p == 0 {
                m /= p;
                pr *= p;
            }
            if m > 1 {
                let am = a[m as usize].clone();
                let apr = a[pr as usize].clone();
                a[n as usize] = am * apr;
            } else {
                // n = p^r: a_{p^r} = a_p a_{p^{r-1}} - p^{k2-1} a_{p^{r-2}}
                let r = {
                    let mut r = 0;
                    let mut t = n;
                    while t > 1 {
                        t /= p;
                        r += 1;
                    }
                    r
                };
                let ap_v = rat_int(ap(p));
                if r == 1 {
                    a[n as usize] = ap_v;
                } else {
                    let prev = a[(n / p) as usize].clone();
                    let prev2 = a[(n / p / p) as usize].clone();
                    a[n as usize] = ap_v * prev - pk(p) * prev2;
                }
            }
        }
        QExpansion::from_coeffs((1..=prec).map(|n| (n, a[n as usize].clone())), prec)
    }

    #[test]
    fn eigen_series_is_hecke_eigenform() {
        let f = eigen_series(200, 4, |p| (p % 7) as i64 - 3);
        for p in [2u64, 3, 5, 7] {
            let tp = t_op_integral(p, 4, &f);
            let want = scale(&rat_int((p % 7) as i64 - 3), &f).truncate(tp.prec());
            assert_eq!(tp, want, "p={}", p);
        }
    }

    #[test]
    fn u_action_on_shifted_eigenforms() {
        // For a weight-k2 eigenform F with (p, n) = 1:
        //   U_p(V_n F) = a_p V_n F - p^{k2-1} V_{np} F, and U_p(V_{np} F) = V_n F.
        let k2 = 4u32;
        let f = eigen_series(300, k2, |p| match p {
            2 => -1,
            3 => 2,
            5 => 1,
            _ => 0,
        });
        for (p, n) in [(2u64, 3u64), (3, 2), (5, 2), (2, 1)] {
            let ap = rat_int(match p {
                2 => -1,
                3 => 2,
                5 => 1,
                _ => 0,
            });
            let pk = Rat::from_integer(Int::from(p).pow(k2 - 1));
            let vn = v_op(n, &f);
            let vnp = v_op(n * p, &f);
            let lhs = u_op(p, &vn);
            let rhs = sub(&scale(&ap, &vn), &scale(&pk, &vnp));
            let m = lhs.prec().min(rhs.prec());
            assert_eq!(lhs.truncate(m), rhs.truncate(m), "p={} n={}", p, n);
            let lhs = u_op(p, &vnp);
            let m = lhs.prec().min(vn.prec());
            assert_eq!(
                lhs.truncate(m),
                vn.truncate(m),
                "p={} n={} (second identity)",
                p,
                n
            );
        }
    }

    #[test]
    fn division_by_unit_series() {
        let g = QExpansion::from_int_coeffs(&[(0, 1), (1, 2), (4, 2)], 30);
        let f = QExpansion::from_int_coeffs(&[(1, 1), (3, -2), (8, 5)], 30);
        let q = div_unit(&f, &g);
        assert_eq!(mul(&q, &g).truncate(30), f);
    }
}
