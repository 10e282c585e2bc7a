//! The Shimura lift Sh_t from weight k + 1/2 to weight 2k, and the
//! coefficient-level Dirichlet series identity that characterizes the lift of
//! an eigenform against its newform.

use std::fmt;

use num_integer::Roots;
use num_traits::Zero;

use crate::arith::{kronecker, kronecker_i64, Int, Rat};
use crate::qexp::QExpansion;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShimuraError {
    /// Not enough coefficients of the input are known.
    PrecisionExhausted,
    /// t must be squarefree and positive.
    NotSquarefree(u64),
    /// D must be a fundamental discriminant with (-1)^k D > 0.
    BadDiscriminant(i64),
}

impl fmt::Display for ShimuraError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShimuraError::PrecisionExhausted => write!(f, "insufficient precision for the lift"),
            ShimuraError::NotSquarefree(t) => write!(f, "{} is not squarefree", t),
            ShimuraError::BadDiscriminant(d) => {
                write!(f, "{} is not an admissible fundamental discriminant", d)
            }
        }
    }
}

impl std::error::Error for ShimuraError {}

pub fn is_squarefree(n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut n = n;
    let mut d = 2u64;
    while d * d <= n {
        if n % (d * d) == 0 {
            return false;
        }
        while n % d == 0 {
            n /= d;
        }
        d += 1;
    }
    true
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    let m = d.rem_euclid(4);
    if m == 1 {
        return is_squarefree(d.unsigned_abs());
    }
    if m == 0 {
        let q = d / 4;
        let qm = q.rem_euclid(4);
        return (qm == 2 || qm == 3) && is_squarefree(q.unsigned_abs());
    }
    false
}

/// Twist character of the lift at the divisor d: the Kronecker product
/// ((-1)^k | d)(t | d) taken as a Dirichlet character modulo 4 t M, so it
/// vanishes on every d sharing a factor with the level. Keeping the bare
/// Kronecker values at such d breaks Hecke equivariance: at d = 2 the U_4/U_2
/// intertwining fails, and at odd p | M the U_{p^2}/U_p intertwining does.
fn twist(t: u64, k: u32, d: u64, level: u64) -> i32 {
    if gcd(d, level) != 1 {
        return 0;
    }
    let s1 = if k % 2 == 0 {
        1
    } else {
        kronecker_i64(-1, d as i64)
    };
    s1 * kronecker_i64(t as i64, d as i64)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Shimura lift for forms of the given level (4M):
/// A_n = sum_{d | n} chi_{t,k}(d) d^{k-1} a(t n^2 / d^2), with output
/// precision floor(sqrt(prec / t)).
pub fn sh_lift(f: &QExpansion, t: u64, k: u32, level: u64) -> Result<QExpansion, ShimuraError> {
    if !is_squarefree(t) {
        return Err(ShimuraError::NotSquarefree(t));
    }
    if f.prec() < t {
        return Err(ShimuraError::PrecisionExhausted);
    }
    let out_prec = (f.prec() / t).sqrt();
    let mut out = QExpansion::zero(out_prec);
    for n in 1..=out_prec {
        let mut acc = Rat::zero();
        for d in 1..=n {
            if n % d != 0 {
                continue;
            }
            let chi = twist(t, k, d, level);
            if chi == 0 {
                continue;
            }
            let idx = t * (n / d) * (n / d);
            let a = f.get(idx).expect("index bounded by t*out_prec^2 <= prec");
            if a.is_zero() {
                continue;
            }
            let dk = Int::from(d).pow(k - 1) * Int::from(chi);
            acc += a * Rat::from_integer(dk);
        }
        out.set(n, acc);
    }
    Ok(out)
}

/// Coefficient form of the L-series identity: for a fundamental discriminant
/// D with (-1)^k D > 0 and F normalized (A_1 = 1), checks
/// a(|D|) A_n = sum_{d | n} (D|d) d^{k-1} a(|D| (n/d)^2) for every n within
/// reach of both precisions, with the character (D|.) taken modulo the level
/// (it vanishes on d sharing a factor with it, matching the lift's twist;
/// with the bare Kronecker values the identity fails at n divisible by a
/// level prime). Returns false at the first failing index.
pub fn lseries_identity_check(
    f: &QExpansion,
    big_f: &QExpansion,
    d_disc: i64,
    k: u32,
    level: u64,
) -> Result<bool, ShimuraError> {
    if !is_fundamental_discriminant(d_disc) || (k % 2 == 0) != (d_disc > 0) {
        return Err(ShimuraError::BadDiscriminant(d_disc));
    }
    let abs_d = d_disc.unsigned_abs();
    let n_max = (f.prec() / abs_d).sqrt().min(big_f.prec());
    if n_max < 1 {
        return Err(ShimuraError::PrecisionExhausted);
    }
    let a_d = f.get(abs_d).expect("|D| <= prec");
    for n in 1..=n_max {
        let mut rhs = Rat::zero();
        for d in 1..=n {
            if n % d != 0 || gcd(d, level) != 1 {
                continue;
            }
            let chi = kronecker(&Int::from(d_disc), &Int::from(d));
            if chi == 0 {
                continue;
            }
            let m = n / d;
            let a = f.get(abs_d * m * m).unwrap();
            if a.is_zero() {
                continue;
            }
            rhs += a * Rat::from_integer(Int::from(d).pow(k - 1) * Int::from(chi));
        }
        let lhs = &a_d * big_f.get(n).unwrap();
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat_int;
    use crate::qexp::{self, QExpansion};

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
    fn squarefree_and_discriminants() {
        assert!(is_squarefree(1) && is_squarefree(6) && is_squarefree(105));
        assert!(!is_squarefree(4) && !is_squarefree(18) && !is_squarefree(0));
        assert!(is_fundamental_discriminant(-4));
        assert!(is_fundamental_discriminant(-3));
        assert!(is_fundamental_discriminant(5));
        assert!(is_fundamental_discriminant(8));
        assert!(!is_fundamental_discriminant(1));
        assert!(!is_fundamental_discriminant(-2));
        assert!(is_fundamental_discriminant(12));
        assert!(!is_fundamental_discriminant(20));
        assert!(!is_fundamental_discriminant(9));
    }

    #[test]
    fn lift_frozen_values() {
        // Sh_1 of the level-28 generator at k = 1: A_1 = 1, A_2 = a_4 = -1,
        // A_3 = a_9 + (-1|3) a_1 = -2.
        let f = f28_printed();
        let lift = sh_lift(&f, 1, 1, 28).unwrap();
        assert_eq!(lift.prec(), 4);
        assert_eq!(lift.get(1).unwrap(), rat_int(1));
        assert_eq!(lift.get(2).unwrap(), rat_int(-1));
        assert_eq!(lift.get(3).unwrap(), rat_int(-2));
        // A_1 = a_t always
        for t in [1u64, 2, 7] {
            let lift = sh_lift(&f, t, 1, 28).unwrap();
            if lift.prec() >= 1 {
                assert_eq!(lift.get(1).unwrap(), f.get(t).unwrap());
            }
        }
        // zero in, zero out
        let z = QExpansion::zero(100);
        assert!(sh_lift(&z, 1, 1, 28).unwrap().is_zero_series());
        // squarefree guard
        assert_eq!(sh_lift(&f, 4, 1, 28), Err(ShimuraError::NotSquarefree(4)));
    }

    #[test]
    fn lift_is_linear() {
        let f = f28_printed();
        let g = QExpansion::from_int_coeffs(&[(1, 3), (4, -1), (9, 2), (12, 5)], 21);
        let sum = qexp::add(&f, &g);
        let l = sh_lift(&sum, 1, 1, 28).unwrap();
        let lf = sh_lift(&f, 1, 1, 28).unwrap();
        let lg = sh_lift(&g, 1, 1, 28).unwrap();
        assert_eq!(l, qexp::add(&lf, &lg));
        let l2 = sh_lift(&qexp::scale(&rat_int(7), &f), 1, 1, 28).unwrap();
        assert_eq!(l2, qexp::scale(&rat_int(7), &lf));
    }

    #[test]
    fn even_divisor_twist_vanishes() {
        // With the bare Kronecker convention A_2 of the level-28 lift would be
        // a_4 + (-1|2)(1|2) a_1 = 0; equivariance under U_4 / U_2 forces -1.
        let f = f28_printed();
        let lift = sh_lift(&f, 1, 1, 28).unwrap();
        let u4f = qexp::u_op(4, &f);
        let lift_u4 = sh_lift(&u4f, 1, 1, 28).unwrap();
        let u2_lift = qexp::u_op(2, &lift);
        let m = lift_u4.prec().min(u2_lift.prec());
        assert!(m >= 1);
        assert_eq!(lift_u4.truncate(m), u2_lift.truncate(m));
    }

    #[test]
    fn lseries_identity_on_printed_data() {
        let f = f28_printed();
        let lift = sh_lift(&f, 1, 1, 28).unwrap(); // normalized: A_1 = 1
        assert_eq!(lseries_identity_check(&f, &lift, -4, 1, 28), Ok(true));
        // falsification probe: corrupt one coefficient of the lift
        let mut bad = lift.clone();
        bad.set(2, rat_int(5));
        assert_eq!(lseries_identity_check(&f, &bad, -4, 1, 28), Ok(false));
        // guard: D of the wrong sign for the weight
        assert!(lseries_identity_check(&f, &lift, 5, 1, 28).is_err());
    }
}
