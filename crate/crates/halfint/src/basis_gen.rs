//! Self-contained basis generation for level 4 from the theta--F polynomial
//! ring: theta = 1 + 2 sum q^{n^2} (weight 1/2) and F = sum_{n odd}
//! sigma_1(n) q^n (weight 2). The candidate space of weight k + 1/2 is
//!
//!   theta * F * (theta^4 - 16 F) * span{ theta^{2a} F^b : a + 2b = k - 4 },
//!
//! echelonized and then validated: generated series must vanish at infinity
//! and the space must be stable under T_9 and T_25. A failed validation is a
//! hard error, never a silently emitted basis.

use std::fmt;

use num_traits::{One, Zero};

use crate::arith::{rat_int, Rat};
use crate::linalg;
use crate::qexp::{self, QExpansion};
use crate::spaces::{operator_matrix, HalfIntegralSpace, SpaceError, SpaceOp};

#[derive(Debug)]
pub enum BasisGenError {
    /// The requested precision cannot certify the validation checks.
    PrecisionTooLow { needed: u64, available: u64 },
    /// A validation invariant failed; the candidate basis is not emitted.
    ValidationFailed(String),
}

impl fmt::Display for BasisGenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisGenError::PrecisionTooLow { needed, available } => {
                write!(
                    f,
                    "precision {} cannot certify validation (need {})",
                    available, needed
                )
            }
            BasisGenError::ValidationFailed(s) => write!(f, "validation failed: {}", s),
        }
    }
}

impl std::error::Error for BasisGenError {}

/// theta = 1 + 2 q + 2 q^4 + 2 q^9 + ...
pub fn theta_series(prec: u64) -> QExpansion {
    let mut out = QExpansion::zero(prec);
    out.set(0, Rat::one());
    let mut n = 1u64;
    while n * n <= prec {
        out.set(n * n, rat_int(2));
        n += 1;
    }
    out
}

/// F = sum_{n odd} sigma_1(n) q^n = q + 4 q^3 + 6 q^5 + ...
pub fn eis_f(prec: u64) -> QExpansion {
    let mut out = QExpansion::zero(prec);
    for d in 1..=prec {
        if d % 2 == 0 {
            continue;
        }
        let mut m = d;
        while m <= prec {
            if m % 2 == 1 {
                let cur = out.get(m).unwrap();
                out.set(m, cur + rat_int(d as i64));
            }
            m += 2 * d; // odd multiples of d only
        }
    }
    out
}

fn pow_series(f: &QExpansion, e: u32, prec: u64) -> QExpansion {
    let mut acc = QExpansion::zero(prec);
    acc.set(0, Rat::one());
    for _ in 0..e {
        acc = qexp::mul(&acc, f).truncate(prec);
    }
    acc
}

/// Candidate basis of S_{k+1/2}(Gamma0(4)): the cusp generator
/// theta F (theta^4 - 16 F) of weight 9/2 times the weight-(k-4) monomials
/// theta^{2a} F^b, echelonized. Validation (cuspidality at infinity and
/// Hecke stability under T_9 and T_25) is part of the contract.
pub fn gen_space_level4(k: u32, prec: u64) -> Result<HalfIntegralSpace, BasisGenError> {
    if k < 4 {
        return Ok(HalfIntegralSpace::zero_space(k, 4, prec));
    }
    let needed = 25 * crate::spaces::sturm_bound(k, 4);
    if prec < needed {
        return Err(BasisGenError::PrecisionTooLow {
            needed,
            available: prec,
        });
    }
    let theta = theta_series(prec);
    let f = eis_f(prec);
    let theta4 = pow_series(&theta, 4, prec);
    let cusp_gen = qexp::mul(
        &qexp::mul(&theta, &f).truncate(prec),
        &qexp::sub(&theta4, &qexp::scale(&rat_int(16), &f)),
    )
    .truncate(prec);
    let mut monomials = Vec::new();
    let rem = k - 4;
    for b in 0..=(rem / 2) {
        let a = rem - 2 * b;
        let m =
            qexp::mul(&pow_series(&theta, 2 * a, prec), &pow_series(&f, b, prec)).truncate(prec);
        monomials.push(qexp::mul(&cusp_gen, &m).truncate(prec));
    }
    // echelonize the coefficient rows for a reduced basis
    let rows: Vec<Vec<Rat>> = monomials
        .iter()
        .map(|g| (0..=prec).map(|n| g.get(n).unwrap()).collect())
        .collect();
    let ech = linalg::echelonize(&rows);
    let basis: Vec<QExpansion> = ech
        .reduced
        .iter()
        .map(|row| {
            QExpansion::from_coeffs(
                row.iter().enumerate().map(|(n, c)| (n as u64, c.clone())),
                prec,
            )
        })
        .collect();
    if basis.is_empty() {
        return Ok(HalfIntegralSpace::zero_space(k, 4, prec));
    }
    // validation: vanishing at infinity
    for g in &basis {
        if !g.get(0).unwrap().is_zero() {
            return Err(BasisGenError::ValidationFailed(
                "generated series has a nonzero constant term".into(),
            ));
        }
    }
    let space = HalfIntegralSpace::new(k, 4, prec, basis)
        .map_err(|e| BasisGenError::ValidationFailed(format!("{}", e)))?;
    // validation: Hecke stability under T_9 and T_25
    for q in [3u64, 5] {
        match operator_matrix(&space, SpaceOp::THalf { q }) {
            Ok(_) => {}
            Err(SpaceError::ImageEscapesSpan { detail }) => {
                return Err(BasisGenError::ValidationFailed(format!(
                    "candidate space is not T_{}^2-stable: {}",
                    q, detail
                )))
            }
            Err(e) => return Err(BasisGenError::ValidationFailed(format!("{}", e))),
        }
    }
    Ok(space)
}
