//! Exact linear algebra over the big rationals: reduced echelon forms with
//! recorded transformations, kernels, characteristic polynomials, and
//! rational eigenvalue extraction for the decomposition machinery.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{Int, Rat};

pub type Row = Vec<Rat>;

/// Reduced row echelon data for a list of row vectors: `reduced` holds the
/// nonzero RREF rows, `pivots` their pivot column indices, and `transform`
/// the change of basis with reduced[i] = sum_j transform[i][j] * input[j].
pub struct Echelon {
    pub reduced: Vec<Row>,
    pub pivots: Vec<usize>,
    pub transform: Vec<Row>,
}

pub fn echelonize(rows: &[Row]) -> Echelon {
    let n = rows.len();
    let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut work: Vec<Row> = rows
        .iter()
        .map(|r| {
            let mut v = r.clone();
            v.resize(width, Rat::zero());
            v
        })
        .collect();
    let mut trans: Vec<Row> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rat::one() } else { Rat::zero() })
                .collect()
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for col in 0..width {
        let Some(pr) = (r..n).find(|&i| !work[i][col].is_zero()) else {
            continue;
        };
        work.swap(r, pr);
        trans.swap(r, pr);
        let inv = work[r][col].clone().recip();
        for x in work[r].iter_mut() {
            *x *= &inv;
        }
        for x in trans[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != r && !work[i][col].is_zero() {
                let f = work[i][col].clone();
                for c in 0..width {
                    let t = &work[r][c] * &f;
                    work[i][c] -= t;
                }
                for c in 0..n {
                    let t = &trans[r][c] * &f;
                    trans[i][c] -= t;
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == n {
            break;
        }
    }
    work.truncate(r);
    trans.truncate(r);
    Echelon {
        reduced: work,
        pivots,
        transform: trans,
    }
}

pub fn rank(rows: &[Row]) -> usize {
    echelonize(rows).reduced.len()
}

/// Solves sum_j x_j rows[j] = target exactly, if target lies in the row span.
/// The echelon must have been produced from `rows`.
pub fn coords_in_span(ech: &Echelon, rows: &[Row], target: &Row) -> Option<Row> {
    let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    if target.len() > width && target[width..].iter().any(|c| !c.is_zero()) {
        return None;
    }
    // coefficients against the reduced rows are read off at the pivots
    let y: Vec<Rat> = ech
        .pivots
        .iter()
        .map(|&c| target.get(c).cloned().unwrap_or_else(Rat::zero))
        .collect();
    // translate to the original rows
    let n = rows.len();
    let mut x = vec![Rat::zero(); n];
    for (i, yi) in y.iter().enumerate() {
        if yi.is_zero() {
            continue;
        }
        for j in 0..n {
            let t = yi * &ech.transform[i][j];
            x[j] += t;
        }
    }
    // exact verification over the full width
    for c in 0..width.max(target.len()) {
        let mut s = Rat::zero();
        for (j, xj) in x.iter().enumerate() {
            if !xj.is_zero() {
                if let Some(v) = rows[j].get(c) {
                    s += xj * v;
                }
            }
        }
        let t = target.get(c).cloned().unwrap_or_else(Rat::zero);
        if s != t {
            return None;
        }
    }
    Some(x)
}

/// Basis of the right kernel {x : A x = 0} of an m x n matrix given by rows.
pub fn kernel(a: &[Row], n_cols: usize) -> Vec<Row> {
    let ech = echelonize(a);
    let pivot_set: std::collections::BTreeSet<usize> = ech.pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..n_cols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![Rat::zero(); n_cols];
        v[free] = Rat::one();
        for (i, &pc) in ech.pivots.iter().enumerate() {
            let coeff = ech.reduced[i].get(free).cloned().unwrap_or_else(Rat::zero);
            v[pc] = -coeff;
        }
        basis.push(v);
    }
    basis
}

pub fn mat_mul(a: &[Row], b: &[Row]) -> Vec<Row> {
    let n = a.len();
    let m = if b.is_empty() { 0 } else { b[0].len() };
    let mut out = vec![vec![Rat::zero(); m]; n];
    for i in 0..n {
        for (k, aik) in a[i].iter().enumerate() {
            if aik.is_zero() {
                continue;
            }
            for j in 0..m {
                let t = aik * &b[k][j];
                out[i][j] += t;
            }
        }
    }
    out
}

pub fn mat_vec(a: &[Row], v: &[Rat]) -> Row {
    a.iter()
        .map(|row| {
            let mut s = Rat::zero();
            for (x, y) in row.iter().zip(v) {
                if !x.is_zero() && !y.is_zero() {
                    s += x * y;
                }
            }
            s
        })
        .collect()
}

pub fn identity(n: usize) -> Vec<Row> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rat::one() } else { Rat::zero() })
                .collect()
        })
        .collect()
}

pub fn mat_sub(a: &[Row], b: &[Row]) -> Vec<Row> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
        .collect()
}

pub fn mat_scale(a: &[Row], c: &Rat) -> Vec<Row> {
    a.iter()
        .map(|r| r.iter().map(|x| x * c).collect())
        .collect()
}

/// Characteristic polynomial det(xI - A) by the Faddeev-LeVerrier recursion,
/// exact over Q. Returns coefficients [c_0, ..., c_n] with c_n = 1.
pub fn charpoly(a: &[Row]) -> Vec<Rat> {
    let n = a.len();
    let mut coeffs = vec![Rat::zero(); n + 1];
    coeffs[n] = Rat::one();
    if n == 0 {
        return coeffs;
    }
    let mut m = a.to_vec();
    for k in 1..=n {
        let tr: Rat = (0..n)
            .map(|i| m[i][i].clone())
            .fold(Rat::zero(), |s, x| s + x);
        let c = -tr / Rat::from_integer(Int::from(k as i64));
        coeffs[n - k] = c.clone();
        if k == n {
            break;
        }
        for i in 0..n {
            m[i][i] += &c;
        }
        m = mat_mul(a, &m);
    }
    coeffs
}

/// Integer roots of a monic integer polynomial, found by root-scanning modulo
/// two large primes, CRT lifting, and exact verification; each root is
/// returned with its multiplicity.
fn integer_roots_monic(poly: &[Int]) -> Vec<(Int, usize)> {
    let mut roots = Vec::new();
    let mut p = poly.to_vec();
    loop {
        if p.len() <= 1 {
            break;
        }
        // root bound (Cauchy): 1 + max |c_i|
        let bound: BigInt = p
            .iter()
            .map(|c| c.abs())
            .fold(BigInt::zero(), |m, c| m.max(c))
            + BigInt::one();
        let m1: u64 = 1_000_003;
        let m2: u64 = 1_000_033;
        let mut candidates = Vec::new();
        let residues = |modulus: u64| -> Vec<u64> {
            let pm: Vec<u64> = p
                .iter()
                .map(|c| {
                    let r = c.mod_floor(&BigInt::from(modulus));
                    r.to_u64_digits().1.first().copied().unwrap_or(0)
                })
                .collect();
            let mut rs = Vec::new();
            for x in 0..modulus {
                let mut acc: u128 = 0;
                for c in pm.iter().rev() {
                    acc = (acc * x as u128 + *c as u128) % modulus as u128;
                }
                if acc == 0 {
                    rs.push(x);
                }
            }
            rs
        };
        let r1 = residues(m1);
        if r1.is_empty() {
            break;
        }
        let r2 = residues(m2);
        if r2.is_empty() {
            break;
        }
        let mm = BigInt::from(m1) * BigInt::from(m2);
        // CRT: x = a (mod m1), x = b (mod m2)
        let m1b = BigInt::from(m1);
        let m2b = BigInt::from(m2);
        let inv_m1_mod_m2 = crate::arith::mod_inverse(&m1b, &m2b).unwrap();
        for &a in &r1 {
            for &b in &r2 {
                let t = ((BigInt::from(b) - BigInt::from(a)) * &inv_m1_mod_m2).mod_floor(&m2b);
                let mut x = BigInt::from(a) + t * &m1b; // in [0, m1 m2)
                if &x * 2 > mm.clone() {
                    x -= &mm;
                }
                if x.abs() <= bound {
                    candidates.push(x);
                }
            }
        }
        candidates.sort();
        candidates.dedup();
        let mut found = None;
        for cand in candidates {
            let mut acc = BigInt::zero();
            for c in p.iter().rev() {
                acc = acc * &cand + c;
            }
            if acc.is_zero() {
                found = Some(cand);
                break;
            }
        }
        let Some(root) = found else {
            break;
        };
        // deflate by (x - root) as many times as it divides
        let mut mult = 0usize;
        loop {
            let mut q = vec![BigInt::zero(); p.len() - 1];
            let mut carry = BigInt::zero();
            for i in (0..p.len() - 1).rev() {
                carry = &p[i + 1] + &carry * &root;
                q[i] = carry.clone();
            }
            let rem = &p[0] + &carry * &root;
            if rem.is_zero() {
                p = q;
                mult += 1;
                if p.len() <= 1 {
                    break;
                }
            } else {
                break;
            }
        }
        roots.push((root, mult));
    }
    roots.sort_by(|a, b| a.0.cmp(&b.0));
    roots
}

/// Rational eigenvalue analysis of a rational square matrix: the rational
/// roots of its characteristic polynomial with multiplicities, plus the
/// residual factor (over the integers, in the cleared variable) when the
/// polynomial does not split rationally.
pub struct RationalSpectrum {
    pub eigenvalues: Vec<(Rat, usize)>,
    /// Degree of the part of the characteristic polynomial without rational
    /// roots (0 when the matrix splits rationally).
    pub residual_degree: usize,
    /// Residual factor coefficients after substituting x -> x/denominator and
    /// clearing; stored for reporting.
    pub residual: Vec<Int>,
}

pub fn rational_spectrum(a: &[Row]) -> RationalSpectrum {
    let n = a.len();
    // clear denominators: eigenvalues of D*A are D*lambda and the charpoly of
    // the integer matrix is monic integral, so every rational eigenvalue of A
    // appears as an integer root.
    let mut d = Int::one();
    for row in a {
        for x in row {
            d = d.lcm(x.denom());
        }
    }
    let da: Vec<Row> = mat_scale(a, &Rat::from_integer(d.clone()));
    let cp = charpoly(&da);
    let cp_int: Vec<Int> = cp
        .iter()
        .map(|c| {
            assert!(
                c.denom().is_one(),
                "charpoly of an integer matrix must be integral"
            );
            c.numer().clone()
        })
        .collect();
    let roots = integer_roots_monic(&cp_int);
    let eigenvalues: Vec<(Rat, usize)> = roots
        .iter()
        .map(|(r, m)| (Rat::new(r.clone(), d.clone()), *m))
        .collect();
    let found: usize = roots.iter().map(|(_, m)| m).sum();
    // residual = cp_int / prod (x - r)^m
    let mut residual = cp_int;
    for (r, m) in &roots {
        for _ in 0..*m {
            let mut q = vec![BigInt::zero(); residual.len() - 1];
            let mut carry = BigInt::zero();
            for i in (0..residual.len() - 1).rev() {
                carry = &residual[i + 1] + &carry * r;
                q[i] = carry.clone();
            }
            residual = q;
        }
    }
    RationalSpectrum {
        eigenvalues,
        residual_degree: n - found,
        residual,
    }
}
