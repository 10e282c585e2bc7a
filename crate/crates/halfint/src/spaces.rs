//! Spaces of half-integral weight cusp forms presented by q-expansion bases:
//! exact operator matrices, simultaneous eigenspace decomposition, plus-space
//! extraction by the coefficient condition, newness analysis through the
//! U_{p^2} eigenvalue law, and the minus space as the span of the everywhere-
//! new blocks.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::arith::{Int, Rat};
use crate::linalg::{self, Row};
use crate::qexp::{self, QExpansion};
use crate::shimura::{sh_lift, ShimuraError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpaceError {
    /// Basis vectors are linearly dependent at the available precision.
    DependentBasis,
    /// Mixed precisions or a precision too low to certify the computation.
    PrecisionTooLow { needed: u64, available: u64 },
    /// The image of a basis vector under an operator is not in the span at
    /// the available precision.
    ImageEscapesSpan { detail: String },
    /// A block's newness could not be decided at the available precision.
    UndecidedBlock,
    /// Every Shimura lift of a block vector vanished within precision.
    AllLiftsVanish,
    /// |a_p| exceeds the Ramanujan bound 2 p^{k-1/2}.
    RamanujanViolation,
}

impl fmt::Display for SpaceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceError::DependentBasis => write!(f, "basis is linearly dependent"),
            SpaceError::PrecisionTooLow { needed, available } => {
                write!(f, "precision too low: need {}, have {}", needed, available)
            }
            SpaceError::ImageEscapesSpan { detail } => {
                write!(f, "operator image escapes the span: {}", detail)
            }
            SpaceError::UndecidedBlock => write!(f, "block newness undecided at this precision"),
            SpaceError::AllLiftsVanish => write!(f, "all Shimura lifts vanish within precision"),
            SpaceError::RamanujanViolation => write!(f, "a_p violates the Ramanujan bound"),
        }
    }
}

impl std::error::Error for SpaceError {}

/// Sturm-type certification bound for weight k + 1/2 and level N:
/// ceil((2k+1)/24 * N * prod_{p | N} (1 + 1/p)) + 1.
pub fn sturm_bound(k: u32, level: u64) -> u64 {
    let mut idx = Rat::from_integer(Int::from(level));
    let mut m = level;
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            idx *= Rat::new(Int::from(p + 1), Int::from(p));
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        idx *= Rat::new(Int::from(m + 1), Int::from(m));
    }
    let b = idx * Rat::new(Int::from(2 * k as u64 + 1), Int::from(24));
    let c = b.ceil().to_integer();
    u64::try_from(&c).unwrap() + 1
}

/// A space of weight k + 1/2, level 4M cusp forms presented by a linearly
/// independent q-expansion basis of a common declared precision.
#[derive(Clone)]
pub struct HalfIntegralSpace {
    pub k: u32,
    pub level: u64,
    pub prec: u64,
    pub basis: Vec<QExpansion>,
}

impl fmt::Debug for HalfIntegralSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "S_{{{}+1/2}}(Gamma0({})), dim {}, prec {}",
            self.k,
            self.level,
            self.basis.len(),
            self.prec
        )
    }
}

fn coeff_row(f: &QExpansion, prec: u64) -> Row {
    (0..=prec).map(|n| f.get(n).unwrap()).collect()
}

impl HalfIntegralSpace {
    /// Builds a space after verifying the shared precision and exact linear
    /// independence of the basis.
    pub fn new(
        k: u32,
        level: u64,
        prec: u64,
        basis: Vec<QExpansion>,
    ) -> Result<HalfIntegralSpace, SpaceError> {
        for b in &basis {
            if b.prec() < prec {
                return Err(SpaceError::PrecisionTooLow {
                    needed: prec,
                    available: b.prec(),
                });
            }
        }
        let rows: Vec<Row> = basis.iter().map(|b| coeff_row(b, prec)).collect();
        if linalg::rank(&rows) != basis.len() {
            return Err(SpaceError::DependentBasis);
        }
        Ok(HalfIntegralSpace {
            k,
            level,
            prec,
            basis,
        })
    }

    pub fn zero_space(k: u32, level: u64, prec: u64) -> HalfIntegralSpace {
        HalfIntegralSpace {
            k,
            level,
            prec,
            basis: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn sturm_bound(&self) -> u64 {
        sturm_bound(self.k, self.level)
    }

    /// True when the declared precision reaches the Sturm-type bound, so that
    /// coefficient identities certify equality of forms. Otherwise published
    /// results are necessary conditions "verified to precision prec".
    pub fn certified(&self) -> bool {
        self.prec >= self.sturm_bound()
    }

    /// The q-expansion of the vector with the given coordinates.
    pub fn combination(&self, coords: &[Rat]) -> QExpansion {
        let mut acc = QExpansion::zero(self.prec);
        for (c, b) in coords.iter().zip(&self.basis) {
            if !c.is_zero() {
                acc = qexp::add(&acc, &qexp::scale(c, &b.truncate(self.prec)));
            }
        }
        acc
    }
}

/// The operators whose matrices drive the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceOp {
    /// T_{q^2} for a prime q coprime to the level.
    THalf { q: u64 },
    /// U_{p^2} for p | 2M (p = 2 acts as U_4).
    USquared { p: u64 },
}

impl SpaceOp {
    pub fn apply(&self, f: &QExpansion, k: u32, level: u64) -> QExpansion {
        match self {
            SpaceOp::THalf { q } => qexp::t_op_half(*q, k, f, level),
            SpaceOp::USquared { p } => qexp::u_op(p * p, f),
        }
    }

    pub fn out_prec(&self, prec: u64) -> u64 {
        match self {
            SpaceOp::THalf { q } => prec / (q * q),
            SpaceOp::USquared { p } => prec / (p * p),
        }
    }
}

impl fmt::Display for SpaceOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceOp::THalf { q } => write!(f, "T{}", q * q),
            SpaceOp::USquared { p } => write!(f, "U{}", p * p),
        }
    }
}

/// Exact matrix of an operator on the space: column i holds the coordinates
/// of op(basis_i). Coordinates are solved by exact elimination at the
/// operator's output precision and verified on every available coefficient.
pub fn operator_matrix(space: &HalfIntegralSpace, op: SpaceOp) -> Result<Vec<Row>, SpaceError> {
    let out_prec = op.out_prec(space.prec);
    let dim = space.dim();
    if dim == 0 {
        return Ok(Vec::new());
    }
    let rows: Vec<Row> = space.basis.iter().map(|b| coeff_row(b, out_prec)).collect();
    let ech = linalg::echelonize(&rows);
    if ech.reduced.len() != dim {
        return Err(SpaceError::PrecisionTooLow {
            needed: space.sturm_bound(),
            available: out_prec,
        });
    }
    let mut cols = Vec::with_capacity(dim);
    for b in &space.basis {
        let image = op.apply(&b.truncate(space.prec), space.k, space.level);
        let target = coeff_row(&image, out_prec.min(image.prec()));
        match linalg::coords_in_span(&ech, &rows, &target) {
            Some(x) => cols.push(x),
            None => {
                return Err(SpaceError::ImageEscapesSpan {
                    detail: format!("{} image of a basis vector, precision {}", op, out_prec),
                })
            }
        }
    }
    // transpose: matrix[i][j] = coordinate i of op(basis_j)
    let mat = (0..dim)
        .map(|i| (0..dim).map(|j| cols[j][i].clone()).collect())
        .collect();
    Ok(mat)
}

/// Newness of a block at a prime dividing 2M.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Newness {
    New,
    Old,
    Undecided,
}

/// Eigenvalue description of a block for one operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EigenDesc {
    Rational(Rat),
    /// The block's characteristic factor did not split rationally; the
    /// integer coefficients of the unsplit factor are recorded (in the
    /// denominator-cleared variable).
    UnsplitFactor(Vec<Int>),
}

impl fmt::Display for EigenDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EigenDesc::Rational(r) => write!(f, "{}", crate::arith::fmt_rat(r)),
            EigenDesc::UnsplitFactor(cs) => {
                write!(f, "factor[")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", c)?;
                }
                write!(f, "]")
            }
        }
    }
}

/// A Hecke-stable block of a space: coordinate vectors against the ambient
/// basis, joint eigendata for the tested operators, and newness flags.
#[derive(Debug, Clone)]
pub struct Block {
    pub vectors: Vec<Row>,
    pub eigendata: BTreeMap<u64, EigenDesc>,
    pub newness: BTreeMap<u64, Newness>,
}

impl Block {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }
}

/// Restriction of an ambient operator matrix to a block: solves
/// M v_i = sum_j R_{ji} v_j exactly; errors if the block is not stable.
fn restrict_matrix(mat: &[Row], vectors: &[Row]) -> Result<Vec<Row>, SpaceError> {
    let ech = linalg::echelonize(vectors);
    if ech.reduced.len() != vectors.len() {
        return Err(SpaceError::DependentBasis);
    }
    let mut cols = Vec::with_capacity(vectors.len());
    for v in vectors {
        let image = linalg::mat_vec(mat, v);
        match linalg::coords_in_span(&ech, vectors, &image) {
            Some(x) => cols.push(x),
            None => {
                return Err(SpaceError::ImageEscapesSpan {
                    detail: "operator does not stabilize the block".into(),
                })
            }
        }
    }
    let d = vectors.len();
    Ok((0..d)
        .map(|i| (0..d).map(|j| cols[j][i].clone()).collect())
        .collect())
}

/// Simultaneous decomposition of the space into joint generalized eigenspaces
/// of the T_{q^2} matrices for the given primes. Rational eigenvalues split
/// completely; factors of degree > 1 without rational roots stay together as
/// marked blocks.
pub fn shimura_decompose(
    space: &HalfIntegralSpace,
    primes: &[u64],
) -> Result<Vec<Block>, SpaceError> {
    let dim = space.dim();
    if dim == 0 {
        return Ok(Vec::new());
    }
    for q in primes {
        assert!(
            space.level % q != 0,
            "decomposition primes must be coprime to the level"
        );
    }
    let mut blocks: Vec<Block> = vec![Block {
        vectors: linalg::identity(dim),
        eigendata: BTreeMap::new(),
        newness: BTreeMap::new(),
    }];
    for &q in primes {
        let mat = operator_matrix(space, SpaceOp::THalf { q })?;
        let mut next: Vec<Block> = Vec::new();
        for block in blocks {
            let r = restrict_matrix(&mat, &block.vectors)?;
            let spectrum = linalg::rational_spectrum(&r);
            let mut remaining = block.dim();
            for (lambda, mult) in &spectrum.eigenvalues {
                // generalized eigenspace: kernel of (R - lambda)^mult
                let shifted = linalg::mat_sub(
                    &r,
                    &linalg::mat_scale(&linalg::identity(block.dim()), lambda),
                );
                let mut power = shifted.clone();
                for _ in 1..*mult {
                    power = linalg::mat_mul(&power, &shifted);
                }
                let ker = linalg::kernel(&power, block.dim());
                assert_eq!(
                    ker.len(),
                    *mult,
                    "generalized eigenspace dimension mismatch"
                );
                let vectors: Vec<Row> = ker
                    .iter()
                    .map(|coords| {
                        // lift through the block to ambient coordinates
                        let mut v = vec![Rat::zero(); dim];
                        for (c, bv) in coords.iter().zip(&block.vectors) {
                            if !c.is_zero() {
                                for (vi, bvi) in v.iter_mut().zip(bv) {
                                    *vi += c * bvi;
                                }
                            }
                        }
                        v
                    })
                    .collect();
                let mut eigendata = block.eigendata.clone();
                eigendata.insert(q, EigenDesc::Rational(lambda.clone()));
                next.push(Block {
                    vectors,
                    eigendata,
                    newness: BTreeMap::new(),
                });
                remaining -= mult;
            }
            if remaining > 0 {
                // residual factor without rational roots: kernel of g(R)
                // where g = charpoly / prod (x - lambda)^mult; equivalently
                // the intersection of images, computed as the kernel of the
                // product of the split parts applied on the whole charpoly.
                let mut g = linalg::identity(block.dim());
                // evaluate the residual polynomial at R by deflation:
                // divide charpoly by each (x - lambda)^mult and evaluate.
                let cp = linalg::charpoly(&r);
                let mut poly: Vec<Rat> = cp;
                for (lambda, mult) in &spectrum.eigenvalues {
                    for _ in 0..*mult {
                        // synthetic division by (x - lambda)
                        let mut q_poly = vec![Rat::zero(); poly.len() - 1];
                        let mut carry = Rat::zero();
                        for i in (0..poly.len() - 1).rev() {
                            carry = &poly[i + 1] + &(&carry * lambda);
                            q_poly[i] = carry.clone();
                        }
                        poly = q_poly;
                    }
                }
                // Horner evaluation of the residual polynomial at R
                let mut acc = linalg::mat_scale(
                    &linalg::identity(block.dim()),
                    poly.last().expect("nonempty residual"),
                );
                for c in poly.iter().rev().skip(1) {
                    acc = linalg::mat_mul(&acc, &r);
                    for (i, row) in acc.iter_mut().enumerate() {
                        let _ = i;
                        let _ = row;
                    }
                    for i in 0..block.dim() {
                        acc[i][i] += c;
                    }
                }
                g = linalg::mat_mul(&g, &acc);
                let ker = linalg::kernel(&g, block.dim());
                assert_eq!(ker.len(), remaining, "residual block dimension mismatch");
                let vectors: Vec<Row> = ker
                    .iter()
                    .map(|coords| {
                        let mut v = vec![Rat::zero(); dim];
                        for (c, bv) in coords.iter().zip(&block.vectors) {
                            if !c.is_zero() {
                                for (vi, bvi) in v.iter_mut().zip(bv) {
                                    *vi += c * bvi;
                                }
                            }
                        }
                        v
                    })
                    .collect();
                let mut eigendata = block.eigendata.clone();
                eigendata.insert(q, EigenDesc::UnsplitFactor(spectrum.residual.clone()));
                next.push(Block {
                    vectors,
                    eigendata,
                    newness: BTreeMap::new(),
                });
            }
        }
        blocks = next;
    }
    let total: usize = blocks.iter().map(|b| b.dim()).sum();
    assert_eq!(total, dim, "decomposition must partition the space");
    // deterministic ordering: by dimension descending, then by eigendata text
    blocks.sort_by(|a, b| {
        b.dim()
            .cmp(&a.dim())
            .then_with(|| format!("{:?}", a.eigendata).cmp(&format!("{:?}", b.eigendata)))
    });
    Ok(blocks)
}

/// Decides whether a block is new at p | 2M by the U_{p^2} (or U_4) action:
/// new iff the operator acts by a rational scalar eta with eta = +-p^{k-1}.
pub fn p_new_test(space: &HalfIntegralSpace, block: &Block, p: u64) -> Newness {
    let mat = match operator_matrix(space, SpaceOp::USquared { p }) {
        Ok(m) => m,
        Err(_) => return Newness::Undecided,
    };
    let r = match restrict_matrix(&mat, &block.vectors) {
        Ok(r) => r,
        Err(SpaceError::ImageEscapesSpan { .. }) => return Newness::Undecided,
        Err(_) => return Newness::Undecided,
    };
    let d = block.dim();
    // scalar test
    let mut scalar = Some(r[0][0].clone());
    'outer: for i in 0..d {
        for j in 0..d {
            let want = if i == j {
                scalar.clone().unwrap()
            } else {
                Rat::zero()
            };
            if r[i][j] != want {
                scalar = None;
                break 'outer;
            }
        }
    }
    match scalar {
        Some(eta) => {
            let pk = Rat::from_integer(Int::from(p).pow(space.k - 1));
            if eta == pk || eta == -pk {
                Newness::New
            } else {
                Newness::Old
            }
        }
        None => Newness::Old,
    }
}

fn primes_dividing_2m(level: u64) -> Vec<u64> {
    // level = 4M; the relevant primes are 2 and the odd primes dividing M
    let mut ps = vec![2u64];
    let mut m = level / 4;
    let mut p = 3u64;
    while p * p <= m {
        if m % p == 0 {
            ps.push(p);
            while m % p == 0 {
                m /= p;
            }
        }
        p += 2;
    }
    if m > 1 {
        ps.push(m);
    }
    ps
}

/// Default decomposition primes: the smallest primes coprime to the level.
pub fn default_decomposition_primes(level: u64, count: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 2u64;
    while out.len() < count {
        if crate::arith::is_prime(q) && level % q != 0 {
            out.push(q);
        }
        q += 1;
    }
    out
}

/// Runs the decomposition and fills in newness flags for every p | 2M.
pub fn analyzed_decomposition(
    space: &HalfIntegralSpace,
    primes: &[u64],
) -> Result<Vec<Block>, SpaceError> {
    let mut blocks = shimura_decompose(space, primes)?;
    let ps = primes_dividing_2m(space.level);
    for block in &mut blocks {
        for &p in &ps {
            block.newness.insert(p, p_new_test(space, block, p));
        }
    }
    Ok(blocks)
}

/// The minus space: the direct sum of the blocks that are new at every prime
/// dividing 2M. Errors if any block's newness is undecided.
pub fn minus_space(space: &HalfIntegralSpace) -> Result<HalfIntegralSpace, SpaceError> {
    let primes = default_decomposition_primes(space.level, 2);
    minus_space_with_primes(space, &primes)
}

pub fn minus_space_with_primes(
    space: &HalfIntegralSpace,
    primes: &[u64],
) -> Result<HalfIntegralSpace, SpaceError> {
    let blocks = analyzed_decomposition(space, primes)?;
    let mut basis = Vec::new();
    for block in &blocks {
        let mut all_new = true;
        for (_, n) in &block.newness {
            match n {
                Newness::New => {}
                Newness::Old => {
                    all_new = false;
                    break;
                }
                Newness::Undecided => return Err(SpaceError::UndecidedBlock),
            }
        }
        if all_new {
            for v in &block.vectors {
                basis.push(space.combination(v));
            }
        }
    }
    if basis.is_empty() {
        return Ok(HalfIntegralSpace::zero_space(
            space.k,
            space.level,
            space.prec,
        ));
    }
    HalfIntegralSpace::new(space.k, space.level, space.prec, basis)
}

/// The Kohnen-type plus space: the kernel of the coefficient functionals
/// {a_n : (-1)^k n = 2, 3 (mod 4)} on the space, cut out by exact linear
/// algebra up to the declared precision.
pub fn plus_space(space: &HalfIntegralSpace) -> HalfIntegralSpace {
    if space.dim() == 0 {
        return space.clone();
    }
    // rows: one per forbidden index, columns indexed by basis vectors
    let mut rows: Vec<Row> = Vec::new();
    for n in 0..=space.prec {
        let r = if space.k % 2 == 0 {
            n % 4
        } else {
            (4 - n % 4) % 4
        };
        if r == 2 || r == 3 {
            rows.push(space.basis.iter().map(|b| b.get(n).unwrap()).collect());
        }
    }
    let ker = linalg::kernel(&rows, space.dim());
    let basis: Vec<QExpansion> = ker.iter().map(|v| space.combination(v)).collect();
    if basis.is_empty() {
        return HalfIntegralSpace::zero_space(space.k, space.level, space.prec);
    }
    HalfIntegralSpace::new(space.k, space.level, space.prec, basis)
        .expect("kernel vectors are independent")
}

/// Weight/level/eigenvalue record of an integral-weight newform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewformData {
    pub label: String,
    pub weight: u32,
    pub level: u64,
    pub ap: BTreeMap<u64, Rat>,
}

impl NewformData {
    /// Validates the stored data: |a_p| = p^{k-1} (weight 2k) at primes
    /// exactly dividing the level.
    pub fn validate(&self) -> Result<(), String> {
        if self.weight % 2 != 0 || self.weight == 0 {
            return Err(format!(
                "weight {} is not a positive even integer",
                self.weight
            ));
        }
        let k = self.weight / 2;
        for (p, ap) in &self.ap {
            let exactly_divides = self.level % p == 0 && (self.level / p) % p != 0;
            if exactly_divides {
                let want = Rat::from_integer(Int::from(*p).pow(k - 1));
                if ap.abs() != want {
                    return Err(format!(
                        "|a_{}| = {} but p^(k-1) = {} at a prime exactly dividing the level",
                        p,
                        crate::arith::fmt_rat(&ap.abs()),
                        crate::arith::fmt_rat(&want)
                    ));
                }
            }
        }
        Ok(())
    }

    /// Checks the Hecke recurrence/multiplicativity for a supplied composite
    /// coefficient: n = q^r gives a_{q^{r}} = a_q a_{q^{r-1}} - q^{2k-1} a_{q^{r-2}}
    /// away from the level, and a_{mn} = a_m a_n for coprime m, n.
    pub fn check_extended_coefficient(&self, n: u64, value: &Rat) -> Result<(), String> {
        let k = self.weight / 2;
        let predicted = self.predict_coefficient(n, k)?;
        if &predicted != value {
            return Err(format!(
                "coefficient a_{} = {} violates the Hecke recurrences (expected {})",
                n,
                crate::arith::fmt_rat(value),
                crate::arith::fmt_rat(&predicted)
            ));
        }
        Ok(())
    }

    fn predict_coefficient(&self, n: u64, k: u32) -> Result<Rat, String> {
        if n == 1 {
            return Ok(Rat::one());
        }
        let mut p = 2u64;
        while n % p != 0 {
            p += 1;
        }
        let mut q_pow = 1u64;
        let mut m = n;
        while m % p == 0 {
            m /= p;
            q_pow *= p;
        }
        if m > 1 {
            let a = self.predict_coefficient(q_pow, k)?;
            let b = self.predict_coefficient(m, k)?;
            return Ok(a * b);
        }
        // n = p^r
        let ap = self
            .ap
            .get(&p)
            .ok_or_else(|| format!("a_{} not supplied", p))?
            .clone();
        if n == p {
            return Ok(ap);
        }
        if self.level % p == 0 {
            // U_p recursion: a_{p^r} = a_p^r
            let mut a = Rat::one();
            let mut t = n;
            while t > 1 {
                a *= &ap;
                t /= p;
            }
            return Ok(a);
        }
        let pk = Rat::from_integer(Int::from(p).pow(self.weight - 1));
        let prev = self.predict_coefficient(n / p, k)?;
        let prev2 = self.predict_coefficient(n / p / p, k)?;
        Ok(ap * prev - pk * prev2)
    }
}

/// The matrix of U_p on the two-dimensional old span (F_n, F_{np}) for a
/// weight-2k eigenform with T_p-eigenvalue a_p: [[a_p, 1], [-p^{2k-1}, 0]].
pub fn old_up_matrix(ap: &Rat, k: u32, p: u64) -> [[Rat; 2]; 2] {
    let pk = Rat::from_integer(Int::from(p).pow(2 * k - 1));
    [[ap.clone(), Rat::one()], [-pk, Rat::zero()]]
}

/// Classification of the eigenvalues of U_p^2 on an old two-dimensional span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Up2Class {
    /// Real eigenvalue, forced to be -p^{2k-1} (the a_p = 0 branch) for
    /// rational a_p strictly inside the Ramanujan bound.
    Real(Rat),
    NonReal,
}

/// Classifies the eigenvalues of U_p^2 on <F_n, F_np> via the discriminant
/// a_p^2 - 4 p^{2k-1}; a_p must satisfy the Ramanujan bound |a_p| <= 2 p^{k-1/2}.
pub fn up2_eigen_classify(ap: &Rat, k: u32, p: u64) -> Result<Up2Class, SpaceError> {
    let four_pk = Rat::from_integer(Int::from(4) * Int::from(p).pow(2 * k - 1));
    let disc = ap * ap - &four_pk;
    if disc.is_positive() || disc.is_zero() {
        // |a_p| >= 2 p^{k-1/2}; equality is impossible for rational a_p since
        // 4 p^{2k-1} is not a rational square, so this violates the bound.
        return Err(SpaceError::RamanujanViolation);
    }
    if ap.is_zero() {
        let pk = Rat::from_integer(Int::from(p).pow(2 * k - 1));
        Ok(Up2Class::Real(-pk))
    } else {
        // U_p eigenvalues (a_p +- sqrt(disc))/2 have nonzero real and
        // imaginary parts, so their squares are non-real.
        Ok(Up2Class::NonReal)
    }
}

/// Builds the eigenvalue record of a decomposed block: the smallest
/// squarefree t with a nonzero Shimura lift is found, the lift is normalized
/// to A_1 = 1, prime coefficients are read off and the Hecke recurrences are
/// verified to the available precision.
pub fn block_eigendata(
    space: &HalfIntegralSpace,
    block: &Block,
    label: &str,
) -> Result<NewformData, SpaceError> {
    if block.dim() == 0 {
        return Err(SpaceError::AllLiftsVanish);
    }
    let f = space.combination(&block.vectors[0]);
    let mut lift = None;
    for t in 1..=f.prec() {
        if !crate::shimura::is_squarefree(t) {
            continue;
        }
        match sh_lift(&f, t, space.k, space.level) {
            Ok(l) => {
                if !l.is_zero_series() && l.prec() >= 2 {
                    lift = Some(l);
                    break;
                }
            }
            Err(ShimuraError::PrecisionExhausted) => break,
            Err(_) => continue,
        }
    }
    let lift = lift.ok_or(SpaceError::AllLiftsVanish)?;
    let a1 = lift.get(1).unwrap();
    if a1.is_zero() {
        return Err(SpaceError::AllLiftsVanish);
    }
    let norm = qexp::scale(&a1.recip(), &lift);
    // level: product of the primes dividing 2M at which this block is new
    let mut level = 1u64;
    for (p, n) in &block.newness {
        if *n == Newness::New {
            level *= p;
        }
    }
    let mut ap = BTreeMap::new();
    let mut q = 2u64;
    while q <= norm.prec() {
        if crate::arith::is_prime(q) {
            ap.insert(q, norm.get(q).unwrap());
        }
        q += 1;
    }
    let data = NewformData {
        label: label.to_string(),
        weight: 2 * space.k,
        level,
        ap,
    };
    // recurrence verification on all computable composite indices
    for n in 2..=norm.prec() {
        let predicted = data
            .predict_coefficient(n, space.k)
            .map_err(|_| SpaceError::AllLiftsVanish)?;
        if predicted != norm.get(n).unwrap() {
            return Err(SpaceError::ImageEscapesSpan {
                detail: format!("lift coefficient a_{} violates the Hecke recurrences", n),
            });
        }
    }
    Ok(data)
}

/// Dimension of the intersection of two subspaces of the same ambient space,
/// computed from exact ranks of the stacked coefficient matrices.
pub fn intersection_dim(a: &HalfIntegralSpace, b: &HalfIntegralSpace) -> usize {
    let prec = a.prec.min(b.prec);
    let mut rows: Vec<Row> = Vec::new();
    for f in a.basis.iter().chain(&b.basis) {
        rows.push(coeff_row(&f.truncate(prec), prec));
    }
    let total = linalg::rank(&rows);
    a.dim() + b.dim() - total
}
