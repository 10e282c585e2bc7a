//! The genuine Hecke algebra H(K0bar^p(p^e), gamma) of the double cover:
//! double-coset classification, normal forms, left-coset enumeration, the
//! basis functions supported on torus- and Weyl-type double cosets, and
//! convolution computed as the finite coset-level sum.
//!
//! Haar measure is normalized so the subgroup K0bar has volume 1; convolution
//! of two basis functions is then the finite sum over left-coset
//! representatives of the first factor. Coefficients live in Q(zeta_8).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::Zero;

use crate::arith::{mod_inverse, pow_rat, rat_int, valuation, CycQ8, Int, Rat};
use crate::metaplectic::{
    commutator_sigma, gamma_eval, in_k0, meta_inv, meta_mul, CharKind, LocalCharacter, Mat2,
    MetaElement,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HeckeError {
    PlaceMismatch,
    CharacterMismatch,
    /// The double coset does not support the algebra for this character.
    UnsupportedCoset,
}

impl fmt::Display for HeckeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeckeError::PlaceMismatch => write!(f, "elements live at different places"),
            HeckeError::CharacterMismatch => write!(f, "elements carry different characters"),
            HeckeError::UnsupportedCoset => {
                write!(
                    f,
                    "double coset does not support the algebra for this character"
                )
            }
        }
    }
}

impl std::error::Error for HeckeError {}

/// Type of a double coset: torus cosets carry h(p^n), Weyl cosets w(p^-n).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CosetKind {
    T,
    U,
}

/// Label of a K0bar double coset of the cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CosetLabel {
    pub kind: CosetKind,
    pub n: i64,
}

impl CosetLabel {
    pub fn t(n: i64) -> CosetLabel {
        CosetLabel {
            kind: CosetKind::T,
            n,
        }
    }

    pub fn u(n: i64) -> CosetLabel {
        CosetLabel {
            kind: CosetKind::U,
            n,
        }
    }

    /// The distinguished representative, with sign +1: (h(p^n), 1) for T(n)
    /// and (w(p^-n), 1) for U(n).
    pub fn rep(&self, place: u64) -> MetaElement {
        let m = match self.kind {
            CosetKind::T => Mat2::torus(pow_rat(place, self.n)),
            CosetKind::U => Mat2::weyl(pow_rat(place, -self.n)),
        };
        MetaElement::lift(m, place)
    }

    /// Exponent m such that the double coset splits into p^m left cosets.
    pub fn coset_exponent(&self, level_exponent: u32) -> u32 {
        let e = level_exponent as i64;
        match self.kind {
            CosetKind::T => 2 * self.n.unsigned_abs() as u32,
            CosetKind::U => (2 * self.n - e).unsigned_abs() as u32,
        }
    }
}

impl fmt::Display for CosetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            CosetKind::T => write!(f, "T {}", self.n),
            CosetKind::U => write!(f, "U {}", self.n),
        }
    }
}

/// A closed p-adic disk {x : v(x - center) >= radius}, or all of Qp, or
/// nothing; the solution sets of the membership constraints below.
#[derive(Clone, Debug)]
enum PadicSet {
    All,
    Empty,
    Ball { center: Rat, radius: i64 },
}

impl PadicSet {
    fn intersect(self, other: PadicSet, p: u64) -> PadicSet {
        match (self, other) {
            (PadicSet::Empty, _) | (_, PadicSet::Empty) => PadicSet::Empty,
            (PadicSet::All, b) => b,
            (a, PadicSet::All) => a,
            (
                PadicSet::Ball {
                    center: x1,
                    radius: m1,
                },
                PadicSet::Ball {
                    center: x2,
                    radius: m2,
                },
            ) => {
                let (hi, lo) = if m1 >= m2 {
                    ((x1.clone(), m1), (x2, m2))
                } else {
                    ((x2.clone(), m2), (x1, m1))
                };
                let diff = &hi.0 - &lo.0;
                if diff.is_zero() || valuation(&diff, p).unwrap() >= lo.1 {
                    PadicSet::Ball {
                        center: hi.0,
                        radius: hi.1,
                    }
                } else {
                    PadicSet::Empty
                }
            }
        }
    }

    /// Canonical integer point of the set, assuming it is contained in Zp.
    fn canonical_point(&self, p: u64) -> Option<Int> {
        match self {
            PadicSet::Empty => None,
            PadicSet::All => Some(Int::zero()),
            PadicSet::Ball { center, radius } => {
                if *radius <= 0 || center.is_zero() {
                    return Some(Int::zero());
                }
                let m = Int::from(p).pow(*radius as u32);
                let num = center.numer();
                let den = center.denom();
                let den_inv = mod_inverse(&num_integer::Integer::mod_floor(den, &m), &m)?;
                Some(num_integer::Integer::mod_floor(&(num * den_inv), &m))
            }
        }
    }
}

/// Constraint v(x - s*y) >= bound as a set of admissible s.
fn linear_ball(x: &Rat, y: &Rat, bound: i64, p: u64) -> PadicSet {
    if y.is_zero() {
        if x.is_zero() || valuation(x, p).unwrap() >= bound {
            PadicSet::All
        } else {
            PadicSet::Empty
        }
    } else {
        PadicSet::Ball {
            center: x / y,
            radius: bound - valuation(y, p).unwrap(),
        }
    }
}

fn val_at_least(x: &Rat, p: u64, bound: i64) -> bool {
    x.is_zero() || valuation(x, p).unwrap() >= bound
}

/// Attempts to write g = k1 * rep(label) * k2 with k1 a canonical unipotent
/// translate and k2 in K0^p(p^e). Returns the matrices on success.
fn solve_membership(g: &Mat2, p: u64, e: u32, label: CosetLabel) -> Option<(Mat2, Mat2)> {
    let ei = e as i64;
    let n = label.n;
    // Each case fixes the unipotent side, two valuation prechecks, and two
    // ball constraints on the translate parameter.
    let (lower_side, prechecks, ball1, ball2, container): (
        bool,
        [(&Rat, i64); 2],
        PadicSet,
        PadicSet,
        i64,
    ) = match label.kind {
        CosetKind::T if n >= 0 => (
            false,
            [(&g.c, ei - n), (&g.d, -n)],
            linear_ball(&g.a, &g.c, n, p),
            linear_ball(&g.b, &g.d, n, p),
            0,
        ),
        CosetKind::T => (
            true,
            [(&g.a, n), (&g.b, n)],
            linear_ball(&g.c, &g.a, ei - n, p),
            linear_ball(&g.d, &g.b, -n, p),
            ei,
        ),
        CosetKind::U if 2 * n >= ei => (
            true,
            [(&g.a, ei - n), (&g.b, -n)],
            linear_ball(&g.c, &g.a, n, p),
            linear_ball(&g.d, &g.b, n, p),
            ei,
        ),
        CosetKind::U => (
            false,
            [(&g.c, n), (&g.d, n)],
            linear_ball(&g.a, &g.c, ei - n, p),
            linear_ball(&g.b, &g.d, -n, p),
            0,
        ),
    };
    for (x, bound) in prechecks {
        if !val_at_least(x, p, bound) {
            return None;
        }
    }
    let container_ball = PadicSet::Ball {
        center: Rat::zero(),
        radius: container,
    };
    let set = ball1.intersect(ball2, p).intersect(container_ball, p);
    let s = set.canonical_point(p)?;
    let s_rat = Rat::from_integer(s);
    let k1 = if lower_side {
        Mat2::lower(s_rat)
    } else {
        Mat2::upper(s_rat)
    };
    let rep = label.rep(p).m;
    let k2 = rep.inv().mul(&k1.inv()).mul(g);
    if !in_k0(&k2, p, e) {
        return None;
    }
    debug_assert_eq!(k1.mul(&rep).mul(&k2), *g);
    Some((k1, k2))
}

/// The double-coset label of x, when x lies in a torus- or Weyl-type double
/// coset of K0^p(p^e). Decision is by entry valuations followed by an exact
/// constructive membership test.
pub fn coset_label(x: &MetaElement, level_exponent: u32) -> Option<CosetLabel> {
    normal_form(x, level_exponent).map(|(_, l, _)| l)
}

/// Writes x = k1 * rep(label) * k2 exactly in the cover, with k1, k2 in
/// K0bar^p(p^e) and the representative carrying sign +1. Returns None for
/// elements outside the recognized double cosets; the validity of a returned
/// decomposition is guaranteed by reconstruction.
pub fn normal_form(
    x: &MetaElement,
    level_exponent: u32,
) -> Option<(MetaElement, CosetLabel, MetaElement)> {
    let p = x.place;
    let g = &x.m;
    let mut minv = i64::MAX;
    for entry in [&g.a, &g.b, &g.c, &g.d] {
        if !entry.is_zero() {
            minv = minv.min(valuation(entry, p).unwrap());
        }
    }
    let m0 = -minv;
    let mut candidates = vec![CosetLabel::t(m0), CosetLabel::u(m0)];
    if m0 != 0 {
        candidates.push(CosetLabel::t(-m0));
        candidates.push(CosetLabel::u(-m0));
    }
    for label in candidates {
        if let Some((k1m, k2m)) = solve_membership(g, p, level_exponent, label) {
            let rep = label.rep(p);
            let k1 = MetaElement::lift(k1m, p);
            let partial = meta_mul(
                &meta_mul(&k1, &rep).unwrap(),
                &MetaElement::lift(k2m.clone(), p),
            )
            .unwrap();
            debug_assert_eq!(partial.m, *g);
            let k2 = MetaElement::new(k2m, x.eps * partial.eps, p);
            return Some((k1, label, k2));
        }
    }
    None
}

/// Pairwise-inequivalent left-coset representatives covering the double coset
/// of `label`, each with sign +1. Candidate translates x(s)*rep and
/// y(p^e s)*rep are generated and deduplicated by the exact K0-membership
/// test; the final count always matches the index formula.
pub fn left_cosets(label: CosetLabel, p: u64, level_exponent: u32) -> Vec<MetaElement> {
    let e = level_exponent;
    let exponent = label.coset_exponent(e);
    let count = (p as u128).pow(exponent) as u64;
    let rep = label.rep(p).m;
    let mut by_key: BTreeMap<(bool, Int), Mat2> = BTreeMap::new();
    let modulus = Int::from(p).pow(exponent);
    let mut s = Int::zero();
    while s < modulus {
        let upper = Mat2::upper(Rat::from_integer(s.clone())).mul(&rep);
        let lower = Mat2::lower(Rat::from_integer(&s * Int::from(p).pow(e))).mul(&rep);
        for cand in [upper, lower] {
            let (k1m, _) = solve_membership(&cand, p, e, label)
                .expect("translate of the representative stays in its double coset");
            // canonical translate parameter identifies the left coset
            let key = if !k1m.c.is_zero() {
                (true, k1m.c.numer().clone())
            } else {
                (false, k1m.b.numer().clone())
            };
            by_key.entry(key).or_insert(cand);
        }
        s += 1;
    }
    assert_eq!(
        by_key.len() as u64,
        count,
        "left coset enumeration of {} at p={} produced the wrong count",
        label,
        p
    );
    by_key
        .into_values()
        .map(|m| MetaElement::lift(m, p))
        .collect()
}

static COSET_CACHE: OnceLock<Mutex<BTreeMap<(u64, u32, CosetLabel), Arc<Vec<MetaElement>>>>> =
    OnceLock::new();

/// Memoized variant of `left_cosets`; the enumerations are immutable and
/// reused heavily by convolution.
pub fn left_cosets_shared(label: CosetLabel, p: u64, level_exponent: u32) -> Arc<Vec<MetaElement>> {
    let cache = COSET_CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&(p, level_exponent, label)) {
        return v.clone();
    }
    let v = Arc::new(left_cosets(label, p, level_exponent));
    cache
        .lock()
        .unwrap()
        .entry((p, level_exponent, label))
        .or_insert_with(|| v.clone())
        .clone()
}

/// Support criterion: gamma must kill every commutator [k^-1, g^-1] as k runs
/// over the triangular generator families of the stabilizer subgroup
/// S_g = S (cap) g S g^-1. The families are sampled over valuations and unit
/// classes, which the commutator signs depend on.
pub fn support_check(label: CosetLabel, chi: &LocalCharacter) -> bool {
    let p = chi.place;
    let e = chi.level_exponent() as i64;
    let n = label.n;
    let a = label.rep(p).m;
    // ord bounds for the x(s) and y(t) families stabilizing the representative
    let (x_min, y_min) = match label.kind {
        CosetKind::T => ((2 * n).max(0), (e - 2 * n).max(e)),
        CosetKind::U => ((e - 2 * n).max(0), (2 * n).max(e)),
    };
    let units: Vec<i64> = if p == 2 {
        vec![1, 3, 5, 7]
    } else {
        (1..p as i64).collect()
    };
    let mut gens: Vec<Mat2> = Vec::new();
    for j in 0..3i64 {
        for &u in &units {
            let s = rat_int(u) * pow_rat(p, x_min + j);
            gens.push(Mat2::upper(s));
            let t = rat_int(u) * pow_rat(p, y_min + j);
            gens.push(Mat2::lower(t));
        }
    }
    for &u in &units {
        gens.push(Mat2::torus(rat_int(u)));
        if p != 2 {
            gens.push(Mat2::torus(rat_int(u - p as i64)));
        }
    }
    for b in gens {
        let comm = b.inv().mul(&a.inv()).mul(&b).mul(&a);
        let xi = commutator_sigma(&a, &b, p);
        let elt = MetaElement::new(comm, xi, p);
        match gamma_eval(chi, &elt) {
            Ok(v) => {
                if v != CycQ8::one() {
                    return false;
                }
            }
            Err(_) => return false,
        }
    }
    true
}

/// A finitely supported element of H(K0bar^p(p^e), gamma), stored as
/// coefficients against the torus/Weyl basis functions.
#[derive(Clone, PartialEq, Eq)]
pub struct HeckeElement {
    pub place: u64,
    pub level_exponent: u32,
    pub char: LocalCharacter,
    pub coeffs: BTreeMap<CosetLabel, CycQ8>,
}

impl fmt::Debug for HeckeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_lines().replace('\n', "; "))
    }
}

impl HeckeElement {
    pub fn zero(chi: &LocalCharacter) -> HeckeElement {
        HeckeElement {
            place: chi.place,
            level_exponent: chi.level_exponent(),
            char: *chi,
            coeffs: BTreeMap::new(),
        }
    }

    fn normalized(mut self) -> HeckeElement {
        self.coeffs.retain(|_, v| !v.is_zero());
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &HeckeElement) -> Result<HeckeElement, HeckeError> {
        if self.place != other.place {
            return Err(HeckeError::PlaceMismatch);
        }
        if self.char != other.char {
            return Err(HeckeError::CharacterMismatch);
        }
        let mut out = self.clone();
        for (l, c) in &other.coeffs {
            let entry = out.coeffs.entry(*l).or_insert_with(CycQ8::zero);
            *entry = entry.add(c);
        }
        Ok(out.normalized())
    }

    pub fn scale(&self, c: &CycQ8) -> HeckeElement {
        let mut out = self.clone();
        for v in out.coeffs.values_mut() {
            *v = v.mul(c);
        }
        out.normalized()
    }

    pub fn scale_rat(&self, r: &Rat) -> HeckeElement {
        self.scale(&CycQ8::from_rat(r.clone()))
    }

    /// Serialization: one line "T n <scalar>" / "U n <scalar>" per basis
    /// coefficient, in label order.
    pub fn to_lines(&self) -> String {
        let mut s = String::new();
        for (l, c) in &self.coeffs {
            s.push_str(&format!("{} {}\n", l, c));
        }
        s
    }
}

/// The basis function supported on the double coset of `label`, normalized by
/// the character's torus-normalizer extension at the representative.
pub fn basis_element(label: CosetLabel, chi: &LocalCharacter) -> Result<HeckeElement, HeckeError> {
    if !support_check(label, chi) {
        return Err(HeckeError::UnsupportedCoset);
    }
    let mut coeffs = BTreeMap::new();
    coeffs.insert(label, CycQ8::one());
    Ok(HeckeElement {
        place: chi.place,
        level_exponent: chi.level_exponent(),
        char: *chi,
        coeffs,
    })
}

/// The unit of the algebra (the basis function of the trivial double coset).
pub fn unit_element(chi: &LocalCharacter) -> HeckeElement {
    basis_element(CosetLabel::t(0), chi).expect("T(0) always supports the algebra")
}

/// Value of the basis function for `label` at a point with the given normal
/// form.
fn basis_value(
    label: CosetLabel,
    chi: &LocalCharacter,
    nf: &Option<(MetaElement, CosetLabel, MetaElement)>,
) -> CycQ8 {
    match nf {
        Some((k1, l, k2)) if *l == label => {
            let g1 = gamma_eval(chi, k1).expect("k1 lies in K0bar").conj();
            let grep = gamma_eval(chi, &label.rep(chi.place))
                .expect("representative")
                .conj();
            let g2 = gamma_eval(chi, k2).expect("k2 lies in K0bar").conj();
            g1.mul(&grep).mul(&g2)
        }
        _ => CycQ8::zero(),
    }
}

/// Evaluates a Hecke element at a point of the cover. Points outside the
/// recognized double cosets are outside the support and evaluate to zero.
pub fn evaluate(e: &HeckeElement, x: &MetaElement) -> Result<CycQ8, HeckeError> {
    if e.place != x.place {
        return Err(HeckeError::PlaceMismatch);
    }
    let nf = normal_form(x, e.level_exponent);
    let mut acc = CycQ8::zero();
    for (label, coeff) in &e.coeffs {
        let v = basis_value(*label, &e.char, &nf);
        if !v.is_zero() {
            acc = acc.add(&coeff.mul(&v));
        }
    }
    Ok(acc)
}

/// Convolution f1 * f2 with vol(K0bar) = 1: the finite sum
/// (f1*f2)(h) = sum_i f1(alpha_i) f2(alpha_i^-1 h) over left-coset
/// representatives of the support of f1, re-expressed in the basis.
pub fn convolve(e1: &HeckeElement, e2: &HeckeElement) -> Result<HeckeElement, HeckeError> {
    if e1.place != e2.place {
        return Err(HeckeError::PlaceMismatch);
    }
    if e1.char != e2.char {
        return Err(HeckeError::CharacterMismatch);
    }
    let chi = &e1.char;
    let p = e1.place;
    let e = e1.level_exponent;
    let mut out = HeckeElement::zero(chi);
    for (l1, c1) in &e1.coeffs {
        let alphas = left_cosets_shared(*l1, p, e);
        let alpha_invs: Vec<MetaElement> = alphas.iter().map(meta_inv).collect();
        let f1_vals: Vec<CycQ8> = alphas
            .iter()
            .map(|a| {
                let nf = normal_form(a, e);
                basis_value(*l1, chi, &nf)
            })
            .collect();
        for (l2, c2) in &e2.coeffs {
            let c12 = c1.mul(c2);
            let max_n = l1.n.abs() + l2.n.abs();
            for n in -max_n..=max_n {
                for kind in [CosetKind::T, CosetKind::U] {
                    let label = CosetLabel { kind, n };
                    let rep = label.rep(p);
                    let mut val = CycQ8::zero();
                    for (ai, f1v) in alpha_invs.iter().zip(&f1_vals) {
                        if f1v.is_zero() {
                            continue;
                        }
                        let point = meta_mul(ai, &rep).unwrap();
                        let nf = normal_form(&point, e);
                        if nf.is_none() {
                            continue;
                        }
                        let f2v = basis_value(*l2, chi, &nf);
                        if !f2v.is_zero() {
                            val = val.add(&f1v.mul(&f2v));
                        }
                    }
                    if !val.is_zero() {
                        // f(rep) = coeff * conj(gamma(rep)); the gamma values
                        // at representatives are roots of unity.
                        let grep = gamma_eval(chi, &rep).unwrap().conj();
                        let coeff = val.mul(&grep.inv()).mul(&c12);
                        let entry = out.coeffs.entry(label).or_insert_with(CycQ8::zero);
                        *entry = entry.add(&coeff);
                    }
                }
            }
        }
    }
    Ok(out.normalized())
}

/// One verified identity in a relation table.
#[derive(Debug, Clone)]
pub struct RelationCheck {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

fn check_eq(name: &str, lhs: &HeckeElement, rhs: &HeckeElement) -> RelationCheck {
    let ok = lhs == rhs;
    let detail = if ok {
        "OK".to_string()
    } else {
        format!("lhs = [{:?}] rhs = [{:?}]", lhs, rhs)
    };
    RelationCheck {
        name: name.to_string(),
        ok,
        detail,
    }
}

type RelationJob = (
    String,
    Box<dyn Fn() -> (HeckeElement, HeckeElement) + Send + Sync>,
);

fn job(
    name: String,
    f: impl Fn() -> (HeckeElement, HeckeElement) + Send + Sync + 'static,
) -> RelationJob {
    (name, Box::new(f))
}

fn tb(chi: &LocalCharacter, n: i64) -> HeckeElement {
    basis_element(CosetLabel::t(n), chi).unwrap()
}

fn ub(chi: &LocalCharacter, n: i64) -> HeckeElement {
    basis_element(CosetLabel::u(n), chi).unwrap()
}

fn relation_jobs(chi: LocalCharacter) -> Vec<RelationJob> {
    let p = chi.place;
    let mut jobs: Vec<RelationJob> = Vec::new();
    let conv = |a: &HeckeElement, b: &HeckeElement| convolve(a, b).unwrap();

    // T_m * T_n = T_{m+n} for mn >= 0.
    for m in -2i64..=2 {
        for n in -2i64..=2 {
            if m * n < 0 {
                continue;
            }
            jobs.push(job(format!("T_{} * T_{} = T_{}", m, n, m + n), move || {
                (conv(&tb(&chi, m), &tb(&chi, n)), tb(&chi, m + n))
            }));
        }
    }

    if p == 2 {
        for n in -2i64..=2 {
            jobs.push(job(format!("U_1 * T_{} = U_{}", n, n + 1), move || {
                (conv(&ub(&chi, 1), &tb(&chi, n)), ub(&chi, n + 1))
            }));
            jobs.push(job(format!("T_{} * U_1 = U_{}", n, 1 - n), move || {
                (conv(&tb(&chi, n), &ub(&chi, 1)), ub(&chi, 1 - n))
            }));
            jobs.push(job(format!("U_1 * U_{} = T_{}", n, n - 1), move || {
                (conv(&ub(&chi, 1), &ub(&chi, n)), tb(&chi, n - 1))
            }));
            jobs.push(job(format!("U_{} * U_1 = T_{}", n, 1 - n), move || {
                (conv(&ub(&chi, n), &ub(&chi, 1)), tb(&chi, 1 - n))
            }));
        }
        jobs.push(job("U_1 * U_1 = 1".into(), move || {
            (conv(&ub(&chi, 1), &ub(&chi, 1)), unit_element(&chi))
        }));
        // (U_0 - 2 sqrt2)(U_0 + sqrt2) = 0, i.e. U_0^2 = sqrt2 U_0 + 4
        jobs.push(job("U_0 * U_0 = sqrt2 U_0 + 4".into(), move || {
            let rhs = ub(&chi, 0)
                .scale(&CycQ8::sqrt2())
                .add(&unit_element(&chi).scale(&CycQ8::from_int(4)))
                .unwrap();
            (conv(&ub(&chi, 0), &ub(&chi, 0)), rhs)
        }));
        return jobs;
    }

    // Odd p. gamma-bar(-1) is rational for the quadratic characters.
    let gamma_minus_one = match chi.kind {
        CharKind::Trivial => CycQ8::one(),
        CharKind::Legendre => CycQ8::from_int(crate::arith::kronecker_i64(-1, p as i64) as i64),
        _ => panic!("relation table needs a quadratic character"),
    };
    let minus_one_p = crate::arith::kronecker_i64(-1, p as i64) as i64;

    for n in 0i64..=2 {
        jobs.push(job(format!("U_1 * T_{} = U_{}", n, n + 1), move || {
            (conv(&ub(&chi, 1), &tb(&chi, n)), ub(&chi, n + 1))
        }));
        jobs.push(job(format!("T_{} * U_1 = U_{}", -n, n + 1), move || {
            (conv(&tb(&chi, -n), &ub(&chi, 1)), ub(&chi, n + 1))
        }));
        jobs.push(job(format!("U_0 * T_{} = U_{}", -n, -n), move || {
            (conv(&ub(&chi, 0), &tb(&chi, -n)), ub(&chi, -n))
        }));
        jobs.push(job(format!("T_{} * U_0 = U_{}", n, -n), move || {
            (conv(&tb(&chi, n), &ub(&chi, 0)), ub(&chi, -n))
        }));
    }
    for n in 1i64..=2 {
        let gm = gamma_minus_one.clone();
        jobs.push(job(format!("U_0 * U_{} = g(-1) T_{}", n, n), move || {
            (conv(&ub(&chi, 0), &ub(&chi, n)), tb(&chi, n).scale(&gm))
        }));
        let gm = gamma_minus_one.clone();
        jobs.push(job(format!("U_{} * U_0 = g(-1) T_{}", n, -n), move || {
            (conv(&ub(&chi, n), &ub(&chi, 0)), tb(&chi, -n).scale(&gm))
        }));
    }

    // Character-dependent quadratic relations and the normalized Weyl
    // generator U'_1 = conj(eps_p) U_1.
    match chi.kind {
        CharKind::Trivial => {
            jobs.push(job("U_0 * U_0 = (p-1) U_0 + p".into(), move || {
                let rhs = ub(&chi, 0)
                    .scale_rat(&rat_int(p as i64 - 1))
                    .add(&unit_element(&chi).scale_rat(&rat_int(p as i64)))
                    .unwrap();
                (conv(&ub(&chi, 0), &ub(&chi, 0)), rhs)
            }));
            jobs.push(job("U_1 * U_1 = p".into(), move || {
                (
                    conv(&ub(&chi, 1), &ub(&chi, 1)),
                    unit_element(&chi).scale_rat(&rat_int(p as i64)),
                )
            }));
            jobs.push(job("T_1 * U_1 = p U_0".into(), move || {
                (
                    conv(&tb(&chi, 1), &ub(&chi, 1)),
                    ub(&chi, 0).scale_rat(&rat_int(p as i64)),
                )
            }));
            jobs.push(job("U_1 * T_1 * U_1 = p T_{-1}".into(), move || {
                (
                    conv(&conv(&ub(&chi, 1), &tb(&chi, 1)), &ub(&chi, 1)),
                    tb(&chi, -1).scale_rat(&rat_int(p as i64)),
                )
            }));
            jobs.push(job("U'_1 * U'_1 = (-1|p) p".into(), move || {
                let u1p = ub(&chi, 1).scale(&crate::arith::eps_p(p).conj());
                let rhs = unit_element(&chi).scale_rat(&rat_int(minus_one_p * p as i64));
                (conv(&u1p, &u1p), rhs)
            }));
        }
        CharKind::Legendre => {
            jobs.push(job("U_0 * U_0 = (-1|p) p".into(), move || {
                let rhs = unit_element(&chi).scale_rat(&rat_int(minus_one_p * p as i64));
                (conv(&ub(&chi, 0), &ub(&chi, 0)), rhs)
            }));
            jobs.push(job(
                "U_1 * U_1 = eps_p (p-1) U_1 + (-1|p) p".into(),
                move || {
                    let rhs = ub(&chi, 1)
                        .scale(&crate::arith::eps_p(p).scale(&rat_int(p as i64 - 1)))
                        .add(&unit_element(&chi).scale_rat(&rat_int(minus_one_p * p as i64)))
                        .unwrap();
                    (conv(&ub(&chi, 1), &ub(&chi, 1)), rhs)
                },
            ));
            jobs.push(job("U'_1 * U'_1 = (p-1) U'_1 + p".into(), move || {
                let u1p = ub(&chi, 1).scale(&crate::arith::eps_p(p).conj());
                let rhs = u1p
                    .scale_rat(&rat_int(p as i64 - 1))
                    .add(&unit_element(&chi).scale_rat(&rat_int(p as i64)))
                    .unwrap();
                (conv(&u1p, &u1p), rhs)
            }));
        }
        _ => {}
    }

    jobs
}

/// Verifies the defining relation families of the Hecke algebra for the given
/// character: the structure relations among torus and Weyl basis elements for
/// |m|, |n| <= 2 and the character-dependent quadratic relations. The checks
/// are independent and run on worker threads; the returned order is fixed.
pub fn verify_relations(chi: &LocalCharacter) -> Vec<RelationCheck> {
    let jobs = relation_jobs(*chi);
    run_relation_jobs(jobs)
}

fn run_relation_jobs(jobs: Vec<RelationJob>) -> Vec<RelationCheck> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let workers = workers.min(jobs.len().max(1));
    if workers <= 1 {
        return jobs
            .iter()
            .map(|(name, f)| {
                let (l, r) = f();
                check_eq(name, &l, &r)
            })
            .collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<RelationCheck>>> = Mutex::new(vec![None; jobs.len()]);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let (name, f) = &jobs[i];
                let (lhs, rhs) = f();
                let check = check_eq(name, &lhs, &rhs);
                slots.lock().unwrap()[i] = Some(check);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|c| c.expect("job completed"))
        .collect()
}
