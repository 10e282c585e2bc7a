//! Browser demo: a thin wasm-bindgen wrapper exposing three interactive
//! operations of the workbench — the Hecke-algebra relation table for a
//! chosen prime and character, a metaplectic multiplication scratchpad, and
//! Shimura lifts of the bundled level-28 generator. All arithmetic stays
//! exact; results are rendered as plain text for the page.

use wasm_bindgen::prelude::*;

use halfint::arith::{fmt_rat, is_prime, pretty_cyc, Rat};
use halfint::data_io;
use halfint::local_hecke::verify_relations;
use halfint::metaplectic::{cocycle_fuzz, meta_mul, LocalCharacter, Mat2, MetaElement};
use halfint::qexp;
use halfint::shimura::sh_lift;

const F28_TEXT: &str = include_str!("../../../fixtures/f28.qs");

fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    match s.split_once('/') {
        None => {
            let n: i64 = s.parse().map_err(|_| format!("bad rational {:?}", s))?;
            Ok(Rat::from_integer(n.into()))
        }
        Some((n, d)) => {
            let n: i64 = n
                .trim()
                .parse()
                .map_err(|_| format!("bad numerator {:?}", s))?;
            let d: i64 = d
                .trim()
                .parse()
                .map_err(|_| format!("bad denominator {:?}", s))?;
            if d == 0 {
                return Err("zero denominator".into());
            }
            Ok(Rat::new(n.into(), d.into()))
        }
    }
}

fn is_one(r: &Rat) -> bool {
    r.numer() == r.denom()
}

/// Relation table of the genuine Hecke algebra at p for the chosen character
/// ("trivial" or "legendre" for odd p; the k mod 4 value is used at p = 2).
#[wasm_bindgen]
pub fn relation_table(p: u32, gamma: &str, k_mod_4: u32) -> String {
    let p = p as u64;
    if !is_prime(p) {
        return format!("{} is not prime", p);
    }
    if p > 13 {
        return "pick p <= 13: the coset sums grow as p^4".into();
    }
    let chi = if p == 2 {
        LocalCharacter::two_adic(k_mod_4)
    } else {
        match gamma {
            "trivial" => LocalCharacter::odd_trivial(p),
            "legendre" => LocalCharacter::odd_legendre(p),
            _ => return format!("unknown character {:?}", gamma),
        }
    };
    let checks = verify_relations(&chi);
    let mut out = String::new();
    let mut ok = 0;
    for c in &checks {
        out.push_str(&format!(
            "{:<34} {}\n",
            c.name,
            if c.ok { "OK" } else { "FAIL" }
        ));
        if c.ok {
            ok += 1;
        }
    }
    out.push_str(&format!(
        "\n{}/{} relations hold exactly in Q(zeta_8)\n",
        ok,
        checks.len()
    ));
    out
}

/// Multiplies two elements of the double cover of SL2(Qp): entries are
/// rationals "n" or "n/d", signs are +1 or -1. Returns the cocycle value, the
/// product, the inverse of the left factor, and the double coset it lies in.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn cover_multiply(
    p: u32,
    a1: &str,
    b1: &str,
    c1: &str,
    d1: &str,
    eps1: i32,
    a2: &str,
    b2: &str,
    c2: &str,
    d2: &str,
    eps2: i32,
) -> String {
    let p = p as u64;
    if !is_prime(p) {
        return format!("{} is not prime", p);
    }
    let build = |a: &str, b: &str, c: &str, d: &str, eps: i32| -> Result<MetaElement, String> {
        let (a, b, c, d) = (parse_rat(a)?, parse_rat(b)?, parse_rat(c)?, parse_rat(d)?);
        let det = &a * &d - &b * &c;
        if !is_one(&det) {
            return Err(format!("determinant is {}, need 1", fmt_rat(&det)));
        }
        if eps != 1 && eps != -1 {
            return Err("sign must be +1 or -1".into());
        }
        Ok(MetaElement::new(Mat2::new(a, b, c, d), eps, p))
    };
    let x = match build(a1, b1, c1, d1, eps1) {
        Ok(x) => x,
        Err(e) => return format!("left factor: {}", e),
    };
    let y = match build(a2, b2, c2, d2, eps2) {
        Ok(y) => y,
        Err(e) => return format!("right factor: {}", e),
    };
    let sigma = halfint::metaplectic::sigma(&x.m, &y.m, p);
    let prod = meta_mul(&x, &y).expect("places match");
    let xi = halfint::metaplectic::meta_inv(&x);
    let mut out = String::new();
    out.push_str(&format!("sigma_p(g, h) = {}\n\n", sigma));
    out.push_str(&format!(
        "(g,{}) (h,{}) = ([[{}, {}], [{}, {}]], {})\n\n",
        x.eps,
        y.eps,
        fmt_rat(&prod.m.a),
        fmt_rat(&prod.m.b),
        fmt_rat(&prod.m.c),
        fmt_rat(&prod.m.d),
        prod.eps
    ));
    out.push_str(&format!(
        "(g,{})^-1 = ([[{}, {}], [{}, {}]], {})\n",
        x.eps,
        fmt_rat(&xi.m.a),
        fmt_rat(&xi.m.b),
        fmt_rat(&xi.m.c),
        fmt_rat(&xi.m.d),
        xi.eps
    ));
    if let Some(label) = halfint::local_hecke::coset_label(&x, if p == 2 { 2 } else { 1 }) {
        out.push_str(&format!("\ndouble coset of (g,eps): {}\n", label));
        let chi = if p == 2 {
            LocalCharacter::two_adic(0)
        } else {
            LocalCharacter::odd_trivial(p)
        };
        if let Ok(e) = halfint::local_hecke::basis_element(label, &chi) {
            if let Ok(v) = halfint::local_hecke::evaluate(&e, &x) {
                out.push_str(&format!("basis function value there: {}\n", pretty_cyc(&v)));
            }
        }
    } else {
        out.push_str("\n(g,eps) lies outside the torus/Weyl double cosets\n");
    }
    out
}

/// Fuzzes the 2-cocycle identity on pseudo-random triples; deterministic for
/// a fixed seed.
#[wasm_bindgen]
pub fn cocycle_fuzz_report(p: u32, trials: u32, seed: u32) -> String {
    let p = p as u64;
    if !is_prime(p) {
        return format!("{} is not prime", p);
    }
    let failures = cocycle_fuzz(p, trials as u64, seed as u64);
    format!(
        "sigma_p(g,h) sigma_p(gh,k) = sigma_p(g,hk) sigma_p(h,k)\n\
         p = {}, {} random triples (seed {}): {} failures",
        p, trials, seed, failures
    )
}

/// Shimura lift of the bundled level-28 weight-3/2 generator for a squarefree
/// t, shown next to the source data.
#[wasm_bindgen]
pub fn lift_level28(t: u32) -> String {
    let qf = match data_io::parse_qseries(F28_TEXT) {
        Ok(q) => q,
        Err(e) => return format!("bundled series failed to parse: {}", e),
    };
    let f = qf.series;
    match sh_lift(&f, t as u64, 1, 28) {
        Ok(lift) => {
            let mut out = String::new();
            out.push_str(&format!(
                "source: weight 3/2, level 28, precision {}\nlift Sh_{}: weight 2, level 14, precision {}\n\n",
                f.prec(),
                t,
                lift.prec()
            ));
            let u4 = qexp::u_op(4, &f);
            let neg = qexp::scale(&Rat::from_integer((-1).into()), &f);
            out.push_str(&format!(
                "U_4 eigenvalue of the source: {}\n\n",
                if u4 == neg.truncate(u4.prec()) {
                    "-1"
                } else {
                    "not an eigenform?"
                }
            ));
            out.push_str("n : A_n\n");
            for n in 1..=lift.prec().min(24) {
                out.push_str(&format!("{:>2} : {}\n", n, fmt_rat(&lift.get(n).unwrap())));
            }
            out
        }
        Err(e) => format!("lift failed: {}", e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relation_table_renders() {
        let t = relation_table(3, "trivial", 0);
        assert!(t.contains("OK"));
        assert!(!t.contains("FAIL"));
        let t = relation_table(2, "", 1);
        assert!(t.contains("relations hold"));
        assert!(relation_table(9, "trivial", 0).contains("not prime"));
    }

    #[test]
    fn cover_multiply_renders() {
        let out = cover_multiply(3, "3", "0", "0", "1/3", 1, "3", "0", "0", "1/3", 1);
        assert!(out.contains("sigma_p(g, h) = -1"));
        assert!(out.contains("[[9, 0], [0, 1/9]], -1"));
        let bad = cover_multiply(3, "1", "1", "1", "1", 1, "1", "0", "0", "1", 1);
        assert!(bad.contains("determinant"));
    }

    #[test]
    fn lift_renders() {
        let out = lift_level28(1);
        assert!(out.contains("U_4 eigenvalue of the source: -1"));
        assert!(out.contains(" 2 : -1"));
        assert!(out.contains(" 3 : -2"));
    }
}
