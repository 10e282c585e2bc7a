//! Command-line front end: relation verification, cocycle fuzzing, space
//! decomposition, plus/minus extraction, Shimura lifts, level-4 basis
//! generation, and reproduction checks of the bundled data sets.
//!
//! Exit codes: 0 all checks pass, 1 a check failed (machine-readable
//! "FAIL <check-id> <detail>" lines), 2 usage error.

mod fixture_gen;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use halfint::arith::{fmt_rat, is_prime, rat_int};
use halfint::data_io::{self, reference, QSeriesFile};
use halfint::linalg;
use halfint::local_hecke::verify_relations;
use halfint::metaplectic::{cocycle_fuzz, LocalCharacter};
use halfint::qexp::{self, QExpansion};
use halfint::shimura::sh_lift;
use halfint::spaces::{
    analyzed_decomposition, minus_space_with_primes, plus_space, EigenDesc, HalfIntegralSpace,
    Newness,
};

fn usage() -> ExitCode {
    eprintln!(
        "usage: halfint <command> [flags]\n\
         \n\
         commands:\n\
         \u{20} verify-local --p P --gamma trivial|legendre   relation table, odd p\n\
         \u{20} verify-local --p 2 --kmod4 K                  relation table at p = 2\n\
         \u{20} cocycle-fuzz --p P --trials N --seed S        2-cocycle identity fuzzing\n\
         \u{20} decompose --space MANIFEST --primes q1,q2     Hecke block report\n\
         \u{20} minus-space --space MANIFEST [--out DIR]      minus-space sub-basis\n\
         \u{20} plus-space --space MANIFEST [--out DIR]       plus-space sub-basis\n\
         \u{20} shimura-lift --space MANIFEST --t T           lift each basis form\n\
         \u{20} shimura-lift --series FILE --k K --t T        lift one series\n\
         \u{20} gen-level4 --k K --prec P [--out DIR]         generated level-4 space\n\
         \u{20} check-fixtures                                reproduction suite\n\
         \u{20} gen-fixtures [--out DIR] [--prec12 N] [--prec28 N]\n\
         \n\
         HALFINT_FIXTURES overrides the bundled data directory."
    );
    ExitCode::from(2)
}

struct Flags {
    map: BTreeMap<String, String>,
}

impl Flags {
    fn parse(args: &[String]) -> Option<Flags> {
        let mut map = BTreeMap::new();
        let mut i = 0;
        while i < args.len() {
            let k = args[i].strip_prefix("--")?;
            let v = args.get(i + 1)?;
            map.insert(k.to_string(), v.clone());
            i += 2;
        }
        Some(Flags { map })
    }

    fn get(&self, k: &str) -> Option<&str> {
        self.map.get(k).map(String::as_str)
    }

    fn get_u64(&self, k: &str) -> Option<u64> {
        self.get(k)?.parse().ok()
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(cmd) = args.first() else {
        return usage();
    };
    let Some(flags) = Flags::parse(&args[1..]) else {
        return usage();
    };
    match cmd.as_str() {
        "verify-local" => cmd_verify_local(&flags),
        "cocycle-fuzz" => cmd_cocycle_fuzz(&flags),
        "decompose" => cmd_decompose(&flags),
        "minus-space" => cmd_sub_space(&flags, true),
        "plus-space" => cmd_sub_space(&flags, false),
        "shimura-lift" => cmd_shimura_lift(&flags),
        "gen-level4" => cmd_gen_level4(&flags),
        "check-fixtures" => cmd_check_fixtures(),
        "gen-fixtures" => cmd_gen_fixtures(&flags),
        _ => usage(),
    }
}

fn cmd_verify_local(flags: &Flags) -> ExitCode {
    let Some(p) = flags.get_u64("p") else {
        return usage();
    };
    if !is_prime(p) {
        eprintln!("FAIL usage p must be prime");
        return ExitCode::from(2);
    }
    let chi = if p == 2 {
        let Some(k) = flags.get_u64("kmod4") else {
            return usage();
        };
        LocalCharacter::two_adic(k as u32)
    } else {
        match flags.get("gamma") {
            Some("trivial") => LocalCharacter::odd_trivial(p),
            Some("legendre") => LocalCharacter::odd_legendre(p),
            _ => return usage(),
        }
    };
    let checks = verify_relations(&chi);
    let mut ok = true;
    for c in &checks {
        if c.ok {
            println!("{} ... OK", c.name);
        } else {
            ok = false;
            println!("FAIL relation {} : {}", c.name, c.detail);
        }
    }
    println!("{} relations checked at p = {}", checks.len(), p);
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn cmd_cocycle_fuzz(flags: &Flags) -> ExitCode {
    let (Some(p), Some(trials), Some(seed)) = (
        flags.get_u64("p"),
        flags.get_u64("trials"),
        flags.get_u64("seed"),
    ) else {
        return usage();
    };
    if !is_prime(p) {
        eprintln!("FAIL usage p must be prime");
        return ExitCode::from(2);
    }
    let failures = cocycle_fuzz(p, trials, seed);
    println!(
        "cocycle identity at p = {}: {} trials, {} failures (seed {})",
        p, trials, failures, seed
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("FAIL cocycle {} failing triples", failures);
        ExitCode::FAILURE
    }
}

fn load_space_flag(flags: &Flags) -> Result<HalfIntegralSpace, ExitCode> {
    let Some(path) = flags.get("space") else {
        return Err(usage());
    };
    match data_io::load_space(&PathBuf::from(path)) {
        Ok(s) => Ok(s),
        Err(e) => {
            eprintln!("FAIL load-space {}", e);
            Err(ExitCode::FAILURE)
        }
    }
}

fn newness_str(n: &Newness) -> &'static str {
    match n {
        Newness::New => "new",
        Newness::Old => "old",
        Newness::Undecided => "undecided",
    }
}

fn cmd_decompose(flags: &Flags) -> ExitCode {
    let space = match load_space_flag(flags) {
        Ok(s) => s,
        Err(c) => return c,
    };
    let primes: Vec<u64> = match flags.get("primes") {
        Some(s) => {
            let parsed: Option<Vec<u64>> = s.split(',').map(|t| t.trim().parse().ok()).collect();
            match parsed {
                Some(v) => v,
                None => return usage(),
            }
        }
        None => halfint::spaces::default_decomposition_primes(space.level, 2),
    };
    if space.dim() == 0 {
        println!("space is zero-dimensional: empty report");
        return ExitCode::SUCCESS;
    }
    if !space.certified() {
        println!(
            "note: precision {} is below the certification bound {}; identities verified to precision only",
            space.prec,
            space.sturm_bound()
        );
    }
    match analyzed_decomposition(&space, &primes) {
        Ok(blocks) => {
            for (i, b) in blocks.iter().enumerate() {
                let eig: Vec<String> = b
                    .eigendata
                    .iter()
                    .map(|(q, e)| match e {
                        EigenDesc::Rational(r) => format!("T{}={}", q * q, fmt_rat(r)),
                        EigenDesc::UnsplitFactor(_) => format!("T{}={}", q * q, e),
                    })
                    .collect();
                let newness: Vec<String> = b
                    .newness
                    .iter()
                    .map(|(p, n)| format!("new@{}={}", p, newness_str(n)))
                    .collect();
                println!(
                    "block {} dim={} {} {}",
                    i + 1,
                    b.dim(),
                    eig.join(" "),
                    newness.join(" ")
                );
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("FAIL decompose {}", e);
            ExitCode::FAILURE
        }
    }
}

fn emit_sub_space(space: &HalfIntegralSpace, flags: &Flags, stem: &str) -> ExitCode {
    if let Some(dir) = flags.get("out") {
        match data_io::write_space(space, &PathBuf::from(dir), stem, None) {
            Ok(m) => {
                println!("wrote {} ({} forms)", m.display(), space.dim());
                ExitCode::SUCCESS
            }
            Err(e) => {
                println!("FAIL emit {}", e);
                ExitCode::FAILURE
            }
        }
    } else {
        let w_num = 2 * space.k as u64 + 1;
        for b in &space.basis {
            let qf = QSeriesFile {
                w_num,
                w_den: 2,
                level: space.level,
                series: b.clone(),
            };
            println!("{}", data_io::emit_qseries(&qf));
        }
        ExitCode::SUCCESS
    }
}

fn cmd_sub_space(flags: &Flags, minus: bool) -> ExitCode {
    let space = match load_space_flag(flags) {
        Ok(s) => s,
        Err(c) => return c,
    };
    if minus {
        let primes = halfint::spaces::default_decomposition_primes(space.level, 2);
        match minus_space_with_primes(&space, &primes) {
            Ok(m) => emit_sub_space(&m, flags, "minus"),
            Err(e) => {
                println!("FAIL minus-space {}", e);
                ExitCode::FAILURE
            }
        }
    } else {
        let p = plus_space(&space);
        emit_sub_space(&p, flags, "plus")
    }
}

fn cmd_shimura_lift(flags: &Flags) -> ExitCode {
    let Some(t) = flags.get_u64("t") else {
        return usage();
    };
    let lifts: Vec<(QExpansion, u32, u64)> = if flags.get("space").is_some() {
        let space = match load_space_flag(flags) {
            Ok(s) => s,
            Err(c) => return c,
        };
        space
            .basis
            .iter()
            .map(|b| (b.clone(), space.k, space.level))
            .collect()
    } else if let Some(file) = flags.get("series") {
        let Some(k) = flags.get_u64("k") else {
            return usage();
        };
        let text = match std::fs::read_to_string(file) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("FAIL read {}: {}", file, e);
                return ExitCode::FAILURE;
            }
        };
        match data_io::parse_qseries(&text) {
            Ok(qf) => vec![(qf.series, k as u32, qf.level)],
            Err(e) => {
                eprintln!("FAIL parse {}", e);
                return ExitCode::FAILURE;
            }
        }
    } else {
        return usage();
    };
    for (f, k, level) in lifts {
        match sh_lift(&f, t, k, level) {
            Ok(l) => {
                let qf = QSeriesFile {
                    w_num: 2 * k as u64,
                    w_den: 1,
                    level: level / 2,
                    series: l,
                };
                println!("{}", data_io::emit_qseries(&qf));
            }
            Err(e) => {
                println!("FAIL shimura-lift {}", e);
                return ExitCode::FAILURE;
            }
        }
    }
    ExitCode::SUCCESS
}

fn cmd_gen_level4(flags: &Flags) -> ExitCode {
    let (Some(k), Some(prec)) = (flags.get_u64("k"), flags.get_u64("prec")) else {
        return usage();
    };
    match halfint::basis_gen::gen_space_level4(k as u32, prec) {
        Ok(space) => {
            println!(
                "generated space of dimension {} at precision {}",
                space.dim(),
                prec
            );
            let dir = flags
                .get("out")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."));
            match data_io::write_space(&space, &dir, &format!("level4_k{}", k), None) {
                Ok(m) => {
                    println!("wrote {}", m.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    println!("FAIL emit {}", e);
                    ExitCode::FAILURE
                }
            }
        }
        Err(e) => {
            println!("FAIL gen-level4 {}", e);
            ExitCode::FAILURE
        }
    }
}

fn cmd_gen_fixtures(flags: &Flags) -> ExitCode {
    let out = flags
        .get("out")
        .map(PathBuf::from)
        .unwrap_or_else(data_io::fixture_dir);
    let prec12 = flags.get_u64("prec12").unwrap_or(1100);
    let prec28 = flags.get_u64("prec28").unwrap_or(1800);
    match fixture_gen::generate_all(&out, prec12, prec28) {
        Ok(()) => {
            println!("fixtures written to {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("FAIL gen-fixtures {}", e);
            ExitCode::FAILURE
        }
    }
}

struct CheckReport {
    failures: u64,
}

impl CheckReport {
    fn new() -> CheckReport {
        CheckReport { failures: 0 }
    }

    fn check(&mut self, id: &str, ok: bool, detail: impl Fn() -> String) {
        if ok {
            println!("OK   {}", id);
        } else {
            self.failures += 1;
            println!("FAIL {} {}", id, detail());
        }
    }
}

fn cmd_check_fixtures() -> ExitCode {
    let dir = data_io::fixture_dir();
    let mut report = CheckReport::new();

    // ---- level 28, weight 3/2 ----
    let s28 = match data_io::load_space(&dir.join("s3_28.manifest")) {
        Ok(s) => s,
        Err(e) => {
            println!("FAIL load-28 {}", e);
            return ExitCode::FAILURE;
        }
    };
    report.check("28.dim", s28.dim() == 1, || format!("dim = {}", s28.dim()));
    let f28 = &s28.basis[0];
    let printed = QExpansion::from_int_coeffs(reference::F28.coeffs, reference::F28.prec);
    let integrity = (0..=reference::F28.prec).all(|n| f28.get(n) == printed.get(n));
    report.check("28.printed-digits", integrity, || {
        "bundled series deviates".into()
    });
    let t9 = qexp::t_op_half(3, 1, f28, 28);
    report.check(
        "28.T9",
        t9 == qexp::scale(&rat_int(-2), f28).truncate(t9.prec()),
        || "T9 eigenvalue is not -2".into(),
    );
    let t25 = qexp::t_op_half(5, 1, f28, 28);
    report.check("28.T25", t25.is_zero_series(), || {
        "T25 does not annihilate".into()
    });
    let u4 = qexp::u_op(4, f28);
    report.check(
        "28.U4",
        u4 == qexp::scale(&rat_int(-1), f28).truncate(u4.prec()),
        || "U4 eigenvalue is not -1".into(),
    );
    let plus = plus_space(&s28);
    report.check("28.plus-dim", plus.dim() == 0, || {
        format!("dim = {}", plus.dim())
    });
    match minus_space_with_primes(&s28, &[3, 5]) {
        Ok(m) => report.check("28.minus-dim", m.dim() == 1, || {
            format!("dim = {}", m.dim())
        }),
        Err(e) => report.check("28.minus-dim", false, || format!("{}", e)),
    }

    // ---- level 12, weight 17/2 ----
    let s12 = match data_io::load_space(&dir.join("s17_12.manifest")) {
        Ok(s) => s,
        Err(e) => {
            println!("FAIL load-12 {}", e);
            return ExitCode::FAILURE;
        }
    };
    report.check("12.dim", s12.dim() == 13, || format!("dim = {}", s12.dim()));
    let mut all_digits = true;
    for (i, pf) in reference::S17_LEVEL12.iter().enumerate() {
        let printed = QExpansion::from_int_coeffs(pf.coeffs, pf.prec);
        for n in 0..=pf.prec {
            if s12.basis[i].get(n) != printed.get(n) {
                all_digits = false;
            }
        }
    }
    report.check("12.printed-digits", all_digits, || {
        "bundled series deviate".into()
    });
    match analyzed_decomposition(&s12, &[5, 7]) {
        Ok(blocks) => {
            let dims: Vec<usize> = blocks.iter().map(|b| b.dim()).collect();
            report.check("12.block-dims", dims == vec![4, 2, 2, 2, 1, 1, 1], || {
                format!("dims = {:?}", dims)
            });
        }
        Err(e) => report.check("12.block-dims", false, || format!("{}", e)),
    }
    let plus12 = plus_space(&s12);
    report.check("12.plus-dim", plus12.dim() == 4, || {
        format!("dim = {}", plus12.dim())
    });
    // membership of the four printed plus-space forms
    let plus_rows: Vec<Vec<_>> = plus12
        .basis
        .iter()
        .map(|b| (0..=plus12.prec).map(|n| b.get(n).unwrap()).collect())
        .collect();
    let ech = linalg::echelonize(&plus_rows);
    for name in ["f1", "f4", "h1", "k1"] {
        let idx = reference::S17_LEVEL12
            .iter()
            .position(|pf| pf.name == name)
            .unwrap();
        let target: Vec<_> = (0..=plus12.prec)
            .map(|n| s12.basis[idx].get(n).unwrap())
            .collect();
        let inside = linalg::coords_in_span(&ech, &plus_rows, &target).is_some();
        report.check(&format!("12.plus-contains-{}", name), inside, || {
            "not in the span".into()
        });
    }
    match minus_space_with_primes(&s12, &[5, 7]) {
        Ok(minus) => {
            report.check("12.minus-dim", minus.dim() == 3, || {
                format!("dim = {}", minus.dim())
            });
            let rows: Vec<Vec<_>> = minus
                .basis
                .iter()
                .map(|b| (0..=minus.prec).map(|n| b.get(n).unwrap()).collect())
                .collect();
            let ech = linalg::echelonize(&rows);
            for name in ["l1", "m1", "n1"] {
                let idx = reference::S17_LEVEL12
                    .iter()
                    .position(|pf| pf.name == name)
                    .unwrap();
                let target: Vec<_> = (0..=minus.prec)
                    .map(|n| s12.basis[idx].get(n).unwrap())
                    .collect();
                let inside = linalg::coords_in_span(&ech, &rows, &target).is_some();
                report.check(&format!("12.minus-contains-{}", name), inside, || {
                    "not in span".into()
                });
            }
        }
        Err(e) => report.check("12.minus-dim", false, || format!("{}", e)),
    }

    // ---- newform record ----
    match std::fs::read_to_string(dir.join("newforms/f14.nf")) {
        Ok(text) => match data_io::parse_newform(&text) {
            Ok(nf) => {
                report.check(
                    "nf.f14",
                    nf.level == 14
                        && nf.ap[&2] == rat_int(-1)
                        && nf.ap[&3] == rat_int(-2)
                        && nf.ap[&5] == rat_int(0),
                    || "unexpected eigenvalues".into(),
                );
            }
            Err(e) => report.check("nf.f14", false, || format!("{}", e)),
        },
        Err(e) => report.check("nf.f14", false, || format!("{}", e)),
    }

    println!("check-fixtures: {} failure(s)", report.failures);
    if report.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
