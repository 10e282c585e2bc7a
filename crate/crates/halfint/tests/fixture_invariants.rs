//! Structural invariants exercised on the bundled data sets, beyond the
//! acceptance criteria: joint injectivity of the Shimura lifts, commuting
//! operator matrices, and the eigenvalue records of the everywhere-new
//! blocks.

use halfint::arith::rat_int;
use halfint::data_io;
use halfint::linalg;
use halfint::shimura::{is_squarefree, sh_lift};
use halfint::spaces::{
    analyzed_decomposition, block_eigendata, operator_matrix, HalfIntegralSpace, Newness, SpaceOp,
};
use num_traits::Signed;

fn load(name: &str) -> HalfIntegralSpace {
    data_io::load_space(&data_io::fixture_dir().join(name)).expect("bundled space loads")
}

#[test]
fn joint_lift_kernel_is_trivial() {
    // A vector of the level-12 space whose lifts Sh_t vanish for every
    // squarefree t up to the window is the zero vector: the stacked lift
    // coefficients have full rank 13.
    let s = load("s17_12.manifest");
    let mut rows: Vec<Vec<halfint::Rat>> = vec![Vec::new(); s.dim()];
    for t in 1..=10u64 {
        if !is_squarefree(t) {
            continue;
        }
        for (i, b) in s.basis.iter().enumerate() {
            let lift = sh_lift(b, t, s.k, s.level).unwrap();
            for n in 1..=lift.prec() {
                rows[i].push(lift.get(n).unwrap());
            }
        }
    }
    assert_eq!(
        linalg::rank(&rows),
        13,
        "stacked Shimura lifts must separate the space"
    );
}

#[test]
fn operator_matrices_commute() {
    let s = load("s17_12.manifest");
    let t25 = operator_matrix(&s, SpaceOp::THalf { q: 5 }).unwrap();
    let t49 = operator_matrix(&s, SpaceOp::THalf { q: 7 }).unwrap();
    let u4 = operator_matrix(&s, SpaceOp::USquared { p: 2 }).unwrap();
    let u9 = operator_matrix(&s, SpaceOp::USquared { p: 3 }).unwrap();
    let pairs = [
        (&t25, &t49, "T25/T49"),
        (&u4, &t25, "U4/T25"),
        (&u9, &t25, "U9/T25"),
        (&u4, &u9, "U4/U9"),
    ];
    for (a, b, name) in pairs {
        assert_eq!(
            linalg::mat_mul(a, b),
            linalg::mat_mul(b, a),
            "{} do not commute",
            name
        );
    }
}

#[test]
fn minus_block_eigen_records() {
    // The three everywhere-new level-12 blocks carry weight-16, level-6
    // records with |a_2| = 2^7 and |a_3| = 3^7, and pass the recurrences.
    let s = load("s17_12.manifest");
    let blocks = analyzed_decomposition(&s, &[5, 7]).unwrap();
    let mut seen = 0;
    for block in &blocks {
        if !(block.dim() == 1 && block.newness.values().all(|n| *n == Newness::New)) {
            continue;
        }
        seen += 1;
        let data = block_eigendata(&s, block, "probe").unwrap();
        assert_eq!(data.weight, 16);
        assert_eq!(data.level, 6);
        assert!(data.validate().is_ok());
        assert_eq!(data.ap[&2].clone().abs(), rat_int(128));
        assert_eq!(data.ap[&3].clone().abs(), rat_int(2187));
    }
    assert_eq!(seen, 3);
}

#[test]
fn level28_block_eigen_record() {
    let s = load("s3_28.manifest");
    let blocks = analyzed_decomposition(&s, &[3, 5]).unwrap();
    assert_eq!(blocks.len(), 1);
    let data = block_eigendata(&s, &blocks[0], "F14").unwrap();
    assert_eq!(data.weight, 2);
    assert_eq!(data.level, 14);
    assert_eq!(data.ap[&2], rat_int(-1));
    assert_eq!(data.ap[&3], rat_int(-2));
    assert_eq!(data.ap[&5], rat_int(0));
    assert_eq!(data.ap[&7], rat_int(1));
}

#[test]
fn bundled_weight16_records_parse_and_validate() {
    let dir = data_io::fixture_dir().join("newforms");
    let mut count = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().map(|e| e == "nf").unwrap_or(false) {
            let text = std::fs::read_to_string(&path).unwrap();
            let nf = data_io::parse_newform(&text)
                .unwrap_or_else(|e| panic!("{} failed to parse: {}", path.display(), e));
            assert!(nf.validate().is_ok(), "{}", path.display());
            count += 1;
        }
    }
    assert!(count >= 4, "expected the f14 and three weight-16 records");
}

#[test]
fn lseries_identity_on_bundled_form() {
    let s = load("s3_28.manifest");
    let f = &s.basis[0];
    let lift = sh_lift(f, 1, 1, 28).unwrap();
    assert_eq!(
        halfint::shimura::lseries_identity_check(f, &lift, -4, 1, 28),
        Ok(true)
    );
    assert_eq!(
        halfint::shimura::lseries_identity_check(f, &lift, -3, 1, 28),
        Ok(true)
    );
}
