//! Parsers and serializers for the plain-text data formats, plus loading of
//! space manifests and the bundled reference truncations.
//!
//! q-series grammar: a header line "W_NUM W_DEN LEVEL PREC" (weight =
//! W_NUM/W_DEN), then lines "n num[/den]" with n strictly increasing and
//! n <= PREC; omitted indices are zero. Newform grammar: "LABEL WEIGHT LEVEL"
//! then "p a_p" lines. Manifest: "SPACE W_NUM W_DEN LEVEL PREC" then one
//! series path per line, relative to the manifest. All ASCII, LF-terminated.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::arith::{fmt_rat, Int, Rat};
use crate::qexp::QExpansion;
use crate::spaces::{HalfIntegralSpace, NewformData};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IoError {
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
    DuplicateIndex {
        line: usize,
        index: u64,
    },
    PrecisionHeaderMismatch {
        line: usize,
        index: u64,
        prec: u64,
    },
    InvariantViolation(String),
    File(String),
}

impl fmt::Display for IoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IoError::Parse { line, col, msg } => {
                write!(f, "parse error at {}:{}: {}", line, col, msg)
            }
            IoError::DuplicateIndex { line, index } => {
                write!(f, "line {}: index {} repeated or out of order", line, index)
            }
            IoError::PrecisionHeaderMismatch { line, index, prec } => {
                write!(
                    f,
                    "line {}: index {} exceeds declared precision {}",
                    line, index, prec
                )
            }
            IoError::InvariantViolation(s) => write!(f, "invariant violation: {}", s),
            IoError::File(s) => write!(f, "file error: {}", s),
        }
    }
}

impl std::error::Error for IoError {}

/// A parsed q-series file: weight W_NUM/W_DEN, level, and the series.
#[derive(Debug, Clone)]
pub struct QSeriesFile {
    pub w_num: u64,
    pub w_den: u64,
    pub level: u64,
    pub series: QExpansion,
}

fn parse_err<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T, IoError> {
    Err(IoError::Parse {
        line,
        col,
        msg: msg.into(),
    })
}

fn parse_u64(tok: &str, line: usize, col: usize) -> Result<u64, IoError> {
    tok.parse::<u64>()
        .or_else(|_| parse_err(line, col, format!("expected integer, got {:?}", tok)))
}

fn parse_rat(tok: &str, line: usize, col: usize) -> Result<Rat, IoError> {
    let parse_int = |s: &str| -> Result<Int, IoError> {
        s.parse::<Int>()
            .or_else(|_| parse_err(line, col, format!("expected rational, got {:?}", tok)))
    };
    match tok.split_once('/') {
        None => Ok(Rat::from_integer(parse_int(tok)?)),
        Some((n, d)) => {
            let num = parse_int(n)?;
            let den = parse_int(d)?;
            if den <= Int::from(0) {
                return parse_err(line, col, "denominator must be positive");
            }
            Ok(Rat::new(num, den))
        }
    }
}

/// Column (1-based byte offset) of the i-th whitespace token of a line.
fn token_col(line: &str, idx: usize) -> usize {
    let mut col = 1;
    let mut count = 0;
    let mut in_tok = false;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            in_tok = false;
        } else if !in_tok {
            in_tok = true;
            if count == idx {
                col = i + 1;
                break;
            }
            count += 1;
        }
    }
    col
}

pub fn parse_qseries(text: &str) -> Result<QSeriesFile, IoError> {
    let mut lines = text.lines().enumerate();
    let (ln0, header) = lines.next().ok_or(IoError::Parse {
        line: 1,
        col: 1,
        msg: "empty input".into(),
    })?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 4 {
        return parse_err(ln0 + 1, 1, "header must be W_NUM W_DEN LEVEL PREC");
    }
    let w_num = parse_u64(toks[0], ln0 + 1, token_col(header, 0))?;
    let w_den = parse_u64(toks[1], ln0 + 1, token_col(header, 1))?;
    let level = parse_u64(toks[2], ln0 + 1, token_col(header, 2))?;
    let prec = parse_u64(toks[3], ln0 + 1, token_col(header, 3))?;
    let mut series = QExpansion::zero(prec);
    let mut last: Option<u64> = None;
    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return parse_err(ln + 1, 1, "coefficient lines are \"n num[/den]\"");
        }
        let n = parse_u64(toks[0], ln + 1, token_col(line, 0))?;
        if n > prec {
            return Err(IoError::PrecisionHeaderMismatch {
                line: ln + 1,
                index: n,
                prec,
            });
        }
        if let Some(l) = last {
            if n <= l {
                return Err(IoError::DuplicateIndex {
                    line: ln + 1,
                    index: n,
                });
            }
        }
        last = Some(n);
        let c = parse_rat(toks[1], ln + 1, token_col(line, 1))?;
        series.set(n, c);
    }
    Ok(QSeriesFile {
        w_num,
        w_den,
        level,
        series,
    })
}

/// Canonical emission: sorted indices, lowest-terms rationals, LF-terminated.
pub fn emit_qseries(f: &QSeriesFile) -> String {
    let mut out = format!("{} {} {} {}\n", f.w_num, f.w_den, f.level, f.series.prec());
    for (n, c) in f.series.iter() {
        out.push_str(&format!("{} {}\n", n, fmt_rat(c)));
    }
    out
}

pub fn parse_newform(text: &str) -> Result<NewformData, IoError> {
    let mut lines = text.lines().enumerate();
    let (ln0, header) = lines.next().ok_or(IoError::Parse {
        line: 1,
        col: 1,
        msg: "empty input".into(),
    })?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 3 {
        return parse_err(ln0 + 1, 1, "header must be LABEL WEIGHT LEVEL");
    }
    let label = toks[0].to_string();
    let weight = parse_u64(toks[1], ln0 + 1, token_col(header, 1))? as u32;
    let level = parse_u64(toks[2], ln0 + 1, token_col(header, 2))?;
    let mut data = NewformData {
        label,
        weight,
        level,
        ap: std::collections::BTreeMap::new(),
    };
    let mut composites: Vec<(u64, Rat)> = Vec::new();
    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return parse_err(ln + 1, 1, "coefficient lines are \"p a_p\"");
        }
        let n = parse_u64(toks[0], ln + 1, token_col(line, 0))?;
        let a = parse_rat(toks[1], ln + 1, token_col(line, 1))?;
        if n < 2 {
            return parse_err(ln + 1, 1, "coefficient index must be at least 2");
        }
        if crate::arith::is_prime(n) {
            if data.ap.insert(n, a).is_some() {
                return Err(IoError::DuplicateIndex {
                    line: ln + 1,
                    index: n,
                });
            }
        } else {
            composites.push((n, a));
        }
    }
    data.validate().map_err(IoError::InvariantViolation)?;
    // composite entries must agree with the Hecke recurrences from the primes
    for (n, a) in composites {
        data.check_extended_coefficient(n, &a)
            .map_err(IoError::InvariantViolation)?;
    }
    Ok(data)
}

pub fn emit_newform(nf: &NewformData) -> String {
    let mut out = format!("{} {} {}\n", nf.label, nf.weight, nf.level);
    for (p, a) in &nf.ap {
        out.push_str(&format!("{} {}\n", p, fmt_rat(a)));
    }
    out
}

/// Loads a space from a manifest file: header "SPACE W_NUM W_DEN LEVEL PREC"
/// followed by one q-series path per line (relative to the manifest).
pub fn load_space(manifest: &Path) -> Result<HalfIntegralSpace, IoError> {
    let text = std::fs::read_to_string(manifest)
        .map_err(|e| IoError::File(format!("{}: {}", manifest.display(), e)))?;
    let dir = manifest.parent().unwrap_or(Path::new("."));
    let mut lines = text.lines().enumerate();
    let (ln0, header) = lines.next().ok_or(IoError::Parse {
        line: 1,
        col: 1,
        msg: "empty manifest".into(),
    })?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 5 || toks[0] != "SPACE" {
        return parse_err(
            ln0 + 1,
            1,
            "manifest header must be SPACE W_NUM W_DEN LEVEL PREC",
        );
    }
    let w_num = parse_u64(toks[1], ln0 + 1, token_col(header, 1))?;
    let w_den = parse_u64(toks[2], ln0 + 1, token_col(header, 2))?;
    let level = parse_u64(toks[3], ln0 + 1, token_col(header, 3))?;
    let prec = parse_u64(toks[4], ln0 + 1, token_col(header, 4))?;
    if w_den != 2 || w_num % 2 == 0 || w_num < 3 {
        return parse_err(ln0 + 1, 1, "space weight must be (2k+1)/2 with k >= 1");
    }
    let k = ((w_num - 1) / 2) as u32;
    let mut basis = Vec::new();
    for (ln, line) in lines {
        let rel = line.trim();
        if rel.is_empty() {
            continue;
        }
        let path = dir.join(rel);
        let content = std::fs::read_to_string(&path)
            .map_err(|e| IoError::File(format!("{}: {}", path.display(), e)))?;
        let qf = parse_qseries(&content)?;
        if qf.w_num != w_num || qf.w_den != w_den || qf.level != level {
            return parse_err(
                ln + 1,
                1,
                format!("series {} disagrees with the manifest header", rel),
            );
        }
        if qf.series.prec() < prec {
            return Err(IoError::PrecisionHeaderMismatch {
                line: ln + 1,
                index: qf.series.prec(),
                prec,
            });
        }
        basis.push(qf.series);
    }
    HalfIntegralSpace::new(k, level, prec, basis)
        .map_err(|e| IoError::InvariantViolation(format!("{}", e)))
}

/// Writes a space as canonical q-series files plus a manifest named
/// `<stem>.manifest` in `dir`; returns the manifest path.
pub fn write_space(
    space: &HalfIntegralSpace,
    dir: &Path,
    stem: &str,
    names: Option<&[String]>,
) -> Result<PathBuf, IoError> {
    std::fs::create_dir_all(dir).map_err(|e| IoError::File(format!("{}: {}", dir.display(), e)))?;
    let w_num = 2 * space.k as u64 + 1;
    let mut manifest = format!("SPACE {} 2 {} {}\n", w_num, space.level, space.prec);
    for (i, b) in space.basis.iter().enumerate() {
        let name = match names {
            Some(ns) => format!("{}.qs", ns[i]),
            None => format!("{}_{}.qs", stem, i),
        };
        let file = QSeriesFile {
            w_num,
            w_den: 2,
            level: space.level,
            series: b.clone(),
        };
        let path = dir.join(&name);
        std::fs::write(&path, emit_qseries(&file))
            .map_err(|e| IoError::File(format!("{}: {}", path.display(), e)))?;
        manifest.push_str(&name);
        manifest.push('\n');
    }
    let mpath = dir.join(format!("{}.manifest", stem));
    std::fs::write(&mpath, manifest)
        .map_err(|e| IoError::File(format!("{}: {}", mpath.display(), e)))?;
    Ok(mpath)
}

/// Directory holding the bundled data sets: the HALFINT_FIXTURES environment
/// variable when set, else the `fixtures` directory at the repository root.
pub fn fixture_dir() -> PathBuf {
    if let Ok(d) = std::env::var("HALFINT_FIXTURES") {
        return PathBuf::from(d);
    }
    let repo = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    if repo.is_dir() {
        return repo;
    }
    PathBuf::from("fixtures")
}

/// Reference truncations of the bundled data sets, kept for digit-exact
/// integrity checks: the generating form of S_{3/2}(Gamma0(28)) and the
/// thirteen basis forms of S_{17/2}(Gamma0(12)).
pub mod reference {
    /// A printed truncation: the last listed exponent bounds the window, and
    /// every unlisted index below it is zero.
    pub struct PrintedForm {
        pub name: &'static str,
        pub prec: u64,
        pub coeffs: &'static [(u64, i64)],
    }

    pub const F28: PrintedForm = PrintedForm {
        name: "f28",
        prec: 21,
        coeffs: &[
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
    };

    pub const S17_LEVEL12: [PrintedForm; 13] = [
        PrintedForm {
            name: "f1",
            prec: 21,
            coeffs: &[
                (1, 1),
                (4, 88),
                (9, 513),
                (12, 3024),
                (13, -4368),
                (16, -13760),
                (21, 33264),
            ],
        },
        PrintedForm {
            name: "f2",
            prec: 11,
            coeffs: &[
                (2, 11),
                (4, 64),
                (7, 232),
                (8, -1408),
                (9, 4608),
                (10, 190),
                (11, -6578),
            ],
        },
        PrintedForm {
            name: "f3",
            prec: 13,
            coeffs: &[
                (3, 9),
                (4, -64),
                (6, 189),
                (7, -232),
                (10, -190),
                (12, 1152),
                (13, -3328),
            ],
        },
        PrintedForm {
            name: "f4",
            prec: 24,
            coeffs: &[
                (5, 1),
                (8, -11),
                (9, 18),
                (12, -9),
                (17, -116),
                (20, 344),
                (21, -99),
                (24, -189),
            ],
        },
        PrintedForm {
            name: "g1",
            prec: 10,
            coeffs: &[
                (1, 1),
                (3, 21),
                (4, -128),
                (6, -609),
                (7, 3192),
                (9, 5313),
                (10, -12810),
            ],
        },
        PrintedForm {
            name: "g2",
            prec: 12,
            coeffs: &[
                (2, 3),
                (3, 7),
                (6, -203),
                (8, -384),
                (9, -416),
                (11, 2706),
                (12, -896),
            ],
        },
        PrintedForm {
            name: "h1",
            prec: 29,
            coeffs: &[
                (5, 1),
                (8, 7),
                (12, -27),
                (17, -80),
                (20, 56),
                (21, 189),
                (24, 81),
                (29, 231),
            ],
        },
        PrintedForm {
            name: "h2",
            prec: 14,
            coeffs: &[
                (2, 7),
                (3, -27),
                (6, 81),
                (8, -896),
                (11, 854),
                (12, 3456),
                (14, -1876),
            ],
        },
        PrintedForm {
            name: "k1",
            prec: 16,
            coeffs: &[
                (1, 1),
                (4, -362),
                (9, -2187),
                (12, -11826),
                (13, 19032),
                (16, 51940),
            ],
        },
        PrintedForm {
            name: "k2",
            prec: 10,
            coeffs: &[(3, 1971), (4, 13184), (6, 31266), (7, -20158), (10, 271340)],
        },
        PrintedForm {
            name: "l1",
            prec: 12,
            coeffs: &[
                (2, 13),
                (3, 129),
                (5, 736),
                (6, 1323),
                (8, 1664),
                (11, 5918),
                (12, 16512),
            ],
        },
        PrintedForm {
            name: "m1",
            prec: 21,
            coeffs: &[
                (3, 1),
                (6, -18),
                (7, -42),
                (10, -12),
                (12, 128),
                (13, 384),
                (15, -126),
                (19, -1074),
                (21, 896),
            ],
        },
        PrintedForm {
            name: "n1",
            prec: 10,
            coeffs: &[
                (1, 16),
                (3, -1539),
                (4, -2048),
                (6, -5994),
                (7, -50178),
                (9, -34992),
                (10, -2460),
            ],
        },
    ];
}
