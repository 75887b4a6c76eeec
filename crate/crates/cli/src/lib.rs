//! Command surface of the `supersplit` binary.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | all asserted properties hold (or the verdict is SPLIT / ZERO / TRIVIAL) |
//! | 1 | verdict NONSPLIT or NONTRIVIAL, for commands whose output is a verdict |
//! | 2 | input error: unreadable file, parse or semantic error, invalid atlas |
//! | 3 | UNDECIDED within the degree window (the window is printed) |
//! | 4 | internal failure: an asserted property did not hold |

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use supersplit::atiyah::{affine_atiyah, affine_atiyah_class, dw_verify, initial_form_relation};
use supersplit::atlas::split_model_of;
use supersplit::builders::{cotangent_build, is_own_split_model};
use supersplit::cech::window_from_env;
use supersplit::connection::check_global;
use supersplit::koszul::{
    euler_differential, fixed_point_residual, koszul_iterate, projector_checks, projector_test_set,
    splitting_map, Verdict,
};
use supersplit::obstruction::{
    euler_obstruction_compare, obstruction_class, primary_obstruction, ClassVerdict,
};
use supersplit::sma::{
    atlas_from_document, connections_from_document, omega_from_document, parse_bytes, render_atlas,
    render_cocycle, render_connections, SmaDocument,
};
use supersplit::{Atlas, Error};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNDECIDED: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "supersplit",
    version,
    about = "Splitting, obstructions and Atiyah classes of supermanifold atlases"
)]
struct Cli {
    /// Degree window for cohomology solves (default: SUPERSPLIT_WINDOW or 12).
    #[arg(long, global = true)]
    window: Option<i32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the cocycle conditions and inverses of an atlas. Exit 0 or 2.
    Validate { file: PathBuf },
    /// Print the split model as SMA.
    SplitModel { file: PathBuf },
    /// Euler differential cocycle and splitting verdict. Exit 0 SPLIT, 1 NONSPLIT, 3 UNDECIDED.
    EulerDifferential { file: PathBuf },
    /// Primary obstruction cocycle and its class. Exit 0 ZERO/TRIVIAL, 1 NONTRIVIAL, 3 UNDECIDED.
    Obstruction { file: PathBuf },
    /// Affine Atiyah cocycle and class. Exit 0 ZERO/TRIVIAL, 1 NONTRIVIAL, 3 UNDECIDED.
    /// With --decompose, the block decomposition check: exit 0 PASS, 3 UNDECIDED, 4 FAIL.
    Atiyah {
        file: PathBuf,
        #[arg(long)]
        decompose: bool,
    },
    /// Splitting coordinates from a global connection; prints the split atlas
    /// and a certificate. Exit 0 or 4.
    KoszulSplit {
        file: PathBuf,
        #[arg(long)]
        connection: PathBuf,
    },
    /// Cotangent supermanifold of a reduced atlas deformed by a 1-form cocycle.
    Cotangent {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        omega: PathBuf,
    },
    /// Full invariant suite. Exit 0 all pass, 3 some undecided, 4 some fail.
    Check { file: PathBuf },
}

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(code: i32, stdout: String) -> Outcome {
        Outcome {
            code,
            stdout,
            stderr: String::new(),
        }
    }
}

/// Failure of a command, with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::Parse { .. }
            | Error::Semantic { .. }
            | Error::InvalidAtlas(_)
            | Error::InvalidConnection(_) => EXIT_INPUT,
            _ => EXIT_INTERNAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = std::result::Result<(i32, String), Failure>;

/// Parse `argv` (including the program name) and run the command.
pub fn run_command<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_INPUT,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome::ok(EXIT_OK, text)
            };
        }
    };
    let window = cli
        .window
        .filter(|w| *w > 0)
        .unwrap_or_else(window_from_env);
    let result = match &cli.command {
        Command::Validate { file } => validate(file),
        Command::SplitModel { file } => split_model(file),
        Command::EulerDifferential { file } => euler(file, window),
        Command::Obstruction { file } => obstruction(file, window),
        Command::Atiyah { file, decompose } => atiyah(file, *decompose, window),
        Command::KoszulSplit { file, connection } => koszul_split(file, connection),
        Command::Cotangent { base, omega } => cotangent(base, omega),
        Command::Check { file } => check(file, window),
    };
    match result {
        Ok((code, stdout)) => Outcome::ok(code, stdout),
        Err(f) => Outcome {
            code: f.code,
            stdout: String::new(),
            stderr: format!("error: {}\n", f.message),
        },
    }
}

fn read_document(path: &Path) -> std::result::Result<SmaDocument, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: format!("{}: {e}", path.display()),
    })?;
    parse_bytes(&bytes).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: format!("{}: {e}", path.display()),
    })
}

fn read_atlas(path: &Path) -> std::result::Result<Atlas, Failure> {
    let doc = read_document(path)?;
    let a = atlas_from_document(&doc).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: format!("{}: {e}", path.display()),
    })?;
    Ok(a)
}

fn read_valid_atlas(path: &Path) -> std::result::Result<Atlas, Failure> {
    let a = read_atlas(path)?;
    let report = a.validate();
    if !report.passed() {
        return Err(Failure {
            code: EXIT_INPUT,
            message: format!("{}: invalid atlas\n{report}", path.display()),
        });
    }
    Ok(a)
}

fn validate(file: &Path) -> CmdResult {
    let a = read_atlas(file)?;
    let report = a.validate();
    let mut out = format!("{report}\n");
    let ok = report.passed();
    writeln!(
        out,
        "atlas {} ({}|{}), {} chart(s): {}",
        a.name(),
        a.p(),
        a.q(),
        a.charts().len(),
        if ok { "VALID" } else { "INVALID" }
    )
    .ok();
    Ok((if ok { EXIT_OK } else { EXIT_INPUT }, out))
}

fn split_model(file: &Path) -> CmdResult {
    let a = read_valid_atlas(file)?;
    Ok((EXIT_OK, render_atlas(&split_model_of(&a)?)))
}

fn class_code(v: ClassVerdict) -> i32 {
    match v {
        ClassVerdict::Zero | ClassVerdict::Trivial => EXIT_OK,
        ClassVerdict::Nontrivial => EXIT_VERDICT,
        ClassVerdict::Undecided => EXIT_UNDECIDED,
    }
}

fn euler(file: &Path, window: i32) -> CmdResult {
    let a = read_valid_atlas(file)?;
    let e = euler_differential(&a, window)?;
    let mut out = render_cocycle(&e.cocycle);
    for s in &e.stages {
        let how = if s.automatic {
            "vanishes by parity".to_string()
        } else if s.solved {
            format!("solved (kernel {})", s.kernel_dim)
        } else if s.definitive {
            "no solution".to_string()
        } else {
            "no solution in window".to_string()
        };
        writeln!(out, "# degree {}: {how}", s.degree).ok();
    }
    let code = match e.verdict {
        Verdict::Split => EXIT_OK,
        Verdict::NonSplit => EXIT_VERDICT,
        Verdict::Undecided => EXIT_UNDECIDED,
    };
    if e.verdict == Verdict::Undecided {
        writeln!(out, "verdict: {} (window {})", e.verdict, e.window).ok();
    } else {
        writeln!(out, "verdict: {}", e.verdict).ok();
    }
    Ok((code, out))
}

fn obstruction(file: &Path, window: i32) -> CmdResult {
    let a = read_valid_atlas(file)?;
    let eta = primary_obstruction(&a)?;
    let class = obstruction_class(&eta, window)?;
    let mut out = render_cocycle(&eta.entries);
    if class == ClassVerdict::Undecided {
        writeln!(out, "class: {class} (window {window})").ok();
    } else {
        writeln!(out, "class: {class}").ok();
    }
    Ok((class_code(class), out))
}

fn atiyah(file: &Path, decompose: bool, window: i32) -> CmdResult {
    let a = read_valid_atlas(file)?;
    if decompose {
        let r = dw_verify(&a, window)?;
        let mut out = format!("{r}\n");
        let undecided = [&r.evev, &r.mixed, &r.mixed_dual, &r.obstruction]
            .iter()
            .any(|d| !d.equal && !d.definitive);
        let code = if r.pass {
            EXIT_OK
        } else if undecided {
            writeln!(out, "window: {window}").ok();
            EXIT_UNDECIDED
        } else {
            EXIT_INTERNAL
        };
        return Ok((code, out));
    }
    let mut out = String::new();
    for ((i, j), t) in affine_atiyah(&a)? {
        let entries = t.entries();
        if entries.is_empty() {
            writeln!(out, "overlap {i} {j}: 0").ok();
        }
        for (x, y, z, g) in entries {
            writeln!(out, "overlap {i} {j}: gamma {x} {y} {z} = {g}").ok();
        }
    }
    let class = affine_atiyah_class(&a, window)?;
    if class.verdict == ClassVerdict::Undecided {
        writeln!(out, "class: {} (window {window})", class.verdict).ok();
    } else {
        writeln!(out, "class: {}", class.verdict).ok();
    }
    if let Some(conns) = &class.connection {
        let report = check_global(conns, &a);
        if !report.passed() {
            return Err(Failure {
                code: EXIT_INTERNAL,
                message: format!("constructed connection is not global\n{report}"),
            });
        }
        out.push_str("# global connection\n");
        out.push_str(&render_connections(&a, conns));
    }
    Ok((class_code(class.verdict), out))
}

fn koszul_split(file: &Path, connection: &Path) -> CmdResult {
    let a = read_valid_atlas(file)?;
    let doc = read_document(connection)?;
    let conns = connections_from_document(&doc, &a).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: format!("{}: {e}", connection.display()),
    })?;
    let global = check_global(&conns, &a);
    if !global.passed() {
        return Err(Failure {
            code: EXIT_INPUT,
            message: format!(
                "{}: connection is not global\n{global}",
                connection.display()
            ),
        });
    }
    let k = koszul_iterate(&a, &conns, None)?;
    let s = splitting_map(&a, &k.fields)?;
    let mut out = render_atlas(&s.atlas);
    out.push_str("\n# certificate\n");
    let mut ok = s.checks.passed();
    for (i, h) in &k.fields {
        let r = fixed_point_residual(&conns[i], h)?;
        writeln!(out, "# H on chart {i}: {h}").ok();
        writeln!(out, "# residual on chart {i}: {r}").ok();
        ok &= r.is_zero();
        let checks = projector_checks(h, &projector_test_set(h.sig(), 2))?;
        ok &= checks.passed();
        writeln!(
            out,
            "# projector checks on chart {i}: {}",
            if checks.passed() { "PASS" } else { "FAIL" }
        )
        .ok();
    }
    for (name, coords) in &s.coordinates {
        let rendered: Vec<String> = coords.iter().map(|c| c.to_string()).collect();
        writeln!(
            out,
            "# new coordinates on chart {name}: {}",
            rendered.join(", ")
        )
        .ok();
    }
    let split = s.atlas.is_split();
    ok &= split;
    writeln!(
        out,
        "# output atlas split: {}",
        if split { "yes" } else { "no" }
    )
    .ok();
    for c in s.checks.failures() {
        writeln!(out, "# FAIL {}: {}", c.name, c.detail).ok();
    }
    Ok((if ok { EXIT_OK } else { EXIT_INTERNAL }, out))
}

fn cotangent(base: &Path, omega: &Path) -> CmdResult {
    let r = read_valid_atlas(base)?;
    if r.q() != 0 {
        return Err(Failure {
            code: EXIT_INPUT,
            message: format!("{}: the base must have no odd coordinates", base.display()),
        });
    }
    let doc = read_document(omega)?;
    let w = omega_from_document(&doc, &r).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: format!("{}: {e}", omega.display()),
    })?;
    if !w.is_cocycle()? {
        return Err(Failure {
            code: EXIT_INPUT,
            message: format!("{}: not a cocycle", omega.display()),
        });
    }
    Ok((EXIT_OK, render_atlas(&cotangent_build(&r, &w)?)))
}

#[derive(Default)]
struct Suite {
    lines: Vec<String>,
    failed: bool,
    undecided: bool,
}

impl Suite {
    fn record(&mut self, name: &str, status: Status) {
        let tag = match status {
            Status::Pass => "PASS",
            Status::Fail => {
                self.failed = true;
                "FAIL"
            }
            Status::Undecided => {
                self.undecided = true;
                "UNDECIDED"
            }
        };
        self.lines.push(format!("{tag} {name}"));
    }

    fn note(&mut self, text: String) {
        self.lines.push(format!("# {text}"));
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Undecided,
}

fn pass_if(b: bool) -> Status {
    if b {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn check(file: &Path, window: i32) -> CmdResult {
    let a = read_atlas(file)?;
    let mut suite = Suite::default();
    let report = a.validate();
    suite.record("atlas cocycle conditions", pass_if(report.passed()));
    if !report.passed() {
        let mut out = suite.lines.join("\n");
        writeln!(out, "\n{report}").ok();
        return Ok((EXIT_INPUT, out));
    }
    let split = split_model_of(&a)?;
    suite.record("split model valid", pass_if(split.validate().passed()));
    suite.record(
        "split model is its own split model",
        pass_if(is_own_split_model(&split)?),
    );

    let e = euler_differential(&a, window)?;
    suite.note(format!("euler differential: {}", e.verdict));
    if let Some(lift) = &e.lift {
        let defect = supersplit::koszul::lift_defect(&a, lift)?;
        suite.record(
            "global Euler lift is compatible",
            pass_if(defect.values().all(|v| v.is_zero())),
        );
    }
    let eta = primary_obstruction(&a)?;
    let class = obstruction_class(&eta, window)?;
    suite.note(format!("primary obstruction: {class}"));
    let consistent = match (e.verdict, class) {
        (_, ClassVerdict::Undecided) | (Verdict::Undecided, _) => Status::Undecided,
        (Verdict::Split, ClassVerdict::Nontrivial) => Status::Fail,
        _ => Status::Pass,
    };
    suite.record("split verdict consistent with obstruction", consistent);
    if a.q() >= 2 && a.charts().len() > 1 {
        let cmp = euler_obstruction_compare(&a, window)?;
        let st = if cmp.pass {
            Status::Pass
        } else if cmp.definitive {
            Status::Fail
        } else {
            Status::Undecided
        };
        suite.record("Euler cocycle equals -2 times the obstruction", st);
    }
    suite.record("initial-form relation", pass_if(initial_form_relation(&a)?));
    if a.p() >= 1 {
        let dw = dw_verify(&a, window)?;
        let undecided = [&dw.evev, &dw.mixed, &dw.mixed_dual, &dw.obstruction]
            .iter()
            .any(|d| !d.equal && !d.definitive);
        let st = if dw.pass {
            Status::Pass
        } else if undecided {
            Status::Undecided
        } else {
            Status::Fail
        };
        suite.record("Atiyah class decomposition", st);
    }
    let code = if suite.failed {
        EXIT_INTERNAL
    } else if suite.undecided {
        suite.note(format!("window {window}"));
        EXIT_UNDECIDED
    } else {
        EXIT_OK
    };
    let mut out = suite.lines.join("\n");
    out.push('\n');
    Ok((code, out))
}
