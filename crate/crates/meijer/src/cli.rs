//! Command-line front end: coefficient tables, function values and the
//! identity suite.
//!
//! Exit codes: 0 success, 1 internal error or failed identities, 2
//! precondition failure (and skipped identities under `--strict`), 64 usage.

use std::ffi::OsString;
use std::io::Write;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::buhring::{d_auto, f_from_g, h_closed_table, h_from_D, h_multisum, D_coeffs, DVariant};
use crate::error::Error;
use crate::gfunction::{g2ppp_eval_detail, g2ppp_polyseries, gp0pp_eval_detail, PolyVariant};
use crate::hyper::{eval_pfq, HyperSpec};
use crate::identities::{run_suite, SuiteConfig, SuiteResult, TolProfile, IDENTITY_IDS};
use crate::norlund::{
    g_bernoulli, g_closed_small_p, g_connect, g_recurrence_n, g_recurrence_p, g_table, g_young,
    BernoulliForm, CoeffTable, Kind, Method, ParamSet,
};
use crate::report::IdentityReport;
use crate::scalar::{Field, Scalar, C64};
use crate::wide::set_max_terms;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Json,
    Csv,
    Human,
}

#[derive(Clone, Debug, Args)]
pub struct CliConfig {
    /// Arithmetic mode; decimal inputs always compute in float.
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Float)]
    pub mode: ModeArg,
    /// Target accuracy of the series.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Cap on series terms.
    #[arg(long, global = true, env = "NORLUND_MAX_TERMS", default_value_t = 10_000,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub max_terms: u64,
    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    pub output: Output,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Parser)]
#[command(name = "meijer", version, about = "Norlund and Buhring coefficients, Meijer G values and identity checks")]
pub struct Cli {
    #[command(flatten)]
    pub config: CliConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    G,
    F,
    H,
    #[value(name = "D")]
    D,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FnArg {
    Gp0pp,
    G2ppp,
    Pfq,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print a coefficient table for n = 0..=N.
    Coeffs {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Comma-separated a parameters ("p/q", decimals, "re+imi").
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        /// Anchor index (1-based).
        #[arg(long)]
        k: Option<usize>,
        /// Second index: the anchor of h and D, the source of `connect`.
        #[arg(long)]
        s: Option<usize>,
        #[arg(long)]
        n: usize,
        /// g: young, recurrence_n, recurrence_p, bernoulli_psi,
        /// bernoulli_tilde, closed_small_p, connect. h: multisum, closed,
        /// from_d. D: auto, v535, v536.
        #[arg(long)]
        method: Option<String>,
    },
    /// Evaluate G^{p,0}_{p,p}, G^{2,p}_{p,p} or a pFq at real z.
    Eval {
        #[arg(long = "fn", value_enum)]
        func: FnArg,
        /// a parameters, or the upper parameters of pfq.
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        /// b parameters, or the lower parameters of pfq.
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        b: String,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        s: Option<usize>,
        /// g2ppp only: auto (D expansion), v520, v522, v523, v531.
        #[arg(long)]
        method: Option<String>,
    },
    /// Run the identity suite and stream one report per line.
    Verify {
        /// "all" or a comma-separated list of identity ids.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Order p as "3" or an inclusive range "2..6".
        #[arg(long)]
        p: Option<String>,
        /// JSON file with finite/single/multiple tolerances and overrides.
        #[arg(long)]
        tol_profile: Option<std::path::PathBuf>,
        /// Treat skipped identities as failures (exit 2).
        #[arg(long)]
        strict: bool,
    },
}

/// Errors the front end distinguishes by exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Entry point for the binary.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e);
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let cfg = &cli.config;
    if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
        let _ = writeln!(err, "error: --tol must be positive");
        return EXIT_USAGE;
    }
    set_max_terms(usize::try_from(cfg.max_terms).unwrap_or(usize::MAX));
    let r = match &cli.command {
        Command::Coeffs {
            kind,
            a,
            b,
            k,
            s,
            n,
            method,
        } => cmd_coeffs(cfg, *kind, a, b, *k, *s, *n, method.as_deref(), out),
        Command::Eval {
            func,
            a,
            b,
            z,
            k,
            s,
            method,
        } => cmd_eval(cfg, *func, a, b, z, *k, *s, method.as_deref(), out),
        Command::Verify {
            suite,
            trials,
            p,
            tol_profile,
            strict,
        } => cmd_verify(cfg, suite, *trials, p.as_deref(), tol_profile.as_deref(), *strict, out),
    };
    match r {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {}", m);
            let _ = writeln!(err, "run with --help for usage");
            EXIT_USAGE
        }
        Err(Failure::Lib(e)) => {
            let _ = writeln!(err, "{}: {}", e.tag(), e);
            if e.is_precondition() {
                EXIT_PRECONDITION
            } else {
                EXIT_INTERNAL
            }
        }
    }
}

fn parse_list(s: &str, what: &str) -> CliResult<Vec<Scalar>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| Scalar::from_str(t).map_err(|e| Failure::Usage(format!("--{}: {}", what, e))))
        .collect()
}

fn apply_mode(cfg: &CliConfig, v: Vec<Scalar>) -> Vec<Scalar> {
    match cfg.mode {
        ModeArg::Float => v.iter().map(Scalar::promote).collect(),
        ModeArg::Exact => v,
    }
}

fn params_from(cfg: &CliConfig, a: &str, b: &str) -> CliResult<ParamSet> {
    let a = apply_mode(cfg, parse_list(a, "a")?);
    let b = apply_mode(cfg, parse_list(b, "b")?);
    ParamSet::new(a, b).map_err(|e| Failure::Usage(e.to_string()))
}

fn index(v: Option<usize>, default: usize, p: usize, flag: &str) -> CliResult<usize> {
    let i = v.unwrap_or(default);
    if i == 0 || i > p {
        return Err(Failure::Usage(format!("--{} must lie in 1..={}", flag, p)));
    }
    Ok(i)
}

fn unknown_method(kind: &str, m: &str) -> Failure {
    Failure::Usage(format!("unknown method {:?} for {}", m, kind))
}

#[allow(clippy::too_many_arguments)]
fn cmd_coeffs(
    cfg: &CliConfig,
    kind: KindArg,
    a: &str,
    b: &str,
    k: Option<usize>,
    s: Option<usize>,
    n: usize,
    method: Option<&str>,
    out: &mut dyn Write,
) -> CliResult<i32> {
    let params = params_from(cfg, a, b)?;
    let p = params.p();
    let tol = cfg.tol;
    let table = match kind {
        KindArg::G => {
            let k = index(k, 1, p, "k")?;
            match method.unwrap_or("young") {
                "young" => g_young(&params, k, n)?,
                "recurrence_n" => g_recurrence_n(&params, k, n)?,
                "recurrence_p" => g_recurrence_p(&params, k, n)?,
                "bernoulli_psi" | "bernoulli" => g_bernoulli(&params, k, n, BernoulliForm::Psi)?,
                "bernoulli_tilde" => g_bernoulli(&params, k, n, BernoulliForm::Tilde)?,
                "closed_small_p" => {
                    let values = (0..=n)
                        .map(|j| g_closed_small_p(&params, k, j))
                        .collect::<crate::Result<Vec<_>>>()?;
                    CoeffTable::new(Kind::G, &params, vec![k], Method::ClosedSmallP, values)
                }
                "connect" => {
                    let l = s.ok_or_else(|| Failure::Usage("connect needs --s (the source anchor)".into()))?;
                    let l = index(Some(l), 1, p, "s")?;
                    let src = g_young(&params, l, n)?;
                    g_connect(&params, k, l, &src, n)?
                }
                m => return Err(unknown_method("g", m)),
            }
        }
        KindArg::F => {
            let k = index(k, 1, p, "k")?;
            if let Some(m) = method.filter(|m| *m != "from_g") {
                return Err(unknown_method("f", m));
            }
            f_from_g(&g_table(&params, k, n)?, &params)?
        }
        KindArg::H => {
            let s = index(s.or(k), 1, p, "s")?;
            match method.unwrap_or("multisum") {
                "multisum" => h_multisum(&params, s, n, tol)?,
                "closed" => h_closed_table(&params, s, n, tol)?,
                "from_d" => h_from_D(&params, s, n, tol)?,
                m => return Err(unknown_method("h", m)),
            }
        }
        KindArg::D => {
            let k = index(k, 1, p, "k")?;
            let s = index(s, if k == 1 { 2 } else { 1 }, p, "s")?;
            match method.unwrap_or("auto") {
                "auto" => d_auto(&params, k, s, n, tol)?,
                "v535" => D_coeffs(&params, k, s, n, DVariant::V535, tol)?,
                "v536" => D_coeffs(&params, k, s, n, DVariant::V536, tol)?,
                m => return Err(unknown_method("D", m)),
            }
        }
    };
    write_table(cfg.output, &table, out);
    Ok(EXIT_OK)
}

fn write_table(fmt: Output, t: &CoeffTable, out: &mut dyn Write) {
    match fmt {
        Output::Json => {
            let _ = writeln!(out, "{}", serde_json::to_string(t).expect("serializable table"));
        }
        Output::Csv => {
            let _ = writeln!(out, "n,value,re,im");
            for (n, v) in t.values.iter().enumerate() {
                let z = v.to_c64();
                let _ = writeln!(out, "{},{},{:e},{:e}", n, v, z.re, z.im);
            }
        }
        Output::Human => {
            let idx: Vec<String> = t.index.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(
                out,
                "{:?}[{}] p={} method={} mode={:?}",
                t.kind,
                idx.join(","),
                t.p,
                t.method.name(),
                t.mode
            );
            for (n, v) in t.values.iter().enumerate() {
                let _ = writeln!(out, "{:>4}  {}", n, v);
            }
        }
    }
}

fn parse_z(cfg: &CliConfig, z: &str) -> CliResult<Scalar> {
    let zs = Scalar::from_str(z).map_err(|e| Failure::Usage(format!("--z: {}", e)))?;
    let zc = zs.to_c64();
    if zc.im != 0.0 || zc.re <= 0.0 || zc.re == 1.0 {
        return Err(Failure::Usage("--z must be real and lie in (0, 1) or (1, inf)".into()));
    }
    Ok(apply_mode(cfg, vec![zs]).remove(0))
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    cfg: &CliConfig,
    func: FnArg,
    a: &str,
    b: &str,
    z: &str,
    k: Option<usize>,
    s: Option<usize>,
    method: Option<&str>,
    out: &mut dyn Write,
) -> CliResult<i32> {
    let zs = parse_z(cfg, z)?;
    let zc = zs.to_c64();
    let tol = cfg.tol;
    let (value, exact, terms, regime, name): (C64, Option<Scalar>, Option<usize>, String, &str) = match func {
        FnArg::Gp0pp => {
            let params = params_from(cfg, a, b)?;
            let g = gp0pp_eval_detail(&params, zc, tol)?;
            (g.value, None, Some(g.terms), regime_name(g.regime), "gp0pp")
        }
        FnArg::G2ppp => {
            let params = params_from(cfg, a, b)?;
            let p = params.p();
            let k = index(k, 1, p, "k")?;
            let s = index(s, if k == 1 { 2 } else { 1 }, p, "s")?;
            if k == s {
                return Err(Failure::Usage("--k and --s must differ".into()));
            }
            match method.unwrap_or("auto") {
                "auto" => {
                    let g = g2ppp_eval_detail(&params, k, s, zc, tol)?;
                    (g.value, None, Some(g.terms), regime_name(g.regime), "g2ppp")
                }
                m => {
                    let v = PolyVariant::from_str(m).map_err(|_| unknown_method("g2ppp", m))?;
                    let r = g2ppp_polyseries(&params, k, s, &zs, v, tol)?;
                    (r.to_c64(), None, None, format!("polyseries_{}", m), "g2ppp")
                }
            }
        }
        FnArg::Pfq => {
            let up = apply_mode(cfg, parse_list(a, "a")?);
            let lo = apply_mode(cfg, parse_list(b, "b")?);
            let spec = HyperSpec::new(up, lo)?;
            let v = eval_pfq(&spec, &zs, tol)?;
            let regime = if spec.terminating_index.is_some() { "terminating" } else { "series" };
            let exact = if v.is_exact() { Some(v.clone()) } else { None };
            (v.to_c64(), exact, spec.terminating_index.map(|n| n + 1), regime.to_string(), "pfq")
        }
    };
    match cfg.output {
        Output::Json => {
            let mut j = json!({ "fn": name, "z": zs, "value": [value.re, value.im], "terms": terms, "regime": regime });
            if let Some(e) = exact {
                j["exact"] = json!(e);
            }
            let _ = writeln!(out, "{}", j);
        }
        Output::Csv => {
            let _ = writeln!(out, "re,im,terms,regime");
            let t = terms.map(|t| t.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{:e},{:e},{},{}", value.re, value.im, t, regime);
        }
        Output::Human => {
            let shown = exact.unwrap_or(Scalar::Float(value));
            let t = terms.map(|t| format!(" terms={}", t)).unwrap_or_default();
            let _ = writeln!(out, "{}(z={}) = {}  regime={}{}", name, zs, shown, regime, t);
        }
    }
    Ok(EXIT_OK)
}

fn regime_name(r: crate::gfunction::Regime) -> String {
    serde_json::to_value(r)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// "3" or an inclusive range "2..6".
pub fn parse_p_range(s: &str) -> Option<(usize, usize)> {
    let t = s.trim();
    if let Some((lo, hi)) = t.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let (lo, hi) = (lo.trim().parse().ok()?, hi.trim().parse().ok()?);
        (lo >= 1 && lo <= hi).then_some((lo, hi))
    } else {
        let p: usize = t.parse().ok()?;
        (p >= 1).then_some((p, p))
    }
}

fn cmd_verify(
    cfg: &CliConfig,
    suite: &str,
    trials: usize,
    p: Option<&str>,
    profile: Option<&std::path::Path>,
    strict: bool,
    out: &mut dyn Write,
) -> CliResult<i32> {
    let ids: Vec<String> = if suite.trim() == "all" {
        Vec::new()
    } else {
        suite.split(',').map(|s| s.trim().to_string()).collect()
    };
    if let Some(bad) = ids.iter().find(|i| !IDENTITY_IDS.contains(&i.as_str())) {
        return Err(Failure::Usage(format!(
            "unknown identity id {:?}; known: {}",
            bad,
            IDENTITY_IDS.join(", ")
        )));
    }
    let p_range = match p {
        None => None,
        Some(s) => Some(parse_p_range(s).ok_or_else(|| Failure::Usage(format!("--p: cannot parse {:?}", s)))?),
    };
    let profile = match profile {
        None => TolProfile::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("--tol-profile {}: {}", path.display(), e)))?;
            TolProfile::from_json(&text).map_err(|e| Failure::Usage(e.to_string()))?
        }
    };
    let res = run_suite(cfg.seed, trials, &profile, &SuiteConfig { ids, p_range })?;
    write_suite(cfg.output, &res, out);
    let s = &res.summary.total;
    Ok(if s.fail > 0 {
        EXIT_INTERNAL
    } else if strict && s.skipped > 0 {
        EXIT_PRECONDITION
    } else {
        EXIT_OK
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn verdict_name(r: &IdentityReport) -> String {
    serde_json::to_value(r.verdict)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// CSV header of `verify --output csv`.
pub const VERIFY_CSV_HEADER: &str =
    "identity_id,seed,trial,verdict,abs_residual,rel_residual,tolerance,skipped_reason";

fn write_suite(fmt: Output, res: &SuiteResult, out: &mut dyn Write) {
    match fmt {
        Output::Json => {
            for r in &res.reports {
                let _ = writeln!(out, "{}", serde_json::to_string(r).expect("serializable report"));
            }
            let _ = writeln!(out, "{}", json!({ "summary": &res.summary }));
        }
        Output::Csv => {
            let _ = writeln!(out, "{}", VERIFY_CSV_HEADER);
            for r in &res.reports {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{:e},{:e},{:e},{}",
                    r.identity_id,
                    r.seed.unwrap_or_default(),
                    r.trial.unwrap_or_default(),
                    verdict_name(r),
                    r.abs_residual,
                    r.rel_residual,
                    r.tolerance,
                    csv_field(r.skipped_reason.as_deref().unwrap_or(""))
                );
            }
        }
        Output::Human => {
            for r in &res.reports {
                let tail = match &r.skipped_reason {
                    Some(why) => format!("  ({})", why),
                    None => String::new(),
                };
                let _ = writeln!(
                    out,
                    "{:<15} trial {:>3}  {:<7} rel {:.2e}  tol {:.0e}{}",
                    r.identity_id,
                    r.trial.unwrap_or_default(),
                    verdict_name(r),
                    r.rel_residual,
                    r.tolerance,
                    tail
                );
            }
            for (id, c) in &res.summary.per_identity {
                let _ = writeln!(out, "{:<15} pass {:>4}  fail {:>4}  skipped {:>4}", id, c.pass, c.fail, c.skipped);
            }
            let t = &res.summary.total;
            let _ = writeln!(out, "total           pass {:>4}  fail {:>4}  skipped {:>4}", t.pass, t.fail, t.skipped);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["meijer"];
        full.extend_from_slice(args);
        let code = run_with(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn p_ranges() {
        assert_eq!(parse_p_range("3"), Some((3, 3)));
        assert_eq!(parse_p_range("2..6"), Some((2, 6)));
        assert_eq!(parse_p_range("2..=6"), Some((2, 6)));
        assert_eq!(parse_p_range("6..2"), None);
        assert_eq!(parse_p_range("x"), None);
    }

    #[test]
    fn usage_errors_exit_64() {
        assert_eq!(run_capture(&["coeffs", "--kind", "g", "--a", "0,1/2", "--b", "1", "--n", "2"]).0, 64);
        assert_eq!(run_capture(&["verify", "--suite", "nope"]).0, 64);
        assert_eq!(run_capture(&["frobnicate"]).0, 64);
        assert_eq!(run_capture(&["coeffs", "--kind", "g", "--a", "0", "--b", "1", "--n", "2", "--method", "x"]).0, 64);
    }

    #[test]
    fn exact_table() {
        let (code, out, _) = run_capture(&[
            "--mode", "exact", "coeffs", "--kind", "g", "--a", "0,1/2", "--b", "1,3/2", "--k", "2", "--n", "3",
        ]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
        assert_eq!(v["values"][0], "1");
        assert_eq!(v["mode"], "exact");
    }

    #[test]
    fn eval_examples() {
        let (code, out, _) = run_capture(&["eval", "--fn", "gp0pp", "--a", "0", "--b", "2", "--z", "0.5"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
        assert!((v["value"][0].as_f64().unwrap() - 0.5).abs() < 1e-15);
        let (_, out, _) = run_capture(&["eval", "--fn", "gp0pp", "--a", "0", "--b", "2", "--z", "1.5"]);
        let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
        assert_eq!(v["value"][0].as_f64(), Some(0.0));
        assert_eq!(v["regime"], "outside_disk");
        let (_, out, _) = run_capture(&[
            "--mode", "exact", "eval", "--fn", "pfq", "--a", "-3,1/2", "--b", "2/3", "--z", "1/3",
        ]);
        let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
        assert!(v["exact"].is_string(), "{}", out);
    }

    #[test]
    fn precondition_exit_2() {
        // D expansion with Re(1 - b_3 + a_2) < 0 for both variants
        let (code, _, err) = run_capture(&[
            "eval", "--fn", "g2ppp", "--a", "0.1,0.2,0.3", "--b", "3.5,3.6,3.7", "--z", "0.5",
        ]);
        assert_eq!(code, 2, "{}", err);
        assert!(err.starts_with("convergence_violation"));
    }
}
