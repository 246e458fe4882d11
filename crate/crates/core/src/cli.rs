//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{OutputFormat, RunConfig};
use crate::error::{Error, Result};
use crate::gram::Form;
use crate::krein::{ContextRecord, KreinContext, KreinVector};
use crate::profiles::{make_chi_star, ChiStarFamily, MomentumProfile, ProfileSpec};
use crate::quad::Estimate;
use crate::suite::{run_suite, ContextSource};
use crate::wightman::{d_commutator, indefinite_inner, w_position, CausalClass, SpacetimePoint};

#[derive(Debug, Parser)]
#[command(name = "krein-lab", version, about = "Indefinite inner product and Krein metrics of the 2D massless scalar field")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Context file (written by chi-star, read by the other commands)
    #[arg(long, global = true)]
    pub context: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the null profile χ* and save the context.
    ChiStar {
        #[arg(long)]
        family: Option<ChiStarFamily>,
        /// LO,HI
        #[arg(long, value_parser = parse_pair)]
        bracket: Option<(f64, f64)>,
        /// Re-solve on the family and final bracket stored in this context file.
        #[arg(long)]
        from: Option<PathBuf>,
    },
    /// Evaluate a form on two vectors: profile JSON, @file, or v0 / chi_star / chi.
    Inner {
        f: String,
        g: String,
        #[arg(long, default_value = "indefinite")]
        form: Form,
    },
    /// Run the verification suite; exit status 0 iff every criterion passes.
    Verify,
    /// Sample W(x) and D(x) along a straight line.
    Wfunc {
        /// T,X
        #[arg(long, value_parser = parse_pair)]
        start: (f64, f64),
        /// T,X
        #[arg(long, value_parser = parse_pair)]
        end: (f64, f64),
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 1e-12)]
        eps: f64,
    },
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected A,B, got {s:?}"))?;
    let a = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let b = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((a, b))
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

pub fn load_context(path: &Path) -> Result<KreinContext> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let record: ContextRecord = serde_json::from_str(&text)
        .map_err(|e| Error::ContextValidation(format!("{}: {e}", path.display())))?;
    KreinContext::from_record(record)
}

pub fn save_context(ctx: &KreinContext, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(&ctx.record()).expect("context serializes");
    std::fs::write(path, json + "\n").map_err(|e| io_error(path, e))
}

enum Operand {
    Profile(MomentumProfile),
    V0,
    ChiStar,
    Chi,
}

fn parse_operand(text: &str) -> Result<Operand> {
    match text.trim() {
        "v0" => return Ok(Operand::V0),
        "chi_star" | "chi*" => return Ok(Operand::ChiStar),
        "chi" => return Ok(Operand::Chi),
        _ => {}
    }
    let json = match text.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| io_error(Path::new(path), e))?,
        None => text.to_string(),
    };
    let spec: ProfileSpec =
        serde_json::from_str(&json).map_err(|e| Error::InvalidProfile(format!("{text:?}: {e}")))?;
    Ok(Operand::Profile(MomentumProfile::from_spec(&spec)?))
}

fn to_vector(ctx: &KreinContext, op: &Operand) -> KreinVector {
    match op {
        Operand::Profile(p) => ctx.embed(p),
        Operand::V0 => ctx.v0(),
        Operand::ChiStar => ctx.chi_star(),
        Operand::Chi => ctx.chi(),
    }
}

#[derive(Serialize)]
struct ChiStarOutput<'a> {
    schema: &'a str,
    family: ChiStarFamily,
    param: f64,
    residual: f64,
    bracket: (f64, f64),
    context_id: String,
    context_file: Option<&'a Path>,
}

#[derive(Serialize)]
struct InnerOutput<'a> {
    schema: &'a str,
    form: Form,
    value: Complex64,
    error: f64,
}

#[derive(Serialize)]
struct WRow {
    x0: f64,
    x1: f64,
    re_w: f64,
    im_w: f64,
    d: f64,
}

struct Session {
    config: RunConfig,
    context_path: Option<PathBuf>,
    out: Option<PathBuf>,
    format: Option<OutputFormat>,
}

impl Session {
    fn new(global: GlobalArgs) -> Result<Self> {
        let mut config = match &global.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = global.seed {
            config.seed = seed;
        }
        Ok(Self {
            context_path: global.context.or_else(|| config.context.clone()),
            out: global.out.or_else(|| config.out.clone()),
            format: global.format,
            config,
        })
    }

    fn format(&self, default: OutputFormat) -> OutputFormat {
        self.format.unwrap_or(if self.config.format == OutputFormat::default() {
            default
        } else {
            self.config.format
        })
    }

    fn emit(&self, text: &str, stdout: &mut dyn Write) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text).map_err(|e| io_error(path, e)),
            None => stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::Io(format!("stdout: {e}"))),
        }
    }

    fn context(&self) -> Result<KreinContext> {
        match &self.context_path {
            Some(path) => load_context(path),
            None => Err(Error::ContextValidation(
                "no context file given; run chi-star with --context first".into(),
            )),
        }
    }
}

fn json_line<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn cmd_chi_star(
    s: &Session,
    family: Option<ChiStarFamily>,
    bracket: Option<(f64, f64)>,
    from: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let (family, bracket) = match from {
        Some(path) => {
            let previous = load_context(path)?.record().chi_star;
            (family.unwrap_or(previous.family), bracket.unwrap_or(previous.bracket))
        }
        None => {
            let family = family.unwrap_or(s.config.chi_star.family);
            let bracket = bracket.unwrap_or_else(|| match (s.config.chi_star.bracket, family == s.config.chi_star.family) {
                (Some(b), true) => b,
                _ => family.default_bracket(),
            });
            (family, bracket)
        }
    };
    s.config.quad.validate()?;
    let chi = make_chi_star(family, bracket, &s.config.quad)?;
    let ctx = KreinContext::new(chi.clone(), s.config.quad)?;
    if let Some(path) = &s.context_path {
        save_context(&ctx, path)?;
    }
    let out = ChiStarOutput {
        schema: "1",
        family: chi.family,
        param: chi.param,
        residual: chi.residual,
        bracket: chi.bracket,
        context_id: format!("{:016x}", ctx.id()),
        context_file: s.context_path.as_deref(),
    };
    s.emit(&json_line(&out), stdout)?;
    Ok(0)
}

fn cmd_inner(s: &Session, f: &str, g: &str, form: Form, stdout: &mut dyn Write) -> Result<i32> {
    let (f, g) = (parse_operand(f)?, parse_operand(g)?);
    let estimate: Estimate = match (&f, &g, form) {
        (Operand::Profile(a), Operand::Profile(b), Form::Indefinite) => {
            s.config.quad.validate()?;
            indefinite_inner(a, b, &s.config.quad)?
        }
        _ => {
            let ctx = s.context()?;
            ctx.form(form, &to_vector(&ctx, &f), &to_vector(&ctx, &g))?
        }
    };
    let text = match s.format(OutputFormat::Json) {
        OutputFormat::Json => json_line(&InnerOutput {
            schema: "1",
            form,
            value: estimate.value,
            error: estimate.error,
        }),
        OutputFormat::Csv => format!(
            "form,re,im,error\n{},{:e},{:e},{:e}\n",
            form.name(),
            estimate.value.re,
            estimate.value.im,
            estimate.error
        ),
    };
    s.emit(&text, stdout)?;
    Ok(0)
}

fn cmd_verify(s: &Session, stdout: &mut dyn Write) -> Result<i32> {
    let source = match &s.context_path {
        Some(path) => ContextSource::Loaded(load_context(path)),
        None => ContextSource::Solve,
    };
    let report = run_suite(&s.config, source);
    let text = match s.format(OutputFormat::Json) {
        OutputFormat::Json => json_line(&report),
        OutputFormat::Csv => report.to_csv(),
    };
    s.emit(&text, stdout)?;
    Ok(if report.passed { 0 } else { 1 })
}

/// Evenly spaced samples from start to end inclusive.
pub fn line_samples(start: (f64, f64), end: (f64, f64), count: usize) -> Vec<SpacetimePoint> {
    (0..count)
        .map(|i| {
            let s = if count == 1 { 0.0 } else { i as f64 / (count - 1) as f64 };
            SpacetimePoint::new(start.0 + s * (end.0 - start.0), start.1 + s * (end.1 - start.1))
        })
        .collect()
}

fn cmd_wfunc(
    s: &Session,
    start: (f64, f64),
    end: (f64, f64),
    count: usize,
    eps: f64,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let points = line_samples(start, end, count);
    if let Some((row, p)) = points
        .iter()
        .enumerate()
        .find(|(_, p)| p.causal_class() == CausalClass::Lightlike)
    {
        return Err(Error::LightlikeSample { row, t: p.t, x: p.x });
    }
    let rows = points
        .iter()
        .map(|&p| {
            let w = w_position(p, eps)?;
            Ok(WRow { x0: p.t, x1: p.x, re_w: w.re, im_w: w.im, d: d_commutator(p)? })
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        return Ok(0);
    }
    let text = match s.format(OutputFormat::Csv) {
        OutputFormat::Csv => {
            let mut text = String::from("x0,x1,re_w,im_w,d\n");
            for r in &rows {
                text.push_str(&format!("{:e},{:e},{:e},{:e},{:e}\n", r.x0, r.x1, r.re_w, r.im_w, r.d));
            }
            text
        }
        OutputFormat::Json => json_line(&rows),
    };
    s.emit(&text, stdout)?;
    Ok(0)
}

pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<i32> {
    let session = Session::new(cli.global)?;
    match cli.command {
        Command::ChiStar { family, bracket, from } => cmd_chi_star(&session, family, bracket, from.as_deref(), stdout),
        Command::Inner { f, g, form } => cmd_inner(&session, &f, &g, form, stdout),
        Command::Verify => cmd_verify(&session, stdout),
        Command::Wfunc { start, end, count, eps } => cmd_wfunc(&session, start, end, count, eps, stdout),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (Result<i32>, String) {
        let cli = Cli::try_parse_from(std::iter::once("krein-lab").chain(args.iter().copied())).unwrap();
        let mut buf = Vec::new();
        let code = execute(cli, &mut buf);
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn wfunc_spacelike_line() {
        let (code, out) = run(&["wfunc", "--start", "0,0.5", "--end", "0,4", "--count", "8"]);
        assert_eq!(code.unwrap(), 0);
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("x0,x1,re_w,im_w,d"));
        for line in lines {
            let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert_eq!(cols[3], 0.0);
            assert_eq!(cols[4], 0.0);
        }
    }

    #[test]
    fn wfunc_timelike_line() {
        let (code, out) = run(&["wfunc", "--start", "0.5,0", "--end", "4,0", "--count", "5"]);
        assert_eq!(code.unwrap(), 0);
        for line in out.lines().skip(1) {
            let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert!((cols[3] + 0.25).abs() < 1e-12);
            assert_eq!(cols[4], 0.5);
        }
    }

    #[test]
    fn wfunc_edge_cases() {
        let (code, out) = run(&["wfunc", "--start", "0,1", "--end", "0,2", "--count", "0"]);
        assert_eq!((code.unwrap(), out.as_str()), (0, ""));

        let (code, _) = run(&["wfunc", "--start", "0,1", "--end", "2,1", "--count", "3"]);
        match code.unwrap_err() {
            Error::LightlikeSample { row, .. } => assert_eq!(row, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inner_gaussian_without_context() {
        let (code, out) = run(&["inner", r#"{"family":"gaussian","a":5}"#, r#"{"family":"gaussian","a":5}"#]);
        assert_eq!(code.unwrap(), 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let re = v["value"][0].as_f64().unwrap();
        assert!((re - crate::profiles::gaussian_self_product_oracle(5.0)).abs() < 1e-9);
    }

    #[test]
    fn metric_forms_need_a_context() {
        let (code, _) = run(&["inner", "v0", "v0", "--form", "metric_A"]);
        assert!(matches!(code, Err(Error::ContextValidation(_))));
    }

    #[test]
    fn bad_profile_is_a_parse_error() {
        let (code, _) = run(&["inner", "{not json", "v0"]);
        assert_eq!(code.unwrap_err().exit_code(), 2);
    }

    #[test]
    fn pair_parser() {
        assert_eq!(parse_pair("1.5, -2").unwrap(), (1.5, -2.0));
        assert!(parse_pair("1.5").is_err());
    }
}
