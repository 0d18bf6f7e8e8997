//! Command-line front end.
//!
//! Exit codes are a stable contract:
//!
//! * `0` — success
//! * `1` — usage, parse, or I/O error
//! * `2` — certification failure (not positive or not log-convex)
//! * `3` — verification failure (a negative margin beyond tolerance, or a
//!   failed example signature: both indicate a bug somewhere)
//! * `4` — precondition failure (bounded warping for `omega`, degenerate or
//!   unsolvable area equations, rooms that outgrow the working interval)

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::dido::{self, compute_profile, solve_max_room, DEFAULT_CRIT_GRID};
use crate::error::{Error, Result};
use crate::isoperimetric::verify_with;
use crate::report::{
    append_csv_row, critical_points_csv, fmt17, profile_csv, verify_csv_row, write_file,
    KeyValues, VERIFY_CSV_HEADER,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CERTIFICATION: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "warpiso",
    version,
    about = "Verify constant-height isoperimetric inequalities and compute \
             Dido profiles for warped products with log-convex warping"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify positivity and log-convexity of the warping function
    Check(RunArgs),
    /// Verify that the constant-height ceiling minimizes vertical area
    Verify(RunArgs),
    /// Compute the profile lower bound omega and its critical points
    Omega(RunArgs),
    /// Sample the isoperimetric profile to CSV
    Profile(RunArgs),
    /// Solve the fixed-area maximum-volume problem
    Dido(RunArgs),
    /// Run a named example preset (ex1..ex4) and assert its signature
    Repro {
        /// Preset name: ex1, ex2, ex3, or ex4
        name: String,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Path to the run configuration file
    #[arg(long)]
    pub config: PathBuf,
    /// Override a config key: --set section.key=value (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

/// Command output: text for stdout plus the process exit code.
#[derive(Debug)]
pub struct CmdOutput {
    pub text: String,
    pub exit: i32,
}

impl CmdOutput {
    fn ok(text: String) -> Self {
        CmdOutput { text, exit: EXIT_OK }
    }
}

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Syntax { .. }
        | Error::UnknownIdentifier { .. }
        | Error::ArityMismatch { .. }
        | Error::InvalidParameter(_)
        | Error::Domain { .. }
        | Error::Convergence { .. }
        | Error::UnsupportedMode
        | Error::InvalidFloor(_)
        | Error::InvalidCeiling(_)
        | Error::Config(_)
        | Error::Io { .. } => EXIT_USAGE,
        Error::Range { .. }
        | Error::BoundedWarping
        | Error::NonPositiveOmega(_)
        | Error::DegenerateEquation
        | Error::NoSolution { .. } => EXIT_PRECONDITION,
    }
}

/// Run a parsed invocation; prints nothing, returns text + exit code.
pub fn execute(command: &Command) -> Result<CmdOutput> {
    match command {
        Command::Check(args) => cmd_check(&load(args)?),
        Command::Verify(args) => cmd_verify(&load(args)?),
        Command::Omega(args) => cmd_omega(&load(args)?),
        Command::Profile(args) => cmd_profile(&load(args)?),
        Command::Dido(args) => cmd_dido(&load(args)?),
        Command::Repro { name } => cmd_repro(name),
    }
}

fn load(args: &RunArgs) -> Result<RunConfig> {
    RunConfig::load(&args.config, &args.set)
}

pub fn cmd_check(cfg: &RunConfig) -> Result<CmdOutput> {
    let wf = cfg.build_warping()?;
    let cert = wf.certify(cfg.run.cert_grid)?;
    let mut kv = KeyValues::new();
    kv.push("expression", wf.source());
    kv.push_f64("domain_max", wf.domain_max());
    kv.push("grid_points", cert.grid_points.to_string());
    kv.push_f64("min_f", cert.min_f);
    kv.push_f64("argmin_f", cert.argmin_f);
    kv.push_f64("min_log_convexity", cert.min_log_second);
    kv.push_f64("argmin_log_convexity", cert.argmin_log_second);
    kv.push_bool("positive", cert.positive);
    kv.push_bool("log_convex", cert.log_convex);
    kv.push_bool("strictly_log_convex", cert.strictly_log_convex);
    let exit = if cert.positive && cert.log_convex { EXIT_OK } else { EXIT_CERTIFICATION };
    Ok(CmdOutput { text: kv.render(), exit })
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<CmdOutput> {
    let m = cfg.build_mu()?;
    let floor = cfg.build_floor(m.wf())?;
    let ceiling = cfg.build_ceiling(&floor)?;
    let cert = m.wf().certify(cfg.run.cert_grid)?;
    let report = verify_with(&floor, &ceiling, &m, &cert, cfg.run.tol_verify)?;

    let mut kv = KeyValues::new();
    kv.push("seed", cfg.run.seed.to_string());
    kv.push("expression", m.wf().source());
    kv.push("k", m.k().to_string());
    kv.push_f64("domain_max", m.domain_max());
    kv.push_f64("vol_floor", report.vol_floor);
    kv.push_f64("vol_room", report.vol_room);
    kv.push_f64("H", report.constant_height);
    kv.push_f64("vol_S", report.vol_constant);
    kv.push_f64("vol_C_vertical", report.vol_vertical);
    if let Some(full) = report.vol_full {
        kv.push_f64("vol_C_full", full);
    }
    kv.push_f64("margin", report.margin);
    kv.push("equality", report.equality.name());
    kv.push_bool("log_convex", report.log_convex);
    kv.push_bool("strict_f", report.strictly_log_convex);
    if !report.log_convex {
        kv.push("warning", "warping function not certified log-convex; inequality not asserted");
    }

    if let Some(path) = &cfg.run.output {
        let row = verify_csv_row(&report, cfg.run.seed, m.wf().source(), m.k(), m.domain_max());
        append_csv_row(path, VERIFY_CSV_HEADER, &row)?;
    }

    let exit = if report.log_convex && report.margin < -cfg.run.tol_verify {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    };
    Ok(CmdOutput { text: kv.render(), exit })
}

fn profile_window(cfg: &RunConfig) -> (f64, f64, usize) {
    let dm = cfg.warping.domain_max;
    let samples = cfg.run.samples.max(2);
    let h_max = cfg.run.h_max.unwrap_or(dm);
    let h_min = cfg.run.h_min.unwrap_or(h_max / samples as f64);
    (h_min, h_max, samples)
}

pub fn cmd_omega(cfg: &RunConfig) -> Result<CmdOutput> {
    let m = cfg.build_mu()?;
    let dm = m.domain_max();
    let omega = dido::omega(&m, m.wf().declared_limit())?;
    let profile = compute_profile(
        &m,
        dm / DEFAULT_CRIT_GRID as f64,
        dm,
        cfg.run.samples.max(2),
        m.wf().declared_limit(),
    )?;

    let mut kv = KeyValues::new();
    kv.push("seed", cfg.run.seed.to_string());
    kv.push("expression", m.wf().source());
    kv.push("k", m.k().to_string());
    kv.push_f64("domain_max", dm);
    kv.push_f64("omega", omega.value);
    kv.push("omega_source", omega.source.name());
    kv.push_bool("omega_is_estimate", omega.estimated);
    kv.push_bool("unbounded_f", profile.unbounded);
    kv.push("critical_count", profile.critical_points.len().to_string());
    for (i, p) in profile.critical_points.iter().take(8).enumerate() {
        kv.push(&format!("critical_{i}_h"), fmt17(p.h));
        kv.push(&format!("critical_{i}_value"), fmt17(p.value));
    }
    if let Some(min) = profile.min_sample {
        kv.push_f64("min_sampled_profile", min.iso);
        kv.push_f64("min_sampled_profile_h", min.h);
    }

    if let Some(path) = &cfg.run.output {
        write_file(path, &critical_points_csv(&profile.critical_points))?;
    }
    Ok(CmdOutput::ok(kv.render()))
}

pub fn cmd_profile(cfg: &RunConfig) -> Result<CmdOutput> {
    let m = cfg.build_mu()?;
    let (h_min, h_max, samples) = profile_window(cfg);
    let samples = dido::profile(&m, h_min, h_max, samples)?;
    let csv = profile_csv(&samples);
    match &cfg.run.output {
        Some(path) => {
            write_file(path, &csv)?;
            let mut kv = KeyValues::new();
            kv.push("samples", samples.len().to_string());
            kv.push("output", path.display().to_string());
            Ok(CmdOutput::ok(kv.render()))
        }
        None => Ok(CmdOutput::ok(csv)),
    }
}

pub fn cmd_dido(cfg: &RunConfig) -> Result<CmdOutput> {
    let m = cfg.build_mu()?;
    let floor = cfg.build_floor(m.wf())?;
    let area = cfg
        .run
        .area
        .ok_or_else(|| Error::Config("dido needs run.area (target ceiling area)".into()))?;
    let solution = solve_max_room(&floor, &m, area)?;
    let mut kv = KeyValues::new();
    kv.push("expression", m.wf().source());
    kv.push("k", m.k().to_string());
    kv.push_f64("vol_floor", floor.volume());
    kv.push_f64("target_area", area);
    kv.push(
        "solutions",
        solution
            .solutions
            .iter()
            .map(|h| fmt17(*h))
            .collect::<Vec<_>>()
            .join(";"),
    );
    kv.push_f64("chosen_h", solution.chosen);
    kv.push_f64("vol_room", solution.vol_room);
    Ok(CmdOutput::ok(kv.render()))
}

struct Check {
    name: &'static str,
    expected: String,
    found: String,
    pass: bool,
}

impl Check {
    fn new(name: &'static str, expected: impl Into<String>, found: impl Into<String>, pass: bool) -> Self {
        Check { name, expected: expected.into(), found: found.into(), pass }
    }
}

fn render_checks(example: &str, checks: &[Check]) -> CmdOutput {
    let mut kv = KeyValues::new();
    kv.push("example", example);
    for c in checks {
        kv.push(
            c.name,
            format!(
                "expected={} found={} status={}",
                c.expected,
                c.found,
                if c.pass { "pass" } else { "fail" }
            ),
        );
    }
    let all_pass = checks.iter().all(|c| c.pass);
    kv.push("result", if all_pass { "PASS" } else { "FAIL" });
    CmdOutput { text: kv.render(), exit: if all_pass { EXIT_OK } else { EXIT_VIOLATION } }
}

/// Named example presets over the window (0, 10].
pub fn cmd_repro(name: &str) -> Result<CmdOutput> {
    const DM: f64 = 10.0;
    match name {
        "ex1" => {
            // Oscillatory exponential warping over the line.
            let m = preset("exp(t^2 - 2*sin(t))", 1, DM)?;
            let p = compute_profile(&m, DM / DEFAULT_CRIT_GRID as f64, DM, 2048, None)?;
            let n_crit = p.critical_points.len();
            let min = p.min_sample.expect("samples nonempty");
            let ties = p
                .samples
                .iter()
                .filter(|s| s.iso <= min.iso + 1e-12 * (1.0 + min.iso.abs()))
                .count();
            let checks = [
                Check::new("critical_count_at_least_3", ">=3", n_crit.to_string(), n_crit >= 3),
                Check::new("unique_global_min", "1 minimizing sample", ties.to_string(), ties == 1),
            ];
            Ok(render_checks("ex1", &checks))
        }
        "ex2" => {
            // Hyperbolic 3-space: one critical point, profile limit 2.
            let m = preset("cosh(t)", 2, DM)?;
            let p = compute_profile(&m, DM / DEFAULT_CRIT_GRID as f64, DM, 512, None)?;
            let n_crit = p.critical_points.len();
            let omega = dido::omega(&m, None)?;
            let plateau = m.growth(DM)?;
            let checks = [
                Check::new("critical_count", "1", n_crit.to_string(), n_crit == 1),
                Check::new("omega_below_limit", "<2", fmt17(omega.value), omega.value < 2.0),
                Check::new(
                    "plateau_near_2",
                    "|2f'/f(10) - 2| <= 1e-3",
                    fmt17(plateau),
                    (plateau - 2.0).abs() <= 1e-3,
                ),
            ];
            Ok(render_checks("ex2", &checks))
        }
        "ex3" => {
            // Hyperbolic plane: monotone profile, no critical points.
            let m = preset("cosh(t)", 1, DM)?;
            let p = compute_profile(&m, DM / DEFAULT_CRIT_GRID as f64, DM, 512, None)?;
            let n_crit = p.critical_points.len();
            let plateau = m.growth(DM)?;
            let decreasing = p.samples.windows(2).all(|w| w[1].iso < w[0].iso);
            let checks = [
                Check::new("critical_count", "0", n_crit.to_string(), n_crit == 0),
                Check::new(
                    "plateau_near_1",
                    "|f'/f(10) - 1| <= 1e-3",
                    fmt17(plateau),
                    (plateau - 1.0).abs() <= 1e-3,
                ),
                Check::new("profile_strictly_decreasing", "true", decreasing.to_string(), decreasing),
            ];
            Ok(render_checks("ex3", &checks))
        }
        "ex4" => {
            // Euclidean product and the decaying exponential: both bounded,
            // so no positive lower bound exists and omega must refuse.
            let mut checks = Vec::new();
            for src in ["1", "exp(-t)"] {
                let m = preset(src, 1, DM)?;
                let refused = matches!(dido::omega(&m, None), Err(Error::BoundedWarping));
                checks.push(Check::new(
                    if src == "1" { "euclidean_omega_refused" } else { "decaying_omega_refused" },
                    "bounded-warping precondition failure",
                    if refused { "refused" } else { "accepted" },
                    refused,
                ));
            }
            Ok(render_checks("ex4", &checks))
        }
        other => Err(Error::Config(format!(
            "unknown repro preset `{other}` (expected ex1, ex2, ex3, or ex4)"
        ))),
    }
}

fn preset(expression: &str, k: u32, dm: f64) -> Result<crate::quad::MuIntegral> {
    crate::quad::MuIntegral::new(crate::warpfn::WarpingFunction::parse(expression, dm)?, k)
}

/// Parse argv, run, print, and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            // clap renders its own help/version output; keep its text but
            // fold usage errors into exit code 1.
            let is_help = matches!(
                err.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if is_help { EXIT_OK } else { EXIT_USAGE };
        }
    };
    match execute(&cli.command) {
        Ok(output) => {
            print!("{}", output.text);
            output.exit
        }
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::from_text(text, &[]).unwrap()
    }

    const COSH_PAIR: &str = "
[warping]
expression = cosh(t)
k = 1
domain_max = 10

[floor]
kind = weighted_cells
weights = 1.0, 1.0

[ceiling]
mode = step
heights = 0, 1
";

    #[test]
    fn check_passes_for_cosh() {
        let out = cmd_check(&cfg("
[warping]
expression = cosh(t)
k = 1
domain_max = 10
")).unwrap();
        assert_eq!(out.exit, EXIT_OK);
        assert!(out.text.contains("strictly_log_convex=true"));
    }

    #[test]
    fn check_fails_for_shifted_sine() {
        let out = cmd_check(&cfg("
[warping]
expression = sin(t) + 2
k = 1
domain_max = 10
")).unwrap();
        assert_eq!(out.exit, EXIT_CERTIFICATION);
        assert!(out.text.contains("log_convex=false"));
    }

    #[test]
    fn verify_reports_positive_margin_for_cosh_pair() {
        let out = cmd_verify(&cfg(COSH_PAIR)).unwrap();
        assert_eq!(out.exit, EXIT_OK);
        assert!(out.text.contains("equality=none"));
        let margin_line = out
            .text
            .lines()
            .find(|l| l.starts_with("margin="))
            .expect("margin line");
        let margin: f64 = margin_line.trim_start_matches("margin=").parse().unwrap();
        assert!(margin > 0.0);
    }

    #[test]
    fn omega_command_reports_source() {
        let out = cmd_omega(&cfg("
[warping]
expression = cosh(t)
k = 2
domain_max = 10
")).unwrap();
        assert_eq!(out.exit, EXIT_OK);
        assert!(out.text.contains("omega_source=first_critical_value"));
        assert!(out.text.contains("critical_count=1"));
    }

    #[test]
    fn omega_errors_map_to_precondition_exit() {
        let err = cmd_omega(&cfg("
[warping]
expression = exp(-t)
k = 1
domain_max = 10
")).unwrap_err();
        assert!(matches!(err, Error::BoundedWarping));
        assert_eq!(exit_code_for(&err), EXIT_PRECONDITION);
    }

    #[test]
    fn dido_command_closed_form() {
        let out = cmd_dido(&cfg(&format!("
[warping]
expression = cosh(t)
k = 1
domain_max = 10

[floor]
kind = weighted_cells
weights = 1.0

[run]
area = {}
", fmt17(1.0f64.cosh())))).unwrap();
        assert_eq!(out.exit, EXIT_OK);
        let chosen = out
            .text
            .lines()
            .find(|l| l.starts_with("chosen_h="))
            .unwrap()
            .trim_start_matches("chosen_h=")
            .parse::<f64>()
            .unwrap();
        assert!((chosen - 1.0).abs() < 1e-9);
    }

    #[test]
    fn repro_ex2_passes() {
        let out = cmd_repro("ex2").unwrap();
        assert_eq!(out.exit, EXIT_OK, "{}", out.text);
        assert!(out.text.contains("result=PASS"));
    }

    #[test]
    fn repro_ex3_passes() {
        let out = cmd_repro("ex3").unwrap();
        assert_eq!(out.exit, EXIT_OK, "{}", out.text);
    }

    #[test]
    fn repro_ex4_passes() {
        let out = cmd_repro("ex4").unwrap();
        assert_eq!(out.exit, EXIT_OK, "{}", out.text);
        assert!(out.text.contains("refused"));
    }

    #[test]
    fn repro_ex1_reports_the_critical_count_honestly() {
        // The profile of exp(t² - 2 sin t) has exactly one critical point in
        // (0, 10] — the growth rate 2t - 2cos t is nondecreasing, which
        // forbids any return crossing — so the advertised ">= 3" signature
        // cannot hold and the preset reports FAIL.
        let out = cmd_repro("ex1").unwrap();
        assert_eq!(out.exit, EXIT_VIOLATION);
        assert!(out.text.contains("critical_count_at_least_3=expected=>=3 found=1 status=fail"));
        assert!(out.text.contains("unique_global_min=expected=1 minimizing sample found=1 status=pass"));
    }

    #[test]
    fn unknown_preset_is_a_usage_error() {
        let err = cmd_repro("ex9").unwrap_err();
        assert_eq!(exit_code_for(&err), EXIT_USAGE);
    }
}
