//! The four subcommands. Each returns its outcome; printing and exit codes
//! are left to `main`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use teichlab::contfrac::{
    check_conditions, generate_slope_family, parse_family, verify_lemma_slopes, write_family, FamilyFile, FamilyStatus,
};
use teichlab::geodesic::{length_report, write_length_csv};
use teichlab::limitset::{
    feasible_levels, limit_report, plot_files, summary_json, write_limit_csv, LimitReport, LimitReportSpec,
};
use teichlab::surface::{parse_curve_list, Curve, SlitSurface};
use teichlab::{Error, Result};

use crate::config::RunConfig;
use crate::suite::{run_suites, SuiteResult};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const ERROR: i32 = 1;
    pub const BUDGET_EXCEEDED: i32 = 2;
    pub const UNRELIABLE_PROBE: i32 = 3;
    pub const SUITE_FAILED: i32 = 4;
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

pub fn load_family(path: &Path) -> Result<FamilyFile> {
    parse_family(&fs::read_to_string(path)?)
}

/// Condition and slope-lemma summary printed after generation.
pub fn family_summary(file: &FamilyFile) -> String {
    let fam = &file.family;
    let mut out = String::new();
    let status = match file.status {
        FamilyStatus::Complete => "complete".to_string(),
        FamilyStatus::Partial(l) => format!("partial, stopped at level {l}"),
    };
    let _ = writeln!(
        out,
        "family: d={} mode={} levels={} depth={} max_bits={} ({status})",
        fam.d(),
        fam.mode(),
        fam.levels(),
        fam.depth(),
        fam.max_bits()
    );
    for c in check_conditions(fam).checks {
        let verdict = if c.passed() { "ok" } else { "FAILED" };
        let _ = writeln!(out, "condition {:<6} {verdict} ({} checks)", c.name, c.checked);
    }
    let lemma = verify_lemma_slopes(fam);
    let _ = writeln!(
        out,
        "odd-q equality {}; q products {} ({} checks)",
        if lemma.odd_q_all_exact() { "exact" } else { "FAILED" },
        if lemma.qprod_holds() { "ok" } else { "FAILED" },
        lemma.qprod_checked
    );
    for row in &lemma.rows {
        let gap01 = row
            .q_ratio_gap_01
            .as_ref()
            .map_or("-".to_string(), |g| format!("{:e}", g.to_f64()));
        let _ = writeln!(
            out,
            "level {}: q-ratio gap {:e}, (0,1) gap {gap01}, log-ratio gap {}",
            row.level,
            row.q_ratio_gap.to_f64(),
            row.log_ratio_gap.display(4)
        );
    }
    out
}

#[derive(Debug)]
pub struct Generated {
    pub path: PathBuf,
    pub file: FamilyFile,
    pub summary: String,
}

/// Writes `family.txt` and `generate.log`. On budget overflow the exact
/// levels computed so far are written with a `partial` status before the
/// error is returned.
pub fn generate(cfg: &RunConfig) -> Result<Generated> {
    let u = cfg.dense_sequence()?;
    let path = cfg.family_path();
    let (file, outcome) = match generate_slope_family(&cfg.family_spec(), &u) {
        Ok(family) => (
            FamilyFile {
                s0: cfg.s0.clone(),
                status: FamilyStatus::Complete,
                family,
            },
            Ok(()),
        ),
        Err(Error::BudgetExceeded(overflow)) => (
            FamilyFile {
                s0: cfg.s0.clone(),
                status: FamilyStatus::Partial(overflow.level),
                family: overflow.partial.clone(),
            },
            Err(Error::BudgetExceeded(overflow)),
        ),
        Err(e) => return Err(e),
    };
    write_file(&path, &write_family(&file))?;
    let summary = family_summary(&file);
    write_file(&cfg.out_dir.join("generate.log"), &summary)?;
    outcome.map(|()| Generated { path, file, summary })
}

fn surface(cfg: &RunConfig, family: &Path) -> Result<SlitSurface> {
    SlitSurface::from_file(&load_family(family)?, cfg.precision())
}

fn panel(s: &SlitSurface, cfg: &RunConfig) -> Vec<Curve> {
    cfg.panel.clone().unwrap_or_else(|| {
        (0..s.tori())
            .map(|i| Curve::torus(i, 1, 0).expect("primitive"))
            .collect()
    })
}

/// Writes `trace.csv`: every curve at every grid time, time-major.
pub fn trace(cfg: &RunConfig, family: &Path) -> Result<PathBuf> {
    let s = surface(cfg, family)?;
    let curves = match &cfg.curves {
        Some(path) => parse_curve_list(&fs::read_to_string(path)?)?,
        None => panel(&s, cfg),
    };
    let mut rows = Vec::new();
    for t in cfg.times.intervals(s.precision()) {
        for c in &curves {
            rows.push(length_report(&s, c, &t)?);
        }
    }
    let path = cfg.out_dir.join("trace.csv");
    write_file(&path, &write_length_csv(&rows, cfg.print_digits))?;
    Ok(path)
}

pub fn report_spec(s: &SlitSurface, cfg: &RunConfig) -> LimitReportSpec {
    let mut spec = LimitReportSpec::default_for(s);
    spec.panel = panel(s, cfg);
    if let Some(g) = &cfg.gamma1 {
        spec.gamma1 = g.clone();
    }
    if let Some(g) = &cfg.gamma2 {
        spec.gamma2 = g.clone();
    }
    if let Some(b) = &cfg.bridge {
        spec.bridge = b.clone();
    }
    if let Some((a, b)) = cfg.levels_probed {
        spec.levels = feasible_levels(s).into_iter().filter(|n| (a..=b).contains(n)).collect();
    }
    spec.ratio_tol = cfg.ratio_tol;
    spec.collar_tol = cfg.collar_tol;
    spec
}

#[derive(Debug)]
pub struct LimitOutputs {
    pub report: LimitReport,
    pub files: Vec<PathBuf>,
}

/// Writes `limit.csv`, `limit_summary.json` and `plots/*.dat`.
pub fn limit(cfg: &RunConfig, family: &Path) -> Result<LimitOutputs> {
    let s = surface(cfg, family)?;
    let report = limit_report(&s, report_spec(&s, cfg))?;
    let digits = cfg.print_digits;
    let mut files = vec![cfg.out_dir.join("limit.csv"), cfg.out_dir.join("limit_summary.json")];
    write_file(&files[0], &write_limit_csv(&report, digits))?;
    write_file(&files[1], &summary_json(&report, digits))?;
    for (name, body) in plot_files(&report, digits) {
        let path = cfg.out_dir.join("plots").join(name);
        write_file(&path, &body)?;
        files.push(path);
    }
    Ok(LimitOutputs { report, files })
}

pub fn verify(cfg: &RunConfig, family: &Path) -> Result<Vec<SuiteResult>> {
    run_suites(&load_family(family)?, cfg)
}
