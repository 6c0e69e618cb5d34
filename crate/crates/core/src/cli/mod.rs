//! Batch commands behind the `norden` binary.
//!
//! Each command takes a [`RunConfig`] and returns a [`Report`]; the binary
//! only parses arguments, applies overrides and writes the result.

pub mod config;
mod verify;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{
    BaseSpec, FamilySpec, FnSpec, Perturbation, RunConfig, ToleranceSpec, SCHEMA_VERSION,
};
pub use verify::{resolve as resolve_target, Expect, Verification, VerifyCheck, TARGETS};

use crate::classify::{self, ClassReport, Tolerances, Verdict};
use crate::connection::{analyze_point, write_f_csv, PointAnalysis};
use crate::error::{Error, Result};
use crate::lift::{check_family, frame_at, Coeff, CoefficientFamily, ConstraintReport};
use crate::sampling::{sample_points, SamplingConfig};

/// Number of points whose `F` components go into the dump.
pub const DUMP_POINTS: usize = 5;
/// Rows in the dumped coefficient table.
pub const DUMP_ROWS: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    /// Worst of the given statuses; `Pass` when empty.
    pub fn combine(items: impl IntoIterator<Item = Status>) -> Status {
        items
            .into_iter()
            .fold(Status::Pass, |acc, s| match (acc, s) {
                (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
                (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
                _ => Status::Pass,
            })
    }

    /// Process exit code.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Check,
    Classify,
    Verify,
    Dump,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

/// Pointwise structure residuals from the assembled `J` and `G`.
#[derive(Debug, Clone, Serialize)]
pub struct PointwiseStructure {
    pub j_squared_plus_identity: f64,
    /// `|JᵀGJ + G| / (1 + max|G|)`.
    pub norden: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: Command,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraints: Option<ConstraintReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pointwise: Option<PointwiseStructure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes: Option<ClassReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub files: Vec<PathBuf>,
    /// Flat map from identity name to its residual.
    pub residuals: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl Report {
    fn new(command: Command, config: &RunConfig) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            command,
            target: None,
            config: config.clone(),
            family: None,
            status: Status::Pass,
            constraints: None,
            pointwise: None,
            classes: None,
            verification: None,
            files: Vec::new(),
            residuals: BTreeMap::new(),
            timing: None,
        }
    }

    fn finish(mut self, start: Instant) -> Self {
        self.timing = Some(Timing {
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON without the timing block, for reproducibility comparisons.
    pub fn canonical_json(&self) -> String {
        let mut r = self.clone();
        r.timing = None;
        r.to_json()
    }
}

fn tolerances(cfg: &RunConfig, fam: &CoefficientFamily) -> Tolerances {
    let mut tol = Tolerances::for_family(fam);
    if let Some(m) = cfg.tolerances.member {
        tol.member = m;
    }
    if let Some(r) = cfg.tolerances.reject {
        tol.reject = r;
    }
    tol
}

fn analyses(cfg: &RunConfig, fam: &CoefficientFamily) -> Result<Vec<PointAnalysis>> {
    let sf = cfg.base.space_form()?;
    let pts = sample_points(&sf, &fam.domain(), &cfg.sampling)?;
    pts.par_iter().map(|p| analyze_point(fam, &sf, p)).collect()
}

/// Structure checks: coefficient relations on a `t` grid plus `J² = -I`
/// and the Norden condition at sampled tangent points.
pub fn cmd_check(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let mut report = Report::new(Command::Check, cfg);
    let fam = cfg.build_family()?;
    let sf = cfg.base.space_form()?;
    let pts = sample_points(&sf, &fam.domain(), &cfg.sampling)?;

    let hi = cfg.sampling.t_upper(&fam.domain());
    let mut ts: Vec<f64> = (0..=20).map(|i| hi * i as f64 / 20.0).collect();
    ts.extend(pts.iter().map(|p| p.t));
    let constraints = check_family(&fam, &ts)?;

    let frames = pts
        .par_iter()
        .map(|p| frame_at(&fam, &sf, p))
        .collect::<Result<Vec<_>>>()?;
    let mut jj: f64 = 0.0;
    let mut norden: f64 = 0.0;
    for fr in &frames {
        jj = jj.max(fr.complex_residual());
        norden = norden.max(fr.norden_residual() / (1.0 + fr.g.amax()));
    }
    let tol = constraints.tolerance;
    let pointwise = PointwiseStructure {
        j_squared_plus_identity: jj,
        norden,
        tolerance: tol,
        samples: frames.len(),
        pass: jj < tol && norden < tol,
    };

    for c in &constraints.checks {
        report.residuals.insert(c.name.to_string(), c.value);
    }
    report
        .residuals
        .insert("j_squared_plus_identity".into(), jj);
    report.residuals.insert("norden_pointwise".into(), norden);
    report.status = if constraints.pass && pointwise.pass {
        Status::Pass
    } else {
        Status::Fail
    };
    report.family = Some(fam.label().to_string());
    report.constraints = Some(constraints);
    report.pointwise = Some(pointwise);
    Ok(report.finish(start))
}

/// Runs all eight class identities and reports the verdicts.
pub fn cmd_classify(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let mut report = Report::new(Command::Classify, cfg);
    let fam = cfg.build_family()?;
    let sf = cfg.base.space_form()?;
    let pts = sample_points(&sf, &fam.domain(), &cfg.sampling)?;
    let classes = classify::classify(&fam, &sf, &pts, tolerances(cfg, &fam))?;

    for (k, v) in classes.residual_map() {
        report.residuals.insert(k.to_string(), v);
    }
    let d = &classes.diagnostics;
    report.residuals.insert("f_swap_symmetry".into(), d.f_swap);
    report
        .residuals
        .insert("f_j_invariance".into(), d.f_j_invariance);
    report.residuals.insert("nijenhuis".into(), d.nijenhuis);
    report.residuals.insert("phi_shape".into(), d.phi_shape);
    report.status = if classes
        .classes
        .iter()
        .any(|e| e.verdict == Verdict::Inconclusive)
    {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    report.family = Some(fam.label().to_string());
    report.classes = Some(classes);
    Ok(report.finish(start))
}

/// Runs one built-in verification by id (`"3.2"`) or name
/// (`"anti-kahler-diagonal"`). The family in `cfg` is not used; the base
/// and sampling are.
pub fn cmd_verify(target: &str, cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let mut report = Report::new(Command::Verify, cfg);
    report.target = Some(target.to_string());
    let v = verify::verify(target, cfg.base.n, cfg.base.c, &cfg.sampling)?;
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (i, k) in v.checks.iter().enumerate() {
        let role = if k.expect == Expect::Above {
            "witness"
        } else {
            "family"
        };
        let base = format!("{}.{}.{}", v.target, role, k.name);
        let n = seen.entry(base.clone()).or_default();
        let key = if *n == 0 { base } else { format!("{base}#{i}") };
        *n += 1;
        report.residuals.insert(key, k.residual);
    }
    report.status = v.status;
    report.verification = Some(v);
    Ok(report.finish(start))
}

fn t_grid(fam: &CoefficientFamily) -> Vec<f64> {
    let d = fam.domain();
    let hi = if d.t_max.is_finite() {
        d.t_max * (1.0 - crate::sampling::DOMAIN_MARGIN)
    } else {
        1.0
    };
    (0..DUMP_ROWS)
        .map(|i| hi * i as f64 / (DUMP_ROWS - 1) as f64)
        .collect()
}

/// Writes `coefficients.csv` (all twelve coefficients on a `t` grid) and
/// `f_components.csv` (adapted `F` components at the first few sampled
/// points) into the output directory.
pub fn cmd_dump(cfg: &RunConfig, dir: &Path) -> Result<Report> {
    let start = Instant::now();
    let mut report = Report::new(Command::Dump, cfg);
    let fam = cfg.build_family()?;
    fs::create_dir_all(dir)?;

    let coeff_path = dir.join("coefficients.csv");
    let mut w = csv::Writer::from_path(&coeff_path).map_err(|e| Error::Io(e.into()))?;
    let io = |e: csv::Error| Error::Io(e.into());
    let mut header = vec!["t".to_string()];
    header.extend(Coeff::ALL.iter().map(|c| c.name().to_string()));
    w.write_record(&header).map_err(io)?;
    for t in t_grid(&fam) {
        let k = fam.values(t)?;
        let mut row = vec![format!("{t:.17e}")];
        row.extend(Coeff::ALL.iter().map(|&c| format!("{:.17e}", k.get(c))));
        w.write_record(&row).map_err(io)?;
    }
    w.flush()?;

    let dump_cfg = RunConfig {
        sampling: SamplingConfig {
            num_points: cfg.sampling.num_points.min(DUMP_POINTS),
            ..cfg.sampling
        },
        ..cfg.clone()
    };
    let pas = analyses(&dump_cfg, &fam)?;
    let items: Vec<(usize, &PointAnalysis)> = pas.iter().enumerate().collect();
    let f_path = dir.join("f_components.csv");
    write_f_csv(fs::File::create(&f_path)?, &items)?;

    report.family = Some(fam.label().to_string());
    report.files = vec![coeff_path, f_path];
    Ok(report.finish(start))
}
