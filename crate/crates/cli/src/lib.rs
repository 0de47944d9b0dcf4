//! Commands behind the `flagchart` binary.
//!
//! Exit codes: 0 success, 1 usage/IO error or failed lemma, 2 ping-pong
//! certificate failure, 3 domain search failure, 4 audit not stabilized.

pub mod artifacts;
pub mod config;

use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use flagchart::chart::Frame;
use flagchart::domain::{
    domain_margin, find_domain_point, properness_audit, thickening_in_chart, AuditReport, DomainPoint,
    NullHyperplaneSet,
};
use flagchart::geometry::Tolerances;
use flagchart::groups::SchottkyGroup;
use flagchart::lemmas::{run_lemma_suite, LemmaReport};
use flagchart::limitset::{containment_report, limit_sample, LimitSample};
use nalgebra::DVector;
use serde::Serialize;

pub use config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_PING_PONG: u8 = 2;
pub const EXIT_SEARCH: u8 = 3;
pub const EXIT_UNSTABLE: u8 = 4;

/// Maps an error to its exit code.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<flagchart::Error>() {
        Some(flagchart::Error::PingPong { .. }) => EXIT_PING_PONG,
        Some(flagchart::Error::SearchFailed { .. }) => EXIT_SEARCH,
        _ => EXIT_ERROR,
    }
}

#[derive(Serialize)]
struct ThickeningFile<'a> {
    schema_version: u32,
    group_id: &'a str,
    frame: &'a str,
    items: Vec<ThickeningItem<'a>>,
}

#[derive(Serialize)]
struct ThickeningItem<'a> {
    w: Vec<f64>,
    alpha: f64,
    word_len: usize,
    word: &'a str,
}

#[derive(Serialize)]
struct DomainFile<'a> {
    schema_version: u32,
    group_id: &'a str,
    frame: &'a str,
    hyperplanes: usize,
    point: &'a [f64],
    margin: f64,
    direction: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    refined: Option<Refinement>,
}

#[derive(Serialize)]
struct Refinement {
    depth: usize,
    hyperplanes: usize,
    margin: f64,
    degradation: f64,
}

#[derive(Serialize)]
struct AuditFile<'a> {
    schema_version: u32,
    config_hash: String,
    group_id: String,
    depth: usize,
    center: &'a [f64],
    radius: f64,
    per_length: &'a [usize],
    cumulative: &'a [usize],
    stabilized: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    domain_point: Option<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    margin: Option<f64>,
    tolerances: Tolerances,
}

struct Run {
    config: RunConfig,
    frame: Frame,
    group: SchottkyGroup,
}

impl Run {
    fn new(config: &RunConfig) -> Result<Self> {
        let space = config.space()?;
        space.validate()?;
        let frame = Frame::standard(&space);
        let group = config.group()?;
        std::fs::create_dir_all(&config.out).with_context(|| format!("creating {}", config.out.display()))?;
        Ok(Self {
            config: config.clone(),
            frame,
            group,
        })
    }

    fn path(&self, name: &str) -> std::path::PathBuf {
        self.config.out.join(name)
    }

    fn sample(&self) -> Result<LimitSample> {
        let sample = limit_sample(&self.frame, &self.group, self.config.depth)?;
        let report = containment_report(self.frame.space(), &sample.points, &self.frame.l())?;
        println!(
            "limit set: {} points (N = {}, {} irregular words skipped), max quadric margin {:.3e}, min distance to L {:.6}",
            sample.len(),
            self.config.depth,
            sample.irregular,
            report.max_margin,
            report.min_dist_to_l
        );
        Ok(sample)
    }

    fn write_limit_set(&self, sample: &LimitSample) -> Result<()> {
        artifacts::write_limit_set_csv(&self.path("limit_set.csv"), sample)?;
        if self.config.n == 3 {
            let planar = artifacts::planar_projection(&self.frame, sample);
            artifacts::write_planar_csv(&self.path("limit_set_2d.csv"), &planar, &sample.word_len)?;
            artifacts::write_svg(&self.path("limit_set.svg"), &planar, &sample.word_len)?;
        }
        Ok(())
    }

    fn write_thickening(&self, sample: &LimitSample, hset: &NullHyperplaneSet) -> Result<()> {
        let items = hset
            .items
            .iter()
            .zip(&sample.words)
            .map(|(it, word)| ThickeningItem {
                w: it.w.iter().copied().collect(),
                alpha: it.alpha,
                word_len: it.word_len,
                word,
            })
            .collect();
        artifacts::write_json(
            &self.path("thickening.json"),
            &ThickeningFile {
                schema_version: SCHEMA_VERSION,
                group_id: &hset.group_id,
                frame: self.frame.id(),
                items,
            },
        )
    }

    fn domain(&self, sample: &LimitSample) -> Result<(NullHyperplaneSet, DomainPoint)> {
        let hset = thickening_in_chart(&self.frame, sample)?;
        self.write_thickening(sample, &hset)?;
        let point = find_domain_point(&self.frame, &hset)?;
        println!("domain point {:?} with margin {:.6}", point.point, point.margin);
        Ok((hset, point))
    }

    fn write_domain(&self, hset: &NullHyperplaneSet, point: &DomainPoint, refined: Option<Refinement>) -> Result<()> {
        artifacts::write_json(
            &self.path("domain_point.json"),
            &DomainFile {
                schema_version: SCHEMA_VERSION,
                group_id: &hset.group_id,
                frame: self.frame.id(),
                hyperplanes: hset.len(),
                point: &point.point,
                margin: point.margin,
                direction: &point.direction,
                refined,
            },
        )
    }

    fn audit(&self, center: &[f64], radius: f64, found: Option<&DomainPoint>) -> Result<AuditReport> {
        let c = DVector::from_column_slice(center);
        let report = properness_audit(&self.group, &c, radius, self.config.depth)?;
        println!(
            "audit radius {:.6}: returners per length {:?}, stabilized up to depth {}: {}",
            radius, report.per_length, report.depth, report.stabilized
        );
        artifacts::write_json(
            &self.path("audit.json"),
            &AuditFile {
                schema_version: SCHEMA_VERSION,
                config_hash: self.config.hash()?,
                group_id: self.group.fingerprint(),
                depth: report.depth,
                center: &report.center,
                radius: report.radius,
                per_length: &report.per_length,
                cumulative: &report.cumulative,
                stabilized: report.stabilized,
                domain_point: found.map(|d| d.point.as_slice()),
                margin: found.map(|d| d.margin),
                tolerances: self.config.tolerances,
            },
        )?;
        Ok(report)
    }
}

fn audit_exit(report: &AuditReport) -> ExitCode {
    if report.stabilized {
        ExitCode::from(EXIT_OK)
    } else {
        ExitCode::from(EXIT_UNSTABLE)
    }
}

/// Runs the lemma suite and writes `lemmas.json`; exit 1 names the first failure.
pub fn check_lemmas(config: &RunConfig) -> Result<ExitCode> {
    let space = config.space()?;
    let report: LemmaReport = run_lemma_suite(&space, config.seed, config.lemma_samples);
    std::fs::create_dir_all(&config.out)?;
    artifacts::write_json(&config.out.join("lemmas.json"), &report)?;
    for l in &report.lemmas {
        println!(
            "{:<28} {:>6} samples  max error {:.3e}  (tol {:.0e})  {}",
            l.name,
            l.samples,
            l.max_error,
            l.tolerance,
            if l.passed { "ok" } else { "FAILED" }
        );
    }
    match &report.first_failure {
        None => Ok(ExitCode::from(EXIT_OK)),
        Some(name) => {
            eprintln!("lemma failed: {name}");
            Ok(ExitCode::from(EXIT_ERROR))
        }
    }
}

pub fn limit_set(config: &RunConfig) -> Result<ExitCode> {
    let ctx = Run::new(config)?;
    let sample = ctx.sample()?;
    ctx.write_limit_set(&sample)?;
    Ok(ExitCode::from(EXIT_OK))
}

pub fn find_domain(config: &RunConfig) -> Result<ExitCode> {
    let ctx = Run::new(config)?;
    let sample = ctx.sample()?;
    let (hset, point) = ctx.domain(&sample)?;
    ctx.write_domain(&hset, &point, None)?;
    Ok(ExitCode::from(EXIT_OK))
}

/// Audits `B(center, radius)`, or the found domain point with radius
/// `radius_fraction · margin` when no center is given.
pub fn audit(config: &RunConfig, center: Option<&[f64]>, radius: Option<f64>) -> Result<ExitCode> {
    let ctx = Run::new(config)?;
    let report = match center {
        Some(c) => {
            anyhow::ensure!(c.len() == config.n, "center needs {} coordinates", config.n);
            let r = radius.context("--radius is required with --center")?;
            ctx.audit(c, r, None)?
        }
        None => {
            let sample = ctx.sample()?;
            let (hset, point) = ctx.domain(&sample)?;
            ctx.write_domain(&hset, &point, None)?;
            let r = radius.unwrap_or(point.margin * config.radius_fraction);
            ctx.audit(&point.point, r, Some(&point))?
        }
    };
    Ok(audit_exit(&report))
}

/// Every artifact: limit set, thickening, domain point re-checked against a
/// deeper sample, and the audit at that point.
pub fn pipeline(config: &RunConfig) -> Result<ExitCode> {
    let ctx = Run::new(config)?;
    let sample = ctx.sample()?;
    ctx.write_limit_set(&sample)?;
    let (hset, point) = ctx.domain(&sample)?;
    let refine_depth = config.refine_depth();
    let deeper = thickening_in_chart(&ctx.frame, &limit_sample(&ctx.frame, &ctx.group, refine_depth)?)?;
    let refined_margin = domain_margin(&deeper, &point.vector());
    let degradation = (point.margin - refined_margin).max(0.0) / point.margin;
    println!(
        "margin against N = {refine_depth} ({} hyperplanes): {refined_margin:.6}, degradation {:.2}%",
        deeper.len(),
        100.0 * degradation
    );
    ctx.write_domain(
        &hset,
        &point,
        Some(Refinement {
            depth: refine_depth,
            hyperplanes: deeper.len(),
            margin: refined_margin,
            degradation,
        }),
    )?;
    let report = ctx.audit(&point.point, point.margin * config.radius_fraction, Some(&point))?;
    Ok(audit_exit(&report))
}

/// Writes the default configuration.
pub fn init_config(path: &Path) -> Result<ExitCode> {
    std::fs::write(path, RunConfig::default().to_toml()?).with_context(|| format!("writing {}", path.display()))?;
    Ok(ExitCode::from(EXIT_OK))
}
