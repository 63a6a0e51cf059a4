//! Run configuration, orchestration of the stages, reports and run
//! directories.
//!
//! A run directory holds `config.json`, `report.json`, `base.json`,
//! `stages/stage_<k>.json` and, unless disabled, `windows/stage_<k>.json`
//! with optional renders next to them. Everything is JSON and written in a
//! fixed order, so equal configurations give byte-identical directories.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::arrays::{hat_embed, render_ascii, render_pgm, window_from_json, window_to_json, ArrayWindow, BasePattern, PatternLayout};
use crate::construction::{apply_stage, compose, step, StageParams, StageState, StageTrace};
use crate::error::{Error, Result};
use crate::group::{Group, GroupElement};
use crate::markers::MarkerStats;
use crate::verify::{run_checks, CheckRecord, RunArtifacts, VerificationReport, DEFAULT_SLACK};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseKind {
    Full,
    Sft,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSpec {
    pub kind: BaseKind,
    #[serde(default)]
    pub forbidden: Vec<Vec<u8>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkerConfig {
    #[serde(rename = "R", default = "default_pattern_radius")]
    pub pattern_radius: i64,
    #[serde(default)]
    pub s_slack: i64,
}

impl Default for MarkerConfig {
    fn default() -> Self {
        MarkerConfig {
            pattern_radius: default_pattern_radius(),
            s_slack: 0,
        }
    }
}

fn default_pattern_radius() -> i64 {
    16
}

fn default_budget() -> usize {
    64
}

fn default_slack() -> f64 {
    DEFAULT_SLACK
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderOptions {
    /// ASCII renders (d = 1) of `[-radius, radius]` for every stage output.
    #[serde(default)]
    pub ascii_radius: Option<i64>,
    /// Rows rendered as PGM (d = 2) for every stage output.
    #[serde(default)]
    pub pgm_rows: Vec<i32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    pub alphabet_size: u8,
    pub base: BaseSpec,
    pub seed: u64,
    pub stages: usize,
    /// Defaults to `ε_k = 2^{-(k+2)}`.
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default)]
    pub r: i64,
    pub window_radius: i64,
    #[serde(default)]
    pub marker: MarkerConfig,
    #[serde(default = "default_budget")]
    pub search_budget: usize,
    /// Per stage, restricts family candidates to a box around each sample
    /// centre; `null` scans the whole interior.
    #[serde(default)]
    pub family_radius: Vec<Option<i64>>,
    /// Independent sample windows added to the library at every stage.
    #[serde(default)]
    pub extra_samples: usize,
    #[serde(default = "default_slack")]
    pub slack: f64,
    #[serde(default = "yes")]
    pub save_windows: bool,
    #[serde(default)]
    pub render: RenderOptions,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    /// A one-dimensional full-shift run with defaults elsewhere.
    pub fn full_shift(dimension: usize, stages: usize, window_radius: i64, seed: u64) -> Self {
        RunConfig {
            dimension,
            alphabet_size: 2,
            base: BaseSpec {
                kind: BaseKind::Full,
                forbidden: Vec::new(),
            },
            seed,
            stages,
            epsilons: None,
            r: 0,
            window_radius,
            marker: MarkerConfig::default(),
            search_budget: default_budget(),
            family_radius: Vec::new(),
            extra_samples: 0,
            slack: DEFAULT_SLACK,
            save_windows: true,
            render: RenderOptions::default(),
            output: None,
        }
    }

    pub fn epsilons(&self) -> Vec<f64> {
        self.epsilons
            .clone()
            .unwrap_or_else(|| StageParams::<f64>::default_epsilons(self.stages))
    }

    pub fn params(&self) -> StageParams<f64> {
        StageParams {
            epsilons: self.epsilons(),
            r: self.r,
            pattern_radius: self.marker.pattern_radius,
            slack: self.marker.s_slack,
            search_budget: self.search_budget,
            family_radius: self.family_radius.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let op = "pipeline::config";
        Group::new(self.dimension)?;
        if !(2..=36).contains(&self.alphabet_size) {
            return Err(Error::config(op, "alphabet_size must lie in 2..=36"));
        }
        if self.window_radius < 1 {
            return Err(Error::config(op, "window_radius must be positive"));
        }
        if self.base.kind == BaseKind::Sft && self.dimension != 1 {
            return Err(Error::config(op, "sft bases are supported in dimension 1 only"));
        }
        if self.base.kind == BaseKind::Full && !self.base.forbidden.is_empty() {
            return Err(Error::config(op, "forbidden words given for a full shift"));
        }
        if !(self.slack >= 0.0) {
            return Err(Error::config(op, "slack must be nonnegative"));
        }
        if self.stages > 0 {
            self.params().validate(self.stages)?;
        } else if let Some(e) = &self.epsilons {
            if !e.is_empty() {
                StageParams::new(e.clone()).validate(e.len())?;
            }
        }
        let side = 2 * (self.window_radius + self.r) as u128 + 1;
        let cells = side.pow(self.dimension as u32) * (2 * self.stages as u128 + 1);
        if cells > 1 << 31 {
            return Err(Error::resource(op, format!("window of {cells} cells is too large")));
        }
        PatternLayout::new(self.dimension, self.r, self.alphabet_size)?;
        Ok(())
    }
}

fn sample(config: &RunConfig, seed: u64) -> Result<(BasePattern, ArrayWindow)> {
    let d = config.dimension;
    let w = config.window_radius;
    let r = config.r;
    let lo = GroupElement::new(&vec![-w - r; d])?;
    let hi = GroupElement::new(&vec![w + r; d])?;
    let base = match config.base.kind {
        BaseKind::Full => BasePattern::full_shift(lo, hi, config.alphabet_size, seed)?,
        BaseKind::Sft => BasePattern::sft(lo, hi, config.alphabet_size, &config.base.forbidden, seed)?,
    };
    let layout = Arc::new(PatternLayout::new(d, r, config.alphabet_size)?);
    let wlo = GroupElement::new(&vec![-w; d])?;
    let whi = GroupElement::new(&vec![w; d])?;
    let y = hat_embed(&base, layout, wlo, whi, config.stages)?;
    let base = base.crop(wlo, whi)?;
    Ok((base, y))
}

/// Seed of the `i`-th extra sample.
fn sample_seed(seed: u64, i: usize) -> u64 {
    seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(i as u64 + 1))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: usize,
    pub epsilon: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub t_size: usize,
    pub t_radius: i64,
    pub h_size: usize,
    pub h_radius: i64,
    pub f_m_size: usize,
    pub m: i64,
    pub e_radius: i64,
    pub margin: i64,
    pub primary: Option<MarkerStats>,
    pub secondary: Option<MarkerStats>,
    pub sites: usize,
    pub completions: usize,
    pub change_fraction: Option<f64>,
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub window_cells: usize,
    pub interior: Option<(GroupElement, GroupElement)>,
    pub stages: Vec<StageReport>,
    pub checks: VerificationReport,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub base: BasePattern,
    /// `windows[k]` is the stage-`k` output, `windows[0]` the embedding.
    pub windows: Vec<ArrayWindow>,
    pub states: Vec<StageState>,
    pub traces: Vec<StageTrace>,
    pub report: RunReport,
}

/// Builds and applies every stage, then runs the verification suite.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let params = config.params();
    let (base, y0) = sample(config, config.seed)?;
    let mut extras: Vec<ArrayWindow> = (0..config.extra_samples)
        .map(|i| sample(config, sample_seed(config.seed, i)).map(|(_, y)| y))
        .collect::<Result<_>>()?;
    let mut windows = vec![y0];
    let mut states: Vec<StageState> = Vec::new();
    let mut traces = Vec::new();
    for s in 1..=config.stages {
        let cur = windows.last().expect("nonempty");
        let mut samples = Vec::with_capacity(1 + extras.len());
        samples.push(cur.clone());
        samples.extend(extras.iter().cloned());
        let st = step(&samples, &states, &params)?;
        let (y, tr) = apply_stage(cur, &st, &states)?;
        log::info!("stage {s} applied: {} sites, margin {}", tr.sites, y.margin());
        extras = extras
            .iter()
            .map(|x| apply_stage(x, &st, &states).map(|(y, _)| y))
            .collect::<Result<_>>()?;
        states.push(st);
        windows.push(y);
        traces.push(tr);
    }
    let checks = run_checks(&RunArtifacts {
        base: &base,
        windows: &windows,
        states: &states,
        traces: &traces,
        slack: config.slack,
    });
    let report = build_report(config, &windows, &states, &traces, checks);
    Ok(RunOutcome {
        config: config.clone(),
        base,
        windows,
        states,
        traces,
        report,
    })
}

fn build_report(
    config: &RunConfig,
    windows: &[ArrayWindow],
    states: &[StageState],
    traces: &[StageTrace],
    checks: VerificationReport,
) -> RunReport {
    let last = windows.last().expect("nonempty");
    let stages = states
        .iter()
        .zip(traces)
        .map(|(st, tr)| {
            let s = st.stage;
            let tag = format!("stage_{s}");
            let violations: Vec<String> = checks
                .checks
                .iter()
                .filter(|c| !c.pass && c.name.contains(&tag))
                .map(|c| c.name.clone())
                .collect();
            StageReport {
                stage: s,
                epsilon: st.epsilon,
                n: st.n(),
                t_size: st.t.len(),
                t_radius: st.t.radius(),
                h_size: st.h.len(),
                h_radius: st.h.radius(),
                f_m_size: st.f_m.len(),
                m: st.m,
                e_radius: st.e_radius,
                margin: st.margin,
                primary: tr.primary.clone(),
                secondary: tr.secondary.clone(),
                sites: tr.sites,
                completions: tr.completions,
                change_fraction: checks.get(&format!("change_density.{tag}")).and_then(|c| c.measured),
                violations,
            }
        })
        .collect();
    let pass = checks.all_pass();
    RunReport {
        config: config.clone(),
        window_cells: last.len(),
        interior: last.interior().map(|b| (b.lo(), b.hi())),
        stages,
        checks,
        pass,
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(p) = path.parent() {
        fs::create_dir_all(p)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Writes the run directory.
pub fn write_run_dir(out: &RunOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write(&dir.join("config.json"), &to_json(&out.config)?)?;
    write(&dir.join("report.json"), &to_json(&out.report)?)?;
    write(&dir.join("base.json"), &to_json(&out.base)?)?;
    for st in &out.states {
        write(&dir.join(format!("stages/stage_{}.json", st.stage)), &to_json(st)?)?;
    }
    write(&dir.join("traces.json"), &to_json(&out.traces)?)?;
    for (k, w) in out.windows.iter().enumerate() {
        if out.config.save_windows {
            write(&dir.join(format!("windows/stage_{k}.json")), &window_to_json(w)?)?;
        }
        if let Some(rad) = out.config.render.ascii_radius {
            if w.dim() == 1 {
                let rad = rad.min(out.config.window_radius);
                let crop = w.crop(GroupElement::from_slice(&[-rad]), GroupElement::from_slice(&[rad]))?;
                write(&dir.join(format!("renders/stage_{k}.txt")), &render_ascii(&crop, None)?)?;
            }
        }
        if w.dim() == 2 {
            for &row in &out.config.render.pgm_rows {
                if row.unsigned_abs() as usize <= w.band() {
                    write(&dir.join(format!("renders/stage_{k}_row_{row}.pgm")), &render_pgm(w, row)?)?;
                }
            }
        }
    }
    Ok(())
}

/// A run directory read back from disk.
#[derive(Clone, Debug)]
pub struct LoadedRun {
    pub config: RunConfig,
    pub base: BasePattern,
    pub states: Vec<StageState>,
    pub windows: Vec<ArrayWindow>,
    pub report: Option<RunReport>,
}

pub fn load_run_dir(dir: &Path) -> Result<LoadedRun> {
    let read = |p: PathBuf| -> Result<String> {
        fs::read_to_string(&p).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display()))))
    };
    let config: RunConfig = serde_json::from_str(&read(dir.join("config.json"))?)?;
    let base: BasePattern = serde_json::from_str(&read(dir.join("base.json"))?)?;
    let mut states = Vec::new();
    for s in 1..=config.stages {
        states.push(serde_json::from_str(&read(dir.join(format!("stages/stage_{s}.json")))?)?);
    }
    let mut windows = Vec::new();
    if config.save_windows {
        for k in 0..=config.stages {
            windows.push(window_from_json(&read(dir.join(format!("windows/stage_{k}.json")))?)?);
        }
    }
    let report = match fs::read_to_string(dir.join("report.json")) {
        Ok(t) => Some(serde_json::from_str(&t)?),
        Err(_) => None,
    };
    Ok(LoadedRun {
        config,
        base,
        states,
        windows,
        report,
    })
}

/// Recomputes every output from the stored base point and stage states,
/// compares with the stored windows, and reruns the suite.
pub fn verify_run(run: &LoadedRun) -> Result<VerificationReport> {
    let layout = Arc::new(PatternLayout::new(run.config.dimension, run.config.r, run.config.alphabet_size)?);
    let r = run.config.r;
    let (lo, hi) = (run.base.lo(), run.base.hi());
    let (ilo, ihi) = crate::grid::shrink_bounds(&lo, &hi, r);
    let y0 = hat_embed(&run.base, layout, ilo, ihi, run.config.stages)?;
    let (windows, traces) = compose(&y0, &run.states)?;
    let mut report = run_checks(&RunArtifacts {
        base: &run.base,
        windows: &windows,
        states: &run.states,
        traces: &traces,
        slack: run.config.slack,
    });
    if !run.windows.is_empty() {
        let same = run.windows.len() == windows.len() && run.windows.iter().zip(&windows).all(|(a, b)| a == b);
        report.push(CheckRecord::new("stored_windows.reproducible", windows.len() as u64, same));
    }
    if let Some(stored) = &run.report {
        let same = stored.checks == report_without_reproducibility(&report);
        report.push(CheckRecord::new("stored_report.reproducible", stored.checks.checks.len() as u64, same));
    }
    Ok(report)
}

fn report_without_reproducibility(r: &VerificationReport) -> VerificationReport {
    VerificationReport {
        checks: r
            .checks
            .iter()
            .filter(|c| !c.name.starts_with("stored_"))
            .cloned()
            .collect(),
    }
}
