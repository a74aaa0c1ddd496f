//! Experiment orchestration: configs, seeded runs, artifacts.

pub mod config;
pub mod emit;
mod prevalence;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::averaging::{average_grid, average_spectral, grid_inputs, grid_tolerance};
use crate::error::{input, Error, Result};
use crate::geometry::{
    box_dimension, default_directions, fourier_dimension, holder_density, occupation_window, p_variation,
    roughness_modulus,
};
use crate::irregularity::{fit_exponential, interpolation_check, irregularity_report, moment_decay, MomentConfig};
use crate::path::SampledPath;
use crate::rng::Seed;
use crate::simulate::{ProcessModel, Sampler};
use crate::spectral::{phi_table, FrequencySet, IntervalFamily, SpectralField, SpectralTerm};
use crate::stats::median;
use crate::young::{flow_diagnostic, solve_ode, OdeProblem};

pub use config::{ExperimentConfig, ExperimentKind, FormatChoice, ModelSpec, Route, SCHEMA_VERSION};
pub use emit::{emit, fmt_f64, render, Artifact, Format};
pub use prevalence::{prevalence_harness, PrevalenceEstimator, PrevalenceReport, PrevalenceSample, ShiftSpec};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub ok: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub code_version: String,
    pub kind: ExperimentKind,
    pub seed: u64,
    /// Seconds since the Unix epoch.
    pub started: u64,
    pub finished: u64,
    pub stages: Vec<StageRecord>,
    /// Every other file in the output directory, sorted by name.
    pub files: Vec<FileRecord>,
}

impl RunManifest {
    pub fn succeeded(&self) -> bool {
        self.stages.iter().all(|s| s.ok)
    }
}

/// Reads a CSV path (`.csv`) or the binary path format.
pub fn read_path(path: &Path) -> Result<SampledPath> {
    let file = fs::File::open(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        SampledPath::read_csv(file)
    } else {
        SampledPath::read_binary(std::io::BufReader::new(file))
    }
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn sha256_file(path: &Path) -> Result<(String, u64)> {
    let bytes = fs::read(path)?;
    Ok((config::hex(&Sha256::digest(&bytes)), bytes.len() as u64))
}

/// Lists every regular file in `dir` except the manifest.
pub fn checksum_dir(dir: &Path) -> Result<Vec<FileRecord>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name == MANIFEST_NAME || !entry.file_type()?.is_file() {
            continue;
        }
        let (sha256, bytes) = sha256_file(&entry.path())?;
        out.push(FileRecord { name, sha256, bytes });
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

struct Writer {
    dir: PathBuf,
    formats: Vec<Format>,
    stages: Vec<StageRecord>,
}

impl Writer {
    fn write(&self, artifact: &Artifact) -> Result<()> {
        let mut chosen: Vec<Format> = self.formats.iter().cloned().filter(|f| artifact.supports(*f)).collect();
        if chosen.is_empty() {
            chosen.push(if matches!(artifact, Artifact::Summary { .. }) { Format::Json } else { Format::Csv });
        }
        for f in chosen {
            emit(artifact, f, &self.dir)?;
        }
        Ok(())
    }

    fn stage(&mut self, name: &str, f: impl FnOnce() -> Result<Vec<Artifact>>) -> bool {
        let result = f().and_then(|arts| arts.iter().try_for_each(|a| self.write(a)));
        let ok = result.is_ok();
        self.stages.push(StageRecord { name: name.into(), ok, error: result.err().map(|e| e.to_string()) });
        ok
    }
}

fn formats(choice: FormatChoice) -> Vec<Format> {
    match choice {
        FormatChoice::Csv => vec![Format::Csv, Format::Dat],
        FormatChoice::Json => vec![Format::Json],
        FormatChoice::Both => vec![Format::Csv, Format::Json, Format::Dat],
    }
}

/// Runs the pipeline of `cfg.kind`, writes its artifacts and `manifest.json`
/// into `cfg.output.dir` and returns the manifest. Failing stages are
/// recorded in the manifest rather than aborting the run.
pub fn run(cfg: &ExperimentConfig) -> Result<RunManifest> {
    cfg.validate()?;
    let started = now();
    let dir = cfg.output.dir.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::Input(format!("output directory {}: {e}", dir.display())))?;
    let mut w = Writer { dir: dir.clone(), formats: formats(cfg.output.format), stages: Vec::new() };
    let ctx = Context::new(cfg);
    match cfg.kind {
        ExperimentKind::Simulate => run_simulate(&ctx, &mut w),
        ExperimentKind::Phi => run_phi(&ctx, &mut w),
        ExperimentKind::Irregularity => run_irregularity(&ctx, &mut w),
        ExperimentKind::Average => run_average(&ctx, &mut w),
        ExperimentKind::Ode => run_ode(&ctx, &mut w),
        ExperimentKind::Geometry => run_geometry(&ctx, &mut w),
        ExperimentKind::Prevalence => run_prevalence(&ctx, &mut w),
        ExperimentKind::Moments => run_moments(&ctx, &mut w),
    }
    let manifest = RunManifest {
        config_hash: cfg.hash(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        kind: cfg.kind,
        seed: cfg.mc.seed,
        started,
        finished: now(),
        stages: w.stages,
        files: checksum_dir(&dir)?,
    };
    let text = emit::json_string(&serde_json::to_value(&manifest).map_err(|e| Error::Format(e.to_string()))?);
    fs::write(dir.join(MANIFEST_NAME), text)?;
    Ok(manifest)
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    seed: Seed,
}

impl<'a> Context<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Self {
        Context { cfg, seed: Seed::new(cfg.mc.seed) }
    }

    fn dim(&self) -> usize {
        self.cfg.model.dim()
    }

    fn sample_count(&self) -> usize {
        if self.cfg.input.path.is_some() {
            1
        } else {
            self.cfg.mc.samples
        }
    }

    fn sampler(&self) -> Result<Option<Sampler>> {
        match self.cfg.model.process() {
            Some(p) if self.cfg.input.path.is_none() => Ok(Some(p.sampler(self.cfg.grid.n, self.cfg.grid.horizon)?)),
            _ => Ok(None),
        }
    }

    /// Input file, the zero path, or draw `i` of the model.
    fn path(&self, sampler: &Option<Sampler>, i: usize) -> Result<SampledPath> {
        if let Some(p) = &self.cfg.input.path {
            return read_path(p);
        }
        match sampler {
            Some(s) => s.sample(self.seed.with_path(i as u64)),
            None => SampledPath::constant(&vec![0.0; self.dim()], self.cfg.grid.horizon, self.cfg.grid.n),
        }
    }

    fn freqs(&self, dim: usize) -> Result<FrequencySet> {
        let g = &self.cfg.grid;
        Ok(FrequencySet::new(dim, g.q_min, g.j_max)?.with_random_directions(g.extra_directions, self.seed))
    }

    fn q_range(&self) -> (f64, f64) {
        let [a, b] = self.cfg.estimator.q_range;
        (a, b)
    }
}

fn path_rows(p: &SampledPath) -> Vec<Vec<Value>> {
    (0..=p.n()).map(|k| std::iter::once(json!(p.time(k))).chain(p.node(k).iter().map(|v| json!(v))).collect()).collect()
}

fn path_header(prefix: &str, dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("{prefix}{i}")).collect()
}

fn table_owned(name: String, header: Vec<String>, rows: Vec<Vec<Value>>) -> Artifact {
    Artifact::Table { name, header, rows }
}

fn run_simulate(ctx: &Context, w: &mut Writer) {
    w.stage("simulate", || {
        let sampler = ctx.sampler()?;
        let warnings = match &sampler {
            Some(Sampler::Gaussian(g)) => g.warnings().to_vec(),
            _ => Vec::new(),
        };
        let mut arts = Vec::new();
        let mut holder = Vec::new();
        for i in 0..ctx.sample_count() {
            let p = ctx.path(&sampler, i)?;
            holder.push(p.holder_exponent_estimate());
            let mut header = vec!["t".to_string()];
            header.extend(path_header("x", p.dim()));
            arts.push(table_owned(format!("path_{i:04}"), header, path_rows(&p)));
        }
        arts.push(Artifact::summary(
            "simulate_summary",
            &json!({
                "model": ctx.cfg.model,
                "n": ctx.cfg.grid.n,
                "horizon": ctx.cfg.grid.horizon,
                "samples": ctx.sample_count(),
                "holder_exponents": holder,
                "warnings": warnings,
            }),
        )?);
        Ok(arts)
    });
}

fn run_phi(ctx: &Context, w: &mut Writer) {
    w.stage("phi_table", || {
        let path = ctx.path(&ctx.sampler()?, 0)?;
        let freqs = ctx.freqs(path.dim())?;
        let table = phi_table(&path, &freqs, IntervalFamily::new(ctx.cfg.grid.levels))?;
        let mut rows = Vec::new();
        table.for_each_entry(|level, k, mag, dir, _, v| {
            let (s, t) = table.interval_nodes(level, k);
            let mut row = vec![json!(level), json!(k), json!(path.time(s)), json!(path.time(t))];
            row.push(json!(freqs.magnitudes[mag]));
            row.push(json!(dir));
            row.extend(freqs.vector(mag, dir).into_iter().map(|x| json!(x)));
            row.extend([json!(v.re), json!(v.im), json!(v.norm())]);
            rows.push(row);
        });
        let mut header: Vec<String> =
            ["level", "k", "s", "t", "q", "direction"].iter().map(|s| s.to_string()).collect();
        header.extend(path_header("xi", path.dim()));
        header.extend(["re", "im", "abs"].iter().map(|s| s.to_string()));
        let summary = json!({
            "n": path.n(),
            "horizon": path.horizon(),
            "levels": table.levels(),
            "magnitudes": freqs.magnitudes,
            "directions": freqs.directions,
            "entries": rows.len(),
        });
        Ok(vec![table_owned("phi_table".into(), header, rows), Artifact::summary("phi_summary", &summary)?])
    });
}

fn run_irregularity(ctx: &Context, w: &mut Writer) {
    let est = &ctx.cfg.estimator;
    let mut best = Vec::new();
    let mut per_gamma: Vec<Vec<f64>> = vec![Vec::new(); est.gammas.len()];
    let sampler = match ctx.sampler() {
        Ok(s) => s,
        Err(e) => {
            w.stages.push(StageRecord { name: "sampler".into(), ok: false, error: Some(e.to_string()) });
            return;
        }
    };
    for i in 0..ctx.sample_count() {
        w.stage(&format!("irregularity_{i:04}"), || {
            let path = ctx.path(&sampler, i)?;
            let table = phi_table(&path, &ctx.freqs(path.dim())?, IntervalFamily::new(ctx.cfg.grid.levels))?;
            let report = irregularity_report(&table, &est.gammas, ctx.q_range())?;
            let fit = report.best_fit();
            let decay = fit_exponential(&fit.envelope, ctx.q_range())?;
            let checks = est
                .thetas
                .iter()
                .map(|&th| interpolation_check(&table, fit.envelope.gamma, fit.fit.rho, th))
                .collect::<Result<Vec<_>>>()?;
            best.push((fit.envelope.gamma, fit.fit.rho, fit.fit.r2));
            for (j, g) in report.fits.iter().enumerate() {
                per_gamma[j].push(g.fit.rho);
            }
            let rows = report.shell_rows().into_iter().map(|(g, q, e)| vec![json!(g), json!(q), json!(e)]).collect();
            Ok(vec![
                Artifact::table(format!("shells_{i:04}"), &["gamma", "q", "envelope"], rows),
                Artifact::summary(
                    format!("irregularity_{i:04}"),
                    &json!({ "report": report, "decay": decay, "interpolation": checks }),
                )?,
            ])
        });
    }
    w.stage("irregularity_summary", || {
        let rho: Vec<f64> = best.iter().map(|b| b.1).collect();
        let curve =
            est.gammas.iter().zip(&per_gamma).filter(|(_, v)| !v.is_empty()).map(|(g, v)| (*g, median(v))).collect();
        Ok(vec![
            Artifact::curve("rho_vs_gamma", "gamma", "median_rho", curve),
            Artifact::summary(
                "irregularity_summary",
                &json!({
                    "samples": best.len(),
                    "best_gamma": best.iter().map(|b| b.0).collect::<Vec<_>>(),
                    "best_rho": rho,
                    "best_r2": best.iter().map(|b| b.2).collect::<Vec<_>>(),
                    "median_rho": if rho.is_empty() { None } else { Some(median(&rho)) },
                    "q_range": est.q_range,
                }),
            )?,
        ])
    });
}

fn drift_from_spec(ctx: &Context, dim: usize) -> Result<SpectralField> {
    let terms = &ctx.cfg.average.terms;
    if terms.is_empty() {
        let mut xi = vec![0.0; dim];
        xi[0] = 4.0;
        return SpectralField::real_from_half(dim, vec![SpectralTerm { xi, c: Complex64::new(0.5, 0.0) }]);
    }
    let half = terms.iter().map(|t| SpectralTerm { xi: t.xi.clone(), c: Complex64::new(t.re, t.im) }).collect();
    SpectralField::real_from_half(dim, half)
}

fn run_average(ctx: &Context, w: &mut Writer) {
    let spec = &ctx.cfg.average;
    let prepared = ctx.sampler().and_then(|s| {
        let path = ctx.path(&s, 0)?;
        let b = drift_from_spec(ctx, path.dim())?;
        let (s, t) = (spec.s.unwrap_or(0), spec.t.unwrap_or(path.n()));
        Ok((path, b, s, t))
    });
    let (path, b, s, t) = match prepared {
        Ok(p) => p,
        Err(e) => {
            w.stages.push(StageRecord { name: "prepare".into(), ok: false, error: Some(e.to_string()) });
            return;
        }
    };
    let spectral = average_spectral(&path, None, &b, s, t);
    let spectral_field = spectral.as_ref().ok().and_then(|a| a.spectral().cloned());
    if matches!(spec.route, Route::Spectral | Route::Both) {
        w.stage("spectral", || {
            let avg = spectral.as_ref().map_err(|e| Error::Input(e.to_string()))?;
            let out = avg.spectral().expect("spectral route");
            let rows = b
                .terms
                .iter()
                .zip(&out.terms)
                .map(|(u, v)| {
                    let mut row: Vec<Value> = u.xi.iter().map(|x| json!(x)).collect();
                    row.extend([json!(u.c.re), json!(u.c.im), json!(v.c.re), json!(v.c.im)]);
                    row
                })
                .collect();
            let mut header = path_header("xi", path.dim());
            header.extend(["b_re", "b_im", "re", "im"].iter().map(|s| s.to_string()));
            Ok(vec![
                table_owned("averaged_coefficients".into(), header, rows),
                Artifact::summary("average_spectral", avg)?,
            ])
        });
    }
    if matches!(spec.route, Route::Grid | Route::Both) {
        w.stage("grid", || {
            let (density, field) = grid_inputs(&path, s, t, &b, spec.grid_m)?;
            let out = average_grid(&density, &field)?;
            let tolerance = grid_tolerance(&b, density.h, path.time(t) - path.time(s));
            let mut max_error: Option<f64> = None;
            let rows = (0..out.values.len())
                .map(|idx| {
                    let x = out.point(idx);
                    let exact = spectral_field.as_ref().map(|f| f.eval_real(&x));
                    if let Some(e) = exact {
                        max_error = Some(max_error.unwrap_or(0.0).max((e - out.values[idx]).abs()));
                    }
                    let mut row: Vec<Value> = x.iter().map(|v| json!(v)).collect();
                    row.push(json!(out.values[idx]));
                    row.push(exact.map_or(Value::Null, |e| json!(e)));
                    row
                })
                .collect();
            let mut header = path_header("x", path.dim());
            header.extend(["grid", "spectral"].iter().map(|s| s.to_string()));
            Ok(vec![
                table_owned("averaged_grid".into(), header, rows),
                Artifact::summary(
                    "average_grid",
                    &json!({
                        "h": density.h,
                        "lo": out.lo,
                        "m": out.m,
                        "mass": density.mass(),
                        "tolerance": tolerance,
                        "max_error": max_error,
                    }),
                )?,
            ])
        });
    }
}

fn run_ode(ctx: &Context, w: &mut Writer) {
    let spec = &ctx.cfg.ode;
    w.stage("ode", || {
        let path = ctx.path(&ctx.sampler()?, 0)?;
        let d = path.dim();
        let drift = (0..d)
            .map(|i| {
                SpectralField::power_law_modes(d, spec.half_modes, spec.alpha, ctx.seed.with_path((1 << 40) + i as u64))
            })
            .collect::<Result<Vec<_>>>()?;
        let x0 = if spec.x0.is_empty() { vec![0.0; d] } else { spec.x0.clone() };
        let level = spec.level.unwrap_or((path.n().trailing_zeros() as usize).min(20));
        let problem = OdeProblem { drift, path, x0, level };
        let sol = solve_ode(&problem)?;
        let flow = flow_diagnostic(&problem, &spec.epsilons)?;
        let mut header = vec!["t".to_string()];
        header.extend(path_header("x", d));
        Ok(vec![
            table_owned("trajectory".into(), header, path_rows(&sol.x)),
            Artifact::curve(
                "flow",
                "epsilon",
                "sup_ratio",
                flow.runs.iter().map(|r| (r.epsilon, r.sup_ratio)).collect(),
            ),
            Artifact::summary(
                "ode_summary",
                &json!({
                    "flow": flow,
                    "blowup": sol.blowup,
                    "lipschitz_rate": sol.lipschitz_rate,
                    "level": level,
                    "drift": problem.drift,
                }),
            )?,
        ])
    });
}

fn run_geometry(ctx: &Context, w: &mut Writer) {
    let g = &ctx.cfg.geometry;
    let sampler = match ctx.sampler() {
        Ok(s) => s,
        Err(e) => {
            w.stages.push(StageRecord { name: "sampler".into(), ok: false, error: Some(e.to_string()) });
            return;
        }
    };
    let mut fractions: Vec<Vec<f64>> = vec![Vec::new(); g.eps.len()];
    let mut summaries = Vec::new();
    for i in 0..ctx.sample_count() {
        w.stage(&format!("geometry_{i:04}"), || {
            let path = ctx.path(&sampler, i)?;
            let n = path.n();
            let mut density_rows = Vec::new();
            for c in 0..g.centers {
                let center = (c + 1) * n / (g.centers + 1);
                let curve = holder_density(&path, center, g.delta, g.holder_constant, &g.eps)?;
                for (e, f) in &curve.points {
                    density_rows.push(vec![json!(curve.center), json!(e), json!(f)]);
                    if let Some(j) = g.eps.iter().position(|x| x == e) {
                        fractions[j].push(*f);
                    }
                }
            }
            let modulus = roughness_modulus(&path, g.theta, &g.eps, &default_directions(path.dim())?)?;
            let mut pvar_rows = Vec::new();
            for &p in &g.p {
                for shift in (0..4).rev() {
                    let v = p_variation(&path, p, (g.max_nodes >> shift).max(1))?;
                    pvar_rows.push(vec![json!(p), json!(v.value), json!(v.stride), json!(v.segments)]);
                }
            }
            let fourier = fourier_dimension(&path, 0, n, &ctx.freqs(path.dim())?, ctx.q_range(), g.energy_bins)?;
            let boxes = box_dimension(&path, 0, n, g.box_levels)?;
            let window = occupation_window(&path, &g.radii)?;
            summaries.push(json!({ "fourier": fourier, "box": boxes }));
            let mod_rows = modulus.eps.iter().zip(&modulus.values).map(|(e, v)| (*e, *v)).collect();
            let win_rows = window.r.iter().zip(&window.w).map(|(r, v)| (*r, *v)).collect();
            Ok(vec![
                Artifact::table(format!("density_{i:04}"), &["center", "epsilon", "fraction"], density_rows),
                Artifact::curve(format!("modulus_{i:04}"), "epsilon", "modulus", mod_rows),
                Artifact::table(format!("pvariation_{i:04}"), &["p", "value", "stride", "segments"], pvar_rows),
                Artifact::curve(format!("window_{i:04}"), "r", "occupation", win_rows),
                Artifact::summary(
                    format!("geometry_{i:04}"),
                    &json!({ "fourier": fourier, "box": boxes, "modulus": modulus, "window": window }),
                )?,
            ])
        });
    }
    w.stage("geometry_summary", || {
        let curve = g.eps.iter().zip(&fractions).filter(|(_, v)| !v.is_empty()).map(|(e, v)| (*e, median(v))).collect();
        Ok(vec![
            Artifact::curve("density_median", "epsilon", "fraction", curve),
            Artifact::summary("geometry_summary", &json!({ "samples": summaries.len(), "dimensions": summaries }))?,
        ])
    });
}

fn run_prevalence(ctx: &Context, w: &mut Writer) {
    let spec = &ctx.cfg.prevalence;
    let mut reports = Vec::new();
    for shift in &spec.shifts {
        let label = shift.label();
        w.stage(&format!("prevalence_{label}"), || {
            let noise = match ctx.cfg.model.process() {
                Some(ProcessModel::Gaussian(m)) => m,
                _ => return Err(Error::Unsupported("prevalence noise must be a Gaussian model".into())),
            };
            let g = &ctx.cfg.grid;
            let base = shift.path(noise.dim, g.horizon, g.n)?;
            let est = PrevalenceEstimator {
                freqs: ctx.freqs(noise.dim)?,
                levels: g.levels,
                gammas: ctx.cfg.estimator.gammas.clone(),
                q_range: ctx.q_range(),
                margin: spec.margin,
            };
            let report = prevalence_harness(shift, &base, &noise, ctx.cfg.mc.samples, &est, ctx.seed)?;
            let rows = report
                .samples
                .iter()
                .map(|s| {
                    vec![
                        json!(s.index),
                        json!(s.rho_hat),
                        json!(s.gamma),
                        json!(s.r2),
                        json!(s.passed),
                        json!(s.inconclusive),
                    ]
                })
                .collect();
            let art = Artifact::table(
                format!("prevalence_{label}"),
                &["sample", "rho_hat", "gamma", "r2", "passed", "inconclusive"],
                rows,
            );
            reports.push(json!({
                "shift": report.shift,
                "target": report.target,
                "threshold": report.threshold,
                "passes": report.passes,
                "inconclusive": report.inconclusive,
                "pass_rate": report.pass_rate,
            }));
            Ok(vec![art])
        });
    }
    w.stage("prevalence_summary", || {
        Ok(vec![Artifact::summary("prevalence_summary", &json!({ "margin": spec.margin, "shifts": reports }))?])
    });
}

fn run_moments(ctx: &Context, w: &mut Writer) {
    w.stage("moments", || {
        let model = ctx.cfg.model.process().ok_or_else(|| Error::Unsupported("moments need a random model".into()))?;
        if ctx.cfg.input.path.is_some() {
            return input("moments are computed from model draws, not an input path");
        }
        let g = &ctx.cfg.grid;
        let (lo, hi) = ctx.q_range();
        let mc = MomentConfig {
            samples: ctx.cfg.mc.samples,
            order: ctx.cfg.moments.order,
            n: g.n,
            horizon: g.horizon,
            s: ctx.cfg.moments.s.unwrap_or(0.0),
            t: ctx.cfg.moments.t.unwrap_or(g.horizon),
            freqs: ctx.freqs(model.dim())?.restricted(lo, hi),
            seed: ctx.seed,
        };
        let diag = moment_decay(&model, &mc)?;
        let shells = diag.shells.iter().map(|s| vec![json!(s.q), json!(s.mean), json!(s.stderr)]).collect();
        let curve = diag.shells.iter().map(|s| (s.q, s.mean)).collect();
        Ok(vec![
            Artifact::table("moment_shells", &["q", "mean", "stderr"], shells),
            Artifact::curve("moment_decay", "q", "mean", curve),
            Artifact::summary("moments_summary", &diag)?,
        ])
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(kind: ExperimentKind, dir: &Path) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(kind);
        cfg.grid.n = 256;
        cfg.grid.levels = 4;
        cfg.mc.seed = 7;
        cfg.output.dir = dir.to_path_buf();
        cfg
    }

    #[test]
    fn simulate_is_reproducible() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ma = run(&config(ExperimentKind::Simulate, a.path())).unwrap();
        let mb = run(&config(ExperimentKind::Simulate, b.path())).unwrap();
        assert!(ma.succeeded());
        assert_eq!(ma.files, mb.files);
        assert_eq!(ma.config_hash, mb.config_hash);
        assert!(ma.files.iter().any(|f| f.name == "path_0000.csv"));
    }

    #[test]
    fn failing_stage_is_recorded() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = config(ExperimentKind::Moments, dir.path());
        cfg.mc.samples = 3;
        let m = run(&cfg).unwrap();
        assert!(!m.succeeded());
        assert!(m.stages[0].error.as_deref().unwrap().contains("200"));
    }
}
