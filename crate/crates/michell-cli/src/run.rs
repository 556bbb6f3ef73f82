//! Command implementations: each runs one experiment, writes `report.csv`,
//! the figures, and `run-manifest.txt` into the output directory, prints a
//! short summary, and returns whether every tolerance check passed.
//!
//! Wall-clock timings go into the manifest only — CSVs stay byte-identical
//! across reruns with the same config and seed.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use michell_core::field2::StressField2;
use michell_core::lab;
use michell_core::load::assemble_load;
use michell_core::solvers::{lambda_sweep2, solve_limit_field2, solve_truss_lp_certified};
use michell_core::svg::{heatmap, plot_loglog, truss_figure, Series};
use michell_core::truss::{parse_truss_file, TrussDesign};
use michell_core::{hm1, tol, ExperimentReport, Grid2};

use crate::config::RunConfig;

/// Collects output files and manifest lines for one run.
pub struct Outputs {
    dir: PathBuf,
    lines: Vec<String>,
    files: Vec<String>,
    t0: Instant,
}

impl Outputs {
    /// Create the output directory and start the manifest.
    pub fn new(dir: &Path, command: &str) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output dir {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            lines: vec![
                format!("michell {}", env!("CARGO_PKG_VERSION")),
                format!("command = {command}"),
            ],
            t0: Instant::now(),
            files: Vec::new(),
        })
    }

    /// Append a free-form manifest line.
    pub fn note(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    /// Write the report CSV.
    pub fn write_report(&mut self, report: &ExperimentReport) -> Result<()> {
        let path = self.dir.join("report.csv");
        report.write_csv(&path).with_context(|| format!("writing {}", path.display()))?;
        self.files.push("report.csv".into());
        Ok(())
    }

    /// Write a figure, or record why it was skipped (e.g. a log-log plot
    /// whose series are identically zero has nothing to draw).
    pub fn write_svg(&mut self, name: &str, rendered: michell_core::Result<String>) {
        match rendered {
            Ok(svg) => {
                let path = self.dir.join(name);
                match std::fs::write(&path, svg) {
                    Ok(()) => self.files.push(name.into()),
                    Err(e) => self.lines.push(format!("figure {name} failed: {e}")),
                }
            }
            Err(e) => self.lines.push(format!("figure {name} skipped: {e}")),
        }
    }

    /// Write `run-manifest.txt` (echoed config, timings, file list).
    pub fn finish(mut self) -> Result<()> {
        self.lines.push(format!("wall_seconds = {:.3}", self.t0.elapsed().as_secs_f64()));
        for f in &self.files {
            self.lines.push(format!("output = {f}"));
        }
        let path = self.dir.join("run-manifest.txt");
        std::fs::write(&path, self.lines.join("\n") + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

/// Per-cell Frobenius magnitude of a stress field, for heatmaps.
fn magnitude(s: &StressField2) -> Vec<f64> {
    let g = s.grid;
    let mut v = vec![0.0; g.nx * g.ny];
    for j in 0..g.ny {
        for i in 0..g.nx {
            v[g.c(i, j)] = s.at_center(i, j).frob();
        }
    }
    v
}

/// A single-series log-log figure from report rows.
fn loglog_from_rows(
    title: &str,
    label: &str,
    rows: &[Vec<f64>],
    xcol: usize,
    ycol: usize,
) -> michell_core::Result<String> {
    let series = Series {
        label: label.into(),
        points: rows.iter().map(|r| (r[xcol], r[ycol])).collect(),
    };
    plot_loglog(title, "lambda", label, &[series])
}

fn print_report(report: &ExperimentReport, out_dir: &Path) {
    println!("{}", report.summary());
    for c in report.checks.iter().filter(|c| !c.passed) {
        println!("  FAIL {} ({})", c.name, c.detail);
    }
    println!("wrote {}", out_dir.join("report.csv").display());
}

/// `check-integrands`: pointwise inequality sampler.
pub fn check_integrands(
    samples: usize,
    lambdas: &[f64],
    seed: u64,
    out_dir: &Path,
) -> Result<bool> {
    let mut out = Outputs::new(out_dir, "check-integrands")?;
    out.note(format!("samples = {samples}"));
    out.note(format!(
        "lambdas = {}",
        lambdas.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
    ));
    out.note(format!("seed = {seed}"));
    let t = Instant::now();
    let report = lab::run_inequality_sampler(samples, lambdas, seed)?;
    out.note(format!("sampler_seconds = {:.3}", t.elapsed().as_secs_f64()));
    out.write_report(&report)?;
    out.write_svg(
        "defect.svg",
        loglog_from_rows("max normalized chain defect", "defect", &report.rows, 0, 7),
    );
    print_report(&report, out_dir);
    let ok = report.passed();
    out.finish()?;
    Ok(ok)
}

/// `truss-lp`: certified ground-structure LP from an instance file.
pub fn truss_lp(instance: &Path, out_dir: &Path) -> Result<bool> {
    let (gs, loads) = parse_truss_file(instance)?;
    let mut out = Outputs::new(out_dir, "truss-lp")?;
    out.note(format!("instance = {}", instance.display()));
    let t = Instant::now();
    let sol = solve_truss_lp_certified(&gs, &loads)?;
    out.note(format!("lp_seconds = {:.3}", t.elapsed().as_secs_f64()));

    let mut report = ExperimentReport::new("truss_lp", &["bar", "w", "length", "mass"], 0);
    report.param("instance", instance.display());
    report.param("weight", format!("{:.12e}", sol.weight));
    report.param("iterations", sol.iterations);
    for (b, &w) in sol.design.w.iter().enumerate() {
        let len = gs.bar_length(b);
        report.push_row(vec![b as f64, w, len, w.abs() * len]);
    }
    report.check(
        "certificate gap within tolerance",
        sol.certificate_gap <= tol::LP_CERT_GAP,
        format!("{:.3e} vs {:.0e}", sol.certificate_gap, tol::LP_CERT_GAP),
    );
    report.check(
        "dual feasibility within tolerance",
        sol.dual_feasibility <= tol::LP_DUAL_FEAS,
        format!("{:.3e} vs {:.0e}", sol.dual_feasibility, tol::LP_DUAL_FEAS),
    );
    report.check(
        "equilibrium residual within tolerance",
        sol.residual <= tol::EQUILIBRIUM_RESIDUAL,
        format!("{:.3e} vs {:.0e}", sol.residual, tol::EQUILIBRIUM_RESIDUAL),
    );
    out.write_report(&report)?;

    let stem = instance.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into());
    out.write_svg("truss.svg", truss_figure(&stem, &gs, &sol.design));

    println!("weight {:.6}", sol.weight);
    print_report(&report, out_dir);
    let ok = report.passed();
    out.finish()?;
    Ok(ok)
}

fn grid_and_load(cfg: &RunConfig) -> Result<(Grid2, michell_core::field2::VectorField2, f64)> {
    let grid = Grid2::new(cfg.nx, cfg.ny, cfg.xr, cfg.yr)?;
    let eps = cfg.load_eps.unwrap_or(4.0 * grid.hmax());
    let g = assemble_load(&cfg.load, &grid, eps)?;
    Ok((grid, g, eps))
}

/// `solve-limit`: convex limit problem on a configured load.
pub fn solve_limit(cfg: &RunConfig) -> Result<bool> {
    let mut out = Outputs::new(&cfg.out, "solve-limit")?;
    out.note(cfg.echo());
    let (grid, g, eps) = grid_and_load(cfg)?;
    out.note(format!("resolved_eps = {eps}"));
    let t = Instant::now();
    let (sigma, rep) = solve_limit_field2(&grid, &g, &cfg.solver, None)?;
    out.note(format!("solve_seconds = {:.3}", t.elapsed().as_secs_f64()));

    let mut report = ExperimentReport::new("solve_limit", &["iter", "objective", "residual"], cfg.seed);
    report.param("objective", format!("{:.12e}", rep.objective));
    report.param("residual", format!("{:.12e}", rep.residual));
    report.param("iterations", rep.iterations);
    report.param("converged", rep.converged);
    report.param("hminus1", format!("{:.12e}", hm1::hminus1_norm2(&g)?));
    for cp in &rep.checkpoints {
        report.push_row(vec![cp.iter as f64, cp.objective, cp.residual]);
    }
    report.check(
        "constraint residual within tolerance",
        rep.residual <= cfg.solver.tol_residual.max(1e-4),
        format!("{:.3e} vs {:.1e}", rep.residual, cfg.solver.tol_residual.max(1e-4)),
    );
    report.check("solver converged", rep.converged, format!("{} iterations", rep.iterations));
    out.write_report(&report)?;
    out.write_svg("sigma.svg", heatmap("|sigma| (limit solve)", &magnitude(&sigma), grid.nx, grid.ny));

    println!("objective {:.9}", rep.objective);
    print_report(&report, &cfg.out);
    let ok = report.passed();
    out.finish()?;
    Ok(ok)
}

/// `solve-lambda`: warm-started ascending λ-sweep on a configured load.
pub fn solve_lambda(cfg: &RunConfig) -> Result<bool> {
    let mut out = Outputs::new(&cfg.out, "solve-lambda")?;
    out.note(cfg.echo());
    let (grid, g, eps) = grid_and_load(cfg)?;
    out.note(format!("resolved_eps = {eps}"));
    let t = Instant::now();
    let sweep = lambda_sweep2(&grid, &g, &cfg.lambdas, &cfg.solver)?;
    out.note(format!("sweep_seconds = {:.3}", t.elapsed().as_secs_f64()));
    out.write_report(&sweep.report)?;
    out.write_svg(
        "gap.svg",
        loglog_from_rows("energy gap vs lambda", "gap", &sweep.report.rows, 0, 2),
    );
    let last_field = sweep
        .per_lambda
        .iter()
        .rev()
        .find_map(|(_, r)| r.as_ref().map(|(s, _)| s))
        .unwrap_or(&sweep.limit.0);
    out.write_svg(
        "sigma.svg",
        heatmap("|sigma| (largest lambda)", &magnitude(last_field), grid.nx, grid.ny),
    );
    print_report(&sweep.report, &cfg.out);
    let ok = sweep.report.passed();
    out.finish()?;
    Ok(ok)
}

/// `recovery`: rasterize a weighted truss and verify the energy bounds.
pub fn recovery(cfg: &RunConfig) -> Result<bool> {
    let file = cfg.truss_file.as_ref().expect("validated by parse_config");
    let (gs, loads) = parse_truss_file(file)?;
    let mut out = Outputs::new(&cfg.out, "recovery")?;
    out.note(cfg.echo());
    let design = match &cfg.weights {
        Some(w) => {
            if w.len() != gs.bars.len() {
                bail!("config gives {} weights for {} bars", w.len(), gs.bars.len());
            }
            TrussDesign { w: w.clone() }
        }
        None => {
            let sol = solve_truss_lp_certified(&gs, &loads)?;
            out.note(format!("weights resolved from lp, weight = {:.12e}", sol.weight));
            sol.design
        }
    };
    let grid = Grid2::new(cfg.nx, cfg.ny, cfg.xr, cfg.yr)?;
    let t = Instant::now();
    let res = lab::run_recovery_experiment(&gs, &design, &grid, &cfg.lambdas)?;
    out.note(format!("recovery_seconds = {:.3}", t.elapsed().as_secs_f64()));
    out.write_report(&res.report)?;
    out.write_svg(
        "gap.svg",
        loglog_from_rows("|E - 2W| vs lambda", "gap", &res.report.rows, 0, 3),
    );
    if let Some((lam, _, mu)) = res.fields.last() {
        out.write_svg(
            "mu.svg",
            heatmap(&format!("|mu| at lambda = {lam:.0}"), &magnitude(mu), grid.nx, grid.ny),
        );
    }
    print_report(&res.report, &cfg.out);
    let ok = res.report.passed();
    out.finish()?;
    Ok(ok)
}

/// `gamma-sweep`: LP target, limit solve, and finite-λ sweep on a named
/// instance.
pub fn gamma_sweep(cfg: &RunConfig) -> Result<bool> {
    let instance = cfg.instance.expect("validated by parse_config");
    let mut out = Outputs::new(&cfg.out, "gamma-sweep")?;
    out.note(cfg.echo());
    let t = Instant::now();
    let res = lab::run_gamma_sweep(instance, cfg.nx, &cfg.lambdas, &cfg.solver)?;
    out.note(format!("sweep_seconds = {:.3}", t.elapsed().as_secs_f64()));
    out.write_report(&res.report)?;
    out.write_svg("truss.svg", truss_figure(instance.label(), &res.gs, &res.design));
    out.write_svg(
        "sigma.svg",
        heatmap(
            "|sigma| (limit solve)",
            &magnitude(&res.limit.0),
            res.grid.nx,
            res.grid.ny,
        ),
    );
    out.write_svg(
        "gap.svg",
        loglog_from_rows("envelope gap vs lambda", "gap", &res.report.rows, 0, 2),
    );
    println!(
        "lp weight {:.6}, limit objective {:.6}, target {:.6}",
        res.weight,
        res.limit.1.objective,
        res.target
    );
    print_report(&res.report, &cfg.out);
    let ok = res.report.passed();
    out.finish()?;
    Ok(ok)
}

/// Dispatch a parsed config to its experiment.
pub fn dispatch_config(cfg: &RunConfig) -> Result<bool> {
    match cfg.experiment {
        crate::config::Experiment::CheckIntegrands => {
            check_integrands(cfg.samples, &cfg.lambdas, cfg.seed, &cfg.out)
        }
        crate::config::Experiment::TrussLp => {
            let file = cfg.truss_file.as_ref().expect("validated by parse_config");
            truss_lp(file, &cfg.out)
        }
        crate::config::Experiment::SolveLimit => solve_limit(cfg),
        crate::config::Experiment::SolveLambda => solve_lambda(cfg),
        crate::config::Experiment::Recovery => recovery(cfg),
        crate::config::Experiment::GammaSweep => gamma_sweep(cfg),
    }
}
