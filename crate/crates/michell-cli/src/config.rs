//! Sectioned `key = value` run configuration.
//!
//! The format is deliberately plain — comments with `#`, `[section]`
//! headers, one `key = value` per line — so configs stay diffable and any
//! language can generate them. Example:
//!
//! ```text
//! [run]
//! experiment = recovery     # which experiment to run
//! seed = 7
//! out = runs/bar
//!
//! [grid]
//! nx = 256
//! ny = 256
//! x0 = 0.0
//! x1 = 1.0
//! y0 = -1.25
//! y1 = 1.25
//!
//! [lambdas]
//! values = 1e2, 1e3, 1e4
//!
//! [truss]
//! file = instances/single_bar.txt
//! weights = 1.0
//! ```
//!
//! Sections and keys:
//!
//! * `[run]` — `experiment` (required: `check-integrands`, `truss-lp`,
//!   `solve-limit`, `solve-lambda`, `recovery`, `gamma-sweep`), `seed`
//!   (default 7), `out` (default `out`), `threads` (default 1).
//! * `[grid]` — `nx`, `ny` (default 64), `x0`, `x1`, `y0`, `y1` (default
//!   unit square).
//! * `[lambdas]` — `values`, a comma list, ascending and positive
//!   (default `1e2, 1e3, 1e4`).
//! * `[truss]` — `file` (instance path, resolved relative to the config
//!   file), `weights` (comma list of bar strengths; omitted means the LP
//!   optimum).
//! * `[load]` — `eps` (mollification width; default `4·max spacing`) and
//!   the repeatable source keys `traction = <side> <fx> <fy>` (side one of
//!   `left`, `right`, `bottom`, `top`), `point = <x> <y> <fx> <fy>`,
//!   `patch = <x0> <x1> <y0> <y1> <fx> <fy>`.
//! * `[solver]` — `max_iter`, `tol_residual`, `tol_objective`,
//!   `check_every`, `rho`, `step_ratio`, `cg_tol`, `cg_max`; defaults are
//!   the library defaults.
//! * `[lab]` — `samples` (check-integrands draws per λ, default 200000),
//!   `instance` (`uniaxial` or `roof`, for gamma-sweep).
//!
//! Only `traction`, `point`, and `patch` may repeat; any other repeated
//! key is an error. All errors carry the config path and line number.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use michell_core::lab::GammaInstance;
use michell_core::load::{LoadSpec, Side};
use michell_core::solvers::SolveOptions;

/// Which operation a config drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    /// Pointwise integrand inequality sampler.
    CheckIntegrands,
    /// Ground-structure LP with certificate.
    TrussLp,
    /// Convex limit problem `min ∫h_limit(σ)`.
    SolveLimit,
    /// Warm-started finite-λ sweep.
    SolveLambda,
    /// Truss rasterization energy recovery.
    Recovery,
    /// Γ-convergence sweep on a named instance.
    GammaSweep,
}

impl Experiment {
    fn from_str(s: &str) -> Option<Self> {
        match s {
            "check-integrands" => Some(Self::CheckIntegrands),
            "truss-lp" => Some(Self::TrussLp),
            "solve-limit" => Some(Self::SolveLimit),
            "solve-lambda" => Some(Self::SolveLambda),
            "recovery" => Some(Self::Recovery),
            "gamma-sweep" => Some(Self::GammaSweep),
            _ => None,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::CheckIntegrands => "check-integrands",
            Self::TrussLp => "truss-lp",
            Self::SolveLimit => "solve-limit",
            Self::SolveLambda => "solve-lambda",
            Self::Recovery => "recovery",
            Self::GammaSweep => "gamma-sweep",
        })
    }
}

/// Fully resolved run configuration: every default filled in.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Operation to run.
    pub experiment: Experiment,
    /// RNG seed, echoed into every CSV.
    pub seed: u64,
    /// Output directory.
    pub out: PathBuf,
    /// Worker threads for parallel sections.
    pub threads: usize,
    /// Grid cells per axis.
    pub nx: usize,
    /// Grid cells per axis.
    pub ny: usize,
    /// Domain x-range.
    pub xr: [f64; 2],
    /// Domain y-range.
    pub yr: [f64; 2],
    /// Ascending positive λ list.
    pub lambdas: Vec<f64>,
    /// Sampler draws per λ.
    pub samples: usize,
    /// Truss instance path, resolved relative to the config file.
    pub truss_file: Option<PathBuf>,
    /// Explicit bar strengths; `None` means the LP optimum.
    pub weights: Option<Vec<f64>>,
    /// Analytic load description.
    pub load: LoadSpec,
    /// Mollification width; `None` means `4·max spacing`.
    pub load_eps: Option<f64>,
    /// Named Γ-sweep instance.
    pub instance: Option<GammaInstance>,
    /// Solver options (seed already overridden by `seed`).
    pub solver: SolveOptions,
}

impl RunConfig {
    /// Render the resolved configuration (defaults filled) for echoing
    /// into the run manifest.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        s.push_str("[run]\n");
        s.push_str(&format!("experiment = {}\n", self.experiment));
        s.push_str(&format!("seed = {}\n", self.seed));
        s.push_str(&format!("out = {}\n", self.out.display()));
        s.push_str(&format!("threads = {}\n", self.threads));
        s.push_str("[grid]\n");
        s.push_str(&format!("nx = {}\nny = {}\n", self.nx, self.ny));
        s.push_str(&format!(
            "x0 = {}\nx1 = {}\ny0 = {}\ny1 = {}\n",
            self.xr[0], self.xr[1], self.yr[0], self.yr[1]
        ));
        s.push_str("[lambdas]\n");
        let vals: Vec<String> = self.lambdas.iter().map(|l| format!("{l}")).collect();
        s.push_str(&format!("values = {}\n", vals.join(",")));
        s.push_str("[lab]\n");
        s.push_str(&format!("samples = {}\n", self.samples));
        if let Some(inst) = self.instance {
            s.push_str(&format!("instance = {}\n", inst.label()));
        }
        if self.truss_file.is_some() || self.weights.is_some() {
            s.push_str("[truss]\n");
            if let Some(f) = &self.truss_file {
                s.push_str(&format!("file = {}\n", f.display()));
            }
            match &self.weights {
                Some(w) => {
                    let w: Vec<String> = w.iter().map(|v| format!("{v}")).collect();
                    s.push_str(&format!("weights = {}\n", w.join(",")));
                }
                None => s.push_str("weights = (lp optimum)\n"),
            }
        }
        s.push_str("[load]\n");
        match self.load_eps {
            Some(e) => s.push_str(&format!("eps = {e}\n")),
            None => s.push_str("eps = (4 * max spacing)\n"),
        }
        for (side, f) in &self.load.tractions {
            s.push_str(&format!("traction = {} {} {}\n", side_name(*side), f[0], f[1]));
        }
        for (p, f) in &self.load.points {
            s.push_str(&format!("point = {} {} {} {}\n", p[0], p[1], f[0], f[1]));
        }
        for (b, f) in &self.load.patches {
            s.push_str(&format!(
                "patch = {} {} {} {} {} {}\n",
                b[0], b[1], b[2], b[3], f[0], f[1]
            ));
        }
        let o = &self.solver;
        s.push_str("[solver]\n");
        s.push_str(&format!("max_iter = {}\n", o.max_iter));
        s.push_str(&format!("tol_residual = {}\n", o.tol_residual));
        s.push_str(&format!("tol_objective = {}\n", o.tol_objective));
        s.push_str(&format!("check_every = {}\n", o.check_every));
        s.push_str(&format!("rho = {}\n", o.rho));
        s.push_str(&format!("step_ratio = {}\n", o.step_ratio));
        s.push_str(&format!("cg_tol = {}\n", o.cg_tol));
        s.push_str(&format!("cg_max = {}\n", o.cg_max));
        s
    }
}

fn side_name(s: Side) -> &'static str {
    match s {
        Side::Left => "left",
        Side::Right => "right",
        Side::Bottom => "bottom",
        Side::Top => "top",
    }
}

/// One parsed `key = value` line.
struct Entry {
    key: String,
    value: String,
    line: usize,
    used: bool,
}

/// A `[section]` with its entries.
struct Section {
    name: String,
    entries: Vec<Entry>,
}

const SECTIONS: [&str; 7] = ["run", "grid", "lambdas", "truss", "load", "solver", "lab"];
const REPEATABLE: [&str; 3] = ["traction", "point", "patch"];

fn parse_sections(text: &str, path: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim().to_string();
            if !SECTIONS.contains(&name.as_str()) {
                bail!("{path}:{line_no}: unknown section [{name}]");
            }
            sections.push(Section { name, entries: Vec::new() });
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{path}:{line_no}: expected `key = value`, got `{line}`");
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let Some(sec) = sections.last_mut() else {
            bail!("{path}:{line_no}: key `{key}` appears before any [section]");
        };
        if !REPEATABLE.contains(&key.as_str())
            && sec.entries.iter().any(|e| e.key == key)
        {
            bail!("{path}:{line_no}: duplicate key `{key}` in [{}]", sec.name);
        }
        sec.entries.push(Entry { key, value, line: line_no, used: false });
    }
    Ok(sections)
}

/// Typed accessors over the parsed sections, tracking which keys were
/// consumed so leftovers can be reported with their line numbers.
struct Reader<'a> {
    path: &'a str,
    sections: Vec<Section>,
}

impl Reader<'_> {
    fn take(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        for sec in self.sections.iter_mut().filter(|s| s.name == section) {
            for e in sec.entries.iter_mut() {
                if e.key == key && !e.used {
                    e.used = true;
                    return Some((e.value.clone(), e.line));
                }
            }
        }
        None
    }

    fn take_all(&mut self, section: &str, key: &str) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        while let Some(v) = self.take(section, key) {
            out.push(v);
        }
        out
    }

    fn parse<T: std::str::FromStr>(&mut self, section: &str, key: &str, default: T) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        match self.take(section, key) {
            None => Ok(default),
            Some((v, line)) => v.parse::<T>().map_err(|e| {
                anyhow!("{}:{line}: bad value for `{key}` in [{section}]: {e}", self.path)
            }),
        }
    }

    fn unused_key_error(&self) -> Result<()> {
        for sec in &self.sections {
            for e in &sec.entries {
                if !e.used {
                    bail!(
                        "{}:{}: unknown key `{}` in [{}]",
                        self.path,
                        e.line,
                        e.key,
                        sec.name
                    );
                }
            }
        }
        Ok(())
    }
}

fn parse_floats(path: &str, line: usize, key: &str, v: &str, n: usize) -> Result<Vec<f64>> {
    let toks: Vec<&str> = v.split_whitespace().collect();
    if toks.len() != n {
        bail!("{path}:{line}: `{key}` needs {n} numbers, got {}", toks.len());
    }
    toks.iter()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| anyhow!("{path}:{line}: bad number `{t}` in `{key}`: {e}"))
        })
        .collect()
}

fn parse_lambda_list(path: &str, line: usize, v: &str) -> Result<Vec<f64>> {
    let vals: Vec<f64> = v
        .split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .map_err(|e| anyhow!("{path}:{line}: bad lambda `{t}`: {e}"))
        })
        .collect::<Result<_>>()?;
    if vals.is_empty() {
        bail!("{path}:{line}: empty lambda list");
    }
    if vals.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        bail!("{path}:{line}: lambda values must be positive and finite");
    }
    if vals.windows(2).any(|w| !(w[0] < w[1])) {
        bail!("{path}:{line}: lambda list not ascending");
    }
    Ok(vals)
}

/// Parse and fully validate a run configuration file.
///
/// Referenced files are checked for existence (resolved relative to the
/// config's directory), defaults are filled in, and every validation error
/// carries the path and line number.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let pstr = path.display().to_string();
    let sections = parse_sections(&text, &pstr)?;
    let mut r = Reader { path: &pstr, sections };

    let experiment = match r.take("run", "experiment") {
        None => bail!("{pstr}: missing required key `experiment` in [run]"),
        Some((v, line)) => Experiment::from_str(&v).ok_or_else(|| {
            anyhow!(
                "{pstr}:{line}: unknown experiment `{v}` (expected one of \
                 check-integrands, truss-lp, solve-limit, solve-lambda, recovery, gamma-sweep)"
            )
        })?,
    };
    let seed: u64 = r.parse("run", "seed", 7)?;
    let out = PathBuf::from(r.take("run", "out").map_or_else(|| "out".into(), |(v, _)| v));
    let threads: usize = r.parse("run", "threads", 1)?;
    if threads == 0 {
        bail!("{pstr}: threads must be at least 1");
    }

    let nx: usize = r.parse("grid", "nx", 64)?;
    let ny: usize = r.parse("grid", "ny", 64)?;
    let xr = [r.parse("grid", "x0", 0.0)?, r.parse("grid", "x1", 1.0)?];
    let yr = [r.parse("grid", "y0", 0.0)?, r.parse("grid", "y1", 1.0)?];
    if nx < 2 || ny < 2 {
        bail!("{pstr}: grid needs at least 2 cells per axis");
    }
    if !(xr[1] > xr[0] && yr[1] > yr[0]) {
        bail!("{pstr}: degenerate grid box");
    }

    let lambdas = match r.take("lambdas", "values") {
        None => vec![1e2, 1e3, 1e4],
        Some((v, line)) => parse_lambda_list(&pstr, line, &v)?,
    };

    let samples: usize = r.parse("lab", "samples", 200_000)?;
    let instance = match r.take("lab", "instance") {
        None => None,
        Some((v, line)) => Some(match v.as_str() {
            "uniaxial" => GammaInstance::Uniaxial,
            "roof" => GammaInstance::Roof,
            _ => bail!("{pstr}:{line}: unknown instance `{v}` (expected uniaxial or roof)"),
        }),
    };

    let truss_file = match r.take("truss", "file") {
        None => None,
        Some((v, line)) => {
            let base = path.parent().unwrap_or_else(|| Path::new("."));
            let resolved = base.join(&v);
            if !resolved.is_file() {
                bail!("{pstr}:{line}: truss file `{}` does not exist", resolved.display());
            }
            Some(resolved)
        }
    };
    let weights = match r.take("truss", "weights") {
        None => None,
        Some((v, line)) => {
            let w: Vec<f64> = v
                .split(',')
                .map(|t| {
                    let t = t.trim();
                    t.parse::<f64>()
                        .map_err(|e| anyhow!("{pstr}:{line}: bad weight `{t}`: {e}"))
                })
                .collect::<Result<_>>()?;
            Some(w)
        }
    };

    let mut load = LoadSpec::default();
    for (v, line) in r.take_all("load", "traction") {
        let Some((side_tok, rest)) = v.trim().split_once(char::is_whitespace) else {
            bail!("{pstr}:{line}: `traction` needs `<side> <fx> <fy>`");
        };
        let side = match side_tok {
            "left" => Side::Left,
            "right" => Side::Right,
            "bottom" => Side::Bottom,
            "top" => Side::Top,
            _ => bail!("{pstr}:{line}: unknown side `{side_tok}`"),
        };
        let f = parse_floats(&pstr, line, "traction", rest, 2)?;
        load.tractions.push((side, [f[0], f[1]]));
    }
    for (v, line) in r.take_all("load", "point") {
        let f = parse_floats(&pstr, line, "point", &v, 4)?;
        load.points.push(([f[0], f[1]], [f[2], f[3]]));
    }
    for (v, line) in r.take_all("load", "patch") {
        let f = parse_floats(&pstr, line, "patch", &v, 6)?;
        load.patches.push(([f[0], f[1], f[2], f[3]], [f[4], f[5]]));
    }
    let load_eps = match r.take("load", "eps") {
        None => None,
        Some((v, line)) => {
            let e: f64 = v
                .parse()
                .map_err(|er| anyhow!("{pstr}:{line}: bad value for `eps`: {er}"))?;
            if !(e > 0.0) {
                bail!("{pstr}:{line}: eps must be positive");
            }
            Some(e)
        }
    };

    let d = SolveOptions::default();
    let solver = SolveOptions {
        max_iter: r.parse("solver", "max_iter", d.max_iter)?,
        tol_residual: r.parse("solver", "tol_residual", d.tol_residual)?,
        tol_objective: r.parse("solver", "tol_objective", d.tol_objective)?,
        check_every: r.parse("solver", "check_every", d.check_every)?,
        seed,
        rho: r.parse("solver", "rho", d.rho)?,
        step_ratio: r.parse("solver", "step_ratio", d.step_ratio)?,
        cg_tol: r.parse("solver", "cg_tol", d.cg_tol)?,
        cg_max: r.parse("solver", "cg_max", d.cg_max)?,
    };

    r.unused_key_error()?;

    // per-experiment requirements
    match experiment {
        Experiment::TrussLp | Experiment::Recovery => {
            if truss_file.is_none() {
                bail!("{pstr}: experiment {experiment} needs `file` in [truss]");
            }
        }
        Experiment::SolveLimit | Experiment::SolveLambda => {
            if load.tractions.is_empty() && load.points.is_empty() && load.patches.is_empty() {
                bail!("{pstr}: experiment {experiment} needs at least one [load] source");
            }
        }
        Experiment::GammaSweep => {
            if instance.is_none() {
                bail!("{pstr}: experiment gamma-sweep needs `instance` in [lab]");
            }
            if nx != ny {
                bail!("{pstr}: experiment gamma-sweep needs a square grid (nx = ny)");
            }
        }
        Experiment::CheckIntegrands => {}
    }

    Ok(RunConfig {
        experiment,
        seed,
        out,
        threads,
        nx,
        ny,
        xr,
        yr,
        lambdas,
        samples,
        truss_file,
        weights,
        load,
        load_eps,
        instance,
        solver,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_cfg(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        let mut f = std::fs::File::create(&p).unwrap();
        f.write_all(text.as_bytes()).unwrap();
        p
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_cfg(dir.path(), "a.cfg", "[run]\nexperiment = check-integrands\n");
        let cfg = parse_config(&p).unwrap();
        assert_eq!(cfg.experiment, Experiment::CheckIntegrands);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.out, PathBuf::from("out"));
        assert_eq!((cfg.nx, cfg.ny), (64, 64));
        assert_eq!(cfg.lambdas, vec![1e2, 1e3, 1e4]);
        assert_eq!(cfg.samples, 200_000);
        assert_eq!(cfg.solver.max_iter, SolveOptions::default().max_iter);
        assert_eq!(cfg.solver.seed, 7);
        let echo = cfg.echo();
        assert!(echo.contains("experiment = check-integrands"));
        assert!(echo.contains("samples = 200000"));
    }

    #[test]
    fn nonascending_lambdas_error_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_cfg(
            dir.path(),
            "a.cfg",
            "[run]\nexperiment = check-integrands\n[lambdas]\nvalues = 100,10\n",
        );
        let err = parse_config(&p).unwrap_err().to_string();
        assert!(err.contains("lambda list not ascending"), "{err}");
        assert!(err.contains(":4:"), "missing line number: {err}");
    }

    #[test]
    fn unknown_key_error_names_key_and_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_cfg(
            dir.path(),
            "a.cfg",
            "[run]\nexperiment = check-integrands\nbogus = 1\n",
        );
        let err = parse_config(&p).unwrap_err().to_string();
        assert!(err.contains("unknown key `bogus` in [run]"), "{err}");
        assert!(err.contains(":3:"), "missing line number: {err}");
    }

    #[test]
    fn duplicate_key_rejected_but_sources_repeat() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_cfg(
            dir.path(),
            "a.cfg",
            "[run]\nexperiment = solve-limit\nseed = 1\nseed = 2\n",
        );
        let err = parse_config(&p).unwrap_err().to_string();
        assert!(err.contains("duplicate key `seed`"), "{err}");

        let p = write_cfg(
            dir.path(),
            "b.cfg",
            "[run]\nexperiment = solve-limit\n[load]\n\
             traction = left -1 0\ntraction = right 1 0\n",
        );
        let cfg = parse_config(&p).unwrap();
        assert_eq!(cfg.load.tractions.len(), 2);
    }

    #[test]
    fn missing_truss_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_cfg(
            dir.path(),
            "a.cfg",
            "[run]\nexperiment = recovery\n[truss]\nfile = nope.txt\n",
        );
        let err = parse_config(&p).unwrap_err().to_string();
        assert!(err.contains("does not exist"), "{err}");
    }

    #[test]
    fn malformed_lines_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_cfg(dir.path(), "a.cfg", "[run]\nexperiment check-integrands\n");
        let err = parse_config(&p).unwrap_err().to_string();
        assert!(err.contains("expected `key = value`"), "{err}");

        let p = write_cfg(dir.path(), "b.cfg", "x = 1\n");
        let err = parse_config(&p).unwrap_err().to_string();
        assert!(err.contains("before any [section]"), "{err}");

        let p = write_cfg(dir.path(), "c.cfg", "[junk]\n");
        let err = parse_config(&p).unwrap_err().to_string();
        assert!(err.contains("unknown section [junk]"), "{err}");
    }

    #[test]
    fn gamma_sweep_requires_square_grid_and_instance() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_cfg(dir.path(), "a.cfg", "[run]\nexperiment = gamma-sweep\n");
        let err = parse_config(&p).unwrap_err().to_string();
        assert!(err.contains("needs `instance`"), "{err}");

        let p = write_cfg(
            dir.path(),
            "b.cfg",
            "[run]\nexperiment = gamma-sweep\n[lab]\ninstance = roof\n[grid]\nnx = 64\nny = 32\n",
        );
        let err = parse_config(&p).unwrap_err().to_string();
        assert!(err.contains("square grid"), "{err}");
    }
}
