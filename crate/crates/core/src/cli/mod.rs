//! Command-line harness: problem configuration, the experiment pipelines
//! behind the subcommands, and artifact emission (CSV, SVG, structured
//! region records, run summaries).
//!
//! Every command copies its effective configuration into the output
//! directory as `config.txt` (flat `key = value` lines, the same format the
//! `--config` file uses; command-line flags win over file values).

pub mod svg;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use thiserror::Error;

use crate::fem::{
    assemble_fem, assemble_helmholtz, assemble_load, assemble_poisson_dirichlet,
    assemble_shifted_laplace, FemError, HelmholtzParams, LoadSpec,
};
use crate::linalg::{
    fov_boundary, gmres, hermitian_extremes, hermitian_largest, norm_equivalence_constants,
    preconditioned_operator, smallest_singular_value, FovOpts, FovPolygon, LinalgError,
    ResolventOpts, ResolventQuery,
};
use crate::mesh::{lshape_at_level, mesh_size, MeshError};
use crate::pseudospectrum::{
    extract_isolines, initial_grid_aspect, isolines_to_csv, refine_adaptive, ComplexGrid, GridError,
    IsolineSet, LevelSpec, MatrixResolvent, PreconditionedResolvent, ResolventEvaluator, Window,
};
use crate::sparse::{complex_vector_csv_string, SparseComplexMatrix, SparseError};
use crate::theory::{
    exclusion_disc, helmholtz_exclusion, inclusion_fov_dilation, iterations_estimate,
    sl_exclusion, EstimateFormula, Region, RegionKind, StabilityConstants, TheoryError,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Sparse(#[from] SparseError),
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Process outcome: 0 success, 2 budget/convergence warning (errors are 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Success,
    Warning,
}

impl RunStatus {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunStatus::Success => 0,
            RunStatus::Warning => 2,
        }
    }

    fn merge(self, other: RunStatus) -> RunStatus {
        if self == RunStatus::Warning || other == RunStatus::Warning {
            RunStatus::Warning
        } else {
            RunStatus::Success
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Poisson,
    Helmholtz,
    ShiftedLaplace,
}

impl Problem {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "poisson" => Ok(Problem::Poisson),
            "helmholtz" => Ok(Problem::Helmholtz),
            "shifted-laplace" | "shifted_laplace" | "sl" => Ok(Problem::ShiftedLaplace),
            other => Err(CliError::Config(format!("unknown problem `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Problem::Poisson => "poisson",
            Problem::Helmholtz => "helmholtz",
            Problem::ShiftedLaplace => "shifted-laplace",
        }
    }
}

/// Loss-term rule: fixed value, 0.5 kappa, or 0.5 kappa^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaRule {
    Abs(f64),
    HalfKappa,
    HalfKappaSquared,
}

impl SigmaRule {
    pub fn sigma(&self, kappa: f64) -> f64 {
        match self {
            SigmaRule::Abs(v) => *v,
            SigmaRule::HalfKappa => 0.5 * kappa,
            SigmaRule::HalfKappaSquared => 0.5 * kappa * kappa,
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        let t = s.trim();
        if let Some(v) = t.strip_prefix("abs:") {
            let v: f64 = v
                .parse()
                .map_err(|e| CliError::Config(format!("bad sigma value `{v}`: {e}")))?;
            return Ok(SigmaRule::Abs(v));
        }
        match t {
            "halfk" => Ok(SigmaRule::HalfKappa),
            "halfk2" => Ok(SigmaRule::HalfKappaSquared),
            other => Err(CliError::Config(format!(
                "unknown sigma rule `{other}` (expected abs:<v>, halfk or halfk2)"
            ))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SigmaRule::Abs(v) => format!("abs:{v}"),
            SigmaRule::HalfKappa => "halfk".into(),
            SigmaRule::HalfKappaSquared => "halfk2".into(),
        }
    }
}

/// Wavenumber syntax: a float, or a multiple of pi written as `8pi`.
pub fn parse_kappa(s: &str) -> Result<f64, CliError> {
    let t = s.trim();
    if let Some(mult) = t.strip_suffix("pi") {
        let m: f64 = if mult.is_empty() {
            1.0
        } else {
            mult.parse()
                .map_err(|e| CliError::Config(format!("bad kappa `{t}`: {e}")))?
        };
        return Ok(m * std::f64::consts::PI);
    }
    t.parse()
        .map_err(|e| CliError::Config(format!("bad kappa `{t}`: {e}")))
}

pub fn parse_eps_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Config(format!("bad epsilon `{p}`: {e}")))
        })
        .collect()
}

/// Effective configuration of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: Problem,
    pub level: u32,
    pub kappa: f64,
    pub sigma_rule: SigmaRule,
    pub epsilons: Vec<f64>,
    pub tol: f64,
    pub max_iterations: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub max_depth: u32,
    pub budget: usize,
    pub grid_n: usize,
    pub fov_angles: usize,
}

impl RunConfig {
    pub fn default_for(problem: Problem) -> Self {
        let (level, epsilons) = match problem {
            Problem::Poisson => (1, vec![0.05, 0.2]),
            Problem::Helmholtz => (3, vec![0.01, 0.2, 1.0, 2.0]),
            Problem::ShiftedLaplace => (3, vec![1e-3, 1e-2, 1e-1, 1.0]),
        };
        Self {
            problem,
            level,
            kappa: 8.0 * std::f64::consts::PI,
            sigma_rule: SigmaRule::HalfKappaSquared,
            epsilons,
            tol: 1e-6,
            max_iterations: 2000,
            seed: 20240501,
            out_dir: PathBuf::from("out"),
            max_depth: 8,
            budget: 200_000,
            grid_n: 16,
            fov_angles: 64,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma_rule.sigma(self.kappa)
    }

    /// Point-query accuracy (region constants, bisection, origin sigma_min).
    /// Far-field shifts have clustered singular values that certify slowly,
    /// hence the raised iteration cap.
    pub fn resolvent_opts(&self) -> ResolventOpts {
        ResolventOpts {
            seed: self.seed,
            rel_tol: 1e-6,
            max_iter: 1500,
            ..ResolventOpts::default()
        }
    }

    /// Contour-grade accuracy for grid sweeps: 1e-3 relative on the value is
    /// invisible at log10 contour resolution and avoids the slow certified
    /// crawl at far-field points.
    pub fn contour_opts(&self) -> ResolventOpts {
        ResolventOpts {
            seed: self.seed,
            rel_tol: 1e-3,
            max_iter: 1500,
            ..ResolventOpts::default()
        }
    }

    /// Flat key = value snapshot; the same syntax the config file accepts.
    pub fn snapshot(&self) -> String {
        let eps: Vec<String> = self.epsilons.iter().map(|e| e.to_string()).collect();
        let mut s = String::new();
        let _ = writeln!(s, "problem = {}", self.problem.name());
        let _ = writeln!(s, "level = {}", self.level);
        let _ = writeln!(s, "kappa = {}", self.kappa);
        let _ = writeln!(s, "sigma_rule = {}", self.sigma_rule.label());
        let _ = writeln!(s, "eps = {}", eps.join(","));
        let _ = writeln!(s, "tol = {}", self.tol);
        let _ = writeln!(s, "max_iterations = {}", self.max_iterations);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "max_depth = {}", self.max_depth);
        let _ = writeln!(s, "budget = {}", self.budget);
        let _ = writeln!(s, "grid_n = {}", self.grid_n);
        let _ = writeln!(s, "fov_angles = {}", self.fov_angles);
        s
    }

    /// Applies one key = value assignment.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "problem" => self.problem = Problem::parse(value)?,
            "level" => {
                self.level = value
                    .parse()
                    .map_err(|e| CliError::Config(format!("bad level `{value}`: {e}")))?
            }
            "kappa" => self.kappa = parse_kappa(value)?,
            "sigma_rule" => self.sigma_rule = SigmaRule::parse(value)?,
            "eps" => self.epsilons = parse_eps_list(value)?,
            "tol" => {
                self.tol = value
                    .parse()
                    .map_err(|e| CliError::Config(format!("bad tol `{value}`: {e}")))?
            }
            "max_iterations" => {
                self.max_iterations = value
                    .parse()
                    .map_err(|e| CliError::Config(format!("bad max_iterations `{value}`: {e}")))?
            }
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|e| CliError::Config(format!("bad seed `{value}`: {e}")))?
            }
            "out" => self.out_dir = PathBuf::from(value),
            "max_depth" => {
                self.max_depth = value
                    .parse()
                    .map_err(|e| CliError::Config(format!("bad max_depth `{value}`: {e}")))?
            }
            "budget" => {
                self.budget = value
                    .parse()
                    .map_err(|e| CliError::Config(format!("bad budget `{value}`: {e}")))?
            }
            "grid_n" => {
                self.grid_n = value
                    .parse()
                    .map_err(|e| CliError::Config(format!("bad grid_n `{value}`: {e}")))?
            }
            "fov_angles" => {
                self.fov_angles = value
                    .parse()
                    .map_err(|e| CliError::Config(format!("bad fov_angles `{value}`: {e}")))?
            }
            other => return Err(CliError::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Parses a flat `key = value` config file into this config.
    pub fn apply_file(&mut self, text: &str) -> Result<(), CliError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    i + 1
                )));
            };
            self.apply_kv(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(CliError::Config(format!("tol must be in (0, 1), got {}", self.tol)));
        }
        if self.level < 1 {
            return Err(CliError::Config("level must be >= 1".into()));
        }
        if self.problem != Problem::ShiftedLaplace {
            if let SigmaRule::Abs(v) = self.sigma_rule {
                if v != 0.0 {
                    return Err(CliError::Config(
                        "sigma only applies to the shifted-laplace problem".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Caps the worker pool from HELMPSEUDO_THREADS (explicit argument wins).
pub fn init_thread_pool(explicit: Option<usize>) {
    let n = explicit.or_else(|| {
        std::env::var("HELMPSEUDO_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|source| CliError::Io { path: parent.to_path_buf(), source })?;
    }
    std::fs::write(path, content)
        .map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write_snapshot(cfg: &RunConfig) -> Result<(), CliError> {
    write_file(&cfg.out_dir.join("config.txt"), &cfg.snapshot())
}

// ---------------------------------------------------------------------------
// Assembled operators per problem
// ---------------------------------------------------------------------------

/// Matrices for the configured problem: `a` is the operator whose
/// pseudospectrum is of interest; `b` is the right preconditioner when one
/// applies.
pub struct AssembledProblem {
    pub mesh: crate::mesh::Mesh,
    pub fem: crate::fem::FemMatrices,
    pub a: SparseComplexMatrix,
    pub b: Option<SparseComplexMatrix>,
    /// Interior-to-global map when the operator is Dirichlet-restricted.
    pub interior: Option<Vec<usize>>,
    pub h: f64,
}

pub fn assemble_problem(cfg: &RunConfig) -> Result<AssembledProblem, CliError> {
    let mesh = lshape_at_level(cfg.level);
    let h = mesh_size(&mesh).h;
    let fem = assemble_fem(&mesh)?;
    match cfg.problem {
        Problem::Poisson => {
            let (a, interior) = assemble_poisson_dirichlet(&mesh)?;
            Ok(AssembledProblem { mesh, fem, a, b: None, interior: Some(interior), h })
        }
        Problem::Helmholtz => {
            let p = HelmholtzParams::new(cfg.kappa, 0.0)?;
            let a = assemble_helmholtz(&fem, &p)?;
            Ok(AssembledProblem { mesh, fem, a, b: None, interior: None, h })
        }
        Problem::ShiftedLaplace => {
            let p = HelmholtzParams::new(cfg.kappa, cfg.sigma())?;
            let a = assemble_helmholtz(&fem, &p)?;
            let b = assemble_shifted_laplace(&fem, &p)?;
            Ok(AssembledProblem { mesh, fem, a, b: Some(b), interior: None, h })
        }
    }
}

impl AssembledProblem {
    fn evaluator<'a>(&'a self, opts: ResolventOpts) -> Box<dyn ResolventEvaluator + 'a> {
        match &self.b {
            None => Box::new(MatrixResolvent { a: &self.a, opts }),
            Some(b) => Box::new(PreconditionedResolvent { a: &self.a, b, opts }),
        }
    }

    fn sigma_min_at_origin(&self, opts: &ResolventOpts) -> Result<f64, CliError> {
        let q = match &self.b {
            None => ResolventQuery::plain(Complex64::ZERO, &self.a),
            Some(b) => ResolventQuery::preconditioned(Complex64::ZERO, &self.a, b),
        };
        Ok(smallest_singular_value(&q, opts)?)
    }

    fn fov_polygon(&self, angles: usize, opts: &ResolventOpts) -> Result<FovPolygon, CliError> {
        // Support points are Rayleigh quotients, so they stay inside the
        // field of values whatever the eigensolve accuracy; 1e-8 with a
        // raised cap handles clustered Hermitian parts.
        let fov_opts = FovOpts { seed: opts.seed, max_iter: 1500, tol: 1e-8 };
        match &self.b {
            None => Ok(fov_boundary(&self.a, angles, &fov_opts)?),
            Some(b) => {
                let op = preconditioned_operator(&self.a, b)?;
                Ok(fov_boundary(&op, angles, &fov_opts)?)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// mesh / assemble
// ---------------------------------------------------------------------------

pub fn run_mesh(cfg: &RunConfig) -> Result<RunStatus, CliError> {
    let started = Instant::now();
    let mesh = lshape_at_level(cfg.level);
    write_snapshot(cfg)?;
    write_file(&cfg.out_dir.join("mesh.txt"), &mesh.to_text())?;
    let mut summary = String::new();
    let _ = writeln!(summary, "command = mesh");
    let _ = writeln!(summary, "level = {}", mesh.level);
    let _ = writeln!(summary, "vertices = {}", mesh.vertex_count());
    let _ = writeln!(summary, "triangles = {}", mesh.triangle_count());
    let _ = writeln!(summary, "boundary_edges = {}", mesh.boundary_edges.len());
    let _ = writeln!(summary, "h = {}", mesh_size(&mesh).h);
    let _ = writeln!(summary, "area = {}", mesh.total_area());
    let _ = writeln!(summary, "boundary_length = {}", mesh.boundary_length());
    let _ = writeln!(summary, "elapsed_s = {:.3}", started.elapsed().as_secs_f64());
    write_file(&cfg.out_dir.join("summary.txt"), &summary)?;
    Ok(RunStatus::Success)
}

pub fn run_assemble(cfg: &RunConfig) -> Result<RunStatus, CliError> {
    let started = Instant::now();
    let asm = assemble_problem(cfg)?;
    write_snapshot(cfg)?;
    write_file(&cfg.out_dir.join("K.mtx"), &asm.fem.k.matrix_market_string())?;
    write_file(&cfg.out_dir.join("M.mtx"), &asm.fem.m.matrix_market_string())?;
    write_file(&cfg.out_dir.join("Mb.mtx"), &asm.fem.mb.matrix_market_string())?;
    write_file(&cfg.out_dir.join("A.mtx"), &asm.a.matrix_market_string())?;
    if let Some(b) = &asm.b {
        write_file(&cfg.out_dir.join("B.mtx"), &b.matrix_market_string())?;
    }
    let load = paper_gaussian_load();
    let b_vec = assemble_load(&asm.mesh, &load)?;
    write_file(&cfg.out_dir.join("load.csv"), &complex_vector_csv_string(&b_vec))?;
    let mut summary = String::new();
    let _ = writeln!(summary, "command = assemble");
    let _ = writeln!(summary, "problem = {}", cfg.problem.name());
    let _ = writeln!(summary, "dofs = {}", asm.a.dim());
    let _ = writeln!(summary, "nnz_a = {}", asm.a.nnz());
    let _ = writeln!(summary, "h = {}", asm.h);
    let _ = writeln!(summary, "elapsed_s = {:.3}", started.elapsed().as_secs_f64());
    write_file(&cfg.out_dir.join("summary.txt"), &summary)?;
    Ok(RunStatus::Success)
}

/// The sharp Gaussian volume source used across the experiments.
pub fn paper_gaussian_load() -> LoadSpec {
    LoadSpec::gaussian(0.5, -0.5, 1000.0)
}

// ---------------------------------------------------------------------------
// psgrid
// ---------------------------------------------------------------------------

pub struct PsgridOutput {
    pub grid: ComplexGrid,
    pub isolines: IsolineSet,
    pub window: Window,
    pub fov: FovPolygon,
    pub regions: Vec<Region>,
    pub status: RunStatus,
}

/// Full adaptive GRID pipeline: assemble, window from the field of values,
/// refine at the requested levels, extract isolines, emit artifacts.
pub fn run_psgrid(cfg: &RunConfig) -> Result<PsgridOutput, CliError> {
    cfg.validate()?;
    let started = Instant::now();
    let asm = assemble_problem(cfg)?;
    let t_assemble = started.elapsed().as_secs_f64();

    let opts = cfg.resolvent_opts();
    let levels = LevelSpec::new(cfg.epsilons.clone())?;
    let fov = asm.fov_polygon(cfg.fov_angles, &opts)?;
    let window = Window::from_fov(&fov, 2.0 * levels.max_epsilon())?;
    let t_fov = started.elapsed().as_secs_f64() - t_assemble;

    let ev = asm.evaluator(cfg.contour_opts());
    let grid = initial_grid_aspect(&window, cfg.grid_n)?;
    let grid = refine_adaptive(grid, &levels, cfg.max_depth, cfg.budget, ev.as_ref())?;
    let isolines = extract_isolines(&grid, &levels);
    let t_grid = started.elapsed().as_secs_f64() - t_fov - t_assemble;

    let regions = standard_regions(cfg, &asm, &fov, &levels, &opts)?;

    let status = if grid.budget_exceeded { RunStatus::Warning } else { RunStatus::Success };
    write_snapshot(cfg)?;
    write_file(&cfg.out_dir.join("grid.csv"), &grid.to_dump().to_csv())?;
    write_file(&cfg.out_dir.join("isolines.csv"), &isolines_to_csv(&isolines))?;
    let plot = render_psgrid_svg(cfg, &window, &isolines, &regions, &fov);
    write_file(&cfg.out_dir.join("psgrid.svg"), &plot)?;

    let mut summary = String::new();
    let _ = writeln!(summary, "command = psgrid");
    let _ = writeln!(summary, "problem = {}", cfg.problem.name());
    let _ = writeln!(summary, "dofs = {}", asm.a.dim());
    let _ = writeln!(
        summary,
        "window = [{}, {}] x [{}, {}]",
        window.re_min, window.re_max, window.im_min, window.im_max
    );
    let _ = writeln!(summary, "grid_vertices = {}", grid.vertex_count());
    let _ = writeln!(summary, "grid_triangles = {}", grid.triangle_count());
    let _ = writeln!(summary, "evaluations = {}", grid.evaluations);
    let _ = writeln!(summary, "budget_exceeded = {}", grid.budget_exceeded);
    let _ = writeln!(summary, "t_assemble_s = {t_assemble:.3}");
    let _ = writeln!(summary, "t_fov_s = {t_fov:.3}");
    let _ = writeln!(summary, "t_grid_s = {t_grid:.3}");
    write_file(&cfg.out_dir.join("summary.txt"), &summary)?;

    Ok(PsgridOutput { grid, isolines, window, fov, regions, status })
}

/// The a priori regions that apply to the configured problem, one per
/// epsilon where the region depends on it.
pub fn standard_regions(
    cfg: &RunConfig,
    asm: &AssembledProblem,
    fov: &FovPolygon,
    levels: &LevelSpec,
    opts: &ResolventOpts,
) -> Result<Vec<Region>, CliError> {
    let mut regions = Vec::new();
    let sigma_min = asm.sigma_min_at_origin(opts)?;
    for &eps in levels.epsilons() {
        if sigma_min > 0.0 {
            let sc = StabilityConstants::from_oracle(sigma_min)?;
            regions.push(exclusion_disc(&sc, eps));
        }
        regions.push(inclusion_fov_dilation(fov, eps));
    }
    match cfg.problem {
        Problem::Poisson => {
            // Generic-constant form C h^d - eps, self-calibrated on this
            // matrix: C = sigma_min / h^2.
            let c = sigma_min / asm.h.powi(2);
            for &eps in levels.epsilons() {
                regions.push(Region::Disc {
                    center: Complex64::ZERO,
                    radius: c * asm.h.powi(2) - eps,
                    kind: RegionKind::Exclusion,
                    provenance: "calibrated".into(),
                });
            }
        }
        Problem::Helmholtz => {
            let c = sigma_min / (cfg.kappa * asm.h.powi(2));
            for &eps in levels.epsilons() {
                regions.push(helmholtz_exclusion(cfg.kappa, asm.h, 2, c, eps)?);
            }
            // FOV strip: 0 <= Im z <= kappa lambda_max(Mb), |z| capped by the
            // largest support-point modulus.
            let mb_top = hermitian_largest(&asm.fem.mb, opts)?;
            let cap = fov.points.iter().map(|p| p.norm()).fold(0.0, f64::max);
            regions.push(Region::Strip {
                im_min: 0.0,
                im_max: cfg.kappa * mb_top,
                modulus_cap: cap,
                kind: RegionKind::Inclusion,
                provenance: "boundary-mass".into(),
            });
        }
        Problem::ShiftedLaplace => {
            let ne = norm_equivalence_constants(&asm.fem.m, &asm.fem.k, cfg.kappa, opts)?;
            for &eps in levels.epsilons() {
                regions.push(sl_exclusion(cfg.kappa, cfg.sigma(), None, eps)?);
                regions.push(Region::Lemma41 {
                    c: ne.mass_condition_sqrt,
                    eps,
                    provenance: "mass-conditioning".into(),
                });
            }
            // The disc B(1/2, 1/2) that contains the set for small eps.
            regions.push(Region::Disc {
                center: Complex64::new(0.5, 0.0),
                radius: 0.5,
                kind: RegionKind::Inclusion,
                provenance: "loss-term-disc".into(),
            });
        }
    }
    Ok(regions)
}

fn render_psgrid_svg(
    cfg: &RunConfig,
    window: &Window,
    isolines: &IsolineSet,
    regions: &[Region],
    fov: &FovPolygon,
) -> String {
    let mut canvas = svg::SvgCanvas::new(*window);
    canvas.add_axes();
    for (i, (eps, polys)) in isolines.per_eps.iter().enumerate() {
        let color = svg::PALETTE[i % svg::PALETTE.len()];
        for poly in polys {
            canvas.add_polyline(&poly.points, color, 1.5, poly.closed);
        }
        canvas.add_label(&format!("eps = {eps}"), i, color);
    }
    let mut slot = isolines.per_eps.len();
    // Smallest-eps exclusion disc overlay.
    if let Some(Region::Disc { center, radius, .. }) = regions
        .iter()
        .find(|r| matches!(r, Region::Disc { kind: RegionKind::Exclusion, .. }))
    {
        canvas.add_circle(*center, *radius, "#000000", false);
        canvas.add_label("exclusion disc", slot, "#000000");
        slot += 1;
    }
    if !fov.is_degenerate() {
        canvas.add_polygon(&fov.points, "#999999", false);
        canvas.add_label("field of values", slot, "#999999");
        slot += 1;
    }
    if cfg.problem == Problem::ShiftedLaplace {
        canvas.add_circle(Complex64::new(0.5, 0.0), 0.5, "#333333", true);
        canvas.add_label("B(1/2, 1/2)", slot, "#333333");
    }
    canvas.finish(&format!(
        "{} pseudospectrum, level {} (kappa = {:.4})",
        cfg.problem.name(),
        cfg.level,
        cfg.kappa
    ))
}

// ---------------------------------------------------------------------------
// regions
// ---------------------------------------------------------------------------

pub fn run_regions(cfg: &RunConfig) -> Result<Vec<Region>, CliError> {
    cfg.validate()?;
    let asm = assemble_problem(cfg)?;
    let opts = cfg.resolvent_opts();
    let levels = LevelSpec::new(cfg.epsilons.clone())?;
    let fov = asm.fov_polygon(cfg.fov_angles, &opts)?;
    let regions = standard_regions(cfg, &asm, &fov, &levels, &opts)?;
    write_snapshot(cfg)?;
    let mut text = String::new();
    for r in &regions {
        let _ = writeln!(text, "{}", r.export_record());
    }
    write_file(&cfg.out_dir.join("regions.txt"), &text)?;
    Ok(regions)
}

// ---------------------------------------------------------------------------
// gmres
// ---------------------------------------------------------------------------

/// One GMRES experiment: configuration echo, measured residual history, the
/// matching a priori bound trajectory, and phase timings.
pub struct RunRecord {
    pub config: String,
    pub residual_history: Vec<f64>,
    pub bound_trajectory: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub predicted_iterations: Option<u64>,
    pub timings: Vec<(String, f64)>,
}

impl RunRecord {
    pub fn residuals_csv(&self) -> String {
        let mut s = String::from("iteration,residual,bound\n");
        for (i, r) in self.residual_history.iter().enumerate() {
            let b = self
                .bound_trajectory
                .get(i)
                .map(|v| v.to_string())
                .unwrap_or_else(|| "nan".into());
            let _ = writeln!(s, "{i},{r},{b}");
        }
        s
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command = gmres");
        let _ = writeln!(s, "iterations = {}", self.iterations);
        let _ = writeln!(s, "converged = {}", self.converged);
        if let Some(r0) = self.residual_history.first() {
            let rn = self.residual_history.last().unwrap();
            let _ = writeln!(s, "relative_residual = {}", rn / r0);
        }
        if let Some(p) = self.predicted_iterations {
            let _ = writeln!(s, "predicted_iterations = {p}");
        }
        for (phase, secs) in &self.timings {
            let _ = writeln!(s, "t_{phase}_s = {secs:.3}");
        }
        s
    }
}

/// Circle-bound trajectory for the shifted-Laplace runs: the covering set
/// B(1, 1 - kappa/(kappa+sigma)) grown by eps = gap/2, which keeps the
/// origin outside.
fn sl_bound_trajectory(kappa: f64, sigma: f64, len: usize) -> Vec<f64> {
    let gap = kappa / (kappa + sigma);
    let eps = 0.5 * gap;
    let radius = 1.0 - gap + eps;
    let multiplier = radius / eps;
    (0..len).map(|i| multiplier * radius.powi(i as i32)).collect()
}

pub fn run_gmres(cfg: &RunConfig) -> Result<(RunRecord, RunStatus), CliError> {
    cfg.validate()?;
    let started = Instant::now();
    let asm = assemble_problem(cfg)?;
    let load = paper_gaussian_load();
    let b_full = assemble_load(&asm.mesh, &load)?;
    let t_assemble = started.elapsed().as_secs_f64();

    let mut timings = vec![("assemble".to_string(), t_assemble)];
    let (run, bound, predicted) = match (&asm.b, &asm.interior) {
        (Some(bmat), _) => {
            let op = preconditioned_operator(&asm.a, bmat)?;
            let run = gmres(&op, &b_full, cfg.tol, cfg.max_iterations)?;
            // Recover x = B^{-1} x_tilde; its residual equals the
            // preconditioned one, so only the solution changes.
            let solution = op.recover_solution(&run.solution);
            let run = crate::linalg::GmresRun { solution, ..run };
            let bound = sl_bound_trajectory(cfg.kappa, cfg.sigma(), run.residual_history.len());
            let predicted =
                Some(iterations_estimate(EstimateFormula::ShiftedLaplace { kappa: cfg.kappa }, cfg.tol)?.n);
            (run, bound, predicted)
        }
        (None, Some(interior)) => {
            let b_int: Vec<Complex64> = interior.iter().map(|&i| b_full[i]).collect();
            let run = gmres(&asm.a, &b_int, cfg.tol, cfg.max_iterations)?;
            // Normal SPD matrix: classical circle bound on the spectrum
            // interval, no pseudospectrum multiplier needed.
            let opts = cfg.resolvent_opts();
            let (lo, hi) = hermitian_extremes(&asm.a, &opts)?;
            let center = 0.5 * (lo + hi);
            let radius = 0.5 * (hi - lo);
            let rho = radius / center;
            let bound = (0..run.residual_history.len()).map(|i| rho.powi(i as i32)).collect();
            (run, bound, None)
        }
        (None, None) => {
            let run = gmres(&asm.a, &b_full, cfg.tol, cfg.max_iterations)?;
            (run, Vec::new(), None)
        }
    };
    timings.push(("gmres".to_string(), started.elapsed().as_secs_f64() - t_assemble));

    let record = RunRecord {
        config: cfg.snapshot(),
        residual_history: run.residual_history.clone(),
        bound_trajectory: bound,
        iterations: run.iterations,
        converged: run.converged,
        predicted_iterations: predicted,
        timings,
    };
    write_snapshot(cfg)?;
    write_file(&cfg.out_dir.join("residuals.csv"), &record.residuals_csv())?;
    write_file(&cfg.out_dir.join("summary.txt"), &record.summary_text())?;
    write_file(&cfg.out_dir.join("solution.csv"), &complex_vector_csv_string(&run.solution))?;
    let status = if run.converged { RunStatus::Success } else { RunStatus::Warning };
    Ok((record, status))
}

// ---------------------------------------------------------------------------
// bisect
// ---------------------------------------------------------------------------

/// Closest-approach sweep: for each kappa and each sigma rule, the real
/// point nearest the origin where the resolvent norm reaches 1/target_eps.
pub fn run_bisect(
    cfg: &RunConfig,
    target_eps: f64,
    kappas: &[f64],
) -> Result<Vec<(f64, f64, f64)>, CliError> {
    if kappas.is_empty() {
        return Err(CliError::Config("kappa list must not be empty".into()));
    }
    if !(target_eps > 0.0) {
        return Err(CliError::Config(format!("target eps must be > 0, got {target_eps}")));
    }
    let target_norm = 1.0 / target_eps;
    let mut rows = Vec::new();
    for &kappa in kappas {
        for rule in [SigmaRule::HalfKappa, SigmaRule::HalfKappaSquared] {
            let mut sub = cfg.clone();
            sub.problem = Problem::ShiftedLaplace;
            sub.kappa = kappa;
            sub.sigma_rule = rule;
            let asm = assemble_problem(&sub)?;
            let opts = sub.resolvent_opts();
            let ev = asm.evaluator(opts);
            let x = crate::theory::bisect_closest_real(ev.as_ref(), target_norm, (0.0, 1.0))?;
            rows.push((kappa, rule.sigma(kappa), x));
        }
    }
    write_snapshot(cfg)?;
    let mut csv = String::from("kappa,sigma,x\n");
    for &(k, s, x) in &rows {
        let _ = writeln!(csv, "{k},{s},{x}");
    }
    write_file(&cfg.out_dir.join("bisect.csv"), &csv)?;
    // One series per sigma rule, x against kappa.
    let halfk: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(k, s, _)| (s - 0.5 * k).abs() < 1e-9 * k)
        .map(|&(k, _, x)| (k, x))
        .collect();
    let halfk2: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(k, s, _)| (s - 0.5 * k * k).abs() < 1e-9 * k * k)
        .map(|&(k, _, x)| (k, x))
        .collect();
    let chart = svg::line_chart(
        &format!("closest real approach at resolvent norm {target_norm}"),
        "kappa",
        "x",
        &[("sigma = 0.5 kappa".into(), halfk), ("sigma = 0.5 kappa^2".into(), halfk2)],
    );
    write_file(&cfg.out_dir.join("bisect.svg"), &chart)?;
    Ok(rows)
}

// ---------------------------------------------------------------------------
// reproduce
// ---------------------------------------------------------------------------

/// Bundled experiment presets (fig1..fig5), desk-scaled: the mesh level and
/// wavenumber are reduced so every preset runs on a workstation. Each
/// summary records the level actually used.
pub fn run_reproduce(fig: &str, out_root: &Path, seed: u64) -> Result<RunStatus, CliError> {
    let pi = std::f64::consts::PI;
    match fig {
        "fig1" => {
            let mut cfg = RunConfig::default_for(Problem::Poisson);
            cfg.level = 1;
            cfg.epsilons = vec![0.05, 0.2];
            cfg.grid_n = 24;
            cfg.max_depth = 6;
            cfg.seed = seed;
            cfg.out_dir = out_root.join("fig1");
            let out = run_psgrid(&cfg)?;
            append_note(&cfg.out_dir, "level_used = 1\n")?;
            Ok(out.status)
        }
        "fig2" => {
            let mut cfg = RunConfig::default_for(Problem::Helmholtz);
            cfg.level = 3;
            cfg.kappa = 8.0 * pi;
            cfg.epsilons = vec![0.01, 0.2, 1.0, 2.0];
            cfg.grid_n = 16;
            cfg.max_depth = 4;
            cfg.seed = seed;
            cfg.out_dir = out_root.join("fig2");
            let out = run_psgrid(&cfg)?;
            append_note(&cfg.out_dir, "level_used = 3 (desk scale)\n")?;
            Ok(out.status)
        }
        "fig3" => {
            let mut status = RunStatus::Success;
            for rule in [SigmaRule::HalfKappa, SigmaRule::HalfKappaSquared] {
                let mut cfg = RunConfig::default_for(Problem::ShiftedLaplace);
                cfg.level = 3;
                cfg.kappa = 8.0 * pi;
                cfg.sigma_rule = rule;
                cfg.epsilons = vec![1e-3, 1e-2, 1e-1, 1.0];
                cfg.grid_n = 16;
                cfg.max_depth = 4;
                cfg.seed = seed;
                cfg.out_dir = out_root.join(format!("fig3_{}", rule.label()));
                let out = run_psgrid(&cfg)?;
                status = status.merge(out.status);
                append_note(&cfg.out_dir, "level_used = 3, kappa desk-scaled to 8pi\n")?;
            }
            Ok(status)
        }
        "fig4" => {
            let mut cfg = RunConfig::default_for(Problem::ShiftedLaplace);
            cfg.level = 3;
            cfg.seed = seed;
            cfg.out_dir = out_root.join("fig4");
            let kappas = [4.0 * pi, 8.0 * pi, 16.0 * pi];
            run_bisect(&cfg, 2e-2, &kappas)?;
            append_note(&cfg.out_dir, "level_used = 3 (desk scale)\n")?;
            Ok(RunStatus::Success)
        }
        "fig5" => {
            let mut status = RunStatus::Success;
            let out_dir = out_root.join("fig5");
            let mut rows = String::from("kappa,sigma_rule,iterations,converged,predicted\n");
            let mut series_halfk = Vec::new();
            let mut series_halfk2 = Vec::new();
            for rule in [SigmaRule::HalfKappa, SigmaRule::HalfKappaSquared] {
                for &kappa in &[4.0 * pi, 8.0 * pi, 16.0 * pi] {
                    let mut cfg = RunConfig::default_for(Problem::ShiftedLaplace);
                    cfg.level = 4;
                    cfg.kappa = kappa;
                    cfg.sigma_rule = rule;
                    cfg.tol = 1e-6;
                    cfg.seed = seed;
                    cfg.out_dir = out_dir.join(format!("{}_{:.0}", rule.label(), kappa));
                    let (rec, st) = run_gmres(&cfg)?;
                    status = status.merge(st);
                    let _ = writeln!(
                        rows,
                        "{kappa},{},{},{},{}",
                        rule.label(),
                        rec.iterations,
                        rec.converged,
                        rec.predicted_iterations.map(|p| p.to_string()).unwrap_or_default()
                    );
                    match rule {
                        SigmaRule::HalfKappa => series_halfk.push((kappa, rec.iterations as f64)),
                        _ => series_halfk2.push((kappa, rec.iterations as f64)),
                    }
                }
            }
            write_file(&out_dir.join("iterations.csv"), &rows)?;
            let chart = svg::line_chart(
                "GMRES iterations against kappa (tol 1e-6)",
                "kappa",
                "iterations",
                &[
                    ("sigma = 0.5 kappa".into(), series_halfk),
                    ("sigma = 0.5 kappa^2".into(), series_halfk2),
                ],
            );
            write_file(&out_dir.join("iterations.svg"), &chart)?;
            append_note(&out_dir, "level_used = 4 (desk scale)\n")?;
            Ok(status)
        }
        other => Err(CliError::Config(format!(
            "unknown figure `{other}` (expected fig1..fig5)"
        ))),
    }
}

fn append_note(dir: &Path, note: &str) -> Result<(), CliError> {
    let path = dir.join("summary.txt");
    let mut text = std::fs::read_to_string(&path).unwrap_or_default();
    text.push_str(note);
    write_file(&path, &text)
}

// ---------------------------------------------------------------------------
// clap surface
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "helmpseudo",
    about = "Pseudospectra, inclusion/exclusion regions and GMRES experiments \
             for Helmholtz finite elements on the L-shaped domain"
)]
pub struct Cli {
    /// Flat key = value configuration file; command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker-pool size (also HELMPSEUDO_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Default)]
pub struct CommonArgs {
    /// poisson | helmholtz | shifted-laplace
    #[arg(long)]
    pub problem: Option<String>,
    /// Mesh refinement level (1 = coarse).
    #[arg(long)]
    pub level: Option<u32>,
    /// Wavenumber; accepts `8pi` syntax.
    #[arg(long)]
    pub kappa: Option<String>,
    /// abs:<v> | halfk | halfk2
    #[arg(long)]
    pub sigma_rule: Option<String>,
    /// Comma-separated epsilon levels.
    #[arg(long)]
    pub eps: Option<String>,
    /// GMRES relative tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Adaptive refinement depth cap.
    #[arg(long)]
    pub max_depth: Option<u32>,
    /// Vertex-evaluation budget.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Initial grid subdivisions per side.
    #[arg(long)]
    pub grid_n: Option<usize>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Write the mesh at the requested level.
    Mesh(CommonArgs),
    /// Assemble and export the operator matrices.
    Assemble(CommonArgs),
    /// Adaptive pseudospectrum grid, isolines and plot.
    Psgrid(CommonArgs),
    /// Export the applicable inclusion/exclusion regions.
    Regions(CommonArgs),
    /// Run GMRES on the configured problem with the Gaussian source.
    Gmres(CommonArgs),
    /// Closest-approach bisection sweep over kappa.
    Bisect {
        #[command(flatten)]
        common: CommonArgs,
        /// Pseudospectrum level to probe (resolvent norm 1/eps).
        #[arg(long, default_value_t = 2e-2)]
        target_eps: f64,
        /// Comma-separated kappa list (accepts `4pi,8pi,...`).
        #[arg(long, default_value = "4pi,8pi,16pi")]
        kappas: String,
    },
    /// Run a bundled experiment preset (fig1..fig5).
    Reproduce {
        /// fig1 | fig2 | fig3 | fig4 | fig5
        figure: String,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn build_config(
    file: Option<&PathBuf>,
    args: &CommonArgs,
    default_problem: Problem,
) -> Result<RunConfig, CliError> {
    let problem = match &args.problem {
        Some(p) => Problem::parse(p)?,
        None => default_problem,
    };
    let mut cfg = RunConfig::default_for(problem);
    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Io { path: path.clone(), source })?;
        cfg.apply_file(&text)?;
        if args.problem.is_some() {
            cfg.problem = problem;
        }
    }
    if let Some(v) = args.level {
        cfg.level = v;
    }
    if let Some(v) = &args.kappa {
        cfg.kappa = parse_kappa(v)?;
    }
    if let Some(v) = &args.sigma_rule {
        cfg.sigma_rule = SigmaRule::parse(v)?;
    }
    if let Some(v) = &args.eps {
        cfg.epsilons = parse_eps_list(v)?;
    }
    if let Some(v) = args.tol {
        cfg.tol = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = &args.out {
        cfg.out_dir = v.clone();
    }
    if let Some(v) = args.max_depth {
        cfg.max_depth = v;
    }
    if let Some(v) = args.budget {
        cfg.budget = v;
    }
    if let Some(v) = args.grid_n {
        cfg.grid_n = v;
    }
    Ok(cfg)
}

/// Entry point behind `main`: parses, runs, maps to an exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    init_thread_pool(cli.threads);
    let result: Result<RunStatus, CliError> = (|| match &cli.command {
        Command::Mesh(args) => {
            let cfg = build_config(cli.config.as_ref(), args, Problem::Poisson)?;
            run_mesh(&cfg)
        }
        Command::Assemble(args) => {
            let cfg = build_config(cli.config.as_ref(), args, Problem::Helmholtz)?;
            run_assemble(&cfg)
        }
        Command::Psgrid(args) => {
            let cfg = build_config(cli.config.as_ref(), args, Problem::Helmholtz)?;
            Ok(run_psgrid(&cfg)?.status)
        }
        Command::Regions(args) => {
            let cfg = build_config(cli.config.as_ref(), args, Problem::Helmholtz)?;
            run_regions(&cfg)?;
            Ok(RunStatus::Success)
        }
        Command::Gmres(args) => {
            let cfg = build_config(cli.config.as_ref(), args, Problem::ShiftedLaplace)?;
            Ok(run_gmres(&cfg)?.1)
        }
        Command::Bisect { common, target_eps, kappas } => {
            let cfg = build_config(cli.config.as_ref(), common, Problem::ShiftedLaplace)?;
            let kappas: Result<Vec<f64>, CliError> =
                kappas.split(',').map(parse_kappa).collect();
            run_bisect(&cfg, *target_eps, &kappas?)?;
            Ok(RunStatus::Success)
        }
        Command::Reproduce { figure, common } => {
            let out = common.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            let seed = common.seed.unwrap_or(20240501);
            run_reproduce(figure, &out, seed)
        }
    })();
    match result {
        Ok(status) => status.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
