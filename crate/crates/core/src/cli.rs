//! Command-line harness: configuration, orchestration and report output.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 validation failure,
//! 3 numerical non-convergence.

use std::ffi::OsString;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::blowup::{
    blowup_sweep, duality_point, fit_blowup_slope, m_schedule, minimal_k, phi_sqrt_coefficient, unweighted_limit,
};
use crate::cache;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::kernel::{project_monomial, verify_slice_identity, MonomialFunction, TruncatedKernel};
use crate::moments::{boundary_moment_i, fit_kappa_exponent, AuxDiscTable, AuxMode, MomentTable};
use crate::numerics::{linear_spaced, log_spaced, LogValue, MultiIndex};
use crate::report::{report_timestamp, Cell, ExperimentReport};
use crate::sobolev::{
    adjoint_check, dse_band, key_sweep, m_beta_sup, sobolev_ratio_sweep, NOMINAL_Q,
};
use crate::quadrature::QuadratureSpec;

#[derive(Debug, Parser)]
#[command(name = "bergman-lab", version, about = "Weighted Bergman projection experiments on Reinhardt domains")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Flat `key = value` configuration file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// disc | ball | ellipsoid
    #[arg(long, global = true)]
    pub domain: Option<String>,
    #[arg(long, global = true)]
    pub dimension: Option<usize>,
    /// Ellipsoid exponents `a,b` for |z1|^2a + |z2|^2b < 1.
    #[arg(long, global = true)]
    pub ellipsoid_exponents: Option<String>,
    /// exp | poly:q | none
    #[arg(long, global = true)]
    pub weight: Option<String>,
    #[arg(long, global = true)]
    pub quad_rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub quad_max_depth: Option<u32>,
    /// Integrate near the boundary in the original variable.
    #[arg(long, global = true)]
    pub no_boundary_transform: bool,
    /// Moment cache file; defaults to a file in $BERGMAN_CACHE_DIR.
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Write the report here and print only the summary line.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
    /// Stamp reports with the current time instead of a fixed one.
    #[arg(long, global = true)]
    pub wall_clock: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SobolevCheck {
    Dse,
    Key,
    Mbeta,
    Adjoint,
    Ratio,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QChoice {
    /// q = 1/3
    Paper,
    /// q from the boundary-moment fit
    Fitted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AuxChoice {
    Reduction,
    Quadrature,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GridScale {
    Lin,
    Log,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Moments Φ(x) = G((x, 0, …)) over a grid, or G at one exponent vector.
    Moment {
        #[arg(long)]
        exponents: Option<String>,
        /// lo:hi:steps
        #[arg(long)]
        x_grid: Option<String>,
        #[arg(long, value_enum, default_value = "lin")]
        x_scale: GridScale,
        #[arg(long, value_enum, default_value = "csv")]
        out: OutFormat,
    },
    /// Truncated kernel B(z, w).
    Kernel {
        /// z1,…,zn,w1,…,wn; complex entries as 0.3+0.1i
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, default_value_t = 60)]
        degree: u32,
        #[arg(long, value_enum, default_value = "json")]
        out: OutFormat,
    },
    /// Projection of z^a z̄^b.
    Project {
        /// a1,a2:b1,b2
        #[arg(long)]
        monomial: String,
        /// Project through the kernel truncated at this degree.
        #[arg(long)]
        degree: Option<u32>,
        #[arg(long, value_enum, default_value = "json")]
        out: OutFormat,
    },
    /// Log-ratio of the L^p test family z^{km} z̄^m.
    Blowup {
        #[arg(long)]
        p: f64,
        /// auto or an integer ≥ 2
        #[arg(long, default_value = "auto")]
        k: String,
        #[arg(long, default_value_t = 100)]
        m_min: u64,
        #[arg(long, default_value_t = 10_000)]
        m_max: u64,
        #[arg(long, value_enum, default_value = "csv")]
        out: OutFormat,
    },
    /// Monomial-norm estimates and the Sobolev sweep on the ball.
    Sobolev {
        #[arg(long, value_enum)]
        check: SobolevCheck,
        #[arg(long, value_enum, default_value = "paper")]
        q: QChoice,
        /// Largest |α| (key, mbeta), |γ| (adjoint) or |a+b| (ratio).
        #[arg(long)]
        max_degree: Option<u32>,
        #[arg(long, default_value_t = 3)]
        max_beta: u32,
        /// |γ| window lo:hi for dse.
        #[arg(long, default_value = "100:200")]
        window: String,
        /// Sobolev order for ratio.
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// Project through a truncated kernel (ratio).
        #[arg(long)]
        kernel_degree: Option<u32>,
        #[arg(long, value_enum, default_value = "csv")]
        out: OutFormat,
    },
    /// Fit log I(x) ≈ −a√x − q log x + C.
    KappaFit {
        /// lo:hi:steps, log-spaced
        #[arg(long, default_value = "1e2:1e5:40")]
        x_grid: String,
        #[arg(long, value_enum, default_value = "json")]
        out: OutFormat,
    },
    /// Slice identity between the domain kernel and the auxiliary disc kernel.
    SliceCheck {
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, allow_hyphen_values = true)]
        w1: String,
        #[arg(long, default_value_t = 60)]
        degree: u32,
        #[arg(long, value_enum, default_value = "reduction")]
        aux: AuxChoice,
        #[arg(long, value_enum, default_value = "json")]
        out: OutFormat,
    },
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let ctx = Context::new(&cli.common)?;
    let (report, out) = match &cli.command {
        Command::Moment {
            exponents,
            x_grid,
            x_scale,
            out,
        } => (cmd_moment(&ctx, exponents.as_deref(), x_grid.as_deref(), *x_scale)?, *out),
        Command::Kernel { at, degree, out } => (cmd_kernel(&ctx, at, *degree)?, *out),
        Command::Project { monomial, degree, out } => (cmd_project(&ctx, monomial, *degree)?, *out),
        Command::Blowup {
            p,
            k,
            m_min,
            m_max,
            out,
        } => (cmd_blowup(&ctx, *p, k, *m_min, *m_max)?, *out),
        Command::Sobolev {
            check,
            q,
            max_degree,
            max_beta,
            window,
            k,
            kernel_degree,
            out,
        } => (
            cmd_sobolev(
                &ctx,
                &SobolevArgs {
                    check: *check,
                    q: *q,
                    max_degree: *max_degree,
                    max_beta: *max_beta,
                    window,
                    k: *k,
                    kernel_degree: *kernel_degree,
                },
            )?,
            *out,
        ),
        Command::KappaFit { x_grid, out } => (cmd_kappa(&ctx, x_grid)?, *out),
        Command::SliceCheck {
            z,
            w1,
            degree,
            aux,
            out,
        } => (cmd_slice(&ctx, z, w1, *degree, *aux)?, *out),
    };
    ctx.emit(&report, out)
}

struct Context {
    cfg: RunConfig,
    cache_file: Option<PathBuf>,
    no_cache: bool,
    output: Option<PathBuf>,
    wall_clock: bool,
}

impl Context {
    fn new(c: &CommonArgs) -> Result<Self> {
        let mut cfg = match &c.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        let overrides = [
            ("domain", c.domain.clone()),
            ("dimension", c.dimension.map(|d| d.to_string())),
            ("ellipsoid_exponents", c.ellipsoid_exponents.clone()),
            ("weight", c.weight.clone()),
            ("quad_rel_tol", c.quad_rel_tol.map(|t| t.to_string())),
            ("quad_max_depth", c.quad_max_depth.map(|d| d.to_string())),
            ("quad_boundary_transform", c.no_boundary_transform.then(|| "false".to_owned())),
        ];
        for (k, v) in overrides {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
        }
        cfg.quad.validate()?;
        Ok(Context {
            cfg,
            cache_file: c.cache.clone(),
            no_cache: c.no_cache,
            output: c.output.clone(),
            wall_clock: c.wall_clock,
        })
    }

    fn quad(&self) -> QuadratureSpec {
        self.cfg.quad
    }

    fn cache_path(&self, t: &MomentTable) -> Option<PathBuf> {
        if self.no_cache {
            return None;
        }
        if let Some(p) = &self.cache_file {
            return Some(p.clone());
        }
        std::env::var_os(cache::CACHE_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| cache::default_path(&PathBuf::from(d), t))
    }

    /// The configured table, seeded from the cache when one exists.
    fn table(&self) -> Result<Arc<MomentTable>> {
        let t = MomentTable::new(self.cfg.domain_spec()?, self.cfg.weight, self.cfg.quad)?;
        if let Some(p) = self.cache_path(&t) {
            if p.exists() {
                cache::load(&t, &p)?;
            }
        }
        Ok(Arc::new(t))
    }

    fn store(&self, t: &MomentTable) -> Result<()> {
        if let Some(p) = self.cache_path(t) {
            cache::save(t, &p)?;
        }
        Ok(())
    }

    fn report(&self, command: &str, columns: &[&str], params: &[(&str, String)]) -> ExperimentReport {
        let mut config = self.cfg.to_map();
        for (k, v) in params {
            config.insert((*k).to_owned(), v.clone());
        }
        let mut r = ExperimentReport::new(command, config, columns);
        r.timestamp = report_timestamp(self.wall_clock);
        r
    }

    fn emit(&self, r: &ExperimentReport, out: OutFormat) -> Result<()> {
        let body = match out {
            OutFormat::Csv => r.to_csv()?,
            OutFormat::Json => r.to_json()?,
        };
        match &self.output {
            Some(p) => {
                std::fs::write(p, body)?;
                println!("{}", r.summary_line());
            }
            None => {
                print!("{body}");
                eprintln!("{}", r.summary_line());
            }
        }
        Ok(())
    }
}

fn parse_err(what: &str, s: &str) -> Error {
    Error::InvalidConfig(format!("cannot parse {what} '{s}'"))
}

/// `lo:hi:steps`.
pub fn parse_grid(s: &str, scale: GridScale) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(parse_err("grid (lo:hi:steps)", s));
    };
    let lo: f64 = lo.trim().parse().map_err(|_| parse_err("grid", s))?;
    let hi: f64 = hi.trim().parse().map_err(|_| parse_err("grid", s))?;
    let n: usize = n.trim().parse().map_err(|_| parse_err("grid", s))?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi && n >= 1) || (n == 1 && lo != hi) {
        return Err(parse_err("grid", s));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    match scale {
        GridScale::Lin => Ok(linear_spaced(lo, hi, n)),
        GridScale::Log if lo > 0.0 => Ok(log_spaced(lo, hi, n)),
        GridScale::Log => Err(Error::InvalidConfig(format!("log grid needs lo > 0: '{s}'"))),
    }
}

fn parse_reals(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| parse_err("real list", s)))
        .collect()
}

fn parse_index(s: &str) -> Result<MultiIndex> {
    s.split(',')
        .map(|x| x.trim().parse::<u32>().map_err(|_| parse_err("multi-index", s)))
        .collect::<Result<Vec<_>>>()
        .map(MultiIndex::new)
}

fn parse_complex(s: &str) -> Result<Vec<Complex64>> {
    s.split(',')
        .map(|x| x.trim().parse::<Complex64>().map_err(|_| parse_err("complex list", s)))
        .collect()
}

fn index_columns(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn index_cells(m: &MultiIndex) -> impl Iterator<Item = Cell> + '_ {
    m.exps().iter().map(|&e| Cell::from(e))
}

fn cmd_moment(ctx: &Context, exponents: Option<&str>, grid: Option<&str>, scale: GridScale) -> Result<ExperimentReport> {
    let t = ctx.table()?;
    let n = t.domain().dim();
    let grid_str = match (grid, exponents) {
        (Some(g), _) => Some(g.to_owned()),
        (None, None) => Some("0:100:101".to_owned()),
        (None, Some(_)) => None,
    };
    let mut params = vec![("x_scale", format!("{scale:?}").to_lowercase())];
    if let Some(g) = &grid_str {
        params.push(("x_grid", g.clone()));
    }
    if let Some(e) = exponents {
        params.push(("exponents", e.to_owned()));
    }
    let mut r = ctx.report("moment", &["x", "log_phi", "rel_err_est"], &params);
    if let Some(g) = &grid_str {
        let xs = parse_grid(g, scale)?;
        let ss: Vec<Vec<f64>> = xs
            .iter()
            .map(|&x| {
                let mut s = vec![0.0; n];
                s[0] = x;
                s
            })
            .collect();
        let ms = t.moments_par(&ss)?;
        let mut worst: f64 = 0.0;
        for (x, m) in xs.iter().zip(&ms) {
            worst = worst.max(m.rel_err);
            r.push_row(vec![Cell::Real(*x), Cell::Real(m.value.logmag()), Cell::Real(m.rel_err)]);
        }
        r.set("points", xs.len());
        r.set("max_rel_err_est", worst);
    }
    if let Some(e) = exponents {
        let s = parse_reals(e)?;
        let m = t.moment(&s)?;
        r.set("log_g", m.value.logmag());
        r.set("g", m.value.to_f64());
        r.set("g_rel_err_est", m.rel_err);
    }
    ctx.store(&t)?;
    Ok(r)
}

fn cmd_kernel(ctx: &Context, at: &str, degree: u32) -> Result<ExperimentReport> {
    let t = ctx.table()?;
    let n = t.domain().dim();
    let pts = parse_complex(at)?;
    if pts.len() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            got: pts.len(),
        });
    }
    for p in [&pts[..n], &pts[n..]] {
        let r: Vec<f64> = p.iter().map(|c| c.norm()).collect();
        if !t.domain().is_interior(&r) {
            return Err(Error::Domain(format!("point {p:?} is not inside {}", t.domain().label())));
        }
    }
    let kern = TruncatedKernel::new(t.as_ref(), degree)?;
    let v = kern.eval(&pts[..n], &pts[n..])?;
    let mut r = ctx.report(
        "kernel",
        &["re", "im", "abs", "tail_bound", "degree"],
        &[("at", at.to_owned()), ("degree", degree.to_string())],
    );
    r.push_row(vec![
        Cell::Real(v.value.re),
        Cell::Real(v.value.im),
        Cell::Real(v.value.norm()),
        Cell::Real(v.tail_bound),
        Cell::from(v.degree),
    ]);
    r.set("value_re", v.value.re);
    r.set("value_im", v.value.im);
    r.set("tail_bound", v.tail_bound);
    r.set("degree", v.degree);
    if let Some(w) = &v.warning {
        r.set("warning", w.clone());
    }
    ctx.store(&t)?;
    Ok(r)
}

fn cmd_project(ctx: &Context, monomial: &str, degree: Option<u32>) -> Result<ExperimentReport> {
    let t = ctx.table()?;
    let (a, b) = monomial
        .split_once(':')
        .ok_or_else(|| parse_err("monomial (a1,a2:b1,b2)", monomial))?;
    let f = MonomialFunction::new(parse_index(a)?, parse_index(b)?, LogValue::ONE)?;
    if f.dim() != t.domain().dim() {
        return Err(Error::DimensionMismatch {
            expected: t.domain().dim(),
            got: f.dim(),
        });
    }
    let proj = match degree {
        Some(j) => TruncatedKernel::new(t.as_ref(), j)?.project(t.as_ref(), &f)?,
        None => project_monomial(t.as_ref(), &f)?,
    };
    let mut params = vec![("monomial", monomial.to_owned())];
    if let Some(j) = degree {
        params.push(("degree", j.to_string()));
    }
    let mut r = ctx.report("project", &["a", "b", "exponent", "coefficient", "log_coefficient"], &params);
    match &proj {
        Some(g) => {
            r.push_row(vec![
                f.a.to_string().into(),
                f.b.to_string().into(),
                g.a.to_string().into(),
                Cell::Real(g.scale.to_f64()),
                Cell::Real(g.scale.logmag()),
            ]);
            r.set("exponent", g.a.to_string());
            r.set("coefficient", g.scale.to_f64());
            r.set("log_coefficient", g.scale.logmag());
        }
        None => r.set("coefficient", 0.0),
    }
    ctx.store(&t)?;
    Ok(r)
}

fn cmd_blowup(ctx: &Context, p: f64, k: &str, m_min: u64, m_max: u64) -> Result<ExperimentReport> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("p must be > 1, got {p}")));
    }
    let t = ctx.table()?;
    let ms = m_schedule(m_min, m_max);
    if ms.is_empty() {
        return Err(Error::Domain(format!("empty m range [{m_min}, {m_max}]")));
    }
    if p > 2.0 {
        let mut r = ctx.report(
            "blowup",
            &["m", "sqrt_m", "log_bound"],
            &[
                ("p", p.to_string()),
                ("k", "auto".into()),
                ("m_min", m_min.to_string()),
                ("m_max", m_max.to_string()),
            ],
        );
        let pts = ms
            .iter()
            .map(|&m| duality_point(t.as_ref(), p, m))
            .collect::<Result<Vec<_>>>()?;
        for d in &pts {
            r.push_row(vec![Cell::from(d.m), Cell::Real((d.m as f64).sqrt()), Cell::Real(d.log_bound)]);
        }
        let max = pts.iter().map(|d| d.log_bound).fold(f64::NEG_INFINITY, f64::max);
        r.set("method", "duality");
        r.set("p_conj", pts[0].p_conj);
        r.set("k", pts[0].k);
        r.set("max_log_bound", max);
        ctx.store(&t)?;
        return Ok(r);
    }
    let k = match k {
        "auto" => minimal_k(p)?,
        s => s.parse::<u32>().map_err(|_| parse_err("k", s))?,
    };
    let mut r = ctx.report(
        "blowup",
        &["m", "sqrt_m", "log_ratio", "phi_2km", "phi_2k1m", "phi_pk1m", "phi_pk_1m"],
        &[
            ("p", p.to_string()),
            ("k", k.to_string()),
            ("m_min", m_min.to_string()),
            ("m_max", m_max.to_string()),
        ],
    );
    let sweep = blowup_sweep(t.as_ref(), p, k, &ms)?;
    for b in &sweep.points {
        let mut row = vec![Cell::from(b.m), Cell::Real((b.m as f64).sqrt()), Cell::Real(b.log_ratio)];
        row.extend(b.components.iter().map(|&c| Cell::Real(c)));
        r.push_row(row);
    }
    let max = sweep.points.iter().map(|b| b.log_ratio).fold(f64::NEG_INFINITY, f64::max);
    r.set("k", k);
    r.set("points", sweep.points.len());
    r.set("max_log_ratio", max);
    r.set("max_ratio", max.exp());
    if let Some(m) = sweep.capped_at {
        r.set("capped_at", m);
    }
    let coef = phi_sqrt_coefficient(t.domain(), t.weight());
    if sweep.points.len() >= 3 {
        let fit = fit_blowup_slope(&sweep.points, coef)?;
        r.set("slope", fit.slope);
        r.set("predicted_slope", fit.predicted);
        r.set("c_pk", fit.c_raw);
        r.set("rel_gap", fit.rel_gap);
    }
    if coef == 0.0 {
        r.set("unweighted_disc_limit", unweighted_limit(p, k));
    }
    ctx.store(&t)?;
    Ok(r)
}

struct SobolevArgs<'a> {
    check: SobolevCheck,
    q: QChoice,
    max_degree: Option<u32>,
    max_beta: u32,
    window: &'a str,
    k: u32,
    kernel_degree: Option<u32>,
}

fn fitted_q(spec: &QuadratureSpec) -> Result<f64> {
    let grid = log_spaced(1e2, 1e5, 40);
    Ok(fit_kappa_exponent(&grid, spec)?.poly_exponent)
}

fn cmd_sobolev(ctx: &Context, a: &SobolevArgs) -> Result<ExperimentReport> {
    let t = ctx.table()?;
    let n = t.domain().dim();
    let mut params = vec![
        ("check", format!("{:?}", a.check).to_lowercase()),
        ("max_beta", a.max_beta.to_string()),
    ];
    let r = match a.check {
        SobolevCheck::Dse => {
            let (lo, hi) = a
                .window
                .split_once(':')
                .and_then(|(l, h)| Some((l.trim().parse::<u32>().ok()?, h.trim().parse::<u32>().ok()?)))
                .ok_or_else(|| parse_err("window (lo:hi)", a.window))?;
            let q = match a.q {
                QChoice::Paper => NOMINAL_Q,
                QChoice::Fitted => fitted_q(&ctx.quad())?,
            };
            params.push(("window", a.window.to_owned()));
            params.push(("q", format!("{:?}", a.q).to_lowercase()));
            let mut cols = index_columns("gamma", n);
            cols.extend(["log_d2".into(), "normalized".into()]);
            let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
            let mut r = ctx.report("sobolev", &refs, &params);
            let band = dse_band(&t, lo, hi, q)?;
            for p in &band.points {
                let mut row: Vec<Cell> = index_cells(&p.gamma).collect();
                row.extend([Cell::Real(p.log_d2), Cell::Real(p.normalized)]);
                r.push_row(row);
            }
            r.set("q_used", q);
            r.set("width_factor", band.width_factor());
            r.set("normalized_min", band.min);
            r.set("normalized_max", band.max);
            r
        }
        SobolevCheck::Key => {
            let max_alpha = a.max_degree.unwrap_or(60);
            params.push(("max_degree", max_alpha.to_string()));
            let mut cols = index_columns("alpha", n);
            cols.extend(index_columns("beta", n));
            cols.extend(["ratio".into(), "sqrt_expr".into(), "binom_part".into()]);
            let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
            let mut r = ctx.report("sobolev", &refs, &params);
            let rows = key_sweep(&t, max_alpha, a.max_beta)?;
            let mut ratio_min = f64::INFINITY;
            let mut ratio_max: f64 = 0.0;
            let mut sqrt_rel: f64 = 0.0;
            let mut binom_max = f64::NEG_INFINITY;
            for k in &rows {
                ratio_min = ratio_min.min(k.ratio);
                ratio_max = ratio_max.max(k.ratio);
                binom_max = binom_max.max(k.binom_part);
                if k.beta.total() > 0 {
                    sqrt_rel = sqrt_rel.max(k.sqrt_expr / (2.0 * f64::from(k.beta.total())));
                }
                let mut row: Vec<Cell> = index_cells(&k.alpha).chain(index_cells(&k.beta)).collect();
                row.extend([Cell::Real(k.ratio), Cell::Real(k.sqrt_expr), Cell::Real(k.binom_part)]);
                r.push_row(row);
            }
            r.set("ratio_min", ratio_min);
            r.set("ratio_max", ratio_max);
            r.set("sqrt_expr_over_2beta_max", sqrt_rel);
            r.set("binom_part_max", binom_max);
            r
        }
        SobolevCheck::Mbeta => {
            let max_alpha = a.max_degree.unwrap_or(200);
            params.push(("max_degree", max_alpha.to_string()));
            let mut cols = index_columns("beta", n);
            cols.extend(["sup_half".into(), "sup_full".into(), "growth".into()]);
            let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
            let mut r = ctx.report("sobolev", &refs, &params);
            let mut worst: f64 = 0.0;
            let mut sup: f64 = 0.0;
            for beta in MultiIndex::up_to_total(n, a.max_beta) {
                let half = m_beta_sup(&t, &beta, max_alpha / 2)?;
                let full = m_beta_sup(&t, &beta, max_alpha)?;
                let growth = full / half - 1.0;
                worst = worst.max(growth);
                sup = sup.max(full);
                let mut row: Vec<Cell> = index_cells(&beta).collect();
                row.extend([Cell::Real(half), Cell::Real(full), Cell::Real(growth)]);
                r.push_row(row);
            }
            r.set("sup", sup);
            r.set("max_growth", worst);
            r
        }
        SobolevCheck::Adjoint => {
            let max_gamma = a.max_degree.unwrap_or(12);
            params.push(("max_degree", max_gamma.to_string()));
            let mut cols = index_columns("gamma", n);
            cols.extend(index_columns("beta", n));
            cols.extend(["log_lhs".into(), "log_rhs".into(), "rel_err".into()]);
            let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
            let mut r = ctx.report("sobolev", &refs, &params);
            let mut worst: f64 = 0.0;
            for gamma in MultiIndex::up_to_total(n, max_gamma) {
                for beta in MultiIndex::up_to_total(n, gamma.total()) {
                    if !beta.le(&gamma) {
                        continue;
                    }
                    let c = adjoint_check(&t, &gamma, &beta)?;
                    worst = worst.max(c.rel_err);
                    let mut row: Vec<Cell> = index_cells(&gamma).chain(index_cells(&beta)).collect();
                    row.extend([Cell::Real(c.lhs.logmag()), Cell::Real(c.rhs.logmag()), Cell::Real(c.rel_err)]);
                    r.push_row(row);
                }
            }
            r.set("max_rel_err", worst);
            r
        }
        SobolevCheck::Ratio => {
            let max_deg = a.max_degree.unwrap_or(40);
            params.push(("max_degree", max_deg.to_string()));
            params.push(("k", a.k.to_string()));
            if let Some(j) = a.kernel_degree {
                params.push(("kernel_degree", j.to_string()));
            }
            let kern = a
                .kernel_degree
                .map(|j| TruncatedKernel::new(t.as_ref(), j))
                .transpose()?;
            let mut cols = index_columns("a", n);
            cols.extend(index_columns("b", n));
            cols.push("ratio".into());
            let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
            let mut r = ctx.report("sobolev", &refs, &params);
            let sweep = sobolev_ratio_sweep(&t, a.k, max_deg, kern.as_ref())?;
            let half = max_deg / 2;
            let mut sup_half: f64 = 0.0;
            for row in &sweep.rows {
                if row.a.total() + row.b.total() <= half && row.b.total() > 0 {
                    sup_half = sup_half.max(row.ratio);
                }
                let mut cells: Vec<Cell> = index_cells(&row.a).chain(index_cells(&row.b)).collect();
                cells.push(Cell::Real(row.ratio));
                r.push_row(cells);
            }
            r.set("sup", sweep.sup);
            r.set("sup_non_holomorphic", sweep.sup_non_holomorphic);
            r.set("sup_non_holomorphic_half_degree", sup_half);
            r
        }
    };
    ctx.store(&t)?;
    Ok(r)
}

fn cmd_kappa(ctx: &Context, grid: &str) -> Result<ExperimentReport> {
    let xs = parse_grid(grid, GridScale::Log)?;
    let spec = ctx.quad();
    let fit = fit_kappa_exponent(&xs, &spec)?;
    let mut r = ctx.report(
        "kappa-fit",
        &["x", "log_i", "fitted", "residual"],
        &[("x_grid", grid.to_owned())],
    );
    for &x in &xs {
        let l = boundary_moment_i(x, &spec)?.value.logmag();
        let f = -fit.slope2sqrt * x.sqrt() - fit.poly_exponent * x.ln() + fit.constant;
        r.push_row(vec![Cell::Real(x), Cell::Real(l), Cell::Real(f), Cell::Real(l - f)]);
    }
    r.set("a", fit.slope2sqrt);
    r.set("q", fit.poly_exponent);
    r.set("q_reference", NOMINAL_Q);
    r.set("constant", fit.constant);
    r.set("rms_residual", fit.residual);
    r.set("condition", fit.condition);
    r.set("points", fit.points);
    Ok(r)
}

fn cmd_slice(ctx: &Context, z: &str, w1: &str, degree: u32, aux: AuxChoice) -> Result<ExperimentReport> {
    let t = ctx.table()?;
    let zs = parse_complex(z)?;
    let w = parse_complex(w1)?;
    let [w] = w[..] else {
        return Err(parse_err("w1", w1));
    };
    let mode = match aux {
        AuxChoice::Reduction => AuxMode::Reduction,
        AuxChoice::Quadrature => AuxMode::Quadrature,
    };
    let disc = AuxDiscTable::new(t.clone(), mode)?;
    let ko = TruncatedKernel::new(t.as_ref(), degree)?;
    let kd = TruncatedKernel::new(&disc, degree)?;
    let s = verify_slice_identity(&ko, &kd, &t, &zs, w)?;
    let mut r = ctx.report(
        "slice-check",
        &["lhs_re", "lhs_im", "rhs_re", "rhs_im", "abs_diff", "rel_err"],
        &[
            ("z", z.to_owned()),
            ("w1", w1.to_owned()),
            ("degree", degree.to_string()),
            ("aux", format!("{aux:?}").to_lowercase()),
        ],
    );
    r.push_row(vec![
        Cell::Real(s.lhs.re),
        Cell::Real(s.lhs.im),
        Cell::Real(s.rhs.re),
        Cell::Real(s.rhs.im),
        Cell::Real(s.abs_diff),
        Cell::Real(s.rel_err),
    ]);
    r.set("rel_err", s.rel_err);
    r.set("abs_diff", s.abs_diff);
    ctx.store(&t)?;
    Ok(r)
}
