use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use tori::continuation::{
    build_chart, continue_family, frequency_twist, sample_torus, solve_torus, FamilyOptions,
    SampleOptions, TorusFamily, TorusOptions,
};
use tori::floquet::{check_hypothesis_iii, monodromy};
use tori::hamiltonian::{sample_neighbourhood, SamplingConfig};
use tori::models::{make_system, Model, ModelSpec};
use tori::reducible::{determinant_criterion, search_alpha};
use tori::{Flow, OdeTolerances, Vector};

use crate::config::{Command, ConfigError, RunConfig};

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numeric(tori::Error),
    Io(io::Error),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Numeric(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<tori::Error> for RunError {
    fn from(e: tori::Error) -> Self {
        RunError::Numeric(e)
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

impl From<csv::Error> for RunError {
    fn from(e: csv::Error) -> Self {
        RunError::Io(io::Error::other(e))
    }
}

impl From<serde_json::Error> for RunError {
    fn from(e: serde_json::Error) -> Self {
        RunError::Io(e.into())
    }
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// All checks and criteria held.
    pub pass: bool,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        2
    }
}

/// Appends lines to `run.log` and mirrors them to the logger.
struct RunLog {
    file: File,
}

impl RunLog {
    fn create(dir: &Path, config_text: &str) -> io::Result<Self> {
        let mut file = File::create(dir.join("run.log"))?;
        writeln!(file, "# tori {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(file, "# config")?;
        for line in config_text.lines() {
            writeln!(file, "{line}")?;
        }
        writeln!(file, "# log")?;
        Ok(Self { file })
    }

    fn line(&mut self, msg: &str) -> io::Result<()> {
        log::info!("{msg}");
        writeln!(self.file, "{msg}")
    }
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    model: Model,
    dir: &'a Path,
    log: RunLog,
    files: Vec<PathBuf>,
}

impl Ctx<'_> {
    fn ode(&self) -> OdeTolerances {
        OdeTolerances {
            rel: self.cfg.tolerances.ode_rel,
            abs: self.cfg.tolerances.ode_abs,
            ..Default::default()
        }
    }

    fn flow(&self, eps: f64) -> Flow<'_> {
        Flow::new(&self.model.system, eps).with_tolerances(self.ode())
    }

    fn torus_options(&self) -> TorusOptions {
        TorusOptions {
            fixed_point: self.cfg.tolerances.fixed_point,
            tol_unit: self.cfg.tolerances.tol_unit,
            kappa: self.cfg.twist_kappa,
            ..Default::default()
        }
    }

    fn alpha(&self) -> &[i64] {
        self.cfg
            .alpha
            .as_deref()
            .expect("cycle is set for this command")
    }

    fn create(&mut self, name: &str) -> io::Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let file = File::create(&path)?;
        self.files.push(path);
        Ok(BufWriter::new(file))
    }

    fn create_csv(&mut self, name: &str) -> io::Result<csv::Writer<File>> {
        let path = self.dir.join(name);
        let file = File::create(&path)?;
        self.files.push(path);
        Ok(csv::Writer::from_writer(file))
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

/// Floats in shortest round-trip form.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn join<I: IntoIterator<Item = String>>(items: I) -> String {
    items.into_iter().collect::<Vec<_>>().join(",")
}

/// Runs `cfg`, writing artifacts and `run.log` into `dir`.
pub fn execute(cfg: &RunConfig, config_text: &str, dir: &Path) -> Result<Outcome, RunError> {
    fs::create_dir_all(dir)?;
    let mut log = RunLog::create(dir, config_text)?;
    log.line(&format!(
        "command {:?} on {}",
        cfg.command,
        cfg.system.name()
    ))?;
    let model = make_system(&cfg.system)?;
    let mut ctx = Ctx {
        cfg,
        model,
        dir,
        log,
        files: Vec::new(),
    };
    let result = match cfg.command {
        Command::Check => check(&mut ctx),
        Command::Floquet => floquet(&mut ctx),
        Command::Nondeg => nondeg(&mut ctx),
        Command::Continue => continuation(&mut ctx),
        Command::Freq => freq(&mut ctx),
    };
    match result {
        Ok((pass, summary)) => {
            ctx.log.line(&format!(
                "{} - {summary}",
                if pass { "pass" } else { "fail" }
            ))?;
            Ok(Outcome {
                pass,
                summary,
                files: ctx.files,
            })
        }
        Err(e) => {
            ctx.log.line(&format!("error - {e}"))?;
            Err(e)
        }
    }
}

fn check(ctx: &mut Ctx) -> Result<(bool, String), RunError> {
    let c = ctx.cfg.check;
    let samples = sample_neighbourhood(
        std::slice::from_ref(&ctx.model.seed.base),
        &SamplingConfig {
            count: c.samples,
            radius: c.radius,
            seed: c.seed,
        },
    );
    let reports = ctx
        .cfg
        .eps_grid
        .iter()
        .map(|&eps| ctx.model.system.check_hypotheses(&samples, eps, c.tol))
        .collect::<tori::Result<Vec<_>>>()?;
    for r in &reports {
        ctx.log.line(&format!(
            "eps {}: max bracket {:e}, min singular value {:e}, pass {}",
            num(r.eps),
            r.max_bracket,
            r.min_singular_value,
            r.pass
        ))?;
    }
    let pass = reports.iter().all(|r| r.pass);
    ctx.write_json(
        "hypotheses.json",
        &json!({ "system": &ctx.cfg.system, "reports": reports }),
    )?;
    let failed = reports.iter().filter(|r| !r.pass).count();
    Ok((
        pass,
        format!(
            "{failed} of {} parameter values fail involution or independence",
            reports.len()
        ),
    ))
}

/// Base point of the torus at the seed level for parameter `eps`: the seed
/// itself where it is known to stay invariant, otherwise the section point
/// of the continued torus.
fn torus_base(ctx: &Ctx, eps: f64) -> Result<(Vector, tori::PeriodLattice), RunError> {
    let seed = &ctx.model.seed;
    let flow = ctx.flow(eps);
    let exact = eps == 0.0 || matches!(ctx.cfg.system, ModelSpec::ActionOscillators { .. });
    if exact {
        return Ok((
            seed.base.clone(),
            flow.period_lattice(&seed.base, &seed.lattice_guess)?,
        ));
    }
    let chart = build_chart(&ctx.model.system, &seed.base, 0.0)?;
    let lattice = ctx
        .flow(0.0)
        .period_lattice(&seed.base, &seed.lattice_guess)?;
    let y0 = Vector::zeros(chart.transverse_dim());
    let rec = solve_torus(
        &flow,
        &chart,
        ctx.alpha(),
        &lattice.basis,
        &seed.beta0,
        &y0,
        &ctx.torus_options(),
    )?;
    Ok((rec.section_point, rec.lattice))
}

fn floquet(ctx: &mut Ctx) -> Result<(bool, String), RunError> {
    let eps = ctx.cfg.floquet.eps;
    let (base, lattice) = torus_base(ctx, eps)?;
    let flow = ctx.flow(eps);
    let alpha = ctx.alpha().to_vec();
    let pv = flow.find_period_vector(&base, &alpha, &lattice.period(&alpha))?;
    let report = monodromy(&flow, &base, &pv, ctx.cfg.tolerances.tol_unit)?;
    let verdict = check_hypothesis_iii(&report, ctx.model.system.s());
    for w in &report.warnings {
        ctx.log.line(&format!("warning: {w}"))?;
    }

    let mut w = ctx.create_csv("multipliers.csv")?;
    w.write_record(["index", "re", "im", "abs_minus_one"])?;
    for (i, l) in report.multipliers.iter().enumerate() {
        w.write_record([i.to_string(), num(l.re), num(l.im), num((l - 1.0).norm())])?;
    }
    w.flush()?;
    ctx.write_json(
        "monodromy.json",
        &json!({ "report": &report, "hypothesis_iii": &verdict }),
    )?;
    Ok((
        verdict.pass,
        format!(
            "multiplier 1 has multiplicity {} (expected {}) at eps = {}",
            verdict.unit_multiplicity,
            verdict.expected,
            num(eps)
        ),
    ))
}

fn nondeg(ctx: &mut Ctx) -> Result<(bool, String), RunError> {
    let fd = &ctx.model.frequencies;
    let tol = ctx.cfg.tolerances.tol_int;
    let result = match &ctx.cfg.alpha {
        Some(alpha) => Some(determinant_criterion(fd, alpha, tol)?),
        None => search_alpha(fd, ctx.cfg.nondeg.max_norm, tol)?,
    };
    match result {
        Some(res) => {
            ctx.write_json("criterion.json", &res)?;
            let verdict = if res.nondegenerate {
                "nondegenerate"
            } else {
                "degenerate"
            };
            Ok((
                res.nondegenerate,
                format!(
                    "cycle {:?} is {verdict}, margin {}",
                    res.alpha,
                    num(res.margin)
                ),
            ))
        }
        None => {
            let max_norm = ctx.cfg.nondeg.max_norm;
            ctx.write_json(
                "criterion.json",
                &json!({ "alpha": null, "nondegenerate": false, "max_norm": max_norm, "tol_int": tol }),
            )?;
            Ok((
                false,
                format!("no nondegenerate cycle with sup norm <= {max_norm}"),
            ))
        }
    }
}

fn run_family(ctx: &mut Ctx) -> Result<TorusFamily, RunError> {
    let opts = FamilyOptions {
        torus: ctx.torus_options(),
        ode: ctx.ode(),
        ..Default::default()
    };
    let cfg = ctx.cfg;
    let fam = continue_family(
        &ctx.model.system,
        &ctx.model.seed,
        ctx.alpha(),
        &cfg.beta_grid,
        &cfg.eps_grid,
        &opts,
    )?;
    for &i in &fam.visit_order {
        let node = &fam.nodes[i];
        ctx.log.line(&format!(
            "node {i} beta {} eps {}: {:?}",
            join(node.beta.iter().map(|b| num(*b))),
            num(node.eps),
            node.status
        ))?;
    }
    write_family_csv(ctx, &fam)?;
    ctx.write_json("family.json", &fam)?;
    Ok(fam)
}

fn write_family_csv(ctx: &mut Ctx, fam: &TorusFamily) -> Result<(), RunError> {
    let s = ctx.model.system.s();
    let mut w = ctx.create_csv("family.csv")?;
    let mut header: Vec<String> = (1..=s).map(|i| format!("beta_{i}")).collect();
    header.extend(["eps", "y_norm", "residual"].map(String::from));
    header.extend((1..=s).map(|i| format!("freq_{i}")));
    header.extend(["converged", "unit_multiplicity"].map(String::from));
    w.write_record(&header)?;
    for node in &fam.nodes {
        let mut row: Vec<String> = node.beta.iter().map(|b| num(*b)).collect();
        row.push(num(node.eps));
        match &node.record {
            Some(rec) => {
                row.push(num(rec.y_star.amax()));
                row.push(num(rec.residual));
                row.extend(rec.frequencies.iter().map(|f| num(*f)));
                row.push("1".into());
                row.push(rec.unit_multiplicity.to_string());
            }
            None => {
                row.extend(std::iter::repeat_n(String::new(), 2 + s));
                row.push("0".into());
                row.push(String::new());
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn continuation(ctx: &mut Ctx) -> Result<(bool, String), RunError> {
    let fam = run_family(ctx)?;
    let k = ctx.cfg.sampling.grid_per_cycle;
    let mut worst = (0.0_f64, 0.0_f64, 0.0_f64);
    if k > 0 {
        let (n, s) = (ctx.model.system.n(), ctx.model.system.s());
        let mut w = ctx.create_csv("torus_samples.csv")?;
        let mut header = vec!["record_id".to_string()];
        header.extend((1..=s).map(|i| format!("theta_{i}")));
        header.extend((1..=2 * n).map(|i| format!("x_{i}")));
        header.push("F_dev_max".into());
        w.write_record(&header)?;
        let opts = SampleOptions {
            grid_per_cycle: k,
            ..Default::default()
        };
        for (id, node) in fam.nodes.iter().enumerate() {
            let Some(rec) = &node.record else { continue };
            let samples = sample_torus(&ctx.flow(rec.eps), rec, &opts)?;
            worst.0 = worst.0.max(samples.max_f_dev);
            worst.1 = worst.1.max(
                samples
                    .flow_invariance_distance
                    .max(samples.period_return_distance),
            );
            worst.2 = worst.2.max(samples.isotropy_defect);
            for ((th, x), dev) in samples
                .theta
                .iter()
                .zip(&samples.points)
                .zip(&samples.f_dev)
            {
                let mut row = vec![id.to_string()];
                row.extend(th.iter().map(|t| num(*t)));
                row.extend(x.iter().map(|v| num(*v)));
                row.push(num(*dev));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        ctx.log.line(&format!(
            "samples: max |F - beta| {:e}, invariance {:e}, isotropy {:e}",
            worst.0, worst.1, worst.2
        ))?;
    }
    let total = fam.nodes.len();
    let converged = fam.converged_count();
    Ok((
        converged == total,
        format!("{converged} of {total} nodes converged"),
    ))
}

fn freq(ctx: &mut Ctx) -> Result<(bool, String), RunError> {
    let fam = run_family(ctx)?;
    let step = Vector::from_vec(ctx.cfg.beta_step.clone());
    let report = frequency_twist(&fam, ctx.cfg.twist_kappa, &step, ctx.cfg.twist_tol)?;
    ctx.write_json("twist.json", &report)?;
    let pass = !report.degenerate && report.sign_stable;
    Ok((
        pass,
        format!(
            "{} twist determinants, |det| in [{:e}, {:e}], sign stable {}",
            report.entries.len(),
            report.min_abs_det,
            report.max_abs_det,
            report.sign_stable
        ),
    ))
}
