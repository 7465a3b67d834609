//! Figure and table scenarios as data tables.

use cris_core::analytic::{analyze, outage_probability, Analysis};
use cris_core::mcsim::{ReplicateBatch, Simulator};
use cris_core::sysmodel::{CorrelationKind, SurfaceGeometry, SystemConfig};

use crate::config::{db_to_linear, setup_layout, ExperimentConfig};
use crate::table::{Cell, ResultTable};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Scenario {
    /// Mean SNR against area for both correlation models.
    Fig2,
    /// Spectral-efficiency bound and Monte Carlo mean against kappa and area.
    Fig3,
    /// Gamma and empirical outage probability against the SNR threshold.
    Fig4,
    /// Channel hardening (CV^2) against area, kappa and layout.
    Fig5,
    /// Bound, dominant error term and their ratio against kappa.
    Table1,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Fig2 => "fig2",
            Scenario::Fig3 => "fig3",
            Scenario::Fig4 => "fig4",
            Scenario::Fig5 => "fig5",
            Scenario::Table1 => "table1",
        }
    }
}

fn aspect(system: &SystemConfig) -> f64 {
    system.geometry.width_m() / system.geometry.height_m()
}

fn resize(system: &SystemConfig, area: f64, aspect: f64) -> Result<SystemConfig, CliError> {
    Ok(system.with_geometry(SurfaceGeometry::with_area(area, aspect)?))
}

fn required<'a, T>(list: &'a Option<Vec<T>>, name: &str, scenario: Scenario) -> Result<&'a [T], CliError> {
    list.as_deref().ok_or_else(|| CliError::Config(format!("scenario {} needs sweep.{name}", scenario.name())))
}

fn analysis(system: &SystemConfig, cfg: &ExperimentConfig) -> Result<Analysis, CliError> {
    Ok(analyze(system, &cfg.quadrature)?)
}

fn simulate(system: &SystemConfig, cfg: &ExperimentConfig) -> Result<ReplicateBatch, CliError> {
    let grid = cfg.grid.resolve(&system.geometry)?;
    Ok(Simulator::new(system, &grid)?.run(cfg.replicates, cfg.seed)?)
}

pub fn run_scenario(scenario: Scenario, cfg: &ExperimentConfig) -> Result<ResultTable, CliError> {
    cfg.validate()?;
    let mut table = match scenario {
        Scenario::Fig2 => fig2(cfg)?,
        Scenario::Fig3 => fig3(cfg)?,
        Scenario::Fig4 => fig4(cfg)?,
        Scenario::Fig5 => fig5(cfg)?,
        Scenario::Table1 => table1(cfg)?,
    };
    table.stamp(scenario.name(), cfg);
    Ok(table)
}

/// One row per `(area, model)`, areas outermost.
fn fig2(cfg: &ExperimentConfig) -> Result<ResultTable, CliError> {
    let areas = required(&cfg.sweep.areas_m2, "areas_m2", Scenario::Fig2)?;
    let models = cfg.sweep.models.clone().unwrap_or(vec![CorrelationKind::Sinc, CorrelationKind::Jakes]);
    let base = &cfg.system;
    let mut table = ResultTable::new(&["area_m2", "model", "mu1_analytic", "mean_snr_mc", "se_mc"]);
    for &area in areas {
        for &kind in &models {
            let system = resize(&cfg.with_model(base, kind, base.correlation.kappa), area, aspect(base))?;
            let a = analysis(&system, cfg)?;
            let snr = simulate(&system, cfg)?.summary.snr;
            table.push(vec![area.into(), kind.label().into(), a.snr.mu1.into(), snr.mean.into(), snr.std_error.into()]);
        }
    }
    Ok(table)
}

/// One row per `(kappa, area)`, kappa outermost.
fn fig3(cfg: &ExperimentConfig) -> Result<ResultTable, CliError> {
    let base = &cfg.system;
    let kappas = required(&cfg.sweep.kappas, "kappas", Scenario::Fig3)?;
    let areas = cfg.sweep.areas_m2.clone().unwrap_or(vec![base.geometry.area_m2()]);
    let mut table = ResultTable::new(&["kappa", "area_m2", "se_bound", "mean_se_mc", "det"]);
    for &kappa in kappas {
        for &area in &areas {
            let system = resize(&cfg.with_model(base, base.correlation.kind, kappa), area, aspect(base))?;
            let a = analysis(&system, cfg)?;
            let se = simulate(&system, cfg)?.summary.se;
            table.push(vec![kappa.into(), area.into(), a.se_bound.into(), se.mean.into(), a.det.into()]);
        }
    }
    Ok(table)
}

/// One Monte Carlo batch per `(area, aspect, model)`, one row per threshold.
fn fig4(cfg: &ExperimentConfig) -> Result<ResultTable, CliError> {
    let base = &cfg.system;
    let thresholds = required(&cfg.sweep.thresholds_db, "thresholds_db", Scenario::Fig4)?;
    let areas = cfg.sweep.areas_m2.clone().unwrap_or(vec![base.geometry.area_m2()]);
    let aspects = cfg.sweep.aspects.clone().unwrap_or(vec![aspect(base)]);
    let models = cfg.sweep.models.clone().unwrap_or(vec![base.correlation.kind]);
    let mut table =
        ResultTable::new(&["area_m2", "aspect", "model", "snr_threshold_db", "outage_gamma", "outage_empirical"]);
    for &area in &areas {
        for &asp in &aspects {
            for &kind in &models {
                let system = resize(&cfg.with_model(base, kind, base.correlation.kappa), area, asp)?;
                let a = analysis(&system, cfg)?;
                let cdf = simulate(&system, cfg)?.empirical_cdf();
                for &t in thresholds {
                    let x = db_to_linear(t);
                    // Without variance the approximation is a step at the mean.
                    let gamma = match &a.gamma {
                        Some(fit) => outage_probability(fit, x),
                        None => f64::from(u8::from(x >= a.snr.mu1)),
                    };
                    table.push(vec![
                        area.into(),
                        asp.into(),
                        kind.label().into(),
                        t.into(),
                        gamma.into(),
                        cdf.eval(x).into(),
                    ]);
                }
            }
        }
    }
    Ok(table)
}

/// One row per `(setup, kappa, area)`, setups outermost.
fn fig5(cfg: &ExperimentConfig) -> Result<ResultTable, CliError> {
    let base = &cfg.system;
    let setups = required(&cfg.sweep.setups, "setups", Scenario::Fig5)?;
    let areas = cfg.sweep.areas_m2.clone().unwrap_or(vec![base.geometry.area_m2()]);
    let kappas = cfg.sweep.kappas.clone().unwrap_or(vec![base.correlation.kappa]);
    let mut table = ResultTable::new(&["area_m2", "kappa", "setup", "cv2_analytic", "cv2_mc"]);
    for name in setups {
        let mut laid_out = base.clone();
        if let Some((dy, drb, dx)) = setup_layout(name)? {
            laid_out.link = base.link.with_layout(dy, drb, dx);
        }
        for &kappa in &kappas {
            for &area in &areas {
                let system = resize(&cfg.with_model(&laid_out, base.correlation.kind, kappa), area, aspect(base))?;
                let a = analysis(&system, cfg)?;
                let mc = simulate(&system, cfg)?.summary.cv2;
                table.push(vec![area.into(), kappa.into(), name.as_str().into(), a.cv2.into(), mc.into()]);
            }
        }
    }
    Ok(table)
}

/// Analytic only: one row per kappa at the base geometry.
fn table1(cfg: &ExperimentConfig) -> Result<ResultTable, CliError> {
    let base = &cfg.system;
    let kappas = required(&cfg.sweep.kappas, "kappas", Scenario::Table1)?;
    let mut table = ResultTable::new(&["kappa", "seb", "det", "det_over_seb_pct"]);
    for &kappa in kappas {
        let a = analysis(&cfg.with_model(base, base.correlation.kind, kappa), cfg)?;
        let row: Vec<Cell> = vec![kappa.into(), a.se_bound.into(), a.det.into(), (100.0 * a.det / a.se_bound).into()];
        table.push(row);
    }
    Ok(table)
}
