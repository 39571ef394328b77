//! The named scenarios. Each resolves its settings from a merged
//! [`ScenarioConfig`] and produces a [`Table`]; grid points are evaluated in
//! parallel and gathered back in grid order.

use std::f64::consts::{FRAC_PI_2, TAU};

use duality_core::correlation::{
    distinguishable_coincidence, distinguishable_coincidence_substituted, hom_probabilities, record_from_parameters,
    record_from_state, CorrelationRecord, ParametricCorrelations,
};
use duality_core::duality::{complementarity, visibility_phase, DualityReport, DualityRequest, Field, Metric};
use duality_core::fock::{mean_photon_number, QuantumState};
use duality_core::optics::{apply_network, hbs, phase_shifter, DistinguishabilityAngle};
use duality_core::states::{product_state, random_classical_two_mode, DEFAULT_TAIL_THRESHOLD};
use duality_core::{Error as CoreError, FockSpace, StateSpec};
use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::error::{CliError, Result};
use crate::format::{Cell, Table};
use crate::grid::{Grid, Spacing};

/// Allowed change of first/last grid rows when the cutoff is doubled.
pub const CUTOFF_DRIFT_TOL: f64 = 1e-6;
/// Endpoint and conservation checks inside a scenario.
pub const CHECK_TOL: f64 = 1e-9;
/// Largest four-mode Fock dimension simulated densely in `hom-dip`.
pub const NETWORK_DIM_LIMIT: usize = 4096;

const INT21: DualityRequest = DualityRequest::Intensity { n: 2, k: 1 };

fn sweep_grid(cfg: &ScenarioConfig, min: f64, max: f64, points: usize) -> Result<Grid> {
    let g = &cfg.grid;
    Grid::new(
        g.min.unwrap_or(min),
        g.max.unwrap_or(max),
        g.points.unwrap_or(points),
        g.spacing.unwrap_or(Spacing::Log),
    )
}

/// Angle scans always cover their full physical range.
fn fixed_range_grid(cfg: &ScenarioConfig, max: f64, points: usize, what: &str) -> Result<Grid> {
    let g = &cfg.grid;
    if g.min.is_some() || g.max.is_some() {
        return Err(CliError::Config(format!(
            "{what} scans a fixed range; grid bounds cannot be set"
        )));
    }
    if g.spacing == Some(Spacing::Log) {
        return Err(CliError::Config(format!(
            "{what} starts at 0 and cannot use a log grid"
        )));
    }
    Grid::new(0.0, max, g.points.unwrap_or(points), Spacing::Linear)
}

fn parse_spec(text: &Option<String>, default: &str, arm: &str) -> Result<StateSpec> {
    let text = text.as_deref().unwrap_or(default);
    text.parse()
        .map_err(|e: CoreError| CliError::Config(format!("input {arm} `{text}`: {e}")))
}

fn metric_cell(m: Option<Metric>) -> Cell {
    Cell::Num(m.unwrap_or(Metric::Undefined).as_f64())
}

fn sqrt_cell(m: Option<Metric>) -> Cell {
    Cell::Num(m.unwrap_or(Metric::Undefined).as_f64().sqrt())
}

fn duality_row(lead: f64, r: &DualityReport) -> Vec<Cell> {
    vec![
        Cell::Num(lead),
        Cell::Num(r.d.as_f64()),
        metric_cell(r.v_intensity),
        sqrt_cell(r.x_intensity),
        Cell::Flag(r.classical_complementarity_violated),
    ]
}

fn parametric_report(g2_aa: f64, g2_bb: f64, g2_ab: f64, zeta: f64) -> Result<DualityReport> {
    let p = ParametricCorrelations::new(g2_aa, g2_bb, g2_ab, zeta)?;
    Ok(complementarity(&record_from_parameters(&p), INT21)?)
}

fn drift_check(what: &str, base: f64, doubled: f64) -> Result<()> {
    let drift = (base - doubled).abs();
    if drift < CUTOFF_DRIFT_TOL || (base.is_nan() && doubled.is_nan()) {
        Ok(())
    } else {
        Err(CliError::Check(format!(
            "{what} moved by {drift:e} when the cutoff was doubled; raise --cutoff"
        )))
    }
}

/// D2, V2, sqrt(X2) against `g2_auto = g2_AA = g2_BB`.
#[derive(Debug, Clone, PartialEq)]
pub struct G2AutoSweep {
    pub grid: Grid,
    pub zeta: f64,
    pub g2_ab: f64,
}

impl G2AutoSweep {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        Ok(Self {
            grid: sweep_grid(cfg, 1e-2, 1e2, 201)?,
            zeta: cfg.parameters.zeta.unwrap_or(2.0),
            g2_ab: cfg.parameters.g2_ab.unwrap_or(1.0),
        })
    }

    pub fn row(&self, g2_auto: f64) -> Result<Vec<Cell>> {
        let r = parametric_report(g2_auto, g2_auto, self.g2_ab, self.zeta)?;
        Ok(duality_row(g2_auto, &r))
    }

    pub fn run(&self) -> Result<Table> {
        let rows: Vec<_> = self
            .grid
            .values()
            .into_par_iter()
            .map(|g| self.row(g))
            .collect::<Result<_>>()?;
        let mut t = Table::new(&["g2_auto", "D2", "V2", "sqrt_X2", "violated"]);
        rows.into_iter().for_each(|r| t.push(r));
        Ok(t)
    }
}

/// D2, V2, sqrt(X2) against the intensity ratio ζ.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaSweep {
    pub grid: Grid,
    pub g2_aa: f64,
    pub g2_bb: f64,
    pub g2_ab: f64,
}

impl ZetaSweep {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        let p = &cfg.parameters;
        Ok(Self {
            grid: sweep_grid(cfg, 1e-2, 1e2, 201)?,
            g2_aa: p.g2_aa.unwrap_or(0.25),
            g2_bb: p.g2_bb.unwrap_or(1.0),
            g2_ab: p.g2_ab.unwrap_or(1.0),
        })
    }

    pub fn row(&self, zeta: f64) -> Result<Vec<Cell>> {
        let r = parametric_report(self.g2_aa, self.g2_bb, self.g2_ab, zeta)?;
        Ok(duality_row(zeta, &r))
    }

    pub fn run(&self) -> Result<Table> {
        let rows: Vec<_> = self
            .grid
            .values()
            .into_par_iter()
            .map(|z| self.row(z))
            .collect::<Result<_>>()?;
        let mut t = Table::new(&["zeta", "D2", "V2", "sqrt_X2", "violated"]);
        rows.into_iter().for_each(|r| t.push(r));
        Ok(t)
    }
}

/// Two-mode product input shared by the state scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct StateInput {
    pub a: StateSpec,
    pub b: StateSpec,
    pub cutoff: usize,
    pub tail_tol: f64,
}

impl StateInput {
    fn from_config(cfg: &ScenarioConfig, default_a: &str, default_b: &str, default_cutoff: usize) -> Result<Self> {
        let tail_tol = cfg.parameters.tail_tol.unwrap_or(DEFAULT_TAIL_THRESHOLD);
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(CliError::Config(format!(
                "tail tolerance {tail_tol} must lie in (0, 1)"
            )));
        }
        Ok(Self {
            a: parse_spec(&cfg.input.a, default_a, "a")?,
            b: parse_spec(&cfg.input.b, default_b, "b")?,
            cutoff: cfg.parameters.cutoff.unwrap_or(default_cutoff),
            tail_tol,
        })
    }

    pub fn build(&self, cutoff: usize) -> Result<QuantumState> {
        Ok(product_state(&[self.a.clone(), self.b.clone()], cutoff, self.tail_tol)?)
    }
}

/// HOM coincidence against the internal-mode angle χ.
#[derive(Debug, Clone, PartialEq)]
pub struct HomDip {
    pub input: StateInput,
    pub grid: Grid,
}

/// How the coincidence column was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DipRoute {
    /// Full four-mode simulation with the lifted beamsplitter.
    Network,
    /// Output-mode substitution on the two-mode input (large cutoffs).
    Substitution,
}

impl HomDip {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        let input = StateInput::from_config(cfg, "fock(1)", "fock(1)", 4)?;
        if input.cutoff < 2 {
            return Err(CliError::Config("hom-dip needs --cutoff >= 2".into()));
        }
        Ok(Self {
            input,
            grid: fixed_range_grid(cfg, FRAC_PI_2, 51, "hom-dip")?,
        })
    }

    pub fn route(&self) -> DipRoute {
        match (self.input.cutoff + 1).checked_pow(4) {
            Some(d) if d <= NETWORK_DIM_LIMIT => DipRoute::Network,
            _ => DipRoute::Substitution,
        }
    }

    pub fn run(&self) -> Result<Table> {
        let state = self.input.build(self.input.cutoff)?;
        let hp = hom_probabilities(&record_from_state(&state, 2)?)?;
        let route = self.route();
        let chis = self.grid.values();
        let coincidences: Vec<f64> = chis
            .par_iter()
            .map(|&chi| {
                let angle = DistinguishabilityAngle::new(chi)?;
                match route {
                    DipRoute::Network => distinguishable_coincidence(&state, angle),
                    DipRoute::Substitution => distinguishable_coincidence_substituted(&state, angle),
                }
            })
            .collect::<std::result::Result<_, _>>()?;

        let (first, last) = (coincidences[0], coincidences[coincidences.len() - 1]);
        for (name, got, want) in [("chi = 0", first, hp.parallel), ("chi = pi/2", last, hp.perp)] {
            if (got - want).abs() > CHECK_TOL {
                return Err(CliError::Check(format!(
                    "coincidence at {name} is {got}, reference {want}"
                )));
            }
        }

        let doubled = self.input.build(2 * self.input.cutoff)?;
        for (&chi, &base) in [(&chis[0], &first), (&chis[chis.len() - 1], &last)] {
            let c = distinguishable_coincidence_substituted(&doubled, DistinguishabilityAngle::new(chi)?)?;
            drift_check(&format!("coincidence at chi = {chi}"), base, c)?;
        }

        let mut t = Table::new(&["chi", "coincidence", "P_parallel_ref", "P_perp_ref"]);
        for (chi, c) in chis.into_iter().zip(coincidences) {
            t.push(vec![
                Cell::Num(chi),
                Cell::Num(c),
                Cell::Num(hp.parallel),
                Cell::Num(hp.perp),
            ]);
        }
        Ok(t)
    }
}

/// First-order fringe: phase θ on B, then the beamsplitter.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeScan {
    pub input: StateInput,
    pub grid: Grid,
}

/// Offset and first-harmonic amplitude of `P_C(θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeFit {
    pub offset: f64,
    pub amplitude: f64,
    pub visibility: f64,
    /// `2|G'_AB|/(G_AA + G_BB)` from the input moments.
    pub expected: Metric,
}

impl FringeScan {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        let grid = fixed_range_grid(cfg, TAU, 65, "fringe-scan")?;
        if grid.points() < 4 {
            return Err(CliError::Config(
                "fringe-scan needs at least 4 points for the fit".into(),
            ));
        }
        Ok(Self {
            input: StateInput::from_config(cfg, "coherent(1+0i)", "coherent(1+0i)", 16)?,
            grid,
        })
    }

    fn outputs(state: &QuantumState, theta: f64) -> Result<(f64, f64)> {
        let net = phase_shifter(1, theta, 2)?.then(&hbs())?;
        let out = apply_network(state, &net)?;
        Ok((mean_photon_number(&out, 0)?, mean_photon_number(&out, 1)?))
    }

    /// Runs the scan and returns the table with the fit of the `P_C` column.
    pub fn run_with_fit(&self) -> Result<(Table, FringeFit)> {
        let state = self.input.build(self.input.cutoff)?;
        let rec = record_from_state(&state, 1)?;
        let total = rec.g1_aa()? + rec.g1_bb()?;
        let thetas = self.grid.values();
        let rows: Vec<(f64, f64)> = thetas
            .par_iter()
            .map(|&th| Self::outputs(&state, th))
            .collect::<Result<_>>()?;

        for (th, (pc, pd)) in thetas.iter().zip(&rows) {
            if (pc + pd - total).abs() > CHECK_TOL {
                return Err(CliError::Check(format!(
                    "P_C + P_D = {} at theta = {th}, input intensity {total}",
                    pc + pd
                )));
            }
        }

        // the last point repeats θ = 0, so the rest is one uniform period
        let period = &rows[..rows.len() - 1];
        let n = period.len() as f64;
        let offset = period.iter().map(|r| r.0).sum::<f64>() / n;
        let (mut re, mut im) = (0.0, 0.0);
        for (th, (pc, _)) in thetas.iter().zip(period) {
            re += pc * th.cos();
            im -= pc * th.sin();
        }
        let amplitude = 2.0 * re.hypot(im) / n;
        let visibility = if offset > 1e-12 { amplitude / offset } else { 0.0 };
        let expected = visibility_phase(&rec, 1)?;
        if let Metric::Value(v) = expected {
            if (visibility - v).abs() > CHECK_TOL {
                return Err(CliError::Check(format!(
                    "fitted fringe visibility {visibility} differs from moment value {v}"
                )));
            }
        }

        let doubled = self.input.build(2 * self.input.cutoff)?;
        for i in [0, rows.len() - 1] {
            let (pc, pd) = Self::outputs(&doubled, thetas[i])?;
            drift_check(&format!("P_C at theta = {}", thetas[i]), rows[i].0, pc)?;
            drift_check(&format!("P_D at theta = {}", thetas[i]), rows[i].1, pd)?;
        }

        let mut t = Table::new(&["theta", "P_C", "P_D"]);
        for (th, (pc, pd)) in thetas.into_iter().zip(rows) {
            t.push(vec![Cell::Num(th), Cell::Num(pc), Cell::Num(pd)]);
        }
        Ok((
            t,
            FringeFit {
                offset,
                amplitude,
                visibility,
                expected,
            },
        ))
    }

    pub fn run(&self) -> Result<Table> {
        Ok(self.run_with_fit()?.0)
    }
}

/// Where a `state-run` gets its moments.
#[derive(Debug, Clone, PartialEq)]
pub enum RunSource {
    Specs(StateInput),
    /// Seeded random mixture of coherent products.
    Classical {
        seed: u64,
        cutoff: usize,
    },
    Record(CorrelationRecord),
}

/// All duality quantities of one input, up to `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateRun {
    pub source: RunSource,
    pub order: usize,
}

impl StateRun {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        let order = cfg.parameters.order.unwrap_or(2);
        if order == 0 {
            return Err(CliError::Config("order must be at least 1".into()));
        }
        let has_specs = cfg.input.a.is_some() || cfg.input.b.is_some();
        let chosen = [has_specs, cfg.input.record.is_some(), cfg.parameters.seed.is_some()];
        if chosen.iter().filter(|&&c| c).count() > 1 {
            return Err(CliError::Config(
                "give state specs, a record file or a seed, not several".into(),
            ));
        }
        let cutoff = cfg.parameters.cutoff.unwrap_or(8);
        let source = if let Some(path) = &cfg.input.record {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunSource::Record(CorrelationRecord::from_kv(&text).map_err(|e| CliError::Config(e.to_string()))?)
        } else if let Some(seed) = cfg.parameters.seed {
            RunSource::Classical { seed, cutoff }
        } else {
            RunSource::Specs(StateInput::from_config(cfg, "fock(1)", "fock(1)", cutoff)?)
        };
        Ok(Self { source, order })
    }

    pub fn record(&self) -> Result<CorrelationRecord> {
        match &self.source {
            RunSource::Record(r) => Ok(r.clone()),
            RunSource::Classical { seed, cutoff } => {
                let state = random_classical_two_mode(*seed, &FockSpace::new(2, *cutoff)?);
                Ok(record_from_state(&state, self.order)?)
            }
            RunSource::Specs(input) => {
                let rec = record_from_state(&input.build(input.cutoff)?, self.order)?;
                let doubled = record_from_state(&input.build(2 * input.cutoff)?, self.order)?;
                for (key, value) in rec.to_pairs() {
                    let other = doubled
                        .to_pairs()
                        .into_iter()
                        .find(|(k, _)| *k == key)
                        .map_or(f64::NAN, |(_, v)| v);
                    drift_check(&key, value, other)?;
                }
                Ok(rec)
            }
        }
    }

    /// Every phase and intensity report the record supports.
    pub fn reports(&self, rec: &CorrelationRecord) -> Result<Vec<(String, DualityReport)>> {
        let mut requests = Vec::new();
        for n in 1..=self.order {
            requests.push((format!("phase{n}"), DualityRequest::Phase { n }));
        }
        for n in 2..=self.order {
            for k in 1..n {
                requests.push((format!("intensity{n}_{k}"), DualityRequest::Intensity { n, k }));
            }
        }
        let mut out = Vec::new();
        for (name, req) in requests {
            match complementarity(rec, req) {
                Ok(r) => out.push((name, r)),
                // moments above the cutoff or absent from the record file
                Err(CoreError::MissingMoment(_)) => {}
                Err(e) => return Err(e.into()),
            }
        }
        Ok(out)
    }

    pub fn run(&self) -> Result<Table> {
        let rec = self.record()?;
        let mut t = Table::new(&["quantity", "value"]);
        for (key, value) in rec.to_pairs() {
            t.push(vec![Cell::Text(key), Cell::Num(value)]);
        }
        for (name, report) in self.reports(&rec)? {
            for (field, value) in report.fields() {
                let cell = match value {
                    Field::Int(i) => Cell::Num(i as f64),
                    Field::Real(m) => Cell::Num(m.as_f64()),
                    Field::Flag(b) => Cell::Flag(b),
                };
                t.push(vec![Cell::Text(format!("{name}.{field}")), cell]);
            }
        }
        Ok(t)
    }
}
