//! Pinned regression values, each evaluated from normalized parameters and
//! from a simulated Fock-space state.

use std::fmt::Write as _;

use duality_core::correlation::{
    distinguishable_coincidence, hom_probabilities, multiport_coincidence, record_from_parameters, record_from_state,
    CorrelationRecord, ParametricCorrelations,
};
use duality_core::duality::{complementarity, witness_suite, DualityRequest, Metric};
use duality_core::optics::{hbs, DistinguishabilityAngle};
use duality_core::states::example2_pair;
use duality_core::{FockSpace, QuantumState, StateSpec};

use crate::error::Result;
use crate::format::fmt_g;

/// Largest accepted `|expected - computed|`.
pub const PAPER_TOL: f64 = 1e-9;

/// g²_AA = 0.25, g²_BB = g²_AB = 1 at ζ = 2 with ⟨N_B⟩ = 1/2, realized by
/// number-diagonal inputs with at most two photons per mode.
pub const ZETA_CROSSING_MODE_A: [f64; 3] = [0.125, 0.75, 0.125];
pub const ZETA_CROSSING_MODE_B: [f64; 3] = [0.625, 0.25, 0.125];

const INT21: DualityRequest = DualityRequest::Intensity { n: 2, k: 1 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pathway {
    Parametric,
    State,
    Network,
}

impl Pathway {
    fn name(self) -> &'static str {
        match self {
            Pathway::Parametric => "parametric",
            Pathway::State => "state",
            Pathway::Network => "network",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub pathway: Pathway,
    pub expected: Metric,
    pub computed: Metric,
}

impl CheckRow {
    pub fn delta(&self) -> f64 {
        match (self.expected, self.computed) {
            (Metric::Value(a), Metric::Value(b)) => (a - b).abs(),
            (a, b) if a == b => 0.0,
            _ => f64::INFINITY,
        }
    }

    pub fn passed(&self) -> bool {
        self.delta() <= PAPER_TOL
    }

    /// `name@pathway`.
    pub fn label(&self) -> String {
        format!("{}@{}", self.name, self.pathway.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PaperCheck {
    pub rows: Vec<CheckRow>,
}

/// Adds `delta` to G2_AB before any metric is evaluated (harness self-test).
fn perturbed(mut rec: CorrelationRecord, delta: f64) -> CorrelationRecord {
    if let Some(v) = rec.intensity_cross.get_mut(&(2, 1)) {
        *v += delta;
    }
    rec
}

fn number_pair(a: &[f64], b: &[f64], cutoff: usize) -> Result<QuantumState> {
    let specs = [
        StateSpec::number_diagonal(a.to_vec()),
        StateSpec::number_diagonal(b.to_vec()),
    ];
    Ok(duality_core::states::product_state(&specs, cutoff, 1e-12)?)
}

struct Collector {
    rows: Vec<CheckRow>,
}

impl Collector {
    fn push(&mut self, name: &str, pathway: Pathway, expected: Metric, computed: Metric) {
        self.rows.push(CheckRow {
            name: name.to_string(),
            pathway,
            expected,
            computed,
        });
    }

    fn value(&mut self, name: &str, pathway: Pathway, expected: f64, computed: f64) {
        self.push(name, pathway, Metric::Value(expected), Metric::Value(computed));
    }

    /// D2, V2, X2, sqrt(X2), V_HOM, P_parallel, P_perp and the Cauchy-Schwarz margin.
    fn second_order(
        &mut self,
        prefix: &str,
        pathway: Pathway,
        rec: &CorrelationRecord,
        want: &SecondOrder,
    ) -> Result<()> {
        let r = complementarity(rec, INT21)?;
        let x = r.x_intensity.unwrap_or(Metric::Undefined);
        let sqrt_x = match x {
            Metric::Value(v) => Metric::Value(v.sqrt()),
            m => m,
        };
        self.push(&format!("{prefix}.D2"), pathway, want.d2, r.d);
        self.push(
            &format!("{prefix}.V2"),
            pathway,
            want.v2,
            r.v_intensity.unwrap_or(Metric::Undefined),
        );
        self.push(&format!("{prefix}.X2"), pathway, want.x2, x);
        if let Metric::Value(x2) = want.x2 {
            self.value(&format!("{prefix}.sqrt_X2"), pathway, x2.sqrt(), sqrt_x.as_f64());
        }
        if let Some(v_hom) = want.v_hom {
            self.push(
                &format!("{prefix}.V_HOM"),
                pathway,
                Metric::Value(v_hom),
                r.v_hom.map_or(Metric::Undefined, |h| h.value),
            );
        }
        if let Some((par, perp)) = want.hom {
            let hp = hom_probabilities(rec)?;
            self.value(&format!("{prefix}.P_parallel"), pathway, par, hp.parallel);
            self.value(&format!("{prefix}.P_perp"), pathway, perp, hp.perp);
        }
        if let Some(m) = want.margin_cs {
            self.value(
                &format!("{prefix}.margin_cs"),
                pathway,
                m,
                witness_suite(rec, 2)?.cauchy_schwarz.margin,
            );
        }
        Ok(())
    }
}

struct SecondOrder {
    d2: Metric,
    v2: Metric,
    x2: Metric,
    v_hom: Option<f64>,
    hom: Option<(f64, f64)>,
    margin_cs: Option<f64>,
}

impl PaperCheck {
    pub fn run() -> Result<Self> {
        Self::run_perturbed(0.0)
    }

    pub fn run_perturbed(g2_ab_delta: f64) -> Result<Self> {
        let mut c = Collector { rows: Vec::new() };
        let space4 = FockSpace::new(2, 4)?;

        // g2_auto = 0.8, g2_AB = 1, zeta = 2
        let example2 = SecondOrder {
            d2: Metric::Value(0.6),
            v2: Metric::Value(1.0),
            x2: Metric::Value(1.36),
            v_hom: Some(0.5),
            hom: Some((0.25, 0.5)),
            margin_cs: Some(-0.09),
        };
        let p = ParametricCorrelations::new(0.8, 0.8, 1.0, 2.0)?.with_nbar_b(0.5)?;
        c.second_order(
            "example2",
            Pathway::Parametric,
            &perturbed(record_from_parameters(&p), g2_ab_delta),
            &example2,
        )?;
        let ex2_state = example2_pair(&space4)?;
        let ex2_rec = perturbed(record_from_state(&ex2_state, 2)?, g2_ab_delta);
        c.second_order("example2", Pathway::State, &ex2_rec, &example2)?;
        let dip0 = distinguishable_coincidence(&ex2_state, DistinguishabilityAngle::indistinguishable())?;
        let dip1 = distinguishable_coincidence(&ex2_state, DistinguishabilityAngle::distinguishable())?;
        c.value("example2.coincidence_chi0", Pathway::Network, 0.25, dip0);
        c.value("example2.coincidence_chi_pi2", Pathway::Network, 0.5, dip1);
        c.value("example2.V_HOM", Pathway::Network, 0.5, 1.0 - dip0 / dip1);

        // g2_auto sweep at g2_auto = 0.8 and g2_auto -> 0 with zeta = 2
        let p = ParametricCorrelations::new(0.8, 0.8, 1.0, 2.0)?;
        let r = complementarity(&perturbed(record_from_parameters(&p), g2_ab_delta), INT21)?;
        c.push("g2auto_sweep.D2_at_0.8", Pathway::Parametric, Metric::Value(0.6), r.d);
        c.value(
            "g2auto_sweep.sqrt_X2_at_0.8",
            Pathway::Parametric,
            1.36f64.sqrt(),
            r.x_intensity.unwrap_or(Metric::Undefined).as_f64().sqrt(),
        );

        // two single photons: the g2_auto -> 0 end of the same family
        let single = SecondOrder {
            d2: Metric::Undefined,
            v2: Metric::Infinite,
            x2: Metric::Infinite,
            v_hom: Some(1.0),
            hom: Some((0.0, 0.5)),
            margin_cs: None,
        };
        let p = ParametricCorrelations::new(0.0, 0.0, 1.0, 1.0)?;
        c.second_order(
            "single_photons",
            Pathway::Parametric,
            &perturbed(record_from_parameters(&p), g2_ab_delta),
            &single,
        )?;
        let one_one = QuantumState::basis(space4, &[1, 1])?;
        c.second_order(
            "single_photons",
            Pathway::State,
            &perturbed(record_from_state(&one_one, 2)?, g2_ab_delta),
            &single,
        )?;
        c.value(
            "single_photons.hbs_coincidence",
            Pathway::Network,
            0.0,
            multiport_coincidence(&one_one, &hbs(), &[0, 1])?,
        );
        c.value(
            "single_photons.coincidence_chi_pi2",
            Pathway::Network,
            0.5,
            distinguishable_coincidence(&one_one, DistinguishabilityAngle::distinguishable())?,
        );

        // zeta sweep with g2_AA = 0.25, g2_BB = g2_AB = 1 at its D2 = 0 crossing
        let crossing = SecondOrder {
            d2: Metric::Value(0.0),
            v2: Metric::Value(2.0),
            x2: Metric::Value(4.0),
            v_hom: Some(2.0 / 3.0),
            hom: Some((0.125, 0.375)),
            margin_cs: None,
        };
        let p = ParametricCorrelations::new(0.25, 1.0, 1.0, 2.0)?.with_nbar_b(0.5)?;
        c.second_order(
            "zeta_sweep",
            Pathway::Parametric,
            &perturbed(record_from_parameters(&p), g2_ab_delta),
            &crossing,
        )?;
        let zs = number_pair(&ZETA_CROSSING_MODE_A, &ZETA_CROSSING_MODE_B, 4)?;
        c.second_order(
            "zeta_sweep",
            Pathway::State,
            &perturbed(record_from_state(&zs, 2)?, g2_ab_delta),
            &crossing,
        )?;

        Ok(PaperCheck { rows: c.rows })
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(CheckRow::passed)
    }

    pub fn failures(&self) -> Vec<&CheckRow> {
        self.rows.iter().filter(|r| !r.passed()).collect()
    }

    /// Fixed-width text table followed by a summary line.
    pub fn render(&self) -> String {
        let fmt_metric = |m: Metric| match m {
            Metric::Value(v) => fmt_g(v),
            Metric::Infinite => "inf".to_string(),
            Metric::Undefined => "undefined".to_string(),
        };
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<36} {:<10} {:>18} {:>18} {:>10}  status",
            "name", "pathway", "expected", "computed", "|delta|"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<36} {:<10} {:>18} {:>18} {:>10.3e}  {}",
                r.name,
                r.pathway.name(),
                fmt_metric(r.expected),
                fmt_metric(r.computed),
                r.delta(),
                if r.passed() { "ok" } else { "FAIL" }
            );
        }
        let passed = self.rows.iter().filter(|r| r.passed()).count();
        let _ = writeln!(
            s,
            "paper-check: {passed}/{} passed (tolerance {})",
            self.rows.len(),
            fmt_g(PAPER_TOL)
        );
        s
    }
}
