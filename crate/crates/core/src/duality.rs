//! Which-path information, visibilities and complementarity of a two-mode
//! record.

use std::fmt;

use crate::correlation::{hom_probabilities, Arm, CorrelationRecord};
use crate::error::{Error, Result};

/// Result of a normalized ratio whose denominator may vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Value(f64),
    /// Denominator vanished with a positive numerator (e.g. V2 for |1,1>).
    Infinite,
    /// Denominator and numerator both vanished; only an asymptotic limit exists.
    Undefined,
}

impl Metric {
    pub fn value(self) -> Option<f64> {
        match self {
            Metric::Value(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_defined(self) -> bool {
        matches!(self, Metric::Value(_))
    }

    /// Numeric value for plotting: `inf` and `NaN` for the markers.
    pub fn as_f64(self) -> f64 {
        match self {
            Metric::Value(v) => v,
            Metric::Infinite => f64::INFINITY,
            Metric::Undefined => f64::NAN,
        }
    }

    fn square(self) -> Metric {
        match self {
            Metric::Value(v) => Metric::Value(v * v),
            m => m,
        }
    }

    fn add(self, other: Metric) -> Metric {
        match (self, other) {
            (Metric::Value(a), Metric::Value(b)) => Metric::Value(a + b),
            // both terms are nonnegative, so a divergent one dominates
            (Metric::Infinite, _) | (_, Metric::Infinite) => Metric::Infinite,
            _ => Metric::Undefined,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Value(v) => write!(f, "{v}"),
            Metric::Infinite => f.write_str("inf"),
            Metric::Undefined => f.write_str("undefined"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// `X > 1 + violation_epsilon` counts as a violation of the classical bound.
    pub violation_epsilon: f64,
    /// Denominators below this are treated as zero.
    pub undefined_threshold: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            violation_epsilon: 1e-9,
            undefined_threshold: 1e-12,
        }
    }
}

impl Tolerance {
    pub fn new(violation_epsilon: f64, undefined_threshold: f64) -> Result<Self> {
        if !(violation_epsilon > 0.0 && undefined_threshold > 0.0) {
            return Err(Error::InvalidSpec("tolerances must be positive".into()));
        }
        Ok(Self {
            violation_epsilon,
            undefined_threshold,
        })
    }

    fn ratio(&self, num: f64, den: f64) -> Metric {
        if den.abs() < self.undefined_threshold {
            if num.abs() < self.undefined_threshold {
                Metric::Undefined
            } else {
                Metric::Infinite
            }
        } else {
            Metric::Value(num / den)
        }
    }
}

const IDENTITY_TOL: f64 = 1e-10;

fn autos_nk(record: &CorrelationRecord, n: usize, k: usize) -> Result<(f64, f64)> {
    if k == 0 || k >= n {
        return Err(Error::InvalidRecord(format!("split index k = {k} outside 1..{n}")));
    }
    Ok((record.auto(Arm::A, 2 * k)?, record.auto(Arm::B, 2 * (n - k))?))
}

/// `D_n = |G_AA - G_BB| / (G_AA + G_BB)` at order `n`.
pub fn which_path(record: &CorrelationRecord, n: usize) -> Result<Metric> {
    let tol = Tolerance::default();
    let (aa, bb) = (record.auto(Arm::A, n)?, record.auto(Arm::B, n)?);
    Ok(tol.ratio((aa - bb).abs(), aa + bb))
}

/// `V_n = 2|G'_AB| / (G_AA + G_BB)` at order `n`.
pub fn visibility_phase(record: &CorrelationRecord, n: usize) -> Result<Metric> {
    let tol = Tolerance::default();
    let (aa, bb) = (record.auto(Arm::A, n)?, record.auto(Arm::B, n)?);
    Ok(tol.ratio(2.0 * record.phase(n)?.norm(), aa + bb))
}

/// HOM dip depth `V_2 = 2 G_AB / (G_AA + G_BB)`.
pub fn visibility_intensity(record: &CorrelationRecord) -> Result<Metric> {
    visibility_intensity_nk(record, 2, 1)
}

/// `V_{n,k} = 2 G^(n)_{k,AB} / (G^(2k)_AA + G^(2(n-k))_BB)`.
pub fn visibility_intensity_nk(record: &CorrelationRecord, n: usize, k: usize) -> Result<Metric> {
    let tol = Tolerance::default();
    let (aa, bb) = autos_nk(record, n, k)?;
    Ok(tol.ratio(2.0 * record.intensity(n, k)?, aa + bb))
}

/// `D_{n,k} = |G^(2k)_AA - G^(2(n-k))_BB| / (G^(2k)_AA + G^(2(n-k))_BB)`.
pub fn which_path_nk(record: &CorrelationRecord, n: usize, k: usize) -> Result<Metric> {
    let tol = Tolerance::default();
    let (aa, bb) = autos_nk(record, n, k)?;
    Ok(tol.ratio((aa - bb).abs(), aa + bb))
}

/// Which complementarity relation to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualityRequest {
    /// Phase interference at order `n`.
    Phase { n: usize },
    /// Intensity interference of `k` photons from A and `n - k` from B.
    Intensity { n: usize, k: usize },
}

/// Sign of a constraint margin; `passed` means `margin >= -violation_epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub margin: f64,
    pub passed: bool,
}

impl Witness {
    fn new(margin: f64, tol: &Tolerance) -> Self {
        Self {
            margin,
            passed: margin >= -tol.violation_epsilon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomVisibility {
    /// `1 - P_parallel / P_perp`.
    pub value: Metric,
    /// `(1 + 1/V_2)^-1`, only when the second-order phase term vanishes.
    pub from_v2: Option<Metric>,
}

impl HomVisibility {
    pub fn equivalence_applicable(&self) -> bool {
        self.from_v2.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualityReport {
    pub n: usize,
    pub k: Option<usize>,
    pub d: Metric,
    pub v_phase: Option<Metric>,
    pub x_phase: Option<Metric>,
    pub v_intensity: Option<Metric>,
    pub x_intensity: Option<Metric>,
    pub v_hom: Option<HomVisibility>,
    pub witness_phase_positivity: Option<Witness>,
    pub witness_cauchy_schwarz: Option<Witness>,
    /// Largest gap between `D² + V²` and the closed form over the defined X values.
    pub x_residual: f64,
    pub classical_complementarity_violated: bool,
}

/// A report entry for flat serialization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Field {
    Int(usize),
    Real(Metric),
    Flag(bool),
}

impl DualityReport {
    /// `(name, value)` pairs for the fields present, in a fixed order.
    pub fn fields(&self) -> Vec<(&'static str, Field)> {
        let mut out = vec![("n", Field::Int(self.n))];
        if let Some(k) = self.k {
            out.push(("k", Field::Int(k)));
        }
        out.push(("D", Field::Real(self.d)));
        let opt = [
            ("V_phase", self.v_phase),
            ("X_phase", self.x_phase),
            ("V_intensity", self.v_intensity),
            ("X_intensity", self.x_intensity),
            ("V_HOM", self.v_hom.map(|h| h.value)),
        ];
        for (name, m) in opt {
            if let Some(m) = m {
                out.push((name, Field::Real(m)));
            }
        }
        if let Some(w) = self.witness_phase_positivity {
            out.push(("margin_phase", Field::Real(Metric::Value(w.margin))));
            out.push(("witness_phase_pass", Field::Flag(w.passed)));
        }
        if let Some(w) = self.witness_cauchy_schwarz {
            out.push(("margin_cs", Field::Real(Metric::Value(w.margin))));
            out.push(("witness_cs_pass", Field::Flag(w.passed)));
        }
        out.push(("x_residual", Field::Real(Metric::Value(self.x_residual))));
        out.push(("violated", Field::Flag(self.classical_complementarity_violated)));
        out
    }
}

/// `1 + 4 (c² - aa·bb) / (aa + bb)²`, the closed form of `D² + V²` with cross term `c`.
fn closed_form_x(tol: &Tolerance, aa: f64, bb: f64, cross: f64) -> Metric {
    let den = (aa + bb) * (aa + bb);
    match tol.ratio(4.0 * (cross * cross - aa * bb), den) {
        Metric::Value(v) => Metric::Value(1.0 + v),
        m => m,
    }
}

fn check_identity(x: Metric, closed: Metric, what: &str) -> Result<f64> {
    match (x, closed) {
        (Metric::Value(a), Metric::Value(b)) => {
            let r = (a - b).abs();
            if r > IDENTITY_TOL * a.abs().max(1.0) {
                return Err(Error::Inconsistent(format!(
                    "{what}: D²+V² = {a} disagrees with closed form {b}"
                )));
            }
            Ok(r)
        }
        _ => Ok(0.0),
    }
}

pub fn complementarity(record: &CorrelationRecord, request: DualityRequest) -> Result<DualityReport> {
    complementarity_with(record, request, &Tolerance::default())
}

/// Assembles the report and cross-checks each `X = D² + V²` against its closed form.
pub fn complementarity_with(
    record: &CorrelationRecord,
    request: DualityRequest,
    tol: &Tolerance,
) -> Result<DualityReport> {
    let (n, k) = match request {
        DualityRequest::Phase { n } => (n, None),
        DualityRequest::Intensity { n, k } => (n, Some(k)),
    };
    if n == 0 {
        return Err(Error::InvalidRecord("order must be at least 1".into()));
    }
    let (aa, bb) = match k {
        Some(k) => autos_nk(record, n, k)?,
        None => (record.auto(Arm::A, n)?, record.auto(Arm::B, n)?),
    };
    let d = tol.ratio((aa - bb).abs(), aa + bb);
    let mut residual: f64 = 0.0;

    // with n = 2k the asymmetric autos coincide with the order-n ones
    let phase_order = match k {
        None => Some(n),
        Some(k) if n == 2 * k => Some(n).filter(|m| record.phase_cross.contains_key(m)),
        Some(_) => None,
    };
    let (mut v_phase, mut x_phase, mut witness_phase) = (None, None, None);
    if let Some(m) = phase_order {
        let g = record.phase(m)?.norm();
        let v = tol.ratio(2.0 * g, aa + bb);
        let x = d.square().add(v.square());
        residual = residual.max(check_identity(x, closed_form_x(tol, aa, bb, g), "phase")?);
        v_phase = Some(v);
        x_phase = Some(x);
        witness_phase = Some(Witness::new(aa * bb - g * g, tol));
    }

    let (mut v_int, mut x_int, mut witness_cs, mut v_hom) = (None, None, None, None);
    if let Some(k) = k {
        let c = record.intensity(n, k)?;
        let v = tol.ratio(2.0 * c, aa + bb);
        let x = d.square().add(v.square());
        residual = residual.max(check_identity(x, closed_form_x(tol, aa, bb, c), "intensity")?);
        v_int = Some(v);
        x_int = Some(x);
        witness_cs = Some(Witness::new(aa * bb - c * c, tol));
        if (n, k) == (2, 1) {
            v_hom = Some(v_hom_with(record, tol)?);
        }
    }

    let violated = match x_int {
        Some(Metric::Value(x)) => x > 1.0 + tol.violation_epsilon,
        Some(Metric::Infinite) => true,
        _ => false,
    };
    Ok(DualityReport {
        n,
        k,
        d,
        v_phase,
        x_phase,
        v_intensity: v_int,
        x_intensity: x_int,
        v_hom,
        witness_phase_positivity: witness_phase,
        witness_cauchy_schwarz: witness_cs,
        x_residual: residual,
        classical_complementarity_violated: violated,
    })
}

pub fn v_hom(record: &CorrelationRecord) -> Result<HomVisibility> {
    v_hom_with(record, &Tolerance::default())
}

/// HOM visibility from the coincidence probabilities; when the record has
/// no second-order phase correlation it is also derived from `V_2` and the
/// two must agree.
pub fn v_hom_with(record: &CorrelationRecord, tol: &Tolerance) -> Result<HomVisibility> {
    let hp = hom_probabilities(record)?;
    let value = if hp.perp < tol.undefined_threshold {
        Metric::Undefined
    } else {
        Metric::Value(1.0 - hp.parallel / hp.perp)
    };
    let from_v2 = if record.phase(2)?.norm() < tol.undefined_threshold {
        let aa = record.auto(Arm::A, 2)?;
        let bb = record.auto(Arm::B, 2)?;
        let v = match tol.ratio(2.0 * record.intensity(2, 1)?, aa + bb) {
            Metric::Value(v) if v > 0.0 => Metric::Value(1.0 / (1.0 + 1.0 / v)),
            Metric::Value(_) => Metric::Value(0.0),
            Metric::Infinite => Metric::Value(1.0),
            Metric::Undefined => Metric::Undefined,
        };
        if let (Metric::Value(a), Metric::Value(b)) = (value, v) {
            if (a - b).abs() > IDENTITY_TOL {
                return Err(Error::Inconsistent(format!(
                    "V_HOM from probabilities {a} disagrees with (1 + 1/V2)^-1 = {b}"
                )));
            }
        }
        Some(v)
    } else {
        None
    };
    Ok(HomVisibility { value, from_v2 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessVerdicts {
    /// `G_AA G_BB - |G'_AB|²` at order `n`; nonnegative for every state.
    pub phase_positivity: Witness,
    /// `G2_AA G2_BB - G2_AB²`; negative only for nonclassical light.
    pub cauchy_schwarz: Witness,
}

pub fn witness_suite(record: &CorrelationRecord, n: usize) -> Result<WitnessVerdicts> {
    let tol = Tolerance::default();
    let g = record.phase(n)?.norm();
    let phase = record.auto(Arm::A, n)? * record.auto(Arm::B, n)? - g * g;
    Ok(WitnessVerdicts {
        phase_positivity: Witness::new(phase, &tol),
        cauchy_schwarz: Witness::new(cauchy_schwarz_margin_nk(record, 2, 1)?, &tol),
    })
}

/// `G^(2k)_AA G^(2(n-k))_BB - (G^(n)_{k,AB})²`.
pub fn cauchy_schwarz_margin_nk(record: &CorrelationRecord, n: usize, k: usize) -> Result<f64> {
    let (aa, bb) = autos_nk(record, n, k)?;
    let c = record.intensity(n, k)?;
    Ok(aa * bb - c * c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::{record_from_parameters, record_from_state, ParametricCorrelations};
    use crate::fock::{FockSpace, QuantumState};
    use crate::spec::StateSpec;
    use crate::states::{example2_pair, product_state, random_classical_two_mode, random_density_matrix};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use proptest::prelude::*;

    const INT21: DualityRequest = DualityRequest::Intensity { n: 2, k: 1 };

    fn val(m: Metric) -> f64 {
        m.value().unwrap_or_else(|| panic!("expected a value, got {m:?}"))
    }

    fn example2_parametric() -> CorrelationRecord {
        record_from_parameters(&ParametricCorrelations::new(0.8, 0.8, 1.0, 2.0).unwrap())
    }

    fn coherent_pair(a: f64, b: f64, cutoff: usize) -> QuantumState {
        product_state(
            &[
                StateSpec::coherent(Complex64::new(a, 0.0)),
                StateSpec::coherent(Complex64::new(b, 0.0)),
            ],
            cutoff,
            1e-6,
        )
        .unwrap()
    }

    fn fock_pair(a: usize, b: usize, cutoff: usize) -> QuantumState {
        QuantumState::basis(FockSpace::new(2, cutoff).unwrap(), &[a, b]).unwrap()
    }

    #[test]
    fn example2_both_paths() {
        let state = record_from_state(&example2_pair(&FockSpace::new(2, 4).unwrap()).unwrap(), 2).unwrap();
        for (rec, eps) in [(example2_parametric(), 1e-12), (state, 1e-10)] {
            let r = complementarity(&rec, INT21).unwrap();
            assert_abs_diff_eq!(val(r.d), 0.6, epsilon = eps);
            assert_abs_diff_eq!(val(r.v_intensity.unwrap()), 1.0, epsilon = eps);
            assert_abs_diff_eq!(val(r.x_intensity.unwrap()), 1.36, epsilon = eps);
            assert_abs_diff_eq!(val(r.v_hom.unwrap().value), 0.5, epsilon = eps);
            assert!(r.classical_complementarity_violated);
        }
    }

    #[test]
    fn which_path_examples() {
        assert_abs_diff_eq!(
            val(which_path(&example2_parametric(), 2).unwrap()),
            0.6,
            epsilon = 1e-15
        );
        let sym = record_from_parameters(&ParametricCorrelations::new(1.5, 1.5, 1.0, 1.0).unwrap());
        assert_eq!(val(which_path(&sym, 2).unwrap()), 0.0);
        let one_one = record_from_state(&fock_pair(1, 1, 4), 2).unwrap();
        assert_eq!(which_path(&one_one, 2).unwrap(), Metric::Undefined);
        assert!(matches!(which_path(&one_one, 5), Err(Error::MissingMoment(_))));
    }

    #[test]
    fn phase_visibility_examples() {
        let rec = record_from_state(&coherent_pair(0.8, 0.8, 16), 1).unwrap();
        assert_abs_diff_eq!(val(visibility_phase(&rec, 1).unwrap()), 1.0, epsilon = 1e-8);

        let rec = record_from_state(&coherent_pair(1.0, 0.5, 16), 1).unwrap();
        let zeta: f64 = 4.0;
        assert_abs_diff_eq!(
            val(visibility_phase(&rec, 1).unwrap()),
            2.0 * zeta.sqrt() / (1.0 + zeta),
            epsilon = 1e-8
        );

        let ex2 = record_from_state(&example2_pair(&FockSpace::new(2, 4).unwrap()).unwrap(), 2).unwrap();
        assert_eq!(val(visibility_phase(&ex2, 1).unwrap()), 0.0);
        assert_eq!(val(visibility_phase(&ex2, 2).unwrap()), 0.0);
    }

    #[test]
    fn intensity_visibility_examples() {
        assert_abs_diff_eq!(
            val(visibility_intensity(&example2_parametric()).unwrap()),
            1.0,
            epsilon = 1e-15
        );
        let rec = record_from_state(&coherent_pair(1.0, 1.0, 16), 2).unwrap();
        assert_abs_diff_eq!(val(visibility_intensity(&rec).unwrap()), 1.0, epsilon = 1e-8);
        let one_one = record_from_state(&fock_pair(1, 1, 4), 2).unwrap();
        assert_eq!(visibility_intensity(&one_one).unwrap(), Metric::Infinite);

        let one_two = record_from_state(&fock_pair(1, 2, 4), 3).unwrap();
        assert_eq!(visibility_intensity_nk(&one_two, 3, 1).unwrap(), Metric::Infinite);
        assert_abs_diff_eq!(one_two.intensity(3, 1).unwrap(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn higher_order_coherent() {
        let (a, b) = (1.0, 0.8);
        let rec = record_from_state(&coherent_pair(a, b, 22), 3).unwrap();
        let (na, nb): (f64, f64) = (a * a, b * b);
        let expected = 2.0 * na * nb * nb / (na * na + nb.powi(4));
        assert_abs_diff_eq!(
            val(visibility_intensity_nk(&rec, 3, 1).unwrap()),
            expected,
            epsilon = 1e-7
        );

        let rec = record_from_state(&coherent_pair(1.0, 1.0, 22), 3).unwrap();
        assert_abs_diff_eq!(val(which_path_nk(&rec, 3, 1).unwrap()), 0.0, epsilon = 1e-7);

        let th = product_state(&[StateSpec::thermal(0.2), StateSpec::thermal(0.2)], 24, 1e-6).unwrap();
        let rec = record_from_state(&th, 4).unwrap();
        assert_abs_diff_eq!(val(which_path_nk(&rec, 4, 2).unwrap()), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn coherent_saturation() {
        for zeta in [0.25, 1.0, 4.0] {
            let b: f64 = 0.7;
            let a = b * f64::sqrt(zeta);
            let rec = record_from_state(&coherent_pair(a, b, 16), 2).unwrap();
            let r = complementarity(&rec, INT21).unwrap();
            assert_abs_diff_eq!(val(r.x_intensity.unwrap()), 1.0, epsilon = 1e-9);
            assert!(!r.classical_complementarity_violated);
        }
    }

    #[test]
    fn one_one_markers() {
        let r = complementarity(&record_from_state(&fock_pair(1, 1, 4), 2).unwrap(), INT21).unwrap();
        assert_eq!(r.d, Metric::Undefined);
        assert_eq!(r.v_intensity, Some(Metric::Infinite));
        assert_eq!(r.x_intensity, Some(Metric::Infinite));
        assert!(r.classical_complementarity_violated);
        let hom = r.v_hom.unwrap();
        assert_eq!(hom.value, Metric::Value(1.0));
        assert_eq!(hom.from_v2, Some(Metric::Value(1.0)));
    }

    #[test]
    fn v_hom_cases() {
        let zero = record_from_parameters(&ParametricCorrelations::new(1.0, 1.0, 0.0, 1.0).unwrap());
        assert_eq!(v_hom(&zero).unwrap().value, Metric::Value(0.0));
        let phased = record_from_parameters(
            &ParametricCorrelations::new(1.0, 1.0, 1.0, 1.0)
                .unwrap()
                .with_phase_cross(Complex64::new(0.3, 0.0))
                .unwrap(),
        );
        let h = v_hom(&phased).unwrap();
        assert!(!h.equivalence_applicable());
        assert_abs_diff_eq!(val(h.value), 1.0 - 0.35 / 1.0, epsilon = 1e-15);
    }

    #[test]
    fn witnesses() {
        let p = ParametricCorrelations::new(0.8, 0.8, 1.0, 2.0)
            .unwrap()
            .with_nbar_b(0.5)
            .unwrap();
        let w = witness_suite(&record_from_parameters(&p), 2).unwrap();
        assert_abs_diff_eq!(w.cauchy_schwarz.margin, -0.09, epsilon = 1e-12);
        assert!(!w.cauchy_schwarz.passed);
        assert!(w.phase_positivity.passed);
    }

    #[test]
    fn report_fields_and_identity() {
        let r = complementarity(&example2_parametric(), INT21).unwrap();
        let names: Vec<_> = r.fields().iter().map(|(n, _)| *n).collect();
        assert_eq!(
            names,
            [
                "n",
                "k",
                "D",
                "V_phase",
                "X_phase",
                "V_intensity",
                "X_intensity",
                "V_HOM",
                "margin_phase",
                "witness_phase_pass",
                "margin_cs",
                "witness_cs_pass",
                "x_residual",
                "violated"
            ]
        );
        assert!(r.x_residual < 1e-12);

        let p = complementarity(&example2_parametric(), DualityRequest::Phase { n: 1 }).unwrap();
        assert!(p.v_intensity.is_none());
        assert_eq!(p.k, None);
        assert!(complementarity(&example2_parametric(), DualityRequest::Intensity { n: 2, k: 2 }).is_err());
    }

    #[test]
    fn fig2a_family() {
        let zeta: f64 = 2.0;
        for i in 0..=40 {
            let g = 10f64.powf(-2.0 + 4.0 * i as f64 / 40.0);
            let rec = record_from_parameters(&ParametricCorrelations::new(g, g, 1.0, zeta).unwrap());
            assert_abs_diff_eq!(val(which_path(&rec, 2).unwrap()), 0.6, epsilon = 1e-12);
            let v = val(visibility_intensity(&rec).unwrap());
            assert!((v - 2.0 / ((zeta + 1.0 / zeta) * g)).abs() <= 1e-12 * v.max(1.0));
        }
    }

    #[test]
    fn fig2b_crossing() {
        let rec = record_from_parameters(&ParametricCorrelations::new(0.25, 1.0, 1.0, 2.0).unwrap());
        let r = complementarity(&rec, INT21).unwrap();
        assert_abs_diff_eq!(val(r.d), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(val(r.v_intensity.unwrap()), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(val(r.x_intensity.unwrap()), 4.0, epsilon = 1e-15);
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(0.0, 1e-12).is_err());
        assert!(Tolerance::new(1e-9, 1e-12).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn phase_complementarity_bounded(seed in any::<u64>(), n in 1usize..=2) {
            let s = random_density_matrix(seed, &FockSpace::new(2, 3).unwrap(), None);
            let rec = record_from_state(&s, 2).unwrap();
            let r = complementarity(&rec, DualityRequest::Phase { n }).unwrap();
            if let Some(Metric::Value(x)) = r.x_phase {
                prop_assert!(x <= 1.0 + 1e-9);
            }
            prop_assert!(r.witness_phase_positivity.unwrap().passed);
        }

        #[test]
        fn classical_mixtures_obey_bound(seed in any::<u64>()) {
            let s = random_classical_two_mode(seed, &FockSpace::new(2, 16).unwrap());
            let rec = record_from_state(&s, 2).unwrap();
            let r = complementarity(&rec, INT21).unwrap();
            prop_assert!(!r.classical_complementarity_violated);
            prop_assert!(r.witness_cauchy_schwarz.unwrap().passed);
        }

        #[test]
        fn nk_reduces_to_second_order(seed in any::<u64>()) {
            let rec = record_from_state(&random_density_matrix(seed, &FockSpace::new(2, 4).unwrap(), None), 2).unwrap();
            prop_assert_eq!(visibility_intensity_nk(&rec, 2, 1).unwrap(), visibility_intensity(&rec).unwrap());
            prop_assert_eq!(which_path_nk(&rec, 2, 1).unwrap(), which_path(&rec, 2).unwrap());
        }

        #[test]
        fn scale_invariance(g_aa in 0.01f64..10.0, g_bb in 0.01f64..10.0, g_ab in 0.0f64..10.0,
                            zeta in 0.01f64..100.0, scale in 1e-3f64..1e3) {
            let p = ParametricCorrelations::new(g_aa, g_bb, g_ab, zeta).unwrap();
            let a = complementarity(&record_from_parameters(&p), INT21).unwrap();
            let b = complementarity(&record_from_parameters(&p.with_nbar_b(scale).unwrap()), INT21).unwrap();
            for ((name, fa), (_, fb)) in a.fields().into_iter().zip(b.fields()) {
                // margins and their verdicts carry the intensity scale
                if name.starts_with("margin") || name.starts_with("witness") {
                    continue;
                }
                match (fa, fb) {
                    (Field::Real(Metric::Value(x)), Field::Real(Metric::Value(y))) => {
                        prop_assert!((x - y).abs() < 1e-10 * x.abs().max(1.0), "{name}: {x} vs {y}");
                    }
                    (x, y) => prop_assert_eq!(x, y),
                }
            }
        }
    }
}
