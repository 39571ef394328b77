//! Correlation functions of a two-mode (A, B) input and the records that
//! carry them to the duality metrics.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{mean_photon_number, normal_ordered_moment, MomentRequest, QuantumState};
use crate::optics::{
    distinguishability_embedding, internal_hbs, internal_rotation, lift_to_fock, DistinguishabilityAngle, ModeUnitary,
};

pub const MODE_A: usize = 0;
pub const MODE_B: usize = 1;

const REAL_TOL: f64 = 1e-10;
const NONNEG_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = 1e-9;
const ZERO_INTENSITY: f64 = 1e-12;

/// Normal-ordered moments of a two-mode input.
///
/// * `auto_aa[m]`, `auto_bb[m]`: `<a†^m a^m>` of each mode (`m = 1` is the mean photon number).
/// * `phase_cross[m]`: `<a_A†^m a_B^m>`; its argument is the fringe phase θ_m.
/// * `intensity_cross[(n, k)]`: `<:N_A^k N_B^{n-k}:>`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorrelationRecord {
    pub order: usize,
    pub auto_aa: BTreeMap<usize, f64>,
    pub auto_bb: BTreeMap<usize, f64>,
    pub phase_cross: BTreeMap<usize, Complex64>,
    pub intensity_cross: BTreeMap<(usize, usize), f64>,
}

/// Input mode of a two-mode record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    A,
    B,
}

impl Arm {
    fn tag(self) -> &'static str {
        match self {
            Arm::A => "AA",
            Arm::B => "BB",
        }
    }
}

impl CorrelationRecord {
    pub fn auto(&self, arm: Arm, m: usize) -> Result<f64> {
        let map = match arm {
            Arm::A => &self.auto_aa,
            Arm::B => &self.auto_bb,
        };
        map.get(&m)
            .copied()
            .ok_or_else(|| Error::MissingMoment(format!("G{m}_{}", arm.tag())))
    }

    pub fn g1_aa(&self) -> Result<f64> {
        self.auto(Arm::A, 1)
    }

    pub fn g1_bb(&self) -> Result<f64> {
        self.auto(Arm::B, 1)
    }

    pub fn phase(&self, m: usize) -> Result<Complex64> {
        self.phase_cross
            .get(&m)
            .copied()
            .ok_or_else(|| Error::MissingMoment(format!("G{m}p_AB")))
    }

    pub fn intensity(&self, n: usize, k: usize) -> Result<f64> {
        self.intensity_cross
            .get(&(n, k))
            .copied()
            .ok_or_else(|| Error::MissingMoment(intensity_key(n, k)))
    }

    /// Sign and positivity constraints every quantum state obeys.
    pub fn validate(&self) -> Result<()> {
        let neg = |name: String, v: f64| {
            if v < -NONNEG_TOL || !v.is_finite() {
                Err(Error::InvalidRecord(format!("{name} = {v} must be nonnegative")))
            } else {
                Ok(())
            }
        };
        for (m, v) in &self.auto_aa {
            neg(format!("G{m}_AA"), *v)?;
        }
        for (m, v) in &self.auto_bb {
            neg(format!("G{m}_BB"), *v)?;
        }
        for ((n, k), v) in &self.intensity_cross {
            neg(intensity_key(*n, *k), *v)?;
        }
        for (m, z) in &self.phase_cross {
            if let (Some(aa), Some(bb)) = (self.auto_aa.get(m), self.auto_bb.get(m)) {
                if z.norm_sqr() > aa * bb + POSITIVITY_TOL {
                    return Err(Error::InvalidRecord(format!(
                        "|G{m}p_AB|^2 = {} exceeds G{m}_AA G{m}_BB = {}",
                        z.norm_sqr(),
                        aa * bb
                    )));
                }
            }
        }
        Ok(())
    }

    /// Flat `(key, value)` list in a fixed order.
    pub fn to_pairs(&self) -> Vec<(String, f64)> {
        let mut out = vec![("order".to_string(), self.order as f64)];
        for (m, v) in &self.auto_aa {
            out.push((format!("G{m}_AA"), *v));
        }
        for (m, v) in &self.auto_bb {
            out.push((format!("G{m}_BB"), *v));
        }
        for (m, z) in &self.phase_cross {
            out.push((format!("G{m}p_AB_re"), z.re));
            out.push((format!("G{m}p_AB_im"), z.im));
        }
        for ((n, k), v) in &self.intensity_cross {
            out.push((intensity_key(*n, *k), *v));
        }
        out
    }

    /// `key=value` lines, values in shortest round-trip form.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.to_pairs() {
            if k == "order" {
                let _ = writeln!(s, "order={}", self.order);
            } else {
                let _ = writeln!(s, "{k}={v:?}");
            }
        }
        s
    }

    /// Parses the output of [`to_kv`](Self::to_kv). Blank lines and `#` comments are skipped.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut rec = CorrelationRecord::default();
        let mut re_parts: BTreeMap<usize, f64> = BTreeMap::new();
        let mut im_parts: BTreeMap<usize, f64> = BTreeMap::new();
        let bad = |line: &str| Error::InvalidRecord(format!("cannot parse line `{line}`"));
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| bad(line))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "order" {
                rec.order = value.parse().map_err(|_| bad(line))?;
                continue;
            }
            let v: f64 = value.parse().map_err(|_| bad(line))?;
            let body = key.strip_prefix('G').ok_or_else(|| bad(line))?;
            let digits = body.find(|c: char| !c.is_ascii_digit()).ok_or_else(|| bad(line))?;
            let m: usize = body[..digits].parse().map_err(|_| bad(line))?;
            match &body[digits..] {
                "_AA" => {
                    rec.auto_aa.insert(m, v);
                }
                "_BB" => {
                    rec.auto_bb.insert(m, v);
                }
                "p_AB_re" => {
                    re_parts.insert(m, v);
                }
                "p_AB_im" => {
                    im_parts.insert(m, v);
                }
                "_AB" if m == 2 => {
                    rec.intensity_cross.insert((2, 1), v);
                }
                rest => {
                    let k = rest
                        .strip_prefix("_AB_k")
                        .and_then(|k| k.parse::<usize>().ok())
                        .ok_or_else(|| bad(line))?;
                    rec.intensity_cross.insert((m, k), v);
                }
            }
        }
        for (m, re) in &re_parts {
            let im = im_parts
                .get(m)
                .ok_or_else(|| Error::InvalidRecord(format!("G{m}p_AB_im missing")))?;
            rec.phase_cross.insert(*m, Complex64::new(*re, *im));
        }
        if let Some(m) = im_parts.keys().find(|m| !re_parts.contains_key(m)) {
            return Err(Error::InvalidRecord(format!("G{m}p_AB_re missing")));
        }
        rec.validate()?;
        Ok(rec)
    }
}

fn intensity_key(n: usize, k: usize) -> String {
    if n == 2 && k == 1 {
        "G2_AB".to_string()
    } else {
        format!("G{n}_AB_k{k}")
    }
}

fn require_two_modes(state: &QuantumState) -> Result<()> {
    let m = state.space().num_modes();
    if m == 2 {
        Ok(())
    } else {
        Err(Error::SpaceMismatch(format!(
            "expected a two-mode (A, B) state, got {m} modes"
        )))
    }
}

fn real_moment(state: &QuantumState, req: &MomentRequest, name: impl Fn() -> String) -> Result<f64> {
    let z = normal_ordered_moment(state, req)?;
    if z.im.abs() > REAL_TOL {
        return Err(Error::NonRealMoment {
            name: name(),
            imag: z.im,
        });
    }
    Ok(z.re)
}

/// Every moment up to `order`: phase crosses to `order`, intensity crosses
/// for all `2 <= n <= order`, autos to `2 * order`. Autos above the cutoff
/// are left out, so the asymmetric `(n, k)` quantities that need them report
/// a missing moment instead of a truncation artifact.
pub fn record_from_state(state: &QuantumState, order: usize) -> Result<CorrelationRecord> {
    require_two_modes(state)?;
    if order == 0 {
        return Err(Error::InvalidRecord("order must be at least 1".into()));
    }
    let cutoff = state.space().cutoff();
    if order > cutoff {
        return Err(Error::CutoffInsufficient {
            cutoff,
            reason: format!("order {order} moments need {order} photons per mode"),
        });
    }
    let base = || MomentRequest::identity(2);
    let mut rec = CorrelationRecord {
        order,
        ..Default::default()
    };
    for m in 1..=(2 * order).min(cutoff) {
        let aa = base().create(MODE_A, m).annihilate(MODE_A, m);
        let bb = base().create(MODE_B, m).annihilate(MODE_B, m);
        rec.auto_aa.insert(m, real_moment(state, &aa, || format!("G{m}_AA"))?);
        rec.auto_bb.insert(m, real_moment(state, &bb, || format!("G{m}_BB"))?);
    }
    for m in 1..=order {
        let req = base().create(MODE_A, m).annihilate(MODE_B, m);
        rec.phase_cross.insert(m, normal_ordered_moment(state, &req)?);
    }
    for n in 2..=order {
        for k in 1..n {
            rec.intensity_cross.insert((n, k), intensity_cross_nk(state, n, k)?);
        }
    }
    Ok(rec)
}

/// Second-order description by normalized correlations and intensity ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParametricCorrelations {
    g2_aa: f64,
    g2_bb: f64,
    g2_ab: f64,
    zeta: f64,
    nbar_b: f64,
    phase_cross: Complex64,
}

impl ParametricCorrelations {
    /// `zeta = <N_A>/<N_B>`; the scale `<N_B>` defaults to 1.
    pub fn new(g2_aa: f64, g2_bb: f64, g2_ab: f64, zeta: f64) -> Result<Self> {
        let p = Self {
            g2_aa,
            g2_bb,
            g2_ab,
            zeta,
            nbar_b: 1.0,
            phase_cross: Complex64::new(0.0, 0.0),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_nbar_b(mut self, nbar_b: f64) -> Result<Self> {
        self.nbar_b = nbar_b;
        self.validate()?;
        Ok(self)
    }

    /// Nonzero second-order phase correlation `<a_A†² a_B²>` for sensitivity studies.
    pub fn with_phase_cross(mut self, phase_cross: Complex64) -> Result<Self> {
        self.phase_cross = phase_cross;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("g2_AA", self.g2_aa), ("g2_BB", self.g2_bb), ("g2_AB", self.g2_ab)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidRecord(format!("{name} = {v} must be nonnegative")));
            }
        }
        for (name, v) in [("zeta", self.zeta), ("nbar_B", self.nbar_b)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidRecord(format!("{name} = {v} must be positive")));
            }
        }
        let (aa, bb) = self.second_order_autos();
        if self.phase_cross.norm_sqr() > aa * bb + POSITIVITY_TOL {
            return Err(Error::InvalidRecord(
                "phase correlation exceeds the moment-matrix bound".into(),
            ));
        }
        Ok(())
    }

    fn second_order_autos(&self) -> (f64, f64) {
        let na = self.zeta * self.nbar_b;
        (self.g2_aa * na * na, self.g2_bb * self.nbar_b * self.nbar_b)
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn nbar_b(&self) -> f64 {
        self.nbar_b
    }
}

/// Order-2 record generated from normalized correlations; first-order phase
/// coherence is zero and the second-order phase term is the configured value
/// (zero unless set).
pub fn record_from_parameters(p: &ParametricCorrelations) -> CorrelationRecord {
    let na = p.zeta * p.nbar_b;
    let nb = p.nbar_b;
    let (aa, bb) = p.second_order_autos();
    CorrelationRecord {
        order: 2,
        auto_aa: BTreeMap::from([(1, na), (2, aa)]),
        auto_bb: BTreeMap::from([(1, nb), (2, bb)]),
        phase_cross: BTreeMap::from([(1, Complex64::new(0.0, 0.0)), (2, p.phase_cross)]),
        intensity_cross: BTreeMap::from([((2, 1), p.g2_ab * na * nb)]),
    }
}

/// `G2/G1²` of one mode of `state`.
pub fn g2_auto(state: &QuantumState, mode: usize) -> Result<f64> {
    let space = state.space();
    space.check_mode(mode)?;
    if space.cutoff() < 2 {
        return Err(Error::CutoffInsufficient {
            cutoff: space.cutoff(),
            reason: "g2 needs at least two photons per mode".into(),
        });
    }
    let n = mean_photon_number(state, mode)?;
    if n < ZERO_INTENSITY {
        return Err(Error::ZeroIntensity(mode.to_string()));
    }
    let req = MomentRequest::identity(space.num_modes())
        .create(mode, 2)
        .annihilate(mode, 2);
    Ok(real_moment(state, &req, || format!("G2 of mode {mode}"))? / (n * n))
}

/// `<:N_A N_B:>/(<N_A><N_B>)`.
pub fn g2_cross(state: &QuantumState) -> Result<f64> {
    require_two_modes(state)?;
    let na = mean_photon_number(state, MODE_A)?;
    let nb = mean_photon_number(state, MODE_B)?;
    if na < ZERO_INTENSITY {
        return Err(Error::ZeroIntensity("A".into()));
    }
    if nb < ZERO_INTENSITY {
        return Err(Error::ZeroIntensity("B".into()));
    }
    Ok(intensity_cross_nk(state, 2, 1)? / (na * nb))
}

/// `<:N_A^k N_B^{n-k}:>`.
pub fn intensity_cross_nk(state: &QuantumState, n: usize, k: usize) -> Result<f64> {
    require_two_modes(state)?;
    if k == 0 || k >= n {
        return Err(Error::InvalidRecord(format!("split index k = {k} outside 1..{n}")));
    }
    let cutoff = state.space().cutoff();
    if k.max(n - k) > cutoff {
        return Err(Error::CutoffInsufficient {
            cutoff,
            reason: format!("<:N_A^{k} N_B^{}:> needs {} photons per mode", n - k, k.max(n - k)),
        });
    }
    let req = MomentRequest::identity(2)
        .create(MODE_A, k)
        .create(MODE_B, n - k)
        .annihilate(MODE_A, k)
        .annihilate(MODE_B, n - k);
    real_moment(state, &req, || intensity_key(n, k))
}

/// Coincidence probabilities of the HOM interferometer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomProbabilities {
    /// Photons from A and B indistinguishable after the beamsplitter.
    pub parallel: f64,
    /// Photons from A and B fully distinguishable.
    pub perp: f64,
}

pub fn hom_probabilities(record: &CorrelationRecord) -> Result<HomProbabilities> {
    let aa = record.auto(Arm::A, 2)?;
    let bb = record.auto(Arm::B, 2)?;
    let cross = record.intensity(2, 1)?;
    let phase = record.phase(2)?;
    let theta2 = phase.arg();
    let perp = (aa + bb + 2.0 * cross) / 4.0;
    let parallel = perp - (cross + phase.norm() * theta2.cos()) / 2.0;
    let closed_form = (aa + bb - 2.0 * phase.norm() * theta2.cos()) / 4.0;
    let scale = perp.abs().max(1.0);
    if (parallel - closed_form).abs() > 1e-12 * scale {
        return Err(Error::Inconsistent(format!(
            "P_parallel {parallel} disagrees with the closed form {closed_form}"
        )));
    }
    Ok(HomProbabilities { parallel, perp })
}

fn check_detectors(detectors: &[usize], num_modes: usize) -> Result<()> {
    for (i, &d) in detectors.iter().enumerate() {
        if d >= num_modes {
            return Err(Error::ModeOutOfRange { mode: d, num_modes });
        }
        if detectors[..i].contains(&d) {
            return Err(Error::SpaceMismatch(format!("detector {d} listed twice")));
        }
    }
    Ok(())
}

/// `<:prod_{j in detectors} N_j:>` after sending `state` through `network`.
pub fn multiport_coincidence(state: &QuantumState, network: &ModeUnitary, detectors: &[usize]) -> Result<f64> {
    let m = state.space().num_modes();
    check_detectors(detectors, m)?;
    let out = lift_to_fock(network, &state.space())?.apply(state)?;
    let req = MomentRequest::intensity_product(m, detectors);
    real_moment(&out, &req, || format!("coincidence on {detectors:?}"))
}

/// `<:prod_g (sum_{j in g} N_j):>`: coincidence between detector groups,
/// each group summing the intensities of its modes.
pub fn grouped_coincidence(state: &QuantumState, groups: &[&[usize]]) -> Result<f64> {
    let m = state.space().num_modes();
    for g in groups {
        check_detectors(g, m)?;
    }
    let mut total = 0.0;
    let mut choice = vec![0usize; groups.len()];
    loop {
        let modes: Vec<usize> = groups.iter().zip(&choice).map(|(g, &c)| g[c]).collect();
        let req = MomentRequest::intensity_product(m, &modes);
        total += real_moment(state, &req, || format!("coincidence on {modes:?}"))?;
        // odometer over group members
        let mut i = 0;
        loop {
            if i == groups.len() {
                return Ok(total);
            }
            choice[i] += 1;
            if choice[i] < groups[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// HOM coincidence `<:N_C N_D:>` at internal-mode overlap angle χ, by full
/// simulation on the four-mode internal register.
pub fn distinguishable_coincidence(state: &QuantumState, chi: DistinguishabilityAngle) -> Result<f64> {
    require_two_modes(state)?;
    let embedded = distinguishability_embedding(state, chi)?;
    let out = lift_to_fock(&internal_hbs(), &embedded.space())?.apply(&embedded)?;
    grouped_coincidence(&out, &[&[0, 1], &[2, 3]])
}

/// Same quantity as [`distinguishable_coincidence`], evaluated on the
/// two-mode input by substituting the output modes.
pub fn distinguishable_coincidence_substituted(state: &QuantumState, chi: DistinguishabilityAngle) -> Result<f64> {
    require_two_modes(state)?;
    let net = internal_rotation(chi).then(&internal_hbs())?;
    // A enters on A_u, B on B_u; the v inputs are vacuum and drop out of
    // normal-ordered expectations
    let map = net.matrix().select_columns([0usize, 2].iter());
    let mut total = 0.0;
    for c in [0, 1] {
        for d in [2, 3] {
            let req = MomentRequest::intensity_product(4, &[c, d]);
            total += crate::optics::substituted_moment_linear(state, &map, &req)?.re;
        }
    }
    Ok(total)
}
