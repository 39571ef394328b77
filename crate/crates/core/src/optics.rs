//! Passive linear-optical networks and their action on Fock-space states.
//!
//! Convention: a [`ModeUnitary`] `u` maps input annihilation operators to
//! outputs as `a_out_i = sum_j u[i][j] a_in_j`. In the Schrödinger picture a
//! photon entering mode `j` leaves in the superposition `sum_i u[i][j] a_i†`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fock::{normal_ordered_moment, CMatrix, FockSpace, MomentRequest, QuantumState};

const UNITARY_TOL: f64 = 1e-10;

/// Largest weight a state may carry in photon-number sectors the truncated
/// space cannot represent after mixing (sectors with more than `cutoff` photons).
pub const DEFAULT_LEAKAGE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ModeUnitary {
    matrix: CMatrix,
    input_labels: Vec<String>,
    output_labels: Vec<String>,
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn strs(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

impl ModeUnitary {
    pub fn new(matrix: CMatrix, input_labels: Vec<String>, output_labels: Vec<String>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n || n == 0 {
            return Err(Error::InvalidUnitary(format!(
                "matrix is {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if input_labels.len() != n || output_labels.len() != n {
            return Err(Error::InvalidUnitary("label count does not match size".into()));
        }
        let u = Self {
            matrix,
            input_labels,
            output_labels,
        };
        let residual = u.unitarity_residual();
        if residual > UNITARY_TOL {
            return Err(Error::InvalidUnitary(format!("|U†U - I|_F = {residual:.3e}")));
        }
        Ok(u)
    }

    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        let n = matrix.nrows();
        Self::new(matrix, labels("in", n), labels("out", n))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: CMatrix::identity(n, n),
            input_labels: labels("m", n),
            output_labels: labels("m", n),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn input_labels(&self) -> &[String] {
        &self.input_labels
    }

    pub fn output_labels(&self) -> &[String] {
        &self.output_labels
    }

    pub fn output_index(&self, label: &str) -> Option<usize> {
        self.output_labels.iter().position(|l| l == label)
    }

    /// Frobenius norm of `U†U - I`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.size();
        (self.matrix.adjoint() * &self.matrix - CMatrix::identity(n, n)).norm()
    }

    /// `next` applied after `self`.
    pub fn then(&self, next: &ModeUnitary) -> Result<ModeUnitary> {
        if next.size() != self.size() {
            return Err(Error::InvalidUnitary(format!(
                "cannot compose {}-mode and {}-mode networks",
                self.size(),
                next.size()
            )));
        }
        Ok(Self {
            matrix: &next.matrix * &self.matrix,
            input_labels: self.input_labels.clone(),
            output_labels: next.output_labels.clone(),
        })
    }

    /// Embeds this network on `modes` of a `total`-mode register, identity elsewhere.
    pub fn on_modes(&self, modes: &[usize], total: usize) -> Result<ModeUnitary> {
        if modes.len() != self.size() || modes.iter().any(|&m| m >= total) {
            return Err(Error::InvalidUnitary(format!(
                "cannot place a {}-mode network on modes {modes:?} of {total}",
                self.size()
            )));
        }
        let mut matrix = CMatrix::identity(total, total);
        let mut input_labels = labels("m", total);
        let mut output_labels = labels("m", total);
        for (i, &mi) in modes.iter().enumerate() {
            if modes[..i].contains(&mi) {
                return Err(Error::InvalidUnitary(format!("mode {mi} repeated")));
            }
            matrix[(mi, mi)] = Complex64::new(0.0, 0.0);
            input_labels[mi] = self.input_labels[i].clone();
            output_labels[mi] = self.output_labels[i].clone();
        }
        for (i, &mi) in modes.iter().enumerate() {
            for (j, &mj) in modes.iter().enumerate() {
                matrix[(mi, mj)] = self.matrix[(i, j)];
            }
        }
        Ok(Self {
            matrix,
            input_labels,
            output_labels,
        })
    }

    pub fn with_labels(mut self, input_labels: Vec<String>, output_labels: Vec<String>) -> Result<Self> {
        if input_labels.len() != self.size() || output_labels.len() != self.size() {
            return Err(Error::InvalidUnitary("label count does not match size".into()));
        }
        self.input_labels = input_labels;
        self.output_labels = output_labels;
        Ok(self)
    }
}

impl fmt::Display for ModeUnitary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} <- {}", self.output_labels.join(" "), self.input_labels.join(" "))?;
        for i in 0..self.size() {
            let row: Vec<String> = (0..self.size())
                .map(|j| {
                    let z = self.matrix[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "{:>6}: {}", self.output_labels[i], row.join("  "))?;
        }
        Ok(())
    }
}

/// Half beamsplitter: `a_C = (a_A - a_B)/√2`, `a_D = (a_A + a_B)/√2`.
pub fn hbs() -> ModeUnitary {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    ModeUnitary {
        matrix: CMatrix::from_row_slice(2, 2, &[h, -h, h, h]),
        input_labels: strs(&["A", "B"]),
        output_labels: strs(&["C", "D"]),
    }
}

/// `n`-port discrete Fourier transform, entries `ω^{jk}/√n`. Inputs A and B
/// sit on ports 0 and 1; the remaining ports are vacuum ancillas.
pub fn balanced_multiport(n: usize) -> Result<ModeUnitary> {
    if n < 2 {
        return Err(Error::InvalidUnitary(format!("multiport needs n >= 2, got {n}")));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let matrix = CMatrix::from_fn(n, n, |j, k| {
        let angle = std::f64::consts::TAU * ((j * k) % n) as f64 / n as f64;
        Complex64::from_polar(scale, angle)
    });
    let mut input_labels = strs(&["A", "B"]);
    input_labels.extend((2..n).map(|i| format!("vac{i}")));
    Ok(ModeUnitary {
        matrix,
        input_labels,
        output_labels: labels("out", n),
    })
}

/// Multiport followed by a half beamsplitter on every output port, each
/// paired with a fresh vacuum ancilla: `2n` detectors in total. Output
/// `j` and `n + j` are the two halves of multiport port `j`.
pub fn hbs_doubled_multiport(n: usize) -> Result<ModeUnitary> {
    let total = 2 * n;
    let mut net = balanced_multiport(n)?.on_modes(&(0..n).collect::<Vec<_>>(), total)?;
    for j in 0..n {
        net = net.then(&hbs().on_modes(&[j, n + j], total)?)?;
    }
    let outputs = (0..n)
        .map(|j| format!("out{j}a"))
        .chain((0..n).map(|j| format!("out{j}b")))
        .collect();
    let mut inputs = strs(&["A", "B"]);
    inputs.extend((2..total).map(|i| format!("vac{i}")));
    net.with_labels(inputs, outputs)
}

/// `e^{iθ}` on `mode` of an `n`-mode register.
pub fn phase_shifter(mode: usize, theta: f64, n: usize) -> Result<ModeUnitary> {
    if mode >= n {
        return Err(Error::ModeOutOfRange { mode, num_modes: n });
    }
    let mut matrix = CMatrix::identity(n, n);
    matrix[(mode, mode)] = Complex64::from_polar(1.0, theta);
    Ok(ModeUnitary {
        matrix,
        input_labels: labels("m", n),
        output_labels: labels("m", n),
    })
}

/// Seeded Haar-like random unitary (QR of a complex Gaussian matrix with
/// the diagonal phases of R absorbed).
pub fn random_mode_unitary(seed: u64, n: usize) -> ModeUnitary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    ModeUnitary {
        matrix: q,
        input_labels: labels("in", n),
        output_labels: labels("out", n),
    }
}

/// Overlap angle between the internal modes of the photons from A and B:
/// 0 is indistinguishable, π/2 is fully distinguishable.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DistinguishabilityAngle(f64);

impl DistinguishabilityAngle {
    pub fn new(chi: f64) -> Result<Self> {
        if (0.0..=FRAC_PI_2).contains(&chi) {
            Ok(Self(chi))
        } else {
            Err(Error::InvalidUnitary(format!(
                "distinguishability angle {chi} outside [0, π/2]"
            )))
        }
    }

    pub fn indistinguishable() -> Self {
        Self(0.0)
    }

    pub fn distinguishable() -> Self {
        Self(FRAC_PI_2)
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

/// Mode order of the internal-mode register.
pub const INTERNAL_INPUTS: [&str; 4] = ["A_u", "A_v", "B_u", "B_v"];
pub const INTERNAL_OUTPUTS: [&str; 4] = ["C_u", "C_v", "D_u", "D_v"];

/// Rotation of B's internal mode: `B_u -> cos χ B_u + sin χ B_v`.
pub fn internal_rotation(chi: DistinguishabilityAngle) -> ModeUnitary {
    let (s, c) = chi.radians().sin_cos();
    let z = |x: f64| Complex64::new(x, 0.0);
    let o = z(0.0);
    let matrix = CMatrix::from_row_slice(
        4,
        4,
        &[
            z(1.0),
            o,
            o,
            o, //
            o,
            z(1.0),
            o,
            o, //
            o,
            o,
            z(c),
            z(-s), //
            o,
            o,
            z(s),
            z(c),
        ],
    );
    ModeUnitary {
        matrix,
        input_labels: strs(&INTERNAL_INPUTS),
        output_labels: strs(&INTERNAL_INPUTS),
    }
}

/// Spatial half beamsplitter acting identically on both internal labels.
pub fn internal_hbs() -> ModeUnitary {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let o = Complex64::new(0.0, 0.0);
    let matrix = CMatrix::from_row_slice(
        4,
        4,
        &[
            h, o, -h, o, //
            o, h, o, -h, //
            h, o, h, o, //
            o, h, o, h,
        ],
    );
    ModeUnitary {
        matrix,
        input_labels: strs(&INTERNAL_INPUTS),
        output_labels: strs(&INTERNAL_OUTPUTS),
    }
}

#[derive(Debug, Clone)]
struct SectorBlock {
    indices: Vec<usize>,
    matrix: CMatrix,
}

/// Fock-space unitary induced by a mode unitary, stored per total-photon-number
/// sector.
///
/// Sectors holding at most `cutoff` photons are closed under mixing and are
/// lifted exactly. Larger sectors are cut by the per-mode truncation; the lift
/// acts on them as the identity and [`apply`](Self::apply) refuses states
/// carrying weight there.
#[derive(Debug, Clone)]
pub struct LiftedUnitary {
    space: FockSpace,
    blocks: Vec<SectorBlock>,
}

impl LiftedUnitary {
    pub fn space(&self) -> FockSpace {
        self.space
    }

    /// Highest photon number lifted exactly.
    pub fn closed_sectors(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn to_dense(&self) -> CMatrix {
        let d = self.space.dim();
        let mut m = CMatrix::identity(d, d);
        for b in &self.blocks {
            for (i, &gi) in b.indices.iter().enumerate() {
                for (j, &gj) in b.indices.iter().enumerate() {
                    m[(gi, gj)] = b.matrix[(i, j)];
                }
            }
        }
        m
    }

    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        self.apply_with_tolerance(state, DEFAULT_LEAKAGE_TOLERANCE)
    }

    /// `rho -> U rho U†`, block by block.
    pub fn apply_with_tolerance(&self, state: &QuantumState, leakage_tolerance: f64) -> Result<QuantumState> {
        if state.space() != self.space {
            return Err(Error::SpaceMismatch(
                "state and lifted network live on different spaces".into(),
            ));
        }
        let weight = state.weight_above_total(self.closed_sectors());
        if weight > leakage_tolerance {
            return Err(Error::NetworkLeakage {
                weight,
                cutoff: self.space.cutoff(),
            });
        }
        let mut rho = state.rho().clone();
        for b in &self.blocks {
            let rows = rho.select_rows(b.indices.iter());
            let new_rows = &b.matrix * rows;
            for (i, &gi) in b.indices.iter().enumerate() {
                rho.set_row(gi, &new_rows.row(i));
            }
        }
        for b in &self.blocks {
            let cols = rho.select_columns(b.indices.iter());
            let new_cols = cols * b.matrix.adjoint();
            for (j, &gj) in b.indices.iter().enumerate() {
                rho.set_column(gj, &new_cols.column(j));
            }
        }
        Ok(QuantumState::from_trusted(self.space, rho))
    }
}

fn sqrt_factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product::<f64>().sqrt()
}

pub fn lift_to_fock(u: &ModeUnitary, space: &FockSpace) -> Result<LiftedUnitary> {
    let m = space.num_modes();
    if u.size() != m {
        return Err(Error::SpaceMismatch(format!(
            "{}-mode network on a {m}-mode space",
            u.size()
        )));
    }
    let closed = space.cutoff();
    let mut sectors: Vec<Vec<usize>> = vec![Vec::new(); closed + 1];
    for k in 0..space.dim() {
        let n = space.total_photons(k);
        if n <= closed {
            sectors[n].push(k);
        }
    }
    let strides: Vec<usize> = (0..m).map(|i| space.stride(i)).collect();
    let blocks = sectors
        .into_iter()
        .map(|indices| {
            let local: BTreeMap<usize, usize> = indices.iter().enumerate().map(|(i, &g)| (g, i)).collect();
            let size = indices.len();
            let mut matrix = CMatrix::zeros(size, size);
            for (col, &k) in indices.iter().enumerate() {
                let occ = space.occupation(k);
                // polynomial in output creation operators, keyed by monomial index
                let mut poly: BTreeMap<usize, Complex64> = BTreeMap::from([(0, Complex64::new(1.0, 0.0))]);
                for (j, &count) in occ.iter().enumerate() {
                    for _ in 0..count {
                        let mut next = BTreeMap::new();
                        for (&mono, &coef) in &poly {
                            for (i, &stride) in strides.iter().enumerate() {
                                let amp = u.matrix[(i, j)];
                                if amp.norm() != 0.0 {
                                    *next.entry(mono + stride).or_insert(Complex64::new(0.0, 0.0)) += coef * amp;
                                }
                            }
                        }
                        poly = next;
                    }
                }
                let norm_in: f64 = occ.iter().map(|&n| sqrt_factorial(n)).product();
                for (mono, coef) in poly {
                    let norm_out: f64 = space.occupation(mono).iter().map(|&n| sqrt_factorial(n)).product();
                    matrix[(local[&mono], col)] = coef * (norm_out / norm_in);
                }
            }
            SectorBlock { indices, matrix }
        })
        .collect();
    Ok(LiftedUnitary { space: *space, blocks })
}

/// Lift `u` and apply it to `state`.
pub fn apply_network(state: &QuantumState, u: &ModeUnitary) -> Result<QuantumState> {
    lift_to_fock(u, &state.space())?.apply(state)
}

/// Places a two-mode (A, B) state on the internal-mode register
/// (A_u, A_v, B_u, B_v) with A in `u` and B in `cos χ u + sin χ v`.
pub fn distinguishability_embedding(state: &QuantumState, chi: DistinguishabilityAngle) -> Result<QuantumState> {
    let src = state.space();
    if src.num_modes() != 2 {
        return Err(Error::SpaceMismatch(format!(
            "distinguishability embedding takes a two-mode state, got {} modes",
            src.num_modes()
        )));
    }
    let target = FockSpace::new(4, src.cutoff())?;
    let map: Vec<usize> = (0..src.dim())
        .map(|k| {
            let occ = src.occupation(k);
            target.index_of(&[occ[0], 0, occ[1], 0]).expect("same cutoff")
        })
        .collect();
    let mut rho = CMatrix::zeros(target.dim(), target.dim());
    for i in 0..src.dim() {
        for j in 0..src.dim() {
            rho[(map[i], map[j])] = state.rho()[(i, j)];
        }
    }
    let embedded = QuantumState::from_trusted(target, rho);
    apply_network(&embedded, &internal_rotation(chi))
}

type Polynomial = BTreeMap<Vec<usize>, Complex64>;

/// `prod_i (sum_j c[i][j] x_j)^{powers[i]}` as a map from exponent vectors to coefficients.
fn expand_linear_product(coeffs: &CMatrix, powers: &[usize]) -> Polynomial {
    let n = coeffs.ncols();
    let mut poly: Polynomial = BTreeMap::from([(vec![0; n], Complex64::new(1.0, 0.0))]);
    for (i, &p) in powers.iter().enumerate() {
        for _ in 0..p {
            let mut next = BTreeMap::new();
            for (mono, coef) in &poly {
                for j in 0..n {
                    let c = coeffs[(i, j)];
                    if c.norm() == 0.0 {
                        continue;
                    }
                    let mut e = mono.clone();
                    e[j] += 1;
                    *next.entry(e).or_insert(Complex64::new(0.0, 0.0)) += coef * c;
                }
            }
            poly = next;
        }
    }
    poly
}

/// Expectation of a normal-ordered monomial in the network's *output* modes,
/// evaluated on the *input* state by substituting `a_out_i = sum_j u[i][j] a_j`.
pub fn substituted_moment(state: &QuantumState, u: &ModeUnitary, request: &MomentRequest) -> Result<Complex64> {
    substituted_moment_linear(state, &u.matrix, request)
}

/// [`substituted_moment`] for an arbitrary linear map from the state's modes
/// (columns) to output modes (rows), such as a unitary restricted to the
/// non-vacuum inputs.
pub fn substituted_moment_linear(state: &QuantumState, map: &CMatrix, request: &MomentRequest) -> Result<Complex64> {
    let m = state.space().num_modes();
    if map.ncols() != m || request.num_modes() != map.nrows() {
        return Err(Error::SpaceMismatch(format!(
            "{}x{} map, request on {} modes, state on {m}",
            map.nrows(),
            map.ncols(),
            request.num_modes()
        )));
    }
    let conj = map.map(|z| z.conj());
    let creation = expand_linear_product(&conj, request.creation_powers());
    let annihilation = expand_linear_product(map, request.annihilation_powers());
    let mut total = Complex64::new(0.0, 0.0);
    for (ce, cc) in &creation {
        for (ae, ac) in &annihilation {
            let req = MomentRequest::new(ce.clone(), ae.clone())?;
            total += cc * ac * normal_ordered_moment(state, &req)?;
        }
    }
    Ok(total)
}
