//! Truncated multimode Fock space.
//!
//! Basis ordering: a basis vector is an occupation vector `(n_0, ..., n_{M-1})`
//! with every `n_i <= cutoff`. Its linear index is the mixed-radix number with
//! mode 0 as the most significant (slowest varying) digit:
//!
//! ```text
//! index = sum_i n_i * (cutoff + 1)^(M - 1 - i)
//! ```
//!
//! With this ordering the Kronecker product `left ⊗ right` of two state
//! matrices is the state on the concatenated mode list `left modes ++ right modes`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const TRACE_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-12;
const EIGEN_TOL: f64 = 1e-9;
const REAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockSpace {
    num_modes: usize,
    cutoff: usize,
    dim: usize,
}

impl FockSpace {
    pub const DEFAULT_DIMENSION_LIMIT: usize = 1_000_000;

    /// Space of `num_modes` modes holding at most `cutoff` photons each.
    pub fn new(num_modes: usize, cutoff: usize) -> Result<Self> {
        Self::with_limit(num_modes, cutoff, Self::DEFAULT_DIMENSION_LIMIT)
    }

    pub fn with_limit(num_modes: usize, cutoff: usize, limit: usize) -> Result<Self> {
        if num_modes == 0 {
            return Err(Error::InvalidSpace("num_modes must be at least 1".into()));
        }
        if cutoff == 0 {
            return Err(Error::InvalidSpace("cutoff must be at least 1".into()));
        }
        let overflow = Error::DimensionLimit {
            num_modes,
            cutoff,
            limit,
        };
        let local = cutoff.checked_add(1).ok_or_else(|| overflow.clone())?;
        let exp = u32::try_from(num_modes).map_err(|_| overflow.clone())?;
        let dim = local.checked_pow(exp).ok_or_else(|| overflow.clone())?;
        if dim > limit {
            return Err(overflow);
        }
        Ok(Self { num_modes, cutoff, dim })
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn local_dim(&self) -> usize {
        self.cutoff + 1
    }

    /// Same mode count with a different cutoff.
    pub fn with_cutoff(&self, cutoff: usize) -> Result<Self> {
        Self::new(self.num_modes, cutoff)
    }

    pub(crate) fn stride(&self, mode: usize) -> usize {
        self.local_dim().pow((self.num_modes - 1 - mode) as u32)
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.num_modes {
            Ok(())
        } else {
            Err(Error::ModeOutOfRange {
                mode,
                num_modes: self.num_modes,
            })
        }
    }

    /// Linear index of an occupation vector, or `None` if it does not fit.
    pub fn index_of(&self, occupation: &[usize]) -> Option<usize> {
        if occupation.len() != self.num_modes {
            return None;
        }
        let mut index = 0;
        for &n in occupation {
            if n > self.cutoff {
                return None;
            }
            index = index * self.local_dim() + n;
        }
        Some(index)
    }

    pub fn occupation(&self, index: usize) -> Vec<usize> {
        let mut occ = vec![0; self.num_modes];
        self.decode_into(index, &mut occ);
        occ
    }

    pub(crate) fn decode_into(&self, mut index: usize, occ: &mut [usize]) {
        let d = self.local_dim();
        for slot in occ.iter_mut().rev() {
            *slot = index % d;
            index /= d;
        }
    }

    pub fn total_photons(&self, index: usize) -> usize {
        let d = self.local_dim();
        let mut index = index;
        let mut total = 0;
        for _ in 0..self.num_modes {
            total += index % d;
            index /= d;
        }
        total
    }
}

/// Density operator on a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    space: FockSpace,
    rho: CMatrix,
}

impl QuantumState {
    /// Validates trace, Hermiticity and positivity before accepting `rho`.
    pub fn new(space: FockSpace, rho: CMatrix) -> Result<Self> {
        if rho.nrows() != space.dim() || rho.ncols() != space.dim() {
            return Err(Error::InvalidState(format!(
                "matrix is {}x{}, space dimension is {}",
                rho.nrows(),
                rho.ncols(),
                space.dim()
            )));
        }
        let state = Self { space, rho };
        let diag = validate_state(&state);
        if diag.trace_deviation > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "trace deviates from 1 by {:.3e}",
                diag.trace_deviation
            )));
        }
        if diag.hermiticity_deviation > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max deviation {:.3e})",
                diag.hermiticity_deviation
            )));
        }
        if diag.min_eigenvalue < -EIGEN_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:.3e}",
                diag.min_eigenvalue
            )));
        }
        Ok(state)
    }

    /// Caller guarantees `rho` is a density matrix on `space`.
    pub(crate) fn from_trusted(space: FockSpace, rho: CMatrix) -> Self {
        debug_assert_eq!(rho.nrows(), space.dim());
        Self { space, rho }
    }

    /// Rank-1 state `|psi><psi|`; the amplitudes are normalized here.
    pub fn pure(space: FockSpace, amplitudes: &[Complex64]) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::InvalidState(format!(
                "{} amplitudes for a space of dimension {}",
                amplitudes.len(),
                space.dim()
            )));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("state vector has zero norm".into()));
        }
        let psi: Vec<Complex64> = amplitudes.iter().map(|a| a / norm).collect();
        let rho = CMatrix::from_fn(space.dim(), space.dim(), |i, j| psi[i] * psi[j].conj());
        Ok(Self::from_trusted(space, rho))
    }

    /// Number state `|n_0, n_1, ...>`.
    pub fn basis(space: FockSpace, occupation: &[usize]) -> Result<Self> {
        let index = space.index_of(occupation).ok_or_else(|| {
            Error::InvalidState(format!(
                "occupation {occupation:?} does not fit a {}-mode space with cutoff {}",
                space.num_modes(),
                space.cutoff()
            ))
        })?;
        let mut rho = CMatrix::zeros(space.dim(), space.dim());
        rho[(index, index)] = Complex64::new(1.0, 0.0);
        Ok(Self::from_trusted(space, rho))
    }

    pub fn vacuum(space: FockSpace) -> Self {
        let mut rho = CMatrix::zeros(space.dim(), space.dim());
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        Self::from_trusted(space, rho)
    }

    pub fn maximally_mixed(space: FockSpace) -> Self {
        let d = space.dim();
        let rho = CMatrix::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0);
        Self::from_trusted(space, rho)
    }

    /// Convex combination `sum_i w_i rho_i`.
    pub fn mixture(components: &[(f64, QuantumState)]) -> Result<Self> {
        let (_, first) = components
            .first()
            .ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
        let space = first.space;
        let mut total = 0.0;
        let mut rho = CMatrix::zeros(space.dim(), space.dim());
        for (w, state) in components {
            if *w < 0.0 || !w.is_finite() {
                return Err(Error::InvalidState(format!("negative mixture weight {w}")));
            }
            if state.space != space {
                return Err(Error::SpaceMismatch(
                    "mixture components live on different spaces".into(),
                ));
            }
            total += w;
            rho += &state.rho * Complex64::new(*w, 0.0);
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(Self::from_trusted(space, rho))
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn into_rho(self) -> CMatrix {
        self.rho
    }

    /// Probability weight on basis states with more than `total` photons in all.
    pub fn weight_above_total(&self, total: usize) -> f64 {
        (0..self.space.dim())
            .filter(|&k| self.space.total_photons(k) > total)
            .map(|k| self.rho[(k, k)].re)
            .sum()
    }

    /// Reorders modes: mode `i` of the result is mode `order[i]` of `self`.
    pub fn permute_modes(&self, order: &[usize]) -> Result<Self> {
        let m = self.space.num_modes();
        let mut seen = vec![false; m];
        if order.len() != m {
            return Err(Error::SpaceMismatch(format!(
                "permutation of length {} for {m} modes",
                order.len()
            )));
        }
        for &o in order {
            self.space.check_mode(o)?;
            if std::mem::replace(&mut seen[o], true) {
                return Err(Error::SpaceMismatch(format!("mode {o} repeated in permutation")));
            }
        }
        let map: Vec<usize> = (0..self.space.dim())
            .map(|new_index| {
                let new_occ = self.space.occupation(new_index);
                let mut old_occ = vec![0; m];
                for (i, &o) in order.iter().enumerate() {
                    old_occ[o] = new_occ[i];
                }
                self.space.index_of(&old_occ).expect("same cutoff")
            })
            .collect();
        let rho = CMatrix::from_fn(self.space.dim(), self.space.dim(), |i, j| self.rho[(map[i], map[j])]);
        Ok(Self::from_trusted(self.space, rho))
    }
}

/// Normal-ordered monomial `prod_i a_i†^{m_i} prod_i a_i^{n_i}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MomentRequest {
    creation: Vec<usize>,
    annihilation: Vec<usize>,
}

impl MomentRequest {
    pub fn new(creation: Vec<usize>, annihilation: Vec<usize>) -> Result<Self> {
        if creation.len() != annihilation.len() {
            return Err(Error::SpaceMismatch(format!(
                "creation powers for {} modes, annihilation powers for {}",
                creation.len(),
                annihilation.len()
            )));
        }
        Ok(Self { creation, annihilation })
    }

    /// Identity request on `num_modes` modes; extend with [`create`](Self::create)
    /// and [`annihilate`](Self::annihilate).
    pub fn identity(num_modes: usize) -> Self {
        Self {
            creation: vec![0; num_modes],
            annihilation: vec![0; num_modes],
        }
    }

    pub fn create(mut self, mode: usize, power: usize) -> Self {
        self.creation[mode] += power;
        self
    }

    pub fn annihilate(mut self, mode: usize, power: usize) -> Self {
        self.annihilation[mode] += power;
        self
    }

    /// `<:prod_{j in modes} N_j:>` request.
    pub fn intensity_product(num_modes: usize, modes: &[usize]) -> Self {
        modes
            .iter()
            .fold(Self::identity(num_modes), |r, &j| r.create(j, 1).annihilate(j, 1))
    }

    pub fn creation_powers(&self) -> &[usize] {
        &self.creation
    }

    pub fn annihilation_powers(&self) -> &[usize] {
        &self.annihilation
    }

    pub fn num_modes(&self) -> usize {
        self.creation.len()
    }

    pub fn total_power(&self) -> usize {
        self.creation.iter().chain(&self.annihilation).sum()
    }

    fn check(&self, space: &FockSpace) -> Result<()> {
        if self.num_modes() != space.num_modes() {
            return Err(Error::SpaceMismatch(format!(
                "request on {} modes, state on {}",
                self.num_modes(),
                space.num_modes()
            )));
        }
        for (mode, (&c, &a)) in self.creation.iter().zip(&self.annihilation).enumerate() {
            let power = c.max(a);
            if power > space.cutoff() {
                return Err(Error::PowerExceedsCutoff {
                    mode,
                    power,
                    cutoff: space.cutoff(),
                });
            }
        }
        Ok(())
    }
}

pub fn build_space(num_modes: usize, cutoff: usize) -> Result<FockSpace> {
    FockSpace::new(num_modes, cutoff)
}

/// Matrix of `a_mode` in the truncated basis, identity on the other modes.
pub fn annihilation_matrix(space: &FockSpace, mode: usize) -> Result<CMatrix> {
    space.check_mode(mode)?;
    let d = space.dim();
    let stride = space.stride(mode);
    let local = space.local_dim();
    let mut m = CMatrix::zeros(d, d);
    for col in 0..d {
        let n = (col / stride) % local;
        if n > 0 {
            m[(col - stride, col)] = Complex64::new((n as f64).sqrt(), 0.0);
        }
    }
    Ok(m)
}

pub fn creation_matrix(space: &FockSpace, mode: usize) -> Result<CMatrix> {
    Ok(annihilation_matrix(space, mode)?.adjoint())
}

/// `sqrt(n! / (n - p)!)` for `p <= n`.
fn falling_sqrt(n: usize, p: usize) -> f64 {
    ((n - p + 1)..=n).map(|k| k as f64).product::<f64>().sqrt()
}

/// `tr(rho prod a†^m prod a^n)`.
///
/// A normal-ordered monomial maps each basis vector to a multiple of a single
/// basis vector, so the trace is a single pass over the diagonal of the
/// operator's action. Creation past the cutoff annihilates the vector, which
/// reproduces the truncated-matrix product exactly.
pub fn normal_ordered_moment(state: &QuantumState, request: &MomentRequest) -> Result<Complex64> {
    let space = state.space();
    request.check(&space)?;
    let mut occ = vec![0usize; space.num_modes()];
    let mut acc = Complex64::new(0.0, 0.0);
    'basis: for k in 0..space.dim() {
        space.decode_into(k, &mut occ);
        let mut coeff = 1.0;
        let mut target = 0usize;
        for (mode, &n) in occ.iter().enumerate() {
            let lowered = match n.checked_sub(request.annihilation[mode]) {
                Some(v) => v,
                None => continue 'basis,
            };
            let raised = lowered + request.creation[mode];
            if raised > space.cutoff() {
                continue 'basis;
            }
            coeff *= falling_sqrt(n, request.annihilation[mode]) * falling_sqrt(raised, request.creation[mode]);
            target = target * space.local_dim() + raised;
        }
        // <k| rho O |k> = coeff * rho[k, target]
        acc += state.rho[(k, target)] * coeff;
    }
    Ok(acc)
}

/// `<a_mode† a_mode>`.
pub fn mean_photon_number(state: &QuantumState, mode: usize) -> Result<f64> {
    state.space().check_mode(mode)?;
    let req = MomentRequest::identity(state.space().num_modes())
        .create(mode, 1)
        .annihilate(mode, 1);
    let value = normal_ordered_moment(state, &req)?;
    if value.im.abs() > REAL_TOL {
        return Err(Error::NonRealMoment {
            name: format!("<N_{mode}>"),
            imag: value.im,
        });
    }
    Ok(value.re)
}

/// State on the concatenated mode list (modes of `left` first).
pub fn tensor_product(left: &QuantumState, right: &QuantumState) -> Result<QuantumState> {
    let (ls, rs) = (left.space(), right.space());
    if ls.cutoff() != rs.cutoff() {
        return Err(Error::SpaceMismatch(format!(
            "cutoff {} vs {}",
            ls.cutoff(),
            rs.cutoff()
        )));
    }
    let space = FockSpace::new(ls.num_modes() + rs.num_modes(), ls.cutoff())?;
    Ok(QuantumState::from_trusted(space, left.rho.kronecker(&right.rho)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDiagnostics {
    pub trace_deviation: f64,
    pub hermiticity_deviation: f64,
    pub min_eigenvalue: f64,
    /// Weight on basis states with at least one mode at the cutoff.
    pub tail_mass: f64,
}

impl StateDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.trace_deviation <= TRACE_TOL
            && self.hermiticity_deviation <= HERMITIAN_TOL
            && self.min_eigenvalue >= -EIGEN_TOL
    }

    pub fn cutoff_adequate(&self, threshold: f64) -> bool {
        self.tail_mass <= threshold
    }
}

pub fn validate_state(state: &QuantumState) -> StateDiagnostics {
    let rho = &state.rho;
    let space = state.space();
    let trace = rho.trace();
    let trace_deviation = (trace - Complex64::new(1.0, 0.0)).norm();
    let mut hermiticity_deviation: f64 = 0.0;
    for i in 0..rho.nrows() {
        for j in i..rho.ncols() {
            hermiticity_deviation = hermiticity_deviation.max((rho[(i, j)] - rho[(j, i)].conj()).norm());
        }
    }
    // Eigenvalues of the Hermitian part; the anti-Hermitian residue is reported above.
    let herm = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let min_eigenvalue = herm
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let mut occ = vec![0; space.num_modes()];
    let tail_mass = (0..space.dim())
        .filter(|&k| {
            space.decode_into(k, &mut occ);
            occ.contains(&space.cutoff())
        })
        .map(|k| rho[(k, k)].re)
        .sum();
    StateDiagnostics {
        trace_deviation,
        hermiticity_deviation,
        min_eigenvalue,
        tail_mass,
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::StateSpec;
    use crate::states::{make_state, random_density_matrix};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn space_dimensions() {
        assert_eq!(FockSpace::new(2, 3).unwrap().dim(), 16);
        assert_eq!(FockSpace::new(4, 2).unwrap().dim(), 81);
        assert!(matches!(
            FockSpace::new(1, 1_000_000),
            Err(Error::DimensionLimit { limit: 1_000_000, .. })
        ));
        assert!(FockSpace::new(0, 3).is_err());
        assert!(FockSpace::new(2, 0).is_err());
        assert!(matches!(FockSpace::new(200, 9), Err(Error::DimensionLimit { .. })));
        assert!(FockSpace::with_limit(3, 3, 63).is_err());
        assert!(FockSpace::with_limit(3, 3, 64).is_ok());
    }

    #[test]
    fn index_round_trip_and_ordering() {
        let space = FockSpace::new(3, 2).unwrap();
        for k in 0..space.dim() {
            assert_eq!(space.index_of(&space.occupation(k)), Some(k));
        }
        // mode 0 is the slowest digit
        assert_eq!(space.index_of(&[1, 0, 0]), Some(9));
        assert_eq!(space.index_of(&[0, 0, 1]), Some(1));
        assert_eq!(space.index_of(&[3, 0, 0]), None);
        assert_eq!(space.total_photons(space.index_of(&[2, 1, 2]).unwrap()), 5);
    }

    #[test]
    fn annihilation_entries() {
        let space = FockSpace::new(1, 2).unwrap();
        let a = annihilation_matrix(&space, 0).unwrap();
        assert_abs_diff_eq!(a[(1, 2)].re, std::f64::consts::SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(a[(0, 1)].re, 1.0, epsilon = 1e-15);
        assert!(a.column(0).iter().all(|z| z.norm() == 0.0));
        assert!(annihilation_matrix(&space, 1).is_err());
    }

    #[test]
    fn truncated_commutator() {
        let cutoff = 5;
        let space = FockSpace::new(1, cutoff).unwrap();
        let a = annihilation_matrix(&space, 0).unwrap();
        let ad = a.adjoint();
        let comm = &a * &ad - &ad * &a;
        for i in 0..=cutoff {
            for j in 0..=cutoff {
                let expected = match (i == j, i < cutoff) {
                    (true, true) => 1.0,
                    (true, false) => -(cutoff as f64),
                    _ => 0.0,
                };
                assert_abs_diff_eq!(comm[(i, j)].re, expected, epsilon = 1e-12);
                assert_abs_diff_eq!(comm[(i, j)].im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn embedded_annihilation_acts_on_one_mode() {
        let space = FockSpace::new(2, 2).unwrap();
        let a_b = annihilation_matrix(&space, 1).unwrap();
        let from = space.index_of(&[2, 1]).unwrap();
        let to = space.index_of(&[2, 0]).unwrap();
        assert_abs_diff_eq!(a_b[(to, from)].re, 1.0, epsilon = 1e-15);
        assert_eq!(a_b.iter().filter(|z| z.norm() > 0.0).count(), 6);
    }

    #[test]
    fn fock_moments() {
        let space = FockSpace::new(2, 3).unwrap();
        let s = QuantumState::basis(space, &[1, 1]).unwrap();
        let req = MomentRequest::intensity_product(2, &[0, 1]);
        assert_abs_diff_eq!(normal_ordered_moment(&s, &req).unwrap().re, 1.0, epsilon = 1e-15);

        let single = FockSpace::new(1, 3).unwrap();
        let two = QuantumState::basis(single, &[2]).unwrap();
        let g2 = MomentRequest::identity(1).create(0, 2).annihilate(0, 2);
        assert_abs_diff_eq!(normal_ordered_moment(&two, &g2).unwrap().re, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(oracle::dense_moment(&two, &g2).re, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(mean_photon_number(&two, 0).unwrap(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn coherent_moments_match_analytic() {
        let space = FockSpace::new(1, 16).unwrap();
        let coh = make_state(&StateSpec::coherent(Complex64::new(1.0, 0.0)), &space, 0).unwrap();
        let g2 = MomentRequest::identity(1).create(0, 2).annihilate(0, 2);
        assert_abs_diff_eq!(normal_ordered_moment(&coh, &g2).unwrap().re, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(mean_photon_number(&coh, 0).unwrap(), 1.0, epsilon = 1e-8);

        let space = FockSpace::new(1, 12).unwrap();
        let coh = make_state(&StateSpec::coherent(Complex64::new(1.0, 0.0)), &space, 0).unwrap();
        assert_abs_diff_eq!(mean_photon_number(&coh, 0).unwrap(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn thermal_mean() {
        let space = FockSpace::new(1, 20).unwrap();
        let th = make_state(&StateSpec::thermal(0.5), &space, 0).unwrap();
        assert_abs_diff_eq!(mean_photon_number(&th, 0).unwrap(), 0.5, epsilon = 1e-6);
    }

    #[test]
    fn moment_request_errors() {
        let space = FockSpace::new(2, 2).unwrap();
        let s = QuantumState::vacuum(space);
        let too_high = MomentRequest::identity(2).create(0, 3);
        assert!(matches!(
            normal_ordered_moment(&s, &too_high),
            Err(Error::PowerExceedsCutoff {
                mode: 0,
                power: 3,
                cutoff: 2
            })
        ));
        let wrong = MomentRequest::identity(3);
        assert!(matches!(
            normal_ordered_moment(&s, &wrong),
            Err(Error::SpaceMismatch(_))
        ));
        assert!(mean_photon_number(&s, 2).is_err());
    }

    #[test]
    fn tensor_products() {
        let one = FockSpace::new(1, 2).unwrap();
        let s1 = QuantumState::basis(one, &[1]).unwrap();
        let prod = tensor_product(&s1, &s1).unwrap();
        let idx = prod.space().index_of(&[1, 1]).unwrap();
        let nonzero: Vec<_> = prod.rho().iter().enumerate().filter(|(_, z)| z.norm() > 0.0).collect();
        assert_eq!(nonzero.len(), 1);
        assert_abs_diff_eq!(prod.rho()[(idx, idx)].re, 1.0);
        assert_abs_diff_eq!(prod.rho().trace().re, 1.0, epsilon = 1e-15);

        let big = FockSpace::new(1, 20).unwrap();
        let th = make_state(&StateSpec::thermal(0.5), &big, 0).unwrap();
        let tv = tensor_product(&th, &QuantumState::vacuum(big)).unwrap();
        assert_abs_diff_eq!(mean_photon_number(&tv, 1).unwrap(), 0.0);
        let g2b = MomentRequest::identity(2).create(1, 2).annihilate(1, 2);
        assert_eq!(normal_ordered_moment(&tv, &g2b).unwrap().norm(), 0.0);
        assert_abs_diff_eq!(tv.rho().trace().re, 1.0, epsilon = 1e-12);

        let other = FockSpace::new(1, 3).unwrap();
        assert!(tensor_product(&s1, &QuantumState::vacuum(other)).is_err());
    }

    #[test]
    fn diagnostics() {
        let space = FockSpace::new(2, 3).unwrap();
        let d = validate_state(&QuantumState::basis(space, &[1, 1]).unwrap());
        assert_eq!(d.trace_deviation, 0.0);
        assert_eq!(d.hermiticity_deviation, 0.0);
        assert_abs_diff_eq!(d.min_eigenvalue, 0.0, epsilon = 1e-12);
        assert_eq!(d.tail_mass, 0.0);

        let qutrit = FockSpace::new(1, 2).unwrap();
        let d = validate_state(&QuantumState::maximally_mixed(qutrit));
        assert_abs_diff_eq!(d.min_eigenvalue, 1.0 / 3.0, epsilon = 1e-12);

        let small = FockSpace::new(1, 4).unwrap();
        let coh =
            crate::states::make_state_with(&StateSpec::coherent(Complex64::new(2.0, 0.0)), &small, 0, 1.0).unwrap();
        let d = validate_state(&coh);
        assert!(d.is_valid());
        assert!(d.tail_mass > 0.05);
        assert!(!d.cutoff_adequate(0.05));
    }

    #[test]
    fn constructor_rejects_invalid_matrices() {
        let space = FockSpace::new(1, 1).unwrap();
        let bad_trace = CMatrix::identity(2, 2);
        assert!(QuantumState::new(space, bad_trace).is_err());
        let non_herm = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.1), c(0.0), c(0.5)]);
        assert!(QuantumState::new(space, non_herm).is_err());
        let negative = CMatrix::from_row_slice(2, 2, &[c(1.5), c(0.0), c(0.0), c(-0.5)]);
        assert!(QuantumState::new(space, negative).is_err());
        assert!(QuantumState::new(space, CMatrix::identity(3, 3)).is_err());
        let ok = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.5), c(0.5), c(0.5)]);
        assert!(QuantumState::new(space, ok).is_ok());
    }

    #[test]
    fn permutation_swaps_moments() {
        let space = FockSpace::new(2, 3).unwrap();
        let s = random_density_matrix(7, &space, None);
        let swapped = s.permute_modes(&[1, 0]).unwrap();
        let req = MomentRequest::identity(2).create(0, 2).annihilate(1, 1);
        let req_sw = MomentRequest::identity(2).create(1, 2).annihilate(0, 1);
        let a = normal_ordered_moment(&s, &req).unwrap();
        let b = normal_ordered_moment(&swapped, &req_sw).unwrap();
        assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-14);
        assert!(s.permute_modes(&[0, 0]).is_err());
    }

    fn all_requests(max_total: usize, cutoff: usize) -> Vec<MomentRequest> {
        let mut out = Vec::new();
        let r = 0..=cutoff.min(max_total);
        for ca in r.clone() {
            for cb in r.clone() {
                for na in r.clone() {
                    for nb in r.clone() {
                        if ca + cb + na + nb <= max_total {
                            out.push(MomentRequest::new(vec![ca, cb], vec![na, nb]).unwrap());
                        }
                    }
                }
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn identity_moment_is_trace(seed in any::<u64>(), cutoff in 1usize..4) {
            let space = FockSpace::new(2, cutoff).unwrap();
            let s = random_density_matrix(seed, &space, None);
            let v = normal_ordered_moment(&s, &MomentRequest::identity(2)).unwrap();
            prop_assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        }

        #[test]
        fn matches_dense_oracle(seed in any::<u64>()) {
            let space = FockSpace::new(2, 3).unwrap();
            let s = random_density_matrix(seed, &space, None);
            for req in all_requests(4, 3) {
                let fast = normal_ordered_moment(&s, &req).unwrap();
                let dense = oracle::dense_moment(&s, &req);
                prop_assert!((fast - dense).norm() < 1e-12, "{:?}: {} vs {}", req, fast, dense);
            }
        }

        #[test]
        fn hermitian_pairing(seed in any::<u64>(), m in 0usize..4, n in 0usize..4) {
            let space = FockSpace::new(2, 3).unwrap();
            let s = random_density_matrix(seed, &space, None);
            let fwd = MomentRequest::identity(2).create(0, m).annihilate(1, n);
            let back = MomentRequest::identity(2).create(1, n).annihilate(0, m);
            let x = normal_ordered_moment(&s, &fwd).unwrap();
            let y = normal_ordered_moment(&s, &back).unwrap();
            prop_assert!((x - y.conj()).norm() < 1e-10);
        }

        #[test]
        fn moment_matrix_positivity(seed in any::<u64>(), cutoff in 2usize..5) {
            let space = FockSpace::new(2, cutoff).unwrap();
            let s = random_density_matrix(seed, &space, None);
            for n in 1..=cutoff / 2 {
                let aa = MomentRequest::identity(2).create(0, n).annihilate(0, n);
                let bb = MomentRequest::identity(2).create(1, n).annihilate(1, n);
                let ab = MomentRequest::identity(2).create(0, n).annihilate(1, n);
                let gaa = normal_ordered_moment(&s, &aa).unwrap().re;
                let gbb = normal_ordered_moment(&s, &bb).unwrap().re;
                let gab = normal_ordered_moment(&s, &ab).unwrap();
                prop_assert!(gaa * gbb - gab.norm_sqr() >= -1e-9);
            }
        }
    }
}
