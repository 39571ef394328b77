//! Constructors for the physical input states.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fock::{tensor_product, CMatrix, FockSpace, QuantumState};
use crate::spec::{StateKind, StateSpec};

/// Largest truncation loss accepted by [`make_state`].
pub const DEFAULT_TAIL_THRESHOLD: f64 = 1e-6;

/// Photon-number distribution of the Example-2 mode A: n̄ = 1, g² = 0.8.
pub const EXAMPLE2_MODE_A: [f64; 3] = [0.4, 0.2, 0.4];
/// Photon-number distribution of the Example-2 mode B: n̄ = 0.5, g² = 0.8.
pub const EXAMPLE2_MODE_B: [f64; 3] = [0.6, 0.3, 0.1];

/// Truncated, renormalized single-mode matrix plus the probability lost to truncation.
fn single_mode(spec: &StateSpec, cutoff: usize) -> Result<(CMatrix, f64)> {
    let d = cutoff + 1;
    let diag = |p: &[f64]| {
        let mut m = CMatrix::zeros(d, d);
        for (n, &w) in p.iter().enumerate().take(d) {
            m[(n, n)] = Complex64::new(w, 0.0);
        }
        m
    };
    let renormalize = |mut m: CMatrix| {
        let t = m.trace().re;
        m /= Complex64::new(t, 0.0);
        m
    };
    match &spec.kind {
        StateKind::Fock(n) => {
            if *n > cutoff {
                Ok((CMatrix::zeros(d, d), 1.0))
            } else {
                let mut p = vec![0.0; d];
                p[*n] = 1.0;
                Ok((diag(&p), 0.0))
            }
        }
        StateKind::Coherent(alpha) => {
            let (amps, tail) = coherent_amplitudes(*alpha, cutoff);
            let m = CMatrix::from_fn(d, d, |i, j| amps[i] * amps[j].conj());
            Ok((renormalize(m), tail))
        }
        StateKind::PhaseAveragedCoherent(r) => {
            let (amps, tail) = coherent_amplitudes(Complex64::new(*r, 0.0), cutoff);
            let p: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
            Ok((renormalize(diag(&p)), tail))
        }
        StateKind::Thermal(nbar) => {
            let ratio = nbar / (1.0 + nbar);
            let p: Vec<f64> = (0..d).map(|n| ratio.powi(n as i32) / (1.0 + nbar)).collect();
            Ok((renormalize(diag(&p)), ratio.powi(d as i32)))
        }
        StateKind::NumberDiagonal(p) => {
            let tail: f64 = p.iter().skip(d).sum();
            if tail >= 1.0 {
                return Ok((CMatrix::zeros(d, d), 1.0));
            }
            Ok((renormalize(diag(p)), tail))
        }
        StateKind::Mixture(parts) => {
            let mut m = CMatrix::zeros(d, d);
            let mut tail = 0.0;
            for (w, s) in parts {
                let (part, t) = single_mode(s, cutoff)?;
                m += part * Complex64::new(*w, 0.0);
                tail += w * t;
            }
            Ok((m, tail))
        }
    }
}

/// Amplitudes `<n|alpha>` for `n <= cutoff` and the Poisson weight beyond.
fn coherent_amplitudes(alpha: Complex64, cutoff: usize) -> (Vec<Complex64>, f64) {
    let lambda = alpha.norm_sqr();
    let mut amps = Vec::with_capacity(cutoff + 1);
    let mut a = Complex64::new((-lambda / 2.0).exp(), 0.0);
    amps.push(a);
    for n in 1..=cutoff {
        a = a * alpha / (n as f64).sqrt();
        amps.push(a);
    }
    (amps, poisson_tail(lambda, cutoff + 1))
}

/// `P(N >= from)` for `N ~ Poisson(lambda)`, summed directly so small tails
/// keep full relative precision.
pub(crate) fn poisson_tail(lambda: f64, from: usize) -> f64 {
    if lambda == 0.0 {
        return if from == 0 { 1.0 } else { 0.0 };
    }
    let ln_l = lambda.ln();
    let mut ln_p = -lambda;
    for n in 1..=from {
        ln_p += ln_l - (n as f64).ln();
    }
    let mut total = 0.0;
    let mut n = from;
    loop {
        let term = ln_p.exp();
        total += term;
        n += 1;
        ln_p += ln_l - (n as f64).ln();
        if (n as f64) > lambda && term <= total * 1e-17 {
            break;
        }
    }
    total.min(1.0)
}

pub fn make_state(spec: &StateSpec, space: &FockSpace, mode: usize) -> Result<QuantumState> {
    make_state_with(spec, space, mode, DEFAULT_TAIL_THRESHOLD)
}

/// Places `spec` on `mode` with vacuum on every other mode. Fails if the
/// probability truncated away by the cutoff exceeds `tail_threshold`.
pub fn make_state_with(spec: &StateSpec, space: &FockSpace, mode: usize, tail_threshold: f64) -> Result<QuantumState> {
    spec.validate()?;
    space.check_mode(mode)?;
    let (rho, tail) = single_mode(spec, space.cutoff())?;
    if tail > tail_threshold || tail >= 1.0 {
        return Err(Error::TailMass {
            tail,
            threshold: tail_threshold,
            cutoff: space.cutoff(),
        });
    }
    let local = FockSpace::new(1, space.cutoff())?;
    let vacuum = QuantumState::vacuum(local);
    let target = QuantumState::from_trusted(local, rho);
    let mut state = if mode == 0 { target.clone() } else { vacuum.clone() };
    for m in 1..space.num_modes() {
        let factor = if m == mode { &target } else { &vacuum };
        state = tensor_product(&state, factor)?;
    }
    Ok(state)
}

/// Product state with `specs[i]` on mode `i`.
pub fn product_state(specs: &[StateSpec], cutoff: usize, tail_threshold: f64) -> Result<QuantumState> {
    let local = FockSpace::new(1, cutoff)?;
    let mut iter = specs.iter();
    let first = iter.next().ok_or_else(|| Error::InvalidSpec("no modes given".into()))?;
    let mut state = make_state_with(first, &local, 0, tail_threshold)?;
    for s in iter {
        state = tensor_product(&state, &make_state_with(s, &local, 0, tail_threshold)?)?;
    }
    Ok(state)
}

/// Concrete two-mode state with g²_AA = g²_BB = 0.8, ζ = 2 and g²_AB = 1.
pub fn example2_pair(space: &FockSpace) -> Result<QuantumState> {
    if space.num_modes() != 2 {
        return Err(Error::SpaceMismatch(format!(
            "example pair needs 2 modes, space has {}",
            space.num_modes()
        )));
    }
    if space.cutoff() < 2 {
        return Err(Error::CutoffInsufficient {
            cutoff: space.cutoff(),
            reason: "the example pair has up to 2 photons per mode".into(),
        });
    }
    product_state(
        &[
            StateSpec::number_diagonal(EXAMPLE2_MODE_A.to_vec()),
            StateSpec::number_diagonal(EXAMPLE2_MODE_B.to_vec()),
        ],
        space.cutoff(),
        0.0,
    )
}

/// Largest mean photon number whose truncated Poisson distribution keeps the
/// second factorial moment accurate to 1e-12 (relative) and the tail below 1e-6.
pub fn classical_intensity_cap(cutoff: usize) -> f64 {
    let ok = |lambda: f64| {
        poisson_tail(lambda, cutoff.saturating_sub(1)) <= 1e-12
            && poisson_tail(lambda, cutoff + 1) <= DEFAULT_TAIL_THRESHOLD
    };
    let (mut lo, mut hi) = (0.0, cutoff as f64 + 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Seeded finite mixture of coherent-product states on a two-mode space.
///
/// Intensities are capped by [`classical_intensity_cap`] so truncation cannot
/// make the ensemble look sub-Poissonian at second order.
pub fn random_classical_two_mode(seed: u64, space: &FockSpace) -> QuantumState {
    assert_eq!(space.num_modes(), 2, "classical ensemble is two-mode");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = classical_intensity_cap(space.cutoff());
    let components = rng.random_range(3..=5);
    let weights: Vec<f64> = (0..components).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let local = space.local_dim();
    let mut rho = CMatrix::zeros(space.dim(), space.dim());
    for w in weights {
        let mut amp = || {
            let lambda: f64 = rng.random_range(0.01 * cap..=cap);
            let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            Complex64::from_polar(lambda.sqrt(), phase)
        };
        let (a, b) = (amp(), amp());
        let (va, _) = coherent_amplitudes(a, space.cutoff());
        let (vb, _) = coherent_amplitudes(b, space.cutoff());
        let psi: Vec<Complex64> = (0..space.dim()).map(|k| va[k / local] * vb[k % local]).collect();
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let scale = Complex64::new(w / total / norm, 0.0);
        for i in 0..space.dim() {
            for j in 0..space.dim() {
                rho[(i, j)] += psi[i] * psi[j].conj() * scale;
            }
        }
    }
    QuantumState::from_trusted(*space, rho)
}

/// Seeded random density matrix `G G† / tr(G G†)` with complex Gaussian `G`.
///
/// With `max_total = Some(n)` the state is supported only on basis vectors
/// holding at most `n` photons in all.
pub fn random_density_matrix(seed: u64, space: &FockSpace, max_total: Option<usize>) -> QuantumState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = space.dim();
    let allowed: Vec<bool> = (0..d)
        .map(|k| max_total.is_none_or(|n| space.total_photons(k) <= n))
        .collect();
    let g = CMatrix::from_fn(d, d, |i, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        if allowed[i] {
            Complex64::new(re, im)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let mut rho = &g * g.adjoint();
    let t = rho.trace().re;
    rho /= Complex64::new(t, 0.0);
    // exact Hermiticity
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    QuantumState::from_trusted(*space, rho)
}
