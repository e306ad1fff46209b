//! Initialization for intensity measurements bᵢ = ⟨aᵢ, x₀⟩² + εᵢ: pivot by
//! diagonal intensity correlation, support by cross-correlation
//! thresholding, restricted spectral estimate with intensity-based scaling.

use crate::error::Error;
use crate::init::InitEstimate;
use crate::linalg::{canonicalize_sign, embed_vec, norm, IndexSet, SymMatrix};
use crate::par;
use crate::rng::{self, Stream};
use crate::sensing::{GaussianTable, NoiseKind, StorageMode};
use crate::{linalg, Result};

/// Rank-one sensing experiment: m Gaussian vectors and intensity
/// measurements. Same storage and determinism contract as the quadratic
/// ensemble.
#[derive(Clone, Debug)]
pub struct PRInstance {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub x0: Vec<f64>,
    pub mu0: f64,
    /// Incoherence requested at generation time (recorded for round-trips).
    pub mu0_target: f64,
    pub sigma: f64,
    pub noise_kind: NoiseKind,
    pub noise: Vec<f64>,
    pub b: Vec<f64>,
    vectors: GaussianTable,
    pub seed: u64,
}

impl PRInstance {
    /// Entry aᵢ[j].
    #[inline(always)]
    pub fn vector_entry(&self, i: usize, j: usize) -> f64 {
        self.vectors.at(i, j)
    }

    pub fn mode(&self) -> StorageMode {
        self.vectors.mode()
    }

    pub(crate) fn raw_entries(&self) -> Option<&[f64]> {
        self.vectors.raw()
    }

    /// ⟨aᵢ, x⟩ over the nonzero coordinates of `x` in ascending order.
    pub fn inner(&self, x: &[f64], i: usize) -> f64 {
        x.iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, v)| self.vector_entry(i, j) * v)
            .sum()
    }
}

/// Generate a [`PRInstance`] with the same planted-vector construction as
/// the quadratic model.
#[allow(clippy::too_many_arguments)]
pub fn generate_pr_instance(
    n: usize,
    k: usize,
    m: usize,
    mu0_target: f64,
    sigma: f64,
    noise_kind: NoiseKind,
    mode: StorageMode,
    seed: u64,
) -> Result<PRInstance> {
    crate::sensing::validate_dims(n, k, m)?;
    crate::sensing::validate_mu0(k, mu0_target)?;
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid("sigma must be a finite nonnegative real"));
    }
    let vectors = GaussianTable::new(m, n, seed, mode)?;
    assemble_pr_instance(n, k, m, mu0_target, sigma, noise_kind, seed, vectors)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn assemble_pr_instance(
    n: usize,
    k: usize,
    m: usize,
    mu0_target: f64,
    sigma: f64,
    noise_kind: NoiseKind,
    seed: u64,
    vectors: GaussianTable,
) -> Result<PRInstance> {
    crate::sensing::validate_dims(n, k, m)?;
    crate::sensing::validate_mu0(k, mu0_target)?;
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid("sigma must be a finite nonnegative real"));
    }
    let x0 = crate::sensing::planted_vector(n, k, mu0_target, seed)?;
    let mu0 = x0.iter().fold(0.0f64, |a, &x| a.max(x.abs())) / norm(&x0);
    let ns = rng::stream_seed(seed, Stream::Noise);
    let noise: Vec<f64> = (0..m)
        .map(|i| match noise_kind {
            NoiseKind::None => 0.0,
            NoiseKind::Gaussian => sigma * rng::gaussian_at(ns, i as u64),
            NoiseKind::Laplace => sigma * rng::laplace_unit_at(ns, i as u64),
        })
        .collect();
    let nz: Vec<usize> = x0
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(j, _)| j)
        .collect();
    let b = par::map_indexed(m, |i| {
        let mut inner = 0.0;
        for &j in &nz {
            inner += vectors.at(i, j) * x0[j];
        }
        inner * inner + noise[i]
    });
    Ok(PRInstance {
        n,
        k,
        m,
        x0,
        mu0,
        mu0_target,
        sigma,
        noise_kind,
        noise,
        b,
        vectors,
        seed,
    })
}

/// Intensity-weighted coordinate energies d̂[j] = (1/m) Σᵢ aᵢ²[j] bᵢ;
/// E d̂[j] = ‖x₀‖² + 2x₀²[j].
pub fn pr_diag(instance: &PRInstance) -> Vec<f64> {
    let (n, m) = (instance.n, instance.m);
    let mut d = par::accumulate_vec(m, n, |i, acc| {
        let bi = instance.b[i];
        for (j, a) in acc.iter_mut().enumerate() {
            let e = instance.vector_entry(i, j);
            *a += e * e * bi;
        }
    });
    for e in d.iter_mut() {
        *e /= m as f64;
    }
    d
}

/// Pivot: argmax of the intensity-weighted energies, lowest index on ties.
pub fn pr_pivot(instance: &PRInstance) -> usize {
    let d = pr_diag(instance);
    let mut pivot = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, &v) in d.iter().enumerate() {
        if v > best {
            best = v;
            pivot = i;
        }
    }
    pivot
}

/// Cross-correlations v̂[ℓ] = (1/m) Σᵢ bᵢ aᵢ[pivot] aᵢ[ℓ];
/// E v̂[ℓ] = 2 x₀[pivot] x₀[ℓ] for ℓ ≠ pivot.
pub fn pr_cross(instance: &PRInstance, pivot: usize) -> Result<Vec<f64>> {
    let (n, m) = (instance.n, instance.m);
    if pivot >= n {
        return Err(Error::invalid(format!("pivot {pivot} out of range (n = {n})")));
    }
    let mut v = par::accumulate_vec(m, n, |i, acc| {
        let w = instance.b[i] * instance.vector_entry(i, pivot);
        for (l, a) in acc.iter_mut().enumerate() {
            *a += w * instance.vector_entry(i, l);
        }
    });
    for e in v.iter_mut() {
        *e /= m as f64;
    }
    Ok(v)
}

/// Threshold scale √(log⁴(m)·log²(k)/m). log(k) is clamped below at 1 so
/// the k = 1 and k = 2 cases keep a usable threshold.
pub fn pr_threshold_scale(m: usize, k: usize) -> f64 {
    let lm = (m as f64).ln();
    let lk = (k as f64).ln().max(1.0);
    (lm.powi(4) * lk * lk / m as f64).sqrt()
}

/// Support selection from a precomputed cross-correlation vector.
pub(crate) fn pr_support_from(
    vhat: &[f64],
    pivot: usize,
    m: usize,
    k: usize,
    c_thr: f64,
) -> Result<IndexSet> {
    if !(c_thr > 0.0) {
        return Err(Error::invalid("pr_support: C_thr must be positive"));
    }
    let threshold = c_thr * pr_threshold_scale(m, k);
    let mut kept: Vec<usize> = vhat
        .iter()
        .enumerate()
        .filter(|(l, v)| *l != pivot && v.abs() > threshold)
        .map(|(l, _)| l)
        .collect();
    kept.push(pivot);
    IndexSet::new(kept)
}

/// Ŝ = {ℓ ≠ pivot : |v̂[ℓ]| > C·√(log⁴(m)·log²(k)/m)} ∪ {pivot}. A
/// singleton {pivot} is a legal outcome, not an error.
pub fn pr_support(instance: &PRInstance, pivot: usize, c_thr: f64) -> Result<IndexSet> {
    let vhat = pr_cross(instance, pivot)?;
    pr_support_from(&vhat, pivot, instance.m, instance.k, c_thr)
}

/// Intensity scale φ = √max(mean(b) − noise-mean, 0); E bᵢ = ‖x₀‖².
pub fn pr_scale(instance: &PRInstance) -> f64 {
    let m = instance.m;
    let mean_b = par::sum_indexed(m, |i| instance.b[i]) / m as f64;
    (mean_b - instance.noise_kind.mean(instance.sigma)).max(0.0).sqrt()
}

pub(crate) fn pr_spectral_from_matrix(
    matrix: &SymMatrix,
    support: &IndexSet,
    n: usize,
    phi: f64,
    pivot: usize,
    pivot_value: f64,
) -> Result<InitEstimate> {
    let (_, v) = linalg::top_eigpair(matrix, 1e-10, 50_000)?;
    let scaled: Vec<f64> = v.iter().map(|e| phi * e).collect();
    let mut x_init = embed_vec(&scaled, support, n)?;
    canonicalize_sign(&mut x_init);
    Ok(InitEstimate {
        pivot,
        pivot_value,
        support: support.clone(),
        x_init,
        phi,
    })
}

/// Restricted spectral estimate from the intensity-weighted matrix
/// (1/m) Σᵢ bᵢ (aᵢ)_Ŝ(aᵢ)_Ŝᵀ, scaled by φ.
pub fn pr_spectral(instance: &PRInstance, support: &IndexSet) -> Result<InitEstimate> {
    if support.is_empty() {
        return Err(Error::invalid("pr_spectral: empty support"));
    }
    let s = support.len();
    let idx = support.as_slice();
    let m = instance.m;
    let flat = par::accumulate_vec(m, s * s, |i, acc| {
        let bi = instance.b[i];
        let local: Vec<f64> = idx.iter().map(|&j| instance.vector_entry(i, j)).collect();
        for a in 0..s {
            let w = bi * local[a];
            for c in a..s {
                acc[a * s + c] += w * local[c];
            }
        }
    });
    let matrix = SymMatrix::from_fn(s, |a, c| {
        let (lo, hi) = if a <= c { (a, c) } else { (c, a) };
        flat[lo * s + hi] / m as f64
    });
    let phi = pr_scale(instance);

    // Pivot bookkeeping: the coordinate with the largest intensity
    // correlation, and |x₀[pivot]| estimated from d̂[pivot] ≈ φ² + 2x₀²[pivot].
    let diag = pr_diag(instance);
    let (pivot, d_pivot) = diag
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        });
    let pivot_value = ((d_pivot - phi * phi) / 2.0).max(0.0).sqrt();

    pr_spectral_from_matrix(&matrix, support, instance.n, phi, pivot, pivot_value)
}

/// Full pipeline: pivot → support → restricted spectral estimate.
pub fn pr_initialize(instance: &PRInstance, c_thr: f64) -> Result<InitEstimate> {
    let pivot = pr_pivot(instance);
    let support = pr_support(instance, pivot, c_thr)?;
    pr_spectral(instance, &support)
}
