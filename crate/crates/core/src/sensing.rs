//! Problem instances: Gaussian sensing ensembles, measurements, empirical
//! risk and its gradient, and an empirical RIP probe.
//!
//! Ensemble entries are defined by the counter-based RNG in [`crate::rng`]:
//! entry (i, r, c) is a pure function of the seed, so the `Streamed` and
//! `Materialized` storage modes are bit-identical and any sum over
//! measurements can be evaluated in parallel without changing results.

use crate::error::Error;
use crate::linalg::norm;
use crate::par;
use crate::rng::{self, Stream};
use crate::Result;

/// How ensemble entries are stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StorageMode {
    /// Entries regenerated from the counter RNG on demand. O(1) memory.
    Streamed,
    /// Entries generated once and kept in memory.
    Materialized,
}

/// Measurement noise model. `sigma` is the standard deviation for both
/// random kinds (the Laplace draw uses scale σ/√2 so its variance is σ²);
/// both are subexponential.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseKind {
    None,
    Gaussian,
    Laplace,
}

impl NoiseKind {
    /// Variance of one noise draw at scale `sigma`.
    pub fn variance(self, sigma: f64) -> f64 {
        match self {
            NoiseKind::None => 0.0,
            NoiseKind::Gaussian | NoiseKind::Laplace => sigma * sigma,
        }
    }

    /// Mean of one noise draw (all supported kinds are centered).
    pub fn mean(self, _sigma: f64) -> f64 {
        0.0
    }

    fn draw(self, seed: u64, counter: u64, sigma: f64) -> f64 {
        match self {
            NoiseKind::None => 0.0,
            NoiseKind::Gaussian => sigma * rng::gaussian_at(seed, counter),
            NoiseKind::Laplace => sigma * rng::laplace_unit_at(seed, counter),
        }
    }
}

/// Flat table of i.i.d. standard normal entries, `rows` blocks of `cols`
/// values each, streamed or materialized.
#[derive(Clone, Debug)]
pub struct GaussianTable {
    rows: usize,
    cols: usize,
    entry_seed: u64,
    data: Option<Vec<f64>>,
}

impl GaussianTable {
    pub(crate) fn new(rows: usize, cols: usize, seed: u64, mode: StorageMode) -> Result<Self> {
        let total = (rows as u128) * (cols as u128);
        // Counter packing must stay within the Box–Muller pair range.
        if total >= (1u128 << 62) {
            return Err(Error::invalid("ensemble too large for counter packing"));
        }
        let entry_seed = rng::stream_seed(seed, Stream::Entries);
        let data = match mode {
            StorageMode::Streamed => None,
            StorageMode::Materialized => Some(par::map_indexed(rows * cols, |idx| {
                rng::gaussian_at(entry_seed, idx as u64)
            })),
        };
        Ok(GaussianTable {
            rows,
            cols,
            entry_seed,
            data,
        })
    }

    /// Rebuild a materialized table from externally supplied entries (file
    /// loading). The caller owns the claim that they match the seed.
    pub(crate) fn from_entries(rows: usize, cols: usize, seed: u64, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Format(format!(
                "expected {} entries, found {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(GaussianTable {
            rows,
            cols,
            entry_seed: rng::stream_seed(seed, Stream::Entries),
            data: Some(entries),
        })
    }

    #[inline(always)]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        let idx = i * self.cols + j;
        match &self.data {
            Some(d) => d[idx],
            None => rng::gaussian_at(self.entry_seed, idx as u64),
        }
    }

    pub fn mode(&self) -> StorageMode {
        if self.data.is_some() {
            StorageMode::Materialized
        } else {
            StorageMode::Streamed
        }
    }

    pub fn raw(&self) -> Option<&[f64]> {
        self.data.as_deref()
    }
}

/// The measurement ensemble {Aᵢ}: m dense n×n matrices with i.i.d. N(0, 1)
/// entries.
#[derive(Clone, Debug)]
pub struct SensingEnsemble {
    n: usize,
    m: usize,
    table: GaussianTable,
}

impl SensingEnsemble {
    pub fn new(n: usize, m: usize, seed: u64, mode: StorageMode) -> Result<Self> {
        Ok(SensingEnsemble {
            n,
            m,
            table: GaussianTable::new(m, n * n, seed, mode)?,
        })
    }

    pub(crate) fn from_entries(n: usize, m: usize, seed: u64, entries: Vec<f64>) -> Result<Self> {
        Ok(SensingEnsemble {
            n,
            m,
            table: GaussianTable::from_entries(m, n * n, seed, entries)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn mode(&self) -> StorageMode {
        self.table.mode()
    }

    pub(crate) fn raw_entries(&self) -> Option<&[f64]> {
        self.table.raw()
    }

    /// Entry Aᵢ[r, c].
    #[inline(always)]
    pub fn entry(&self, i: usize, r: usize, c: usize) -> f64 {
        self.table.at(i, r * self.n + c)
    }
}

/// A quadratic-measurement experiment: ground truth, ensemble, noise and
/// measurements. Immutable once generated; `b` is exactly recomputable from
/// the other fields.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub x0: Vec<f64>,
    /// Achieved incoherence ‖x0‖∞ / ‖x0‖₂.
    pub mu0: f64,
    /// Incoherence requested at generation time (recorded for round-trips).
    pub mu0_target: f64,
    pub sigma: f64,
    pub noise_kind: NoiseKind,
    pub noise: Vec<f64>,
    pub b: Vec<f64>,
    pub ensemble: SensingEnsemble,
    pub seed: u64,
}

/// Binary variant: x0 ∈ {0,1}ⁿ with exactly k ones, no normalization, and an
/// overparametrization budget k'.
#[derive(Clone, Debug)]
pub struct BinaryInstance {
    pub n: usize,
    pub k: usize,
    pub kprime: usize,
    pub m: usize,
    pub x0: Vec<f64>,
    pub sigma: f64,
    pub noise_kind: NoiseKind,
    pub noise: Vec<f64>,
    pub b: Vec<f64>,
    pub ensemble: SensingEnsemble,
    pub seed: u64,
}

/// Build the planted k-sparse unit vector: one spike of magnitude
/// `mu0_target`, k−1 equal-magnitude entries carrying the remaining mass,
/// random signs on a random support, then an exact renormalization.
pub(crate) fn planted_vector(n: usize, k: usize, mu0_target: f64, seed: u64) -> Result<Vec<f64>> {
    let support = rng::distinct_indices(rng::stream_seed(seed, Stream::Support), n, k);
    let spike_slot = (rng::u64_at(rng::stream_seed(seed, Stream::SpikePos), 0) % k as u64) as usize;
    let sign_seed = rng::stream_seed(seed, Stream::Signs);

    let small = if k == 1 {
        0.0
    } else {
        ((1.0 - mu0_target * mu0_target) / (k as f64 - 1.0)).sqrt()
    };
    let mut x0 = vec![0.0; n];
    for (slot, &pos) in support.iter().enumerate() {
        let sign = if rng::u64_at(sign_seed, slot as u64) & 1 == 0 {
            1.0
        } else {
            -1.0
        };
        let mag = if slot == spike_slot { mu0_target } else { small };
        x0[pos] = sign * mag;
    }
    let nx = norm(&x0);
    if nx == 0.0 {
        return Err(Error::invalid("planted vector has zero norm"));
    }
    for e in x0.iter_mut() {
        *e /= nx;
    }
    Ok(x0)
}

fn draw_noise(m: usize, kind: NoiseKind, sigma: f64, seed: u64) -> Vec<f64> {
    let ns = rng::stream_seed(seed, Stream::Noise);
    (0..m).map(|i| kind.draw(ns, i as u64, sigma)).collect()
}

/// Generate a [`ProblemInstance`].
///
/// `mu0_target` must lie in [1/√k, 1]; `mu0_target = 1` forces k = 1 (the
/// remaining entries would vanish and break ‖x0‖₀ = k).
#[allow(clippy::too_many_arguments)]
pub fn generate_instance(
    n: usize,
    k: usize,
    m: usize,
    mu0_target: f64,
    sigma: f64,
    noise_kind: NoiseKind,
    mode: StorageMode,
    seed: u64,
) -> Result<ProblemInstance> {
    validate_dims(n, k, m)?;
    validate_mu0(k, mu0_target)?;
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid("sigma must be a finite nonnegative real"));
    }

    let ensemble = SensingEnsemble::new(n, m, seed, mode)?;
    assemble_instance(n, k, m, mu0_target, sigma, noise_kind, seed, ensemble)
}

/// Finish instance construction around a prepared ensemble (generation and
/// file loading share this path so both produce identical bytes).
#[allow(clippy::too_many_arguments)]
pub(crate) fn assemble_instance(
    n: usize,
    k: usize,
    m: usize,
    mu0_target: f64,
    sigma: f64,
    noise_kind: NoiseKind,
    seed: u64,
    ensemble: SensingEnsemble,
) -> Result<ProblemInstance> {
    validate_dims(n, k, m)?;
    validate_mu0(k, mu0_target)?;
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid("sigma must be a finite nonnegative real"));
    }
    let x0 = planted_vector(n, k, mu0_target, seed)?;
    let noise = draw_noise(m, noise_kind, sigma, seed);
    let b = par::map_indexed(m, |i| measure(&ensemble, &x0, i) + noise[i]);
    let mu0 = x0.iter().fold(0.0f64, |a, &x| a.max(x.abs())) / norm(&x0);
    Ok(ProblemInstance {
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
        ensemble,
        seed,
    })
}

/// Generate a [`BinaryInstance`]: x0 ∈ {0,1}ⁿ with k ones on a random
/// support; Gaussian noise at scale `sigma` when positive.
pub fn generate_binary_instance(
    n: usize,
    k: usize,
    kprime: usize,
    m: usize,
    sigma: f64,
    mode: StorageMode,
    seed: u64,
) -> Result<BinaryInstance> {
    validate_dims(n, k, m)?;
    if !(k <= kprime && kprime <= n) {
        return Err(Error::invalid(format!(
            "require k ≤ k' ≤ n, got k = {k}, k' = {kprime}, n = {n}"
        )));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid("sigma must be a finite nonnegative real"));
    }
    let noise_kind = if sigma > 0.0 {
        NoiseKind::Gaussian
    } else {
        NoiseKind::None
    };

    let ensemble = SensingEnsemble::new(n, m, seed, mode)?;
    assemble_binary_instance(n, k, kprime, m, sigma, noise_kind, seed, ensemble)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn assemble_binary_instance(
    n: usize,
    k: usize,
    kprime: usize,
    m: usize,
    sigma: f64,
    noise_kind: NoiseKind,
    seed: u64,
    ensemble: SensingEnsemble,
) -> Result<BinaryInstance> {
    validate_dims(n, k, m)?;
    if !(k <= kprime && kprime <= n) {
        return Err(Error::invalid(format!(
            "require k ≤ k' ≤ n, got k = {k}, k' = {kprime}, n = {n}"
        )));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid("sigma must be a finite nonnegative real"));
    }
    let support = rng::distinct_indices(rng::stream_seed(seed, Stream::Support), n, k);
    let mut x0 = vec![0.0; n];
    for &i in &support {
        x0[i] = 1.0;
    }
    let noise = draw_noise(m, noise_kind, sigma, seed);
    let b = par::map_indexed(m, |i| measure(&ensemble, &x0, i) + noise[i]);

    Ok(BinaryInstance {
        n,
        k,
        kprime,
        m,
        x0,
        sigma,
        noise_kind,
        noise,
        b,
        ensemble,
        seed,
    })
}

pub(crate) fn validate_dims(n: usize, k: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("n and m must be positive"));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!("require 1 ≤ k ≤ n, got k = {k}, n = {n}")));
    }
    Ok(())
}

pub(crate) fn validate_mu0(k: usize, mu0: f64) -> Result<()> {
    let lo = 1.0 / (k as f64).sqrt();
    if !mu0.is_finite() || mu0 < lo - 1e-12 || mu0 > 1.0 + 1e-12 {
        return Err(Error::invalid(format!(
            "mu0 = {mu0} outside [1/sqrt(k), 1] = [{lo}, 1]"
        )));
    }
    if k > 1 && mu0 >= 1.0 {
        return Err(Error::invalid("mu0 = 1 requires k = 1"));
    }
    Ok(())
}

/// Indices of the nonzero entries of `x`, ascending.
#[inline]
pub(crate) fn nonzeros(x: &[f64]) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// ⟨Aᵢ, xxᵀ⟩ = xᵀAᵢx. Sums run over the nonzero coordinates of `x` in
/// ascending index order, so the cost is O(s²) for an s-sparse input and the
/// result is reproducible bit for bit.
pub fn measure(ensemble: &SensingEnsemble, x: &[f64], i: usize) -> f64 {
    let nz = nonzeros(x);
    measure_on(ensemble, x, &nz, i)
}

#[inline]
pub(crate) fn measure_on(ensemble: &SensingEnsemble, x: &[f64], nz: &[usize], i: usize) -> f64 {
    let mut total = 0.0;
    for &r in nz {
        let mut row = 0.0;
        for &c in nz {
            row += ensemble.entry(i, r, c) * x[c];
        }
        total += x[r] * row;
    }
    total
}

/// Empirical risk (1/m) Σᵢ (xᵀAᵢx − bᵢ)².
pub fn empirical_risk(instance: &ProblemInstance, x: &[f64]) -> f64 {
    risk_of(&instance.ensemble, &instance.b, x)
}

/// Risk of a binary instance at a candidate (same functional form).
pub fn binary_risk(instance: &BinaryInstance, x: &[f64]) -> f64 {
    risk_of(&instance.ensemble, &instance.b, x)
}

pub(crate) fn risk_of(ensemble: &SensingEnsemble, b: &[f64], x: &[f64]) -> f64 {
    let nz = nonzeros(x);
    let m = ensemble.m();
    par::sum_indexed(m, |i| {
        let r = measure_on(ensemble, x, &nz, i) - b[i];
        r * r
    }) / m as f64
}

/// Gradient of the empirical risk:
/// ∇R̂(x) = (2/m) Σᵢ (xᵀAᵢx − bᵢ)(Aᵢx + Aᵢᵀx).
pub fn risk_gradient(instance: &ProblemInstance, x: &[f64]) -> Vec<f64> {
    let n = instance.n;
    let m = instance.m;
    let ensemble = &instance.ensemble;
    let b = &instance.b;
    let nz = nonzeros(x);

    let mut g = par::accumulate_vec(m, n, |i, acc| {
        // u = Aᵢx restricted to rows we need (all of them) and v = Aᵢᵀx;
        // the residual reuses u on the nonzero rows, matching `measure`
        // exactly.
        let mut u = vec![0.0; n];
        for r in 0..n {
            let mut s = 0.0;
            for &c in &nz {
                s += ensemble.entry(i, r, c) * x[c];
            }
            u[r] = s;
        }
        let mut resid = 0.0;
        for &r in &nz {
            resid += x[r] * u[r];
        }
        resid -= b[i];
        for c in 0..n {
            let mut s = 0.0;
            for &r in &nz {
                s += ensemble.entry(i, r, c) * x[r];
            }
            acc[c] += resid * (u[c] + s);
        }
    });
    let scale = 2.0 / m as f64;
    for e in g.iter_mut() {
        *e *= scale;
    }
    g
}

/// Empirical lower bound on the RIP constant of the scaled measurement map
/// 𝒜(X)ᵢ = ⟨Aᵢ, X⟩/√m: the maximum of |‖𝒜(X)‖² − 1| over random
/// doubly-sparse rank-≤`rank` unit-Frobenius test matrices.
pub fn rip_estimate(
    ensemble: &SensingEnsemble,
    sparsity: usize,
    rank: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let n = ensemble.n();
    if sparsity == 0 || sparsity > n {
        return Err(Error::invalid("rip_estimate: require 1 ≤ sparsity ≤ n"));
    }
    if rank == 0 {
        return Err(Error::invalid("rip_estimate: rank must be positive"));
    }
    let mut delta: f64 = 0.0;
    for t in 0..trials {
        let tseed = rng::mix64(seed ^ rng::mix64(t as u64 ^ 0x52495054));
        let rows = rng::distinct_indices(rng::stream_seed(tseed, Stream::Support), n, sparsity);
        let cols = rng::distinct_indices(rng::stream_seed(tseed, Stream::SpikePos), n, sparsity);
        let gs = rng::stream_seed(tseed, Stream::Scratch);
        // Core = U Vᵀ with U, V ∈ ℝ^{s×r}: rank ≤ r.
        let s = sparsity;
        let u: Vec<f64> = (0..s * rank).map(|c| rng::gaussian_at(gs, c as u64)).collect();
        let v: Vec<f64> = (0..s * rank)
            .map(|c| rng::gaussian_at(gs, (s * rank + c) as u64))
            .collect();
        let mut core = vec![0.0; s * s];
        for a in 0..s {
            for b in 0..s {
                let mut acc = 0.0;
                for r in 0..rank {
                    acc += u[a * rank + r] * v[b * rank + r];
                }
                core[a * s + b] = acc;
            }
        }
        let fro = norm(&core);
        if fro == 0.0 {
            continue;
        }
        for e in core.iter_mut() {
            *e /= fro;
        }
        let m = ensemble.m();
        let energy = par::sum_indexed(m, |i| {
            let mut inner = 0.0;
            for a in 0..s {
                for bb in 0..s {
                    inner += ensemble.entry(i, rows[a], cols[bb]) * core[a * s + bb];
                }
            }
            inner * inner
        }) / m as f64;
        delta = delta.max((energy - 1.0).abs());
    }
    Ok(delta)
}
