//! Overlap landscape at desk scale: exact overlap counts, first-moment
//! curves, brute-force overlap-restricted minima, overlap-gap witnesses, the
//! informative overparametrization range, and an empirical chi-squared tail
//! validator.

use crate::error::Error;
use crate::par;
use crate::rng::{self, Stream};
use crate::sensing::BinaryInstance;
use crate::Result;
use num_bigint::BigUint;

/// Default cap on brute-force enumeration size.
pub const DEFAULT_ENUM_BUDGET: u128 = 10_000_000;

/// Exact binomial coefficient.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut c = BigUint::from(1u32);
    for i in 1..=k {
        c = c * BigUint::from(n - k + i) / BigUint::from(i);
    }
    c
}

/// ln C(n, k) through the exact telescoping product; −∞ when C(n, k) = 0.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    // + 0.0 normalizes the empty sum's -0.0 identity.
    (1..=k)
        .map(|i| (((n - k + i) as f64) / i as f64).ln())
        .sum::<f64>()
        + 0.0
}

/// Number of binary k'-sparse vectors with overlap exactly ℓ against a
/// k-sparse truth: C(k, ℓ)·C(n−k, k'−ℓ). Returns the exact count and its
/// natural log (−∞ for an infeasible overlap).
pub fn overlap_count(n: usize, k: usize, kprime: usize, ell: usize) -> Result<(BigUint, f64)> {
    if k > n || kprime > n {
        return Err(Error::invalid("overlap_count: k and k' must not exceed n"));
    }
    if ell > k.min(kprime) {
        return Err(Error::invalid(format!(
            "overlap_count: ell = {ell} exceeds min(k, k') = {}",
            k.min(kprime)
        )));
    }
    if kprime - ell > n - k {
        return Ok((BigUint::ZERO, f64::NEG_INFINITY));
    }
    let count = binomial(k, ell) * binomial(n - k, kprime - ell);
    let log = ln_binomial(k, ell) + ln_binomial(n - k, kprime - ell);
    Ok((count, log))
}

/// First-moment curve over the overlap grid 0..=min(k, k').
#[derive(Clone, Debug)]
pub struct OgpCurve {
    pub n: usize,
    pub k: usize,
    pub kprime: usize,
    pub m: usize,
    pub alpha: f64,
    pub ell: Vec<usize>,
    /// ln N_{k',ℓ}; −∞ for infeasible overlaps.
    pub log_n: Vec<f64>,
    /// Γ̃(ℓ) ≥ 0; zero where the bound is vacuous (see `clamped`).
    pub gamma: Vec<f64>,
    /// True where the inner factor went nonpositive (or the overlap is
    /// infeasible) and the value was clamped to zero.
    pub clamped: Vec<bool>,
    /// Argmax of Γ̃ (lowest index on ties).
    pub ell_c: usize,
}

/// Γ̃(ℓ) = √( ((k')² + k² − 2ℓ²) · (1 − 2√((ln N_{k',ℓ} + α)/m)) ), with the
/// inner factor clamped at zero where the bound is vacuous.
pub fn gamma_curve(n: usize, k: usize, kprime: usize, m: usize, alpha: f64) -> Result<OgpCurve> {
    if k == 0 || k > n || kprime < k || kprime > n {
        return Err(Error::invalid("gamma_curve: require 1 ≤ k ≤ k' ≤ n"));
    }
    if m == 0 {
        return Err(Error::invalid("gamma_curve: m must be positive"));
    }
    if !(alpha >= 0.0) {
        return Err(Error::invalid("gamma_curve: alpha must be nonnegative"));
    }
    let lmax = k.min(kprime);
    let mut ell = Vec::with_capacity(lmax + 1);
    let mut log_n = Vec::with_capacity(lmax + 1);
    let mut gamma = Vec::with_capacity(lmax + 1);
    let mut clamped = Vec::with_capacity(lmax + 1);
    for l in 0..=lmax {
        let (_, log) = overlap_count(n, k, kprime, l)?;
        let variance = (kprime * kprime + k * k) as f64 - 2.0 * (l * l) as f64;
        let (g, cl) = if log.is_finite() {
            let inner = 1.0 - 2.0 * ((log + alpha) / m as f64).sqrt();
            if inner > 0.0 {
                ((variance * inner).sqrt(), false)
            } else {
                (0.0, true)
            }
        } else {
            (0.0, true)
        };
        ell.push(l);
        log_n.push(log);
        gamma.push(g);
        clamped.push(cl);
    }
    let ell_c = argmax(&gamma);
    Ok(OgpCurve {
        n,
        k,
        kprime,
        m,
        alpha,
        ell,
        log_n,
        gamma,
        clamped,
        ell_c,
    })
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Argmax of Γ̃ on the integer grid (lowest on ties) and the height of the
/// barrier above the low-overlap end: Γ̃(ℓ_c) − max(Γ̃(0), Γ̃(1)).
pub fn critical_overlap(curve: &OgpCurve) -> (usize, f64) {
    let ell_c = argmax(&curve.gamma);
    let low = if curve.gamma.len() > 1 {
        curve.gamma[0].max(curve.gamma[1])
    } else {
        curve.gamma[0]
    };
    (ell_c, curve.gamma[ell_c] - low)
}

/// Risk of the binary vector supported on `support` (entries 1), matching
/// [`crate::sensing::binary_risk`] bit for bit.
fn support_risk(instance: &BinaryInstance, support: &[usize]) -> f64 {
    let ens = &instance.ensemble;
    let b = &instance.b;
    let m = instance.m;
    par::sum_indexed(m, |i| {
        let mut total = 0.0;
        for &r in support {
            let mut row = 0.0;
            for &c in support {
                row += ens.entry(i, r, c);
            }
            total += row;
        }
        let resid = total - b[i];
        resid * resid
    }) / m as f64
}

/// Lexicographic k-subset iterator over `0..n` (by index positions).
struct Combinations {
    n: usize,
    k: usize,
    idx: Vec<usize>,
    started: bool,
    done: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            k,
            idx: (0..k).collect(),
            started: false,
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.idx.clone());
        }
        // Advance the rightmost index that can still move.
        let k = self.k;
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                return None;
            }
            i -= 1;
            if self.idx[i] + (k - i) < self.n {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                return Some(self.idx.clone());
            }
        }
    }
}

/// Exhaustive minimum of √risk over binary k'-sparse vectors with overlap
/// exactly `ell`. Returns the minimum and its argmin as a dense 0/1 vector;
/// ties resolve to the lexicographically smallest support.
pub fn enumerate_phi(
    instance: &BinaryInstance,
    ell: usize,
    budget: u128,
) -> Result<(f64, Vec<f64>)> {
    let (n, k, kprime) = (instance.n, instance.k, instance.kprime);
    if ell > k.min(kprime) {
        return Err(Error::invalid(format!(
            "enumerate_phi: ell = {ell} exceeds min(k, k')"
        )));
    }
    let (count, _) = overlap_count(n, k, kprime, ell)?;
    if count == BigUint::ZERO {
        return Err(Error::invalid(format!(
            "enumerate_phi: no k'-sparse vector has overlap {ell}"
        )));
    }
    let required = u128::try_from(&count)
        .map_err(|_| Error::BudgetExceeded {
            required: u128::MAX,
            budget,
        })?;
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }

    let on: Vec<usize> = instance
        .x0
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| i)
        .collect();
    let off: Vec<usize> = (0..n).filter(|i| instance.x0[*i] == 0.0).collect();
    let off_pick = kprime - ell;

    // Partition the work over the on-support choices; each worker scans its
    // off-support block sequentially. The min-reduction is a total order on
    // (risk, support), so the result does not depend on scheduling.
    let on_choices: Vec<Vec<usize>> = Combinations::new(on.len(), ell)
        .map(|sel| sel.iter().map(|&s| on[s]).collect())
        .collect();

    let best = par::map_indexed(on_choices.len(), |oi| {
        let picked_on = &on_choices[oi];
        let mut local: Option<(f64, Vec<usize>)> = None;
        for off_sel in Combinations::new(off.len(), off_pick) {
            let mut support: Vec<usize> = picked_on.clone();
            support.extend(off_sel.iter().map(|&s| off[s]));
            support.sort_unstable();
            let risk = support_risk(instance, &support);
            let better = match &local {
                None => true,
                Some((r, s)) => risk < *r || (risk == *r && support < *s),
            };
            if better {
                local = Some((risk, support));
            }
        }
        local
    })
    .into_iter()
    .flatten()
    .min_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("finite risks")
            .then_with(|| a.1.cmp(&b.1))
    })
    .expect("nonempty enumeration");

    let (risk, support) = best;
    let mut argmin = vec![0.0; n];
    for &i in &support {
        argmin[i] = 1.0;
    }
    Ok((risk.sqrt(), argmin))
}

/// Brute-force φ values over every feasible overlap.
#[derive(Clone, Debug)]
pub struct PhiProfile {
    pub ell: Vec<usize>,
    pub phi: Vec<f64>,
    pub argmin: Vec<Vec<f64>>,
    pub seed: u64,
}

impl PhiProfile {
    fn value_at(&self, ell: usize) -> Option<f64> {
        self.ell.iter().position(|&l| l == ell).map(|p| self.phi[p])
    }
}

/// Compute [`PhiProfile`] for all feasible overlaps of an instance.
pub fn phi_profile(instance: &BinaryInstance, budget: u128) -> Result<PhiProfile> {
    let lmax = instance.k.min(instance.kprime);
    let mut ell = Vec::new();
    let mut phi = Vec::new();
    let mut argmin = Vec::new();
    for l in 0..=lmax {
        let (count, _) = overlap_count(instance.n, instance.k, instance.kprime, l)?;
        if count == BigUint::ZERO {
            continue;
        }
        let (p, x) = enumerate_phi(instance, l, budget)?;
        ell.push(l);
        phi.push(p);
        argmin.push(x);
    }
    Ok(PhiProfile {
        ell,
        phi,
        argmin,
        seed: instance.seed,
    })
}

/// Overlap-gap witness: true when max{φ(ℓ₁), φ(ℓ₂)} < min over the open
/// interval (z₁, z₂) of φ. Requires 0 ≤ ℓ₁ ≤ z₁ < z₂−1 < z₂ ≤ ℓ₂ ≤ k.
pub fn ogp_witness(
    profile: &PhiProfile,
    ell1: usize,
    z1: usize,
    z2: usize,
    ell2: usize,
) -> Result<bool> {
    if !(ell1 <= z1 && z1 + 1 < z2 && z2 <= ell2) {
        return Err(Error::invalid(
            "ogp_witness: require ell1 ≤ z1 < z2−1 < z2 ≤ ell2",
        ));
    }
    let lo = profile
        .value_at(ell1)
        .ok_or_else(|| Error::invalid("ogp_witness: ell1 not in profile"))?;
    let hi = profile
        .value_at(ell2)
        .ok_or_else(|| Error::invalid("ogp_witness: ell2 not in profile"))?;
    let outside = lo.max(hi);
    let inside = profile
        .ell
        .iter()
        .zip(&profile.phi)
        .filter(|(l, _)| **l > z1 && **l < z2)
        .map(|(_, p)| *p)
        .fold(f64::INFINITY, f64::min);
    if inside == f64::INFINITY {
        return Err(Error::invalid(
            "ogp_witness: no profile point strictly inside (z1, z2)",
        ));
    }
    Ok(outside < inside)
}

/// Informative overparametrization range and the two extra upper caps
/// on k' under which the overlap-gap argument applies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InformativeRange {
    /// [k, ⌊m/(C·ln m)⌋] when nonempty.
    pub range: Option<(usize, usize)>,
    /// m^{1/3}·k^{2/3}·ln^{1/3}(n).
    pub cap_moment: f64,
    /// k·m^{1/4}/ln(n).
    pub cap_ratio: f64,
}

/// Informative k' interval [k, m/(C·log m)], reported alongside the two
/// extra upper caps on k'.
pub fn informative_range(n: usize, k: usize, m: usize, c_log: f64) -> Result<InformativeRange> {
    if k == 0 || k > n || m == 0 {
        return Err(Error::invalid("informative_range: require 1 ≤ k ≤ n, m ≥ 1"));
    }
    if !(c_log > 0.0) {
        return Err(Error::invalid("informative_range: C must be positive"));
    }
    let ln_m = (m as f64).ln();
    let upper = if ln_m > 0.0 {
        (m as f64 / (c_log * ln_m)).floor()
    } else {
        0.0
    };
    let kmax = if upper.is_finite() && upper >= 0.0 {
        upper as usize
    } else {
        0
    };
    let range = if kmax >= k { Some((k, kmax.min(n))) } else { None };
    let ln_n = (n as f64).ln();
    let cap_moment = (m as f64).powf(1.0 / 3.0) * (k as f64).powf(2.0 / 3.0) * ln_n.powf(1.0 / 3.0);
    let cap_ratio = k as f64 * (m as f64).powf(0.25) / ln_n;
    Ok(InformativeRange {
        range,
        cap_moment,
        cap_ratio,
    })
}

/// Outcome of an empirical tail check of Z = Σ aᵢ(Yᵢ² − 1).
#[derive(Clone, Copy, Debug)]
pub struct TailReport {
    /// Empirical frequency of Z > 2‖a‖₂√t + 2‖a‖∞·t.
    pub upper_emp: f64,
    /// Empirical frequency of Z < −2‖a‖₂√t.
    pub lower_emp: f64,
    /// e^{−t}: the proven bound on both tails.
    pub bound: f64,
    /// Sampling allowance multiplier 1 + 3/√(trials·e^{−t}).
    pub slack: f64,
    pub pass: bool,
}

/// Monte Carlo check of the weighted chi-squared tail inequalities
/// P(Z ≥ 2‖a‖₂√t + 2‖a‖∞t) ≤ e^{−t} and P(Z ≤ −2‖a‖₂√t) ≤ e^{−t}.
pub fn chi2_tail_validate(
    d: usize,
    a: &[f64],
    t: f64,
    trials: usize,
    seed: u64,
) -> Result<TailReport> {
    if a.len() != d {
        return Err(Error::invalid("chi2_tail_validate: weight length must equal D"));
    }
    if a.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::invalid("chi2_tail_validate: weights must be nonnegative"));
    }
    if trials < 1000 {
        return Err(Error::invalid("chi2_tail_validate: need at least 10³ trials"));
    }
    if !(t > 0.0) {
        return Err(Error::invalid("chi2_tail_validate: t must be positive"));
    }
    let norm2 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let norm_inf = a.iter().fold(0.0f64, |acc, v| acc.max(*v));
    let upper_thr = 2.0 * norm2 * t.sqrt() + 2.0 * norm_inf * t;
    let lower_thr = -2.0 * norm2 * t.sqrt();

    let gs = rng::stream_seed(seed, Stream::Scratch);
    let counts = par::accumulate_vec(trials, 2, |j, acc| {
        let mut z = 0.0;
        for (i, &w) in a.iter().enumerate() {
            let g = rng::gaussian_at(gs, (j * d + i) as u64);
            z += w * (g * g - 1.0);
        }
        if z > upper_thr {
            acc[0] += 1.0;
        }
        if z < lower_thr {
            acc[1] += 1.0;
        }
    });
    let upper_emp = counts[0] / trials as f64;
    let lower_emp = counts[1] / trials as f64;
    let bound = (-t).exp();
    let slack = 1.0 + 3.0 / (trials as f64 * bound).sqrt();
    let pass = upper_emp <= bound * slack && lower_emp <= bound * slack;
    Ok(TailReport {
        upper_emp,
        lower_emp,
        bound,
        slack,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::{binary_risk, generate_binary_instance, StorageMode};

    #[test]
    fn overlap_count_small_cases() {
        let (c, _) = overlap_count(6, 3, 3, 1).unwrap();
        assert_eq!(c, BigUint::from(9u32));
        let (c, _) = overlap_count(6, 3, 3, 3).unwrap();
        assert_eq!(c, BigUint::from(1u32));
        // Infeasible overlap: k' − ℓ > n − k.
        let (c, log) = overlap_count(5, 4, 4, 2).unwrap();
        assert_eq!(c, BigUint::ZERO);
        assert!(log.is_infinite() && log < 0.0);
        assert!(overlap_count(6, 3, 3, 4).is_err());
    }

    #[test]
    fn overlap_count_matches_enumeration() {
        // n = 20, k = 5, k' = 7: count vectors by brute force per overlap.
        let n = 20;
        let k = 5;
        let kprime = 7;
        let truth: Vec<usize> = (0..k).collect(); // support = {0..4}
        let mut counted = vec![0u64; k.min(kprime) + 1];
        for support in Combinations::new(n, kprime) {
            let overlap = support.iter().filter(|&&i| truth.contains(&i)).count();
            counted[overlap] += 1;
        }
        for (l, &c) in counted.iter().enumerate() {
            let (exact, _) = overlap_count(n, k, kprime, l).unwrap();
            assert_eq!(exact, BigUint::from(c), "overlap {l}");
        }
    }

    #[test]
    fn vandermonde_sum() {
        for &(n, k, kprime) in &[(10usize, 3usize, 4usize), (25, 6, 8), (40, 5, 11)] {
            let mut total = BigUint::ZERO;
            for l in 0..=k.min(kprime) {
                total += overlap_count(n, k, kprime, l).unwrap().0;
            }
            assert_eq!(total, binomial(n, kprime));
        }
    }

    #[test]
    fn log_count_matches_exact_log() {
        for &(n, k) in &[(30usize, 7usize), (50, 12), (45, 20)] {
            let exact = binomial(n, k);
            let as_f64: f64 = exact.to_string().parse().unwrap();
            assert!(as_f64 < 1e15);
            let diff = (ln_binomial(n, k) - as_f64.ln()).abs();
            assert!(diff < 1e-9, "({n},{k}): diff {diff}");
        }
    }

    #[test]
    fn gamma_curve_shape() {
        // Full overlap with k' = k zeroes the variance factor.
        let curve = gamma_curve(30, 4, 4, 100_000, (4.0f64).ln()).unwrap();
        assert_eq!(curve.gamma[4], 0.0);
        // Tiny m clamps everywhere the count is nontrivial.
        let tiny = gamma_curve(30, 4, 4, 1, (4.0f64).ln()).unwrap();
        for (l, (&g, &c)) in tiny.gamma.iter().zip(&tiny.clamped).enumerate() {
            if tiny.log_n[l] + tiny.alpha > 0.25 {
                assert_eq!(g, 0.0);
                assert!(c);
            }
        }
        assert!(gamma_curve(10, 0, 3, 5, 0.0).is_err());
        assert!(gamma_curve(10, 3, 2, 5, 0.0).is_err());
    }

    #[test]
    fn gamma_curve_cross_checked_against_direct_evaluation() {
        // Independent route: exact BigUint count → f64 → ln, then the closed
        // form assembled separately.
        let (n, k, kprime, m) = (200usize, 10usize, 10usize, 60usize);
        let alpha = (10.0f64).ln();
        let curve = gamma_curve(n, k, kprime, m, alpha).unwrap();
        for l in 0..=k {
            let count = binomial(k, l) * binomial(n - k, kprime - l);
            let log_exact: f64 = count.to_string().parse::<f64>().unwrap().ln();
            let variance = (kprime * kprime + k * k) as f64 - 2.0 * (l * l) as f64;
            let inner = 1.0 - 2.0 * ((log_exact + alpha) / m as f64).sqrt();
            let expect = if inner > 0.0 { (variance * inner).sqrt() } else { 0.0 };
            assert!(
                (curve.gamma[l] - expect).abs() < 1e-9,
                "ell {l}: {} vs {expect}",
                curve.gamma[l]
            );
        }
        // Bit-stable recomputation.
        let again = gamma_curve(n, k, kprime, m, alpha).unwrap();
        for (a, b) in curve.gamma.iter().zip(&again.gamma) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn critical_overlap_rules() {
        let mk = |gamma: Vec<f64>| {
            let n = gamma.len();
            OgpCurve {
                n: 10,
                k: n - 1,
                kprime: n - 1,
                m: 10,
                alpha: 0.0,
                ell: (0..n).collect(),
                log_n: vec![0.0; n],
                clamped: vec![false; n],
                ell_c: 0,
                gamma,
            }
        };
        let dec = mk(vec![3.0, 2.0, 1.0]);
        let (lc, gap) = critical_overlap(&dec);
        assert_eq!(lc, 0);
        assert!(gap <= 0.0);
        let uni = mk(vec![1.0, 3.0, 2.0]);
        let (lc, gap) = critical_overlap(&uni);
        assert_eq!(lc, 1);
        assert!((gap - 0.0).abs() < 1e-15); // max(Γ(0), Γ(1)) = Γ(ℓ_c) here
        let peak = mk(vec![1.0, 2.0, 5.0, 0.5]);
        let (lc, gap) = critical_overlap(&peak);
        assert_eq!(lc, 2);
        assert!((gap - 3.0).abs() < 1e-15);
    }

    #[test]
    fn enumerate_phi_small_cases() {
        // Noiseless k' = k: the truth has zero risk at full overlap.
        let inst = generate_binary_instance(10, 3, 3, 8, 0.0, StorageMode::Materialized, 5).unwrap();
        let (phi, argmin) = enumerate_phi(&inst, 3, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(phi, 0.0);
        assert_eq!(argmin, inst.x0);

        // φ is the square root of the argmin's risk, bit for bit.
        let (phi1, arg1) = enumerate_phi(&inst, 1, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(phi1.to_bits(), binary_risk(&inst, &arg1).sqrt().to_bits());

        // Deterministic across repeated enumeration and across dispatch.
        let (phi2, arg2) = enumerate_phi(&inst, 1, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(phi1.to_bits(), phi2.to_bits());
        assert_eq!(arg1, arg2);
        let (phi3, arg3) =
            crate::par::run_sequential(|| enumerate_phi(&inst, 1, DEFAULT_ENUM_BUDGET).unwrap());
        assert_eq!(phi1.to_bits(), phi3.to_bits());
        assert_eq!(arg1, arg3);
    }

    #[test]
    fn enumerate_phi_budget() {
        let inst =
            generate_binary_instance(30, 5, 8, 6, 0.0, StorageMode::Materialized, 7).unwrap();
        match enumerate_phi(&inst, 2, 100) {
            Err(Error::BudgetExceeded { required, budget }) => {
                let expect = binomial(5, 2) * binomial(25, 6);
                assert_eq!(BigUint::from(required), expect);
                assert_eq!(budget, 100);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn witness_rules() {
        let profile = PhiProfile {
            ell: vec![0, 1, 2],
            phi: vec![1.0, 5.0, 1.0],
            argmin: vec![vec![], vec![], vec![]],
            seed: 0,
        };
        assert!(ogp_witness(&profile, 0, 0, 2, 2).unwrap());
        let flat = PhiProfile {
            ell: vec![0, 1, 2],
            phi: vec![1.0, 1.0, 1.0],
            argmin: vec![vec![], vec![], vec![]],
            seed: 0,
        };
        assert!(!ogp_witness(&flat, 0, 0, 2, 2).unwrap());
        // Shift invariance.
        let shifted = PhiProfile {
            ell: vec![0, 1, 2],
            phi: vec![11.0, 15.0, 11.0],
            argmin: vec![vec![], vec![], vec![]],
            seed: 0,
        };
        assert_eq!(
            ogp_witness(&shifted, 0, 0, 2, 2).unwrap(),
            ogp_witness(&profile, 0, 0, 2, 2).unwrap()
        );
        assert!(ogp_witness(&profile, 2, 0, 2, 0).is_err());
        assert!(ogp_witness(&profile, 0, 0, 1, 1).is_err());
    }

    #[test]
    fn informative_range_cases() {
        // Huge m: the interval extends far beyond k.
        let r = informative_range(1000, 5, 1_000_000, 1.0).unwrap();
        let (lo, hi) = r.range.unwrap();
        assert_eq!(lo, 5);
        assert!(hi > 50 * 5);
        // Boundary: m only slightly above C·k·log m keeps k'_max ≈ k.
        let m = 60usize; // ln 60 ≈ 4.09, m/(3·ln m) ≈ 4.9
        let r = informative_range(100, 4, m, 3.0).unwrap();
        assert_eq!(r.range, Some((4, 4)));
        // Empty interval is reported, not an error.
        let r = informative_range(100, 10, 20, 3.0).unwrap();
        assert!(r.range.is_none());
        assert!(r.cap_moment > 0.0 && r.cap_ratio > 0.0);
    }

    #[test]
    fn chi2_zero_weights() {
        let r = chi2_tail_validate(3, &[0.0; 3], 2.0, 2000, 1).unwrap();
        assert_eq!(r.upper_emp, 0.0);
        assert_eq!(r.lower_emp, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn chi2_single_weight() {
        let r = chi2_tail_validate(1, &[1.0], 2.0, 100_000, 2).unwrap();
        assert!(r.pass, "upper {} lower {} bound {}", r.upper_emp, r.lower_emp, r.bound);
        assert!(chi2_tail_validate(1, &[1.0], 2.0, 10, 2).is_err());
        assert!(chi2_tail_validate(2, &[1.0], 2.0, 2000, 2).is_err());
        assert!(chi2_tail_validate(1, &[-1.0], 2.0, 2000, 2).is_err());
    }

    #[test]
    fn chi2_deep_tail_uniform_weights() {
        let a = vec![0.1; 10];
        let r = chi2_tail_validate(10, &a, 6.0, 1_000_000, 3).unwrap();
        assert!(r.pass, "upper {} lower {} bound {}", r.upper_emp, r.lower_emp, r.bound);
    }

    fn is_unimodal(g: &[f64]) -> bool {
        // No strict ascent after a strict descent (plateaus allowed).
        let eps = 1e-12;
        let mut descended = false;
        for w in g.windows(2) {
            if w[1] > w[0] + eps {
                if descended {
                    return false;
                }
            } else if w[1] < w[0] - eps {
                descended = true;
            }
        }
        true
    }

    #[test]
    fn gamma_curve_unimodal_on_admissible_grid() {
        // Grid scan restricted to k'^{3/2} < √m·k/√(ln m): a single local
        // maximum in ≥ 95% of admissible desk-scale points.
        let mut total = 0;
        let mut unimodal = 0;
        for &n in &[100usize, 200, 400] {
            for &k in &[6usize, 10, 14] {
                for &extra in &[0usize, 2, 4] {
                    let kprime = k + extra;
                    if kprime > n {
                        continue;
                    }
                    for &m in &[60usize, 150, 400, 1000, 4000] {
                        let admissible = (kprime as f64).powf(1.5)
                            < (m as f64).sqrt() * k as f64 / (m as f64).ln().sqrt();
                        if !admissible {
                            continue;
                        }
                        let curve = gamma_curve(n, k, kprime, m, (k as f64).ln()).unwrap();
                        total += 1;
                        if is_unimodal(&curve.gamma) {
                            unimodal += 1;
                        }
                    }
                }
            }
        }
        assert!(total >= 30, "grid too small: {total} admissible points");
        assert!(
            unimodal * 100 >= total * 95,
            "{unimodal}/{total} unimodal curves"
        );
    }

    #[test]
    fn first_moment_bound_holds_against_brute_force() {
        // 25-trial spot check of the high-probability lower bound at
        // n = 16, k = k' = 4, m = 12 (the acceptance suite runs 100 trials).
        let alpha = (4.0f64).ln();
        let curve = gamma_curve(16, 4, 4, 12, alpha).unwrap();
        let mut all_pass = 0;
        for seed in 0..25u64 {
            let inst =
                generate_binary_instance(16, 4, 4, 12, 0.0, StorageMode::Materialized, 900 + seed)
                    .unwrap();
            let profile = phi_profile(&inst, DEFAULT_ENUM_BUDGET).unwrap();
            let ok = profile
                .ell
                .iter()
                .zip(&profile.phi)
                .all(|(&l, &p)| p >= curve.gamma[l] - 1e-12);
            if ok {
                all_pass += 1;
            }
        }
        assert!(all_pass >= 24, "{all_pass}/25 trials satisfied the bound");
    }
}
