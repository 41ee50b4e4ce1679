//! Fourier-multiplier realization of the interval-averaging operators for
//! linear flows on the d-torus: the operator that integrates translation
//! over [0, l] acts on Fourier coefficients by scalar multipliers, and this
//! module computes those multipliers, applies and inverts them on truncated
//! coefficient arrays, and searches bands for kernel vectors and
//! embedding-defect witnesses.
//!
//! Conventions: the flow is sigma_t(z) = (e^{2 pi i t theta_j} z_j)_j, so the
//! character with index k picks up the phase e^{2 pi i t (k . theta)} under
//! translation by t and the derivation eigenvalue 2 pi i (k . theta).
//! Rotation entries are carried as exact rationals (possibly high-precision
//! approximations of irrationals), which makes the mod-1 reduction of
//! l (k . theta) exact and keeps small divisors accurate at large k.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diophantine::{ratio_to_f64, BigReal};
use crate::hp;

/// Below this |k . theta| the multiplier is evaluated by the exponential
/// series to avoid cancellation in (e^{2 pi i l k.theta} - 1).
const SERIES_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Error, PartialEq)]
pub enum MultiplierError {
    #[error("resonant multiplier at lattice index {index:?} (tolerance {tol:e})")]
    ResonantMultiplier { index: Vec<i64>, tol: f64 },
}

impl MultiplierError {
    /// |multiplier(-k)| = |multiplier(k)|, so resonances are reported at the
    /// canonical representative of the {k, -k} pair.
    fn resonant(index: &[i64], tol: f64) -> Self {
        let canonical = if first_nonzero_positive(index) || index.iter().all(|&c| c == 0) {
            index.to_vec()
        } else {
            index.iter().map(|&c| -c).collect()
        };
        MultiplierError::ResonantMultiplier {
            index: canonical,
            tol,
        }
    }

    /// The offending lattice index of a resonance error.
    pub fn index(&self) -> &[i64] {
        match self {
            MultiplierError::ResonantMultiplier { index, .. } => index,
        }
    }
}

/// Rotation vector of a linear torus flow, held exactly.
#[derive(Debug, Clone)]
pub struct TorusFlow {
    /// numerators over the common denominator
    nums: Vec<BigInt>,
    den: BigInt,
    d: usize,
}

impl TorusFlow {
    pub fn from_rationals(entries: &[(i64, i64)]) -> Self {
        let reals: Vec<BigReal> = entries
            .iter()
            .map(|&(n, d)| BigReal::from_rational(n, d))
            .collect();
        Self::from_big_reals(&reals)
    }

    pub fn from_big_reals(entries: &[BigReal]) -> Self {
        assert!(!entries.is_empty(), "empty rotation vector");
        let den = entries
            .iter()
            .fold(BigInt::one(), |acc, t| acc.lcm(t.ratio().denom()));
        let nums = entries
            .iter()
            .map(|t| t.ratio().numer() * (&den / t.ratio().denom()))
            .collect();
        Self {
            nums,
            den,
            d: entries.len(),
        }
    }

    /// Treats each float as the dyadic rational it is.
    pub fn from_f64(entries: &[f64]) -> Self {
        let reals: Vec<BigReal> = entries.iter().map(|&x| BigReal::from_f64(x)).collect();
        Self::from_big_reals(&reals)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.nums.iter().all(Zero::is_zero)
    }

    /// k . theta as an exact rational.
    pub fn dot(&self, k: &[i64]) -> BigRational {
        assert_eq!(k.len(), self.d, "index dimension mismatch");
        let num: BigInt = self
            .nums
            .iter()
            .zip(k)
            .map(|(n, &c)| n * BigInt::from(c))
            .sum();
        BigRational::new(num, self.den.clone())
    }

    pub fn entries_f64(&self) -> Vec<f64> {
        self.nums
            .iter()
            .map(|n| ratio_to_f64(&BigRational::new(n.clone(), self.den.clone())))
            .collect()
    }
}

fn frac(x: &BigRational) -> BigRational {
    x - x.floor()
}

/// The averaging multiplier (e^{2 pi i l k.theta} - 1)/(2 pi i k.theta),
/// understood as l when k.theta = 0.
pub fn multiplier(ell: &BigRational, flow: &TorusFlow, k: &[i64]) -> Complex64 {
    assert!(ell.is_positive(), "interval length must be positive");
    let kdot = flow.dot(k);
    multiplier_from_dot(ell, &kdot)
}

fn multiplier_from_dot(ell: &BigRational, kdot: &BigRational) -> Complex64 {
    let ell_f = ratio_to_f64(ell);
    if kdot.is_zero() {
        return Complex64::new(ell_f, 0.0);
    }
    let kdot_f = ratio_to_f64(kdot);
    if kdot_f.abs() < SERIES_THRESHOLD {
        // l * sum_{j>=0} z^j/(j+1)! with z = 2 pi i l k.theta
        let z = Complex64::new(0.0, 2.0 * PI * ell_f * kdot_f);
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for j in 1..24 {
            term = term * z / (j + 1) as f64;
            sum += term;
            if term.norm() < 1e-20 {
                break;
            }
        }
        return sum * ell_f;
    }
    // exact mod-1 reduction of the phase, then a cancellation-free form:
    // e^{2 pi i g} - 1 = 2 i sin(pi g) e^{i pi g}
    let g = ratio_to_f64(&frac(&(ell * kdot)));
    let s = (PI * g).sin();
    let phase = Complex64::from_polar(1.0, PI * g);
    // (2 i s phase) / (2 pi i k.theta)
    phase * (s / (PI * kdot_f))
}

/// Normalized averaging multiplier (e^{2 pi i t k.theta} - 1)/(2 pi i
/// k.theta t) for t of either sign, with the continuous extensions 1 at
/// t = 0 and e^{...} -> 1 at k.theta = 0.
pub fn beta_multiplier(t: &BigRational, flow: &TorusFlow, k: &[i64]) -> Complex64 {
    let kdot = flow.dot(k);
    if t.is_zero() || kdot.is_zero() {
        return Complex64::new(1.0, 0.0);
    }
    let t_f = ratio_to_f64(t);
    let kdot_f = ratio_to_f64(&kdot);
    if kdot_f.abs() < SERIES_THRESHOLD {
        let z = Complex64::new(0.0, 2.0 * PI * t_f * kdot_f);
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for j in 1..24 {
            term = term * z / (j + 1) as f64;
            sum += term;
            if term.norm() < 1e-20 {
                break;
            }
        }
        return sum;
    }
    let g = ratio_to_f64(&frac(&(t * &kdot)));
    let s = (PI * g).sin();
    let phase = Complex64::from_polar(1.0, PI * g);
    phase * (s / (PI * kdot_f * t_f))
}

/// |multiplier| recomputed at `bits` precision, for soundness rechecks.
pub fn multiplier_modulus_hp(ell: &BigRational, flow: &TorusFlow, k: &[i64], bits: u32) -> f64 {
    let kdot = flow.dot(k);
    if kdot.is_zero() {
        return ratio_to_f64(ell);
    }
    let x = ell * &kdot;
    let dist = hp::unit_phase_distance(&x, bits);
    let denom = BigRational::from_float(2.0 * PI).unwrap() * kdot.abs();
    ratio_to_f64(&(dist / denom))
}

/// Exact kernel membership: k.theta != 0 and l k.theta integral.
fn exact_kernel(ell: &BigRational, kdot: &BigRational) -> bool {
    !kdot.is_zero() && (ell * kdot).is_integer()
}

/// Translation multiplier e^{2 pi i t k.theta}; modulus 1 always.
pub fn translation_multiplier(t: &BigRational, flow: &TorusFlow, k: &[i64]) -> Complex64 {
    let g = ratio_to_f64(&frac(&(t * flow.dot(k))));
    Complex64::from_polar(1.0, 2.0 * PI * g)
}

/// Derivation multiplier 2 pi i k.theta (generator eigenvalue).
pub fn derivation_multiplier(flow: &TorusFlow, k: &[i64]) -> Complex64 {
    Complex64::new(0.0, 2.0 * PI * ratio_to_f64(&flow.dot(k)))
}

/// Truncated Fourier coefficient array on the d-torus, indices |k|_inf <= K.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpectrum {
    d: usize,
    bandlimit: i64,
    real_valued: bool,
    coefficients: BTreeMap<Vec<i64>, Complex64>,
}

impl LatticeSpectrum {
    pub fn new(d: usize, bandlimit: i64, real_valued: bool) -> Self {
        assert!(d >= 1 && bandlimit >= 1);
        Self {
            d,
            bandlimit,
            real_valued,
            coefficients: BTreeMap::new(),
        }
    }

    /// The single-character spectrum delta_k.
    pub fn delta(d: usize, bandlimit: i64, k: &[i64]) -> Self {
        let mut s = Self::new(d, bandlimit, false);
        s.set(k, Complex64::new(1.0, 0.0));
        s
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn bandlimit(&self) -> i64 {
        self.bandlimit
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn set(&mut self, k: &[i64], value: Complex64) {
        assert_eq!(k.len(), self.d, "index dimension mismatch");
        assert!(
            k.iter().all(|c| c.abs() <= self.bandlimit),
            "index {k:?} outside band {}",
            self.bandlimit
        );
        if value == Complex64::new(0.0, 0.0) {
            self.coefficients.remove(k);
        } else {
            self.coefficients.insert(k.to_vec(), value);
        }
    }

    pub fn get(&self, k: &[i64]) -> Complex64 {
        self.coefficients
            .get(k)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Entries in lexicographic index order.
    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex64)> {
        self.coefficients.iter()
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Largest conjugate-symmetry violation |x_{-k} - conj(x_k)| in the band.
    pub fn real_symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (k, v) in &self.coefficients {
            let neg: Vec<i64> = k.iter().map(|c| -c).collect();
            worst = worst.max((self.get(&neg) - v.conj()).norm());
        }
        worst
    }

    /// Pointwise evaluation sum_k x_k e^{2 pi i k.x} at phases x in [0,1)^d.
    pub fn eval_at(&self, x: &[f64]) -> Complex64 {
        assert_eq!(x.len(), self.d);
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, v) in &self.coefficients {
            let phase: f64 = k.iter().zip(x).map(|(&c, &xi)| c as f64 * xi).sum();
            acc += v * Complex64::from_polar(1.0, 2.0 * PI * phase);
        }
        acc
    }

    pub fn sup_coefficient_distance(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for (k, v) in &self.coefficients {
            worst = worst.max((other.get(k) - v).norm());
        }
        for (k, v) in &other.coefficients {
            worst = worst.max((self.get(k) - v).norm());
        }
        worst
    }
}

/// Coefficientwise application of the interval-averaging operator.
pub fn apply_alpha_chi(
    spectrum: &LatticeSpectrum,
    ell: &BigRational,
    flow: &TorusFlow,
) -> LatticeSpectrum {
    assert_eq!(spectrum.dim(), flow.dim());
    let mut out = LatticeSpectrum::new(spectrum.d, spectrum.bandlimit, spectrum.real_valued);
    for (k, v) in &spectrum.coefficients {
        out.set(k, v * multiplier(ell, flow, k));
    }
    out
}

/// Coefficientwise inverse; fails with the offending index when any band
/// index (zero coefficients included) is resonant at tolerance `tol`.
pub fn invert_alpha_chi(
    spectrum: &LatticeSpectrum,
    ell: &BigRational,
    flow: &TorusFlow,
    tol: f64,
) -> Result<LatticeSpectrum, MultiplierError> {
    assert_eq!(spectrum.dim(), flow.dim());
    let mut out = LatticeSpectrum::new(spectrum.d, spectrum.bandlimit, spectrum.real_valued);
    for k in band_indices(spectrum.d, spectrum.bandlimit) {
        let kdot = flow.dot(&k);
        let m = multiplier_from_dot(ell, &kdot);
        if exact_kernel(ell, &kdot) || m.norm() <= tol {
            return Err(MultiplierError::resonant(&k, tol));
        }
        let v = spectrum.get(&k);
        if v != Complex64::new(0.0, 0.0) {
            out.set(&k, v / m);
        }
    }
    Ok(out)
}

/// Weighted l2 norm (sum_k (1 + k.k)^N |x_k|^2)^{1/2} over the band.
pub fn sobolev_norm(spectrum: &LatticeSpectrum, order: u32) -> f64 {
    spectrum
        .coefficients
        .iter()
        .map(|(k, v)| {
            let ksq: f64 = k.iter().map(|&c| (c as f64) * (c as f64)).sum();
            (1.0 + ksq).powi(order as i32) * v.norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// All band indices |k|_inf <= bandlimit in lexicographic order.
pub fn band_indices(d: usize, bandlimit: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut k = vec![-bandlimit; d];
    loop {
        out.push(k.clone());
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if k[i] < bandlimit {
                k[i] += 1;
                break;
            }
            k[i] = -bandlimit;
        }
    }
}

/// Nonzero band indices grouped by |k|_inf shell, lexicographic within each.
fn shell_indices(d: usize, bandlimit: i64) -> Vec<Vec<Vec<i64>>> {
    let mut shells: Vec<Vec<Vec<i64>>> = (0..=bandlimit as usize).map(|_| Vec::new()).collect();
    for k in band_indices(d, bandlimit) {
        let norm = k.iter().map(|c| c.abs()).max().unwrap() as usize;
        if norm > 0 {
            shells[norm].push(k);
        }
    }
    shells
}

/// All nonzero band indices with |multiplier| <= tol (or exactly in the
/// kernel by rational arithmetic), sorted by |k|_inf then lexicographically.
pub fn kernel_indices(
    ell: &BigRational,
    flow: &TorusFlow,
    bandlimit: i64,
    tol: f64,
) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for shell in shell_indices(flow.dim(), bandlimit) {
        for k in shell {
            let kdot = flow.dot(&k);
            if exact_kernel(ell, &kdot) || multiplier_from_dot(ell, &kdot).norm() <= tol {
                out.push(k);
            }
        }
    }
    out
}

/// Search the band for the smallest-|k|_inf witness of the embedding defect
/// |multiplier|^2 < 2^{-2N} (1 + k.k)^{-N}; the returned defect
/// |multiplier| 2^N (1 + k.k)^{N/2} is < 1 exactly when k is a witness.
/// Only the canonical representative of each {k, -k} pair is scanned.
pub fn embedding_defect_search(
    ell: &BigRational,
    flow: &TorusFlow,
    order: u32,
    bandlimit: i64,
) -> Option<(Vec<i64>, f64)> {
    assert!(order >= 1 && bandlimit >= 1);
    for shell in shell_indices(flow.dim(), bandlimit) {
        for k in shell {
            if !first_nonzero_positive(&k) {
                continue;
            }
            let m = multiplier(ell, flow, &k).norm();
            let ksq: f64 = k.iter().map(|&c| (c as f64) * (c as f64)).sum();
            let weight = 2.0f64.powi(order as i32) * (1.0 + ksq).powf(order as f64 / 2.0);
            let defect = m * weight;
            if defect < 1.0 {
                return Some((k, defect));
            }
        }
    }
    None
}

fn first_nonzero_positive(k: &[i64]) -> bool {
    for &c in k {
        if c != 0 {
            return c > 0;
        }
    }
    false
}

/// Growth of the inverse multipliers in a fixed finite-order norm:
/// ratio_k = ||invert(delta_k)||_r / ||delta_k||_r = 1/|multiplier|.
pub fn ck_inverse_growth(
    flow: &TorusFlow,
    ell: &BigRational,
    order: u32,
    ks: &[Vec<i64>],
) -> Result<Vec<(Vec<i64>, f64)>, MultiplierError> {
    let mut out = Vec::with_capacity(ks.len());
    for k in ks {
        let kdot = flow.dot(k);
        let m = multiplier_from_dot(ell, &kdot);
        if exact_kernel(ell, &kdot) || m.norm() == 0.0 {
            return Err(MultiplierError::resonant(k, 0.0));
        }
        let bandlimit = k.iter().map(|c| c.abs()).max().unwrap().max(1);
        let delta = LatticeSpectrum::delta(flow.dim(), bandlimit, k);
        let mut inverted = LatticeSpectrum::new(flow.dim(), bandlimit, false);
        inverted.set(k, delta.get(k) / m);
        let ratio = sobolev_norm(&inverted, order) / sobolev_norm(&delta, order);
        out.push((k.clone(), ratio));
    }
    Ok(out)
}

/// Survey of one (l, theta, band): kernel indices, the minimum multiplier
/// modulus, and embedding-defect witnesses for the requested orders.
#[derive(Debug, Clone, Serialize)]
pub struct MultiplierReport {
    pub ell: f64,
    pub kernel_indices: Vec<Vec<i64>>,
    pub min_abs_multiplier: f64,
    pub min_attaining_index: Vec<i64>,
    pub defect_witnesses: Vec<(u32, Vec<i64>, f64)>,
}

pub fn multiplier_report(
    ell: &BigRational,
    flow: &TorusFlow,
    bandlimit: i64,
    tol: f64,
    defect_orders: &[u32],
) -> MultiplierReport {
    let kernel = kernel_indices(ell, flow, bandlimit, tol);
    // kernel soundness: recheck each reported index at higher precision
    for k in &kernel {
        let hp_mod = multiplier_modulus_hp(ell, flow, k, 2 * 64);
        debug_assert!(
            hp_mod <= tol.max(1e-12),
            "kernel index {k:?} fails recomputation: {hp_mod}"
        );
    }
    let mut min_mod = f64::INFINITY;
    let mut min_k = Vec::new();
    for shell in shell_indices(flow.dim(), bandlimit) {
        for k in shell {
            let m = multiplier(ell, flow, &k).norm();
            if m < min_mod {
                min_mod = m;
                min_k = k;
            }
        }
    }
    let defect_witnesses = defect_orders
        .iter()
        .filter_map(|&n| embedding_defect_search(ell, flow, n, bandlimit).map(|(k, d)| (n, k, d)))
        .collect();
    MultiplierReport {
        ell: ratio_to_f64(ell),
        kernel_indices: kernel,
        min_abs_multiplier: min_mod,
        min_attaining_index: min_k,
        defect_witnesses,
    }
}

/// Serialized form: {d, K, real_valued, entries: [[k...], re, im]} with
/// entries in lexicographic index order.
#[derive(Serialize, Deserialize)]
struct SpectrumWire {
    d: usize,
    #[serde(rename = "K")]
    bandlimit: i64,
    real_valued: bool,
    entries: Vec<(Vec<i64>, f64, f64)>,
}

impl LatticeSpectrum {
    pub fn to_json(&self) -> String {
        let wire = SpectrumWire {
            d: self.d,
            bandlimit: self.bandlimit,
            real_valued: self.real_valued,
            entries: self
                .coefficients
                .iter()
                .map(|(k, v)| (k.clone(), v.re, v.im))
                .collect(),
        };
        serde_json::to_string(&wire).expect("spectrum serialization")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let wire: SpectrumWire = serde_json::from_str(text)?;
        let mut out = Self::new(wire.d, wire.bandlimit, wire.real_valued);
        for (k, re, im) in wire.entries {
            out.set(&k, Complex64::new(re, im));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn phi_flow() -> TorusFlow {
        TorusFlow::from_big_reals(&[BigReal::golden_ratio(256)])
    }

    #[test]
    fn multiplier_at_zero_frequency_is_ell() {
        let flow = TorusFlow::from_rationals(&[(1, 2), (1, 3)]);
        let m = multiplier(&rat(7, 4), &flow, &[0, 0]);
        assert_eq!(m, Complex64::new(1.75, 0.0));
    }

    #[test]
    fn multiplier_full_period_vanishes() {
        let flow = TorusFlow::from_rationals(&[(1, 1)]);
        let m = multiplier(&rat(1, 1), &flow, &[1]);
        assert!(m.norm() < 1e-15, "got {m}");
    }

    #[test]
    fn multiplier_half_period() {
        // (e^{i pi} - 1)/(2 pi i) = i/pi
        let flow = TorusFlow::from_rationals(&[(1, 1)]);
        let m = multiplier(&rat(1, 2), &flow, &[1]);
        assert_abs_diff_eq!(m.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.im, 1.0 / PI, epsilon = 1e-15);
    }

    #[test]
    fn multiplier_series_matches_direct_form() {
        // straddle the series threshold with a rational just below it
        let flow_small = TorusFlow::from_rationals(&[(1, 20_000)]);
        let ell = rat(1, 1);
        let direct = {
            let kdot = 1.0 / 20_000.0;
            let num = Complex64::from_polar(1.0, 2.0 * PI * kdot) - Complex64::new(1.0, 0.0);
            num / Complex64::new(0.0, 2.0 * PI * kdot)
        };
        let series = multiplier(&ell, &flow_small, &[1]);
        assert!((series - direct).norm() < 1e-12);
    }

    #[test]
    fn multiplier_continuity_near_resonance() {
        // |multiplier - l| <= pi l^2 |k.theta| for |k.theta| <= 1e-4
        for (n, d) in [(1i64, 100_000i64), (1, 50_000), (3, 100_000), (-7, 100_000)] {
            let flow = TorusFlow::from_rationals(&[(n, d)]);
            for ell in [rat(1, 2), rat(1, 1), rat(3, 2)] {
                let m = multiplier(&ell, &flow, &[1]);
                let ell_f = ratio_to_f64(&ell);
                let kdot = (n as f64 / d as f64).abs();
                assert!(
                    (m - Complex64::new(ell_f, 0.0)).norm() <= PI * ell_f * ell_f * kdot,
                    "bound violated at {n}/{d}, ell={ell_f}"
                );
            }
        }
    }

    #[test]
    fn apply_scales_constant_by_ell() {
        let flow = phi_flow();
        let spec = LatticeSpectrum::delta(1, 4, &[0]);
        let out = apply_alpha_chi(&spec, &rat(5, 4), &flow);
        assert_eq!(out.get(&[0]), Complex64::new(1.25, 0.0));
    }

    #[test]
    fn apply_kills_full_period_character() {
        let flow = TorusFlow::from_rationals(&[(1, 1)]);
        let spec = LatticeSpectrum::delta(1, 2, &[1]);
        let out = apply_alpha_chi(&spec, &rat(1, 1), &flow);
        assert!(out.get(&[1]).norm() < 1e-15);
    }

    #[test]
    fn invert_is_right_inverse_on_nonresonant_band() {
        let flow = TorusFlow::from_big_reals(&[BigReal::sqrt_of(2, 256), BigReal::sqrt_of(3, 256)]);
        let ell = rat(1, 1);
        let mut spec = LatticeSpectrum::new(2, 6, false);
        // deterministic pseudo-random fill
        let mut state = 0x9E3779B97F4A7C15u64;
        for k in band_indices(2, 6) {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let re = ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let im = ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            spec.set(&k, Complex64::new(re, im));
        }
        let round = invert_alpha_chi(&apply_alpha_chi(&spec, &ell, &flow), &ell, &flow, 1e-13)
            .expect("band is non-resonant");
        assert!(spec.sup_coefficient_distance(&round) < 1e-10);
    }

    #[test]
    fn invert_reports_resonant_index() {
        let flow = TorusFlow::from_rationals(&[(1, 2)]);
        let spec = LatticeSpectrum::delta(1, 2, &[1]);
        let err = invert_alpha_chi(&spec, &rat(1, 1), &flow, 1e-12).unwrap_err();
        assert_eq!(err.index(), &[2]);
    }

    #[test]
    fn invert_constant_divides_by_ell() {
        let flow = phi_flow();
        let spec = LatticeSpectrum::delta(1, 1, &[0]);
        let out = invert_alpha_chi(&spec, &rat(2, 1), &flow, 1e-12).unwrap();
        assert_eq!(out.get(&[0]), Complex64::new(0.5, 0.0));
    }

    #[test]
    fn sobolev_norm_values() {
        let spec = LatticeSpectrum::delta(2, 2, &[0, 0]);
        assert_abs_diff_eq!(sobolev_norm(&spec, 7), 1.0);
        let spec = LatticeSpectrum::delta(2, 2, &[1, 1]);
        assert_abs_diff_eq!(sobolev_norm(&spec, 2), 3.0, epsilon = 1e-15);
    }

    #[test]
    fn kernel_indices_even_characters_at_half_period() {
        // d=1, theta=1, l=1/2: multiplier ((-1)^k - 1)/(2 pi i k) kills even k
        let flow = TorusFlow::from_rationals(&[(1, 1)]);
        let kernel = kernel_indices(&rat(1, 2), &flow, 5, 1e-12);
        assert_eq!(kernel, vec![vec![-2], vec![2], vec![-4], vec![4]]);
    }

    #[test]
    fn kernel_empty_for_golden_rotation() {
        let kernel = kernel_indices(&rat(1, 1), &phi_flow(), 32, 1e-12);
        assert!(kernel.is_empty());
    }

    #[test]
    fn kernel_exact_rational_pairs() {
        let flow = TorusFlow::from_rationals(&[(1, 2), (1, 3)]);
        let kernel = kernel_indices(&rat(1, 1), &flow, 3, 0.0);
        assert!(kernel.contains(&vec![2, 0]));
        assert!(kernel.contains(&vec![0, 3]));
        assert!(kernel.contains(&vec![2, 3]));
    }

    #[test]
    fn defect_witness_for_liouville_truncation() {
        let theta = crate::diophantine::liouville_constant(3, 128).unwrap();
        let flow = TorusFlow::from_big_reals(&[theta]);
        let (k, defect) = embedding_defect_search(&rat(1, 1), &flow, 2, 200).unwrap();
        assert_eq!(k, vec![100]);
        assert!(defect < 1.0, "defect {defect}");
    }

    #[test]
    fn no_defect_witness_for_golden_rotation() {
        assert_eq!(embedding_defect_search(&rat(1, 1), &phi_flow(), 3, 500), None);
    }

    #[test]
    fn defect_witness_exact_kernel_is_maximal() {
        let flow = TorusFlow::from_rationals(&[(1, 2)]);
        let (k, defect) = embedding_defect_search(&rat(1, 1), &flow, 1, 2).unwrap();
        assert_eq!(k, vec![2]);
        assert_eq!(defect, 0.0);
    }

    #[test]
    fn ck_growth_along_fibonacci_indices() {
        let ks: Vec<Vec<i64>> = [2i64, 3, 5, 8, 13, 21, 34].iter().map(|&k| vec![k]).collect();
        let ratios = ck_inverse_growth(&phi_flow(), &rat(1, 1), 0, &ks).unwrap();
        for w in ratios.windows(2) {
            assert!(w[1].1 > w[0].1, "not increasing: {ratios:?}");
        }
    }

    #[test]
    fn ck_growth_single_index_matches_definition() {
        let flow = phi_flow();
        let ratios = ck_inverse_growth(&flow, &rat(1, 1), 0, &[vec![1]]).unwrap();
        let expected = 1.0 / multiplier(&rat(1, 1), &flow, &[1]).norm();
        assert_abs_diff_eq!(ratios[0].1, expected, epsilon = 1e-12);
    }

    #[test]
    fn ck_growth_near_resonance_blows_up() {
        let flow = TorusFlow::from_f64(&[0.5 + 1e-6]);
        let ratios = ck_inverse_growth(&flow, &rat(1, 1), 0, &[vec![2]]).unwrap();
        assert!(ratios[0].1 > 1e4, "ratio {}", ratios[0].1);
    }

    #[test]
    fn ck_growth_rejects_resonant_index() {
        let flow = TorusFlow::from_rationals(&[(1, 2)]);
        assert!(ck_inverse_growth(&flow, &rat(1, 1), 0, &[vec![2]]).is_err());
    }

    #[test]
    fn translation_and_derivation_multipliers() {
        let flow = TorusFlow::from_rationals(&[(1, 1)]);
        assert_eq!(derivation_multiplier(&flow, &[0]), Complex64::new(0.0, 0.0));
        assert_eq!(
            translation_multiplier(&rat(1, 3), &flow, &[0]),
            Complex64::new(1.0, 0.0)
        );
        // integer phase: t = 1/3, k = 3, theta = 1
        let m = translation_multiplier(&rat(1, 3), &flow, &[3]);
        assert!((m - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn generator_relation_at_multiplier_level() {
        // (translation(t) - 1)/t = derivation . (multiplier/t) per character
        let flow = TorusFlow::from_big_reals(&[
            BigReal::sqrt_of(2, 256),
            BigReal::golden_ratio(256),
        ]);
        let mut state = 1u64;
        for _ in 0..50 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            let k = vec![(state % 17) as i64 - 8, ((state >> 8) % 17) as i64 - 8];
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            let t_num = (state % 1000) as i64 + 1;
            let t = rat(t_num, 1000);
            let t_f = t_num as f64 / 1000.0;
            let lhs = (translation_multiplier(&t, &flow, &k) - Complex64::new(1.0, 0.0)) / t_f;
            let beta = multiplier(&t, &flow, &k) / t_f;
            let rhs = derivation_multiplier(&flow, &k) * beta;
            assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()), "k={k:?} t={t_f}");
        }
    }

    #[test]
    fn spectrum_json_round_trip_preserves_order() {
        let mut spec = LatticeSpectrum::new(2, 3, true);
        spec.set(&[1, -2], Complex64::new(0.5, -0.25));
        spec.set(&[-1, 2], Complex64::new(0.5, 0.25));
        spec.set(&[0, 0], Complex64::new(1.0, 0.0));
        let text = spec.to_json();
        let back = LatticeSpectrum::from_json(&text).unwrap();
        assert_eq!(spec, back);
        // deterministic lexicographic entry order
        let again = back.to_json();
        assert_eq!(text, again);
        assert!(text.find("[-1,2]").unwrap() < text.find("[1,-2]").unwrap());
    }

    #[test]
    fn real_symmetry_defect_detects_asymmetry() {
        let mut spec = LatticeSpectrum::new(1, 2, true);
        spec.set(&[1], Complex64::new(0.5, 0.5));
        spec.set(&[-1], Complex64::new(0.5, -0.5));
        assert!(spec.real_symmetry_defect() < 1e-15);
        spec.set(&[-1], Complex64::new(0.5, 0.5));
        assert!(spec.real_symmetry_defect() > 0.9);
    }
}
