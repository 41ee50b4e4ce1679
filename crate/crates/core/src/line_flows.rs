//! Grid-sampled difference and averaging operators on the line, the
//! telescoping preimage constructions, the periodization obstruction, and
//! circle flows with stationary points pulled back to functions on the line.
//!
//! Shifts are restricted to grid multiples so the telescoping identities are
//! exact; quadrature is the only error source in the averaging operator.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("shifted window leaves the represented domain and no support hint allows zero-extension")]
    DomainUnderflow,
    #[error("shift {shift} is not an integer multiple of the spacing {spacing} (exact mode)")]
    NonMultipleShift { shift: f64, spacing: f64 },
    #[error("operation requires a compact-support hint on the input")]
    MissingSupportHint,
    #[error("output window [{a}, {b}] too small; need at least [{need_a}, {need_b}]")]
    WindowTooSmall {
        a: f64,
        b: f64,
        need_a: f64,
        need_b: f64,
    },
    #[error("window endpoints are not aligned with the sample lattice")]
    MisalignedGrid,
    #[error("sample count {got} inconsistent with window and spacing (expect {expect})")]
    BadSampleCount { expect: usize, got: usize },
    #[error("integrator local error {err:e} exceeded the bound {bound:e} at t = {t}")]
    StepRejection { t: f64, err: f64, bound: f64 },
}

const ALIGN_TOL: f64 = 1e-9;

/// Uniformly sampled real function on [a, b] with optional compact-support
/// metadata: samples outside the hint interval are exactly zero, which
/// licenses zero-extension beyond the window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    pub a: f64,
    pub b: f64,
    pub h: f64,
    pub samples: Vec<f64>,
    pub support_hint: Option<(f64, f64)>,
}

impl GridFunction {
    pub fn new(
        a: f64,
        b: f64,
        h: f64,
        samples: Vec<f64>,
        support_hint: Option<(f64, f64)>,
    ) -> Result<Self, GridError> {
        assert!(a < b && h > 0.0, "need a < b and positive spacing");
        let steps = (b - a) / h;
        if (steps - steps.round()).abs() > ALIGN_TOL * steps.max(1.0) {
            return Err(GridError::MisalignedGrid);
        }
        let expect = steps.round() as usize + 1;
        if samples.len() != expect {
            return Err(GridError::BadSampleCount {
                expect,
                got: samples.len(),
            });
        }
        let gf = Self {
            a,
            b,
            h,
            samples,
            support_hint,
        };
        if let Some((u, v)) = support_hint {
            for i in 0..gf.len() {
                let x = gf.x_at(i);
                if (x < u - ALIGN_TOL || x > v + ALIGN_TOL) && gf.samples[i] != 0.0 {
                    panic!("support hint [{u}, {v}] violated at x = {x}");
                }
            }
        }
        Ok(gf)
    }

    /// Sample a closed form on the window; no support metadata.
    pub fn from_fn(a: f64, b: f64, h: f64, f: impl Fn(f64) -> f64) -> Self {
        let n = ((b - a) / h).round() as usize + 1;
        let samples = (0..n).map(|i| f(a + i as f64 * h)).collect();
        Self {
            a,
            b,
            h,
            samples,
            support_hint: None,
        }
    }

    /// Sample a closed form supported in [u, v]; values outside are forced
    /// to exact zero so the hint invariant holds despite rounding.
    pub fn from_fn_supported(
        a: f64,
        b: f64,
        h: f64,
        u: f64,
        v: f64,
        f: impl Fn(f64) -> f64,
    ) -> Self {
        let n = ((b - a) / h).round() as usize + 1;
        let samples = (0..n)
            .map(|i| {
                let x = a + i as f64 * h;
                if x < u || x > v {
                    0.0
                } else {
                    f(x)
                }
            })
            .collect();
        Self {
            a,
            b,
            h,
            samples,
            support_hint: Some((u, v)),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn x_at(&self, i: usize) -> f64 {
        self.a + i as f64 * self.h
    }

    /// Sample at signed lattice offset from `a`; zero-extension applies only
    /// with a support hint.
    fn value_at_offset(&self, i: i64) -> Option<f64> {
        if i >= 0 && (i as usize) < self.samples.len() {
            Some(self.samples[i as usize])
        } else if self.support_hint.is_some() {
            Some(0.0)
        } else {
            None
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// max - min of the samples with x in [lo, hi].
    pub fn oscillation_on(&self, lo: f64, hi: f64) -> f64 {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for i in 0..self.len() {
            let x = self.x_at(i);
            if x >= lo && x <= hi {
                min = min.min(self.samples[i]);
                max = max.max(self.samples[i]);
            }
        }
        if min > max {
            0.0
        } else {
            max - min
        }
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len(), "grid mismatch");
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0f64, |m, (&x, &y)| m.max((x - y).abs()))
    }

    /// CSV with header `x,value`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for i in 0..self.len() {
            out.push_str(&format!("{:.16e},{:.16e}\n", self.x_at(i), self.samples[i]));
        }
        out
    }
}

fn lattice_multiple(s: f64, h: f64) -> Result<i64, GridError> {
    let m = s / h;
    if (m - m.round()).abs() > ALIGN_TOL * m.abs().max(1.0) {
        return Err(GridError::NonMultipleShift { shift: s, spacing: h });
    }
    Ok(m.round() as i64)
}

/// Pointwise difference f(x + s) - f(x) on the valid subgrid; with a support
/// hint the window is preserved via zero-extension.
pub fn delta_s(f: &GridFunction, s: f64) -> Result<GridFunction, GridError> {
    let m = lattice_multiple(s, f.h)?;
    if m == 0 {
        let mut out = f.clone();
        out.samples.iter_mut().for_each(|v| *v = 0.0);
        out.support_hint = f.support_hint;
        return Ok(out);
    }
    if f.support_hint.is_some() {
        let samples = (0..f.len())
            .map(|i| f.value_at_offset(i as i64 + m).unwrap() - f.samples[i])
            .collect();
        return Ok(GridFunction {
            a: f.a,
            b: f.b,
            h: f.h,
            samples,
            // difference of shifts widens the support by |s|
            support_hint: f.support_hint.map(|(u, v)| (u - s.abs(), v + s.abs())),
        });
    }
    // no extension: shrink to the subgrid where both terms are represented
    let n = f.len() as i64;
    let (lo, hi) = if m > 0 { (0, n - 1 - m) } else { (-m, n - 1) };
    if lo > hi {
        return Err(GridError::DomainUnderflow);
    }
    let samples = (lo..=hi)
        .map(|i| f.samples[(i + m) as usize] - f.samples[i as usize])
        .collect();
    Ok(GridFunction {
        a: f.x_at(lo as usize),
        b: f.x_at(hi as usize),
        h: f.h,
        samples,
        support_hint: None,
    })
}

/// Quadrature rule for the averaging operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    /// Composite Simpson over the grid cells covering [x, x+s]; O(h^4).
    Simpson,
    /// 7-point Gauss-Legendre in the averaged variable with cubic
    /// interpolation at the nodes; interpolation caps the order at O(h^4).
    Gauss7,
}

const GAUSS7_NODES: [f64; 7] = [
    -0.9491079123427585,
    -0.7415311855993945,
    -0.4058451513773972,
    0.0,
    0.4058451513773972,
    0.7415311855993945,
    0.9491079123427585,
];
const GAUSS7_WEIGHTS: [f64; 7] = [
    0.1294849661688697,
    0.2797053914892766,
    0.3818300505051189,
    0.4179591836734694,
    0.3818300505051189,
    0.2797053914892766,
    0.1294849661688697,
];

/// The averaging operator (beta_s f)(x) = integral over t in [0,1] of
/// f(x + s t); s must be a grid multiple, s = 0 is the identity.
pub fn beta_s_line(
    f: &GridFunction,
    s: f64,
    quadrature: Quadrature,
) -> Result<GridFunction, GridError> {
    let m = lattice_multiple(s, f.h)?;
    if m == 0 {
        return Ok(f.clone());
    }
    let average_at = |i: i64| -> Option<f64> {
        match quadrature {
            Quadrature::Simpson => simpson_average(f, i, m),
            Quadrature::Gauss7 => gauss7_average(f, i, m),
        }
    };
    if f.support_hint.is_some() {
        let samples: Vec<f64> = (0..f.len() as i64)
            .map(|i| average_at(i).unwrap())
            .collect();
        return Ok(GridFunction {
            a: f.a,
            b: f.b,
            h: f.h,
            samples,
            support_hint: f.support_hint.map(|(u, v)| (u.min(u - s), v.max(v - s))),
        });
    }
    let n = f.len() as i64;
    let (lo, hi) = if m > 0 { (0, n - 1 - m) } else { (-m, n - 1) };
    if lo > hi {
        return Err(GridError::DomainUnderflow);
    }
    let samples: Vec<f64> = (lo..=hi).map(|i| average_at(i).unwrap()).collect();
    Ok(GridFunction {
        a: f.x_at(lo as usize),
        b: f.x_at(hi as usize),
        h: f.h,
        samples,
        support_hint: None,
    })
}

/// Composite Simpson average of f over the m cells starting at offset i
/// (signed m), normalized to mean value. Odd cell counts use a 3/8 block;
/// a single cell falls back to the trapezoid.
fn simpson_average(f: &GridFunction, i: i64, m: i64) -> Option<f64> {
    let (start, count) = if m > 0 { (i, m) } else { (i + m, -m) };
    let value = |j: i64| f.value_at_offset(start + j);
    let total = composite_newton_cotes(value, count)?;
    Some(total / count as f64)
}

/// Composite Simpson integral of uniformly sampled values, in x units.
pub fn integral_of_samples(samples: &[f64], h: f64) -> f64 {
    assert!(samples.len() >= 2);
    let value = |j: i64| samples.get(j as usize).copied();
    composite_newton_cotes(value, samples.len() as i64 - 1).unwrap() * h
}

/// Integral (in cell units) of the sampled values over `count` cells.
fn composite_newton_cotes(value: impl Fn(i64) -> Option<f64>, count: i64) -> Option<f64> {
    debug_assert!(count >= 1);
    if count == 1 {
        return Some(0.5 * (value(0)? + value(1)?));
    }
    let mut total = 0.0;
    let mut start = 0i64;
    let mut remaining = count;
    if remaining % 2 == 1 {
        // Simpson 3/8 on the first three cells
        total += (3.0 / 8.0) * (value(0)? + 3.0 * value(1)? + 3.0 * value(2)? + value(3)?);
        start = 3;
        remaining -= 3;
    }
    let mut j = start;
    while j < start + remaining {
        total += (value(j)? + 4.0 * value(j + 1)? + value(j + 2)?) / 3.0;
        j += 2;
    }
    Some(total)
}

/// Composite 7-point Gauss over panels of at most four grid cells, nodes
/// evaluated by cubic interpolation.
fn gauss7_average(f: &GridFunction, i: i64, m: i64) -> Option<f64> {
    let (start, count) = if m > 0 { (i, m) } else { (i + m, -m) };
    let mut total = 0.0;
    let mut j = 0i64;
    while j < count {
        let width = (count - j).min(4) as f64;
        for (node, weight) in GAUSS7_NODES.iter().zip(GAUSS7_WEIGHTS) {
            let t = 0.5 * (node + 1.0) * width;
            total += 0.5 * width * weight * interpolate_cubic(f, (start + j) as f64 + t)?;
        }
        j += 4;
    }
    Some(total / count as f64)
}

/// 4-point Lagrange interpolation at fractional offset p (in cell units).
/// Without a support hint the stencil is clamped to the window; with one,
/// zero-extension supplies values beyond it.
fn interpolate_cubic(f: &GridFunction, p: f64) -> Option<f64> {
    let base = p.floor() as i64;
    if (p - base as f64).abs() < 1e-14 {
        return f.value_at_offset(base);
    }
    let n = f.len() as i64;
    let start = if f.support_hint.is_some() {
        base - 1
    } else {
        if n < 4 {
            return None;
        }
        (base - 1).clamp(0, n - 4)
    };
    let u = p - start as f64;
    let y0 = f.value_at_offset(start)?;
    let y1 = f.value_at_offset(start + 1)?;
    let y2 = f.value_at_offset(start + 2)?;
    let y3 = f.value_at_offset(start + 3)?;
    let c0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
    let c1 = u * (u - 2.0) * (u - 3.0) / 2.0;
    let c2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
    let c3 = u * (u - 1.0) * (u - 2.0) / 6.0;
    Some(c0 * y0 + c1 * y1 + c2 * y2 + c3 * y3)
}

/// Bare periodization sum_k g(x - k s) on one period [0, s]; finite by
/// compact support. The window must sit on the absolute lattice h Z.
pub fn periodize(g: &GridFunction, s: f64) -> Result<GridFunction, GridError> {
    let (u, v) = g.support_hint.ok_or(GridError::MissingSupportHint)?;
    let m = lattice_multiple(s, g.h)?;
    assert!(m > 0, "period must be positive");
    let base = g.a / g.h;
    if (base - base.round()).abs() > ALIGN_TOL * base.abs().max(1.0) {
        return Err(GridError::MisalignedGrid);
    }
    let base = base.round() as i64;
    // k range from the support: x - k s in [u, v]
    let k_lo = ((-v) / s).floor() as i64 - 1;
    let k_hi = ((s - u) / s).ceil() as i64 + 1;
    let samples: Vec<f64> = (0..=m)
        .map(|j| {
            let mut acc = 0.0;
            for k in k_lo..=k_hi {
                // offset of (j h - k s) from g.a in cells
                acc += g.value_at_offset(j - k * m - base).unwrap_or(0.0);
            }
            acc
        })
        .collect();
    Ok(GridFunction {
        a: 0.0,
        b: s,
        h: g.h,
        samples,
        support_hint: None,
    })
}

/// Sup norm of the periodization of g'; nonvanishing obstructs solving the
/// averaging equation within the eventually-constant class.
pub fn obstruction_per(g_prime: &GridFunction, s: f64) -> Result<f64, GridError> {
    Ok(periodize(g_prime, s)?.sup_norm())
}

fn preimage_window_check(
    g: &GridFunction,
    s: f64,
    window: (f64, f64),
) -> Result<(i64, i64, i64), GridError> {
    let (u, v) = g.support_hint.ok_or(GridError::MissingSupportHint)?;
    let m = lattice_multiple(s, g.h)?;
    assert!(m > 0, "shift must be positive");
    let (wa, wb) = window;
    if wa > u || wb < v + s {
        return Err(GridError::WindowTooSmall {
            a: wa,
            b: wb,
            need_a: u.min(wa),
            need_b: v + s,
        });
    }
    let offset = (wa - g.a) / g.h;
    if (offset - offset.round()).abs() > ALIGN_TOL * offset.abs().max(1.0) {
        return Err(GridError::MisalignedGrid);
    }
    let n_out = ((wb - wa) / g.h).round() as i64;
    Ok((m, offset.round() as i64, n_out))
}

/// Telescoping preimage of the difference operator: f(x) = sum_{k>=1}
/// g(x - k s) satisfies (delta_s f) = g wherever both sides are represented.
pub fn preimage_delta(
    g: &GridFunction,
    s: f64,
    window: (f64, f64),
) -> Result<GridFunction, GridError> {
    let (m, offset, n_out) = preimage_window_check(g, s, window)?;
    let samples: Vec<f64> = (0..=n_out)
        .map(|j| {
            let mut acc = 0.0;
            let mut shift = m;
            // truncates once k s falls past the window: exact by compact support
            while offset + j - shift >= -1 {
                acc += g.value_at_offset(offset + j - shift).unwrap_or(0.0);
                shift += m;
            }
            acc
        })
        .collect();
    Ok(GridFunction {
        a: window.0,
        b: window.1,
        h: g.h,
        samples,
        support_hint: None,
    })
}

/// Preimage of the averaging operator from the supplied analytic derivative:
/// h(x) = s sum_{k>=1} g'(x - k s) satisfies beta_s h = g up to quadrature.
pub fn preimage_beta(
    g: &GridFunction,
    g_prime: &GridFunction,
    s: f64,
    window: (f64, f64),
) -> Result<GridFunction, GridError> {
    assert_eq!(g.a, g_prime.a, "derivative grid must match");
    assert_eq!(g.b, g_prime.b, "derivative grid must match");
    assert_eq!(g.h, g_prime.h, "derivative grid must match");
    let mut out = preimage_delta(g_prime, s, window)?;
    out.samples.iter_mut().for_each(|v| *v *= s);
    Ok(out)
}

/// Residual of the difference round trip: sup |delta_s f - g| over supp(g).
pub fn delta_preimage_residual(g: &GridFunction, f: &GridFunction, s: f64) -> f64 {
    let df = delta_s_on(f, s);
    compare_on_support(g, &df)
}

/// Residual of the averaging round trip: sup |beta_s h - g| over supp(g).
pub fn beta_preimage_residual(
    g: &GridFunction,
    h_grid: &GridFunction,
    s: f64,
    quadrature: Quadrature,
) -> f64 {
    let bh = beta_s_line(h_grid, s, quadrature).expect("window validated by construction");
    compare_on_support(g, &bh)
}

fn delta_s_on(f: &GridFunction, s: f64) -> GridFunction {
    delta_s(f, s).expect("window validated by construction")
}

fn compare_on_support(g: &GridFunction, approx: &GridFunction) -> f64 {
    let (u, v) = g.support_hint.unwrap_or((g.a, g.b));
    let mut worst = 0.0f64;
    for j in 0..approx.len() {
        let x = approx.x_at(j);
        if x < u - ALIGN_TOL || x > v + ALIGN_TOL {
            continue;
        }
        let gi = (x - g.a) / g.h;
        let gi_round = gi.round() as i64;
        debug_assert!((gi - gi_round as f64).abs() < 1e-6);
        let gv = g.value_at_offset(gi_round).unwrap_or(0.0);
        worst = worst.max((approx.samples[j] - gv).abs());
    }
    worst
}

/// Smooth polynomial bump supported on [lo, hi]: amplitude * (4y(1-y))^4 in
/// the scaled variable, C^3 at the edges with bounded fourth derivative.
pub fn bump_profile(lo: f64, hi: f64, amplitude: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        let y = (x - lo) / (hi - lo);
        if y <= 0.0 || y >= 1.0 {
            0.0
        } else {
            amplitude * (4.0 * y * (1.0 - y)).powi(4)
        }
    }
}

/// Analytic derivative of `bump_profile`.
pub fn bump_profile_derivative(lo: f64, hi: f64, amplitude: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        let w = hi - lo;
        let y = (x - lo) / w;
        if y <= 0.0 || y >= 1.0 {
            0.0
        } else {
            amplitude * 16.0 * (4.0 * y * (1.0 - y)).powi(3) * (1.0 - 2.0 * y) / w
        }
    }
}

/// Real trigonometric polynomial Z(phi) = a0 + sum_m (a_m cos m phi +
/// b_m sin m phi), the vector field on the circle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircleField {
    /// a_0, a_1, ..., a_M
    pub cos_coeffs: Vec<f64>,
    /// b_1, ..., b_M
    pub sin_coeffs: Vec<f64>,
}

impl CircleField {
    pub fn new(cos_coeffs: Vec<f64>, sin_coeffs: Vec<f64>) -> Self {
        assert!(!cos_coeffs.is_empty());
        assert_eq!(cos_coeffs.len(), sin_coeffs.len() + 1);
        Self {
            cos_coeffs,
            sin_coeffs,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c], vec![])
    }

    /// 1 - cos(phi): vanishes to second order at phi = 0.
    pub fn one_minus_cos() -> Self {
        Self::new(vec![1.0, -1.0], vec![0.0])
    }

    pub fn eval(&self, phi: f64) -> f64 {
        let mut acc = self.cos_coeffs[0];
        for m in 1..self.cos_coeffs.len() {
            acc += self.cos_coeffs[m] * (m as f64 * phi).cos();
            acc += self.sin_coeffs[m - 1] * (m as f64 * phi).sin();
        }
        acc
    }

    /// Exact coefficient-level derivative.
    pub fn derivative(&self) -> Self {
        let order = self.cos_coeffs.len() - 1;
        if order == 0 {
            return Self::constant(0.0);
        }
        let mut cos_coeffs = vec![0.0; order + 1];
        let mut sin_coeffs = vec![0.0; order];
        for m in 1..=order {
            // d/dphi [a cos m phi + b sin m phi] = m b cos m phi - m a sin m phi
            cos_coeffs[m] = m as f64 * self.sin_coeffs[m - 1];
            sin_coeffs[m - 1] = -(m as f64) * self.cos_coeffs[m];
        }
        Self {
            cos_coeffs,
            sin_coeffs,
        }
    }

    /// Zeros in [0, 2 pi) with multiplicities (order of the first
    /// non-vanishing derivative), located to `tol` in the field value.
    pub fn zero_set(&self, tol: f64) -> Vec<(f64, usize)> {
        const SCAN: usize = 8192;
        let two_pi = 2.0 * std::f64::consts::PI;
        let step = two_pi / SCAN as f64;
        let mut roots: Vec<f64> = Vec::new();
        // sign changes of Z: odd-order zeros
        for i in 0..SCAN {
            let x0 = i as f64 * step;
            let x1 = x0 + step;
            let y0 = self.eval(x0);
            let y1 = self.eval(x1);
            if y0 == 0.0 {
                roots.push(x0);
            } else if y0 * y1 < 0.0 {
                roots.push(bisect(|x| self.eval(x), x0, x1));
            }
        }
        // even-order zeros: sign changes of Z' where |Z| is small
        let dz = self.derivative();
        for i in 0..SCAN {
            let x0 = i as f64 * step;
            let x1 = x0 + step;
            let y0 = dz.eval(x0);
            let y1 = dz.eval(x1);
            if y0 * y1 < 0.0 {
                let c = bisect(|x| dz.eval(x), x0, x1);
                if self.eval(c).abs() <= tol {
                    roots.push(c);
                }
            }
        }
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut out: Vec<(f64, usize)> = Vec::new();
        for r in roots {
            let r = r.rem_euclid(two_pi);
            if out
                .iter()
                .any(|(q, _)| (q - r).abs() < 1e-7 || (q - r).abs() > two_pi - 1e-7)
            {
                continue;
            }
            out.push((r, self.multiplicity_at(r, tol)));
        }
        out
    }

    fn multiplicity_at(&self, phi: f64, tol: f64) -> usize {
        let mut field = self.clone();
        for order in 1..=6 {
            field = field.derivative();
            if field.eval(phi).abs() > tol.max(1e-7) {
                return order;
            }
        }
        6
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    0.5 * (lo + hi)
}

/// Integral curve of phi' = Z(phi) sampled at fixed steps.
#[derive(Debug, Clone, Serialize)]
pub struct FlowCurve {
    pub t_grid: Vec<f64>,
    /// angles reduced to [0, 2 pi)
    pub values: Vec<f64>,
    pub initial_angle: f64,
}

impl FlowCurve {
    /// CSV with header `t,phi`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,phi\n");
        for (t, phi) in self.t_grid.iter().zip(&self.values) {
            out.push_str(&format!("{t:.16e},{phi:.16e}\n"));
        }
        out
    }
}

/// Per-step local error ceiling for the fixed-step integrator, estimated by
/// step doubling.
const LOCAL_ERROR_BOUND: f64 = 1e-7;

/// Classical 4th-order integration of phi' = Z(phi) from angle theta1 over
/// [0, T] (T may be negative) with step dt > 0.
pub fn integrate_circle_flow(
    field: &CircleField,
    theta1: f64,
    t_end: f64,
    dt: f64,
) -> Result<FlowCurve, GridError> {
    assert!(dt > 0.0, "step must be positive");
    assert!(t_end != 0.0, "empty time interval");
    let steps = (t_end.abs() / dt).round().max(1.0) as usize;
    let step = t_end / steps as f64;
    let mut t_grid = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut phi = theta1;
    t_grid.push(0.0);
    values.push(phi.rem_euclid(two_pi));
    for i in 0..steps {
        let full = rk4_step(field, phi, step);
        let half = rk4_step(field, rk4_step(field, phi, 0.5 * step), 0.5 * step);
        let err = (full - half).abs();
        if err > LOCAL_ERROR_BOUND {
            return Err(GridError::StepRejection {
                t: i as f64 * step,
                err,
                bound: LOCAL_ERROR_BOUND,
            });
        }
        phi = half;
        t_grid.push((i + 1) as f64 * step);
        values.push(phi.rem_euclid(two_pi));
    }
    Ok(FlowCurve {
        t_grid,
        values,
        initial_angle: theta1.rem_euclid(two_pi),
    })
}

fn rk4_step(field: &CircleField, phi: f64, dt: f64) -> f64 {
    let k1 = field.eval(phi);
    let k2 = field.eval(phi + 0.5 * dt * k1);
    let k3 = field.eval(phi + 0.5 * dt * k2);
    let k4 = field.eval(phi + dt * k3);
    phi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Samples f(gamma(t)) along the curve as a grid function in t.
pub fn pullback_along_flow(f: &CircleField, curve: &FlowCurve) -> GridFunction {
    let ascending = curve.t_grid.last() >= curve.t_grid.first();
    let (ts, phis): (Vec<f64>, Vec<f64>) = if ascending {
        (curve.t_grid.clone(), curve.values.clone())
    } else {
        (
            curve.t_grid.iter().rev().copied().collect(),
            curve.values.iter().rev().copied().collect(),
        )
    };
    let h = ts[1] - ts[0];
    GridFunction {
        a: ts[0],
        b: *ts.last().unwrap(),
        h,
        samples: phis.iter().map(|&p| f.eval(p)).collect(),
        support_hint: None,
    }
}
