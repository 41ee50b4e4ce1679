//! Real Jordan decomposition of square matrices, generator classification in
//! the Lorentz algebra, the conformal action on the unit sphere with its
//! cocycle, and projective orbit limits of real-spectrum flows.
//!
//! The decomposition route: complex eigenvalues are clustered, each cluster's
//! generalized eigenprojection is recovered as a resolvent contour integral
//! (trapezoid rule on a circle converges geometrically for separated
//! clusters), and the semisimple/diagonalizable/rotational parts are spectral
//! sums over the projectors. Jordan structure is discontinuous, so clusters
//! closer than the tolerance raise an error instead of guessing.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

type CMatrix = DMatrix<Complex<f64>>;

/// Relative eigenvalue-merge tolerance for generalized eigenspace grouping.
const CLUSTER_REL_TOL: f64 = 1e-8;
/// Trapezoid points on each resolvent contour.
const CONTOUR_POINTS: usize = 256;

#[derive(Debug, Error, PartialEq)]
pub enum LorentzError {
    #[error("eigenvalue clusters too close to separate (margin {margin:e}); perturb or raise precision")]
    IllConditionedSpectrum { margin: f64 },
    #[error("matrix has a non-real eigenvalue {re} + {im}i")]
    ComplexSpectrum { re: f64, im: f64 },
    #[error("conformal denominator a + b.x = {value} is not positive")]
    NonpositiveDenominator { value: f64 },
    #[error("matrix is not in the Lorentz algebra (defect {defect:e})")]
    NotInAlgebra { defect: f64 },
}

/// Commuting quadruple A = A_n + A_h + A_e with A_s = A_h + A_e: nilpotent,
/// real-diagonalizable, and imaginary-spectrum semisimple parts.
#[derive(Debug, Clone)]
pub struct JordanDecomposition {
    pub nilpotent: DMatrix<f64>,
    pub semisimple: DMatrix<f64>,
    pub hyperbolic: DMatrix<f64>,
    pub elliptic: DMatrix<f64>,
}

/// One generalized eigenspace: cluster center and its spectral projector.
#[derive(Debug, Clone)]
pub struct SpectralCluster {
    pub eigenvalue: Complex<f64>,
    pub projector: DMatrix<f64>,
    /// imaginary companion: P for the conjugate pair acting on the real
    /// space, stored as the real matrices Re(P_c) summed with conj cluster
    pub complex_projector: CMatrix,
}

fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn frobenius_c(m: &CMatrix) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenvalue clusters (closed under conjugation) with their resolvent
/// projectors. Fails when cluster margins are too thin to integrate around.
fn spectral_split(a: &DMatrix<f64>) -> Result<Vec<(Complex<f64>, CMatrix)>, LorentzError> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "square matrix required");
    assert!(a.iter().all(|v| v.is_finite()), "finite entries required");
    let scale = frobenius(a).max(f64::MIN_POSITIVE);
    let merge_tol = CLUSTER_REL_TOL * scale;

    let eigen: Vec<Complex<f64>> = a.complex_eigenvalues().iter().copied().collect();

    // union-find grouping at the merge tolerance
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        let mut i = i;
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (eigen[i] - eigen[j]).norm() <= merge_tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        if let Some(c) = clusters.iter_mut().find(|c| find(&mut parent, c[0]) == r) {
            c.push(i);
        } else {
            clusters.push(vec![i]);
        }
    }

    let centers: Vec<Complex<f64>> = clusters
        .iter()
        .map(|c| c.iter().map(|&i| eigen[i]).sum::<Complex<f64>>() / c.len() as f64)
        .collect();
    let diameters: Vec<f64> = clusters
        .iter()
        .zip(&centers)
        .map(|(c, ctr)| {
            c.iter()
                .map(|&i| (eigen[i] - ctr).norm())
                .fold(0.0, f64::max)
        })
        .collect();

    let ac: CMatrix = a.map(|v| Complex::new(v, 0.0));
    let identity = CMatrix::identity(n, n);
    let mut out: Vec<(Complex<f64>, CMatrix)> = Vec::new();
    for (ci, center) in centers.iter().enumerate() {
        let sep = centers
            .iter()
            .enumerate()
            .filter(|(cj, _)| *cj != ci)
            .map(|(cj, other)| (other - center).norm() - diameters[cj])
            .fold(f64::INFINITY, f64::min);
        let radius = if sep.is_finite() {
            0.5 * (diameters[ci] + sep)
        } else {
            // single cluster: any circle enclosing it works
            diameters[ci] + 0.5 * scale.max(1e-6)
        };
        let inner_margin = radius - diameters[ci];
        let outer_margin = if sep.is_finite() {
            sep - radius
        } else {
            radius
        };
        let margin = inner_margin.min(outer_margin);
        if margin < 0.2 * radius {
            return Err(LorentzError::IllConditionedSpectrum { margin });
        }
        // (1/2 pi i) contour integral of the resolvent, trapezoid in angle
        let mut proj = CMatrix::zeros(n, n);
        for j in 0..CONTOUR_POINTS {
            let angle = 2.0 * PI * j as f64 / CONTOUR_POINTS as f64;
            let zeta = Complex::from_polar(radius, angle);
            let z = center + zeta;
            let shifted = &identity * z - &ac;
            let resolvent = shifted
                .lu()
                .try_inverse()
                .ok_or(LorentzError::IllConditionedSpectrum { margin })?;
            proj += resolvent * (zeta / CONTOUR_POINTS as f64);
        }
        out.push((*center, proj));
    }

    // resolution of the identity is the accuracy witness
    let mut sum = CMatrix::zeros(n, n);
    for (_, p) in &out {
        sum += p;
    }
    let defect = frobenius_c(&(&sum - &identity));
    if defect > 1e-8 * (n as f64) {
        return Err(LorentzError::IllConditionedSpectrum { margin: defect });
    }
    Ok(out)
}

/// Real Jordan decomposition A = A_n + A_s = A_n + A_h + A_e.
pub fn real_jordan(a: &DMatrix<f64>) -> Result<JordanDecomposition, LorentzError> {
    let split = spectral_split(a)?;
    let n = a.nrows();
    let mut semisimple_c = CMatrix::zeros(n, n);
    let mut hyperbolic_c = CMatrix::zeros(n, n);
    for (lambda, p) in &split {
        semisimple_c += p * *lambda;
        hyperbolic_c += p * Complex::new(lambda.re, 0.0);
    }
    let semisimple = semisimple_c.map(|v| v.re);
    let hyperbolic = hyperbolic_c.map(|v| v.re);
    let elliptic = &semisimple - &hyperbolic;
    let nilpotent = a - &semisimple;
    Ok(JordanDecomposition {
        nilpotent,
        semisimple,
        hyperbolic,
        elliptic,
    })
}

impl JordanDecomposition {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.nilpotent + &self.semisimple
    }

    /// Residual diagnostics for every decomposition invariant, each scaled
    /// to be comparable against tau_J = 1e-9 ||A||.
    pub fn diagnostics(&self, a: &DMatrix<f64>) -> JordanDiagnostics {
        let n = a.nrows();
        let scale = frobenius(a).max(f64::MIN_POSITIVE);
        let sum_residual = frobenius(&(&self.nilpotent + &self.hyperbolic + &self.elliptic - a));
        let split_residual =
            frobenius(&(&self.semisimple - &self.hyperbolic - &self.elliptic));
        // ||A_n^n|| scaled down by ||A_n||^(n-1) so it compares against scale
        let mut power = self.nilpotent.clone();
        for _ in 1..n {
            power = &power * &self.nilpotent;
        }
        let nil_scale = frobenius(&self.nilpotent).max(f64::MIN_POSITIVE);
        let nilpotency = frobenius(&power) / nil_scale.powi(n as i32 - 1).max(f64::MIN_POSITIVE);
        let comm = |x: &DMatrix<f64>, y: &DMatrix<f64>| frobenius(&(x * y - y * x));
        let commutators = [
            comm(&self.nilpotent, &self.hyperbolic),
            comm(&self.nilpotent, &self.elliptic),
            comm(&self.hyperbolic, &self.elliptic),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        let spectrum_h = self.hyperbolic.complex_eigenvalues();
        let hyperbolic_realness = spectrum_h.iter().map(|l| l.im.abs()).fold(0.0, f64::max);
        let spectrum_e = self.elliptic.complex_eigenvalues();
        let elliptic_imaginariness = spectrum_e.iter().map(|l| l.re.abs()).fold(0.0, f64::max);
        // A_s is semisimple iff its own nilpotent part vanishes
        let semisimplicity = match real_jordan(&self.semisimple) {
            Ok(inner) => frobenius(&inner.nilpotent),
            Err(_) => f64::NAN,
        };
        JordanDiagnostics {
            scale,
            sum_residual,
            split_residual,
            nilpotency,
            commutators,
            hyperbolic_realness,
            elliptic_imaginariness,
            semisimplicity,
        }
    }
}

/// Residuals of the Jordan invariants; all should sit below tau_J.
#[derive(Debug, Clone, Serialize)]
pub struct JordanDiagnostics {
    pub scale: f64,
    pub sum_residual: f64,
    pub split_residual: f64,
    pub nilpotency: f64,
    pub commutators: f64,
    pub hyperbolic_realness: f64,
    pub elliptic_imaginariness: f64,
    pub semisimplicity: f64,
}

impl JordanDiagnostics {
    pub fn max_residual(&self) -> f64 {
        [
            self.sum_residual,
            self.split_residual,
            self.nilpotency,
            self.commutators,
            self.hyperbolic_realness,
            self.elliptic_imaginariness,
            self.semisimplicity,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn tau(&self) -> f64 {
        1e-9 * self.scale
    }

    pub fn within_tolerance(&self) -> bool {
        self.max_residual() <= self.tau()
    }
}

/// Minkowski form diag(1, -1, ..., -1) on R^{1,d+1}, an (d+2)x(d+2) matrix.
pub fn minkowski_metric(d: usize) -> DMatrix<f64> {
    let n = d + 2;
    DMatrix::from_fn(n, n, |i, j| {
        if i != j {
            0.0
        } else if i == 0 {
            1.0
        } else {
            -1.0
        }
    })
}

/// Membership test for the Lorentz algebra: x^T eta + eta x = 0.
pub fn lie_algebra_membership(x: &DMatrix<f64>, d: usize) -> bool {
    algebra_defect(x, d) <= 1e-10
}

pub fn algebra_defect(x: &DMatrix<f64>, d: usize) -> f64 {
    assert_eq!(x.nrows(), d + 2, "expected a (d+2)x(d+2) matrix");
    assert_eq!(x.ncols(), d + 2);
    let eta = minkowski_metric(d);
    frobenius(&(x.transpose() * &eta + &eta * x))
}

/// Boost coupling the time direction with spatial axis `axis` (0-based).
pub fn boost_generator(d: usize, axis: usize) -> DMatrix<f64> {
    assert!(axis < d + 1);
    let n = d + 2;
    let mut x = DMatrix::zeros(n, n);
    x[(0, axis + 1)] = 1.0;
    x[(axis + 1, 0)] = 1.0;
    x
}

/// Rotation generator with rate `speed` in the spatial (i, j) plane.
pub fn rotation_generator(d: usize, i: usize, j: usize, speed: f64) -> DMatrix<f64> {
    assert!(i < d + 1 && j < d + 1 && i != j);
    let n = d + 2;
    let mut x = DMatrix::zeros(n, n);
    x[(i + 1, j + 1)] = -speed;
    x[(j + 1, i + 1)] = speed;
    x
}

/// Nilpotent null-rotation generator: boost plus equal-rate rotation share a
/// light direction; x^2 != 0, x^3 = 0.
pub fn null_rotation_generator(d: usize) -> DMatrix<f64> {
    assert!(d >= 1);
    boost_generator(d, 0) + rotation_generator(d, 0, 1, 1.0)
}

/// Which part of the Jordan decomposition is allowed to be nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GeneratorCase {
    /// vanishing rotational part: orbit limits exist (locally closed orbits)
    Case1,
    /// nonvanishing rotational part: torus orbit closures appear
    Case2,
}

/// Classify a Lorentz-algebra generator by its rotational part; the parts of
/// an algebra element stay in the algebra, which is rechecked here.
pub fn classify_generator(
    x: &DMatrix<f64>,
    d: usize,
) -> Result<(GeneratorCase, JordanDecomposition), LorentzError> {
    let defect = algebra_defect(x, d);
    if defect > 1e-10 {
        return Err(LorentzError::NotInAlgebra { defect });
    }
    let decomposition = real_jordan(x)?;
    let tau = 1e-9 * frobenius(x).max(f64::MIN_POSITIVE);
    for part in [
        &decomposition.nilpotent,
        &decomposition.hyperbolic,
        &decomposition.elliptic,
    ] {
        let part_defect = algebra_defect(part, d);
        debug_assert!(
            part_defect <= 1e-8 * frobenius(x).max(1.0),
            "decomposition left the algebra: {part_defect}"
        );
    }
    let case = if frobenius(&decomposition.elliptic) <= tau {
        GeneratorCase::Case1
    } else {
        GeneratorCase::Case2
    };
    Ok((case, decomposition))
}

/// Matrix exponential exp(t A) by Pade scaling and squaring.
pub fn matrix_exp(a: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    assert!(a.iter().all(|v| v.is_finite()));
    (a * t).exp()
}

/// Unit vector on the sphere S^d in R^{d+1}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpherePoint {
    coords: DVector<f64>,
}

impl SpherePoint {
    pub fn new(coords: DVector<f64>) -> Self {
        let norm = coords.norm();
        assert!(norm > 0.0, "zero vector");
        Self {
            coords: coords / norm,
        }
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (&self.coords - &other.coords).norm()
    }
}

/// Element of the identity component of the Lorentz group, with the block
/// decomposition [[a, b], [c, m]] against R^{1,d+1} = R x R^{d+1}.
#[derive(Debug, Clone)]
pub struct LorentzElement {
    matrix: DMatrix<f64>,
    d: usize,
}

impl LorentzElement {
    /// Validates g^T eta g = eta, a > 0 and det g = 1.
    pub fn new(matrix: DMatrix<f64>, d: usize) -> Result<Self, LorentzError> {
        assert_eq!(matrix.nrows(), d + 2);
        assert_eq!(matrix.ncols(), d + 2);
        let eta = minkowski_metric(d);
        let defect = frobenius(&(matrix.transpose() * &eta * &matrix - &eta));
        if defect > 1e-10 {
            return Err(LorentzError::NotInAlgebra { defect });
        }
        if matrix[(0, 0)] <= 0.0 {
            return Err(LorentzError::NonpositiveDenominator {
                value: matrix[(0, 0)],
            });
        }
        let det = matrix.determinant();
        if (det - 1.0).abs() > 1e-8 {
            return Err(LorentzError::NotInAlgebra {
                defect: (det - 1.0).abs(),
            });
        }
        Ok(Self { matrix, d })
    }

    /// exp(t x) of an algebra element: lands in the identity component.
    pub fn from_algebra(x: &DMatrix<f64>, t: f64, d: usize) -> Result<Self, LorentzError> {
        let defect = algebra_defect(x, d);
        if defect > 1e-9 * frobenius(x).max(1.0) {
            return Err(LorentzError::NotInAlgebra { defect });
        }
        Self::new(matrix_exp(x, t), d)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            matrix: DMatrix::identity(d + 2, d + 2),
            d,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.d, other.d);
        Self {
            matrix: &self.matrix * &other.matrix,
            d: self.d,
        }
    }

    pub fn scalar_a(&self) -> f64 {
        self.matrix[(0, 0)]
    }

    /// a + b.x, the Minkowski norm of g * (1, x) for unit x.
    fn denominator(&self, x: &SpherePoint) -> f64 {
        let mut acc = self.matrix[(0, 0)];
        for j in 0..=self.d {
            acc += self.matrix[(0, j + 1)] * x.coords()[j];
        }
        acc
    }
}

/// Conformal action g.x = (c + m x)/(a + b.x), renormalized to unit length.
pub fn conformal_act(g: &LorentzElement, x: &SpherePoint) -> Result<SpherePoint, LorentzError> {
    let denom = g.denominator(x);
    if denom <= 0.0 {
        return Err(LorentzError::NonpositiveDenominator { value: denom });
    }
    let n = g.d + 1;
    let mut out = DVector::zeros(n);
    for i in 0..n {
        let mut acc = g.matrix[(i + 1, 0)];
        for j in 0..n {
            acc += g.matrix[(i + 1, j + 1)] * x.coords()[j];
        }
        out[i] = acc / denom;
    }
    Ok(SpherePoint::new(out))
}

/// Conformal factor J_g(x) = (a + b.x)^{-1} = ||g * x||^{-1} for unit x;
/// this normalization is the one that makes the cocycle identity exact.
pub fn conformal_factor(g: &LorentzElement, x: &SpherePoint) -> Result<f64, LorentzError> {
    let denom = g.denominator(x);
    if denom <= 0.0 {
        return Err(LorentzError::NonpositiveDenominator { value: denom });
    }
    Ok(1.0 / denom)
}

/// Twisted pullback (sigma_{g^{-1}} f)(x) = J_g(x) f(g.x) sampled on the
/// given point set; f is evaluated through its closed form.
pub fn sigma_pullback(
    g: &LorentzElement,
    f: impl Fn(&SpherePoint) -> f64,
    points: &[SpherePoint],
) -> Result<Vec<f64>, LorentzError> {
    points
        .iter()
        .map(|x| {
            let moved = conformal_act(g, x)?;
            Ok(conformal_factor(g, x)? * f(&moved))
        })
        .collect()
}

/// Deterministic quasi-uniform point set on S^d: uniform angles on the
/// circle, a Fibonacci lattice on S^2, and a fixed-seed Gaussian set for
/// higher dimensions.
pub fn sphere_point_set(d: usize, n: usize) -> Vec<SpherePoint> {
    assert!(n >= 1);
    match d {
        1 => (0..n)
            .map(|i| {
                let angle = 2.0 * PI * i as f64 / n as f64;
                SpherePoint::new(DVector::from_vec(vec![angle.cos(), angle.sin()]))
            })
            .collect(),
        2 => {
            let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
            (0..n)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let angle = 2.0 * PI * (i as f64 / golden).fract();
                    SpherePoint::new(DVector::from_vec(vec![
                        r * angle.cos(),
                        r * angle.sin(),
                        z,
                    ]))
                })
                .collect()
        }
        _ => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5EED_5D0E);
            (0..n)
                .map(|_| {
                    let coords = DVector::from_fn(d + 1, |_, _| {
                        // Box-Muller from two uniforms
                        let u: f64 = rng.gen_range(1e-12..1.0);
                        let v: f64 = rng.gen_range(0.0..2.0 * PI);
                        (-2.0 * u.ln()).sqrt() * v.cos()
                    });
                    SpherePoint::new(coords)
                })
                .collect()
        }
    }
}

/// Predicted projective limit of e^{tA}.v for real-spectrum A: the highest
/// surviving nilpotent image of the top-eigenvalue component of v.
pub fn orbit_limit_predict(
    a: &DMatrix<f64>,
    v: &DVector<f64>,
) -> Result<DVector<f64>, LorentzError> {
    assert!(v.norm() > 0.0, "zero vector");
    let split = spectral_split(a)?;
    for (lambda, _) in &split {
        let scale = frobenius(a).max(1.0);
        if lambda.im.abs() > 1e-8 * scale {
            return Err(LorentzError::ComplexSpectrum {
                re: lambda.re,
                im: lambda.im,
            });
        }
    }
    let decomposition = real_jordan(a)?;
    let vc: DVector<Complex<f64>> = v.map(|x| Complex::new(x, 0.0));
    // top eigenvalue with a nonzero component of v
    let mut best: Option<(f64, DVector<f64>)> = None;
    for (lambda, projector) in &split {
        let component = (projector * &vc).map(|z| z.re);
        if component.norm() > 1e-10 * v.norm()
            && best.as_ref().map_or(true, |(l, _)| lambda.re > *l)
        {
            best = Some((lambda.re, component));
        }
    }
    let (_, v0) = best.expect("projectors resolve the identity");
    // largest delta with A_n^delta v0 != 0
    let mut current = v0.clone();
    let nil_scale = frobenius(&decomposition.nilpotent).max(1.0);
    loop {
        let next = &decomposition.nilpotent * &current;
        if next.norm() <= 1e-10 * nil_scale * current.norm() {
            break;
        }
        current = next;
    }
    Ok(current.normalize())
}

/// Direct evaluation of e^{TA}v/||e^{TA}v|| with per-step renormalization
/// guarding against overflow.
pub fn orbit_limit_numeric(
    a: &DMatrix<f64>,
    v: &DVector<f64>,
    t_total: f64,
    steps: usize,
) -> DVector<f64> {
    assert!(t_total > 0.0 && steps >= 1);
    let step = matrix_exp(a, t_total / steps as f64);
    let mut w = v.normalize();
    for _ in 0..steps {
        w = &step * w;
        w.normalize_mut();
    }
    w
}

/// ||e^{A}.u - u|| for unit u: zero iff u is a projective fixed point.
pub fn projective_fixed_point_residual(a: &DMatrix<f64>, u: &DVector<f64>) -> f64 {
    let moved = matrix_exp(a, 1.0) * u;
    (moved.normalize() - u).norm()
}

/// Matrix JSON wire form {n, rows: [[...], ...]}.
#[derive(Serialize, serde::Deserialize)]
struct MatrixWire {
    n: usize,
    rows: Vec<Vec<f64>>,
}

pub fn matrix_to_json(m: &DMatrix<f64>) -> String {
    let wire = MatrixWire {
        n: m.nrows(),
        rows: (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
            .collect(),
    };
    serde_json::to_string(&wire).expect("matrix serialization")
}

pub fn matrix_from_json(text: &str) -> Result<DMatrix<f64>, serde_json::Error> {
    let wire: MatrixWire = serde_json::from_str(text)?;
    let n = wire.n;
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in wire.rows.iter().enumerate().take(n) {
        for (j, &v) in row.iter().enumerate().take(n) {
            m[(i, j)] = v;
        }
    }
    Ok(m)
}
