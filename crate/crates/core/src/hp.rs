//! Fixed-point high-precision evaluation of pi and sin(pi x), used to
//! recompute small divisors independently of the f64 fast paths.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// floor(pi * 2^bits) via the Machin formula with integer arithmetic.
pub fn pi_scaled(bits: u32) -> BigInt {
    // guard digits so the final truncation is the only rounding step
    let work = bits + 32;
    let four_atan5 = atan_inv_scaled(5u32, work) * 4u32;
    let atan239 = atan_inv_scaled(239u32, work);
    let pi = (four_atan5 - atan239) * 4u32;
    pi >> 32
}

/// floor(atan(1/x) * 2^bits) for integer x >= 2.
fn atan_inv_scaled(x: u32, bits: u32) -> BigInt {
    let x2 = BigInt::from(x) * BigInt::from(x);
    let mut term = (BigInt::one() << bits) / BigInt::from(x);
    let mut sum = term.clone();
    let mut k = 1u64;
    while !term.is_zero() {
        term /= &x2;
        let contrib = &term / BigInt::from(2 * k + 1);
        if k % 2 == 1 {
            sum -= &contrib;
        } else {
            sum += &contrib;
        }
        k += 1;
    }
    sum
}

/// sin(pi * x) for rational x, as a rational with roughly `bits` correct bits.
///
/// Argument reduction uses the exact symmetries of sine on the rational side,
/// so only the final Taylor sum on [0, pi/4] carries rounding.
pub fn sin_pi(x: &BigRational, bits: u32) -> BigRational {
    // reduce mod 2 into [0, 2)
    let two = BigRational::from_integer(BigInt::from(2));
    let mut g = x - (x / &two).floor() * &two;
    let mut sign = BigInt::one();
    let one = BigRational::one();
    if g >= one {
        g -= &one;
        sign = -sign;
    }
    // [0, 1) -> [0, 1/2]
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if g > half {
        g = &one - &g;
    }
    let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
    let scaled = if g > quarter {
        // sin(pi g) = cos(pi (1/2 - g)), argument in [0, 1/4]
        cos_taylor_scaled(&(half - &g), bits)
    } else {
        sin_taylor_scaled(&g, bits)
    };
    BigRational::new(sign * scaled, BigInt::one() << bits)
}

/// |e^{2 pi i x} - 1| = 2 |sin(pi x)| at high precision.
pub fn unit_phase_distance(x: &BigRational, bits: u32) -> BigRational {
    let s = sin_pi(x, bits);
    BigRational::from_integer(BigInt::from(2)) * s.abs()
}

fn to_scaled(x: &BigRational, bits: u32) -> BigInt {
    (x.numer() << bits) / x.denom()
}

fn mul_scaled(a: &BigInt, b: &BigInt, bits: u32) -> BigInt {
    (a * b) >> bits
}

/// floor-ish(sin(pi g) * 2^bits) for rational g in [0, 1/4].
fn sin_taylor_scaled(g: &BigRational, bits: u32) -> BigInt {
    let work = bits + 32;
    let pi = pi_scaled(work);
    let u = mul_scaled(&pi, &to_scaled(g, work), work);
    let u2 = mul_scaled(&u, &u, work);
    let mut term = u.clone();
    let mut sum = u;
    let mut k = 1u64;
    while !term.is_zero() {
        term = mul_scaled(&term, &u2, work) / BigInt::from((2 * k) * (2 * k + 1));
        if k % 2 == 1 {
            sum -= &term;
        } else {
            sum += &term;
        }
        k += 1;
    }
    sum >> 32
}

/// floor-ish(cos(pi g) * 2^bits) for rational g in [0, 1/4].
fn cos_taylor_scaled(g: &BigRational, bits: u32) -> BigInt {
    let work = bits + 32;
    let pi = pi_scaled(work);
    let u = mul_scaled(&pi, &to_scaled(g, work), work);
    let u2 = mul_scaled(&u, &u, work);
    let mut term = BigInt::one() << work;
    let mut sum = term.clone();
    let mut k = 1u64;
    while !term.is_zero() {
        term = mul_scaled(&term, &u2, work) / BigInt::from((2 * k - 1) * (2 * k));
        if k % 2 == 1 {
            sum -= &term;
        } else {
            sum += &term;
        }
        k += 1;
    }
    sum >> 32
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn as_f64(x: &BigRational) -> f64 {
        x.numer().to_f64().unwrap() / x.denom().to_f64().unwrap()
    }

    #[test]
    fn pi_matches_f64() {
        let p = pi_scaled(64);
        let approx = p.to_f64().unwrap() / 2f64.powi(64);
        assert!((approx - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn sin_pi_special_values() {
        let bits = 128;
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert!((as_f64(&sin_pi(&half, bits)) - 1.0).abs() < 1e-15);
        let zero = BigRational::zero();
        assert!(as_f64(&sin_pi(&zero, bits)).abs() < 1e-30);
        let sixth = BigRational::new(BigInt::from(1), BigInt::from(6));
        assert!((as_f64(&sin_pi(&sixth, bits)) - 0.5).abs() < 1e-15);
        // odd symmetry through 1
        let x = BigRational::new(BigInt::from(7), BigInt::from(5));
        let y = BigRational::new(BigInt::from(2), BigInt::from(5));
        assert!((as_f64(&sin_pi(&x, bits)) + as_f64(&sin_pi(&y, bits))).abs() < 1e-15);
    }

    #[test]
    fn sin_pi_agrees_with_f64_on_grid() {
        let bits = 96;
        for i in 0..200 {
            let x = BigRational::new(BigInt::from(i), BigInt::from(101));
            let hp = as_f64(&sin_pi(&x, bits));
            let fp = (std::f64::consts::PI * i as f64 / 101.0).sin();
            assert!((hp - fp).abs() < 1e-13, "i={i} hp={hp} fp={fp}");
        }
    }

    #[test]
    fn tiny_arguments_keep_relative_accuracy() {
        let bits = 192;
        let x = BigRational::new(BigInt::from(1), BigInt::from(10_000_000_000u64));
        let hp = as_f64(&sin_pi(&x, bits));
        let expected = std::f64::consts::PI * 1e-10;
        assert!((hp / expected - 1.0).abs() < 1e-12);
    }
}
