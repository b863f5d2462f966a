//! Modified spherical Bessel functions.
//!
//! Normalization: `i_0(x) = sinh(x)/x` and `k_0(x) = exp(-x)/x`, i.e.
//! `k_l(x) = sqrt(2/(π x)) K_{l+1/2}(x)`. With this choice the Wronskian is
//! `i_l k_l' - i_l' k_l = -1/x²` and the Yukawa kernel expands as
//! `exp(-κ|x-y|)/(4π|x-y|) = κ Σ_l i_l(κ r<) k_l(κ r>) Σ_m Y_l^m Y_l^m`.
//!
//! `i_l` is the minimal solution of the three-term recurrence, so its ratios
//! `i_{l+1}/i_l` are obtained by backward recurrence (Miller) and the values
//! are normalized by `i_0`. `k_l` is dominant and is run upward from `k_0`,
//! `k_1`. Log-derivatives and the product `i_l k_l` only use ratios, so they
//! stay finite where the individual functions overflow.

use crate::{Error, Result};

fn check_arg(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "modified spherical Bessel argument must be positive and finite, got {x}"
        )));
    }
    Ok(())
}

/// Ratios `i_{l+1}(x)/i_l(x)` for `l = 0..=lmax`.
pub(crate) fn i_ratios(lmax: usize, x: f64) -> Vec<f64> {
    // start index far enough past lmax that the backward recurrence has
    // forgotten its (zero) seed
    let start = lmax + 40 + (2.0 * x) as usize;
    let mut ratios = vec![0.0; lmax + 1];
    let mut r = 0.0;
    for n in (1..=start + 1).rev() {
        // r_{n-1} = i_n / i_{n-1} = 1 / ((2n+1)/x + r_n)
        r = 1.0 / ((2 * n + 1) as f64 / x + r);
        if n - 1 <= lmax {
            ratios[n - 1] = r;
        }
    }
    ratios
}

/// Ratios `k_l(x)/k_{l-1}(x)` for `l = 1..=lmax`, stored at index `l`.
/// Index 0 holds 1.
fn k_ratios(lmax: usize, x: f64) -> Vec<f64> {
    let mut q = vec![1.0; lmax + 1];
    if lmax >= 1 {
        q[1] = 1.0 + 1.0 / x;
    }
    for n in 1..lmax {
        // k_{n+1} = k_{n-1} + (2n+1)/x k_n
        q[n + 1] = 1.0 / q[n] + (2 * n + 1) as f64 / x;
    }
    q
}

fn i0(x: f64) -> f64 {
    if x < 1e-4 {
        1.0 + x * x / 6.0 * (1.0 + x * x / 20.0)
    } else {
        x.sinh() / x
    }
}

/// `i_l(x)` for `l = 0..=lmax`.
pub fn bessel_i_all(lmax: usize, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    let first = i0(x);
    if !first.is_finite() {
        return Err(Error::Overflow {
            function: "i",
            order: 0,
            x,
        });
    }
    let ratios = i_ratios(lmax, x);
    let mut out = Vec::with_capacity(lmax + 1);
    out.push(first);
    for l in 1..=lmax {
        out.push(out[l - 1] * ratios[l - 1]);
    }
    Ok(out)
}

/// Modified spherical Bessel function of the first kind, `i_l(x)`.
pub fn bessel_i(l: usize, x: f64) -> Result<f64> {
    Ok(bessel_i_all(l, x)?[l])
}

/// `k_l(x)` for `l = 0..=lmax`.
pub fn bessel_k_all(lmax: usize, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    let first = (-x).exp() / x;
    if first == 0.0 || !first.is_finite() {
        return Err(Error::Overflow {
            function: "k",
            order: 0,
            x,
        });
    }
    let q = k_ratios(lmax, x);
    let mut out = Vec::with_capacity(lmax + 1);
    out.push(first);
    for l in 1..=lmax {
        let v = out[l - 1] * q[l];
        if !v.is_finite() {
            return Err(Error::Overflow {
                function: "k",
                order: l,
                x,
            });
        }
        out.push(v);
    }
    Ok(out)
}

/// Modified spherical Bessel function of the second kind, `k_l(x)`.
pub fn bessel_k(l: usize, x: f64) -> Result<f64> {
    Ok(bessel_k_all(l, x)?[l])
}

/// `i_l'(x) / i_l(x)` for `l = 0..=lmax`.
pub fn log_deriv_i_all(lmax: usize, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    let ratios = i_ratios(lmax, x);
    Ok((0..=lmax).map(|l| l as f64 / x + ratios[l]).collect())
}

/// `i_l'(x) / i_l(x) = l/x + i_{l+1}(x)/i_l(x)`.
pub fn log_deriv_i(l: usize, x: f64) -> Result<f64> {
    Ok(log_deriv_i_all(l, x)?[l])
}

/// `-k_l'(x) / k_l(x)` for `l = 0..=lmax`.
pub fn log_deriv_k_all(lmax: usize, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    let q = k_ratios(lmax, x);
    Ok((0..=lmax)
        .map(|l| {
            if l == 0 {
                1.0 + 1.0 / x
            } else {
                1.0 / q[l] + (l + 1) as f64 / x
            }
        })
        .collect())
}

/// `-k_l'(x) / k_l(x) = k_{l-1}(x)/k_l(x) + (l+1)/x`.
pub fn log_deriv_k(l: usize, x: f64) -> Result<f64> {
    Ok(log_deriv_k_all(l, x)?[l])
}

/// `i_l(x) k_l(x)` for `l = 0..=lmax`, free of intermediate overflow.
pub fn ik_product_all(lmax: usize, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    let ri = i_ratios(lmax, x);
    let qk = k_ratios(lmax, x);
    // i_0 k_0 = (1 - exp(-2x)) / (2x²)
    let mut out = Vec::with_capacity(lmax + 1);
    out.push(-(-2.0 * x).exp_m1() / (2.0 * x * x));
    for l in 1..=lmax {
        out.push(out[l - 1] * ri[l - 1] * qk[l]);
    }
    Ok(out)
}

/// `i_l(x) k_l(x)`.
pub fn ik_product(l: usize, x: f64) -> Result<f64> {
    Ok(ik_product_all(l, x)?[l])
}

/// `i_l(κ r) / i_l(κ R)` for `l = 0..=lmax`, the radial profile of a
/// screened-Poisson solution inside a ball of radius `R`. Defined at `r = 0`.
pub(crate) fn i_radial_profile(lmax: usize, kappa: f64, r: f64, radius: f64) -> Result<Vec<f64>> {
    let outer = bessel_i_all(lmax, kappa * radius)?;
    if r <= 0.0 {
        let mut v = vec![0.0; lmax + 1];
        v[0] = 1.0 / outer[0];
        return Ok(v);
    }
    let inner = bessel_i_all(lmax, kappa * r)?;
    Ok(inner.iter().zip(&outer).map(|(a, b)| a / b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn closed_forms() {
        assert_relative_eq!(bessel_i(0, 1.0).unwrap(), 1.0_f64.sinh(), epsilon = 1e-15);
        assert_relative_eq!(bessel_k(0, 1.0).unwrap(), (-1.0_f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(bessel_k(1, 1.0).unwrap(), 2.0 * (-1.0_f64).exp(), epsilon = 1e-15);
        let x = 2.3_f64;
        let i1 = (x * x.cosh() - x.sinh()) / (x * x);
        assert_relative_eq!(bessel_i(1, x).unwrap(), i1, max_relative = 1e-14);
        let i2 = ((x * x + 3.0) * x.sinh() - 3.0 * x * x.cosh()) / x.powi(3);
        assert_relative_eq!(bessel_i(2, x).unwrap(), i2, max_relative = 1e-13);
        let k2 = (-x).exp() * (1.0 / x + 3.0 / (x * x) + 3.0 / x.powi(3));
        assert_relative_eq!(bessel_k(2, x).unwrap(), k2, max_relative = 1e-14);
    }

    #[test]
    fn small_argument_series() {
        for &x in &[1e-3, 1e-6, 1e-9] {
            assert_relative_eq!(bessel_i(1, x).unwrap() / x, 1.0 / 3.0, max_relative = 1e-5);
            assert_relative_eq!(
                bessel_i(3, x).unwrap() / x.powi(3),
                1.0 / 105.0,
                max_relative = 1e-5
            );
        }
    }

    #[test]
    fn wronskian_at_two_and_a_half() {
        let x = 2.5;
        let i0 = bessel_i(0, x).unwrap();
        let k0 = bessel_k(0, x).unwrap();
        let di0 = i0 * log_deriv_i(0, x).unwrap();
        let dk0 = -k0 * log_deriv_k(0, x).unwrap();
        assert_relative_eq!(i0 * dk0 - di0 * k0, -1.0 / (x * x), max_relative = 1e-12);
    }

    #[test]
    fn log_derivative_examples() {
        assert_relative_eq!(log_deriv_k(0, 3.0).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
        assert!(log_deriv_k(5, 0.2).unwrap() >= 6.0 / 0.2);
        let coth1 = 1.0 / 1.0_f64.tanh();
        assert_relative_eq!(log_deriv_i(0, 1.0).unwrap(), coth1 - 1.0, epsilon = 1e-15);
        assert_relative_eq!(log_deriv_i(0, 1.0).unwrap(), 0.313_035_285_499_331_3, epsilon = 1e-14);
    }

    #[test]
    fn recurrence_residual() {
        let x = 0.7;
        let k = bessel_k_all(2, x).unwrap();
        assert!((k[0] - k[2] + 3.0 / x * k[1]).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_and_overflow() {
        assert!(matches!(bessel_i(0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_k(1, -1.0), Err(Error::Domain(_))));
        assert!(matches!(log_deriv_k(1, f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(bessel_i(0, 800.0), Err(Error::Overflow { .. })));
        assert!(matches!(bessel_k(0, 800.0), Err(Error::Overflow { .. })));
        assert!(matches!(bessel_k(200, 1e-3), Err(Error::Overflow { .. })));
        // ratios remain usable where the functions themselves do not
        assert!(log_deriv_i(3, 800.0).unwrap().is_finite());
        assert!(ik_product(200, 1e-3).unwrap().is_finite());
    }

    #[test]
    fn radial_profile_at_center() {
        let p = i_radial_profile(3, 0.5, 0.0, 2.0).unwrap();
        assert_relative_eq!(p[0], 1.0 / bessel_i(0, 1.0).unwrap(), epsilon = 1e-15);
        assert_eq!(&p[1..], &[0.0, 0.0, 0.0]);
        let p = i_radial_profile(3, 0.5, 2.0, 2.0).unwrap();
        for v in p {
            assert_relative_eq!(v, 1.0, epsilon = 1e-15);
        }
    }
}
