//! Closed-form solutions of the ballistic diffusion problem.
//!
//! A Gaussian of initial width `σ₀` evolving under `∂P/∂t = D_t ∂²P/∂x²`
//! with `D_t = D²t/σ₀²` stays Gaussian with
//! `σ(t) = σ₀·√(1 + D²t²/σ₀⁴)`. These functions are the reference the
//! numerical stepper is validated against.

use crate::error::{Error, Result};
use crate::params::{GaussianState, GeneralDiffusionLaw};
use crate::scalar::{lit, to_f64, Real};

fn check_sigma<T: Real>(field: &'static str, sigma: T) -> Result<()> {
    if sigma.is_finite() && sigma > T::zero() {
        Ok(())
    } else {
        Err(Error::validation(
            field,
            format!("must be > 0, got {}", sigma),
        ))
    }
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if t.is_finite() && t >= T::zero() {
        Ok(())
    } else {
        Err(Error::validation("t", format!("must be >= 0, got {}", t)))
    }
}

/// Normal density with mean `center` and standard deviation `sigma`.
pub fn gaussian_pdf<T: Real>(x: T, center: T, sigma: T) -> Result<T> {
    check_sigma("sigma", sigma)?;
    let z = (x - center) / sigma;
    Ok((-(z * z) / lit(2.0)).exp() / (T::TAU().sqrt() * sigma))
}

/// Packet width `σ₀·√(1 + D²t²/σ₀⁴)`.
pub fn analytic_sigma<T: Real>(t: T, sigma0: T, diffusivity: T) -> Result<T> {
    check_time(t)?;
    check_sigma("sigma0", sigma0)?;
    let tau = diffusivity * t / (sigma0 * sigma0);
    Ok(sigma0 * tau.hypot(T::one()))
}

/// Time-dependent diffusion coefficient `D_t = D²t/σ₀²`.
pub fn diffusion_coefficient<T: Real>(t: T, sigma0: T, diffusivity: T) -> Result<T> {
    check_time(t)?;
    check_sigma("sigma0", sigma0)?;
    Ok(diffusivity * diffusivity * t / (sigma0 * sigma0))
}

/// Rate of spreading `dσ/dt = D_t/σ(t)`.
pub fn analytic_sigma_rate<T: Real>(t: T, sigma0: T, diffusivity: T) -> Result<T> {
    Ok(diffusion_coefficient(t, sigma0, diffusivity)? / analytic_sigma(t, sigma0, diffusivity)?)
}

/// Least-squares power law `D_t = k·t^alpha` through samples of the
/// ballistic coefficient, fitted in log-log space.
pub fn verify_ballistic_exponent<T: Real>(
    sigma0: T,
    diffusivity: T,
    t_samples: &[T],
) -> Result<GeneralDiffusionLaw<T>> {
    if let Some(t) = t_samples
        .iter()
        .find(|t| !(t.is_finite() && **t > T::zero()))
    {
        return Err(Error::validation(
            "t_samples",
            format!("sample times must be > 0, got {}", t),
        ));
    }
    let mut distinct: Vec<f64> = t_samples.iter().map(|&t| to_f64(t)).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::validation(
            "t_samples",
            format!("need at least 3 distinct times, got {}", distinct.len()),
        ));
    }
    let points = t_samples
        .iter()
        .map(|&t| Ok((t.ln(), diffusion_coefficient(t, sigma0, diffusivity)?.ln())))
        .collect::<Result<Vec<_>>>()?;
    let (slope, intercept) = linear_fit(&points);
    GeneralDiffusionLaw::new(intercept.exp(), slope)
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linear_fit<T: Real>(points: &[(T, T)]) -> (T, T) {
    let n = lit::<T>(points.len() as f64);
    let (sx, sy) = points
        .iter()
        .fold((T::zero(), T::zero()), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxx, sxy) = points
        .iter()
        .fold((T::zero(), T::zero()), |(a, b), &(x, y)| {
            let dx = x - mx;
            (a + dx * dx, b + dx * (y - my))
        });
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Standard normal CDF `Φ(z)`.
pub fn standard_normal_cdf<T: Real>(z: T) -> T {
    let z = to_f64(z);
    lit(0.5 * libm::erfc(-z / std::f64::consts::SQRT_2))
}

/// Absolute accuracy of [`standard_normal_quantile`].
pub const QUANTILE_TOLERANCE: f64 = 1e-12;

/// `z` with `Φ(z) = q`, by bisection on the CDF.
pub fn standard_normal_quantile<T: Real>(q: T) -> Result<T> {
    let q = to_f64(q);
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::validation(
            "q",
            format!("quantile must lie in (0, 1), got {}", q),
        ));
    }
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    while hi - lo > QUANTILE_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if standard_normal_cdf(mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lit(0.5 * (lo + hi)))
}

/// Position of the `q`-quantile of the spreading packet at time `t`:
/// `center + z_q·σ(t)`.
pub fn analytic_flux_line<T: Real>(
    q: T,
    t: T,
    state: &GaussianState<T>,
    diffusivity: T,
) -> Result<T> {
    let z = standard_normal_quantile(q)?;
    Ok(state.center() + z * analytic_sigma(t, state.sigma0(), diffusivity)?)
}

/// Velocity of the `q`-quantile line, `z_q·dσ/dt`.
pub fn analytic_flux_line_velocity<T: Real>(
    q: T,
    t: T,
    state: &GaussianState<T>,
    diffusivity: T,
) -> Result<T> {
    let z = standard_normal_quantile(q)?;
    Ok(z * analytic_sigma_rate(t, state.sigma0(), diffusivity)?)
}

/// Exact density at time `t` for a packet that started as `state`.
pub fn exact_density<T: Real>(x: T, t: T, state: &GaussianState<T>, diffusivity: T) -> Result<T> {
    gaussian_pdf(
        x,
        state.center(),
        analytic_sigma(t, state.sigma0(), diffusivity)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Φ(z) by composite Simpson quadrature of the density from −12.
    fn cdf_by_quadrature(z: f64) -> f64 {
        let a = -12.0;
        let n = 20_000;
        let h = (z - a) / n as f64;
        let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = f(a) + f(z);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    /// Inverts the quadrature CDF by bisection.
    fn quantile_oracle(q: f64) -> f64 {
        let (mut lo, mut hi) = (-10.0, 10.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if cdf_by_quadrature(mid) < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn pdf_values() {
        assert_relative_eq!(
            gaussian_pdf(0.0, 0.0, 1.0).unwrap(),
            0.398_942_280_4,
            epsilon = 1e-10
        );
        assert_relative_eq!(
            gaussian_pdf(1.0, 0.0, 1.0).unwrap(),
            0.241_970_724_5,
            epsilon = 1e-10
        );
        assert_eq!(
            gaussian_pdf(3.0, 1.0, 2.0).unwrap(),
            gaussian_pdf(-1.0, 1.0, 2.0).unwrap()
        );
        assert!(gaussian_pdf(0.0, 0.0, 0.0).is_err());
        assert!(gaussian_pdf(0.0f32, 0.0, 1.0).unwrap() > 0.39);
    }

    #[test]
    fn sigma_values() {
        assert_eq!(analytic_sigma(0.0, 1.0, 0.5).unwrap(), 1.0);
        assert_relative_eq!(
            analytic_sigma(1.0, 1.0, 1.0).unwrap(),
            2f64.sqrt(),
            epsilon = 1e-15
        );
        // exact value √(1 + 10⁶) is within 1e-6 relative of the asymptote 1000
        let s = analytic_sigma(1000.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(s, (1.0f64 + 1e6).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(s, 1000.0, max_relative = 1e-6);
        assert!(analytic_sigma(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn coefficient_values() {
        assert_eq!(diffusion_coefficient(0.0, 3.0, 7.0).unwrap(), 0.0);
        assert_eq!(diffusion_coefficient(2.0, 1.0, 1.0).unwrap(), 2.0);
        assert_eq!(diffusion_coefficient(4.0, 2.0, 0.5).unwrap(), 0.25);
        assert!(diffusion_coefficient(-0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn exponent_fit() {
        let law = verify_ballistic_exponent(1.0, 1.0, &[1.0, 2.0, 4.0, 8.0]).unwrap();
        assert_relative_eq!(law.alpha(), 1.0, max_relative = 1e-10);
        assert_relative_eq!(law.k(), 1.0, max_relative = 1e-10);
        let law = verify_ballistic_exponent(2.0, 1.0, &[1.0, 10.0, 100.0]).unwrap();
        assert_relative_eq!(law.k(), 0.25, max_relative = 1e-10);
        assert!(verify_ballistic_exponent(1.0, 1.0, &[1.0, 1.0, 1.0]).is_err());
        assert!(verify_ballistic_exponent(1.0, 1.0, &[0.0, 1.0, 2.0]).is_err());
        assert!(verify_ballistic_exponent(1.0, 1.0, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn quantile_matches_quadrature_oracle() {
        for &q in &[0.05, 0.1, 0.3, 0.5, 0.8413447, 0.95] {
            let z = standard_normal_quantile(q).unwrap();
            assert!((z - quantile_oracle(q)).abs() < 1e-9, "q = {}", q);
        }
        assert!(standard_normal_quantile(0.0).is_err());
        assert!(standard_normal_quantile(1.0).is_err());
    }

    #[test]
    fn flux_line_examples() {
        let state = GaussianState::new(1.0, 0.0).unwrap();
        let shifted = GaussianState::new(1.0, 3.5).unwrap();
        for t in [0.0, 1.0, 17.0] {
            assert!((analytic_flux_line(0.5f64, t, &shifted, 1.0).unwrap() - 3.5).abs() < 1e-11);
        }
        // oracle: z for Φ = 0.8413447 is 0.99999993...
        let z = quantile_oracle(0.8413447);
        assert!((z - 1.0).abs() < 1e-6);
        let x0 = analytic_flux_line(0.8413447, 0.0, &state, 1.0).unwrap();
        assert!((x0 - z).abs() < 1e-9);
        let x1 = analytic_flux_line(0.8413447, 1.0, &state, 1.0).unwrap();
        assert!((x1 - z * 2f64.sqrt()).abs() < 1e-9);
        assert!(analytic_flux_line(1.5, 0.0, &state, 1.0).is_err());
    }

    #[test]
    fn line_velocity_tends_to_ballistic_asymptote() {
        let state = GaussianState::new(1.0, 0.0).unwrap();
        let z = standard_normal_quantile(0.9).unwrap();
        let v = analytic_flux_line_velocity(0.9, 1e4, &state, 0.5).unwrap();
        assert_relative_eq!(v, z * 0.5, max_relative = 1e-6);
    }

    #[test]
    fn normalization_by_trapezoid() {
        for &sigma in &[0.1, 0.37, 1.0, 3.3, 10.0] {
            let n = 4000;
            let h = 20.0 * sigma / n as f64;
            let mut s = 0.0;
            for i in 0..=n {
                let x = -10.0 * sigma + i as f64 * h;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                s += w * gaussian_pdf(x, 0.0, sigma).unwrap();
            }
            assert!((s * h - 1.0).abs() < 1e-8, "sigma = {}", sigma);
        }
    }

    proptest! {
        #[test]
        fn variance_rate_is_twice_the_coefficient(t in 0.1f64..100.0, sigma0 in 0.2f64..5.0, d in 0.1f64..2.0) {
            let h = 1e-4 * t;
            let var = |t: f64| analytic_sigma(t, sigma0, d).unwrap().powi(2);
            let rate = (var(t + h) - var(t - h)) / (2.0 * h);
            let expected = 2.0 * diffusion_coefficient(t, sigma0, d).unwrap();
            prop_assert!((rate - expected).abs() <= 1e-6 * expected);
        }

        #[test]
        fn flux_line_increases_with_quantile(q in 0.01f64..0.98, dq in 1e-3f64..0.01, t in 0.0f64..50.0) {
            let state = GaussianState::new(1.3, -0.4).unwrap();
            let a = analytic_flux_line(q, t, &state, 0.5).unwrap();
            let b = analytic_flux_line(q + dq, t, &state, 0.5).unwrap();
            prop_assert!(b > a);
        }

        #[test]
        fn homothety_of_flux_lines(q in 0.02f64..0.98, t in 0.0f64..50.0) {
            let state = GaussianState::new(0.7, 2.0).unwrap();
            let d = 0.5;
            let x0 = analytic_flux_line(q, 0.0, &state, d).unwrap() - 2.0;
            let xt = analytic_flux_line(q, t, &state, d).unwrap() - 2.0;
            let ratio = analytic_sigma(t, 0.7, d).unwrap() / 0.7;
            prop_assert!((xt - x0 * ratio).abs() <= 1e-12 * (1.0 + xt.abs()));
        }

        #[test]
        fn exponent_fit_is_exact(sigma0 in 0.1f64..10.0, d in 0.01f64..10.0) {
            let law = verify_ballistic_exponent(sigma0, d, &[0.5, 3.0, 20.0, 400.0]).unwrap();
            prop_assert!((law.alpha() - 1.0).abs() <= 1e-10);
            let k = d * d / (sigma0 * sigma0);
            prop_assert!((law.k() - k).abs() <= 1e-10 * k);
        }
    }
}
