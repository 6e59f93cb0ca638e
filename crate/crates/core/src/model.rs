//! Univariate Gaussian kernel with a normal x inverse-gamma base measure.
//!
//! `f(y | z) = N(y; mean, variance)` and `H = N(mean0, var_z) x IG(shape, rate)`.
//! The fixed-variance variant pins every component variance to one known
//! value; its likelihood is bounded in `z`, which the exact allocation
//! sampler requires.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};

use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentParams {
    pub mean: f64,
    pub variance: f64,
}

impl ComponentParams {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) || !variance.is_finite() || !mean.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "component needs a finite mean and positive variance, got ({mean}, {variance})"
            )));
        }
        Ok(Self { mean, variance })
    }

    /// Log density of `y`; the caller guarantees `variance > 0`.
    #[inline]
    pub fn log_density(&self, y: f64) -> f64 {
        let d = y - self.mean;
        -0.5 * (LN_2PI + self.variance.ln() + d * d / self.variance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseMeasureParams {
    pub mean0: f64,
    pub var_z: f64,
    pub gamma_shape: f64,
    pub beta_rate: f64,
}

impl BaseMeasureParams {
    pub fn new(mean0: f64, var_z: f64, gamma_shape: f64, beta_rate: f64) -> Result<Self> {
        let ok = mean0.is_finite()
            && var_z > 0.0
            && var_z.is_finite()
            && gamma_shape > 0.0
            && gamma_shape.is_finite()
            && beta_rate > 0.0
            && beta_rate.is_finite();
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "base measure needs var_z, shape, rate > 0, got ({mean0}, {var_z}, {gamma_shape}, {beta_rate})"
            )));
        }
        Ok(Self {
            mean0,
            var_z,
            gamma_shape,
            beta_rate,
        })
    }
}

/// How component variances are treated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarianceMode {
    /// Variance is a free component parameter with an inverse-gamma prior.
    Free,
    /// Every component shares this known variance (bounded likelihood).
    Fixed(f64),
}

/// Full model specification.
///
/// The Gaussian kernel has no extra likelihood parameters; the variance mode
/// is the only knob beyond the base measure and the concentration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub base: BaseMeasureParams,
    pub alpha: f64,
    pub variance: VarianceMode,
}

impl ModelSpec {
    pub fn new(base: BaseMeasureParams, alpha: f64) -> Result<Self> {
        Self::with_variance(base, alpha, VarianceMode::Free)
    }

    pub fn with_variance(base: BaseMeasureParams, alpha: f64, variance: VarianceMode) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        if let VarianceMode::Fixed(v) = variance {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("fixed variance must be positive, got {v}")));
            }
        }
        Ok(Self {
            base,
            alpha,
            variance,
        })
    }

    /// Draw a component from the base measure.
    pub fn sample_component<R: Rng + ?Sized>(&self, rng: &mut R) -> ComponentParams {
        match self.variance {
            VarianceMode::Free => sample_base(&self.base, rng),
            VarianceMode::Fixed(v) => ComponentParams {
                mean: sample_mean_given_variance(&self.base, v, 0, 0.0, rng),
                variance: v,
            },
        }
    }

    /// One Gibbs sweep over a component's parameters given its data.
    pub fn update_component<R: Rng + ?Sized>(
        &self,
        z: ComponentParams,
        data: &[f64],
        rng: &mut R,
    ) -> Result<ComponentParams> {
        match self.variance {
            VarianceMode::Free => update_component_params(z, data, &self.base, rng),
            VarianceMode::Fixed(v) => {
                if data.is_empty() {
                    return Err(empty_component());
                }
                let sum: f64 = data.iter().sum();
                Ok(ComponentParams {
                    mean: sample_mean_given_variance(&self.base, v, data.len(), sum, rng),
                    variance: v,
                })
            }
        }
    }

    pub fn likelihood_bound(&self) -> Result<f64> {
        match self.variance {
            VarianceMode::Fixed(v) => likelihood_bound(v),
            VarianceMode::Free => Err(Error::UnsupportedModel(
                "the free-variance Gaussian density is unbounded as the variance shrinks".into(),
            )),
        }
    }
}

pub fn obs_logdensity(y: f64, z: &ComponentParams) -> Result<f64> {
    if !(z.variance > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "variance must be positive, got {}",
            z.variance
        )));
    }
    Ok(z.log_density(y))
}

pub fn sample_base<R: Rng + ?Sized>(base: &BaseMeasureParams, rng: &mut R) -> ComponentParams {
    let mean = Normal::new(base.mean0, base.var_z.sqrt())
        .expect("validated base params")
        .sample(rng);
    let variance = sample_inverse_gamma(base.gamma_shape, base.beta_rate, rng);
    ComponentParams { mean, variance }
}

/// Draws `IG(shape, rate)` as the reciprocal of a `Gamma(shape, 1/rate)` draw.
pub fn sample_inverse_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    let g = Gamma::new(shape, 1.0 / rate).expect("positive gamma params").sample(rng);
    // Underflow of the gamma draw would give an infinite variance.
    (1.0 / g).clamp(f64::MIN_POSITIVE, f64::MAX)
}

/// Variance full conditional: `IG(shape + m/2, rate + SS/2)` with
/// `SS = sum (y - mean)^2`.
pub fn sample_variance_given_mean<R: Rng + ?Sized>(
    base: &BaseMeasureParams,
    mean: f64,
    data: &[f64],
    rng: &mut R,
) -> f64 {
    let ss: f64 = data.iter().map(|y| (y - mean) * (y - mean)).sum();
    let shape = base.gamma_shape + 0.5 * data.len() as f64;
    let rate = base.beta_rate + 0.5 * ss;
    sample_inverse_gamma(shape, rate, rng)
}

/// Mean full conditional given the variance, from `m` observations summing
/// to `sum`. With `m = 0` this is the prior `N(mean0, var_z)`.
pub fn sample_mean_given_variance<R: Rng + ?Sized>(
    base: &BaseMeasureParams,
    variance: f64,
    m: usize,
    sum: f64,
    rng: &mut R,
) -> f64 {
    let precision = 1.0 / base.var_z + m as f64 / variance;
    let location = (base.mean0 / base.var_z + sum / variance) / precision;
    Normal::new(location, precision.recip().sqrt())
        .expect("finite normal params")
        .sample(rng)
}

/// Two-block Gibbs update: variance given the current mean, then the mean
/// given the new variance.
pub fn update_component_params<R: Rng + ?Sized>(
    z: ComponentParams,
    data: &[f64],
    base: &BaseMeasureParams,
    rng: &mut R,
) -> Result<ComponentParams> {
    if data.is_empty() {
        return Err(empty_component());
    }
    let variance = sample_variance_given_mean(base, z.mean, data, rng);
    let sum: f64 = data.iter().sum();
    let mean = sample_mean_given_variance(base, variance, data.len(), sum, rng);
    Ok(ComponentParams { mean, variance })
}

fn empty_component() -> Error {
    Error::InvalidParameter("component has no data; draw it from the base measure instead".into())
}

/// Where to centre the prior on component means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HyperMu {
    /// `(min + max) / 2`.
    #[default]
    Midrange,
    /// Half the range, `R / 2`, regardless of where the data sit.
    HalfRange,
}

/// Data-driven base measure: with `R` the data range, `var_z = R^2`,
/// `shape = 2` and `rate = 0.02 R^2`.
pub fn data_driven_hyperparams(data: &[f64], mu: HyperMu) -> Result<BaseMeasureParams> {
    let (lo, hi) = data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| (lo.min(y), hi.max(y)));
    let range = hi - lo;
    if !(range > 0.0) || !range.is_finite() {
        return Err(Error::DegenerateRange);
    }
    let mean0 = match mu {
        HyperMu::Midrange => 0.5 * (lo + hi),
        HyperMu::HalfRange => 0.5 * range,
    };
    BaseMeasureParams::new(mean0, range * range, 2.0, 0.02 * range * range)
}

/// Supremum over the mean of the Gaussian density with known variance.
pub fn likelihood_bound(fixed_variance: f64) -> Result<f64> {
    if !(fixed_variance > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "fixed variance must be positive, got {fixed_variance}"
        )));
    }
    Ok((2.0 * std::f64::consts::PI * fixed_variance).sqrt().recip())
}
