use serde::{Deserialize, Serialize};

use crate::error::{Result, WvaError};
use crate::scalar::Real;

use super::{postselection_probability, projected_parts, ControlConfig, Settings};

/// How a detection limit on the weak-value output is turned into an angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionReading {
    /// The limit is a fraction of the weak value: `limit |WV| / |WV'|`.
    #[default]
    Relative,
    /// The limit is an absolute change of the weak value: `limit / |WV'|`.
    Absolute,
}

/// Analytic `d WV / d theta_b` of the projected-control weak value at the
/// configured `theta_b`. `None` at a divergence.
pub fn weak_value_derivative_theta_b<T: Real>(config: &ControlConfig<T>) -> Option<T> {
    derivative_at(config, config.ps_b.theta())
}

fn derivative_at<T: Real>(config: &ControlConfig<T>, theta_b: T) -> Option<T> {
    let [c1, c2, c3] = config.state.coefficients();
    let (ta, pa, pb) = (config.ps_a.theta(), config.ps_a.phi(), config.ps_b.phi());
    let j = config.j10();
    let (n, d) = projected_parts([c1, c2, c3], ta, pa, theta_b, pb, j);
    if d.abs() < Settings::<T>::default().eps_den {
        return None;
    }
    let f = c1 * pa.cos() * pb.cos() + c2 * pa.sin() * pb.sin();
    let dn = -c3 * theta_b.sin();
    let dd = -c3 * ta.cos() * theta_b.sin() + j * ta.sin() * theta_b.cos() * f;
    Some((dn * d - n * dd) / (d * d))
}

/// Central difference of the weak value in `theta_b`.
pub(crate) fn finite_difference<T: Real>(config: &ControlConfig<T>, step: T) -> Option<T> {
    let eps = Settings::<T>::default().eps_den;
    let tb = config.ps_b.theta();
    let hi = config.weak_value_at_theta_b(tb + step, eps)?;
    let lo = config.weak_value_at_theta_b(tb - step, eps)?;
    Some((hi - lo) / (T::two() * step))
}

fn finite_point<T: Real>(config: &ControlConfig<T>) -> Result<(T, T)> {
    let eps = Settings::<T>::default().eps_den;
    let (_, d) = projected_parts(
        config.state.coefficients(),
        config.ps_a.theta(),
        config.ps_a.phi(),
        config.ps_b.theta(),
        config.ps_b.phi(),
        config.j10(),
    );
    let wv = config
        .weak_value_at_theta_b(config.ps_b.theta(), eps)
        .ok_or(WvaError::Divergent(d.to_f64_lossy()))?;
    let deriv = weak_value_derivative_theta_b(config).ok_or(WvaError::Divergent(d.to_f64_lossy()))?;
    if deriv.abs() < T::zero_tolerance() {
        return Err(WvaError::ZeroDerivative(deriv.to_f64_lossy()));
    }
    Ok((wv, deriv))
}

/// `eta = (WV(theta_b0 + d) - WV(theta_b0)) / WV'(theta_b0)`, an estimate of
/// the control-angle displacement read off the meter.
pub fn sensitivity_eta<T: Real>(config: &ControlConfig<T>, delta_theta_b: T) -> Result<T> {
    let (wv, deriv) = finite_point(config)?;
    let tb = config.ps_b.theta() + delta_theta_b;
    let (_, d) = projected_parts(
        config.state.coefficients(),
        config.ps_a.theta(),
        config.ps_a.phi(),
        tb,
        config.ps_b.phi(),
        config.j10(),
    );
    let shifted = config
        .weak_value_at_theta_b(tb, Settings::<T>::default().eps_den)
        .ok_or(WvaError::Divergent(d.to_f64_lossy()))?;
    Ok((shifted - wv) / deriv)
}

/// Smallest `theta_b` offset whose output change reaches the detection limit.
pub fn resolvable_angle<T: Real>(
    config: &ControlConfig<T>,
    detection_limit: T,
    reading: DetectionReading,
) -> Result<T> {
    let (wv, deriv) = finite_point(config)?;
    Ok(match reading {
        DetectionReading::Relative => detection_limit * wv.abs() / deriv.abs(),
        DetectionReading::Absolute => detection_limit / deriv.abs(),
    })
}

/// Everything the sensitivity protocol reports for one working point. Both
/// readings of the detection limit are included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensitivityReport<T = f64> {
    pub theta_b0: T,
    pub delta_theta_b: T,
    pub eta: T,
    pub weak_value: T,
    pub derivative: T,
    pub finite_difference: T,
    pub probability: T,
    pub detection_limit: T,
    pub reading: DetectionReading,
    pub resolvable_angle: T,
    pub resolvable_angle_relative: T,
    pub resolvable_angle_absolute: T,
}

pub fn sensitivity_report<T: Real>(
    config: &ControlConfig<T>,
    delta_theta_b: T,
    detection_limit: T,
    reading: DetectionReading,
) -> Result<SensitivityReport<T>> {
    let (wv, deriv) = finite_point(config)?;
    let fd = finite_difference(config, T::lit(1e-6)).unwrap_or(T::nan());
    let rel = resolvable_angle(config, detection_limit, DetectionReading::Relative)?;
    let abs = resolvable_angle(config, detection_limit, DetectionReading::Absolute)?;
    Ok(SensitivityReport {
        theta_b0: config.ps_b.theta(),
        delta_theta_b,
        eta: sensitivity_eta(config, delta_theta_b)?,
        weak_value: wv,
        derivative: deriv,
        finite_difference: fd,
        probability: postselection_probability(&config.state, &config.ps_a, &config.ps_b),
        detection_limit,
        reading,
        resolvable_angle: match reading {
            DetectionReading::Relative => rel,
            DetectionReading::Absolute => abs,
        },
        resolvable_angle_relative: rel,
        resolvable_angle_absolute: abs,
    })
}
