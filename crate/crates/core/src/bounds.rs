//! Bound constants `C_n`, `D_n` and the energy bounds they feed.

use std::f64::consts::PI;

use serde::Serialize;

use crate::geometry::sigma;
use crate::{Error, Result};

/// Reason code attached to reports whose hyperplane bounds are undefined.
pub const PROP5_NEEDS_N3: &str = "hyperplane_bound_requires_n_ge_3";

/// `C_n = nσ(n) / (8π)`.
pub fn constant_c(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::arg(format!("C_n needs n >= 2, got {n}")));
    }
    Ok(n as f64 * sigma(n) / (8.0 * PI))
}

/// `D_n = nσ(n) / ((n-1)σ(n-1))`.
pub fn constant_d(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::arg(format!("D_n needs n >= 3, got {n}")));
    }
    Ok(n as f64 * sigma(n) / ((n - 1) as f64 * sigma(n - 1)))
}

/// `(σ(n-2)/2, 2((n-1)/n)·C_n)`, two forms of the upper constant.
pub fn upper_constant_identity(n: usize) -> Result<(f64, f64)> {
    if n < 3 {
        return Err(Error::arg(format!("upper constant identity needs n >= 3, got {n}")));
    }
    let lhs = sigma(n - 2) / 2.0;
    let rhs = 2.0 * ((n - 1) as f64 / n as f64) * constant_c(n)?;
    Ok((lhs, rhs))
}

/// `(n-1)² / (n(n-2))`, the ratio of the hyperplane upper and lower bounds.
pub fn prop5_ratio(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::arg(format!("hyperplane ratio needs n >= 3, got {n}")));
    }
    let n = n as f64;
    Ok((n - 1.0) * (n - 1.0) / (n * (n - 2.0)))
}

/// `2(n-1)/n`, the ratio of the area upper and lower bounds.
pub fn thm1_ratio(n: usize) -> f64 {
    2.0 * (n - 1) as f64 / n as f64
}

/// Homotopy invariants of a class of maps `RP^n → M`, supplied by the user.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HomotopyClassData {
    pub n: usize,
    /// Infimal area `A★` of the induced class on `RP²`.
    pub area_star: Option<f64>,
    /// Infimal length `L★` of the image of the generator of `π₁`.
    pub length_star: Option<f64>,
    /// Infimal energy `β` of the induced class on `RP^{n-1}`.
    pub beta: Option<f64>,
}

impl HomotopyClassData {
    /// The class of the identity of `RP^n`: `A★ = 2π`, `L★ = π`.
    pub fn identity_class(n: usize) -> Self {
        HomotopyClassData { n, area_star: Some(2.0 * PI), length_star: Some(PI), beta: None }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::arg(format!("bounds need n >= 2, got {}", self.n)));
        }
        if self.area_star.is_none() && self.length_star.is_none() && self.beta.is_none() {
            return Err(Error::arg("at least one of A★, L★, β is required"));
        }
        for (name, v) in [("A★", self.area_star), ("L★", self.length_star), ("β", self.beta)] {
            if let Some(v) = v {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::arg(format!("{name} must be a nonnegative number, got {v}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRatios {
    pub thm1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prop5: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub n: usize,
    pub sigma_n: f64,
    #[serde(rename = "C_n")]
    pub c_n: f64,
    #[serde(rename = "D_n", skip_serializing_if = "Option::is_none")]
    pub d_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_thm1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper_thm1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_thm2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_prop5: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper_prop5: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pu_consistent: Option<bool>,
    pub ratios: BoundRatios,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prop5_omitted: Option<&'static str>,
}

/// `A★ >= (2/π)L★²`, equivalently `C_n A★ >= nσ(n)L★²/(4π²)`, up to
/// `1e-9` absolute plus `1e-7` relative so that decimal inputs of the
/// equality case are accepted.
pub fn pu_consistent(area_star: f64, length_star: f64) -> bool {
    let pu = 2.0 / PI * length_star * length_star;
    area_star >= pu - 1e-9 - 1e-7 * pu
}

/// Every bound whose inputs are present.
pub fn bounds_report(data: &HomotopyClassData) -> Result<BoundsReport> {
    data.validate()?;
    let n = data.n;
    let nf = n as f64;
    let c_n = constant_c(n)?;
    let d_n = constant_d(n).ok();
    let ratio5 = prop5_ratio(n).ok();

    let lower_thm1 = data.area_star.map(|a| c_n * a);
    let upper_thm1 = data.area_star.map(|a| thm1_ratio(n) * c_n * a);
    let lower_thm2 = data.length_star.map(|l| nf * sigma(n) / (4.0 * PI * PI) * l * l);
    let (lower_prop5, upper_prop5, prop5_omitted) = match (data.beta, d_n, ratio5) {
        (Some(b), Some(d), Some(r)) => (Some(d * b), Some(r * d * b), None),
        (Some(_), _, _) => (None, None, Some(PROP5_NEEDS_N3)),
        (None, _, _) => (None, None, None),
    };
    let pu = match (data.area_star, data.length_star) {
        (Some(a), Some(l)) => Some(pu_consistent(a, l)),
        _ => None,
    };
    Ok(BoundsReport {
        n,
        sigma_n: sigma(n),
        c_n,
        d_n,
        lower_thm1,
        upper_thm1,
        lower_thm2,
        lower_prop5,
        upper_prop5,
        pu_consistent: pu,
        ratios: BoundRatios { thm1: thm1_ratio(n), prop5: ratio5 },
        prop5_omitted,
    })
}
