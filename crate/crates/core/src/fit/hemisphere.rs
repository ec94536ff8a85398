use std::f64::consts::{FRAC_PI_2, FRAC_1_SQRT_2};

use serde::{Deserialize, Serialize};

use super::{fit_surface, CornerConstraintSpec, FitError, FitProblem, FitReport, FitSpace};
use crate::diagnostics::{angle_between, fit_rate, normal_vector, DiagnosticsError, ProbeSeries, PREASYMPTOTIC_DISCARD};
use crate::spline::{Corner, TensorSurface};
use crate::Vec3;

/// Square-to-disk map `(u √(1 − v²/2), v √(1 − u²/2))`.
pub fn disk_map(u: f64, v: f64) -> (f64, f64) {
    (u * (1.0 - 0.5 * v * v).sqrt(), v * (1.0 - 0.5 * u * u).sqrt())
}

/// Unit hemisphere over `[-1, 1]²`: the disk map followed by the
/// equal-angle lift `w ↦ (w sin(πρ/2)/ρ, cos(πρ/2))`, `ρ = ‖w‖`.
///
/// Analytic up to the boundary; the domain boundary lands on the equator
/// and the corners on `(±1, ±1)/√2`.
pub fn hemisphere_reference(u: f64, v: f64) -> Vec3 {
    let (x, y) = disk_map(u, v);
    let rho2 = u * u + v * v - u * u * v * v;
    let rho = rho2.max(0.0).sqrt();
    let angle = FRAC_PI_2 * rho;
    let radial = if rho > 0.0 { angle.sin() / rho } else { FRAC_PI_2 };
    Vec3::new(x * radial, y * radial, angle.cos())
}

/// The disk map lifted vertically, `z = √((1 − u²)(1 − v²))`. Lies on the
/// sphere but has unbounded derivatives along the domain boundary.
pub fn hemisphere_elliptic(u: f64, v: f64) -> Vec3 {
    let (x, y) = disk_map(u, v);
    Vec3::new(x, y, ((1.0 - u * u) * (1.0 - v * v)).max(0.0).sqrt())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HemisphereMap {
    #[default]
    Analytic,
    Elliptic,
}

impl HemisphereMap {
    pub fn eval(self, u: f64, v: f64) -> Vec3 {
        match self {
            HemisphereMap::Analytic => hemisphere_reference(u, v),
            HemisphereMap::Elliptic => hemisphere_elliptic(u, v),
        }
    }
}

/// Constraints at all four corners with the exact sphere normals.
pub fn hemisphere_corner_constraints(alpha1: f64) -> Vec<CornerConstraintSpec> {
    Corner::ALL
        .iter()
        .map(|&corner| {
            let (fu, fv) = corner.flips();
            let sx = if fu { 1.0 } else { -1.0 };
            let sy = if fv { 1.0 } else { -1.0 };
            CornerConstraintSpec::new(corner, alpha1, Vec3::new(sx * FRAC_1_SQRT_2, sy * FRAC_1_SQRT_2, 0.0))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Standard,
    Rcc,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Standard => "standard",
            Scheme::Rcc => "rcc",
        }
    }
}

fn yes() -> bool {
    true
}

/// Hemisphere fit configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub degree: usize,
    pub level: u32,
    pub scheme: Scheme,
    #[serde(default = "yes")]
    pub two_step: bool,
    /// Gauss points per span; defaults to `degree + 2`.
    #[serde(default)]
    pub quad_points: Option<usize>,
    /// RCC corners; empty means all four with exact normals and `α₁ = ½`.
    #[serde(default)]
    pub corners: Vec<CornerConstraintSpec>,
    #[serde(default)]
    pub map: HemisphereMap,
}

impl FitConfig {
    pub fn new(degree: usize, level: u32, scheme: Scheme) -> FitConfig {
        FitConfig {
            degree,
            level,
            scheme,
            two_step: true,
            quad_points: None,
            corners: Vec::new(),
            map: HemisphereMap::Analytic,
        }
    }

    pub fn quad_points(&self) -> usize {
        self.quad_points.unwrap_or(self.degree + 2)
    }

    pub fn constraints(&self) -> Result<Vec<CornerConstraintSpec>, FitError> {
        match self.scheme {
            Scheme::Standard if !self.corners.is_empty() => Err(FitError::InvalidConfig("corners given for the standard scheme".into())),
            Scheme::Standard => Ok(Vec::new()),
            Scheme::Rcc if self.corners.is_empty() => Ok(hemisphere_corner_constraints(0.5)),
            Scheme::Rcc => Ok(self.corners.clone()),
        }
    }

    pub fn validate(&self) -> Result<(), FitError> {
        if self.degree < 2 {
            return Err(FitError::InvalidConfig(format!("degree must be at least 2, got {}", self.degree)));
        }
        if self.level < 1 || self.level > 10 {
            return Err(FitError::InvalidConfig(format!("level must lie in 1..=10, got {}", self.level)));
        }
        for c in &self.corners {
            c.validate()?;
        }
        Ok(())
    }

    /// Fit the hemisphere in the dyadic space of this configuration.
    pub fn run(&self) -> Result<FitReport, FitError> {
        self.validate()?;
        let map = self.map;
        let target = move |u: f64, v: f64| map.eval(u, v);
        let mut problem = FitProblem::new(FitSpace::dyadic(self.degree, self.level)?, &target);
        // on the unit sphere the outer normal is the point itself
        problem.target_normal = Some(&target);
        problem.constraints = self.constraints()?;
        problem.quad_points = self.quad_points();
        problem.two_step = self.two_step;
        fit_surface(&problem)
    }
}

/// Angles between the fitted normal at local `(α, α)` from `corner` and the
/// exact sphere normal there.
pub fn hemisphere_normal_probe(surface: &TensorSurface, corner: Corner, alphas: &[f64], map: HemisphereMap) -> Result<ProbeSeries, DiagnosticsError> {
    let mut values = Vec::with_capacity(alphas.len());
    for &a in alphas {
        let (u, v) = surface.local_to_global(corner, a, a);
        let nu = normal_vector(surface, u, v)?;
        values.push(angle_between(&nu, &map.eval(u, v)));
    }
    Ok(ProbeSeries {
        fitted_rate: fit_rate(alphas, &values, PREASYMPTOTIC_DISCARD),
        parameters: alphas.to_vec(),
        values,
    })
}
