//! Browser front end: classify a corner jet, probe its normals, and fit the
//! hemisphere with or without corner constraints.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use rounded_corners::corner::{classify_corner, CornerClassification, CornerKind, CornerTolerances};
use rounded_corners::diagnostics::{
    axis_normal_probe, degenerate_jet, discont_independent_jet, discont_opposite_jet, log_spaced, normal_convergence_probe, quadratic_taylor_patch,
    rounded_quadratic_jet, ProbeSeries,
};
use rounded_corners::fit::{hemisphere_normal_probe, FitConfig, HemisphereMap, Scheme};
use rounded_corners::spline::{Corner, CornerJet};
use rounded_corners::Vec3;

/// Second-order corner data as edited in the page.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetInput {
    pub xi10: [f64; 3],
    pub xi01: [f64; 3],
    pub xi20: [f64; 3],
    pub xi11: [f64; 3],
    pub xi02: [f64; 3],
}

impl JetInput {
    fn jet(&self) -> CornerJet {
        let v = |a: [f64; 3]| Vec3::from(a);
        CornerJet::from_taylor(Vec3::zeros(), v(self.xi10), v(self.xi01), v(self.xi20), v(self.xi11), v(self.xi02))
    }

    fn from_jet(j: &CornerJet) -> JetInput {
        let a = |v: Vec3| [v.x, v.y, v.z];
        JetInput {
            xi10: a(j.xi10),
            xi01: a(j.xi01),
            xi20: a(j.xi20),
            xi11: a(j.xi11),
            xi02: a(j.xi02),
        }
    }
}

#[derive(Serialize)]
struct ProbeOutput {
    kind: CornerKind,
    /// `diagonal` (angle to the limit normal) or `axis` (angle between the axis normals).
    probe: &'static str,
    series: ProbeSeries,
}

#[derive(Serialize)]
struct HemisphereOutput {
    degree: usize,
    level: u32,
    scheme: Scheme,
    max_error: f64,
    max_normal_angle: Option<f64>,
    constraint_residual: f64,
    corner_kinds: Vec<CornerKind>,
    probe: ProbeSeries,
}

fn parse_jet(json: &str) -> Result<JetInput, String> {
    serde_json::from_str(json).map_err(|e| e.to_string())
}

fn to_string<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

pub fn preset_jet_json(name: &str) -> Result<String, String> {
    let jet = match name {
        "rounded" => rounded_quadratic_jet(),
        "independent" => discont_independent_jet(),
        "opposite" => discont_opposite_jet(),
        "degenerate" => degenerate_jet(),
        other => return Err(format!("unknown preset '{other}'")),
    };
    serde_json::to_string_pretty(&JetInput::from_jet(&jet)).map_err(|e| e.to_string())
}

pub fn classify_json(jet: &str) -> Result<String, String> {
    let class: CornerClassification = classify_corner(&parse_jet(jet)?.jet(), &CornerTolerances::default());
    to_string(&class)
}

pub fn probe_json(jet: &str, min: f64, max: f64, count: usize) -> Result<String, String> {
    if !(min > 0.0 && max > min && max < 0.5) || count < 2 {
        return Err("need 0 < min < max < 0.5 and at least two scales".into());
    }
    let jet = parse_jet(jet)?.jet();
    let kind = classify_corner(&jet, &CornerTolerances::default()).kind;
    let patch = quadratic_taylor_patch(&jet, 0.5);
    let alphas = log_spaced(min, max, count);
    let (probe, series) = if kind == CornerKind::Rounded {
        ("diagonal", normal_convergence_probe(&patch, Corner::U0V0, [1.0, 1.0], &alphas))
    } else {
        ("axis", axis_normal_probe(&patch, Corner::U0V0, &alphas))
    };
    let series = series.map_err(|e| e.to_string())?;
    to_string(&ProbeOutput { kind, probe, series })
}

pub fn hemisphere_json(degree: usize, level: u32, scheme: &str) -> Result<String, String> {
    let scheme = match scheme {
        "standard" => Scheme::Standard,
        "rcc" => Scheme::Rcc,
        other => return Err(format!("unknown scheme '{other}'")),
    };
    if level > 5 {
        return Err("levels above 5 are too slow for the page".into());
    }
    let rep = FitConfig::new(degree, level, scheme).run().map_err(|e| e.to_string())?;
    let probe = hemisphere_normal_probe(&rep.surface, Corner::U1V1, &log_spaced(1e-7, 1e-1, 25), HemisphereMap::Analytic).map_err(|e| e.to_string())?;
    to_string(&HemisphereOutput {
        degree,
        level,
        scheme,
        max_error: rep.max_error,
        max_normal_angle: rep.max_normal_angle,
        constraint_residual: rep.constraint_residual,
        corner_kinds: rep.corners.iter().map(|c| c.kind).collect(),
        probe,
    })
}

#[wasm_bindgen]
pub fn preset_jet(name: &str) -> Result<String, JsValue> {
    preset_jet_json(name).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn classify(jet: &str) -> Result<String, JsValue> {
    classify_json(jet).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn normal_probe(jet: &str, min: f64, max: f64, count: usize) -> Result<String, JsValue> {
    probe_json(jet, min, max, count).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn hemisphere_fit(degree: usize, level: u32, scheme: &str) -> Result<String, JsValue> {
    hemisphere_json(degree, level, scheme).map_err(|e| JsValue::from_str(&e))
}
