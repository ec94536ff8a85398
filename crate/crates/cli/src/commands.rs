use std::path::{Path, PathBuf};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use rounded_corners::corner::{analyze_corner, CornerKind, CornerReport, CornerTolerances};
use rounded_corners::diagnostics::{
    axis_normal_probe, cross_norm_asymptotics, curvature_integral_sequence, fields_to_csv, injectivity_probe, log_spaced, make_fixture, normal_convergence_probe,
    normal_vector, predicted_axis_angle, random_rounded_net, sample_fields, InjectivityOptions, InjectivityOutcome, ProbeSeries, ProjectionPlane, FIXTURE_NAMES,
};
use rounded_corners::fit::{hemisphere_corner_constraints, hemisphere_normal_probe, FitConfig, HemisphereMap, Scheme};
use rounded_corners::repair::{repair_model, two_patch_model, CandidateAction, DetectOptions, MultipatchModel, RepairError};
use rounded_corners::spline::{Corner, KnotVector, TensorSurface};
use rounded_corners::Vec3;

use crate::output::{create_dir, csv_float, csv_text, emit, read_json, read_text, to_json, write_file, Failure, SCHEMA_VERSION};
use crate::{MapArg, SchemeArg};

fn parse_corners(arg: &str) -> Result<Vec<Corner>, Failure> {
    if arg == "all" {
        return Ok(Corner::ALL.to_vec());
    }
    arg.split(',').map(|c| c.trim().parse::<Corner>().map_err(Failure::input)).collect()
}

/// `2,3`, `1..4` or a mix such as `1,3..5`.
fn parse_list<T>(arg: &str, what: &str) -> Result<Vec<T>, Failure>
where
    T: std::str::FromStr + Copy + PartialOrd + std::ops::Add<Output = T> + From<u8>,
{
    let bad = || Failure::Input(format!("invalid {what} list '{arg}'"));
    let mut out = Vec::new();
    for part in arg.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let (mut a, b): (T, T) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            while a <= b {
                out.push(a);
                a = a + T::from(1);
            }
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

fn parse_vec3(arg: &str, what: &str) -> Result<Vec3, Failure> {
    let parts: Vec<f64> = arg
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Input(format!("{what} must be x,y,z, got '{arg}'")))?;
    match parts.as_slice() {
        [x, y, z] => Ok(Vec3::new(*x, *y, *z)),
        _ => Err(Failure::Input(format!("{what} must be x,y,z, got '{arg}'"))),
    }
}

fn read_surface(path: &Path) -> Result<TensorSurface, Failure> {
    read_json(path)
}

#[derive(Serialize)]
struct CheckReport {
    schema_version: u32,
    source: String,
    corners: Vec<CornerReport>,
}

pub fn check(path: &Path, corner: &str, out: Option<&Path>) -> Result<(), Failure> {
    let corners = parse_corners(corner)?;
    let surface = read_surface(path)?;
    let tol = CornerTolerances::default();
    let corners = corners
        .into_iter()
        .map(|c| analyze_corner(&surface, c, &tol).map_err(|e| Failure::Numerical(format!("corner {c}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let report = CheckReport {
        schema_version: SCHEMA_VERSION,
        source: path.display().to_string(),
        corners,
    };
    emit(out, &to_json(&report)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub degrees: Vec<usize>,
    pub levels: Vec<u32>,
    pub schemes: Vec<Scheme>,
    pub probe_min: f64,
    pub probe_max: f64,
    pub probe_count: usize,
    pub map: HemisphereMap,
    pub two_step: bool,
    pub quad_points: Option<usize>,
    /// Split parameter of the RCC corner constraints.
    pub alpha1: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            degrees: vec![2, 3],
            levels: vec![1, 2, 3, 4],
            schemes: vec![Scheme::Standard, Scheme::Rcc],
            probe_min: rounded_corners::diagnostics::DEFAULT_PROBE_MIN,
            probe_max: rounded_corners::diagnostics::DEFAULT_PROBE_MAX,
            probe_count: rounded_corners::diagnostics::DEFAULT_PROBE_COUNT,
            map: HemisphereMap::Analytic,
            two_step: true,
            quad_points: None,
            alpha1: 0.5,
        }
    }
}

pub struct ExperimentOverrides {
    pub degree: Option<String>,
    pub levels: Option<String>,
    pub scheme: Option<SchemeArg>,
    pub probe_min: Option<f64>,
    pub probe_max: Option<f64>,
    pub probe_count: Option<usize>,
    pub map: Option<MapArg>,
    pub single_step: bool,
}

impl ExperimentConfig {
    pub fn resolve(path: Option<&Path>, o: ExperimentOverrides) -> Result<ExperimentConfig, Failure> {
        let mut cfg: ExperimentConfig = match path {
            Some(p) => read_json(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(d) = &o.degree {
            cfg.degrees = parse_list(d, "degree")?;
        }
        if let Some(l) = &o.levels {
            cfg.levels = parse_list(l, "level")?;
        }
        if let Some(s) = o.scheme {
            cfg.schemes = match s {
                SchemeArg::Standard => vec![Scheme::Standard],
                SchemeArg::Rcc => vec![Scheme::Rcc],
                SchemeArg::Both => vec![Scheme::Standard, Scheme::Rcc],
            };
        }
        cfg.probe_min = o.probe_min.unwrap_or(cfg.probe_min);
        cfg.probe_max = o.probe_max.unwrap_or(cfg.probe_max);
        cfg.probe_count = o.probe_count.unwrap_or(cfg.probe_count);
        if let Some(m) = o.map {
            cfg.map = match m {
                MapArg::Analytic => HemisphereMap::Analytic,
                MapArg::Elliptic => HemisphereMap::Elliptic,
            };
        }
        if o.single_step {
            cfg.two_step = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Failure> {
        if self.degrees.is_empty() || self.degrees.iter().any(|&d| d < 2) {
            return Err(Failure::input("degrees must be at least 2"));
        }
        if self.levels.is_empty() || self.levels.iter().any(|&l| l < 1) {
            return Err(Failure::input("levels must be at least 1"));
        }
        if self.schemes.is_empty() {
            return Err(Failure::input("no scheme selected"));
        }
        if !(self.probe_min > 0.0 && self.probe_max > self.probe_min) || self.probe_count < 2 {
            return Err(Failure::input("probe range needs 0 < probe-min < probe-max and at least 2 scales"));
        }
        if !(self.alpha1 > 0.0 && self.alpha1 < 1.0) {
            return Err(Failure::input("alpha1 must lie in (0, 1)"));
        }
        Ok(())
    }

    fn fit_config(&self, scheme: Scheme, degree: usize, level: u32) -> FitConfig {
        let mut fc = FitConfig::new(degree, level, scheme);
        fc.two_step = self.two_step;
        fc.quad_points = self.quad_points;
        fc.map = self.map;
        if scheme == Scheme::Rcc && self.alpha1 != 0.5 {
            fc.corners = hemisphere_corner_constraints(self.alpha1);
        }
        fc
    }
}

struct SweepRow {
    scheme: Scheme,
    degree: usize,
    level: u32,
    result: Result<(f64, f64, f64, f64, usize), String>,
}

fn eoc(prev: f64, cur: f64) -> String {
    if prev > 0.0 && cur > 0.0 {
        format!("{:.6}", (prev / cur).log2())
    } else {
        String::new()
    }
}

pub fn hemisphere(cfg: &ExperimentConfig, out: &Path) -> Result<(), Failure> {
    create_dir(out)?;
    let alphas = log_spaced(cfg.probe_min, cfg.probe_max, cfg.probe_count);
    let mut rows = Vec::new();
    let mut probes = String::from("scheme,degree,level,corner,alpha,angle\n");
    for &scheme in &cfg.schemes {
        for &degree in &cfg.degrees {
            for &level in &cfg.levels {
                let result = cfg.fit_config(scheme, degree, level).run().map_err(|e| e.to_string());
                let result = result.map(|rep| {
                    for corner in Corner::ALL {
                        let values = match hemisphere_normal_probe(&rep.surface, corner, &alphas, cfg.map) {
                            Ok(series) => series.values,
                            Err(_) => vec![f64::NAN; alphas.len()],
                        };
                        for (a, v) in alphas.iter().zip(values) {
                            probes.push_str(&format!("{},{degree},{level},{corner},{},{}\n", scheme.as_str(), csv_float(*a), csv_float(v)));
                        }
                    }
                    (rep.max_error, rep.max_normal_angle.unwrap_or(f64::NAN), rep.l2_residual, rep.constraint_residual, rep.dropped_rows)
                });
                rows.push(SweepRow { scheme, degree, level, result });
            }
        }
    }

    let mut table = String::from("scheme,degree,level,max_error,max_normal_angle,eoc_error,eoc_normal,l2_residual,constraint_residual,dropped_rows,status\n");
    let mut failed = 0;
    for (k, row) in rows.iter().enumerate() {
        let prev = k
            .checked_sub(1)
            .map(|p| &rows[p])
            .filter(|p| p.scheme == row.scheme && p.degree == row.degree && p.level + 1 == row.level)
            .and_then(|p| p.result.as_ref().ok());
        let head = format!("{},{},{}", row.scheme.as_str(), row.degree, row.level);
        match &row.result {
            Ok((err, ang, l2, cres, dropped)) => {
                let (e1, e2) = prev.map(|p| (eoc(p.0, *err), eoc(p.1, *ang))).unwrap_or_default();
                table.push_str(&format!("{head},{},{},{e1},{e2},{},{},{dropped},ok\n", csv_float(*err), csv_float(*ang), csv_float(*l2), csv_float(*cres)));
            }
            Err(msg) => {
                failed += 1;
                table.push_str(&format!("{head},nan,nan,,,nan,nan,0,error: {}\n", csv_text(msg)));
            }
        }
    }
    write_file(&out.join("convergence.csv"), &table)?;
    write_file(&out.join("probes.csv"), &probes)?;
    write_file(&out.join("config.json"), &to_json(cfg)?)?;
    print!("{table}");
    if failed > 0 {
        return Err(Failure::Numerical(format!("{failed} sweep rows failed; see convergence.csv")));
    }
    Ok(())
}

pub struct DiagnoseArgs {
    pub surface: PathBuf,
    pub corner: String,
    pub out: PathBuf,
    pub probe_min: f64,
    pub probe_max: f64,
    pub probe_count: usize,
    pub samples: usize,
    pub isophote: String,
    pub plane_normal: Option<String>,
    pub extent: f64,
}

#[derive(Serialize)]
struct CornerDiagnosis {
    corner: Corner,
    analysis: CornerReport,
    normal_probe: Option<ProbeSeries>,
    axis_probe: Option<ProbeSeries>,
    predicted_axis_angle: Option<f64>,
    cross_norm: Option<ProbeSeries>,
    /// `(eps, ∫ |κ₁|² + |κ₂|²)` for shrinking cutoffs.
    curvature_p2: Option<Vec<(f64, f64)>>,
    curvature_p3: Option<Vec<(f64, f64)>>,
    injectivity_plane: Option<ProjectionPlane>,
    injectivity: Option<InjectivityOutcome>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct DiagnoseReport {
    schema_version: u32,
    source: String,
    field_samples: usize,
    singular_samples: usize,
    corners: Vec<CornerDiagnosis>,
}

fn keep<T, E: std::fmt::Display>(what: &str, r: Result<T, E>, warnings: &mut Vec<String>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            warnings.push(format!("{what}: {e}"));
            None
        }
    }
}

pub fn diagnose(a: &DiagnoseArgs) -> Result<(), Failure> {
    let corners = parse_corners(&a.corner)?;
    let light = parse_vec3(&a.isophote, "isophote direction")?;
    let plane_normal = a.plane_normal.as_deref().map(|p| parse_vec3(p, "plane normal")).transpose()?;
    if !(a.probe_min > 0.0 && a.probe_max > a.probe_min) || a.probe_count < 2 {
        return Err(Failure::input("probe range needs 0 < probe-min < probe-max and at least 2 scales"));
    }
    if a.samples < 1 {
        return Err(Failure::input("samples must be positive"));
    }
    let surface = read_surface(&a.surface)?;
    create_dir(&a.out)?;

    let fields = sample_fields(&surface, a.samples, a.samples, light).map_err(Failure::input)?;
    let singular = fields.iter().filter(|f| f.kappa1.is_nan()).count();
    write_file(&a.out.join("fields.csv"), &fields_to_csv(&fields))?;

    let alphas = log_spaced(a.probe_min, a.probe_max, a.probe_count);
    let tol = CornerTolerances::default();
    let mut out = Vec::with_capacity(corners.len());
    for corner in corners {
        let analysis = analyze_corner(&surface, corner, &tol).map_err(|e| Failure::Numerical(format!("corner {corner}: {e}")))?;
        let kind = analysis.classification.kind;
        let mut w = Vec::new();
        let rounded = kind == CornerKind::Rounded;
        let normal_probe = rounded.then(|| keep("normal probe", normal_convergence_probe(&surface, corner, [1.0, 1.0], &alphas), &mut w)).flatten();
        let cross_norm = rounded.then(|| keep("cross-norm probe", cross_norm_asymptotics(&surface, corner, [1.0, 1.0], &alphas), &mut w)).flatten();
        let axis_probe = kind
            .is_antiparallel()
            .then(|| keep("axis probe", axis_normal_probe(&surface, corner, &alphas), &mut w))
            .flatten();
        let predicted = keep("predicted axis angle", predicted_axis_angle(&surface, corner), &mut w).flatten();
        let local = surface.oriented_at(corner);
        let h = local.ku().end().min(local.kv().end());
        let (curvature_p2, curvature_p3) = if rounded {
            (
                keep("curvature p=2", curvature_integral_sequence(&surface, corner, 2.0, 0.25 * h, 6), &mut w),
                keep("curvature p=3", curvature_integral_sequence(&surface, corner, 3.0, 0.25 * h, 6), &mut w),
            )
        } else {
            (None, None)
        };
        let plane = match plane_normal {
            Some(n) => Some(ProjectionPlane::Normal(n)),
            None if analysis.classification.frame.is_some() => Some(ProjectionPlane::LimitTangent),
            None => {
                let d = 1e-3 * h;
                keep("sampled corner normal", normal_vector(&local, d, d), &mut w).map(ProjectionPlane::Normal)
            }
        };
        let injectivity = plane.and_then(|plane| {
            let opts = InjectivityOptions {
                plane,
                extent: a.extent,
                ..Default::default()
            };
            keep("injectivity probe", injectivity_probe(&surface, corner, &opts), &mut w)
        });
        out.push(CornerDiagnosis {
            corner,
            analysis,
            normal_probe,
            axis_probe,
            predicted_axis_angle: predicted,
            cross_norm,
            curvature_p2,
            curvature_p3,
            injectivity_plane: plane,
            injectivity,
            warnings: w,
        });
    }
    let report = DiagnoseReport {
        schema_version: SCHEMA_VERSION,
        source: a.surface.display().to_string(),
        field_samples: fields.len(),
        singular_samples: singular,
        corners: out,
    };
    let json = to_json(&report)?;
    write_file(&a.out.join("report.json"), &json)?;
    Ok(())
}

pub fn repair(model_path: &Path, out: &Path, report_path: Option<&Path>, force: bool, angle: Option<f64>, options: Option<&Path>) -> Result<(), Failure> {
    let text = read_text(model_path)?;
    let model = MultipatchModel::from_json_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", model_path.display())))?;
    let mut opts: DetectOptions = match options {
        Some(p) => read_json(p)?,
        None => DetectOptions::default(),
    };
    if let Some(a) = angle {
        opts.angle = a;
    }
    if !(opts.angle > 0.0) {
        return Err(Failure::input("detection angle must be positive"));
    }
    let (repaired, report) = repair_model(&model, &opts).map_err(|e| match e {
        RepairError::InvalidModel(_) | RepairError::EdgeIncompatibility { .. } => Failure::input(e),
        other => Failure::numerical(other),
    })?;
    emit(report_path, &to_json(&report)?)?;
    if !report.conflicts.is_empty() && !force {
        return Err(Failure::Numerical(format!(
            "{} conflicts remain; model not written (use --force): {}",
            report.conflicts.len(),
            report.conflicts.join("; ")
        )));
    }
    let changed = report.outcomes.iter().any(|o| o.action == CandidateAction::Repaired);
    // untouched models are copied byte for byte
    let body = if changed { to_json(&repaired)? } else { text };
    write_file(out, &body)?;
    if !report.conflicts.is_empty() {
        return Err(Failure::Numerical(format!("{} conflicts remain; model written because of --force", report.conflicts.len())));
    }
    Ok(())
}

fn plane_fixture() -> TensorSurface {
    let k = KnotVector::new(2, vec![0.0, 0.0, 0.0, 0.4, 1.0, 1.0, 1.0]).expect("valid knots");
    let net = (0..4)
        .map(|i| (0..4).map(|j| Vec3::new(i as f64 + 0.1 * j as f64, j as f64 + 0.05 * (i * i) as f64, 0.0)).collect())
        .collect();
    TensorSurface::new(k.clone(), k, net).expect("valid net")
}

#[derive(Serialize)]
struct FixtureManifest {
    schema_version: u32,
    seed: u64,
    files: Vec<String>,
}

pub fn fixtures(out: &Path, seed: u64, random: usize) -> Result<(), Failure> {
    create_dir(out)?;
    let mut files = Vec::new();
    let mut put = |name: String, body: String| -> Result<(), Failure> {
        write_file(&out.join(&name), &body)?;
        files.push(name);
        Ok(())
    };
    for name in FIXTURE_NAMES {
        let s = make_fixture(name).map_err(Failure::numerical)?;
        put(format!("{name}.json"), to_json(&s)?)?;
    }
    put("plane.json".into(), to_json(&plane_fixture())?)?;
    put("two_patch_model.json".into(), to_json(&two_patch_model())?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..random {
        put(format!("random_rounded_{k}.json"), to_json(&random_rounded_net(&mut rng))?)?;
    }
    let manifest = FixtureManifest {
        schema_version: SCHEMA_VERSION,
        seed,
        files,
    };
    let json = to_json(&manifest)?;
    write_file(&out.join("manifest.json"), &json)?;
    print!("{json}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists() {
        assert_eq!(parse_list::<u32>("1..4", "level").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_list::<usize>("2, 3", "degree").unwrap(), vec![2, 3]);
        assert_eq!(parse_list::<u32>("1,3..4", "level").unwrap(), vec![1, 3, 4]);
        assert!(parse_list::<u32>("x", "level").is_err());
        assert!(parse_list::<u32>("", "level").is_err());
    }

    #[test]
    fn vectors_and_corners() {
        assert_eq!(parse_vec3("0, 0,1", "v").unwrap(), Vec3::z());
        assert!(parse_vec3("0,1", "v").is_err());
        assert_eq!(parse_corners("u1v0,u0v1").unwrap(), vec![Corner::U1V0, Corner::U0V1]);
        assert!(parse_corners("middle").is_err());
    }

    #[test]
    fn eoc_of_halving() {
        assert_eq!(eoc(8.0, 1.0), "3.000000");
        assert_eq!(eoc(0.0, 1.0), "");
    }
}
