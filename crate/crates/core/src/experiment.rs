//! Config-driven experiment runs: build A, the requested regions and their
//! certificates, then GMRES traces, rational Arnoldi bounds, a contour grid
//! of |f − r| and an overview figure, written as JSON/CSV/SVG.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::ScalarFunction;
use crate::gallery;
use crate::geometry::{exp_numrange_log, numerical_radius, numerical_range_boundary, NumericalRangeBoundary};
use crate::kconst::{certify, KCertificate};
use crate::krylov::{gmres_trace, rational_arnoldi_fa, search_poles, BoundTrace, NearOptReport, PoleSearch};
use crate::matrix::random::{real_gaussian_vector, rng};
use crate::matrix::{market, ComplexMatrix, C64};
use crate::minimax::MinimaxResult;
use crate::regions::{ConvexOuter, QuadratureSpec, Region};
use crate::svg::{level_colour, Bounds, Grid, Plot};

/// Relative inflation of every radius or polygon built from a computed
/// matrix quantity, so hypotheses hold strictly despite rounding.
pub const REGION_INFLATION: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MatrixSource {
    Gallery { name: String, n: usize },
    MatrixMarket { path: PathBuf },
}

/// Regions built from A.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RegionRecipe {
    /// Polygon circumscribing W(A).
    Numrange,
    /// Annulus about 0 with R = max(‖A‖, ‖A⁻¹‖).
    AnnulusNorm,
    /// Annulus about 0 with R = max(w(A), w(A⁻¹)).
    AnnulusNumradius,
    /// W(A) with the disk |z| ≤ 1/w(A⁻¹) removed.
    Cutout,
    /// exp(W(log A)).
    ExpLog,
    /// A region given in full.
    Explicit { region: Box<Region> },
}

impl RegionRecipe {
    pub fn name(&self) -> &'static str {
        match self {
            RegionRecipe::Numrange => "numrange",
            RegionRecipe::AnnulusNorm => "annulus-norm",
            RegionRecipe::AnnulusNumradius => "annulus-numradius",
            RegionRecipe::Cutout => "cutout",
            RegionRecipe::ExpLog => "exp-log",
            RegionRecipe::Explicit { .. } => "explicit",
        }
    }
}

/// Either fixed poles or a search for conjugate pairs next to fixed ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PoleSpec {
    Fixed { poles: Vec<C64> },
    Search { fixed: Vec<C64>, pairs: usize, starts: usize, max_iter: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourSpec {
    /// Index into `regions` of the region the fit r is computed on.
    pub region: usize,
    /// Samples per side.
    pub grid: usize,
    /// Padding around the region as a fraction of its larger side.
    pub pad: f64,
}

/// Missing fields take their [`Default`] values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Prefix of every output file.
    pub name: String,
    pub matrix: MatrixSource,
    pub regions: Vec<RegionRecipe>,
    pub function: ScalarFunction,
    /// Rational Arnoldi is skipped when absent.
    pub poles: Option<PoleSpec>,
    /// GMRES steps per region; 0 skips GMRES.
    pub gmres_steps: usize,
    pub seed: u64,
    /// Angles sampled for numerical range boundaries.
    pub n_theta: usize,
    /// Multiplies every quadrature node count.
    pub quadrature_density: usize,
    pub contour: Option<ContourSpec>,
    /// Overview SVG with W(A), the regions and the eigenvalues.
    pub figure: bool,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            matrix: MatrixSource::Gallery { name: "grcar".into(), n: 100 },
            regions: vec![RegionRecipe::Cutout],
            function: ScalarFunction::Inv1mExp,
            poles: None,
            gmres_steps: 0,
            seed: crate::config::DEFAULT_SEED,
            n_theta: 256,
            quadrature_density: 1,
            contour: None,
            figure: false,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidConfig { field: field.into(), reason: reason.into() }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Checks every field; the error names the first offending one.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(invalid("name", "must be a non-empty file-name prefix"));
        }
        match &self.matrix {
            MatrixSource::Gallery { name, n } => {
                if *n == 0 {
                    return Err(invalid("matrix.n", "matrix is empty"));
                }
                if gallery::by_name(name, (*n).min(2)).is_none() {
                    return Err(invalid("matrix.name", format!("unknown gallery matrix `{name}`")));
                }
                if gallery::by_name(name, *n).is_none() {
                    return Err(invalid("matrix.n", format!("n = {n} is too small for `{name}`")));
                }
            }
            MatrixSource::MatrixMarket { path } => {
                if path.as_os_str().is_empty() {
                    return Err(invalid("matrix.path", "path is empty"));
                }
            }
        }
        if self.n_theta < 16 {
            return Err(invalid("n_theta", "need at least 16 angles"));
        }
        if self.quadrature_density == 0 {
            return Err(invalid("quadrature_density", "must be at least 1"));
        }
        if let Some(PoleSpec::Search { starts, .. }) = &self.poles {
            if *starts == 0 {
                return Err(invalid("poles.starts", "need at least one start"));
            }
        }
        if let Some(PoleSpec::Fixed { poles }) = &self.poles {
            if poles.iter().any(|p| p.re.is_nan() || p.im.is_nan()) {
                return Err(invalid("poles.poles", "NaN pole"));
            }
        }
        if (self.gmres_steps > 0 || self.poles.is_some() || self.contour.is_some()) && self.regions.is_empty() {
            return Err(invalid("regions", "bounds need at least one region"));
        }
        if let Some(c) = &self.contour {
            if self.poles.is_none() {
                return Err(invalid("contour", "the contour of |f − r| needs poles"));
            }
            if c.region >= self.regions.len() {
                return Err(invalid("contour.region", format!("index {} out of range", c.region)));
            }
            if c.grid < 2 {
                return Err(invalid("contour.grid", "need at least 2 samples per side"));
            }
            if !(c.pad >= 0.0 && c.pad.is_finite()) {
                return Err(invalid("contour.pad", "must be finite and nonnegative"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixSummary {
    pub n: usize,
    pub norm: f64,
    pub inv_norm: f64,
    pub numradius: f64,
    pub inv_numradius: f64,
    pub eigenvalues: Vec<C64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
    pub hypothesis_failure: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionOutcome {
    pub recipe: String,
    pub certificate: Option<KCertificate>,
    pub gmres: Option<BoundTrace>,
    pub near_opt: Option<NearOptReport>,
    /// Why a bound was not computed on this region, when it was not.
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RationalArnoldiSummary {
    pub poles: Vec<C64>,
    /// ‖f(A)b − f_m‖/‖b‖.
    pub error: f64,
    /// Best error from each search start, when the poles were searched.
    pub start_errors: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub seed: u64,
    pub matrix: MatrixSummary,
    pub regions: Vec<RegionOutcome>,
    pub rational_arnoldi: Option<RationalArnoldiSummary>,
    pub errors: Vec<StageError>,
    /// Written files, relative to the output directory.
    pub files: Vec<String>,
}

impl ExperimentReport {
    pub fn has_hypothesis_failure(&self) -> bool {
        self.errors.iter().any(|e| e.hypothesis_failure)
    }

    pub fn has_other_failure(&self) -> bool {
        self.errors.iter().any(|e| !e.hypothesis_failure)
    }
}

pub fn load_matrix(source: &MatrixSource) -> Result<ComplexMatrix> {
    match source {
        MatrixSource::Gallery { name, n } => gallery::by_name(name, *n)
            .ok_or_else(|| invalid("matrix", format!("unknown gallery matrix `{name}` of order {n}"))),
        MatrixSource::MatrixMarket { path } => market::read_path(path),
    }
}

/// Builds one region from A. Radii and polygons are inflated by
/// [`REGION_INFLATION`] so the hypotheses they come from hold strictly.
pub fn build_region(recipe: &RegionRecipe, a: &ComplexMatrix, n_theta: usize, spec: QuadratureSpec) -> Result<Region> {
    let grow = 1.0 + REGION_INFLATION;
    let polygon = || -> Result<_> {
        let nb = numerical_range_boundary(a, n_theta)?;
        nb.circumscribed_polygon(REGION_INFLATION * a.operator_norm().max(1.0))
    };
    let region = match recipe {
        RegionRecipe::Numrange => Region::convex(polygon()?),
        RegionRecipe::AnnulusNorm => {
            let r = a.operator_norm().max(a.inverse()?.operator_norm());
            Region::annulus(r * grow)?
        }
        RegionRecipe::AnnulusNumradius => {
            let r = numerical_radius(a).max(numerical_radius(&a.inverse()?));
            Region::annulus(r * grow)?
        }
        RegionRecipe::Cutout => {
            let w = numerical_radius(&a.inverse()?);
            Region::cutout(ConvexOuter::Polygon { polygon: polygon()? }, C64::new(0.0, 0.0), 1.0 / (w * grow))?
        }
        RegionRecipe::ExpLog => {
            let curve = exp_numrange_log(a, n_theta)?;
            Region::exp_image(curve.log_boundary.circumscribed_polygon(REGION_INFLATION)?)?
        }
        RegionRecipe::Explicit { region } => (**region).clone(),
    };
    Ok(region.with_spec(region.spec().with_density(spec.density)))
}

struct Outputs<'a> {
    dir: &'a Path,
    prefix: &'a str,
    files: Vec<String>,
}

impl Outputs<'_> {
    fn write(&mut self, suffix: &str, contents: &str) -> Result<()> {
        let file = format!("{}_{suffix}", self.prefix);
        fs::write(self.dir.join(&file), contents)?;
        self.files.push(file);
        Ok(())
    }
}

struct Errors(Vec<StageError>);

impl Errors {
    /// Records a failed stage and returns None, or passes the value through.
    fn keep<T>(&mut self, stage: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                let e = e.in_stage(stage);
                self.0.push(StageError {
                    stage: stage.into(),
                    message: e.to_string(),
                    hypothesis_failure: e.is_hypothesis_failure(),
                });
                None
            }
        }
    }
}

/// Runs every stage of the config. Failures of A itself or of writing
/// outputs abort with a stage error; failures of individual regions and
/// bounds are collected in the report and the run continues.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let a = load_matrix(&config.matrix).map_err(|e| e.in_stage("matrix"))?;
    let n = a.dim();
    let summary = matrix_summary(&a).map_err(|e| e.in_stage("matrix"))?;
    fs::create_dir_all(&config.output_dir).map_err(|e| Error::from(e).in_stage("output"))?;
    let mut out = Outputs { dir: &config.output_dir, prefix: &config.name, files: Vec::new() };
    let mut errors = Errors(Vec::new());
    let spec = QuadratureSpec::default().with_density(config.quadrature_density);
    let b: DVector<C64> = real_gaussian_vector(n, &mut rng(config.seed));

    let nb = numerical_range_boundary(&a, config.n_theta).map_err(|e| e.in_stage("numrange"))?;
    out.write("numrange.csv", &nb.to_csv()).map_err(|e| e.in_stage("output"))?;

    let mut regions: Vec<Option<Region>> = Vec::with_capacity(config.regions.len());
    let mut outcomes = Vec::with_capacity(config.regions.len());
    for (i, recipe) in config.regions.iter().enumerate() {
        let tag = format!("{i}-{}", recipe.name());
        let region = errors.keep(&format!("region {tag}"), build_region(recipe, &a, config.n_theta, spec));
        let certificate = region.as_ref().and_then(|r| errors.keep(&format!("certify {tag}"), certify(&a, r)));
        if let Some(r) = &region {
            out.write(&format!("{tag}_region.json"), &r.to_json()?).map_err(|e| e.in_stage("output"))?;
        }
        if let Some(c) = &certificate {
            out.write(&format!("{tag}_certificate.json"), &c.to_json()?).map_err(|e| e.in_stage("output"))?;
        }
        let mut gmres = None;
        if config.gmres_steps > 0 {
            if let (Some(r), Some(c)) = (&region, &certificate) {
                gmres = errors.keep(&format!("gmres {tag}"), gmres_trace(&a, &b, r, c, config.gmres_steps.min(n)));
                if let Some(trace) = &gmres {
                    out.write(&format!("{tag}_gmres.csv"), &trace.to_csv()).map_err(|e| e.in_stage("output"))?;
                    out.write(&format!("{tag}_gmres.json"), &trace.to_json()?).map_err(|e| e.in_stage("output"))?;
                }
            }
        }
        outcomes.push(RegionOutcome { recipe: recipe.name().into(), certificate, gmres, near_opt: None, note: None });
        regions.push(region);
    }

    let mut rational = None;
    let mut fits: Vec<Option<MinimaxResult>> = vec![None; regions.len()];
    if let Some(pole_spec) = &config.poles {
        let poles = match pole_spec {
            PoleSpec::Fixed { poles } => Some((poles.clone(), None)),
            PoleSpec::Search { fixed, pairs, starts, max_iter } => {
                let search = PoleSearch {
                    fixed: fixed.clone(),
                    pairs: *pairs,
                    starts: *starts,
                    max_iter: *max_iter,
                    seed: config.seed,
                };
                errors
                    .keep("pole search", search_poles(&a, &b, &config.function, &search))
                    .map(|r| (r.poles, Some(r.start_errors)))
            }
        };
        if let Some((poles, start_errors)) = poles {
            if let Some(ra) = errors.keep("rational arnoldi", rational_arnoldi_fa(&a, &b, &poles, &config.function)) {
                for (i, (region, outcome)) in regions.iter().zip(outcomes.iter_mut()).enumerate() {
                    let (Some(r), Some(c)) = (region, &outcome.certificate) else {
                        outcome.note = Some("no certified region".into());
                        continue;
                    };
                    let tag = format!("{i}-{}", outcome.recipe);
                    match crate::krylov::near_opt_from(&a, &poles, &config.function, r, c, &ra) {
                        Ok((report, fit)) => {
                            out.write(&format!("{tag}_fit.json"), &serde_json::to_string_pretty(&fit.summary())?)
                                .map_err(|e| e.in_stage("output"))?;
                            out.write(&format!("{tag}_fit_coefficients.csv"), &fit.coefficients_csv())
                                .map_err(|e| e.in_stage("output"))?;
                            outcome.near_opt = Some(report);
                            fits[i] = Some(fit);
                        }
                        // f or r has a pole in the region: the bound does not apply there.
                        Err(e @ (Error::PoleInRegion { .. } | Error::NonFiniteValue(_))) => {
                            outcome.note = Some(e.to_string())
                        }
                        Err(e) => {
                            errors.keep::<()>(&format!("near-opt {tag}"), Err(e));
                        }
                    }
                }
                rational = Some(RationalArnoldiSummary { poles, error: ra.error, start_errors });
            }
        }
    }

    if let Some(c) = &config.contour {
        match (&regions[c.region], &fits[c.region]) {
            (Some(region), Some(fit)) => {
                let grid = contour_grid(&config.function, fit, region, c.grid, c.pad);
                out.write("contour.csv", &grid.to_csv()).map_err(|e| e.in_stage("output"))?;
                let overlay: Vec<&Region> = regions.iter().flatten().collect();
                out.write("contour.svg", &contour_svg(&grid, &overlay, &summary.eigenvalues))
                    .map_err(|e| e.in_stage("output"))?;
            }
            _ => {
                errors.keep::<()>(
                    "contour",
                    Err(Error::InvalidArgument(format!("region {} has no fitted rational function", c.region))),
                );
            }
        }
    }

    if config.figure {
        // Sample each log-plane chord densely: exp bends it.
        let exp_curve = errors.keep("figure", exp_numrange_log(&a, config.n_theta)).map(|c| {
            let pts = &c.log_boundary.points;
            (0..pts.len())
                .flat_map(|k| {
                    let (p, q) = (pts[k], pts[(k + 1) % pts.len()]);
                    (0..16).map(move |j| (p + (q - p) * (j as f64 / 16.0)).exp())
                })
                .collect::<Vec<C64>>()
        });
        let hole = 1.0 / summary.inv_numradius;
        let overlay: Vec<&Region> = regions.iter().flatten().collect();
        let svg = overview_svg(&nb, hole, &overlay, exp_curve.as_deref(), &summary.eigenvalues);
        out.write("figure.svg", &svg).map_err(|e| e.in_stage("output"))?;
    }

    let mut report = ExperimentReport {
        name: config.name.clone(),
        seed: config.seed,
        matrix: summary,
        regions: outcomes,
        rational_arnoldi: rational,
        errors: errors.0,
        files: Vec::new(),
    };
    out.files.push(format!("{}_report.json", config.name));
    report.files = out.files.clone();
    out.write("report.json", &serde_json::to_string_pretty(&report)?).map_err(|e| e.in_stage("output"))?;
    Ok(report)
}

pub fn matrix_summary(a: &ComplexMatrix) -> Result<MatrixSummary> {
    let inv = a.inverse()?;
    let mut eigenvalues = a.eigenvalues()?;
    eigenvalues.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(MatrixSummary {
        n: a.dim(),
        norm: a.operator_norm(),
        inv_norm: inv.operator_norm(),
        numradius: numerical_radius(a),
        inv_numradius: numerical_radius(&inv),
        eigenvalues,
    })
}

fn region_bounds(region: &Region) -> Option<Bounds> {
    let pts: Vec<C64> = region.sample_boundary(64).into_iter().flatten().collect();
    Bounds::around(&pts)
}

/// |f − r| on a grid×grid rectangle around the region. Points where
/// either side is not finite hold NaN.
pub fn contour_grid(f: &ScalarFunction, fit: &MinimaxResult, region: &Region, grid: usize, pad: f64) -> Grid {
    let bounds = region_bounds(region).expect("regions have boundary points").padded(pad);
    let mut g = Grid { bounds, nx: grid, ny: grid, values: Vec::new() };
    let values = crate::exec::map_indexed(grid * grid, |k| {
        let z = g.point(k % grid, k / grid);
        let v = (f.eval(z) - fit.eval(z)).norm();
        if v.is_finite() {
            v
        } else {
            f64::NAN
        }
    });
    g.values = values;
    g
}

/// Boundary pieces with samples in proportion to length, about 1024 per region.
fn draw_regions(plot: &mut Plot, regions: &[&Region]) {
    for r in regions {
        let total = r.length();
        for (piece, _) in r.pieces() {
            let n = ((1024.0 * piece.length() / total).ceil() as usize).max(1);
            let pts: Vec<C64> = (0..=n).map(|k| piece.point(k as f64 / n as f64)).collect();
            plot.polyline(&pts, "black", 2.0, None);
        }
    }
}

/// Integer log₁₀ levels of |f − r| as coloured isolines, region
/// boundaries on top, eigenvalues as dots.
pub fn contour_svg(grid: &Grid, regions: &[&Region], eigenvalues: &[C64]) -> String {
    let logs = Grid {
        bounds: grid.bounds,
        nx: grid.nx,
        ny: grid.ny,
        values: grid.values.iter().map(|v| if *v > 0.0 { v.log10() } else { f64::NAN }).collect(),
    };
    let finite = logs.values.iter().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, |m, &v| m.min(v)).max(-16.0).ceil() as i32;
    let hi = finite.fold(f64::NEG_INFINITY, |m, &v| m.max(v)).min(4.0).floor() as i32;
    let mut plot = Plot::new(grid.bounds, 640.0);
    let count = (hi - lo + 1).max(1) as usize;
    for (k, level) in (lo..=hi).enumerate() {
        let colour = level_colour(k, count);
        plot.segments(&logs.isoline(level as f64), &colour, 1.0);
    }
    draw_regions(&mut plot, regions);
    plot.dots(eigenvalues, "black");
    let corner = C64::new(grid.bounds.re_min, grid.bounds.im_max);
    plot.label(
        corner + C64::new(0.02 * grid.bounds.width(), -0.04 * grid.bounds.height()),
        &format!("log10 levels {lo}..{hi}"),
    );
    plot.finish()
}

/// W(A) boundary, the circle |z| = hole, region boundaries, the curve
/// exp(∂W(log A)) and the eigenvalues.
pub fn overview_svg(
    numrange: &NumericalRangeBoundary,
    hole: f64,
    regions: &[&Region],
    exp_curve: Option<&[C64]>,
    eigenvalues: &[C64],
) -> String {
    let mut pts = numrange.points.clone();
    pts.extend(exp_curve.unwrap_or(&[]).iter().copied());
    pts.push(C64::new(-hole, -hole));
    pts.push(C64::new(hole, hole));
    let bounds = Bounds::around(&pts).expect("numerical range has points").padded(0.05);
    let mut plot = Plot::new(bounds, 640.0);
    let mut closed = numrange.points.clone();
    if let Some(&first) = closed.first() {
        closed.push(first);
    }
    plot.polyline(&closed, "#1f5fbf", 1.0, None);
    plot.circle(C64::new(0.0, 0.0), hole, "#888888", 1.0);
    draw_regions(&mut plot, regions);
    if let Some(curve) = exp_curve {
        let mut closed = curve.to_vec();
        if let Some(&first) = closed.first() {
            closed.push(first);
        }
        plot.polyline(&closed, "#c03030", 1.0, Some("6,3"));
    }
    plot.crosses(eigenvalues, "black");
    plot.finish()
}
