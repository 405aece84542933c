use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use kspectral::experiment::{
    build_region, contour_grid, contour_svg, load_matrix, run_experiment, ContourSpec, ExperimentConfig, MatrixSource,
    PoleSpec, RegionRecipe,
};
use kspectral::functions::ScalarFunction;
use kspectral::geometry::{numerical_radius, numerical_range_boundary};
use kspectral::kconst::certify;
use kspectral::krylov::{gmres_trace, near_opt_from, rational_arnoldi_fa, search_poles, PoleSearch};
use kspectral::lemmas::{lemma8_suite, lemma_suite, Lemma};
use kspectral::matrix::random::{real_gaussian_vector, rng};
use kspectral::regions::{QuadratureSpec, Region};
use kspectral::svg::{Bounds, Plot};
use kspectral::{ComplexMatrix, C64};
use num_complex::Complex64;
use serde_json::json;

/// K-spectral sets for matrices: numerical ranges, regions and their
/// constants, GMRES and rational Arnoldi bounds.
///
/// Exit status: 0 on success, 2 when no K-spectral result applies or a
/// checked hypothesis fails, 1 on any other error.
#[derive(Parser)]
#[command(name = "kspectral", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Boundary of W(A): CSV (theta, re, im) and an SVG polyline.
    Numrange(Common),
    /// Build the requested regions and write them as JSON.
    Region(Common),
    /// Certify each requested region as a K-spectral set for A.
    Certify(Common),
    /// GMRES residuals next to K times the constrained polynomial min-max.
    GmresBound(Common),
    /// Rational Arnoldi approximation of f(A)b and its bound on each region.
    Rarnoldi(Common),
    /// Randomized checks of the eigenvalue lemmas (4 to 7) or the Cauchy
    /// transform bound on annuli (8).
    VerifyLemmas(LemmaArgs),
    /// Contour grid of |f − r| around one region.
    Contour(Common),
    /// Run every stage the configuration asks for.
    Experiment(Common),
}

/// Flags mirroring the experiment configuration. With `--config` the file
/// replaces all of them.
#[derive(Args, Clone)]
struct Common {
    /// JSON experiment configuration; overrides every other flag.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Prefix of the output files.
    #[arg(long, default_value = "kspectral")]
    name: String,
    /// Gallery matrix (grcar, smoke).
    #[arg(long, default_value = "grcar")]
    matrix: String,
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Matrix Market file; replaces --matrix and --n.
    #[arg(long)]
    market: Option<PathBuf>,
    /// Region recipe, repeatable: numrange, annulus-norm, annulus-numradius,
    /// cutout, exp-log.
    #[arg(long = "region", value_parser = parse_recipe)]
    regions: Vec<RegionRecipe>,
    /// Region JSON file, repeatable; appended after the recipes.
    #[arg(long = "region-file")]
    region_files: Vec<PathBuf>,
    /// identity, exp, log, inv1mexp, or a JSON function literal.
    #[arg(long, default_value = "inv1mexp", value_parser = parse_function)]
    function: ScalarFunction,
    /// Pole as `re,im`, repeatable. Fixed poles, or the fixed part of a search.
    #[arg(long = "pole", value_parser = parse_complex, allow_hyphen_values = true)]
    poles: Vec<C64>,
    /// Search this many conjugate pole pairs next to the given poles.
    #[arg(long)]
    search_pairs: Option<usize>,
    #[arg(long, default_value_t = 6)]
    starts: usize,
    #[arg(long, default_value_t = 800)]
    max_iter: u64,
    /// GMRES steps per region.
    #[arg(long, default_value_t = 30)]
    gmres_steps: usize,
    #[arg(long, default_value_t = 0x5EED)]
    seed: u64,
    #[arg(long, default_value_t = 256)]
    n_theta: usize,
    #[arg(long, default_value_t = 1)]
    quadrature_density: usize,
    /// Region index the contour fit is computed on.
    #[arg(long)]
    contour_region: Option<usize>,
    #[arg(long, default_value_t = 200)]
    grid: usize,
    #[arg(long, default_value_t = 0.1)]
    pad: f64,
    /// Write the overview figure.
    #[arg(long)]
    figure: bool,
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
}

#[derive(Args)]
struct LemmaArgs {
    /// 4 half-plane, 5 norm, 6 inverse norm, 7 inverse numerical radius,
    /// 8 Cauchy transform on the annulus.
    #[arg(long)]
    lemma: u32,
    /// Random instances (lemmas 4 to 7) or random functions (lemma 8).
    #[arg(long, default_value_t = 1000)]
    instances: usize,
    /// Sample points per function (lemma 8).
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Annulus parameter R (lemma 8).
    #[arg(long, default_value_t = 2.0)]
    radius: f64,
    #[arg(long, default_value_t = 0x5EED)]
    seed: u64,
    /// Write the report here as well as to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_recipe(s: &str) -> Result<RegionRecipe, String> {
    serde_json::from_value(json!({ "kind": s })).map_err(|_| format!("unknown region recipe `{s}`"))
}

fn parse_function(s: &str) -> Result<ScalarFunction, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .or_else(|_| serde_json::from_str(s))
        .map_err(|e| format!("unknown function `{s}`: {e}"))
}

fn parse_complex(s: &str) -> Result<C64, String> {
    let (re, im) = s.split_once(',').unwrap_or((s, "0"));
    let re: f64 = re.trim().parse().map_err(|e| format!("bad real part in `{s}`: {e}"))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("bad imaginary part in `{s}`: {e}"))?;
    Ok(Complex64::new(re, im))
}

impl Common {
    fn to_config(&self) -> anyhow::Result<ExperimentConfig> {
        if let Some(path) = &self.config {
            return ExperimentConfig::from_path(path).with_context(|| format!("reading {}", path.display()));
        }
        let matrix = match &self.market {
            Some(path) => MatrixSource::MatrixMarket { path: path.clone() },
            None => MatrixSource::Gallery { name: self.matrix.clone(), n: self.n },
        };
        let mut regions = self.regions.clone();
        for path in &self.region_files {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            regions.push(RegionRecipe::Explicit { region: Box::new(Region::from_json(&text)?) });
        }
        if regions.is_empty() {
            regions.push(RegionRecipe::Cutout);
        }
        let poles = match self.search_pairs {
            Some(pairs) => Some(PoleSpec::Search {
                fixed: self.poles.clone(),
                pairs,
                starts: self.starts,
                max_iter: self.max_iter,
            }),
            None if !self.poles.is_empty() => Some(PoleSpec::Fixed { poles: self.poles.clone() }),
            None => None,
        };
        let contour = self.contour_region.map(|region| ContourSpec { region, grid: self.grid, pad: self.pad });
        let cfg = ExperimentConfig {
            name: self.name.clone(),
            matrix,
            regions,
            function: self.function.clone(),
            poles,
            gmres_steps: self.gmres_steps,
            seed: self.seed,
            n_theta: self.n_theta,
            quadrature_density: self.quadrature_density,
            contour,
            figure: self.figure,
            output_dir: self.output_dir.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

struct Run {
    cfg: ExperimentConfig,
    a: ComplexMatrix,
}

impl Run {
    fn new(common: &Common) -> anyhow::Result<Run> {
        let cfg = common.to_config()?;
        let a = load_matrix(&cfg.matrix)?;
        fs::create_dir_all(&cfg.output_dir).with_context(|| format!("creating {}", cfg.output_dir.display()))?;
        Ok(Run { cfg, a })
    }

    fn write(&self, suffix: &str, contents: &str) -> anyhow::Result<PathBuf> {
        let path = self.cfg.output_dir.join(format!("{}_{suffix}", self.cfg.name));
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    fn regions(&self) -> anyhow::Result<Vec<(String, Region)>> {
        let spec = QuadratureSpec::default().with_density(self.cfg.quadrature_density);
        self.cfg
            .regions
            .iter()
            .enumerate()
            .map(|(i, recipe)| {
                let region = build_region(recipe, &self.a, self.cfg.n_theta, spec)
                    .with_context(|| format!("building region {i} ({})", recipe.name()))?;
                Ok((format!("{i}-{}", recipe.name()), region))
            })
            .collect()
    }

    fn b(&self) -> nalgebra::DVector<C64> {
        real_gaussian_vector(self.a.dim(), &mut rng(self.cfg.seed))
    }

    fn poles(&self) -> anyhow::Result<Vec<C64>> {
        match &self.cfg.poles {
            Some(PoleSpec::Fixed { poles }) => Ok(poles.clone()),
            Some(PoleSpec::Search { fixed, pairs, starts, max_iter }) => {
                let spec = PoleSearch {
                    fixed: fixed.clone(),
                    pairs: *pairs,
                    starts: *starts,
                    max_iter: *max_iter,
                    seed: self.cfg.seed,
                };
                Ok(search_poles(&self.a, &self.b(), &self.cfg.function, &spec)?.poles)
            }
            None => bail!("no poles given: use --pole and/or --search-pairs"),
        }
    }
}

fn print_json(value: &serde_json::Value) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn numrange(common: &Common) -> anyhow::Result<()> {
    let run = Run::new(common)?;
    let nb = numerical_range_boundary(&run.a, run.cfg.n_theta)?;
    run.write("numrange.csv", &nb.to_csv())?;
    let bounds = Bounds::around(&nb.points).context("empty boundary")?.padded(0.05);
    let mut plot = Plot::new(bounds, 640.0);
    let mut closed = nb.points.clone();
    closed.push(nb.points[0]);
    plot.polyline(&closed, "#1f5fbf", 1.0, None);
    plot.crosses(&run.a.eigenvalues()?, "black");
    run.write("numrange.svg", &plot.finish())?;
    print_json(&json!({
        "numerical_radius": numerical_radius(&run.a),
        "points": nb.len(),
        "output_dir": run.cfg.output_dir,
    }))
}

fn region(common: &Common) -> anyhow::Result<()> {
    let run = Run::new(common)?;
    let mut written = Vec::new();
    for (tag, region) in run.regions()? {
        written.push(run.write(&format!("{tag}_region.json"), &region.to_json()?)?);
    }
    print_json(&json!(written))
}

fn certify_cmd(common: &Common) -> anyhow::Result<()> {
    let run = Run::new(common)?;
    let mut certs = Vec::new();
    let mut failure = None;
    for (tag, region) in run.regions()? {
        match certify(&run.a, &region) {
            Ok(cert) => {
                run.write(&format!("{tag}_certificate.json"), &cert.to_json()?)?;
                certs.push(json!({ "region": tag, "certificate": cert }));
            }
            Err(e) => {
                certs.push(json!({ "region": tag, "error": e.to_string() }));
                failure.get_or_insert(e);
            }
        }
    }
    print_json(&json!(certs))?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn gmres_cmd(common: &Common) -> anyhow::Result<()> {
    let run = Run::new(common)?;
    let b = run.b();
    let steps = run.cfg.gmres_steps.min(run.a.dim());
    let mut summary = Vec::new();
    for (tag, region) in run.regions()? {
        let cert = certify(&run.a, &region)?;
        let trace = gmres_trace(&run.a, &b, &region, &cert, steps)?;
        run.write(&format!("{tag}_gmres.csv"), &trace.to_csv())?;
        run.write(&format!("{tag}_gmres.json"), &trace.to_json()?)?;
        let violations = trace.violations(1.0);
        summary.push(json!({ "region": tag, "K": cert.k, "violations": violations }));
        if !violations.is_empty() {
            print_json(&json!(summary))?;
            bail!("bound below the GMRES residual on {tag} at steps {violations:?}");
        }
    }
    print_json(&json!(summary))
}

fn rarnoldi(common: &Common) -> anyhow::Result<()> {
    let run = Run::new(common)?;
    let poles = run.poles()?;
    let ra = rational_arnoldi_fa(&run.a, &run.b(), &poles, &run.cfg.function)?;
    let mut reports = Vec::new();
    for (tag, region) in run.regions()? {
        let cert = certify(&run.a, &region)?;
        let (report, fit) = near_opt_from(&run.a, &poles, &run.cfg.function, &region, &cert, &ra)?;
        run.write(&format!("{tag}_fit.json"), &serde_json::to_string_pretty(&fit.summary())?)?;
        run.write(&format!("{tag}_fit_coefficients.csv"), &fit.coefficients_csv())?;
        reports.push(json!({ "region": tag, "report": report }));
    }
    let out = json!({ "poles": poles, "error": ra.error, "regions": reports });
    run.write("rarnoldi.json", &serde_json::to_string_pretty(&out)?)?;
    print_json(&out)
}

fn contour(common: &Common) -> anyhow::Result<()> {
    let run = Run::new(common)?;
    let index = run.cfg.contour.as_ref().map_or(0, |c| c.region);
    let (grid_n, pad) = run.cfg.contour.as_ref().map_or((common.grid, common.pad), |c| (c.grid, c.pad));
    let regions = run.regions()?;
    let (tag, region) = regions.get(index).with_context(|| format!("no region with index {index}"))?;
    let poles = run.poles()?;
    let ra = rational_arnoldi_fa(&run.a, &run.b(), &poles, &run.cfg.function)?;
    let cert = certify(&run.a, region)?;
    let (_, fit) = near_opt_from(&run.a, &poles, &run.cfg.function, region, &cert, &ra)?;
    let grid = contour_grid(&run.cfg.function, &fit, region, grid_n, pad);
    run.write("contour.csv", &grid.to_csv())?;
    let overlay: Vec<&Region> = regions.iter().map(|(_, r)| r).collect();
    run.write("contour.svg", &contour_svg(&grid, &overlay, &run.a.eigenvalues()?))?;
    print_json(&json!({ "region": tag, "fit": fit.summary(), "grid": grid_n }))
}

fn experiment(common: &Common) -> anyhow::Result<()> {
    let cfg = common.to_config()?;
    let report = run_experiment(&cfg)?;
    print_json(&json!({ "files": report.files, "errors": report.errors }))?;
    if let Some(e) = report.errors.iter().find(|e| !e.hypothesis_failure) {
        bail!("stage `{}` failed: {}", e.stage, e.message);
    }
    if let Some(e) = report.errors.first() {
        return Err(kspectral::Error::HypothesisViolated(format!("stage `{}`: {}", e.stage, e.message)).into());
    }
    Ok(())
}

fn verify_lemmas(args: &LemmaArgs) -> anyhow::Result<()> {
    let report = if args.lemma == 8 {
        lemma8_suite(args.radius, args.instances, args.samples, args.seed)?
    } else {
        let outcome = lemma_suite(Lemma::from_id(args.lemma)?, args.instances, args.seed)?;
        outcome.report
    };
    let text = serde_json::to_string_pretty(&report)?;
    if let Some(path) = &args.out {
        write_file(path, &text)?;
    }
    println!("{text}");
    if !report.passed() {
        return Err(kspectral::Error::HypothesisViolated(format!(
            "lemma {} fails: minimum margin {:e}",
            report.lemma, report.min_margin
        ))
        .into());
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<kspectral::Error>() {
        Some(e) if e.is_hypothesis_failure() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Numrange(c) => numrange(c),
        Command::Region(c) => region(c),
        Command::Certify(c) => certify_cmd(c),
        Command::GmresBound(c) => gmres_cmd(c),
        Command::Rarnoldi(c) => rarnoldi(c),
        Command::VerifyLemmas(a) => verify_lemmas(a),
        Command::Contour(c) => contour(c),
        Command::Experiment(c) => experiment(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
