use std::fs;
use std::path::Path;

use kspectral::experiment::{run_experiment, ContourSpec, ExperimentConfig, MatrixSource, PoleSpec, RegionRecipe};
use kspectral::C64;
use serde_json::Value;

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap_or_default().to_string()
}

#[test]
fn experiment_outputs_follow_their_formats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        name: "fmt".into(),
        matrix: MatrixSource::Gallery { name: "grcar".into(), n: 16 },
        regions: vec![RegionRecipe::Cutout, RegionRecipe::ExpLog],
        poles: Some(PoleSpec::Fixed { poles: vec![C64::new(0.0, 0.0), C64::new(0.0, 6.3), C64::new(0.0, -6.3)] }),
        gmres_steps: 6,
        n_theta: 64,
        contour: Some(ContourSpec { region: 0, grid: 24, pad: 0.1 }),
        figure: true,
        output_dir: dir.path().to_path_buf(),
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&cfg).unwrap();
    assert!(report.errors.is_empty(), "{:?}", report.errors);
    let p = |suffix: &str| dir.path().join(format!("fmt_{suffix}"));

    assert_eq!(header(&p("numrange.csv")), "theta,re,im");

    let cert = json(&p("0-cutout_certificate.json"));
    for key in ["K", "region_kind", "hypotheses", "provenance"] {
        assert!(cert.get(key).is_some(), "certificate lacks {key}");
    }
    assert_eq!(cert["region_kind"], "cutout");

    let region = json(&p("1-exp-log_region.json"));
    assert_eq!(region["shape"]["kind"], "exp-image");

    assert_eq!(header(&p("0-cutout_gmres.csv")), "k,actual,bound,K");
    let trace = json(&p("0-cutout_gmres.json"));
    assert_eq!(trace["actual"].as_array().unwrap().len(), 7);

    let fit = json(&p("0-cutout_fit.json"));
    for key in ["degree", "value", "nodes", "iterations"] {
        assert!(fit.get(key).is_some(), "minimax summary lacks {key}");
    }
    assert_eq!(header(&p("0-cutout_fit_coefficients.csv")), "index,re,im");

    assert_eq!(header(&p("contour.csv")), "re,im,value");
    for svg in ["contour.svg", "figure.svg"] {
        let text = fs::read_to_string(p(svg)).unwrap();
        assert!(text.starts_with("<svg") && text.contains("<polyline"), "{svg}");
    }

    let saved = json(&p("report.json"));
    assert_eq!(saved["name"], "fmt");
    assert_eq!(saved["files"].as_array().unwrap().len(), report.files.len());
}

#[test]
fn bundled_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::from_path(&path).unwrap();
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap(), cfg);
        seen += 1;
    }
    assert_eq!(seen, 3);
}
