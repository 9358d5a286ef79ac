use std::path::{Path, PathBuf};

use fiberseg_core::annotation::{read_annotations, region_grow, render_polylines};
use fiberseg_core::ctsim::{degrade as degrade_volume, forward_project, rasterize_attenuation, rasterize_labels, simulate_fbp};
use fiberseg_core::fiber::{
    export_stl, fibers_csv_string, generate_model, label_statistics, model_statistics, read_fibers_csv,
    FiberModel,
};
use fiberseg_core::metrics::evaluate as evaluate_labels;
use fiberseg_core::vesselness::{binarize, connected_components, frangi_multiscale, structure_tensor_orientation};
use fiberseg_core::volume::{read_volume, stem_paths};
use fiberseg_core::{AnyVolume, Error, LabelVolume, Result, Volume};
use serde_json::{json, Value};

use crate::config::PipelineConfig;
use crate::outputs::Outputs;
use crate::StageError;

pub fn generate(cfg: &PipelineConfig, dir: &Path, out: &mut Outputs) -> Result<Value> {
    out.dir(dir)?;
    let m = generate_model(&cfg.model)?;
    let stats = model_statistics(&m);
    out.bytes(&dir.join("fibers.csv"), fibers_csv_string(&m.fibers).as_bytes())?;
    out.bytes(&dir.join("model.stl"), &export_stl(&m, cfg.stl.segments_per_circle)?)?;
    out.json(&dir.join("stats.json"), &stats)?;
    Ok(json!({
        "stage": "generate",
        "fibers": stats.fiber_count,
        "attempts": stats.attempts_used,
        "volume_fraction": stats.volume_fraction,
    }))
}

fn load_model(cfg: &PipelineConfig, fibers: &Path) -> Result<FiberModel> {
    Ok(FiberModel { params: cfg.model, fibers: read_fibers_csv(fibers)?, attempts_used: 0 })
}

pub fn rasterize(cfg: &PipelineConfig, fibers: &Path, dir: &Path, out: &mut Outputs) -> Result<Value> {
    out.dir(dir)?;
    let m = load_model(cfg, fibers)?;
    let grid = cfg.grid()?;
    let r = rasterize_labels(&m, &grid)?;
    let att = rasterize_attenuation(&m, &grid, cfg.rasterize.supersample, cfg.levels)?;
    out.volume(&r.labels, &dir.join("gt"))?;
    out.volume(&att, &dir.join("attenuation"))?;
    Ok(json!({
        "stage": "rasterize",
        "dims": grid.dims(),
        "foreground_voxels": r.labels.foreground_count(),
        "conflicts": r.conflicts,
    }))
}

pub fn degrade(cfg: &PipelineConfig, input: &Path, output: &Path, out: &mut Outputs) -> Result<Value> {
    let v = degrade_volume(&Volume::read(input)?, &cfg.degrade_params())?;
    out.volume(&v, output)?;
    Ok(json!({ "stage": "degrade", "mean": v.mean() }))
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    s.into()
}

pub fn fbp(
    cfg: &PipelineConfig,
    input: &Path,
    output: &Path,
    sinogram_slice: Option<usize>,
    out: &mut Outputs,
) -> Result<Value> {
    let v = Volume::read(input)?;
    if let Some(z) = sinogram_slice {
        let [nx, ny, nz] = v.dims();
        if z >= nz {
            return Err(Error::InvalidParam(format!("sinogram slice {z} outside 0..{nz}")));
        }
        let slice: Vec<f64> = v.data()[z * nx * ny..(z + 1) * nx * ny].iter().map(|&x| x as f64).collect();
        let sino = forward_project(&slice, nx, ny, cfg.fbp.n_angles);
        let stem = with_suffix(output, "sino");
        let (json_path, raw) = stem_paths(&stem);
        out.track(&json_path);
        out.track(&raw);
        sino.write(&stem)?;
    }
    let r = simulate_fbp(&v, cfg.fbp.n_angles)?;
    out.volume(&r, output)?;
    Ok(json!({ "stage": "fbp", "n_angles": cfg.fbp.n_angles }))
}

pub fn annotate(
    cfg: &PipelineConfig,
    annotations: &Path,
    gray: &Path,
    output: &Path,
    threshold: Option<f32>,
    out: &mut Outputs,
) -> Result<Value> {
    let gray = Volume::read(gray)?;
    let chains = read_annotations(annotations)?;
    let seeds = render_polylines(&chains, gray.spec())?;
    let threshold = threshold.or(cfg.annotation.threshold).unwrap_or_else(|| cfg.levels.midpoint());
    let labels = region_grow(&gray, &seeds.seeds, threshold)?;
    out.volume(&labels, output)?;
    Ok(json!({
        "stage": "annotate",
        "chains": chains.len(),
        "seed_conflicts": seeds.conflicts,
        "threshold": threshold,
        "labeled_voxels": labels.foreground_count(),
    }))
}

pub fn segment(cfg: &PipelineConfig, input: &Path, dir: &Path, orientation: bool, out: &mut Outputs) -> Result<Value> {
    out.dir(dir)?;
    let gray = Volume::read(input)?;
    let s = &cfg.segment;
    let v = frangi_multiscale(&gray, &s.scales, &s.vesselness)?;
    let mask = binarize(&v, s.binarization)?;
    let comps = connected_components(&mask)?;
    out.volume(&v, &dir.join("vesselness"))?;
    out.volume(&mask.map(|x| x as u8), &dir.join("mask"))?;
    out.volume(&comps.labels, &dir.join("instances"))?;
    if orientation {
        let o = structure_tensor_orientation(&gray, s.orientation.sigma_g, s.orientation.rho)?;
        let stem = dir.join("orientation");
        for suffix in ["ox", "oy", "oz", "valid"] {
            let (json_path, raw) = stem_paths(&with_suffix(&stem, suffix));
            out.track(&json_path);
            out.track(&raw);
        }
        o.write(&stem)?;
    }
    Ok(json!({
        "stage": "segment",
        "foreground_voxels": mask.foreground_count(),
        "instances": comps.count,
    }))
}

/// Reads a label volume stored as u32 or u8.
fn read_labels(stem: &Path) -> Result<LabelVolume> {
    match read_volume(stem)? {
        AnyVolume::U32(v) => Ok(v),
        AnyVolume::U8(v) => Ok(v.map(u32::from)),
        AnyVolume::F32(_) => Err(Error::WrongDtype {
            path: stem_paths(stem).0,
            expected: "u32 or u8",
            found: "f32".into(),
        }),
    }
}

pub fn evaluate(cfg: &PipelineConfig, truth: &Path, pred: &Path, output: Option<&Path>, out: &mut Outputs) -> Result<Value> {
    let report = evaluate_labels(&read_labels(truth)?, &read_labels(pred)?, cfg.metrics.ignore_background)?;
    if let Some(path) = output {
        out.json(path, &report)?;
    }
    Ok(serde_json::to_value(report).expect("serializable"))
}

pub fn stats(
    cfg: &PipelineConfig,
    fibers: Option<&Path>,
    labels: Option<&Path>,
    output: Option<&Path>,
    out: &mut Outputs,
) -> Result<Value> {
    let value = match (fibers, labels) {
        (Some(f), _) => serde_json::to_value(model_statistics(&load_model(cfg, f)?)),
        (None, Some(l)) => serde_json::to_value(label_statistics(&read_labels(l)?)),
        (None, None) => return Err(Error::InvalidParam("stats needs --fibers or --labels".into())),
    }
    .expect("serializable");
    if let Some(path) = output {
        out.json(path, &value)?;
    }
    Ok(value)
}

pub fn pipeline(cfg: &PipelineConfig, dir: &Path, out: &mut Outputs) -> std::result::Result<Value, StageError> {
    let tag = |stage: &'static str| move |e: Error| (Some(stage), e.to_string());
    generate(cfg, dir, out).map_err(tag("generate"))?;
    rasterize(cfg, &dir.join("fibers.csv"), dir, out).map_err(tag("rasterize"))?;
    degrade(cfg, &dir.join("attenuation"), &dir.join("degraded"), out).map_err(tag("degrade"))?;
    let gray = if cfg.fbp.enabled {
        fbp(cfg, &dir.join("degraded"), &dir.join("reconstructed"), None, out).map_err(tag("fbp"))?;
        dir.join("reconstructed")
    } else {
        dir.join("degraded")
    };
    segment(cfg, &gray, dir, false, out).map_err(tag("segment"))?;
    let metrics_path = dir.join("metrics.json");
    evaluate(cfg, &dir.join("gt"), &dir.join("instances"), Some(&metrics_path), out).map_err(tag("evaluate"))
}
