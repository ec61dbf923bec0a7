#![allow(dead_code)]

use std::path::Path;

use omnipoint_pipeline::schema::{read_json, write_json, Manifest};
use omnipoint_pipeline::synth::{synth_dataset, Preset, SynthOptions, SynthParams};
use omnipoint_pipeline::{Dataset, PipelineConfig};

pub fn synth(root: &Path, preset: Preset, train: usize, test: usize, seed: u64) -> Dataset {
    synth_with(root, SynthParams::preset(preset), train, test, seed, false)
}

pub fn synth_with(root: &Path, params: SynthParams, train: usize, test: usize, seed: u64, png: bool) -> Dataset {
    let opts = SynthOptions { params, seed, train, test, png };
    synth_dataset(root, &opts, &PipelineConfig::default()).unwrap();
    load(root)
}

pub fn load(root: &Path) -> Dataset {
    Dataset::load(&root.join("manifest.json")).unwrap()
}

/// Rewrites `root/manifest.json` through `f`.
pub fn edit_manifest(root: &Path, f: impl FnOnce(&mut Manifest)) {
    let path = root.join("manifest.json");
    let mut m: Manifest = read_json(&path).unwrap();
    f(&mut m);
    write_json(&path, &m).unwrap();
}

pub fn small_params(preset: Preset) -> SynthParams {
    SynthParams { width: 512, ..SynthParams::preset(preset) }
}
