use serde::{Deserialize, Serialize};

use omnipoint::{AreaUnit, GestureConfig, ScanConfig, Stepping, SvcParams};

use crate::error::PipelineError;

/// Where category frequencies `l = q/S` are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreqScope {
    /// Over every candidate of the training corpus, stored with the model.
    #[default]
    Corpus,
    /// Over the candidates of the image being ranked.
    Image,
}

/// Every tunable of the pipeline. Missing fields in a config file take the
/// defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub step_deg: f64,
    pub fov_deg: f64,
    pub view_size: u32,
    pub num_views: usize,
    pub dedup_iou: f64,
    pub extended_deg: f64,
    pub kp_min: f64,
    pub gt_iou: f64,
    pub stepping: Stepping,
    pub area_unit: AreaUnit,
    pub freq_scope: FreqScope,
    pub person_margin: f64,
    pub person_fov_min_deg: f64,
    pub person_fov_max_deg: f64,
    pub samples_per_edge: usize,
    pub svc_c: f64,
    pub svc_tol: f64,
    pub svc_max_iter: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let scan = ScanConfig::default();
        let gesture = GestureConfig::default();
        let svc = SvcParams::default();
        Self {
            step_deg: scan.step_deg,
            fov_deg: scan.fov_deg,
            view_size: scan.view_size,
            num_views: scan.num_views,
            dedup_iou: scan.dedup_iou,
            extended_deg: gesture.extended_deg,
            kp_min: gesture.kp_min,
            gt_iou: 0.5,
            stepping: scan.stepping,
            area_unit: AreaUnit::Steradian,
            freq_scope: FreqScope::Corpus,
            person_margin: gesture.person_margin,
            person_fov_min_deg: gesture.person_fov_min_deg,
            person_fov_max_deg: gesture.person_fov_max_deg,
            samples_per_edge: scan.samples_per_edge,
            svc_c: svc.c,
            svc_tol: svc.tol,
            svc_max_iter: svc.max_iter,
            seed: svc.seed,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |what: &str| Err(PipelineError::InvalidConfig(what.to_string()));
        if !(self.step_deg > 0.0 && self.step_deg < 360.0) {
            return bad("step_deg must be in (0, 360)");
        }
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            return bad("fov_deg must be in (0, 180)");
        }
        if self.view_size < 2 {
            return bad("view_size must be at least 2");
        }
        if self.num_views == 0 {
            return bad("num_views must be positive");
        }
        if !(self.dedup_iou > 0.0 && self.dedup_iou <= 1.0) {
            return bad("dedup_iou must be in (0, 1]");
        }
        if !(0.0..=180.0).contains(&self.extended_deg) {
            return bad("extended_deg must be in [0, 180]");
        }
        if !(0.0..=1.0).contains(&self.kp_min) {
            return bad("kp_min must be in [0, 1]");
        }
        if !(self.gt_iou > 0.0 && self.gt_iou <= 1.0) {
            return bad("gt_iou must be in (0, 1]");
        }
        if !(self.person_margin > 0.0) {
            return bad("person_margin must be positive");
        }
        if !(self.person_fov_min_deg > 0.0
            && self.person_fov_min_deg <= self.person_fov_max_deg
            && self.person_fov_max_deg < 180.0)
        {
            return bad("person fov bounds must satisfy 0 < min <= max < 180");
        }
        if self.samples_per_edge == 0 {
            return bad("samples_per_edge must be positive");
        }
        if !(self.svc_c > 0.0 && self.svc_c.is_finite()) {
            return bad("svc_c must be positive");
        }
        if !(self.svc_tol > 0.0) {
            return bad("svc_tol must be positive");
        }
        Ok(())
    }

    pub fn scan(&self) -> ScanConfig {
        ScanConfig {
            step_deg: self.step_deg,
            fov_deg: self.fov_deg,
            view_size: self.view_size,
            num_views: self.num_views,
            stepping: self.stepping,
            dedup_iou: self.dedup_iou,
            samples_per_edge: self.samples_per_edge,
        }
    }

    pub fn gesture(&self) -> GestureConfig {
        GestureConfig {
            kp_min: self.kp_min,
            extended_deg: self.extended_deg,
            person_margin: self.person_margin,
            person_fov_min_deg: self.person_fov_min_deg,
            person_fov_max_deg: self.person_fov_max_deg,
            view_size: self.view_size,
        }
    }

    pub fn svc(&self) -> SvcParams {
        SvcParams { c: self.svc_c, tol: self.svc_tol, max_iter: self.svc_max_iter, seed: self.seed }
    }
}
