//! On-disk JSON formats and their reader/writer.
//!
//! Every file carries `schema_version`. Floats are written in scientific
//! notation with 17 significant digits, which round-trips every `f64`
//! exactly and keeps outputs byte-stable.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{Map, Value};

use omnipoint::{
    Arm, EquirectGrid, FeatureVector, FreqTable, Keypoint, KeypointName, LonLat, LonLatRect, PersonBox,
    PixelRect, Skeleton, SkeletonFrame, SphereDir, Standardizer, SvmModel, ViewSpec,
};
use omnipoint::select::SvmMetadata;
use omnipoint::AreaUnit;

use crate::config::FreqScope;
use crate::error::{PipelineError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Pretty JSON with every float as `{:.16e}`.
struct Sig17<'a>(PrettyFormatter<'a>);

impl Formatter for Sig17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> std::result::Result<Vec<u8>, serde_json::Error> {
    // serde_json would silently write NaN and infinities as null
    value.serialize(&mut finite::Check).map_err(|finite::NonFinite(v)| {
        <serde_json::Error as serde::ser::Error>::custom(format!("non-finite float {v}"))
    })?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig17(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}

pub fn to_json_string<T: Serialize>(value: &T) -> std::result::Result<String, serde_json::Error> {
    Ok(String::from_utf8(to_json_bytes(value)?).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let bytes = to_json_bytes(value).map_err(|source| PipelineError::Json { path: path.into(), source })?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| PipelineError::io(path, e))
}

mod finite {
    use serde::ser::{self, Serialize};

    #[derive(Debug)]
    pub struct NonFinite(pub f64);

    impl std::fmt::Display for NonFinite {
        fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
            write!(f, "non-finite float {}", self.0)
        }
    }

    impl std::error::Error for NonFinite {}

    impl ser::Error for NonFinite {
        fn custom<T: std::fmt::Display>(_: T) -> Self {
            NonFinite(f64::NAN)
        }
    }

    /// Serializer that only looks at floats.
    pub struct Check;

    type R = Result<(), NonFinite>;

    macro_rules! ignore {
        ($($name:ident: $t:ty),*) => {
            $(fn $name(self, _: $t) -> R { Ok(()) })*
        };
    }

    macro_rules! compound {
        ($($tr:ident :: $m:ident),*) => {
            $(impl ser::$tr for &mut Check {
                type Ok = ();
                type Error = NonFinite;
                fn $m<T: ?Sized + Serialize>(&mut self, v: &T) -> R {
                    v.serialize(&mut **self)
                }
                fn end(self) -> R {
                    Ok(())
                }
            })*
        };
    }

    compound!(SerializeSeq::serialize_element, SerializeTuple::serialize_element, SerializeTupleStruct::serialize_field, SerializeTupleVariant::serialize_field);

    impl ser::SerializeMap for &mut Check {
        type Ok = ();
        type Error = NonFinite;
        fn serialize_key<T: ?Sized + Serialize>(&mut self, k: &T) -> R {
            k.serialize(&mut **self)
        }
        fn serialize_value<T: ?Sized + Serialize>(&mut self, v: &T) -> R {
            v.serialize(&mut **self)
        }
        fn end(self) -> R {
            Ok(())
        }
    }

    impl ser::SerializeStruct for &mut Check {
        type Ok = ();
        type Error = NonFinite;
        fn serialize_field<T: ?Sized + Serialize>(&mut self, _: &'static str, v: &T) -> R {
            v.serialize(&mut **self)
        }
        fn end(self) -> R {
            Ok(())
        }
    }

    impl ser::SerializeStructVariant for &mut Check {
        type Ok = ();
        type Error = NonFinite;
        fn serialize_field<T: ?Sized + Serialize>(&mut self, _: &'static str, v: &T) -> R {
            v.serialize(&mut **self)
        }
        fn end(self) -> R {
            Ok(())
        }
    }

    impl ser::Serializer for &mut Check {
        type Ok = ();
        type Error = NonFinite;
        type SerializeSeq = Self;
        type SerializeTuple = Self;
        type SerializeTupleStruct = Self;
        type SerializeTupleVariant = Self;
        type SerializeMap = Self;
        type SerializeStruct = Self;
        type SerializeStructVariant = Self;

        ignore!(serialize_bool: bool, serialize_i8: i8, serialize_i16: i16, serialize_i32: i32, serialize_i64: i64,
            serialize_u8: u8, serialize_u16: u16, serialize_u32: u32, serialize_u64: u64, serialize_char: char,
            serialize_str: &str, serialize_bytes: &[u8], serialize_unit_struct: &'static str);

        fn serialize_f32(self, v: f32) -> R {
            self.serialize_f64(v as f64)
        }
        fn serialize_f64(self, v: f64) -> R {
            if v.is_finite() { Ok(()) } else { Err(NonFinite(v)) }
        }
        fn serialize_none(self) -> R {
            Ok(())
        }
        fn serialize_some<T: ?Sized + Serialize>(self, v: &T) -> R {
            v.serialize(self)
        }
        fn serialize_unit(self) -> R {
            Ok(())
        }
        fn serialize_unit_variant(self, _: &'static str, _: u32, _: &'static str) -> R {
            Ok(())
        }
        fn serialize_newtype_struct<T: ?Sized + Serialize>(self, _: &'static str, v: &T) -> R {
            v.serialize(self)
        }
        fn serialize_newtype_variant<T: ?Sized + Serialize>(self, _: &'static str, _: u32, _: &'static str, v: &T) -> R {
            v.serialize(self)
        }
        fn serialize_seq(self, _: Option<usize>) -> Result<Self, NonFinite> {
            Ok(self)
        }
        fn serialize_tuple(self, _: usize) -> Result<Self, NonFinite> {
            Ok(self)
        }
        fn serialize_tuple_struct(self, _: &'static str, _: usize) -> Result<Self, NonFinite> {
            Ok(self)
        }
        fn serialize_tuple_variant(self, _: &'static str, _: u32, _: &'static str, _: usize) -> Result<Self, NonFinite> {
            Ok(self)
        }
        fn serialize_map(self, _: Option<usize>) -> Result<Self, NonFinite> {
            Ok(self)
        }
        fn serialize_struct(self, _: &'static str, _: usize) -> Result<Self, NonFinite> {
            Ok(self)
        }
        fn serialize_struct_variant(self, _: &'static str, _: u32, _: &'static str, _: usize) -> Result<Self, NonFinite> {
            Ok(self)
        }
    }
}

/// Files that carry a `schema_version`.
pub trait Versioned {
    fn schema_version(&self) -> u32;
}

/// Reads a versioned file. The version is checked before the rest of the
/// document, so files from another schema version get a clear error.
pub fn read_json<T: DeserializeOwned + Versioned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    let json = |source| PipelineError::Json { path: path.into(), source };
    let value: Value = serde_json::from_str(&text).map_err(json)?;
    let found = value.get("schema_version").and_then(Value::as_u64).ok_or_else(|| PipelineError::InvalidFixture {
        path: path.into(),
        message: "missing schema_version".into(),
    })?;
    if found != SCHEMA_VERSION as u64 {
        return Err(PipelineError::SchemaVersion {
            path: path.into(),
            found: u32::try_from(found).unwrap_or(u32::MAX),
            expected: SCHEMA_VERSION,
        });
    }
    T::deserialize(value).map_err(json)
}

macro_rules! versioned {
    ($($t:ty),*) => {
        $(impl Versioned for $t {
            fn schema_version(&self) -> u32 {
                self.schema_version
            }
        })*
    };
}

versioned!(Manifest, PersonFixture, SkeletonFixture, DetectionsFixture, ModelFile, ResultRecord, ViewManifest);

/// Free-form provenance (model names, versions, notes); carried, never read.
pub type Meta = Map<String, Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonFixture {
    pub schema_version: u32,
    pub boxes: Vec<PersonBox>,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub meta: Meta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeypointEntry {
    pub name: KeypointName,
    pub u: f64,
    pub v: f64,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkeletonFixture {
    pub schema_version: u32,
    pub frame: SkeletonFrame,
    pub keypoints: Vec<KeypointEntry>,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub meta: Meta,
}

impl SkeletonFixture {
    pub fn from_skeleton(s: &Skeleton) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            frame: s.frame,
            keypoints: s
                .keypoints
                .iter()
                .map(|(name, k)| KeypointEntry { name: *name, u: k.u, v: k.v, confidence: k.confidence })
                .collect(),
            meta: Meta::new(),
        }
    }

    /// Builds and validates the skeleton; a repeated keypoint name is an error.
    pub fn to_skeleton(&self) -> std::result::Result<Skeleton, String> {
        let mut keypoints = BTreeMap::new();
        for k in &self.keypoints {
            let kp = Keypoint { u: k.u, v: k.v, confidence: k.confidence };
            if keypoints.insert(k.name, kp).is_some() {
                return Err(format!("keypoint {:?} listed twice", k.name));
            }
        }
        let s = Skeleton { keypoints, frame: self.frame };
        s.validate().map_err(|e| e.to_string())?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionEntry {
    pub category: String,
    pub bbox: PixelRect,
    pub confidence: f64,
}

/// Detections of one perspective view (`view_index`, optionally with the
/// view it was rendered from) or of the whole equirect image (`frame`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionsFixture {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub view_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub view: Option<ViewSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<SkeletonFrame>,
    pub detections: Vec<DetectionEntry>,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub meta: Meta,
}

impl DetectionsFixture {
    pub fn check(&self) -> std::result::Result<(), String> {
        match (self.view_index, &self.frame) {
            (Some(_), None) => {}
            (None, Some(SkeletonFrame::Equirect { .. })) if self.view.is_none() => {}
            (None, Some(SkeletonFrame::View { .. })) => {
                return Err("per-view detections must give view_index".into())
            }
            _ => return Err("exactly one of view_index and an equirect frame is required".into()),
        }
        for d in &self.detections {
            if d.bbox.is_degenerate() || !(0.0..=1.0).contains(&d.confidence) || d.category.is_empty() {
                return Err(format!("invalid detection {d:?}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

/// Which skeleton fixture a scene's per-view detections were produced from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    View,
    Equirect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkeletonPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub view: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equirect: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionPaths {
    /// Detector run on the raw equirect image.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equirect: Option<String>,
    /// Per-view fixtures, keyed by the skeleton frame whose pointing circle
    /// placed the views.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub views: BTreeMap<FrameKind, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruth {
    pub category: String,
    pub lonlat_rect: LonLatRect,
}

/// One scene of a dataset manifest. Paths are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneEntry {
    pub id: String,
    pub split: Split,
    pub image: ImageEntry,
    pub person: String,
    #[serde(default)]
    pub skeleton: SkeletonPaths,
    #[serde(default)]
    pub detections: DetectionPaths,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<GroundTruth>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    pub scenes: Vec<SceneEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    Distance,
    Svc,
}

/// Which fixture streams feed the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProjectionMode {
    /// Skeleton keypoints come from the perspective view around the user.
    pub projection_skeleton: bool,
    /// Objects are detected in views along the pointing circle.
    pub projection_detection: bool,
}

impl ProjectionMode {
    /// The three columns of the accuracy table, least projection first.
    pub const TABLE: [ProjectionMode; 3] = [
        ProjectionMode { projection_skeleton: false, projection_detection: false },
        ProjectionMode { projection_skeleton: true, projection_detection: false },
        ProjectionMode { projection_skeleton: true, projection_detection: true },
    ];

    pub fn skeleton_frame(&self) -> FrameKind {
        if self.projection_skeleton {
            FrameKind::View
        } else {
            FrameKind::Equirect
        }
    }

    pub fn label(&self) -> String {
        let mark = |b: bool| if b { "yes" } else { "no" };
        format!("skeleton proj {} / detection proj {}", mark(self.projection_skeleton), mark(self.projection_detection))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mode {
    pub projection_skeleton: bool,
    pub projection_detection: bool,
    pub selector: Selector,
}

impl Mode {
    pub fn new(projection: ProjectionMode, selector: Selector) -> Self {
        Self {
            projection_skeleton: projection.projection_skeleton,
            projection_detection: projection.projection_detection,
            selector,
        }
    }

    pub fn projection(&self) -> ProjectionMode {
        ProjectionMode { projection_skeleton: self.projection_skeleton, projection_detection: self.projection_detection }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelMetadata {
    pub c: f64,
    pub seed: u64,
    pub tol: f64,
    pub training_size: usize,
    pub positives: usize,
    pub iterations: usize,
    pub objective: f64,
    pub projection: ProjectionMode,
    pub area_unit: AreaUnit,
    pub freq_scope: FreqScope,
    pub scenes_used: usize,
    pub scenes_skipped: usize,
    pub features: [String; 5],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u32,
    pub weights: [f64; 5],
    pub bias: f64,
    pub means: [f64; 5],
    pub stds: [f64; 5],
    #[serde(default)]
    pub constant: [bool; 5],
    pub freq_table: FreqTable,
    pub metadata: ModelMetadata,
}

impl ModelFile {
    pub fn to_model(&self) -> SvmModel {
        let m = &self.metadata;
        SvmModel {
            weights: self.weights,
            bias: self.bias,
            standardizer: Standardizer { means: self.means, stds: self.stds, constant: self.constant },
            freq_table: self.freq_table.clone(),
            metadata: SvmMetadata {
                c: m.c,
                seed: m.seed,
                tol: m.tol,
                training_size: m.training_size,
                positives: m.positives,
                iterations: m.iterations,
                objective: m.objective,
            },
        }
    }

    pub fn check(&self) -> std::result::Result<(), String> {
        let finite = self.weights.iter().chain(&self.means).chain(&self.stds).chain([&self.bias]).all(|v| v.is_finite());
        if !finite {
            return Err("non-finite model parameter".into());
        }
        if self.stds.iter().any(|s| !(*s > 0.0)) {
            return Err("standard deviations must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointingRecord {
    pub arm: Arm,
    pub normal: SphereDir,
    pub anchor: SphereDir,
    pub tangent: SphereDir,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    /// 1-based position in the ranking.
    pub rank: usize,
    pub id: usize,
    pub category: String,
    pub confidence: f64,
    pub center: LonLat,
    pub lonlat_rect: LonLatRect,
    pub features: FeatureVector,
    pub score: f64,
    pub source_views: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub scene_id: String,
    pub mode: Mode,
    pub user: LonLat,
    pub pointing: PointingRecord,
    /// Scan views; empty when detections come from the equirect image.
    pub views: Vec<ViewSpec>,
    pub ranking: Vec<RankedCandidate>,
    pub matched_gt: Option<usize>,
}

impl ResultRecord {
    pub fn top1(&self) -> Option<usize> {
        self.ranking.first().map(|c| c.id)
    }

    /// Top-ranked candidate is the ground-truth match.
    pub fn correct(&self) -> bool {
        self.matched_gt.is_some() && self.top1() == self.matched_gt
    }
}

/// Written by `render-views` next to the PNGs it exports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewManifest {
    pub schema_version: u32,
    pub scene_id: String,
    pub stage: String,
    pub grid: EquirectGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pointing: Option<PointingRecord>,
    pub views: Vec<ViewEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewEntry {
    pub view_index: usize,
    pub view: ViewSpec,
    pub file: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Floats {
        a: f64,
        b: Vec<f64>,
        n: u32,
    }

    #[test]
    fn floats_round_trip_with_17_digits() {
        let x = Floats { a: 0.1 + 0.2, b: vec![1.0, -2.5e-300, std::f64::consts::PI, 0.0, -0.0], n: 7 };
        let s = to_json_string(&x).unwrap();
        assert!(s.contains("3.0000000000000004e-1"), "{s}");
        assert!(s.contains("\"n\": 7"));
        let back: Floats = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
        for (a, b) in back.b.iter().zip(&x.b) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn non_finite_floats_are_refused() {
        assert!(to_json_string(&Floats { a: f64::NAN, b: vec![], n: 0 }).is_err());
    }

    #[test]
    fn detection_fixture_shape() {
        let ok: DetectionsFixture = serde_json::from_str(
            r#"{"schema_version": 1, "view_index": 2,
                "detections": [{"category": "cup", "bbox": [1, 2, 30, 40], "confidence": 0.9}]}"#,
        )
        .unwrap();
        ok.check().unwrap();
        assert_eq!(ok.detections[0].bbox, PixelRect::new(1.0, 2.0, 30.0, 40.0));
        let eq: DetectionsFixture = serde_json::from_str(
            r#"{"schema_version": 1, "frame": {"type": "equirect", "grid": {"width": 64, "height": 32}},
                "detections": []}"#,
        )
        .unwrap();
        eq.check().unwrap();
        let neither: DetectionsFixture =
            serde_json::from_str(r#"{"schema_version": 1, "detections": []}"#).unwrap();
        assert!(neither.check().is_err());
    }

    #[test]
    fn skeleton_fixture_round_trip() {
        let frame = SkeletonFrame::Equirect { grid: EquirectGrid::new(64, 32).unwrap() };
        let s = Skeleton::new(frame).with(KeypointName::Head, 3.0, 4.0, 0.5).with(KeypointName::RWrist, 1.0, 2.0, 1.0);
        let f = SkeletonFixture::from_skeleton(&s);
        let text = to_json_string(&f).unwrap();
        assert!(text.contains("\"r_wrist\""));
        let back: SkeletonFixture = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_skeleton().unwrap(), s);
        let mut dup = f.clone();
        dup.keypoints.push(dup.keypoints[0]);
        assert!(dup.to_skeleton().is_err());
    }
}
