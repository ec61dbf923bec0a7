use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};

use omnipoint::scan::{build_candidates, horizontal_distance, merge_duplicates, scan_views, DetectionFrame};
use omnipoint::sphere::{great_circle_from_two, wrap_angle, DirectedPointing, GreatCircle, LonLat, SphereDir};
use omnipoint::{Detection, EquirectGrid, PixelRect, ScanConfig, Stepping};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_pointing(rng: &mut impl Rng) -> DirectedPointing {
    loop {
        let a = LonLat::new(rng.random_range(-PI..PI), rng.random_range(-1.5..1.5)).unwrap().to_dir();
        let b = LonLat::new(rng.random_range(-PI..PI), rng.random_range(-1.5..1.5)).unwrap().to_dir();
        if let Ok(c) = great_circle_from_two(a, b) {
            return DirectedPointing::new(c, a).unwrap();
        }
    }
}

#[test]
fn arc_views_sit_on_the_circle_30_degrees_apart() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let cfg = ScanConfig::default();
    for _ in 0..500 {
        let dp = random_pointing(&mut rng);
        let views = scan_views(&dp, &cfg).unwrap();
        assert_eq!(views.len(), 11);
        let centers: Vec<SphereDir> = views.iter().map(|v| v.center().to_dir()).collect();
        // pole-nudged centers leave the circle by design
        let nudged: Vec<bool> = views.iter().map(|v| v.center().lat.abs() > 89.9f64.to_radians() - 1e-9).collect();
        for (c, &nudged) in centers.iter().zip(&nudged) {
            if !nudged {
                assert!(dp.normal().dot(c).abs() < 1e-9);
            }
        }
        for k in 1..centers.len() {
            if !nudged[k] && !nudged[k - 1] {
                assert!((centers[k - 1].angle_to(&centers[k]).to_degrees() - 30.0).abs() < 1e-9);
            }
        }
        assert!((centers[0].angle_to(dp.anchor())).abs() < 1e-9);
    }
}

#[test]
fn longitude_views_step_evenly_in_longitude() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let cfg = ScanConfig { stepping: Stepping::Longitude, ..Default::default() };
    for _ in 0..300 {
        let dp = random_pointing(&mut rng);
        if dp.normal().z().abs() < 1e-3 {
            continue;
        }
        let sign = dp.normal().z().signum();
        let views = scan_views(&dp, &cfg).unwrap();
        for k in 1..views.len() {
            let step = sign * wrap_angle(views[k].center().lon - views[k - 1].center().lon);
            assert!((step.to_degrees() - 30.0).abs() < 1e-7, "step {}", step.to_degrees());
            let on_circle = views[k].center().lat.abs() < 89.9f64.to_radians() - 1e-9;
            if on_circle {
                assert!(dp.normal().dot(&views[k].center().to_dir()).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn meridian_circle_falls_back_to_arc_steps() {
    let anchor = LonLat::from_degrees(20.0, 0.0).unwrap().to_dir();
    let normal = LonLat::from_degrees(110.0, 0.0).unwrap().to_dir();
    let dp = DirectedPointing::new(GreatCircle::new(normal), anchor).unwrap();
    let lon = ScanConfig { stepping: Stepping::Longitude, ..Default::default() };
    let arc = ScanConfig::default();
    assert_eq!(scan_views(&dp, &lon).unwrap(), scan_views(&dp, &arc).unwrap());
}

const CATEGORIES: [&str; 4] = ["cup", "chair", "tv", "book"];

fn random_detections(rng: &mut impl Rng, n: usize) -> Vec<Detection> {
    (0..n)
        .map(|_| {
            let (u, v) = (rng.random_range(0.0..350.0), rng.random_range(0.0..170.0));
            let (w, h) = (rng.random_range(2.0..40.0), rng.random_range(2.0..20.0));
            Detection {
                category: CATEGORIES[rng.random_range(0..CATEGORIES.len())].to_string(),
                bbox: PixelRect::new(u, v, u + w, (v + h).min(180.0)),
                confidence: rng.random_range(0.05..1.0),
                view_index: 0,
            }
        })
        .collect()
}

#[test]
fn merge_is_idempotent_and_keeps_every_category() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let g = EquirectGrid::new(360, 180).unwrap();
    let cfg = ScanConfig::default();
    for _ in 0..200 {
        let n = rng.random_range(1..40);
        let dets = random_detections(&mut rng, n);
        let cands = build_candidates(&dets, DetectionFrame::Equirect(&g), None, &cfg).unwrap();
        assert!(cands.len() <= dets.len());
        let before: BTreeSet<&str> = dets.iter().map(|d| d.category.as_str()).collect();
        let after: BTreeSet<&str> = cands.iter().map(|c| c.category.as_str()).collect();
        assert_eq!(before, after);
        assert!(cands.len() >= before.len());
        assert!(cands.iter().enumerate().all(|(i, c)| c.id == i));
        assert_eq!(merge_duplicates(cands.clone(), cfg.dedup_iou), cands);
        // each survivor is the most confident member of its merge group, so
        // nothing left behind can be more confident while overlapping it
        for c in &cands {
            for d in &dets {
                if d.category == c.category && d.bbox == c.detection.bbox {
                    assert!(d.confidence <= c.confidence);
                }
            }
        }
    }
}

#[test]
fn merge_ignores_input_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(59);
    let g = EquirectGrid::new(360, 180).unwrap();
    let cfg = ScanConfig::default();
    for _ in 0..100 {
        let mut dets = random_detections(&mut rng, 25);
        let a = build_candidates(&dets, DetectionFrame::Equirect(&g), None, &cfg).unwrap();
        dets.reverse();
        let b = build_candidates(&dets, DetectionFrame::Equirect(&g), None, &cfg).unwrap();
        assert_eq!(a, b);
    }
}

proptest! {
    #[test]
    fn horizontal_distance_is_a_folded_metric(a in -10.0f64..10.0, b in -10.0f64..10.0, k in -3i32..3) {
        let d = horizontal_distance(a, b);
        prop_assert!((0.0..=PI).contains(&d));
        prop_assert_eq!(d, horizontal_distance(b, a));
        prop_assert!((horizontal_distance(a + k as f64 * TAU, b) - d).abs() < 1e-9);
    }
}
