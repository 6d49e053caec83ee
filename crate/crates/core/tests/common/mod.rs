#![allow(dead_code)]

use moondisp_core::engine::{replay, LoggedSession, Response, SessionConfig, SessionHeader, SimulatedObserver};
use moondisp_core::render::{CameraRig, CueObject, MoonDisc, MoonDisparity, SkyPlane, StereoScene, WorldRect};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn scene_rig() -> CameraRig {
    CameraRig {
        focal_px: 300.0,
        width_px: 256,
        height_px: 200,
        ..CameraRig::default()
    }
}

/// Textured sky, a moon in the upper half and up to three cues in separate
/// columns of the lower half. Nothing overlaps and nothing leaves the frame,
/// so every mask is complete in both eyes.
pub fn random_scene(seed: u64, moon_disparity_deg: f64) -> StereoScene {
    let rig = scene_rig();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sky_distance = rng.random_range(40.0..200.0);
    let (f, cx, cy) = (rig.focal_px, rig.width_px as f64 / 2.0, rig.height_px as f64 / 2.0);

    let n_cues = rng.random_range(1..=3);
    let mut slots = [0usize, 1, 2];
    slots.shuffle(&mut rng);
    let slot = rig.width_px as f64 / 3.0;
    let mut cues = Vec::new();
    for &k in &slots[..n_cues] {
        let z: f64 = rng.random_range(3.0..sky_distance);
        // columns, in pixels of the midpoint view; margins absorb the shift
        let lo = k as f64 * slot + 8.0;
        let hi = (k + 1) as f64 * slot - 8.0;
        let u0 = rng.random_range(lo..hi - 12.0);
        let u1 = rng.random_range(u0 + 6.0..hi);
        let v0 = rng.random_range(cy + 6.0..cy + 60.0);
        let v1 = rng.random_range(v0 + 6.0..rig.height_px as f64 - 4.0);
        let world = |u: f64, c: f64| (u - c) * z / f;
        cues.push(CueObject {
            rect: WorldRect {
                x_min: world(u0, cx),
                x_max: world(u1, cx),
                y_min: world(v0, cy),
                y_max: world(v1, cy),
            },
            distance_m: z,
            color: [
                rng.random_range(0..60),
                rng.random_range(100..255),
                rng.random_range(0..60),
            ],
        });
    }

    StereoScene {
        sky: SkyPlane {
            distance_m: sky_distance,
            color: [20, 30, 80],
            texture_seed: Some(rng.random()),
        },
        moon: MoonDisc {
            angular_diameter_deg: rng.random_range(1.0..6.0),
            azimuth_deg: rng.random_range(-10.0..10.0),
            elevation_deg: rng.random_range(8.0..12.0),
            disparity: MoonDisparity::OverrideDeg(moon_disparity_deg),
            luminance: 0.95,
            distance_m: 3.844e8,
        },
        cues,
    }
}

pub fn header(config: SessionConfig) -> SessionHeader {
    SessionHeader {
        session_id: "fixture".into(),
        created_at: "2024-01-01T00:00:00Z".into(),
        config,
    }
}

/// Run a logged staircase to completion and return the log bytes.
pub fn logged_run(true_m: f64, sigma: f64, seed: u64) -> Vec<u8> {
    let config = SessionConfig {
        rng_seed: seed,
        ..SessionConfig::staircase(1.5)
    };
    let mut session = LoggedSession::create(header(config), Vec::new()).unwrap();
    let mut observer = SimulatedObserver::new(true_m, sigma, seed).unwrap();
    while !session.state().is_complete() {
        let t = session.next_stimulus().unwrap();
        session
            .record_response(Response::judgment(t.index, observer.judge(t.stimulus_m)))
            .unwrap();
    }
    let (_, _, bytes) = session.into_parts();
    assert!(replay(bytes.as_slice()).is_ok());
    bytes
}
