//! Benchmark fixtures shared by the criterion targets.

use rmax_core::range::range_compress;
use rmax_core::sim::{synthesize_echo, ClassTable, MotionScene, Scatterer};
use rmax_core::{RadarParams, RangeMap, RawEchoMatrix};

/// A walking target behind the built-in wall.
pub fn walking_echo(duration_s: f64) -> RawEchoMatrix {
    let p = RadarParams::default();
    let mut torso = Scatterer::moving(6.0, -1.0, 1.0);
    torso.micro_amplitude = 0.05;
    torso.micro_freq = 1.8;
    let mut arm = Scatterer::moving(6.1, -1.0, 0.3);
    arm.micro_amplitude = 0.2;
    arm.micro_freq = 0.9;
    let scene = MotionScene {
        scatterers: vec![torso, arm],
        wall: ClassTable::builtin().wall,
        duration_s,
        noise_snr_db: Some(0.0),
        seed: 1,
        class_label: 0,
    };
    synthesize_echo(&scene, &p).expect("fixture scene is valid")
}

pub fn walking_range_map(duration_s: f64) -> RangeMap {
    let echo = walking_echo(duration_s);
    range_compress(&echo, echo.n_freq()).expect("L = N")
}
