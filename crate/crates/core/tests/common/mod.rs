#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use alpha_mst::{parse_tsplib, sub_instance, Alpha, Instance, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The six points of the worked example: i, z, q, u, t, l.
pub fn table_points() -> Instance<f64> {
    let s3 = 3f64.sqrt();
    let pts = vec![
        Point::new(0.0, 0.0),
        Point::new(3.0, s3),
        Point::new(1.0, s3),
        Point::new(-1.0, 1.0),
        Point::new(-1.0, -1.0),
        Point::new(2.0, -2.0),
    ];
    Instance::new("table", pts).unwrap()
}

pub const I: usize = 0;
pub const Z: usize = 1;
pub const Q: usize = 2;
pub const U: usize = 3;
pub const T: usize = 4;
pub const L: usize = 5;

/// Uniform points in a 100 x 100 square, rejecting near-duplicates.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, name: String) -> Instance<f64> {
    let mut pts: Vec<Point<f64>> = Vec::with_capacity(n);
    while pts.len() < n {
        let p = Point::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0));
        if pts.iter().all(|q| q.distance(&p) > 1e-3) {
            pts.push(p);
        }
    }
    Instance::new(name, pts).unwrap()
}

/// `count` instances with sizes drawn from `sizes`, reproducible from `seed`.
pub fn random_suite(seed: u64, count: usize, sizes: std::ops::RangeInclusive<usize>) -> Vec<Instance<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let n = rng.gen_range(sizes.clone());
            random_instance(&mut rng, n, format!("rand{seed}-{k}"))
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/tsplib")
}

/// Consecutive 15-point windows of the bundled TSPLIB files: three each of
/// berlin52 and pr107, four of att532.
pub fn tsplib_windows() -> Vec<Instance<f64>> {
    let mut out = Vec::new();
    for (file, windows) in [("berlin52", 3), ("att532", 4), ("pr107", 3)] {
        let text = std::fs::read_to_string(data_dir().join(format!("{file}.tsp"))).unwrap();
        let pts = parse_tsplib::<f64>(&text).unwrap();
        for w in 0..windows {
            let offset = 15 * w;
            let name = format!("{file}-{offset}");
            out.push(sub_instance(name, &pts, offset, 15).unwrap());
        }
    }
    out
}

pub fn approx(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

pub fn pi_frac(a: f64) -> f64 {
    a * PI
}

pub fn alpha(num: u64, den: u64) -> Alpha {
    Alpha::pi_frac(num, den)
}
