//! Deterministic inputs for the criterion benches.

use seqpack_core::benchmark::BenchmarkSpec;
use seqpack_core::{ConvexPolygon, Point2, Scene};

/// `n` lattice points scattered by a fixed linear congruential walk.
pub fn scattered_points(n: usize) -> Vec<Point2> {
    let mut state: u64 = 0x5eed;
    (0..n)
        .map(|_| {
            state = state
                .wrapping_mul(6_364_136_223_846_793_005)
                .wrapping_add(1_442_695_040_888_963_407);
            let x = (state >> 33) % 1000;
            let y = (state >> 13) % 1000;
            Point2::from_ints(x as i64, y as i64)
        })
        .collect()
}

/// Regular-ish convex polygon with `n` vertices from a scattered point cloud.
pub fn polygon(n: usize) -> ConvexPolygon {
    seqpack_core::convex_hull(&scattered_points(n)).expect("scattered points span an area")
}

/// Seeded random-cuboid scene with `n` objects.
pub fn cuboid_scene(n: usize) -> Scene {
    BenchmarkSpec::default().instance(n, 0)
}
