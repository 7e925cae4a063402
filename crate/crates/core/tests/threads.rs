//! Transform results must not depend on the rayon pool size: per-column and
//! per-image work uses fixed summation orders, so outputs are bit-identical
//! across thread counts.

use conelab_core::phantoms::{generate_dataset, random_ellipse_scene, render};
use conelab_core::radon::{fbp, radon_forward, AngleSet};

fn with_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn forward_and_fbp_identical_across_thread_counts() {
    let scene = random_ellipse_scene::<f64>(5, 4).unwrap();
    let angles = AngleSet::new(50f64.to_radians(), 31).unwrap();
    let run = || {
        let img = render(&scene, 128, 2).unwrap();
        let sino = radon_forward(&img, &angles, 129).unwrap();
        let rec = fbp(&sino, 128).unwrap();
        (sino, rec)
    };
    let (s1, r1) = with_pool(1, run);
    let (s4, r4) = with_pool(4, run);
    assert_eq!(s1.values(), s4.values());
    assert_eq!(r1.values(), r4.values());
}

#[test]
fn dataset_generation_identical_across_thread_counts() {
    let a = with_pool(1, || generate_dataset::<f64>(9, 6, 64, 5).unwrap());
    let b = with_pool(3, || generate_dataset::<f64>(9, 6, 64, 5).unwrap());
    for (x, y) in a.images.iter().zip(b.images.iter()) {
        assert_eq!(x.values(), y.values());
    }
}
