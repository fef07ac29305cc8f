//! Grid-refinement stability of the sampled transforms on one block.

mod common;

use chirplab::multilinear::t_infinity;
use chirplab::signal::{build_chirp, cell_centered_grid, fourier_at, sample_signal, SampledSignal};
use chirplab::Complex64;

const J: i64 = 24;

fn block_at(oversample: f64) -> SampledSignal {
    let spec = build_chirp(16, common::A, common::bump()).unwrap();
    sample_signal(&spec, 3.0 * common::A, oversample).unwrap().block(J).unwrap()
}

fn window() -> Vec<f64> {
    cell_centered_grid(0.5 * common::A, 3.0 * common::A, 24)
}

fn worst_relative(f: impl Fn(&SampledSignal, f64) -> Complex64, coarse: f64) -> f64 {
    let (c, fine) = (block_at(coarse), block_at(2.0 * coarse));
    window()
        .iter()
        .map(|k| {
            let (a, b) = (f(&c, *k), f(&fine, *k));
            (a - b).norm() / b.norm()
        })
        .fold(0.0, f64::max)
}

#[test]
fn transform_is_stable_under_halving_dx() {
    for os in [1.0, 2.0, 4.0] {
        let (c, fine) = (block_at(os), block_at(2.0 * os));
        let values: Vec<(Complex64, Complex64)> =
            window().iter().map(|k| (fourier_at(&c, *k).unwrap(), fourier_at(&fine, *k).unwrap())).collect();
        let peak = values.iter().map(|v| v.1.norm()).fold(0.0, f64::max);
        let worst = values.iter().map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(worst <= 1e-8 * peak, "oversample {os}: change {worst:e} against peak {peak}");
    }
}

#[test]
fn second_order_refines_below_1e8_from_oversample_8() {
    let worst = worst_relative(|s, k| t_infinity(&[s, s], k).unwrap(), 8.0);
    assert!(worst < 1e-8, "{worst:e}");
}

#[test]
fn second_order_refines_below_1e7_from_oversample_4() {
    let worst = worst_relative(|s, k| t_infinity(&[s, s], k).unwrap(), 4.0);
    assert!(worst < 1e-7, "{worst:e}");
}

#[test]
fn refinement_error_shrinks_at_fourth_order() {
    let e2 = worst_relative(|s, k| t_infinity(&[s, s], k).unwrap(), 2.0);
    let e4 = worst_relative(|s, k| t_infinity(&[s, s], k).unwrap(), 4.0);
    assert!(e2 / e4 > 10.0, "{e2:e} -> {e4:e}");
}
