//! Independent routes to the same block quantities.

mod common;

use chirplab::experiments::riesz_block_value;
use chirplab::multilinear::t_infinity;
use chirplab::scattering::block_transfer;
use chirplab::signal::{build_chirp, fourier_at, fourier_envelope, sample_signal};
use chirplab::spectral::correlation_transform;

#[test]
fn riesz_projection_matches_the_lag_route_near_resonance() {
    let n = 16;
    let spec = build_chirp(n, common::A, common::bump()).unwrap();
    let sig = sample_signal(&spec, 3.0 * common::A, 2.0).unwrap();
    let j0 = 28;
    let k = common::A * j0 as f64 / n as f64;
    for j in [j0 - 2, j0 - 1, j0, j0 + 1, j0 + 2] {
        let b = sig.block(j).unwrap();
        let lag = correlation_transform(&b, k).unwrap();
        let riesz = riesz_block_value(&spec, j, k).unwrap();
        let rec = t_infinity(&[&b, &b], k).unwrap();
        assert!((riesz - lag).norm() <= 1e-4 * lag.norm(), "block {j}: {riesz} vs {lag}");
        assert!((rec - lag).norm() <= 1e-6 * lag.norm(), "block {j}: {rec} vs {lag}");
    }
}

#[test]
fn far_field_block_transforms_follow_the_bump_envelope() {
    for n in [16u64, 36] {
        let spec = build_chirp(n, common::A, common::bump()).unwrap();
        let sig = sample_signal(&spec, 3.0 * common::A, 2.0).unwrap();
        let nf = n as f64;
        let threshold = common::A * (n as f64).sqrt() / 2.0;
        let bump = common::bump();
        let j = (1.5 * nf) as i64;
        let b = sig.block(j).unwrap();
        let mut checked = 0;
        for i in 0..200 {
            let k = 0.5 * common::A + 2.5 * common::A * i as f64 / 199.0;
            let xi = nf * k - common::A * j as f64;
            if xi.abs() < threshold {
                continue;
            }
            let bound = 0.5 * (fourier_envelope(&bump, xi.abs()) + fourier_envelope(&bump, nf * k + common::A * j as f64));
            let v = fourier_at(&b, k).unwrap().norm();
            assert!(v <= bound + 1e-12, "N={n} k={k}: {v:e} above {bound:e}");
            checked += 1;
        }
        assert!(checked > 100);
    }
    // the envelope itself decays faster than any power
    let bump = common::bump();
    let e: Vec<f64> = [25.0, 50.0, 100.0, 200.0].iter().map(|x| fourier_envelope(&bump, *x)).collect();
    let ratios: Vec<f64> = e.windows(2).map(|w| w[1] / w[0]).collect();
    assert!(ratios.windows(2).all(|r| r[1] < r[0]), "{ratios:?}");
}

#[test]
fn block_transfer_offdiagonal_is_the_block_transform_to_first_order() {
    let n = 16;
    let spec = build_chirp(n, common::A, common::bump()).unwrap();
    let sig = sample_signal(&spec, 3.0 * common::A, 2.0).unwrap();
    let k = common::A * 28.0 / n as f64;
    for j in [20, 24, 28, 31] {
        let b = sig.block(j).unwrap();
        let weak = b.scaled(1e-3);
        let g = block_transfer(&weak, j, k).unwrap();
        let t1 = fourier_at(&weak, k).unwrap().conj();
        // G21 = b(+inf) = T1 + T3 + ..., |T3| <= |F|_1^3 / 6
        let bound = weak.l1_norm().powi(3) / 6.0 + 1e-14;
        assert!((g.m[1][0] - t1).norm() <= bound, "block {j}");
        assert!((g.m[0][1] - t1.conj()).norm() <= bound, "block {j}");
    }
}
