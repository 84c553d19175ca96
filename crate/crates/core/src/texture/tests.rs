use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::geometry::{geodesic_distance, intrinsic_mean, MeanSolverParams};
use crate::testutil::rng;

fn field(h: usize, w: usize, f: impl Fn(usize, usize) -> f64) -> ScalarField<f64> {
    ScalarField::new(h, w, (0..h * w).map(|i| f(i / w, i % w)).collect()).unwrap()
}

fn noise(h: usize, w: usize, seed: u64) -> ScalarField<f64> {
    let mut r = rng(seed);
    ScalarField::new(h, w, (0..h * w).map(|_| r.gen::<f64>()).collect()).unwrap()
}

fn params(m: usize, w: usize, ridge: f64) -> TextureFeatureParams<f64> {
    TextureFeatureParams {
        patch_size: m,
        window_size: w,
        ridge: Ridge::Fixed(ridge),
    }
}

fn min_eigenvalue(p: &ManifoldPoint<f64>) -> f64 {
    let n = (p.data().len() as f64).sqrt() as usize;
    let m = nalgebra::DMatrix::from_row_slice(n, n, p.data());
    m.symmetric_eigenvalues().min()
}

#[test]
fn param_validation() {
    assert!(params(5, 13, 0.0).validate().is_ok());
    assert!(params(4, 13, 0.0).validate().is_err());
    assert!(params(1, 13, 0.0).validate().is_err());
    assert!(params(5, 3, 0.0).validate().is_err());
    assert!(params(5, 12, 0.0).validate().is_err());
    assert!(params(5, 13, -1.0).validate().is_err());
    assert_eq!(
        TextureFeatureParams::<f64>::default(),
        TextureFeatureParams {
            patch_size: 5,
            window_size: 13,
            ridge: Ridge::Auto
        }
    );
}

#[test]
fn patch_of_constant_image() {
    let img = ScalarField::filled(8, 8, 0.3);
    assert_eq!(patch_vector(&img, 4, 4, 5), vec![0.3; 25]);
}

#[test]
fn patch_of_ramp_is_row_major() {
    let img = field(10, 10, |r, _| r as f64);
    assert_eq!(
        patch_vector(&img, 5, 5, 3),
        vec![4.0, 4.0, 4.0, 5.0, 5.0, 5.0, 6.0, 6.0, 6.0]
    );
}

#[test]
fn corner_patch_replicates_border() {
    let img = field(4, 4, |r, c| (10 * r + c) as f64);
    assert_eq!(
        patch_vector(&img, 0, 0, 3),
        vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 10.0, 10.0, 11.0]
    );
    assert_eq!(
        patch_vector(&img, 3, 3, 3),
        vec![22.0, 23.0, 23.0, 32.0, 33.0, 33.0, 32.0, 33.0, 33.0]
    );
}

#[test]
fn constant_image_gives_all_ones_plus_ridge() {
    let c: f64 = 0.5;
    let img = ScalarField::filled(9, 9, c);
    let p = local_covariance(&img, 4, 4, 3, 5, 0.01).unwrap();
    for i in 0..9 {
        for j in 0..9 {
            let want: f64 = c * c + if i == j { 0.01 } else { 0.0 };
            assert!((p.data()[i * 9 + j] - want).abs() < 1e-15);
        }
    }
    let mvi = texture_to_mvi(&img, &params(3, 5, 0.01)).unwrap();
    assert!(mvi.pixels().iter().all(|q| q == &p));
}

#[test]
fn matches_brute_force_sum() {
    let img = noise(32, 32, 5);
    let rho = 1e-3;
    let p = local_covariance(&img, 16, 16, 3, 7, rho).unwrap();
    let mut want = [0.0f64; 81];
    for u in 13..=19usize {
        for v in 13..=19usize {
            let mut n = Vec::new();
            for a in u - 1..=u + 1 {
                for b in v - 1..=v + 1 {
                    n.push(img.get(a, b));
                }
            }
            for i in 0..9 {
                for j in 0..9 {
                    want[i * 9 + j] += n[i] * n[j];
                }
            }
        }
    }
    for i in 0..9 {
        for j in 0..9 {
            let w = want[i * 9 + j] / 49.0 + if i == j { rho } else { 0.0 };
            assert!((p.data()[i * 9 + j] - w).abs() <= 1e-15 * w.abs().max(1.0), "({i},{j})");
        }
    }
}

#[test]
fn output_is_spd_with_ridge_floor() {
    let img = field(15, 15, |r, _| (r % 2) as f64);
    let rho = 1e-4;
    let mvi = texture_to_mvi(&img, &params(3, 5, rho)).unwrap();
    assert_eq!((mvi.height(), mvi.width()), (15, 15));
    assert_eq!(mvi.kind(), ManifoldKind::Spd(9));
    for p in mvi.pixels() {
        assert!(min_eigenvalue(p) >= rho * (1.0 - 1e-6));
        let d = p.data();
        for i in 0..9 {
            for j in 0..9 {
                assert!((d[i * 9 + j] - d[j * 9 + i]).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn auto_ridge_is_relative_to_mean_diagonal() {
    let img = ScalarField::filled(7, 7, 2.0);
    let p: TextureFeatureParams<f64> = TextureFeatureParams {
        patch_size: 3,
        window_size: 5,
        ridge: Ridge::Auto,
    };
    assert!((resolve_ridge(&img, &p).unwrap() - 4e-6f64).abs() < 1e-18);
    let zero = ScalarField::filled(7, 7, 0.0);
    assert_eq!(resolve_ridge(&zero, &p).unwrap(), 1e-12);
    assert!(texture_to_mvi(&zero, &p).is_ok());
}

#[test]
fn small_image_is_rejected() {
    let img = ScalarField::filled(12, 20, 1.0);
    assert!(texture_to_mvi(&img, &TextureFeatureParams::default()).is_err());
    assert!(local_covariance(&img, 12, 0, 3, 5, 0.0).is_err());
}

#[test]
fn stripe_textures_separate() {
    let mut r = rng(3);
    let (h, w) = (32, 48);
    let img = field(h, w, |row, col| {
        let s = if col < w / 2 { row } else { col };
        if (s / 2) % 2 == 0 {
            0.8
        } else {
            0.2
        }
    });
    let img = ScalarField::new(h, w, img.values().iter().map(|v| v + 0.05 * r.gen::<f64>()).collect()).unwrap();
    let mvi = texture_to_mvi(&img, &params(3, 7, 0.0)).unwrap();
    let half = |left: bool| -> Vec<ManifoldPoint<f64>> {
        (4..h - 4)
            .flat_map(|row| {
                let cols = if left { 4..w / 2 - 4 } else { w / 2 + 4..w - 4 };
                cols.map(move |c| (row, c))
            })
            .map(|(row, c)| mvi.get(row, c).clone())
            .collect()
    };
    let (left, right) = (half(true), half(false));
    let mp = MeanSolverParams {
        tolerance: 1e-8,
        max_iters: 200,
    };
    let (ml, mr) = (
        intrinsic_mean(&left, &mp).unwrap(),
        intrinsic_mean(&right, &mp).unwrap(),
    );
    let spread = |pts: &[ManifoldPoint<f64>], m: &ManifoldPoint<f64>| {
        pts.iter().map(|p| geodesic_distance(p, m).unwrap()).sum::<f64>() / pts.len() as f64
    };
    let within = (spread(&left, &ml) + spread(&right, &mr)) / 2.0;
    let between = geodesic_distance(&ml, &mr).unwrap();
    assert!(between > 5.0 * within, "between {between}, within {within}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn intensity_scaling_scales_by_square(seed in 0u64..1000, s in 0.1f64..10.0) {
        let img = noise(12, 12, seed).map(|v| v + 0.1);
        let a = second_moment(&img, 5, 6, 3, 5);
        let b = second_moment(&img.map(|v| v * s), 5, 6, 3, 5);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((y - s * s * x).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn shift_equivariance(seed in 0u64..1000, dr in 0usize..4, dc in 0usize..4) {
        let big = noise(24, 24, seed);
        let shifted = field(20, 20, |r, c| big.get(r + dr, c + dc));
        let a = texture_to_mvi(&big, &params(3, 5, 1e-6)).unwrap();
        let b = texture_to_mvi(&shifted, &params(3, 5, 1e-6)).unwrap();
        // Skip the band where padding differs.
        for r in 3..16 {
            for c in 3..16 {
                prop_assert_eq!(a.get(r + dr, c + dc), b.get(r, c));
            }
        }
    }

    #[test]
    fn every_pixel_is_spd(seed in 0u64..1000) {
        let img = noise(9, 9, seed);
        let mvi = texture_to_mvi(&img, &params(3, 5, 1e-3)).unwrap();
        for p in mvi.pixels() {
            prop_assert!(p.validate().is_ok());
            prop_assert!(min_eigenvalue(p) >= 1e-3 * (1.0 - 1e-9));
        }
    }
}
