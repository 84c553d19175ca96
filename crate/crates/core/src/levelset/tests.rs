use std::f64::consts::PI;

use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::testutil::rng;

fn circle(cx: f64, cy: f64, r: f64) -> Shape<f64> {
    Shape::Circle { cx, cy, r }
}

fn planar(h: usize, w: usize, angle: f64, offset: f64) -> LevelSetField<f64> {
    let (nx, ny) = (angle.cos(), angle.sin());
    LevelSetField::from_fn(h, w, |r, c| nx * c as f64 + ny * r as f64 - offset).unwrap()
}

#[test]
fn circle_signed_distance() {
    let phi = init_shape(100, 100, &circle(50.0, 50.0, 10.0)).unwrap();
    assert_eq!(phi.get(50, 50), -10.0);
    assert_eq!(phi.get(50, 60), 0.0);
    assert!((phi.get(0, 0) - ((2.0 * 49.0f64.powi(2)).sqrt() - 10.0)).abs() < 2.0);
    assert!((phi.get(0, 0) - (2.0 * 50.0f64.powi(2)).sqrt() + 10.0).abs() < 1e-12);
}

#[test]
fn rect_signed_distance() {
    let phi = init_shape(
        20,
        20,
        &Shape::Rect {
            x0: 5.0,
            y0: 5.0,
            x1: 15.0,
            y1: 11.0,
        },
    )
    .unwrap();
    assert_eq!(phi.get(8, 10), -3.0);
    assert_eq!(phi.get(8, 2), 3.0);
    assert!((phi.get(1, 1) - 32f64.sqrt()).abs() < 1e-12);
}

#[test]
fn degenerate_and_outside_shapes_are_rejected() {
    assert!(init_shape(20, 20, &circle(10.0, 10.0, 0.0)).is_err());
    assert!(init_shape(
        20,
        20,
        &Shape::Rect {
            x0: 5.0,
            y0: 5.0,
            x1: 5.0,
            y1: 9.0
        }
    )
    .is_err());
    assert!(init_shape(20, 20, &circle(10.0, 10.0, 12.0)).is_err());
    assert!(LevelSetField::new(1, 2, vec![0.0, f64::NAN]).is_err());
}

#[test]
fn shape_parsing() {
    assert_eq!("circle:1,2,3".parse::<Shape<f64>>().unwrap(), circle(1.0, 2.0, 3.0));
    assert_eq!(
        "rect:0,1,2,3".parse::<Shape<f64>>().unwrap(),
        Shape::Rect {
            x0: 0.0,
            y0: 1.0,
            x1: 2.0,
            y1: 3.0
        }
    );
    for bad in ["circle:1,2", "square:1,2,3", "circle:1,2,-3", "rect:a,b,c,d", "circle"] {
        assert!(bad.parse::<Shape<f64>>().is_err(), "{bad}");
    }
}

#[test]
fn planar_field_has_zero_curvature() {
    let phi = planar(30, 40, 0.7, 12.0);
    let k = curvature_divergence(&phi);
    assert!(k.values().iter().all(|v| v.abs() < 1e-9));
}

#[test]
fn circle_curvature_is_inverse_radius() {
    for r in [10.0, 20.0] {
        let phi = init_shape(100, 100, &circle(50.0, 50.0, r)).unwrap();
        let k = curvature_divergence(&phi);
        let mut seen = 0;
        for (i, &v) in phi.values().iter().enumerate() {
            if v.abs() < 0.5 {
                seen += 1;
                let rel = (k.values()[i] - 1.0 / r).abs() * r;
                assert!(rel < 0.15, "r={r} pixel {i}: {}", k.values()[i]);
            }
        }
        assert!(seen > 20);
    }
}

#[test]
fn dirac_values() {
    let eps = 1.5;
    assert!((dirac(0.0, eps) - 1.0 / (PI * eps)).abs() < 1e-15);
    assert!((dirac(1.5, eps) - 0.106_103).abs() < 1e-6);
    assert!(dirac(1e6, eps) < 1e-6);
    let phi = LevelSetField::new(1, 3, vec![-1.0, 0.0, 2.0]).unwrap();
    let d = dirac_eps(&phi, &DiracParams { epsilon: eps });
    assert!(d.values().iter().all(|&v| v > 0.0));
    assert!(d.values()[1] > d.values()[0] && d.values()[0] > d.values()[2]);
    assert!(DiracParams { epsilon: 0.0 }.validate().is_err());
}

#[test]
fn dirac_integrates_to_one_across_the_contour() {
    let phi = init_shape(100, 100, &circle(50.0, 50.0, 20.0)).unwrap();
    let d = dirac_eps(&phi, &DiracParams::default());
    for row in [50, 45, 55] {
        let sum: f64 = (0..50).map(|c| d.get(row, c)).sum();
        assert!((sum - 1.0).abs() < 0.1, "row {row}: {sum}");
    }
}

#[test]
fn reinit_keeps_planar_signed_distance() {
    let phi = planar(40, 50, 0.3, 20.0);
    let out = reinitialize(&phi, 10);
    for (a, b) in phi.values().iter().zip(out.values()) {
        assert!((a - b).abs() < 1e-6);
    }
}

#[test]
fn reinit_restores_unit_gradient() {
    let sdf = init_shape(80, 80, &circle(40.0, 40.0, 20.0)).unwrap();
    let steep = sdf.scaled(5.0);
    assert!(unit_gradient_fraction(&steep, 5.0, 0.2) < 0.1);
    let out = reinitialize(&steep, 40);
    let frac = unit_gradient_fraction(&out, 5.0, 0.2);
    assert!(frac >= 0.95, "{frac}");
    let dice = extract_mask(&out).dice(&extract_mask(&sdf));
    assert!(
        dice >= 0.99,
        "{dice} {} {}",
        extract_mask(&out).area(),
        extract_mask(&sdf).area()
    );
    assert!(unit_gradient_fraction(&sdf, 5.0, 0.2) >= 0.95);
}

#[test]
fn reinit_preserves_blob_mask() {
    let mut r = rng(11);
    let blobs: Vec<(f64, f64, f64)> = (0..5)
        .map(|_| (r.gen_range(15.0..50.0), r.gen_range(15.0..50.0), r.gen_range(5.0..10.0)))
        .collect();
    let phi = LevelSetField::from_fn(64, 64, |row, col| {
        let s: f64 = blobs
            .iter()
            .map(|&(cx, cy, s)| (-((col as f64 - cx).powi(2) + (row as f64 - cy).powi(2)) / (2.0 * s * s)).exp())
            .sum();
        0.5 - s
    })
    .unwrap();
    let before = extract_mask(&phi);
    assert!(before.area() > 100);
    let after = extract_mask(&reinitialize(&phi, 10));
    assert!(before.dice(&after) >= 0.99, "{}", before.dice(&after));
}

#[test]
fn mask_of_disc_and_complement() {
    let r = 10.0;
    let phi = init_shape(100, 100, &circle(50.0, 50.0, r)).unwrap();
    let m = extract_mask(&phi);
    assert!((m.area() as f64 - PI * r * r).abs() <= 2.0 * PI * r + 4.0);
    let neg = extract_mask(&phi.negated());
    // Pixels exactly on the circle are outside in both.
    let on = phi.values().iter().filter(|&&v| v == 0.0).count();
    assert_eq!(neg.area() + m.area() + on, 100 * 100);
    assert_eq!(m.complement().area(), 100 * 100 - m.area());
    let pos = LevelSetField::new(2, 2, vec![1.0; 4]).unwrap();
    assert_eq!(extract_mask(&pos).area(), 0);
}

#[test]
fn dice_and_hamming() {
    let a = Mask::from_fn(4, 4, |r, _| r < 2);
    let b = Mask::from_fn(4, 4, |r, _| r < 1);
    assert_eq!(a.hamming(&b), 4);
    assert!((a.dice(&b) - 2.0 * 4.0 / 12.0).abs() < 1e-12);
    assert_eq!(a.dice(&a), 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn reinit_is_idempotent_on_planar_fields(angle in 0.0f64..std::f64::consts::TAU, offset in -10.0f64..10.0) {
        let phi = planar(20, 24, angle, offset);
        let out = reinitialize(&phi, 10);
        for (a, b) in phi.values().iter().zip(out.values()) {
            prop_assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn dirac_is_positive_and_peaks_at_zero(p in -1e3f64..1e3, eps in 0.1f64..5.0) {
        let d = dirac(p, eps);
        prop_assert!(d > 0.0 && d <= dirac(0.0, eps));
    }

    #[test]
    fn negation_complements_mask(vals in prop::collection::vec(-5.0f64..5.0, 12)) {
        let phi = LevelSetField::new(3, 4, vals.clone()).unwrap();
        let m = extract_mask(&phi);
        let n = extract_mask(&phi.negated());
        for (i, &v) in vals.iter().enumerate() {
            prop_assert_eq!(m.data()[i] || n.data()[i], v != 0.0);
        }
    }
}
