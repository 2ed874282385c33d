use gradvar_core::gradients::sobel_forward;
use gradvar_core::image::to_grayscale;
use gradvar_core::loss::{fold, gradient_variance, gv_loss, patch_variance, unfold, UnfoldedPatches};
use gradvar_core::model::{pixel_shuffle, pixel_unshuffle};
use gradvar_core::resample::bicubic_resize;
use gradvar_core::{Image, Scalar};
use proptest::prelude::*;

fn image(c: usize, h: usize, w: usize) -> impl Strategy<Value = Image> {
    prop::collection::vec(0.0..1.0 as Scalar, c * h * w)
        .prop_map(move |d| Image::new(c, h, w, d).unwrap())
}

fn close(a: Scalar, b: Scalar, tol: Scalar) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grayscale_is_linear(a in image(3, 6, 5), b in image(3, 6, 5), k in -3.0..3.0 as Scalar) {
        let mut mix = a.clone();
        mix.axpy(k, &b).unwrap();
        let lhs = to_grayscale(&mix).unwrap();
        let mut rhs = to_grayscale(&a).unwrap();
        rhs.axpy(k, &to_grayscale(&b).unwrap()).unwrap();
        for (x, y) in lhs.data().iter().zip(rhs.data()) {
            prop_assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn sobel_is_linear(a in image(1, 7, 6), b in image(1, 7, 6), k in -3.0..3.0 as Scalar) {
        let mut mix = a.clone();
        mix.axpy(k, &b).unwrap();
        let lhs = sobel_forward(&mix).unwrap();
        let (ga, gb) = (sobel_forward(&a).unwrap(), sobel_forward(&b).unwrap());
        for i in 0..a.data().len() {
            prop_assert!(close(lhs.gx.data()[i], ga.gx.data()[i] + k * gb.gx.data()[i], 1e-12));
            prop_assert!(close(lhs.gy.data()[i], ga.gy.data()[i] + k * gb.gy.data()[i], 1e-12));
        }
    }

    #[test]
    fn bicubic_keeps_constants(v in 0.0..1.0 as Scalar, h in 2usize..20, w in 2usize..20, oh in 1usize..40, ow in 1usize..40) {
        let out = bicubic_resize(&Image::filled(3, h, w, v), oh, ow).unwrap();
        prop_assert_eq!((out.height(), out.width()), (oh, ow));
        for x in out.data() {
            prop_assert!((x - v).abs() < 1e-12);
        }
    }

    #[test]
    fn gv_ignores_brightness_shift(a in image(3, 16, 16), b in image(3, 16, 16), t in -0.5..0.5 as Scalar) {
        let base = gv_loss(&a, &b, 8).unwrap().value;
        let shifted = gv_loss(&a.map(|v| v + t), &b, 8).unwrap().value;
        prop_assert!(close(base, shifted, 1e-9));
    }

    #[test]
    fn gv_is_nonnegative_and_zero_on_self(a in image(3, 16, 8), b in image(3, 16, 8)) {
        prop_assert!(gv_loss(&a, &b, 8).unwrap().value >= 0.0);
        prop_assert_eq!(gv_loss(&a, &a, 8).unwrap().value, 0.0);
    }

    #[test]
    fn patch_variance_ignores_order(vals in prop::collection::vec(-5.0..5.0 as Scalar, 16), seed in any::<u64>()) {
        let mut perm = vals.clone();
        let len = perm.len();
        let mut s = seed;
        for i in (1..len).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let a = patch_variance(&UnfoldedPatches::from_columns(4, 1, 1, vals).unwrap()).unwrap();
        let b = patch_variance(&UnfoldedPatches::from_columns(4, 1, 1, perm).unwrap()).unwrap();
        prop_assert!(close(a.values[0], b.values[0], 1e-12));
    }

    #[test]
    fn variance_maps_nonnegative(a in image(1, 16, 24)) {
        let gv = gradient_variance(&a, 8).unwrap();
        prop_assert!(gv.vx.values.iter().chain(&gv.vy.values).all(|&v| v >= 0.0));
    }

    #[test]
    fn fold_inverts_unfold(a in image(1, 12, 8)) {
        prop_assert_eq!(fold(&unfold(&a, 4).unwrap()), a);
    }

    #[test]
    fn pixel_shuffle_is_energy_preserving_bijection(t in image(12, 3, 4)) {
        let img = pixel_shuffle(&t, 2).unwrap();
        prop_assert_eq!(img.shape().channels, 3);
        let e0: Scalar = t.data().iter().map(|v| v * v).sum();
        let e1: Scalar = img.data().iter().map(|v| v * v).sum();
        prop_assert!(close(e0, e1, 1e-12));
        prop_assert_eq!(pixel_unshuffle(&img, 2).unwrap(), t);
    }
}
