use curveflow::{analyze_curve, generate, Complex64, CurveSamples, CurveSpec, Shape};
use proptest::prelude::*;

fn perturbed(seed: u64, max_mode: u32, decay: f64) -> CurveSamples {
    let spec =
        CurveSpec::new(Shape::FourierPerturbedCircle { radius: 1.0, seed, max_mode, amplitude_decay: decay }, 128);
    generate(&spec).unwrap()
}

fn moved(c: &CurveSamples, scale: f64, angle: f64, shift: Complex64) -> CurveSamples {
    let rot = Complex64::from_polar(scale, angle);
    CurveSamples::from_complex(c.points().iter().map(|&p| rot * p + shift).collect()).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn functionals_ignore_similarities(
        seed in any::<u64>(),
        max_mode in 3u32..8,
        decay in 0.1f64..0.25,
        scale in 0.2f64..5.0,
        angle in 0.0f64..std::f64::consts::TAU,
        sx in -10.0f64..10.0,
        sy in -10.0f64..10.0,
    ) {
        let c = perturbed(seed, max_mode, decay);
        let a = analyze_curve(&c, 128, 3).unwrap().diagnostics;
        let b = analyze_curve(&moved(&c, scale, angle, Complex64::new(sx, sy)), 128, 3).unwrap().diagnostics;
        prop_assert!(close(a.deficit, b.deficit, 1e-9), "{} {}", a.deficit, b.deficit);
        for (x, y) in a.i_ell.iter().zip(&b.i_ell) {
            prop_assert!(close(*x, *y, 1e-8), "{x} {y}");
        }
        prop_assert!(close(a.thm2_g, b.thm2_g, 1e-8));
        prop_assert!(close(b.length, scale * a.length, 1e-12));
    }

    #[test]
    fn inequalities_hold_on_random_curves(seed in any::<u64>(), max_mode in 3u32..8, decay in 0.1f64..0.25) {
        let report = analyze_curve(&perturbed(seed, max_mode, decay), 128, 3).unwrap();
        prop_assert!(report.checks.deficit_bound && report.checks.product_bound && report.checks.isoperimetric);
        prop_assert!(report.diagnostics.thm1_margin >= -1e-10);
    }

    #[test]
    fn reversed_input_gives_same_diagnostics(seed in any::<u64>(), max_mode in 3u32..6) {
        let c = perturbed(seed, max_mode, 0.15);
        let mut pts = c.points().to_vec();
        pts.reverse();
        let r = analyze_curve(&CurveSamples::from_complex(pts).unwrap(), 128, 2).unwrap();
        let f = analyze_curve(&c, 128, 2).unwrap();
        prop_assert!(r.orientation_reversed && !f.orientation_reversed);
        prop_assert!(close(r.diagnostics.i_ell[1], f.diagnostics.i_ell[1], 1e-8));
    }
}
