use henon_core::branch::{minimal_solution, IterOptions};
use henon_core::domain::{ProblemSpec, RadialField, RadialGrid};
use henon_core::kelvin::{beta_for_alpha, kelvin_exponent, kelvin_pull, kelvin_push};
use henon_core::radial::{assemble_radial_operator, RadialEnergy};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exponent_identity(n in 3usize..9, p in 1.01f64..12.0, alpha in 0.0f64..40.0) {
        let back = kelvin_exponent(n, beta_for_alpha(n, p, alpha), p);
        let scale = alpha.abs().max(p * (n as f64 - 2.0)).max(n as f64 + 2.0);
        prop_assert!((back - alpha).abs() <= 4.0 * f64::EPSILON * scale);
    }

    #[test]
    fn kelvin_round_trip(n in 3usize..7, c in prop::collection::vec(-2.0f64..2.0, 4), m in 10usize..200) {
        let g = RadialGrid::new(m);
        let u = RadialField::from_fn(g, |r| c[0] + c[1] * r * r + c[2] * (1.0 - r).powi(3) + c[3] * (3.0 * r).sin());
        let pushed = kelvin_push(&u, n);
        prop_assert_eq!(pushed.values[0], *u.values.last().unwrap());
        let back = kelvin_pull(&pushed);
        for (a, b) in back.values.iter().zip(&u.values) {
            prop_assert!((a - b).abs() <= 1e-13 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn inverse_operator_preserves_sign(n in 1usize..7, m in 5usize..300, seed in prop::collection::vec(0.0f64..1.0, 8)) {
        let g = RadialGrid::new(m);
        let op = assemble_radial_operator(g, n);
        let rhs: Vec<f64> = (0..op.dim()).map(|i| seed[i % seed.len()]).collect();
        let u = op.solve(&rhs).unwrap();
        prop_assert!(u.iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn residual_is_energy_gradient(alpha in 0.0f64..6.0, p in 1.5f64..4.0, lambda in 0.0f64..0.5, k in 0usize..40) {
        let g = RadialGrid::new(40);
        let spec = ProblemSpec::radial(3, alpha, p, lambda);
        let en = RadialEnergy::new(spec, g);
        let v: Vec<f64> = (0..g.unknowns()).map(|i| 0.3 * (1.0 - g.r(i) * g.r(i))).collect();
        let res = en.residual_unknowns(&v);
        let op = assemble_radial_operator(g, 3);
        let e: Vec<f64> = (0..g.unknowns()).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
        // dJ(v)[e] = ⟨res, e⟩ in the weighted inner product
        let d = 1e-6;
        let plus: Vec<f64> = v.iter().zip(&e).map(|(a, b)| a + d * b).collect();
        let minus: Vec<f64> = v.iter().zip(&e).map(|(a, b)| a - d * b).collect();
        let fd = (en.energy_unknowns(&plus) - en.energy_unknowns(&minus)) / (2.0 * d);
        let mut rv = res.clone();
        rv.push(0.0);
        let mut ev = e.clone();
        ev.push(0.0);
        let exact = op.integrate(&rv.iter().zip(&ev).map(|(a, b)| a * b).collect::<Vec<_>>());
        prop_assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn minimal_branch_is_increasing(alpha in 0.0f64..10.0, f1 in 0.01f64..0.5, f2 in 0.01f64..0.5) {
        let (lo, hi) = if f1 < f2 { (f1, f2) } else { (f2, f1) };
        prop_assume!(hi - lo > 1e-3);
        let opts = IterOptions::default();
        let w1 = minimal_solution(&ProblemSpec::radial(3, alpha, 2.0, lo), 200, &opts).unwrap();
        let w2 = minimal_solution(&ProblemSpec::radial(3, alpha, 2.0, hi), 200, &opts).unwrap();
        for (a, b) in w1.field.values().iter().zip(w2.field.values()) {
            prop_assert!(a <= b);
        }
    }
}
