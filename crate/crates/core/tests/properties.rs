use approx::assert_relative_eq;
use bsingular_core::modulus::{main_part_terms, omega_terms};
use bsingular_core::*;
use proptest::prelude::*;

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Direct product form of the basis, fine for small `n`.
fn naive_basis(n: u64, k: u64, x: f64) -> f64 {
    binom(n, k) * x.powi(k as i32) * (1.0 - x).powi((n - k) as i32)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn partition_of_unity_and_positivity(n in 1u64..2048, x in 0.0f64..=1.0) {
        let row = basis_row(n, x).unwrap();
        prop_assert!(row.iter().all(|&p| p >= 0.0));
        let s: f64 = row.iter().sum();
        prop_assert!((s - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn pointwise_matches_product_form(n in 1u64..60, k in 0u64..60, x in 0.0f64..=1.0) {
        let k = k.min(n);
        let p = basis(n, k, x).unwrap();
        let q = naive_basis(n, k, x);
        prop_assert!((p - q).abs() <= 1e-13 * q.max(1e-300) || (p - q).abs() <= 1e-300);
    }

    #[test]
    fn linear_reproduction(n in 1u64..1024, a in -10.0f64..10.0, b in -10.0f64..10.0, x in 0.0f64..=1.0) {
        let f = from_fn(move |t| a + b * t);
        let v = bernstein_apply(&f, n, x).unwrap();
        prop_assert!((v - (a + b * x)).abs() <= 1e-10 * (a.abs() + b.abs()));
    }

    #[test]
    fn derivative_matches_finite_difference(n in 2u64..200, x in 0.05f64..0.95) {
        let f = from_fn(|t: f64| (3.0 * t).sin() + t * t);
        let d0 = bernstein_derivative(&f, n, 0, x).unwrap();
        prop_assert!((d0 - bernstein_apply(&f, n, x).unwrap()).abs() <= 1e-13);
        let h = 1e-6;
        let fd = (bernstein_apply(&f, n, x + h).unwrap() - bernstein_apply(&f, n, x - h).unwrap()) / (2.0 * h);
        let d1 = bernstein_derivative(&f, n, 1, x).unwrap();
        prop_assert!((d1 - fd).abs() <= 1e-5 * d1.abs().max(1.0));
    }

    #[test]
    fn geometric_coefficients_do_not_depend_on_n(m in 1usize..5, e in 4u32..10) {
        let a = CombinationScheme::geometric(1 << e, m).unwrap();
        let b = CombinationScheme::geometric(1 << (e + 1), m).unwrap();
        prop_assert_eq!(a.coefficients(), b.coefficients());
        prop_assert_eq!(a.absolute_sum(), b.absolute_sum());
    }
}

#[test]
fn endpoint_interpolation() {
    let f = from_fn(|t: f64| (t + 1.0).ln());
    for n in [1, 7, 100] {
        assert_eq!(bernstein_apply(&f, n, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            bernstein_apply(&f, n, 1.0).unwrap(),
            2f64.ln(),
            epsilon = 1e-15
        );
    }
}

#[test]
fn odd_moments_vanish_at_half() {
    for n in [5, 64, 1000] {
        for j in [1, 3, 5] {
            assert!(central_moment(n, j, 0.5, MomentKind::Signed).unwrap().abs() <= 1e-13);
        }
    }
}

#[test]
fn absolute_moment_gamma_two() {
    // Σ|k − nx|² p = n x(1 − x)
    assert_relative_eq!(
        absolute_index_moment(10, 2.0, 0.3).unwrap(),
        2.1,
        epsilon = 1e-13
    );
}

#[test]
fn solver_is_deterministic_and_exact() {
    for m in 1..=5 {
        let a = CombinationScheme::geometric(32, m).unwrap();
        let b = CombinationScheme::geometric(32, m).unwrap();
        assert_eq!(a.coefficients(), b.coefficients());
        // Closed form C_i = Π_{j≠i} n_i / (n_i − n_j).
        let d = a.degrees();
        for (i, c) in a.coefficients().iter().enumerate() {
            let expected: f64 = (0..m)
                .filter(|&j| j != i)
                .map(|j| d[i] as f64 / (d[i] as f64 - d[j] as f64))
                .product();
            assert_relative_eq!(*c, expected, max_relative = 1e-14);
        }
    }
}

#[test]
fn annihilation_through_order_m() {
    for m in 1..=4 {
        for n in [16u64, 64, 256, 1024] {
            let s = CombinationScheme::geometric(n, m).unwrap();
            for i in 0..=100 {
                let x = i as f64 / 100.0;
                for (k, r) in moment_annihilation(&s, m as u32, x)
                    .unwrap()
                    .iter()
                    .enumerate()
                {
                    assert!(
                        r.abs() <= 1e-10 / n as f64,
                        "m={m} n={n} k={} x={x} r={r}",
                        k + 1
                    );
                }
            }
        }
    }
}

#[test]
fn absolute_sum_constant_in_n() {
    for m in 1..=4 {
        let reference = CombinationScheme::geometric(16, m).unwrap().absolute_sum();
        let mut n = 32;
        while n <= 1024 {
            let s = CombinationScheme::geometric(n, m).unwrap().absolute_sum();
            assert!((s - reference).abs() <= 1e-12);
            n *= 2;
        }
    }
}

#[test]
fn combination_examples() {
    let sq = from_fn(|t| t * t);
    let s = CombinationScheme::new(10, 2, Ladder::Explicit(vec![10, 20])).unwrap();
    assert_relative_eq!(combo_apply(&s, &sq, 0.3).unwrap(), 0.09, epsilon = 1e-14);
    let cube = from_fn(|t: f64| t * t * t);
    let s = CombinationScheme::geometric(16, 2).unwrap();
    let h = 1e-3;
    let p = |x: f64| combo_apply(&s, &cube, x).unwrap();
    let fd = (p(0.5 + 1.5 * h) - 3.0 * p(0.5 + 0.5 * h) + 3.0 * p(0.5 - 0.5 * h)
        - p(0.5 - 1.5 * h))
        / h.powi(3);
    let d3 = combo_derivative(&s, &cube, 3, 0.5).unwrap();
    assert_relative_eq!(d3, fd, max_relative = 1e-4);
}

/// Independent F_n for r = 2: two-node extrapolation and the quintic smoothstep.
fn reference_fn(f: &dyn Fn(f64) -> f64, n: f64, x: f64) -> f64 {
    let psi = |t: f64| {
        let t = t.clamp(0.0, 1.0);
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    };
    let left = 2.0 * f(1.0 / n) - f(2.0 / n) + x * n * (f(2.0 / n) - f(1.0 / n));
    let right = 2.0 * f(1.0 - 1.0 / n) - f(1.0 - 2.0 / n)
        + (1.0 - x) * n * (f(1.0 - 2.0 / n) - f(1.0 - 1.0 / n));
    if x <= 1.0 / n {
        left
    } else if x < 2.0 / n {
        f(x) + psi(n * x - 1.0) * (left - f(x))
    } else if x <= 1.0 - 2.0 / n {
        f(x)
    } else if x < 1.0 - 1.0 / n {
        f(x) + psi(n * (1.0 - x) - 1.0) * (right - f(x))
    } else {
        right
    }
}

#[test]
fn bstar_matches_brute_force_nodes() {
    let g = |t: f64| t.powf(-0.25);
    let f = from_fn(g);
    let s = CombinationScheme::geometric(64, 1).unwrap();
    let x = 0.5;
    let brute: f64 = (0..=64u64)
        .map(|k| reference_fn(&g, 64.0, k as f64 / 64.0) * naive_basis(64, k, x))
        .sum();
    let v = bstar_apply(&s, &f, 2, x).unwrap();
    assert!(v.is_finite());
    assert_relative_eq!(v, brute, max_relative = 1e-12);
}

#[test]
fn modified_function_matches_reference() {
    let g = |t: f64| (t * (1.0 - t)).sqrt().ln();
    let f = from_fn(g);
    let fnm = modified_function(&f, 100, 2).unwrap();
    for i in 0..=1000 {
        let x = i as f64 / 1000.0;
        assert_relative_eq!(
            fnm.eval(x),
            reference_fn(&g, 100.0, x),
            max_relative = 1e-12,
            epsilon = 1e-12
        );
    }
}

#[test]
fn zone_identity_and_seams() {
    let f = from_fn(|t: f64| t.powf(-0.25) + (1.0 - t).sqrt());
    for n in [64u64, 256] {
        let fnm = modified_function(&f, n, 2).unwrap();
        let nf = n as f64;
        for i in 0..=500 {
            let x = 2.0 / nf + (1.0 - 4.0 / nf) * i as f64 / 500.0;
            assert_eq!(fnm.eval(x), f.eval(x));
        }
        for seam in [1.0 / nf, 2.0 / nf, 1.0 - 2.0 / nf, 1.0 - 1.0 / nf] {
            // A jump would not shrink with ε; a Lipschitz seam shrinks linearly.
            let j6 = (fnm.eval(seam - 1e-6) - fnm.eval(seam + 1e-6)).abs();
            let j8 = (fnm.eval(seam - 1e-8) - fnm.eval(seam + 1e-8)).abs();
            assert!(
                j6 <= 1e4 * 1e-6 && j8 <= 1e4 * 1e-8,
                "seam {seam}: {j6} {j8}"
            );
        }
        assert!(fnm.eval(0.0).is_finite() && fnm.eval(1.0).is_finite());
    }
}

#[test]
fn polynomial_transparency() {
    for r in 1..=3u32 {
        let f = from_fn(move |t: f64| {
            (0..r)
                .map(|j| (j as f64 + 1.0) * t.powi(j as i32))
                .sum::<f64>()
        });
        let s = CombinationScheme::geometric(64, 2).unwrap();
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            let a = bstar_apply(&s, &f, r, x).unwrap();
            let b = combo_apply(&s, &f, x).unwrap();
            assert!((a - b).abs() <= 1e-10, "r={r} x={x}");
        }
    }
}

#[test]
fn bstar_second_derivative_matches_finite_difference() {
    let f = from_fn(|t: f64| t.sqrt());
    let s = CombinationScheme::geometric(128, 1).unwrap();
    let op = ModifiedCombination::new(&s, &f, 2).unwrap();
    let h = 1e-4;
    let x = 0.25;
    let fd = (op.apply(x + h).unwrap() - 2.0 * op.apply(x).unwrap() + op.apply(x - h).unwrap())
        / (h * h);
    let d2 = bstar_derivative(&s, &f, 2, 2, x).unwrap();
    assert_relative_eq!(d2, fd, max_relative = 1e-3);
}

fn theorem_weights() -> (JacobiWeight, StepWeight) {
    (JacobiWeight::new(0.5, 0.5).unwrap(), StepWeight::varphi())
}

#[test]
fn modulus_homogeneity_and_subadditivity() {
    let (w, phi) = theorem_weights();
    let res = Resolution::default().with_kinks(&[0.5]);
    let f = from_fn(|t: f64| t.powf(0.75));
    let g = from_fn(|t: f64| (t - 0.5).abs());
    let fg = from_fn(|t: f64| t.powf(0.75) + (t - 0.5).abs());
    let scaled = from_fn(|t: f64| -4.0 * t.powf(0.75));
    for t in [1e-3, 1e-2, 1e-1] {
        let of = omega_modulus(&f, &w, &phi, 2, t, &res).unwrap();
        let og = omega_modulus(&g, &w, &phi, 2, t, &res).unwrap();
        let ofg = omega_modulus(&fg, &w, &phi, 2, t, &res).unwrap();
        assert!(ofg <= of + og);
        let os = omega_modulus(&scaled, &w, &phi, 2, t, &res).unwrap();
        assert_eq!(os, 4.0 * of);
    }
}

#[test]
fn modulus_monotone_in_t() {
    let (w, phi) = theorem_weights();
    let res = Resolution::default();
    let f = from_fn(|t: f64| t.sqrt());
    let ts = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1];
    let vals: Vec<f64> = ts
        .iter()
        .map(|&t| omega_modulus(&f, &w, &phi, 2, t, &res).unwrap())
        .collect();
    assert!(vals.windows(2).all(|p| p[0] <= p[1]), "{vals:?}");
}

#[test]
fn modulus_annihilates_polynomials_below_order() {
    let (w, phi) = theorem_weights();
    let res = Resolution::default();
    for r in 1..=3u32 {
        let f = from_fn(move |t: f64| {
            (0..r)
                .map(|j| (2.0 - j as f64) * t.powi(j as i32))
                .sum::<f64>()
        });
        for t in [1e-3, 0.05, 0.17] {
            assert!(omega_modulus(&f, &w, &phi, r, t, &res).unwrap() <= 1e-12);
        }
    }
}

#[test]
fn no_range_errors_in_theorem_mode() {
    let (w, phi) = theorem_weights();
    let res = Resolution::default();
    let f = from_fn(|t: f64| t.powf(-0.25));
    for r in 1..=4u32 {
        let top = 1.0 / (8.0 * r as f64);
        for j in 0..40 {
            let h = top * 0.8f64.powi(j);
            let terms = omega_terms(&f, &w, &phi, r, h, &res).unwrap();
            assert_eq!(terms.skipped, 0, "r={r} h={h}");
        }
    }
}

#[test]
fn main_part_matches_dense_brute_force() {
    let (w, phi) = theorem_weights();
    let res = Resolution::default();
    let f = from_fn(|t: f64| t * t);
    let t = 0.05;
    let est = main_part_modulus(&f, &w, &phi, 2, t, 1.0, &res).unwrap();
    assert!(est > 0.0);
    // Dense uniform sweep over both h and x, written out independently.
    let mut brute = 0.0f64;
    for j in 0..=640 {
        let h = t * 64f64.powf(-(j as f64) / 640.0);
        let lo = 16.0 * h * h;
        for i in 0..=20_000 {
            let x = lo + (1.0 - 2.0 * lo) * i as f64 / 20_000.0;
            let s = h * (x * (1.0 - x)).sqrt();
            let d = (x + s).powi(2) - 2.0 * x * x + (x - s).powi(2);
            brute = brute.max((x * (1.0 - x)).sqrt() * d.abs());
        }
    }
    assert_relative_eq!(est, brute, max_relative = 0.02);
    assert!(main_part_terms(&f, &w, &phi, 2, t, 1.0, &res).unwrap() <= est);
}

#[test]
fn main_part_below_omega_for_corpus() {
    let (w, phi) = theorem_weights();
    let res = Resolution::default().with_kinks(&[0.5]);
    let fs: Vec<Box<dyn Fn(f64) -> f64>> = vec![
        Box::new(|t: f64| t.sqrt()),
        Box::new(|t: f64| t.powf(0.75)),
        Box::new(|t: f64| (t - 0.5).abs()),
        Box::new(|t: f64| (t - 0.5).abs().powf(1.5)),
        Box::new(|t: f64| t.powf(-0.25)),
    ];
    for g in &fs {
        let f = from_fn(|t| g(t));
        for t in [1e-3, 1e-2, 1e-1] {
            let om = omega_modulus(&f, &w, &phi, 2, t, &res).unwrap();
            let mp = main_part_modulus(&f, &w, &phi, 2, t, 1.0, &res).unwrap();
            assert!(mp <= om);
        }
    }
}
