use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use blockspec::ensemble::GammaWeights;
use blockspec::limit::{
    arcsine_mixture_density, build_ab, density_grid, lambda_and_weights, limit_density, semicircle_density,
    trace_density, LimitModel,
};
use blockspec::linalg::SymmetricDense;
use blockspec::poly::{recurrence_coeffs, roots, CoeffScale};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn model(g: &[f64]) -> LimitModel {
    LimitModel::new(GammaWeights::new(g.to_vec()).unwrap()).unwrap()
}

fn to_na(m: &SymmetricDense) -> DMatrix<f64> {
    DMatrix::from_fn(m.dim(), m.dim(), |i, j| m.get(i, j))
}

fn random_spd(rng: &mut ChaCha8Rng, p: usize) -> SymmetricDense {
    let x: Vec<f64> = (0..p * p).map(|_| rng.random_range(-1.0..1.0)).collect();
    SymmetricDense::from_fn(p, |i, j| {
        let dot: f64 = (0..p).map(|k| x[i * p + k] * x[j * p + k]).sum();
        dot + if i == j { 0.5 } else { 0.0 }
    })
}

fn random_sym(rng: &mut ChaCha8Rng, p: usize) -> SymmetricDense {
    SymmetricDense::from_fn(p, |_, _| rng.random_range(-1.5..1.5))
}

#[test]
fn similar_to_nonsymmetric_product() {
    let a = SymmetricDense::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
    let b = SymmetricDense::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut cases = vec![(a, b, 0.0)];
    for p in 1..=3 {
        for _ in 0..5 {
            cases.push((random_spd(&mut rng, p), random_sym(&mut rng, p), rng.random_range(-2.0..2.0)));
        }
    }
    for (a, b, t) in cases {
        let ours: Vec<f64> = lambda_and_weights(&a, &b, t, 1e-12).unwrap().iter().map(|p| p.lambda).collect();
        let shifted = to_na(&b) - DMatrix::identity(a.dim(), a.dim()) * t;
        let product = to_na(&a).try_inverse().unwrap() * shifted;
        let mut theirs: Vec<f64> = product.complex_eigenvalues().iter().map(|z| z.re).collect();
        theirs.sort_by(f64::total_cmp);
        for (x, y) in ours.iter().zip(&theirs) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-9);
        }
    }
}

#[test]
fn weights_are_minus_derivatives() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = 1e-5;
    for k in 0..20 {
        let p = 1 + k % 3;
        let a = random_spd(&mut rng, p);
        let b = random_sym(&mut rng, p);
        let t = rng.random_range(-2.0..2.0);
        let mid = lambda_and_weights(&a, &b, t, 1e-12).unwrap();
        let up = lambda_and_weights(&a, &b, t + h, 1e-12).unwrap();
        let down = lambda_and_weights(&a, &b, t - h, 1e-12).unwrap();
        for j in 0..p {
            // skip near-crossings where the ascending labels swap
            if j + 1 < p && mid[j + 1].lambda - mid[j].lambda < 1e-3 {
                continue;
            }
            let fd = (up[j].lambda - down[j].lambda) / (2.0 * h);
            assert!(mid[j].weight > 0.0);
            assert_abs_diff_eq!(fd, -mid[j].weight, epsilon = 1e-6 * (1.0 + mid[j].weight));
        }
    }
}

#[test]
fn curves_decrease_in_t() {
    let m = model(&[1.0, 4.0, 25.0]);
    for s in [0.02, 0.1, 1.0 / 3.0] {
        let (a, b) = build_ab(&m, s).unwrap();
        let mut prev: Option<Vec<f64>> = None;
        for k in 0..=60 {
            let t = -6.0 + 0.2 * k as f64;
            let cur: Vec<f64> = lambda_and_weights(&a, &b, t, 1e-12).unwrap().iter().map(|p| p.lambda).collect();
            if let Some(prev) = prev {
                assert!(cur.iter().zip(&prev).all(|(c, p)| c < p));
            }
            prev = Some(cur);
        }
    }
}

#[test]
fn scalar_trace_density_is_arcsine() {
    let one = SymmetricDense::identity(1);
    let zero = SymmetricDense::zeros(1);
    for k in -30..=30 {
        let t = k as f64 * 0.1;
        let expected = if t.abs() < 2.0 { 1.0 / (PI * (4.0 - t * t).sqrt()) } else { 0.0 };
        assert_abs_diff_eq!(trace_density(&one, &zero, t).unwrap(), expected, epsilon = 1e-12);
    }
}

/// A 10k-interval trapezoid sum misses mass at the square-root edges; by the
/// generalized Euler–Maclaurin formula the deficit is 2|ζ(−1/2)| h^{3/2} c with
/// edge profile f ≈ c √u, here c = 1/π.
#[test]
fn semicircle_trapezoid_mass() {
    let r = 2.0;
    let n = 10_000;
    let h = 2.0 * r / n as f64;
    let mass: f64 = (0..n)
        .map(|i| {
            let (x0, x1) = (-r + h * i as f64, -r + h * (i + 1) as f64);
            0.5 * h * (semicircle_density(2.0, x0).unwrap() + semicircle_density(2.0, x1).unwrap())
        })
        .sum();
    let zeta_minus_half = -0.207_886_224_977_354_6;
    let bias = 2.0 * zeta_minus_half * h.powf(1.5) / PI;
    assert_abs_diff_eq!(mass - bias, 1.0, epsilon = 1e-8);
}

/// x where a branch boundary of the two-block mixture meets s = 1/2.
fn mixture_kinks(g1: f64, g2: f64) -> Vec<f64> {
    let (r1, r2) = (g1.sqrt(), g2.sqrt());
    let mut out = vec![0.0];
    for (a, b) in [(r2 + r1, r1), ((r2 - r1).abs(), -r1)] {
        out.push((b + 2.0 * a) * 0.5f64.sqrt());
        out.push((b - 2.0 * a) * 0.5f64.sqrt());
    }
    out
}

#[test]
fn two_block_agrees_with_arcsine_mixture() {
    for (g1, g2) in [(2.0, 8.0), (1.0, 100.0)] {
        let m = model(&[g1, g2]);
        let bound = m.support_bound();
        let kinks = mixture_kinks(g1, g2);
        let mut worst: f64 = 0.0;
        for k in 0..=200 {
            let x = -bound + 2.0 * bound * k as f64 / 200.0;
            if kinks.iter().any(|c| (x - c).abs() < 0.02) {
                continue;
            }
            let ours = limit_density(&m, x, 1e-9).unwrap();
            let oracle = arcsine_mixture_density(g1, g2, x, 1e-9).unwrap();
            worst = worst.max((ours - oracle).abs());
        }
        assert!(worst < 1e-3, "gamma ({g1}, {g2}): worst gap {worst}");
    }
}

#[test]
fn arcsine_parameters_for_figure_weights() {
    // α_2(s) = √2√s, β_{1,2}(s) = ±√(2s); at s = 1/2 the second branch covers (-3, 1)
    let f = |x| arcsine_mixture_density(2.0, 8.0, x, 1e-10).unwrap();
    let m = model(&[2.0, 8.0]);
    let (a, b) = build_ab(&m, 0.5).unwrap();
    for x in [-2.5, -0.4, 0.0, 0.7, 3.3] {
        assert!(f(x) > 0.0);
        // the mixture integrand at s = 1/2 is exactly the trace density there
        let alpha = [3.0, 1.0];
        let beta = [1.0, -1.0];
        let direct: f64 = (0..2)
            .map(|j| {
                let g = 4.0 * alpha[j] * alpha[j] - (x - beta[j]) * (x - beta[j]);
                if g > 0.0 {
                    1.0 / (PI * g.sqrt())
                } else {
                    0.0
                }
            })
            .sum();
        assert_abs_diff_eq!(trace_density(&a, &b, x).unwrap(), direct, epsilon = 1e-12);
    }
}

/// Raw moments of the two-block law: the branches are arcsine laws with mean
/// β_j(s) and variance 2α_j(s)², so E X = 0, E X² = (6γ_1 + 4γ_2)/8 and
/// E X³ = 24 γ_1 √γ_2 ∫_0^{1/2} s^{3/2} ds, which is not zero.
#[test]
fn two_block_law_is_skewed() {
    let (g1, g2): (f64, f64) = (2.0, 8.0);
    let expected = [0.0, (6.0 * g1 + 4.0 * g2) / 8.0, 24.0 * g1 * g2.sqrt() * 0.4 * 0.5f64.powf(2.5)];
    assert_abs_diff_eq!(expected[2], 9.6, epsilon = 1e-12);

    let w = GammaWeights::new(vec![g1, g2]).unwrap();
    let d = density_grid(&LimitModel::new(w.clone()).unwrap(), 4000, 1e-10).unwrap();
    let h = d.grid[1] - d.grid[0];
    let coeffs = recurrence_coeffs(4000, &w, CoeffScale::BySqrtN).unwrap();
    let r = roots(&coeffs, 2000).unwrap();
    for (k, e) in expected.iter().enumerate() {
        let k = k as i32 + 1;
        let from_density: f64 = d.grid.iter().zip(&d.density).map(|(t, f)| t.powi(k) * f * h).sum();
        let from_roots = r.iter().map(|x| x.powi(k)).sum::<f64>() / r.len() as f64;
        assert_abs_diff_eq!(from_density, *e, epsilon = 1e-3);
        assert_abs_diff_eq!(from_roots, *e, epsilon = 1e-2);
    }
    let f = |x| arcsine_mixture_density(g1, g2, x, 1e-10).unwrap();
    assert!((f(1.3) - f(-1.3)).abs() > 0.1);
}

#[test]
fn horizontal_and_vertical_scaling() {
    let c: f64 = 3.0;
    for g in [vec![2.0], vec![2.0, 8.0]] {
        let base = model(&g);
        let scaled = model(&g.iter().map(|x| c * x).collect::<Vec<_>>());
        for x in [-1.3, 0.0, 0.4, 2.2] {
            let lhs = limit_density(&scaled, x * c.sqrt(), 1e-10).unwrap();
            let rhs = limit_density(&base, x, 1e-10).unwrap() / c.sqrt();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-7);
        }
    }
}

#[test]
fn tabulated_densities_normalize() {
    for g in [vec![2.0], vec![2.0, 8.0], vec![1.0, 100.0], vec![1.0, 4.0, 25.0], vec![4.0, 4.0, 100.0]] {
        let d = density_grid(&model(&g), 2000, 1e-9).unwrap();
        assert_abs_diff_eq!(d.raw_mass, 1.0, epsilon = 1e-3);
        assert!(d.density.iter().all(|&f| f >= 0.0));
        assert!(d.cdf.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(*d.cdf.last().unwrap(), 1.0);
    }
}

#[test]
fn semicircle_grid() {
    let d = density_grid(&model(&[2.0]), 400, 1e-10).unwrap();
    assert_abs_diff_eq!(d.cdf_at(0.0), 0.5, epsilon = 1e-3);
    let worst = d
        .grid
        .iter()
        .zip(&d.density)
        .map(|(&t, &f)| (f - semicircle_density(2.0, t).unwrap()).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-3, "{worst}");
}
