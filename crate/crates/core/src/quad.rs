//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Panels between caller-supplied breakpoints are mapped with
//! `x = a + (b − a)(1 − cos φ)/2`, which absorbs inverse square-root
//! singularities at either end of a panel.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Default cap on the number of subintervals kept by one integration.
pub const MAX_SUBINTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> Piece {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (k, (&x, &wk)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let sum = f(center - half * x) + f(center + half * x);
        kronrod += wk * sum;
        if k % 2 == 1 {
            gauss += WG[k / 2] * sum;
        }
    }
    Piece { a, b, value: kronrod * half, error: ((kronrod - gauss) * half).abs() }
}

/// Integrates `f` over the union of `intervals`, bisecting the subinterval
/// with the largest error estimate until the summed estimate is at most
/// `abs_tol`.
pub fn integrate_intervals(
    mut f: impl FnMut(f64) -> f64,
    intervals: &[(f64, f64)],
    abs_tol: f64,
    max_subintervals: usize,
) -> Result<QuadEstimate> {
    if !(abs_tol > 0.0) {
        return Err(Error::invalid(format!("quadrature tolerance must be positive, got {abs_tol}")));
    }
    let mut heap: BinaryHeap<Piece> =
        intervals.iter().filter(|(a, b)| b > a).map(|&(a, b)| gk15(&mut f, a, b)).collect();
    let mut evaluations = 15 * heap.len();
    let totals = |heap: &BinaryHeap<Piece>| heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    loop {
        let (value, error) = totals(&heap);
        if !value.is_finite() {
            return Err(Error::NoConvergence { iterations: evaluations, worst_residual: f64::NAN });
        }
        if error <= abs_tol {
            return Ok(QuadEstimate { value, abs_error: error, evaluations });
        }
        let worst = heap.pop().expect("error above tolerance implies a piece");
        let mid = 0.5 * (worst.a + worst.b);
        if heap.len() + 2 > max_subintervals || !(mid > worst.a && mid < worst.b) {
            heap.push(worst);
            let (value, error) = totals(&heap);
            // accept a stalled estimate only when it is within ten times the target
            if error <= 10.0 * abs_tol {
                return Ok(QuadEstimate { value, abs_error: error, evaluations });
            }
            return Err(Error::NoConvergence { iterations: evaluations, worst_residual: error });
        }
        heap.push(gk15(&mut f, worst.a, mid));
        heap.push(gk15(&mut f, mid, worst.b));
        evaluations += 30;
    }
}

/// Integrates `f` over `[points[0], points[last]]`, treating each consecutive
/// pair of points as a panel with possible endpoint singularities.
pub fn integrate_panels(mut f: impl FnMut(f64) -> f64, points: &[f64], abs_tol: f64) -> Result<QuadEstimate> {
    if points.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::invalid("panel breakpoints must be ascending"));
    }
    let panels: Vec<(f64, f64)> = points.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1])).collect();
    // φ ∈ [iπ, (i+1)π] addresses panel i
    let mapped = |phi: f64| -> f64 {
        let i = ((phi / PI) as usize).min(panels.len() - 1);
        let (a, b) = panels[i];
        let local = phi - i as f64 * PI;
        let half = 0.5 * (b - a);
        let x = a + half * (1.0 - libm::cos(local));
        let jac = half * libm::sin(local);
        if jac == 0.0 {
            return 0.0;
        }
        f(x) * jac
    };
    if panels.is_empty() {
        return Ok(QuadEstimate { value: 0.0, abs_error: 0.0, evaluations: 0 });
    }
    let intervals: Vec<(f64, f64)> = (0..panels.len()).map(|i| (i as f64 * PI, (i + 1) as f64 * PI)).collect();
    integrate_intervals(mapped, &intervals, abs_tol, MAX_SUBINTERVALS)
}
