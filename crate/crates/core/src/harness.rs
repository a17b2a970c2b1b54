//! Monte Carlo experiments comparing random spectra with the deterministic
//! roots and with the limiting density.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{build_f_tilde, build_g, EmpiricalSpectrum, GammaWeights, RngSeed};
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::limit::SpectralDensity;
use crate::linalg::eigh_banded;

const SPECTRUM_TOL: f64 = 1e-10;

/// Environment variable capping the worker threads (`0` or unset: one per core).
pub const THREADS_ENV: &str = "BLOCKSPEC_THREADS";

/// Thread pool sized from `BLOCKSPEC_THREADS`.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::invalid(format!("{THREADS_ENV} must be a non-negative integer, got {v:?}")))?,
        _ => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker threads: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub gamma: GammaWeights,
    pub trials: usize,
    pub master_seed: u64,
    pub grid_size: usize,
    pub quad_tol: f64,
}

impl ExperimentConfig {
    pub fn new(
        n: usize,
        gamma: GammaWeights,
        trials: usize,
        master_seed: u64,
        grid_size: usize,
        quad_tol: f64,
    ) -> Result<Self> {
        gamma.check_size(n)?;
        if trials == 0 {
            return Err(Error::invalid("at least one trial is required"));
        }
        Ok(ExperimentConfig { n, gamma, trials, master_seed, grid_size, quad_tol })
    }

    /// Trial `i` draws from stream `i` of the master seed.
    pub fn seed(&self, trial: usize) -> RngSeed {
        RngSeed::new(self.master_seed, trial as u64)
    }
}

/// Eigenvalues of one draw of `G`, or of `G/√n` when `scaled`.
pub fn empirical_spectrum(cfg: &ExperimentConfig, trial: usize, scaled: bool) -> Result<EmpiricalSpectrum> {
    spectrum_for_seed(cfg.n, &cfg.gamma, cfg.seed(trial), scaled)
}

fn spectrum_for_seed(n: usize, w: &GammaWeights, seed: RngSeed, scaled: bool) -> Result<EmpiricalSpectrum> {
    let values = eigh_banded(&build_g(n, w, seed)?, SPECTRUM_TOL)?;
    let spec = EmpiricalSpectrum::new(n, w.clone(), Some(seed), false, values)?;
    Ok(if scaled { spec.to_scaled() } else { spec })
}

/// Unscaled spectrum of `F̃`, i.e. the roots of the last matrix polynomial.
pub fn deterministic_spectrum(n: usize, w: &GammaWeights, scaled: bool) -> Result<EmpiricalSpectrum> {
    let values = eigh_banded(&build_f_tilde(n, w)?, SPECTRUM_TOL)?;
    let spec = EmpiricalSpectrum::new(n, w.clone(), None, false, values)?;
    Ok(if scaled { spec.to_scaled() } else { spec })
}

/// `max_j |a_j − b_j|` for two ascending arrays of equal length.
pub fn max_sorted_gap(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!("cannot pair {} values with {}", a.len(), b.len())));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// Largest distance between matched order statistics of one draw of `G` and
/// of `F̃`, both unscaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapEntry {
    pub seed: RngSeed,
    pub max_gap: f64,
    /// `max_gap / √(log n)`.
    pub scaled_gap: f64,
}

fn log_scale(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::invalid(format!("gap scaling needs n >= 3 so that log n > 1, got {n}")));
    }
    Ok(libm::log(n as f64).sqrt())
}

pub fn approx_gap(n: usize, w: &GammaWeights, seed: RngSeed) -> Result<GapEntry> {
    let roots = deterministic_spectrum(n, w, false)?;
    gap_against(n, w, seed, &roots.values)
}

fn gap_against(n: usize, w: &GammaWeights, seed: RngSeed, roots: &[f64]) -> Result<GapEntry> {
    let scale = log_scale(n)?;
    let spec = spectrum_for_seed(n, w, seed, false)?;
    let max_gap = max_sorted_gap(&spec.values, roots)?;
    Ok(GapEntry { seed, max_gap, scaled_gap: max_gap / scale })
}

/// Median and 90th percentile of a sample, plus how many bound checks passed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub median: f64,
    pub p90: f64,
    pub bound_checks: BoundChecks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundChecks {
    pub passed: usize,
    pub total: usize,
}

/// Linear-interpolation quantile of an unsorted sample, `q ∈ [0, 1]`.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

/// Gap statistics for one `n`; the summary is over `scaled_gap` and the
/// bound checks count trials under the sanity ceiling `ceiling`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub n: usize,
    pub per_seed: Vec<GapEntry>,
    pub summary: Summary,
}

/// Gap entries for streams `0..trials` of `master_seed`, run in parallel.
pub fn gap_report(n: usize, w: &GammaWeights, trials: usize, master_seed: u64, ceiling: f64) -> Result<GapReport> {
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    let roots = deterministic_spectrum(n, w, false)?;
    let per_seed = (0..trials)
        .into_par_iter()
        .map(|t| gap_against(n, w, RngSeed::new(master_seed, t as u64), &roots.values))
        .collect::<Result<Vec<_>>>()?;
    let scaled: Vec<f64> = per_seed.iter().map(|e| e.scaled_gap).collect();
    let passed = per_seed.iter().filter(|e| e.max_gap <= ceiling).count();
    Ok(GapReport {
        n,
        summary: Summary {
            median: quantile(&scaled, 0.5),
            p90: quantile(&scaled, 0.9),
            bound_checks: BoundChecks { passed, total: trials },
        },
        per_seed,
    })
}

/// `min(1, 2n(p+1) exp(−ε²/(18p²)))`.
pub fn tail_bound(n: usize, p: usize, epsilon: f64) -> f64 {
    let p = p as f64;
    let log_bound = libm::log(2.0 * n as f64 * (p + 1.0)) - epsilon * epsilon / (18.0 * p * p);
    libm::exp(log_bound).min(1.0)
}

/// The `ε` at which `tail_bound` equals `target ∈ (0, 1]`.
pub fn epsilon_for_bound(n: usize, p: usize, target: f64) -> Result<f64> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::invalid(format!("target probability must lie in (0, 1], got {target}")));
    }
    let p = p as f64;
    Ok((18.0 * p * p * libm::log(2.0 * n as f64 * (p + 1.0) / target)).max(0.0).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBoundResult {
    pub n: usize,
    pub p: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub exceedances: usize,
    pub empirical_freq: f64,
    pub bound: f64,
    /// `bound + 3√(bound(1 − bound)/trials) + 1/trials`.
    pub slack_limit: f64,
    pub holds: bool,
    pub per_trial_max_gap: Vec<f64>,
}

/// Fraction of trials whose gap reaches `epsilon`, against the tail bound.
pub fn tail_bound_experiment(
    n: usize,
    w: &GammaWeights,
    epsilon: f64,
    trials: usize,
    master_seed: u64,
) -> Result<TailBoundResult> {
    if !(epsilon >= 0.0) {
        return Err(Error::invalid(format!("epsilon must be non-negative, got {epsilon}")));
    }
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    let report = gap_report(n, w, trials, master_seed, f64::INFINITY)?;
    TailBoundResult::from_report(&report, w.p(), epsilon)
}

impl TailBoundResult {
    /// Tail-bound check on the gaps already collected in `report`.
    pub fn from_report(report: &GapReport, p: usize, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) {
            return Err(Error::invalid(format!("epsilon must be non-negative, got {epsilon}")));
        }
        let trials = report.per_seed.len();
        let gaps: Vec<f64> = report.per_seed.iter().map(|e| e.max_gap).collect();
        let exceedances = gaps.iter().filter(|g| **g >= epsilon).count();
        let empirical_freq = exceedances as f64 / trials as f64;
        let bound = tail_bound(report.n, p, epsilon);
        let slack_limit = bound + 3.0 * (bound * (1.0 - bound) / trials as f64).sqrt() + 1.0 / trials as f64;
        Ok(TailBoundResult {
            n: report.n,
            p,
            epsilon,
            trials,
            exceedances,
            empirical_freq,
            bound,
            slack_limit,
            holds: empirical_freq <= slack_limit,
            per_trial_max_gap: gaps,
        })
    }
}

/// Kolmogorov–Smirnov distance between a scaled spectrum and a tabulated
/// limit CDF, checked at every sample point (both one-sided limits of the
/// empirical CDF) and at every grid point.
pub fn ks_distance(spectrum: &EmpiricalSpectrum, density: &SpectralDensity) -> Result<f64> {
    if !spectrum.scaled {
        return Err(Error::invalid("KS distance needs a spectrum scaled by 1/sqrt(n)"));
    }
    ks_against(&spectrum.values, density)
}

fn ks_against(sorted: &[f64], density: &SpectralDensity) -> Result<f64> {
    let end = density.cdf.last().copied().unwrap_or(f64::NAN);
    if (end - 1.0).abs() > 1e-9 || (density.raw_mass - 1.0).abs() > 0.01 {
        return Err(Error::Normalization(format!(
            "limit CDF is not normalized (ends at {end}, raw mass {})",
            density.raw_mass
        )));
    }
    let n = sorted.len() as f64;
    let mut worst: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let c = density.cdf_at(x);
        worst = worst.max((c - i as f64 / n).abs()).max((c - (i + 1) as f64 / n).abs());
    }
    for (&t, &c) in density.grid.iter().zip(&density.cdf) {
        let below = sorted.partition_point(|&x| x <= t) as f64 / n;
        worst = worst.max((c - below).abs());
    }
    Ok(worst.min(1.0))
}

fn ecdf(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64
}

fn levy_ok(a: &[f64], b: &[f64], eps: f64) -> bool {
    let one_side = |u: &[f64], v: &[f64]| u.iter().all(|&x| ecdf(u, x) <= ecdf(v, x + eps) + eps);
    one_side(a, b) && one_side(b, a)
}

/// Lévy distance between the empirical distributions of two ascending
/// samples, to within `1e-15` from above.
pub fn levy_distance(a: &[f64], b: &[f64]) -> f64 {
    if levy_ok(a, b, 0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if levy_ok(a, b, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Both sides of `L³ ≤ (1/n) Σ (λ_j − x_j)²` for scaled spectra.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyCheck {
    pub levy: f64,
    pub lhs_l3: f64,
    pub rhs_mean_sq: f64,
    pub holds: bool,
}

pub fn levy_cubed_bound(emp: &EmpiricalSpectrum, roots_scaled: &[f64]) -> Result<LevyCheck> {
    if emp.values.len() != roots_scaled.len() {
        return Err(Error::invalid(format!(
            "spectrum has {} values but {} roots were given",
            emp.values.len(),
            roots_scaled.len()
        )));
    }
    if !emp.scaled {
        return Err(Error::invalid("Levy bound needs a spectrum scaled by 1/sqrt(n)"));
    }
    let rhs_mean_sq =
        emp.values.iter().zip(roots_scaled).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / roots_scaled.len() as f64;
    let levy = levy_distance(&emp.values, roots_scaled);
    let lhs_l3 = levy.powi(3);
    Ok(LevyCheck { levy, lhs_l3, rhs_mean_sq, holds: lhs_l3 <= rhs_mean_sq * (1.0 + 1e-9) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: RngSeed,
    /// Unscaled, as in [`GapEntry`].
    pub max_gap: f64,
    pub ks: f64,
    pub levy: LevyCheck,
}

/// Per-trial KS distances and Lévy checks; the summary is over `ks`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub config: ExperimentConfig,
    pub per_trial: Vec<TrialRecord>,
    pub summary: Summary,
}

/// Runs `cfg.trials` draws in parallel against a tabulated limit density.
pub fn compare(cfg: &ExperimentConfig, density: &SpectralDensity) -> Result<CompareReport> {
    if density.weights != cfg.gamma {
        return Err(Error::invalid("density was tabulated for different gamma weights"));
    }
    let roots = deterministic_spectrum(cfg.n, &cfg.gamma, true)?;
    let root_n = (cfg.n as f64).sqrt();
    let per_trial = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let spec = empirical_spectrum(cfg, trial, true)?;
            let ks = ks_distance(&spec, density)?;
            let levy = levy_cubed_bound(&spec, &roots.values)?;
            let max_gap = max_sorted_gap(&spec.values, &roots.values)? * root_n;
            Ok(TrialRecord { trial, seed: cfg.seed(trial), max_gap, ks, levy })
        })
        .collect::<Result<Vec<_>>>()?;
    let ks: Vec<f64> = per_trial.iter().map(|r| r.ks).collect();
    let passed = per_trial.iter().filter(|r| r.levy.holds).count();
    Ok(CompareReport {
        config: cfg.clone(),
        summary: Summary {
            median: quantile(&ks, 0.5),
            p90: quantile(&ks, 0.9),
            bound_checks: BoundChecks { passed, total: cfg.trials },
        },
        per_trial,
    })
}

/// Matrix size and weights of one of the five reference figures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FigureConfig {
    pub name: &'static str,
    pub n: usize,
    pub gamma: &'static [f64],
}

pub const FIGURES: [FigureConfig; 5] = [
    FigureConfig { name: "fig1", n: 5000, gamma: &[2.0, 8.0] },
    FigureConfig { name: "fig2", n: 5000, gamma: &[1.0, 100.0] },
    FigureConfig { name: "fig3", n: 5001, gamma: &[4.0, 4.0, 100.0] },
    FigureConfig { name: "fig4", n: 5001, gamma: &[1.0, 4.0, 25.0] },
    FigureConfig { name: "fig5", n: 5001, gamma: &[1.0, 100.0, 200.0] },
];

pub fn figure_config(name: &str) -> Result<FigureConfig> {
    FIGURES.iter().copied().find(|f| f.name == name).ok_or_else(|| {
        let known: Vec<&str> = FIGURES.iter().map(|f| f.name).collect();
        Error::invalid(format!("unknown figure {name:?}; expected one of {}", known.join(", ")))
    })
}

/// Histogram normalized as a density (`count / (n · width)` per bin).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub rule: String,
    pub bin_width: f64,
    pub centers: Vec<f64>,
    pub counts: Vec<usize>,
    pub density: Vec<f64>,
}

impl Histogram {
    /// CSV with header `bin_center,frequency_density`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_center,frequency_density\n");
        for (c, d) in self.centers.iter().zip(&self.density) {
            out.push_str(&format!("{},{}\n", fmt_f64(*c), fmt_f64(*d)));
        }
        out
    }
}

/// Bins of width `2 · IQR · n^{-1/3}` starting at the sample minimum.
pub fn freedman_diaconis(values: &[f64]) -> Result<Histogram> {
    if values.len() < 2 {
        return Err(Error::invalid("a histogram needs at least two values"));
    }
    let n = values.len() as f64;
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let iqr = quantile(values, 0.75) - quantile(values, 0.25);
    let mut width = 2.0 * iqr / libm::cbrt(n);
    if !(width > 0.0) {
        width = if hi > lo { (hi - lo) / n.sqrt().ceil() } else { 1.0 };
    }
    let bins = (((hi - lo) / width).ceil() as usize).max(1);
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    Ok(Histogram {
        rule: "freedman-diaconis".into(),
        bin_width: width,
        centers: (0..bins).map(|k| lo + (k as f64 + 0.5) * width).collect(),
        density: counts.iter().map(|&c| c as f64 / (n * width)).collect(),
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn tail_bound_values() {
        assert_abs_diff_eq!(tail_bound(100, 1, 30.0), 400.0 * (-50.0f64).exp(), epsilon = 1e-30);
        assert_eq!(tail_bound(100, 1, 0.0), 1.0);
        assert_eq!(tail_bound(100, 1, 1e6), 0.0);
        let eps = epsilon_for_bound(100, 1, 0.5).unwrap();
        assert_abs_diff_eq!(tail_bound(100, 1, eps), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(eps, 10.97, epsilon = 1e-2);
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_abs_diff_eq!(quantile(&v, 0.9), 3.7, epsilon = 1e-12);
    }

    #[test]
    fn levy_of_identical_and_shifted_samples() {
        let a: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        assert_eq!(levy_distance(&a, &a), 0.0);
        let b: Vec<f64> = a.iter().map(|x| x + 0.03).collect();
        let l = levy_distance(&a, &b);
        assert_abs_diff_eq!(l, 0.02, epsilon = 1e-12);
        // shifts under one mesh step cost one CDF jump, 1/50, or the shift itself
        let c: Vec<f64> = a.iter().map(|x| x + 0.01).collect();
        assert_abs_diff_eq!(levy_distance(&a, &c), 0.01, epsilon = 1e-12);
    }

    #[test]
    fn histogram_mass_and_rule() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin()).collect();
        let h = freedman_diaconis(&v).unwrap();
        let iqr = quantile(&v, 0.75) - quantile(&v, 0.25);
        assert_abs_diff_eq!(h.bin_width, 2.0 * iqr / 10.0, epsilon = 1e-12);
        assert_eq!(h.counts.iter().sum::<usize>(), 1000);
        assert_abs_diff_eq!(h.density.iter().sum::<f64>() * h.bin_width, 1.0, epsilon = 1e-12);
        assert!(h.to_csv().starts_with("bin_center,frequency_density\n"));
    }

    #[test]
    fn figure_table() {
        let f = figure_config("fig3").unwrap();
        assert_eq!((f.n, f.gamma), (5001, &[4.0, 4.0, 100.0][..]));
        for f in FIGURES {
            GammaWeights::new(f.gamma.to_vec()).unwrap().check_size(f.n).unwrap();
        }
        assert!(figure_config("fig6").is_err());
    }

    #[test]
    fn gap_pairs_by_order() {
        assert_eq!(max_sorted_gap(&[0.0, 1.0], &[0.5, 1.1]).unwrap(), 0.5);
        assert!(max_sorted_gap(&[0.0], &[0.0, 1.0]).is_err());
    }
}
