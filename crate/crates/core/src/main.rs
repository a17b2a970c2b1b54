use std::path::{Path, PathBuf};
use std::process::ExitCode;

use blockspec::ensemble::{build_g, EmpiricalSpectrum, GammaWeights, RngSeed};
use blockspec::harness::{
    compare, deterministic_spectrum, figure_config, freedman_diaconis, gap_report, thread_pool, ExperimentConfig,
    GapReport, TailBoundResult,
};
use blockspec::io::{sidecar_path, write_atomic};
use blockspec::limit::{arcsine_mixture_density, density_grid, semicircle_density, LimitModel, SpectralDensity};
use blockspec::linalg::eigh_banded;
use blockspec::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

/// Spectra of random block tridiagonal matrices, the roots of the matching
/// matrix orthogonal polynomials, and their limiting densities.
#[derive(Parser)]
#[command(name = "blockspec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Model {
    /// Block size.
    #[arg(long)]
    p: usize,
    /// Comma-separated weights gamma_1,...,gamma_p.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    gamma: Vec<f64>,
}

impl Model {
    fn weights(&self) -> Result<GammaWeights> {
        if self.gamma.len() != self.p {
            return Err(Error::InvalidArgument(format!(
                "--gamma has {} values but --p is {}",
                self.gamma.len(),
                self.p
            )));
        }
        GammaWeights::new(self.gamma.clone())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Output {
    /// Output file; a JSON sidecar is written next to CSV files. Defaults to stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct Quadrature {
    /// Grid intervals across the support.
    #[arg(long, default_value_t = 2000)]
    grid: usize,
    /// Absolute tolerance of each density evaluation.
    #[arg(long, default_value_t = 1e-9)]
    quad_tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of one random matrix G.
    Sample {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        model: Model,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// Divide eigenvalues by sqrt(n).
        #[arg(long)]
        scaled: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Eigenvalues of the deterministic matrix, i.e. the polynomial roots.
    Roots {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        model: Model,
        #[arg(long)]
        scaled: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Limiting density on a grid, with its CDF.
    Density {
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        quad: Quadrature,
        #[command(flatten)]
        output: Output,
    },
    /// Closed-form density: semicircle for p = 1, arcsine mixture for p = 2.
    Oracle {
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        quad: Quadrature,
        #[command(flatten)]
        output: Output,
    },
    /// KS distances and Levy-bound checks of random spectra against the limit.
    Compare {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        model: Model,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        quad: Quadrature,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Gaps between random and deterministic spectra over several n.
    Gap {
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[command(flatten)]
        model: Model,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also check the tail bound at this threshold.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Sanity ceiling on the unscaled gap counted in bound_checks.
        #[arg(long, default_value_t = 60.0)]
        ceiling: f64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Histogram and limit density data for one of the reference figures.
    Figure {
        /// fig1 ... fig5
        #[arg(long)]
        name: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Override the figure's matrix size.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        quad: Quadrature,
    },
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Writes `body` to `out` (plus the sidecar, if any) or to stdout.
fn emit(out: Option<&Path>, body: &str, sidecar: Option<&str>) -> Result<()> {
    match out {
        Some(path) => {
            write_atomic(path, body)?;
            if let Some(meta) = sidecar {
                write_atomic(&sidecar_path(path), meta)?;
            }
            Ok(())
        }
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn emit_spectrum(spec: &EmpiricalSpectrum, output: &Output) -> Result<()> {
    match output.format {
        Format::Csv => emit(output.out.as_deref(), &spec.to_csv(), Some(&spec.meta_json())),
        Format::Json => {
            emit(output.out.as_deref(), &to_json(&json!({ "meta": spec.meta(), "values": spec.values })), None)
        }
    }
}

fn emit_density(d: &SpectralDensity, output: &Output) -> Result<()> {
    match output.format {
        Format::Csv => emit(output.out.as_deref(), &d.to_csv(), Some(&d.meta_json())),
        Format::Json => emit(
            output.out.as_deref(),
            &to_json(&json!({ "meta": d.meta(), "t": d.grid, "density": d.density, "cdf": d.cdf })),
            None,
        ),
    }
}

fn check_grid(quad: &Quadrature) -> Result<()> {
    if quad.grid < 100 {
        return Err(Error::InvalidArgument(format!("--grid must be at least 100, got {}", quad.grid)));
    }
    if !(quad.quad_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("--quad-tol must be positive, got {}", quad.quad_tol)));
    }
    Ok(())
}

fn oracle_density(w: &GammaWeights, quad: &Quadrature) -> Result<SpectralDensity> {
    check_grid(quad)?;
    let g = w.as_slice();
    let eval: Box<dyn Fn(f64) -> Result<f64> + Sync> = match g.len() {
        1 => {
            let g1 = g[0];
            Box::new(move |x| semicircle_density(g1, x))
        }
        2 => {
            let (g1, g2, tol) = (g[0], g[1], quad.quad_tol);
            Box::new(move |x| arcsine_mixture_density(g1, g2, x, tol))
        }
        p => {
            return Err(Error::InvalidArgument(format!("closed-form densities exist only for p = 1 or 2, got p = {p}")))
        }
    };
    let bound = LimitModel::new(w.clone())?.support_bound();
    let h = 2.0 * bound / quad.grid as f64;
    let grid: Vec<f64> = (0..=quad.grid).map(|i| -bound + h * i as f64).collect();
    let density = {
        use rayon::prelude::*;
        grid.par_iter().map(|&x| eval(x)).collect::<Result<Vec<f64>>>()?
    };
    SpectralDensity::from_values(w.clone(), quad.quad_tol, grid, density)
}

fn run_gap(
    n_list: &[usize],
    w: &GammaWeights,
    trials: usize,
    seed: u64,
    epsilon: Option<f64>,
    ceiling: f64,
) -> Result<String> {
    let reports =
        n_list.iter().map(|&n| gap_report(n, w, trials, seed, ceiling)).collect::<Result<Vec<GapReport>>>()?;
    let tail = match epsilon {
        Some(eps) => {
            Some(reports.iter().map(|r| TailBoundResult::from_report(r, w.p(), eps)).collect::<Result<Vec<_>>>()?)
        }
        None => None,
    };
    Ok(to_json(&json!({
        "config": {
            "n_list": n_list,
            "p": w.p(),
            "gamma": w.as_slice(),
            "trials": trials,
            "master_seed": seed,
            "epsilon": epsilon,
            "ceiling": ceiling,
        },
        "reports": reports,
        "tail": tail,
    })))
}

fn run_figure(name: &str, out_dir: &Path, n: Option<usize>, seed: u64, quad: &Quadrature) -> Result<()> {
    let fig = figure_config(name)?;
    check_grid(quad)?;
    let w = GammaWeights::new(fig.gamma.to_vec())?;
    let n = n.unwrap_or(fig.n);
    let rng_seed = RngSeed::new(seed, 0);
    let values = eigh_banded(&build_g(n, &w, rng_seed)?, 1e-10)?;
    let spec = EmpiricalSpectrum::new(n, w.clone(), Some(rng_seed), false, values)?.to_scaled();
    let hist = freedman_diaconis(&spec.values)?;
    let density = density_grid(&LimitModel::new(w.clone())?, quad.grid, quad.quad_tol)?;

    std::fs::create_dir_all(out_dir).map_err(|source| Error::Io { path: out_dir.to_path_buf(), source })?;
    let spectrum_path = out_dir.join(format!("{name}_spectrum.csv"));
    emit(Some(&spectrum_path), &spec.to_csv(), Some(&spec.meta_json()))?;
    let hist_meta = to_json(&json!({
        "figure": name,
        "rule": hist.rule,
        "bin_width": hist.bin_width,
        "bins": hist.centers.len(),
        "n": n,
        "p": w.p(),
        "gamma": w.as_slice(),
        "seed": rng_seed,
        "scaled": true,
    }));
    emit(Some(&out_dir.join(format!("{name}_hist.csv"))), &hist.to_csv(), Some(&hist_meta))?;
    emit(Some(&out_dir.join(format!("{name}_density.csv"))), &density.to_csv(), Some(&density.meta_json()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample { n, model, seed, stream, scaled, output } => {
            let w = model.weights()?;
            let rng_seed = RngSeed::new(seed, stream);
            let values = eigh_banded(&build_g(n, &w, rng_seed)?, 1e-10)?;
            let spec = EmpiricalSpectrum::new(n, w, Some(rng_seed), false, values)?;
            emit_spectrum(&if scaled { spec.to_scaled() } else { spec }, &output)
        }
        Command::Roots { n, model, scaled, output } => {
            emit_spectrum(&deterministic_spectrum(n, &model.weights()?, scaled)?, &output)
        }
        Command::Density { model, quad, output } => {
            let w = model.weights()?;
            check_grid(&quad)?;
            emit_density(&density_grid(&LimitModel::new(w)?, quad.grid, quad.quad_tol)?, &output)
        }
        Command::Oracle { model, quad, output } => emit_density(&oracle_density(&model.weights()?, &quad)?, &output),
        Command::Compare { n, model, trials, seed, quad, out } => {
            let w = model.weights()?;
            check_grid(&quad)?;
            let cfg = ExperimentConfig::new(n, w.clone(), trials, seed, quad.grid, quad.quad_tol)?;
            let density = density_grid(&LimitModel::new(w)?, quad.grid, quad.quad_tol)?;
            emit(out.as_deref(), &to_json(&compare(&cfg, &density)?), None)
        }
        Command::Gap { n_list, model, trials, seed, epsilon, ceiling, out } => {
            if trials == 0 {
                return Err(Error::InvalidArgument("--trials must be at least 1".into()));
            }
            let body = run_gap(&n_list, &model.weights()?, trials, seed, epsilon, ceiling)?;
            emit(out.as_deref(), &body, None)
        }
        Command::Figure { name, out_dir, n, seed, quad } => run_figure(&name, &out_dir, n, seed, &quad),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = thread_pool().and_then(|pool| pool.install(|| run(cli)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                ref e if e.is_validation() => 2,
                Error::Io { .. } => 1,
                _ => 3,
            })
        }
    }
}
