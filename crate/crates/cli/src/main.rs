//! `epsrs`: figure data and spectral response strengths from the command line.
//!
//! Exit codes: 0 on success, 1 on bad input, 2 on numerical failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use epsrs::ep::{
    cluster_spectrum, group_spectrum, spectral_decomposition, xi_residue, ClusterOptions, DeclaredOrder, ResidueOptions,
};
use epsrs::experiments::{
    chirality_surface_scan, fig2, fig3, fig4, fig4_for, fig5, toy_surface_scan, ChiralityScanConfig, Fig2Config,
    Fig3Config, Fig4Config, Fig4Output, Fig5Config, Sampling, ToyScanConfig, DEFAULT_RC, DEFAULT_SEED,
};
use epsrs::linalg::{frobenius_norm, ComplexMatrix};
use epsrs::petermann::{petermann_records, records_to_csv, DEFAULT_ETA};
use epsrs::table::ScanTable;
use epsrs::Complex64;
use serde_json::json;

const THREADS_VAR: &str = "EPSRS_THREADS";

#[derive(Parser, Debug)]
#[command(name = "epsrs", version, about = "Spectral response strength of exceptional points")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Matrix JSON file.
    #[arg(long, global = true)]
    matrix: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Contour radius.
    #[arg(long, global = true)]
    rc: Option<f64>,
    /// Starting quadrature nodes (power of two, at least 16).
    #[arg(long, global = true)]
    nodes: Option<usize>,
    /// Eigenvalue chaining tolerance.
    #[arg(long = "tol-cluster", global = true)]
    tol_cluster: Option<f64>,
    /// Declared order of the selected cluster.
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Select the cluster nearest this point, written `re,im`.
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_complex)]
    near: Option<Complex64>,
}

#[derive(Args, Debug, Clone, Copy)]
struct SamplingArgs {
    #[arg(long, default_value_t = epsrs::experiments::PER_DECADE)]
    per_decade: usize,
    /// Total log-spaced points; overrides --per-decade.
    #[arg(long)]
    points: Option<usize>,
}

impl SamplingArgs {
    fn sampling(self) -> Sampling {
        match self.points {
            Some(n) => Sampling::Points(n),
            None => Sampling::PerDecade(self.per_decade),
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Model {
    Toy,
    Chirality,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// EpReport JSON for one cluster of --matrix.
    Srs,
    /// Splitting and bounds versus detuning.
    Fig2 {
        #[arg(long, default_value_t = 1e-4)]
        detuning_min: f64,
        #[arg(long, default_value_t = 1.0)]
        detuning_max: f64,
        #[arg(long, default_value_t = 1e-8)]
        epsilon: f64,
        #[command(flatten)]
        sampling: SamplingArgs,
    },
    /// Splitting and bounds versus perturbation strength.
    Fig3 {
        #[arg(long, default_value_t = 1e-14)]
        epsilon_min: f64,
        #[arg(long, default_value_t = 1e-2)]
        epsilon_max: f64,
        #[arg(long, default_value_t = 2e-3)]
        detuning: f64,
        #[command(flatten)]
        sampling: SamplingArgs,
    },
    /// Pseudospectrum grid CSV plus the separatrix level.
    Fig4 {
        #[arg(long, default_value_t = 2e-3)]
        detuning: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = -2e-3)]
        re_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 4e-3)]
        re_max: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = -3e-3)]
        im_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 3e-3)]
        im_max: f64,
        #[arg(long, default_value_t = epsrs::greens::DEFAULT_RESOLUTION)]
        resolution: usize,
        #[arg(long, allow_hyphen_values = true, default_value_t = -12.0)]
        c_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = -6.0)]
        c_max: f64,
        /// First pole when --matrix is given.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        pole_a: Option<Complex64>,
        /// Second pole when --matrix is given.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        pole_b: Option<Complex64>,
        /// Sidecar JSON path; defaults to --out with a .json extension.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Residue and Petermann relative errors versus detuning.
    Fig5 {
        #[arg(long, default_value_t = 1e-3)]
        detuning_min: f64,
        #[arg(long, default_value_t = 1.0)]
        detuning_max: f64,
        #[arg(long, default_value_t = DEFAULT_ETA)]
        eta: f64,
        #[command(flatten)]
        sampling: SamplingArgs,
    },
    /// ξ along an exceptional surface of a model.
    ScanSurface {
        #[arg(long, value_enum)]
        model: Model,
        /// Lower end of the detuning (toy) or gap (chirality) range.
        #[arg(long)]
        min: Option<f64>,
        #[arg(long)]
        max: Option<f64>,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        a: Option<Complex64>,
        /// Toy coupling B.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        b: Option<Complex64>,
        /// Chirality coupling V.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        v: Option<Complex64>,
        /// Chirality midpoint of the two EP₂s.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        center: Option<Complex64>,
        #[command(flatten)]
        sampling: SamplingArgs,
    },
    /// Petermann factors of every eigenstate of --matrix.
    Petermann,
    /// Projectors and nilpotents of every cluster of --matrix.
    Decompose,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }
}

impl From<epsrs::Error> for Failure {
    fn from(e: epsrs::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    let z = match parts.as_slice() {
        [re] => Complex64::new(num(re)?, 0.0),
        [re, im] => Complex64::new(num(re)?, num(im)?),
        _ => return Err(format!("expected `re` or `re,im`, got {s:?}")),
    };
    if z.is_finite() {
        Ok(z)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

fn load_matrix(g: &Global) -> CliResult<ComplexMatrix> {
    let path = g.matrix.as_ref().ok_or_else(|| Failure::Input("--matrix is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let m: ComplexMatrix =
        serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    m.require_square("input matrix")?;
    Ok(m)
}

fn write_to(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(g: &Global, text: &str) -> CliResult<()> {
    match &g.out {
        Some(path) => write_to(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_table(g: &Global, table: &ScanTable) -> CliResult<()> {
    emit(g, &table.to_csv())
}

fn residue_options(g: &Global) -> ResidueOptions {
    let mut opts = ResidueOptions::default();
    if let Some(n) = g.nodes {
        opts.max_nodes = opts.max_nodes.max(2 * n);
    }
    opts
}

/// Point used to pick a cluster: `--near`, else the centroid of the largest
/// group when an order is declared, else none (leading cluster).
fn selector(h0: &ComplexMatrix, g: &Global) -> CliResult<Option<Complex64>> {
    if g.near.is_some() || g.order.is_none() {
        return Ok(g.near);
    }
    let (values, groups, _) = group_spectrum(h0, g.tol_cluster)?;
    let mut best = &groups[0];
    for grp in &groups[1..] {
        if grp.len() > best.len() {
            best = grp;
        }
    }
    let centroid = best.iter().map(|&i| values[i]).sum::<Complex64>() / best.len() as f64;
    Ok(Some(centroid))
}

fn cmd_srs(g: &Global) -> CliResult<()> {
    let h0 = load_matrix(g)?;
    let near = selector(&h0, g)?;
    let mut options = ClusterOptions {
        tolerance: g.tol_cluster,
        declared: Vec::new(),
    };
    if let (Some(order), Some(near)) = (g.order, near) {
        options.declared.push(DeclaredOrder { near, order });
    }
    let spectrum = cluster_spectrum(&h0, &options)?;
    let cluster = match near {
        Some(z) => spectrum.nearest_cluster(z),
        None => spectrum.leading_cluster(),
    };
    let mut contour = spectrum.default_contour(&h0, cluster)?;
    if let Some(r) = g.rc {
        contour = contour.with_radius(r)?;
    }
    if let Some(n) = g.nodes {
        contour = contour.with_nodes(n)?;
    }
    let report = xi_residue(&h0, cluster, &contour, &residue_options(g))?;
    let mut text = serde_json::to_string_pretty(&report.to_json()).expect("report serializes");
    text.push('\n');
    emit(g, &text)?;
    if !report.converged {
        return Err(Failure::Numerical(format!(
            "quadrature or rank-1 check failed: rank1_residual {:e} with {} nodes",
            report.rank1_residual, report.quadrature_nodes_used
        )));
    }
    Ok(())
}

fn sidecar_path(g: &Global, explicit: &Option<PathBuf>) -> Option<PathBuf> {
    explicit.clone().or_else(|| g.out.as_ref().map(|p| p.with_extension("json")))
}

fn cmd_fig4(g: &Global, cfg: &Fig4Config, poles: (Option<Complex64>, Option<Complex64>), sidecar: &Option<PathBuf>) -> CliResult<()> {
    let out: Fig4Output = match &g.matrix {
        Some(_) => {
            let h0 = load_matrix(g)?;
            let (Some(a), Some(b)) = poles else {
                return Err(Failure::Input("--pole-a and --pole-b are required with --matrix".into()));
            };
            fig4_for(&h0, a, b, cfg)?
        }
        None => fig4(cfg)?,
    };
    emit(g, &out.grid.to_csv())?;
    let side = format!("{}\n", out.sidecar_json());
    match sidecar_path(g, sidecar) {
        Some(path) => write_to(&path, &side),
        None => {
            eprint!("{side}");
            Ok(())
        }
    }
}

fn cmd_scan(
    g: &Global,
    model: Model,
    range: (Option<f64>, Option<f64>),
    params: [Option<Complex64>; 4],
    sampling: Sampling,
) -> CliResult<ScanTable> {
    let [a, b, v, center] = params;
    let opts = residue_options(g);
    let table = match model {
        Model::Toy => {
            let d = ToyScanConfig::default();
            toy_surface_scan(
                &ToyScanConfig {
                    detuning: (range.0.unwrap_or(d.detuning.0), range.1.unwrap_or(d.detuning.1)),
                    sampling,
                    a: a.unwrap_or(d.a),
                    b: b.unwrap_or(d.b),
                },
                &opts,
            )?
        }
        Model::Chirality => {
            let d = ChiralityScanConfig::default();
            chirality_surface_scan(
                &ChiralityScanConfig {
                    center: center.unwrap_or(d.center),
                    v: v.unwrap_or(d.v),
                    a: a.unwrap_or(d.a),
                    gap: (range.0.unwrap_or(d.gap.0), range.1.unwrap_or(d.gap.1)),
                    sampling,
                },
                &opts,
            )?
        }
    };
    Ok(table)
}

fn cmd_decompose(g: &Global) -> CliResult<()> {
    let h0 = load_matrix(g)?;
    let spectrum = cluster_spectrum(
        &h0,
        &ClusterOptions {
            tolerance: g.tol_cluster,
            declared: Vec::new(),
        },
    )?;
    let d = spectral_decomposition(&h0, &spectrum, &residue_options(g))?;
    let m = h0.rows();
    let sum_err = frobenius_norm(&(&d.projector_sum() - &ComplexMatrix::identity(m)));
    let clusters: Vec<_> = d
        .terms
        .iter()
        .map(|t| {
            json!({
                "eigenvalue": [t.eigenvalue.re, t.eigenvalue.im],
                "order": t.cluster.order,
                "multiplicity": t.cluster.algebraic_multiplicity,
                "converged": t.converged,
                "projector": t.projector,
                "nilpotent_powers": t.nilpotent_powers,
            })
        })
        .collect();
    let doc = json!({ "clusters": clusters, "projector_sum_error": sum_err });
    let mut text = serde_json::to_string_pretty(&doc).expect("decomposition serializes");
    text.push('\n');
    emit(g, &text)
}

fn run(cli: Cli) -> CliResult<()> {
    let g = &cli.global;
    match cli.command {
        Command::Srs => cmd_srs(g),
        Command::Fig2 {
            detuning_min,
            detuning_max,
            epsilon,
            sampling,
        } => emit_table(
            g,
            &fig2(&Fig2Config {
                detuning: (detuning_min, detuning_max),
                epsilon,
                sampling: sampling.sampling(),
            })?,
        ),
        Command::Fig3 {
            epsilon_min,
            epsilon_max,
            detuning,
            sampling,
        } => emit_table(
            g,
            &fig3(&Fig3Config {
                epsilon: (epsilon_min, epsilon_max),
                detuning,
                sampling: sampling.sampling(),
            })?,
        ),
        Command::Fig4 {
            detuning,
            re_min,
            re_max,
            im_min,
            im_max,
            resolution,
            c_min,
            c_max,
            pole_a,
            pole_b,
            sidecar,
        } => {
            let cfg = Fig4Config {
                detuning,
                re_range: (re_min, re_max),
                im_range: (im_min, im_max),
                resolution,
                c_range: (c_min, c_max),
            };
            cmd_fig4(g, &cfg, (pole_a, pole_b), &sidecar)
        }
        Command::Fig5 {
            detuning_min,
            detuning_max,
            eta,
            sampling,
        } => {
            let defaults = Fig5Config::default();
            let cfg = Fig5Config {
                detuning: (detuning_min, detuning_max),
                sampling: sampling.sampling(),
                rc: g.rc.unwrap_or(DEFAULT_RC),
                eta,
                seed: g.seed.unwrap_or(DEFAULT_SEED),
                nodes: g.nodes.unwrap_or(defaults.nodes),
                residue: residue_options(g),
            };
            emit_table(g, &fig5(&cfg)?)
        }
        Command::ScanSurface {
            model,
            min,
            max,
            a,
            b,
            v,
            center,
            sampling,
        } => {
            let table = cmd_scan(g, model, (min, max), [a, b, v, center], sampling.sampling())?;
            emit_table(g, &table)
        }
        Command::Petermann => {
            let h0 = load_matrix(g)?;
            emit(g, &records_to_csv(&petermann_records(&h0)?))
        }
        Command::Decompose => cmd_decompose(g),
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Input(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Input(format!("{THREADS_VAR}: {e}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match configure_threads().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Input(msg) | Failure::Numerical(msg)) = &f;
            eprintln!("epsrs: {msg}");
            ExitCode::from(f.code())
        }
    }
}
