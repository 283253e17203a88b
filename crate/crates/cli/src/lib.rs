//! Command dispatch for the `framelab` binary: load a family or model from
//! JSON, run the named experiment, and emit a JSON or CSV report.
//!
//! Exit codes: 0 ran fine; 1 failed to run (unreadable input, parse error,
//! invalid parameters); 2 ran fine but the verdict is negative (not
//! representable, not a frame, Carleson violated) and `--strict` was given.
//! All randomness flows from `--seed`; two runs of the same command line
//! produce byte-identical reports.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use framelab::frames::{canonical_dual, frame_bounds, frame_operator, FrameReport};
use framelab::generate::{generate as generate_family, random_unit_vector, GenerateSpec};
use framelab::io::{parse_family_json, parse_model_json, to_json_pretty};
use framelab::linalg::{cr, operator_norm, CMatrix, CVector, Tolerance};
use framelab::perturb::{
    compact_nogo_trend, perturbation_energy, perturbed_orbit_test, OrbitDepth,
    PerturbationSetup, TrendRow,
};
use framelab::represent::{candidate_operator, check_shift_property, RepresentabilityVerdict};
use framelab::spectral::{
    carleson_lower_bound, DiagonalModel, DEFAULT_CARLESON_DELTA,
};
use framelab::structure::{chain_report, swap_experiment, tail_stabilization_index};
use framelab::{Error, VectorFamily};

const DEFAULT_ANALYSIS_TAIL: f64 = 1e-8;
const DEFAULT_GENERATE_TAIL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(
    name = "framelab",
    version,
    about = "Numerical experiments on operator-orbit frames"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Json)]
    format: ReportFormat,

    /// Seed for every random draw in the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Override the relative numerical-rank threshold.
    #[arg(long = "tol-rank", global = true)]
    tol_rank: Option<f64>,

    /// Override the absolute residual tolerance.
    #[arg(long = "tol-res", global = true)]
    tol_res: Option<f64>,

    /// Orbit truncation depth; overrides the certified tail bound.
    #[arg(long, global = true)]
    depth: Option<usize>,

    /// Certified tail energy for orbit truncation.
    #[arg(long, global = true)]
    tail: Option<f64>,

    /// Exit 2 when the verdict is negative (not representable, not a frame,
    /// Carleson violated).
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Frame bounds, excess, and span of a family.
    Analyze {
        #[arg(long)]
        input: PathBuf,
    },
    /// Decide whether a family is the orbit of a bounded operator.
    Represent {
        #[arg(long)]
        input: PathBuf,
    },
    /// Pseudo-hyperbolic separation products of a diagonal model.
    Carleson {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Build the model lambda_k = 1 - alpha^-k instead of reading one.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        dim: Option<usize>,
        /// Threshold the infimum must exceed.
        #[arg(long, default_value_t = DEFAULT_CARLESON_DELTA)]
        delta: f64,
    },
    /// Orbit of a diagonal model: certified depth, closed-form vs expanded
    /// frame operator, frame bounds.
    Spectral {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Image/null chains of the recovered operator and the tail-space
    /// stabilization index of the orbit.
    Structure {
        #[arg(long)]
        input: PathBuf,
        /// How many consecutive shifted tails must agree.
        #[arg(long, default_value_t = 1)]
        shifts: usize,
        /// Power budget for chain stabilization.
        #[arg(long, default_value_t = 64)]
        max_k: usize,
    },
    /// Exchange two family members (1-based) and re-decide representability.
    Swap {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        lp: usize,
    },
    /// Perturb the orbit generator inside an invariant block and report the
    /// perturbed frame bounds against the certified radius.
    Perturb {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        dim: Option<usize>,
        /// Dimension of the invariant block V = span{e_1, ..., e_enclose}.
        #[arg(long)]
        enclose: Option<usize>,
        /// Perturbation norm as a fraction of the certified radius.
        #[arg(long, default_value_t = 0.9)]
        scale: f64,
    },
    /// Lower/upper frame bounds of J-generator unions as the dimension
    /// grows (the compactness no-go trend).
    Trend {
        #[arg(long, default_value_t = 2)]
        j: usize,
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
        dims: Vec<usize>,
    },
    /// Emit a named family as JSON.
    Generate {
        #[arg(long, value_enum)]
        kind: FamilyKind,
        #[arg(long, default_value_t = 4)]
        dim: usize,
        /// Number of vectors for duplicated_first.
        #[arg(long, default_value_t = 4)]
        count: usize,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long = "basis-dim", default_value_t = 2)]
        basis_dim: usize,
        #[arg(long = "basis-scale", default_value_t = 1.0)]
        basis_scale: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyKind {
    #[value(name = "onb")]
    Onb,
    #[value(name = "riesz_random")]
    RieszRandom,
    #[value(name = "duplicated_first")]
    DuplicatedFirst,
    #[value(name = "spectral_orbit")]
    SpectralOrbit,
    #[value(name = "direct_sum")]
    DirectSum,
}

struct Output {
    text: String,
    negative: bool,
}

/// Parse arguments, run the command, write the report. Returns the process
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprint!("{e}");
                    1
                }
            };
        }
    };
    match execute(&cli) {
        Ok(output) => {
            if let Err(e) = write_output(cli.out.as_deref(), &output.text) {
                eprintln!("error: {e}");
                return 1;
            }
            if cli.strict && output.negative {
                2
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn write_output(out: Option<&Path>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())
        }
    }
}

fn tolerance_of(cli: &Cli) -> Result<Tolerance, Error> {
    let default = Tolerance::default();
    Tolerance::new(
        cli.tol_rank.unwrap_or(default.rank_rtol),
        cli.tol_res.unwrap_or(default.residual_atol),
        default.equality_atol,
    )
}

fn read_input(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn load_family(path: &Path) -> Result<VectorFamily, Error> {
    parse_family_json(&read_input(path)?)
}

fn load_model(
    input: &Option<PathBuf>,
    alpha: Option<f64>,
    dim: Option<usize>,
) -> Result<DiagonalModel, Error> {
    match (input, alpha, dim) {
        (Some(path), None, None) => parse_model_json(&read_input(path)?),
        (None, Some(alpha), Some(dim)) => {
            framelab::spectral::sample_carleson_sequence(alpha, dim)
        }
        _ => Err(Error::InvalidParams(
            "provide either --input or both --alpha and --dim".into(),
        )),
    }
}

fn render<T: Serialize>(format: ReportFormat, value: &T, csv: impl FnOnce() -> String) -> String {
    match format {
        ReportFormat::Json => to_json_pretty(value),
        ReportFormat::Csv => csv(),
    }
}

fn execute(cli: &Cli) -> Result<Output, Error> {
    let tol = tolerance_of(cli)?;
    match &cli.command {
        Command::Analyze { input } => {
            let family = load_family(input)?;
            let report = frame_bounds(&family, &tol)?;
            Ok(Output {
                negative: !report.is_frame,
                text: render(cli.format, &report, || frame_csv(&report)),
            })
        }
        Command::Represent { input } => {
            let family = load_family(input)?;
            let verdict = representability_of(&family, &tol)?;
            Ok(Output {
                negative: !verdict.representable,
                text: render(cli.format, &verdict, || verdict_csv(&verdict)),
            })
        }
        Command::Carleson {
            input,
            alpha,
            dim,
            delta,
        } => {
            let model = load_model(input, *alpha, *dim)?;
            let report = carleson_lower_bound(model.lambdas(), *delta)?;
            Ok(Output {
                negative: !report.satisfied,
                text: render(cli.format, &report, || carleson_csv(&report)),
            })
        }
        Command::Spectral { input, alpha, dim } => {
            let model = load_model(input, *alpha, *dim)?;
            let tail = cli.tail.unwrap_or(DEFAULT_ANALYSIS_TAIL);
            let depth = match cli.depth {
                Some(depth) => depth,
                None => model.certified_depth(tail)?,
            };
            let family = model.orbit_with_depth(depth, "spectral orbit")?;
            let gap = operator_norm(
                &(model.closed_form_frame_operator() - frame_operator(&family)),
            );
            let frame = frame_bounds(&family, &tol)?;
            let carleson = carleson_lower_bound(model.lambdas(), DEFAULT_CARLESON_DELTA)?;
            let report = SpectralReport {
                dim: model.dim(),
                spectral_radius: model.spectral_radius(),
                depth,
                closed_vs_expanded_gap: gap,
                carleson_infimum: carleson.infimum,
                frame,
            };
            Ok(Output {
                negative: !report.frame.is_frame,
                text: render(cli.format, &report, || spectral_csv(&report)),
            })
        }
        Command::Structure {
            input,
            shifts,
            max_k,
        } => {
            let family = load_family(input)?;
            let dual = canonical_dual(&family, &tol)?;
            let t = candidate_operator(&family, &dual)?;
            let verdict = check_shift_property(&family, &t, &tol)?;
            let report = if verdict.representable {
                let chain = chain_report(&t, &tol, *max_k)?;
                let stabilization_index =
                    tail_stabilization_index(&family, &t, *shifts, &tol)?;
                StructureReport {
                    representable: true,
                    q_t: Some(chain.q_t),
                    null_length: Some(chain.null_length),
                    image_ranks: chain.image_ranks,
                    null_dims: chain.null_dims,
                    stabilization_index,
                }
            } else {
                StructureReport {
                    representable: false,
                    q_t: None,
                    null_length: None,
                    image_ranks: Vec::new(),
                    null_dims: Vec::new(),
                    stabilization_index: None,
                }
            };
            Ok(Output {
                negative: !report.representable,
                text: render(cli.format, &report, || structure_csv(&report)),
            })
        }
        Command::Swap { input, l, lp } => {
            let family = load_family(input)?;
            let verdict = swap_experiment(&family, *l, *lp, &tol)?;
            Ok(Output {
                negative: !verdict.representable,
                text: render(cli.format, &verdict, || verdict_csv(&verdict)),
            })
        }
        Command::Perturb {
            input,
            alpha,
            dim,
            enclose,
            scale,
        } => {
            let model = load_model(input, *alpha, *dim)?;
            if !(*scale >= 0.0) || !scale.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "scale must be nonnegative and finite, got {scale}"
                )));
            }
            let tail = cli.tail.unwrap_or(DEFAULT_ANALYSIS_TAIL);
            let t = model.operator_matrix();
            let phi = model.generator();
            let (family, depth) = model.orbit(tail, "base orbit")?;
            let depth = cli.depth.unwrap_or(depth);
            let base = frame_bounds(&family, &tol)?;
            if !base.is_frame {
                return Err(Error::InvalidInput(
                    "the unperturbed orbit is not a frame; nothing to perturb".into(),
                ));
            }
            let enclose = (*enclose).unwrap_or(model.dim());
            if enclose == 0 || enclose > model.dim() {
                return Err(Error::InvalidParams(format!(
                    "enclose must lie in 1..={}, got {enclose}",
                    model.dim()
                )));
            }
            let mut v = CMatrix::zeros(model.dim(), enclose);
            for k in 0..enclose {
                v[(k, k)] = cr(1.0);
            }
            let setup = PerturbationSetup::new(&t, &phi, &v, base.lower_bound_a, &tol)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let direction = random_unit_vector(enclose, &mut rng);
            let mut phi_tilde = CVector::zeros(model.dim());
            phi_tilde.rows_mut(0, enclose).copy_from(&direction);
            phi_tilde *= cr(scale * setup.radius());
            let frame = perturbed_orbit_test(&setup, &phi_tilde, OrbitDepth::Fixed(depth), &tol)?;
            let energy = perturbation_energy(&setup, &phi_tilde, depth, &tol)?;
            let norm = phi_tilde.norm();
            let mu = setup.mu();
            let predicted = base.lower_bound_a.sqrt() - norm / (1.0 - mu * mu).sqrt();
            let report = PerturbReport {
                mu,
                unperturbed_lower_bound: base.lower_bound_a,
                radius: setup.radius(),
                perturbation_norm: norm,
                energy,
                energy_cap: norm * norm / (1.0 - mu * mu),
                predicted_lower_bound: predicted.max(0.0).powi(2),
                frame,
            };
            Ok(Output {
                negative: !report.frame.is_frame,
                text: render(cli.format, &report, || perturb_csv(&report)),
            })
        }
        Command::Trend { j, dims } => {
            let tail = cli.tail.unwrap_or(DEFAULT_ANALYSIS_TAIL);
            let max_dim = dims.iter().copied().max().unwrap_or(0);
            let decay: Vec<f64> = (0..max_dim)
                .map(|k| 0.5_f64.powi(k as i32 + 1))
                .collect();
            let rows = compact_nogo_trend(&decay, *j, dims, tail, cli.seed)?;
            Ok(Output {
                negative: false,
                text: render(cli.format, &rows, || trend_csv(&rows)),
            })
        }
        Command::Generate {
            kind,
            dim,
            count,
            alpha,
            basis_dim,
            basis_scale,
        } => {
            if cli.format == ReportFormat::Csv {
                return Err(Error::InvalidParams(
                    "generate emits family JSON; csv is not supported".into(),
                ));
            }
            let tail = cli.tail.unwrap_or(DEFAULT_GENERATE_TAIL);
            let spec = match kind {
                FamilyKind::Onb => GenerateSpec::Onb { dim: *dim },
                FamilyKind::RieszRandom => GenerateSpec::RieszRandom { dim: *dim },
                FamilyKind::DuplicatedFirst => GenerateSpec::DuplicatedFirst { count: *count },
                FamilyKind::SpectralOrbit => GenerateSpec::SpectralOrbit {
                    alpha: *alpha,
                    dim: *dim,
                    tail_tol: tail,
                },
                FamilyKind::DirectSum => GenerateSpec::DirectSum {
                    basis_dim: *basis_dim,
                    basis_scale: *basis_scale,
                    alpha: *alpha,
                    orbit_dim: *dim,
                    tail_tol: tail,
                },
            };
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let family = generate_family(spec, &mut rng)?;
            Ok(Output {
                negative: false,
                text: to_json_pretty(&family),
            })
        }
    }
}

fn representability_of(
    family: &VectorFamily,
    tol: &Tolerance,
) -> Result<RepresentabilityVerdict, Error> {
    let dual = canonical_dual(family, tol)?;
    let t = candidate_operator(family, &dual)?;
    check_shift_property(family, &t, tol)
}

#[derive(Serialize)]
struct SpectralReport {
    dim: usize,
    spectral_radius: f64,
    depth: usize,
    closed_vs_expanded_gap: f64,
    carleson_infimum: f64,
    frame: FrameReport,
}

#[derive(Serialize)]
struct StructureReport {
    representable: bool,
    #[serde(rename = "q_T")]
    q_t: Option<usize>,
    null_length: Option<usize>,
    image_ranks: Vec<usize>,
    null_dims: Vec<usize>,
    stabilization_index: Option<usize>,
}

#[derive(Serialize)]
struct PerturbReport {
    mu: f64,
    unperturbed_lower_bound: f64,
    radius: f64,
    perturbation_norm: f64,
    energy: f64,
    energy_cap: f64,
    predicted_lower_bound: f64,
    frame: FrameReport,
}

fn join<T: ToString>(values: &[T]) -> String {
    values
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

fn frame_csv(report: &FrameReport) -> String {
    format!(
        "lower_bound_A,upper_bound_B,is_frame,is_tight,is_riesz_basis,excess,span_dim\n{},{},{},{},{},{},{}\n",
        report.lower_bound_a,
        report.upper_bound_b,
        report.is_frame,
        report.is_tight,
        report.is_riesz_basis,
        report.excess,
        report.span_dim
    )
}

fn verdict_csv(verdict: &RepresentabilityVerdict) -> String {
    format!(
        "representable,max_shift_residual,kernel_invariance_residual,norm_T,norm_lo,norm_hi,residuals\n{},{},{},{},{},{},{}\n",
        verdict.representable,
        verdict.max_shift_residual,
        verdict.kernel_invariance_residual,
        verdict.norm_t,
        verdict.norm_lo,
        verdict.norm_hi,
        join(&verdict.shift_residuals)
    )
}

fn carleson_csv(report: &framelab::spectral::CarlesonReport) -> String {
    format!(
        "infimum,satisfied,has_duplicates,per_index_products\n{},{},{},{}\n",
        report.infimum,
        report.satisfied,
        report.has_duplicates,
        join(&report.per_index_products)
    )
}

fn spectral_csv(report: &SpectralReport) -> String {
    format!(
        "dim,spectral_radius,depth,closed_vs_expanded_gap,carleson_infimum,lower_bound_A,upper_bound_B,is_frame,excess\n{},{},{},{},{},{},{},{},{}\n",
        report.dim,
        report.spectral_radius,
        report.depth,
        report.closed_vs_expanded_gap,
        report.carleson_infimum,
        report.frame.lower_bound_a,
        report.frame.upper_bound_b,
        report.frame.is_frame,
        report.frame.excess
    )
}

fn opt_str<T: ToString>(value: &Option<T>) -> String {
    value.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn structure_csv(report: &StructureReport) -> String {
    format!(
        "representable,q_T,null_length,image_ranks,null_dims,stabilization_index\n{},{},{},{},{},{}\n",
        report.representable,
        opt_str(&report.q_t),
        opt_str(&report.null_length),
        join(&report.image_ranks),
        join(&report.null_dims),
        opt_str(&report.stabilization_index)
    )
}

fn perturb_csv(report: &PerturbReport) -> String {
    format!(
        "mu,unperturbed_lower_bound,radius,perturbation_norm,energy,energy_cap,predicted_lower_bound,lower_bound_A,upper_bound_B,is_frame\n{},{},{},{},{},{},{},{},{},{}\n",
        report.mu,
        report.unperturbed_lower_bound,
        report.radius,
        report.perturbation_norm,
        report.energy,
        report.energy_cap,
        report.predicted_lower_bound,
        report.frame.lower_bound_a,
        report.frame.upper_bound_b,
        report.frame.is_frame
    )
}

fn trend_csv(rows: &[TrendRow]) -> String {
    let mut text = String::from("d,J,depth,lower_bound,upper_bound\n");
    for row in rows {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            row.d, row.j, row.depth, row.lower_bound, row.upper_bound
        ));
    }
    text
}
