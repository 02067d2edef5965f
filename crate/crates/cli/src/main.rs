//! `nlbc`: solves, parameter studies and self-checks for the exterior
//! Helmholtz solver with a nonlocal truncation condition.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nlbc_core::driver::{
    greens_identity_check, preconditioner_name, run_convergence_study, run_domain_study, run_iteration_study,
    solve_problem, write_csv, BoundaryCondition, DriverError, Geometry, NonlocalApply, ProblemSpec, StudyRow,
    DOMAIN_STUDY_SIDES, GREENS_TOLERANCE,
};
use nlbc_core::kernels::{finite_difference_check, KernelSample};
use nlbc_core::krylov::PreconditionerKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KERNEL_TOLERANCE: f64 = 1e-6;

#[derive(Parser, Debug)]
#[command(name = "nlbc", version, about = "Exterior Helmholtz solver with an exact nonlocal boundary condition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one problem and print its error row.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Uniform refinement of the chosen geometry.
    StudyConvergence {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Number of refinement levels, coarsest first.
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// GMRES iteration counts over wave numbers, preconditioners and levels.
    StudyIterations {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 1.0, 5.0, 10.0])]
        kappas: Vec<f64>,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![PcArg::Direct, PcArg::None])]
        pcs: Vec<PcArg>,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Square truncation boundaries of varying side around the unit disc.
    StudyDomain {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Side lengths of the square.
        #[arg(long, value_delimiter = ',', default_values_t = DOMAIN_STUDY_SIDES.to_vec())]
        sides: Vec<f64>,
        /// Write the generated meshes here and solve on the files read back.
        #[arg(long)]
        mesh_dir: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Reproduce the manufactured solution inside an annulus from its traces.
    CheckGreens {
        /// Only the annulus is supported.
        #[arg(long, value_enum, default_value_t = GeometryArg::Annulus)]
        geometry: GeometryArg,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, default_value_t = 256)]
        n_angular: usize,
        /// Gauss points per facet.
        #[arg(long, default_value_t = 16)]
        q: usize,
    },
    /// Compare the kernels with finite differences at random configurations.
    CheckKernels {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Central difference step.
        #[arg(long, default_value = "1e-6")]
        step: f64,
    },
}

#[derive(Args, Debug, Clone)]
struct ProblemArgs {
    #[arg(long, value_enum, default_value_t = GeometryArg::Annulus)]
    geometry: GeometryArg,
    /// Annulus inner radius.
    #[arg(long, default_value_t = 1.0)]
    r_inner: f64,
    /// Annulus outer radius.
    #[arg(long, default_value_t = 3.0)]
    r_outer: f64,
    #[arg(long, default_value_t = 8)]
    n_radial: usize,
    #[arg(long, default_value_t = 32)]
    n_angular: usize,
    /// Half side of the square hole of the frame.
    #[arg(long, default_value_t = 1.0)]
    a_half: f64,
    /// Half side of the outer square of the frame.
    #[arg(long, default_value_t = 2.0)]
    b_half: f64,
    /// Cells per side of the frame grid.
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Outer side of the square with a circular hole.
    #[arg(long, default_value_t = 3.0)]
    side: f64,
    /// Radius of the circular hole.
    #[arg(long, default_value_t = 1.0)]
    hole_radius: f64,
    /// Target mesh size for the square with a hole.
    #[arg(long, default_value_t = 0.1)]
    h: f64,
    /// MSH 2.2 ASCII file, for `--geometry gmsh`.
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 1)]
    degree: usize,
    #[arg(long, value_enum, default_value_t = BcArg::Nonlocal)]
    bc: BcArg,
    #[arg(long, value_enum, default_value_t = PcArg::Direct)]
    pc: PcArg,
    #[arg(long, default_value = "1e-12")]
    rtol: f64,
    #[arg(long, default_value_t = 200)]
    restart: usize,
    #[arg(long, default_value_t = 10_000)]
    max_iterations: usize,
    /// Gauss points per facet for the layer potentials.
    #[arg(long, default_value_t = 8)]
    q: usize,
    #[arg(long, value_enum, default_value_t = ApplyArg::Assembled)]
    nonlocal_apply: ApplyArg,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// CSV destination; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Record wall times (otherwise written as zero, keeping output reproducible).
    #[arg(long)]
    timing: bool,
    /// Worker threads for independent runs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum GeometryArg {
    Annulus,
    SquareFrame,
    SquareHole,
    Gmsh,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum BcArg {
    Nonlocal,
    Transmission,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum PcArg {
    None,
    Ilu0,
    Direct,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum ApplyArg {
    Assembled,
    Cached,
    MatrixFree,
}

impl From<PcArg> for PreconditionerKind {
    fn from(pc: PcArg) -> Self {
        match pc {
            PcArg::None => PreconditionerKind::Identity,
            PcArg::Ilu0 => PreconditionerKind::Ilu0,
            PcArg::Direct => PreconditionerKind::Direct,
        }
    }
}

impl ProblemArgs {
    fn spec(&self) -> Result<ProblemSpec, DriverError> {
        let geometry = match self.geometry {
            GeometryArg::Annulus => Geometry::Annulus {
                r_inner: self.r_inner,
                r_outer: self.r_outer,
                n_radial: self.n_radial,
                n_angular: self.n_angular,
            },
            GeometryArg::SquareFrame => Geometry::SquareFrame { a_half: self.a_half, b_half: self.b_half, n: self.n },
            GeometryArg::SquareHole => {
                Geometry::SquareWithHole { half_side: 0.5 * self.side, radius: self.hole_radius, target_h: self.h }
            }
            GeometryArg::Gmsh => match &self.mesh {
                Some(path) => Geometry::Gmsh(path.clone()),
                None => return Err(DriverError::InvalidSpec("--geometry gmsh needs --mesh".into())),
            },
        };
        let spec = ProblemSpec {
            kappa: self.kappa,
            degree: self.degree,
            bc: match self.bc {
                BcArg::Nonlocal => BoundaryCondition::Nonlocal,
                BcArg::Transmission => BoundaryCondition::Transmission,
            },
            pc: self.pc.into(),
            rtol: self.rtol,
            restart: self.restart,
            max_iterations: self.max_iterations,
            points_per_facet: self.q,
            nonlocal_apply: match self.nonlocal_apply {
                ApplyArg::Assembled => NonlocalApply::AssembledBlock,
                ApplyArg::Cached => NonlocalApply::CachedKernel,
                ApplyArg::MatrixFree => NonlocalApply::MatrixFree,
            },
            ..ProblemSpec::new(geometry)
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Exit status for a failure: 2 when the input was at fault, 1 otherwise.
fn failure_code(err: &DriverError) -> u8 {
    match err {
        DriverError::InvalidSpec(_) | DriverError::Mesh(_) | DriverError::Gmsh { .. } => 2,
        DriverError::Fem(_) => 2,
        DriverError::Io { .. } => 2,
        _ => 1,
    }
}

fn fail(err: &DriverError) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(failure_code(err))
}

/// Writes the CSV to `--output` (summary on stdout) or to stdout (summary on stderr).
fn emit(rows: &[StudyRow], output: &OutputArgs) -> ExitCode {
    let written = match &output.output {
        Some(path) => File::create(path)
            .map_err(|source| DriverError::Io { path: path.display().to_string(), source })
            .and_then(|f| write_csv(io::BufWriter::new(f), rows, output.timing)),
        None => write_csv(io::stdout().lock(), rows, output.timing),
    };
    if let Err(err) = written {
        return fail(&err);
    }
    let mut summary: Box<dyn Write> =
        if output.output.is_some() { Box::new(io::stdout().lock()) } else { Box::new(io::stderr().lock()) };
    let mut status = 0u8;
    for row in rows {
        let spec = &row.spec;
        let line = match &row.outcome {
            Ok(r) => {
                if !r.converged {
                    status = status.max(1);
                }
                format!(
                    "kappa {:<5} p{} {:<12} pc {:<6} h {:.4} dofs {:>7}  L2 {:.3e}  H1 {:.3e}  its {:>4}{}",
                    r.kappa,
                    r.degree,
                    r.bc.name(),
                    preconditioner_name(r.pc),
                    r.h,
                    r.ndofs,
                    r.rel_l2_error,
                    r.rel_h1_error,
                    r.iterations,
                    if r.converged { "" } else { "  NOT CONVERGED" },
                )
            }
            Err(err) => {
                status = status.max(failure_code(err).min(1));
                format!("kappa {} p{} {}: failed: {err}", spec.kappa, spec.degree, spec.bc.name())
            }
        };
        let _ = writeln!(summary, "{line}");
    }
    ExitCode::from(status)
}

fn run_study(result: Result<Vec<StudyRow>, DriverError>, output: &OutputArgs) -> ExitCode {
    match result {
        Ok(rows) => emit(&rows, output),
        Err(err) => fail(&err),
    }
}

fn check_kernels(seed: u64, count: usize, step: f64) -> ExitCode {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = std::f64::consts::TAU;
    let unit = |a: f64| [a.cos(), a.sin()];
    // targets on the truncation side, sources near the scatterer: always separated
    let samples: Vec<KernelSample> = (0..count)
        .map(|_| {
            let rx = rng.gen_range(2.0..4.0);
            let ry = rng.gen_range(0.5..1.5);
            KernelSample {
                x: unit(rng.gen_range(0.0..tau)).map(|c| rx * c),
                y: unit(rng.gen_range(0.0..tau)).map(|c| ry * c),
                n_x: unit(rng.gen_range(0.0..tau)),
                n_y: unit(rng.gen_range(0.0..tau)),
                kappa: rng.gen_range(0.1..10.0),
            }
        })
        .collect();
    match finite_difference_check(&samples, step) {
        Ok(dev) => {
            println!("samples {count}  seed {seed}  step {step:e}");
            println!("K        max deviation {:.3e}", dev.k);
            println!("dK/dn_y  max deviation {:.3e}", dev.dk_dny);
            println!("K~       max deviation {:.3e}", dev.ktilde);
            println!("rhs      max deviation {:.3e}", dev.rhs);
            let ok = dev.max() <= KERNEL_TOLERANCE;
            println!("{} (tolerance {KERNEL_TOLERANCE:e})", if ok { "PASS" } else { "FAIL" });
            ExitCode::from(if ok { 0 } else { 1 })
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn check_greens(geometry: GeometryArg, kappa: f64, n_angular: usize, q: usize) -> ExitCode {
    if geometry != GeometryArg::Annulus {
        return fail(&DriverError::InvalidSpec("check-greens supports only --geometry annulus".into()));
    }
    match greens_identity_check(kappa, n_angular, q) {
        Ok(check) => {
            for (p, e) in check.probes.iter().zip(&check.errors) {
                println!("probe ({:+.4}, {:+.4})  error {e:.3e}", p[0], p[1]);
            }
            let max = check.max_error();
            let ok = max <= GREENS_TOLERANCE;
            println!("max error {max:.3e}: {} (tolerance {GREENS_TOLERANCE:e})", if ok { "PASS" } else { "FAIL" });
            ExitCode::from(if ok { 0 } else { 1 })
        }
        Err(err) => fail(&err),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve { problem, output } => {
            let spec = match problem.spec() {
                Ok(s) => s,
                Err(err) => return fail(&err),
            };
            let outcome = solve_problem(&spec).map(|s| s.row);
            if let Err(err) = &outcome {
                return fail(err);
            }
            emit(&[StudyRow { spec, outcome }], &output)
        }
        Command::StudyConvergence { problem, levels, output } => run_study(
            problem.spec().and_then(|base| run_convergence_study(&base, levels, output.jobs)),
            &output,
        ),
        Command::StudyIterations { problem, kappas, pcs, levels, output } => {
            let pcs: Vec<PreconditionerKind> = pcs.into_iter().map(Into::into).collect();
            run_study(
                problem.spec().and_then(|base| run_iteration_study(&base, &kappas, &pcs, levels, output.jobs)),
                &output,
            )
        }
        Command::StudyDomain { problem, sides, mesh_dir, output } => {
            let target_h = problem.h;
            run_study(
                problem.spec().and_then(|base| {
                    run_domain_study(&base, &sides, target_h, mesh_dir.as_deref().map(Path::new), output.jobs)
                }),
                &output,
            )
        }
        Command::CheckGreens { geometry, kappa, n_angular, q } => check_greens(geometry, kappa, n_angular, q),
        Command::CheckKernels { seed, samples, step } => check_kernels(seed, samples, step),
    }
}
