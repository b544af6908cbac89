use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hjmoment::harness::{emit, interior_error, run_study, solve_level, to_csv, to_text, Format, StudyPlan};
use hjmoment::operators::BoundaryOperatorKind;
use hjmoment::problems::{verify_manufactured, Problem, REGISTRY};
use hjmoment::schemes::{check_gamma, SchemeConfig, SchemeKind};
use hjmoment::solver::SolverConfig;
use hjmoment::Error;

/// Directory used for output files when `--out` is not given.
const OUT_DIR_VAR: &str = "HJMOMENT_OUT_DIR";

#[derive(Parser)]
#[command(name = "hjmoment", version, about = "Finite-difference solvers for stationary Hamilton-Jacobi equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem on one mesh.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Nodes per axis.
        #[arg(long)]
        n: usize,
    },
    /// Run a mesh-refinement study and tabulate errors and orders.
    Study {
        #[command(flatten)]
        common: Common,
        /// Comma-separated nodes per axis, strictly increasing.
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        /// Solve levels concurrently.
        #[arg(long)]
        parallel: bool,
        /// Leave the seconds column empty so reruns are byte-identical.
        #[arg(long)]
        no_timing: bool,
    },
    /// Check the manufactured solutions of every registry problem.
    Verify {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    problem: String,
    #[arg(long, value_enum, default_value = "lf")]
    scheme: SchemeArg,
    #[arg(long, value_enum, default_value = "lin")]
    bc: BcArg,
    /// Default 10 in 1D, 5 in 2D.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Band half-width multiplier for the modified scheme.
    #[arg(long, default_value_t = 10.0)]
    c: f64,
    /// Max-norm residual tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Lf,
    Ho,
    Mod,
}

#[derive(Clone, Copy, ValueEnum)]
enum BcArg {
    Lin,
    Quad,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Text,
}

enum Failure {
    Usage(Error),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::UnknownProblem(_) | Error::InvalidGrid(_) | Error::InvalidDomain(_) => {
                Failure::Usage(e)
            }
            other => Failure::Run(other.to_string()),
        }
    }
}

impl Common {
    fn kind(&self) -> SchemeKind {
        match self.scheme {
            SchemeArg::Lf => SchemeKind::LaxFriedrichs,
            SchemeArg::Ho => SchemeKind::HighOrder,
            SchemeArg::Mod => SchemeKind::Modified,
        }
    }

    fn configs(&self, problem: &Problem) -> Result<(SchemeConfig, SolverConfig), Failure> {
        let mut scheme = SchemeConfig::for_dim(problem.dim());
        if let Some(g) = self.gamma {
            scheme.gamma = g;
        }
        scheme.p = self.p;
        scheme.beta = self.beta;
        scheme.cutoff_c = self.c;
        scheme.bc = match self.bc {
            BcArg::Lin => BoundaryOperatorKind::LinearExtension,
            BcArg::Quad => BoundaryOperatorKind::QuadraticExtension,
        };
        scheme.validate()?;
        let solver = SolverConfig {
            tol: self.tol,
            ..SolverConfig::default()
        };
        solver.validate()?;
        Ok((scheme, solver))
    }

    fn out_path(&self, default_name: &str) -> Option<PathBuf> {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_VAR).map(|d| PathBuf::from(d).join(default_name)))
    }
}

fn run_solve(common: &Common, n: usize) -> Result<(), Failure> {
    let problem = Problem::registry(&common.problem)?;
    let (scheme, solver) = common.configs(&problem)?;
    check_gamma(&problem, &scheme, 4.0, (-2.0, 2.0));
    let kind = common.kind();
    let sol = solve_level(&problem, n, kind, &scheme, &solver)?;
    let d = sol.grid.dim();
    println!("problem    {}", problem.name());
    println!("scheme     {kind}");
    println!("J          {n}");
    println!("h          {:.6e}", sol.grid.h());
    println!("converged  {}", sol.target.converged);
    println!("residual   {:.3e}", sol.target.residual);
    println!("iterations {}", sol.target.iterations);
    println!("method     {}", sol.target.method);
    if let Some((e, x)) = interior_error(&problem, &sol.grid, &sol.target.solution) {
        println!("error      {e:.6e} at {:?}", &x[..d]);
    }
    if let Some(report) = &sol.cutoff {
        println!("cutoff     {}", if report.active() { "yes" } else { "no" });
    }
    if let Some(path) = common.out_path(&format!("{}-{}-{n}.csv", problem.name(), kind)) {
        let mut body = String::new();
        let axes = ["x", "y", "z"];
        let _ = writeln!(body, "{},u,exact", axes[..d].join(","));
        for (k, idx) in sol.grid.indices().enumerate() {
            let x = sol.grid.coords(&idx);
            let coords: Vec<String> = x[..d].iter().map(|c| format!("{c:.12e}")).collect();
            let exact = problem
                .exact_value(&x[..d])
                .map(|e| format!("{e:.12e}"))
                .unwrap_or_default();
            let _ = writeln!(body, "{},{:.12e},{exact}", coords.join(","), sol.target.solution[k]);
        }
        std::fs::write(&path, body).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))?;
    }
    if !sol.target.converged || !sol.lf.converged {
        let which = if sol.lf.converged { &sol.target } else { &sol.lf };
        return Err(Failure::Run(format!(
            "did not converge: {}",
            which.diagnostic.clone().unwrap_or_default()
        )));
    }
    Ok(())
}

fn run_study_cmd(common: &Common, levels: &[usize], format: FormatArg, parallel: bool, no_timing: bool) -> Result<(), Failure> {
    let problem = Problem::registry(&common.problem)?;
    let (scheme, solver) = common.configs(&problem)?;
    check_gamma(&problem, &scheme, 4.0, (-2.0, 2.0));
    let plan = StudyPlan {
        problem: common.problem.clone(),
        kind: common.kind(),
        levels: levels.to_vec(),
        scheme,
        solver,
        parallel,
        timing: !no_timing,
    };
    let report = run_study(&plan)?;
    let format = match format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Text => Format::Text,
    };
    let ext = if format == Format::Csv { "csv" } else { "txt" };
    match common.out_path(&format!("{}-{}.{ext}", plan.problem, plan.kind)) {
        Some(path) => emit(&report, format, &path).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))?,
        None => match format {
            Format::Csv => print!("{}", to_csv(&report)),
            Format::Text => print!("{}", to_text(&report)),
        },
    }
    match report.failure {
        Some(f) => Err(Failure::Run(f)),
        None => Ok(()),
    }
}

fn run_verify(samples: usize, seed: u64) -> Result<(), Failure> {
    let mut worst: f64 = 0.0;
    for name in REGISTRY {
        let p = Problem::registry(name)?;
        let defect = verify_manufactured(&p, samples, seed)?;
        println!("{name:8} {defect:.3e}");
        worst = worst.max(defect);
    }
    if worst <= 1e-12 {
        Ok(())
    } else {
        Err(Failure::Run(format!("largest defect {worst:.3e} exceeds 1e-12")))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve { common, n } => run_solve(common, *n),
        Command::Study {
            common,
            levels,
            format,
            parallel,
            no_timing,
        } => run_study_cmd(common, levels, *format, *parallel, *no_timing),
        Command::Verify { samples, seed } => run_verify(*samples, *seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
