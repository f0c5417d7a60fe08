//! Command-line driver: mesh generation, solves, convergence studies and
//! mesh validation. All outputs are deterministic for identical inputs.

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use hvem::analysis::{
    self, reference, run_h_study, run_hp_study, run_p_study, HFamily, StudyConfig,
};
use hvem::assembly::{assemble, impose_dirichlet, solve, DegreeVector, DirichletMode};
use hvem::geometry::Point;
use hvem::mesh::{
    generate_cartesian, generate_graded_lshape, generate_nonconvex_demo, generate_voronoi_lloyd,
    validate_regularity, GradedFamily, LayerDecomposition, Mesh, RegularityParams,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Serialize, Deserialize, PartialEq, Debug)]
#[command(
    name = "hvem",
    about = "Non-conforming harmonic virtual element method on polygonal meshes",
    after_help = "Thread count for assembly follows RAYON_NUM_THREADS."
)]
struct Cli {
    /// The fully typed run configuration; round-trips losslessly through
    /// its serialized form.
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize, Deserialize, PartialEq, Debug)]
enum Command {
    /// Generate a mesh file.
    MeshGen(MeshGenArgs),
    /// Solve the Dirichlet-Laplace problem on a mesh.
    Solve(SolveArgs),
    /// Run a convergence study and write a CSV.
    Study(StudyArgs),
    /// Check mesh regularity assumptions.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Debug)]
enum Family {
    Cartesian,
    Voronoi,
    GradedA,
    GradedB,
    GradedC,
    Nonconvex,
}

#[derive(Args, Serialize, Deserialize, PartialEq, Debug)]
struct MeshGenArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    out: PathBuf,
    /// Cells per side (cartesian), seeds (voronoi) or layers (graded).
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Grading parameter in (0,1) for the graded families.
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    /// RNG seed for the Voronoi generator.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Lloyd relaxation passes for the Voronoi generator.
    #[arg(long, default_value_t = 30)]
    lloyd: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Debug)]
enum DirichletArg {
    Moments,
    Lobatto,
}

#[derive(Args, Serialize, Deserialize, PartialEq, Debug)]
struct SolveArgs {
    #[arg(long)]
    mesh: PathBuf,
    /// Uniform degree of accuracy (ignored with --hp).
    #[arg(long, default_value_t = 1)]
    p: usize,
    /// Layer-graded degrees from a corner instead of a uniform degree.
    #[arg(long)]
    hp: bool,
    /// Degree growth factor for --hp.
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Corner the layers count from, as "x,y".
    #[arg(long, default_value = "0,0")]
    corner: String,
    /// Boundary datum: u1, u2, u3 or const:<value>.
    #[arg(long)]
    g: String,
    /// How boundary moments are computed.
    #[arg(long, value_enum, default_value_t = DirichletArg::Moments)]
    dirichlet: DirichletArg,
    /// Maximum accepted relative residual of the interior solve.
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Debug)]
enum StudyKind {
    H,
    P,
    Hp,
}

#[derive(Args, Serialize, Deserialize, PartialEq, Debug)]
struct StudyArgs {
    #[arg(long, value_enum)]
    kind: StudyKind,
    /// Reference solution: u1, u2 or u3.
    #[arg(long)]
    u: String,
    #[arg(long, value_enum)]
    family: Family,
    /// Uniform degree for h-studies.
    #[arg(long, default_value_t = 1)]
    p: usize,
    /// Largest degree for p-studies.
    #[arg(long, default_value_t = 10)]
    pmax: usize,
    /// Mesh resolution for p-studies (cells per side or seeds).
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Number of rows (refinement levels or graded meshes).
    #[arg(long, default_value_t = 4)]
    levels: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 30)]
    lloyd: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize, Deserialize, PartialEq, Debug)]
struct ValidateArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    rho1: f64,
    #[arg(long, default_value_t = 0.05)]
    rho2: f64,
    /// Maximum admissible number of edges per element.
    #[arg(long, default_value_t = 16)]
    lambda: usize,
    #[arg(long)]
    check_quasi_uniform: bool,
    #[arg(long, default_value_t = 4.0)]
    rho3: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version requests are not usage errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            // numerical failures exit 2, everything else is a usage error
            let numerical = e
                .downcast_ref::<hvem::Error>()
                .is_some_and(|he| matches!(he, hvem::Error::Numerical(_)));
            ExitCode::from(if numerical { 2 } else { 1 })
        }
    }
}

fn parse_point(s: &str) -> anyhow::Result<Point> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        bail!("expected a point as \"x,y\", got '{s}'");
    }
    Ok(Point::new(parts[0].trim().parse()?, parts[1].trim().parse()?))
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::MeshGen(args) => mesh_gen(args),
        Command::Solve(args) => do_solve(args),
        Command::Study(args) => do_study(args),
        Command::Validate(args) => do_validate(args),
    }
}

fn mesh_gen(args: MeshGenArgs) -> anyhow::Result<ExitCode> {
    let unit = Point::new(0.0, 0.0);
    let mesh = match args.family {
        Family::Cartesian => generate_cartesian(args.n, unit, Point::new(1.0, 1.0))?,
        Family::Voronoi => generate_voronoi_lloyd(
            args.n,
            &analysis::unit_square_polygon(),
            args.lloyd,
            args.seed,
        )?,
        Family::GradedA => generate_graded_lshape(args.n, args.sigma, GradedFamily::A)?.0,
        Family::GradedB => generate_graded_lshape(args.n, args.sigma, GradedFamily::B)?.0,
        Family::GradedC => generate_graded_lshape(args.n, args.sigma, GradedFamily::C)?.0,
        Family::Nonconvex => generate_nonconvex_demo(),
    };
    mesh.write_file(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "wrote {} ({} elements, {} edges, {} boundary)",
        args.out.display(),
        mesh.n_elements(),
        mesh.n_edges(),
        mesh.n_boundary_edges()
    );
    Ok(ExitCode::SUCCESS)
}

fn do_solve(args: SolveArgs) -> anyhow::Result<ExitCode> {
    let mesh = Mesh::read_file(&args.mesh)
        .with_context(|| format!("reading {}", args.mesh.display()))?;
    let reference = reference(&args.g)?;
    let degrees = if args.hp {
        let corner = parse_point(&args.corner)?;
        let layers = LayerDecomposition::from_corner(&mesh, corner)?;
        DegreeVector::graded(&mesh, &layers, args.mu)?
    } else {
        DegreeVector::uniform(&mesh, args.p)?
    };
    let mode = match args.dirichlet {
        DirichletArg::Moments => DirichletMode::ExactMoments,
        DirichletArg::Lobatto => DirichletMode::GaussLobattoInterp,
    };
    let g = {
        let r = reference.clone();
        move |x: Point| r.value(x)
    };
    let bc = impose_dirichlet(&mesh, &degrees, &g, mode, reference.singular_corner);
    let system = assemble(&mesh, &degrees, &bc)?;
    let solution = solve(&system)?;
    if solution.residual > args.tolerance {
        return Err(hvem::Error::Numerical(format!(
            "solver residual {:.3e} above tolerance {:.3e}",
            solution.residual, args.tolerance
        ))
        .into());
    }
    let out = serde_json::json!({
        "dofs": solution.dofs,
        "elem_coeffs": solution.elem_coeffs,
        "p_elem": solution.p_elem,
        "residual": solution.residual,
    });
    std::fs::write(&args.out, serde_json::to_string_pretty(&out)?)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "solved: {} dofs, residual {:.3e}, wrote {}",
        system.n_dofs,
        solution.residual,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn do_study(args: StudyArgs) -> anyhow::Result<ExitCode> {
    let config = StudyConfig {
        rng_seed: args.seed,
        lloyd_iters: args.lloyd,
        ..Default::default()
    };
    let result = match args.kind {
        StudyKind::H => {
            let family = match args.family {
                Family::Cartesian => HFamily::Cartesian,
                Family::Voronoi => HFamily::Voronoi,
                _ => bail!("h-studies run on cartesian or voronoi meshes"),
            };
            run_h_study(&args.u, family, args.p, args.levels, &config)?
        }
        StudyKind::P => {
            let unit = Point::new(0.0, 0.0);
            let (mesh, label) = match args.family {
                Family::Cartesian => (
                    generate_cartesian(args.n, unit, Point::new(1.0, 1.0))?,
                    "cartesian",
                ),
                Family::Voronoi => (
                    generate_voronoi_lloyd(
                        args.n,
                        &analysis::unit_square_polygon(),
                        args.lloyd,
                        args.seed,
                    )?,
                    "voronoi",
                ),
                Family::Nonconvex => (generate_nonconvex_demo(), "nonconvex"),
                _ => bail!("p-studies run on cartesian, voronoi or nonconvex meshes"),
            };
            run_p_study(&args.u, &mesh, label, args.pmax, &config)?
        }
        StudyKind::Hp => {
            let family = match args.family {
                Family::GradedA => GradedFamily::A,
                Family::GradedB => GradedFamily::B,
                Family::GradedC => GradedFamily::C,
                _ => bail!("hp-studies run on the graded families"),
            };
            if args.levels == 0 {
                bail!("hp-studies need at least one level");
            }
            run_hp_study(&args.u, family, args.sigma, args.mu, args.levels - 1, &config)?
        }
    };
    std::fs::write(&args.out, result.to_csv())
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!("wrote {} ({} rows)", args.out.display(), result.rows.len());
    if let Some(fit) = result.h1_fit {
        println!(
            "H1 fit: slope {:.4}, correlation {:.4}",
            fit.slope, fit.correlation
        );
    }
    if let Some(fit) = result.l2_fit {
        println!(
            "L2 fit: slope {:.4}, correlation {:.4}",
            fit.slope, fit.correlation
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn do_validate(args: ValidateArgs) -> anyhow::Result<ExitCode> {
    let mesh = Mesh::read_file(&args.mesh)
        .with_context(|| format!("reading {}", args.mesh.display()))?;
    let params = RegularityParams {
        rho1: args.rho1,
        rho2: args.rho2,
        lambda_max: args.lambda,
        check_quasi_uniform: args.check_quasi_uniform,
        rho3: args.rho3,
    };
    let report = validate_regularity(&mesh, &params);
    let line = |name: &str, pass: bool, value: f64, threshold: String, elem: usize| {
        println!(
            "{name}: {} (measured {value:.6}, {threshold}, worst element {elem})",
            if pass { "pass" } else { "FAIL" }
        );
    };
    line(
        "D1 edge/diameter",
        report.d1.pass,
        report.d1.worst_value,
        format!("required >= {}", params.rho1),
        report.d1.worst_element,
    );
    line(
        "D2 star-shapedness",
        report.d2.pass,
        report.d2.worst_value,
        format!("required >= {}", params.rho2),
        report.d2.worst_element,
    );
    line(
        "D3 edge count",
        report.d3.pass,
        report.d3.worst_value,
        format!("required <= {}", params.lambda_max),
        report.d3.worst_element,
    );
    if let Some(d4) = &report.d4 {
        line(
            "D4 quasi-uniformity",
            d4.pass,
            d4.worst_value,
            format!("required <= {}", params.rho3),
            d4.worst_element,
        );
    }
    Ok(if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
