use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hypdel::cli_io::commands::{read_file, write_file};
use hypdel::cli_io::{cmd_inner, cmd_optimize, cmd_render, write_mesh, write_state, InitSpec, RunConfig, SolverState};
use hypdel::energy::EnergyVariant;
use hypdel::error::{Error, Result};
use hypdel::fixtures;
use hypdel::harmonic::EdgeWeights;

/// Discrete harmonic maps on hyperbolic surfaces and weighted Delaunay
/// certificates.
#[derive(Parser)]
#[command(name = "hypdel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the harmonic map at a fixed structure.
    Inner(RunArgs),
    /// Optimize the structure and certify the Delaunay decomposition.
    Optimize(RunArgs),
    /// Draw a stored state as SVG.
    Render(RunArgs),
    /// Write the bundled meshes and Delaunay states into a directory.
    Fixtures {
        #[arg(long, default_value = "fixtures")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long)]
    state: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on inner sweeps.
    #[arg(long)]
    max_iter: Option<usize>,
    /// `default` or `random`.
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    out_state: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(m) = &self.mesh {
            cfg.mesh = Some(m.clone());
        }
        if let Some(s) = &self.state {
            cfg.state = Some(s.clone());
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.max_iter {
            cfg.max_inner = n;
        }
        match self.init.as_deref() {
            None => {}
            Some("default") => cfg.init = InitSpec::Default,
            Some("random") => cfg.init = InitSpec::Random,
            Some(other) => return Err(Error::Domain(format!("--init: expected default or random, found {other:?}"))),
        }
        cfg.out_report = self.report.clone().or(cfg.out_report);
        cfg.out_state = self.out_state.clone().or(cfg.out_state);
        cfg.out_svg = self.svg.clone().or(cfg.out_svg);
        Ok(cfg)
    }
}

fn write_fixtures(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    let meshes = [
        ("standard_octagon.mesh", fixtures::standard_octagon()),
        ("octagon_with_center.mesh", fixtures::octagon_with_center()),
        ("fan.mesh", fixtures::one_vertex_triangulation()),
    ];
    for (name, cx) in meshes {
        write_file(&dir.join(name), &write_mesh(&cx))?;
    }
    for (name, fx) in [
        ("octagon_delaunay.state", fixtures::delaunay_octagon()),
        ("fan_delaunay.state", fixtures::delaunay_fan()),
    ] {
        let c = EdgeWeights::uniform(fx.surface.complex.n_edges(), 1.0);
        let st = SolverState::from_surface(&fx.surface, &EnergyVariant::Quadratic, &fx.positions, &c, Some(fx.delta));
        write_file(&dir.join(name), &write_state(&st))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Inner(a) => {
            let report = cmd_inner(&a.config()?)?;
            print!("{report}");
        }
        Command::Optimize(a) => {
            let out = cmd_optimize(&a.config()?)?;
            print!("{}", out.report);
        }
        Command::Render(a) => {
            let cfg = a.config()?;
            if let Some(p) = &cfg.state {
                // a readable but empty file is an input error too
                if read_file(p)?.trim().is_empty() {
                    return Err(Error::Io {
                        path: p.display().to_string(),
                        message: "empty state file".into(),
                    });
                }
            }
            let svg = cmd_render(&cfg)?;
            if cfg.out_svg.is_none() {
                print!("{svg}");
            }
        }
        Command::Fixtures { out } => write_fixtures(&out)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
