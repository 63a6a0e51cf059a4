use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arraycode::arrays::{render_ascii, render_pgm, window_from_json};
use arraycode::density::{lower_banach_density, SubsetSpec};
use arraycode::lemmas::{invariance_sweep, window_set, window_trials};
use arraycode::pipeline::{load_run_dir, run, verify_run, write_run_dir, RunConfig};
use arraycode::{Error, Exact, FiniteSubset, Real};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

#[derive(Parser)]
#[command(name = "arraycode", version, about = "Marker sets and inductive array codes on Z^d subshifts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and apply every stage, write the run directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output` in the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Recompute a run directory from its base point and stage states.
    Verify {
        dir: PathBuf,
        /// Where to write the report; defaults to `<dir>/verify.json`.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Brute-force sweeps of the invariance-core and window lemmas.
    Lemma {
        #[arg(long, value_enum)]
        lemma: LemmaKind,
        #[arg(long, default_value_t = 1)]
        f_radius: i64,
        #[arg(long, default_value_t = 2)]
        l: u32,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest box radius searched: 300 for invariance, 20000 for window.
        #[arg(long)]
        max_n: Option<i64>,
        /// Tolerances for the invariance sweep.
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.2,0.1")]
        eps: Vec<f64>,
    },
    /// The `D_{F_n}` table of a subset spec read from JSON.
    Density {
        spec: PathBuf,
        #[arg(long, default_value_t = 32)]
        max_n: i64,
        /// Report rationals instead of floats.
        #[arg(long)]
        exact: bool,
    },
    /// Text or PGM images of a stored window.
    Render {
        window: PathBuf,
        #[arg(long, value_enum, default_value_t = RenderMode::Ascii)]
        mode: RenderMode,
        /// Rows to draw; all rows by default.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        rows: Vec<i32>,
        /// Output file (ascii) or directory (pgm); ascii goes to stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LemmaKind {
    Invariance,
    Window,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum RenderMode {
    Ascii,
    Pgm,
}

const VERIFICATION_FAILED: u8 = 2;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.record()).expect("error record"));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<u8, Error> {
    match cmd {
        Command::Run { config, output } => cmd_run(&config, output),
        Command::Verify { dir, report } => cmd_verify(&dir, report),
        Command::Lemma {
            lemma,
            f_radius,
            l,
            dim,
            trials,
            seed,
            max_n,
            eps,
        } => cmd_lemma(lemma, f_radius, l, dim, trials, seed, max_n, &eps),
        Command::Density { spec, max_n, exact } => cmd_density(&spec, max_n, exact),
        Command::Render { window, mode, rows, out } => cmd_render(&window, mode, &rows, out),
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("{e}");
        }
    }
}

fn code(pass: bool) -> u8 {
    if pass {
        0
    } else {
        VERIFICATION_FAILED
    }
}

fn cmd_run(config: &Path, output: Option<PathBuf>) -> Result<u8, Error> {
    let mut cfg: RunConfig = serde_json::from_str(&read(config)?)?;
    if output.is_some() {
        cfg.output = output;
    }
    let dir = cfg
        .output
        .clone()
        .ok_or_else(|| Error::config("cli::run", "no output directory in the config or on the command line"))?;
    let out = run(&cfg)?;
    write_run_dir(&out, &dir)?;
    emit(&format!("{}run directory: {}\n", out.report.checks.table(), dir.display()));
    Ok(code(out.report.pass))
}

fn cmd_verify(dir: &Path, report: Option<PathBuf>) -> Result<u8, Error> {
    let loaded = load_run_dir(dir)?;
    let rep = verify_run(&loaded)?;
    let path = report.unwrap_or_else(|| dir.join("verify.json"));
    fs::write(&path, serde_json::to_string_pretty(&rep)? + "\n")?;
    emit(&rep.table());
    Ok(code(rep.all_pass()))
}

#[allow(clippy::too_many_arguments)]
fn cmd_lemma(
    lemma: LemmaKind,
    f_radius: i64,
    l: u32,
    dim: usize,
    trials: usize,
    seed: u64,
    max_n: Option<i64>,
    eps: &[f64],
) -> Result<u8, Error> {
    arraycode::Group::new(dim)?;
    if f_radius < 0 {
        return Err(Error::argument("cli::lemma", "--f-radius must be nonnegative"));
    }
    let f = FiniteSubset::ball(dim, f_radius);
    let (report, pass) = match lemma {
        LemmaKind::Invariance => {
            let sweep = invariance_sweep::<Real>(&f, eps, max_n.unwrap_or(300))?;
            let pass = sweep.counterexamples.is_empty();
            (json!({ "lemma": "invariance", "f_radius": f_radius, "eps": eps, "sweep": sweep }), pass)
        }
        LemmaKind::Window => {
            let cert = window_set(&f, l, max_n.unwrap_or(20_000))?;
            let verified = cert.verify();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sweep = window_trials(&cert, trials, 4 * cert.h.radius().max(1), &mut rng)?;
            let pass = verified.is_ok() && sweep.failures.is_empty();
            (
                json!({
                    "lemma": "window",
                    "f_radius": f_radius,
                    "l": l,
                    "dim": dim,
                    "h_radius": cert.h.radius(),
                    "h_size": cert.h.len(),
                    "core_size": cert.core.len(),
                    "certificate": cert,
                    "verified": verified.err().unwrap_or_else(|| "ok".into()),
                    "trials": sweep,
                }),
                pass,
            )
        }
    };
    emit(&(serde_json::to_string_pretty(&report)? + "\n"));
    Ok(code(pass))
}

fn cmd_density(spec: &Path, max_n: i64, exact: bool) -> Result<u8, Error> {
    let spec: SubsetSpec = serde_json::from_str(&read(spec)?)?;
    spec.validate()?;
    let text = if exact {
        serde_json::to_string_pretty(&lower_banach_density::<Exact>(&spec, max_n)?)?
    } else {
        serde_json::to_string_pretty(&lower_banach_density::<Real>(&spec, max_n)?)?
    };
    emit(&(text + "\n"));
    Ok(0)
}

fn cmd_render(window: &Path, mode: RenderMode, rows: &[i32], out: Option<PathBuf>) -> Result<u8, Error> {
    let w = window_from_json(&read(window)?)?;
    let k = w.band() as i32;
    if let Some(bad) = rows.iter().find(|r| r.abs() > k) {
        return Err(Error::argument("cli::render", format!("row {bad} outside band {k}")));
    }
    match mode {
        RenderMode::Ascii => {
            let text = render_ascii(&w, (!rows.is_empty()).then_some(rows))?;
            match out {
                Some(p) => fs::write(p, text)?,
                None => emit(&text),
            }
        }
        RenderMode::Pgm => {
            let dir = out.ok_or_else(|| Error::argument("cli::render", "pgm mode needs --out DIR"))?;
            let all: Vec<i32> = (-k..=k).collect();
            let rows = if rows.is_empty() { &all[..] } else { rows };
            fs::create_dir_all(&dir)?;
            for &row in rows {
                let p = dir.join(format!("row_{row}.pgm"));
                fs::write(&p, render_pgm(&w, row)?)?;
                println!("{}", p.display());
            }
        }
    }
    Ok(0)
}
