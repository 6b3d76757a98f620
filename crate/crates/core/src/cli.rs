//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{
    convexity_scan, hard_axis, locus_constant_induction, trace_contour, ConvexityOptions, LegendreGrid, Region,
};
use crate::config::{load_model, LoadedModel, Model};
use crate::error::{Error, Result};
use crate::material_law::Potential;
use crate::Frame;

#[derive(Debug, Parser)]
#[command(name = "maganiso", version, about = "Implicit anisotropic (co)energy models for electrical steel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Model configuration (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Write results here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the (co)energy at a point.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        point: [f64; 2],
    },
    /// Evaluate the material law (gradient) at a point.
    Grad {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        point: [f64; 2],
    },
    /// Evaluate the differential tensor (Hessian) at a point as `t11,t12,t22`.
    Hess {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        point: [f64; 2],
    },
    /// Trace contours of equal (co)energy.
    Contour {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<f64>,
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
    /// Field locus for constant induction magnitude.
    Locus {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bmag: f64,
        #[arg(long, default_value_t = 128)]
        samples: usize,
    },
    /// Direction of hard magnetization in [0, π/2].
    HardAxis {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bmag: f64,
        #[arg(long, default_value_t = 91)]
        samples: usize,
    },
    /// Hessian, midpoint and contour convexity diagnostics over a box.
    Convexity {
        #[command(flatten)]
        common: Common,
        /// `x1min,x1max,x2min,x2max`.
        #[arg(long, value_parser = parse_region, allow_hyphen_values = true, default_value = "-5,5,-5,5")]
        region: Region,
        #[arg(long, default_value_t = 41)]
        grid: usize,
        #[arg(long, default_value_t = 10_000)]
        triples: usize,
    },
    /// Sample the level residual to detect non-unique solutions.
    CheckUniqueness {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        point: [f64; 2],
        /// `lo,hi`; defaults to a range around the solution bracket.
        #[arg(long, value_parser = parse_pair)]
        range: Option<[f64; 2]>,
        #[arg(long, default_value_t = 512)]
        samples: usize,
    },
    /// Compare a coenergy model with the brute-force conjugate of its dual energy model.
    ConjugateCheck {
        #[command(flatten)]
        common: Common,
        /// The dual model (the conjugate frame of `--model`).
        #[arg(long)]
        dual: PathBuf,
        #[arg(long, default_value_t = 601)]
        resolution: usize,
        /// Test fields cover `[-extent, extent]²` on a 9×9 grid.
        #[arg(long, default_value_t = 2.0)]
        extent: f64,
    },
}

fn parse_pair(s: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected two comma-separated numbers, got `{s}`"));
    }
    let parse = |p: &str| p.parse::<f64>().map_err(|e| format!("`{p}`: {e}"));
    Ok([parse(parts[0])?, parse(parts[1])?])
}

fn parse_region(s: &str) -> std::result::Result<Region, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    if v.len() != 4 || !(v[0] < v[1]) || !(v[2] < v[3]) {
        return Err(format!("expected `x1min,x1max,x2min,x2max` with min < max, got `{s}`"));
    }
    Ok(Region { lo: [v[0], v[2]], hi: [v[1], v[3]] })
}

/// Shortest round-trip text of `v` after rounding to 15 significant digits.
pub fn format_number(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let rounded: f64 = format!("{v:.14e}").parse().unwrap_or(v);
    format!("{rounded:?}")
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(|e| Error::Config(e.to_string()))
}

fn header(subcommand: &str, loaded: &LoadedModel) -> String {
    format!("# maganiso {subcommand} {}\n", loaded.hash)
}

#[derive(Serialize)]
struct ConjugateCheckReport {
    points: usize,
    grid_spacing: f64,
    max_deviation: f64,
    /// Largest deviation divided by its allowance `5·spacing·|h|`.
    max_tolerance_ratio: f64,
    pass: bool,
}

fn conjugate_check(model: &Model, dual: &Model, resolution: usize, extent: f64) -> Result<ConjugateCheckReport> {
    let (coenergy, energy): (&dyn Potential, &dyn Potential) = match (model.frame(), dual.frame()) {
        (Frame::Coenergy, Frame::Energy) => (model, dual),
        (Frame::Energy, Frame::Coenergy) => (dual, model),
        _ => return Err(Error::InvalidArgument("--model and --dual must be in opposite frames".into())),
    };
    let fields: Vec<[f64; 2]> = (0..81)
        .map(|k| {
            let t = |i: usize| -extent + 2.0 * extent * i as f64 / 8.0;
            [t(k / 9), t(k % 9)]
        })
        .collect();
    let mut reach: f64 = 0.0;
    for h in &fields {
        let b = coenergy.gradient(*h)?;
        reach = reach.max(b[0].abs()).max(b[1].abs());
    }
    let grid = LegendreGrid::sample(energy, Region::square(2.5 * reach), resolution)?;
    let spacing = grid.spacing();
    let mut max_deviation: f64 = 0.0;
    let mut max_ratio: f64 = 0.0;
    for h in &fields {
        let deviation = (grid.conjugate(*h)? - coenergy.value(*h)?).abs();
        max_deviation = max_deviation.max(deviation);
        let allowance = 5.0 * spacing * h[0].hypot(h[1]);
        let ratio = if allowance > 0.0 { deviation / allowance } else if deviation == 0.0 { 0.0 } else { f64::INFINITY };
        max_ratio = max_ratio.max(ratio);
    }
    Ok(ConjugateCheckReport {
        points: fields.len(),
        grid_spacing: spacing,
        max_deviation,
        max_tolerance_ratio: max_ratio,
        pass: max_ratio <= 1.0,
    })
}

fn execute(command: &Command) -> Result<(String, Option<PathBuf>)> {
    let out = |common: &Common, text: String| Ok((text, common.output.clone()));
    match command {
        Command::Eval { common, point } => {
            let m = load_model(&common.model)?;
            out(common, format!("{}\n", format_number(m.model.value(*point)?)))
        }
        Command::Grad { common, point } => {
            let m = load_model(&common.model)?;
            let g = m.model.gradient(*point)?;
            out(common, format!("{},{}\n", format_number(g[0]), format_number(g[1])))
        }
        Command::Hess { common, point } => {
            let m = load_model(&common.model)?;
            let h = m.model.hessian(*point)?;
            out(common, format!("{},{},{}\n", format_number(h.t11), format_number(h.t12), format_number(h.t22)))
        }
        Command::Contour { common, levels, samples } => {
            let m = load_model(&common.model)?;
            let mut text = header("contour", &m);
            text.push_str("theta,x1,x2\n");
            for &level in levels {
                let c = trace_contour(&m.model, level, *samples)?;
                text.push_str(&format!("# level {level:?}\n"));
                text.push_str(c.to_csv().trim_start_matches("theta,x1,x2\n"));
            }
            out(common, text)
        }
        Command::Locus { common, bmag, samples } => {
            let m = load_model(&common.model)?;
            let l = locus_constant_induction(&m.model, *bmag, *samples)?;
            out(common, header("locus", &m) + &l.to_csv())
        }
        Command::HardAxis { common, bmag, samples } => {
            let m = load_model(&common.model)?;
            let h = hard_axis(&m.model, *bmag, *samples)?;
            out(common, format!("{}\n", format_number(h.angle)))
        }
        Command::Convexity { common, region, grid, triples } => {
            let m = load_model(&common.model)?;
            let opts = ConvexityOptions { grid: *grid, triples: *triples, ..ConvexityOptions::default() };
            out(common, json(&convexity_scan(&m.model, *region, &opts)?)?)
        }
        Command::CheckUniqueness { common, point, range, samples } => {
            let m = load_model(&common.model)?;
            let Model::Implicit(im) = &m.model else {
                return Err(Error::InvalidArgument("check-uniqueness needs an implicit model".into()));
            };
            let range = match range {
                Some(r) if r[0] > 0.0 && r[1] > r[0] => (r[0], r[1]),
                Some(r) => return Err(Error::InvalidArgument(format!("invalid level range {r:?}"))),
                None => im.default_level_range(*point)?,
            };
            out(common, json(&im.check_uniqueness(*point, range, *samples))?)
        }
        Command::ConjugateCheck { common, dual, resolution, extent } => {
            let m = load_model(&common.model)?;
            let d = load_model(dual)?;
            let report = conjugate_check(&m.model, &d.model, *resolution, *extent)?;
            out(common, json(&report)?)
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
            } else {
                let _ = write!(stdout, "{rendered}");
            }
            return code;
        }
    };
    match execute(&cli.command) {
        Ok((text, None)) => {
            let _ = stdout.write_all(text.as_bytes());
            0
        }
        Ok((text, Some(path))) => match std::fs::write(&path, text) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(stderr, "error: {}: {e}", path.display());
                1
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

/// Applies `MAGANISO_THREADS` to the global thread pool.
pub fn configure_threads() -> std::result::Result<(), String> {
    match std::env::var("MAGANISO_THREADS") {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| format!("MAGANISO_THREADS must be a positive integer, got `{v}`"))?;
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
        }
        Err(_) => Ok(()),
    }
}
