use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pmvlc::channel::{
    apply_blockage, build_channel, fixture_h02, fixture_h06_blocked, GridLayout, LambertianParams, RoomGeometry,
};
use pmvlc::scenario::{codebook_report, preset_names, Prepared, Scenario};

#[derive(Debug, Parser)]
#[command(name = "pmvlc", version, about = "Permutation-modulation VLC link simulator")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Master seed, overriding the scenario.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for CSV output.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads for the Monte Carlo pool.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Bit errors collected per SNR point, overriding the scenario.
    #[arg(long, global = true)]
    errors_target: Option<u64>,
    /// Maximum blocks per SNR point, overriding the scenario.
    #[arg(long, global = true)]
    block_cap: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Class sizes and rates of a combined codebook.
    Codebook {
        #[arg(long, default_value_t = 4)]
        len: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [1usize])]
        weights: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        levels: usize,
        /// Print every entry.
        #[arg(long)]
        list: bool,
    },
    /// Print a channel matrix.
    Channel {
        /// `h02` or `h06-blocked`; otherwise the grid geometry is used.
        #[arg(long)]
        fixture: Option<String>,
        #[arg(long, default_value_t = GridLayout::default().tx_spacing)]
        tx_spacing: f64,
        #[arg(long, default_value_t = GridLayout::default().rx_spacing)]
        rx_spacing: f64,
        #[arg(long, default_value_t = GridLayout::default().height)]
        height: f64,
        #[arg(long, default_value_t = 0.0)]
        rx_offset: f64,
        /// Links to remove as `led:pd`, 1-based.
        #[arg(long, value_delimiter = ',')]
        block: Vec<String>,
    },
    /// Union bounds of a scenario file.
    Bound { scenario: PathBuf },
    /// Run a scenario file.
    Simulate { scenario: PathBuf },
    /// Run a shipped preset; `list` prints the names.
    Preset { name: String },
}

enum Failure {
    Config(String),
    Runtime(String),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn config<E: ToString>(e: E) -> Failure {
    Failure::Config(e.to_string())
}

fn runtime<E: ToString>(e: E) -> Failure {
    Failure::Runtime(e.to_string())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    match &cli.command {
        Command::Codebook { len, weights, levels, list } => {
            let r = codebook_report(*len, weights, *levels).map_err(config)?;
            println!("L = {}, M = {}", r.len, r.levels);
            for (w, n) in &r.counts {
                println!("weight {w}: {n}");
            }
            println!("total Q: {}", r.total);
            println!("bits per block: {}", r.bits_per_block);
            println!("bits per symbol: {}", r.bits_per_symbol);
            if *list {
                for (q, e) in r.codebook.entries().iter().enumerate() {
                    println!("{q:>4} w={} {e}", e.weight());
                }
            }
            Ok(())
        }
        Command::Channel { fixture, tx_spacing, rx_spacing, height, rx_offset, block } => {
            let base = match fixture.as_deref() {
                Some("h02") => fixture_h02(),
                Some("h06-blocked") => fixture_h06_blocked(),
                Some(other) => return Err(config(format!("unknown fixture `{other}`"))),
                None => {
                    let layout = GridLayout {
                        tx_spacing: *tx_spacing,
                        rx_spacing: *rx_spacing,
                        height: *height,
                        rx_offset: *rx_offset,
                        ..GridLayout::default()
                    };
                    let geometry = RoomGeometry::grid(layout).map_err(config)?;
                    build_channel(&geometry, &LambertianParams::default()).map_err(config)?
                }
            };
            let pairs = block.iter().map(|p| parse_pair(p)).collect::<Result<Vec<_>, _>>()?;
            let ch = apply_blockage(&base, &pairs).map_err(config)?;
            print!("{}", ch.to_text());
            Ok(())
        }
        Command::Bound { scenario } => {
            let prepared = load(Scenario::from_file(scenario), g)?;
            let out = pmvlc::scenario::RunOutput { bounds: prepared.bounds().map_err(runtime)?, ..Default::default() };
            let path = g.out_dir.join("bound.csv");
            std::fs::create_dir_all(&g.out_dir).map_err(runtime)?;
            std::fs::write(&path, out.bound_csv().map_err(runtime)?).map_err(runtime)?;
            println!("{} bound curves written to {}", out.bounds.len(), path.display());
            Ok(())
        }
        Command::Simulate { scenario } => {
            let prepared = load(Scenario::from_file(scenario), g)?;
            execute(&prepared, g)
        }
        Command::Preset { name } if name == "list" => {
            for n in preset_names() {
                println!("{n}");
            }
            Ok(())
        }
        Command::Preset { name } => {
            let prepared = load(Scenario::preset(name), g)?;
            execute(&prepared, g)
        }
    }
}

fn parse_pair(s: &str) -> Result<(usize, usize), Failure> {
    let bad = || config(format!("link `{s}` is not of the form led:pd"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn load(scenario: pmvlc::Result<Scenario>, g: &Global) -> Result<Prepared, Failure> {
    let mut s = scenario.map_err(config)?;
    if let Some(seed) = g.seed {
        s.seed = seed;
    }
    if let Some(n) = g.errors_target {
        s.simulation.errors_target = n;
    }
    if let Some(n) = g.block_cap {
        s.simulation.block_cap = n;
    }
    if g.threads == Some(0) {
        return Err(config("--threads must be positive"));
    }
    s.prepare().map_err(config)
}

fn execute(prepared: &Prepared, g: &Global) -> Result<(), Failure> {
    println!(
        "{}: {} Eb/N0 points, seed {}, error target {}, block cap {}",
        prepared.name,
        prepared.grid.len(),
        prepared.mc.seed,
        prepared.mc.errors_target,
        prepared.mc.block_cap
    );
    let out = prepared.run(g.threads).map_err(runtime)?;
    let files = out.write_to(Path::new(&g.out_dir)).map_err(runtime)?;
    print!("{}", out.summary_table());
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
