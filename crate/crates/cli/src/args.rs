use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug, Clone)]
#[command(name = "betatile", version, about = "Tilings and purely periodic expansions for Pisot beta-numeration")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Minimal polynomial of beta, leading coefficient first ("1,-3,-2" is x^2 - 3x - 2).
    #[arg(long, global = true, default_value = "1,-2,-2", allow_hyphen_values = true)]
    pub poly: String,
    /// Working precision in bits for root enclosures.
    #[arg(long, global = true, default_value_t = 128)]
    pub bits: u32,
    /// Approximation level k.
    #[arg(long, global = true, default_value_t = 8)]
    pub level: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    /// Write an SVG rendering here.
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
    /// Write the boundary graph in DOT format here.
    #[arg(long, global = true)]
    pub dot: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Full report; the exit code encodes the tiling verdict (0 tiling, 2 undecided, 3 not tiling).
    Analyze {
        #[arg(long, default_value_t = 200)]
        max_den: u64,
    },
    /// Expansion of 1, V, V^, the lattice L and (QM).
    Parry,
    /// Tile clouds and SVG patches.
    Tiles(TilesArgs),
    /// Boundary graph, spectral radius and tiling verdict.
    BoundaryGraph,
    /// gamma(beta) by closed form, scan or the tile-cover sandwich.
    Gamma {
        #[arg(long, value_enum, default_value_t = GammaMethodArg::Scan)]
        method: GammaMethodArg,
        #[arg(long, default_value_t = 200)]
        max_den: u64,
    },
    /// Pure periodicity of one point, the set P and property (W).
    Purper {
        /// Point to test, e.g. "1/7" or "b-3".
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long, default_value_t = 10)]
        y_depth: usize,
        #[arg(long, default_value_t = 60)]
        n_cap: usize,
    },
    /// Natural extension: covering-degree estimate and domain slices.
    Natext {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Address window "lo,hi"; samples outside [0,1) are out of stripe.
        #[arg(long, value_parser = parse_window, default_value = "0,1")]
        window: (f64, f64),
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args, Debug, Clone)]
pub struct TilesArgs {
    /// Base point of the cloud.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub x: String,
    #[arg(long, value_enum, default_value_t = KindArg::Rauzy)]
    pub kind: KindArg,
    /// Keep only points whose first archimedean coordinate lies in "lo,hi".
    #[arg(long, value_parser = parse_window)]
    pub window: Option<(f64, f64)>,
    /// Number of finite-place digits per point (defaults to the level).
    #[arg(long)]
    pub addr_depth: Option<usize>,
    /// What the SVG shows.
    #[arg(long, value_enum, default_value_t = Target::Aper)]
    pub target: Target,
    /// Patches use the tiles R(y), y in T^{-depth}(0).
    #[arg(long, default_value_t = 2)]
    pub patch_depth: usize,
    /// Periodic patches use lattice combinations with coefficients in [-r, r].
    #[arg(long, default_value_t = 1)]
    pub translates: i64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaMethodArg {
    Quadratic,
    Scan,
    Thm5,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindArg {
    Rauzy,
    Integral,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Aper,
    Per,
    Int,
    Natext,
}

pub fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if !(lo < hi) {
        return Err("need lo < hi".into());
    }
    Ok((lo, hi))
}
