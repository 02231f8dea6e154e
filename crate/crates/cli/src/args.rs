use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use qcmap::{DiskPoint, GridSpec, QuadratureConfig};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "qcmap", version, about = "Distortion, ellipticity and coefficient analysis of disk mappings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Per-point value, Wirtinger derivatives and distortion metrics
    Analyze(AnalyzeArgs),
    /// Minimal K' for each K, plus the supremum of the dilatation
    Frontier(FrontierArgs),
    /// Coefficient and derivative inequalities
    Bounds(BoundsArgs),
    /// Fourier coefficients of a harmonic map
    Coeffs(CoeffsArgs),
    /// Perimeter, radial and boundary lengths
    Length(LengthArgs),
    /// Samples the solution of the Poisson problem with residuals
    Solve(SolveArgs),
    /// Two-sided quotient bounds and the chord integral condition
    CheckThm11(ChordArgs),
    /// Domination by the analytic part of f + G[g]
    CheckProp14(DominationArgs),
    /// Radial integral bound for a subharmonic weight
    CheckSubharmonic(SubharmonicArgs),
    /// Lists the builtin maps and their parameters
    Catalog(CatalogArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args, Serialize)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write to this file instead of standard output
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct MapArgs {
    /// Map given as an expression in z
    #[arg(long, conflicts_with_all = ["catalog", "psi"])]
    pub map: Option<String>,
    /// Builtin map name (see the catalog subcommand)
    #[arg(long, conflicts_with = "psi")]
    pub catalog: Option<String>,
    /// Catalog parameter as key=value; repeatable
    #[arg(long = "param", value_name = "KEY=VALUE", requires = "catalog")]
    pub params: Vec<String>,
    /// Boundary data of a Poisson map
    #[arg(long, requires = "g")]
    pub psi: Option<String>,
    /// Source term of a Poisson map
    #[arg(long, requires = "psi")]
    pub g: Option<String>,
}

/// The resolved map source recorded in every report.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapSource {
    Expression { expr: String },
    Catalog { name: String, params: BTreeMap<String, f64> },
    Poisson { psi: String, g: String },
}

impl MapArgs {
    pub fn source(&self) -> anyhow::Result<MapSource> {
        match (&self.map, &self.catalog, &self.psi, &self.g) {
            (Some(expr), None, None, None) => Ok(MapSource::Expression { expr: expr.clone() }),
            (None, Some(name), None, None) => {
                let mut params = BTreeMap::new();
                for kv in &self.params {
                    let (k, v) = kv.split_once('=').ok_or_else(|| anyhow!("parameter {kv:?} is not key=value"))?;
                    let v: f64 = v.trim().parse().with_context(|| format!("parameter {k} is not a number"))?;
                    params.insert(k.trim().to_string(), v);
                }
                Ok(MapSource::Catalog { name: name.clone(), params })
            }
            (None, None, Some(psi), Some(g)) => Ok(MapSource::Poisson { psi: psi.clone(), g: g.clone() }),
            _ => bail!("give exactly one map source: --map, --catalog, or --psi with --g"),
        }
    }
}

#[derive(Debug, Args, Serialize, Default)]
pub struct GridArgs {
    #[arg(long = "radial")]
    pub radial_count: Option<usize>,
    #[arg(long = "angular")]
    pub angular_count: Option<usize>,
    #[arg(long)]
    pub max_radius: Option<f64>,
    #[arg(long = "refine")]
    pub refine_rounds: Option<usize>,
}

impl GridArgs {
    pub fn resolve(&self, base: GridSpec) -> anyhow::Result<GridSpec> {
        let grid = GridSpec {
            radial_count: self.radial_count.unwrap_or(base.radial_count),
            angular_count: self.angular_count.unwrap_or(base.angular_count),
            max_radius: self.max_radius.unwrap_or(base.max_radius),
            refine_rounds: self.refine_rounds.unwrap_or(base.refine_rounds),
        };
        grid.validate()?;
        Ok(grid)
    }
}

#[derive(Debug, Args, Serialize, Default)]
pub struct QuadArgs {
    #[arg(long)]
    pub radial_nodes: Option<usize>,
    #[arg(long)]
    pub angular_nodes: Option<usize>,
    #[arg(long)]
    pub patch_radius: Option<f64>,
    #[arg(long)]
    pub patch_nodes: Option<usize>,
    #[arg(long)]
    pub boundary_nodes: Option<usize>,
}

impl QuadArgs {
    pub fn resolve(&self) -> anyhow::Result<QuadratureConfig> {
        let d = QuadratureConfig::default();
        let cfg = QuadratureConfig {
            radial_nodes: self.radial_nodes.unwrap_or(d.radial_nodes),
            angular_nodes: self.angular_nodes.unwrap_or(d.angular_nodes),
            singular_patch_radius: self.patch_radius.unwrap_or(d.singular_patch_radius),
            patch_nodes: self.patch_nodes.unwrap_or(d.patch_nodes),
            boundary_nodes: self.boundary_nodes.unwrap_or(d.boundary_nodes),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Sample pairs for the two-point checks.
#[derive(Debug, Args, Serialize)]
pub struct PairArgs {
    /// Pairs as "x1,y1:x2,y2", separated by ';'
    #[arg(long)]
    pub pairs: Option<String>,
    /// Number of random pairs when --pairs is absent
    #[arg(long, default_value_t = 64)]
    pub random_pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest modulus of the random points
    #[arg(long, default_value_t = 0.95)]
    pub pair_radius: f64,
}

impl PairArgs {
    pub fn resolve(&self) -> anyhow::Result<Vec<(DiskPoint, DiskPoint)>> {
        use rand::{Rng, SeedableRng};
        if let Some(text) = &self.pairs {
            return text
                .split(';')
                .filter(|s| !s.trim().is_empty())
                .map(|pair| {
                    let (a, b) = pair.split_once(':').ok_or_else(|| anyhow!("pair {pair:?} lacks ':'"))?;
                    Ok((parse_point(a)?, parse_point(b)?))
                })
                .collect();
        }
        if !(self.pair_radius > 0.0 && self.pair_radius < 1.0) {
            bail!("--pair-radius must lie in (0, 1)");
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.seed);
        let mut point = || {
            let r = self.pair_radius * rng.gen::<f64>().sqrt();
            DiskPoint::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
        };
        (0..self.random_pairs).map(|_| Ok((point()?, point()?))).collect()
    }
}

pub fn parse_point(text: &str) -> anyhow::Result<DiskPoint> {
    let (x, y) = text.split_once(',').ok_or_else(|| anyhow!("point {text:?} is not x,y"))?;
    let z = Complex64::new(x.trim().parse()?, y.trim().parse()?);
    Ok(DiskPoint::new(z)?)
}

pub fn parse_points(text: &str) -> anyhow::Result<Vec<DiskPoint>> {
    text.split(';').filter(|s| !s.trim().is_empty()).map(parse_point).collect()
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Points as "x,y" separated by ';'; the grid is used when absent
    #[arg(long)]
    pub points: Option<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct FrontierArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Values of K; repeatable or comma separated
    #[arg(long = "K", value_delimiter = ',', required = true)]
    pub k: Vec<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long = "K", default_value_t = 1.0)]
    pub k: f64,
    #[arg(long = "Kprime", default_value_t = 0.0)]
    pub k_prime: f64,
    /// Boundary length over 2π
    #[arg(long = "R")]
    pub r: Option<f64>,
    /// Supremum of the perimeters
    #[arg(long)]
    pub perimeter_sup: Option<f64>,
    /// Supremum of the radial lengths
    #[arg(long)]
    pub radial_sup: Option<f64>,
    /// Measure every context field not given explicitly
    #[arg(long)]
    pub measure: bool,
    #[arg(long, default_value_t = 8)]
    pub n_max: usize,
    /// Also evaluate the derivative inequalities on the grid
    #[arg(long)]
    pub derivatives: bool,
    /// Extra evaluation points "x,y" separated by ';'
    #[arg(long)]
    pub points: Option<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CoeffsArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, default_value_t = qcmap::coefficients::DEFAULT_DEGREE)]
    pub degree: usize,
    /// Extraction radii, comma separated
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthChoice {
    Perimeter,
    Radial,
    Boundary,
}

#[derive(Debug, Args, Serialize)]
pub struct LengthArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, value_enum, default_value = "perimeter")]
    pub kind: LengthChoice,
    /// Radii, comma separated
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub r: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Report the supremum over the grid instead of single lengths
    #[arg(long)]
    pub sup: bool,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    /// Boundary data
    #[arg(long)]
    pub psi: String,
    /// Source term
    #[arg(long)]
    pub g: String,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ChordArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Majorant as an expression in t
    #[arg(long, default_value = "t")]
    pub omega: String,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long = "C1")]
    pub c1: f64,
    #[arg(long = "C2")]
    pub c2: f64,
    #[arg(long, default_value_t = 65)]
    pub line_nodes: usize,
    #[command(flatten)]
    pub pairs: PairArgs,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct DominationArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Source term g with Δf = g; defaults to the Poisson map's source
    #[arg(long)]
    pub source: Option<String>,
    #[arg(long = "C3")]
    pub c3: f64,
    #[command(flatten)]
    pub pairs: PairArgs,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SubharmonicArgs {
    /// Real-valued weight as an expression in z
    #[arg(long)]
    pub phi: String,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CatalogArgs {
    #[command(flatten)]
    pub out: OutputArgs,
}
