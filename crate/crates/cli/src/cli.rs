use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use geogap_core::analysis::{DEFAULT_LEVELS, DEFAULT_S_MAX};
use geogap_core::expr::parse;
use geogap_core::frame::DEFAULT_BRACKET_STEP;
use geogap_core::ode::DEFAULT_STEPS_PER_UNIT;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "geogap", version, about = "Geodesic quadrilateral gaps, torsion and curvature from measurements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Measure G_I and G_II on an s ladder and extrapolate their limits.
    Gap(GapArgs),
    /// Rebuild the torsion or curvature tensor at a point from gap limits.
    Reconstruct(ReconstructArgs),
    /// Closed-form quadrilaterals on the sphere or hyperboloid.
    Oracle(OracleArgs),
    /// Curvature of a surface from the circumference of small geodesic circles.
    #[command(name = "bertrand-puiseux")]
    BertrandPuiseux(BpArgs),
    /// Lie brackets of the basic fields on the frame bundle.
    #[command(name = "frame-bracket")]
    FrameBracket(FrameArgs),
    /// Compare integrated P2, Q2 with their Taylor polynomials.
    #[command(name = "taylor-check")]
    TaylorCheck(GapArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tensor {
    Torsion,
    Curvature,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Sphere,
    Hyperboloid,
}

/// Output and integration settings shared by every command.
#[derive(Clone, Debug, Args)]
pub struct Output {
    /// Output file; `--format both` writes `<out>.json` and `<out>.csv`. Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// RK4 steps per unit of geodesic parameter.
    #[arg(long, default_value_t = DEFAULT_STEPS_PER_UNIT)]
    pub steps_per_unit: usize,
    /// Accept side lengths or radii beyond the trusted range.
    #[arg(long)]
    pub allow_large_s: bool,
}

/// Geometry and base point.
#[derive(Clone, Debug, Args)]
pub struct Site {
    /// Geometry spec: a JSON file or inline JSON.
    #[arg(long)]
    pub geometry: String,
    /// Base point, comma-separated constant expressions (e.g. `pi/2,0`).
    #[arg(long, value_parser = components, allow_hyphen_values = true)]
    pub point: Components,
}

#[derive(Clone, Debug, Args)]
pub struct Ladder {
    /// Largest side length of the ladder.
    #[arg(long, default_value_t = DEFAULT_S_MAX)]
    pub s_max: f64,
    /// Number of ladder values, halving from `--s-max`.
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    pub levels: usize,
}

#[derive(Clone, Debug, Args)]
pub struct GapArgs {
    #[command(flatten)]
    pub site: Site,
    /// First tangent vector in chart components.
    #[arg(long, value_parser = components, allow_hyphen_values = true)]
    pub u: Components,
    /// Second tangent vector in chart components.
    #[arg(long, value_parser = components, allow_hyphen_values = true)]
    pub v: Components,
    #[command(flatten)]
    pub ladder: Ladder,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Clone, Debug, Args)]
pub struct ReconstructArgs {
    #[arg(value_enum)]
    pub tensor: Tensor,
    #[command(flatten)]
    pub site: Site,
    #[command(flatten)]
    pub ladder: Ladder,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Clone, Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub model: Model,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Single side length; without it the ladder is run and extrapolated.
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<f64>,
    #[command(flatten)]
    pub ladder: Ladder,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Clone, Debug, Args)]
pub struct BpArgs {
    #[command(flatten)]
    pub site: Site,
    /// Number of geodesic directions per circle.
    #[arg(long, default_value_t = 4096)]
    pub directions: usize,
    /// Circle radii, comma-separated. Defaults to 0.1·2^-k, k = 0..4.
    #[arg(long, value_parser = components)]
    pub radii: Option<Components>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Clone, Debug, Args)]
pub struct FrameArgs {
    #[command(flatten)]
    pub site: Site,
    /// Frame entries in row-major order; column j is u_j. Defaults to a
    /// metric-orthonormal frame, or the coordinate frame without a metric.
    #[arg(long, value_parser = components, allow_hyphen_values = true)]
    pub frame: Option<Components>,
    /// Relative finite-difference step.
    #[arg(long, default_value_t = DEFAULT_BRACKET_STEP)]
    pub step: f64,
    #[command(flatten)]
    pub output: Output,
}

/// A list of numbers parsed from comma-separated constant expressions.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Components(pub Vec<f64>);

fn components(src: &str) -> Result<Components, String> {
    src.split(',')
        .map(|tok| {
            let e = parse(tok.trim(), 0).map_err(|e| format!("`{}`: {e}", tok.trim()))?;
            e.eval(&[]).map_err(|e| format!("`{}`: {e}", tok.trim()))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Components)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_accept_constant_expressions() {
        let c = components("pi/2, -1, 2^-1").unwrap();
        assert_eq!(c.0, vec![std::f64::consts::FRAC_PI_2, -1.0, 0.5]);
        assert!(components("x1").is_err());
        assert!(components("1,,2").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
