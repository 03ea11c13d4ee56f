use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use newton_arcs::error::Error;
use newton_arcs::json::error_to_json;

mod commands;

#[derive(Parser)]
#[command(name = "newton-arcs", version, about = "Weierstrass division, Z_r points and Newton groupoid arrows over test rings")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
pub struct Global {
    /// Ring for the input data, overriding any `"ring"` field (e.g. `QQ[e]/(e^2)`, `GF(7)`).
    #[arg(long, global = true)]
    pub ring: Option<String>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Truncation order, overriding any `"T"` field.
    #[arg(long = "trunc", global = true, value_name = "T")]
    pub trunc: Option<usize>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    pub out: Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Json,
}

#[derive(Args, Clone, Debug)]
pub struct Input {
    /// JSON input file; standard input when absent or `-`.
    pub input: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Weierstrass division of a truncated series: `{ring, coeffs, T}`.
    Wdiv(Input),
    /// Points of Z_r.
    #[command(subcommand)]
    Zr(ZrCommand),
    /// Arrows of the Newton groupoid.
    #[command(subcommand)]
    Grp(GrpCommand),
    /// Deformations of arcs.
    #[command(subcommand)]
    Arc(ArcCommand),
    /// Systems and their chart polynomials.
    #[command(subcommand)]
    Sys(SysCommand),
}

#[derive(Subcommand)]
pub enum ZrCommand {
    /// Membership report for `{system, point}`; optional `lifts` compares two lifts of ybar.
    Check(Input),
    /// Newton lift of `{system, point}` with xbar known modulo q^(r+1).
    Lift(Input),
    /// Exhaustive r = 2 scan for `f = y(y - P(x))`: `{P, p, limit?}`.
    ScanR2(Input),
    /// Reduce an arc `{system, x, y, r}` to a point of Z_r.
    FromArc(Input),
    /// Solve for the arc `{system, gamma0, point, tail?, T}`.
    ToArc(Input),
}

#[derive(Subcommand)]
pub enum GrpCommand {
    /// Arrow between `{system, r, p, p_tilde}`.
    FromEndpoints(Input),
    /// Composite of `{system, a1, a2}`.
    Compose(Input),
    /// Inverse of `{system, arrow}`.
    Inverse(Input),
    /// Unit arrow at `{system, r, point}`.
    Unit(Input),
    /// Image of `{system, arrow}` one level down.
    Level(Input),
    /// Fiber group at `{system, r, z, multiplicity?}`; the axioms are checked over finite fields.
    Fiber(Input),
    /// First-order arrows at `{system, r, point}`.
    Lie(Input),
    /// Seeded fuzz campaign.
    Fuzz(FuzzArgs),
}

#[derive(Args, Clone, Debug)]
pub struct FuzzArgs {
    #[arg(long, default_value = "groupoid-axioms")]
    pub campaign: String,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub p_max: Option<u64>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub l_max: Option<usize>,
    #[arg(long)]
    pub degree_max: Option<u32>,
    #[arg(long)]
    pub a_max: Option<u32>,
}

#[derive(Subcommand)]
pub enum ArcCommand {
    /// Factor an arc on `y*x_(n+1) + g = 0`: `{n, g, ring, T, arc}`.
    Factor(Input),
    /// Rebuild the arc from `{n, g, ring, T, data}`.
    Unfactor(Input),
    /// Split `{system, gamma0, x, y, r}` into a point of Z_r and a tail.
    Split(Input),
    /// Join `{system, gamma0, point, tail, T}` back into an arc.
    Join(Input),
}

#[derive(Subcommand)]
pub enum SysCommand {
    /// Jacobian data of a system file `{n, l, f, ring}`.
    Build(Input),
    /// Chart polynomials `u`, `v` of `{system, r}`.
    Chart(Input),
}

fn read_input(input: &Input) -> Result<Value, Error> {
    let text = match &input.input {
        Some(path) if path.as_os_str() != "-" => std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?,
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| Error::InvalidInput(format!("cannot read stdin: {e}")))?;
            s
        }
    };
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("malformed JSON: {e}")))
}

/// Success carries the JSON to print and whether the result counts as a pass.
pub type Outcome = Result<(Value, bool), Error>;

fn dispatch(cli: &Cli) -> Outcome {
    let g = &cli.global;
    match &cli.command {
        Command::Wdiv(i) => commands::wdiv(g, &read_input(i)?),
        Command::Zr(c) => match c {
            ZrCommand::Check(i) => commands::zr_check(g, &read_input(i)?),
            ZrCommand::Lift(i) => commands::zr_lift(g, &read_input(i)?),
            ZrCommand::ScanR2(i) => commands::zr_scan(g, &read_input(i)?),
            ZrCommand::FromArc(i) => commands::zr_from_arc(g, &read_input(i)?),
            ZrCommand::ToArc(i) => commands::zr_to_arc(g, &read_input(i)?),
        },
        Command::Grp(c) => match c {
            GrpCommand::FromEndpoints(i) => commands::grp_from_endpoints(g, &read_input(i)?),
            GrpCommand::Compose(i) => commands::grp_compose(g, &read_input(i)?),
            GrpCommand::Inverse(i) => commands::grp_inverse(g, &read_input(i)?),
            GrpCommand::Unit(i) => commands::grp_unit(g, &read_input(i)?),
            GrpCommand::Level(i) => commands::grp_level(g, &read_input(i)?),
            GrpCommand::Fiber(i) => commands::grp_fiber(g, &read_input(i)?),
            GrpCommand::Lie(i) => commands::grp_lie(g, &read_input(i)?),
            GrpCommand::Fuzz(a) => commands::grp_fuzz(g, a),
        },
        Command::Arc(c) => match c {
            ArcCommand::Factor(i) => commands::arc_factor(g, &read_input(i)?),
            ArcCommand::Unfactor(i) => commands::arc_unfactor(g, &read_input(i)?),
            ArcCommand::Split(i) => commands::arc_split(g, &read_input(i)?),
            ArcCommand::Join(i) => commands::arc_join(g, &read_input(i)?),
        },
        Command::Sys(c) => match c {
            SysCommand::Build(i) => commands::sys_build(g, &read_input(i)?),
            SysCommand::Chart(i) => commands::sys_chart(g, &read_input(i)?),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (value, code) = match dispatch(&cli) {
        Ok((v, true)) => (v, 0),
        Ok((v, false)) => (v, 1),
        Err(e) => (error_to_json(&e), 1),
    };
    println!("{}", serde_json::to_string_pretty(&value).expect("JSON values serialize"));
    ExitCode::from(code)
}
