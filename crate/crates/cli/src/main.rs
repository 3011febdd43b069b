mod cli;
mod commands;
mod output;

use clap::Parser;

use cli::{Cli, Command};

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gap(a) => commands::gap(a),
        Command::Reconstruct(a) => commands::reconstruct(a),
        Command::Oracle(a) => commands::oracle(a),
        Command::BertrandPuiseux(a) => commands::bertrand_puiseux_cmd(a),
        Command::FrameBracket(a) => commands::frame_bracket(a),
        Command::TaylorCheck(a) => commands::taylor(a),
    };
    if let Err(e) = result {
        eprintln!("geogap: {e}");
        std::process::exit(e.exit_code());
    }
}
