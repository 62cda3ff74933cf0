use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use mtorus_cli::{exit_code, parse_spec, render_json, render_text, run, RunOptions};

/// Injectivize a free-group endomorphism and verify that both mapping-torus
/// presentations define the same group.
#[derive(Debug, Parser)]
#[command(name = "mtorus", version, about)]
struct Args {
    /// Endomorphism spec file (`rank = N`, then `map <letter> -> <word>`).
    file: PathBuf,

    /// Emit the report as a single JSON document.
    #[arg(long)]
    json: bool,

    /// Run the verification suite (the default).
    #[arg(long, conflicts_with = "no_verify")]
    verify: bool,

    /// Skip the verification suite.
    #[arg(long)]
    no_verify: bool,

    /// Skip the budgeted surjectivity witnesses.
    #[arg(long)]
    no_surjectivity: bool,

    /// Kernel-witness search length.
    #[arg(long, default_value_t = 6)]
    max_wit_len: usize,

    /// Total-letter budget for iterated powers.
    #[arg(long, default_value_t = mtorus::torus::DEFAULT_LETTER_BUDGET)]
    budget: usize,

    /// Print the subgroup graphs as edge lists on stderr.
    #[arg(long)]
    dump_graphs: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();

    let text = match std::fs::read_to_string(&args.file) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.file.display());
            return ExitCode::from(1);
        }
    };
    let job = match parse_spec(&text) {
        Ok(job) => job,
        Err(e) => {
            eprintln!("error: {}: {e}", args.file.display());
            return ExitCode::from(1);
        }
    };

    let options = RunOptions {
        verify: !args.no_verify,
        surjectivity: !args.no_surjectivity,
        max_wit_len: args.max_wit_len,
        budget: args.budget,
    };
    let (report, dumps) = match run(&job, &options) {
        Ok(out) => out,
        Err(e @ mtorus::Error::BudgetExceeded { .. }) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    if args.json {
        print!("{}", render_json(&report));
    } else {
        print!("{}", render_text(&report));
    }
    if args.dump_graphs {
        eprint!("F1 graph\n{}", dumps.f1_graph);
        eprint!("psi image graph\n{}", dumps.psi_image_graph);
    }
    ExitCode::from(u8::try_from(exit_code(&report)).unwrap_or(2))
}
