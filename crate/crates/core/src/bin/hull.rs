use std::io::{self, BufWriter};

use clap::Parser;
use wagener_hull::cli::{main_with, Cli};

fn main() {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let code = main_with(cli, &mut out);
    drop(out);
    std::process::exit(code);
}
