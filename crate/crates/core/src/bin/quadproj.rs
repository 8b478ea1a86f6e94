use std::io;

use clap::Parser;
use quadproj::cli::{self, Cli};

fn main() {
    let cli = Cli::parse();
    let code = cli::run(cli, &mut io::stdout().lock(), &mut io::stderr().lock());
    std::process::exit(code);
}
