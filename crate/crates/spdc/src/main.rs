use clap::Parser;
use spdc::cli::{self, Cli};

fn main() {
    // Die quietly on a closed pipe (e.g. `spdc solve-xi | head`) instead of
    // panicking: Rust ignores SIGPIPE by default.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    if let Err(e) = cli::run(cli) {
        eprintln!("{}", cli::error_json(&e));
        std::process::exit(e.exit_code());
    }
}
