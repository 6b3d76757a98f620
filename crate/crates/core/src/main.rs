use std::io;

fn main() {
    if let Err(msg) = maganiso::cli::configure_threads() {
        eprintln!("error: {msg}");
        std::process::exit(2);
    }
    let code = maganiso::cli::run(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
