use std::io;

fn main() {
    let code = moga_hardness::cli::run(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
