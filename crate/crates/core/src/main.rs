use std::io::{self, BufWriter, Write};

fn main() {
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let mut out = BufWriter::new(io::stdout().lock());
    let mut err = io::stderr().lock();
    let code = kgqa::cli::run(std::env::args_os(), &mut input, &mut out, &mut err);
    let _ = out.flush();
    drop(out);
    std::process::exit(code);
}
