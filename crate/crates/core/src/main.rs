use std::io::Write;

fn main() {
    let (code, stdout) =
        universality_lab::cli::run_with(std::env::args_os(), &mut std::io::stderr());
    if !stdout.is_empty() {
        let mut out = std::io::stdout().lock();
        let _ = out.write_all(stdout.as_bytes());
        let _ = out.flush();
    }
    std::process::exit(code);
}
