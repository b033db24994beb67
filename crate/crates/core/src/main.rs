use std::io::Write;

fn main() {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match permid::cli::run(std::env::args_os(), &mut out) {
        Ok(()) => {
            let _ = out.flush();
        }
        Err(e) => {
            let _ = out.flush();
            eprintln!("{}", permid::cli::error_json(&e));
            std::process::exit(permid::cli::exit_code(&e));
        }
    }
}
