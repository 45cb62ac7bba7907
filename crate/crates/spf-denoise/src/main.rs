use std::process::ExitCode;

fn main() -> ExitCode {
    match spf_denoise::cli::run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
