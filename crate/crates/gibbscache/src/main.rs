use clap::Parser;

fn main() -> std::process::ExitCode {
    let cli = gibbscache::cli::Cli::parse();
    match gibbscache::cli::execute(&cli, &mut std::io::stdout()) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::FAILURE
        }
    }
}
