use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::init();
    let code = ptkitaev::cli::run(std::env::args_os(), &mut std::io::stdout().lock());
    ExitCode::from(code as u8)
}
