fn main() {
    cone_lpv::cli::init_logging();
    let code = cone_lpv::cli::run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
