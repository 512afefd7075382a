fn main() {
    std::process::exit(ppm_xai::cli::dispatch(std::env::args_os()));
}
