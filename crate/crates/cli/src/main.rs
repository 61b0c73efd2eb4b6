fn main() {
    std::process::exit(hypervoronoi_cli::run(std::env::args_os()));
}
