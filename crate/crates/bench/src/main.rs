fn main() {
    std::process::exit(rankone_bench::cli::run(std::env::args_os()));
}
