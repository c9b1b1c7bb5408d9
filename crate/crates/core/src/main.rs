fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(orbitfin::cli::run(&argv));
}
