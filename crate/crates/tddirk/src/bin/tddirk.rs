fn main() { std::process::exit(tddirk::cli::run(std::env::args().skip(1).collect())); }
