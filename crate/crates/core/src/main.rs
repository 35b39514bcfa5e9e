fn main() {
    std::process::exit(rulemine::cli::run(std::env::args_os()));
}
