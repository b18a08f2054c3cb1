fn main() {
    std::process::exit(regunc::cli::main_with_args(std::env::args_os()));
}
