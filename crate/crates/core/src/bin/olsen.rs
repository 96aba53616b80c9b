fn main() {
    std::process::exit(multinomial_olsen::cli::main_with_args(std::env::args_os()));
}
