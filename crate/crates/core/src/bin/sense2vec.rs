fn main() {
    std::process::exit(sense2vec::cli::main_with_args(std::env::args()));
}
