fn main() {
    std::process::exit(cascade_index::bench::main_with_args(std::env::args_os()));
}
