fn main() {
    std::process::exit(galerkin_trap::run(std::env::args_os()));
}
