fn main() {
    std::process::exit(convexion::main_with(std::env::args()));
}
