fn main() {
    std::process::exit(nr_energy_core::cli::main());
}
