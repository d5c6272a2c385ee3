fn main() {
    std::process::exit(dafl::harness::run_command(std::env::args_os()));
}
