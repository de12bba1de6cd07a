fn main() -> std::process::ExitCode {
    weakkam::cli::main()
}
