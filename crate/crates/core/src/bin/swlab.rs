fn main() -> std::process::ExitCode {
    swlab::cli::main()
}
