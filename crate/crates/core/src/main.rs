fn main() -> std::process::ExitCode {
    mcrefine::cli::main()
}
