fn main() -> std::process::ExitCode {
    qa_volume::cli::main()
}
