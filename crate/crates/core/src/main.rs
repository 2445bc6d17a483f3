fn main() -> std::process::ExitCode {
    xcluster::cli::main()
}
