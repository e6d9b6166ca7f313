fn main() {
    std::process::exit(stotam_cli::main_with_args(std::env::args_os()));
}
