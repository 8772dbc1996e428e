use std::io;

fn main() {
    // errors, including panics, are reported as JSON by `main_with`
    std::panic::set_hook(Box::new(|_| {}));
    let code = infoskel_cli::main_with(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock());
    std::process::exit(code);
}
