fn main() {
    let code = lsq::run(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
