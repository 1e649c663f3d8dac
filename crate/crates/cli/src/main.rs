fn main() {
    let o = kinemap_cli::run(std::env::args_os());
    if o.code == 2 {
        eprintln!("{}", o.summary);
    } else {
        println!("{}", o.summary);
    }
    std::process::exit(o.code);
}
