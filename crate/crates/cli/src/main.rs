use clap::Parser;

fn main() {
    let out = acgeom::cli::run(acgeom::cli::Cli::parse());
    if out.code == acgeom::cli::EXIT_USAGE {
        eprint!("{}", out.stdout);
    } else {
        print!("{}", out.stdout);
    }
    std::process::exit(out.code);
}
