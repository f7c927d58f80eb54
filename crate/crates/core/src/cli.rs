//! Command-line entry point (subcommands wired as modules land).

pub fn run(_argv: &[String]) -> i32 {
    eprintln!("not yet wired");
    2
}
