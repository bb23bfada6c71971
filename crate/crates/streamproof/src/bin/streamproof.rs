fn main() { streamproof::cli::main(); }
