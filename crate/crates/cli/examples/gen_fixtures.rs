//! Rewrite the acceptance fixtures: `cargo run -p lipkit-cli --example gen_fixtures [DIR]`.

#[path = "../tests/support/gen.rs"]
mod gen;

fn main() -> std::io::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures").to_string());
    std::fs::create_dir_all(&dir)?;
    for (name, body) in gen::fixtures() {
        std::fs::write(format!("{dir}/{name}"), body)?;
    }
    Ok(())
}
