//! Regenerate the JSON Schema documents under docs/schema/.
//!
//! Run from the workspace root:
//! `cargo run --example gen_schemas`

use series_prior::harness::config::config_schemas;
use std::path::PathBuf;

fn main() {
    let dir = PathBuf::from("docs/schema");
    std::fs::create_dir_all(&dir).expect("create docs/schema");
    for (name, schema) in config_schemas() {
        let mut body = serde_json::to_string_pretty(&schema).expect("serialize schema");
        body.push('\n');
        let path = dir.join(format!("{name}.schema.json"));
        std::fs::write(&path, body).expect("write schema");
        println!("wrote {}", path.display());
    }
}
