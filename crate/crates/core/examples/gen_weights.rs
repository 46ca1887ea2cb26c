//! Regenerates the canonical tinycnn weight file shipped in `data/`.
//!
//! ```text
//! cargo run -p tipatch-core --example gen_weights -- crates/core/data/tinycnn-canonical.tipw
//! ```

use tipatch_core::metrics::TinyCnnWeights;

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "tinycnn-canonical.tipw".to_string());
    TinyCnnWeights::canonical().save(&path).expect("write weight file");
    println!("wrote {path}");
}
