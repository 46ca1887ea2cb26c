//! The files under `data/` must stay in lockstep with the built-in
//! constants.

use std::path::Path;
use tipatch_core::metrics::TinyCnnWeights;
use tipatch_core::objective::Palette;

fn data_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/data"))
}

#[test]
fn shipped_palette_matches_builtin_default() {
    let shipped = Palette::load(data_dir().join("palette30.txt")).unwrap();
    let builtin = Palette::default_printable();
    assert_eq!(shipped.colors(), builtin.colors());
}

#[test]
fn shipped_weights_match_canonical_generation() {
    let shipped = TinyCnnWeights::load(data_dir().join("tinycnn-canonical.tipw")).unwrap();
    assert_eq!(shipped, TinyCnnWeights::canonical());
}
