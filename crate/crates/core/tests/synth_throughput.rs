//! Full-scale corpus generation stays inside its time budget.

use std::time::Instant;
use tipatch_core::evalkit::synth_dataset;
use tipatch_core::imagery::{RngStream, Seed};

#[test]
fn thousand_frame_corpus_generates_within_a_minute() {
    let start = Instant::now();
    let set = synth_dataset(1000, 256, 256, &RngStream::new(Seed(1), "timing"));
    let elapsed = start.elapsed().as_secs_f64();
    assert_eq!(set.len(), 1000);
    assert!(elapsed < 60.0, "took {elapsed:.1}s");
}
