//! A trained rotation-free patch keeps a positive wallpaper gain under a
//! mild capture pipeline.

use tipatch_core::camsim::{wallpaper_gain, CamPipeline, Stage};
use tipatch_core::evalkit::synth_dataset;
use tipatch_core::imagery::{RngStream, Seed};
use tipatch_core::metrics::ProxyMetric;
use tipatch_core::objective::{LossWeights, Palette};
use tipatch_core::trainer::{train, TrainConfig, VariantConfig};

#[test]
fn trained_wallpaper_survives_a_mild_capture_pipeline() {
    let train_set = synth_dataset(32, 64, 64, &RngStream::new(Seed(101), "wall/train"));
    let val = synth_dataset(16, 64, 64, &RngStream::new(Seed(202), "wall/val"));
    let backgrounds = synth_dataset(8, 64, 64, &RngStream::new(Seed(303), "wall/bg"));
    let metric = ProxyMetric::new();
    let palette = Palette::default_printable();
    let tc = TrainConfig {
        patch_size: 16,
        batch_size: 16,
        iterations: 500,
        seed: Seed(7),
        // Light regularization: strong enough to shape the patch, weak
        // enough to keep it effective at this tiny scale.
        weights: LossWeights::new(1e-5, 1e-3).unwrap(),
        validation_cadence: 50,
        ..Default::default()
    };
    let (patch, _) = train(
        &train_set,
        &val,
        &metric,
        &VariantConfig::BASELINE_WRL_PLUS,
        &tc,
        &palette,
    )
    .unwrap();

    // Mild capture: viewing-distance rescale, small lighting shift, sensor
    // noise, light compression. No blur pass: at a 64-pixel frame one
    // binomial pass stands for severe defocus relative to a 16-pixel patch,
    // which is out of scope for "mild".
    let pipe = CamPipeline::new(vec![
        Stage::Scale { factor: 0.88 },
        Stage::Brightness { delta: 0.05 },
        Stage::Noise { sigma: 0.005 },
        Stage::BlockDctQuant { quality: 90 },
    ])
    .unwrap();
    for (i, bg) in backgrounds.iter().enumerate() {
        let mut rng = RngStream::new(Seed(700 + i as u64), "wall/sim");
        let gain = wallpaper_gain(bg, &patch, &pipe, &metric, &mut rng).unwrap();
        assert!(gain > 0.0, "background {i}: wallpaper gain {gain} not positive");
    }
}
