//! Property tests for the cross-cutting invariants.

use proptest::prelude::*;
use tipatch_core::evalkit::{lp_norm, LpOrder};
use tipatch_core::imagery::{
    dequantize8, load_image, quantize8, save_image, Image, Patch, PatchMeta, Placement, Rotation,
    CHANNELS,
};
use tipatch_core::patch_ops::{apply_patch, relight, rotate90, tile_patch, Mask, TileSpec};
use tipatch_core::imagery::{RngStream, Seed};

fn image_strategy(max_side: usize) -> impl Strategy<Value = Image> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(h, w)| {
        proptest::collection::vec(0.0..=1.0f64, CHANNELS * h * w)
            .prop_map(move |data| Image::new(h, w, data).unwrap())
    })
}

fn patch_strategy(max_side: usize) -> impl Strategy<Value = Patch> {
    (2..=max_side).prop_flat_map(|d| {
        proptest::collection::vec(0.0..=1.0f64, CHANNELS * d * d)
            .prop_map(move |data| {
                Patch::new(Image::new(d, d, data).unwrap(), PatchMeta::default()).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Writing then reading a PPM reproduces the 8-bit quantization of the
    /// original image exactly.
    #[test]
    fn ppm_round_trip_equals_quantization(img in image_strategy(10)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.ppm");
        save_image(&img, &path).unwrap();
        let back = load_image(&path).unwrap();
        let quantized: Vec<f64> = img.data().iter().map(|&v| dequantize8(quantize8(v))).collect();
        prop_assert_eq!(back.data(), &quantized[..]);
    }

    /// Quarter-turn rotations form the cyclic group of order four and
    /// permute the pixel multiset.
    #[test]
    fn rotations_compose_and_permute(p in patch_strategy(8)) {
        for rot in Rotation::ALL {
            let turned = rotate90(&p, rot);
            let undone = rotate90(&turned, rot.inverse());
            prop_assert_eq!(undone.pixels(), p.pixels());
            let mut a: Vec<u64> = p.pixels().data().iter().map(|v| v.to_bits()).collect();
            let mut b: Vec<u64> = turned.pixels().data().iter().map(|v| v.to_bits()).collect();
            a.sort_unstable();
            b.sort_unstable();
            prop_assert_eq!(a, b);
        }
        let twice = rotate90(&rotate90(&p, Rotation::R90), Rotation::R90);
        let half_turn = rotate90(&p, Rotation::R180);
        prop_assert_eq!(twice.pixels(), half_turn.pixels());
    }

    /// Compositing touches only the footprint, keeps the range, and the L0
    /// distance never exceeds the patch budget.
    #[test]
    fn apply_patch_respects_footprint_and_budget(
        img in image_strategy(12),
        p in patch_strategy(6),
        seed in 0u64..1000,
    ) {
        let d = p.size();
        prop_assume!(d <= img.height() && d <= img.width());
        let mut rng = RngStream::new(Seed(seed), "prop/placement");
        let pl = tipatch_core::patch_ops::random_placement(
            &mut rng, (img.height(), img.width()), d, true).unwrap();
        let out = apply_patch(&img, &p, &pl).unwrap();
        prop_assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)));
        let mask = Mask::new(img.height(), img.width(), d, pl).unwrap();
        for c in 0..CHANNELS {
            for y in 0..img.height() {
                for x in 0..img.width() {
                    if !mask.contains(y, x) {
                        prop_assert_eq!(out.get(c, y, x), img.get(c, y, x));
                    }
                }
            }
        }
        let l0 = lp_norm(&img, &out, LpOrder::L0).unwrap();
        prop_assert!(l0 <= (CHANNELS * d * d) as f64);
    }

    /// A tiling confined to a region leaves the rest untouched and stays in
    /// range; a region of exactly one tile reduces to apply_patch.
    #[test]
    fn tiling_stays_inside_the_region(
        img in image_strategy(12),
        p in patch_strategy(5),
        gap in 0usize..3,
        crop in proptest::bool::ANY,
    ) {
        let d = p.size();
        prop_assume!(d <= img.height() && d <= img.width());
        let spec = TileSpec::new(0, 0, img.width(), img.height())
            .with_gap(gap)
            .with_crop_partial(crop);
        let out = tile_patch(&img, &p, &spec).unwrap();
        prop_assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)));
        let single = TileSpec::new(0, 0, d, d).with_gap(gap).with_crop_partial(crop);
        let one = tile_patch(&img, &p, &single).unwrap();
        let direct = apply_patch(&img, &p, &Placement::new(0, 0, Rotation::R0)).unwrap();
        prop_assert_eq!(one, direct);
    }

    /// Relighting by delta then by -delta is the identity wherever no sample
    /// clamped (guaranteed here by interior-valued images).
    #[test]
    fn relight_round_trip_on_interior_values(
        dims in (4usize..10, 4usize..10),
        seed in 0u64..1000,
    ) {
        let (h, w) = dims;
        let mut vrng = RngStream::new(Seed(seed), "prop/relight-img");
        let img = Image::from_fn(h, w, |_, _, _| vrng.range_f64(0.25, 0.75)).unwrap();
        let mut rng = RngStream::new(Seed(seed ^ 0xABCD), "prop/relight");
        let lit = relight(&img, &mut rng, 0.2).unwrap();
        let delta = lit.get(0, 0, 0) - img.get(0, 0, 0);
        let mut back_data = Vec::with_capacity(img.len());
        for v in lit.data() {
            back_data.push((v - delta).clamp(0.0, 1.0));
        }
        let back = Image::new(h, w, back_data).unwrap();
        for (a, b) in back.data().iter().zip(img.data()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
