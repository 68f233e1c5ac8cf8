//! Full-size CAVE-style protocol: 512 x 512 x 31 scene, RGB response,
//! 32 x 32 block averaging.

use hsfuse_core::baseline::bicubic_baseline;
use hsfuse_core::metrics::{psnr, sam};
use hsfuse_core::synth::{generate_scene, SceneSpec};
use hsfuse_core::*;

#[test]
fn cave_shapes_and_baseline_margin() {
    let x = generate_scene(&SceneSpec {
        height: 512,
        width: 512,
        bands: 31,
        rank: 8,
        seed: 2024,
    })
    .unwrap();
    let r = SpectralResponse::rgb_preset(31).unwrap();
    let c = SpatialDegradation::uniform(32).unwrap();
    let y = apply_spectral_response(&x, &r).unwrap();
    let z = apply_spatial_degradation(&x, &c).unwrap();
    assert_eq!(y.shape(), (512, 512, 3));
    assert_eq!(z.shape(), (16, 16, 31));

    let cfg = FusionConfig {
        max_iters: 200,
        rank: 8,
        ..Default::default()
    };
    let res = fuse(&y, &z, &c, &r, &cfg).unwrap();
    assert_eq!(res.x_hat.shape(), (512, 512, 31));
    let baseline = bicubic_baseline(&z, &c).unwrap();
    let peak = x.max_value();
    let fused_psnr = psnr(&x, &res.x_hat, peak).unwrap();
    let base_psnr = psnr(&x, &baseline, peak).unwrap();
    assert!(fused_psnr >= base_psnr + 3.0, "{fused_psnr} vs {base_psnr}");
    assert!(sam(&x, &res.x_hat).unwrap() < sam(&x, &baseline).unwrap());
}
