//! Acceptance suite: one test per release criterion, each printing a
//! pass line with its runtime. Run with
//! `cargo test -p reliefcast-core --test acceptance -- --nocapture`.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use reliefcast_core::config::PipelineConfig;
use reliefcast_core::exec::ExecMode;
use reliefcast_core::heightfield::{
    attach_range, letters_step_function, logo_step_function, pad, quantize, HeightField,
    StepFunction,
};
use reliefcast_core::mesh::{assemble, extrude_region, heightfield_to_solid, unit_cube};
use reliefcast_core::metrics::{
    filament_breaks, shell_volume, union_volume, validate, volume_profile,
};
use reliefcast_core::pipeline::build_assembly;
use reliefcast_core::raster::{flip_horizontal, GrayImage};
use reliefcast_core::region::{parse, Region2D};
use reliefcast_core::stl;

/// Triangle count of the bundled pendant recipe, frozen from a pipeline
/// run; builds must reproduce it exactly.
const PENDANT_TRIANGLES: usize = 242_344;

fn recipe_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../recipes/pendant/pendant.toml")
}

fn pass(criterion: u32, label: &str, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    println!(
        "acceptance criterion {criterion} ({label}): PASS in {:.2}s (budget {:.0}s)",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(
        elapsed <= budget,
        "criterion {criterion} took {elapsed:?}, budget {budget:?}"
    );
}

#[test]
fn criterion_1_step_function_fidelity() {
    let t0 = Instant::now();
    let base = letters_step_function();
    assert_eq!(base.eval(0.05), 3.0);
    assert_eq!(base.eval(0.32), 5.0);
    assert_eq!(base.eval(0.9), 0.0);
    let top = logo_step_function();
    assert_eq!(top.eval(0.95), 7.0);
    assert_eq!(top.eval(0.05), 11.0);
    assert_eq!(top.eval(0.5), 11.0);
    assert_eq!(top.eval(0.7), 15.0);
    pass(1, "step function fidelity", t0, Duration::from_secs(1));
}

#[test]
fn criterion_2_analytic_volume_oracle() {
    let t0 = Instant::now();
    let region = Region2D::disk(0.0, -10.0, 70.0)
        .unwrap()
        .and(Region2D::closed_disk(0.0, -64.0, 7.0).unwrap().not());
    let mesh = extrude_region(&region, 5.0, 8.0, 400).unwrap();
    let expect = std::f64::consts::PI * (4900.0 - 49.0) * 3.0;
    let got = shell_volume(&mesh);
    let rel = (got - expect).abs() / expect;
    assert!(rel <= 0.01, "volume {got} vs analytic {expect} (rel {rel:.5})");
    pass(2, "analytic annulus volume", t0, Duration::from_secs(30));
}

#[test]
fn criterion_3_watertightness_suite() {
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed_cafe);
    for case in 0..50 {
        // random step function; the first band is guaranteed printable
        let n_bands = rng.gen_range(1..=3);
        let mut thresholds: Vec<f64> = (0..n_bands)
            .map(|_| rng.gen_range(0.05..0.95))
            .collect();
        thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap());
        thresholds.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        let bands: Vec<(f64, f64)> = thresholds
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let h = if i == 0 {
                    rng.gen_range(1.0..10.0)
                } else {
                    rng.gen_range(0.0..10.0)
                };
                (t, h)
            })
            .collect();
        let first_threshold = bands[0].0;
        let step = StepFunction::new(bands, rng.gen_range(0.0..3.0)).unwrap();

        let rows = rng.gen_range(8..=64);
        let cols = rng.gen_range(8..=64);
        let mut luma: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(0.0..1.0)).collect();
        // center block hits the first band so the clip always keeps
        // something printable
        for dr in 0..2 {
            for dc in 0..2 {
                luma[(rows / 2 + dr) * cols + cols / 2 + dc] = first_threshold / 2.0;
            }
        }
        let img = GrayImage::from_luma(cols, rows, luma).unwrap();
        let hf = quantize(&img, &step);
        let hf = attach_range(&hf, (-1.0, 1.0), (-1.0, 1.0)).unwrap();
        let clip = Region2D::disk(
            rng.gen_range(-0.3..0.3),
            rng.gen_range(-0.3..0.3),
            rng.gen_range(0.6..1.5),
        )
        .unwrap();
        let mesh = heightfield_to_solid(&hf, Some(&clip), 0.0)
            .unwrap_or_else(|e| panic!("case {case}: {e}"));
        let report = validate(&mesh);
        assert!(
            report.watertight && report.oriented && report.signed_volume > 0.0,
            "case {case}: {}",
            report.summary()
        );
        assert_eq!(report.degenerate_count, 0, "case {case}");
    }
    pass(3, "watertightness of 50 random solids", t0, Duration::from_secs(120));
}

#[test]
fn criterion_4_volume_convergence() {
    let t0 = Instant::now();
    let disk = Region2D::disk(0.0, 0.0, 70.0).unwrap();
    let expect = std::f64::consts::PI * 4900.0 * 3.0;
    let errs: Vec<f64> = [100usize, 200, 400]
        .iter()
        .map(|&res| {
            let mesh = extrude_region(&disk, 5.0, 8.0, res).unwrap();
            (shell_volume(&mesh) - expect).abs()
        })
        .collect();
    assert!(
        errs[1] < errs[0] && errs[2] < errs[1],
        "errors did not strictly decrease: {errs:?}"
    );
    pass(4, "disk prism convergence 100/200/400", t0, Duration::from_secs(60));
}

#[test]
fn criterion_5_stl_byte_determinism() {
    let t0 = Instant::now();
    let (config, base) = PipelineConfig::load(&recipe_path()).unwrap();
    let first = build_assembly(&config, &base, ExecMode::default()).unwrap();
    let second = build_assembly(&config, &base, ExecMode::default()).unwrap();
    let bytes_a = stl::write_binary(first.final_assembly()).unwrap();
    let bytes_b = stl::write_binary(second.final_assembly()).unwrap();
    assert_eq!(bytes_a, bytes_b, "two builds must serialize identically");

    let count = first.final_assembly().triangle_count();
    assert_eq!(count, PENDANT_TRIANGLES, "golden triangle count moved");
    assert_eq!(bytes_a.len(), 84 + 50 * count, "file size law");

    let reread = stl::read(&bytes_a).unwrap();
    assert_eq!(reread.to_binary_bytes().unwrap(), bytes_a, "round trip");
    pass(5, "pendant STL determinism", t0, Duration::from_secs(120));
}

#[test]
fn criterion_6_volume_profile_properties() {
    let t0 = Instant::now();
    let cube_assembly = assemble("cube", vec![("c".into(), unit_cube())]).unwrap();
    let profile = volume_profile(&cube_assembly, 10).unwrap();
    let fractions = profile.cumulative_fraction();
    assert_eq!(*fractions.first().unwrap(), 0.0);
    assert_eq!(*fractions.last().unwrap(), 1.0);
    for w in fractions.windows(2) {
        assert!(w[1] >= w[0], "profile must be monotone");
    }
    for (z, f) in profile.z_samples().iter().zip(fractions) {
        assert!((f - z).abs() <= 0.02, "cube profile nonlinear at z={z}: {f}");
    }

    let two = assemble(
        "two",
        vec![("a".into(), unit_cube()), ("b".into(), unit_cube())],
    )
    .unwrap();
    let v = union_volume(&two, 1.0 / 200.0).unwrap();
    assert!(
        (v - 1.0).abs() <= 0.05,
        "identical overlapping cubes must not double count: {v}"
    );
    pass(6, "volume profile properties", t0, Duration::from_secs(120));
}

#[test]
fn criterion_7_region_algebra_oracle() {
    let t0 = Instant::now();
    let circle = parse("disk(0,-10,70)").unwrap();
    let clip = parse("disk(0,-10,70) && !closed_disk(0,-64,7)").unwrap();
    let band = parse("cheby_band(1,2.8,55)").unwrap();
    let mut rng = StdRng::seed_from_u64(0x0f0f_1234);
    for _ in 0..10_000 {
        let x: f64 = rng.gen_range(-100.0..100.0);
        let y: f64 = rng.gen_range(-100.0..100.0);
        let in_circle = x * x + (y + 10.0) * (y + 10.0) < 4900.0;
        let in_hole = x * x + (y + 64.0) * (y + 64.0) <= 49.0;
        let in_band = f64::max(x.abs(), 2.8 * y.abs()) > 55.0;
        assert_eq!(circle.contains(x, y), in_circle, "circle at ({x},{y})");
        assert_eq!(clip.contains(x, y), in_circle && !in_hole, "clip at ({x},{y})");
        assert_eq!(band.contains(x, y), in_band, "band at ({x},{y})");
    }
    for i in 0..1_000 {
        let tree = random_region(&mut rng, 0);
        let printed = tree.pretty_print();
        let reparsed = parse(&printed)
            .unwrap_or_else(|e| panic!("case {i}: {printed} failed to reparse: {e}"));
        assert_eq!(reparsed, tree, "case {i}: round trip changed {printed}");
    }
    pass(7, "region algebra and parser oracle", t0, Duration::from_secs(60));
}

fn random_region(rng: &mut StdRng, depth: usize) -> Region2D {
    let leaf = depth >= 4 || rng.gen_bool(0.4);
    if leaf {
        match rng.gen_range(0..5) {
            0 => Region2D::disk(
                round3(rng.gen_range(-50.0..50.0)),
                round3(rng.gen_range(-50.0..50.0)),
                round3(rng.gen_range(0.5..40.0)),
            )
            .unwrap(),
            1 => Region2D::closed_disk(
                round3(rng.gen_range(-50.0..50.0)),
                round3(rng.gen_range(-50.0..50.0)),
                round3(rng.gen_range(0.5..40.0)),
            )
            .unwrap(),
            2 => Region2D::halfplane(
                round3(rng.gen_range(-2.0..2.0)),
                round3(rng.gen_range(-2.0..2.0)),
                round3(rng.gen_range(-50.0..50.0)),
            )
            .unwrap(),
            3 => Region2D::cheby_band(
                round3(rng.gen_range(0.1..3.0)),
                round3(rng.gen_range(0.1..3.0)),
                round3(rng.gen_range(1.0..60.0)),
            )
            .unwrap(),
            _ => {
                let x0 = round3(rng.gen_range(-50.0..0.0));
                let y0 = round3(rng.gen_range(-50.0..0.0));
                Region2D::rect(
                    x0,
                    x0 + round3(rng.gen_range(1.0..40.0)),
                    y0,
                    y0 + round3(rng.gen_range(1.0..40.0)),
                )
                .unwrap()
            }
        }
    } else {
        let a = random_region(rng, depth + 1);
        match rng.gen_range(0..3) {
            0 => a.and(random_region(rng, depth + 1)),
            1 => a.or(random_region(rng, depth + 1)),
            _ => a.not(),
        }
    }
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

#[test]
fn criterion_8_end_to_end_pendant() {
    let t0 = Instant::now();
    let (config, base) = PipelineConfig::load(&recipe_path()).unwrap();
    let out = build_assembly(&config, &base, ExecMode::default()).unwrap();

    let scaled = out.final_assembly();
    assert_eq!(scaled.shells().len(), 4, "pendant has four shells");
    let bytes = stl::write_binary(scaled).unwrap();

    // x extent of the exported STL (f32 vertices) is the target diameter
    let doc = stl::read(&bytes).unwrap();
    let mesh = doc.to_mesh().unwrap();
    let (lo, hi) = mesh.bounds().unwrap();
    let extent = hi[0] - lo[0];
    assert!(
        (extent - 50.0).abs() <= 0.01,
        "x extent {extent} must be 50 mm +/- 0.01"
    );

    // exported file passes validation
    let report = validate(&mesh);
    assert!(
        report.watertight && report.oriented && report.degenerate_count == 0,
        "{}",
        report.summary()
    );

    // break fractions on the unscaled model at the layer transition
    // heights are strictly increasing and interior
    let profile = volume_profile(&out.unscaled, 50).unwrap();
    let fractions = filament_breaks(&profile, &[6.0, 11.0]).unwrap();
    assert!(
        fractions[0] > 0.0 && fractions[1] < 1.0 && fractions[0] < fractions[1],
        "break fractions {fractions:?} must be strictly increasing within (0,1)"
    );
    pass(8, "end-to-end pendant build", t0, Duration::from_secs(120));
}

#[test]
fn criterion_9_flip_and_pad_fidelity() {
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xf11b_0a75);
    for _ in 0..1_000 {
        let w = rng.gen_range(1..24);
        let h = rng.gen_range(1..24);
        let luma: Vec<f64> = (0..w * h).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let img = GrayImage::from_luma(w, h, luma).unwrap();
        assert_eq!(flip_horizontal(&flip_horizontal(&img)), img);

        let heights: Vec<f64> = (0..w * h).map(|_| rng.gen_range(0.0..9.0)).collect();
        let hf = HeightField::from_heights(h, w, heights).unwrap();
        let margin = rng.gen_range(0..4usize);
        let padded = pad(&hf, margin, rng.gen_range(0.0..5.0)).unwrap();
        let cropped = crop(&padded, margin);
        assert_eq!(cropped.heights(), hf.heights());
        assert_eq!((cropped.rows(), cropped.cols()), (hf.rows(), hf.cols()));
    }
    pass(9, "flip involution and pad/crop identity", t0, Duration::from_secs(60));
}

/// Inverse of `pad` for the identity check.
fn crop(hf: &HeightField, margin: usize) -> HeightField {
    let rows = hf.rows() - 2 * margin;
    let cols = hf.cols() - 2 * margin;
    let mut heights = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            heights.push(hf.height_at(r + margin, c + margin));
        }
    }
    HeightField::from_heights(rows, cols, heights).unwrap()
}
