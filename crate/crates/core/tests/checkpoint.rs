use std::fs;
use std::path::Path;

use proptest::prelude::*;
use tlp::checkpoint::{average_checkpoints, save_checkpoint, Checkpoint, CheckpointError, MANIFEST};

fn finite() -> impl Strategy<Value = f32> {
    (-1.0e6f32..1.0e6f32).prop_union(-1.0f32..1.0f32)
}

fn pair(dir: &Path, a: &[f32], b: &[f32]) -> (Checkpoint, Checkpoint) {
    let shape = vec![a.len()];
    let x =
        save_checkpoint(dir.join("base"), &[("layer.0.weight", shape.clone(), a), ("bias", vec![1], &a[..1])]).unwrap();
    let y = save_checkpoint(dir.join("tuned"), &[("layer.0.weight", shape, b), ("bias", vec![1], &b[..1])]).unwrap();
    (x, y)
}

fn bits(c: &Checkpoint) -> Vec<u32> {
    c.read_tensor("layer.0.weight").unwrap().iter().map(|v| v.to_bits()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn averaging_with_itself_is_identity(data in prop::collection::vec(finite(), 1..64), alpha in 0.0f64..=1.0) {
        let tmp = tempfile::tempdir().unwrap();
        let (a, _) = pair(tmp.path(), &data, &data);
        let out = average_checkpoints(&a, &a, alpha, tmp.path().join("out")).unwrap();
        prop_assert_eq!(bits(&out), bits(&a));
    }

    #[test]
    fn swapping_inputs_mirrors_alpha(
        (a, b) in (1usize..48).prop_flat_map(|n| (prop::collection::vec(finite(), n), prop::collection::vec(finite(), n))),
        alpha in 0.0f64..=1.0,
    ) {
        let tmp = tempfile::tempdir().unwrap();
        let (x, y) = pair(tmp.path(), &a, &b);
        let fwd = average_checkpoints(&x, &y, alpha, tmp.path().join("fwd")).unwrap();
        let rev = average_checkpoints(&y, &x, 1.0 - alpha, tmp.path().join("rev")).unwrap();
        prop_assert_eq!(bits(&fwd), bits(&rev));
        for ((v, lo), hi) in fwd.read_tensor("layer.0.weight").unwrap().iter().zip(&a).zip(&b) {
            prop_assert!(*v >= lo.min(*hi) && *v <= lo.max(*hi));
        }
    }
}

#[test]
fn midpoint_is_the_mean() {
    let tmp = tempfile::tempdir().unwrap();
    let a: Vec<f32> = (0..1000).map(|i| i as f32 * 0.25).collect();
    let b: Vec<f32> = (0..1000).map(|i| -(i as f32) * 0.5 + 3.0).collect();
    let (x, y) = pair(tmp.path(), &a, &b);
    let mid = average_checkpoints(&x, &y, 0.5, tmp.path().join("mid")).unwrap();
    for ((m, p), q) in mid.read_tensor("layer.0.weight").unwrap().iter().zip(&a).zip(&b) {
        assert_eq!(*m, ((*p as f64 + *q as f64) / 2.0) as f32);
    }
}

#[test]
fn save_and_open_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let data: Vec<f32> = (0..24).map(|i| i as f32 - 11.5).collect();
    let saved = save_checkpoint(tmp.path().join("c"), &[("blocks/0/attn", vec![2, 3, 4], &data)]).unwrap();
    let opened = Checkpoint::open(tmp.path().join("c")).unwrap();
    assert_eq!(opened.manifest, saved.manifest);
    assert_eq!(opened.read_tensor("blocks/0/attn").unwrap(), data);
    assert_eq!(opened.largest_tensor_bytes(), 96);
    let spec = &opened.manifest["blocks/0/attn"];
    assert_eq!((spec.dtype.as_str(), spec.shape.as_slice()), ("f32", &[2, 3, 4][..]));
    assert_eq!(fs::metadata(tmp.path().join("c").join(&spec.file)).unwrap().len(), 96);
}

#[test]
fn corrupt_checkpoints_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("c");
    let saved = save_checkpoint(&dir, &[("w", vec![4], &[1.0, 2.0, 3.0, 4.0][..])]).unwrap();
    let file = dir.join(&saved.manifest["w"].file);
    fs::write(&file, [0u8; 12]).unwrap();
    assert!(matches!(Checkpoint::open(&dir), Err(CheckpointError::Size { expected: 16, actual: 12, .. })));
    let manifest = fs::read_to_string(dir.join(MANIFEST)).unwrap().replace("\"f32\"", "\"f16\"");
    fs::write(dir.join(MANIFEST), manifest).unwrap();
    assert!(matches!(Checkpoint::open(&dir), Err(CheckpointError::DType { .. })));
    fs::write(dir.join(MANIFEST), "{not json").unwrap();
    assert!(matches!(Checkpoint::open(&dir), Err(CheckpointError::Manifest { .. })));
}

#[test]
fn shape_mismatch_and_output_collision() {
    let tmp = tempfile::tempdir().unwrap();
    let a = save_checkpoint(tmp.path().join("a"), &[("w", vec![2, 2], &[0.0; 4][..])]).unwrap();
    let b = save_checkpoint(tmp.path().join("b"), &[("w", vec![4], &[0.0; 4][..])]).unwrap();
    assert!(matches!(
        average_checkpoints(&a, &b, 0.5, tmp.path().join("o")),
        Err(CheckpointError::ShapeMismatch { .. })
    ));
    assert!(matches!(average_checkpoints(&a, &a, 0.5, tmp.path().join("a")), Err(CheckpointError::OutputIsInput)));
}
