use std::path::{Path, PathBuf};

use rand::Rng;
use retinet::data::*;
use retinet::engine::Tensor;
use retinet::net::{build_model, checkpoint, ModelSpec};
use retinet::rng::seeded;
use retinet::Error;

fn write_toy_idx(dir: &Path, n: usize, seed: u64) -> (PathBuf, PathBuf, Vec<u8>, Vec<u8>) {
    let mut rng = seeded(seed);
    let pixels: Vec<u8> = (0..n * 784).map(|_| rng.gen()).collect();
    let labels: Vec<u8> = (0..n).map(|_| rng.gen_range(0..10)).collect();
    let (ip, lp) = (dir.join("images-idx3-ubyte"), dir.join("labels-idx1-ubyte"));
    write_idx_images(&ip, &pixels, n, 28, 28).unwrap();
    write_idx_labels(&lp, &labels).unwrap();
    (ip, lp, pixels, labels)
}

#[test]
fn idx_to_rawds_round_trip_is_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let (ip, lp, pixels, labels) = write_toy_idx(dir.path(), 17, 1);
    let ds = load_idx(&ip, &lp).unwrap();
    assert_eq!(ds.labels, labels);
    assert_eq!(ds.images.shape(), &[17, 1, 28, 28]);
    for (v, p) in ds.images.data().iter().zip(&pixels) {
        assert_eq!(*v, *p as f32 / 255.0);
    }
    let rp = dir.path().join("toy.rawds");
    save_rawds(&ds, &rp).unwrap();
    let back = load_rawds(&rp).unwrap();
    assert_eq!(back.images, ds.images);
    assert_eq!(back.labels, ds.labels);
    save_rawds(&back, &dir.path().join("again.rawds")).unwrap();
    assert_eq!(std::fs::read(&rp).unwrap(), std::fs::read(dir.path().join("again.rawds")).unwrap());
}

#[test]
fn rgb_rawds_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = seeded(2);
    let n = 5;
    let px: Vec<f32> = (0..n * 3 * 32 * 32).map(|_| rng.gen::<u8>() as f32 / 255.0).collect();
    let ds = Dataset::new(Tensor::new(vec![n, 3, 32, 32], px).unwrap(), vec![0, 1, 2, 3, 9], "svhn", Split::Test).unwrap();
    let p = dir.path().join("test.rawds");
    save_rawds(&ds, &p).unwrap();
    let back = load_rawds(&p).unwrap();
    assert_eq!(back.images, ds.images);
    assert_eq!(back.labels, ds.labels);
}

#[test]
fn idx_errors_are_distinct() {
    let dir = tempfile::tempdir().unwrap();
    let (ip, lp, _, _) = write_toy_idx(dir.path(), 4, 3);
    // labels file where images are expected
    assert!(matches!(read_idx_images(&lp), Err(Error::BadMagic { .. })));
    let bytes = std::fs::read(&ip).unwrap();
    let cut = dir.path().join("cut");
    std::fs::write(&cut, &bytes[..bytes.len() - 10]).unwrap();
    assert!(matches!(read_idx_images(&cut), Err(Error::Truncated { .. })));
    let short_labels = dir.path().join("short-labels");
    write_idx_labels(&short_labels, &[1, 2, 3]).unwrap();
    assert!(matches!(load_idx(&ip, &short_labels), Err(Error::CountMismatch { images: 4, labels: 3 })));
    let bad_label = dir.path().join("bad-labels");
    write_idx_labels(&bad_label, &[1, 2, 3, 10]).unwrap();
    assert!(load_idx(&ip, &bad_label).is_err());
    assert!(matches!(read_idx_images(&dir.path().join("missing")), Err(Error::Io { .. })));
}

#[test]
fn checkpoint_restores_logits_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = seeded(4);
    for spec in [ModelSpec::lenet5(1, 28), ModelSpec::retilenet(1, 28, 7, 0.2), ModelSpec::retilenet(3, 32, 5, 0.1)] {
        let model = build_model(spec, 9).unwrap();
        let p = dir.path().join(format!("{}.rnet", spec.name.name()));
        checkpoint::save(&model, &p).unwrap();
        let back = checkpoint::load(&p).unwrap();
        assert_eq!(back, model);
        let s = spec.input_size;
        let x = Tensor::new(
            vec![3, spec.in_channels, s, s],
            (0..3 * spec.in_channels * s * s).map(|_| rng.gen()).collect(),
        )
        .unwrap();
        assert_eq!(model.logits(&x).unwrap(), back.logits(&x).unwrap());
        assert_eq!(checkpoint::to_bytes(&back), std::fs::read(&p).unwrap());
    }
}

#[test]
fn checkpoint_rejects_foreign_and_damaged_files() {
    let dir = tempfile::tempdir().unwrap();
    let model = build_model(ModelSpec::lenet5(1, 28), 0).unwrap();
    let bytes = checkpoint::to_bytes(&model);
    let p = dir.path().join("m.rnet");

    std::fs::write(&p, &bytes[..bytes.len() / 2]).unwrap();
    assert!(matches!(checkpoint::load(&p), Err(Error::Truncated { .. })));

    let mut versioned = bytes.clone();
    versioned[4] = 7;
    std::fs::write(&p, &versioned).unwrap();
    assert!(matches!(checkpoint::load(&p), Err(Error::Format { .. })));

    let mut extra = bytes.clone();
    extra.extend_from_slice(&bytes[34..]);
    std::fs::write(&p, &extra).unwrap();
    assert!(checkpoint::load(&p).is_err());

    std::fs::write(&p, b"P5\n").unwrap();
    assert!(matches!(checkpoint::load(&p), Err(Error::BadMagic { .. })));
}

/// Runs only when the datasets have been fetched into `<repo>/data`.
#[test]
fn fetched_datasets_have_expected_shape() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    for kind in [DatasetKind::Mnist, DatasetKind::FashionMnist] {
        let (ip, _) = kind.files(&root, Split::Test);
        if !ip.exists() {
            eprintln!("skipping {kind}: {} not found", ip.display());
            continue;
        }
        let test = kind.load(&root, Split::Test).unwrap();
        assert_eq!(test.len(), 10_000);
        assert_eq!(test.name, kind.name());
        let mut counts = [0usize; 10];
        for &l in &test.labels {
            counts[l as usize] += 1;
        }
        assert!(counts.iter().all(|&c| c > 800));
        let train = kind.load(&root, Split::Train).unwrap();
        assert_eq!(train.len(), 60_000);
    }
}
