use blockcur::bench::{error_vs_g_sweep, synthetic_low_rank, SweepConfig};
use blockcur::io::{load, read_csv, save};
use blockcur::{BlockPartition, Generator, Matrix, Matrix32};
use proptest::prelude::*;

proptest! {
    #[test]
    fn csv_and_binary_roundtrip(m in 1usize..8, n in 1usize..8, seed in any::<u64>()) {
        let a: Matrix = synthetic_low_rank(m, n, 1, 1.0, &mut Generator::from_seed(seed)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for name in ["a.csv", "a.bcur"] {
            let path = dir.path().join(name);
            save(&a, &path).unwrap();
            let b: Matrix = load(&path).unwrap();
            prop_assert_eq!(&a, &b);
        }
    }
}

#[test]
fn csv_reads_into_single_precision() {
    let m: Matrix32 = read_csv("x,y\n1.5,2\n3,4.25\n".as_bytes()).unwrap();
    assert_eq!(m.as_slice(), &[1.5f32, 2.0, 3.0, 4.25]);
}

#[test]
fn sweep_is_reproducible() {
    let a: Matrix = synthetic_low_rank(30, 40, 4, 0.05, &mut Generator::from_seed(8)).unwrap();
    let part = BlockPartition::uniform(40, 4).unwrap();
    let config = SweepConfig::new(4, 10, vec![1, 2, 3], vec![0, 1, 2]);
    let x = error_vs_g_sweep(&a, &part, &config).unwrap();
    let y = error_vs_g_sweep(&a, &part, &config).unwrap();
    assert_eq!(serde_json::to_string(&x.rows).unwrap(), serde_json::to_string(&y.rows).unwrap());
}
