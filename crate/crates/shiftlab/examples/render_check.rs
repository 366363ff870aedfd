// scratch: render a grid of benchmark samples for visual inspection
use shiftlab::synthbench::{generate, BenchSpec, NuisanceStrengths};
use shiftlab::imaging::{png, Image};

fn main() {
    let spec = BenchSpec {
        num_classes: 5,
        image_side: 32,
        train_size: 10,
        test_size_per_split: 10,
        rng_seed: 42,
        nuisance_strengths: NuisanceStrengths::default(),
    };
    let bench = generate(&spec).unwrap();
    // 8 rows (train + iid + 6 ood) x 10 cols
    let rows: Vec<(&str, &shiftlab::synthbench::LabeledSet)> = std::iter::once(("train", &bench.train))
        .chain(std::iter::once(("iid", &bench.iid_test)))
        .chain(bench.ood_tests.iter().map(|(n, s)| (n.name(), s)))
        .collect();
    let side = 32usize;
    let grid = Image::from_fn(8 * side, 10 * side, |y, x, c| {
        let (r, yy) = (y / side, y % side);
        let (col, xx) = (x / side, x % side);
        rows[r].1.samples[col].image.get(yy, xx, c)
    }).unwrap();
    png::write_image("/tmp/bench_grid.png", &grid).unwrap();
    for (name, set) in &rows { println!("{name}: {} samples, labels {:?}", set.len(), &set.labels()[..5]); }
}
