//! Randomized truncated SVD of a sparse matrix against the exact optimum,
//! and the pseudo-inverse of a rank-deficient factor.
//!
//! cargo run --release --example sparse_svd

use latsum::lowrank::{pseudo_inverse, truncated_svd, SparseMatrix, SvdMethod, SvdOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (rows, cols) = (2000, 800);
    let mut triplets = Vec::new();
    for r in 0..rows {
        for _ in 0..12 {
            triplets.push((r, rng.random_range(0..cols), rng.random_range(1..6) as f64));
        }
    }
    let y = SparseMatrix::from_triplets(rows, cols, &triplets)?;
    let k = 20;
    let opts = SvdOptions { method: SvdMethod::Randomized, seed: 3, ..Default::default() };
    let f = truncated_svd(&y, k, &opts)?;
    let dense = y.to_dense();
    let err = (f.reconstruct() - &dense).norm();
    let mut sv: Vec<f64> = dense.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let best = sv[k..].iter().map(|s| s * s).sum::<f64>().sqrt();
    println!("top singular values {:?}", &f.sigma[..5]);
    println!("rank-{k} error {err:.3} vs optimum {best:.3} (ratio {:.4})", err / best);

    // the pseudo-inverse inverts only the nonzero singular values
    let h = nalgebra::DMatrix::from_row_slice(3, 4, &[1.0, 2.0, 0.0, 0.0, 2.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0, 3.0]);
    let hp = pseudo_inverse(&h);
    println!("H H+ H - H max residual {:.2e}", (&h * &hp * &h - &h).amax());
    Ok(())
}
