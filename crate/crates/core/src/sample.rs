//! Seeded random generators for matrices, tuples and ball points.
//!
//! Every generator takes an explicit RNG so that results are reproducible;
//! callers typically use `ChaCha8Rng::seed_from_u64`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::contraction::RowTuple;
use crate::numerics::{c, hstack, identity, lambda_max, zeros, CMatrix, Tolerance, C64};

/// Matrix with independent standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the phase fix).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    if n == 0 {
        return zeros(0, 0);
    }
    let qr = ginibre(n, n, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        let col = q.column(j) * phase;
        q.set_column(j, &col);
    }
    q
}

/// Random tuple rescaled so that the row operator has norm exactly `norm`.
pub fn random_row_tuple<R: Rng + ?Sized>(n: usize, d: usize, norm: f64, rng: &mut R) -> Vec<CMatrix> {
    let mats: Vec<CMatrix> = (0..n).map(|_| ginibre(d, d, rng)).collect();
    let current = row_norm_of(&mats);
    if current == 0.0 {
        return mats;
    }
    mats.into_iter().map(|m| m.scale(norm / current)).collect()
}

/// Random certified row contraction with row norm `norm <= 1`.
pub fn random_row_contraction<R: Rng + ?Sized>(n: usize, d: usize, norm: f64, rng: &mut R) -> RowTuple {
    RowTuple::new(random_row_tuple(n, d, norm, rng), Tolerance::default())
        .expect("rescaled tuple is a row contraction")
}

/// Nilpotent row contraction of exact order `order` on `C^d`, `1 <= order <= d`.
///
/// The space is split into `order` consecutive blocks and every `T_i` maps
/// block `k+1` into block `k`, so products of length `order` vanish. Blocks
/// are filled with random entries and then conjugated by a random unitary.
pub fn random_nilpotent<R: Rng + ?Sized>(n: usize, d: usize, order: usize, rng: &mut R) -> RowTuple {
    assert!(order >= 1 && order <= d.max(1));
    let mut sizes = vec![d / order; order];
    for s in sizes.iter_mut().take(d % order) {
        *s += 1;
    }
    let mut offsets = vec![0];
    for s in &sizes {
        offsets.push(offsets.last().unwrap() + s);
    }
    let mats: Vec<CMatrix> = (0..n)
        .map(|i| {
            let mut t = zeros(d, d);
            for k in 0..order.saturating_sub(1) {
                let block = ginibre(sizes[k], sizes[k + 1], rng);
                t.view_mut((offsets[k], offsets[k + 1]), block.shape()).copy_from(&block);
            }
            // keep T_1 connecting every block so the order is exact
            if i == 0 {
                for k in 0..order.saturating_sub(1) {
                    t[(offsets[k], offsets[k + 1])] += c(1.0, 0.0);
                }
            }
            t
        })
        .collect();
    let scale = row_norm_of(&mats).max(1e-300);
    let norm = 0.5 + 0.5 * rng.random::<f64>();
    let u = random_unitary(d, rng);
    let mats = mats.into_iter().map(|m| conjugate(&m.scale(norm / scale), &u)).collect();
    RowTuple::new(mats, Tolerance::default()).expect("scaled nilpotent is a row contraction")
}

/// Row coisometry on `C^d`: the rows of an `nd x nd` unitary split into blocks.
pub fn random_coisometry<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> RowTuple {
    let w = random_unitary(n * d, rng);
    let mats = (0..n).map(|i| w.view((0, i * d), (d, d)).into_owned()).collect();
    RowTuple::new(mats, Tolerance::default()).expect("rows of a unitary form a coisometry")
}

/// `U A U^*`.
pub fn conjugate(a: &CMatrix, u: &CMatrix) -> CMatrix {
    u * a * u.adjoint()
}

/// Uniformly random direction scaled to Euclidean norm `radius`.
pub fn ball_point<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> Vec<C64> {
    let g = ginibre(n, 1, rng);
    let norm = g.norm();
    g.iter().map(|z| z * (radius / norm)).collect()
}

/// Point with norm drawn uniformly from `[0, max_radius]`.
pub fn ball_point_within<R: Rng + ?Sized>(n: usize, max_radius: f64, rng: &mut R) -> Vec<C64> {
    let r = max_radius * rng.random::<f64>();
    ball_point(n, r, rng)
}

/// Random `k x k` tuple with row norm `norm`.
pub fn ball_tuple<R: Rng + ?Sized>(n: usize, k: usize, norm: f64, rng: &mut R) -> Vec<CMatrix> {
    random_row_tuple(n, k, norm, rng)
}

/// Scalar tuple `(x_1 I, ..., x_n I)`.
pub fn scalar_tuple(x: &[C64], k: usize) -> Vec<CMatrix> {
    x.iter().map(|&z| identity(k) * z).collect()
}

fn row_norm_of(mats: &[CMatrix]) -> f64 {
    if mats.is_empty() {
        return 0.0;
    }
    let row = hstack(mats);
    lambda_max(&(&row * row.adjoint())).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{isometry_defect, max_abs};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitary_and_coisometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(isometry_defect(&random_unitary(5, &mut rng)) < 1e-12);
        let t = random_coisometry(2, 3, &mut rng);
        let row = t.row_operator();
        assert!(max_abs(&(&row * row.adjoint() - identity(3))) < 1e-12);
    }

    #[test]
    fn nilpotent_has_exact_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for order in 1..=4 {
            let t = random_nilpotent(2, 4, order, &mut rng);
            let all_zero = |len: usize| {
                crate::fock::words_of_length(2, len)
                    .iter()
                    .all(|w| max_abs(&t.word_product(w)) < 1e-12)
            };
            assert!(all_zero(order));
            assert!(order == 1 || !all_zero(order - 1));
        }
    }
}
