//! LAPACK/BLAS entry points for the dense kernels that nalgebra handles too
//! slowly at the sizes reached by truncated Fock models.
//!
//! `Complex64` is `repr(C)` with the same layout as the Fortran complex type,
//! and nalgebra stores matrices column-major, so buffers are passed through
//! unchanged.

use std::ffi::c_char;

use cblas_sys::{cblas_zgemm, CBLAS_LAYOUT, CBLAS_TRANSPOSE};
use lapack_sys::{c_double_complex, zgesdd_, zheevd_};

use crate::numerics::{CMatrix, C64};

fn lapack_ptr(p: *mut C64) -> *mut c_double_complex {
    p.cast()
}

/// Thin SVD `A = U diag(s) V^*`, values in LAPACK's descending order.
/// Returns `None` if the driver fails to converge.
pub(crate) fn svd(a: &CMatrix) -> Option<(Vec<f64>, CMatrix, CMatrix)> {
    gesdd(a, false)
}

/// Like [`svd`] but with the complete `c x c` right factor, so the trailing
/// columns of `V` span the kernel of a wide matrix.
pub(crate) fn svd_full(a: &CMatrix) -> Option<(Vec<f64>, CMatrix, CMatrix)> {
    gesdd(a, true)
}

fn gesdd(a: &CMatrix, full: bool) -> Option<(Vec<f64>, CMatrix, CMatrix)> {
    let (m, n) = a.shape();
    let k = m.min(n);
    let (ucols, vrows) = if full { (m, n) } else { (k, k) };
    let mut work_a = a.clone();
    let mut s = vec![0.0; k];
    let mut u = CMatrix::zeros(m, ucols);
    let mut vt = CMatrix::zeros(vrows, n);
    let (mi, ni) = (m as i32, n as i32);
    let (lda, ldu, ldvt) = (m.max(1) as i32, m.max(1) as i32, vrows.max(1) as i32);
    let mut iwork = vec![0i32; 8 * k];
    let mx = m.max(n);
    let lrwork = (5 * k * k + 7 * k).max(2 * mx * k + 2 * k * k + k).max(1);
    let mut rwork = vec![0.0; lrwork];
    let mut info = 0;
    let mut query = C64::new(0.0, 0.0);
    let jobz = (if full { b'A' } else { b'S' }) as c_char;
    unsafe {
        zgesdd_(
            &jobz, &mi, &ni, lapack_ptr(work_a.as_mut_ptr()), &lda, s.as_mut_ptr(),
            lapack_ptr(u.as_mut_ptr()), &ldu, lapack_ptr(vt.as_mut_ptr()), &ldvt,
            lapack_ptr(&mut query), &-1, rwork.as_mut_ptr(), iwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return None;
    }
    let lwork = (query.re as usize).max(1);
    let mut work = vec![C64::new(0.0, 0.0); lwork];
    unsafe {
        zgesdd_(
            &jobz, &mi, &ni, lapack_ptr(work_a.as_mut_ptr()), &lda, s.as_mut_ptr(),
            lapack_ptr(u.as_mut_ptr()), &ldu, lapack_ptr(vt.as_mut_ptr()), &ldvt,
            lapack_ptr(work.as_mut_ptr()), &(lwork as i32), rwork.as_mut_ptr(), iwork.as_mut_ptr(), &mut info,
        );
    }
    (info == 0).then(|| (s, u, vt.adjoint()))
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix, reading
/// only its lower triangle.
pub(crate) fn heev(a: &CMatrix) -> Option<(Vec<f64>, CMatrix)> {
    heevd(a, true)
}

/// Eigenvalues alone, in ascending order.
pub(crate) fn eigvalsh(a: &CMatrix) -> Option<Vec<f64>> {
    heevd(a, false).map(|(w, _)| w)
}

fn heevd(a: &CMatrix, vectors: bool) -> Option<(Vec<f64>, CMatrix)> {
    let n = a.nrows();
    let mut v = a.clone();
    let mut w = vec![0.0; n];
    let ni = n as i32;
    let lda = n.max(1) as i32;
    let (jobz, uplo) = ((if vectors { b'V' } else { b'N' }) as c_char, b'L' as c_char);
    let mut info = 0;
    let mut qwork = C64::new(0.0, 0.0);
    let mut qrwork = 0.0;
    let mut qiwork = 0i32;
    unsafe {
        zheevd_(
            &jobz, &uplo, &ni, lapack_ptr(v.as_mut_ptr()), &lda, w.as_mut_ptr(),
            lapack_ptr(&mut qwork), &-1, &mut qrwork, &-1, &mut qiwork, &-1, &mut info,
        );
    }
    if info != 0 {
        return None;
    }
    let lwork = (qwork.re as usize).max(1);
    let lrwork = (qrwork as usize).max(1);
    let liwork = (qiwork as usize).max(1);
    let mut work = vec![C64::new(0.0, 0.0); lwork];
    let mut rwork = vec![0.0; lrwork];
    let mut iwork = vec![0i32; liwork];
    unsafe {
        zheevd_(
            &jobz, &uplo, &ni, lapack_ptr(v.as_mut_ptr()), &lda, w.as_mut_ptr(),
            lapack_ptr(work.as_mut_ptr()), &(lwork as i32), rwork.as_mut_ptr(), &(lrwork as i32),
            iwork.as_mut_ptr(), &(liwork as i32), &mut info,
        );
    }
    (info == 0).then_some((w, v))
}

/// `A B` through zgemm.
pub(crate) fn gemm(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (m, k) = a.shape();
    let n = b.ncols();
    let mut c = CMatrix::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    let alpha = [1.0, 0.0];
    let beta = [0.0, 0.0];
    unsafe {
        cblas_zgemm(
            CBLAS_LAYOUT::CblasColMajor,
            CBLAS_TRANSPOSE::CblasNoTrans,
            CBLAS_TRANSPOSE::CblasNoTrans,
            m as i32,
            n as i32,
            k as i32,
            alpha.as_ptr().cast(),
            a.as_ptr().cast(),
            m as i32,
            b.as_ptr().cast(),
            k as i32,
            beta.as_ptr().cast(),
            c.as_mut_ptr().cast(),
            m as i32,
        );
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::max_abs;

    fn sample(r: usize, c: usize) -> CMatrix {
        CMatrix::from_fn(r, c, |i, j| C64::new((i * 7 + j * 3) as f64 % 5.0 - 2.0, (i + 2 * j) as f64 % 3.0 - 1.0))
    }

    #[test]
    fn svd_reconstructs() {
        for (r, c) in [(5, 3), (3, 5), (4, 4)] {
            let a = sample(r, c);
            let (s, u, v) = svd(&a).unwrap();
            let rebuilt = &u * CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(s.len(), s.iter().map(|&x| C64::new(x, 0.0)))) * v.adjoint();
            assert!(max_abs(&(rebuilt - &a)) < 1e-12);
            assert!(s.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn full_svd_gives_kernel_of_wide_matrix() {
        let a = sample(3, 7);
        let (s, _, v) = svd_full(&a).unwrap();
        assert_eq!(v.shape(), (7, 7));
        let rank = s.iter().filter(|&&x| x > 1e-10).count();
        assert!(max_abs(&(&a * v.columns(rank, 7 - rank))) < 1e-12);
        assert!(max_abs(&(v.adjoint() * &v - CMatrix::identity(7, 7))) < 1e-12);
    }

    #[test]
    fn heev_diagonalizes() {
        let b = sample(6, 6);
        let h = &b + b.adjoint();
        let (w, v) = heev(&h).unwrap();
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(6, w.iter().map(|&x| C64::new(x, 0.0))));
        assert!(max_abs(&(&v * d * v.adjoint() - &h)) < 1e-12);
        let values = eigvalsh(&h).unwrap();
        assert!(values.iter().zip(&w).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn gemm_matches_nalgebra() {
        let (a, b) = (sample(7, 4), sample(4, 9));
        assert!(max_abs(&(gemm(&a, &b) - &a * &b)) < 1e-12);
    }
}
