use num_complex::Complex64;

extern "C" {
    fn zgeev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        w: *mut Complex64,
        vl: *mut Complex64,
        ldvl: *const i32,
        vr: *mut Complex64,
        ldvr: *const i32,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
}

/// Eigenvalues of a dense complex matrix, column-major storage.
/// The input buffer is overwritten. zgeev balances internally.
pub fn complex_eigenvalues(a: &mut [Complex64], n: usize) -> Result<Vec<Complex64>, i32> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok(Vec::new());
    }
    let nn = n as i32;
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut rwork = vec![0.0f64; 2 * n];
    let mut info = 0i32;
    let lwork = (4 * n) as i32;
    let mut work = vec![Complex64::new(0.0, 0.0); lwork as usize];
    let jobn = b'N';
    let one = 1i32;
    unsafe {
        zgeev_(
            &jobn,
            &jobn,
            &nn,
            a.as_mut_ptr(),
            &nn,
            w.as_mut_ptr(),
            std::ptr::null_mut(),
            &one,
            std::ptr::null_mut(),
            &one,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info == 0 {
        Ok(w)
    } else {
        Err(info)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalue_sum_matches_trace() {
        let c = Complex64::new;
        let mut m = vec![
            c(0., 0.),
            c(1., 0.),
            c(0., 0.),
            c(0., 0.),
            c(0., 0.),
            c(1., 0.),
            c(-1.0, 0.5),
            c(0.3, -0.2),
            c(0.7, 0.1),
        ];
        let tr = m[0] + m[4] + m[8];
        let ev = complex_eigenvalues(&mut m, 3).unwrap();
        let mut s = c(0., 0.);
        for e in &ev {
            s += *e;
        }
        assert!((tr - s).norm() < 1e-12);
    }
}
