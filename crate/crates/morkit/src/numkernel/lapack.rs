//! Thin safe wrappers over the handful of LAPACK routines the kernels need.
//! All matrix arguments are column-major slices.

use num_complex::Complex64;

use crate::{MorError, Result};

#[allow(clippy::too_many_arguments)]
extern "C" {
    fn dgees_(
        jobvs: *const u8,
        sort: *const u8,
        select: *const std::ffi::c_void,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        sdim: *mut i32,
        wr: *mut f64,
        wi: *mut f64,
        vs: *mut f64,
        ldvs: *const i32,
        work: *mut f64,
        lwork: *const i32,
        bwork: *mut i32,
        info: *mut i32,
    );

    fn dtrsyl_(
        trana: *const u8,
        tranb: *const u8,
        isgn: *const i32,
        m: *const i32,
        n: *const i32,
        a: *const f64,
        lda: *const i32,
        b: *const f64,
        ldb: *const i32,
        c: *mut f64,
        ldc: *const i32,
        scale: *mut f64,
        info: *mut i32,
    );

    fn zggev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        b: *mut Complex64,
        ldb: *const i32,
        alpha: *mut Complex64,
        beta: *mut Complex64,
        vl: *mut Complex64,
        ldvl: *const i32,
        vr: *mut Complex64,
        ldvr: *const i32,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );

    fn dgeev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        wr: *mut f64,
        wi: *mut f64,
        vl: *mut f64,
        ldvl: *const i32,
        vr: *mut f64,
        ldvr: *const i32,
        work: *mut f64,
        lwork: *const i32,
        info: *mut i32,
    );

    fn dgesv_(
        n: *const i32,
        nrhs: *const i32,
        a: *mut f64,
        lda: *const i32,
        ipiv: *mut i32,
        b: *mut f64,
        ldb: *const i32,
        info: *mut i32,
    );

    fn zgesv_(
        n: *const i32,
        nrhs: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        ipiv: *mut i32,
        b: *mut Complex64,
        ldb: *const i32,
        info: *mut i32,
    );

    fn zgesvd_(
        jobu: *const u8,
        jobvt: *const u8,
        m: *const i32,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        s: *mut f64,
        u: *mut Complex64,
        ldu: *const i32,
        vt: *mut Complex64,
        ldvt: *const i32,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );

    fn dgeqp3_(
        m: *const i32,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        jpvt: *mut i32,
        tau: *mut f64,
        work: *mut f64,
        lwork: *const i32,
        info: *mut i32,
    );

    fn dorgqr_(
        m: *const i32,
        n: *const i32,
        k: *const i32,
        a: *mut f64,
        lda: *const i32,
        tau: *const f64,
        work: *mut f64,
        lwork: *const i32,
        info: *mut i32,
    );

    fn dsyev_(
        jobz: *const u8,
        uplo: *const u8,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        w: *mut f64,
        work: *mut f64,
        lwork: *const i32,
        info: *mut i32,
    );
}

fn check_info(info: i32, routine: &str) -> Result<()> {
    if info == 0 {
        Ok(())
    } else if info < 0 {
        panic!("{routine}: illegal argument {}", -info);
    } else {
        Err(MorError::Singular(format!("{routine} failed, info = {info}")))
    }
}

/// Real Schur decomposition A = U T U^T. Returns (T, U, eigenvalues).
pub fn real_schur(a: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>, Vec<Complex64>)> {
    let ni = n as i32;
    let mut t = a.to_vec();
    let mut vs = vec![0.0; n * n];
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut sdim = 0i32;
    let mut info = 0i32;
    let mut bwork = vec![0i32; n.max(1)];
    let lwork = (8 * n.max(1)) as i32;
    let mut work = vec![0.0; lwork as usize];
    unsafe {
        dgees_(
            b"V".as_ptr(),
            b"N".as_ptr(),
            std::ptr::null(),
            &ni,
            t.as_mut_ptr(),
            &ni.max(1),
            &mut sdim,
            wr.as_mut_ptr(),
            wi.as_mut_ptr(),
            vs.as_mut_ptr(),
            &ni.max(1),
            work.as_mut_ptr(),
            &lwork,
            bwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info > 0 {
        return Err(MorError::EigNoConvergence { iterations: info });
    }
    check_info(info, "dgees")?;
    let eigs = wr
        .iter()
        .zip(&wi)
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect();
    Ok((t, vs, eigs))
}

/// Solves op(A) X + isgn * X op(B) = scale * C for quasi-triangular A, B.
/// C is overwritten with X; returns scale.
pub fn trsyl(
    trana: u8,
    tranb: u8,
    isgn: i32,
    m: usize,
    n: usize,
    a: &[f64],
    b: &[f64],
    c: &mut [f64],
) -> Result<f64> {
    let (mi, ni) = (m as i32, n as i32);
    let mut scale = 1.0f64;
    let mut info = 0i32;
    unsafe {
        dtrsyl_(
            &trana,
            &tranb,
            &isgn,
            &mi,
            &ni,
            a.as_ptr(),
            &mi.max(1),
            b.as_ptr(),
            &ni.max(1),
            c.as_mut_ptr(),
            &mi.max(1),
            &mut scale,
            &mut info,
        );
    }
    if info == 1 {
        return Err(MorError::LyapunovSingular);
    }
    check_info(info, "dtrsyl")?;
    Ok(scale)
}

/// Generalized eigenproblem A z = lambda B z with left and right vectors.
/// Returns (alpha, beta, vl, vr) with lambda_i = alpha_i / beta_i.
pub fn zggev(
    a: &[Complex64],
    b: &[Complex64],
    n: usize,
) -> Result<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>, Vec<Complex64>)> {
    let ni = n as i32;
    let mut aa = a.to_vec();
    let mut bb = b.to_vec();
    let mut alpha = vec![Complex64::default(); n];
    let mut beta = vec![Complex64::default(); n];
    let mut vl = vec![Complex64::default(); n * n];
    let mut vr = vec![Complex64::default(); n * n];
    let lwork = (8 * n.max(1)) as i32;
    let mut work = vec![Complex64::default(); lwork as usize];
    let mut rwork = vec![0.0; 8 * n.max(1)];
    let mut info = 0i32;
    unsafe {
        zggev_(
            b"V".as_ptr(),
            b"V".as_ptr(),
            &ni,
            aa.as_mut_ptr(),
            &ni.max(1),
            bb.as_mut_ptr(),
            &ni.max(1),
            alpha.as_mut_ptr(),
            beta.as_mut_ptr(),
            vl.as_mut_ptr(),
            &ni.max(1),
            vr.as_mut_ptr(),
            &ni.max(1),
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info > 0 {
        return Err(MorError::EigNoConvergence { iterations: info });
    }
    check_info(info, "zggev")?;
    Ok((alpha, beta, vl, vr))
}

/// Eigenvalues of a real general matrix.
pub fn dgeev_values(a: &[f64], n: usize) -> Result<Vec<Complex64>> {
    let ni = n as i32;
    let mut aa = a.to_vec();
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let lwork = (8 * n.max(1)) as i32;
    let mut work = vec![0.0; lwork as usize];
    let mut info = 0i32;
    unsafe {
        dgeev_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &ni,
            aa.as_mut_ptr(),
            &ni.max(1),
            wr.as_mut_ptr(),
            wi.as_mut_ptr(),
            std::ptr::null_mut(),
            &1,
            std::ptr::null_mut(),
            &1,
            work.as_mut_ptr(),
            &lwork,
            &mut info,
        );
    }
    if info > 0 {
        return Err(MorError::EigNoConvergence { iterations: info });
    }
    check_info(info, "dgeev")?;
    Ok(wr
        .iter()
        .zip(&wi)
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect())
}

/// Solves A X = B in place for real square A; B is overwritten with X.
pub fn dgesv(a: &mut [f64], b: &mut [f64], n: usize, nrhs: usize) -> Result<()> {
    let (ni, nrhsi) = (n as i32, nrhs as i32);
    let mut ipiv = vec![0i32; n.max(1)];
    let mut info = 0i32;
    unsafe {
        dgesv_(
            &ni,
            &nrhsi,
            a.as_mut_ptr(),
            &ni.max(1),
            ipiv.as_mut_ptr(),
            b.as_mut_ptr(),
            &ni.max(1),
            &mut info,
        );
    }
    check_info(info, "dgesv")
}

/// Solves A X = B in place for complex square A; B is overwritten with X.
pub fn zgesv(a: &mut [Complex64], b: &mut [Complex64], n: usize, nrhs: usize) -> Result<()> {
    let (ni, nrhsi) = (n as i32, nrhs as i32);
    let mut ipiv = vec![0i32; n.max(1)];
    let mut info = 0i32;
    unsafe {
        zgesv_(
            &ni,
            &nrhsi,
            a.as_mut_ptr(),
            &ni.max(1),
            ipiv.as_mut_ptr(),
            b.as_mut_ptr(),
            &ni.max(1),
            &mut info,
        );
    }
    check_info(info, "zgesv")
}

/// Singular values of a complex m x n matrix, descending.
pub fn zgesvd_values(a: &[Complex64], m: usize, n: usize) -> Result<Vec<f64>> {
    let (mi, ni) = (m as i32, n as i32);
    let mn = m.min(n);
    let mut aa = a.to_vec();
    let mut s = vec![0.0; mn.max(1)];
    let lwork = (4 * (m + n).max(1)) as i32;
    let mut work = vec![Complex64::default(); lwork as usize];
    let mut rwork = vec![0.0; 5 * mn.max(1)];
    let mut info = 0i32;
    unsafe {
        zgesvd_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &mi,
            &ni,
            aa.as_mut_ptr(),
            &mi.max(1),
            s.as_mut_ptr(),
            std::ptr::null_mut(),
            &1,
            std::ptr::null_mut(),
            &1,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info > 0 {
        return Err(MorError::EigNoConvergence { iterations: info });
    }
    check_info(info, "zgesvd")?;
    s.truncate(mn);
    Ok(s)
}

/// Rank-revealing (column-pivoted) QR. Returns the orthonormal factor
/// restricted to the detected numerical rank, plus that rank.
pub fn orthonormal_basis(a: &[f64], m: usize, n: usize, rank_tol: f64) -> Result<(Vec<f64>, usize)> {
    let (mi, ni) = (m as i32, n as i32);
    let k = m.min(n);
    let mut qa = a.to_vec();
    let mut jpvt = vec![0i32; n.max(1)];
    let mut tau = vec![0.0; k.max(1)];
    let lwork = (4 * (n + 1).max(m)) as i32;
    let mut work = vec![0.0; lwork as usize];
    let mut info = 0i32;
    unsafe {
        dgeqp3_(
            &mi,
            &ni,
            qa.as_mut_ptr(),
            &mi.max(1),
            jpvt.as_mut_ptr(),
            tau.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            &mut info,
        );
    }
    check_info(info, "dgeqp3")?;

    let r00 = qa.first().copied().unwrap_or(0.0).abs();
    let mut rank = 0usize;
    for j in 0..k {
        if qa[j * m + j].abs() > rank_tol * r00.max(f64::MIN_POSITIVE) {
            rank = j + 1;
        } else {
            break;
        }
    }

    let ki = k as i32;
    unsafe {
        dorgqr_(
            &mi,
            &ki,
            &ki,
            qa.as_mut_ptr(),
            &mi.max(1),
            tau.as_ptr(),
            work.as_mut_ptr(),
            &lwork,
            &mut info,
        );
    }
    check_info(info, "dorgqr")?;
    qa.truncate(m * rank);
    Ok((qa, rank))
}

/// Symmetric eigendecomposition; A is overwritten with the eigenvectors,
/// eigenvalues returned ascending.
pub fn dsyev(a: &mut [f64], n: usize) -> Result<Vec<f64>> {
    let ni = n as i32;
    let mut w = vec![0.0; n.max(1)];
    let lwork = (8 * n.max(1)) as i32;
    let mut work = vec![0.0; lwork as usize];
    let mut info = 0i32;
    unsafe {
        dsyev_(
            b"V".as_ptr(),
            b"U".as_ptr(),
            &ni,
            a.as_mut_ptr(),
            &ni.max(1),
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            &mut info,
        );
    }
    if info > 0 {
        return Err(MorError::EigNoConvergence { iterations: info });
    }
    check_info(info, "dsyev")?;
    w.truncate(n);
    Ok(w)
}
