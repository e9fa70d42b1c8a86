//! H2 norms and reduction errors via Gramian block equations. The error
//! system G - Ghat has block-diagonal (E, A) operands, so its Gramian
//! splits into 11/12/22 blocks: two Lyapunov solves at each size plus one
//! sparse-dense Sylvester solve for the coupling, never materializing the
//! (2n + r) x (2n + r) system.

use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;

use crate::numkernel::dense::{to_col_major, Mat};
use crate::numkernel::{
    lyap_dense, lyap_residual, sylvester_residual, sylvester_sparse_dense, SparseMatrix,
};
use crate::sysmodel::{
    FirstOrderSystem, FrequencyGrid, LtiSystem, ReducedFirstOrderSystem, ReducedSecondOrderSystem,
};
use crate::{Limits, MorError, Result};

/// The difference system G(s) - Ghat(s), kept as the pair of realizations.
/// Its state matrices are block diagonal and are never assembled.
#[derive(Debug, Clone, Copy)]
pub struct ErrorSystem<'a> {
    pub fo: &'a FirstOrderSystem,
    pub rom: &'a ReducedFirstOrderSystem,
}

pub fn build_error_system<'a>(
    fo: &'a FirstOrderSystem,
    rom: &'a ReducedFirstOrderSystem,
) -> Result<ErrorSystem<'a>> {
    if fo.num_inputs() != rom.num_inputs() || fo.num_outputs() != rom.num_outputs() {
        return Err(MorError::Dimension(format!(
            "error system needs matching i/o: full is {}x{}, reduced is {}x{}",
            fo.num_outputs(),
            fo.num_inputs(),
            rom.num_outputs(),
            rom.num_inputs()
        )));
    }
    Ok(ErrorSystem { fo, rom })
}

impl LtiSystem for ErrorSystem<'_> {
    fn tf_eval(&self, s: Complex64) -> Result<Array2<Complex64>> {
        Ok(&self.fo.tf_eval(s)? - &self.rom.tf_eval(s)?)
    }

    fn num_inputs(&self) -> usize {
        self.fo.num_inputs()
    }

    fn num_outputs(&self) -> usize {
        self.fo.num_outputs()
    }
}

/// Gramian blocks of the error system with their relative residuals.
#[derive(Debug, Clone)]
pub struct GramianBlocks {
    pub p11: Mat,
    pub p12: Mat,
    pub p22: Mat,
    pub q11: Mat,
    pub q12: Mat,
    pub q22: Mat,
    /// (equation name, relative residual), all bounded by `RESIDUAL_TOL`.
    pub residuals: Vec<(String, f64)>,
}

pub const RESIDUAL_TOL: f64 = 1e-8;

impl GramianBlocks {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, (_, r)| m.max(*r))
    }
}

fn check_residual(name: &str, residual: f64, out: &mut Vec<(String, f64)>) -> Result<()> {
    if !residual.is_finite() || residual > RESIDUAL_TOL {
        return Err(MorError::ResidualTooLarge {
            residual,
            tol: RESIDUAL_TOL,
            context: name.to_string(),
        });
    }
    out.push((name.to_string(), residual));
    Ok(())
}

fn require_stable_fo(fo: &FirstOrderSystem, limits: &Limits) -> Result<()> {
    // gate on the Gramian-solve bound, not the eigensolve convenience limit
    if fo.order() > limits.dense_gramian {
        return Err(MorError::Oversize { n: fo.order(), limit: limits.dense_gramian });
    }
    let st = crate::sysmodel::is_stable_fo(fo, limits, true)?;
    if !st.stable {
        return Err(MorError::Unstable { abscissa: st.abscissa });
    }
    Ok(())
}

fn require_stable_rom(rom: &ReducedFirstOrderSystem) -> Result<()> {
    let st = crate::sysmodel::is_stable_rom(rom)?;
    if !st.stable {
        return Err(MorError::Unstable { abscissa: st.abscissa });
    }
    Ok(())
}

/// Solves the six Gramian block equations of the error system:
///   A P11 E^T + E P11 A^T + B B^T = 0
///   A P12 Ehat^T + E P12 Ahat^T + B Bhat^T = 0
///   Ahat P22 Ehat^T + Ehat P22 Ahat^T + Bhat Bhat^T = 0
/// and their observability duals, where the coupling equation for Q12
/// carries -C^T Chat. All residuals are checked against `RESIDUAL_TOL`.
pub fn solve_gramian_blocks(
    fo: &FirstOrderSystem,
    rom: &ReducedFirstOrderSystem,
    limits: &Limits,
) -> Result<GramianBlocks> {
    let full = solve_full_gramians(fo, limits)?;
    solve_gramian_blocks_with(fo, rom, limits, &full)
}

/// The full model's own controllability/observability Gramians (the 11
/// blocks of the error-system Gramians). These are independent of any
/// reduced model and dominate the cost, so they can be solved once and
/// shared across several reduced models.
pub struct FullGramians {
    pub p11: Mat,
    pub q11: Mat,
    residuals: Vec<(String, f64)>,
}

/// Solves the two large Lyapunov equations of the full model.
pub fn solve_full_gramians(fo: &FirstOrderSystem, limits: &Limits) -> Result<FullGramians> {
    require_stable_fo(fo, limits)?;
    let e_d = fo.e.to_dense();
    let a_d = fo.a.to_dense();
    let et_d = e_d.t().to_owned();
    let at_d = a_d.t().to_owned();
    let mut residuals = Vec::new();

    let f = fo.b.dot(&fo.b.t());
    let p11 = lyap_dense(&a_d, &e_d, &f, limits)?;
    check_residual("P11", lyap_residual(&a_d, &e_d, &f, &p11), &mut residuals)?;

    let f = fo.c.t().dot(&fo.c);
    let q11 = lyap_dense(&at_d, &et_d, &f, limits)?;
    check_residual("Q11", lyap_residual(&at_d, &et_d, &f, &q11), &mut residuals)?;

    Ok(FullGramians { p11, q11, residuals })
}

/// The remaining (reduced and coupling) blocks, given precomputed full-model
/// Gramians.
pub fn solve_gramian_blocks_with(
    fo: &FirstOrderSystem,
    rom: &ReducedFirstOrderSystem,
    limits: &Limits,
    full: &FullGramians,
) -> Result<GramianBlocks> {
    build_error_system(fo, rom)?;
    require_stable_rom(rom)?;

    let a_t = fo.a.transpose();
    let e_t = fo.e.transpose();
    let ehat_t = rom.ehat.t().to_owned();
    let ahat_t = rom.ahat.t().to_owned();

    let mut residuals = full.residuals.clone();
    let p11 = full.p11.clone();
    let q11 = full.q11.clone();

    let f = rom.bhat.dot(&rom.bhat.t());
    let p22 = lyap_dense(&rom.ahat, &rom.ehat, &f, limits)?;
    check_residual("P22", lyap_residual(&rom.ahat, &rom.ehat, &f, &p22), &mut residuals)?;

    let g = fo.b.dot(&rom.bhat.t());
    let p12 = sylvester_sparse_dense(&fo.a, &fo.e, &rom.ahat, &rom.ehat, &g)?;
    check_residual(
        "P12",
        sylvester_residual(&fo.a, &fo.e, &rom.ahat, &rom.ehat, &g, &p12)?,
        &mut residuals,
    )?;

    let f = rom.chat.t().dot(&rom.chat);
    let q22 = lyap_dense(&ahat_t, &ehat_t, &f, limits)?;
    check_residual("Q22", lyap_residual(&ahat_t, &ehat_t, &f, &q22), &mut residuals)?;

    let g = fo.c.t().dot(&rom.chat).mapv(|v| -v);
    let q12 = sylvester_sparse_dense(&a_t, &e_t, &ahat_t, &ehat_t, &g)?;
    check_residual(
        "Q12",
        sylvester_residual(&a_t, &e_t, &ahat_t, &ehat_t, &g, &q12)?,
        &mut residuals,
    )?;

    Ok(GramianBlocks { p11, p12, p22, q11, q12, q22, residuals })
}

fn trace(m: &Mat) -> f64 {
    m.diag().sum()
}

/// Turns the three trace terms into the error norm, clamping cancellation
/// noise. `leading` scales the clamp threshold.
fn finish_error_norm(total: f64, leading: f64) -> Result<f64> {
    if total >= 0.0 {
        Ok(total.sqrt())
    } else if total >= -1e-12 * leading.max(f64::MIN_POSITIVE) {
        Ok(0.0)
    } else {
        Err(MorError::InconsistentGramians(format!(
            "squared error norm {total:.3e} is negative beyond cancellation noise"
        )))
    }
}

/// H2 norm of G - Ghat from the controllability blocks. The cross term
/// enters negatively because the error output is [C, -Chat].
pub fn h2_error_from_p(
    fo: &FirstOrderSystem,
    rom: &ReducedFirstOrderSystem,
    gb: &GramianBlocks,
) -> Result<f64> {
    let t1 = trace(&fo.c.dot(&gb.p11).dot(&fo.c.t()));
    let t2 = trace(&rom.chat.dot(&gb.p22).dot(&rom.chat.t()));
    let cross = trace(&fo.c.dot(&gb.p12).dot(&rom.chat.t()));
    finish_error_norm(t1 + t2 - 2.0 * cross, t1.max(t2))
}

/// Dual formula from the observability blocks; the Q12 equation already
/// carries the -C^T Chat sign, so the cross term enters positively.
pub fn h2_error_from_q(
    fo: &FirstOrderSystem,
    rom: &ReducedFirstOrderSystem,
    gb: &GramianBlocks,
) -> Result<f64> {
    let t1 = trace(&fo.b.t().dot(&gb.q11).dot(&fo.b));
    let t2 = trace(&rom.bhat.t().dot(&gb.q22).dot(&rom.bhat));
    let cross = trace(&fo.b.t().dot(&gb.q12).dot(&rom.bhat));
    finish_error_norm(t1 + t2 + 2.0 * cross, t1.max(t2))
}

/// Tall factors with P = Z_p Z_p^T and Q = Z_q Z_q^T.
#[derive(Debug, Clone)]
pub struct GramianFactors {
    pub z_p: Mat,
    pub z_q: Mat,
}

/// Symmetric semidefinite factorization X = Z Z^T keeping eigenvalues above
/// 1e-12 relative; small negatives from the Lyapunov solve are dropped.
fn semidefinite_factor(x: &Mat, context: &str) -> Result<Mat> {
    let n = x.nrows();
    let sym = (x + &x.t()).mapv(|v| 0.5 * v);
    let mut a = to_col_major(&sym);
    let w = crate::numkernel::lapack::dsyev(&mut a, n)?;
    let wmax = w.iter().fold(0.0_f64, |m, &v| m.max(v));
    if wmax <= 0.0 {
        return Ok(Mat::zeros((n, 0)));
    }
    let lower = -1e-10 * wmax;
    let keep: Vec<usize> = (0..n)
        .filter(|&i| {
            if w[i] < lower {
                return false;
            }
            w[i] > 1e-12 * wmax
        })
        .collect();
    for &wi in &w {
        if wi < lower {
            return Err(MorError::InconsistentGramians(format!(
                "{context} has eigenvalue {wi:.3e} below the semidefinite tolerance"
            )));
        }
    }
    let mut z = Mat::zeros((n, keep.len()));
    for (col, &i) in keep.iter().enumerate() {
        let s = w[i].sqrt();
        for row in 0..n {
            z[[row, col]] = a[i * n + row] * s;
        }
    }
    Ok(z)
}

fn fro(m: &Mat) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// H2 norm of a stable first-order system by the factored trace formula
/// ||C Z_p||_F with P = Z_p Z_p^T, verified against the dual ||B^T Z_q||_F.
pub fn h2_norm_full(fo: &FirstOrderSystem, limits: &Limits) -> Result<(f64, GramianFactors)> {
    require_stable_fo(fo, limits)?;
    let e_d = fo.e.to_dense();
    let a_d = fo.a.to_dense();

    let f = fo.b.dot(&fo.b.t());
    let p = lyap_dense(&a_d, &e_d, &f, limits)?;
    let res = lyap_residual(&a_d, &e_d, &f, &p);
    if res > RESIDUAL_TOL {
        return Err(MorError::ResidualTooLarge {
            residual: res,
            tol: RESIDUAL_TOL,
            context: "controllability Gramian".into(),
        });
    }

    let at_d = a_d.t().to_owned();
    let et_d = e_d.t().to_owned();
    let f = fo.c.t().dot(&fo.c);
    let q = lyap_dense(&at_d, &et_d, &f, limits)?;
    let res = lyap_residual(&at_d, &et_d, &f, &q);
    if res > RESIDUAL_TOL {
        return Err(MorError::ResidualTooLarge {
            residual: res,
            tol: RESIDUAL_TOL,
            context: "observability Gramian".into(),
        });
    }

    let z_p = semidefinite_factor(&p, "controllability Gramian")?;
    let z_q = semidefinite_factor(&q, "observability Gramian")?;
    let norm_p = fro(&fo.c.dot(&z_p));
    let norm_q = fro(&fo.b.t().dot(&z_q));
    if (norm_p - norm_q).abs() > 1e-6 * norm_p.max(f64::MIN_POSITIVE) {
        return Err(MorError::InconsistentGramians(format!(
            "P-route norm {norm_p:.6e} and Q-route norm {norm_q:.6e} disagree"
        )));
    }
    Ok((norm_p, GramianFactors { z_p, z_q }))
}

/// H2 norm of a dense reduced model via the same factored trace route.
pub fn h2_norm_rom(rom: &ReducedFirstOrderSystem, limits: &Limits) -> Result<f64> {
    let fo = FirstOrderSystem {
        e: SparseMatrix::from_dense(&rom.ehat),
        a: SparseMatrix::from_dense(&rom.ahat),
        b: rom.bhat.clone(),
        c: rom.chat.clone(),
        d_a: rom.da_hat.clone(),
    };
    Ok(h2_norm_full(&fo, limits)?.0)
}

/// H2 norm straight from the frequency-domain definition: trapezoidal
/// quadrature of trace(G(jw)^H G(jw)) over the grid, doubled for the
/// negative-frequency half, plus a flat segment from 0 to the first grid
/// point (the integrand is even, so its slope vanishes at 0). The grid must
/// extend past the system's rolloff: the integrand at the last point has to
/// fall below 1e-12 of its peak.
pub fn h2_norm_quadrature(sys: &dyn LtiSystem, grid: &FrequencyGrid) -> Result<f64> {
    let pts = grid.points();
    let mut f = Vec::with_capacity(pts.len());
    for &w in pts {
        let g = sys.tf_eval(Complex64::new(0.0, w))?;
        f.push(g.iter().map(|v| v.norm_sqr()).sum::<f64>());
    }
    let peak = f.iter().fold(0.0_f64, |m, &v| m.max(v));
    if peak == 0.0 {
        return Ok(0.0);
    }
    let tail = f[f.len() - 1] / peak;
    if tail > 1e-12 {
        return Err(MorError::GridTooNarrow { tail });
    }

    let mut integral = f[0] * pts[0];
    for i in 1..pts.len() {
        integral += 0.5 * (f[i - 1] + f[i]) * (pts[i] - pts[i - 1]);
    }
    Ok((integral / std::f64::consts::PI).sqrt())
}

/// Relative H2 reduction error of a second-order ROM against the full
/// model's linearization, by both trace formulas.
#[derive(Debug, Clone, Serialize)]
pub struct H2ErrorReport {
    pub h2_full: f64,
    pub h2_rom: f64,
    pub abs_error_p: f64,
    pub abs_error_q: f64,
    pub rel_error: f64,
    pub residuals: Vec<(String, f64)>,
}

/// Full error pipeline for one reduced model: Gramian blocks, both trace
/// formulas, and the full-model norm for scaling.
pub fn h2_error_report(
    fo: &FirstOrderSystem,
    rom: &ReducedFirstOrderSystem,
    limits: &Limits,
) -> Result<H2ErrorReport> {
    let full = solve_full_gramians(fo, limits)?;
    h2_error_report_with(fo, rom, limits, &full)
}

/// As `h2_error_report`, reusing precomputed full-model Gramians.
pub fn h2_error_report_with(
    fo: &FirstOrderSystem,
    rom: &ReducedFirstOrderSystem,
    limits: &Limits,
    full: &FullGramians,
) -> Result<H2ErrorReport> {
    let gb = solve_gramian_blocks_with(fo, rom, limits, full)?;
    let abs_p = h2_error_from_p(fo, rom, &gb)?;
    let abs_q = h2_error_from_q(fo, rom, &gb)?;
    // P11 and P22 are the controllability Gramians of the full model and the
    // reduced model themselves, so both norms fall out of the solved blocks.
    let h2_full = fo.c.dot(&gb.p11).dot(&fo.c.t()).diag().sum().max(0.0).sqrt();
    let h2_rom = rom.chat.dot(&gb.p22).dot(&rom.chat.t()).diag().sum().max(0.0).sqrt();
    Ok(H2ErrorReport {
        h2_full,
        h2_rom,
        abs_error_p: abs_p,
        abs_error_q: abs_q,
        rel_error: abs_p / h2_full.max(f64::MIN_POSITIVE),
        residuals: gb.residuals,
    })
}

/// Dense first-order form of a second-order reduced model, mirroring the
/// sparse linearization of the full system.
pub fn linearize_reduced(rom: &ReducedSecondOrderSystem) -> Result<ReducedFirstOrderSystem> {
    let r = rom.order();
    let p = rom.hhat.ncols();
    let m = rom.lhat.nrows();
    let mut ehat = Mat::zeros((2 * r, 2 * r));
    let mut ahat = Mat::zeros((2 * r, 2 * r));
    for i in 0..r {
        ehat[[i, i]] = 1.0;
        ahat[[i, r + i]] = 1.0;
        for j in 0..r {
            ehat[[r + i, r + j]] = rom.mhat[[i, j]];
            ahat[[r + i, j]] = -rom.khat[[i, j]];
            ahat[[r + i, r + j]] = -rom.dhat[[i, j]];
        }
    }
    let mut bhat = Mat::zeros((2 * r, p));
    bhat.slice_mut(ndarray::s![r.., ..]).assign(&rom.hhat);
    let mut chat = Mat::zeros((m, 2 * r));
    chat.slice_mut(ndarray::s![.., ..r]).assign(&rom.lhat);
    Ok(ReducedFirstOrderSystem {
        ehat,
        ahat,
        bhat,
        chat,
        da_hat: Mat::zeros((m, p)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_som, SomParams};
    use crate::numkernel::dense::fro_norm_c;
    use crate::sysmodel::linearize;
    use approx::assert_relative_eq;
    use ndarray::array;

    fn scalar_fo() -> FirstOrderSystem {
        FirstOrderSystem {
            e: SparseMatrix::identity(1),
            a: SparseMatrix::from_triplets(1, 1, vec![(0, 0, -1.0)]).unwrap(),
            b: array![[1.0]],
            c: array![[1.0]],
            d_a: array![[0.0]],
        }
    }

    fn rom_copy(fo: &FirstOrderSystem) -> ReducedFirstOrderSystem {
        ReducedFirstOrderSystem {
            ehat: fo.e.to_dense(),
            ahat: fo.a.to_dense(),
            bhat: fo.b.clone(),
            chat: fo.c.clone(),
            da_hat: fo.d_a.clone(),
        }
    }

    #[test]
    fn error_tf_is_difference() {
        let sos = build_som(&SomParams::new(2)).unwrap();
        let fo = linearize(&sos).unwrap();
        let mut rom = rom_copy(&fo);
        rom.bhat *= 0.5;
        let err = build_error_system(&fo, &rom).unwrap();
        for s in [Complex64::new(0.3, 1.0), Complex64::new(2.0, -0.7)] {
            let lhs = err.tf_eval(s).unwrap();
            let rhs = &fo.tf_eval(s).unwrap() - &rom.tf_eval(s).unwrap();
            assert!(fro_norm_c(&(&lhs - &rhs)) <= 1e-14 * fro_norm_c(&rhs).max(1.0));
        }
    }

    #[test]
    fn scalar_blocks_are_half() {
        let fo = scalar_fo();
        let rom = rom_copy(&fo);
        let gb = solve_gramian_blocks(&fo, &rom, &Limits::default()).unwrap();
        assert_relative_eq!(gb.p11[[0, 0]], 0.5, max_relative = 1e-12);
        assert_relative_eq!(gb.p12[[0, 0]], 0.5, max_relative = 1e-12);
        assert_relative_eq!(gb.p22[[0, 0]], 0.5, max_relative = 1e-12);
        assert_relative_eq!(gb.q11[[0, 0]], 0.5, max_relative = 1e-12);
        assert_relative_eq!(gb.q12[[0, 0]], -0.5, max_relative = 1e-12);
        assert_relative_eq!(gb.q22[[0, 0]], 0.5, max_relative = 1e-12);
        assert!(gb.max_residual() <= RESIDUAL_TOL);
    }

    #[test]
    fn identical_rom_gives_zero_error() {
        let fo = scalar_fo();
        let rom = rom_copy(&fo);
        let gb = solve_gramian_blocks(&fo, &rom, &Limits::default()).unwrap();
        assert_eq!(h2_error_from_p(&fo, &rom, &gb).unwrap(), 0.0);
        assert_eq!(h2_error_from_q(&fo, &rom, &gb).unwrap(), 0.0);
    }

    #[test]
    fn zero_rom_error_is_full_norm() {
        let fo = scalar_fo();
        let mut rom = rom_copy(&fo);
        rom.bhat *= 0.0;
        rom.chat *= 0.0;
        let gb = solve_gramian_blocks(&fo, &rom, &Limits::default()).unwrap();
        assert_relative_eq!(gb.p12[[0, 0]], 0.0, epsilon = 1e-14);
        assert_relative_eq!(gb.p22[[0, 0]], 0.0, epsilon = 1e-14);
        let e = h2_error_from_p(&fo, &rom, &gb).unwrap();
        let (norm, _) = h2_norm_full(&fo, &Limits::default()).unwrap();
        assert_relative_eq!(e, norm, max_relative = 1e-12);
        assert_relative_eq!(norm, (0.5_f64).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn critically_damped_oscillator_norm_is_half() {
        // M=1, D=2, K=1, H=L=1: G(s) = 1/(s+1)^2, H2 norm exactly 1/2
        let sos = crate::sysmodel::SecondOrderSystem::new(
            SparseMatrix::identity(1),
            SparseMatrix::from_triplets(1, 1, vec![(0, 0, 2.0)]).unwrap(),
            SparseMatrix::identity(1),
            array![[1.0]],
            array![[1.0]],
        )
        .unwrap();
        let fo = linearize(&sos).unwrap();
        let (norm, factors) = h2_norm_full(&fo, &Limits::default()).unwrap();
        assert_relative_eq!(norm, 0.5, max_relative = 1e-10);
        // factor reconstruction
        let p = factors.z_p.dot(&factors.z_p.t());
        let f = fo.b.dot(&fo.b.t());
        let res = lyap_residual(&fo.a.to_dense(), &fo.e.to_dense(), &f, &p);
        assert!(res <= 1e-8, "reconstructed Gramian residual {res}");

        let grid = FrequencyGrid::log_space(1e-4, 1e4, 4000).unwrap();
        let quad = h2_norm_quadrature(&sos, &grid).unwrap();
        assert_relative_eq!(quad, 0.5, max_relative = 1e-3);
    }

    #[test]
    fn doubling_b_doubles_norm() {
        let fo = scalar_fo();
        let mut fo2 = fo.clone();
        fo2.b *= 2.0;
        let (n1, _) = h2_norm_full(&fo, &Limits::default()).unwrap();
        let (n2, _) = h2_norm_full(&fo2, &Limits::default()).unwrap();
        assert_relative_eq!(n2, 2.0 * n1, max_relative = 1e-12);
    }

    #[test]
    fn quadrature_needs_wide_grid() {
        let fo = scalar_fo();
        let grid = FrequencyGrid::log_space(1e-2, 1e0, 50).unwrap();
        match h2_norm_quadrature(&fo, &grid) {
            Err(MorError::GridTooNarrow { .. }) => {}
            other => panic!("expected grid-too-narrow, got {other:?}"),
        }
    }

    #[test]
    fn unstable_system_rejected() {
        let fo = FirstOrderSystem {
            e: SparseMatrix::identity(1),
            a: SparseMatrix::from_triplets(1, 1, vec![(0, 0, 1.0)]).unwrap(),
            b: array![[1.0]],
            c: array![[1.0]],
            d_a: array![[0.0]],
        };
        assert!(matches!(
            h2_norm_full(&fo, &Limits::default()),
            Err(MorError::Unstable { .. })
        ));
    }

    #[test]
    fn duality_and_quadrature_on_som_reduction() {
        let sos = build_som(&SomParams::new(10)).unwrap();
        let fo = linearize(&sos).unwrap();
        let mut opts = crate::irka_fo::IrkaOptions::new(8);
        opts.band = (1e-1, 1e1);
        let (rom, _) = crate::irka_fo::irka_siso(&fo, &opts).unwrap();
        let gb = solve_gramian_blocks(&fo, &rom, &Limits::default()).unwrap();
        let ep = h2_error_from_p(&fo, &rom, &gb).unwrap();
        let eq = h2_error_from_q(&fo, &rom, &gb).unwrap();
        assert_relative_eq!(ep, eq, max_relative = 1e-6);

        let err = build_error_system(&fo, &rom).unwrap();
        let grid = FrequencyGrid::log_space(1e-4, 1e6, 6000).unwrap();
        let quad = h2_norm_quadrature(&err, &grid).unwrap();
        assert_relative_eq!(ep, quad, max_relative = 1e-3);
    }

    #[test]
    fn linearized_rom_tf_matches_second_order() {
        let sos = build_som(&SomParams::new(4)).unwrap();
        let mut opts = crate::irka_fo::IrkaOptions::new(4);
        opts.max_iter = 5;
        opts.tol = 1e-2;
        let result = crate::irka_so::spmor_siso(&sos, &opts).unwrap();
        let rom2 = &result.rom_velocity;
        let rom1 = linearize_reduced(rom2).unwrap();
        for s in [Complex64::new(0.4, 2.0), Complex64::new(1.0, -0.3)] {
            let g2 = rom2.tf_eval(s).unwrap();
            let g1 = rom1.tf_eval(s).unwrap();
            assert!(fro_norm_c(&(&g2 - &g1)) <= 1e-12 * fro_norm_c(&g2).max(1e-12));
        }
    }
}
