//! System containers, second-order to first-order linearization,
//! transfer-function evaluation, stability checks, and frequency sweeps.

use std::io::Write;

use num_complex::Complex64;

use crate::numkernel::dense::{complexify, sigma_max, solve_complex, CMat, Mat};
use crate::numkernel::factor::{assemble_quadratic_pencil, shifted_pencil};
use crate::numkernel::lapack;
use crate::numkernel::sparse::SparseMatrix;
use crate::{Limits, MorError, Result};

/// Second-order system M xi'' + D xi' + K xi = H u, y = L xi.
#[derive(Debug, Clone)]
pub struct SecondOrderSystem {
    pub m: SparseMatrix,
    pub d: SparseMatrix,
    pub k: SparseMatrix,
    pub h: Mat,
    pub l: Mat,
}

impl SecondOrderSystem {
    pub fn new(m: SparseMatrix, d: SparseMatrix, k: SparseMatrix, h: Mat, l: Mat) -> Result<Self> {
        let n = m.nrows();
        if !m.is_square() || !d.is_square() || !k.is_square() {
            return Err(MorError::Dimension("M, D, K must be square".into()));
        }
        if d.nrows() != n || k.nrows() != n {
            return Err(MorError::Dimension(format!(
                "M, D, K dimensions disagree: {n}, {}, {}",
                d.nrows(),
                k.nrows()
            )));
        }
        if h.nrows() != n {
            return Err(MorError::Dimension(format!(
                "H has {} rows, expected {n}",
                h.nrows()
            )));
        }
        if l.ncols() != n {
            return Err(MorError::Dimension(format!(
                "L has {} columns, expected {n}",
                l.ncols()
            )));
        }
        Ok(SecondOrderSystem { m, d, k, h, l })
    }

    pub fn order(&self) -> usize {
        self.m.nrows()
    }

    pub fn num_inputs(&self) -> usize {
        self.h.ncols()
    }

    pub fn num_outputs(&self) -> usize {
        self.l.nrows()
    }

    pub fn is_siso(&self) -> bool {
        self.num_inputs() == 1 && self.num_outputs() == 1
    }
}

/// First-order system E x' = A x + B u, y = C x + D_a u.
#[derive(Debug, Clone)]
pub struct FirstOrderSystem {
    pub e: SparseMatrix,
    pub a: SparseMatrix,
    pub b: Mat,
    pub c: Mat,
    pub d_a: Mat,
}

impl FirstOrderSystem {
    pub fn order(&self) -> usize {
        self.e.nrows()
    }

    pub fn num_inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn num_outputs(&self) -> usize {
        self.c.nrows()
    }
}

/// Which projector block a reduced second-order model was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Position,
    Velocity,
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Level::Position => write!(f, "position"),
            Level::Velocity => write!(f, "velocity"),
        }
    }
}

/// Reduced second-order model; retains the (M, D, K, H, L) structure.
#[derive(Debug, Clone)]
pub struct ReducedSecondOrderSystem {
    pub level: Level,
    pub mhat: Mat,
    pub dhat: Mat,
    pub khat: Mat,
    pub hhat: Mat,
    pub lhat: Mat,
}

impl ReducedSecondOrderSystem {
    pub fn order(&self) -> usize {
        self.mhat.nrows()
    }
}

/// Reduced first-order model with dense operators.
#[derive(Debug, Clone)]
pub struct ReducedFirstOrderSystem {
    pub ehat: Mat,
    pub ahat: Mat,
    pub bhat: Mat,
    pub chat: Mat,
    pub da_hat: Mat,
}

impl ReducedFirstOrderSystem {
    pub fn order(&self) -> usize {
        self.ehat.nrows()
    }

    pub fn num_inputs(&self) -> usize {
        self.bhat.ncols()
    }

    pub fn num_outputs(&self) -> usize {
        self.chat.nrows()
    }
}

/// Strictly increasing positive frequency grid in rad/s.
#[derive(Debug, Clone)]
pub struct FrequencyGrid {
    points: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(MorError::InvalidParam("frequency grid is empty".into()));
        }
        for w in &points {
            if !w.is_finite() || *w <= 0.0 {
                return Err(MorError::InvalidParam(format!(
                    "frequency grid point {w} is not positive and finite"
                )));
            }
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MorError::InvalidParam(
                "frequency grid must be strictly increasing".into(),
            ));
        }
        Ok(FrequencyGrid { points })
    }

    /// Logarithmically spaced grid, inclusive of both endpoints.
    pub fn log_space(min: f64, max: f64, n: usize) -> Result<Self> {
        if n == 0 || min <= 0.0 || max < min {
            return Err(MorError::InvalidParam(format!(
                "bad log grid: [{min}, {max}] with {n} points"
            )));
        }
        if n == 1 {
            return FrequencyGrid::new(vec![(min * max).sqrt()]);
        }
        let (l0, l1) = (min.ln(), max.ln());
        let pts = (0..n)
            .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
            .collect();
        FrequencyGrid::new(pts)
    }

    /// Default band for sigma plots: 200 points on [1e-2, 1e4] rad/s.
    pub fn default_band() -> Self {
        FrequencyGrid::log_space(1e-2, 1e4, 200).expect("default grid is valid")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Anything with a rational transfer function G(s).
pub trait LtiSystem {
    /// Evaluates G(s) as a dense complex m x p matrix.
    fn tf_eval(&self, s: Complex64) -> Result<CMat>;
    fn num_inputs(&self) -> usize;
    fn num_outputs(&self) -> usize;
}

impl LtiSystem for SecondOrderSystem {
    fn tf_eval(&self, s: Complex64) -> Result<CMat> {
        // Factor the n-size quadratic pencil directly, never the 2n form.
        let fac = assemble_quadratic_pencil(&self.m, &self.d, &self.k, s)?;
        let x = fac.solve(&complexify(&self.h))?;
        Ok(complexify(&self.l).dot(&x))
    }

    fn num_inputs(&self) -> usize {
        self.num_inputs()
    }

    fn num_outputs(&self) -> usize {
        self.num_outputs()
    }
}

impl LtiSystem for FirstOrderSystem {
    fn tf_eval(&self, s: Complex64) -> Result<CMat> {
        let fac = shifted_pencil(&self.e, &self.a, s)?;
        let x = fac.solve(&complexify(&self.b))?;
        Ok(complexify(&self.c).dot(&x) + complexify(&self.d_a))
    }

    fn num_inputs(&self) -> usize {
        self.num_inputs()
    }

    fn num_outputs(&self) -> usize {
        self.num_outputs()
    }
}

impl LtiSystem for ReducedSecondOrderSystem {
    fn tf_eval(&self, s: Complex64) -> Result<CMat> {
        let pencil = complexify(&self.mhat).mapv(|v| v * s * s)
            + complexify(&self.dhat).mapv(|v| v * s)
            + complexify(&self.khat);
        let x = solve_complex(&pencil, &complexify(&self.hhat))
            .map_err(|_| MorError::Singular(format!("reduced resolvent singular at s = {s}")))?;
        Ok(complexify(&self.lhat).dot(&x))
    }

    fn num_inputs(&self) -> usize {
        self.hhat.ncols()
    }

    fn num_outputs(&self) -> usize {
        self.lhat.nrows()
    }
}

impl LtiSystem for ReducedFirstOrderSystem {
    fn tf_eval(&self, s: Complex64) -> Result<CMat> {
        let pencil = complexify(&self.ehat).mapv(|v| v * s) - complexify(&self.ahat);
        let x = solve_complex(&pencil, &complexify(&self.bhat))
            .map_err(|_| MorError::Singular(format!("reduced resolvent singular at s = {s}")))?;
        Ok(complexify(&self.chat).dot(&x) + complexify(&self.da_hat))
    }

    fn num_inputs(&self) -> usize {
        self.num_inputs()
    }

    fn num_outputs(&self) -> usize {
        self.num_outputs()
    }
}

/// Converts to the first-order form E = [[I,0],[0,M]], A = [[0,I],[-K,-D]],
/// B = [0; H], C = [L, 0], D_a = 0, preserving sparsity.
pub fn linearize(sos: &SecondOrderSystem) -> Result<FirstOrderSystem> {
    let n = sos.order();
    let p = sos.num_inputs();
    let m = sos.num_outputs();
    let k2 = 2 * n;

    let mut e_trip: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 1.0)).collect();
    for &(i, j, v) in sos.m.entries() {
        e_trip.push((n + i, n + j, v));
    }

    let mut a_trip: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, n + i, 1.0)).collect();
    for &(i, j, v) in sos.k.entries() {
        a_trip.push((n + i, j, -v));
    }
    for &(i, j, v) in sos.d.entries() {
        a_trip.push((n + i, n + j, -v));
    }

    let mut b = Mat::zeros((k2, p));
    b.slice_mut(ndarray::s![n.., ..]).assign(&sos.h);
    let mut c = Mat::zeros((m, k2));
    c.slice_mut(ndarray::s![.., ..n]).assign(&sos.l);

    Ok(FirstOrderSystem {
        e: SparseMatrix::from_triplets(k2, k2, e_trip)?,
        a: SparseMatrix::from_triplets(k2, k2, a_trip)?,
        b,
        c,
        d_a: Mat::zeros((m, p)),
    })
}

/// One point of a sigma sweep.
#[derive(Debug, Clone, Copy)]
pub struct SigmaPoint {
    pub omega: f64,
    pub sigma: f64,
}

/// One point of an error sweep; `rel` is absent where sigma_max(G) = 0.
#[derive(Debug, Clone, Copy)]
pub struct ErrorPoint {
    pub omega: f64,
    pub abs: f64,
    pub rel: Option<f64>,
}

/// Largest singular value of G(j omega) per grid point.
pub fn sigma_sweep(sys: &dyn LtiSystem, grid: &FrequencyGrid) -> Result<Vec<SigmaPoint>> {
    grid.points()
        .iter()
        .map(|&w| {
            let g = sys
                .tf_eval(Complex64::new(0.0, w))
                .map_err(|e| MorError::Singular(format!("at omega = {w}: {e}")))?;
            Ok(SigmaPoint { omega: w, sigma: sigma_max(&g)? })
        })
        .collect()
}

/// Absolute and relative sigma errors between a full model and a ROM.
pub fn error_sweep(
    full: &dyn LtiSystem,
    rom: &dyn LtiSystem,
    grid: &FrequencyGrid,
) -> Result<Vec<ErrorPoint>> {
    grid.points()
        .iter()
        .map(|&w| {
            let s = Complex64::new(0.0, w);
            let g = full
                .tf_eval(s)
                .map_err(|e| MorError::Singular(format!("at omega = {w}: {e}")))?;
            let gh = rom
                .tf_eval(s)
                .map_err(|e| MorError::Singular(format!("at omega = {w}: {e}")))?;
            let abs = sigma_max(&(&g - &gh))?;
            let denom = sigma_max(&g)?;
            let rel = if denom > 0.0 { Some(abs / denom) } else { None };
            Ok(ErrorPoint { omega: w, abs, rel })
        })
        .collect()
}

/// Stability verdict with the spectral abscissa.
#[derive(Debug, Clone, Copy)]
pub struct Stability {
    pub stable: bool,
    pub abscissa: f64,
}

fn pencil_abscissa(e: &Mat, a: &Mat) -> Result<Stability> {
    // E is nonsingular by construction; reduce to a standard eigenproblem.
    let ea = crate::numkernel::dense::solve_real(e, a)
        .map_err(|_| MorError::Singular("E is singular in stability check".into()))?;
    let eigs = lapack::dgeev_values(&crate::numkernel::dense::to_col_major(&ea), ea.nrows())?;
    let abscissa = eigs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(Stability { stable: abscissa < 0.0, abscissa })
}

/// Stability of a second-order system via the linearized pencil. Systems
/// above the small-dense limit need `force` (dense O(n^3) eigensolve).
pub fn is_stable_so(sos: &SecondOrderSystem, limits: &Limits, force: bool) -> Result<Stability> {
    let k2 = 2 * sos.order();
    if k2 > limits.small_dense && !force {
        return Err(MorError::Oversize { n: k2, limit: limits.small_dense });
    }
    if k2 > limits.dense_gramian {
        return Err(MorError::Oversize { n: k2, limit: limits.dense_gramian });
    }
    let fo = linearize(sos)?;
    pencil_abscissa(&fo.e.to_dense(), &fo.a.to_dense())
}

/// Stability of a sparse first-order system (same size policy).
pub fn is_stable_fo(fo: &FirstOrderSystem, limits: &Limits, force: bool) -> Result<Stability> {
    let k = fo.order();
    if k > limits.small_dense && !force {
        return Err(MorError::Oversize { n: k, limit: limits.small_dense });
    }
    if k > limits.dense_gramian {
        return Err(MorError::Oversize { n: k, limit: limits.dense_gramian });
    }
    pencil_abscissa(&fo.e.to_dense(), &fo.a.to_dense())
}

/// Stability of a reduced first-order model.
pub fn is_stable_rom(rom: &ReducedFirstOrderSystem) -> Result<Stability> {
    pencil_abscissa(&rom.ehat, &rom.ahat)
}

/// Stability of a reduced second-order model.
pub fn is_stable_rom_so(rom: &ReducedSecondOrderSystem) -> Result<Stability> {
    let sos = SecondOrderSystem::new(
        SparseMatrix::from_dense(&rom.mhat),
        SparseMatrix::from_dense(&rom.dhat),
        SparseMatrix::from_dense(&rom.khat),
        rom.hhat.clone(),
        rom.lhat.clone(),
    )?;
    let fo = linearize(&sos)?;
    pencil_abscissa(&fo.e.to_dense(), &fo.a.to_dense())
}

/// Writes a sigma sweep as CSV with header `omega,sigma`.
pub fn write_sigma_csv<W: Write>(mut w: W, rows: &[SigmaPoint]) -> Result<()> {
    writeln!(w, "omega,sigma")?;
    for p in rows {
        writeln!(w, "{:e},{:e}", p.omega, p.sigma)?;
    }
    Ok(())
}

/// Writes an error sweep as CSV with header `omega,abs_err,rel_err`.
pub fn write_error_csv<W: Write>(mut w: W, rows: &[ErrorPoint]) -> Result<()> {
    writeln!(w, "omega,abs_err,rel_err")?;
    for p in rows {
        match p.rel {
            Some(rel) => writeln!(w, "{:e},{:e},{:e}", p.omega, p.abs, rel)?,
            None => writeln!(w, "{:e},{:e},", p.omega, p.abs)?,
        }
    }
    Ok(())
}
