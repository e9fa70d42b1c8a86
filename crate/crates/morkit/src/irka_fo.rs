//! First-order IRKA for MIMO and SISO systems: shift and tangential
//! direction updates, convergence control, and interpolation checks.

use ndarray::Axis;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::irka_so::ProjectionPair;
use crate::numkernel::dense::{complexify, fro_norm_c, CMat, Mat};
use crate::numkernel::eig::EigenTriplets;
use crate::numkernel::factor::shifted_pencil;
use crate::numkernel::generalized_eig_small;
use crate::sysmodel::{FirstOrderSystem, FrequencyGrid, LtiSystem, ReducedFirstOrderSystem};
use crate::{Limits, MorError, Result};

/// Interpolation points with tangential directions, closed under complex
/// conjugation and sorted by (real, imag).
#[derive(Debug, Clone)]
pub struct ShiftSet {
    pub shifts: Vec<Complex64>,
    /// Left interpolation points; defaults to `shifts`.
    pub left_shifts: Vec<Complex64>,
    /// Right tangential directions, one p-vector per column.
    pub b_dirs: CMat,
    /// Left tangential directions, one m-vector per column.
    pub c_dirs: CMat,
}

impl ShiftSet {
    pub fn new(shifts: Vec<Complex64>, b_dirs: CMat, c_dirs: CMat) -> Result<Self> {
        let left_shifts = shifts.clone();
        let mut set = ShiftSet { shifts, left_shifts, b_dirs, c_dirs };
        set.enforce_closure();
        set.sort_canonical();
        set.validate()?;
        Ok(set)
    }

    /// Rebuilds exact conjugate closure. Shifts of a real problem come in
    /// conjugate pairs up to rounding: near-real values are snapped onto
    /// the axis, the rest matched greedily across the axis and replaced by
    /// exact conjugates (directions taken from the positive-imag member).
    fn enforce_closure(&mut self) {
        let r = self.len();
        for i in 0..r {
            let a = self.shifts[i];
            if a.im != 0.0 && a.im.abs() <= 1e-6 * (1.0 + a.norm()) {
                self.shifts[i].im = 0.0;
            }
        }
        let mut upper: Vec<usize> = (0..r).filter(|&i| self.shifts[i].im > 0.0).collect();
        let mut lower: Vec<usize> = (0..r).filter(|&i| self.shifts[i].im < 0.0).collect();
        let key = |a: &Complex64| (a.re, a.im.abs());
        upper.sort_by(|&i, &j| {
            key(&self.shifts[i]).partial_cmp(&key(&self.shifts[j])).unwrap()
        });
        lower.sort_by(|&i, &j| {
            key(&self.shifts[i]).partial_cmp(&key(&self.shifts[j])).unwrap()
        });
        for (&up, &lo) in upper.iter().zip(&lower) {
            let a = self.shifts[up];
            let b = self.shifts[lo];
            let merged = Complex64::new(0.5 * (a.re + b.re), 0.5 * (a.im - b.im));
            self.shifts[up] = merged;
            self.shifts[lo] = merged.conj();
            let bconj = self.b_dirs.column(up).mapv(|v| v.conj());
            let cconj = self.c_dirs.column(up).mapv(|v| v.conj());
            self.b_dirs.column_mut(lo).assign(&bconj);
            self.c_dirs.column_mut(lo).assign(&cconj);
        }
        // an unmatched member can only be rounding debris; flatten it
        if upper.len() != lower.len() {
            let longer = if upper.len() > lower.len() { &upper } else { &lower };
            for &i in longer.iter().skip(upper.len().min(lower.len())) {
                self.shifts[i].im = 0.0;
            }
        }
        self.left_shifts = self.shifts.clone();
    }

    /// All-ones directions for SISO use.
    pub fn siso(shifts: Vec<Complex64>) -> Result<Self> {
        let r = shifts.len();
        let ones = CMat::from_elem((1, r), Complex64::new(1.0, 0.0));
        ShiftSet::new(shifts, ones.clone(), ones)
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    /// Sorts shifts by (re, |im|, im), carrying directions along. Keying on
    /// |im| keeps each conjugate pair adjacent (lower half first) even when a
    /// real shift shares the same real part.
    pub fn sort_canonical(&mut self) {
        let r = self.len();
        let mut idx: Vec<usize> = (0..r).collect();
        idx.sort_by(|&i, &j| {
            (self.shifts[i].re, self.shifts[i].im.abs(), self.shifts[i].im)
                .partial_cmp(&(self.shifts[j].re, self.shifts[j].im.abs(), self.shifts[j].im))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        self.shifts = idx.iter().map(|&i| self.shifts[i]).collect();
        self.left_shifts = idx.iter().map(|&i| self.left_shifts[i]).collect();
        let permute = |m: &CMat| {
            let mut out = CMat::default((m.nrows(), r));
            for (k, &i) in idx.iter().enumerate() {
                out.column_mut(k).assign(&m.column(i));
            }
            out
        };
        self.b_dirs = permute(&self.b_dirs);
        self.c_dirs = permute(&self.c_dirs);
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.len();
        if self.left_shifts.len() != r || self.b_dirs.ncols() != r || self.c_dirs.ncols() != r {
            return Err(MorError::Dimension("shift set fields disagree in length".into()));
        }
        for a in &self.shifts {
            if a.re <= 0.0 {
                return Err(MorError::InvalidParam(format!(
                    "shift {a} does not have positive real part"
                )));
            }
        }
        conjugate_groups(&self.shifts)?;
        Ok(())
    }
}

/// Grouping of a canonically sorted shift list into real shifts and
/// conjugate pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ShiftGroup {
    Real(usize),
    /// Indices of the (negative-imag, positive-imag) pair members.
    Pair(usize, usize),
}

pub(crate) fn conjugate_groups(shifts: &[Complex64]) -> Result<Vec<ShiftGroup>> {
    let mut groups = Vec::new();
    let mut i = 0;
    while i < shifts.len() {
        let a = shifts[i];
        if a.im == 0.0 {
            groups.push(ShiftGroup::Real(i));
            i += 1;
        } else {
            let tol = 1e-12 * (a.norm() + 1.0);
            if a.im > 0.0 {
                return Err(MorError::InvalidParam(format!(
                    "shift set not closed under conjugation at {a}"
                )));
            }
            // Sorted by (re, im), a run of k identical lower-half shifts is
            // followed by the run of their k conjugates.
            let mut k = 1;
            while i + k < shifts.len() && (shifts[i + k] - a).norm() <= tol {
                k += 1;
            }
            for j in 0..k {
                let pos = i + k + j;
                if pos >= shifts.len() || (shifts[pos] - a.conj()).norm() > tol {
                    return Err(MorError::InvalidParam(format!(
                        "shift set not closed under conjugation at {a}"
                    )));
                }
                groups.push(ShiftGroup::Pair(i + j, pos));
            }
            i += 2 * k;
        }
    }
    Ok(groups)
}

/// How initial interpolation points are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShiftInit {
    #[default]
    Logspaced,
    SeededRandom,
    User,
}

/// IRKA iteration controls.
#[derive(Debug, Clone)]
pub struct IrkaOptions {
    pub r: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub init: ShiftInit,
    pub seed: u64,
    /// Band for initial shift placement.
    pub band: (f64, f64),
    /// Starting shifts when `init == User`.
    pub user_shifts: Option<ShiftSet>,
    pub limits: Limits,
}

impl IrkaOptions {
    pub fn new(r: usize) -> Self {
        IrkaOptions {
            r,
            tol: 1e-6,
            max_iter: 100,
            init: ShiftInit::Logspaced,
            seed: 0,
            band: (1e-2, 2e0),
            user_shifts: None,
            limits: Limits::default(),
        }
    }

    fn validate(&self, full_order: usize) -> Result<()> {
        if self.r == 0 || self.r >= full_order {
            return Err(MorError::InvalidParam(format!(
                "reduced order r = {} must satisfy 0 < r < {full_order}",
                self.r
            )));
        }
        if self.tol <= 0.0 {
            return Err(MorError::InvalidParam("tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
struct ShiftJson {
    re: f64,
    im: f64,
}

/// Convergence record of one IRKA run.
#[derive(Debug, Clone)]
pub struct IrkaReport {
    pub iterations: usize,
    pub converged: bool,
    /// Shifts after each update.
    pub shift_history: Vec<Vec<Complex64>>,
    /// Relative shift change per iteration.
    pub shift_changes: Vec<f64>,
    pub final_shifts: ShiftSet,
}

impl IrkaReport {
    /// JSON with fields `iterations`, `converged`, `shift_history`.
    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Doc {
            iterations: usize,
            converged: bool,
            shift_history: Vec<Vec<ShiftJson>>,
        }
        let doc = Doc {
            iterations: self.iterations,
            converged: self.converged,
            shift_history: self
                .shift_history
                .iter()
                .map(|row| row.iter().map(|a| ShiftJson { re: a.re, im: a.im }).collect())
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}

/// Initial interpolation points over a frequency band.
pub fn initial_shifts(opts: &IrkaOptions, band: &FrequencyGrid, p: usize, m: usize) -> Result<ShiftSet> {
    let r = opts.r;
    if r < 1 {
        return Err(MorError::InvalidParam("r must be >= 1".into()));
    }
    let (lo, hi) = (
        band.points().first().copied().unwrap(),
        band.points().last().copied().unwrap(),
    );
    match opts.init {
        ShiftInit::User => opts
            .user_shifts
            .clone()
            .ok_or_else(|| MorError::InvalidParam("init = user but no shifts given".into())),
        ShiftInit::Logspaced => {
            let grid = FrequencyGrid::log_space(lo, hi, r)?;
            let shifts = grid.points().iter().map(|&w| Complex64::new(w, 0.0)).collect();
            let b = cycled_directions(p, r);
            let c = cycled_directions(m, r);
            ShiftSet::new(shifts, b, c)
        }
        ShiftInit::SeededRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let mut shifts: Vec<Complex64> = (0..r)
                .map(|_| {
                    let t: f64 = rng.gen();
                    Complex64::new((lo.ln() + t * (hi.ln() - lo.ln())).exp(), 0.0)
                })
                .collect();
            shifts.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
            let b = random_unit_directions(&mut rng, p, r);
            let c = random_unit_directions(&mut rng, m, r);
            ShiftSet::new(shifts, b, c)
        }
    }
}

fn cycled_directions(dim: usize, r: usize) -> CMat {
    let mut d = CMat::default((dim, r));
    for j in 0..r {
        d[[j % dim.max(1), j]] = Complex64::new(1.0, 0.0);
    }
    d
}

fn random_unit_directions(rng: &mut ChaCha8Rng, dim: usize, r: usize) -> CMat {
    let mut d = CMat::default((dim, r));
    for j in 0..r {
        let mut col: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        col.iter_mut().for_each(|v| *v /= norm);
        for (i, v) in col.into_iter().enumerate() {
            d[[i, j]] = Complex64::new(v, 0.0);
        }
    }
    d
}

/// Turns the complex rational-Krylov columns into a real basis: each real
/// shift keeps its (real) column, each conjugate pair contributes
/// (sqrt(2) Re v, sqrt(2) Im v) of the positive-imag member.
pub(crate) fn realify_columns(raw: &CMat, shifts: &[Complex64]) -> Result<Mat> {
    let groups = conjugate_groups(shifts)?;
    let n = raw.nrows();
    let r = shifts.len();
    let mut out = Mat::zeros((n, r));
    let mut col = 0usize;
    let sqrt2 = std::f64::consts::SQRT_2;
    for g in groups {
        match g {
            ShiftGroup::Real(i) => {
                out.column_mut(col).assign(&raw.column(i).mapv(|v| v.re));
                col += 1;
            }
            ShiftGroup::Pair(_, pos) => {
                out.column_mut(col).assign(&raw.column(pos).mapv(|v| sqrt2 * v.re));
                out.column_mut(col + 1).assign(&raw.column(pos).mapv(|v| sqrt2 * v.im));
                col += 2;
            }
        }
    }
    Ok(out)
}

/// Raw (un-orthonormalized) rational Krylov columns for a first-order
/// system: V columns (a_i E - A)^{-1} B b_i, W columns from the transposed
/// pencils. Conjugate partners are filled by conjugation.
fn raw_krylov_columns(sys: &FirstOrderSystem, shifts: &ShiftSet) -> Result<(CMat, CMat)> {
    let k = sys.order();
    let r = shifts.len();
    let b = complexify(&sys.b);
    let ct = complexify(&sys.c).t().to_owned();
    let mut v = CMat::default((k, r));
    let mut w = CMat::default((k, r));
    let groups = conjugate_groups(&shifts.shifts)?;
    for g in groups {
        let i = match g {
            ShiftGroup::Real(i) => i,
            ShiftGroup::Pair(_, pos) => pos,
        };
        let alpha = shifts.shifts[i];
        let beta = shifts.left_shifts[i];
        let fac = shifted_pencil(&sys.e, &sys.a, alpha)?;
        let rhs = b.dot(&shifts.b_dirs.column(i).insert_axis(Axis(1)).to_owned());
        let vcol = fac.solve(&rhs)?;
        v.column_mut(i).assign(&vcol.column(0));

        let lhs = ct.dot(&shifts.c_dirs.column(i).insert_axis(Axis(1)).to_owned());
        let wcol = if beta == alpha {
            fac.solve_transpose(&lhs)?
        } else {
            shifted_pencil(&sys.e, &sys.a, beta)?.solve_transpose(&lhs)?
        };
        w.column_mut(i).assign(&wcol.column(0));

        if let ShiftGroup::Pair(neg, _) = g {
            let vc = v.column(i).mapv(|x| x.conj());
            let wc = w.column(i).mapv(|x| x.conj());
            v.column_mut(neg).assign(&vc);
            w.column_mut(neg).assign(&wc);
        }
    }
    Ok((v, w))
}

/// Builds orthonormalized projectors V, W from the shifted solves of a
/// first-order system.
pub fn build_projectors_fo(sys: &FirstOrderSystem, shifts: &ShiftSet) -> Result<ProjectionPair> {
    let (v_raw, w_raw) = raw_krylov_columns(sys, shifts)?;
    let v = crate::numkernel::dense::orthonormalize(
        &realify_columns(&v_raw, &shifts.shifts)?,
        "projector V",
    )?;
    let w = crate::numkernel::dense::orthonormalize(
        &realify_columns(&w_raw, &shifts.shifts)?,
        "projector W",
    )?;
    Ok(ProjectionPair::full_only(v, w))
}

/// Petrov-Galerkin reduction of a sparse first-order system.
pub fn reduce_fo(sys: &FirstOrderSystem, pp: &ProjectionPair) -> Result<ReducedFirstOrderSystem> {
    let v = pp.v();
    let w = pp.w();
    let ehat = w.t().dot(&sys.e.mul_dense(v)?);
    let ahat = w.t().dot(&sys.a.mul_dense(v)?);
    let bhat = w.t().dot(&sys.b);
    let chat = sys.c.dot(v);
    Ok(ReducedFirstOrderSystem {
        ehat,
        ahat,
        bhat,
        chat,
        da_hat: sys.d_a.clone(),
    })
}

/// Mirrors a reduced eigenvalue into a right-half-plane shift.
pub(crate) fn mirror_shift(lambda: Complex64) -> Complex64 {
    let cand = -lambda;
    if cand.re > 0.0 {
        cand
    } else {
        Complex64::new(lambda.re.abs(), -lambda.im)
    }
}

/// Next shift set from the reduced pencil eigendecomposition. With
/// `tangential`, directions update as b <- -Bhat^T y, c <- Chat z.
pub(crate) fn update_shifts(
    eig: &EigenTriplets,
    bhat: &Mat,
    chat: &Mat,
    tangential: bool,
    prev: &ShiftSet,
) -> Result<ShiftSet> {
    let r = eig.values.len();
    let p = bhat.ncols();
    let m = chat.nrows();
    let shifts: Vec<Complex64> = eig.values.iter().map(|&l| mirror_shift(l)).collect();
    let (b_dirs, c_dirs) = if tangential {
        let bt = complexify(bhat).t().to_owned();
        let ch = complexify(chat);
        let mut b = CMat::default((p, r));
        let mut c = CMat::default((m, r));
        for i in 0..r {
            let y = eig.left.column(i);
            let z = eig.right.column(i);
            // b_i^H = -y_i^H Bhat  =>  b_i = -Bhat^T conj(y_i)
            let bi = bt.dot(&y.mapv(|v| -v.conj()).insert_axis(Axis(1)));
            let ci = ch.dot(&z.insert_axis(Axis(1)).to_owned());
            b.column_mut(i).assign(&normalize_direction(&bi.column(0).to_owned()));
            c.column_mut(i).assign(&normalize_direction(&ci.column(0).to_owned()));
        }
        (b, c)
    } else {
        (prev.b_dirs.clone(), prev.c_dirs.clone())
    };
    ShiftSet::new(shifts, b_dirs, c_dirs)
}

fn normalize_direction(v: &crate::numkernel::CVec) -> crate::numkernel::CVec {
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.mapv(|x| x / norm)
    } else {
        let mut e = crate::numkernel::CVec::default(v.len());
        if !e.is_empty() {
            e[0] = Complex64::new(1.0, 0.0);
        }
        e
    }
}

/// Max relative change between two sorted shift lists.
pub(crate) fn shift_change(prev: &ShiftSet, next: &ShiftSet) -> f64 {
    prev.shifts
        .iter()
        .zip(&next.shifts)
        .map(|(a, b)| (a - b).norm() / a.norm().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// The IRKA fixed-point loop, generic over how a shift set becomes a
/// reduced model. `step` builds projectors and reduces at the given shifts.
pub(crate) fn irka_iterate<S>(
    opts: &IrkaOptions,
    init: ShiftSet,
    tangential: bool,
    mut step: S,
) -> Result<(ReducedFirstOrderSystem, ProjectionPair, IrkaReport)>
where
    S: FnMut(&ShiftSet) -> Result<(ProjectionPair, ReducedFirstOrderSystem)>,
{
    let mut shifts = init;
    let mut history: Vec<Vec<Complex64>> = vec![shifts.shifts.clone()];
    let mut changes: Vec<f64> = Vec::new();
    let mut iterations = 0usize;
    let mut converged = false;

    loop {
        let (pp, rom) = step(&shifts).map_err(|e| MorError::IrkaBreakdown {
            iteration: iterations,
            reason: e.to_string(),
        })?;
        if converged || iterations >= opts.max_iter {
            let report = IrkaReport {
                iterations,
                converged,
                shift_history: history,
                shift_changes: changes,
                final_shifts: shifts,
            };
            return Ok((rom, pp, report));
        }

        let eig = generalized_eig_small(&rom.ahat, &rom.ehat, &opts.limits).map_err(|e| {
            MorError::IrkaBreakdown {
                iteration: iterations,
                reason: format!("reduced pencil eigensolve: {e}"),
            }
        })?;
        let next = update_shifts(&eig, &rom.bhat, &rom.chat, tangential, &shifts)?;
        let change = shift_change(&shifts, &next);
        iterations += 1;
        changes.push(change);
        history.push(next.shifts.clone());
        shifts = next;
        if change <= opts.tol {
            converged = true; // one more build/reduce at the converged shifts
        }
    }
}

/// IRKA for first-order MIMO systems.
pub fn irka_mimo(
    sys: &FirstOrderSystem,
    opts: &IrkaOptions,
) -> Result<(ReducedFirstOrderSystem, IrkaReport)> {
    opts.validate(sys.order())?;
    if sys.num_inputs() < 1 || sys.num_outputs() < 1 {
        return Err(MorError::InvalidParam("system must have inputs and outputs".into()));
    }
    let band = FrequencyGrid::log_space(opts.band.0, opts.band.1, opts.r.max(2))?;
    let init = initial_shifts(opts, &band, sys.num_inputs(), sys.num_outputs())?;
    let (rom, _, report) = irka_iterate(opts, init, true, |shifts| {
        let pp = build_projectors_fo(sys, shifts)?;
        let rom = reduce_fo(sys, &pp)?;
        check_reduced_pencil(&rom)?;
        Ok((pp, rom))
    })?;
    Ok((rom, report))
}

/// IRKA for first-order SISO systems: no tangential directions, beta = alpha.
pub fn irka_siso(
    sys: &FirstOrderSystem,
    opts: &IrkaOptions,
) -> Result<(ReducedFirstOrderSystem, IrkaReport)> {
    if sys.num_inputs() != 1 || sys.num_outputs() != 1 {
        return Err(MorError::InvalidParam(format!(
            "irka_siso needs p = m = 1, got p = {}, m = {}",
            sys.num_inputs(),
            sys.num_outputs()
        )));
    }
    opts.validate(sys.order())?;
    let band = FrequencyGrid::log_space(opts.band.0, opts.band.1, opts.r.max(2))?;
    let init = initial_shifts(opts, &band, 1, 1)?;
    let (rom, _, report) = irka_iterate(opts, init, false, |shifts| {
        let pp = build_projectors_fo(sys, shifts)?;
        let rom = reduce_fo(sys, &pp)?;
        check_reduced_pencil(&rom)?;
        Ok((pp, rom))
    })?;
    Ok((rom, report))
}

/// Oblique projection can produce a singular reduced E; fail with context
/// rather than letting the eigensolve return garbage.
pub(crate) fn check_reduced_pencil(rom: &ReducedFirstOrderSystem) -> Result<()> {
    let r = rom.ehat.nrows();
    if r == 0 {
        return Err(MorError::Singular("empty reduced pencil".into()));
    }
    let mut acm = crate::numkernel::dense::to_col_major(&rom.ehat);
    let mut rhs = vec![0.0; r];
    rhs[0] = 1.0;
    match crate::numkernel::lapack::dgesv(&mut acm, &mut rhs, r, 1) {
        Ok(()) if rhs.iter().all(|v| v.is_finite()) => Ok(()),
        _ => Err(MorError::Singular("reduced Ehat is singular".into())),
    }
}

/// Residuals of the tangential interpolation conditions at each shift.
#[derive(Debug, Clone)]
pub struct InterpolationRow {
    pub shift: Complex64,
    /// || G(a) b - Ghat(a) b ||
    pub right_abs: f64,
    /// || G(a) b ||
    pub right_scale: f64,
    /// || c^T G(b) - c^T Ghat(b) ||
    pub left_abs: f64,
    pub left_scale: f64,
    /// | c^T G'(a) b - c^T Ghat'(a) b |, central finite difference; present
    /// when alpha = beta.
    pub hermite_abs: Option<f64>,
    pub hermite_scale: Option<f64>,
}

/// Checks the value and Hermite interpolation conditions of a ROM against
/// the full model at the given shifts.
pub fn check_interpolation(
    full: &dyn LtiSystem,
    rom: &dyn LtiSystem,
    shifts: &ShiftSet,
) -> Result<Vec<InterpolationRow>> {
    let mut rows = Vec::with_capacity(shifts.len());
    for i in 0..shifts.len() {
        let alpha = shifts.shifts[i];
        let beta = shifts.left_shifts[i];
        let b = shifts.b_dirs.column(i).insert_axis(Axis(1)).to_owned();
        let c = shifts.c_dirs.column(i).insert_axis(Axis(1)).to_owned();

        let g_a = full.tf_eval(alpha)?;
        let gh_a = rom.tf_eval(alpha)?;
        let right = (&g_a - &gh_a).dot(&b);
        let right_scale = fro_norm_c(&g_a.dot(&b));

        let g_b = full.tf_eval(beta)?;
        let gh_b = rom.tf_eval(beta)?;
        let ct = c.t().mapv(|v| v.conj());
        let left = ct.dot(&(&g_b - &gh_b));
        let left_scale = fro_norm_c(&ct.dot(&g_b).to_owned());

        let (hermite_abs, hermite_scale) = if alpha == beta {
            let h = 1e-6 * alpha.norm().max(1e-6);
            let dg = tf_derivative(full, alpha, h)?;
            let dgh = tf_derivative(rom, alpha, h)?;
            let diff = ct.dot(&(&dg - &dgh)).dot(&b);
            let scale = ct.dot(&dg).dot(&b);
            (
                Some(fro_norm_c(&diff.to_owned())),
                Some(fro_norm_c(&scale.to_owned())),
            )
        } else {
            (None, None)
        };

        rows.push(InterpolationRow {
            shift: alpha,
            right_abs: fro_norm_c(&right.to_owned()),
            right_scale,
            left_abs: fro_norm_c(&left.to_owned()),
            left_scale,
            hermite_abs,
            hermite_scale,
        });
    }
    Ok(rows)
}

fn tf_derivative(sys: &dyn LtiSystem, s: Complex64, h: f64) -> Result<CMat> {
    let hp = Complex64::new(h, 0.0);
    let plus = sys.tf_eval(s + hp)?;
    let minus = sys.tf_eval(s - hp)?;
    Ok((&plus - &minus).mapv(|v| v / (2.0 * h)))
}

/// Identity-embedding projector for tests and full-order reductions.
pub fn identity_projectors(k: usize) -> ProjectionPair {
    ProjectionPair::full_only(Mat::eye(k), Mat::eye(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::SparseMatrix;
    use crate::sysmodel::LtiSystem;
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

    #[test]
    fn initial_shifts_logspaced() {
        let mut opts = IrkaOptions::new(3);
        opts.band = (1.0, 100.0);
        let band = FrequencyGrid::log_space(1.0, 100.0, 3).unwrap();
        let set = initial_shifts(&opts, &band, 1, 1).unwrap();
        let re: Vec<f64> = set.shifts.iter().map(|a| a.re).collect();
        assert!((re[0] - 1.0).abs() < 1e-12);
        assert!((re[1] - 10.0).abs() < 1e-9);
        assert!((re[2] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn initial_shifts_single_point_band() {
        let mut opts = IrkaOptions::new(1);
        opts.band = (1.0, 1.0);
        let band = FrequencyGrid::new(vec![1.0]).unwrap();
        let set = initial_shifts(&opts, &band, 1, 1).unwrap();
        assert_eq!(set.shifts, vec![Complex64::new(1.0, 0.0)]);
    }

    #[test]
    fn seeded_random_is_deterministic() {
        let mut opts = IrkaOptions::new(4);
        opts.init = ShiftInit::SeededRandom;
        let band = FrequencyGrid::log_space(1.0, 100.0, 4).unwrap();
        let a = initial_shifts(&opts, &band, 2, 3).unwrap();
        let b = initial_shifts(&opts, &band, 2, 3).unwrap();
        assert_eq!(a.shifts, b.shifts);
        assert_eq!(a.b_dirs, b.b_dirs);
        assert_eq!(a.c_dirs, b.c_dirs);
    }

    #[test]
    fn scalar_projector_column() {
        let sys = scalar_fo();
        let shifts = ShiftSet::siso(vec![Complex64::new(1.0, 0.0)]).unwrap();
        let pp = build_projectors_fo(&sys, &shifts).unwrap();
        // raw column is 0.5, orthonormalized to +-1
        assert!((pp.v()[[0, 0]].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn conjugate_pair_realifies() {
        let sys = FirstOrderSystem {
            e: SparseMatrix::identity(2),
            a: SparseMatrix::from_triplets(2, 2, vec![(0, 1, 1.0), (1, 0, -1.0), (1, 1, -2.0)])
                .unwrap(),
            b: array![[1.0], [1.0]],
            c: array![[1.0, 0.0]],
            d_a: array![[0.0]],
        };
        let shifts = ShiftSet::siso(vec![Complex64::new(1.0, 2.0), Complex64::new(1.0, -2.0)])
            .unwrap();
        let pp = build_projectors_fo(&sys, &shifts).unwrap();
        assert_eq!(pp.v().dim(), (2, 2));
        assert!(pp.v().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn reduce_identity_projectors_preserves_tf() {
        let sos = crate::models::build_som(&crate::models::SomParams::new(2)).unwrap();
        let fo = crate::sysmodel::linearize(&sos).unwrap();
        let pp = identity_projectors(fo.order());
        let rom = reduce_fo(&fo, &pp).unwrap();
        for s in [Complex64::new(0.5, 1.0), Complex64::new(2.0, -3.0)] {
            let g = fo.tf_eval(s).unwrap();
            let gh = rom.tf_eval(s).unwrap();
            assert!(fro_norm_c(&(&g - &gh)) <= 1e-12 * fro_norm_c(&g));
        }
    }

    #[test]
    fn rejects_full_order_request() {
        let sys = scalar_fo();
        let opts = IrkaOptions::new(1);
        assert!(irka_mimo(&sys, &opts).is_err());
    }

    #[test]
    fn siso_converges_on_diagonal_system() {
        let sys = FirstOrderSystem {
            e: SparseMatrix::identity(3),
            a: SparseMatrix::from_triplets(
                3,
                3,
                vec![(0, 0, -1.0), (1, 1, -2.0), (2, 2, -5.0)],
            )
            .unwrap(),
            b: array![[1.0], [1.0], [1.0]],
            c: array![[1.0, 1.0, 1.0]],
            d_a: array![[0.0]],
        };
        let mut opts = IrkaOptions::new(1);
        opts.band = (0.5, 10.0);
        let (rom, report) = irka_siso(&sys, &opts).unwrap();
        assert!(report.converged, "changes: {:?}", report.shift_changes);
        // converged shifts must interpolate the full model
        let rows = check_interpolation(&sys, &rom, &report.final_shifts).unwrap();
        for row in &rows {
            assert!(row.right_abs <= 1e-8 * row.right_scale);
            assert!(row.hermite_abs.unwrap() <= 1e-5 * row.hermite_scale.unwrap().max(1e-30));
        }
        let json = report.to_json().unwrap();
        assert!(json.contains("\"iterations\""));
        assert!(json.contains("\"shift_history\""));
    }

    #[test]
    fn siso_rejects_mimo() {
        let sys = FirstOrderSystem {
            e: SparseMatrix::identity(2),
            a: SparseMatrix::from_triplets(2, 2, vec![(0, 0, -1.0), (1, 1, -2.0)]).unwrap(),
            b: Mat::eye(2),
            c: array![[1.0, 0.0]],
            d_a: Mat::zeros((1, 2)),
        };
        let opts = IrkaOptions::new(1);
        assert!(irka_siso(&sys, &opts).is_err());
    }

    #[test]
    fn mirror_keeps_rhp() {
        let m = mirror_shift(Complex64::new(-2.0, 3.0));
        assert!((m - Complex64::new(2.0, -3.0)).norm() < 1e-15);
        let m = mirror_shift(Complex64::new(2.0, 3.0));
        assert!((m - Complex64::new(2.0, -3.0)).norm() < 1e-15);
    }

    #[test]
    fn interpolation_holds_for_fixed_shifts() {
        let sos = crate::models::build_som(&crate::models::SomParams::new(16)).unwrap();
        let fo = crate::sysmodel::linearize(&sos).unwrap();
        let shifts = ShiftSet::siso(vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(1.0, 2.0),
            Complex64::new(1.0, -2.0),
            Complex64::new(3.0, 0.0),
        ])
        .unwrap();
        let pp = build_projectors_fo(&fo, &shifts).unwrap();
        let rom = reduce_fo(&fo, &pp).unwrap();
        let rows = check_interpolation(&fo, &rom, &shifts).unwrap();
        for row in &rows {
            assert!(
                row.right_abs <= 1e-8 * row.right_scale,
                "right residual {} vs scale {}",
                row.right_abs,
                row.right_scale
            );
            assert!(row.left_abs <= 1e-8 * row.left_scale);
        }
    }

    #[test]
    fn broken_interpolation_detected() {
        let sos = crate::models::build_som(&crate::models::SomParams::new(8)).unwrap();
        let fo = crate::sysmodel::linearize(&sos).unwrap();
        let shifts = ShiftSet::siso(vec![Complex64::new(1.0, 0.0), Complex64::new(5.0, 0.0)])
            .unwrap();
        let pp = build_projectors_fo(&fo, &shifts).unwrap();
        let mut rom = reduce_fo(&fo, &pp).unwrap();
        rom.bhat *= 2.0;
        let rows = check_interpolation(&fo, &rom, &shifts).unwrap();
        assert!(rows.iter().any(|r| r.right_abs > 1e-3 * r.right_scale));
    }
}
