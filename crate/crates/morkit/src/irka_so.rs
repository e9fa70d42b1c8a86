//! Structure-preserving IRKA for second-order systems. The iteration runs
//! on stacked projectors applied to the first-order linearization; the
//! emitted reduced models come from independently orthonormalized
//! position- and velocity-level blocks, so they stay second-order.

use ndarray::{concatenate, Axis};
use std::path::Path;

use crate::irka_fo::{
    check_reduced_pencil, conjugate_groups, initial_shifts, irka_iterate, realify_columns,
    reduce_fo, IrkaOptions, IrkaReport, ShiftGroup, ShiftSet,
};
use crate::numkernel::dense::{complexify, orthonormalize, CMat, Mat};
use crate::numkernel::assemble_quadratic_pencil;
use crate::sysmodel::{
    linearize, FrequencyGrid, Level, ReducedSecondOrderSystem, SecondOrderSystem,
};
use crate::{MorError, Result};

/// Orthonormal projector pair, optionally carrying the position/velocity
/// split blocks of a second-order reduction.
#[derive(Debug, Clone)]
pub struct ProjectionPair {
    v: Mat,
    w: Mat,
    pub splits: Option<SplitBlocks>,
}

/// Independently orthonormalized n x r blocks of the stacked projectors.
#[derive(Debug, Clone)]
pub struct SplitBlocks {
    pub v_p: Mat,
    pub v_v: Mat,
    pub w_p: Mat,
    pub w_v: Mat,
}

impl ProjectionPair {
    pub fn full_only(v: Mat, w: Mat) -> Self {
        ProjectionPair { v, w, splits: None }
    }

    pub fn with_splits(v: Mat, w: Mat, splits: SplitBlocks) -> Self {
        ProjectionPair { v, w, splits: Some(splits) }
    }

    pub fn v(&self) -> &Mat {
        &self.v
    }

    pub fn w(&self) -> &Mat {
        &self.w
    }
}

/// Raw complex projector columns of a second-order system at the given
/// shifts: (v1, v2, w1, w2), each n x r. Per shift a single factorization
/// of the quadratic pencil a^2 M + a D + K yields
///   v1 = pencil^{-1} H b,      v2 = a v1,
///   w2 = pencil^{-T} L^T c,    w1 = (a M + D)^T w2.
pub fn projector_columns_so(
    sos: &SecondOrderSystem,
    shifts: &ShiftSet,
) -> Result<(CMat, CMat, CMat, CMat)> {
    let n = sos.order();
    let r = shifts.len();
    let h = complexify(&sos.h);
    let lt = complexify(&sos.l).t().to_owned();
    let mut v1 = CMat::default((n, r));
    let mut v2 = CMat::default((n, r));
    let mut w1 = CMat::default((n, r));
    let mut w2 = CMat::default((n, r));

    for g in conjugate_groups(&shifts.shifts)? {
        let i = match g {
            ShiftGroup::Real(i) => i,
            ShiftGroup::Pair(_, pos) => pos,
        };
        let alpha = shifts.shifts[i];
        let beta = shifts.left_shifts[i];
        let fac = assemble_quadratic_pencil(&sos.m, &sos.d, &sos.k, alpha)?;

        let rhs = h.dot(&shifts.b_dirs.column(i).insert_axis(Axis(1)).to_owned());
        let v1c = fac.solve(&rhs)?;
        let v2c = v1c.mapv(|x| alpha * x);

        let lhs = lt.dot(&shifts.c_dirs.column(i).insert_axis(Axis(1)).to_owned());
        let w2c = if beta == alpha {
            fac.solve_transpose(&lhs)?
        } else {
            assemble_quadratic_pencil(&sos.m, &sos.d, &sos.k, beta)?.solve_transpose(&lhs)?
        };
        // w1 from a sparse multiply, never another solve
        let w1c = sos
            .m
            .mul_transpose_dense_complex(&w2c)?
            .mapv(|x| beta * x)
            + sos.d.mul_transpose_dense_complex(&w2c)?;

        v1.column_mut(i).assign(&v1c.column(0));
        v2.column_mut(i).assign(&v2c.column(0));
        w1.column_mut(i).assign(&w1c.column(0));
        w2.column_mut(i).assign(&w2c.column(0));
        if let ShiftGroup::Pair(neg, _) = g {
            for dst in [&mut v1, &mut v2, &mut w1, &mut w2] {
                let c = dst.column(i).mapv(|x| x.conj());
                dst.column_mut(neg).assign(&c);
            }
        }
    }
    Ok((v1, v2, w1, w2))
}

/// Realifies and orthonormalizes the second-order projector columns. The
/// stacked 2n x r pair drives the inner first-order iteration; the split
/// blocks are orthonormalized independently for the emitted reduced models.
pub fn assemble_projectors_so(
    sos: &SecondOrderSystem,
    shifts: &ShiftSet,
) -> Result<ProjectionPair> {
    let (v1, v2, w1, w2) = projector_columns_so(sos, shifts)?;
    let stack = |top: &CMat, bot: &CMat| concatenate(Axis(0), &[top.view(), bot.view()]).unwrap();

    let v = orthonormalize(
        &realify_columns(&stack(&v1, &v2), &shifts.shifts)?,
        "stacked projector V",
    )?;
    let w = orthonormalize(
        &realify_columns(&stack(&w1, &w2), &shifts.shifts)?,
        "stacked projector W",
    )?;
    let splits = SplitBlocks {
        v_p: orthonormalize(&realify_columns(&v1, &shifts.shifts)?, "position block Vp")?,
        v_v: orthonormalize(&realify_columns(&v2, &shifts.shifts)?, "velocity block Vv")?,
        w_p: orthonormalize(&realify_columns(&w1, &shifts.shifts)?, "position block Wp")?,
        w_v: orthonormalize(&realify_columns(&w2, &shifts.shifts)?, "velocity block Wv")?,
    };
    Ok(ProjectionPair { v, w, splits: Some(splits) })
}

/// Projects a second-order system onto one level's split blocks.
pub fn reduce_so(
    sos: &SecondOrderSystem,
    pp: &ProjectionPair,
    level: Level,
) -> Result<ReducedSecondOrderSystem> {
    let splits = pp
        .splits
        .as_ref()
        .ok_or_else(|| MorError::InvalidParam("projection pair carries no split blocks".into()))?;
    let (v, w) = match level {
        Level::Position => (&splits.v_p, &splits.w_p),
        Level::Velocity => (&splits.v_v, &splits.w_v),
    };
    Ok(ReducedSecondOrderSystem {
        level,
        mhat: w.t().dot(&sos.m.mul_dense(v)?),
        dhat: w.t().dot(&sos.d.mul_dense(v)?),
        khat: w.t().dot(&sos.k.mul_dense(v)?),
        hhat: w.t().dot(&sos.h),
        lhat: sos.l.dot(v),
    })
}

/// Output of a structure-preserving reduction run.
#[derive(Debug, Clone)]
pub struct SpmorResult {
    pub rom_position: ReducedSecondOrderSystem,
    pub rom_velocity: ReducedSecondOrderSystem,
    pub report: IrkaReport,
}

impl SpmorResult {
    /// Writes both reduced models (Matrix Market, one file per matrix) and
    /// the convergence report JSON into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for rom in [&self.rom_position, &self.rom_velocity] {
            let tag = match rom.level {
                Level::Position => "position",
                Level::Velocity => "velocity",
            };
            let write = |name: &str, mat: &Mat| -> Result<()> {
                crate::models::write_matrix_market_dense(
                    &dir.join(format!("{tag}_{name}.mtx")),
                    mat,
                )
            };
            write("M", &rom.mhat)?;
            write("D", &rom.dhat)?;
            write("K", &rom.khat)?;
            write("H", &rom.hhat)?;
            write("L", &rom.lhat)?;
        }
        std::fs::write(dir.join("report.json"), self.report.to_json()?)?;
        Ok(())
    }
}

fn spmor_run(
    sos: &SecondOrderSystem,
    opts: &IrkaOptions,
    tangential: bool,
) -> Result<SpmorResult> {
    if opts.r == 0 || opts.r >= sos.order() {
        return Err(MorError::InvalidParam(format!(
            "reduced order r = {} must satisfy 0 < r < {}",
            opts.r,
            sos.order()
        )));
    }
    let fo = linearize(sos)?;
    let band = FrequencyGrid::log_space(opts.band.0, opts.band.1, opts.r.max(2))?;
    let init = initial_shifts(opts, &band, sos.num_inputs(), sos.num_outputs())?;
    let (_, pp, report) = irka_iterate(opts, init, tangential, |shifts| {
        let pp = assemble_projectors_so(sos, shifts)?;
        let rom = reduce_fo(&fo, &pp)?;
        check_reduced_pencil(&rom)?;
        Ok((pp, rom))
    })?;
    Ok(SpmorResult {
        rom_position: reduce_so(sos, &pp, Level::Position)?,
        rom_velocity: reduce_so(sos, &pp, Level::Velocity)?,
        report,
    })
}

/// Structure-preserving IRKA for second-order MIMO systems.
pub fn spmor_mimo(sos: &SecondOrderSystem, opts: &IrkaOptions) -> Result<SpmorResult> {
    spmor_run(sos, opts, true)
}

/// Structure-preserving IRKA for second-order SISO systems; tangential
/// directions stay fixed at one.
pub fn spmor_siso(sos: &SecondOrderSystem, opts: &IrkaOptions) -> Result<SpmorResult> {
    if sos.num_inputs() != 1 || sos.num_outputs() != 1 {
        return Err(MorError::InvalidParam(format!(
            "spmor_siso needs p = m = 1, got p = {}, m = {}",
            sos.num_inputs(),
            sos.num_outputs()
        )));
    }
    spmor_run(sos, opts, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use crate::models::{build_som, SomParams};
    use crate::numkernel::dense::fro_norm_c;
    use crate::numkernel::shifted_pencil;

    /// The stacked column [v1; v2] must solve the 2n x 2n shifted system of
    /// the linearization: (a E - A) [v1; v2] = [0; H b].
    #[test]
    fn stacked_columns_solve_linearized_system() {
        let sos = build_som(&SomParams::new(3)).unwrap();
        let fo = linearize(&sos).unwrap();
        let n = sos.order();
        let shifts = ShiftSet::siso(vec![
            Complex64::new(0.7, 0.0),
            Complex64::new(1.5, 3.0),
            Complex64::new(1.5, -3.0),
        ])
        .unwrap();
        let (v1, v2, w1, w2) = projector_columns_so(&sos, &shifts).unwrap();
        for i in 0..shifts.len() {
            let alpha = shifts.shifts[i];
            let fac = shifted_pencil(&fo.e, &fo.a, alpha).unwrap();
            let mut stacked = CMat::default((2 * n, 1));
            for j in 0..n {
                stacked[[j, 0]] = v1[[j, i]];
                stacked[[n + j, 0]] = v2[[j, i]];
            }
            let applied = fac.apply(&stacked).unwrap();
            let mut rhs = CMat::default((2 * n, 1));
            for j in 0..n {
                rhs[[n + j, 0]] = Complex64::new(fo.b[[n + j, 0]], 0.0);
            }
            let res = fro_norm_c(&(&applied - &rhs));
            assert!(res <= 1e-10 * fro_norm_c(&rhs), "right residual {res} at shift {alpha}");

            // left columns solve the transposed system against [L^T c; 0]
            let mut wstack = CMat::default((2 * n, 1));
            for j in 0..n {
                wstack[[j, 0]] = w1[[j, i]];
                wstack[[n + j, 0]] = w2[[j, i]];
            }
            let applied = fac.apply_transpose(&wstack).unwrap();
            let mut lrhs = CMat::default((2 * n, 1));
            for j in 0..n {
                lrhs[[j, 0]] = Complex64::new(fo.c[[0, j]], 0.0);
            }
            let res = fro_norm_c(&(&applied - &lrhs));
            assert!(res <= 1e-10 * fro_norm_c(&lrhs), "left residual {res} at shift {alpha}");
        }
    }

    #[test]
    fn split_blocks_are_orthonormal() {
        let sos = build_som(&SomParams::new(4)).unwrap();
        let shifts = ShiftSet::siso(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 1.0),
            Complex64::new(2.0, -1.0),
        ])
        .unwrap();
        let pp = assemble_projectors_so(&sos, &shifts).unwrap();
        let splits = pp.splits.as_ref().unwrap();
        for b in [&splits.v_p, &splits.v_v, &splits.w_p, &splits.w_v, &pp.v, &pp.w] {
            let g = b.t().dot(b);
            let defect = (&g - &Mat::eye(g.nrows()))
                .iter()
                .fold(0.0_f64, |m, v| m.max(v.abs()));
            assert!(defect < 1e-12, "gram defect {defect}");
        }
    }

    #[test]
    fn reduced_models_interpolate_at_fixed_shifts() {
        let sos = build_som(&SomParams::new(8)).unwrap();
        let shifts = ShiftSet::siso(vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(1.0, 2.0),
            Complex64::new(1.0, -2.0),
            Complex64::new(4.0, 0.0),
        ])
        .unwrap();
        let pp = assemble_projectors_so(&sos, &shifts).unwrap();
        for level in [Level::Position, Level::Velocity] {
            let rom = reduce_so(&sos, &pp, level).unwrap();
            let rows = crate::irka_fo::check_interpolation(&sos, &rom, &shifts).unwrap();
            for row in &rows {
                assert!(
                    row.right_abs <= 1e-8 * row.right_scale,
                    "{level}: right residual {} vs {}",
                    row.right_abs,
                    row.right_scale
                );
                assert!(row.left_abs <= 1e-8 * row.left_scale);
            }
        }
    }

    #[test]
    fn spmor_converges_on_small_som() {
        let sos = build_som(&SomParams::new(6)).unwrap();
        let mut opts = IrkaOptions::new(6);
        opts.band = (1e-1, 1e2);
        let result = spmor_siso(&sos, &opts).unwrap();
        assert!(result.report.converged, "changes: {:?}", result.report.shift_changes);
        assert_eq!(result.rom_position.order(), 6);
        assert_eq!(result.rom_velocity.order(), 6);
    }

    #[test]
    fn save_writes_all_artifacts() {
        let sos = build_som(&SomParams::new(2)).unwrap();
        let mut opts = IrkaOptions::new(2);
        opts.max_iter = 3;
        opts.tol = 1e-2;
        let result = spmor_siso(&sos, &opts).unwrap();
        let dir = tempfile::tempdir().unwrap();
        result.save(dir.path()).unwrap();
        for tag in ["position", "velocity"] {
            for name in ["M", "D", "K", "H", "L"] {
                assert!(dir.path().join(format!("{tag}_{name}.mtx")).exists());
            }
        }
        assert!(dir.path().join("report.json").exists());
    }
}
