//! Benchmark system construction (scalable triple-chain oscillator) and
//! Matrix Market ingestion of external datasets.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::numkernel::dense::Mat;
use crate::numkernel::sparse::SparseMatrix;
use crate::sysmodel::SecondOrderSystem;
use crate::{MorError, Result};

/// How the damping matrix of the oscillator model is assembled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DampingPolicy {
    /// Viscous dampers parallel to every spring, plus one extra support
    /// damper at the grounded end of the first chain:
    /// D = nu * (S + e_g e_g^T) with S the unit-coefficient chain topology.
    ChainAndSupport,
    /// Rayleigh damping D = alpha M + beta K.
    Rayleigh { alpha: f64, beta: f64 },
}

/// Parameters of the triple-chain oscillator: three chains of `n1` masses
/// with unit springs, coupled to one heavy shared mass.
#[derive(Debug, Clone)]
pub struct SomParams {
    pub n1: usize,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m0: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k0: f64,
    pub viscosity: f64,
    pub damping: DampingPolicy,
}

impl SomParams {
    pub fn new(n1: usize) -> Self {
        SomParams {
            n1,
            m1: 1.0,
            m2: 2.0,
            m3: 3.0,
            m0: 10.0,
            k1: 10.0,
            k2: 20.0,
            k3: 1.0,
            k0: 50.0,
            viscosity: 5.0,
            damping: DampingPolicy::ChainAndSupport,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n1 < 1 {
            return Err(MorError::InvalidParam("n1 must be >= 1".into()));
        }
        for (v, name) in [
            (self.m1, "m1"),
            (self.m2, "m2"),
            (self.m3, "m3"),
            (self.m0, "m0"),
            (self.k1, "k1"),
            (self.k2, "k2"),
            (self.k3, "k3"),
            (self.k0, "k0"),
            (self.viscosity, "viscosity"),
        ] {
            if v <= 0.0 || !v.is_finite() {
                return Err(MorError::InvalidParam(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Spring topology assembly: for each spring (i, j, k) between free masses
/// (or (i, i, k) to ground) add the stiffness contributions.
fn assemble_springs(n: usize, springs: &[(usize, Option<usize>, f64)]) -> Vec<(usize, usize, f64)> {
    let mut t = Vec::new();
    for &(i, j, k) in springs {
        match j {
            Some(j) => {
                t.push((i, i, k));
                t.push((j, j, k));
                t.push((i, j, -k));
                t.push((j, i, -k));
            }
            None => t.push((i, i, k)),
        }
    }
    let _ = n;
    t
}

/// Builds the triple-chain oscillator of order n = 3 n1 + 1. Single
/// input/output collocated at the midpoint of the softest chain.
pub fn build_som(params: &SomParams) -> Result<SecondOrderSystem> {
    params.validate()?;
    let n1 = params.n1;
    let n = 3 * n1 + 1;
    let coupling = n - 1;

    // M = diag(m1 I, m2 I, m3 I, m0)
    let mut m_trip = Vec::with_capacity(n);
    for (c, mass) in [params.m1, params.m2, params.m3].iter().enumerate() {
        for j in 0..n1 {
            m_trip.push((c * n1 + j, c * n1 + j, *mass));
        }
    }
    m_trip.push((coupling, coupling, params.m0));

    // Spring list: per chain a grounded end, n1-1 internal springs, and a
    // k0 coupling from the chain head to the shared mass.
    let mut springs: Vec<(usize, Option<usize>, f64)> = Vec::new();
    for (c, kc) in [params.k1, params.k2, params.k3].iter().enumerate() {
        let base = c * n1;
        springs.push((base, None, *kc)); // grounded far end
        for j in 0..n1 - 1 {
            springs.push((base + j, Some(base + j + 1), *kc));
        }
        springs.push((base + n1 - 1, Some(coupling), params.k0));
    }
    let k_trip = assemble_springs(n, &springs);

    let d_trip = match params.damping {
        DampingPolicy::ChainAndSupport => {
            let unit: Vec<_> = springs.iter().map(|&(i, j, _)| (i, j, 1.0)).collect();
            let mut t = assemble_springs(n, &unit);
            t.push((0, 0, 1.0)); // extra support damper
            t.iter().map(|&(i, j, v)| (i, j, params.viscosity * v)).collect()
        }
        DampingPolicy::Rayleigh { alpha, beta } => {
            let mut t: Vec<(usize, usize, f64)> =
                m_trip.iter().map(|&(i, j, v)| (i, j, alpha * v)).collect();
            t.extend(k_trip.iter().map(|&(i, j, v)| (i, j, beta * v)));
            t
        }
    };

    // Collocated force actuator and displacement sensor at the midpoint of
    // the softest chain: the collocated pair keeps the velocity-level
    // reduction Galerkin-equivalent (hence stable for this SPD model), and
    // this placement also yields a stable, accurate position-level model.
    let sensor = 2 * n1 + n1 / 2;
    let mut h = Mat::zeros((n, 1));
    h[[sensor, 0]] = 1.0;
    let mut l = Mat::zeros((1, n));
    l[[0, sensor]] = 1.0;

    SecondOrderSystem::new(
        SparseMatrix::from_triplets(n, n, m_trip)?,
        SparseMatrix::from_triplets(n, n, d_trip)?,
        SparseMatrix::from_triplets(n, n, k_trip)?,
        h,
        l,
    )
}

/// A parsed Matrix Market file.
#[derive(Debug, Clone)]
pub enum MatrixMarket {
    Sparse(SparseMatrix),
    Dense(Mat),
}

impl MatrixMarket {
    pub fn into_sparse(self) -> SparseMatrix {
        match self {
            MatrixMarket::Sparse(s) => s,
            MatrixMarket::Dense(d) => SparseMatrix::from_dense(&d),
        }
    }

    pub fn into_dense(self) -> Mat {
        match self {
            MatrixMarket::Sparse(s) => s.to_dense(),
            MatrixMarket::Dense(d) => d,
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> MorError {
    MorError::Parse { line, message: message.into() }
}

/// Reads a Matrix Market file (coordinate or array, real, general or
/// symmetric). Symmetric storage is expanded to full.
pub fn load_matrix_market(path: &Path) -> Result<MatrixMarket> {
    let file = File::open(path)?;
    let lines: Vec<String> = BufReader::new(file)
        .lines()
        .collect::<std::io::Result<_>>()?;
    let mut lines = lines.into_iter().enumerate();

    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let fields: Vec<String> = header.split_whitespace().map(|s| s.to_lowercase()).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_err(1, format!("bad MatrixMarket header: {header}")));
    }
    let coordinate = match fields[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(parse_err(1, format!("unsupported format '{other}'"))),
    };
    match fields[3].as_str() {
        "real" | "integer" => {}
        other => return Err(parse_err(1, format!("unsupported field type '{other}'"))),
    }
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };

    // Skip comments, find the size line.
    let mut size_line = None;
    for item in &mut lines {
        let (i, line) = item;
        let (lineno, line) = (i + 1, line);
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        size_line = Some((lineno, trimmed.to_string()));
        break;
    }
    let (size_lineno, size_line) =
        size_line.ok_or_else(|| parse_err(2, "missing size line"))?;
    let sizes: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(size_lineno, format!("bad size line: {e}")))?;

    if coordinate {
        if sizes.len() != 3 {
            return Err(parse_err(size_lineno, "coordinate size line needs 'rows cols nnz'"));
        }
        let (nrows, ncols, nnz) = (sizes[0], sizes[1], sizes[2]);
        let mut triplets = Vec::with_capacity(nnz);
        let mut seen = std::collections::BTreeSet::new();
        let mut count = 0usize;
        for item in &mut lines {
            let (i, line) = item;
            let lineno = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('%') {
                continue;
            }
            let toks: Vec<&str> = trimmed.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(parse_err(lineno, "expected 'row col value'"));
            }
            let r: usize = toks[0]
                .parse()
                .map_err(|e| parse_err(lineno, format!("bad row index: {e}")))?;
            let c: usize = toks[1]
                .parse()
                .map_err(|e| parse_err(lineno, format!("bad col index: {e}")))?;
            let v: f64 = toks[2]
                .parse()
                .map_err(|e| parse_err(lineno, format!("bad value: {e}")))?;
            if r < 1 || r > nrows || c < 1 || c > ncols {
                return Err(parse_err(lineno, format!("index ({r}, {c}) out of bounds")));
            }
            if !seen.insert((r, c)) {
                return Err(parse_err(lineno, format!("duplicate entry ({r}, {c})")));
            }
            if symmetric && c > r {
                return Err(parse_err(lineno, "symmetric file stores lower triangle only"));
            }
            triplets.push((r - 1, c - 1, v));
            if symmetric && r != c {
                triplets.push((c - 1, r - 1, v));
            }
            count += 1;
        }
        if count != nnz {
            return Err(parse_err(size_lineno, format!("expected {nnz} entries, found {count}")));
        }
        Ok(MatrixMarket::Sparse(SparseMatrix::from_triplets(nrows, ncols, triplets)?))
    } else {
        if sizes.len() != 2 {
            return Err(parse_err(size_lineno, "array size line needs 'rows cols'"));
        }
        let (nrows, ncols) = (sizes[0], sizes[1]);
        let expected = if symmetric {
            ncols * (ncols + 1) / 2
        } else {
            nrows * ncols
        };
        let mut values = Vec::with_capacity(expected);
        for item in &mut lines {
            let (i, line) = item;
            let lineno = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('%') {
                continue;
            }
            for tok in trimmed.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|e| parse_err(lineno, format!("bad value: {e}")))?;
                values.push(v);
            }
        }
        if values.len() != expected {
            return Err(parse_err(
                size_lineno,
                format!("expected {expected} values, found {}", values.len()),
            ));
        }
        let mut a = Mat::zeros((nrows, ncols));
        if symmetric {
            let mut it = values.into_iter();
            for j in 0..ncols {
                for i in j..nrows {
                    let v = it.next().unwrap();
                    a[[i, j]] = v;
                    a[[j, i]] = v;
                }
            }
        } else {
            // column-major order per the format
            for (idx, v) in values.into_iter().enumerate() {
                a[[idx % nrows, idx / nrows]] = v;
            }
        }
        Ok(MatrixMarket::Dense(a))
    }
}

/// Writes a sparse matrix in coordinate/real/general form, round-trip
/// faithful doubles.
pub fn write_matrix_market_sparse(path: &Path, s: &SparseMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", s.nrows(), s.ncols(), s.nnz())?;
    for &(i, j, v) in s.entries() {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

/// Writes a dense matrix in array/real/general form.
pub fn write_matrix_market_dense(path: &Path, a: &Mat) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} {}", a.nrows(), a.ncols())?;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            writeln!(w, "{:e}", a[[i, j]])?;
        }
    }
    Ok(())
}

/// Paths of the five Matrix Market files that make up a dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    #[serde(rename = "M")]
    pub m: PathBuf,
    #[serde(rename = "D")]
    pub d: PathBuf,
    #[serde(rename = "K")]
    pub k: PathBuf,
    #[serde(rename = "H")]
    pub h: PathBuf,
    #[serde(rename = "L")]
    pub l: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl DatasetManifest {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut manifest: DatasetManifest = serde_json::from_str(&text)?;
        // Relative paths resolve against the manifest location.
        if let Some(dir) = path.parent() {
            for p in [
                &mut manifest.m,
                &mut manifest.d,
                &mut manifest.k,
                &mut manifest.h,
                &mut manifest.l,
            ] {
                if p.is_relative() {
                    *p = dir.join(&p);
                }
            }
        }
        Ok(manifest)
    }
}

/// Loads and dimension-checks a full dataset.
pub fn load_dataset(manifest: &DatasetManifest) -> Result<SecondOrderSystem> {
    let named = |e: MorError, file: &Path| {
        MorError::InvalidParam(format!("{}: {e}", file.display()))
    };
    let m = load_matrix_market(&manifest.m).map_err(|e| named(e, &manifest.m))?.into_sparse();
    let d = load_matrix_market(&manifest.d).map_err(|e| named(e, &manifest.d))?.into_sparse();
    let k = load_matrix_market(&manifest.k).map_err(|e| named(e, &manifest.k))?.into_sparse();
    let h = load_matrix_market(&manifest.h).map_err(|e| named(e, &manifest.h))?.into_dense();
    let l = load_matrix_market(&manifest.l).map_err(|e| named(e, &manifest.l))?.into_dense();
    let n = m.nrows();
    if h.nrows() != n {
        return Err(MorError::Dimension(format!(
            "{}: H has {} rows, expected {n}",
            manifest.h.display(),
            h.nrows()
        )));
    }
    if l.ncols() != n {
        return Err(MorError::Dimension(format!(
            "{}: L has {} columns, expected {n}",
            manifest.l.display(),
            l.ncols()
        )));
    }
    SecondOrderSystem::new(m, d, k, h, l)
}

/// Writes a second-order system as five Matrix Market files plus a manifest.
pub fn save_dataset(dir: &Path, prefix: &str, sos: &SecondOrderSystem) -> Result<DatasetManifest> {
    std::fs::create_dir_all(dir)?;
    let file = |tag: &str| dir.join(format!("{prefix}_{tag}.mtx"));
    write_matrix_market_sparse(&file("M"), &sos.m)?;
    write_matrix_market_sparse(&file("D"), &sos.d)?;
    write_matrix_market_sparse(&file("K"), &sos.k)?;
    write_matrix_market_dense(&file("H"), &sos.h)?;
    write_matrix_market_dense(&file("L"), &sos.l)?;
    let manifest = DatasetManifest {
        m: file("M"),
        d: file("D"),
        k: file("K"),
        h: file("H"),
        l: file("L"),
        name: Some(prefix.to_string()),
    };
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn som_dimensions() {
        for n1 in [1usize, 10, 200] {
            let sos = build_som(&SomParams::new(n1)).unwrap();
            assert_eq!(sos.order(), 3 * n1 + 1);
        }
        assert_eq!(build_som(&SomParams::new(3000)).unwrap().order(), 9001);
    }

    #[test]
    fn som_mass_matrix_n1_is_1() {
        let sos = build_som(&SomParams::new(1)).unwrap();
        let m = sos.m.to_dense();
        assert_eq!(m[[0, 0]], 1.0);
        assert_eq!(m[[1, 1]], 2.0);
        assert_eq!(m[[2, 2]], 3.0);
        assert_eq!(m[[3, 3]], 10.0);
    }

    #[test]
    fn som_symmetry_and_definiteness() {
        let sos = build_som(&SomParams::new(10)).unwrap();
        let k = sos.k.to_dense();
        let m = sos.m.to_dense();
        assert_eq!(k, k.t().to_owned());
        assert_eq!(m, m.t().to_owned());
        let mut kcm = crate::numkernel::dense::to_col_major(&k);
        let eigs = crate::numkernel::lapack::dsyev(&mut kcm, k.nrows()).unwrap();
        assert!(eigs.iter().all(|&v| v > -1e-10));
    }

    #[test]
    fn som_stable_at_desk_scale() {
        let sos = build_som(&SomParams::new(200)).unwrap();
        let st = crate::sysmodel::is_stable_so(&sos, &crate::Limits::default(), true).unwrap();
        assert!(st.stable, "abscissa = {}", st.abscissa);
    }

    #[test]
    fn matrix_market_single_entry() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.mtx");
        std::fs::write(&p, "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 2.5\n")
            .unwrap();
        let m = load_matrix_market(&p).unwrap().into_dense();
        assert_eq!(m[[0, 0]], 2.5);
    }

    #[test]
    fn matrix_market_symmetric_expansion() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.mtx");
        std::fs::write(
            &p,
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 1.0\n2 1 3.0\n",
        )
        .unwrap();
        let m = load_matrix_market(&p).unwrap().into_dense();
        assert_eq!(m[[0, 1]], 3.0);
        assert_eq!(m[[1, 0]], 3.0);
    }

    #[test]
    fn matrix_market_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.mtx");
        std::fs::write(&p, "%%MatrixMarket matrix coordinate real general\n1 1 1\n2 1 1.0\n")
            .unwrap();
        match load_matrix_market(&p) {
            Err(MorError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        std::fs::write(&p, "%%MatrixMarket matrix coordinate real general\n1 1 2\n1 1 1.0\n1 1 2.0\n")
            .unwrap();
        assert!(matches!(load_matrix_market(&p), Err(MorError::Parse { line: 4, .. })));
    }

    #[test]
    fn dataset_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let sos = build_som(&SomParams::new(1)).unwrap();
        let manifest = save_dataset(dir.path(), "som1", &sos).unwrap();
        let loaded = load_dataset(&manifest).unwrap();
        assert_eq!(loaded.m, sos.m);
        assert_eq!(loaded.d, sos.d);
        assert_eq!(loaded.k, sos.k);
        assert_eq!(loaded.h, sos.h);
        assert_eq!(loaded.l, sos.l);
    }

    #[test]
    fn dataset_missing_file_and_bad_dims() {
        let dir = tempfile::tempdir().unwrap();
        let sos = build_som(&SomParams::new(1)).unwrap();
        let mut manifest = save_dataset(dir.path(), "som1", &sos).unwrap();
        // H with the wrong number of rows
        write_matrix_market_dense(&manifest.h, &Mat::zeros((sos.order() + 1, 1))).unwrap();
        assert!(load_dataset(&manifest).is_err());
        // missing L
        manifest.l = dir.path().join("nope.mtx");
        assert!(load_dataset(&manifest).is_err());
    }
}
