/// Size limits for dense linear algebra paths.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    /// Largest order accepted by the small dense generalized eigensolver.
    pub small_dense: usize,
    /// Largest order accepted by the dense Lyapunov/Gramian solvers.
    pub dense_gramian: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            small_dense: 500,
            dense_gramian: 4000,
        }
    }
}

impl Limits {
    /// Defaults, with `MORKIT_DENSE_LIMIT` overriding the dense-Gramian limit.
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Ok(v) = std::env::var("MORKIT_DENSE_LIMIT") {
            if let Ok(n) = v.trim().parse::<usize>() {
                limits.dense_gramian = n;
            }
        }
        limits
    }
}
