//! Fixtures shared by the benchmarks.

use gchlab_core::{helmholtz_inverse, BackendKind, Field, Grid};

/// Grid sizes swept by the scaling benches.
pub const SIZES: [usize; 3] = [512, 2048, 8192];

/// Smooth sign-condition state `G∗(0.2 sech)` on `[-30, 30)`.
pub fn smooth_state(n: usize, backend: BackendKind) -> Field {
    let grid = Grid::new(30.0, n).expect("valid bench grid");
    let m = grid.sample(|x| 0.2 / x.cosh()).expect("finite sample");
    helmholtz_inverse(&m, backend).expect("bench state")
}
