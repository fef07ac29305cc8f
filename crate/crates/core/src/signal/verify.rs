use num_complex::Complex64;

use super::chirp::ChirpSpec;
use super::sampled::{block_spectrum, sample_signal};
use crate::error::{Error, Result};
use crate::report::Report;

/// Closed form of the block transform:
/// `1/2 e^{-2i(Nk - Aj) j} phi^(Nk - Aj) + 1/2 e^{-2i(Nk + Aj) j} phi^(Nk + Aj)`.
/// The first term is the resonant branch; the second is the far-frequency tail.
pub fn block_ft_closed_form(spec: &ChirpSpec, j: i64, k: f64) -> (Complex64, Complex64) {
    let nf = spec.n() as f64;
    let jf = j as f64;
    let aj = spec.a() * jf;
    let bump = spec.bump();
    let near = Complex64::cis(-2.0 * (nf * k - aj) * jf) * bump.fourier(nf * k - aj) * 0.5;
    let far = Complex64::cis(-2.0 * (nf * k + aj) * jf) * bump.fourier(nf * k + aj) * 0.5;
    (near, far)
}

/// Compares the quadrature transform of block `j` with the closed form on
/// `k_grid` (which must lie in `(A/2, 3A)`).
pub fn verify_block_ft(spec: &ChirpSpec, j: i64, k_grid: &[f64], tol: f64) -> Result<Report> {
    let a = spec.a();
    if spec.block(j).is_none() {
        return Err(Error::InvalidParameter(format!("block {j} outside [N, 2N]")));
    }
    if let Some(k) = k_grid.iter().find(|k| !(**k > 0.5 * a && **k < 3.0 * a)) {
        return Err(Error::InvalidParameter(format!("k = {k} outside (A/2, 3A)")));
    }
    let signal = sample_signal(spec, 3.0 * a, 1.0)?.block(j)?;
    let quad = block_spectrum(&signal, j, k_grid)?;

    let mut max_err = 0.0f64;
    let mut max_tail = 0.0f64;
    let mut max_resonant_only = 0.0f64;
    for (k, v) in k_grid.iter().zip(&quad.values) {
        let (near, far) = block_ft_closed_form(spec, j, *k);
        max_err = max_err.max((v - near - far).norm());
        max_resonant_only = max_resonant_only.max((v - near).norm());
        max_tail = max_tail.max(far.norm());
    }
    Ok(Report::new(format!("block_ft j={j}"), max_err, tol)
        .with("far_branch_max", max_tail)
        .with("resonant_branch_only_error", max_resonant_only))
}
