use num_complex::Complex64;

use super::{norm, KrylovError, LinearOperator, Preconditioner};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    pub rtol: f64,
    pub restart: usize,
    pub max_iterations: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { rtol: 1e-12, restart: 200, max_iterations: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    /// Relative preconditioned residual norms: the initial value, then one
    /// Arnoldi estimate per iteration. At the end of every cycle the last entry
    /// is replaced by the recomputed residual of the updated iterate.
    pub residual_history: Vec<f64>,
    pub restart: usize,
    pub rtol: f64,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&f64::NAN)
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `P^-1 (b - A x)`.
fn preconditioned_residual<A: LinearOperator + ?Sized>(
    op: &A,
    pc: &Preconditioner,
    b: &[Complex64],
    x: &[Complex64],
    scratch: &mut [Complex64],
    out: &mut [Complex64],
) {
    op.apply(x, scratch);
    for (s, bi) in scratch.iter_mut().zip(b) {
        *s = bi - *s;
    }
    pc.apply(scratch, out);
}

/// Restarted GMRES on `P^-1 A x = P^-1 b` from a zero initial guess. Arnoldi
/// uses modified Gram-Schmidt with one reorthogonalization pass.
///
/// Running out of iterations is reported through `converged = false`; an
/// Arnoldi breakdown that does not yield a solution is an error.
pub fn gmres<A: LinearOperator + ?Sized>(
    op: &A,
    b: &[Complex64],
    pc: &Preconditioner,
    options: &GmresOptions,
) -> Result<(Vec<Complex64>, SolveReport), KrylovError> {
    let n = op.dim();
    if b.len() != n {
        return Err(KrylovError::DimensionMismatch { expected: n, got: b.len() });
    }
    let GmresOptions { rtol, restart, max_iterations } = *options;
    if !(rtol > 0.0 && rtol < 1.0) {
        return Err(KrylovError::InvalidParameter(format!("rtol must be in (0, 1), got {rtol}")));
    }
    if restart == 0 {
        return Err(KrylovError::InvalidParameter("restart must be at least 1".into()));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut x = vec![zero; n];
    let mut report = SolveReport { iterations: 0, converged: false, residual_history: vec![1.0], restart, rtol };

    let mut scratch = vec![zero; n];
    let mut r = vec![zero; n];
    pc.apply(b, &mut r);
    let b_norm = norm(&r);
    if b_norm == 0.0 {
        report.converged = true;
        report.residual_history[0] = 0.0;
        return Ok((x, report));
    }

    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(restart + 1);
    let mut hessenberg = vec![vec![zero; restart]; restart + 1];
    let mut cosines = vec![0.0f64; restart];
    let mut sines = vec![zero; restart];
    let mut g = vec![zero; restart + 1];
    let mut w = vec![zero; n];

    loop {
        let beta = norm(&r);
        basis.clear();
        basis.push(r.iter().map(|v| v / beta).collect());
        g.fill(zero);
        g[0] = Complex64::new(beta, 0.0);

        let mut steps = 0;
        let mut breakdown = false;
        for j in 0..restart {
            op.apply(&basis[j], &mut scratch);
            pc.apply(&scratch, &mut w);
            let w_norm = norm(&w);
            for column in hessenberg.iter_mut() {
                column[j] = zero;
            }
            for _pass in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let h = dot(v, &w);
                    hessenberg[i][j] += h;
                    for (wk, vk) in w.iter_mut().zip(v) {
                        *wk -= h * vk;
                    }
                }
            }
            let h_next = norm(&w);
            hessenberg[j + 1][j] = Complex64::new(h_next, 0.0);

            for i in 0..j {
                let (a, b) = (hessenberg[i][j], hessenberg[i + 1][j]);
                hessenberg[i][j] = cosines[i] * a + sines[i] * b;
                hessenberg[i + 1][j] = -sines[i].conj() * a + cosines[i] * b;
            }
            let (a, b) = (hessenberg[j][j], hessenberg[j + 1][j]);
            let rho = a.norm().hypot(b.norm());
            if a.norm() == 0.0 {
                cosines[j] = 0.0;
                sines[j] = Complex64::new(1.0, 0.0);
            } else {
                cosines[j] = a.norm() / rho;
                sines[j] = (a / a.norm()) * b.conj() / rho;
            }
            hessenberg[j][j] = cosines[j] * a + sines[j] * b;
            hessenberg[j + 1][j] = zero;
            g[j + 1] = -sines[j].conj() * g[j];
            g[j] *= cosines[j];

            report.iterations += 1;
            let estimate = g[j + 1].norm() / b_norm;
            report.residual_history.push(estimate);
            if rho == 0.0 {
                // A P^-1 maps the Krylov space to zero: the system is singular
                breakdown = true;
                break;
            }
            steps = j + 1;
            if h_next <= 1e-14 * w_norm {
                breakdown = true;
                break;
            }
            if estimate <= rtol || report.iterations >= max_iterations {
                break;
            }
            basis.push(w.iter().map(|v| v / h_next).collect());
        }

        // back substitution for the least-squares coefficients
        let mut y = vec![zero; steps];
        for i in (0..steps).rev() {
            let mut acc = g[i];
            for k in i + 1..steps {
                acc -= hessenberg[i][k] * y[k];
            }
            y[i] = acc / hessenberg[i][i];
        }
        for (k, yk) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&basis[k]) {
                *xi += yk * vi;
            }
        }

        preconditioned_residual(op, pc, b, &x, &mut scratch, &mut r);
        let true_residual = norm(&r) / b_norm;
        *report.residual_history.last_mut().unwrap() = true_residual;
        if true_residual <= rtol {
            report.converged = true;
            return Ok((x, report));
        }
        if breakdown {
            return Err(KrylovError::Breakdown { iteration: report.iterations, residual: true_residual });
        }
        if report.iterations >= max_iterations {
            return Ok((x, report));
        }
    }
}
