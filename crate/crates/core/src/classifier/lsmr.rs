//! LSMR: Golub-Kahan bidiagonalization for
//! `min ||A x - b||^2 + damp^2 ||x||^2` (Fong & Saunders, 2011).

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::matrix::{norm, LinearOperator};

#[derive(Clone, Copy, Debug)]
pub struct LsmrParams<T> {
    pub damp: T,
    /// Relative accuracy of `A`; stops when `||A^T r|| <= atol ||A|| ||r||`.
    pub atol: T,
    /// Relative accuracy of `b`.
    pub btol: T,
    /// Stop once the estimated condition number exceeds this (0 disables).
    pub conlim: T,
    /// `None` means four times the number of columns.
    pub max_iter: Option<usize>,
}

impl<T: Real> Default for LsmrParams<T> {
    fn default() -> Self {
        Self {
            damp: T::zero(),
            atol: T::from_f64_lossy(1e-8),
            btol: T::from_f64_lossy(1e-8),
            conlim: T::from_f64_lossy(1e8),
            max_iter: None,
        }
    }
}

impl<T: Real> LsmrParams<T> {
    pub fn with_damp(damp: T) -> Self {
        Self {
            damp,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// `x = 0` solves the problem exactly (`A^T b = 0`).
    ZeroSolution,
    /// `||r||` within the `atol`/`btol` bound: compatible system.
    ResidualTolerance,
    /// `||A^T r||` within `atol`: least-squares optimum.
    NormalEquationsTolerance,
    /// Estimated `cond(A)` reached `conlim`.
    ConditionLimit,
    /// One of the tests hit machine precision.
    MachinePrecision,
    /// Iteration budget exhausted.
    MaxIterations,
}

impl StopReason {
    pub fn converged(self) -> bool {
        !matches!(self, StopReason::MaxIterations | StopReason::ConditionLimit)
    }
}

#[derive(Clone, Debug)]
pub struct LsmrSolution<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    pub stop: StopReason,
    /// Estimate of `||[b; 0] - [A; damp I] x||`.
    pub residual_norm: T,
    /// Estimate of `||A^T r - damp^2 x||`.
    pub normal_residual_norm: T,
    pub a_norm: T,
    pub cond: T,
}

/// `(c, s, r)` with `c a + s b = r`, `-s a + c b = 0`, stable for any signs.
fn sym_ortho<T: Real>(a: T, b: T) -> (T, T, T) {
    let zero = T::zero();
    if b == zero {
        (if a == zero { T::one() } else { a.signum() }, zero, a.abs())
    } else if a == zero {
        (zero, b.signum(), b.abs())
    } else if b.abs() > a.abs() {
        let tau = a / b;
        let s = b.signum() / (T::one() + tau * tau).sqrt();
        let c = s * tau;
        (c, s, b / s)
    } else {
        let tau = b / a;
        let c = a.signum() / (T::one() + tau * tau).sqrt();
        let s = c * tau;
        (c, s, a / c)
    }
}

fn scale<T: Real>(v: &mut [T], k: T) {
    v.iter_mut().for_each(|x| *x = *x * k);
}

/// Solves the damped least-squares problem. Exhausting the iteration budget is
/// reported through [`StopReason::MaxIterations`], not as an error.
pub fn lsmr_solve<T: Real, A: LinearOperator<T> + ?Sized>(
    a: &A,
    b: &[T],
    params: &LsmrParams<T>,
) -> Result<LsmrSolution<T>> {
    let (m, n) = (a.nrows(), a.ncols());
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput(format!(
            "LSMR needs a non-empty matrix, got {m}x{n}"
        )));
    }
    if b.len() != m {
        return Err(Error::InvalidInput(format!(
            "right-hand side has length {}, expected {m}",
            b.len()
        )));
    }
    if !a.all_finite() || b.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "non-finite entries in LSMR input".into(),
        ));
    }
    let zero = T::zero();
    let one = T::one();
    let damp = params.damp;
    if !(damp >= zero && damp.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "damp must be finite and >= 0, got {damp}"
        )));
    }
    if !(params.atol > zero && params.btol > zero) {
        return Err(Error::InvalidInput(
            "LSMR tolerances must be positive".into(),
        ));
    }
    let max_iter = params.max_iter.unwrap_or(4 * n);
    let ctol = if params.conlim > zero {
        one / params.conlim
    } else {
        zero
    };

    let mut u = b.to_vec();
    let normb = norm(&u);
    let mut beta = normb;
    if beta > zero {
        scale(&mut u, one / beta);
    }
    let mut v = vec![zero; n];
    a.apply_transpose(&u, &mut v);
    let mut alpha = norm(&v);
    if alpha > zero {
        scale(&mut v, one / alpha);
    }

    let mut x = vec![zero; n];
    let mut solution = LsmrSolution {
        x: Vec::new(),
        iterations: 0,
        stop: StopReason::ZeroSolution,
        residual_norm: beta,
        normal_residual_norm: alpha * beta,
        a_norm: alpha,
        cond: one,
    };
    if alpha * beta == zero {
        solution.x = x;
        return Ok(solution);
    }

    let mut zetabar = alpha * beta;
    let mut alphabar = alpha;
    let mut rho = one;
    let mut rhobar = one;
    let mut cbar = one;
    let mut sbar = zero;

    let mut h = v.clone();
    let mut hbar = vec![zero; n];

    // Residual norm estimation state.
    let mut betadd = beta;
    let mut betad = zero;
    let mut rhodold = one;
    let mut tautildeold = zero;
    let mut thetatilde = zero;
    let mut zeta = zero;
    let mut d = zero;

    let mut norm_a2 = alpha * alpha;
    let mut maxrbar = zero;
    let mut minrbar = T::max_value();

    let mut av = vec![zero; m];
    let mut atu = vec![zero; n];

    let mut itn = 0;
    loop {
        itn += 1;

        // Bidiagonalization step.
        a.apply(&v, &mut av);
        for (ui, &avi) in u.iter_mut().zip(&av) {
            *ui = avi - alpha * *ui;
        }
        beta = norm(&u);
        if beta > zero {
            scale(&mut u, one / beta);
            a.apply_transpose(&u, &mut atu);
            for (vi, &ai) in v.iter_mut().zip(&atu) {
                *vi = ai - beta * *vi;
            }
            alpha = norm(&v);
            if alpha > zero {
                scale(&mut v, one / alpha);
            }
        }

        // Rotation eliminating the damping term.
        let (chat, shat, alphahat) = sym_ortho(alphabar, damp);

        // Plane rotation turning B_k into R_k.
        let rhoold = rho;
        let (c, s, rho_new) = sym_ortho(alphahat, beta);
        rho = rho_new;
        let thetanew = s * alpha;
        alphabar = c * alpha;

        // Plane rotation turning R_k^T into R-bar_k.
        let rhobarold = rhobar;
        let zetaold = zeta;
        let thetabar = sbar * rho;
        let rhotemp = cbar * rho;
        let (cb, sb, rb) = sym_ortho(cbar * rho, thetanew);
        cbar = cb;
        sbar = sb;
        rhobar = rb;
        zeta = cbar * zetabar;
        zetabar = -sbar * zetabar;

        // Update h, h-bar and x.
        let hbar_coef = thetabar * rho / (rhoold * rhobarold);
        let x_coef = zeta / (rho * rhobar);
        let h_coef = thetanew / rho;
        for j in 0..n {
            hbar[j] = h[j] - hbar_coef * hbar[j];
            x[j] = x[j] + x_coef * hbar[j];
            h[j] = v[j] - h_coef * h[j];
        }

        // Estimate ||r||.
        let betaacute = chat * betadd;
        let betacheck = -shat * betadd;
        let betahat = c * betaacute;
        betadd = -s * betaacute;

        let thetatildeold = thetatilde;
        let (ctildeold, stildeold, rhotildeold) = sym_ortho(rhodold, thetabar);
        thetatilde = stildeold * rhobar;
        rhodold = ctildeold * rhobar;
        betad = -stildeold * betad + ctildeold * betahat;

        tautildeold = (zetaold - thetatildeold * tautildeold) / rhotildeold;
        let taud = (zeta - thetatilde * tautildeold) / rhodold;
        d = d + betacheck * betacheck;
        let normr = (d + (betad - taud) * (betad - taud) + betadd * betadd).sqrt();

        // Estimate ||A|| and cond(A).
        norm_a2 = norm_a2 + beta * beta;
        let norm_a = norm_a2.sqrt();
        norm_a2 = norm_a2 + alpha * alpha;

        maxrbar = maxrbar.max(rhobarold);
        if itn > 1 {
            minrbar = minrbar.min(rhobarold);
        }
        let cond_a = maxrbar.max(rhotemp) / minrbar.min(rhotemp);

        let normar = zetabar.abs();
        let normx = norm(&x);

        let test1 = normr / normb;
        let test2 = if norm_a * normr != zero {
            normar / (norm_a * normr)
        } else {
            T::infinity()
        };
        let test3 = one / cond_a;
        let t1 = test1 / (one + norm_a * normx / normb);
        let rtol = params.btol + params.atol * norm_a * normx / normb;

        let mut stop = None;
        if itn >= max_iter {
            stop = Some(StopReason::MaxIterations);
        }
        if one + test3 <= one || one + test2 <= one || one + t1 <= one {
            stop = Some(StopReason::MachinePrecision);
        }
        if test3 <= ctol {
            stop = Some(StopReason::ConditionLimit);
        }
        if test2 <= params.atol {
            stop = Some(StopReason::NormalEquationsTolerance);
        }
        if test1 <= rtol {
            stop = Some(StopReason::ResidualTolerance);
        }

        if let Some(stop) = stop {
            return Ok(LsmrSolution {
                x,
                iterations: itn,
                stop,
                residual_norm: normr,
                normal_residual_norm: normar,
                a_norm: norm_a,
                cond: cond_a,
            });
        }
    }
}
