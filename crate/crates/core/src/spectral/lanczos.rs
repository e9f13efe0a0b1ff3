//! Lanczos iteration with full reorthogonalization for the lowest few
//! eigenpairs of a sparse symmetric matrix.
//!
//! Every Krylov vector is kept and orthogonalized twice against all previous
//! ones, so the projected tridiagonal matrix carries no spurious copies. On
//! breakdown a fresh deterministic vector orthogonal to the current basis
//! starts a new block, which keeps eigenvalues of multiplicity > 1 reachable.

use crate::error::{Error, Result};
use crate::operators::RealOperator;
use crate::spectral::golden_fraction;
use crate::spectral::tridiag::Tridiagonal;

/// Steps between Ritz convergence checks.
const CHECK_EVERY: usize = 8;

/// Ritz residual estimate target, in units of `eps·‖H‖∞`.
const RITZ_TOL_EPS: f64 = 64.0;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], c: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(a, b)| *a += c * b);
}

/// Classical Gram-Schmidt against every stored vector, applied twice.
/// Returns the accumulated coefficient on the last stored vector.
fn reorthogonalize(basis: &[Vec<f64>], w: &mut [f64]) -> f64 {
    let mut last = 0.0;
    for _ in 0..2 {
        let h: Vec<f64> = basis.iter().map(|q| dot(q, w)).collect();
        for (q, c) in basis.iter().zip(&h) {
            axpy(w, -c, q);
        }
        last += h.last().copied().unwrap_or(0.0);
    }
    last
}

/// Deterministic, generic-looking vector used to seed or restart the
/// iteration.
fn generic_vector(n: usize, seed: u64) -> Vec<f64> {
    (0..n)
        .map(|i| golden_fraction(seed.wrapping_mul(1_000_003) + i as u64) - 0.5)
        .collect()
}

struct Krylov {
    basis: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    /// `off[j]` couples `basis[j]` and `basis[j + 1]`; zero at block starts.
    off: Vec<f64>,
    block_start: usize,
}

/// The `k` lowest eigenpairs of `op`, ascending, with unit vectors.
///
/// `start` seeds the iteration (a warm start); a small generic component is
/// always mixed in so that no eigenvector is missed by accident.
///
/// A single Krylov sequence cannot separate a pair split by less than its
/// resolution, so after convergence the found vectors are locked and a fresh
/// run in their orthogonal complement looks for anything lower. Lower values
/// are merged in until the complement has nothing below the current set.
pub(crate) fn lowest(op: &RealOperator, k: usize, start: Option<&[f64]>) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "requested {k} eigenpairs of a {n}x{n} operator"
        )));
    }
    if let Some(s) = start {
        if s.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: s.len() });
        }
    }
    let hnorm = op.inf_norm().max(f64::MIN_POSITIVE);
    let mut pairs = run(op, k, start, &[], hnorm)?;
    for round in 0..=k {
        if pairs.len() >= n {
            break;
        }
        let locked: Vec<Vec<f64>> = pairs.iter().map(|p| p.1.clone()).collect();
        let (theta, x) = run(op, 1, None, &locked, hnorm)?.swap_remove(0);
        let top = pairs[k - 1].0;
        if theta >= top - RITZ_TOL_EPS * f64::EPSILON * hnorm {
            break;
        }
        log::debug!("deflation round {round} found {theta:.12e} below {top:.12e}");
        pairs[k - 1] = (theta, x);
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    finish(op, pairs, hnorm)
}

/// One Lanczos run confined to the orthogonal complement of `locked`
/// (orthonormal vectors). Returns the `k` lowest Ritz pairs.
fn run(
    op: &RealOperator,
    k: usize,
    start: Option<&[f64]>,
    locked: &[Vec<f64>],
    hnorm: f64,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = op.dim();
    let space = n - locked.len();
    let ritz_tol = RITZ_TOL_EPS * f64::EPSILON * hnorm;
    let breakdown = 1e-12 * hnorm;

    let mut q0 = generic_vector(n, 1 + locked.len() as u64 * 7919);
    let g = norm(&q0);
    q0.iter_mut().for_each(|v| *v /= g);
    if let Some(s) = start {
        let sn = norm(s);
        if sn > 0.0 && sn.is_finite() {
            let mut mixed: Vec<f64> = s.iter().map(|v| v / sn).collect();
            axpy(&mut mixed, 1e-3, &q0);
            q0 = mixed;
        }
    }
    reorthogonalize(locked, &mut q0);
    let s = norm(&q0);
    if !(s > 1e-8) {
        return Err(Error::NoConvergence("starting vector lies in the locked space".into()));
    }
    q0.iter_mut().for_each(|v| *v /= s);

    let mut kr = Krylov {
        basis: vec![q0],
        alpha: Vec::new(),
        off: Vec::new(),
        block_start: 0,
    };
    let mut w = vec![0.0; n];
    let mut restarts = 0u64;
    let mut steps_in_block = 0usize;

    loop {
        let j = kr.basis.len() - 1;
        op.apply_into(&kr.basis[j], &mut w);
        if j > kr.block_start {
            let b = kr.off[j - 1];
            axpy(&mut w, -b, &kr.basis[j - 1]);
        }
        let a = dot(&kr.basis[j], &w);
        axpy(&mut w, -a, &kr.basis[j]);
        reorthogonalize(locked, &mut w);
        let correction = reorthogonalize(&kr.basis, &mut w);
        kr.alpha.push(a + correction);
        let beta = norm(&w);
        steps_in_block += 1;

        let complete = kr.basis.len() == space;
        let broke = beta <= breakdown;
        let m = kr.alpha.len();

        // A breakdown is never accepted on its own: the invariant subspace
        // may miss further copies of a repeated eigenvalue.
        if ((steps_in_block % CHECK_EVERY == 0 && !broke) || complete) && m >= k {
            if let Some(pairs) = converged(&kr, k, beta, ritz_tol, complete) {
                return Ok(ritz_vectors(&kr, pairs));
            }
        }
        if complete {
            return Err(Error::NoConvergence(format!(
                "Krylov space exhausted at dimension {space} without meeting the residual target"
            )));
        }

        if broke {
            // Invariant subspace found; continue in its orthogonal complement.
            let mut fresh = None;
            for _ in 0..8 {
                restarts += 1;
                let mut v = generic_vector(n, 1 + restarts);
                reorthogonalize(locked, &mut v);
                reorthogonalize(&kr.basis, &mut v);
                let vn = norm(&v);
                if vn > 1e-8 {
                    v.iter_mut().for_each(|x| *x /= vn);
                    fresh = Some(v);
                    break;
                }
            }
            let v = fresh.ok_or_else(|| {
                Error::NoConvergence("could not extend a broken-down Krylov basis".into())
            })?;
            kr.off.push(0.0);
            kr.basis.push(v);
            kr.block_start = kr.basis.len() - 1;
            steps_in_block = 0;
        } else {
            w.iter_mut().for_each(|x| *x /= beta);
            kr.off.push(beta);
            kr.basis.push(std::mem::replace(&mut w, vec![0.0; n]));
        }
    }
}

/// Ritz pairs if the `k` lowest have converged, together with the lowest Ritz
/// value of the current block when that block is not the first.
fn converged(
    kr: &Krylov,
    k: usize,
    beta: f64,
    tol: f64,
    complete: bool,
) -> Option<Vec<(f64, Vec<f64>)>> {
    let m = kr.alpha.len();
    let t = Tridiagonal {
        diag: &kr.alpha,
        off: &kr.off[..m - 1],
    };
    let pairs = t.lowest_pairs(k);
    if complete {
        return Some(pairs);
    }
    if pairs.iter().any(|(_, y)| beta * y[m - 1].abs() > tol) {
        return None;
    }
    if kr.block_start > 0 {
        // A later block must have found its own lowest value before we can
        // rule out further copies of the wanted eigenvalues.
        let b = kr.block_start;
        let block = Tridiagonal {
            diag: &kr.alpha[b..],
            off: &kr.off[b..m - 1],
        };
        let (_, y) = &block.lowest_pairs(1)[0];
        if beta * y[y.len() - 1].abs() > tol {
            return None;
        }
    }
    Some(pairs)
}

fn ritz_vectors(kr: &Krylov, pairs: Vec<(f64, Vec<f64>)>) -> Vec<(f64, Vec<f64>)> {
    let n = kr.basis[0].len();
    pairs
        .into_iter()
        .map(|(theta, y)| {
            let mut x = vec![0.0; n];
            for (q, c) in kr.basis.iter().zip(&y) {
                axpy(&mut x, *c, q);
            }
            let xn = norm(&x);
            x.iter_mut().for_each(|v| *v /= xn);
            (theta, x)
        })
        .collect()
}

/// Rayleigh quotients and the explicit residual check.
fn finish(op: &RealOperator, pairs: Vec<(f64, Vec<f64>)>, hnorm: f64) -> Result<Vec<(f64, Vec<f64>)>> {
    let mut out = Vec::with_capacity(pairs.len());
    let mut hx = vec![0.0; op.dim()];
    for (theta, x) in pairs {
        op.apply_into(&x, &mut hx);
        let rayleigh = dot(&x, &hx);
        axpy(&mut hx, -rayleigh, &x);
        let r = norm(&hx);
        if !(r <= 1e-10 * hnorm) {
            return Err(Error::NoConvergence(format!(
                "Ritz value {theta:.12e} has residual {r:.3e} above {:.3e}",
                1e-10 * hnorm
            )));
        }
        out.push((rayleigh, x));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}
