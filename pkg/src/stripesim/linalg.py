"""Complex Hermitian linear-algebra helpers used throughout the simulator.

All positive-definite systems are solved through Cholesky factorizations;
explicit matrix inversion is avoided everywhere except where a full inverse
is the requested result.
"""

import numpy as np
import scipy.linalg as sla

from .errors import NumericError


def herm(a):
    """Project a square matrix onto its Hermitian part, (A + A^H)/2."""
    return 0.5 * (a + a.conj().swapaxes(-2, -1))


def complex_normal(rng, shape):
    """Draw i.i.d. standard circularly-symmetric complex Gaussians, CN(0, 1)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def cholesky_pd(a):
    """Cholesky factor of a Hermitian positive-definite matrix.

    Raises NumericError if the factorization fails (matrix not PD).
    """
    try:
        return sla.cho_factor(a, lower=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise NumericError(f"matrix is not positive definite: {exc}") from exc


def solve_hermitian(a, b):
    """Solve a @ x = b for Hermitian positive-definite `a` via Cholesky."""
    return sla.cho_solve(cholesky_pd(a), b, check_finite=False)


def psd_sqrt(r, rel_tol=1e-10):
    """Hermitian square root of a PSD matrix via eigendecomposition.

    Eigenvalues in [-rel_tol * lambda_max, 0) are clamped to zero before
    taking the square root; anything more negative raises NumericError.
    """
    w, v = np.linalg.eigh(herm(r))
    w_max = max(float(w[-1]), 0.0)
    if w[0] < -rel_tol * w_max:
        raise NumericError(
            f"matrix is not PSD: min eigenvalue {w[0]:.3e} vs max {w_max:.3e}"
        )
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def min_eigh(a):
    """Smallest eigenvalue of a Hermitian matrix."""
    return float(np.linalg.eigvalsh(herm(a))[0])


def block2_inverse(a, b, c, d):
    """Invert a 2x2 block matrix [[A, B], [C, D]] blockwise.

    Uses the Schur complement of A:

        S  = D - C A^{-1} B
        Dbar = S^{-1}
        Bbar = -A^{-1} B S^{-1}
        Cbar = -S^{-1} C A^{-1}
        Abar = A^{-1} + A^{-1} B S^{-1} C A^{-1}

    Returns the four blocks (Abar, Bbar, Cbar, Dbar). A and the Schur
    complement must be invertible.
    """
    a_inv_b = np.linalg.solve(a, b)
    schur = d - c @ a_inv_b
    dbar = np.linalg.inv(schur)
    bbar = -a_inv_b @ dbar
    cbar = -dbar @ np.linalg.solve(a.conj().T, c.conj().T).conj().T
    abar = np.linalg.inv(a) + a_inv_b @ dbar @ np.linalg.solve(a.conj().T, c.conj().T).conj().T
    return abar, bbar, cbar, dbar


def assemble_block2(a, b, c, d):
    """Stack four blocks into the dense matrix [[A, B], [C, D]]."""
    return np.block([[a, b], [c, d]])
