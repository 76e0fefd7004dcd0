"""Dense complex matrix kernel.

Thin, explicitly-toleranced wrappers around LAPACK via numpy/scipy: operator
norms, SVD, Haar-random unitaries, functional calculus of unitaries through
the complex Schur form, and spectral rounding of near-projections.  All
callers in this package speak complex128 2-d arrays.
"""

from __future__ import annotations

from typing import Callable, Tuple

import numpy as np
import scipy.linalg as sla

from .errors import NotSelfAdjointError, NotUnitaryError, ShapeError, SpectralGapError

Array = np.ndarray


def as_matrix(x) -> Array:
    m = np.asarray(x, dtype=np.complex128)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-d array, got shape {m.shape}")
    return m


def adjoint(x: Array) -> Array:
    return as_matrix(x).conj().T


def matmul(x: Array, y: Array) -> Array:
    x, y = as_matrix(x), as_matrix(y)
    if x.shape[1] != y.shape[0]:
        raise ShapeError(f"cannot multiply {x.shape} by {y.shape}")
    return x @ y


def add(x: Array, y: Array) -> Array:
    x, y = as_matrix(x), as_matrix(y)
    if x.shape != y.shape:
        raise ShapeError(f"cannot add {x.shape} and {y.shape}")
    return x + y


def scale(x: Array, alpha: complex) -> Array:
    return as_matrix(x) * alpha


def opnorm(x: Array) -> float:
    """Largest singular value; 0 for empty matrices."""
    x = as_matrix(x)
    if x.size == 0:
        return 0.0
    return float(np.linalg.norm(x, 2))


def svd(x: Array) -> Tuple[Array, Array, Array]:
    return np.linalg.svd(as_matrix(x))


def random_unitary(dim: int, seed: int) -> Array:
    """Haar-distributed unitary, deterministic per seed."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases[np.newaxis, :]


def unitary_defect(u: Array) -> float:
    u = as_matrix(u)
    return opnorm(u.conj().T @ u - np.eye(u.shape[0]))


def eig_unitary(u: Array, tol: float = 1e-8) -> Tuple[Array, Array]:
    """Spectral decomposition of a unitary via the complex Schur form.

    Returns unit-modulus eigenvalues and a unitary eigenvector matrix; for a
    normal input the Schur factor is diagonal up to roundoff, so discarding
    its strict upper triangle is exact to the stated tolerance.
    """
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise ShapeError("unitary input must be square")
    defect = unitary_defect(u)
    if defect > tol:
        raise NotUnitaryError(f"input is not unitary: defect {defect:.3e} > {tol:.1e}")
    t, q = sla.schur(u, output="complex")
    eigs = np.diag(t).copy()
    eigs /= np.abs(eigs)
    return eigs, q


def func_calc_unitary(u: Array, f: Callable, tol: float = 1e-8) -> Array:
    """Apply a scalar function on the unit circle to a unitary matrix."""
    eigs, q = eig_unitary(u, tol=tol)
    try:
        values = np.asarray(f(eigs), dtype=np.complex128)
        if values.shape != eigs.shape:
            raise TypeError
    except Exception:
        values = np.array([f(z) for z in eigs], dtype=np.complex128)
    return (q * values[np.newaxis, :]) @ q.conj().T


def nearest_projection(x: Array, tol: float = 1e-8, gap: float = 0.1) -> Array:
    """Round a self-adjoint matrix to the spectral projection above 1/2.

    Requires an empty spectral band [1/2 - gap, 1/2 + gap]; the offending
    eigenvalue is reported when the band is populated.
    """
    x = as_matrix(x)
    if x.shape[0] != x.shape[1]:
        raise ShapeError("projection rounding needs a square matrix")
    if x.size == 0:
        return x.copy()
    defect = opnorm(x - x.conj().T)
    if defect > tol:
        raise NotSelfAdjointError(
            f"input is not self-adjoint: defect {defect:.3e} > {tol:.1e}")
    w, v = np.linalg.eigh((x + x.conj().T) / 2)
    inside = np.abs(w - 0.5) <= gap
    if np.any(inside):
        bad = float(w[inside][0])
        raise SpectralGapError(
            f"eigenvalue {bad:.6f} inside the forbidden band "
            f"[{0.5 - gap:.3f}, {0.5 + gap:.3f}]", bad)
    keep = v[:, w > 0.5]
    p = keep @ keep.conj().T
    return (p + p.conj().T) / 2
