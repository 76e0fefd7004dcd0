"""Matrix-valued loops on the circle and the topological index of symbol pairs.

Loops are sampled on the glued parameter interval [0, pi/2) at N uniform
points; sample 0 represents both endpoints.  A LoopPair is a pointwise
balanced pair of loops; a SymbolPair carries one LoopPair per cosphere
direction (+1 for nonnegative Fourier modes, -1 for negative ones).

The orientation convention lives in exactly one place: ``topo_index``
returns  wind(det c_minus) - wind(det c_plus)  where c = 1 + sigma2*(sigma1
- sigma2) is the pointwise canonical unitary.  With the Hardy half chosen as
modes n >= 0 this matches the analytic index of the quantized pair (the
compression of multiplication by one forward loop turn has index -1).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .balanced import BalancedPair
from .errors import ConstraintError, NotUnitaryError, ShapeError, WindingError
from .numkern import Array, opnorm

HALF_PI = np.pi / 2


def _batch_opnorm(stack: np.ndarray) -> float:
    """Largest singular value over a (grid, d, d) stack of matrices."""
    if stack.size == 0:
        return 0.0
    return float(np.linalg.svd(stack, compute_uv=False).max())


@dataclass(frozen=True)
class MatrixLoop:
    """Uniform samples of a matrix function on the glued interval [0, pi/2)."""

    samples: Array  # shape (grid, dim, dim)

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.complex128)
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise ShapeError(f"loop samples must be (grid, d, d), got {arr.shape}")
        object.__setattr__(self, "samples", arr)

    @property
    def grid(self) -> int:
        return self.samples.shape[0]

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    @property
    def ts(self) -> np.ndarray:
        return HALF_PI * np.arange(self.grid) / self.grid

    @staticmethod
    def from_function(fn: Callable[[float], Array], grid: int,
                      dim: Optional[int] = None) -> "MatrixLoop":
        ts = HALF_PI * np.arange(grid) / grid
        first = np.atleast_2d(np.asarray(fn(float(ts[0])), dtype=np.complex128))
        dim = first.shape[0] if dim is None else dim
        out = np.empty((grid, dim, dim), dtype=np.complex128)
        out[0] = first
        for k in range(1, grid):
            out[k] = np.atleast_2d(np.asarray(fn(float(ts[k])), dtype=np.complex128))
        return MatrixLoop(out)

    @staticmethod
    def constant(matrix: Array, grid: int) -> "MatrixLoop":
        m = np.atleast_2d(np.asarray(matrix, dtype=np.complex128))
        return MatrixLoop(np.broadcast_to(m, (grid, *m.shape)).copy())

    def adjoint(self) -> "MatrixLoop":
        return MatrixLoop(self.samples.conj().transpose(0, 2, 1))

    def max_step(self) -> float:
        stepped = np.roll(self.samples, -1, axis=0) - self.samples
        return max(opnorm(stepped[k]) for k in range(self.grid))

    def continuity_budget(self) -> float:
        """Default step budget: ten deviations of the glued-loop step size
        at the finite-difference slope observed on the grid."""
        dt = 2 * np.pi / self.grid
        slope = self.max_step() / (HALF_PI / self.grid)
        return 10.0 * dt * slope

    def check_continuity(self, budget: Optional[float] = None) -> bool:
        budget = self.continuity_budget() if budget is None else budget
        return self.max_step() <= budget


@dataclass(frozen=True)
class LoopPair:
    """Two loops forming a pointwise balanced pair within tol."""

    sigma1: MatrixLoop
    sigma2: MatrixLoop
    tol: float = 1e-10

    def __post_init__(self):
        if (self.sigma1.grid != self.sigma2.grid
                or self.sigma1.dim != self.sigma2.dim):
            raise ShapeError("loop pair entries must share grid and dimension")

    @property
    def grid(self) -> int:
        return self.sigma1.grid

    @property
    def dim(self) -> int:
        return self.sigma1.dim

    def max_pointwise_residual(self) -> float:
        a, b = self.sigma1.samples, self.sigma2.samples
        ah = a.conj().transpose(0, 2, 1)
        bh = b.conj().transpose(0, 2, 1)
        eye = np.eye(self.dim)[np.newaxis]
        qa, qb = eye - ah @ a, eye - bh @ b
        pa, pb = eye - a @ ah, eye - b @ bh
        worst = max(_batch_opnorm(qb - qa), _batch_opnorm(pb - pa),
                    _batch_opnorm(a @ qa - b @ qb),
                    _batch_opnorm(pa @ a - pb @ b))
        norms = max(_batch_opnorm(a), _batch_opnorm(b))
        return max(worst, norms - 1.0, 0.0)

    def validate(self) -> "LoopPair":
        worst = self.max_pointwise_residual()
        if worst > self.tol:
            raise ValueError(f"loop pair is not pointwise balanced: "
                             f"worst residual {worst:.3e} > {self.tol:.1e}")
        return self

    def pair_at(self, k: int) -> BalancedPair:
        return BalancedPair(self.sigma1.samples[k], self.sigma2.samples[k],
                            self.tol)


@dataclass(frozen=True)
class SymbolPair:
    """One balanced loop pair per cosphere direction of the circle."""

    plus: LoopPair
    minus: LoopPair

    def __post_init__(self):
        if self.plus.dim != self.minus.dim:
            raise ShapeError("both components of a symbol pair must share dim")

    @property
    def dim(self) -> int:
        return self.plus.dim

    @property
    def tol(self) -> float:
        return max(self.plus.tol, self.minus.tol)


# -- constructions ----------------------------------------------------------------


def rotation_2x2(t: float) -> Array:
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def rotating_diagonal_pair(alpha: Callable[[float], complex],
                           beta: Callable[[float], complex],
                           gamma: Callable[[float], complex],
                           grid: int, tol: float = 1e-10) -> LoopPair:
    """The 2x2 pair (U* diag(alpha, gamma) U, U* diag(beta, gamma) U).

    alpha and beta must be unimodular, gamma strictly contractive on the
    open interval, and all three equal to 1 at both glued endpoints.  The
    pair is balanced pointwise because the unimodular entries contribute no
    defect and the shared gamma entry cancels in every relation.
    """
    ts = HALF_PI * np.arange(grid) / grid
    for name, fn, unimodular in (("alpha", alpha, True), ("beta", beta, True),
                                 ("gamma", gamma, False)):
        for endpoint in (0.0, HALF_PI):
            value = complex(fn(endpoint))
            if abs(value - 1.0) > 1e-9:
                raise ConstraintError(
                    f"{name}({endpoint:.4f}) = {value:.6f} must equal 1")
        for t in ts[1:]:
            value = complex(fn(float(t)))
            if unimodular and abs(abs(value) - 1.0) > 1e-9:
                raise ConstraintError(
                    f"|{name}(t)| must be 1 on the grid; got {abs(value):.6f} "
                    f"at t = {float(t):.4f}")
            if not unimodular and abs(value) >= 1.0 - 1e-12:
                raise ConstraintError(
                    f"|{name}(t)| must stay below 1 on the open interval; "
                    f"got {abs(value):.6f} at t = {float(t):.4f}")

    def sample(diag_fn: Callable[[float], complex], t: float) -> Array:
        u = rotation_2x2(t)
        return u.conj().T @ np.diag([complex(diag_fn(t)), complex(gamma(t))]) @ u

    s1 = MatrixLoop.from_function(lambda t: sample(alpha, t), grid, dim=2)
    s2 = MatrixLoop.from_function(lambda t: sample(beta, t), grid, dim=2)
    return LoopPair(s1, s2, tol).validate()


def default_gamma(t: float) -> complex:
    return 1.0 - np.sin(2.0 * t) / 2.0


def turn(p: int) -> Callable[[float], complex]:
    """t -> exp(4 i p t): p full loop turns over the glued interval."""
    return lambda t: np.exp(4j * p * t)


def standard_symbol_pair(p: int, q: int, grid: int,
                         gamma: Optional[Callable[[float], complex]] = None,
                         tol: float = 1e-10) -> SymbolPair:
    """Symbol pair carried entirely on the + direction: the rotating diagonal
    pair with alpha, beta turning p and q times, identity on the - direction."""
    gamma = default_gamma if gamma is None else gamma
    plus = rotating_diagonal_pair(turn(p), turn(q), gamma, grid, tol)
    eye_loop = MatrixLoop.constant(np.eye(2), grid)
    minus = LoopPair(eye_loop, eye_loop, tol)
    return SymbolPair(plus, minus)


def vanishing_point_pair(grid: int,
                         h: Optional[Callable[[float], float]] = None,
                         tol: float = 1e-12) -> LoopPair:
    """Scalar balanced pair (h e^{i chi}, h) whose entries vanish at sample 0.

    The default modulus h ramps smoothly 0 -> 1 -> 0 over the glued interval
    and the phase chi makes one full turn supported where h is exactly 1, so
    the pair is balanced to machine precision at every sample.
    """
    if h is None:
        def h(t: float) -> float:
            x = np.clip(t / (np.pi / 8), 0.0, 1.0)
            y = np.clip((HALF_PI - t) / (np.pi / 8), 0.0, 1.0)
            ramp = lambda z: z * z * (3 - 2 * z)
            return float(ramp(x) * ramp(y))

    def chi(t: float) -> float:
        lo, hi = np.pi / 8, 3 * np.pi / 8
        x = np.clip((t - lo) / (hi - lo), 0.0, 1.0)
        return float(2 * np.pi * x * x * (3 - 2 * x))

    def a_fn(t: float) -> Array:
        return np.array([[h(t) * np.exp(1j * chi(t))]])

    def b_fn(t: float) -> Array:
        return np.array([[h(t) + 0j]])

    s1 = MatrixLoop.from_function(a_fn, grid, dim=1)
    s2 = MatrixLoop.from_function(b_fn, grid, dim=1)
    return LoopPair(s1, s2, tol).validate()


def subbundle_projection_loop(grid: int, window: float = 0.1) -> MatrixLoop:
    """Projection-valued loop onto the rotating line span(cos t, -sin t).

    The raw line field jumps by a quarter turn across the glued endpoint, so
    within a window of half-width ``window`` around it the angle is carried
    by a C^1 ramp completing the extra half turn, which makes the loop a
    genuinely continuous projection field on the circle.
    """
    if not 0 < window < HALF_PI / 4:
        raise ValueError("window must lie in (0, pi/8)")
    lo = HALF_PI - window

    def angle(t: float) -> float:
        if window <= t <= lo:
            return t
        # wrapped coordinate through the glued endpoint, x in [0, 1]
        x = (t - lo) / (2 * window) if t > lo else (t + window) / (2 * window)
        psi0, psi1 = lo, np.pi + window
        m = 2 * window  # endpoint slope matching d(psi)/dx = slope * dt/dx
        h00 = 3 * x * x - 2 * x ** 3
        h10 = x ** 3 - 2 * x * x + x
        h11 = x ** 3 - x * x
        return psi0 + (psi1 - psi0) * h00 + m * (h10 + h11)

    def proj(t: float) -> Array:
        psi = angle(t)
        vec = np.array([np.cos(psi), -np.sin(psi)], dtype=np.complex128)
        return np.outer(vec, vec.conj())

    return MatrixLoop.from_function(proj, grid, dim=2)


# -- winding and the topological index ----------------------------------------------


def winding(values: np.ndarray, min_modulus: float = 0.5) -> int:
    """Winding number of a sampled scalar loop by phase-increment summation.

    Requires every sample to stay at least min_modulus away from zero and
    successive phase jumps strictly below pi; the accumulated phase must land
    within 0.1 turns of an integer.
    """
    values = np.asarray(values, dtype=np.complex128).ravel()
    moduli = np.abs(values)
    if moduli.min() < min_modulus:
        raise WindingError(
            f"loop modulus {moduli.min():.3e} below the floor {min_modulus:.3e}")
    jumps = np.angle(np.roll(values, -1) / values)
    if np.abs(jumps).max() >= np.pi * (1 - 1e-9):
        raise WindingError("phase jump of at least pi: grid too coarse")
    total = jumps.sum() / (2 * np.pi)
    nearest = int(np.rint(total))
    residue = abs(total - nearest)
    if residue >= 0.1:
        raise WindingError(f"winding residue {residue:.3f} exceeds 0.1")
    return nearest


def canonical_unitary_loop(lp: LoopPair) -> MatrixLoop:
    """Pointwise c = 1 + sigma2*(sigma1 - sigma2)."""
    eye = np.eye(lp.dim)
    s1, s2 = lp.sigma1.samples, lp.sigma2.samples
    c = eye[np.newaxis, :, :] + s2.conj().transpose(0, 2, 1) @ (s1 - s2)
    return MatrixLoop(c)


def det_loop(ml: MatrixLoop) -> np.ndarray:
    return np.linalg.det(ml.samples)


def _certified_unitary_dets(lp: LoopPair) -> np.ndarray:
    c = canonical_unitary_loop(lp)
    eye = np.eye(lp.dim)[np.newaxis]
    defect = _batch_opnorm(c.samples.conj().transpose(0, 2, 1) @ c.samples - eye)
    allowed = max(50 * lp.tol, 1e-12)
    if defect > allowed:
        raise NotUnitaryError(
            f"canonical loop unitarity defect {defect:.3e} exceeds {allowed:.1e}")
    return det_loop(c)


def topo_index(sp: SymbolPair) -> int:
    """wind(det c_minus) - wind(det c_plus); the sign convention of record."""
    det_plus = _certified_unitary_dets(sp.plus)
    det_minus = _certified_unitary_dets(sp.minus)
    return winding(det_minus) - winding(det_plus)


def export_det_csv(lp: LoopPair, path: str) -> None:
    """Write t, |det c|, arg det c rows for plotting."""
    dets = det_loop(canonical_unitary_loop(lp))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "abs_det_c", "arg_det_c"])
        for t, z in zip(lp.sigma1.ts, dets):
            writer.writerow([f"{t:.10f}", f"{abs(z):.12f}", f"{np.angle(z):.12f}"])
