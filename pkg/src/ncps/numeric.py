"""Floating-point harness: truncated operators on the concrete twisted torus.

Operators act on Fourier modes ``|k|_inf <= L`` tensored with a 2-spinor slot.
Multiplication by a basic unitary of lattice vector ``m`` is the twisted shift
``k -> k + m`` with phase ``exp(pi i Theta(m, k))``; conformal factors are
matrix exponentials of truncated multiplication operators, which keeps the
assembled family Hermitian exactly (up to symmetrization, whose defect is
recorded).  Spectra and flows are quoted on interior modes where the twisted
shifts are exact isometries.

Also hosts the numeric evaluator for formal trace classes: words in derived
generators are mapped to twisted convolutions of concrete Fourier data and the
trace reads off the zero mode.  This closes the loop between the exact
symbolic densities and finite-dimensional spectral data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .algebra import AlgebraElement, TauClass
from .scalars import DomainError


class GridTooCoarseError(RuntimeError):
    """Eigenvalue movement between samples is too large to count crossings."""


class ZeroEigenvalueError(RuntimeError):
    """An endpoint spectrum touches zero exactly; the flow count is ambiguous."""


def theta_matrix(data: Sequence[Sequence[float]]) -> np.ndarray:
    th = np.asarray(data, dtype=float)
    if th.ndim != 2 or th.shape[0] != th.shape[1]:
        raise DomainError("deformation matrix must be square")
    if not np.allclose(th, -th.T, atol=1e-14):
        raise DomainError("deformation matrix must be skew-symmetric")
    return th


@dataclass
class ConcreteElement:
    """Finite Fourier sum ``sum_k a_k U_k`` with complex coefficients."""

    dim: int
    modes: dict[tuple[int, ...], complex]

    def __post_init__(self):
        self.modes = {
            tuple(int(x) for x in k): complex(v)
            for k, v in self.modes.items()
            if abs(v) > 0.0
        }
        for k in self.modes:
            if len(k) != self.dim:
                raise DomainError("mode vector length must match the dimension")

    @classmethod
    def unit(cls, dim: int) -> "ConcreteElement":
        return cls(dim, {(0,) * dim: 1.0})

    @classmethod
    def cosine(cls, dim: int, k: Sequence[int], amplitude: float = 1.0) -> "ConcreteElement":
        """Self-adjoint element ``amplitude (U_k + U_k^*) / 2``."""
        k = tuple(int(x) for x in k)
        mk = tuple(-x for x in k)
        return cls(dim, {k: amplitude / 2.0, mk: amplitude / 2.0})

    def support_radius(self) -> int:
        return max((max(abs(x) for x in k) for k in self.modes), default=0)

    def is_selfadjoint(self, tol: float = 1e-12) -> bool:
        # U_k^* = U_{-k} exactly, so the condition is a_{-k} = conj(a_k)
        for k, v in self.modes.items():
            mk = tuple(-x for x in k)
            if abs(self.modes.get(mk, 0.0) - np.conj(v)) > tol:
                return False
        return True

    def star(self) -> "ConcreteElement":
        return ConcreteElement(
            self.dim,
            {tuple(-x for x in k): np.conj(v) for k, v in self.modes.items()},
        )

    def delta(self, mu: int) -> "ConcreteElement":
        return ConcreteElement(
            self.dim, {k: v * k[mu - 1] for k, v in self.modes.items()}
        )

    def twisted_mul(self, other: "ConcreteElement", theta: np.ndarray) -> "ConcreteElement":
        out: dict[tuple[int, ...], complex] = {}
        for p, a in self.modes.items():
            pv = np.asarray(p, dtype=float)
            for q, b in other.modes.items():
                phase = np.exp(1j * math.pi * float(pv @ theta @ np.asarray(q, dtype=float)))
                k = tuple(x + y for x, y in zip(p, q))
                out[k] = out.get(k, 0.0) + a * b * phase
        return ConcreteElement(self.dim, out)

    def tau(self) -> complex:
        return self.modes.get((0,) * self.dim, 0.0)


# -- mode boxes and operator assembly ----------------------------------------------


def mode_box(L: int, dim: int) -> list[tuple[int, ...]]:
    rng = range(-L, L + 1)
    if dim == 2:
        return [(a, b) for a in rng for b in rng]
    return [(a, b, c) for a in rng for b in rng for c in rng]


_PAULI_NUM = {
    1: np.array([[0, 1], [1, 0]], dtype=complex),
    2: np.array([[0, -1j], [1j, 0]], dtype=complex),
    3: np.array([[1, 0], [0, -1]], dtype=complex),
}


def gamma_num(dim: int, mu: int) -> np.ndarray:
    if not 1 <= mu <= dim:
        raise DomainError("gamma index out of range")
    return _PAULI_NUM[mu]


def multiplication_matrix(
    a: ConcreteElement, L: int, theta: Optional[np.ndarray] = None
) -> np.ndarray:
    """Matrix of left multiplication by ``a`` on the mode box (no spinor slot)."""
    box = mode_box(L, a.dim)
    index = {k: i for i, k in enumerate(box)}
    n = len(box)
    out = np.zeros((n, n), dtype=complex)
    th = np.zeros((a.dim, a.dim)) if theta is None else theta
    for m, coeff in a.modes.items():
        mv = np.asarray(m, dtype=float)
        for k, i in index.items():
            tgt = tuple(x + y for x, y in zip(m, k))
            j = index.get(tgt)
            if j is not None:
                phase = np.exp(1j * math.pi * float(mv @ th @ np.asarray(k, dtype=float)))
                out[j, i] += coeff * phase
    return out


def free_dirac_matrix(L: int, dim: int) -> np.ndarray:
    box = mode_box(L, dim)
    n = len(box)
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    for i, k in enumerate(box):
        block = sum(k[mu - 1] * gamma_num(dim, mu) for mu in range(1, dim + 1))
        out[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = block
    return out


def _with_spinor(m: np.ndarray) -> np.ndarray:
    return np.kron(m, np.eye(2, dtype=complex))


def expm_hermitian(m: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(m)
    return (vecs * np.exp(vals)) @ vecs.conj().T


@dataclass
class TruncatedOperator:
    """Dense Hermitian matrix on modes ``|k|_inf <= L`` times the spinor slot."""

    cutoff: int
    dim: int
    matrix: np.ndarray
    hermiticity_defect: float = 0.0
    interior_cutoff: Optional[int] = None

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass
class NumericFamily:
    """Concrete data for building truncated operators.

    kinds mirror the symbolic families; ``weyl`` (a self-adjoint concrete
    element) drives the conformal kind, ``flow_k`` the unitary flow.
    """

    kind: str
    dim: int
    theta: Optional[np.ndarray] = None
    weyl: Optional[ConcreteElement] = None
    gauge: Optional[list[ConcreteElement]] = None
    flow_k: tuple[int, ...] = ()

    def support_radius(self) -> int:
        r = 0
        if self.weyl is not None:
            r = max(r, self.weyl.support_radius())
        for g in self.gauge or []:
            r = max(r, g.support_radius())
        return r


def build_operator(f: NumericFamily, L: int, t: float = 0.0) -> TruncatedOperator:
    """Assemble the truncated family member at parameter ``t``."""
    dim = f.dim
    if f.support_radius() > L:
        raise DomainError("mode support exceeds the truncation box")
    mat = free_dirac_matrix(L, dim)
    if f.kind == "free_dirac":
        pass
    elif f.kind == "unitary_flow":
        if len(f.flow_k) != dim:
            raise DomainError("unitary flow needs a lattice vector of length dim")
        shift = sum(
            f.flow_k[mu - 1] * gamma_num(dim, mu) for mu in range(1, dim + 1)
        )
        n = mat.shape[0] // 2
        mat = mat + t * np.kron(np.eye(n, dtype=complex), shift)
    elif f.kind == "conformal_dirac":
        if f.weyl is None or not f.weyl.is_selfadjoint():
            raise DomainError("conformal family needs a self-adjoint Weyl element")
        mh = multiplication_matrix(f.weyl, L, f.theta)
        e = _with_spinor(expm_hermitian((t / 2.0) * mh))
        mat = e @ mat @ e
    elif f.kind == "coupled_dirac":
        if not f.gauge or len(f.gauge) != dim:
            raise DomainError("coupled family needs one gauge element per direction")
        for mu, a in enumerate(f.gauge, start=1):
            if not a.is_selfadjoint():
                raise DomainError("gauge elements must be self-adjoint")
            ma = multiplication_matrix(a, L, f.theta)
            mat = mat + np.kron(ma, gamma_num(dim, mu))
    else:
        raise DomainError(f"unknown family kind {f.kind!r}")
    defect = float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0
    sym = (mat + mat.conj().T) / 2.0
    return TruncatedOperator(
        cutoff=L,
        dim=dim,
        matrix=sym,
        hermiticity_defect=defect,
        interior_cutoff=L - f.support_radius(),
    )


def hermitian_eigenvalues(T: TruncatedOperator | np.ndarray) -> np.ndarray:
    """All eigenvalues of a dense Hermitian matrix, ascending."""
    mat = T.matrix if isinstance(T, TruncatedOperator) else np.asarray(T)
    if mat.size and np.max(np.abs(mat - mat.conj().T)) > 1e-10 * max(
        1.0, float(np.max(np.abs(mat)))
    ):
        raise DomainError("matrix is not Hermitian")
    return np.linalg.eigvalsh(mat)


def eigen_residual(mat: np.ndarray) -> float:
    """Largest relative residual ||Tv - lam v|| / ||T|| over all pairs."""
    vals, vecs = np.linalg.eigh(mat)
    res = mat @ vecs - vecs * vals
    norm = max(float(np.linalg.norm(mat, 2)), 1e-300)
    return float(np.max(np.linalg.norm(res, axis=0))) / norm


# -- heat traces ---------------------------------------------------------------------


def heat_trace_lattice(t: float, L: int, dim: int, weight: complex = 1.0) -> float:
    """Localized free heat trace ``weight * sum_{|k|<=L} 2 exp(-t |k|^2)``.

    The weight is the zero mode of the localizer, which is all the diagonal
    of a multiplication operator contributes for the flat family.
    """
    if t <= 0:
        raise DomainError("heat parameter must be positive")
    js = np.arange(-L, L + 1)
    theta1 = np.exp(-t * js**2).sum()
    return float(2.0 * (weight.real if isinstance(weight, complex) else weight) * theta1**dim)


def heat_trace_operator(
    T: TruncatedOperator, t: float, localizer: Optional[np.ndarray] = None
) -> float:
    """``Tr(a exp(-t D^2))`` for a truncated operator, by eigendecomposition."""
    vals, vecs = np.linalg.eigh(T.matrix)
    weights = np.exp(-t * vals**2)
    if localizer is None:
        return float(weights.sum())
    w = np.einsum("ij,jk,ki->i", vecs.conj().T, localizer, vecs).real
    return float((w * weights).sum())


# -- spectral flow -------------------------------------------------------------------


def spectral_flow(
    spectra: Sequence[np.ndarray],
    kernel_shift: float = 0.0,
) -> int:
    """Net signed count of eigenvalue crossings through zero along the grid.

    Matching is by sorted index.  With ``kernel_shift > 0`` eigenvalues within
    the shift of zero are counted as positive (the kernel-projection
    convention for families that touch zero at the ends); with a zero shift an
    exact zero anywhere raises, and a step whose operator movement could hide
    a double crossing raises.
    """
    if len(spectra) < 2:
        raise DomainError("need at least two grid points")
    arrs = [np.sort(np.asarray(s, dtype=float)) for s in spectra]
    n = len(arrs[0])
    if any(len(a) != n for a in arrs):
        raise DomainError("all spectra must have the same size")
    if kernel_shift > 0.0:
        shifted = [np.abs(a) <= kernel_shift for a in arrs]
        arrs = [np.where(s, kernel_shift, a) for a, s in zip(arrs, shifted)]
    else:
        shifted = [np.zeros(n, dtype=bool) for _ in arrs]
        for i, a in enumerate(arrs):
            if np.any(a == 0.0):
                raise ZeroEigenvalueError(
                    f"exact zero eigenvalue at grid point {i}; the family must be "
                    "invertible at the ends (or pass a kernel shift)"
                )
    flow = 0
    for j in range(len(arrs) - 1):
        a, b = arrs[j], arrs[j + 1]
        move = float(np.max(np.abs(b - a))) if n else 0.0
        up = int(np.sum((a < 0) & (b > 0)))
        down = int(np.sum((a > 0) & (b < 0)))
        crossing = up + down > 0 or bool(np.any(shifted[j] | shifted[j + 1]))
        if not crossing:
            # without a recorded crossing, movement must stay below half the
            # zero window, else a crossing pair could have come and gone unseen
            window = min(_zero_window(a), _zero_window(b))
            if move > 0.5 * window * (1.0 + 1e-6):
                raise GridTooCoarseError(
                    f"step {j}: movement {move:.3g} exceeds half the zero window "
                    f"{window:.3g}; refine the grid"
                )
        flow += up - down
    return flow


def _zero_window(vals: np.ndarray) -> float:
    pos = vals[vals > 0]
    neg = vals[vals < 0]
    if pos.size == 0 or neg.size == 0:
        return math.inf
    return float(pos.min() - neg.max())


def unitary_flow_spectra(
    k: Sequence[int],
    grid: Sequence[float],
    L: int,
    dim: int,
) -> list[np.ndarray]:
    """Spectra of the commutator-shift family along the grid.

    The family is block-diagonal over modes (the shift is a constant matrix),
    so each grid point diagonalizes as a stack of 2x2 blocks.
    """
    box = np.asarray(mode_box(L, dim), dtype=float)
    kvec = np.asarray(k, dtype=float)
    gammas = np.stack([gamma_num(dim, mu) for mu in range(1, dim + 1)])
    out = []
    for t in grid:
        shifted = box + t * kvec  # (N, dim)
        blocks = np.einsum("nd,dij->nij", shifted, gammas)
        vals = np.linalg.eigvalsh(blocks)
        out.append(np.sort(vals.ravel()))
    return out


def gauge_conjugation_deviation(
    m: Sequence[int], L: int, dim: int, theta: Optional[np.ndarray] = None
) -> float:
    """Spectral deviation of the conjugated truncation from exact covariance.

    Conjugating the truncated free operator by the twisted shift of ``m`` and
    compressing to interior modes must reproduce the free eigenvalues on the
    shifted interior box; returns the largest mismatch.
    """
    m = tuple(int(x) for x in m)
    r = max(abs(x) for x in m)
    if L - r < 0:
        raise DomainError("cutoff too small for the requested shift")
    shiftmat = multiplication_matrix(ConcreteElement(dim, {m: 1.0}), L, theta)
    d = free_dirac_matrix(L, dim)
    u = _with_spinor(shiftmat)
    conj = u.conj().T @ d @ u
    box = mode_box(L, dim)
    keep = [i for i, k in enumerate(box) if max(abs(x) for x in k) <= L - r]
    idx = np.array(
        [2 * i + s for i in keep for s in (0, 1)], dtype=int
    )
    inner = conj[np.ix_(idx, idx)]
    got = np.linalg.eigvalsh(inner)
    expect = np.sort(
        np.concatenate(
            [
                [vv, -vv]
                for k in (np.asarray(box)[keep] + np.asarray(m))
                for vv in [float(np.linalg.norm(k))]
            ]
        )
    )
    return float(np.max(np.abs(got - expect)))


# -- numeric evaluation of formal trace classes ---------------------------------------


def evaluate_element(
    a: AlgebraElement,
    assign: dict[str, ConcreteElement],
    theta: np.ndarray,
    t: float = 1.0,
) -> complex:
    """Trace of a formal element with generators bound to concrete data."""
    total = 0j
    for word, coeff in a.terms():
        val: Optional[ConcreteElement] = None
        for g in word:
            base = assign.get(g.base)
            if base is None:
                raise DomainError(f"no concrete data bound to generator {g.base!r}")
            x = base
            for mu, order in enumerate(g.deriv, start=1):
                for _ in range(order):
                    x = x.delta(mu)
            if g.star:
                x = x.star()
            val = x if val is None else val.twisted_mul(x, theta)
        wtau = 1.0 + 0j if val is None else val.tau()
        total += coeff.to_complex(t) * wtau
    return total


def evaluate_tau(
    cls: TauClass,
    assign: dict[str, ConcreteElement],
    theta: np.ndarray,
    t: float = 1.0,
) -> complex:
    """Numeric value of a trace class on the concrete twisted torus.

    Cyclic rotation of words is a symmetry of the concrete trace, so any
    representative gives the same number.
    """
    return evaluate_element(cls.representative, assign, theta, t)
