"""Qubit time evolution: exact unitary propagation under H = J*sigma_z and
Markovian dephasing via the Lindblad generator

    d rho/dt = -i[H, rho] + V rho V+ - (V+V rho + rho V+V)/2

for dephasing operators V along z, x, the z/x diagonal, or an arbitrary
Bloch axis.  Propagation is the exact exponential of the 4x4 Liouvillian
(column-stacked vec convention), computed by eigendecomposition with a
scaling-and-squaring fallback when the eigenbasis is ill-conditioned.

Units: J = 1, hbar = 1; gamma is the dimensionless hbar*gamma/J and times
are in hbar/J.  The Bloch precession frequency is 2J/hbar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .qubit import (
    IDENTITY,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DomainError,
    dagger,
    hamiltonian,
    sanitize,
)

# Condition number of the eigenvector matrix beyond which the exact
# eigendecomposition is abandoned for scaling-and-squaring.
EIG_CONDITION_LIMIT = 1e8

_VALID_KINDS = ("none", "z", "x", "diag45", "axis")


@dataclass(frozen=True)
class DephasingModel:
    """Which Lindblad dephasing operator acts, and at what rate.

    kind is one of "none", "z", "x", "diag45", "axis" (the last carries a
    unit Bloch axis).  gamma >= 0 is hbar*gamma/J; kind "none" forces
    gamma = 0.  For "axis", V = sqrt(gamma/2) (n . sigma), so "z" and "x"
    are its special cases; "diag45" uses (sqrt(gamma)/2)(sigma_x + sigma_z),
    identical to the axis (1, 0, 1)/sqrt(2).
    """

    kind: str = "none"
    gamma: float = 0.0
    axis: tuple[float, float, float] | None = None

    def __post_init__(self):
        if self.kind not in _VALID_KINDS:
            raise DomainError(f"unknown dephasing kind {self.kind!r}; use one of {_VALID_KINDS}")
        if self.gamma < 0.0:
            raise DomainError(f"gamma must be >= 0, got {self.gamma}")
        if self.kind == "none" and self.gamma != 0.0:
            raise DomainError("kind 'none' forces gamma = 0")
        if self.kind == "axis":
            if self.axis is None:
                raise DomainError("kind 'axis' requires an axis")
            a = np.asarray(self.axis, dtype=float)
            norm = float(np.linalg.norm(a))
            if norm < 1e-12:
                raise DomainError("dephasing axis must be nonzero")
            object.__setattr__(self, "axis", tuple(float(x) for x in a / norm))
        elif self.axis is not None:
            raise DomainError(f"axis is only meaningful for kind 'axis', not {self.kind!r}")
        object.__setattr__(self, "gamma", float(self.gamma))

    @classmethod
    def none(cls) -> "DephasingModel":
        return cls("none", 0.0)

    @classmethod
    def z_basis(cls, gamma: float) -> "DephasingModel":
        return cls("z", gamma)

    @classmethod
    def x_basis(cls, gamma: float) -> "DephasingModel":
        return cls("x", gamma)

    @classmethod
    def diag45(cls, gamma: float) -> "DephasingModel":
        return cls("diag45", gamma)

    @classmethod
    def general_axis(cls, axis, gamma: float) -> "DephasingModel":
        return cls("axis", gamma, tuple(float(x) for x in axis))

    def dephasing_operator(self) -> np.ndarray | None:
        """The Lindblad operator V, or None when no noise acts."""
        if self.kind == "none" or self.gamma == 0.0:
            return None
        root = math.sqrt(self.gamma / 2.0)
        if self.kind == "z":
            return root * SIGMA_Z
        if self.kind == "x":
            return root * SIGMA_X
        if self.kind == "diag45":
            return 0.5 * math.sqrt(self.gamma) * (SIGMA_X + SIGMA_Z)
        ax, ay, az = self.axis
        return root * (ax * SIGMA_X + ay * SIGMA_Y + az * SIGMA_Z)


def unitary_propagator(t: float) -> np.ndarray:
    """U(t) = exp(-i H t) = diag(e^{-iJt/hbar}, e^{+iJt/hbar}) with J = hbar = 1."""
    if t < 0.0:
        raise DomainError(f"time must be >= 0, got {t}")
    return np.diag([np.exp(-1j * t), np.exp(1j * t)])


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacked vectorization of a 2x2 matrix."""
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape(2, 2, order="F")


def build_liouvillian(model: DephasingModel) -> np.ndarray:
    """4x4 generator L with d vec(rho)/dt = L vec(rho).

    Uses vec(A rho B) = (B^T kron A) vec(rho) for the column-stacked
    convention: the commutator gives -i(I kron H - H^T kron I) and the
    dissipator (V* kron V) - (I kron V+V + (V+V)^T kron I)/2.
    """
    h = hamiltonian()
    lio = -1j * (np.kron(IDENTITY, h) - np.kron(h.T, IDENTITY))
    v = model.dephasing_operator()
    if v is not None:
        vdv = dagger(v) @ v
        lio = lio + np.kron(v.conj(), v)
        lio = lio - 0.5 * (np.kron(IDENTITY, vdv) + np.kron(vdv.T, IDENTITY))
    return lio


# Change of basis from vec space to the Hermitian basis
# {I, sx, sy, sz}/sqrt(2): columns are vec(B_k).  Unitary.
_PAULI_BASIS = np.column_stack(
    [vec(b / math.sqrt(2.0)) for b in (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z)]
)


def bloch_generator(model: DephasingModel) -> np.ndarray:
    """Real 3x3 generator A of the Bloch dynamics dm/dt = A m, obtained by
    rotating the Liouvillian into the Pauli basis.  All dephasing kinds
    here are unital, so there is no affine part.
    """
    lio = build_liouvillian(model)
    lp = dagger(_PAULI_BASIS) @ lio @ _PAULI_BASIS
    if np.max(np.abs(lp[0, :])) > 1e-12 or np.max(np.abs(lp[:, 0])) > 1e-12:
        raise DomainError("generator is not trace-preserving and unital")
    block = lp[1:, 1:]
    if np.max(np.abs(block.imag)) > 1e-12:
        raise DomainError("Bloch generator has a non-real block")
    return np.ascontiguousarray(block.real)


class MatrixExponential:
    """exp(M t) evaluated by eigendecomposition, precomputed once.

    Falls back to scipy's scaling-and-squaring expm when the eigenvector
    matrix is ill-conditioned (condition number above 1e8).
    """

    def __init__(self, matrix: np.ndarray):
        self.matrix = np.asarray(matrix)
        evals, evecs = np.linalg.eig(self.matrix)
        cond = float(np.linalg.cond(evecs))
        self._use_eig = cond <= EIG_CONDITION_LIMIT
        if self._use_eig:
            self._evals = evals
            self._evecs = evecs
            self._inv = np.linalg.inv(evecs)
        else:
            self._evals = self._evecs = self._inv = None

    def at(self, t: float) -> np.ndarray:
        if self._use_eig:
            return (self._evecs * np.exp(self._evals * t)) @ self._inv
        return expm(self.matrix * t)

    def factors(self) -> tuple[np.ndarray, np.ndarray, np.ndarray] | None:
        """(eigenvalues, eigenvectors, inverse eigenvectors), or None when
        the ill-conditioned fallback is active."""
        if self._use_eig:
            return self._evals, self._evecs, self._inv
        return None


class Propagator:
    """Cached exact propagators for one dephasing model.

    matrix_at(t) is the 4x4 map on vec(rho); bloch_at(t) the equivalent
    real 3x3 map on Bloch vectors.  Built once per model and safe for
    concurrent readers.
    """

    def __init__(self, model: DephasingModel):
        self.model = model
        self.liouvillian = build_liouvillian(model)
        self._vec_exp = MatrixExponential(self.liouvillian)
        self._bloch_exp = MatrixExponential(bloch_generator(model))

    def matrix_at(self, t: float) -> np.ndarray:
        return self._vec_exp.at(t)

    def bloch_at(self, t: float) -> np.ndarray:
        r = self._bloch_exp.at(t)
        return r.real if np.iscomplexobj(r) else r

    def bloch_factors(self):
        """Spectral factors of the Bloch generator (None under fallback)."""
        return self._bloch_exp.factors()


@lru_cache(maxsize=64)
def propagator(model: DephasingModel) -> Propagator:
    return Propagator(model)


def propagate(rho: np.ndarray, t: float, model: DephasingModel) -> np.ndarray:
    """Evolve rho for time t under the model's Lindblad dynamics.

    Exact: unvec(exp(L t) vec(rho)), re-Hermitized.  For kind "none" this
    coincides with U(t) rho U(t)+.
    """
    if t < 0.0:
        raise DomainError(f"time must be >= 0, got {t}")
    if t == 0.0:
        return sanitize(rho)
    out = unvec(propagator(model).matrix_at(t) @ vec(rho))
    return sanitize(out)


def dephasing_z_closed_form(b0, t: float, gamma: float) -> np.ndarray:
    """Damped-precession Bloch vector for same-basis (z) dephasing:

        mx(t) = e^{-gamma t} [mx0 cos(2t) - my0 sin(2t)]
        my(t) = e^{-gamma t} [my0 cos(2t) + mx0 sin(2t)]
        mz(t) = mz0

    with the precession frequency 2J/hbar (J = hbar = 1).
    """
    if t < 0.0:
        raise DomainError(f"time must be >= 0, got {t}")
    if gamma < 0.0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    mx0, my0, mz0 = (float(c) for c in np.asarray(b0, dtype=float))
    damp = math.exp(-gamma * t)
    c, s = math.cos(2.0 * t), math.sin(2.0 * t)
    return np.array([damp * (mx0 * c - my0 * s), damp * (my0 * c + mx0 * s), mz0])
