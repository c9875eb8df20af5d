"""Single-qubit state algebra: density matrices, Bloch vectors, projective
measurements, and average energy under H = J*sigma_z.

All operators are plain 2x2 complex numpy arrays.  Internally J = 1 and
hbar = 1, so energies are in units of J and times in units of hbar/J.
States are dimensionless 2x2 density matrices; Bloch vectors are real
3-vectors (mx, my, mz) with rho = (I + m.sigma)/2.

Every function here is pure; nothing mutates its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Pauli matrices and the qubit Hamiltonian direction (H = J*sigma_z).
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

# Numerical guards used throughout the package.
HERMITICITY_ATOL = 1e-12
EIGENVALUE_FLOOR = -1e-12
ZERO_PROB_THRESHOLD = 1e-12


class DomainError(ValueError):
    """Raised when an argument is outside its physical domain."""


def hamiltonian(j: float = 1.0) -> np.ndarray:
    """Qubit Hamiltonian H = J*sigma_z (|0> has energy +J, |1> has -J)."""
    return j * SIGMA_Z


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def sanitize(rho: np.ndarray) -> np.ndarray:
    """Re-Hermitize, renormalize the trace, and clip sub-1e-12 negative
    eigenvalues of a density matrix that has drifted by floating rounding.

    A genuinely unphysical matrix (eigenvalue below the -1e-12 floor,
    trace far from 1) is not masked: it raises DomainError.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise DomainError(f"density matrix must be 2x2, got shape {rho.shape}")
    rho = 0.5 * (rho + dagger(rho))
    tr = float(np.real(np.trace(rho)))
    if abs(tr - 1.0) > 1e-6:
        raise DomainError(f"trace {tr} too far from 1 to renormalize safely")
    rho = rho / tr
    evals, evecs = np.linalg.eigh(rho)
    if evals[0] < EIGENVALUE_FLOOR:
        raise DomainError(f"state not positive: min eigenvalue {evals[0]}")
    if evals[0] < 0.0:
        evals = np.clip(evals, 0.0, None)
        evals = evals / evals.sum()
        rho = (evecs * evals) @ dagger(evecs)
    return rho


def is_density_matrix(rho: np.ndarray, atol: float = HERMITICITY_ATOL) -> bool:
    """Hermitian, unit trace, positive semidefinite (within atol)."""
    rho = np.asarray(rho)
    if rho.shape != (2, 2):
        return False
    if np.max(np.abs(rho - dagger(rho))) > atol:
        return False
    if abs(np.trace(rho) - 1.0) > atol:
        return False
    return bool(np.linalg.eigvalsh(rho)[0] >= -atol)


def pure_state(alpha: float) -> np.ndarray:
    """Density matrix of alpha|0> + sqrt(1-alpha^2)|1>, alpha in [0, 1]."""
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    ket = np.array([alpha, math.sqrt(1.0 - alpha * alpha)], dtype=complex)
    return np.outer(ket, ket.conj())


def mixed_state(bloch) -> np.ndarray:
    """Density matrix (I + mx*sx + my*sy + mz*sz)/2 for a Bloch 3-vector.

    Raises DomainError if the vector leaves the Bloch ball (|m| > 1),
    i.e. if the matrix would not be positive.
    """
    m = np.asarray(bloch, dtype=float)
    if m.shape != (3,):
        raise DomainError(f"Bloch vector must have 3 components, got {m.shape}")
    norm = float(np.linalg.norm(m))
    if norm > 1.0 + 1e-12:
        raise DomainError(f"Bloch vector norm {norm} exceeds 1 (state not positive)")
    rho = 0.5 * (IDENTITY + m[0] * SIGMA_X + m[1] * SIGMA_Y + m[2] * SIGMA_Z)
    return rho


def to_bloch(rho: np.ndarray) -> np.ndarray:
    """Bloch vector m_i = tr(rho sigma_i); inverse of mixed_state."""
    rho = np.asarray(rho, dtype=complex)
    return np.array([float(np.real(np.trace(rho @ s))) for s in PAULIS])


def purity(rho: np.ndarray) -> float:
    """tr(rho^2); 1 for pure states, 1/2 for the maximally mixed state."""
    return float(np.real(np.trace(rho @ rho)))


def energy(rho: np.ndarray, j: float = 1.0) -> float:
    """Average energy tr(H rho) with H = J*sigma_z; equals J*mz."""
    return float(j * np.real(rho[0, 0] - rho[1, 1]))


@dataclass(frozen=True)
class MeasurementSetting:
    """Direction of the dichotomic spin observable, theta in [0, pi),
    phi in [0, 2*pi), radians.

    Angles are reduced to canonical ranges on construction.  The reduction
    (theta, phi) -> (2*pi - theta, phi + pi) for theta > pi maps a setting
    to the one with the same measurement axis; theta = pi reduces to 0
    (same projector pair with outcomes relabeled, which leaves every
    correlation and energy in this package unchanged).
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta = float(self.theta) % (2.0 * math.pi)
        phi = float(self.phi)
        if theta > math.pi:
            theta = 2.0 * math.pi - theta
            phi = phi + math.pi
        if theta == math.pi:
            theta = 0.0
        phi = phi % (2.0 * math.pi)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    def axis(self) -> np.ndarray:
        """Unit Bloch vector of the measurement direction."""
        st = math.sin(self.theta)
        return np.array(
            [st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)]
        )


@dataclass(frozen=True)
class ProjectorPair:
    """Rank-1 projectors onto the +1 and -1 eigenstates of Q(theta, phi)."""

    p_plus: np.ndarray
    p_minus: np.ndarray

    def observable(self) -> np.ndarray:
        """Q = p_plus - p_minus; satisfies Q^2 = I."""
        return self.p_plus - self.p_minus


def observable(setting: MeasurementSetting) -> ProjectorPair:
    """Projector pair of the spin component along (theta, phi).

    Built from the eigenvectors
        |mu>      = cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>
        |mu_perp> = sin(theta/2)|0> - e^{i phi} cos(theta/2)|1>
    """
    half = 0.5 * setting.theta
    phase = np.exp(1j * setting.phi)
    mu = np.array([math.cos(half), phase * math.sin(half)], dtype=complex)
    mu_perp = np.array([math.sin(half), -phase * math.cos(half)], dtype=complex)
    return ProjectorPair(np.outer(mu, mu.conj()), np.outer(mu_perp, mu_perp.conj()))


@dataclass(frozen=True)
class MeasurementResult:
    """Born-rule probabilities and normalized post-measurement states.

    A branch whose probability falls below 1e-12 is flagged absent
    (post state None) rather than carrying a NaN state; downstream
    averages must skip it with weight zero.
    """

    prob_plus: float
    prob_minus: float
    post_plus: np.ndarray | None
    post_minus: np.ndarray | None

    @property
    def plus_absent(self) -> bool:
        return self.post_plus is None

    @property
    def minus_absent(self) -> bool:
        return self.post_minus is None

    def nonselective(self) -> np.ndarray:
        """Outcome-averaged post-measurement state sum_k p_k P_k rho P_k / norm."""
        acc = np.zeros((2, 2), dtype=complex)
        norm = 0.0
        for p, post in ((self.prob_plus, self.post_plus), (self.prob_minus, self.post_minus)):
            if post is not None:
                acc = acc + p * post
                norm += p
        return acc / norm


def measure(rho: np.ndarray, proj: ProjectorPair) -> MeasurementResult:
    """Projective measurement: probabilities tr(P rho) and Lueders
    post-states P rho P / p for each branch with p > 1e-12."""
    posts = []
    probs = []
    for p_op in (proj.p_plus, proj.p_minus):
        raw = p_op @ rho @ p_op
        p = float(np.real(np.trace(raw)))
        probs.append(min(max(p, 0.0), 1.0))
        # Normalizing by the trace of P rho P itself (== tr(P rho) exactly
        # in exact arithmetic) keeps near-zero-weight branches unit-trace.
        posts.append(sanitize(raw / p) if p > ZERO_PROB_THRESHOLD else None)
    return MeasurementResult(probs[0], probs[1], posts[0], posts[1])
