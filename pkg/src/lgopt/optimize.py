"""Energy-constrained maximization of K3 over (theta, phi, dt).

The constrained problem is max K3 subject to the average energy cost
hitting a target delta.  The search is a dense deterministic grid over
the (theta, phi, dt) box followed by penalized Nelder-Mead refinement:
first with the banded objective

    K3 - penalty_weight * max(0, |dE - delta| - tolerance)

and then an exact-penalty polish (no tolerance deadzone) that lands the
iterate on the constraint manifold itself, so a reported optimum carries
a residual far below the acceptance tolerance whenever the manifold is
reachable.  Everything is closed-form fast-path Bloch algebra internally;
the reported optimum is re-evaluated through the measurement-protocol
engine, so the result contract is the engine's K3 and energy.

All quantities are in units of J (energies) and hbar/J (times).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import DephasingModel, propagator
from .protocol import lg_run
from .qubit import DomainError, MeasurementSetting, energy, to_bloch

# Number of spatially separated refinement starts taken from the grid.
_N_STARTS = 6
# Candidates within this K3 distance are tied; ties resolve to the
# smallest dt, then theta, then phi.
_TIE_EPS = 1e-9
_T_FLOOR = 1e-9
_BAD = -1e12


@dataclass(frozen=True)
class ConstraintSpec:
    """Energy-cost target delta (units of J) and the acceptance tolerance
    on |dE - delta| for a point to count as satisfying the constraint."""

    delta: float
    tolerance: float = 1e-4

    def __post_init__(self):
        if not self.tolerance > 0.0:
            raise DomainError(f"tolerance must be > 0, got {self.tolerance}")


@dataclass(frozen=True)
class SearchConfig:
    """Grid resolution and refinement effort of the constrained search."""

    theta_points: int = 64
    phi_points: int = 32
    dt_points: int = 256
    dt_max: float = 2.0 * math.pi
    refine_iterations: int = 200
    penalty_weight: float = 1e3
    refine_starts: int = _N_STARTS

    def __post_init__(self):
        for name in ("theta_points", "phi_points", "dt_points"):
            if getattr(self, name) < 2:
                raise DomainError(f"{name} must be >= 2")
        if not self.dt_max > 0.0:
            raise DomainError(f"dt_max must be > 0, got {self.dt_max}")
        if self.refine_iterations < 1:
            raise DomainError("refine_iterations must be >= 1")
        if self.refine_starts < 1:
            raise DomainError("refine_starts must be >= 1")


@dataclass(frozen=True)
class OptimizationResult:
    """Outcome of one constrained maximization.

    When feasible, k3_opt is the engine K3 at the starred parameters and
    constraint_residual = |dE - delta| there.  When infeasible, k3_opt and
    the starred parameters are None (never a default number) and the
    residual reports the closest constraint approach found.
    """

    k3_opt: float | None
    theta_star: float | None
    phi_star: float | None
    dt_star: float | None
    feasible: bool
    constraint_residual: float
    evaluations: int


@dataclass(frozen=True)
class FeasibilityResult:
    """Witness search outcome: a point with |dE - delta| <= tolerance, or
    a certificate of absence relative to the searched grid + refinement."""

    feasible: bool
    theta: float | None
    phi: float | None
    dt: float | None
    residual: float
    evaluations: int


@dataclass(frozen=True)
class MaxLineReport:
    """Location of the best K3 along a delta scan versus the prediction
    delta = -tr(rho H).  degenerate flags an empty feasible set."""

    argmax_delta: float | None
    predicted_delta: float
    deviation: float
    shifted: bool
    degenerate: bool
    deltas: tuple[float, ...]
    k3_values: tuple[float, ...]


def _nelder_mead(objective, x0, max_iter: int) -> tuple[tuple, float, int]:
    """Minimize a 3-variable function with a plain deterministic
    Nelder-Mead simplex (standard reflection/expansion/contraction
    coefficients, scipy-style initial simplex).  Returns (x, f(x), nfev).

    Hand-rolled in scalar arithmetic to keep per-call overhead out of the
    sweep hot loop.
    """
    simplex = [tuple(float(v) for v in x0)]
    for i in range(3):
        point = list(simplex[0])
        point[i] = point[i] * 1.05 if point[i] != 0.0 else 0.00025
        simplex.append(tuple(point))
    values = [objective(p) for p in simplex]
    nfev = 4

    for _ in range(max_iter):
        pairs = sorted(zip(values, simplex), key=lambda vp: vp[0])
        values = [v for v, _ in pairs]
        simplex = [p for _, p in pairs]
        if values[-1] - values[0] <= 1e-13 and all(
            abs(simplex[j][i] - simplex[0][i]) <= 1e-12
            for j in (1, 2, 3)
            for i in (0, 1, 2)
        ):
            break
        worst = simplex[-1]
        cx = (simplex[0][0] + simplex[1][0] + simplex[2][0]) / 3.0
        cy = (simplex[0][1] + simplex[1][1] + simplex[2][1]) / 3.0
        cz = (simplex[0][2] + simplex[1][2] + simplex[2][2]) / 3.0
        reflected = (2.0 * cx - worst[0], 2.0 * cy - worst[1], 2.0 * cz - worst[2])
        f_r = objective(reflected)
        nfev += 1
        if f_r < values[0]:
            expanded = (3.0 * cx - 2.0 * worst[0], 3.0 * cy - 2.0 * worst[1], 3.0 * cz - 2.0 * worst[2])
            f_e = objective(expanded)
            nfev += 1
            if f_e < f_r:
                simplex[-1], values[-1] = expanded, f_e
            else:
                simplex[-1], values[-1] = reflected, f_r
        elif f_r < values[-2]:
            simplex[-1], values[-1] = reflected, f_r
        else:
            contracted = (
                0.5 * (cx + worst[0]),
                0.5 * (cy + worst[1]),
                0.5 * (cz + worst[2]),
            )
            f_c = objective(contracted)
            nfev += 1
            if f_c < values[-1]:
                simplex[-1], values[-1] = contracted, f_c
            else:
                best = simplex[0]
                for j in (1, 2, 3):
                    simplex[j] = (
                        0.5 * (best[0] + simplex[j][0]),
                        0.5 * (best[1] + simplex[j][1]),
                        0.5 * (best[2] + simplex[j][2]),
                    )
                    values[j] = objective(simplex[j])
                nfev += 3

    i_best = min(range(4), key=lambda j: values[j])
    return simplex[i_best], values[i_best], nfev


def feasible_bounds_pure(alpha: float) -> tuple[float, float]:
    """Accessible energy-cost band (-alpha^2, 1 - alpha^2) in units of J
    for the pure family alpha|0> + sqrt(1-alpha^2)|1> without noise."""
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    return -alpha * alpha, 1.0 - alpha * alpha


def max_violation_delta(rho: np.ndarray) -> float:
    """The energy cost -tr(rho H) on which the constrained maximum sits."""
    return -energy(rho)


class ConstrainedSearch:
    """Grid tables and exact point evaluators for one (state, model, config).

    Building the tables is the expensive step; scanning many delta targets
    against one instance reuses them.  Instances are immutable after
    construction and safe to share across threads.
    """

    def __init__(self, rho: np.ndarray, model: DephasingModel, config: SearchConfig):
        self.model = model
        self.config = config
        self.rho = np.asarray(rho, dtype=complex)
        self.m0 = to_bloch(rho)
        self._prop = propagator(model)

        nth, nph, nt = config.theta_points, config.phi_points, config.dt_points
        self.thetas = np.linspace(0.0, math.pi, nth, endpoint=False)
        self.phis = np.linspace(0.0, 2.0 * math.pi, nph, endpoint=False)
        self.ts = np.linspace(config.dt_max / nt, config.dt_max, nt)

        st, ct = np.sin(self.thetas), np.cos(self.thetas)
        sp, cp = np.sin(self.phis), np.cos(self.phis)
        # Measurement axes, flattened theta-major: index n = i_theta*nph + i_phi.
        axes = np.empty((nth * nph, 3))
        axes[:, 0] = np.outer(st, cp).ravel()
        axes[:, 1] = np.outer(st, sp).ravel()
        axes[:, 2] = np.repeat(ct, nph)
        self.axes = axes

        r1 = np.stack([self._prop.bloch_at(t) for t in self.ts])
        r2 = np.stack([self._prop.bloch_at(2.0 * t) for t in self.ts])
        # c1[t, n] = n . R(t) n ; the correlator of one leg of duration t.
        c1 = np.einsum("ni,tij,nj->tn", axes, r1, axes, optimize=True)
        c2 = np.einsum("ni,tij,nj->tn", axes, r2, axes, optimize=True)
        self.k3_grid = 2.0 * c1 - c2
        m0n = axes @ self.m0
        d1 = (r1 @ self.m0) @ axes.T
        nz = axes[:, 2]
        self.de_grid = (m0n * (c1 + c2) + d1 * c1) * nz / 3.0 - self.m0[2]
        self.grid_evaluations = self.k3_grid.size

        # Spectral factors of the Bloch generator let point() evaluate
        # R(t) contractions as e^{w t}-weighted dot products, in scalar
        # complex arithmetic (the refinement loop calls this ~10^3 times
        # per cell, so numpy dispatch overhead would dominate).
        factors = self._prop.bloch_factors()
        if factors is not None:
            evals, evecs, inv = factors
            self._evals = [complex(v) for v in evals]
            self._evec_cols = [
                (complex(evecs[0, k]), complex(evecs[1, k]), complex(evecs[2, k]))
                for k in range(3)
            ]
            self._inv_rows = [
                (complex(inv[k, 0]), complex(inv[k, 1]), complex(inv[k, 2]))
                for k in range(3)
            ]
            m0c = self.m0.astype(complex)
            inv_m0 = inv @ m0c
            self._inv_m0 = [complex(v) for v in inv_m0]
        else:
            self._evals = None
        self._m0_tuple = (float(self.m0[0]), float(self.m0[1]), float(self.m0[2]))

    # -- exact (off-grid) evaluation ------------------------------------

    def point(self, theta: float, phi: float, dt: float) -> tuple[float, float]:
        """(K3, dE) at a continuous parameter point; closed-form exact."""
        st = math.sin(theta)
        nx = st * math.cos(phi)
        ny = st * math.sin(phi)
        nz = math.cos(theta)
        m0x, m0y, m0z = self._m0_tuple
        if self._evals is not None:
            c1 = c2 = d1 = 0.0
            for k in (0, 1, 2):
                vk = self._evec_cols[k]
                rk = self._inv_rows[k]
                left = vk[0] * nx + vk[1] * ny + vk[2] * nz
                right = rk[0] * nx + rk[1] * ny + rk[2] * nz
                e1 = cmath.exp(self._evals[k] * dt)
                pair = left * right
                c1 += (e1 * pair).real
                c2 += (e1 * e1 * pair).real
                d1 += (e1 * left * self._inv_m0[k]).real
        else:
            n = np.array([nx, ny, nz])
            r1 = self._prop.bloch_at(dt)
            r2 = self._prop.bloch_at(2.0 * dt)
            c1 = float(n @ (r1 @ n))
            c2 = float(n @ (r2 @ n))
            d1 = float(n @ (r1 @ self.m0))
        m0n = m0x * nx + m0y * ny + m0z * nz
        k3 = 2.0 * c1 - c2
        de = nz * (m0n * (c1 + c2) + d1 * c1) / 3.0 - m0z
        return k3, de

    # -- candidate seeding ----------------------------------------------

    def _separated_top(self, score: np.ndarray, count: int) -> list[tuple[int, int, int]]:
        """Indices (i_t, i_theta, i_phi) of the best-scoring grid points,
        greedily thinned so starts do not cluster in one basin."""
        nph = self.config.phi_points
        flat = score.ravel()
        take = min(flat.size, max(count * 40, 200))
        part = np.argpartition(-flat, take - 1)[:take]
        order = part[np.argsort(-flat[part], kind="stable")]
        kept: list[tuple[int, int, int]] = []
        for idx in order:
            i_t, i_n = divmod(int(idx), score.shape[1])
            i_th, i_ph = divmod(i_n, nph)
            close = any(
                abs(i_t - j_t) <= 3 and abs(i_th - j_th) <= 2 and abs(i_ph - j_ph) <= 2
                for j_t, j_th, j_ph in kept
            )
            if not close:
                kept.append((i_t, i_th, i_ph))
            if len(kept) >= count:
                break
        return kept

    def _refine(self, x0, objective, max_iter: int):
        x, _, nfev = _nelder_mead(objective, x0, max_iter)
        return x, nfev

    # -- constrained maximization ---------------------------------------

    def k3_opt(self, spec: ConstraintSpec) -> OptimizationResult:
        delta, tol = spec.delta, spec.tolerance
        weight = self.config.penalty_weight
        viol = np.abs(self.de_grid - delta)
        score = self.k3_grid - weight * np.maximum(0.0, viol - tol)
        seeds = self._separated_top(score, self.config.refine_starts)
        seeds += [s for s in self._separated_top(-viol, 2) if s not in seeds]

        evaluations = self.grid_evaluations
        best = None  # (k3, dt, theta, phi, residual)
        best_residual = float(np.min(viol))

        def banded(x):
            if not (_T_FLOOR < x[2] <= self.config.dt_max):
                return -_BAD
            k3, de = self.point(x[0], x[1], x[2])
            return -(k3 - weight * max(0.0, abs(de - delta) - tol))

        def exact(x):
            if not (_T_FLOOR < x[2] <= self.config.dt_max):
                return -_BAD
            k3, de = self.point(x[0], x[1], x[2])
            return -(k3 - weight * abs(de - delta))

        for i_t, i_th, i_ph in seeds:
            x0 = (self.thetas[i_th], self.phis[i_ph], self.ts[i_t])
            x1, n1 = self._refine(x0, banded, self.config.refine_iterations)
            x2, n2 = self._refine(x1, exact, self.config.refine_iterations)
            evaluations += n1 + n2
            k3, de = self.point(*x2)
            residual = abs(de - delta)
            best_residual = min(best_residual, residual)
            if residual > tol:
                continue
            setting = MeasurementSetting(x2[0], x2[1])
            cand = (k3, float(x2[2]), setting.theta, setting.phi, residual)
            if best is None or _better(cand, best):
                best = cand

        if best is None:
            return OptimizationResult(
                k3_opt=None,
                theta_star=None,
                phi_star=None,
                dt_star=None,
                feasible=False,
                constraint_residual=best_residual,
                evaluations=evaluations,
            )

        _, dt_star, theta_star, phi_star, _ = best
        outcome = lg_run(
            self.rho, MeasurementSetting(theta_star, phi_star), self.model, dt_star
        )
        return OptimizationResult(
            k3_opt=outcome.k3,
            theta_star=theta_star,
            phi_star=phi_star,
            dt_star=dt_star,
            feasible=True,
            constraint_residual=abs(outcome.delta_e_avg - delta),
            evaluations=evaluations + 1,
        )

    def unconstrained_max(self) -> float:
        """max K3 over the same grid + refinement, ignoring the constraint."""
        i_t, i_n = divmod(int(np.argmax(self.k3_grid)), self.k3_grid.shape[1])
        i_th, i_ph = divmod(i_n, self.config.phi_points)

        def neg(x):
            if not (_T_FLOOR < x[2] <= self.config.dt_max):
                return -_BAD
            return -self.point(x[0], x[1], x[2])[0]

        x0 = (self.thetas[i_th], self.phis[i_ph], self.ts[i_t])
        x, _ = self._refine(x0, neg, self.config.refine_iterations)
        return self.point(*x)[0]

    # -- feasibility ------------------------------------------------------

    def feasible(self, spec: ConstraintSpec) -> FeasibilityResult:
        delta, tol = spec.delta, spec.tolerance
        viol = np.abs(self.de_grid - delta)
        evaluations = self.grid_evaluations
        best = (float(np.min(viol)), None)

        def objective(x):
            if not (_T_FLOOR < x[2] <= self.config.dt_max):
                return -_BAD
            _, de = self.point(x[0], x[1], x[2])
            return (de - delta) ** 2

        for i_t, i_th, i_ph in self._separated_top(-viol, 3):
            x0 = (self.thetas[i_th], self.phis[i_ph], self.ts[i_t])
            x, nfev = self._refine(x0, objective, self.config.refine_iterations)
            evaluations += nfev
            _, de = self.point(*x)
            residual = abs(de - delta)
            if residual < best[0]:
                best = (residual, x)
            if residual <= tol:
                break

        residual, x = best
        if x is None or residual > tol:
            return FeasibilityResult(False, None, None, None, residual, evaluations)
        setting = MeasurementSetting(x[0], x[1])
        return FeasibilityResult(
            True, setting.theta, setting.phi, float(x[2]), residual, evaluations
        )


def _better(cand, incumbent) -> bool:
    """Higher K3 wins; within _TIE_EPS the smaller (dt, theta, phi) wins."""
    if cand[0] > incumbent[0] + _TIE_EPS:
        return True
    if cand[0] < incumbent[0] - _TIE_EPS:
        return False
    return cand[1:4] < incumbent[1:4]


def k3_opt(
    rho: np.ndarray,
    model: DephasingModel,
    spec: ConstraintSpec,
    config: SearchConfig = SearchConfig(),
) -> OptimizationResult:
    """Maximize K3 over (theta, phi, dt) subject to dE = delta."""
    return ConstrainedSearch(rho, model, config).k3_opt(spec)


def feasible_numeric(
    rho: np.ndarray,
    model: DephasingModel,
    spec: ConstraintSpec,
    config: SearchConfig = SearchConfig(),
) -> FeasibilityResult:
    """Search for a witness of the energy constraint dE = delta."""
    return ConstrainedSearch(rho, model, config).feasible(spec)


def verify_theorem_max_line(
    rho: np.ndarray,
    model: DephasingModel,
    delta_grid,
    config: SearchConfig = SearchConfig(),
) -> MaxLineReport:
    """Scan k3_opt over delta_grid and compare the argmax against the
    prediction delta = -tr(rho H); shifted flags a deviation beyond one
    grid step."""
    deltas = tuple(float(d) for d in delta_grid)
    if len(deltas) < 2:
        raise DomainError("delta_grid needs at least two points")
    search = ConstrainedSearch(rho, model, config)
    values = []
    for d in deltas:
        result = search.k3_opt(ConstraintSpec(d))
        values.append(result.k3_opt if result.feasible else math.nan)
    predicted = max_violation_delta(rho)
    finite = [(v, d) for v, d in zip(values, deltas) if not math.isnan(v)]
    if not finite:
        return MaxLineReport(
            argmax_delta=None,
            predicted_delta=predicted,
            deviation=math.inf,
            shifted=False,
            degenerate=True,
            deltas=deltas,
            k3_values=tuple(values),
        )
    best_value = max(v for v, _ in finite)
    argmax_delta = next(d for v, d in finite if v == best_value)
    deviation = abs(argmax_delta - predicted)
    step = max(abs(b - a) for a, b in zip(deltas, deltas[1:]))
    return MaxLineReport(
        argmax_delta=argmax_delta,
        predicted_delta=predicted,
        deviation=deviation,
        shifted=deviation > step * (1.0 + 1e-9),
        degenerate=False,
        deltas=deltas,
        k3_values=tuple(values),
    )
