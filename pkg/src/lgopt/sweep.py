"""Parameter sweeps over (state family, energy cost, noise rate) and their
CSV/JSON serialization.

A sweep evaluates the constrained optimum for every cell of a
(family_value, delta, gamma) grid.  Cells outside the accessible region
are flagged infeasible and exported with empty optimum columns, never 0.
Cell ordering is deterministic: family outer, delta middle, gamma inner.
Groups sharing (family_value, gamma) reuse one search-table build and may
be evaluated concurrently; output assembly is order-restored so files do
not depend on scheduling.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import DephasingModel
from .optimize import ConstrainedSearch, ConstraintSpec, SearchConfig
from .qubit import DomainError, mixed_state, pure_state

FAMILIES = ("pure_alpha", "bloch_mx", "bloch_mz", "bloch_general")
MODEL_KINDS = ("none", "z", "x", "diag45")

CSV_HEADER = (
    "family,family_value,delta_over_J,gamma,model,k3_opt,feasible,"
    "theta_star,phi_star,dt_star,residual"
)


@dataclass(frozen=True)
class GridRange:
    """Inclusive linear range with a point count."""

    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise DomainError(f"grid count must be >= 1, got {self.count}")
        if self.count > 1 and not self.stop > self.start:
            raise DomainError(f"grid range must be ordered, got [{self.start}, {self.stop}]")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep: a one-parameter state family, an energy-cost grid,
    and a list of dephasing rates for one model kind."""

    family: str
    family_grid: GridRange
    delta_grid: GridRange
    gamma_list: tuple[float, ...]
    model_kind: str
    tolerance: float = 1e-4
    search: SearchConfig = field(default_factory=SearchConfig)
    general_axis: tuple[float, float, float] | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; use one of {FAMILIES}")
        if self.model_kind not in MODEL_KINDS:
            raise DomainError(f"unknown model {self.model_kind!r}; use one of {MODEL_KINDS}")
        if not self.gamma_list:
            raise DomainError("gamma_list must be non-empty")
        object.__setattr__(self, "gamma_list", tuple(float(g) for g in self.gamma_list))
        if any(g < 0.0 for g in self.gamma_list):
            raise DomainError("gamma values must be >= 0")
        if self.model_kind == "none" and any(g != 0.0 for g in self.gamma_list):
            raise DomainError("model 'none' admits only gamma = 0")
        if self.family == "bloch_general":
            if self.general_axis is None:
                raise DomainError("family 'bloch_general' requires general_axis components")
            a = np.asarray(self.general_axis, dtype=float)
            norm = float(np.linalg.norm(a))
            if norm < 1e-12:
                raise DomainError("general_axis must be nonzero")
            object.__setattr__(self, "general_axis", tuple(float(x) for x in a / norm))
        elif self.general_axis is not None:
            raise DomainError("general_axis is only meaningful for family 'bloch_general'")
        lo, hi = self.family_grid.start, self.family_grid.stop
        if self.family == "pure_alpha":
            if lo < 0.0 or hi > 1.0:
                raise DomainError("pure_alpha values must lie in [0, 1]")
        elif lo < -1.0 or hi > 1.0:
            raise DomainError(f"{self.family} values must lie in [-1, 1]")
        if not self.tolerance > 0.0:
            raise DomainError("tolerance must be > 0")

    def state_for(self, value: float) -> np.ndarray:
        if self.family == "pure_alpha":
            return pure_state(value)
        if self.family == "bloch_mx":
            return mixed_state((value, 0.0, 0.0))
        if self.family == "bloch_mz":
            return mixed_state((0.0, 0.0, value))
        ax = self.general_axis
        return mixed_state((value * ax[0], value * ax[1], value * ax[2]))

    def model_for(self, gamma: float) -> DephasingModel:
        if self.model_kind == "none" or gamma == 0.0:
            return DephasingModel.none()
        if self.model_kind == "z":
            return DephasingModel.z_basis(gamma)
        if self.model_kind == "x":
            return DephasingModel.x_basis(gamma)
        return DephasingModel.diag45(gamma)


@dataclass(frozen=True)
class SweepCell:
    """One (family_value, delta, gamma) evaluation; infeasible cells have
    k3_opt and the starred parameters absent."""

    family: str
    family_value: float
    delta_over_j: float
    gamma: float
    model: str
    k3_opt: float | None
    feasible: bool
    theta_star: float | None
    phi_star: float | None
    dt_star: float | None
    residual: float


def _run_group(args) -> list[SweepCell]:
    """All delta cells for one (family_value, gamma), sharing grid tables."""
    spec, value, gamma = args
    search = ConstrainedSearch(spec.state_for(value), spec.model_for(gamma), spec.search)
    cells = []
    for delta in spec.delta_grid.values():
        result = search.k3_opt(ConstraintSpec(float(delta), spec.tolerance))
        cells.append(
            SweepCell(
                family=spec.family,
                family_value=float(value),
                delta_over_j=float(delta),
                gamma=float(gamma),
                model=spec.model_kind,
                k3_opt=result.k3_opt,
                feasible=result.feasible,
                theta_star=result.theta_star,
                phi_star=result.phi_star,
                dt_star=result.dt_star,
                residual=result.constraint_residual,
            )
        )
    return cells


def default_jobs() -> int:
    env = os.environ.get("LG_JOBS")
    if env:
        try:
            jobs = int(env)
        except ValueError as exc:
            raise DomainError(f"LG_JOBS must be an integer, got {env!r}") from exc
        if jobs < 1:
            raise DomainError(f"LG_JOBS must be >= 1, got {jobs}")
        return jobs
    return os.cpu_count() or 1


def run_sweep(spec: SweepSpec, jobs: int | None = None) -> list[SweepCell]:
    """Evaluate every sweep cell; deterministic output ordering regardless
    of worker scheduling."""
    if jobs is None:
        jobs = default_jobs()
    if jobs < 1:
        raise DomainError(f"jobs must be >= 1, got {jobs}")
    values = spec.family_grid.values()
    tasks = [(spec, float(v), float(g)) for v in values for g in spec.gamma_list]
    if jobs == 1 or len(tasks) == 1:
        groups = [_run_group(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            groups = list(pool.map(_run_group, tasks, chunksize=1))

    by_key = {
        (task[1], task[2]): group for task, group in zip(tasks, groups)
    }
    n_gamma = len(spec.gamma_list)
    ordered: list[SweepCell] = []
    for v in values:
        per_gamma = [by_key[(float(v), float(g))] for g in spec.gamma_list]
        for i_delta in range(spec.delta_grid.count):
            for i_gamma in range(n_gamma):
                ordered.append(per_gamma[i_gamma][i_delta])
    return ordered


def _fmt(x: float | None) -> str:
    if x is None:
        return ""
    return f"{x:.12g}"


def _meta_line(spec_or_none, n_cells: int) -> str:
    if spec_or_none is None:
        return f"# lgopt sweep export: {n_cells} cells"
    s = spec_or_none
    return (
        f"# lgopt sweep: family={s.family} model={s.model_kind} "
        f"resolution={s.family_grid.count}x{s.delta_grid.count} "
        f"gammas={','.join(f'{g:.12g}' for g in s.gamma_list)} "
        f"tolerance={s.tolerance:.12g} cells={n_cells}"
    )


def _cell_row(c: SweepCell) -> str:
    return ",".join(
        [
            c.family,
            _fmt(c.family_value),
            _fmt(c.delta_over_j),
            _fmt(c.gamma),
            c.model,
            _fmt(c.k3_opt),
            "true" if c.feasible else "false",
            _fmt(c.theta_star),
            _fmt(c.phi_star),
            _fmt(c.dt_star),
            _fmt(c.residual),
        ]
    )


def export_csv(cells, path, spec: SweepSpec | None = None) -> None:
    """UTF-8, LF line endings, 12-significant-digit floats; the grid
    resolution is declared in a leading comment line."""
    cells = list(cells)
    lines = [_meta_line(spec, len(cells)), CSV_HEADER]
    lines.extend(_cell_row(c) for c in cells)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def read_csv(path) -> list[SweepCell]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.rstrip("\n") for ln in fh]
    except OSError as exc:
        raise OSError(f"cannot read CSV from {path}: {exc}") from exc
    rows = [ln for ln in lines if ln and not ln.startswith("#")]
    if not rows or rows[0] != CSV_HEADER:
        raise DomainError(f"{path}: missing or unexpected CSV header")
    cells = []
    for row in rows[1:]:
        parts = row.split(",")
        if len(parts) != 11:
            raise DomainError(f"{path}: expected 11 fields, got {len(parts)}: {row!r}")
        cells.append(
            SweepCell(
                family=parts[0],
                family_value=float(parts[1]),
                delta_over_j=float(parts[2]),
                gamma=float(parts[3]),
                model=parts[4],
                k3_opt=float(parts[5]) if parts[5] else None,
                feasible=parts[6] == "true",
                theta_star=float(parts[7]) if parts[7] else None,
                phi_star=float(parts[8]) if parts[8] else None,
                dt_star=float(parts[9]) if parts[9] else None,
                residual=float(parts[10]),
            )
        )
    return cells


def _cell_obj(c: SweepCell) -> dict:
    def num(x):
        return None if x is None else float(f"{x:.12g}")

    return {
        "family": c.family,
        "family_value": num(c.family_value),
        "delta_over_J": num(c.delta_over_j),
        "gamma": num(c.gamma),
        "model": c.model,
        "k3_opt": num(c.k3_opt),
        "feasible": c.feasible,
        "theta_star": num(c.theta_star),
        "phi_star": num(c.phi_star),
        "dt_star": num(c.dt_star),
        "residual": num(c.residual),
    }


def export_json(cells, path) -> None:
    """Array of objects mirroring the CSV schema; absent values are null."""
    payload = [_cell_obj(c) for c in cells]
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write JSON to {path}: {exc}") from exc


def read_json(path) -> list[SweepCell]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read JSON from {path}: {exc}") from exc
    cells = []
    for obj in payload:
        cells.append(
            SweepCell(
                family=obj["family"],
                family_value=float(obj["family_value"]),
                delta_over_j=float(obj["delta_over_J"]),
                gamma=float(obj["gamma"]),
                model=obj["model"],
                k3_opt=None if obj["k3_opt"] is None else float(obj["k3_opt"]),
                feasible=bool(obj["feasible"]),
                theta_star=None if obj["theta_star"] is None else float(obj["theta_star"]),
                phi_star=None if obj["phi_star"] is None else float(obj["phi_star"]),
                dt_star=None if obj["dt_star"] is None else float(obj["dt_star"]),
                residual=float(obj["residual"]),
            )
        )
    return cells
