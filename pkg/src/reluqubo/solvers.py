"""Minimum-energy search: exact exhaustive enumeration and simulated annealing.

Exhaustive search is the desk-scale ground truth (capped at 30 free bits
by default, RELUQUBO_BIT_CAP overrides).  Simulated annealing is a
single-bit-flip Metropolis walk with a geometric inverse-temperature
schedule and independently seeded restarts; it is fully reproducible
given (model, config).
"""

from __future__ import annotations

import math
import os
import random
import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .algebra import QuboModel, energy

DEFAULT_BIT_CAP = 30
_CHUNK_BITS = 18
_CACHE_BITS = 17


class BitCapExceeded(RuntimeError):
    """Exhaustive search refused: too many free bits."""


@dataclass(frozen=True)
class AnnealConfig:
    sweeps: int = 1000
    beta_initial: float = 0.1
    beta_final: float = 10.0
    restarts: int = 8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if not (0 < self.beta_initial <= self.beta_final):
            raise ValueError("need 0 < beta_initial <= beta_final")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")

    def schedule(self) -> list[float]:
        """Geometric beta ladder from beta_initial to beta_final."""
        if self.sweeps == 1:
            return [self.beta_final]
        ratio = (self.beta_final / self.beta_initial) ** (1.0 / (self.sweeps - 1))
        return [self.beta_initial * ratio ** s for s in range(self.sweeps)]


@dataclass
class SolveResult:
    assignment: tuple[int, ...]
    energy: float
    restart_energies: list[float]
    solver: str
    wall_time_s: float
    best_trace: list[list[float]] | None = field(default=None, repr=False)

    def assignment_str(self) -> str:
        return "".join(str(b) for b in self.assignment)

    def to_json_dict(self) -> dict:
        """Stable serialization; wall time is excluded so identical runs
        produce identical bytes."""
        return {
            "solver": self.solver,
            "n_vars": len(self.assignment),
            "energy": self.energy,
            "assignment": self.assignment_str(),
            "restart_energies": list(self.restart_energies),
        }


def _default_bit_cap() -> int:
    raw = os.environ.get("RELUQUBO_BIT_CAP")
    if raw is None:
        return DEFAULT_BIT_CAP
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"RELUQUBO_BIT_CAP must be an integer, got {raw!r}") from None


def fix_bits(model: QuboModel, fixed: Mapping[int, int]) -> tuple[QuboModel, list[int]]:
    """Substitute fixed bits into the model.

    Returns the reduced model over the remaining variables (original
    order preserved) and the list mapping reduced index -> original
    index.
    """
    for i, b in fixed.items():
        if not 0 <= i < model.n_vars:
            raise ValueError(f"fixed index {i} out of range [0, {model.n_vars})")
        if b not in (0, 1):
            raise ValueError(f"fixed value for {i} must be 0 or 1, got {b!r}")
    free = [i for i in range(model.n_vars) if i not in fixed]
    pos = {orig: k for k, orig in enumerate(free)}

    offset = model.offset
    linear: dict[int, float] = {}
    for i, c in model.linear.items():
        if i in fixed:
            if fixed[i]:
                offset += c
        else:
            linear[pos[i]] = linear.get(pos[i], 0.0) + c
    quadratic: dict[tuple[int, int], float] = {}
    for (i, j), c in model.quadratic.items():
        fi, fj = i in fixed, j in fixed
        if fi and fj:
            if fixed[i] and fixed[j]:
                offset += c
        elif fi:
            if fixed[i]:
                linear[pos[j]] = linear.get(pos[j], 0.0) + c
        elif fj:
            if fixed[j]:
                linear[pos[i]] = linear.get(pos[i], 0.0) + c
        else:
            quadratic[(pos[i], pos[j])] = c
    labels = [model.labels[i] for i in free]
    return QuboModel(len(free), linear, quadratic, offset, labels=labels), free


def _dense_upper(model: QuboModel) -> np.ndarray:
    """Upper-triangular coefficient matrix with the linear part on the
    diagonal (valid because b*b = b)."""
    n = model.n_vars
    Q = np.zeros((n, n))
    for i, c in model.linear.items():
        Q[i, i] = c
    for (i, j), c in model.quadratic.items():
        Q[i, j] = c
    return Q


_bit_matrix_cache: dict[int, np.ndarray] = {}


def _bit_matrix(n: int, start: int, stop: int) -> np.ndarray:
    """Rows k = start..stop-1 of the full 2^n assignment table (LSB = var 0)."""
    if n <= _CACHE_BITS and start == 0 and stop == (1 << n):
        cached = _bit_matrix_cache.get(n)
        if cached is None:
            ks = np.arange(1 << n, dtype=np.int64)
            cached = ((ks[:, None] >> np.arange(n)) & 1).astype(np.float64)
            _bit_matrix_cache.clear()
            _bit_matrix_cache[n] = cached
        return cached
    ks = np.arange(start, stop, dtype=np.int64)
    return ((ks[:, None] >> np.arange(n)) & 1).astype(np.float64)


def exhaustive_solve(model: QuboModel,
                     fixed: Mapping[int, int] | None = None,
                     bit_cap: int | None = None) -> SolveResult:
    """Global minimum by enumeration of every free-bit assignment.

    Deterministic: exact energy ties go to the lowest assignment integer
    (LSB = variable 0).  Raises BitCapExceeded when the free-bit count
    exceeds the cap (default 30, env RELUQUBO_BIT_CAP).
    """
    t0 = time.perf_counter()
    cap = _default_bit_cap() if bit_cap is None else bit_cap
    if fixed:
        sub, free = fix_bits(model, fixed)
    else:
        sub, free = model, list(range(model.n_vars))
    nf = sub.n_vars
    if nf > cap:
        raise BitCapExceeded(f"{nf} free bits exceeds the exhaustive cap of {cap}")

    if nf == 0:
        best_k = 0
        best_e = sub.offset
    else:
        Q = _dense_upper(sub)
        total = 1 << nf
        chunk = 1 << min(nf, _CHUNK_BITS)
        best_k = -1
        best_e = math.inf
        for start in range(0, total, chunk):
            stop = min(start + chunk, total)
            B = _bit_matrix(nf, start, stop)
            E = np.einsum("ij,ij->i", B @ Q, B)
            local = int(np.argmin(E))
            if E[local] < best_e:
                best_e = float(E[local])
                best_k = start + local
        best_e += sub.offset

    bits = dict(fixed) if fixed else {}
    for k, orig in enumerate(free):
        bits[orig] = (best_k >> k) & 1
    assignment = tuple(bits[i] for i in range(model.n_vars))
    exact = energy(model, assignment)
    return SolveResult(assignment, exact, [], "exhaustive",
                       time.perf_counter() - t0)


def energy_delta(model: QuboModel, assignment: Sequence[int], i: int) -> float:
    """Energy change from flipping bit i of the assignment."""
    if not 0 <= i < model.n_vars:
        raise ValueError(f"index {i} out of range [0, {model.n_vars})")
    local = model.linear.get(i, 0.0)
    for (a, b), c in model.quadratic.items():
        if a == i:
            if assignment[b]:
                local += c
        elif b == i:
            if assignment[a]:
                local += c
    return local if not assignment[i] else -local


def _assignment_int(bits: Sequence[int]) -> int:
    k = 0
    for i, b in enumerate(bits):
        k |= int(b) << i
    return k


def simulated_anneal(model: QuboModel,
                     config: AnnealConfig,
                     record_best_trace: bool = False) -> SolveResult:
    """Best assignment found by Metropolis single-bit-flip annealing.

    Each restart r runs an independent walk seeded with seed + r; within
    a sweep, variables are proposed in index order at the sweep's beta.
    Restarts share nothing and merge by (energy, assignment integer), so
    the result is order-independent.  The reported energy is re-evaluated
    from scratch, so it equals energy(model, assignment) exactly.  With
    record_best_trace, the per-sweep best-so-far of every restart is
    attached to the result.
    """
    t0 = time.perf_counter()
    n = model.n_vars
    if n == 0:
        return SolveResult((), model.offset, [model.offset] * config.restarts,
                           "sa", time.perf_counter() - t0)

    lin = [0.0] * n
    for i, c in model.linear.items():
        lin[i] = c
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (i, j), c in model.quadratic.items():
        adj[i].append((j, c))
        adj[j].append((i, c))
    betas = config.schedule()
    exp = math.exp

    restart_best: list[tuple[float, tuple[int, ...]]] = []
    trace: list[list[float]] | None = [] if record_best_trace else None
    for r in range(config.restarts):
        rng = random.Random(config.seed + r)
        rnd = rng.random
        b = [rng.randrange(2) for _ in range(n)]
        f = [lin[i] + sum(c for j, c in adj[i] if b[j]) for i in range(n)]
        e = energy(model, b)
        best_e, best_b = e, list(b)
        sweep_best: list[float] = []
        for beta in betas:
            for i in range(n):
                de = -f[i] if b[i] else f[i]
                if de > 0.0:
                    bde = beta * de
                    # acceptance below ~1e-18: reject without drawing
                    if bde > 40.0 or rnd() >= exp(-bde):
                        continue
                s = -1 if b[i] else 1
                b[i] ^= 1
                e += de
                for j, c in adj[i]:
                    f[j] += s * c
                if e < best_e:
                    best_e = e
                    best_b = list(b)
            if trace is not None:
                sweep_best.append(best_e)
        if trace is not None:
            trace.append(sweep_best)
        exact = energy(model, best_b)
        restart_best.append((exact, tuple(best_b)))

    restart_energies = [e for e, _ in restart_best]
    best_e, best_b = min(restart_best, key=lambda p: (p[0], _assignment_int(p[1])))
    return SolveResult(best_b, best_e, restart_energies, "sa",
                       time.perf_counter() - t0, best_trace=trace)
