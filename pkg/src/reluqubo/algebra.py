"""Symbolic algebra over binary variables and QUBO/Ising model containers.

Affine and quadratic expressions keep their coefficients in sparse maps
keyed by bit variables.  Pair terms can only be created by multiplying two
affine expressions, and a bit squared folds back into a linear term
(b*b = b on {0, 1}), so everything stays two-body by construction.

All values here are treated as immutable once built: every operation
returns a new expression or model, so instances can be shared freely
across threads without locking.

Sign conventions
----------------
QUBO energy:   E(b) = offset + sum_i q_i b_i + sum_{i<j} q_ij b_i b_j
Ising energy:  H(s) = offset - sum_{i<j} J_ij s_i s_j - sum_i h_i s_i

with s_i = 2 b_i - 1 in {-1, +1}.  The Ising form carries the leading
minus signs; couplings are stored once per unordered pair (i < j).  No
hardware vendor convention is implied by this choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence


class QuboParseError(ValueError):
    """Raised when a qubo-v1 text model cannot be parsed."""


@dataclass(frozen=True, order=True)
class BitVar:
    """A single binary variable, identified by a dense integer id."""

    id: int
    label: str

    def __repr__(self) -> str:
        return f"BitVar({self.id}, {self.label!r})"


def _clean(terms: Mapping[BitVar, float]) -> dict[BitVar, float]:
    return {v: float(c) for v, c in terms.items() if c != 0.0}


@dataclass
class AffineExpr:
    """Degree <= 1 polynomial over bit variables: constant + sum coeff*b."""

    terms: dict[BitVar, float] = field(default_factory=dict)
    constant: float = 0.0

    def __post_init__(self) -> None:
        self.terms = _clean(self.terms)
        self.constant = float(self.constant)

    @classmethod
    def from_bit(cls, v: BitVar, coeff: float = 1.0) -> "AffineExpr":
        return cls({v: coeff})

    @classmethod
    def from_constant(cls, c: float) -> "AffineExpr":
        return cls({}, c)

    def variables(self) -> set[BitVar]:
        return set(self.terms)

    def evaluate(self, values: Mapping[BitVar, int]) -> float:
        """Value at a {0, 1} assignment given as a map BitVar -> bit."""
        total = self.constant
        for v, c in self.terms.items():
            if values[v]:
                total += c
        return total

    def scaled(self, scale: float) -> "AffineExpr":
        if scale == 0.0:
            return AffineExpr({}, 0.0)
        return AffineExpr({v: c * scale for v, c in self.terms.items()},
                          self.constant * scale)

    def __add__(self, other: "AffineExpr | float") -> "AffineExpr":
        if isinstance(other, (int, float)):
            other = AffineExpr.from_constant(float(other))
        return affine_add(self, other)

    __radd__ = __add__

    def __neg__(self) -> "AffineExpr":
        return self.scaled(-1.0)

    def __sub__(self, other: "AffineExpr | float") -> "AffineExpr":
        if isinstance(other, (int, float)):
            other = AffineExpr.from_constant(float(other))
        return affine_add(self, other.scaled(-1.0))

    def __rsub__(self, other: float) -> "AffineExpr":
        return affine_add(AffineExpr.from_constant(float(other)), self.scaled(-1.0))

    def __mul__(self, other: "AffineExpr | float"):
        if isinstance(other, (int, float)):
            return self.scaled(float(other))
        return affine_mul(self, other)

    def __rmul__(self, other: float) -> "AffineExpr":
        return self.scaled(float(other))


def affine_add(a: AffineExpr, b: AffineExpr) -> AffineExpr:
    """Sum of two affine expressions; coefficients merge by variable."""
    terms = dict(a.terms)
    for v, c in b.terms.items():
        terms[v] = terms.get(v, 0.0) + c
    return AffineExpr(terms, a.constant + b.constant)


def _pair_key(u: BitVar, v: BitVar) -> tuple[BitVar, BitVar]:
    return (u, v) if u.id < v.id else (v, u)


@dataclass
class QuadraticExpr:
    """Degree <= 2 polynomial over bit variables.

    Pair keys are normalized so the lower-id variable comes first; squares
    are folded into the linear part, so no key ever pairs a variable with
    itself.
    """

    pairs: dict[tuple[BitVar, BitVar], float] = field(default_factory=dict)
    linear: dict[BitVar, float] = field(default_factory=dict)
    constant: float = 0.0

    def __post_init__(self) -> None:
        norm: dict[tuple[BitVar, BitVar], float] = {}
        lin = dict(self.linear)
        for (u, v), c in self.pairs.items():
            if c == 0.0:
                continue
            if u.id == v.id:
                lin[u] = lin.get(u, 0.0) + c
                continue
            k = _pair_key(u, v)
            norm[k] = norm.get(k, 0.0) + float(c)
        self.pairs = {k: c for k, c in norm.items() if c != 0.0}
        self.linear = _clean(lin)
        self.constant = float(self.constant)

    @classmethod
    def zero(cls) -> "QuadraticExpr":
        return cls()

    def variables(self) -> set[BitVar]:
        out = set(self.linear)
        for u, v in self.pairs:
            out.add(u)
            out.add(v)
        return out

    def evaluate(self, values: Mapping[BitVar, int]) -> float:
        total = self.constant
        for v, c in self.linear.items():
            if values[v]:
                total += c
        for (u, v), c in self.pairs.items():
            if values[u] and values[v]:
                total += c
        return total

    def __add__(self, other: "QuadraticExpr | AffineExpr | float") -> "QuadraticExpr":
        other = _as_quadratic(other)
        return quad_scale_add(self, other, 1.0)

    __radd__ = __add__

    def __sub__(self, other: "QuadraticExpr | AffineExpr | float") -> "QuadraticExpr":
        return quad_scale_add(self, _as_quadratic(other), -1.0)

    def __mul__(self, scale: float) -> "QuadraticExpr":
        return quad_scale_add(QuadraticExpr(), self, float(scale))

    __rmul__ = __mul__


def _as_quadratic(x: "QuadraticExpr | AffineExpr | float") -> QuadraticExpr:
    if isinstance(x, QuadraticExpr):
        return x
    if isinstance(x, AffineExpr):
        return QuadraticExpr({}, dict(x.terms), x.constant)
    return QuadraticExpr({}, {}, float(x))


def affine_mul(a: AffineExpr, b: AffineExpr) -> QuadraticExpr:
    """Product of two affine expressions as a quadratic expression.

    b_i * b_i collapses to b_i, so the result stays degree <= 2 with
    normalized pair keys.
    """
    pairs: dict[tuple[BitVar, BitVar], float] = {}
    linear: dict[BitVar, float] = {}
    for u, cu in a.terms.items():
        for v, cv in b.terms.items():
            c = cu * cv
            if u.id == v.id:
                linear[u] = linear.get(u, 0.0) + c
            else:
                k = _pair_key(u, v)
                pairs[k] = pairs.get(k, 0.0) + c
    if b.constant != 0.0:
        for u, cu in a.terms.items():
            linear[u] = linear.get(u, 0.0) + cu * b.constant
    if a.constant != 0.0:
        for v, cv in b.terms.items():
            linear[v] = linear.get(v, 0.0) + a.constant * cv
    return QuadraticExpr(pairs, linear, a.constant * b.constant)


def quad_scale_add(dst: QuadraticExpr, src: QuadraticExpr, scale: float) -> QuadraticExpr:
    """dst + scale * src as a new quadratic expression."""
    if scale == 0.0:
        return QuadraticExpr(dict(dst.pairs), dict(dst.linear), dst.constant)
    pairs = dict(dst.pairs)
    for k, c in src.pairs.items():
        pairs[k] = pairs.get(k, 0.0) + scale * c
    linear = dict(dst.linear)
    for v, c in src.linear.items():
        linear[v] = linear.get(v, 0.0) + scale * c
    return QuadraticExpr(pairs, linear, dst.constant + scale * src.constant)


def _check_finite(value: float, what: str) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{what} must be finite, got {value!r}")


@dataclass
class QuboModel:
    """Sparse QUBO over variables 0..n_vars-1.

    linear maps a variable index to its coefficient; quadratic maps an
    (i, j) pair with i < j to its coupling.  Zero coefficients are pruned
    at construction, so two models with identical energies on every
    assignment compare equal.
    """

    n_vars: int
    linear: dict[int, float] = field(default_factory=dict)
    quadratic: dict[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0
    labels: list[str] | None = None

    def __post_init__(self) -> None:
        n = self.n_vars
        if n < 0:
            raise ValueError("n_vars must be >= 0")
        lin: dict[int, float] = {}
        for i, c in self.linear.items():
            if not 0 <= i < n:
                raise ValueError(f"linear index {i} out of range [0, {n})")
            _check_finite(c, f"linear coefficient for {i}")
            if c != 0.0:
                lin[int(i)] = float(c)
        quad: dict[tuple[int, int], float] = {}
        for (i, j), c in self.quadratic.items():
            if not (0 <= i < j < n):
                raise ValueError(f"quadratic key ({i}, {j}) must satisfy 0 <= i < j < n")
            _check_finite(c, f"coupling for ({i}, {j})")
            if c != 0.0:
                quad[(int(i), int(j))] = float(c)
        _check_finite(self.offset, "offset")
        # canonical key order makes energy sums reproducible across models
        # that merely inserted their terms differently
        self.linear = dict(sorted(lin.items()))
        self.quadratic = dict(sorted(quad.items()))
        self.offset = float(self.offset)
        if self.labels is None:
            self.labels = [f"b{i}" for i in range(n)]
        else:
            self.labels = [str(s) for s in self.labels]
        if len(self.labels) != n:
            raise ValueError(f"expected {n} labels, got {len(self.labels)}")
        if len(set(self.labels)) != n:
            raise ValueError("labels must be unique")

    def energy(self, assignment: Sequence[int]) -> float:
        return energy(self, assignment)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no variable labeled {label!r}") from None


def energy(model: QuboModel, assignment: Sequence[int]) -> float:
    """QUBO energy of a {0, 1} assignment, offset included."""
    if len(assignment) != model.n_vars:
        raise ValueError(
            f"assignment length {len(assignment)} != n_vars {model.n_vars}")
    for b in assignment:
        if b not in (0, 1):
            raise ValueError(f"assignment entries must be 0 or 1, got {b!r}")
    total = model.offset
    for i, c in model.linear.items():
        if assignment[i]:
            total += c
    for (i, j), c in model.quadratic.items():
        if assignment[i] and assignment[j]:
            total += c
    return total


def quadratic_to_model(expr: QuadraticExpr,
                       variables: Sequence[BitVar] | None = None) -> QuboModel:
    """Materialize a quadratic expression as a QuboModel.

    variables fixes the model's index order and may include bits the
    expression never touches; ids must be dense 0..n-1.  When omitted,
    the expression's own variables are used.
    """
    if variables is None:
        variables = sorted(expr.variables(), key=lambda v: v.id)
    variables = list(variables)
    n = len(variables)
    ids = [v.id for v in variables]
    if ids != list(range(n)):
        raise ValueError("variable ids must be dense 0..n-1 in id order")
    missing = expr.variables().difference(variables)
    if missing:
        raise ValueError(f"expression uses bits outside the variable list: {sorted(missing)}")
    linear = {v.id: c for v, c in expr.linear.items()}
    quadratic = {(u.id, v.id): c for (u, v), c in expr.pairs.items()}
    return QuboModel(n, linear, quadratic, expr.constant,
                     labels=[v.label for v in variables])


@dataclass
class IsingModel:
    """Spin model with couplings J (stored once per pair, i < j) and fields h."""

    n_spins: int
    J: dict[tuple[int, int], float] = field(default_factory=dict)
    h: dict[int, float] = field(default_factory=dict)
    offset: float = 0.0
    labels: list[str] | None = None

    def __post_init__(self) -> None:
        n = self.n_spins
        if n < 0:
            raise ValueError("n_spins must be >= 0")
        J: dict[tuple[int, int], float] = {}
        for (i, j), c in self.J.items():
            if not (0 <= i < j < n):
                raise ValueError(f"J key ({i}, {j}) must satisfy 0 <= i < j < n")
            _check_finite(c, f"J[{i},{j}]")
            if c != 0.0:
                J[(int(i), int(j))] = float(c)
        h: dict[int, float] = {}
        for i, c in self.h.items():
            if not 0 <= i < n:
                raise ValueError(f"h index {i} out of range [0, {n})")
            _check_finite(c, f"h[{i}]")
            if c != 0.0:
                h[int(i)] = float(c)
        self.J = dict(sorted(J.items()))
        self.h = dict(sorted(h.items()))
        self.offset = float(self.offset)
        if self.labels is None:
            self.labels = [f"b{i}" for i in range(n)]
        if len(self.labels) != n or len(set(self.labels)) != n:
            raise ValueError("labels must be unique and cover all spins")

    def energy(self, spins: Sequence[int]) -> float:
        """H(s) = offset - sum J_ij s_i s_j - sum h_i s_i for s in {-1, +1}."""
        if len(spins) != self.n_spins:
            raise ValueError(
                f"spin vector length {len(spins)} != n_spins {self.n_spins}")
        for s in spins:
            if s not in (-1, 1):
                raise ValueError(f"spins must be -1 or +1, got {s!r}")
        total = self.offset
        for (i, j), c in self.J.items():
            total -= c * spins[i] * spins[j]
        for i, c in self.h.items():
            total -= c * spins[i]
        return total


def ising_from_qubo(model: QuboModel) -> IsingModel:
    """Equivalent spin model under b_i = (s_i + 1) / 2.

    Energies agree at every corresponding assignment up to float
    round-off.
    """
    n = model.n_vars
    J: dict[tuple[int, int], float] = {}
    h = {i: 0.0 for i in range(n)}
    offset = model.offset
    for i, q in model.linear.items():
        h[i] -= q / 2.0
        offset += q / 2.0
    for (i, j), q in model.quadratic.items():
        J[(i, j)] = -q / 4.0
        h[i] -= q / 4.0
        h[j] -= q / 4.0
        offset += q / 4.0
    return IsingModel(n, J, h, offset, labels=list(model.labels))


def qubo_from_ising(model: IsingModel) -> QuboModel:
    """Inverse of ising_from_qubo (s_i = 2 b_i - 1)."""
    n = model.n_spins
    linear = {i: 0.0 for i in range(n)}
    quadratic: dict[tuple[int, int], float] = {}
    offset = model.offset
    for i, c in model.h.items():
        linear[i] -= 2.0 * c
        offset += c
    for (i, j), c in model.J.items():
        quadratic[(i, j)] = -4.0 * c
        linear[i] += 2.0 * c
        linear[j] += 2.0 * c
        offset -= c
    return QuboModel(n, linear, quadratic, offset, labels=list(model.labels))


# --- qubo-v1 text format ---------------------------------------------------
#
# line 1: qubo-v1
# line 2: vars <n>
# line 3: offset <float>
# then:   <i> <j> <float>   one per stored coefficient, sorted by (i, j);
#         i == j is a linear term, i < j a coupling
# then:   label <i> <string>   one per variable
# '#' starts a comment line; floats use shortest round-trip decimals.

FORMAT_MAGIC = "qubo-v1"


def export_qubo(model: QuboModel) -> str:
    """Serialize to the qubo-v1 text format (deterministic byte-for-byte)."""
    lines = [FORMAT_MAGIC, f"vars {model.n_vars}", f"offset {model.offset!r}"]
    entries: list[tuple[int, int, float]] = []
    entries.extend((i, i, c) for i, c in model.linear.items())
    entries.extend((i, j, c) for (i, j), c in model.quadratic.items())
    entries.sort(key=lambda e: (e[0], e[1]))
    lines.extend(f"{i} {j} {c!r}" for i, j, c in entries)
    lines.extend(f"label {i} {s}" for i, s in enumerate(model.labels))
    return "\n".join(lines) + "\n"


def _parse_float(token: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise QuboParseError(f"line {lineno}: bad float {token!r}") from None
    if not math.isfinite(value):
        raise QuboParseError(f"line {lineno}: non-finite value {token!r}")
    return value


def parse_qubo(text: str) -> QuboModel:
    """Parse the qubo-v1 text format; inverse of export_qubo."""
    rows: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rows.append((lineno, line))
    if len(rows) < 3:
        raise QuboParseError("truncated file: expected qubo-v1 header")

    (ln0, magic), (ln1, vars_line), (ln2, offset_line) = rows[0], rows[1], rows[2]
    if magic != FORMAT_MAGIC:
        raise QuboParseError(f"line {ln0}: expected {FORMAT_MAGIC!r} header, got {magic!r}")
    parts = vars_line.split()
    if len(parts) != 2 or parts[0] != "vars" or not parts[1].isdigit():
        raise QuboParseError(f"line {ln1}: expected 'vars <n>', got {vars_line!r}")
    n = int(parts[1])
    parts = offset_line.split()
    if len(parts) != 2 or parts[0] != "offset":
        raise QuboParseError(f"line {ln2}: expected 'offset <float>', got {offset_line!r}")
    offset = _parse_float(parts[1], ln2)

    linear: dict[int, float] = {}
    quadratic: dict[tuple[int, int], float] = {}
    labels: dict[int, str] = {}
    for lineno, line in rows[3:]:
        parts = line.split()
        if parts[0] == "label":
            if len(parts) < 3:
                raise QuboParseError(f"line {lineno}: expected 'label <i> <string>'")
            if not parts[1].isdigit():
                raise QuboParseError(f"line {lineno}: bad label index {parts[1]!r}")
            i = int(parts[1])
            if not 0 <= i < n:
                raise QuboParseError(f"line {lineno}: label index {i} out of range")
            if i in labels:
                raise QuboParseError(f"line {lineno}: duplicate label for variable {i}")
            labels[i] = line.split(None, 2)[2]
            continue
        if len(parts) != 3:
            raise QuboParseError(f"line {lineno}: expected '<i> <j> <float>', got {line!r}")
        if not (parts[0].isdigit() and parts[1].isdigit()):
            raise QuboParseError(f"line {lineno}: bad indices in {line!r}")
        i, j = int(parts[0]), int(parts[1])
        if not (0 <= i < n and 0 <= j < n):
            raise QuboParseError(f"line {lineno}: index out of range in {line!r}")
        if i > j:
            raise QuboParseError(f"line {lineno}: i > j in {line!r}")
        value = _parse_float(parts[2], lineno)
        if i == j:
            if i in linear:
                raise QuboParseError(f"line {lineno}: duplicate linear term for {i}")
            linear[i] = value
        else:
            if (i, j) in quadratic:
                raise QuboParseError(f"line {lineno}: duplicate coupling ({i}, {j})")
            quadratic[(i, j)] = value

    label_list: list[str] | None = None
    if labels:
        if len(labels) != n:
            missing = sorted(set(range(n)) - set(labels))
            raise QuboParseError(f"label table incomplete: missing {missing}")
        label_list = [labels[i] for i in range(n)]
    try:
        return QuboModel(n, linear, quadratic, offset, labels=label_list)
    except ValueError as exc:
        raise QuboParseError(str(exc)) from None


def all_assignments(n: int) -> Iterable[tuple[int, ...]]:
    """All {0,1}^n assignments in integer order (LSB = variable 0)."""
    for k in range(1 << n):
        yield tuple((k >> i) & 1 for i in range(n))
