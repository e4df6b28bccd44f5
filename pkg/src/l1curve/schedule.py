"""Construction of the curve model: omega sequences, the generation schedule
and the binary tree of normalized difference shapes.

Every consecutive difference ``F_{i/2^n} - F_{(i-1)/2^n}`` equals ``2^-n * g_w``
where ``g_w`` is a unit-mass density indexed by a word ``w`` over ``{L, R}``:
one letter per direction-change generation passed on the way down to the
interval. Midpoint generations halve a difference without changing its shape,
so the tree has ``2^R`` leaves regardless of how large the generations get.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .exact import (
    ONE,
    X,
    Polynomial,
    as_fraction,
    format_rational,
    integral_01,
    parse_rational,
    poly_antiderivative,
    poly_derivative,
    sup_bound_disc,
    sup_bound_unit,
)

OMEGA_KINDS = ("constant", "geometric", "factorial-reciprocal", "explicit-table")

DEFAULT_MAX_DEGREE = 1 << 10
DEFAULT_MAX_COEFF_BITS = 1 << 16


class ResourceLimitError(RuntimeError):
    """A shape outgrew the configured degree or coefficient-size cap."""


class ModelFormatError(ValueError):
    """A model document is malformed or internally inconsistent."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class OmegaSpec:
    """A positive sequence ``omega_1, omega_2, ...`` from one of four families.

    ``explicit-table`` params are ``omega_1 .. omega_k``; the last entry repeats
    for every ``m > k``.
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in OMEGA_KINDS:
            raise ValueError(f"unknown omega kind {self.kind!r}")
        params = tuple(as_fraction(p) for p in self.params)
        object.__setattr__(self, "params", params)
        expected = {"constant": 1, "geometric": 1, "factorial-reciprocal": 0}
        if self.kind in expected and len(params) != expected[self.kind]:
            raise ValueError(f"omega kind {self.kind!r} takes {expected[self.kind]} parameter(s)")
        if self.kind == "explicit-table" and not params:
            raise ValueError("explicit-table needs at least one entry")
        if any(p <= 0 for p in params):
            raise ValueError("omega parameters must be positive")

    def __call__(self, m: int) -> Fraction:
        if m < 1:
            raise ValueError("omega is indexed from m = 1")
        if self.kind == "constant":
            return self.params[0]
        if self.kind == "geometric":
            return self.params[0] ** m
        if self.kind == "factorial-reciprocal":
            return Fraction(1, math.factorial(m))
        table = self.params
        return table[m - 1] if m <= len(table) else table[-1]

    @classmethod
    def parse(cls, text: str) -> "OmegaSpec":
        """Parse presets such as ``constant:1``, ``geometric:1/2``,
        ``factorial-reciprocal`` or ``explicit-table:1,1/2,1/4``."""
        kind, _, rest = text.partition(":")
        params = tuple(parse_rational(p) for p in rest.split(",")) if rest else ()
        return cls(kind.strip(), params)

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": [format_rational(p) for p in self.params]}


@dataclass(frozen=True)
class ScheduleEntry:
    r: int
    k: int
    n: int


@dataclass
class ShapeNode:
    word: str
    g: Polynomial
    U: Polynomial
    children: tuple | None = field(default=None, compare=False, repr=False)

    @property
    def depth(self) -> int:
        return len(self.word)


def make_node(word: str, g: Polynomial) -> ShapeNode:
    return ShapeNode(word, g, poly_antiderivative(g))


def split_density(node: ShapeNode) -> tuple[ShapeNode, ShapeNode]:
    """Split a unit-mass density at its own cumulative.

    The left child (smaller parameter values) is ``2 (1 - U) g`` and the right
    child ``2 U g``; both again have unit mass.
    """
    if node.children is not None:
        raise ValueError(f"shape {node.word!r} is already split")
    left = make_node(node.word + "L", 2 * (ONE - node.U) * node.g)
    right = make_node(node.word + "R", 2 * node.U * node.g)
    node.children = (left, right)
    return left, right


def split_parts(node: ShapeNode, mass: Fraction) -> tuple[Polynomial, Polynomial]:
    """The two halves ``U G`` and ``(1 - U) G`` of ``G = mass * g``."""
    G = mass * node.g
    return node.U * G, (ONE - node.U) * G


def _part_requirement(part: Polynomial, r: int, omega: OmegaSpec) -> Fraction:
    # Smallest value of 2^(k-r) that the part tolerates.
    need = sup_bound_disc(part, r)
    for m in range(1, part.degree + 1):
        need = max(need, sup_bound_unit(poly_derivative(part, m)) / omega(m))
    return need


def _ceil_log2(value: Fraction) -> int:
    """Smallest integer ``e`` with ``2**e >= value`` (``value > 0``)."""
    e = value.numerator.bit_length() - value.denominator.bit_length()
    while Fraction(2) ** e < value:
        e += 1
    while Fraction(2) ** (e - 1) >= value:
        e -= 1
    return e


def choose_k(r: int, nodes, prev_mass, omega: OmegaSpec) -> int:
    """Smallest ``k >= 1`` for which every split part ``P`` of every node obeys
    ``|P^(m)| <= 2^(k-r) omega_m`` on [0, 1] and ``|P| <= 2^(k-r)`` on the disc
    of radius ``r``, both certified by coefficient sums."""
    if r < 1:
        raise ValueError("level index r must be >= 1")
    prev_mass = as_fraction(prev_mass)
    need = Fraction(0)
    for node in nodes:
        for part in split_parts(node, prev_mass):
            need = max(need, _part_requirement(part, r, omega))
    if need == 0:
        return 1
    return max(1, _ceil_log2(need) + r)


@dataclass
class CurveModel:
    omega: OmegaSpec
    schedule: tuple
    shapes: dict
    levels: int

    @property
    def root(self) -> ShapeNode:
        return self.shapes[""]

    def entry(self, r: int) -> ScheduleEntry:
        if not 1 <= r <= len(self.schedule):
            raise ValueError(f"level r={r} outside built range 1..{len(self.schedule)}")
        return self.schedule[r - 1]

    def n(self, r: int) -> int:
        """Direction-change generation ``n_r``; ``n_0 = 0``."""
        return 0 if r == 0 else self.entry(r).n

    def k(self, r: int) -> int:
        return self.entry(r).k

    @property
    def change_generations(self) -> tuple:
        return tuple(e.n for e in self.schedule)

    @property
    def max_generation(self) -> int:
        return self.schedule[-1].n

    def shape(self, word: str) -> ShapeNode:
        try:
            return self.shapes[word]
        except KeyError:
            raise KeyError(f"no shape with word {word!r}") from None

    def nodes_at_depth(self, depth: int) -> list:
        return [node for word, node in self.shapes.items() if len(word) == depth]

    def iter_nodes(self) -> Iterator[ShapeNode]:
        return iter(self.shapes.values())

    def with_schedule(self, schedule) -> "CurveModel":
        """Same shapes under a different schedule (used for negative controls)."""
        return CurveModel(self.omega, tuple(schedule), self.shapes, self.levels)


def _check_caps(node: ShapeNode, max_degree: int, max_coeff_bits: int) -> None:
    if node.U.degree > max_degree:
        raise ResourceLimitError(
            f"shape {node.word!r} has degree {node.U.degree} > cap {max_degree}")
    for c in node.U.coeffs:
        bits = max(c.numerator.bit_length(), c.denominator.bit_length())
        if bits > max_coeff_bits:
            raise ResourceLimitError(
                f"shape {node.word!r} has a {bits}-bit coefficient > cap {max_coeff_bits}")


def build_model(omega: OmegaSpec, levels: int, *, max_degree: int = DEFAULT_MAX_DEGREE,
                max_coeff_bits: int = DEFAULT_MAX_COEFF_BITS) -> CurveModel:
    """Build the schedule and shape tree for ``levels`` direction-change generations."""
    if levels < 1:
        raise ValueError("levels must be >= 1")
    root = make_node("", ONE)
    shapes = {"": root}
    frontier = [root]
    schedule = []
    n_prev = 0
    for r in range(1, levels + 1):
        k = choose_k(r, frontier, Fraction(1, 2 ** n_prev), omega)
        n_prev = n_prev + k + 1
        schedule.append(ScheduleEntry(r, k, n_prev))
        nxt = []
        for node in frontier:
            for child in split_density(node):
                _check_caps(child, max_degree, max_coeff_bits)
                shapes[child.word] = child
                nxt.append(child)
        frontier = nxt
    return CurveModel(omega, tuple(schedule), shapes, levels)


def shape_max_coeff_bits(node: ShapeNode) -> int:
    return max((max(c.numerator.bit_length(), c.denominator.bit_length())
                for c in node.g.coeffs), default=0)


# -- documents ---------------------------------------------------------------

def model_to_document(model: CurveModel) -> dict:
    shapes = sorted(model.shapes.values(), key=lambda s: (len(s.word), s.word))
    return {
        "omega": model.omega.to_json(),
        "levels": model.levels,
        "schedule": [{"r": e.r, "k": e.k, "n": e.n} for e in model.schedule],
        "shapes": [{"word": s.word, "g": s.g.to_json(), "U": s.U.to_json()} for s in shapes],
    }


def serialize_model(model: CurveModel) -> str:
    return json.dumps(model_to_document(model), indent=1) + "\n"


def _poly_at(items, path: str) -> Polynomial:
    if not isinstance(items, list):
        raise ModelFormatError(path, "expected an array of 'p/q' strings")
    coeffs = []
    for j, item in enumerate(items):
        if not isinstance(item, str):
            raise ModelFormatError(f"{path}[{j}]", "expected a 'p/q' string")
        try:
            coeffs.append(parse_rational(item))
        except ValueError as exc:
            raise ModelFormatError(f"{path}[{j}]", str(exc)) from None
    return Polynomial(coeffs)


def _int_at(doc: dict, key: str, path: str) -> int:
    value = doc.get(key)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ModelFormatError(f"{path}.{key}", "expected an integer")
    return value


def model_from_document(doc) -> CurveModel:
    """Rebuild a model from its JSON document.

    Structure is validated (types, rationals, schedule arithmetic, a complete
    shape tree matching the schedule). Mathematical properties of the shapes
    are left to the verification checks so corrupted models can be loaded.
    """
    if not isinstance(doc, dict):
        raise ModelFormatError("$", "expected an object")
    for key in ("omega", "levels", "schedule", "shapes"):
        if key not in doc:
            raise ModelFormatError(f"$.{key}", "missing")
    om = doc["omega"]
    if not isinstance(om, dict) or not isinstance(om.get("kind"), str):
        raise ModelFormatError("$.omega", "expected {kind, params}")
    raw = om.get("params", [])
    if not isinstance(raw, list):
        raise ModelFormatError("$.omega.params", "expected an array")
    params = []
    for j, item in enumerate(raw):
        if not isinstance(item, str):
            raise ModelFormatError(f"$.omega.params[{j}]", "expected a 'p/q' string")
        try:
            params.append(parse_rational(item))
        except ValueError as exc:
            raise ModelFormatError(f"$.omega.params[{j}]", str(exc)) from None
    try:
        omega = OmegaSpec(om["kind"], tuple(params))
    except ValueError as exc:
        raise ModelFormatError("$.omega", str(exc)) from None

    levels = _int_at(doc, "levels", "$")
    if levels < 1:
        raise ModelFormatError("$.levels", "must be >= 1")

    if not isinstance(doc["schedule"], list):
        raise ModelFormatError("$.schedule", "expected an array")
    by_r = {}
    for j, item in enumerate(doc["schedule"]):
        path = f"$.schedule[{j}]"
        if not isinstance(item, dict):
            raise ModelFormatError(path, "expected an object")
        r, k, n = (_int_at(item, key, path) for key in ("r", "k", "n"))
        if r in by_r:
            raise ModelFormatError(f"{path}.r", f"duplicate level {r}")
        by_r[r] = ScheduleEntry(r, k, n)
    schedule = []
    n_prev = 0
    for r in range(1, levels + 1):
        if r not in by_r:
            raise ModelFormatError("$.schedule", f"missing entry for r={r}")
        e = by_r[r]
        if e.k < 1:
            raise ModelFormatError(f"$.schedule[r={r}].k", "must be >= 1")
        if e.n != n_prev + e.k + 1:
            raise ModelFormatError(f"$.schedule[r={r}].n",
                                   f"expected n = {n_prev} + k + 1 = {n_prev + e.k + 1}")
        n_prev = e.n
        schedule.append(e)
    extra = sorted(set(by_r) - set(range(1, levels + 1)))
    if extra:
        raise ModelFormatError("$.schedule", f"entries beyond levels: r={extra}")

    if not isinstance(doc["shapes"], list):
        raise ModelFormatError("$.shapes", "expected an array")
    shapes = {}
    for j, item in enumerate(doc["shapes"]):
        path = f"$.shapes[{j}]"
        if not isinstance(item, dict) or not isinstance(item.get("word"), str):
            raise ModelFormatError(path, "expected {word, g, U}")
        word = item["word"]
        if set(word) - {"L", "R"}:
            raise ModelFormatError(f"{path}.word", f"invalid word {word!r}")
        if len(word) > levels:
            raise ModelFormatError(f"{path}.word",
                                   f"depth {len(word)} shape but schedule has no entry r={len(word)}")
        if word in shapes:
            raise ModelFormatError(f"{path}.word", f"duplicate word {word!r}")
        for key in ("g", "U"):
            if key not in item:
                raise ModelFormatError(f"{path}.{key}", "missing")
        shapes[word] = ShapeNode(word, _poly_at(item["g"], f"{path}.g"),
                                 _poly_at(item["U"], f"{path}.U"))
    for depth in range(levels + 1):
        for bits in range(2 ** depth):
            word = format(bits, f"0{depth}b").replace("0", "L").replace("1", "R") if depth else ""
            if word not in shapes:
                raise ModelFormatError("$.shapes", f"missing shape {word!r}")
    for word, node in shapes.items():
        if len(word) < levels:
            node.children = (shapes[word + "L"], shapes[word + "R"])
    ordered = dict(sorted(shapes.items(), key=lambda kv: (len(kv[0]), kv[0])))
    return CurveModel(omega, tuple(schedule), ordered, levels)


def deserialize_model(text: str) -> CurveModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError("$", f"invalid JSON: {exc}") from None
    return model_from_document(doc)
