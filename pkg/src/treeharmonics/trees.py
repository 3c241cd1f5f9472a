"""Finite-depth weighted rooted trees with boundary sector measures.

Every non-leaf vertex has at least two children, a positive transition row q
summing to one (defining the boundary measure: the measure of the sector below
a vertex is the product of q along the root path), and a nonzero weight row w
summing to one (defining the harmonicity law).

Two backings share one interface:

* ``ExplicitTree`` stores per-vertex rows in flat arrays and supports
  arbitrary (small) trees, including seeded-random ones.
* ``UniformTree`` stores one arity and one q/w row per level, so every vertex
  of a level is interchangeable.  Levels are never materialized, which is what
  makes deep trees (e.g. depth 60 binary) workable: offsets are plain
  integers and all bulk algorithms memoize on the level, not the vertex.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from random import Random
from typing import Iterator, Sequence

from .errors import ValidationError
from .scalars import Mode, Scalar, check_mode, format_scalar, parse_scalar

MAX_EXPLICIT_VERTICES = 4_000_000
FLOAT_ROW_TOL = 1e-9


@dataclass(frozen=True, order=True)
class VertexId:
    level: int
    offset: int


ROOT = VertexId(0, 0)


class Tree:
    """Shared interface of the two backings."""

    depth: int
    mode: Mode

    # --- structure ----------------------------------------------------
    def level_size(self, n: int) -> int:
        raise NotImplementedError

    def arity(self, x: VertexId) -> int:
        raise NotImplementedError

    def child(self, x: VertexId, i: int) -> VertexId:
        raise NotImplementedError

    def parent(self, x: VertexId) -> VertexId:
        raise NotImplementedError

    def child_index(self, x: VertexId) -> int:
        raise NotImplementedError

    def q_row(self, x: VertexId) -> tuple[Scalar, ...]:
        raise NotImplementedError

    def w_row(self, x: VertexId) -> tuple[Scalar, ...]:
        raise NotImplementedError

    def min_child(self, x: VertexId) -> tuple[int, Scalar]:
        """Index and probability of the minimum-q child, ties to the smallest offset."""
        raise NotImplementedError

    def pos_key(self, x: VertexId):
        """Memoization key: vertices sharing a key have identical rows below."""
        raise NotImplementedError

    # --- generic helpers ----------------------------------------------
    @property
    def root(self) -> VertexId:
        return ROOT

    def contains(self, x: VertexId) -> bool:
        return 0 <= x.level <= self.depth and 0 <= x.offset < self.level_size(x.level)

    def require_vertex(self, x: VertexId) -> None:
        if not self.contains(x):
            raise ValidationError(f"unknown vertex {x}")

    def is_leaf(self, x: VertexId) -> bool:
        return x.level == self.depth

    def children(self, x: VertexId) -> list[VertexId]:
        return [self.child(x, i) for i in range(self.arity(x))]

    def path_indices(self, x: VertexId) -> list[int]:
        """Child indices along the root path to x (length = x.level)."""
        out: list[int] = []
        while x.level > 0:
            out.append(self.child_index(x))
            x = self.parent(x)
        out.reverse()
        return out

    def q(self, x: VertexId, i: int) -> Scalar:
        return self.q_row(x)[i]

    def w(self, x: VertexId, i: int) -> Scalar:
        return self.w_row(x)[i]

    def vertices(self, n: int) -> Iterator[VertexId]:
        for o in range(self.level_size(n)):
            yield VertexId(n, o)

    def bfs(self, limit: int | None = None) -> Iterator[VertexId]:
        """Level-major enumeration starting at the root."""
        emitted = 0
        for n in range(self.depth + 1):
            for o in range(self.level_size(n)):
                yield VertexId(n, o)
                emitted += 1
                if limit is not None and emitted >= limit:
                    return

    def vertex_count_through(self, n: int) -> int:
        return sum(self.level_size(k) for k in range(n + 1))

    def sector_measure(self, x: VertexId) -> Scalar:
        self.require_vertex(x)
        m: Scalar = Fraction(1) if self.mode == "exact" else 1.0
        v = self.root
        for i in self.path_indices(x):
            m = m * self.q(v, i)
            v = self.child(v, i)
        return m


class UniformTree(Tree):
    """Tree whose arity and q/w rows depend only on the level."""

    def __init__(
        self,
        arities: Sequence[int],
        q_rows: Sequence[Sequence[Scalar]],
        w_rows: Sequence[Sequence[Scalar]],
        mode: Mode = "exact",
    ):
        self.mode = check_mode(mode)
        self.depth = len(arities)
        if self.depth < 1:
            raise ValidationError("tree depth must be at least 1")
        if len(q_rows) != self.depth or len(w_rows) != self.depth:
            raise ValidationError("q/w rows must cover every level above the leaves")
        self.arities = tuple(int(a) for a in arities)
        self.q_rows = tuple(tuple(row) for row in q_rows)
        self.w_rows = tuple(tuple(row) for row in w_rows)
        for lvl, (a, qr, wr) in enumerate(zip(self.arities, self.q_rows, self.w_rows)):
            if a < 2:
                raise ValidationError(f"level {lvl}: arity {a} below two")
            if len(qr) != a or len(wr) != a:
                raise ValidationError(f"level {lvl}: row length does not match arity")
            _validate_q_row(qr, self.mode, f"level {lvl}")
            _validate_w_row(wr, self.mode, f"level {lvl}")
        sizes = [1]
        for a in self.arities:
            sizes.append(sizes[-1] * a)
        self._sizes = tuple(sizes)
        self._min_child = tuple(
            min(range(len(row)), key=lambda i: row[i]) for row in self.q_rows
        )

    def level_size(self, n: int) -> int:
        if not 0 <= n <= self.depth:
            raise ValidationError(f"level {n} outside 0..{self.depth}")
        return self._sizes[n]

    def arity(self, x: VertexId) -> int:
        if x.level >= self.depth:
            raise ValidationError(f"leaf vertex {x} has no children")
        return self.arities[x.level]

    def child(self, x: VertexId, i: int) -> VertexId:
        return VertexId(x.level + 1, x.offset * self.arities[x.level] + i)

    def parent(self, x: VertexId) -> VertexId:
        if x.level == 0:
            raise ValidationError("root has no parent")
        return VertexId(x.level - 1, x.offset // self.arities[x.level - 1])

    def child_index(self, x: VertexId) -> int:
        return x.offset % self.arities[x.level - 1]

    def q_row(self, x: VertexId) -> tuple[Scalar, ...]:
        return self.q_rows[x.level]

    def w_row(self, x: VertexId) -> tuple[Scalar, ...]:
        return self.w_rows[x.level]

    def min_child(self, x: VertexId) -> tuple[int, Scalar]:
        if self.is_leaf(x):
            raise ValidationError("leaf vertex has no children")
        i = self._min_child[x.level]
        return i, self.q_rows[x.level][i]

    def pos_key(self, x: VertexId) -> int:
        return x.level

    def path_indices(self, x: VertexId) -> list[int]:
        out: list[int] = []
        o = x.offset
        for lvl in range(x.level - 1, -1, -1):
            out.append(o % self.arities[lvl])
            o //= self.arities[lvl]
        out.reverse()
        return out

    def sector_measure(self, x: VertexId) -> Scalar:
        self.require_vertex(x)
        if self.mode == "exact":
            num, den = 1, 1
            for lvl, i in enumerate(self.path_indices(x)):
                f = self.q_rows[lvl][i]
                num *= f.numerator
                den *= f.denominator
            return Fraction(num, den)
        m = 1.0
        for lvl, i in enumerate(self.path_indices(x)):
            m *= self.q_rows[lvl][i]
        return m


class ExplicitTree(Tree):
    """Tree with per-vertex rows held in flat per-level arrays.

    Exact mode keeps integer numerators per edge and one denominator per
    parent row, so measure bookkeeping stays in integer arithmetic.
    """

    def __init__(
        self,
        child_counts: list[array],
        parents: list[array],
        q_edge: list,
        q_den: list,
        w_edge: list,
        w_den: list,
        mode: Mode,
    ):
        self.mode = check_mode(mode)
        self.depth = len(child_counts)
        self._counts = child_counts          # per level 0..depth-1, per vertex
        self._parents = parents              # per level 1..depth (index l-1)
        self._q_edge = q_edge                # per level 1..depth, per child vertex
        self._q_den = q_den                  # per level 0..depth-1, per parent (exact only)
        self._w_edge = w_edge
        self._w_den = w_den
        starts: list[array] = []
        sizes = [1]
        for lvl in range(self.depth):
            st = array("q", [0] * len(child_counts[lvl]))
            acc = 0
            for o, c in enumerate(child_counts[lvl]):
                st[o] = acc
                acc += c
            starts.append(st)
            sizes.append(acc)
        self._starts = starts
        self._sizes = tuple(sizes)

    def level_size(self, n: int) -> int:
        if not 0 <= n <= self.depth:
            raise ValidationError(f"level {n} outside 0..{self.depth}")
        return self._sizes[n]

    def arity(self, x: VertexId) -> int:
        if x.level >= self.depth:
            raise ValidationError(f"leaf vertex {x} has no children")
        return self._counts[x.level][x.offset]

    def child(self, x: VertexId, i: int) -> VertexId:
        return VertexId(x.level + 1, self._starts[x.level][x.offset] + i)

    def parent(self, x: VertexId) -> VertexId:
        if x.level == 0:
            raise ValidationError("root has no parent")
        return VertexId(x.level - 1, self._parents[x.level - 1][x.offset])

    def child_index(self, x: VertexId) -> int:
        p = self.parent(x)
        return x.offset - self._starts[p.level][p.offset]

    def q_row(self, x: VertexId) -> tuple[Scalar, ...]:
        st = self._starts[x.level][x.offset]
        k = self._counts[x.level][x.offset]
        edge = self._q_edge[x.level + 1]
        if self.mode == "exact":
            den = self._q_den[x.level][x.offset]
            return tuple(Fraction(edge[st + i], den) for i in range(k))
        return tuple(edge[st + i] for i in range(k))

    def w_row(self, x: VertexId) -> tuple[Scalar, ...]:
        st = self._starts[x.level][x.offset]
        k = self._counts[x.level][x.offset]
        edge = self._w_edge[x.level + 1]
        if self.mode == "exact":
            den = self._w_den[x.level][x.offset]
            return tuple(Fraction(edge[st + i], den) for i in range(k))
        return tuple(edge[st + i] for i in range(k))

    def min_child(self, x: VertexId) -> tuple[int, Scalar]:
        if self.is_leaf(x):
            raise ValidationError("leaf vertex has no children")
        st = self._starts[x.level][x.offset]
        k = self._counts[x.level][x.offset]
        edge = self._q_edge[x.level + 1]
        i = min(range(k), key=lambda j: edge[st + j])
        return i, self.q_row(x)[i]

    def pos_key(self, x: VertexId) -> VertexId:
        return x

    def sector_measure(self, x: VertexId) -> Scalar:
        self.require_vertex(x)
        if self.mode == "exact":
            num, den = self.measure_pair(x)
            return Fraction(num, den)
        m = 1.0
        v = x
        while v.level > 0:
            m *= self._q_edge[v.level][v.offset]
            v = self.parent(v)
        return m

    def measure_pair(self, x: VertexId) -> tuple[int, int]:
        """Unreduced (numerator, denominator) of the sector measure (exact mode)."""
        num, den = 1, 1
        v = x
        while v.level > 0:
            p = self.parent(v)
            num *= self._q_edge[v.level][v.offset]
            den *= self._q_den[p.level][p.offset]
            v = p
        return num, den

    def measure_arrays(self, n: int) -> tuple[list[int], list[int]]:
        """Unreduced (numerators, denominators) for all of level n (exact mode)."""
        nums, dens = [1], [1]
        for lvl in range(n):
            counts = self._counts[lvl]
            qden = self._q_den[lvl]
            edge = self._q_edge[lvl + 1]
            nxt_n: list[int] = []
            nxt_d: list[int] = []
            ci = 0
            for o in range(len(counts)):
                pn, pd = nums[o], dens[o] * qden[o]
                for _ in range(counts[o]):
                    nxt_n.append(pn * edge[ci])
                    nxt_d.append(pd)
                    ci += 1
            nums, dens = nxt_n, nxt_d
        return nums, dens


def _validate_q_row(row: Sequence[Scalar], mode: Mode, where: str) -> None:
    if any(not q > 0 for q in row):
        raise ValidationError(f"{where}: transition probabilities must be positive")
    total = sum(row)
    if mode == "exact":
        if total != 1:
            raise ValidationError(f"{where}: q row sums to {total}, not 1")
    elif abs(total - 1.0) > FLOAT_ROW_TOL:
        raise ValidationError(f"{where}: q row sums to {total}, not 1")


def _validate_w_row(row: Sequence[Scalar], mode: Mode, where: str) -> None:
    if any(w == 0 for w in row):
        raise ValidationError(f"{where}: harmonic weights must be nonzero")
    total = sum(row)
    if mode == "exact":
        if total != 1:
            raise ValidationError(f"{where}: w row sums to {total}, not 1")
    elif abs(total - 1.0) > FLOAT_ROW_TOL:
        raise ValidationError(f"{where}: w row sums to {total}, not 1")


# ----------------------------------------------------------------------
# Specs and construction


@dataclass(frozen=True)
class TreeSpec:
    """Declarative tree description; building is deterministic given the seed.

    branching: {"kind": "uniform", "arity": k}
             | {"kind": "per_level", "arities": [...]}
             | {"kind": "explicit", "counts": [[...] per level]}
             | {"kind": "random", "max_arity": k, "min_arity": 2}
    q_rule:   {"kind": "uniform"}
             | {"kind": "per_level", "rows": [["p/q", ...] per level]}
             | {"kind": "explicit", "rows": [[["p/q", ...] per vertex] per level]}
             | {"kind": "random", "max_weight": m}
    w_rule:   same shapes as q_rule (entries may be negative, never zero).
    """

    depth: int
    branching: dict
    q_rule: dict = field(default_factory=lambda: {"kind": "uniform"})
    w_rule: dict = field(default_factory=lambda: {"kind": "uniform"})
    seed: int = 0
    mode: str = "exact"

    def to_doc(self) -> dict:
        return {
            "depth": self.depth,
            "branching": self.branching,
            "q_rule": self.q_rule,
            "w_rule": self.w_rule,
            "seed": self.seed,
            "mode": self.mode,
        }

    @staticmethod
    def from_doc(doc: dict) -> "TreeSpec":
        try:
            return TreeSpec(
                depth=int(doc["depth"]),
                branching=dict(doc["branching"]),
                q_rule=dict(doc.get("q_rule", {"kind": "uniform"})),
                w_rule=dict(doc.get("w_rule", {"kind": "uniform"})),
                seed=int(doc.get("seed", 0)),
                mode=str(doc.get("mode", "exact")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed tree spec: {exc}") from exc


def _is_level_rule(rule: dict) -> bool:
    return rule.get("kind") in ("uniform", "per_level")


def build_tree(spec: TreeSpec) -> Tree:
    """Construct a tree satisfying every invariant, or raise ValidationError."""
    mode = check_mode(spec.mode)
    if spec.depth < 1:
        raise ValidationError("tree depth must be at least 1")
    bkind = spec.branching.get("kind")
    if bkind not in ("uniform", "per_level", "explicit", "random"):
        raise ValidationError(f"unknown branching kind {bkind!r}")
    for name, rule in (("q_rule", spec.q_rule), ("w_rule", spec.w_rule)):
        if rule.get("kind") not in ("uniform", "per_level", "explicit", "random"):
            raise ValidationError(f"unknown {name} kind {rule.get('kind')!r}")

    uniform_backing = bkind in ("uniform", "per_level") and _is_level_rule(spec.q_rule) and _is_level_rule(spec.w_rule)
    if uniform_backing:
        return _build_uniform(spec, mode)
    return _build_explicit(spec, mode)


def _level_arities(spec: TreeSpec) -> list[int]:
    b = spec.branching
    if b["kind"] == "uniform":
        return [int(b["arity"])] * spec.depth
    arities = [int(a) for a in b["arities"]]
    if len(arities) != spec.depth:
        raise ValidationError("per_level branching must list one arity per level")
    return arities


def _parse_level_rows(rule: dict, arities: list[int], mode: Mode, what: str) -> list[tuple[Scalar, ...]]:
    if rule["kind"] == "uniform":
        return [tuple(Fraction(1, a) if mode == "exact" else 1.0 / a for _ in range(a)) for a in arities]
    rows = rule.get("rows")
    if rows is None or len(rows) != len(arities):
        raise ValidationError(f"per_level {what} rule must list one row per level")
    out = []
    for lvl, (row, a) in enumerate(zip(rows, arities)):
        if len(row) != a:
            raise ValidationError(f"{what} row at level {lvl} has {len(row)} entries, expected {a}")
        out.append(tuple(parse_scalar(str(s), mode) for s in row))
    return out


def _build_uniform(spec: TreeSpec, mode: Mode) -> UniformTree:
    arities = _level_arities(spec)
    q_rows = _parse_level_rows(spec.q_rule, arities, mode, "q")
    w_rows = _parse_level_rows(spec.w_rule, arities, mode, "w")
    return UniformTree(arities, q_rows, w_rows, mode)


def _random_q_ints(rng: Random, k: int, max_weight: int) -> tuple[list[int], int]:
    nums = [rng.randint(1, max_weight) for _ in range(k)]
    return nums, sum(nums)


def _random_w_ints(rng: Random, k: int, max_weight: int) -> tuple[list[int], int]:
    choices = [i for i in range(-max_weight, max_weight + 1) if i != 0]
    while True:
        nums = [rng.choice(choices) for _ in range(k)]
        s = sum(nums)
        if s == 0:
            continue
        if s < 0:
            nums = [-n for n in nums]
            s = -s
        return nums, s


def _row_to_ints(row: Sequence[Scalar], what: str, where: str) -> tuple[list[int], int]:
    fracs = [Fraction(v) for v in row]
    den = lcm(*(f.denominator for f in fracs)) if fracs else 1
    nums = [int(f * den) for f in fracs]
    if what == "q" and any(n <= 0 for n in nums):
        raise ValidationError(f"{where}: transition probabilities must be positive")
    if what == "w" and any(n == 0 for n in nums):
        raise ValidationError(f"{where}: harmonic weights must be nonzero")
    if sum(nums) != den:
        raise ValidationError(f"{where}: {what} row sums to {Fraction(sum(nums), den)}, not 1")
    return nums, den


def _build_explicit(spec: TreeSpec, mode: Mode) -> ExplicitTree:
    rng = Random(spec.seed)
    b = spec.branching

    # child counts per level
    counts: list[list[int]] = []
    size = 1
    total = 1
    for lvl in range(spec.depth):
        if b["kind"] == "uniform":
            row = [int(b["arity"])] * size
        elif b["kind"] == "per_level":
            row = [int(b["arities"][lvl])] * size
        elif b["kind"] == "explicit":
            table = b.get("counts")
            if table is None or len(table) != spec.depth or len(table[lvl]) != size:
                raise ValidationError("explicit branching table incomplete")
            row = [int(c) for c in table[lvl]]
        else:
            lo = int(b.get("min_arity", 2))
            hi = int(b["max_arity"])
            row = [rng.randint(lo, hi) for _ in range(size)]
        if any(c < 2 for c in row):
            raise ValidationError(f"level {lvl}: arity below two")
        counts.append(row)
        size = sum(row)
        total += size
        if total > MAX_EXPLICIT_VERTICES:
            raise ValidationError(
                f"tree exceeds {MAX_EXPLICIT_VERTICES} vertices; "
                "use level-uniform rules for deep trees"
            )

    def gather(rule: dict, what: str):
        edge: list = [None]  # level 0 has no incoming edges
        dens: list = []
        for lvl in range(spec.depth):
            row_counts = counts[lvl]
            e = array("q") if mode == "exact" else array("d")
            d = array("q")
            for o, k in enumerate(row_counts):
                where = f"level {lvl} vertex {o}"
                if rule["kind"] == "uniform":
                    nums, den = [1] * k, k
                elif rule["kind"] == "per_level":
                    rows = rule.get("rows")
                    if rows is None or len(rows) != spec.depth or len(rows[lvl]) != k:
                        raise ValidationError(f"{where}: per_level {what} row missing or wrong length")
                    nums, den = _row_to_ints([parse_scalar(str(s)) for s in rows[lvl]], what, where)
                elif rule["kind"] == "explicit":
                    table = rule.get("rows")
                    if table is None or len(table) != spec.depth or len(table[lvl]) != len(row_counts):
                        raise ValidationError(f"explicit {what} table incomplete")
                    raw = table[lvl][o]
                    if len(raw) != k:
                        raise ValidationError(f"{where}: {what} row has {len(raw)} entries, expected {k}")
                    nums, den = _row_to_ints([parse_scalar(str(s)) for s in raw], what, where)
                else:
                    mw = int(rule.get("max_weight", 30 if what == "q" else 9))
                    nums, den = (_random_q_ints if what == "q" else _random_w_ints)(rng, k, mw)
                if mode == "exact":
                    e.extend(nums)
                    d.append(den)
                else:
                    e.extend(n / den for n in nums)
                    d.append(1)
            edge.append(e)
            dens.append(d)
        return edge, dens

    q_edge, q_den = gather(spec.q_rule, "q")
    w_edge, w_den = gather(spec.w_rule, "w")

    count_arrays = [array("q", row) for row in counts]
    parents: list[array] = []
    for lvl in range(spec.depth):
        p = array("q")
        for o, k in enumerate(counts[lvl]):
            p.extend([o] * k)
        parents.append(p)

    tree = ExplicitTree(count_arrays, parents, q_edge, q_den, w_edge, w_den, mode)
    if mode == "float":
        for lvl in range(tree.depth):
            for o in range(tree.level_size(lvl)):
                x = VertexId(lvl, o)
                _validate_q_row(tree.q_row(x), mode, f"level {lvl} vertex {o}")
                _validate_w_row(tree.w_row(x), mode, f"level {lvl} vertex {o}")
    return tree


# ----------------------------------------------------------------------
# Measure operations


def sector_measure(tree: Tree, x: VertexId) -> Scalar:
    """Boundary measure of the sector below x: product of q along the root path."""
    return tree.sector_measure(x)


def level_measures(tree: Tree, n: int, max_size: int = 1 << 20) -> list[Scalar]:
    """Sector measures of every vertex at level n; sums to 1 exactly in exact mode."""
    if not 0 <= n <= tree.depth:
        raise ValidationError(f"level {n} outside 0..{tree.depth}")
    if tree.level_size(n) > max_size:
        raise ValidationError(f"level {n} has {tree.level_size(n)} vertices; too large to materialize")
    if isinstance(tree, ExplicitTree) and tree.mode == "exact":
        nums, dens = tree.measure_arrays(n)
        return [Fraction(a, b) for a, b in zip(nums, dens)]
    return [tree.sector_measure(x) for x in tree.vertices(n)]


def min_child_probability(tree: Tree, x: VertexId) -> tuple[VertexId, Scalar]:
    """The absorbing child: minimum q, ties to the smallest offset; value <= 1/2."""
    tree.require_vertex(x)
    if tree.is_leaf(x):
        raise ValidationError(f"vertex {x} is a leaf")
    i, prob = tree.min_child(x)
    return tree.child(x, i), prob


# ----------------------------------------------------------------------
# Serialization


def tree_to_doc(tree: Tree) -> dict:
    if isinstance(tree, UniformTree):
        return {
            "schema": "tree/1",
            "kind": "uniform",
            "mode": tree.mode,
            "depth": tree.depth,
            "arities": list(tree.arities),
            "q_rows": [[format_scalar(v) for v in row] for row in tree.q_rows],
            "w_rows": [[format_scalar(v) for v in row] for row in tree.w_rows],
        }
    assert isinstance(tree, ExplicitTree)
    counts = [[tree.arity(VertexId(l, o)) for o in range(tree.level_size(l))] for l in range(tree.depth)]
    q_rows = [
        [[format_scalar(v) for v in tree.q_row(VertexId(l, o))] for o in range(tree.level_size(l))]
        for l in range(tree.depth)
    ]
    w_rows = [
        [[format_scalar(v) for v in tree.w_row(VertexId(l, o))] for o in range(tree.level_size(l))]
        for l in range(tree.depth)
    ]
    return {
        "schema": "tree/1",
        "kind": "explicit",
        "mode": tree.mode,
        "depth": tree.depth,
        "child_counts": counts,
        "q_rows": q_rows,
        "w_rows": w_rows,
    }


def tree_from_doc(doc: dict) -> Tree:
    if doc.get("schema") != "tree/1":
        raise ValidationError(f"unsupported tree schema {doc.get('schema')!r}")
    mode = doc.get("mode", "exact")
    depth = int(doc["depth"])
    if doc.get("kind") == "uniform":
        spec = TreeSpec(
            depth=depth,
            branching={"kind": "per_level", "arities": doc["arities"]},
            q_rule={"kind": "per_level", "rows": doc["q_rows"]},
            w_rule={"kind": "per_level", "rows": doc["w_rows"]},
            mode=mode,
        )
    else:
        spec = TreeSpec(
            depth=depth,
            branching={"kind": "explicit", "counts": doc["child_counts"]},
            q_rule={"kind": "explicit", "rows": doc["q_rows"]},
            w_rule={"kind": "explicit", "rows": doc["w_rows"]},
            mode=mode,
        )
    return build_tree(spec)
