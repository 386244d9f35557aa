"""Discrete game universe: grids, path spaces, filtrations, strategies.

Everything is exact: probabilities, payoffs and stopping masses are
`fractions.Fraction` end to end.  All types are immutable after
construction and all operations are pure functions of their inputs.

Conventions
-----------
* A stopping CDF is right-continuous on the grid: the mass ``delta[k]``
  means "stop at t_k", stopping at t_0 = 0 is allowed.
* Left limits are rendered by the previous grid index:
  ``xi_{k-} := xi_{k-1}`` and 0 for k = 0.
* Every strategy puts total mass 1 on {0, ..., K}; index K is the forced
  terminal stop.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import OwnerMismatchError, StructureError

__all__ = [
    "frac",
    "TimeGrid",
    "PathSpace",
    "FiltrationTree",
    "ProcessTable",
    "GameInstance",
    "BehavioralStrategy",
    "PureStoppingTime",
    "MixedStrategy",
    "CheckResult",
    "ValidationReport",
    "validate_instance",
    "behavioral_from_mixed",
    "mixed_from_behavioral",
    "stopping_index",
    "pure_as_behavioral",
    "make_behavioral",
    "stop_at_horizon",
    "check_strategy",
    "check_pure",
    "mix_behavioral",
    "restrict_to_paths",
]


def frac(x) -> Fraction:
    """Coerce ints, strings like ``"3/14"`` and Fractions to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise StructureError(f"refusing inexact float {x!r}; pass a Fraction or 'num/den' string")
    return Fraction(x)


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing rational times t_0 < ... < t_K with t_0 = 0."""

    times: tuple[Fraction, ...]

    def __init__(self, times: Iterable):
        ts = tuple(frac(t) for t in times)
        if len(ts) < 2:
            raise StructureError("time grid needs at least 2 points")
        if ts[0] != 0:
            raise StructureError("time grid must start at 0")
        if any(a >= b for a, b in zip(ts, ts[1:])):
            raise StructureError("time grid must be strictly increasing")
        object.__setattr__(self, "times", ts)

    @property
    def K(self) -> int:
        return len(self.times) - 1

    @property
    def horizon(self) -> Fraction:
        return self.times[-1]

    @property
    def min_step(self) -> Fraction:
        return min(b - a for a, b in zip(self.times, self.times[1:]))


@dataclass(frozen=True)
class PathSpace:
    """Finite list of atoms omega with positive rational probabilities.

    ``labels`` carries opaque, JSON-compatible per-path annotations
    (scenario indices, chain states, horizon slots ...) so that instance
    builders can share one core model.
    """

    probs: tuple[Fraction, ...]
    labels: tuple = ()

    def __init__(self, probs: Iterable, labels: Sequence | None = None):
        ps = tuple(frac(p) for p in probs)
        if not ps:
            raise StructureError("path space must contain at least one path")
        if any(p <= 0 for p in ps):
            raise StructureError("zero/negative probability paths must be removed at construction")
        if labels is None:
            labels = tuple({} for _ in ps)
        else:
            labels = tuple(labels)
            if len(labels) != len(ps):
                raise StructureError("labels length must match path count")
        object.__setattr__(self, "probs", ps)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return len(self.probs)

    def total_mass(self) -> Fraction:
        return sum(self.probs, Fraction(0))


class FiltrationTree:
    """Per-time partitions of the path set ("information atoms").

    Atoms at every time index are canonicalised: each cell is a sorted
    tuple of path indices and cells are ordered by their smallest element.
    Refinement over time is a *checkable* property (see
    :func:`validate_instance`), not a construction-time requirement, so
    that defective inputs can be reported rather than rejected.
    """

    __slots__ = ("partitions", "n_paths", "_atom_index")

    def __init__(self, partitions: Sequence[Sequence[Iterable[int]]]):
        if not partitions:
            raise StructureError("filtration needs at least one time index")
        canon = []
        n_paths = None
        for k, cells in enumerate(partitions):
            cs = [tuple(sorted(set(int(i) for i in cell))) for cell in cells]
            if any(not c for c in cs):
                raise StructureError(f"empty information atom at time index {k}")
            seen: set[int] = set()
            for c in cs:
                if seen.intersection(c):
                    raise StructureError(f"overlapping atoms at time index {k}")
                seen.update(c)
            if n_paths is None:
                n_paths = max(seen) + 1
            if seen != set(range(n_paths)):
                raise StructureError(f"atoms at time index {k} do not partition the path set")
            cs.sort(key=lambda c: c[0])
            canon.append(tuple(cs))
        self.partitions = tuple(canon)
        self.n_paths = n_paths
        index = []
        for cells in self.partitions:
            row = [0] * n_paths
            for a, cell in enumerate(cells):
                for w in cell:
                    row[w] = a
            index.append(tuple(row))
        self._atom_index = tuple(index)

    @property
    def depth(self) -> int:
        return len(self.partitions)

    def atoms(self, k: int) -> tuple[tuple[int, ...], ...]:
        return self.partitions[k]

    def atom_index(self, k: int, path: int) -> int:
        return self._atom_index[k][path]

    def atom_of(self, k: int, path: int) -> tuple[int, ...]:
        return self.partitions[k][self._atom_index[k][path]]

    def refines_over_time(self) -> bool:
        """True when the partition at k+1 refines the partition at k."""
        for k in range(self.depth - 1):
            nxt = self._atom_index[k + 1]
            cur = self._atom_index[k]
            parent_of: dict[int, int] = {}
            for w in range(self.n_paths):
                a = nxt[w]
                if a in parent_of:
                    if parent_of[a] != cur[w]:
                        return False
                else:
                    parent_of[a] = cur[w]
        return True

    def coarsens(self, finer: "FiltrationTree") -> bool:
        """True when every atom of ``finer`` is contained in one atom of self, per time."""
        if finer.depth != self.depth or finer.n_paths != self.n_paths:
            return False
        for k in range(self.depth):
            mine = self._atom_index[k]
            for cell in finer.partitions[k]:
                if len({mine[w] for w in cell}) > 1:
                    return False
        return True

    def __eq__(self, other):
        return isinstance(other, FiltrationTree) and self.partitions == other.partitions

    def __hash__(self):
        return hash(self.partitions)

    @staticmethod
    def trivial(n_paths: int, depth: int) -> "FiltrationTree":
        return FiltrationTree([[range(n_paths)]] * depth)

    @staticmethod
    def discrete(n_paths: int, depth: int) -> "FiltrationTree":
        return FiltrationTree([[(w,) for w in range(n_paths)]] * depth)


class ProcessTable:
    """Rational values per (path, time index); payoff units."""

    __slots__ = ("values",)

    def __init__(self, values: Sequence[Sequence]):
        rows = tuple(tuple(frac(v) for v in row) for row in values)
        if not rows:
            raise StructureError("process table must have at least one path row")
        width = len(rows[0])
        if width == 0 or any(len(r) != width for r in rows):
            raise StructureError("ragged process table")
        self.values = rows

    @property
    def n_paths(self) -> int:
        return len(self.values)

    @property
    def depth(self) -> int:
        return len(self.values[0])

    def at(self, path: int, k: int) -> Fraction:
        return self.values[path][k]

    def is_adapted_to(self, tree: FiltrationTree) -> bool:
        """Constant on each information atom at each time index."""
        if tree.n_paths != self.n_paths or tree.depth != self.depth:
            return False
        for k in range(self.depth):
            for cell in tree.partitions[k]:
                v0 = self.values[cell[0]][k]
                if any(self.values[w][k] != v0 for w in cell[1:]):
                    return False
        return True

    def negated(self) -> "ProcessTable":
        return ProcessTable([[-v for v in row] for row in self.values])

    def __eq__(self, other):
        return isinstance(other, ProcessTable) and self.values == other.values


class GameInstance:
    """A complete stopping game: grid, paths, filtrations and payoff tables.

    ``f`` is paid when the minimiser stops first, ``g`` when the maximiser
    stops first and ``h`` on simultaneous stopping.  ``initial_partition``
    (optional) is commonly-known time-0 information used for conditional
    games; it must be coarser than both players' time-0 partitions.
    """

    __slots__ = ("grid", "space", "master", "player1", "player2", "f", "g", "h",
                 "initial_partition")

    def __init__(self, grid: TimeGrid, space: PathSpace, master: FiltrationTree,
                 player1: FiltrationTree, player2: FiltrationTree,
                 f: ProcessTable, g: ProcessTable, h: ProcessTable,
                 initial_partition: Sequence[Iterable[int]] | None = None):
        depth = grid.K + 1
        n = space.n
        for name, tree in (("master", master), ("player1", player1), ("player2", player2)):
            if tree.depth != depth:
                raise StructureError(f"{name} filtration depth {tree.depth} != grid length {depth}")
            if tree.n_paths != n:
                raise StructureError(f"{name} filtration path count {tree.n_paths} != {n}")
        for name, tab in (("f", f), ("g", g), ("h", h)):
            if tab.n_paths != n or tab.depth != depth:
                raise StructureError(f"payoff table {name} has shape {tab.n_paths}x{tab.depth}, "
                                     f"expected {n}x{depth}")
        if initial_partition is not None:
            cells = [tuple(sorted(set(int(i) for i in cell))) for cell in initial_partition]
            if any(not c for c in cells):
                raise StructureError("empty atom in initial partition")
            seen: set[int] = set()
            for c in cells:
                if seen.intersection(c):
                    raise StructureError("overlapping atoms in initial partition")
                seen.update(c)
            if seen != set(range(n)):
                raise StructureError("initial partition does not cover the path set")
            cells.sort(key=lambda c: c[0])
            initial_partition = tuple(cells)
        self.grid = grid
        self.space = space
        self.master = master
        self.player1 = player1
        self.player2 = player2
        self.f = f
        self.g = g
        self.h = h
        self.initial_partition = initial_partition

    @property
    def K(self) -> int:
        return self.grid.K

    @property
    def n_paths(self) -> int:
        return self.space.n

    def filtration(self, owner: int) -> FiltrationTree:
        if owner == 1:
            return self.player1
        if owner == 2:
            return self.player2
        raise OwnerMismatchError(f"unknown player id {owner!r}")

    def negated(self) -> "GameInstance":
        """The sign-flipped game (roles of minimiser/maximiser swap)."""
        return GameInstance(self.grid, self.space, self.master, self.player1, self.player2,
                            self.f.negated(), self.g.negated(), self.h.negated(),
                            self.initial_partition)


# ---------------------------------------------------------------------------
# strategies


@dataclass(frozen=True)
class BehavioralStrategy:
    """Adapted stopping CDF given by increments per (time index, owner atom).

    ``increments[k][a]`` is the mass the owner puts on "stop at t_k" on atom
    ``a`` of her partition at time k.  Validity (nonnegativity, total mass 1
    along every path) is checked by :func:`check_strategy`.
    """

    owner: int
    increments: tuple[tuple[Fraction, ...], ...]

    def delta(self, instance: GameInstance, k: int, path: int) -> Fraction:
        tree = instance.filtration(self.owner)
        return self.increments[k][tree.atom_index(k, path)]

    def deltas_on_path(self, instance: GameInstance, path: int) -> list[Fraction]:
        tree = instance.filtration(self.owner)
        return [self.increments[k][tree.atom_index(k, path)] for k in range(len(self.increments))]

    def cdf_on_path(self, instance: GameInstance, path: int) -> list[Fraction]:
        out, acc = [], Fraction(0)
        for d in self.deltas_on_path(instance, path):
            acc += d
            out.append(acc)
        return out


@dataclass(frozen=True)
class PureStoppingTime:
    """A stop/continue rule, stored by its induced map path -> stopping index.

    Decisions depend only on the owner's atoms; adaptedness of the stored
    map is checked by :func:`check_pure`.  Index K is forced terminal.
    """

    owner: int
    indices: tuple[int, ...]

    def index_on_path(self, path: int) -> int:
        return self.indices[path]


@dataclass(frozen=True)
class MixedStrategy:
    """Finite distribution over pure stopping times of one owner."""

    support: tuple[tuple[PureStoppingTime, Fraction], ...]

    def __init__(self, support: Iterable[tuple[PureStoppingTime, Fraction]]):
        sup = tuple((t, frac(w)) for t, w in support)
        if not sup:
            raise StructureError("mixed strategy needs nonempty support")
        owners = {t.owner for t, _ in sup}
        if len(owners) != 1:
            raise StructureError("all support elements must share the same owner")
        if any(w <= 0 for _, w in sup):
            raise StructureError("mixture weights must be positive")
        if sum(w for _, w in sup) != 1:
            raise StructureError("mixture weights must sum to 1 exactly")
        object.__setattr__(self, "support", sup)

    @property
    def owner(self) -> int:
        return self.support[0][0].owner


def check_strategy(instance: GameInstance, strat: BehavioralStrategy) -> None:
    """Raise StructureError when ``strat`` is not a valid CDF process for its owner."""
    tree = instance.filtration(strat.owner)
    if len(strat.increments) != tree.depth:
        raise OwnerMismatchError("strategy depth does not match the grid")
    for k, row in enumerate(strat.increments):
        if len(row) != len(tree.partitions[k]):
            raise OwnerMismatchError(f"strategy has {len(row)} atoms at time {k}, "
                                     f"owner partition has {len(tree.partitions[k])}")
        if any(d < 0 for d in row):
            raise StructureError(f"negative stopping mass at time index {k}")
    for w in range(instance.n_paths):
        total = sum(strat.deltas_on_path(instance, w), Fraction(0))
        if total != 1:
            raise StructureError(f"stopping masses along path {w} sum to {total}, expected 1")


def check_pure(instance: GameInstance, tau: PureStoppingTime) -> None:
    """Raise StructureError when ``tau`` is out of range or not adapted."""
    K = instance.K
    if len(tau.indices) != instance.n_paths:
        raise OwnerMismatchError("stopping time path count does not match the instance")
    if any(not (0 <= k <= K) for k in tau.indices):
        raise StructureError("stopping index out of range")
    tree = instance.filtration(tau.owner)
    # with refining partitions, an atom where one path stops is an atom where all stop
    for w, k in enumerate(tau.indices):
        for v in tree.atom_of(k, w):
            if tau.indices[v] != k:
                raise StructureError("stopping rule is not measurable for its owner's filtration")


def make_behavioral(instance: GameInstance, owner: int,
                    masses: dict[tuple[int, int], Fraction]) -> BehavioralStrategy:
    """Build and validate a strategy from a sparse {(time, atom): mass} map."""
    tree = instance.filtration(owner)
    rows = []
    for k in range(tree.depth):
        row = [Fraction(0)] * len(tree.partitions[k])
        rows.append(row)
    for (k, a), m in masses.items():
        rows[k][a] = frac(m)
    strat = BehavioralStrategy(owner, tuple(tuple(r) for r in rows))
    check_strategy(instance, strat)
    return strat


def stop_at_horizon(instance: GameInstance, owner: int) -> BehavioralStrategy:
    """The degenerate strategy "wait until T"."""
    tree = instance.filtration(owner)
    K = instance.K
    return make_behavioral(instance, owner,
                           {(K, a): Fraction(1) for a in range(len(tree.partitions[K]))})


def pure_as_behavioral(instance: GameInstance, tau: PureStoppingTime) -> BehavioralStrategy:
    return behavioral_from_mixed(MixedStrategy([(tau, Fraction(1))]), instance)


def mix_behavioral(a: Fraction, x: BehavioralStrategy, y: BehavioralStrategy) -> BehavioralStrategy:
    """Increment-wise convex combination a*x + (1-a)*y of same-owner strategies."""
    a = frac(a)
    if x.owner != y.owner:
        raise OwnerMismatchError("cannot mix strategies of different owners")
    if not (0 <= a <= 1):
        raise StructureError("mixing weight must lie in [0, 1]")
    rows = tuple(tuple(a * dx + (1 - a) * dy for dx, dy in zip(rx, ry))
                 for rx, ry in zip(x.increments, y.increments))
    return BehavioralStrategy(x.owner, rows)


# ---------------------------------------------------------------------------
# operations


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def validate_instance(instance: GameInstance) -> ValidationReport:
    """Run the semantic checks and report pass/fail per check.

    Structural malformation raises at construction; this reports the
    semantic conditions: probability normalization, refinement over time,
    the sub-filtration property, adaptedness of f/g/h, the payoff ordering
    f >= h >= g, coarseness of the initial partition, and (trivially on
    finite tables) integrability.
    """
    checks: list[CheckResult] = []
    total = instance.space.total_mass()
    checks.append(CheckResult("probability_normalization", total == 1,
                              "" if total == 1 else f"path probabilities sum to {total}"))
    for name, tree in (("master", instance.master), ("player1", instance.player1),
                       ("player2", instance.player2)):
        ok = tree.refines_over_time()
        checks.append(CheckResult(f"refinement_{name}", ok,
                                  "" if ok else "partitions do not refine over time"))
    for name, tree in (("player1", instance.player1), ("player2", instance.player2)):
        # sub-filtration: the player's partition is a coarsening of the master's
        ok = _is_coarsening_of(tree, instance.master)
        checks.append(CheckResult(f"subfiltration_{name}", ok,
                                  "" if ok else "player partition is finer than the master's"))
    for name, tab in (("f", instance.f), ("g", instance.g), ("h", instance.h)):
        ok = tab.is_adapted_to(instance.master)
        checks.append(CheckResult(f"adapted_{name}", ok,
                                  "" if ok else f"{name} is not constant on master atoms"))
    bad = None
    for w in range(instance.n_paths):
        for k in range(instance.K + 1):
            fv, hv, gv = instance.f.at(w, k), instance.h.at(w, k), instance.g.at(w, k)
            if not (fv >= hv >= gv):
                bad = (w, k, fv, hv, gv)
                break
        if bad:
            break
    checks.append(CheckResult("payoff_ordering", bad is None,
                              "" if bad is None else
                              f"f >= h >= g fails at path {bad[0]}, time index {bad[1]}: "
                              f"f={bad[2]}, h={bad[3]}, g={bad[4]}"))
    if instance.initial_partition is not None:
        ok = _partition_coarser_than_time0(instance.initial_partition, instance.player1) and \
            _partition_coarser_than_time0(instance.initial_partition, instance.player2)
        checks.append(CheckResult("initial_partition_coarseness", ok,
                                  "" if ok else
                                  "initial partition is not coarser than both players' "
                                  "time-0 partitions"))
    checks.append(CheckResult("integrability", True, "finite tables; trivially satisfied"))
    return ValidationReport(tuple(checks))


def _is_coarsening_of(coarse: FiltrationTree, fine: FiltrationTree) -> bool:
    if coarse.depth != fine.depth or coarse.n_paths != fine.n_paths:
        return False
    for k in range(coarse.depth):
        idx = coarse._atom_index[k]
        for cell in fine.partitions[k]:
            if len({idx[w] for w in cell}) > 1:
                return False
    return True


def _partition_coarser_than_time0(cells: Sequence[tuple[int, ...]],
                                  tree: FiltrationTree) -> bool:
    owner_at0 = tree._atom_index[0]
    cell_of = {}
    for i, cell in enumerate(cells):
        for w in cell:
            cell_of[w] = i
    for atom in tree.partitions[0]:
        if len({cell_of[w] for w in atom}) > 1:
            return False
    return True


def behavioral_from_mixed(m: MixedStrategy, instance: GameInstance) -> BehavioralStrategy:
    """Aggregate a mixture of pure times into per-atom stopping masses.

    The cumulative process equals the weight-mixture of the pure indicator
    CDFs pathwise, exactly.
    """
    tree = instance.filtration(m.owner)
    rows = [[Fraction(0)] * len(tree.partitions[k]) for k in range(tree.depth)]
    for tau, weight in m.support:
        check_pure(instance, tau)
        seen: set[tuple[int, int]] = set()
        for w, k in enumerate(tau.indices):
            key = (k, tree.atom_index(k, w))
            if key not in seen:
                seen.add(key)
                rows[key[0]][key[1]] += weight
    strat = BehavioralStrategy(m.owner, tuple(tuple(r) for r in rows))
    check_strategy(instance, strat)
    return strat


def mixed_from_behavioral(b: BehavioralStrategy, instance: GameInstance) -> MixedStrategy:
    """Threshold decomposition of a stopping CDF into finitely many pure times.

    For a threshold z the rule "stop when the CDF first exceeds z" is a pure
    adapted stopping time; the finitely many distinct CDF levels cut [0, 1)
    into intervals on which that rule is constant.  The round trip through
    :func:`behavioral_from_mixed` reproduces the increments exactly.
    """
    check_strategy(instance, b)
    levels: set[Fraction] = {Fraction(0), Fraction(1)}
    cdfs = [b.cdf_on_path(instance, w) for w in range(instance.n_paths)]
    for row in cdfs:
        levels.update(row)
    cuts = sorted(levels)
    support = []
    for z, z_next in zip(cuts, cuts[1:]):
        indices = []
        for w in range(instance.n_paths):
            row = cdfs[w]
            k = next(i for i, v in enumerate(row) if v > z)
            indices.append(k)
        support.append((PureStoppingTime(b.owner, tuple(indices)), z_next - z))
    return MixedStrategy(support)


def stopping_index(instance: GameInstance, b: BehavioralStrategy, path: int, z) -> int:
    """First time index where the path's CDF strictly exceeds z (z in [0, 1))."""
    z = frac(z)
    if not (0 <= z < 1):
        raise StructureError(f"threshold {z} outside [0, 1)")
    acc = Fraction(0)
    tree = instance.filtration(b.owner)
    for k in range(tree.depth):
        acc += b.increments[k][tree.atom_index(k, path)]
        if acc > z:
            return k
    return instance.K


def restrict_to_paths(instance: GameInstance,
                      paths: Sequence[int]) -> tuple[GameInstance, tuple[int, ...]]:
    """Sub-instance on a subset of paths with renormalized probabilities.

    Returns the restricted instance and the tuple of original path indices in
    the restricted order.  Filtration atoms are intersected with the subset.
    """
    sel = tuple(sorted(set(int(w) for w in paths)))
    if not sel:
        raise StructureError("cannot restrict to an empty path set")
    pos = {w: i for i, w in enumerate(sel)}
    mass = sum(instance.space.probs[w] for w in sel)
    space = PathSpace([instance.space.probs[w] / mass for w in sel],
                      [instance.space.labels[w] for w in sel])

    def cut(tree: FiltrationTree) -> FiltrationTree:
        parts = []
        for cells in tree.partitions:
            new_cells = []
            for cell in cells:
                kept = [pos[w] for w in cell if w in pos]
                if kept:
                    new_cells.append(kept)
            parts.append(new_cells)
        return FiltrationTree(parts)

    def cut_table(tab: ProcessTable) -> ProcessTable:
        return ProcessTable([tab.values[w] for w in sel])

    init = None
    if instance.initial_partition is not None:
        init = []
        for cell in instance.initial_partition:
            kept = [pos[w] for w in cell if w in pos]
            if kept:
                init.append(kept)
    sub = GameInstance(instance.grid, space, cut(instance.master), cut(instance.player1),
                       cut(instance.player2), cut_table(instance.f), cut_table(instance.g),
                       cut_table(instance.h), init)
    return sub, sel
