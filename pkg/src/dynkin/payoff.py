"""Expected payoff of a strategy pair, computed several independent ways.

The game pays (to the maximiser) ``f`` at the minimiser's stopping time if
she stops strictly first, ``g`` at the maximiser's if he does, and ``h`` on
a tie.  For randomised strategies with generating CDFs xi (player 1) and
zeta (player 2) the expectation integrates the devices out:

    N(xi, zeta) = E[ sum_k f_k dxi_k (1 - zeta_k)
                       + g_k dzeta_k (1 - xi_k) + h_k dxi_k dzeta_k ].

The f and g terms at the terminal index vanish automatically because both
CDFs reach 1 there, so the sums run over all k without special cases.
:func:`expected_payoff_by_joint_law` recomputes the same number from the
joint stopping-time distribution and serves as the brute-force oracle.
"""

from __future__ import annotations

from fractions import Fraction

from .core import (BehavioralStrategy, FiltrationTree, GameInstance, check_strategy)
from .errors import OwnerMismatchError, StructureError

__all__ = [
    "pathwise_payoff",
    "expected_payoff",
    "expected_payoff_float",
    "expected_payoff_by_joint_law",
    "conditional_payoff",
    "scenario_expected_payoff",
]


def pathwise_payoff(instance: GameInstance, k_tau: int, k_sigma: int, path: int) -> Fraction:
    """Payoff when player 1 stops at index k_tau and player 2 at k_sigma on ``path``."""
    K = instance.K
    if not (0 <= k_tau <= K and 0 <= k_sigma <= K):
        raise StructureError("stopping index out of range")
    if k_tau < k_sigma:
        return instance.f.at(path, k_tau)
    if k_sigma < k_tau:
        return instance.g.at(path, k_sigma)
    return instance.h.at(path, k_tau)


def _require_pair(xi: BehavioralStrategy, zeta: BehavioralStrategy) -> None:
    if xi.owner != 1 or zeta.owner != 2:
        raise OwnerMismatchError("expected a player-1 strategy and a player-2 strategy")


def expected_payoff(instance: GameInstance, xi: BehavioralStrategy,
                    zeta: BehavioralStrategy, validate: bool = False) -> Fraction:
    """N(xi, zeta) via the control reformulation, exactly."""
    _require_pair(xi, zeta)
    if validate:
        check_strategy(instance, xi)
        check_strategy(instance, zeta)
    total = Fraction(0)
    K = instance.K
    for w in range(instance.n_paths):
        p = instance.space.probs[w]
        fx, gx, hx = instance.f.values[w], instance.g.values[w], instance.h.values[w]
        xi_c = zeta_c = Fraction(0)
        acc = Fraction(0)
        dx = xi.deltas_on_path(instance, w)
        dz = zeta.deltas_on_path(instance, w)
        for k in range(K + 1):
            xi_c += dx[k]
            zeta_c += dz[k]
            acc += fx[k] * dx[k] * (1 - zeta_c) + gx[k] * dz[k] * (1 - xi_c) \
                + hx[k] * dx[k] * dz[k]
        total += p * acc
    return total


def expected_payoff_float(instance: GameInstance, xi: BehavioralStrategy,
                          zeta: BehavioralStrategy) -> float:
    """Floating-point fast path; not used by any exactness guarantee."""
    total = 0.0
    K = instance.K
    for w in range(instance.n_paths):
        p = float(instance.space.probs[w])
        fx, gx, hx = instance.f.values[w], instance.g.values[w], instance.h.values[w]
        xi_c = zeta_c = 0.0
        acc = 0.0
        dx = [float(d) for d in xi.deltas_on_path(instance, w)]
        dz = [float(d) for d in zeta.deltas_on_path(instance, w)]
        for k in range(K + 1):
            xi_c += dx[k]
            zeta_c += dz[k]
            acc += float(fx[k]) * dx[k] * (1.0 - zeta_c) \
                + float(gx[k]) * dz[k] * (1.0 - xi_c) + float(hx[k]) * dx[k] * dz[k]
        total += p * acc
    return total


def expected_payoff_by_joint_law(instance: GameInstance, xi: BehavioralStrategy,
                                 zeta: BehavioralStrategy) -> Fraction:
    """N(xi, zeta) by enumerating the joint law of the two stopping times.

    The randomisation devices are independent of each other and of the path,
    so conditionally on the path the pair stops at (k, l) with probability
    dxi_k * dzeta_l.  Must equal :func:`expected_payoff` exactly.
    """
    _require_pair(xi, zeta)
    total = Fraction(0)
    for w in range(instance.n_paths):
        p = instance.space.probs[w]
        dx = xi.deltas_on_path(instance, w)
        dz = zeta.deltas_on_path(instance, w)
        acc = Fraction(0)
        for k, dxk in enumerate(dx):
            if dxk == 0:
                continue
            for l, dzl in enumerate(dz):
                if dzl == 0:
                    continue
                acc += dxk * dzl * pathwise_payoff(instance, k, l, w)
        total += p * acc
    return total


def conditional_payoff(instance: GameInstance, xi: BehavioralStrategy,
                       zeta: BehavioralStrategy, atom: int) -> Fraction:
    """Expected payoff conditioned on one atom of the initial partition."""
    if instance.initial_partition is None:
        raise StructureError("instance carries no initial partition")
    if not (0 <= atom < len(instance.initial_partition)):
        raise StructureError(f"atom index {atom} not in the initial partition")
    cell = instance.initial_partition[atom]
    p_atom = sum(instance.space.probs[w] for w in cell)
    _require_pair(xi, zeta)
    total = Fraction(0)
    K = instance.K
    for w in cell:
        p = instance.space.probs[w] / p_atom
        fx, gx, hx = instance.f.values[w], instance.g.values[w], instance.h.values[w]
        dx = xi.deltas_on_path(instance, w)
        dz = zeta.deltas_on_path(instance, w)
        xi_c = zeta_c = Fraction(0)
        acc = Fraction(0)
        for k in range(K + 1):
            xi_c += dx[k]
            zeta_c += dz[k]
            acc += fx[k] * dx[k] * (1 - zeta_c) + gx[k] * dz[k] * (1 - xi_c) \
                + hx[k] * dx[k] * dz[k]
        total += p * acc
    return total


def scenario_expected_payoff(instance: GameInstance, taus, sigmas) -> Fraction:
    """Expected payoff of a scenario game from per-scenario strategies.

    ``instance`` must come from :func:`dynkin.lab.build_scenario_game`; path
    labels identify (base path, scenario pair).  ``taus[i]`` and
    ``sigmas[j]`` are strategies whose increments are indexed by the atoms
    of the common filtration, one per value of the privately observed index.
    Equals :func:`expected_payoff` applied to the glued strategies, exactly.
    """
    layout = _scenario_layout(instance)
    common, base_probs, I, J = layout
    if len(taus) != I or len(sigmas) != J:
        raise StructureError(f"expected {I} player-1 and {J} player-2 strategies, "
                             f"got {len(taus)} and {len(sigmas)}")
    for strat in list(taus) + list(sigmas):
        _check_common_shape(common, strat)
    total = Fraction(0)
    for w in range(instance.n_paths):
        lab = instance.space.labels[w]
        b = lab["base"]
        i, j = lab["scenario"]
        dx = _deltas_on_common_path(common, taus[i], b)
        dz = _deltas_on_common_path(common, sigmas[j], b)
        acc = Fraction(0)
        for k, dxk in enumerate(dx):
            if dxk == 0:
                continue
            for l, dzl in enumerate(dz):
                if dzl == 0:
                    continue
                acc += dxk * dzl * pathwise_payoff(instance, k, l, w)
        total += instance.space.probs[w] * acc
    return total


def _scenario_layout(instance: GameInstance):
    """Recover (common filtration, base probs, I, J) from scenario path labels."""
    try:
        pairs = [(lab["base"], tuple(lab["scenario"])) for lab in instance.space.labels]
    except (KeyError, TypeError):
        raise StructureError("instance was not built by the scenario builder "
                             "(missing base/scenario path labels)")
    I = 1 + max(ij[0] for _, ij in pairs)
    J = 1 + max(ij[1] for _, ij in pairs)
    n_base = 1 + max(b for b, _ in pairs)
    # pick a scenario block that contains every base path and project the
    # master partition onto base indices: within a fixed (i, j) the master
    # partition is exactly the common one
    blocks: dict[tuple[int, int], dict[int, int]] = {}
    for w, (b, ij) in enumerate(pairs):
        blocks.setdefault(ij, {})[b] = w
    block = None
    for ij, m in blocks.items():
        if len(m) == n_base:
            block = (ij, m)
            break
    if block is None:
        raise StructureError("no scenario pair carries the full base path set")
    ij0, base_to_path = block
    parts = []
    for k in range(instance.master.depth):
        cells: dict[int, list[int]] = {}
        for b in range(n_base):
            a = instance.master.atom_index(k, base_to_path[b])
            cells.setdefault(a, []).append(b)
        parts.append(list(cells.values()))
    common = FiltrationTree(parts)
    # base probabilities recovered from the block's scenario weight
    pi_block = sum(instance.space.probs[w] for b, w in base_to_path.items())
    base_probs = [instance.space.probs[base_to_path[b]] / pi_block for b in range(n_base)]
    return common, base_probs, I, J


def _check_common_shape(common: FiltrationTree, strat: BehavioralStrategy) -> None:
    if len(strat.increments) != common.depth:
        raise OwnerMismatchError("per-scenario strategy depth does not match the grid")
    for k, row in enumerate(strat.increments):
        if len(row) != len(common.partitions[k]):
            raise OwnerMismatchError("per-scenario strategy is not indexed by the "
                                     "common filtration's atoms")


def _deltas_on_common_path(common: FiltrationTree, strat: BehavioralStrategy,
                           base: int) -> list[Fraction]:
    return [strat.increments[k][common.atom_index(k, base)] for k in range(common.depth)]
