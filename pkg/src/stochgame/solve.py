"""Strategy-pair evaluation, best responses, brute-force game values with
certificates, value-preserving/stable action classification, and the
martingale checks behind the stopped-value suites.

Values are computed by exhaustive enumeration of deterministic stationary
strategies: for the positional payoff catalog the enumerated grid attains the
game value, and the saddle-point assertion is the guard that it did.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import log, sqrt
from typing import Optional, Sequence

import numpy as np

from .arena import P1, P2, Arena
from .chain import absorption_from, bottom_sccs, discounted_values, induce_chain
from .payoff import PayoffSpec, class_value
from .strategy import (
    PureStationaryStrategy, Strategy, WeaknessSet,
    as_finite_memory, count_pure_stationary, enumerate_pure_stationary,
)


class SolveError(ValueError):
    pass


class BudgetError(SolveError):
    pass


class UnsupportedPayoffError(SolveError):
    pass


class SaddlePointError(SolveError):
    pass


DEFAULT_BUDGET = 2_000_000


def _require_evaluable(spec: PayoffSpec) -> None:
    if spec.name in ("suffixtarget", "geomfirstone"):
        raise UnsupportedPayoffError(
            f"{spec.format()} is not determined by recurrent classes; "
            "use the verification module's specialized routines")


def node_values(arena: Arena, spec: PayoffSpec, sigma, tau,
                seeds: Sequence[tuple]) -> list[Fraction]:
    """Exact expected payoff from each seed node under the fixed pair."""
    _require_evaluable(spec)
    if spec.name == "discounted":
        chain, vals = discounted_values(arena, sigma, tau, seeds)
        return [vals[chain.index[seed]] for seed in seeds]
    chain = induce_chain(arena, sigma, tau, seeds)
    classes = bottom_sccs(chain)
    cls_vals = [class_value(spec, cls) for cls in classes]
    absorb = absorption_from(chain, classes)
    out = []
    for seed in seeds:
        node = chain.index[seed]
        out.append(sum((p * cls_vals[ci] for ci, p in absorb[node].items()),
                       Fraction(0)))
    return out


def expected_payoff(arena: Arena, spec: PayoffSpec, sigma, tau,
                    source: str) -> Fraction:
    """Expected payoff of the strategy pair from one state."""
    seed = (source, as_finite_memory(sigma).initial,
            as_finite_memory(tau).initial)
    return node_values(arena, spec, sigma, tau, [seed])[0]


def _all_state_values(arena: Arena, spec: PayoffSpec, sigma, tau
                      ) -> dict[str, Fraction]:
    seeds = [(s, as_finite_memory(sigma).initial, as_finite_memory(tau).initial)
             for s in arena.states]
    vals = node_values(arena, spec, sigma, tau, seeds)
    return dict(zip(arena.states, vals))


# ---------------------------------------------------------------------------
# Grid enumeration


class GridSolver:
    """Evaluates every deterministic stationary strategy pair once and
    answers value queries for several payoffs over the shared chains."""

    def __init__(self, arena: Arena, budget: int = DEFAULT_BUDGET):
        self.arena = arena
        n_pairs = count_pure_stationary(arena, P1) * count_pure_stationary(arena, P2)
        if n_pairs > budget:
            raise BudgetError(
                f"{n_pairs} strategy pairs exceed the budget of {budget}; "
                "split the arena or raise the budget")
        self.sigmas = list(enumerate_pure_stationary(arena, P1))
        self.taus = list(enumerate_pure_stationary(arena, P2))
        self._analysis: dict[tuple[int, int], tuple] = {}
        self._values: dict[tuple[str, int, int], dict[str, Fraction]] = {}

    def pair_values(self, spec: PayoffSpec, i: int, j: int) -> dict[str, Fraction]:
        key = (spec.format(), i, j)
        if key in self._values:
            return self._values[key]
        sigma, tau = self.sigmas[i], self.taus[j]
        if spec.name == "discounted":
            seeds = [(s, 0, 0) for s in self.arena.states]
            chain, vals = discounted_values(self.arena, sigma, tau, seeds)
            out = {s: vals[chain.index[(s, 0, 0)]] for s in self.arena.states}
        else:
            _require_evaluable(spec)
            if (i, j) not in self._analysis:
                seeds = [(s, 0, 0) for s in self.arena.states]
                chain = induce_chain(self.arena, sigma, tau, seeds)
                classes = bottom_sccs(chain)
                absorb = absorption_from(chain, classes)
                self._analysis[(i, j)] = (chain, classes, absorb)
            chain, classes, absorb = self._analysis[(i, j)]
            cls_vals = [class_value(spec, cls) for cls in classes]
            out = {}
            for s in self.arena.states:
                node = chain.index[(s, 0, 0)]
                out[s] = sum((p * cls_vals[ci]
                              for ci, p in absorb[node].items()), Fraction(0))
        self._values[key] = out
        return out


@dataclass(frozen=True)
class BestResponse:
    """The minimizer's best reply to a fixed stationary strategy: per-state
    minima, the per-state minimizers, and the uniform minimizer if one
    strategy attains every state's minimum simultaneously."""

    values: dict[str, Fraction]
    minimizers: dict[str, PureStationaryStrategy]
    uniform: Optional[PureStationaryStrategy]

    @property
    def has_uniform(self) -> bool:
        return self.uniform is not None


def best_response_min(arena: Arena, spec: PayoffSpec,
                      sigma: PureStationaryStrategy,
                      budget: int = DEFAULT_BUDGET) -> BestResponse:
    """Exhaustive minimization over the opponent's stationary strategies."""
    if not spec.is_both_positional:
        raise UnsupportedPayoffError(
            f"best responses are only enumerated for the positional catalog, "
            f"not {spec.format()}")
    n = count_pure_stationary(arena, P2)
    if n > budget:
        raise BudgetError(f"{n} responses exceed budget {budget}")
    best: dict[str, Fraction] = {}
    argmin: dict[str, PureStationaryStrategy] = {}
    uniform = None
    for tau in enumerate_pure_stationary(arena, P2):
        vals = _all_state_values(arena, spec, sigma, tau)
        for s, v in vals.items():
            if s not in best or v < best[s]:
                best[s] = v
                argmin[s] = tau
        if all(vals[s] == best[s] for s in arena.states):
            uniform = tau
    if uniform is not None:
        vals = _all_state_values(arena, spec, sigma, uniform)
        if any(vals[s] != best[s] for s in arena.states):
            uniform = None
    return BestResponse(best, argmin, uniform)


@dataclass(frozen=True)
class ValueVector:
    """Game values with certificates: the optimal stationary strategy of the
    maximizer and, per state, the minimizer's reply achieving the value."""

    values: dict[str, Fraction]
    sigma_star: PureStationaryStrategy
    best_response: dict[str, tuple[PureStationaryStrategy, Fraction]]
    spec: PayoffSpec
    arena_fingerprint: str

    def __getitem__(self, state: str) -> Fraction:
        return self.values[state]


def brute_force_value(arena: Arena, spec: PayoffSpec,
                      budget: int = DEFAULT_BUDGET,
                      grid: Optional[GridSolver] = None) -> ValueVector:
    """max over stationary strategies of the best-response minimum, with the
    exact saddle-point assertion max min = min max on the enumerated grid."""
    if not spec.is_both_positional:
        raise UnsupportedPayoffError(
            f"exact values are only computed for the positional catalog, "
            f"not {spec.format()}")
    if grid is None:
        grid = GridSolver(arena, budget)
    states = arena.states
    n_sig, n_tau = len(grid.sigmas), len(grid.taus)
    vals = [[grid.pair_values(spec, i, j) for j in range(n_tau)]
            for i in range(n_sig)]
    min_per_sigma = [
        {s: min(vals[i][j][s] for j in range(n_tau)) for s in states}
        for i in range(n_sig)]
    max_per_tau = [
        {s: max(vals[i][j][s] for i in range(n_sig)) for s in states}
        for j in range(n_tau)]
    maxmin = {s: max(m[s] for m in min_per_sigma) for s in states}
    minmax = {s: min(m[s] for m in max_per_tau) for s in states}
    if maxmin != minmax:
        raise SaddlePointError(
            f"enumerated maxmin {maxmin} differs from minmax {minmax}")
    best_i = next((i for i in range(n_sig)
                   if all(min_per_sigma[i][s] == maxmin[s] for s in states)),
                  None)
    if best_i is None:
        raise SaddlePointError(
            "no stationary strategy attains the maxmin at every state")
    certificates = {}
    for s in states:
        j = min(range(n_tau), key=lambda j: vals[best_i][j][s])
        certificates[s] = (grid.taus[j], vals[best_i][j][s])
        assert certificates[s][1] == maxmin[s]
    return ValueVector(maxmin, grid.sigmas[best_i], certificates, spec,
                       arena.fingerprint())


# ---------------------------------------------------------------------------
# Value-preserving and stable actions


@dataclass(frozen=True)
class ActionFacts:
    value_preserving: bool
    stable: bool
    one_step_value: Fraction
    successor_values: frozenset


@dataclass(frozen=True)
class ActionClassification:
    table: dict[tuple[str, str], ActionFacts]
    all_preserving: dict[str, bool]

    def value_preserving_actions(self, arena: Arena, s: str) -> list[str]:
        return [a for a in arena.available[s]
                if self.table[(s, a)].value_preserving]


def classify_actions(arena: Arena, values: ValueVector) -> ActionClassification:
    """Exact per-action flags: value-preserving means the expected successor
    value equals the state's value; stable means every possible successor
    has the same value as the state."""
    table = {}
    all_pres = {}
    for s in arena.states:
        flags = []
        for a in arena.available[s]:
            dist = arena.transition[(s, a)]
            q = sum((p * values.values[t] for t, p in dist.items()),
                    Fraction(0))
            succ_vals = frozenset(values.values[t]
                                  for t, p in dist.items() if p > 0)
            vp = q == values.values[s]
            stable = succ_vals == {values.values[s]}
            if stable and not vp:
                raise SolveError(f"stable but not value-preserving at ({s},{a})")
            table[(s, a)] = ActionFacts(vp, stable, q, succ_vals)
            flags.append(vp)
        all_pres[s] = all(flags)
    return ActionClassification(table, all_pres)


def locally_optimal(arena: Arena, classification: ActionClassification,
                    strategy: Strategy) -> Optional[tuple]:
    """None if every action in the strategy's support is value-preserving,
    else the offending (memory, state, action)."""
    fm = as_finite_memory(strategy)
    for m in fm.memory_states:
        for s in arena.player_states(fm.player):
            for a, w in fm.action_dist(m, s).items():
                if w > 0 and not classification.table[(s, a)].value_preserving:
                    return (m, s, a)
    return None


@dataclass(frozen=True)
class MartingaleReport:
    verdict: str                      # "martingale" | "submartingale"
    nodes_checked: int
    strict_nodes: tuple[tuple, ...]   # nodes where the inequality is strict
    details: dict


def martingale_check(arena: Arena, values: ValueVector, sigma, tau,
                     source: str, horizon: Optional[int] = None,
                     classification: Optional[ActionClassification] = None
                     ) -> MartingaleReport:
    """Exhaustive one-step check of E[val(next)] against val(current) over
    every node of the induced chain reachable from the source (optionally
    within `horizon` steps).  Exact comparisons, no sampling.

    Requires the maximizer locally optimal; the check then verifies the
    submartingale inequality at every node, with equality everywhere exactly
    when the minimizer plays only value-preserving actions too.
    """
    if classification is None:
        classification = classify_actions(arena, values)
    offender = locally_optimal(arena, classification, sigma)
    if offender is not None:
        raise SolveError(
            f"maximizer strategy is not locally optimal: plays {offender[2]} "
            f"at state {offender[1]} (memory {offender[0]})")
    sig = as_finite_memory(sigma)
    ta = as_finite_memory(tau)
    chain = induce_chain(arena, sig, ta, [(source, sig.initial, ta.initial)])
    start = chain.index[(source, sig.initial, ta.initial)]
    reach = {start: 0}
    frontier = [start]
    while frontier:
        nxt = []
        for i in frontier:
            if horizon is not None and reach[i] >= horizon:
                continue
            for j in chain.row(i):
                if j not in reach:
                    reach[j] = reach[i] + 1
                    nxt.append(j)
        frontier = nxt
    strict = []
    for i in sorted(reach):
        s = chain.state_of(i)
        one_step = sum((p * values.values[chain.state_of(j)]
                        for j, p in chain.row(i).items()), Fraction(0))
        if one_step < values.values[s]:
            raise SolveError(
                f"one-step value drops at node {chain.nodes[i]}: "
                f"{one_step} < {values.values[s]}")
        if one_step > values.values[s]:
            strict.append(chain.nodes[i])
    verdict = "martingale" if not strict else "submartingale"
    return MartingaleReport(verdict, len(reach), tuple(strict),
                            {"source": source, "spec": values.spec.format()})


# ---------------------------------------------------------------------------
# Stopped-value Monte Carlo


@dataclass(frozen=True)
class StoppedValueReport:
    estimate: float
    ci_low: float
    ci_high: float
    runs: int
    confidence: float
    reference: Fraction
    covered: bool
    stopping_rule: str
    seed: int


def stopped_value_mc(arena: Arena, values: ValueVector, sigma, tau,
                     source: str, stopping_rule, runs: int, seed: int,
                     confidence: float = 0.99,
                     max_steps: int = 10_000) -> StoppedValueReport:
    """Monte Carlo estimate of the value process stopped by the given rule,
    with a Hoeffding confidence interval.

    Rules: ("horizon", n), ("first_hit", state set), or
    ("first_weakness", WeaknessSet).  Trajectories that never trigger a
    first-hit rule are followed into their absorbing class, whose nodes all
    share one value (Doob convergence), and contribute that value.
    """
    if runs < 1:
        raise SolveError("runs must be >= 1")
    sig = as_finite_memory(sigma)
    ta = as_finite_memory(tau)
    chain = induce_chain(arena, sig, ta, [(source, sig.initial, ta.initial)])
    start = chain.index[(source, sig.initial, ta.initial)]
    n = len(chain)
    node_val = np.array([float(values.values[chain.state_of(i)])
                         for i in range(n)])
    kind, payload = stopping_rule
    horizon = payload if kind == "horizon" else max_steps
    if kind == "horizon":
        stop_mask = np.zeros(n, dtype=bool)
    elif kind == "first_hit":
        stop_mask = np.array([chain.state_of(i) in payload for i in range(n)])
    elif kind == "first_weakness":
        weak: WeaknessSet = payload
        stop_mask = np.array([(chain.nodes[i][1], chain.state_of(i)) in weak.pairs
                              for i in range(n)])
    else:
        raise SolveError(f"unknown stopping rule {kind!r}")

    classes = bottom_sccs(chain)
    absorbing_val = {}
    absorbing_mask = np.zeros(n, dtype=bool)
    for cls in classes:
        class_vals = {values.values[chain.state_of(i)] for i in cls.nodes}
        if len(class_vals) != 1:
            raise SolveError(
                "bottom class mixes state values; the stopped limit is "
                "undefined (strategies are not locally optimal)")
        val = next(iter(class_vals))
        for i in cls.nodes:
            absorbing_mask[i] = True
            absorbing_val[i] = val

    cum = np.zeros((n, n))
    for i in range(n):
        row = chain.row(i)
        acc = 0.0
        for j in range(n):
            acc += float(row.get(j, 0))
            cum[i, j] = acc
        cum[i, n - 1] = 1.0

    rng = np.random.default_rng(seed)
    current = np.full(runs, start, dtype=np.int64)
    # stopped values come from the finite value set, so tally node indices
    # and average exactly; the float estimate is only the summary.
    stopped_node = np.full(runs, -1, dtype=np.int64)
    active = np.ones(runs, dtype=bool)
    if kind != "horizon":
        hit0 = stop_mask[current] & active
        stopped_node[hit0] = current[hit0]
        active &= ~hit0
    for _ in range(horizon):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        u = rng.random(idx.size)
        rows = cum[current[idx]]
        nxt = (u[:, None] > rows).sum(axis=1)
        current[idx] = nxt
        if kind != "horizon":
            hit = stop_mask[current] & active
            stopped_node[hit] = current[hit]
            active &= ~hit
            # absorbed without hitting: the limit value is the class value
            absorbed = absorbing_mask[current] & active
            stopped_node[absorbed] = current[absorbed]
            active &= ~absorbed
    if kind == "horizon":
        stopped_node = current
        active[:] = False
    if active.any():
        raise SolveError("trajectories neither stopped nor absorbed; "
                         "raise max_steps")
    counts = np.bincount(stopped_node, minlength=n)
    exact_value = []
    for i in range(n):
        if absorbing_mask[i] and kind != "horizon" and not stop_mask[i]:
            exact_value.append(absorbing_val[i])
        else:
            exact_value.append(values.values[chain.state_of(i)])
    exact_mean = sum((int(counts[i]) * exact_value[i] for i in range(n)),
                     Fraction(0)) / runs
    lo = float(min(values.values.values()))
    hi = float(max(values.values.values()))
    estimate = float(exact_mean)
    half = (hi - lo) * sqrt(log(2 / (1 - confidence)) / (2 * runs))
    ref = values.values[source]
    covered = abs(float(exact_mean - ref)) <= half
    return StoppedValueReport(
        estimate, estimate - half, estimate + half, runs, confidence, ref,
        covered, f"{kind}", seed)
