"""Shared desk fixtures: the two-choice arena E2, the coin-flip arena E3,
the four-state letter-coloured counter-example arena, and the crafted
weak-memory strategy used by the reset-strategy checks."""

from __future__ import annotations

from fractions import Fraction

from .arena import P1, P2, Arena
from .payoff import letter, priority, reward
from .strategy import FiniteMemoryStrategy


def build_e2() -> Arena:
    """One controlled choice: stay on a reward-0 loop or move to an
    absorbing reward-1 loop.  Mean value 1; staying is value-preserving but
    not optimal, the standard locally-optimal-is-not-optimal example."""
    half = Fraction(1)
    return Arena(
        states=("s", "t"),
        owner={"s": P1, "t": P1},
        available={"s": ("stay", "go"), "t": ("loop",)},
        transition={
            ("s", "stay"): {"s": half},
            ("s", "go"): {"t": half},
            ("t", "loop"): {"t": half},
        },
        colour={
            ("s", "stay"): reward(0),
            ("s", "go"): reward(0),
            ("t", "loop"): reward(1),
        },
    )


def build_e3(kind: str = "reward") -> Arena:
    """A fair coin: s moves to absorbing t or u with probability 1/2 each.
    Rewards 0/2 (mean 1 from s) or priorities 2/1 (parity value 1/2)."""
    col = {
        "reward": {"s": reward(0), "t": reward(0), "u": reward(2)},
        "priority": {"s": priority(0), "t": priority(2), "u": priority(1)},
    }[kind]
    return Arena(
        states=("s", "t", "u"),
        owner={"s": P1, "t": P1, "u": P1},
        available={"s": ("a",), "t": ("loop",), "u": ("loop",)},
        transition={
            ("s", "a"): {"t": Fraction(1, 2), "u": Fraction(1, 2)},
            ("t", "loop"): {"t": Fraction(1)},
            ("u", "loop"): {"u": Fraction(1)},
        },
        colour={
            ("s", "a"): col["s"],
            ("t", "loop"): col["t"],
            ("u", "loop"): col["u"],
        },
    )


def build_fig1() -> Arena:
    """Four states coloured over {a, b, empty}: the square minimizer state
    feeds either a one-or-two-step 'b' branch controlled by the maximizer or
    an 'a' detour.  Colours are per state (every action of a state shares
    its letter)."""
    one = Fraction(1)
    states = ("sq", "c1", "c2", "c3")
    owner = {"sq": P2, "c1": P1, "c2": P1, "c3": P1}
    available = {"sq": ("1", "2"), "c1": ("1", "2"), "c2": ("1",), "c3": ("1",)}
    transition = {
        ("sq", "1"): {"c1": one},
        ("sq", "2"): {"c3": one},
        ("c1", "1"): {"sq": one},
        ("c1", "2"): {"c2": one},
        ("c2", "1"): {"sq": one},
        ("c3", "1"): {"sq": one},
    }
    letters = {"sq": "", "c1": "b", "c2": "b", "c3": "a"}
    colour = {(s, a): letter(letters[s]) for (s, a) in transition}
    return Arena(states, owner, available, transition, colour)


def fig1_alternating_strategy() -> FiniteMemoryStrategy:
    """The maximizer's two-memory strategy for the letter arena: alternate
    the branch choice per 'b'-branch visit, and restart the alternation each
    time the 'a' state is passed.

    Restarting is what pins the run-length arithmetic: every maximal 'b' run
    then has length in {1, 3, 4, 6, 7, ...}, never 2 mod 3.  (Without the
    restart the minimizer can steer the alternation phase between runs and
    realize every required run length.)
    """
    update = {}
    for m in ("m0", "m1"):
        for t in ("sq", "c1", "c2", "c3"):
            # flip when leaving the choice state, reset when passing the 'a'
            # state, keep otherwise
            update[(m, "c1", "1", t)] = "m1" if m == "m0" else "m0"
            update[(m, "c1", "2", t)] = "m1" if m == "m0" else "m0"
            update[(m, "c3", "1", t)] = "m0"
    choices = {}
    for m in ("m0", "m1"):
        choices[(m, "c1")] = {"1" if m == "m0" else "2": Fraction(1)}
        choices[(m, "c2")] = {"1": Fraction(1)}
        choices[(m, "c3")] = {"1": Fraction(1)}
    return FiniteMemoryStrategy(
        player=P1, memory_states=("m0", "m1"), initial="m0",
        update=update, choices=choices)


def build_weak_memory_fixture():
    """The crafted reset-strategy fixture on E2: a two-memory base that
    plays 'go' with weight 3/4 from the fresh memory but falls into a
    stay-forever trap memory on the 1/4 branch.

    With the mean payoff the base guarantees 3/4 from s, i.e. it is exactly
    1/4-optimal, and it is locally optimal (both actions preserve the value
    1).  At epsilon = 1/4 the trap pair is the whole weakness set, the base
    itself fails the val - 2*epsilon threshold at the reachable trap, and
    the reset strategy repairs it.
    """
    arena = build_e2()
    sigma = FiniteMemoryStrategy(
        player=P1, memory_states=("m0", "m1"), initial="m0",
        update={
            ("m0", "s", "stay", "s"): "m1",
            ("m1", "s", "stay", "s"): "m1",
        },
        choices={
            ("m0", "s"): {"go": Fraction(3, 4), "stay": Fraction(1, 4)},
            ("m1", "s"): {"stay": Fraction(1)},
            ("m0", "t"): {"loop": Fraction(1)},
            ("m1", "t"): {"loop": Fraction(1)},
        },
    )
    return arena, sigma, Fraction(1, 4)
