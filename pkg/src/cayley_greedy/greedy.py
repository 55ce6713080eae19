"""Greedy maximal independent sets on labeled trees, three equivalent ways.

* :func:`greedy_reference` -- the textbook sweep: inspect vertices in a
  given order, activate undetermined ones, block their undetermined
  neighbours.
* :func:`greedy_peeling` -- the rooted variant that inspects the smallest
  undetermined label and touches only the inspected vertex and its parent.
  On any fixed tree it constructs the same active set as the reference
  sweep under label order.
* the status chain -- on a uniform tree, the five counts (undetermined,
  active-white, blocked-white, active-blue, blocked-blue) form a Markov
  chain whose transitions close over the counts alone, so the law of the
  outcome triple (set size, stopping step, root-last indicator) can be
  simulated in O(stopping step) with no tree at all
  (:func:`simulate_status_chain`, :func:`simulate_status_chain_many`) and
  computed exactly by dynamic programming (:func:`exact_chain_law`).

Here *blue* means "in the component of the root n" exactly as in the
peeling exploration; the root-last indicator records the event that at
some step the root is the only undetermined vertex left, which forces an
extra active vertex and is the +1 correction in the complement symmetry
law(size) == law((n - size) + indicator).
"""

from __future__ import annotations

import csv
import math
import os
from collections import defaultdict
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .trees import CayleyTree, RandomSource, enumerate_all, tree_count

#: largest size accepted by exact_chain_law unless overridden
DEFAULT_LAW_CAP = 60


class VertexStatus(IntEnum):
    UNDETERMINED = 0
    ACTIVE = 1
    BLOCKED = 2


class StatusCounts(NamedTuple):
    """Vertex counts by status and color; always sums to n."""

    undetermined: int
    active_white: int
    blocked_white: int
    active_blue: int
    blocked_blue: int


@dataclass(frozen=True)
class GreedyOutcome:
    """Result of one greedy run: set size, stopping step, root-last flag."""

    size: int
    steps: int
    root_last: int
    active_set: frozenset[int] | None = None


def greedy_reference(tree: CayleyTree, order: Sequence[int]) -> frozenset[int]:
    """Maximal independent set built by inspecting vertices in ``order``.

    An undetermined vertex becomes active and immediately blocks all of its
    undetermined neighbours; determined vertices are skipped.
    """
    n = tree.n
    if sorted(order) != list(range(1, n + 1)):
        raise ValueError("order must be a permutation of 1..n")
    adj = tree.adjacency()
    status = [VertexStatus.UNDETERMINED] * (n + 1)
    active = []
    for v in order:
        if status[v] != VertexStatus.UNDETERMINED:
            continue
        status[v] = VertexStatus.ACTIVE
        active.append(v)
        for w in adj[v]:
            if status[w] == VertexStatus.UNDETERMINED:
                status[w] = VertexStatus.BLOCKED
    return frozenset(active)


def greedy_peeling(
    tree: CayleyTree, trace: bool = False
) -> GreedyOutcome | tuple[GreedyOutcome, list[tuple[StatusCounts, StatusCounts]]]:
    """Greedy construction as a peeling of the rooted tree.

    At each step the smallest-label undetermined vertex v is inspected and
    only v and its parent w change status:

    * v == n: the root is the last undetermined vertex; it becomes active.
    * w undetermined: v becomes active, w becomes blocked.
    * w blocked: v becomes active.  w active: v becomes blocked.

    The resulting active set equals ``greedy_reference(tree, 1..n)``.
    Statuses never revert, so counting is monotone.

    With ``trace=True``, also returns the per-step (before, after) pairs of
    :class:`StatusCounts`.  Colors need no union-find here: a white
    component of size >= 2 is rooted at a blocked vertex, which is never
    inspected again, so only the inspected vertex itself can turn blue.
    """
    n = tree.n
    status = [VertexStatus.UNDETERMINED] * (n + 1)
    blue = [False] * (n + 1)
    blue[n] = True
    undetermined = n
    counts = StatusCounts(n, 0, 0, 0, 0)
    rows: list[tuple[StatusCounts, StatusCounts]] = []
    active: list[int] = []
    steps = 0
    root_last = 0
    ptr = 1
    while undetermined > 0:
        while status[ptr] != VertexStatus.UNDETERMINED:
            ptr += 1
        v = ptr
        steps += 1
        u, aw, bw, ab, bb = counts
        if v == n:
            root_last = 1
            status[v] = VertexStatus.ACTIVE
            active.append(v)
            undetermined -= 1
            new = StatusCounts(u - 1, aw, bw, ab + 1, bb)
        else:
            w = tree.parent_of(v)
            blue[v] = blue[w]
            if status[w] == VertexStatus.UNDETERMINED:
                status[v] = VertexStatus.ACTIVE
                status[w] = VertexStatus.BLOCKED
                active.append(v)
                undetermined -= 2
                if w == n:
                    new = StatusCounts(u - 2, aw, bw, ab + 1, bb + 1)
                else:
                    new = StatusCounts(u - 2, aw + 1, bw + 1, ab, bb)
            elif status[w] == VertexStatus.BLOCKED:
                status[v] = VertexStatus.ACTIVE
                active.append(v)
                undetermined -= 1
                if blue[v]:
                    new = StatusCounts(u - 1, aw, bw, ab + 1, bb)
                else:
                    new = StatusCounts(u - 1, aw + 1, bw, ab, bb)
            else:
                status[v] = VertexStatus.BLOCKED
                undetermined -= 1
                if blue[v]:
                    new = StatusCounts(u - 1, aw, bw, ab, bb + 1)
                else:
                    new = StatusCounts(u - 1, aw, bw + 1, ab, bb)
        if trace:
            rows.append((counts, new))
        counts = new
        assert sum(counts) == n, "status counts must always sum to n"
    outcome = GreedyOutcome(
        size=len(active), steps=steps, root_last=root_last,
        active_set=frozenset(active),
    )
    return (outcome, rows) if trace else outcome


def greedy_exploration_steps(tree: CayleyTree):
    """Edge trace of the greedy peeling of a fixed tree.

    Returns (steps, outcome) where steps lists one (peeled, parent,
    recolored) record per inspected vertex other than the root; inspecting
    the root adds no edge.
    """
    from .peeling import PeelStep

    n = tree.n
    status = [VertexStatus.UNDETERMINED] * (n + 1)
    blue = [False] * (n + 1)
    blue[n] = True
    undetermined = n
    steps: list[PeelStep] = []
    active = 0
    inspections = 0
    root_last = 0
    ptr = 1
    while undetermined > 0:
        while status[ptr] != VertexStatus.UNDETERMINED:
            ptr += 1
        v = ptr
        inspections += 1
        if v == n:
            root_last = 1
            status[v] = VertexStatus.ACTIVE
            active += 1
            undetermined -= 1
            continue
        w = tree.parent_of(v)
        steps.append(PeelStep(peeled=v, parent=w, recolored_to_blue=blue[w]))
        blue[v] = blue[w]
        if status[w] == VertexStatus.UNDETERMINED:
            status[v] = VertexStatus.ACTIVE
            status[w] = VertexStatus.BLOCKED
            active += 1
            undetermined -= 2
        elif status[w] == VertexStatus.BLOCKED:
            status[v] = VertexStatus.ACTIVE
            active += 1
            undetermined -= 1
        else:
            status[v] = VertexStatus.BLOCKED
            undetermined -= 1
    outcome = GreedyOutcome(size=active, steps=inspections, root_last=root_last)
    return steps, outcome


def greedy_markov_peeling(n: int, rng: RandomSource):
    """Greedy exploration without a tree, at vertex level.

    The inspected vertex is always an isolated white vertex (component size
    one), so its parent is blue with probability (L + 1)/n in total, each
    blue vertex being equally likely, and every other white vertex has
    probability 1/n.  Statuses update exactly as in
    :func:`greedy_peeling`; the exploration stops once nothing is
    undetermined, leaving a partial forest.

    Returns (steps, outcome); the outcome triple has the same law as
    :func:`simulate_status_chain`.
    """
    from .peeling import PeelStep

    if n < 1:
        raise ValueError("need at least one vertex")
    status = [VertexStatus.UNDETERMINED] * (n + 1)
    blue = [False] * (n + 1)
    blue[n] = True
    blue_members = [n]
    undetermined = n
    steps: list[PeelStep] = []
    active = 0
    inspections = 0
    root_last = 0
    ptr = 1
    while undetermined > 0:
        while status[ptr] != VertexStatus.UNDETERMINED:
            ptr += 1
        v = ptr
        inspections += 1
        if v == n:
            root_last = 1
            status[v] = VertexStatus.ACTIVE
            active += 1
            undetermined -= 1
            continue
        ell = len(blue_members)
        if rng.uniform() < (ell + 1) / n:
            w = blue_members[rng.integer(0, ell)]
        else:
            while True:
                w = rng.integer(1, n + 1)
                if not blue[w] and w != v:
                    break
        steps.append(PeelStep(peeled=v, parent=w, recolored_to_blue=blue[w]))
        if blue[w]:
            blue[v] = True
            blue_members.append(v)
        if status[w] == VertexStatus.UNDETERMINED:
            status[v] = VertexStatus.ACTIVE
            status[w] = VertexStatus.BLOCKED
            active += 1
            undetermined -= 2
        elif status[w] == VertexStatus.BLOCKED:
            status[v] = VertexStatus.ACTIVE
            active += 1
            undetermined -= 1
        else:
            status[v] = VertexStatus.BLOCKED
            undetermined -= 1
    outcome = GreedyOutcome(size=active, steps=inspections, root_last=root_last)
    return steps, outcome


# --------------------------------------------------------------------------
# The status Markov chain
# --------------------------------------------------------------------------

def chain_transitions(
    state: StatusCounts, n: int
) -> list[tuple[Fraction, StatusCounts]]:
    """Exact one-step law of the status chain from ``state``.

    Three regimes, depending on whether the root is still undetermined
    (no blue determined vertices yet) and on the undetermined count:

    * root undetermined, u >= 2: inspected vertex pairs with an
      undetermined white parent w.p. (u-2)/n, an active white parent
      w.p. aw/n, a blocked white parent w.p. bw/n, or connects to the
      root w.p. 2/n (two vertices leave undetermined in that case too);
    * root determined (ab >= 1 and bb >= 1), u >= 1: the white columns
      keep their weights with the pair column at (u-1)/n, and the blue
      parent columns weigh ab*(ab+bb+1)/((ab+bb)*n) (vertex joins blue
      blocked) and bb*(ab+bb+1)/((ab+bb)*n) (vertex joins blue active);
    * root undetermined and u == 1: deterministically the root activates.

    Probabilities always sum to exactly 1 (checked in integer arithmetic).
    """
    u, aw, bw, ab, bb = state
    if u < 1:
        raise ValueError("chain already absorbed")
    cols: list[tuple[Fraction, StatusCounts]] = []
    if ab == 0 and bb == 0:
        if u == 1:
            return [(Fraction(1), StatusCounts(0, aw, bw, 1, 0))]
        assert (u - 2) + aw + bw + 2 == n, "weights must sum to n"
        cols = [
            (Fraction(u - 2, n), StatusCounts(u - 2, aw + 1, bw + 1, 0, 0)),
            (Fraction(aw, n), StatusCounts(u - 1, aw, bw + 1, 0, 0)),
            (Fraction(bw, n), StatusCounts(u - 1, aw + 1, bw, 0, 0)),
            (Fraction(2, n), StatusCounts(u - 2, aw, bw, 1, 1)),
        ]
    else:
        if ab < 1 or bb < 1:
            raise ValueError("blue actives and blue blockeds appear together")
        c = ab + bb
        assert (u - 1) + aw + bw + c + 1 == n, "weights must sum to n"
        cols = [
            (Fraction(u - 1, n), StatusCounts(u - 2, aw + 1, bw + 1, ab, bb)),
            (Fraction(aw, n), StatusCounts(u - 1, aw, bw + 1, ab, bb)),
            (Fraction(bw, n), StatusCounts(u - 1, aw + 1, bw, ab, bb)),
            (Fraction(ab * (c + 1), c * n), StatusCounts(u - 1, aw, bw, ab, bb + 1)),
            (Fraction(bb * (c + 1), c * n), StatusCounts(u - 1, aw, bw, ab + 1, bb)),
        ]
    assert sum(p for p, _ in cols) == 1
    return [(p, s) for p, s in cols if p]


def status_chain_step(state: StatusCounts, n: int, rng: RandomSource) -> StatusCounts:
    """Sample one transition, consuming exactly one uniform draw."""
    u, aw, bw, ab, bb = state
    if u < 1:
        raise ValueError("chain already absorbed")
    if ab == 0 and bb == 0 and u == 1:
        return StatusCounts(0, aw, bw, 1, 0)
    x = rng.uniform()
    if ab == 0 and bb == 0:
        t1 = (u - 2) / n
        t2 = t1 + aw / n
        t3 = t2 + bw / n
        if x < t1:
            return StatusCounts(u - 2, aw + 1, bw + 1, 0, 0)
        if x < t2:
            return StatusCounts(u - 1, aw, bw + 1, 0, 0)
        if x < t3:
            return StatusCounts(u - 1, aw + 1, bw, 0, 0)
        return StatusCounts(u - 2, aw, bw, 1, 1)
    c = ab + bb
    t1 = (u - 1) / n
    t2 = t1 + aw / n
    t3 = t2 + bw / n
    t4 = t3 + ab * (c + 1) / (c * n)
    if x < t1:
        return StatusCounts(u - 2, aw + 1, bw + 1, ab, bb)
    if x < t2:
        return StatusCounts(u - 1, aw, bw + 1, ab, bb)
    if x < t3:
        return StatusCounts(u - 1, aw + 1, bw, ab, bb)
    if x < t4:
        return StatusCounts(u - 1, aw, bw, ab, bb + 1)
    return StatusCounts(u - 1, aw, bw, ab + 1, bb)


def simulate_status_chain(n: int, rng: RandomSource) -> GreedyOutcome:
    """One greedy outcome in O(stopping step) time and O(1) memory, no tree."""
    if n < 1:
        raise ValueError("need at least one vertex")
    state = StatusCounts(n, 0, 0, 0, 0)
    steps = 0
    root_last = 0
    while state.undetermined > 0:
        if state.active_blue == 0 and state.blocked_blue == 0 and state.undetermined == 1:
            root_last = 1
        state = status_chain_step(state, n, rng)
        steps += 1
    return GreedyOutcome(
        size=state.active_white + state.active_blue, steps=steps, root_last=root_last
    )


#: replicates per deterministic batch; a fixed block size keeps batched
#: results independent of how many workers process the blocks
CHAIN_BLOCK = 8192


def simulate_status_chain_many(
    n: int,
    replicates: int,
    rng: RandomSource,
    block: int = CHAIN_BLOCK,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized replicates of :func:`simulate_status_chain`.

    Returns (sizes, steps, root_last) arrays of length ``replicates``.
    Replicates are processed in fixed-size blocks, each driven by its own
    child stream ``rng.child(block_index)``, so results are bit-for-bit
    reproducible for a given (seed, n, replicates) regardless of worker
    count or block scheduling.
    """
    if n < 1 or replicates < 1:
        raise ValueError("need n >= 1 and replicates >= 1")
    sizes = np.empty(replicates, dtype=np.int64)
    steps = np.empty(replicates, dtype=np.int64)
    root_last = np.empty(replicates, dtype=np.int64)
    start = 0
    block_index = 0
    while start < replicates:
        w = min(block, replicates - start)
        g, t, e = _chain_block(n, w, rng.child(block_index).generator)
        sizes[start:start + w] = g
        steps[start:start + w] = t
        root_last[start:start + w] = e
        start += w
        block_index += 1
    return sizes, steps, root_last


def _chain_block(
    n: int, width: int, gen: np.random.Generator, draw_rows: int = 256
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    u = np.full(width, n, dtype=np.int64)
    aw = np.zeros(width, dtype=np.int64)
    bw = np.zeros(width, dtype=np.int64)
    ab = np.zeros(width, dtype=np.int64)
    bb = np.zeros(width, dtype=np.int64)
    theta = np.zeros(width, dtype=np.int64)
    last = np.zeros(width, dtype=bool)
    live = u > 0
    while live.any():
        uniforms = gen.random((draw_rows, width))
        for j in range(draw_rows):
            c = ab + bb
            pre = (c == 0) & (u >= 2) & live
            reg2 = (c > 0) & live
            reg3 = (c == 0) & (u == 1) & live
            csafe = np.maximum(c, 1)
            x = uniforms[j]
            # same threshold cascade as status_chain_step, vectorized
            t1 = np.where(pre, u - 2, np.where(reg2, u - 1, 0)) / n
            t2 = t1 + aw / n
            t3 = t2 + bw / n
            t4 = t3 + np.where(pre, 2.0 / n, ab * (c + 1) / (csafe * n))
            col = np.full(width, 4, dtype=np.int8)
            col[x < t4] = 3
            col[x < t3] = 2
            col[x < t2] = 1
            col[x < t1] = 0
            # pre-connection thresholds sum to 1 exactly in exact arithmetic;
            # guard against float dust pushing x past t4 there
            col[pre & (col == 4)] = 3
            col[reg3] = 5
            col[~live] = 6
            m = col == 0  # pair: v active, undetermined parent blocked
            u[m] -= 2
            aw[m] += 1
            bw[m] += 1
            m = col == 1  # active white parent: v blocked white
            u[m] -= 1
            bw[m] += 1
            m = col == 2  # blocked white parent: v active white
            u[m] -= 1
            aw[m] += 1
            m = (col == 3) & pre  # root connection
            u[m] -= 2
            ab[m] += 1
            bb[m] += 1
            m = (col == 3) & reg2  # active blue parent: v blocked blue
            u[m] -= 1
            bb[m] += 1
            m = col == 4  # blocked blue parent: v active blue
            u[m] -= 1
            ab[m] += 1
            m = col == 5  # root is the last undetermined vertex
            u[m] -= 1
            ab[m] += 1
            last[m] = True
            theta[live] += 1
            live = u > 0
            if not live.any():
                break
    return aw + ab, theta, last.astype(np.int64)


# --------------------------------------------------------------------------
# Exact law by dynamic programming
# --------------------------------------------------------------------------

class GreedyLaw:
    """Exact joint law of (size, steps, root_last) for the status chain.

    ``joint`` maps (size, steps, root_last) to an exact probability.
    """

    def __init__(self, n: int, joint: dict[tuple[int, int, int], Fraction]):
        self.n = n
        self.joint = joint
        total = sum(joint.values())
        if total != 1:
            raise AssertionError(f"law does not normalize: {total}")

    def _marginal(self, index: int) -> dict[int, Fraction]:
        out: dict[int, Fraction] = defaultdict(Fraction)
        for key, p in self.joint.items():
            out[key[index]] += p
        return dict(out)

    def size_law(self) -> dict[int, Fraction]:
        return self._marginal(0)

    def steps_law(self) -> dict[int, Fraction]:
        return self._marginal(1)

    def root_last_probability(self) -> Fraction:
        return sum(
            (p for k, p in self.joint.items() if k[2] == 1), start=Fraction(0)
        )

    def complement_law(self) -> dict[int, Fraction]:
        """Law of (n - size) + root_last."""
        out: dict[int, Fraction] = defaultdict(Fraction)
        for (g, _, e), p in self.joint.items():
            out[(self.n - g) + e] += p
        return dict(out)

    def size_mean(self) -> Fraction:
        return sum((Fraction(g) * p for g, p in self.size_law().items()),
                   start=Fraction(0))

    def size_variance(self) -> Fraction:
        m = self.size_mean()
        return sum(
            ((Fraction(g) - m) ** 2 * p for g, p in self.size_law().items()),
            start=Fraction(0),
        )

    def steps_mean(self) -> Fraction:
        return sum((Fraction(t) * p for t, p in self.steps_law().items()),
                   start=Fraction(0))

    def steps_variance(self) -> Fraction:
        m = self.steps_mean()
        return sum(
            ((Fraction(t) - m) ** 2 * p for t, p in self.steps_law().items()),
            start=Fraction(0),
        )


def _blue_split_weights(cmax: int) -> dict[int, dict[int, int]]:
    """Integer weights for the law of the blue-active count given c blues.

    After the root connection the blue pair starts at (1 active, 1 blocked)
    and each later blue arrival joins the opposite kind of its parent:
    given (a, c - a), the active count stays w.p. a/c and grows w.p.
    (c - a)/c.  Weights at c have denominator (c-1)!.
    """
    table = {2: {1: 1}}
    for c in range(2, cmax):
        nxt: dict[int, int] = defaultdict(int)
        for a, w in table[c].items():
            nxt[a] += w * a
            nxt[a + 1] += w * (c - a)
        table[c + 1] = dict(nxt)
    return table


def exact_chain_law(n: int, cap: int | None = None) -> GreedyLaw:
    """Exact joint law of (size, steps, root_last) by forward DP.

    The five counts reduce to the Markov triple (undetermined, active-white,
    blue-count): white counts determine each other through the total, and
    given the number of blue determined vertices the split into blue
    active / blue blocked is an independent exchange process
    (:func:`_blue_split_weights`).  Stepping synchronously keeps every live
    weight an integer over the common denominator n^step, so the whole DP
    runs in exact integer arithmetic; Fractions appear only in the final
    assembly.  Cross-checked against the full five-count chain and against
    exhaustive tree enumeration in the test suite.
    """
    limit = cap if cap is not None else int(os.environ.get("CAYLEY_GREEDY_CAP", 0) or DEFAULT_LAW_CAP)
    if n > limit:
        raise ValueError(f"n={n} above the exact-law cap {limit}")
    if n < 1:
        raise ValueError("need at least one vertex")
    if n == 1:
        return GreedyLaw(1, {(1, 1, 1): Fraction(1)})

    # states: (undetermined, active_white, blue_count) -> integer weight,
    # denominator n^step; blue_count == 1 only in the root-last terminal state
    states: dict[tuple[int, int, int], int] = {(n, 0, 0): 1}
    absorbed: dict[tuple[int, int, int], int] = defaultdict(int)
    step = 0
    while states:
        step += 1
        nxt: dict[tuple[int, int, int], int] = defaultdict(int)
        for (u, aw, c), w in states.items():
            bw = n - u - aw - c
            if c == 0:
                if u == 1:
                    absorbed[(aw, 1, step)] += w * n
                    continue
                if u > 2:
                    nxt[(u - 2, aw + 1, 0)] += w * (u - 2)
                nxt[(u - 2, aw, 2)] += w * 2
                if aw:
                    nxt[(u - 1, aw, 0)] += w * aw
                if bw:
                    nxt[(u - 1, aw + 1, 0)] += w * bw
            else:
                if u >= 2:
                    nxt[(u - 2, aw + 1, c)] += w * (u - 1)
                if aw:
                    nxt[(u - 1, aw, c)] += w * aw
                if bw:
                    nxt[(u - 1, aw + 1, c)] += w * bw
                nxt[(u - 1, aw, c + 1)] += w * (c + 1)
        states = {}
        for (u, aw, c), w in nxt.items():
            if u == 0:
                absorbed[(aw, c, step)] += w
            else:
                states[(u, aw, c)] = w

    cmax = max(c for (_, c, _) in absorbed)
    split = _blue_split_weights(max(cmax, 2) + 1)
    joint: dict[tuple[int, int, int], Fraction] = defaultdict(Fraction)
    for (aw, c, theta), w in absorbed.items():
        mass = Fraction(w, n ** theta)
        if c == 1:
            joint[(aw + 1, theta, 1)] += mass
        else:
            denom = math.factorial(c - 1)
            for a, wa in split[c].items():
                joint[(aw + a, theta, 0)] += mass * Fraction(wa, denom)
    return GreedyLaw(n, dict(joint))


def reference_chain_law(n: int) -> GreedyLaw:
    """Joint law from the full five-count chain, Fractions throughout.

    Slow but direct: used to cross-check :func:`exact_chain_law`.
    """
    if n == 1:
        return GreedyLaw(1, {(1, 1, 1): Fraction(1)})
    dist: dict[StatusCounts, Fraction] = {StatusCounts(n, 0, 0, 0, 0): Fraction(1)}
    joint: dict[tuple[int, int, int], Fraction] = defaultdict(Fraction)
    step = 0
    while dist:
        step += 1
        nxt: dict[StatusCounts, Fraction] = defaultdict(Fraction)
        for state, p in dist.items():
            root_last_here = (
                state.active_blue == 0
                and state.blocked_blue == 0
                and state.undetermined == 1
            )
            for q, target in chain_transitions(state, n):
                if target.undetermined == 0:
                    g = target.active_white + target.active_blue
                    joint[(g, step, int(root_last_here))] += p * q
                else:
                    nxt[target] += p * q
        dist = dict(nxt)
    return GreedyLaw(n, dict(joint))


def enumeration_law(n: int, cap: int | None = None) -> GreedyLaw:
    """Joint outcome law from exhaustive enumeration of all n^(n-2) trees."""
    counter: dict[tuple[int, int, int], int] = defaultdict(int)
    for tree in enumerate_all(n, cap=cap):
        out = greedy_peeling(tree)
        counter[(out.size, out.steps, out.root_last)] += 1
    total = tree_count(n)
    return GreedyLaw(n, {k: Fraction(v, total) for k, v in counter.items()})


def total_variation_exact(
    p: dict[int, Fraction], q: dict[int, Fraction]
) -> Fraction:
    support = set(p) | set(q)
    acc = Fraction(0)
    for k in support:
        acc += abs(p.get(k, Fraction(0)) - q.get(k, Fraction(0)))
    return acc / 2


@dataclass(frozen=True)
class SymmetryCheck:
    n: int
    tv: Fraction
    root_last_probability: Fraction


def verify_symmetry_exact(n: int, cross_check: bool = False) -> SymmetryCheck:
    """TV distance between law(size) and law((n - size) + root_last), exactly.

    The two laws agree exactly for every n.  With ``cross_check=True`` the
    DP joint law is additionally compared against exhaustive enumeration
    (practical for n <= 8).
    """
    law = exact_chain_law(n)
    if cross_check:
        enum = enumeration_law(n)
        if enum.joint != law.joint:
            raise AssertionError(f"DP law disagrees with enumeration at n={n}")
    tv = total_variation_exact(law.size_law(), law.complement_law())
    return SymmetryCheck(n=n, tv=tv, root_last_probability=law.root_last_probability())


def root_last_probability(n: int) -> Fraction:
    """Exact probability that the root ends up as the last undetermined vertex.

    For n >= 3 the value equals the survival expectation of the chain
    conditioned on never connecting the root (checked exactly here): each
    pre-connection step avoids the root with probability 1 - 2/n, and
    conditioning renormalizes every such step by the same factor.  The
    values converge to 1/4.
    """
    p = exact_chain_law(n).root_last_probability()
    if n >= 3:
        alt = _root_avoiding_survival(n)
        if alt != p:
            raise AssertionError(
                f"conditioned-chain identity failed at n={n}: {p} != {alt}"
            )
    return p


def _root_avoiding_survival(n: int) -> Fraction:
    """E[(1 - 2/n)^(T - 1)] for the chain conditioned to never connect the root.

    The conditioned chain lives on (undetermined, active-white) with column
    weights (u-2), aw, bw over the common denominator n - 2; with
    z = (n-2)/n the step-i contribution collapses to weight / n^i.
    """
    if n < 3:
        raise ValueError("conditioned chain needs n >= 3")
    states: dict[tuple[int, int], int] = {(n, 0): 1}
    acc = Fraction(0)
    step = 0
    while states:
        step += 1
        nxt: dict[tuple[int, int], int] = defaultdict(int)
        for (u, aw), w in states.items():
            bw = n - u - aw
            if u == 1:
                # terminal root activation: T = step, contributes z^(T-1)
                acc += Fraction(w, n ** (step - 1))
                continue
            if u > 2:
                nxt[(u - 2, aw + 1)] += w * (u - 2)
            if aw:
                nxt[(u - 1, aw)] += w * aw
            if bw:
                nxt[(u - 1, aw + 1)] += w * bw
        states = dict(nxt)
    return acc


# --------------------------------------------------------------------------
# Greedy matching and exact maximum independent set
# --------------------------------------------------------------------------

def greedy_matching(tree: CayleyTree, order: Sequence[int]) -> int:
    """Size of the maximal matching built greedily along ``order``.

    Edges are identified by their child vertex (1..n-1); an edge is kept
    whenever both endpoints are still unmatched.
    """
    n = tree.n
    if sorted(order) != list(range(1, n)):
        raise ValueError("order must be a permutation of the edge ids 1..n-1")
    matched = bytearray(n + 1)
    size = 0
    for v in order:
        p = tree.parent_of(v)
        if not matched[v] and not matched[p]:
            matched[v] = 1
            matched[p] = 1
            size += 1
    return size


def max_independent_set(tree: CayleyTree) -> int:
    """Exact maximum independent set size via the two-state tree DP."""
    n = tree.n
    if n == 1:
        return 1
    children = tree.children()
    # process vertices deepest-first so children are done before parents
    depth = [0] * (n + 1)
    order = [n]
    for i in range(n):
        v = order[i]
        for ch in children[v]:
            depth[ch] = depth[v] + 1
            order.append(ch)
    incl = [1] * (n + 1)
    excl = [0] * (n + 1)
    for v in reversed(order):
        for ch in children[v]:
            incl[v] += excl[ch]
            excl[v] += max(incl[ch], excl[ch])
    return max(incl[n], excl[n])


# --------------------------------------------------------------------------
# Outcome serialization
# --------------------------------------------------------------------------

OUTCOME_FIELDS = ["n", "replicate", "G", "theta", "E", "M", "maxIS"]


def write_outcomes_csv(rows: Iterable[dict], path: str) -> None:
    """Outcome table with columns n,replicate,G,theta,E,M,maxIS.

    Rows may omit fields; absent fields are left empty.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=OUTCOME_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in OUTCOME_FIELDS})


def law_to_json_dict(law: GreedyLaw) -> dict:
    """JSON-ready view: size law as {value: {"fraction": "p/q", "float": x}}."""

    def fmt(mapping: dict[int, Fraction]) -> dict[str, dict]:
        return {
            str(k): {"fraction": f"{v.numerator}/{v.denominator}", "float": float(v)}
            for k, v in sorted(mapping.items())
        }

    pe = law.root_last_probability()
    return {
        "n": law.n,
        "size_law": fmt(law.size_law()),
        "steps_law": fmt(law.steps_law()),
        "complement_law": fmt(law.complement_law()),
        "root_last_probability": {
            "fraction": f"{pe.numerator}/{pe.denominator}",
            "float": float(pe),
        },
    }
