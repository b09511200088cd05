"""Exact minimum-entropy coupling for small instances.

Entropy is concave, so its minimum over the coupling polytope sits at a
vertex. Vertices are generated by repeatedly picking a cell whose
coordinates all have residual mass, assigning it the smallest of those
residuals, and recursing. For two marginals every vertex of the
transportation polytope arises this way, so an exhaustive run is exact;
for three or more the result is reported as best found.

All arithmetic is rational. Float instances are rounded to multiples of
``1e-12`` first.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import DEFAULT_TOL, Coupling, Instance, Tolerances, entropy, to_exact
from .errors import BoundViolation, CapExceeded, PreconditionViolated
from .greedy import LOG2_E, greedy_couple
from .majorization import meet

log = logging.getLogger(__name__)

DEFAULT_NODE_CAP = 10**7


@dataclass(frozen=True)
class OracleResult:
    best_entropy: float
    best_coupling: Coupling
    nodes_explored: int
    exhaustive: bool

    @property
    def certified_optimal(self) -> bool:
        """Exhaustive and with at most two marginals, so the value is the optimum."""
        return self.exhaustive and self.best_coupling.instance.m <= 2


class _Enumeration:
    """Every partial coupling reachable by the pick-a-cell rule, deduplicated."""

    def __init__(self, S: Instance, node_cap: int):
        self.S = S
        self.node_cap = node_cap
        self.nodes = 0
        self.stopped = False
        self.seen: set = set()
        self.vertices: set = set()

    def run(self):
        residual = [list(p.probs) for p in self.S]
        self._visit(residual, ())

    def _visit(self, residual, cells):
        if self.stopped:
            return
        self.nodes += 1
        if self.nodes > self.node_cap:
            self.stopped = True
            return
        live = [[k for k, x in enumerate(row) if x > 0] for row in residual]
        if not live[0]:
            self.vertices.add(frozenset(cells))
            return
        for idx in itertools.product(*live):
            u = min(row[k] for row, k in zip(residual, idx))
            new_cells = cells + ((idx, u),)
            key = frozenset(new_cells)
            if key in self.seen:
                continue
            self.seen.add(key)
            for row, k in zip(residual, idx):
                row[k] -= u
            self._visit(residual, new_cells)
            for row, k in zip(residual, idx):
                row[k] += u
            if self.stopped:
                return


class _BranchAndBound:
    """Depth-first search over pick orders with two cuts.

    * A residual state already reached with no larger partial entropy is
      skipped (its completions were explored from there).
    * Whatever is still unassigned, total mass ``R``, must couple the
      residual marginals, so it adds at least ``R * H(meet of normalized
      residuals) - R * log2(R)`` bits. Branches whose partial entropy plus
      that bound cannot beat the incumbent are cut.

    Masses are integer numerators over a common denominator, which hash and
    compare much faster than Fractions.
    """

    def __init__(self, S: Instance, node_cap: int, deadline: Optional[float]):
        self.node_cap = node_cap
        self.deadline = deadline
        self.nodes = 0
        self.stopped = False
        self.denom = math.lcm(*(x.denominator for p in S for x in p.probs))
        self.root = tuple(tuple(int(x * self.denom) for x in p.probs) for p in S)
        self.log_denom = math.log2(self.denom)
        self.seen: dict = {}
        self.best = math.inf
        self.best_cells: Optional[tuple] = None

    def plogp(self, c: int) -> float:
        return -(c / self.denom) * (math.log2(c) - self.log_denom)

    def completion_bound(self, state) -> float:
        rows = [sorted((x for x in row if x > 0), reverse=True) for row in state]
        total = sum(rows[0])
        n = max(len(r) for r in rows)
        sums = [0] * len(rows)
        prev = 0
        h = 0.0
        for j in range(n):
            for r, row in enumerate(rows):
                if j < len(row):
                    sums[r] += row[j]
            cur = min(sums)
            y = (cur - prev) / total
            if y > 0:
                h -= y * math.log2(y)
            prev = cur
        mass = total / self.denom
        return mass * h - mass * math.log2(mass)

    def run(self):
        self._visit(self.root, (), 0.0, None)

    def _visit(self, state, cells, partial, last):
        if self.stopped:
            return
        self.nodes += 1
        if self.nodes > self.node_cap or (
            self.deadline is not None and self.nodes % 4096 == 0 and time.monotonic() > self.deadline
        ):
            self.stopped = True
            return
        live = [[k for k, x in enumerate(row) if x > 0] for row in state]
        if not live[0]:
            if partial < self.best:
                self.best, self.best_cells = partial, cells
            return
        if partial + self.completion_bound(state) >= self.best - _CUT_SLACK:
            return
        children = []
        for idx in itertools.product(*live):
            u = min(row[k] for row, k in zip(state, idx))
            children.append((-u, idx))
        children.sort()
        for neg_u, idx in children:
            # picks on disjoint coordinates commute; keep one order of each such pair
            if last is not None and idx < last and all(a != b for a, b in zip(idx, last)):
                continue
            u = -neg_u
            nxt = tuple(
                row[:k] + (row[k] - u,) + row[k + 1 :] for row, k in zip(state, idx)
            )
            p = partial + self.plogp(u)
            if self.seen.get(nxt, math.inf) <= p:
                continue
            self.seen[nxt] = p
            self._visit(nxt, cells + ((idx, Fraction(u, self.denom)),), p, idx)
            if self.stopped:
                return


# cuts need to clear the incumbent by more than float noise
_CUT_SLACK = 1e-12


def exact_mec(
    S: Instance,
    node_cap: int = DEFAULT_NODE_CAP,
    time_limit: Optional[float] = None,
    strict: bool = False,
) -> OracleResult:
    """Minimum entropy over the couplings the pick-a-cell rule generates.

    ``nodes_explored`` counts search nodes. When the node cap or
    ``time_limit`` (seconds) is hit, the best coupling found so far is
    returned with ``exhaustive=False``; with ``strict`` a
    :class:`CapExceeded` is raised instead.
    """
    S = to_exact(S)
    deadline = time.monotonic() + time_limit if time_limit is not None else None
    search = _BranchAndBound(S, node_cap, deadline)
    search.run()
    if search.stopped:
        msg = f"oracle stopped after {search.nodes} nodes"
        if strict or search.best_cells is None:
            raise CapExceeded(msg)
        log.warning("%s; returning best found", msg)
    coupling = _ordered_coupling(search.best_cells, S)
    return OracleResult(entropy(coupling), coupling, search.nodes, not search.stopped)


def _ordered_coupling(cells, S: Instance) -> Coupling:
    return Coupling(tuple(sorted(cells, key=lambda c: (-c[1], c[0]))), S)


def enumerate_vertex_couplings(S: Instance, node_cap: int = DEFAULT_NODE_CAP) -> set[frozenset]:
    """Every complete coupling the pick-a-cell rule can produce, as sets of
    ``(cell, mass)`` pairs. No pruning; meant for tiny instances."""
    S = to_exact(S)
    search = _Enumeration(S, node_cap)
    search.run()
    if search.stopped:
        raise CapExceeded(f"enumeration stopped after {search.nodes} nodes")
    return search.vertices


def transportation_vertices(S: Instance) -> set[frozenset]:
    """Vertices of a two-marginal transportation polytope from its bases.

    A basis is a spanning tree of the bipartite graph on the rows and columns
    with positive mass; its cell values are forced by peeling leaves. Trees
    whose forced values are all nonnegative give the vertices (degenerate
    ones repeat, hence the set).
    """
    if S.m != 2:
        raise PreconditionViolated("transportation vertices need exactly two marginals")
    S = to_exact(S)
    a, b = S.marginals
    rows = [i for i, x in enumerate(a.probs) if x > 0]
    cols = [j for j, x in enumerate(b.probs) if x > 0]
    edges = [(i, j) for i in rows for j in cols]
    size = len(rows) + len(cols) - 1
    out = set()
    for tree in itertools.combinations(edges, size):
        values = _solve_tree(tree, a.probs, b.probs, rows, cols)
        if values is None or any(v < 0 for v in values.values()):
            continue
        out.add(frozenset((cell, v) for cell, v in values.items() if v > 0))
    return out


def _solve_tree(tree, a, b, rows, cols):
    need = {("r", i): a[i] for i in rows}
    need.update({("c", j): b[j] for j in cols})
    adj: dict = {node: set() for node in need}
    for i, j in tree:
        adj[("r", i)].add(("c", j))
        adj[("c", j)].add(("r", i))
    values = {}
    leaves = [node for node, nb in adj.items() if len(nb) == 1]
    while leaves:
        node = leaves.pop()
        if len(adj[node]) != 1:
            continue
        (other,) = adj[node]
        v = need[node]
        cell = (node[1], other[1]) if node[0] == "r" else (other[1], node[1])
        values[cell] = v
        need[other] -= v
        need[node] = 0
        adj[node].clear()
        adj[other].discard(node)
        if len(adj[other]) == 1:
            leaves.append(other)
    # a spanning tree peels completely; a cycle (hence a disconnected forest) does not
    if len(values) != len(tree):
        return None
    return values


@dataclass(frozen=True)
class OracleComparison:
    greedy_entropy: float
    optimum_entropy: float
    meet_entropy: float
    m: int

    @property
    def difference(self) -> float:
        return self.greedy_entropy - self.optimum_entropy


def compare_greedy_to_oracle(
    S: Instance, result: Optional[OracleResult] = None, tol: Tolerances = DEFAULT_TOL
) -> OracleComparison:
    """Greedy entropy minus the exact optimum, with the bracketing checks.

    Both run on the same rationalized instance.

    Raises:
        PreconditionViolated: the oracle run was not exhaustive.
        BoundViolation: the meet, optimum and greedy entropies are out of
            order, or greedy exceeds the optimum by more than ``log2(e)``
            (more than 1 when ``m == 2``).
    """
    S = to_exact(S)
    if result is None:
        result = exact_mec(S)
    if not result.exhaustive:
        raise PreconditionViolated("oracle enumeration did not complete")
    hg = entropy(greedy_couple(S, tol).coupling)
    hm = entropy(meet(S).meet)
    h_opt = result.best_entropy
    cmp = OracleComparison(hg, h_opt, hm, S.m)
    if not hm - tol.compare <= h_opt <= hg + tol.compare:
        raise BoundViolation(f"bracketing fails: H(meet)={hm!r}, OPT={h_opt!r}, greedy={hg!r}")
    limit = 1.0 if S.m == 2 else LOG2_E
    if cmp.difference > limit + tol.compare:
        raise BoundViolation(f"greedy exceeds optimum by {cmp.difference!r} > {limit}")
    return cmp
