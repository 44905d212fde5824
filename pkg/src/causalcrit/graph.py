"""Causal structures: DAGs with bidirected confounding arcs and graph-level queries.

A structure is immutable after construction; every query here is read-only.
Bidirected arcs encode correlated error terms between two endogenous nodes.
For all path algorithms they are expanded into an explicit latent common
parent, which gives one uniform d-separation procedure for the
semi-Markovian case.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional

import networkx as nx

from .errors import (
    CycleDetected,
    DuplicateNode,
    InvalidQuery,
    OverlappingSets,
    SelfLoop,
    UnknownEndpoint,
    UnknownNode,
)

__all__ = [
    "CausalStructure",
    "PathQueryResult",
    "build_structure",
    "d_separated",
    "backdoor_admissible",
    "enumerate_adjustment_sets",
    "do_surgery",
    "descendants",
    "ancestors",
]

# Direction tags for the reachability walk: _UP means the trail arrived at a
# node from one of its children, _DOWN from one of its parents.
_UP = 0
_DOWN = 1


@dataclass(frozen=True)
class CausalStructure:
    """A DAG over named nodes plus unordered bidirected confounding arcs."""

    nodes: tuple[str, ...]
    latent: frozenset[str]
    directed: frozenset[tuple[str, str]]
    bidirected: frozenset[frozenset[str]]

    @cached_property
    def _digraph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(sorted(self.directed))
        return g

    @cached_property
    def _expanded(self) -> nx.DiGraph:
        """Directed view with each bidirected arc replaced by a latent fork."""
        g = self._digraph.copy()
        for pair in self.bidirected:
            a, b = sorted(pair)
            hub = ("__confounder__", a, b)
            g.add_edge(hub, a)
            g.add_edge(hub, b)
        return g

    def ensure_nodes(self, names: Iterable[str]) -> None:
        for name in names:
            if name not in self._digraph:
                raise UnknownNode(f"unknown node {name!r}")

    def parents(self, node: str) -> frozenset[str]:
        self.ensure_nodes((node,))
        return frozenset(self._digraph.predecessors(node))

    def children(self, node: str) -> frozenset[str]:
        self.ensure_nodes((node,))
        return frozenset(self._digraph.successors(node))

    def topological_order(self) -> tuple[str, ...]:
        """Topological order of the directed part, name-sorted tie-break."""
        return tuple(nx.lexicographical_topological_sort(self._digraph))

    def is_markovian(self) -> bool:
        return not self.bidirected

    def confounded_with(self, node: str) -> frozenset[str]:
        return frozenset(
            next(iter(pair - {node})) for pair in self.bidirected if node in pair
        )


@dataclass(frozen=True)
class PathQueryResult:
    """Outcome of a d-separation query.

    ``witness_path`` is an unblocked path (as a node sequence alternating
    adjacent edges of the structure) and is present exactly when
    ``separated`` is False.
    """

    separated: bool
    witness_path: Optional[tuple[str, ...]] = None

    def __bool__(self) -> bool:
        return self.separated


def build_structure(
    nodes: Iterable[str],
    directed: Iterable[tuple[str, str]] = (),
    bidirected: Iterable[tuple[str, str]] = (),
    latent: Iterable[str] = (),
) -> CausalStructure:
    """Validate and build a causal structure.

    Raises
    ------
    DuplicateNode, UnknownEndpoint, SelfLoop, CycleDetected
    """
    node_list = list(nodes)
    seen: set[str] = set()
    for name in node_list:
        if not name:
            raise UnknownEndpoint("node names must be non-empty")
        if name in seen:
            raise DuplicateNode(f"node {name!r} declared twice")
        seen.add(name)

    latent_set = frozenset(latent)
    for name in latent_set:
        if name not in seen:
            raise UnknownEndpoint(f"latent flag on undeclared node {name!r}")

    directed_edges = set()
    for a, b in directed:
        if a not in seen or b not in seen:
            raise UnknownEndpoint(f"edge ({a!r}, {b!r}) uses an undeclared node")
        if a == b:
            raise SelfLoop(f"self-loop on {a!r}")
        directed_edges.add((a, b))

    bidirected_edges = set()
    for a, b in bidirected:
        if a not in seen or b not in seen:
            raise UnknownEndpoint(f"bidirected ({a!r}, {b!r}) uses an undeclared node")
        if a == b:
            raise SelfLoop(f"bidirected self-loop on {a!r}")
        if a in latent_set or b in latent_set:
            # Confounding arcs pair endogenous nodes; latent marking is the
            # per-node unobservability flag, not an error-term handle.
            raise UnknownEndpoint(
                f"bidirected ({a!r}, {b!r}) must connect non-latent endogenous nodes"
            )
        bidirected_edges.add(frozenset((a, b)))

    g = nx.DiGraph()
    g.add_nodes_from(node_list)
    g.add_edges_from(directed_edges)
    if not nx.is_directed_acyclic_graph(g):
        cycle = nx.find_cycle(g)
        as_text = " -> ".join(edge[0] for edge in cycle) + f" -> {cycle[0][0]}"
        raise CycleDetected(f"directed part contains a cycle: {as_text}")

    return CausalStructure(
        nodes=tuple(sorted(node_list)),
        latent=latent_set,
        directed=frozenset(directed_edges),
        bidirected=frozenset(bidirected_edges),
    )


def descendants(s: CausalStructure, node: str) -> frozenset[str]:
    """All nodes reachable from ``node`` along directed edges, excluding it."""
    s.ensure_nodes((node,))
    return frozenset(nx.descendants(s._digraph, node))


def ancestors(s: CausalStructure, node: str) -> frozenset[str]:
    s.ensure_nodes((node,))
    return frozenset(nx.ancestors(s._digraph, node))


def _reach_active(
    g: nx.DiGraph,
    sources: Iterable,
    targets: set,
    conditioned: set,
) -> Optional[list]:
    """Search for an active (unblocked) trail from ``sources`` to ``targets``.

    Standard two-direction reachability over (node, direction) states:
    chains and forks pass through nodes outside the conditioning set,
    colliders pass through nodes whose descendants meet it. Returns the node
    sequence of one active trail, or None if every trail is blocked.
    """
    cond_closure = set(conditioned)
    for z in conditioned:
        cond_closure.update(nx.ancestors(g, z))

    pred: dict[tuple, Optional[tuple]] = {}
    queue: deque[tuple] = deque()
    for src in sorted(sources, key=str):
        state = (src, _UP)
        if state not in pred:
            pred[state] = None
            queue.append(state)

    parents_of = g.predecessors
    children_of = g.successors

    def push(node, direction, origin) -> Optional[list]:
        state = (node, direction)
        if state in pred:
            return None
        pred[state] = origin
        if node in targets:
            trail = [node]
            cursor = origin
            while cursor is not None:
                trail.append(cursor[0])
                cursor = pred[cursor]
            trail.reverse()
            return trail
        queue.append(state)
        return None

    while queue:
        state = queue.popleft()
        node, direction = state
        if direction == _UP and node not in conditioned:
            for p in sorted(parents_of(node), key=str):
                found = push(p, _UP, state)
                if found:
                    return found
            for c in sorted(children_of(node), key=str):
                found = push(c, _DOWN, state)
                if found:
                    return found
        elif direction == _DOWN:
            if node not in conditioned:
                for c in sorted(children_of(node), key=str):
                    found = push(c, _DOWN, state)
                    if found:
                        return found
            if node in cond_closure:
                for p in sorted(parents_of(node), key=str):
                    found = push(p, _UP, state)
                    if found:
                        return found
    return None


def _collapse_hubs(trail: list) -> tuple[str, ...]:
    """Drop synthetic confounder hubs; a ... hub ... step becomes a bidirected hop."""
    return tuple(n for n in trail if isinstance(n, str))


def d_separated(
    s: CausalStructure,
    x: Iterable[str],
    y: Iterable[str],
    z: Iterable[str] = (),
) -> PathQueryResult:
    """Test whether ``z`` blocks every path between ``x`` and ``y``.

    Bidirected arcs are treated as latent forks. When the sets are not
    separated, the result carries one unblocked witness path.
    """
    x_set, y_set, z_set = set(x), set(y), set(z)
    s.ensure_nodes(x_set | y_set | z_set)
    if x_set & y_set or x_set & z_set or y_set & z_set:
        raise OverlappingSets("x, y and z must be pairwise disjoint")

    trail = _reach_active(s._expanded, x_set, y_set, z_set)
    if trail is None:
        return PathQueryResult(separated=True)
    return PathQueryResult(separated=False, witness_path=_collapse_hubs(trail))


def _is_dconnected(s: CausalStructure, x: set, y: set, z: set) -> bool:
    return _reach_active(s._expanded, x, y, z) is not None


def backdoor_admissible(
    s: CausalStructure,
    adjustment: Iterable[str],
    x: str,
    y: str,
) -> bool:
    """Back-door criterion: no member descends from ``x`` and the set blocks
    every path from ``x`` to ``y`` that enters ``x`` through an incoming arrow.

    Latent-flagged nodes are rejected as members (they cannot be measured,
    hence not adjusted for).
    """
    adj = set(adjustment)
    s.ensure_nodes(adj | {x, y})
    if adj & {x, y}:
        raise OverlappingSets("adjustment set must not contain x or y")
    if adj & s.latent:
        return False
    if adj & descendants(s, x):
        return False
    # Blocking every arrow-into-x path is equivalent to d-separation of x and
    # y once x's outgoing directed edges are removed; confounding arcs at x
    # stay, as they open back-door paths through the latent fork.
    pruned = s._expanded.copy()
    pruned.remove_edges_from([(x, c) for c in s.children(x)])
    return _reach_active(pruned, {x}, {y}, adj) is None


def do_surgery(s: CausalStructure, targets: Iterable[str]) -> CausalStructure:
    """Return a copy with every edge into each target removed.

    Both directed in-edges and bidirected arcs at a target are cut; the
    operation is idempotent.
    """
    target_set = set(targets)
    s.ensure_nodes(target_set)
    directed = frozenset(e for e in s.directed if e[1] not in target_set)
    bidirected = frozenset(p for p in s.bidirected if not (p & target_set))
    return CausalStructure(
        nodes=s.nodes, latent=s.latent, directed=directed, bidirected=bidirected
    )


def enumerate_adjustment_sets(
    s: CausalStructure,
    x: str,
    y: str,
    max_count: int,
    candidates: Optional[Iterable[str]] = None,
) -> list[frozenset[str]]:
    """Enumerate back-door admissible sets of non-latent nodes.

    Subsets of the candidate pool are scanned in (size ascending, then
    lexicographic by sorted member names) order and emitted when admissible,
    stopping after ``max_count``. The parent set of ``x`` is guaranteed to be
    included whenever all parents are non-latent (parents are always
    admissible in the Markovian case): if the scan is truncated before
    reaching it, it replaces the final slot.

    ``candidates`` optionally restricts the search pool (default: every
    non-latent node that is not ``x``, ``y`` or a descendant of ``x``); on
    large structures an unrestricted exhaustive scan is intractable, so
    callers scope the pool to the measurable variables of interest.
    """
    s.ensure_nodes({x, y})
    if x == y:
        raise InvalidQuery("x and y must differ")
    if x in s.latent or y in s.latent:
        raise InvalidQuery("x and y must be non-latent")
    if max_count <= 0:
        return []

    banned = descendants(s, x) | {x, y} | s.latent
    if candidates is None:
        pool = [n for n in s.nodes if n not in banned]
    else:
        cand = list(candidates)
        s.ensure_nodes(cand)
        pool = sorted(n for n in set(cand) if n not in banned)

    parent_set: Optional[frozenset[str]] = None
    graph_parents = s.parents(x)
    if not (graph_parents & s.latent) and not s.confounded_with(x):
        ps = frozenset(graph_parents)
        if not ps & {y} and backdoor_admissible(s, ps, x, y):
            parent_set = ps

    results: list[frozenset[str]] = []
    truncated = False
    for size in range(len(pool) + 1):
        for combo in itertools.combinations(pool, size):
            subset = frozenset(combo)
            if backdoor_admissible(s, subset, x, y):
                results.append(subset)
                if len(results) >= max_count:
                    truncated = True
                    break
        if truncated:
            break

    if parent_set is not None and parent_set not in results:
        if truncated and results:
            results[-1] = parent_set
        elif not truncated:
            # Pool excluded some parent (candidates restriction); append so
            # the guarantee holds regardless of scoping.
            if len(results) < max_count:
                results.append(parent_set)
            elif results:
                results[-1] = parent_set
    return results


