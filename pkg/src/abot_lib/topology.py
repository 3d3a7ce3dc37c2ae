# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

"""
Combinatorial types of transport networks.

A topology is a tree on nodes 0..T-1 (terminals, sources first then targets) and
T..T+S-1 (Steiner nodes of degree >= 3). Flows on a tree are fixed by the terminal
demands, so a topology plus node positions determines a network completely.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from src.constants import MAX_EXHAUSTIVE_TERMINALS, MERGE_ANGLE
from .errors import DomainError, SizeLimitError

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


def _normalize_edges(edges) -> Tuple[Edge, ...]:
    return tuple(sorted((min(int(u), int(v)), max(int(u), int(v))) for u, v in edges))


@dataclass(frozen=True)
class Topology:
    """
    Tree topology over terminals and Steiner nodes.

    Attributes:
        n_terminals: Number of terminal nodes (ids 0..n_terminals-1)
        n_steiner: Number of Steiner nodes (ids n_terminals..n_terminals+n_steiner-1)
        edges: Undirected edges (u, v) with u < v, sorted
    """

    n_terminals: int
    n_steiner: int
    edges: Tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, 'edges', _normalize_edges(self.edges))
        n_nodes = self.n_nodes
        if self.n_terminals < 1:
            raise DomainError("A topology needs at least one terminal")
        if len(self.edges) != n_nodes - 1:
            raise DomainError(f"A tree on {n_nodes} nodes has {n_nodes - 1} edges, got {len(self.edges)}")
        G = self.graph()
        if n_nodes > 1 and not nx.is_tree(G):
            raise DomainError("Topology edges do not form a tree")
        for s in range(self.n_terminals, n_nodes):
            if G.degree[s] < 3:
                raise DomainError(f"Steiner node {s} has degree {G.degree[s]} < 3")

    @property
    def n_nodes(self) -> int:
        return self.n_terminals + self.n_steiner

    def is_steiner(self, node: int) -> bool:
        return node >= self.n_terminals

    def graph(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(range(self.n_nodes))
        G.add_edges_from(self.edges)
        return G

    def flows(self, demands: Sequence[float]) -> Dict[Edge, float]:
        """
        Multiplicities forced by conservation.

        Args:
            demands: Net inflow required at each terminal (negative at sources)

        Returns:
            For each edge (u, v) with u < v, the flow from u to v
        """
        d = np.zeros(self.n_nodes)
        d[:self.n_terminals] = np.asarray(demands, dtype=float)
        if self.n_nodes == 1:
            return {}
        G = self.graph()
        parent = nx.dfs_predecessors(G, source=0)
        order = list(nx.dfs_preorder_nodes(G, source=0))
        subtree = d.copy()
        for node in reversed(order[1:]):
            subtree[parent[node]] += subtree[node]

        result: Dict[Edge, float] = {}
        for node in order[1:]:
            p = parent[node]
            # flow p -> node supplies the subtree below node
            result[(min(p, node), max(p, node))] = subtree[node] if p < node else -subtree[node]
        return result

    def encoding(self) -> tuple:
        """
        Canonical form up to relabeling of Steiner nodes: the tree rooted at terminal 0,
        with terminals labeled and Steiner nodes anonymous, children sorted.
        """
        G = self.graph()

        def encode(node: int, parent: Optional[int]) -> tuple:
            label = ('t', node) if node < self.n_terminals else ('s',)
            children = sorted(encode(c, node) for c in G.neighbors(node) if c != parent)
            return (label, tuple(children))

        return encode(0, None)

    def canonical(self) -> 'Topology':
        """Relabel Steiner nodes in the traversal order of the canonical encoding."""
        edges: List[Edge] = []
        next_id = [self.n_terminals]

        def build(code: tuple) -> int:
            label, children = code
            if label[0] == 't':
                node = label[1]
            else:
                node = next_id[0]
                next_id[0] += 1
            for child in children:
                edges.append((node, build(child)))
            return node

        build(self.encoding())
        return Topology(self.n_terminals, self.n_steiner, tuple(edges))

    def degree(self, node: int) -> int:
        return sum(1 for e in self.edges if node in e)

    def neighbors(self, node: int) -> List[int]:
        return sorted(v if u == node else u for u, v in self.edges if node in (u, v))

    def to_json(self) -> Dict:
        return {
            'n_terminals': self.n_terminals,
            'n_steiner': self.n_steiner,
            'edges': [list(e) for e in self.edges],
        }


def _relabel_steiner(n_terminals: int, edges: Sequence[Edge]) -> Topology:
    """Build a topology from edges whose Steiner ids may have gaps."""
    nodes = sorted({n for e in edges for n in e if n >= n_terminals})
    mapping = {old: n_terminals + i for i, old in enumerate(nodes)}
    relabeled = [(mapping.get(u, u), mapping.get(v, v)) for u, v in edges]
    return Topology(n_terminals, len(nodes), tuple(relabeled)).canonical()


def insertions(edges: Sequence[Edge], n_terminals: int, terminal: int, n_steiner: int,
               max_steiner: int) -> List[List[Edge]]:
    """
    Every way to add `terminal` to a tree: attach it as a leaf, subdivide an edge with it,
    subdivide an edge with a new Steiner node carrying it, or let it replace a Steiner node.
    """
    edges = list(edges)
    nodes = sorted({n for e in edges for n in e}) or [0]
    fresh = max(nodes + [n_terminals - 1]) + 1
    out: List[List[Edge]] = []
    for x in nodes:
        out.append(edges + [(x, terminal)])
    for i, (u, v) in enumerate(edges):
        rest = edges[:i] + edges[i + 1:]
        out.append(rest + [(u, terminal), (terminal, v)])
        if n_steiner < max_steiner:
            out.append(rest + [(u, fresh), (fresh, v), (fresh, terminal)])
    for s in nodes:
        if s >= n_terminals:
            out.append([(terminal if a == s else a, terminal if b == s else b) for a, b in edges])
    return out


def enumerate_topologies(n_terminals: int, max_steiner: Optional[int] = None) -> List[Topology]:
    """
    All tree topologies on n_terminals terminals with at most max_steiner Steiner nodes
    of degree >= 3, deduplicated up to Steiner relabeling and sorted by encoding.

    Terminals are inserted one at a time; removing the last terminal from any valid tree
    (turning it into a Steiner node when it branches, contracting a Steiner node left with
    degree 2) gives a valid smaller tree, so insertion reaches every topology. A later
    insertion removes at most one Steiner node, which bounds the intermediate trees kept.

    Raises:
        SizeLimitError: If n_terminals exceeds the exhaustive limit
    """
    if n_terminals > MAX_EXHAUSTIVE_TERMINALS:
        raise SizeLimitError(f"Exhaustive enumeration supports at most {MAX_EXHAUSTIVE_TERMINALS} terminals, "
                             f"got {n_terminals}")
    if n_terminals < 1:
        raise DomainError("At least one terminal is required")
    if max_steiner is None:
        max_steiner = max(0, n_terminals - 2)
    max_steiner = max(0, min(max_steiner, max(0, n_terminals - 2)))

    if n_terminals == 1:
        return [Topology(1, 0, ())]

    level: Dict[tuple, Topology] = {}
    current: List[Tuple[Tuple[Edge, ...], int]] = [(((0, 1),), 0)]
    for terminal in range(2, n_terminals):
        seen: Dict[tuple, Tuple[Tuple[Edge, ...], int]] = {}
        remaining = n_terminals - 1 - terminal
        for edges, n_steiner in current:
            for candidate in insertions(edges, n_terminals, terminal, n_steiner, max_steiner + remaining):
                partial = _partial_canonical(candidate, n_terminals)
                if partial is None or partial[2] > max_steiner + remaining:
                    continue
                if partial[0] not in seen:
                    seen[partial[0]] = (partial[1], partial[2])
        current = [seen[k] for k in sorted(seen)]
        logger.debug(f"{len(current)} topologies after inserting terminal {terminal}")

    for edges, n_steiner in current:
        topo = _relabel_steiner(n_terminals, edges)
        level[topo.encoding()] = topo
    return [level[k] for k in sorted(level)]


def _partial_canonical(edges: Sequence[Edge], n_terminals: int):
    """Canonical key of a partial tree rooted at terminal 0 (Steiner ids >= n_terminals)."""
    G = nx.Graph()
    G.add_edges_from(edges)
    for node in G.nodes:
        if node >= n_terminals and G.degree[node] < 3:
            return None

    def encode(node: int, parent: Optional[int]) -> tuple:
        label = ('t', node) if node < n_terminals else ('s',)
        return (label, tuple(sorted(encode(c, node) for c in G.neighbors(node) if c != parent)))

    key = encode(0, None)
    steiner = sorted(n for n in G.nodes if n >= n_terminals)
    mapping = {old: n_terminals + i for i, old in enumerate(steiner)}
    relabeled = tuple(sorted((min(mapping.get(u, u), mapping.get(v, v)), max(mapping.get(u, u), mapping.get(v, v)))
                             for u, v in edges))
    return key, relabeled, len(steiner)


def star_topology(n_terminals: int) -> Topology:
    """One Steiner node joined to every terminal."""
    if n_terminals < 3:
        return path_topology(n_terminals)
    s = n_terminals
    return Topology(n_terminals, 1, tuple((t, s) for t in range(n_terminals)))


def path_topology(n_terminals: int) -> Topology:
    return Topology(n_terminals, 0, tuple((t, t + 1) for t in range(n_terminals - 1)))


def topology_from_pairs(n_terminals: int, pairs: Sequence[Edge]) -> Topology:
    """
    Spanning tree over terminals from a forest of terminal pairs: components are joined
    through their smallest terminals, which carry zero flow on balanced components.
    """
    G = nx.Graph()
    G.add_nodes_from(range(n_terminals))
    for u, v in pairs:
        if u != v and not G.has_edge(u, v) and not nx.has_path(G, u, v):
            G.add_edge(u, v)
    components = sorted(min(c) for c in nx.connected_components(G))
    for a, b in zip(components[:-1], components[1:]):
        G.add_edge(a, b)
    return Topology(n_terminals, 0, tuple(G.edges))


def random_topology(n_terminals: int, max_steiner: int, rng: np.random.Generator) -> Topology:
    """Insert terminals one by one, picking each insertion uniformly at random."""
    if n_terminals <= 2:
        return path_topology(n_terminals)
    edges: List[Edge] = [(0, 1)]
    for terminal in range(2, n_terminals):
        options = []
        n_steiner = sum(1 for n in {n for e in edges for n in e} if n >= n_terminals)
        for candidate in insertions(edges, n_terminals, terminal, n_steiner, max_steiner):
            partial = _partial_canonical(candidate, n_terminals)
            if partial is not None:
                options.append(partial[1])
        edges = list(options[int(rng.integers(len(options)))])
    return _relabel_steiner(n_terminals, edges)


def contract_node(topology: Topology, node: int, into: int) -> Topology:
    """Merge a Steiner node into one of its neighbors."""
    if not topology.is_steiner(node):
        raise DomainError(f"Node {node} is not a Steiner node")
    edges = []
    for u, v in topology.edges:
        if {u, v} == {node, into}:
            continue
        edges.append((into if u == node else u, into if v == node else v))
    return _relabel_steiner(topology.n_terminals, _drop_degree_two(topology.n_terminals, edges))


def _drop_degree_two(n_terminals: int, edges: List[Edge]) -> List[Edge]:
    """Splice out Steiner nodes of degree two; they carry no branching."""
    changed = True
    while changed:
        changed = False
        G = nx.Graph()
        G.add_edges_from(edges)
        for node in sorted(G.nodes):
            if node >= n_terminals and G.degree[node] <= 2:
                nbrs = sorted(G.neighbors(node))
                G.remove_node(node)
                if len(nbrs) == 2:
                    G.add_edge(nbrs[0], nbrs[1])
                edges = list(G.edges)
                changed = True
                break
    return edges


def parallel_edge_pairs(topology: Topology, positions: np.ndarray,
                        angle: float = MERGE_ANGLE) -> List[Tuple[int, int, int]]:
    """
    Pairs of edges leaving one vertex in nearly the same direction.

    Args:
        topology: Tree topology
        positions: (n_nodes, dim) node positions, terminals first
        angle: Largest angle in radians between the two edge directions

    Returns:
        Triples (x, u, v) with u < v neighbors of x, sorted by the angle at x
    """
    X = np.asarray(positions, dtype=float)
    if X.shape[0] != topology.n_nodes:
        raise DomainError(f"Expected {topology.n_nodes} node positions, got {X.shape[0]}")
    found = []
    for x in range(topology.n_nodes):
        nbrs = topology.neighbors(x)
        for i in range(len(nbrs)):
            for j in range(i + 1, len(nbrs)):
                a, b = X[nbrs[i]] - X[x], X[nbrs[j]] - X[x]
                na, nb = np.linalg.norm(a), np.linalg.norm(b)
                # collapsed nodes have no direction
                if na == 0 or nb == 0:
                    continue
                gap = float(np.arccos(np.clip(a @ b / (na * nb), -1.0, 1.0)))
                if gap <= angle:
                    found.append((gap, x, nbrs[i], nbrs[j]))
    return [(x, u, v) for _, x, u, v in sorted(found)]


def neighbor_topologies(topology: Topology, max_steiner: int,
                        collapsed: Sequence[Tuple[int, int]] = (),
                        positions: Optional[np.ndarray] = None) -> List[Tuple[str, Topology]]:
    """
    Local moves on a topology, each tagged with its name.

    Moves: merge two nearly parallel edges leaving one vertex into a shared trunk (needs
    `positions`, listed first), insert a Steiner node on a pair of edges sharing a vertex,
    contract a collapsed Steiner node into the neighbor it landed on, and reroute one
    terminal (detach it and insert it anywhere else). A merge and an insertion on the same
    vertex pair give the same topology; the merge tag wins.
    """
    T = topology.n_terminals
    out: List[Tuple[str, Topology]] = []
    seen = {topology.encoding()}

    def push(name: str, edges: Sequence[Edge]) -> None:
        try:
            topo = _relabel_steiner(T, _drop_degree_two(T, list(edges)))
        except DomainError:
            return
        if topo.n_steiner > max_steiner:
            return
        key = topo.encoding()
        if key not in seen:
            seen.add(key)
            out.append((name, topo))

    def split(x: int, u: int, v: int) -> List[Edge]:
        fresh = topology.n_nodes
        edges = [e for e in topology.edges if e not in ((min(x, u), max(x, u)), (min(x, v), max(x, v)))]
        return edges + [(u, fresh), (v, fresh), (x, fresh)]

    def can_split(x: int) -> bool:
        degree = len(topology.neighbors(x))
        return degree >= 2 and not (topology.is_steiner(x) and degree < 4)

    if positions is not None and topology.n_steiner < max_steiner:
        for x, u, v in parallel_edge_pairs(topology, positions):
            if can_split(x):
                push('merge_parallel', split(x, u, v))

    for s, target in collapsed:
        if topology.is_steiner(s):
            topo = contract_node(topology, s, target)
            key = topo.encoding()
            if key not in seen:
                seen.add(key)
                out.append(('contract', topo))

    if topology.n_steiner < max_steiner:
        for x in range(topology.n_nodes):
            if not can_split(x):
                continue
            nbrs = topology.neighbors(x)
            for i in range(len(nbrs)):
                for j in range(i + 1, len(nbrs)):
                    push('insert_steiner', split(x, nbrs[i], nbrs[j]))

    if T <= 2:
        return out
    for t in range(T):
        rest = [e for e in topology.edges if t not in e]
        nbrs = topology.neighbors(t)
        # reconnect the pieces left behind through the first neighbor
        for other in nbrs[1:]:
            rest.append((nbrs[0], other))
        rest = _drop_degree_two(T, rest)
        n_steiner = sum(1 for n in {n for e in rest for n in e} if n >= T)
        for candidate in insertions(rest, T, t, n_steiner, max_steiner):
            push('reroute', candidate)
    return out
