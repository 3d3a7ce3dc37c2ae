# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

import numpy as np
import pytest

from src.abot_lib.errors import DomainError, SizeLimitError
from src.abot_lib.topology import (Topology, contract_node, enumerate_topologies, neighbor_topologies,
                                   parallel_edge_pairs, path_topology, random_topology, star_topology,
                                   topology_from_pairs)


@pytest.mark.parametrize("n_terminals,max_steiner,expected", [
    (1, None, 1),
    (2, None, 1),
    (3, None, 4),
    (3, 0, 3),
    (4, 0, 16),
    (4, None, 32),
])
def test_topology_counts(n_terminals, max_steiner, expected):
    topologies = enumerate_topologies(n_terminals, max_steiner)
    assert len(topologies) == expected
    assert len({t.encoding() for t in topologies}) == expected


def test_enumeration_is_sorted_and_valid():
    topologies = enumerate_topologies(4)
    encodings = [t.encoding() for t in topologies]
    assert encodings == sorted(encodings)
    for t in topologies:
        assert t.n_steiner <= 2
        assert all(t.degree(s) >= 3 for s in range(t.n_terminals, t.n_nodes))


def test_full_steiner_topologies_of_four_terminals():
    full = [t for t in enumerate_topologies(4) if t.n_steiner == 2]
    assert len(full) == 3


def test_enumeration_size_limit():
    with pytest.raises(SizeLimitError):
        enumerate_topologies(7)
    with pytest.raises(DomainError):
        enumerate_topologies(0)


def test_star_flows():
    star = star_topology(3)
    assert star.flows([-1.0, -1.0, 2.0]) == {(0, 3): 1.0, (1, 3): 1.0, (2, 3): -2.0}


def test_path_flows_balance():
    flows = path_topology(4).flows([-1.0, 2.0, -2.0, 1.0])
    assert flows == {(0, 1): 1.0, (1, 2): -1.0, (2, 3): 1.0}


def test_encoding_ignores_steiner_labels():
    a = Topology(4, 2, ((0, 4), (1, 4), (4, 5), (2, 5), (3, 5)))
    b = Topology(4, 2, ((0, 5), (1, 5), (4, 5), (2, 4), (3, 4)))
    assert a.encoding() == b.encoding()
    assert a.canonical().edges == b.canonical().edges
    c = Topology(4, 2, ((0, 4), (2, 4), (4, 5), (1, 5), (3, 5)))
    assert a.encoding() != c.encoding()


def test_invalid_topologies():
    with pytest.raises(DomainError):
        Topology(2, 1, ((0, 2), (1, 2)))
    with pytest.raises(DomainError):
        Topology(3, 0, ((0, 1),))
    with pytest.raises(DomainError):
        Topology(3, 0, ((0, 1), (1, 2), (0, 2)))


def test_topology_from_pairs_joins_components():
    topo = topology_from_pairs(4, [(0, 2), (1, 3)])
    assert topo.n_steiner == 0
    assert set(topo.edges) == {(0, 2), (1, 3), (0, 1)}
    flows = topo.flows([-1.0, -1.0, 1.0, 1.0])
    assert flows[(0, 1)] == 0.0


def test_random_topology_is_reproducible(rng):
    first = random_topology(5, 3, np.random.default_rng(7))
    second = random_topology(5, 3, np.random.default_rng(7))
    assert first.encoding() == second.encoding()
    assert random_topology(5, 0, rng).n_steiner == 0


def test_contract_node():
    star = star_topology(3)
    contracted = contract_node(star, 3, 2)
    assert contracted.n_steiner == 0
    assert set(contracted.edges) == {(0, 2), (1, 2)}
    with pytest.raises(DomainError):
        contract_node(star, 0, 3)


def test_neighbor_moves():
    moves = neighbor_topologies(path_topology(3), max_steiner=1)
    names = {name for name, _ in moves}
    assert 'insert_steiner' in names
    assert any(t.n_steiner == 1 for _, t in moves)
    assert len({t.encoding() for _, t in moves}) == len(moves)
    contracted = neighbor_topologies(star_topology(3), max_steiner=1, collapsed=[(3, 2)])
    assert contracted[0][0] == 'contract'


def fan(spread):
    """Terminal 1 at the origin, terminals 0 and 2 to its right at +-spread."""
    return np.array([[1.0, spread], [0.0, 0.0], [1.0, -spread]])


def test_parallel_edge_pairs():
    assert parallel_edge_pairs(path_topology(3), fan(0.1)) == [(1, 0, 2)]
    assert parallel_edge_pairs(path_topology(3), fan(2.0)) == []
    with pytest.raises(DomainError):
        parallel_edge_pairs(path_topology(3), fan(0.1)[:2])


def test_merge_parallel_move_comes_first():
    moves = neighbor_topologies(path_topology(3), max_steiner=1, positions=fan(0.1))
    name, merged = moves[0]
    assert name == 'merge_parallel'
    assert merged.encoding() == star_topology(3).encoding()
    assert sum(1 for n, _ in moves if n == 'merge_parallel') == 1
    assert 'merge_parallel' not in {n for n, _ in neighbor_topologies(path_topology(3), max_steiner=1)}
    assert 'merge_parallel' not in {n for n, _ in neighbor_topologies(path_topology(3), 1, positions=fan(2.0))}
    no_room = neighbor_topologies(path_topology(3), max_steiner=0, positions=fan(0.1))
    assert no_room == neighbor_topologies(path_topology(3), max_steiner=0)
