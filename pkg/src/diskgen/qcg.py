"""Quantity Cell Graph construction.

Quantities are the numeric-literal tokens of a problem text.  Each quantity
owns the nouns/verbs found within two undirected hops in the dependency
graph, plus the nouns/verbs sharing its constituency subtree (subtrees come
from a depth-first traversal that stops at nodes with at most F leaves).
"""

import json
from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .corpus import is_number_token
from .errors import ValidationError
from .trees import parse_tree

DEFAULT_F = 5


class NodeRole(Enum):
    QUANTITY = "QUANTITY"
    ATTRIBUTE = "ATTRIBUTE"


@dataclass(frozen=True)
class QCGNode:
    text_index: int
    role: NodeRole
    owner_quantity: int  # index into the node list; self for quantities
    pos_tag: str


@dataclass
class QuantityCellGraph:
    nodes: list
    adjacency: np.ndarray  # |G| x |G| binary, symmetric, zero diagonal
    alignment: np.ndarray  # L x |G| binary, one 1 per column
    m: int  # number of quantity nodes

    @property
    def size(self):
        return len(self.nodes)

    def to_json(self):
        return json.dumps({
            "nodes": [{"i": n.text_index, "role": n.role.value,
                       "owner": n.owner_quantity, "pos": n.pos_tag}
                      for n in self.nodes],
            "A": self.adjacency.astype(int).tolist(),
            "M": self.alignment.astype(int).tolist(),
        })


def is_noun_or_verb(tag: str) -> bool:
    return tag.startswith(("NN", "VB")) or tag in ("N", "V")


def subtree_partition(bracketing: str, F: int):
    """Split leaves into the maximal subtrees with at most F leaves each."""
    if F < 1:
        raise ValueError("F must be >= 1")
    root = parse_tree(bracketing)
    sets = []

    def visit(node):
        leaves = node.leaves()
        if len(leaves) <= F:
            sets.append(set(leaves))
            return
        for child in node.children:
            visit(child)

    visit(root)
    return sets


def _hop_distances(n_tokens, dep_edges, source):
    """Undirected BFS distances from `source` over the dependency edges."""
    adj = [[] for _ in range(n_tokens)]
    for head, dep, _rel in dep_edges:
        if head < 0:
            continue
        adj[head].append(dep)
        adj[dep].append(head)
    dist = [None] * n_tokens
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if dist[v] is None:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def extract_quantity_cells(instance, F=DEFAULT_F):
    """Return QCG nodes: one QUANTITY per numeric token plus its attributes."""
    L = len(instance.text)
    quantity_positions = [i for i, tok in enumerate(instance.text) if is_number_token(tok)]
    if not quantity_positions:
        return []

    partition = subtree_partition(instance.constituency, F)
    subtree_of = {}
    for part in partition:
        for idx in part:
            subtree_of[idx] = part

    nodes = []
    for q_pos in quantity_positions:
        q_index = len(nodes)
        nodes.append(QCGNode(q_pos, NodeRole.QUANTITY, q_index, instance.pos_tags[q_pos]))
        dist = _hop_distances(L, instance.dep_edges, q_pos)
        members = set()
        for i in range(L):
            if i == q_pos or not is_noun_or_verb(instance.pos_tags[i]):
                continue
            within_hops = dist[i] is not None and dist[i] <= 2
            same_subtree = i in subtree_of.get(q_pos, ())
            if within_hops or same_subtree:
                members.add(i)
        for i in sorted(members):
            nodes.append(QCGNode(i, NodeRole.ATTRIBUTE, q_index, instance.pos_tags[i]))
    return nodes


def build_graph(cells, L):
    """Assemble adjacency A and text-to-node alignment M from extracted cells."""
    n = len(cells)
    seen = set()
    for node in cells:
        key = (node.text_index, node.owner_quantity)
        if key in seen:
            raise ValidationError(f"duplicate (text_index, owner) pair {key}")
        seen.add(key)

    A = np.zeros((n, n), dtype=np.int64)
    quantity_idx = [i for i, node in enumerate(cells) if node.role is NodeRole.QUANTITY]
    for a in quantity_idx:
        for b in quantity_idx:
            if a != b:
                A[a, b] = 1
    for i, node in enumerate(cells):
        if node.role is NodeRole.ATTRIBUTE:
            A[i, node.owner_quantity] = 1
            A[node.owner_quantity, i] = 1

    M = np.zeros((L, n), dtype=np.int64)
    for j, node in enumerate(cells):
        M[node.text_index, j] = 1
    return QuantityCellGraph(nodes=list(cells), adjacency=A, alignment=M,
                             m=len(quantity_idx))


def build_qcg(instance, F=DEFAULT_F):
    cells = extract_quantity_cells(instance, F)
    return build_graph(cells, len(instance.text))
