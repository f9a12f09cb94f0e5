"""Rooted nice tree-decompositions.

Every node is a leaf, a join (two children with the same bag), or has one
child and introduces or forgets exactly one vertex. ``make_nice`` always
produces an empty root bag; by default leaves are empty as well, so all
leaf content enters through introduce nodes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum

from .decompose import TreeDecomposition, validate
from .incidence import Vertex


class Kind(Enum):
    LEAF = "leaf"
    JOIN = "join"
    INTRODUCE_VAR = "introduce-var"
    INTRODUCE_CLAUSE = "introduce-clause"
    FORGET_VAR = "forget-var"
    FORGET_CLAUSE = "forget-clause"


class InvalidDecomposition(ValueError):
    pass


@dataclass(frozen=True)
class NiceNode:
    kind: Kind
    bag: frozenset
    children: tuple[int, ...] = ()
    vertex: Vertex | None = None


def classify(bag: frozenset, child_bags) -> tuple[Kind, Vertex | None]:
    """Node kind (and the introduced/forgotten vertex) from the bag deltas."""
    child_bags = list(child_bags)
    if not child_bags:
        return Kind.LEAF, None
    if len(child_bags) == 2:
        if child_bags[0] == bag and child_bags[1] == bag:
            return Kind.JOIN, None
        raise InvalidDecomposition("join node whose children's bags differ from its own")
    if len(child_bags) > 2:
        raise InvalidDecomposition(f"node with {len(child_bags)} children")
    child = child_bags[0]
    added = bag - child
    removed = child - bag
    if len(added) == 1 and not removed:
        (v,) = added
        return (Kind.INTRODUCE_VAR if v.is_var else Kind.INTRODUCE_CLAUSE), v
    if len(removed) == 1 and not added:
        (v,) = removed
        return (Kind.FORGET_VAR if v.is_var else Kind.FORGET_CLAUSE), v
    raise InvalidDecomposition(
        f"bag {sorted(map(str, bag))} is neither an introduce nor a forget of "
        f"{sorted(map(str, child))}")


@dataclass
class NiceDecomposition:
    nodes: dict[int, NiceNode]
    root: int

    def __len__(self):
        return len(self.nodes)

    def postorder(self, start: int | None = None) -> list[int]:
        """Node ids bottom-up, children visited left to right."""
        start = self.root if start is None else start
        out = []
        stack = [(start, False)]
        while stack:
            t, expanded = stack.pop()
            if expanded:
                out.append(t)
                continue
            stack.append((t, True))
            for c in reversed(self.nodes[t].children):
                stack.append((c, False))
        return out

    def subtree_vertices(self, t: int) -> frozenset:
        """V_t: the union of all bags below and at ``t``."""
        return frozenset().union(*(self.nodes[u].bag for u in self.postorder(t)))

    def width(self) -> int:
        return max(0, max(len(n.bag) for n in self.nodes.values()) - 1)

    def as_tree_decomposition(self) -> TreeDecomposition:
        return TreeDecomposition.build(
            {t: n.bag for t, n in self.nodes.items()},
            [(t, c) for t, n in self.nodes.items() for c in n.children])

    def check(self, graph=None):
        """Raise ``InvalidDecomposition`` unless every node classifies as
        recorded and the root bag is empty; with ``graph``, also run the
        tree-decomposition validator."""
        for t, node in self.nodes.items():
            kind, v = classify(node.bag, (self.nodes[c].bag for c in node.children))
            if kind is not node.kind or v != node.vertex:
                raise InvalidDecomposition(
                    f"node {t} recorded as {node.kind.value}, classifies as {kind.value}")
        if self.nodes[self.root].bag:
            raise InvalidDecomposition("root bag is not empty")
        if len(self.postorder()) != len(self.nodes):
            raise InvalidDecomposition("nodes unreachable from the root")
        if graph is not None:
            report = validate(graph, self.as_tree_decomposition())
            if not report:
                raise InvalidDecomposition(report.describe())

    def to_dict(self) -> dict:
        return {
            "root": self.root,
            "nodes": [
                {"id": t, "kind": n.kind.value,
                 "vertex": None if n.vertex is None else str(n.vertex),
                 "bag": [str(v) for v in sorted(n.bag)],
                 "children": list(n.children)}
                for t, n in sorted(self.nodes.items())],
        }


def _merge_equal_neighbours(td: TreeDecomposition):
    """Contract every tree edge whose endpoints carry the same bag."""
    parent = {t: t for t in td.bags}

    def find(t):
        while parent[t] != t:
            parent[t] = parent[parent[t]]
            t = parent[t]
        return t

    for a, b in sorted(td.edges):
        if td.bags[a] == td.bags[b]:
            ra, rb = find(a), find(b)
            parent[max(ra, rb)] = min(ra, rb)
    bags = {t: td.bags[t] for t in td.bags if find(t) == t}
    nbrs: dict[int, list[int]] = {t: [] for t in bags}
    for a, b in sorted(td.edges):
        ra, rb = find(a), find(b)
        if ra != rb:
            nbrs[ra].append(rb)
            nbrs[rb].append(ra)
    return bags, nbrs, {t: find(t) for t in td.bags}


def make_nice(td: TreeDecomposition, graph=None, *, empty_leaves: bool = True,
              root: int | None = None) -> NiceDecomposition:
    """Turn ``td`` into a nice decomposition of no larger width.

    When ``graph`` is given the input is validated first. Children of a
    node are handled in increasing node-id order; a node with several
    children becomes a left-deep chain of joins. Each child reaches its
    parent's bag by forgetting first and introducing second, both in
    sorted vertex order.
    """
    td.check_tree()
    if graph is not None:
        report = validate(graph, td)
        if not report:
            raise InvalidDecomposition(report.describe())
    bags, nbrs, rep = _merge_equal_neighbours(td)
    root = min(bags) if root is None else rep[root]

    children: dict[int, list[int]] = {}
    order = []
    seen = {root}
    queue = deque([root])
    while queue:
        t = queue.popleft()
        order.append(t)
        children[t] = sorted(u for u in nbrs[t] if u not in seen)
        seen.update(children[t])
        queue.extend(children[t])

    nodes: dict[int, NiceNode] = {}

    def new(kind, bag, kids=(), vertex=None):
        nid = len(nodes) + 1
        nodes[nid] = NiceNode(kind, bag, tuple(kids), vertex)
        return nid

    def chain(nid, bag, target):
        for v in sorted(bag - target):
            bag = bag - {v}
            nid = new(Kind.FORGET_VAR if v.is_var else Kind.FORGET_CLAUSE, bag, (nid,), v)
        for v in sorted(target - bag):
            bag = bag | {v}
            nid = new(Kind.INTRODUCE_VAR if v.is_var else Kind.INTRODUCE_CLAUSE,
                      bag, (nid,), v)
        return nid

    top = {}
    for t in reversed(order):
        bag = bags[t]
        kids = children[t]
        if not kids:
            if empty_leaves:
                top[t] = chain(new(Kind.LEAF, frozenset()), frozenset(), bag)
            else:
                top[t] = new(Kind.LEAF, bag)
            continue
        branches = [chain(top.pop(c), bags[c], bag) for c in kids]
        joined = branches[0]
        for other in branches[1:]:
            joined = new(Kind.JOIN, bag, (joined, other))
        top[t] = joined
    nice_root = chain(top[root], bags[root], frozenset())
    return NiceDecomposition(nodes, nice_root)
