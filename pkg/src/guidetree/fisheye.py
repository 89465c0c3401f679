"""Focus-dependent tree layout.

Nodes shrink geometrically with their tree distance from the active
region (frontier plus the traversed path), clamped to a minimum scale,
so the current decision context stays readable while the rest of the
tree stays visible as context. Placement is a layered tidy layout:
every subtree owns a disjoint horizontal span, so boxes never overlap.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Mapping

from .model import TreeDef
from .navigation import NavState


@dataclass(frozen=True)
class LayoutParams:
    node_width: float = 160.0
    node_height: float = 56.0
    h_gap: float = 24.0
    v_gap: float = 48.0
    decay: float = 0.6
    min_scale: float = 0.25


@dataclass(frozen=True)
class PlacedNode:
    """One node box; x and y are the center of the box."""

    id: str
    x: float
    y: float
    width: float
    height: float
    scale: float
    distance: int
    grayed: bool

    @property
    def left(self) -> float:
        return self.x - self.width / 2

    @property
    def top(self) -> float:
        return self.y - self.height / 2

    @property
    def bottom(self) -> float:
        return self.y + self.height / 2


@dataclass(frozen=True)
class EdgeLine:
    """Orthogonal polyline from a parent box to a child box."""

    from_: str
    answer: str
    to: str
    symbol: str
    points: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class TreeLayout:
    nodes: Mapping[str, PlacedNode]
    edges: tuple[EdgeLine, ...]
    width: float
    height: float
    fit: float = 1.0


def interest_distances(state: NavState) -> dict[str, int]:
    """Tree distance of every node from the active region.

    On a fresh tree everything is of equal interest: all distances are 0.
    """
    tree = state.tree
    if not state.selected:
        return {n.id: 0 for n in tree.nodes}
    adjacent: dict[str, list[str]] = defaultdict(list)
    for e in tree.edges:
        adjacent[e.from_].append(e.to)
        adjacent[e.to].append(e.from_)
    dist = {node_id: 0 for node_id in state.active_nodes()}
    queue = deque(dist)
    while queue:
        current = queue.popleft()
        for neighbor in adjacent[current]:
            if neighbor not in dist:
                dist[neighbor] = dist[current] + 1
                queue.append(neighbor)
    for n in tree.nodes:
        dist.setdefault(n.id, len(tree.nodes))
    return dist


def scale_for(distance: int, params: LayoutParams = LayoutParams()) -> float:
    if distance < 0:
        raise ValueError("distance must be non-negative")
    return max(params.min_scale, params.decay ** distance)


def _children_in_order(tree: TreeDef) -> dict[str, list[str]]:
    return {n.id: [e.to for e in tree.outgoing(n.id)] for n in tree.nodes}


def _post_order(tree: TreeDef, children: dict[str, list[str]]) -> list[str]:
    """Children-before-parent order, computed without recursion."""
    order: list[str] = []
    stack: list[tuple[str, bool]] = [(tree.root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        stack.append((node, True))
        for child in reversed(children[node]):
            stack.append((child, False))
    return order


def layout_tree(
    state: NavState,
    params: LayoutParams = LayoutParams(),
    viewport: tuple[float, float] | None = None,
) -> TreeLayout:
    """Place every node of the tree for the given navigation state.

    A viewport (width, height) only sets the layout's uniform fit factor;
    node coordinates and per-node scales are viewport-independent.
    """
    tree = state.tree
    distances = interest_distances(state)
    grayed = state.grayed_nodes()
    scales = {n.id: scale_for(distances[n.id], params) for n in tree.nodes}
    widths = {nid: params.node_width * s for nid, s in scales.items()}
    heights = {nid: params.node_height * s for nid, s in scales.items()}

    children = _children_in_order(tree)
    order = _post_order(tree, children)
    placed_ids = set(order)

    span: dict[str, float] = {}
    for node in order:
        kids = children[node]
        kids_total = sum(span[c] for c in kids) + params.h_gap * max(0, len(kids) - 1)
        span[node] = max(widths[node], kids_total)

    depth: dict[str, int] = {tree.root: 0}
    for node in reversed(order):
        for child in children[node]:
            depth[child] = depth[node] + 1

    level_count = max(depth.values()) + 1
    level_height = [0.0] * level_count
    for node in order:
        d = depth[node]
        level_height[d] = max(level_height[d], heights[node])
    level_y = [0.0] * level_count
    running = 0.0
    for d in range(level_count):
        level_y[d] = running
        running += level_height[d] + params.v_gap

    x_center: dict[str, float] = {}
    stack: list[tuple[str, float]] = [(tree.root, 0.0)]
    while stack:
        node, offset = stack.pop()
        x_center[node] = offset + span[node] / 2
        kids = children[node]
        if not kids:
            continue
        kids_total = sum(span[c] for c in kids) + params.h_gap * (len(kids) - 1)
        cursor = offset + (span[node] - kids_total) / 2
        for child in kids:
            stack.append((child, cursor))
            cursor += span[child] + params.h_gap

    placed: dict[str, PlacedNode] = {}
    for node in order:
        d = depth[node]
        placed[node] = PlacedNode(
            id=node,
            x=x_center[node],
            y=level_y[d] + level_height[d] / 2,
            width=widths[node],
            height=heights[node],
            scale=scales[node],
            distance=distances[node],
            grayed=node in grayed,
        )
    unreached = [n.id for n in tree.nodes if n.id not in placed_ids]
    if unreached:
        raise ValueError(f"nodes not reachable from root: {unreached}")

    edge_lines = []
    for edge in tree.edges:
        parent_box = placed[edge.from_]
        child_box = placed[edge.to]
        mid_y = (parent_box.bottom + child_box.top) / 2
        edge_lines.append(EdgeLine(
            from_=edge.from_,
            answer=edge.answer,
            to=edge.to,
            symbol=edge.symbol.value,
            points=(
                (parent_box.x, parent_box.bottom),
                (parent_box.x, mid_y),
                (child_box.x, mid_y),
                (child_box.x, child_box.top),
            )))

    total_height = running - params.v_gap if level_count else 0.0
    total_width = span[tree.root]
    fit = 1.0
    if viewport is not None:
        fit = fit_scale(total_width, total_height, viewport[0], viewport[1])
    return TreeLayout(
        nodes=placed, edges=tuple(edge_lines),
        width=total_width, height=total_height, fit=fit)


def fit_scale(width: float, height: float,
              viewport_width: float, viewport_height: float) -> float:
    """Uniform shrink factor fitting a drawing into a viewport.

    Applied on top of per-node scales at render time; never enlarges.
    """
    if viewport_width <= 0 or viewport_height <= 0:
        raise ValueError("viewport must be positive")
    if width <= 0 or height <= 0:
        return 1.0
    return min(1.0, viewport_width / width, viewport_height / height)


def layout_to_dict(layout: TreeLayout) -> dict:
    """JSON-ready form of a layout.

    Node entries carry the top-left corner of each box; nodes appear in
    placement order, edges in tree declaration order.
    """
    return {
        "width": layout.width,
        "height": layout.height,
        "fit": layout.fit,
        "nodes": {
            nid: {
                "x": p.left,
                "y": p.top,
                "width": p.width,
                "height": p.height,
                "scale": p.scale,
                "distance": p.distance,
                "grayed": p.grayed,
            }
            for nid, p in layout.nodes.items()
        },
        "edges": [
            {
                "from": line.from_,
                "answer": line.answer,
                "to": line.to,
                "symbol": line.symbol,
                "points": [[x, y] for x, y in line.points],
            }
            for line in layout.edges
        ],
    }
