"""Short centrally symmetric closed curves on the boundary of a symmetric body.

The minimal gauge length of such a curve (the girth-type quantity of the
body in its own norm) is approached from above in two stages: a k-nearest
neighbor graph over antipodally paired boundary samples supplies globally
reasonable half-curves from a point to its antipode, and a projected,
strictly monotone local descent tightens the half while keeping every vertex
on the boundary.  The curve is stored as one half plus its reflection, so
central symmetry is exact by construction.

``check_schaffer_bound`` reports the margin of a symmetric boundary loop
against the guaranteed lower bound 4 + 4/d (even dimension; 4 + 4/(d-1) in
odd dimension).  A negative margin beyond tolerance would indicate a bug,
not a discovery, and is flagged as such.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from ._util import as_rng
from .errors import (
    BodyNotSymmetric,
    CalibrationError,
    GraphDisconnected,
    LoopNotOnBoundary,
    LoopNotSymmetric,
)
from .geometry import ConvexBody
from .loops import DiscreteLoop, resample_polyline
from .symplectic import SymplecticFrame


def schaffer_bound(dim: int) -> float:
    """Lower bound for the symmetric girth: 4 + 4/d, improved for odd d."""
    if dim < 2:
        raise ValueError("girth bounds need dimension at least 2")
    return 4.0 + 4.0 / (dim - 1 if dim % 2 else dim)


@dataclass
class BoundaryGraph:
    """Antipodally paired boundary samples with gauge-weighted kNN edges."""

    body: ConvexBody
    samples: np.ndarray
    antipode: np.ndarray
    graph: csr_matrix
    k_neighbors: int

    @property
    def size(self) -> int:
        return len(self.samples)


def build_boundary_graph(
    body: ConvexBody,
    n_samples: int = 4096,
    k_neighbors: int = 12,
    rng=None,
    directions=None,
) -> BoundaryGraph:
    """Sample the boundary in antipodal pairs and connect near neighbors.

    Each drawn direction contributes the pair +-x of boundary points, so the
    antipodal map is the exact index shift by n_samples/2.  Edge weights are
    gauge values of the vertex differences; for a symmetric body these are
    symmetric in the edge direction, making the graph undirected.
    """
    if not body.is_symmetric:
        raise BodyNotSymmetric("boundary graph needs a centrally symmetric body")
    if directions is None:
        if n_samples % 2 != 0:
            raise ValueError("n_samples must be even (antipodal pairing)")
        rng = as_rng(rng if rng is not None else 0)
        directions = rng.normal(size=(n_samples // 2, body.dim))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    else:
        directions = np.asarray(directions, dtype=float)
    half = body.boundary_point(directions)
    samples = np.vstack([half, -half])
    p = len(samples)
    antipode = np.concatenate(
        [np.arange(p // 2, p), np.arange(0, p // 2)]
    )

    tree = cKDTree(samples)
    k = min(k_neighbors + 1, p)
    _, idx = tree.query(samples, k=k)
    rows = np.repeat(np.arange(p), k - 1)
    cols = idx[:, 1:].ravel()
    weights = body.gauge(samples[cols] - samples[rows])
    graph = csr_matrix((weights, (rows, cols)), shape=(p, p))
    graph = graph.maximum(graph.T)  # symmetrize the neighbor relation
    return BoundaryGraph(
        body=body,
        samples=samples,
        antipode=antipode,
        graph=graph,
        k_neighbors=k_neighbors,
    )


def shortest_antipodal_path(bgraph: BoundaryGraph, source: int):
    """Graph-shortest path from one sample to its antipode.

    Returns (length, vertex index list).  Raises if the two are not
    connected, which means the neighbor count is too small for the sampling
    density.
    """
    target = int(bgraph.antipode[source])
    dist, pred = dijkstra(
        bgraph.graph,
        directed=False,
        indices=source,
        return_predecessors=True,
    )
    if not np.isfinite(dist[target]):
        raise GraphDisconnected(
            "no boundary path between antipodes; increase k_neighbors"
        )
    path = [target]
    while path[-1] != source:
        path.append(int(pred[path[-1]]))
    path.reverse()
    return float(dist[target]), path


def _antipodal_distances(bgraph: BoundaryGraph, sources, chunk: int = 512):
    """d(x, -x) for each requested source, computed in memory-bounded chunks."""
    out = np.empty(len(sources))
    for start in range(0, len(sources), chunk):
        batch = sources[start : start + chunk]
        dist = dijkstra(bgraph.graph, directed=False, indices=batch)
        out[start : start + len(batch)] = dist[
            np.arange(len(batch)), bgraph.antipode[batch]
        ]
    return out


def _half_length_and_grad(body, half):
    """Gauge length of the half-curve closed at -half[0], with gradient.

    The represented closed curve is the half followed by its reflection; its
    total length is exactly twice this value.
    """
    edges = np.diff(np.vstack([half, -half[:1]]), axis=0)
    grads = body.gauge_gradient(edges)
    length = float(np.sum(body.gauge(edges)))
    # vertex i is the tail of edge i and the head of edge i-1; the head of
    # the final edge is the reflection -half[0], flipping that term's sign
    g = -grads.copy()
    g[1:] += grads[:-1]
    g[0] -= grads[-1]
    return length, g


def _project(body, pts):
    return body.boundary_point(pts)


def refine_symmetric_half(
    body: ConvexBody,
    half,
    max_iterations: int = 400,
    step0: Optional[float] = None,
    min_step: float = 1e-12,
):
    """Monotone projected descent on the half-curve's gauge length.

    Every trial point is re-projected to the boundary before evaluation and
    steps are only accepted when the objective strictly decreases, so the
    returned half is on-boundary and never longer than the input.
    """
    half = _project(body, np.asarray(half, dtype=float))
    length, grad = _half_length_and_grad(body, half)
    step = step0 if step0 is not None else 0.1 * body.outer_radius()
    for _ in range(max_iterations):
        gn = float(np.max(np.linalg.norm(grad, axis=1)))
        if gn == 0.0 or step < min_step:
            break
        trial = _project(body, half - step * grad)
        trial_len, trial_grad = _half_length_and_grad(body, trial)
        if trial_len < length - 1e-15 * max(1.0, abs(length)):
            half, length, grad = trial, trial_len, trial_grad
            step *= 1.3
        else:
            step *= 0.5
    return half, length


def symmetric_girth(
    body: ConvexBody,
    n_samples: int = 4096,
    k_neighbors: int = 12,
    rng=None,
    refine_points: int = 64,
    sources: Optional[int] = None,
    directions=None,
):
    """Upper bound for the minimal symmetric closed boundary curve length.

    Searches the boundary graph from samples to their antipodes, doubles the
    best half-path into an exactly symmetric closed loop, and tightens it by
    projected descent.  Returns ``(length, loop)``.  ``sources`` limits how
    many graph sources are searched (deterministically spread over the
    samples); the default searches all of them.
    """
    bgraph = build_boundary_graph(
        body,
        n_samples=n_samples,
        k_neighbors=k_neighbors,
        rng=rng,
        directions=directions,
    )
    p = bgraph.size
    if sources is None:
        candidates = np.arange(p // 2)  # antipodal symmetry halves the work
    else:
        candidates = np.unique(
            np.linspace(0, p // 2 - 1, min(sources, p // 2)).astype(int)
        )
    dists = _antipodal_distances(bgraph, candidates)
    if not np.all(np.isfinite(dists)):
        raise GraphDisconnected(
            "some antipodal pairs are unreachable; increase k_neighbors"
        )
    best_source = int(candidates[int(np.argmin(dists))])
    _, path = shortest_antipodal_path(bgraph, best_source)
    half = bgraph.samples[path]

    # equalize spacing, then descend; both steps keep the curve on-boundary.
    # the final path vertex is the antipode -half[0], which the half-curve
    # representation keeps implicit, so it is dropped after resampling
    half = resample_polyline(
        half, lambda e: np.linalg.norm(e, axis=-1), refine_points + 1, closed=False
    )[:-1]
    half = _project(body, half)
    half, half_len = refine_symmetric_half(body, half)

    length = 2.0 * half_len
    bound = 4.0 + 4.0 / body.dim
    if length < bound - 1e-2:
        raise CalibrationError(
            f"computed symmetric curve length {length!r} undercuts the "
            f"guaranteed bound {bound!r}; the search must be buggy"
        )
    loop_vertices = np.vstack([half, -half])
    if body.dim % 2 == 0:
        frame = SymplecticFrame(body.dim // 2)
        loop = DiscreteLoop(frame, loop_vertices)
    else:
        loop = loop_vertices  # odd-dimensional bodies have no symplectic frame
    return length, loop


def check_schaffer_bound(body: ConvexBody, loop) -> dict:
    """Margin of a symmetric boundary loop against the guaranteed bound.

    The loop must pair vertex i with vertex i + N/2 under negation and sit
    on the boundary.  A margin below -1e-2 raises the violation flag; the
    bound holds for every genuine symmetric boundary curve, so a violation
    means an implementation error somewhere.
    """
    vertices = np.asarray(
        loop.vertices if isinstance(loop, DiscreteLoop) else loop, dtype=float
    )
    n = len(vertices)
    diameter = body.diameter()
    if n % 2 != 0:
        raise LoopNotSymmetric("symmetric loops need an even vertex count")
    defect = float(
        np.max(np.abs(vertices + np.roll(vertices, -n // 2, axis=0)))
    )
    if defect > 1e-6 * diameter:
        raise LoopNotSymmetric(
            f"central symmetry defect {defect:.2e} exceeds 1e-6 * diameter"
        )
    gauges = body.gauge(vertices)
    boundary_defect = float(np.max(np.abs(gauges - 1.0)))
    if boundary_defect > 1e-3:
        raise LoopNotOnBoundary(
            f"vertex gauge deviates from 1 by {boundary_defect:.2e}"
        )
    edges = np.roll(vertices, -1, axis=0) - vertices
    length = float(np.sum(body.gauge(edges)))
    bound = schaffer_bound(body.dim)
    margin = length - bound
    return {
        "length": length,
        "bound": bound,
        "margin": margin,
        "dim": body.dim,
        "symmetry_defect": defect,
        "boundary_defect": boundary_defect,
        "violation": bool(margin < -1e-2),
    }
