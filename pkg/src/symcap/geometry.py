"""Convex bodies with the origin inside: gauges, supports, polars.

Every body K exposes the same small contract:

* ``gauge(x)``          Minkowski gauge g_K, 1-homogeneous, 1 on the boundary
* ``support(u)``        support function h_K(u) = max_{y in K} <u, y>
* ``support_point(u)``  a maximizer of <u, .> over K
* ``gauge_gradient(x)`` gradient (or a deterministic subgradient selection)
* ``polar()``           the polar body, satisfying h_K = g_{K polar}
* ``boundary_point(d)`` the boundary point on the ray through d

All evaluation methods are vectorized over leading axes, so ``gauge`` on an
``(N, d)`` array returns ``(N,)`` values.
"""

from __future__ import annotations

import json

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError, cKDTree

from ._util import lexicographic_rank
from .errors import (
    DimensionMismatch,
    GradientUndefinedAtZero,
    NonConvexParameters,
    OriginNotInterior,
    SpecParseError,
)

_SYM_TOL = 1e-9


class ConvexBody:
    """Common behavior for all body kinds; not instantiated directly."""

    kind: str = "abstract"

    def __init__(self, dim: int):
        if dim < 1:
            raise DimensionMismatch(f"dimension must be >= 1, got {dim}")
        self.dim = int(dim)

    # -- subclass responsibilities -------------------------------------
    def gauge(self, x):  # pragma: no cover - abstract
        raise NotImplementedError

    def support(self, u):  # pragma: no cover - abstract
        raise NotImplementedError

    def support_point(self, u):  # pragma: no cover - abstract
        raise NotImplementedError

    def gauge_gradient(self, x):  # pragma: no cover - abstract
        raise NotImplementedError

    def polar(self) -> "ConvexBody":  # pragma: no cover - abstract
        raise NotImplementedError

    def scale(self, s: float) -> "ConvexBody":  # pragma: no cover - abstract
        raise NotImplementedError

    @property
    def is_symmetric(self) -> bool:  # pragma: no cover - abstract
        raise NotImplementedError

    @property
    def is_smooth(self) -> bool:  # pragma: no cover - abstract
        raise NotImplementedError

    def outer_radius(self) -> float:  # pragma: no cover - abstract
        raise NotImplementedError

    # -- shared helpers ------------------------------------------------
    def _check_vec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionMismatch(
                f"expected vectors of length {self.dim}, got shape {x.shape}"
            )
        return x

    def boundary_point(self, direction) -> np.ndarray:
        """The unique boundary point on the open ray spanned by direction."""
        d = self._check_vec(direction)
        norms = np.linalg.norm(d, axis=-1)
        if np.any(norms == 0.0):
            raise GradientUndefinedAtZero("boundary ray undefined for direction 0")
        g = self.gauge(d)
        return d / np.asarray(g)[..., None]

    def contains(self, x, tol: float = 0.0):
        return self.gauge(x) <= 1.0 + tol

    def diameter(self) -> float:
        """Cheap upper bound 2 * outer_radius, used only for tolerances."""
        return 2.0 * self.outer_radius()

    def to_dict(self) -> dict:  # pragma: no cover - abstract
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


class Ellipsoid(ConvexBody):
    """Solid ellipsoid {x : (x - c)^T M (x - c) <= 1} with M positive definite.

    The center c defaults to the origin; a nonzero center gives the standard
    example of a non-symmetric smooth body.  The origin must stay strictly
    inside, which for a shifted ellipsoid means c^T M c < 1.
    """

    kind = "ellipsoid"

    def __init__(self, matrix, center=None):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise NonConvexParameters(f"matrix must be square, got {matrix.shape}")
        super().__init__(matrix.shape[0])
        if not np.allclose(matrix, matrix.T, atol=1e-10 * (1 + np.abs(matrix).max())):
            raise NonConvexParameters("ellipsoid matrix must be symmetric")
        self.matrix = 0.5 * (matrix + matrix.T)
        try:
            np.linalg.cholesky(self.matrix)
        except np.linalg.LinAlgError:
            raise NonConvexParameters("ellipsoid matrix must be positive definite")
        self.center = (
            np.zeros(self.dim) if center is None else self._check_vec(center).copy()
        )
        self._e = float(self.center @ self.matrix @ self.center)
        if self._e >= 1.0:
            raise OriginNotInterior(
                "origin lies outside the shifted ellipsoid (c^T M c >= 1)"
            )
        self._inv = np.linalg.inv(self.matrix)
        w, u = np.linalg.eigh(self.matrix)
        self._eigvals = w
        self._sqrt = (u * np.sqrt(w)) @ u.T

    @classmethod
    def from_radii(cls, radii, center=None) -> "Ellipsoid":
        """Axis-aligned ellipsoid with the given semi-axis per coordinate."""
        radii = np.asarray(radii, dtype=float)
        if np.any(radii <= 0):
            raise NonConvexParameters("semi-axes must be positive")
        return cls(np.diag(1.0 / radii**2), center=center)

    def sqrt_matrix(self) -> np.ndarray:
        """The symmetric square root M^{1/2}."""
        return self._sqrt.copy()

    def gauge(self, x):
        x = self._check_vec(x)
        a = np.einsum("...i,ij,...j->...", x, self.matrix, x)
        if self._e == 0.0:
            return np.sqrt(np.maximum(a, 0.0))
        b = x @ (self.matrix @ self.center)
        one_e = 1.0 - self._e
        return (np.sqrt(np.maximum(b * b + one_e * a, 0.0)) - b) / one_e

    def support(self, u):
        u = self._check_vec(u)
        quad = np.einsum("...i,ij,...j->...", u, self._inv, u)
        return u @ self.center + np.sqrt(np.maximum(quad, 0.0))

    def support_point(self, u):
        u = self._check_vec(u)
        mu = u @ self._inv
        quad = np.sum(mu * u, axis=-1)
        if np.any(quad == 0.0):
            raise GradientUndefinedAtZero("support point undefined for direction 0")
        return self.center + mu / np.sqrt(quad)[..., None]

    def gauge_gradient(self, x):
        # 0-homogeneous: evaluate the outward normal at the boundary point
        # y = x / g(x) and rescale so that <grad, x> = g(x).
        x = self._check_vec(x)
        g = np.asarray(self.gauge(x))
        if np.any(g == 0.0):
            raise GradientUndefinedAtZero("gauge gradient undefined at 0")
        y = x / g[..., None]
        nu = (y - self.center) @ self.matrix
        denom = np.sum(nu * y, axis=-1)
        return nu / denom[..., None]

    def polar(self) -> "Ellipsoid":
        if self._e == 0.0:
            return Ellipsoid(self._inv)
        # The polar of a shifted ellipsoid is again a shifted ellipsoid:
        # {y : <y,c> + sqrt(y^T M^-1 y) <= 1} has the quadratic description
        # y^T Q y + 2<c,y> - 1 <= 0 with Q = M^-1 - c c^T.
        c = self.center
        one_e = 1.0 - self._e
        q = self._inv - np.outer(c, c)
        center_p = -(self.matrix @ c) / one_e
        k = 1.0 / one_e
        return Ellipsoid(q / k, center=center_p)

    def scale(self, s: float) -> "Ellipsoid":
        if s <= 0:
            raise NonConvexParameters("scale factor must be positive")
        return Ellipsoid(self.matrix / s**2, center=self.center * s)

    @property
    def is_symmetric(self) -> bool:
        return bool(np.all(self.center == 0.0))

    @property
    def is_smooth(self) -> bool:
        return True

    def outer_radius(self) -> float:
        return float(np.linalg.norm(self.center) + 1.0 / np.sqrt(self._eigvals[0]))

    def to_dict(self) -> dict:
        params = {"matrix": self.matrix.tolist()}
        if not self.is_symmetric:
            params["center"] = self.center.tolist()
        return {"kind": self.kind, "dim": self.dim, "params": params}


class LpBall(ConvexBody):
    """Weighted l^p ball {x : sum |x_i / w_i|^p <= 1} for 1 < p < infinity.

    The exponents 1 and infinity are handled as polytopes (see ``lp_ball``),
    since their gauges are polyhedral.
    """

    kind = "lp"

    def __init__(self, p: float, weights):
        weights = np.asarray(weights, dtype=float)
        super().__init__(weights.shape[-1])
        if weights.ndim != 1 or np.any(weights <= 0):
            raise NonConvexParameters("weights must be a vector of positive numbers")
        if not (1.0 < p < np.inf):
            raise NonConvexParameters(
                f"LpBall requires 1 < p < inf, got p={p}; use lp_ball for 1 and inf"
            )
        self.p = float(p)
        self.q = self.p / (self.p - 1.0)
        self.weights = weights

    def _scaled_norm(self, z, expo):
        # max-factored power sum, stable for large exponents
        m = np.max(z, axis=-1)
        safe = np.where(m == 0.0, 1.0, m)
        s = np.sum((z / safe[..., None]) ** expo, axis=-1)
        return np.where(m == 0.0, 0.0, safe * s ** (1.0 / expo))

    def gauge(self, x):
        x = self._check_vec(x)
        return self._scaled_norm(np.abs(x) / self.weights, self.p)

    def support(self, u):
        u = self._check_vec(u)
        return self._scaled_norm(np.abs(u) * self.weights, self.q)

    def support_point(self, u):
        u = self._check_vec(u)
        z = np.abs(u) * self.weights
        m = np.max(z, axis=-1)
        if np.any(m == 0.0):
            raise GradientUndefinedAtZero("support point undefined for direction 0")
        zn = z / m[..., None]
        s = np.sum(zn**self.q, axis=-1)
        return self.weights * np.sign(u) * zn ** (self.q - 1.0) / s[..., None] ** (
            (self.q - 1.0) / self.q
        )

    def gauge_gradient(self, x):
        x = self._check_vec(x)
        t = np.abs(x) / self.weights
        m = np.max(t, axis=-1)
        if np.any(m == 0.0):
            raise GradientUndefinedAtZero("gauge gradient undefined at 0")
        tn = t / m[..., None]
        s = np.sum(tn**self.p, axis=-1)
        return (
            np.sign(x)
            * tn ** (self.p - 1.0)
            / self.weights
            / s[..., None] ** ((self.p - 1.0) / self.p)
        )

    def polar(self) -> "LpBall":
        return LpBall(self.q, 1.0 / self.weights)

    def scale(self, s: float) -> "LpBall":
        if s <= 0:
            raise NonConvexParameters("scale factor must be positive")
        return LpBall(self.p, self.weights * s)

    @property
    def is_symmetric(self) -> bool:
        return True

    @property
    def is_smooth(self) -> bool:
        return True

    def outer_radius(self) -> float:
        return float(np.max(self.weights))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "params": {"p": self.p, "weights": self.weights.tolist()},
        }


class Polytope(ConvexBody):
    """Bounded polytope with the origin inside, in both representations.

    Constructed either from vertices or from halfspaces {x : A x <= b}; the
    missing representation is computed once with Qhull.  ``kind`` records the
    originally supplied description.  Gauge queries use the facet form
    max_i <n_i, x> / c_i, which is exact; the textbook scaling linear program
    over convex combination coefficients is kept as ``gauge_scaling_lp`` and
    cross-checked in the tests.
    """

    def __init__(self, vertices=None, normals=None, offsets=None):
        if vertices is not None and normals is None:
            vertices = np.asarray(vertices, dtype=float)
            if vertices.ndim != 2:
                raise NonConvexParameters("vertices must be a 2d array")
            super().__init__(vertices.shape[1])
            self.kind = "polytope_v"
            self._build_from_vertices(vertices)
        elif normals is not None and vertices is None:
            normals = np.asarray(normals, dtype=float)
            offsets = np.asarray(offsets, dtype=float)
            if normals.ndim != 2 or offsets.shape != (normals.shape[0],):
                raise NonConvexParameters("normals/offsets shapes do not match")
            super().__init__(normals.shape[1])
            self.kind = "polytope_h"
            self._build_from_halfspaces(normals, offsets)
        else:
            raise NonConvexParameters(
                "give either vertices or normals+offsets, not both"
            )
        # scaled normals used for gauge and its subgradient selection
        self._facet_grads = self.normals / self.offsets[:, None]
        self._grad_rank = lexicographic_rank(self._facet_grads)
        self._vertex_rank = lexicographic_rank(self.vertices)

    def _build_from_vertices(self, vertices):
        if vertices.shape[0] < self.dim + 1:
            raise NonConvexParameters(
                f"a full-dimensional polytope in R^{self.dim} needs at least "
                f"{self.dim + 1} vertices"
            )
        try:
            hull = ConvexHull(vertices)
        except QhullError as exc:
            raise NonConvexParameters(f"degenerate vertex set: {exc}") from exc
        self.vertices = vertices[hull.vertices]
        # Qhull equations are [A | d] with A x + d <= 0
        eq = hull.equations
        self.normals = eq[:, :-1].copy()
        self.offsets = -eq[:, -1].copy()
        if np.min(self.offsets) <= 1e-12:
            raise OriginNotInterior("origin is not strictly inside the polytope")

    def _build_from_halfspaces(self, normals, offsets):
        if np.any(offsets <= 0):
            raise OriginNotInterior(
                "all offsets must be positive so the origin is interior"
            )
        norms = np.linalg.norm(normals, axis=1)
        if np.any(norms == 0):
            raise NonConvexParameters("zero facet normal")
        self.normals = normals
        self.offsets = offsets
        halfspaces = np.hstack([normals, -offsets[:, None]])
        try:
            hs = HalfspaceIntersection(halfspaces, np.zeros(self.dim))
            pts = hs.intersections
            if not np.all(np.isfinite(pts)):
                raise NonConvexParameters("halfspace intersection is unbounded")
            pts = _dedupe_rows(pts)
            hull = ConvexHull(pts)
        except QhullError as exc:
            raise NonConvexParameters(
                f"halfspaces do not bound a full-dimensional polytope: {exc}"
            ) from exc
        self.vertices = pts[hull.vertices]

    def gauge(self, x):
        x = self._check_vec(x)
        return np.max(x @ self._facet_grads.T, axis=-1)

    def gauge_scaling_lp(self, x) -> float:
        """Gauge of a single point from the scaling problem min{t : x in tK}.

        Solved as min sum(mu) subject to V^T mu = x, mu >= 0 over convex
        combination coefficients.  Slower than the facet form but independent
        of it; used as a consistency oracle.
        """
        x = self._check_vec(x)
        if x.ndim != 1:
            raise DimensionMismatch("gauge_scaling_lp takes a single point")
        m = self.vertices.shape[0]
        res = linprog(
            c=np.ones(m),
            A_eq=self.vertices.T,
            b_eq=x,
            bounds=[(0, None)] * m,
            method="highs",
        )
        if not res.success:
            raise NonConvexParameters(f"scaling LP failed: {res.message}")
        return float(res.fun)

    def support(self, u):
        u = self._check_vec(u)
        return np.max(u @ self.vertices.T, axis=-1)

    def support_point(self, u):
        u = self._check_vec(u)
        scores = u @ self.vertices.T
        idx = _argmax_with_rank(scores, self._vertex_rank)
        return self.vertices[idx]

    def gauge_gradient(self, x):
        """Subgradient selection: the scaled outward normal n_i / c_i of a
        maximizing facet, lexicographically smallest among exact ties."""
        x = self._check_vec(x)
        if np.any(np.linalg.norm(x, axis=-1) == 0.0):
            raise GradientUndefinedAtZero("gauge gradient undefined at 0")
        scores = x @ self._facet_grads.T
        idx = _argmax_with_rank(scores, self._grad_rank)
        return self._facet_grads[idx]

    def polar(self) -> "Polytope":
        if self.kind == "polytope_v":
            return Polytope(normals=self.vertices, offsets=np.ones(len(self.vertices)))
        return Polytope(vertices=self._facet_grads)

    def scale(self, s: float) -> "Polytope":
        if s <= 0:
            raise NonConvexParameters("scale factor must be positive")
        if self.kind == "polytope_v":
            return Polytope(vertices=self.vertices * s)
        return Polytope(normals=self.normals, offsets=self.offsets * s)

    @property
    def is_symmetric(self) -> bool:
        v = self.vertices
        tree = cKDTree(v)
        dist, _ = tree.query(-v)
        return bool(np.max(dist) <= _SYM_TOL * (1.0 + np.abs(v).max()))

    @property
    def is_smooth(self) -> bool:
        return False

    def outer_radius(self) -> float:
        return float(np.max(np.linalg.norm(self.vertices, axis=1)))

    def to_dict(self) -> dict:
        if self.kind == "polytope_v":
            params = {"vertices": self.vertices.tolist()}
        else:
            params = {
                "normals": self.normals.tolist(),
                "offsets": self.offsets.tolist(),
            }
        return {"kind": self.kind, "dim": self.dim, "params": params}


def _dedupe_rows(pts, rel_tol=1e-9):
    scale = max(1.0, float(np.abs(pts).max()))
    key = np.round(pts / (scale * rel_tol)).astype(np.int64)
    _, keep = np.unique(key, axis=0, return_index=True)
    return pts[np.sort(keep)]


def _argmax_with_rank(scores, rank, rel_tol=1e-12):
    """Argmax along the last axis, breaking exact/near ties by smallest rank."""
    scores = np.asarray(scores)
    mx = np.max(scores, axis=-1, keepdims=True)
    tied = scores >= mx - rel_tol * np.maximum(1.0, np.abs(mx))
    ranked = np.where(tied, rank, np.iinfo(np.int64).max)
    return np.argmin(ranked, axis=-1)


def cube(dim: int, radius: float = 1.0) -> Polytope:
    """The cube [-radius, radius]^dim as a halfspace polytope."""
    eye = np.eye(dim)
    normals = np.vstack([eye, -eye])
    return Polytope(normals=normals, offsets=np.full(2 * dim, float(radius)))


def cross_polytope(dim: int, radius: float = 1.0) -> Polytope:
    """The l^1 ball of the given radius as a vertex polytope."""
    eye = np.eye(dim)
    return Polytope(vertices=np.vstack([radius * eye, -radius * eye]))


def lp_ball(p, weights) -> ConvexBody:
    """Weighted l^p ball for any p in [1, inf].

    The smooth range 1 < p < inf returns an ``LpBall``.  The polyhedral cases
    p = 1 and p = inf are stored as polytopes (exact gauges, no smoothing)
    for dimensions up to 8, which covers every fixture here.
    """
    weights = np.asarray(weights, dtype=float)
    d = weights.shape[-1]
    if np.any(weights <= 0):
        raise NonConvexParameters("weights must be positive")
    if p == 1 or p == np.inf:
        if d > 8:
            raise NonConvexParameters(
                "polyhedral lp balls are only materialized for dim <= 8"
            )
        if p == 1:
            return Polytope(vertices=np.vstack([np.diag(weights), -np.diag(weights)]))
        eye = np.eye(d)
        return Polytope(
            normals=np.vstack([eye, -eye]),
            offsets=np.concatenate([weights, weights]),
        )
    return LpBall(float(p), weights)


def ball(dim: int, radius: float = 1.0) -> Ellipsoid:
    """The Euclidean ball of the given radius."""
    return Ellipsoid.from_radii(np.full(dim, float(radius)))


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------

def body_from_dict(obj: dict) -> ConvexBody:
    """Build a body from the {"kind", "dim", "params"} description."""
    if not isinstance(obj, dict):
        raise SpecParseError(f"body description must be an object, got {type(obj)}")
    try:
        kind = obj["kind"]
        dim = int(obj["dim"])
        params = obj.get("params", {})
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecParseError(f"malformed body description: {exc}") from exc

    if kind == "ellipsoid":
        if "matrix" in params:
            body = Ellipsoid(params["matrix"], center=params.get("center"))
        elif "radii" in params:
            body = Ellipsoid.from_radii(params["radii"], center=params.get("center"))
        else:
            raise SpecParseError("ellipsoid params need 'matrix' or 'radii'")
    elif kind == "lp":
        p = params.get("p")
        if p == "inf":
            p = np.inf
        if p is None or "weights" not in params:
            raise SpecParseError("lp params need 'p' and 'weights'")
        body = lp_ball(float(p), params["weights"])
    elif kind == "polytope_v":
        if "vertices" not in params:
            raise SpecParseError("polytope_v params need 'vertices'")
        body = Polytope(vertices=params["vertices"])
    elif kind == "polytope_h":
        if "normals" not in params or "offsets" not in params:
            raise SpecParseError("polytope_h params need 'normals' and 'offsets'")
        body = Polytope(normals=params["normals"], offsets=params["offsets"])
    else:
        raise SpecParseError(f"unknown body kind {kind!r}")

    if body.dim != dim:
        raise SpecParseError(
            f"declared dim {dim} does not match params (dim {body.dim})"
        )
    return body


def body_to_dict(body: ConvexBody) -> dict:
    return body.to_dict()


def body_from_json_file(path) -> ConvexBody:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecParseError(f"invalid JSON in {path}: {exc}") from exc
    return body_from_dict(obj)
