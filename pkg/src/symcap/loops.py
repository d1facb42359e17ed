"""Discrete closed loops: gauge lengths, actions, resampling, containment.

A loop is a cyclic vertex list; edges are straight segments and the edge
i -> i+1 has gauge length g_K(x_{i+1} - x_i).  Splitting and resampling are
done by linear interpolation along edges, which is exact for 1-homogeneous
gauges: a point a fraction t along an edge sits at gauge distance t * g(edge)
from its start.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog, minimize, nnls
from scipy.special import logsumexp

from ._util import as_rng
from .errors import (
    DegenerateLoop,
    DimensionMismatch,
    OptimizerDidNotConverge,
    SpecParseError,
    TooFewVertices,
)
from .geometry import ConvexBody, Polytope
from .symplectic import SymplecticFrame


@dataclass
class DiscreteLoop:
    """A closed polygonal loop in a symplectic vector space."""

    frame: SymplecticFrame
    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2:
            raise DimensionMismatch("vertices must be an (N, 2n) array")
        if v.shape[1] != self.frame.dim:
            raise DimensionMismatch(
                f"vertices have dim {v.shape[1]}, frame has dim {self.frame.dim}"
            )
        if v.shape[0] < 3:
            raise TooFewVertices(f"a loop needs at least 3 vertices, got {v.shape[0]}")
        self.vertices = v

    def __len__(self):
        return self.vertices.shape[0]

    @property
    def dim(self) -> int:
        return self.frame.dim

    def edges(self) -> np.ndarray:
        """Edge vectors x_{i+1} - x_i, cyclically (last edge closes the loop)."""
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    def action(self) -> float:
        return float(self.frame.polygon_action(self.vertices))

    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    def translated(self, t) -> "DiscreteLoop":
        return DiscreteLoop(self.frame, self.vertices + np.asarray(t, dtype=float))

    def scaled(self, s: float) -> "DiscreteLoop":
        return DiscreteLoop(self.frame, self.vertices * float(s))

    def reversed(self) -> "DiscreteLoop":
        return DiscreteLoop(self.frame, self.vertices[::-1].copy())

    def normalize(self, rel_tol: float = 1e-12) -> "DiscreteLoop":
        """Drop consecutive duplicate vertices (cyclically)."""
        v = self.vertices
        scale = max(1.0, float(np.abs(v).max()))
        diff = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)
        keep = diff > rel_tol * scale
        # keep[i] False means vertex i+1 duplicates vertex i, so drop i+1
        mask = np.ones(len(v), dtype=bool)
        mask[(np.nonzero(~keep)[0] + 1) % len(v)] = False
        out = v[mask]
        if out.shape[0] < 3:
            raise DegenerateLoop("loop collapses to fewer than 3 distinct vertices")
        return DiscreteLoop(self.frame, out)

    def has_consecutive_duplicates(self, rel_tol: float = 1e-12) -> bool:
        v = self.vertices
        scale = max(1.0, float(np.abs(v).max()))
        diff = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)
        return bool(np.any(diff <= rel_tol * scale))

    def to_dict(self) -> dict:
        return {"dim": self.dim, "vertices": self.vertices.tolist()}

    @classmethod
    def from_dict(cls, obj: dict) -> "DiscreteLoop":
        try:
            dim = int(obj["dim"])
            vertices = np.asarray(obj["vertices"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecParseError(f"malformed loop description: {exc}") from exc
        if dim % 2 != 0:
            raise SpecParseError(f"loop dim must be even, got {dim}")
        return cls(SymplecticFrame(dim // 2), vertices)


def action(loop: DiscreteLoop) -> float:
    return loop.action()


def gauge_length(loop: DiscreteLoop, body: ConvexBody) -> float:
    """Total gauge length sum_i g_K(x_{i+1} - x_i) around the loop."""
    if body.dim != loop.dim:
        raise DimensionMismatch("loop and body dimensions differ")
    if loop.has_consecutive_duplicates():
        raise DegenerateLoop("consecutive duplicate vertices; call normalize first")
    return float(np.sum(body.gauge(loop.edges())))


# ---------------------------------------------------------------------------
# Arclength machinery shared by resampling, splitting and symmetrization
# ---------------------------------------------------------------------------

def _edge_norms(vertices, norm_fn, closed):
    v = np.asarray(vertices, dtype=float)
    diffs = (np.roll(v, -1, axis=0) - v) if closed else (v[1:] - v[:-1])
    return np.asarray(norm_fn(diffs), dtype=float)


def _point_at(vertices, cumlen, s, closed):
    """Point at arclength s along a polyline with cumulative edge lengths."""
    n_edges = len(cumlen) - 1
    idx = int(np.searchsorted(cumlen, s, side="right") - 1)
    idx = min(max(idx, 0), n_edges - 1)
    seg_len = cumlen[idx + 1] - cumlen[idx]
    t = 0.0 if seg_len <= 0 else (s - cumlen[idx]) / seg_len
    v = vertices
    a = v[idx]
    b = v[(idx + 1) % len(v)] if closed else v[idx + 1]
    return a + t * (b - a), idx, t


def resample_polyline(vertices, norm_fn, count, closed):
    """Resample a polyline at equal norm-arclength spacing.

    For a closed polyline, returns ``count`` vertices at arclengths
    k*L/count starting from vertex 0.  For an open one, returns ``count``
    vertices with both endpoints included.
    """
    v = np.asarray(vertices, dtype=float)
    lens = _edge_norms(v, norm_fn, closed)
    total = float(lens.sum())
    if total <= 0:
        raise DegenerateLoop("polyline has zero total length")
    cumlen = np.concatenate([[0.0], np.cumsum(lens)])
    cumlen[-1] = total
    if closed:
        targets = np.arange(count) * (total / count)
    else:
        targets = np.linspace(0.0, total, count)
    out = np.empty((count, v.shape[1]))
    for i, s in enumerate(targets):
        out[i], _, _ = _point_at(v, cumlen, min(s, total), closed)
    return out


def split_closed_at_fractions(vertices, norm_fn, pieces):
    """Split a closed polygonal loop into pieces of equal norm length.

    Returns a list of open vertex paths; consecutive paths share their
    endpoint, and the last path ends at vertex 0 again.  Split points landing
    inside an edge are inserted by linear interpolation.
    """
    v = np.asarray(vertices, dtype=float)
    n = len(v)
    lens = _edge_norms(v, norm_fn, closed=True)
    total = float(lens.sum())
    if total <= 0:
        raise DegenerateLoop("loop has zero total length")
    cumlen = np.concatenate([[0.0], np.cumsum(lens)])
    cumlen[-1] = total
    cuts = [k * total / pieces for k in range(pieces + 1)]
    scale = max(1.0, float(np.abs(v).max()))
    paths = []
    for k in range(pieces):
        s0, s1 = cuts[k], cuts[k + 1]
        p0, _, _ = _point_at(v, cumlen, s0, closed=True)
        p1, _, _ = _point_at(v, cumlen, s1, closed=True)
        path = [p0]
        # original vertices v_j sit at arclength cumlen[j]; keep those strictly
        # inside (s0, s1), then close with the interpolated endpoint
        for j in range(1, n + 1):
            if s0 < cumlen[j] < s1:
                path.append(v[j % n])
        path.append(p1)
        arr = np.asarray(path)
        keep = [0]
        for j in range(1, len(arr)):
            if np.linalg.norm(arr[j] - arr[keep[-1]]) > 1e-13 * scale:
                keep.append(j)
        paths.append(arr[keep])
    return paths


def resample_by_gauge_arclength(loop: DiscreteLoop, body: ConvexBody, count: int):
    """Resample a loop at equal gauge-arclength spacing, keeping vertex 0.

    Total gauge length and action are preserved exactly up to rounding,
    because inserted vertices are collinear with the edges they subdivide.
    """
    if count < 3:
        raise TooFewVertices(f"need at least 3 output vertices, got {count}")
    out = resample_polyline(loop.vertices, body.gauge, count, closed=True)
    return DiscreteLoop(loop.frame, out)


def split_at_half_length(loop: DiscreteLoop, body: ConvexBody):
    """Split a loop into two open paths of equal gauge length.

    The first path starts at vertex 0; both paths share their endpoints.
    """
    p1, p2 = split_closed_at_fractions(loop.vertices, body.gauge, 2)
    return p1, p2


# ---------------------------------------------------------------------------
# Containment score
# ---------------------------------------------------------------------------

@dataclass
class ContainmentDetails:
    sigma: float
    translation: np.ndarray
    gap: float
    trace: list = field(default_factory=list)
    method: str = "descent"


def containment_score(
    loop,
    body: ConvexBody,
    restarts: int = 20,
    gap_tol: float = 1e-7,
    rng=None,
    return_details: bool = False,
):
    """sigma = min over translations t of max_i g_K(x_i - t).

    The objective is convex in t.  Polytope bodies are solved exactly as a
    linear program; smooth bodies use subgradient descent with restarts,
    a smoothed quasi-Newton polish, and a simplex certificate that bounds
    the remaining gap.  Raises OptimizerDidNotConverge when the certified
    gap exceeds ``gap_tol`` times the score scale.

    Accepts a DiscreteLoop or a plain (N, d) array of points.
    """
    pts = loop.vertices if isinstance(loop, DiscreteLoop) else np.asarray(loop, float)
    if pts.ndim != 2 or pts.shape[1] != body.dim:
        raise DimensionMismatch("points must be (N, d) matching the body dimension")

    if isinstance(body, Polytope):
        details = _containment_lp(pts, body)
    else:
        details = _containment_descent(pts, body, restarts, gap_tol, as_rng(rng))
    if details.gap > gap_tol * max(1.0, details.sigma):
        raise OptimizerDidNotConverge(
            f"containment score gap {details.gap:.3e} above tolerance",
            best=details.sigma,
            gap=details.gap,
        )
    return details if return_details else details.sigma


def _containment_lp(pts, body: Polytope) -> ContainmentDetails:
    # minimize s  s.t.  <A_j, x_i> - <A_j, t> <= s * b_j  for all i, j
    a, b = body.normals, body.offsets
    n_pts, d = pts.shape
    m = len(a)
    a_ub = np.hstack(
        [np.tile(-a, (n_pts, 1)), np.repeat(-b[None, :], n_pts, axis=0).reshape(-1, 1)]
    )
    b_ub = -(pts @ a.T).ravel()
    res = linprog(
        c=np.concatenate([np.zeros(d), [1.0]]),
        A_ub=a_ub,
        b_ub=b_ub,
        bounds=[(None, None)] * d + [(0, None)],
        method="highs",
    )
    if not res.success:
        raise OptimizerDidNotConverge(f"containment LP failed: {res.message}")
    t = res.x[:d]
    sigma = float(np.max(body.gauge(pts - t)))
    return ContainmentDetails(
        sigma=sigma, translation=t, gap=1e-9 * max(1.0, sigma), trace=[sigma],
        method="lp",
    )


def _containment_descent(pts, body, restarts, gap_tol, rng) -> ContainmentDetails:
    def objective(t):
        return float(np.max(body.gauge(pts - t)))

    scale = max(1.0, float(np.abs(pts).max()))
    best_t = pts.mean(axis=0)
    best_f = objective(best_t)
    trace = [best_f]
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)

    # phase 1: plain subgradient descent with diminishing steps, restarted
    for r in range(restarts):
        t = best_t if r == 0 else rng.uniform(lo, hi)
        f = objective(t)
        step0 = 0.3 * scale
        for k in range(1, 61):
            values = body.gauge(pts - t)
            i = int(np.argmax(values))
            sub = -body.gauge_gradient(pts[i] - t)
            norm = np.linalg.norm(sub)
            if norm == 0:
                break
            t = t - (step0 / np.sqrt(k)) * sub / norm
            f = objective(t)
            if f < best_f:
                best_f, best_t = f, t.copy()
                trace.append(best_f)

    # phase 2: smoothed polish (softmax of the gauges, decreasing temperature)
    def smooth(t, mu):
        g = body.gauge(pts - t)
        val = mu * logsumexp(g / mu)
        w = np.exp((g - np.max(g)) / mu)
        w /= w.sum()
        grad = -(w[:, None] * body.gauge_gradient(pts - t)).sum(axis=0)
        return val, grad

    t = best_t.copy()
    for mu in [1e-2, 1e-4, 1e-6, 1e-8]:
        res = minimize(
            smooth,
            t,
            args=(mu * max(best_f, 1e-9),),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": 200, "ftol": 1e-18, "gtol": 1e-14},
        )
        t = res.x
        f = objective(t)
        if f < best_f:
            best_f, best_t = f, t.copy()
            trace.append(best_f)

    # phase 3: the valley of a max-of-gauges objective can be so flat that the
    # value converges long before the position does, which leaves the
    # subgradient certificate loose.  Linearized trust-region steps
    # (min s s.t. g_i + <dg_i, delta> <= s) pin the equalizing point.
    d = pts.shape[1]
    trust = 1e-2 * max(1.0, best_f)
    for _ in range(40):
        values = body.gauge(pts - best_t)
        order = np.argsort(values)[::-1]
        act = order[: min(len(pts), d + 3)]
        grads = -body.gauge_gradient(pts[act] - best_t)
        res = linprog(
            c=np.concatenate([np.zeros(d), [1.0]]),
            A_ub=np.hstack([grads, -np.ones((len(act), 1))]),
            b_ub=-values[act],
            bounds=[(-trust, trust)] * d + [(None, None)],
            method="highs",
        )
        if not res.success:
            break
        predicted = best_f - res.x[d]
        if predicted <= 1e-16 * max(1.0, best_f):
            break
        f_new = objective(best_t + res.x[:d])
        rho = (best_f - f_new) / predicted
        if f_new < best_f:
            best_t = best_t + res.x[:d]
            best_f = f_new
            trace.append(best_f)
        if rho > 0.75:
            trust = min(2.0 * trust, 1.0)
        elif rho < 0.25:
            trust *= 0.25
            if trust < 1e-14:
                break

    # phase 4: Newton on the tie system.  First-order steps stall once the
    # predicted decrease hits rounding, still ~1e-7 away in position; solving
    # the stationarity + equal-value equations directly recovers the point to
    # machine precision, which is what makes the certificate tight.
    t_newton = _equalization_newton(pts, body, best_t)
    if t_newton is not None:
        f_newton = objective(t_newton)
        if _containment_certificate(pts, body, t_newton, f_newton) < (
            _containment_certificate(pts, body, best_t, best_f)
        ):
            best_t, best_f = t_newton, f_newton
            trace.append(best_f)

    gap = _containment_certificate(pts, body, best_t, best_f)
    return ContainmentDetails(
        sigma=best_f, translation=best_t, gap=gap, trace=trace, method="descent"
    )


def _containment_certificate(pts, body, t_hat, f_hat):
    """Certified optimality gap from a simplex combination of subgradients.

    For any simplex weights lam supported on the points, convexity gives
    F(t) >= sum lam_i g_i(t_hat) - |sum lam_i grad_i| * |t - t_hat|, and the
    minimizer is known to lie within a computable radius R of t_hat.  The
    active cutoff trades the value spread against the hull norm, so several
    cutoffs are tried and the best certified bound wins.
    """
    values = body.gauge(pts - t_hat)
    radius = float(
        np.min(np.linalg.norm(pts - t_hat, axis=1)) + body.outer_radius() * f_hat
    )
    best_gap = np.inf
    for rel_cut in (1e-12, 1e-9, 1e-6):
        cutoff = f_hat - rel_cut * max(1.0, f_hat)
        active = np.nonzero(values >= cutoff)[0]
        if len(active) == 0:
            continue
        grads = body.gauge_gradient(pts[active] - t_hat)  # (k, d)
        # min-norm point in the convex hull of the gradients, augmented NNLS
        g_mat = grads.T
        rho = 10.0 * max(1.0, float(np.abs(g_mat).max()))
        a_mat = np.vstack([g_mat, rho * np.ones((1, len(active)))])
        b_vec = np.concatenate([np.zeros(g_mat.shape[0]), [rho]])
        lam, _ = nnls(a_mat, b_vec)
        s = lam.sum()
        if s <= 0:
            lam = np.full(len(active), 1.0 / len(active))
        else:
            lam = lam / s
        r = float(np.linalg.norm(g_mat @ lam))
        lower = float(lam @ values[active]) - r * radius
        best_gap = min(best_gap, max(f_hat - lower, 0.0))
    return best_gap


def _equalization_newton(pts, body, t0, max_iter=10):
    """Solve the minimax tie system at the current active set exactly.

    Unknowns (t, lam); equations: sum_i lam_i dg_i(t) = 0, g_i(t) = g_0(t)
    for the active set, sum lam = 1.  Jacobian blocks use finite differences
    of the gauge gradient.  Returns the refined translation, or None when the
    active structure does not support a Newton step.
    """
    d = pts.shape[1]
    values = body.gauge(pts - t0)
    fmax = float(values.max())
    act = np.nonzero(values >= fmax - 1e-6 * max(1.0, fmax))[0]
    k = len(act)
    if k < 2 or k > d + 1:
        return None
    x = pts[act]

    def grad_rows(tt):
        return -body.gauge_gradient(x - tt)  # row i is d g_i / d t

    def residual(tt, ll):
        g = body.gauge(x - tt)
        rows = grad_rows(tt)
        return np.concatenate([rows.T @ ll, g[1:] - g[0], [ll.sum() - 1.0]])

    t = t0.copy()
    lam = np.full(k, 1.0 / k)
    h = 1e-6 * max(1.0, float(np.abs(t).max()))
    for _ in range(max_iter):
        res = residual(t, lam)
        nrm = np.linalg.norm(res)
        if nrm < 1e-13:
            break
        rows = grad_rows(t)
        hess = np.empty((k, d, d))
        for j in range(d):
            e = np.zeros(d)
            e[j] = h
            hess[:, :, j] = (grad_rows(t + e) - grad_rows(t - e)) / (2 * h)
        jac = np.zeros((d + k, d + k))
        jac[:d, :d] = np.einsum("i,ipj->pj", lam, hess)
        jac[:d, d:] = rows.T
        jac[d : d + k - 1, :d] = rows[1:] - rows[0]
        jac[d + k - 1, d:] = 1.0
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            return None
        alpha = 1.0
        for _ in range(25):
            t_try = t + alpha * step[:d]
            lam_try = lam + alpha * step[d:]
            if np.linalg.norm(residual(t_try, lam_try)) < nrm:
                t, lam = t_try, lam_try
                break
            alpha *= 0.5
        else:
            break
    return t


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

def export_loop_metrics(loops, body: ConvexBody, path, sigma: bool = True):
    """Write one CSV row per loop with its basic metrics."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["index", "n_vertices", "gauge_length", "action"]
        if sigma:
            header.append("containment_score")
        writer.writerow(header)
        for i, loop in enumerate(loops):
            row = [
                i,
                len(loop),
                format(gauge_length(loop, body), ".12g"),
                format(loop.action(), ".12g"),
            ]
            if sigma:
                row.append(format(containment_score(loop, body), ".12g"))
            writer.writerow(row)
