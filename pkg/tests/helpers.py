"""Shared generators and independent oracles for the test suite."""

import numpy as np
from scipy.linalg import expm

from symcap.geometry import Ellipsoid, Polytope
from symcap.loops import DiscreteLoop
from symcap.symplectic import SymplecticFrame


def fourier_loop(rng, frame, n_pts=64, modes=4, amplitude=1.0):
    """Random smooth closed loop from a low-order trigonometric sum."""
    t = 2.0 * np.pi * np.arange(n_pts) / n_pts
    x = np.zeros((n_pts, frame.dim))
    for k in range(1, modes + 1):
        a = rng.normal(size=frame.dim) * amplitude / k
        b = rng.normal(size=frame.dim) * amplitude / k
        x += np.cos(k * t)[:, None] * a + np.sin(k * t)[:, None] * b
    return x


def nonzero_action_loop(rng, frame, n_pts=64, modes=4, min_action=1e-6):
    """Fourier loop redrawn until its action is solidly nonzero."""
    for _ in range(50):
        x = fourier_loop(rng, frame, n_pts, modes)
        if abs(frame.polygon_action(x)) > min_action:
            return DiscreteLoop(frame, x)
    raise AssertionError("could not draw a loop with nonzero action")


def regular_polygon(frame, n_pts, radius=1.0, plane=0):
    """Regular n-gon in coordinate plane (q_plane, p_plane)."""
    t = 2.0 * np.pi * np.arange(n_pts) / n_pts
    x = np.zeros((n_pts, frame.dim))
    x[:, plane] = radius * np.cos(t)
    x[:, frame.n + plane] = radius * np.sin(t)
    return x


def random_symplectic_matrix(rng, n, scale=0.3):
    """exp(J S) with S symmetric is a symplectic matrix."""
    frame = SymplecticFrame(n)
    s = rng.normal(size=(2 * n, 2 * n)) * scale
    s = 0.5 * (s + s.T)
    return expm(frame.j_matrix() @ s)


def random_spd_matrix(rng, dim, spread=1.0):
    a = rng.normal(size=(dim, dim)) * spread
    return a @ a.T + 0.5 * np.eye(dim)


def random_symmetric_polytope(rng, dim, n_pairs=8):
    pts = rng.normal(size=(n_pairs, dim))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    pts *= rng.uniform(0.7, 1.3, size=(n_pairs, 1))
    return Polytope(vertices=np.vstack([pts, -pts]))


def random_symmetric_ellipsoid(rng, dim):
    return Ellipsoid(random_spd_matrix(rng, dim))


def dense_symmetric_boundary_loop(rng, body, n_half=200):
    """Dense centrally symmetric closed curve on the boundary.

    A path of directions is swept from a random direction to its antipode
    (with a transversal wobble so it is not a plane curve), projected to the
    boundary, and completed by its own reflection.  Vertex i and vertex
    i + n_half are exact antipodes by construction.
    """
    a = rng.normal(size=body.dim)
    a /= np.linalg.norm(a)
    b = rng.normal(size=body.dim)
    b -= (b @ a) * a
    b /= np.linalg.norm(b)
    c = rng.normal(size=body.dim)
    t = np.arange(n_half) / n_half
    dirs = (
        np.cos(np.pi * t)[:, None] * a
        + np.sin(np.pi * t)[:, None] * b
        + (0.25 * np.sin(2.0 * np.pi * t))[:, None] * c
    )
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    half = body.boundary_point(dirs)
    return np.vstack([half, -half])


def shoelace_area(points_2d):
    """Signed planar polygon area, the classical cross-product sum."""
    x = np.asarray(points_2d, dtype=float)
    x2 = np.roll(x, -1, axis=0)
    return 0.5 * float(np.sum(x[:, 0] * x2[:, 1] - x2[:, 0] * x[:, 1]))


def bisect_gauge(body, x, lo=1e-9, hi=1e9, iters=200):
    """Gauge by bisection on containment: the s with x/s on the boundary."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if body.contains(np.asarray(x) / mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
