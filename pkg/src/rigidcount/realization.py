"""Complex planar realizations, the squared-distance form and canonical position.

A realization is stored as a complex array of shape ``(n, 2)``: row ``v`` holds
``(x_v, y_v)``.  Squared distances use the complex bilinear form
``d(x, y) = x**2 + y**2`` (no conjugation), which is what makes the count of
equivalent realizations an algebraic quantity.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import IsotropicEdgeError
from .graph import Graph

DEFAULT_TOL = 1e-8


class RealizationClass(str, enum.Enum):
    REAL = "Real"
    MINKOWSKI_X_REAL_Y_IMAG = "MinkowskiXReal_YImag"
    MINKOWSKI_X_IMAG_Y_REAL = "MinkowskiXImag_YReal"
    COMPLEX_GENERIC = "ComplexGeneric"


def as_realization(coords) -> np.ndarray:
    q = np.asarray(coords, dtype=complex)
    if q.ndim != 2 or q.shape[1] != 2:
        raise ValueError("a realization is an (n, 2) array of complex coordinates")
    return q


def squared_dist(p, q) -> complex:
    dx = complex(p[0]) - complex(q[0])
    dy = complex(p[1]) - complex(q[1])
    return dx * dx + dy * dy


def edge_measurements(g: Graph, p) -> np.ndarray:
    """Squared edge lengths in sorted edge order."""
    p = as_realization(p)
    if g.m == 0:
        return np.zeros(0, dtype=complex)
    u = np.array([e[0] for e in g.edges])
    v = np.array([e[1] for e in g.edges])
    diff = p[u] - p[v]
    return (diff**2).sum(axis=1)


def rigidity_matrix(g: Graph, p) -> np.ndarray:
    """``|E| x 2n`` matrix; the row of edge uv holds p(u)-p(v) under u and p(v)-p(u) under v."""
    p = as_realization(p)
    r = np.zeros((g.m, 2 * g.n), dtype=complex)
    for row, (u, v) in enumerate(g.edges):
        d = p[u] - p[v]
        r[row, 2 * u : 2 * u + 2] = d
        r[row, 2 * v : 2 * v + 2] = -d
    return r


def numeric_rank(mat: np.ndarray, rtol: float = 1e-8) -> int:
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    if s[0] == 0:
        return 0
    return int((s > rtol * s[0]).sum())


def random_generic_realization(g: Graph, seed: int, complex_coords: bool = False) -> np.ndarray:
    """Independent uniform coordinates on [-1, 1]; with ``complex_coords`` the imaginary parts too."""
    rng = np.random.default_rng(seed)
    q = rng.uniform(-1.0, 1.0, size=(g.n, 2)).astype(complex)
    if complex_coords:
        q = q + 1j * rng.uniform(-1.0, 1.0, size=(g.n, 2))
    return q


def _scale(q: np.ndarray) -> float:
    return max(1.0, float(np.abs(q).max())) if q.size else 1.0


def _upper(w: complex, tol: float) -> bool:
    """Arg(w) in (0, pi], deciding near-real values by the sign of the real part."""
    if abs(w.imag) <= tol * max(abs(w), 1e-300):
        return w.real < 0
    return w.imag > 0


def canonicalize(g: Graph | None, q, v1: int = 0, v2: int = 1, v3: int = 2, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Congruent copy with q(v1) = (0, 0), q(v2) = (0, d0), Arg d0 in (0, pi] and Arg x(v3) in (0, pi].

    Uses a translation, the rotation [[z1, z2], [-z2, z1]] with z1**2 + z2**2 = 1,
    and if needed the reflection x -> -x.  Positive reals have Arg 0, which lies
    outside (0, pi], so they are sent to the negative real axis.
    """
    q = as_realization(q)
    scale = _scale(q)
    t = q - q[v1]
    a, b = t[v2]
    d2 = a * a + b * b
    if abs(d2) <= tol * scale * scale:
        raise IsotropicEdgeError(f"d(q({v1}) - q({v2})) vanishes; no canonical position")
    d0 = np.sqrt(d2)
    if not _upper(complex(d0), tol):
        d0 = -d0
    z1, z2 = b / d0, -a / d0
    rot = np.array([[z1, z2], [-z2, z1]])
    out = t @ rot.T
    out[v1] = 0.0
    out[v2, 0] = 0.0
    out[v2, 1] = d0
    if q.shape[0] > v3:
        x3 = complex(out[v3, 0])
        if abs(x3) > tol * scale and not _upper(x3, tol):
            out[:, 0] = -out[:, 0]
    return out


def is_degenerate_canonical(q, v3: int = 2, tol: float = DEFAULT_TOL) -> bool:
    """x(v3) == 0 in canonical position: the probability-zero case left unnormalised."""
    q = as_realization(q)
    return q.shape[0] > v3 and abs(q[v3, 0]) <= tol * _scale(q)


def classify_realization(q, tol: float = DEFAULT_TOL) -> RealizationClass:
    q = as_realization(q)
    lim = tol * _scale(q)
    x, y = q[:, 0], q[:, 1]
    x_real = np.all(np.abs(x.imag) <= lim)
    y_real = np.all(np.abs(y.imag) <= lim)
    x_imag = np.all(np.abs(x.real) <= lim)
    y_imag = np.all(np.abs(y.real) <= lim)
    if x_real and y_real:
        return RealizationClass.REAL
    if x_imag and y_real:
        return RealizationClass.MINKOWSKI_X_IMAG_Y_REAL
    if x_real and y_imag:
        return RealizationClass.MINKOWSKI_X_REAL_Y_IMAG
    return RealizationClass.COMPLEX_GENERIC


def conjugate_canonical(q, v1: int = 0, v2: int = 1, v3: int = 2, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Complex conjugate of a canonical realization, returned to canonical position."""
    return canonicalize(None, np.conj(as_realization(q)), v1, v2, v3, tol)


def realization_to_json(q) -> dict:
    q = as_realization(q)
    return {
        str(v): [[float(q[v, 0].real), float(q[v, 0].imag)], [float(q[v, 1].real), float(q[v, 1].imag)]]
        for v in range(q.shape[0])
    }


def realization_from_json(d: dict) -> np.ndarray:
    n = len(d)
    q = np.zeros((n, 2), dtype=complex)
    for key, ((xr, xi), (yr, yi)) in d.items():
        q[int(key)] = (complex(xr, xi), complex(yr, yi))
    return q
