"""Complex contour quadrature with sheet continuity.

Contours are lists of analytic pieces (segments, circular arcs, dense
polylines). Sheet tracking is by continuity of ``y`` along the contour: each
piece carries a precomputed "guide" of ``(u, y)`` samples dense enough that
the nearest guide value decides the sign of ``sqrt(f(x))`` unambiguously.

Integration is adaptive Gauss-Legendre (32/64 point pairs per interval with
bisection), per-piece absolute error targets and a per-contour budget. The
integrands are analytic along the pieces, so convergence is geometric once
subdivision has isolated the near-singular ends.
"""

from dataclasses import dataclass

import numpy as np

from .errors import QuadratureFailure

_GL_CACHE = {}


def _gl(n):
    got = _GL_CACHE.get(n)
    if got is None:
        x, w = np.polynomial.legendre.leggauss(n)
        # map to [0, 1]
        got = (0.5 * (x + 1.0), 0.5 * w)
        _GL_CACHE[n] = got
    return got


@dataclass(frozen=True)
class Piece:
    """One analytic piece of a contour in the x plane.

    kind "seg": straight from ``z0`` to ``z1``.
    kind "arc": ``center + radius * exp(i theta)``, theta from ``a0`` to ``a1``
    (signed; direction given by the sign of ``a1 - a0``).
    """

    kind: str
    z0: complex = 0j
    z1: complex = 0j
    center: complex = 0j
    radius: float = 0.0
    a0: float = 0.0
    a1: float = 0.0

    def x(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "seg":
            return self.z0 + u * (self.z1 - self.z0)
        th = self.a0 + u * (self.a1 - self.a0)
        return self.center + self.radius * np.exp(1j * th)

    def dxdu(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "seg":
            return np.full(u.shape, self.z1 - self.z0, dtype=complex)
        th = self.a0 + u * (self.a1 - self.a0)
        return 1j * self.radius * (self.a1 - self.a0) * np.exp(1j * th)

    @property
    def length(self):
        if self.kind == "seg":
            return abs(self.z1 - self.z0)
        return abs(self.radius * (self.a1 - self.a0))

    def reversed(self):
        if self.kind == "seg":
            return Piece("seg", z0=self.z1, z1=self.z0)
        return Piece("arc", center=self.center, radius=self.radius,
                     a0=self.a1, a1=self.a0)

    def endpoints(self):
        return complex(self.x(0.0)), complex(self.x(1.0))

    def to_json(self):
        if self.kind == "seg":
            return {"kind": "seg",
                    "z0": [self.z0.real, self.z0.imag],
                    "z1": [self.z1.real, self.z1.imag]}
        return {"kind": "arc",
                "center": [self.center.real, self.center.imag],
                "radius": self.radius, "a0": self.a0, "a1": self.a1}


def seg(z0, z1):
    return Piece("seg", z0=complex(z0), z1=complex(z1))


def arc(center, radius, a0, a1):
    return Piece("arc", center=complex(center), radius=float(radius),
                 a0=float(a0), a1=float(a1))


# -- sheet guides ----------------------------------------------------------------

class SheetGuide:
    """Samples ``(u_k, y_k)`` along a piece fixing the branch of ``sqrt(f)``."""

    __slots__ = ("us", "ys")

    def __init__(self, us, ys):
        self.us = us
        self.ys = ys

    @property
    def y_end(self):
        return complex(self.ys[-1])


def build_guide(curve, piece, y_start, max_rounds=40):
    """Continue ``y`` along a piece starting from ``y_start``.

    Nodes are refined until consecutive guide values differ by less than
    0.7 of the local magnitude, which bounds the rotation of ``y`` between
    nodes well below pi/2 and makes nearest-sign matching safe.
    """
    n0 = 17
    us = np.linspace(0.0, 1.0, n0)
    for _ in range(max_rounds):
        xs = piece.x(us)
        w = np.sqrt(curve.f(xs).astype(complex))
        ys = np.empty_like(w)
        prev = complex(y_start)
        for k in range(us.size):
            yk = w[k]
            if abs(yk - prev) > abs(yk + prev):
                yk = -yk
            ys[k] = yk
            prev = yk
        dy = np.abs(np.diff(ys))
        m = np.maximum(np.abs(ys[:-1]), np.abs(ys[1:]))
        bad = dy > 0.7 * m
        if not bad.any():
            return SheetGuide(us, ys)
        mids = 0.5 * (us[:-1][bad] + us[1:][bad])
        us = np.sort(np.concatenate([us, mids]))
    raise QuadratureFailure(
        "sheet guide failed to converge; contour passes too close to a branch point"
    )


def y_on_piece(curve, piece, guide, u):
    """Vectorized ``y`` at parameters ``u``, sign-matched to the guide."""
    u = np.asarray(u, dtype=float)
    x = piece.x(u)
    w = np.sqrt(curve.f(x).astype(complex))
    idx = np.searchsorted(guide.us, u)
    idx = np.clip(idx, 1, guide.us.size - 1)
    left_closer = (u - guide.us[idx - 1]) < (guide.us[idx] - u)
    ref = np.where(left_closer, guide.ys[idx - 1], guide.ys[idx])
    flip = np.abs(w - ref) > np.abs(w + ref)
    return np.where(flip, -w, w), x


# -- adaptive integration -----------------------------------------------------------

def adaptive_line_integral(fn, tol, max_depth=16):
    """Integrate a vectorized complex function over [0, 1] adaptively.

    Returns ``(value, error_estimate)``. Error estimates come from nested
    32/64-point Gauss-Legendre differences; intervals are bisected until the
    local estimate fits a budget proportional to the interval length.
    """
    u32, w32 = _gl(32)
    u64, w64 = _gl(64)
    total = 0.0 + 0.0j
    err = 0.0
    stack = [(0.0, 1.0, 0)]
    while stack:
        a, b, depth = stack.pop()
        h = b - a
        f32 = fn(a + h * u32)
        f64 = fn(a + h * u64)
        i32 = h * np.sum(w32 * f32)
        i64 = h * np.sum(w64 * f64)
        e = abs(i64 - i32)
        if e <= tol * max(h, 1e-3) or depth >= max_depth:
            if depth >= max_depth and e > 50 * tol:
                raise QuadratureFailure(
                    f"adaptive quadrature stalled (err {e:g} > tol {tol:g})"
                )
            total += i64
            err += e
        else:
            m = 0.5 * (a + b)
            stack.append((a, m, depth + 1))
            stack.append((m, b, depth + 1))
    return total, err


def integrate_piece(curve, w_fn, piece, guide, tol, max_depth=16):
    """Integrate ``w(x, y) dx`` over one piece with sheet continuity."""

    def fn(u):
        y, x = y_on_piece(curve, piece, guide, u)
        return w_fn(x, y) * piece.dxdu(u)

    return adaptive_line_integral(fn, tol, max_depth)


def integrate_polyline(curve, w_fn, xs, ys, tol, _depth=0):
    """Integrate ``w(x, y) dx`` over a dense polyline with known vertex sheets.

    Vertices carry their own ``y`` values (e.g. from a ray trace); between
    vertices the sign of ``sqrt(f)`` is matched against the linear
    interpolation of the endpoint values. All chords are evaluated in one
    vectorized 8-point Gauss-Legendre batch, with a nested 4-point rule for
    the error estimate; offending chords are bisected.
    """
    xs = np.asarray(xs, dtype=complex)
    ys = np.asarray(ys, dtype=complex)
    if xs.size < 2:
        return 0.0 + 0.0j, 0.0
    u8, w8 = _gl(8)
    u4, w4 = _gl(4)
    x0, x1 = xs[:-1], xs[1:]
    y0, y1 = ys[:-1], ys[1:]
    dx = (x1 - x0)[:, None]

    def chord_vals(un, wn):
        xg = x0[:, None] + un[None, :] * dx
        yref = y0[:, None] + un[None, :] * (y1 - y0)[:, None]
        w = np.sqrt(curve.f(xg).astype(complex))
        flip = np.abs(w - yref) > np.abs(w + yref)
        yg = np.where(flip, -w, w)
        vals = w_fn(xg, yg) * dx
        return vals @ wn

    i8 = chord_vals(u8, w8)
    i4 = chord_vals(u4, w4)
    echord = np.abs(i8 - i4)
    bad = echord > max(tol, 1e-15) / max(xs.size - 1, 1)
    if not bad.any() or _depth >= 8:
        return complex(i8.sum()), float(echord.sum())
    total = complex(i8[~bad].sum())
    err = float(echord[~bad].sum())
    for k in np.nonzero(bad)[0]:
        xm = 0.5 * (x0[k] + x1[k])
        ym_ref = 0.5 * (y0[k] + y1[k])
        ym = np.sqrt(complex(curve.f(xm)))
        if abs(ym - ym_ref) > abs(ym + ym_ref):
            ym = -ym
        v, e = integrate_polyline(
            curve, w_fn,
            np.array([x0[k], xm, x1[k]]), np.array([y0[k], ym, y1[k]]),
            tol / max(xs.size - 1, 1), _depth + 1,
        )
        total += v
        err += e
    return total, err
