"""Odd-model hyperelliptic curves ``y^2 = prod_(i=1)^(2g+1) (x - lam_i)``.

The marked point ``p1`` is the single point over ``x = inf``. Its local
coordinate is ``t`` with ``x = t^-2`` and ``y = t^-(2g+1) * S(t)`` where
``S(t) = sqrt(prod(1 - lam_i t^2))``, sign fixed by ``S(0) = 1``.

All objects here are immutable after construction and safe to share between
threads; derived data (polynomial coefficients, chart series) is precomputed.
"""

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import AtBranchPoint, DuplicateBranchPoint, EvenCount, NotNearInfinity
from .series import ps_inv, ps_sqrt, ps_eval


class HyperellipticCurve:
    """Branch-point configuration with its derived data.

    Use :func:`build_curve`; the constructor performs the validation.
    """

    def __init__(self, branch_points, tol: Tolerances = DEFAULT_TOL):
        pts = tuple(complex(b) for b in branch_points)
        if len(pts) < 3 or len(pts) % 2 == 0:
            raise EvenCount(
                f"need an odd number >= 3 of branch points, got {len(pts)}"
            )
        arr = np.asarray(pts, dtype=complex)
        diff = np.abs(arr[:, None] - arr[None, :])
        np.fill_diagonal(diff, np.inf)
        dmin = float(diff.min())
        if dmin <= tol.duplicate_branch:
            i, j = np.unravel_index(int(diff.argmin()), diff.shape)
            raise DuplicateBranchPoint(
                f"branch points {i} and {j} coincide within {tol.duplicate_branch:g}"
                f" (distance {dmin:g})"
            )
        self.branch_points = pts
        self.genus = (len(pts) - 1) // 2
        self.tol = tol
        # monic f(x) = prod (x - lam_i), coefficients lowest order first
        c = np.array([1.0 + 0.0j])
        for lam in pts:
            c = np.convolve(c, np.array([-lam, 1.0 + 0.0j]))
        self.f_coeffs = c
        self.scale = max(1.0, float(np.abs(arr).max()))
        self.min_branch_gap = dmin
        # radius beyond which the t-chart series is used
        self.chart_radius = 4.0 * float(np.abs(arr).max()) + 4.0
        # branch points sorted by (Re, Im); used by the homology module
        order = sorted(range(len(pts)), key=lambda k: (pts[k].real, pts[k].imag))
        self.sorted_points = tuple(pts[k] for k in order)
        self._chart_series_cache = {}
        self._extras = {}

    # -- polynomial evaluation -------------------------------------------

    def f(self, x):
        """Evaluate ``f(x)``, scalar or array."""
        return np.polynomial.polynomial.polyval(x, self.f_coeffs)

    def df(self, x):
        return np.polynomial.polynomial.polyval(
            x, np.polynomial.polynomial.polyder(self.f_coeffs)
        )

    def principal_y(self, x):
        """The fixed no-hint lift convention: product of principal square roots
        of the factors ``x - lam_i``. Deterministic, not continuous in ``x``."""
        x = np.asarray(x, dtype=complex)
        y = np.ones_like(x)
        for lam in self.branch_points:
            y = y * np.sqrt(x - lam)
        return y if y.shape else complex(y)

    def dist_to_branch(self, x):
        x = np.asarray(x, dtype=complex)
        d = np.full(x.shape, np.inf)
        for lam in self.branch_points:
            d = np.minimum(d, np.abs(x - lam))
        return d if d.shape else float(d)

    # -- chart series -------------------------------------------------------

    def chart_series(self, order):
        """Coefficients of ``S(t)`` (even series, ``S(0) = 1``) up to ``t^(order-1)``."""
        key = int(order)
        got = self._chart_series_cache.get(key)
        if got is not None:
            return got
        # prod (1 - lam t^2) as a series in t
        p = np.array([1.0 + 0.0j])
        for lam in self.branch_points:
            p = np.convolve(p, np.array([1.0 + 0.0j, 0.0, -lam]))
        s = ps_sqrt(p, order)
        self._chart_series_cache[key] = s
        return s

    def chart_y(self, t, order=60):
        """``y`` at the chart point ``t`` (exactly ``t^-(2g+1) S(t)``)."""
        s = ps_eval(self.chart_series(order), t)
        return s * t ** (-(2 * self.genus + 1))

    def branch_y_series(self, k, order):
        """Odd local expansion of ``y`` at branch point ``lam_k``.

        With ``x = lam_k + s^2``, returns coefficients ``v`` of the even series
        ``v(s)`` such that ``y = s * v(s)``; ``v`` has only even powers filled.
        """
        lam = self.branch_points[k]
        # f(lam + u) as a polynomial in u, then substitute u = s^2
        shifted = _shift_poly(self.f_coeffs, lam)
        # shifted[0] == f(lam) == 0; h(u) = f(lam+u)/u
        h = shifted[1:]
        hs = np.zeros(order, dtype=complex)
        hs[0 : 2 * h.size : 2] = h[: (order + 1) // 2]
        return ps_sqrt(hs, order)

    def __repr__(self):
        return f"HyperellipticCurve(genus={self.genus}, branch_points={self.branch_points})"

    def __eq__(self, other):
        return (
            isinstance(other, HyperellipticCurve)
            and self.branch_points == other.branch_points
        )

    def __hash__(self):
        return hash(self.branch_points)


def _shift_poly(coeffs, a):
    """Coefficients of ``p(a + u)`` in ``u``, lowest order first."""
    c = np.asarray(coeffs, dtype=complex)
    n = c.size
    out = np.zeros(n, dtype=complex)
    # Horner with polynomial accumulator
    acc = np.zeros(1, dtype=complex)
    for ck in c[::-1]:
        acc = np.convolve(acc, np.array([a, 1.0 + 0.0j]))[:n]
        acc[0] += ck
    out[: acc.size] = acc
    return out


class SurfacePoint:
    """A point ``(x, y)`` on the curve, on a definite sheet."""

    __slots__ = ("x", "y")

    def __init__(self, x, y):
        self.x = complex(x)
        self.y = complex(y)

    def __repr__(self):
        return f"SurfacePoint(x={self.x!r}, y={self.y!r})"

    def involution(self):
        return SurfacePoint(self.x, -self.y)


class InfinityChart:
    """Local coordinate ``t`` at the marked point, ``x = t^-2``."""

    __slots__ = ("t", "curve")

    def __init__(self, t, curve):
        self.t = complex(t)
        self.curve = curve

    def to_point(self, order=60):
        t = self.t
        x = 1.0 / (t * t)
        return SurfacePoint(x, self.curve.chart_y(t, order))

    def __repr__(self):
        return f"InfinityChart(t={self.t!r})"


def build_curve(branch_points, tol: Tolerances = DEFAULT_TOL) -> HyperellipticCurve:
    """Validate a branch-point list and build the curve."""
    return HyperellipticCurve(branch_points, tol)


def curve_from_json(obj, tol: Tolerances = DEFAULT_TOL) -> HyperellipticCurve:
    """Ingest ``{"branch_points": [[re, im], ...]}``."""
    pts = [complex(p[0], p[1]) for p in obj["branch_points"]]
    return build_curve(pts, tol)


def lift(curve: HyperellipticCurve, x, sheet_hint=None) -> SurfacePoint:
    """Lift ``x`` to the curve.

    With no hint, the sheet is the product-of-principal-square-roots
    convention of :meth:`HyperellipticCurve.principal_y`. With a hint, the
    branch of ``sqrt(f(x))`` nearest the hint is chosen.
    """
    x = complex(x)
    d = curve.dist_to_branch(x)
    if d <= 10 * curve.tol.duplicate_branch:
        raise AtBranchPoint(f"x={x!r} is within {d:g} of a branch point")
    if sheet_hint is None:
        return SurfacePoint(x, curve.principal_y(x))
    y = np.sqrt(complex(curve.f(x)))
    h = complex(sheet_hint)
    if abs(y - h) > abs(y + h):
        y = -y
    return SurfacePoint(x, y)


def to_infinity_chart(curve: HyperellipticCurve, point: SurfacePoint, order=60) -> InfinityChart:
    """Chart coordinate of a point with ``|x|`` above the chart radius.

    ``t`` satisfies ``t^2 = 1/x`` with the sign fixed so that
    ``y * t^(2g+1) -> 1`` (equivalently ``y`` matches ``t^-(2g+1) S(t)``).
    """
    x = point.x
    if abs(x) < curve.chart_radius:
        raise NotNearInfinity(
            f"|x|={abs(x):g} below chart radius {curve.chart_radius:g}"
        )
    t = 1.0 / np.sqrt(complex(x))
    y_pred = curve.chart_y(t, order)
    if abs(y_pred - point.y) > abs(y_pred + point.y):
        t = -t
        y_pred = curve.chart_y(t, order)
    # consistency of the chart with the point
    rel = abs(y_pred - point.y) / (1.0 + abs(point.y))
    if rel > 1e-6:
        raise NotNearInfinity(
            f"chart series disagrees with point (rel error {rel:g});"
            " point too close to the chart boundary"
        )
    return InfinityChart(t, curve)
