"""Homology basis cycles on the odd hyperelliptic model.

Branch points are sorted by (Re, Im). ``A_j`` is a thin stadium ("dumbbell")
around the sorted pair ``(lam_(2j-1), lam_(2j))``; ``B_j`` is a closed
corridor hugging the polyline through ``lam_(2j), ..., lam_(2g+1)``, so it
encircles exactly that even-sized set. Corridor widths are nested (wider for
smaller ``j``) and strictly larger than the dumbbell radius, which makes all
the off-diagonal intersections vanish geometrically; orientations are then
fixed numerically so the intersection matrix is the standard symplectic form.

Intersection numbers are computed combinatorially: signed transversal
crossings of the x-plane projections, counted only where the two curves lie
on the same sheet.
"""

import numpy as np

from .config import DEFAULT_TOL
from .errors import ContourClearance, LatticeResidualTooLarge, NotClosed
from .quadrature import Piece, arc, build_guide, seg, y_on_piece


class Cycle:
    """A closed contour on the curve: analytic pieces plus a starting sheet."""

    def __init__(self, curve, pieces, label=None, y0=None):
        self.curve = curve
        self.pieces = tuple(pieces)
        self.label = label
        scale = curve.scale
        for a, b in zip(self.pieces, self.pieces[1:]):
            if abs(a.x(1.0) - b.x(0.0)) > 1e-9 * scale:
                raise NotClosed(f"pieces of cycle {label!r} do not chain")
        if abs(self.pieces[-1].x(1.0) - self.pieces[0].x(0.0)) > 1e-9 * scale:
            raise NotClosed(f"cycle {label!r} does not close in the x plane")
        start = complex(self.pieces[0].x(0.0))
        self.y0 = complex(y0) if y0 is not None else complex(curve.principal_y(start))
        self._guides = None

    def guides(self):
        """Sheet guides for every piece, built once by continuity."""
        if self._guides is None:
            gs = []
            y = self.y0
            for p in self.pieces:
                g = build_guide(self.curve, p, y)
                gs.append(g)
                y = g.y_end
            if abs(y - self.y0) > 1e-7 * (1.0 + abs(self.y0)):
                raise NotClosed(
                    f"cycle {self.label!r} does not close on the surface "
                    f"(sheet mismatch {abs(y - self.y0):g})"
                )
            self._guides = tuple(gs)
        return self._guides

    def reversed(self):
        gs = self.guides()
        rev = Cycle(
            self.curve,
            [p.reversed() for p in reversed(self.pieces)],
            label=f"-{self.label}" if self.label else None,
            y0=gs[-1].y_end,
        )
        return rev

    def discretize(self, per_arc=32):
        """Polyline approximation with per-vertex sheet values."""
        xs, ys = [], []
        for p, g in zip(self.pieces, self.guides()):
            n = 1 if p.kind == "seg" else per_arc
            u = np.linspace(0.0, 1.0, n + 1)[:-1]
            y, x = y_on_piece(self.curve, p, g, u)
            xs.append(x)
            ys.append(y)
        xs.append(np.array([self.pieces[0].x(0.0)]))
        ys.append(np.array([self.y0]))
        return np.concatenate(xs), np.concatenate(ys)

    def to_json(self):
        return {
            "label": self.label,
            "y0": [self.y0.real, self.y0.imag],
            "pieces": [p.to_json() for p in self.pieces],
        }

    def __repr__(self):
        return f"Cycle({self.label!r}, {len(self.pieces)} pieces)"


class HomologyClass:
    """Integer coordinates in the fixed (A_1..A_g, B_1..B_g) basis."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = tuple(int(c) for c in coeffs)

    def __add__(self, other):
        return HomologyClass([a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return HomologyClass([-a for a in self.coeffs])

    def __eq__(self, other):
        return isinstance(other, HomologyClass) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def __repr__(self):
        return f"HomologyClass{self.coeffs}"


# -- geometric constructions ---------------------------------------------------------


def _dumbbell(curve, a, b, rho, label):
    e = (b - a) / abs(b - a)
    n = 1j * e
    tn = np.angle(n)
    pieces = [
        seg(a + rho * n, b + rho * n),
        arc(b, rho, tn, tn - np.pi),
        seg(b - rho * n, a - rho * n),
        arc(a, rho, tn - np.pi, tn - 2 * np.pi),
    ]
    return Cycle(curve, pieces, label=label)


def _corridor(curve, pts, w, label):
    """Closed corridor of half-width ``w`` around the open polyline ``pts``."""
    m = len(pts)
    es = [(pts[k + 1] - pts[k]) / abs(pts[k + 1] - pts[k]) for k in range(m - 1)]
    ns = [1j * e for e in es]

    def offsets(sign):
        out = [pts[0] + sign * w * ns[0]]
        for k in range(1, m - 1):
            mdir = ns[k - 1] + ns[k]
            nm = abs(mdir)
            if nm < 0.5:
                raise ContourClearance("corridor turn angle too sharp")
            mdir /= nm
            cosphi = (mdir * np.conj(ns[k])).real
            out.append(pts[k] + sign * (w / cosphi) * mdir)
        out.append(pts[-1] + sign * w * ns[-1])
        return out

    plus = offsets(+1.0)
    minus = offsets(-1.0)
    tn_end = np.angle(ns[-1])
    tn_start = np.angle(ns[0])
    pieces = []
    for k in range(m - 1):
        pieces.append(seg(plus[k], plus[k + 1]))
    pieces.append(arc(pts[-1], w, tn_end, tn_end - np.pi))
    for k in range(m - 1, 0, -1):
        pieces.append(seg(minus[k], minus[k - 1]))
    pieces.append(arc(pts[0], w, tn_start - np.pi, tn_start - 2 * np.pi))
    return Cycle(curve, pieces, label=label)


def _point_segment_distance(p, a, b):
    ab = b - a
    t = ((p - a) * np.conj(ab)).real / abs(ab) ** 2
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * ab))


def _clearance(points):
    """Smallest of: pairwise distances, and distances from each point to the
    non-incident segments of the sorted polyline."""
    pts = list(points)
    n = len(pts)
    d = min(
        abs(pts[i] - pts[j]) for i in range(n) for j in range(i + 1, n)
    )
    for k in range(n):
        for i in range(n - 1):
            if k in (i, i + 1):
                continue
            d = min(d, _point_segment_distance(pts[k], pts[i], pts[i + 1]))
    return d


def standard_basis(curve):
    """The fixed symplectic basis ``[A_1..A_g, B_1..B_g]``.

    Raises ContourClearance when the branch points are too crowded to route
    the contours, and asserts (numerically) that the intersection matrix is
    the standard symplectic form after orientation fixing.
    """
    cached = curve._extras.get("standard_basis")
    if cached is not None:
        return cached
    g = curve.genus
    sp = curve.sorted_points
    clear = _clearance(sp)
    if clear < 50 * curve.tol.duplicate_branch:
        raise ContourClearance(
            f"branch-point clearance {clear:g} too small for contour routing"
        )
    rho_a = 0.18 * clear
    a_cycles = [
        _dumbbell(curve, sp[2 * j], sp[2 * j + 1], rho_a, label=f"A{j + 1}")
        for j in range(g)
    ]
    b_cycles = []
    for j in range(g):
        if g > 1:
            w = clear * (0.30 + 0.30 * (g - 1 - j) / (g - 1))
        else:
            w = 0.30 * clear
        pts = list(sp[2 * j + 1 :])
        b_cycles.append(_corridor(curve, pts, w, label=f"B{j + 1}"))

    basis = a_cycles + b_cycles
    # orientation fixing: require A_j . B_j = +1
    for j in range(g):
        s = intersection(basis[j], basis[g + j])
        if s == -1:
            basis[g + j] = basis[g + j].reversed()
            basis[g + j].label = f"B{j + 1}"
        elif s != 1:
            raise ContourClearance(
                f"unexpected intersection A{j + 1}.B{j + 1} = {s}; "
                "contour routing failed"
            )
    m = intersection_matrix(basis)
    jmat = np.block(
        [[np.zeros((g, g), dtype=int), np.eye(g, dtype=int)],
         [-np.eye(g, dtype=int), np.zeros((g, g), dtype=int)]]
    )
    if not np.array_equal(m, jmat):
        raise ContourClearance(
            f"intersection matrix is not symplectic:\n{m}"
        )
    curve._extras["standard_basis"] = basis
    return basis


# -- intersections -----------------------------------------------------------------


def intersection_polylines(x1, y1, x2, y2):
    """Signed same-sheet crossing count of two closed polylines.

    Crossing parameters are half-open in [0, 1) per chord so shared endpoints
    are not double counted. The sheet test compares the interpolated ``y``
    values at the crossing point.
    """
    p = x1[:-1]
    r = x1[1:] - x1[:-1]
    q = x2[:-1]
    s = x2[1:] - x2[:-1]
    rxs = (np.conj(r)[:, None] * s[None, :]).imag
    qp = q[None, :] - p[:, None]
    qpxs = (np.conj(qp) * s[None, :]).imag
    qpxr = (np.conj(qp) * r[:, None]).imag
    scale = (np.abs(r)[:, None] * np.abs(s)[None, :]) + 1e-300
    ok = np.abs(rxs) > 1e-12 * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(ok, qpxs / rxs, -1.0)
        u = np.where(ok, qpxr / rxs, -1.0)
    hit = ok & (t >= 0.0) & (t < 1.0) & (u >= 0.0) & (u < 1.0)
    if not hit.any():
        return 0
    ii, jj = np.nonzero(hit)
    tt = t[ii, jj]
    uu = u[ii, jj]
    ya = y1[:-1][ii] + tt * (y1[1:] - y1[:-1])[ii]
    yb = y2[:-1][jj] + uu * (y2[1:] - y2[:-1])[jj]
    same = np.abs(ya - yb) <= np.abs(ya + yb)
    signs = np.sign(rxs[ii, jj])
    return int(np.sum(signs[same]))


def intersection(c1, c2):
    """Algebraic intersection number of two cycles on the same curve."""
    if c1 is c2 or (c1.pieces == c2.pieces and c1.y0 == c2.y0):
        return 0
    x1, y1 = c1.discretize()
    x2, y2 = c2.discretize()
    return intersection_polylines(x1, y1, x2, y2)


def intersection_matrix(cycles):
    n = len(cycles)
    m = np.zeros((n, n), dtype=int)
    for i in range(n):
        for j in range(i + 1, n):
            v = intersection(cycles[i], cycles[j])
            m[i, j] = v
            m[j, i] = -v
    return m


def class_from_intersections(x, y, basis):
    """Class of a closed polyline from its intersections with the basis.

    For ``c = sum m_k A_k + sum n_k B_k`` one has ``m_k = c . B_k`` and
    ``n_k = -(c . A_k)``.
    """
    g = len(basis) // 2
    ms, ns = [], []
    for k in range(g):
        bx, by = basis[g + k].discretize()
        ms.append(intersection_polylines(x, y, bx, by))
    for k in range(g):
        ax, ay = basis[k].discretize()
        ns.append(-intersection_polylines(x, y, ax, ay))
    return HomologyClass(ms + ns)


# -- the period-lattice solve ----------------------------------------------------------


def class_from_periods(v, basis_periods, tol=DEFAULT_TOL):
    """Integer class of a cycle from its holomorphic period vector.

    ``v`` is the g-vector of periods of the holomorphic basis over the cycle;
    ``basis_periods`` is the (2g x g) matrix of the same periods over the
    basis cycles (row per basis cycle). The solve is over the reals and then
    rounded; the post-rounding residual must be below the configured bound.
    """
    v = np.asarray(v, dtype=complex)
    bp = np.asarray(basis_periods, dtype=complex)
    m2g = bp.shape[0]
    areal = np.vstack([bp.T.real, bp.T.imag])  # (2g, 2g)
    rhs = np.concatenate([v.real, v.imag])
    sol = np.linalg.solve(areal, rhs)
    ints = np.rint(sol)
    scale = max(1.0, float(np.abs(bp).max()))
    residual = float(np.abs(areal @ ints - rhs).max())
    if residual > tol.lattice_residual * scale:
        raise LatticeResidualTooLarge(
            f"lattice residual {residual:g} exceeds "
            f"{tol.lattice_residual * scale:g} (non-closed chain or numerical failure)"
        )
    return HomologyClass(ints.astype(int)), residual


def class_of(cycle_or_chain, period_table):
    """Homology class via the period-lattice solve.

    ``cycle_or_chain`` is a Cycle or a list of ``(int, Cycle)`` pairs (a formal
    chain; periods add). ``period_table`` must provide the holomorphic basis
    periods over the standard basis (see diff_periods.period_matrix) and the
    means to integrate over the argument cycle.
    """
    from .differentials import holomorphic_periods_over  # local import, no cycle

    if isinstance(cycle_or_chain, Cycle):
        chain = [(1, cycle_or_chain)]
    else:
        chain = list(cycle_or_chain)
    curve = chain[0][1].curve
    v = np.zeros(curve.genus, dtype=complex)
    for m, c in chain:
        v = v + m * holomorphic_periods_over(curve, c)
    cls, _residual = class_from_periods(v, period_table.holomorphic_periods, curve.tol)
    return cls
