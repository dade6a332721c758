"""Critical structure of a real-normalized differential.

Everything downstream of the solver lives here: the zero divisor, the abelian
integral ``F`` along canonical paths, critical values with the zero-sum
normalization, imaginary-ray tracing (curves of constant ``Re F`` with
``Im F`` increasing), the separatrix graph with its edge jumps, cycles dual
to the zeros with their real periods, the span check, and the weighted
critical values.

Conventions fixed here (they must be deterministic to reproduce outputs):

* The branch of ``F`` near the marked point is the termwise antiderivative of
  the chart expansion with zero constant term. Reported critical values add
  one global shift making their multiplicity-weighted sum vanish.
* Canonical integration paths run from a fixed chart base point to the
  target, deviating around branch points by deterministic via-points.
* A dual cycle descends ray ``i`` from the chart disk to the zero, ascends
  ray ``j``, and closes with a radial-arc-radial connector inside the disk;
  its period equals ``r_i - r_j`` of the asymptotic real parts.
"""

import cmath
import math

import numpy as np

from .config import DEFAULT_TOL
from .curve import SurfacePoint, to_infinity_chart
from .differentials import expand_at_infinity, holomorphic_basis
from .errors import CountMismatch, EmptyS, QuadratureFailure, StiffnessFailure
from .homology import class_from_periods, standard_basis
from .quadrature import adaptive_line_integral, build_guide, integrate_piece, integrate_polyline, seg
from .series import ps_sqrt


# -- zero divisor --------------------------------------------------------------------


class CriticalPoint:
    """A zero of the differential, later completed with its critical value."""

    __slots__ = ("point", "multiplicity", "at_branch", "branch_index", "phi", "f",
                 "index")

    def __init__(self, point, multiplicity, at_branch=False, branch_index=None):
        self.point = point
        self.multiplicity = int(multiplicity)
        self.at_branch = bool(at_branch)
        self.branch_index = branch_index
        self.phi = None
        self.f = None
        self.index = None

    def to_json(self):
        out = {
            "x": [self.point.x.real, self.point.x.imag],
            "y": [self.point.y.real, self.point.y.imag],
            "multiplicity": self.multiplicity,
            "at_branch": self.at_branch,
        }
        if self.phi is not None:
            out["phi"] = [self.phi.real, self.phi.imag]
            out["f"] = self.f
        return out

    def __repr__(self):
        return (f"CriticalPoint(x={self.point.x:.6g}, mult={self.multiplicity},"
                f" f={self.f})")


def _local_orders(curve, x0, a, b, total):
    """Vanishing orders of ``A + B Y`` on the two sheets at a non-branch
    ``x0``, summing to ``total``."""
    order = total + 2
    ash = _taylor(a, x0, order)
    bsh = _taylor(b, x0, order)
    fsh = _taylor(curve.f_coeffs, x0, order)
    yser = ps_sqrt(fsh, order)
    scale = max(np.abs(ash).max(initial=0.0), np.abs(bsh).max(initial=0.0), 1e-30)
    outs = []
    for sign in (+1.0, -1.0):
        gser = ash + sign * np.convolve(bsh, yser)[:order]
        k = 0
        while k < order and abs(gser[k]) <= 1e-8 * scale:
            k += 1
        outs.append((k, sign * yser[0]))
    return outs


def _taylor(coeffs, x0, order):
    c = np.asarray(coeffs, dtype=complex)
    out = np.zeros(order, dtype=complex)
    acc = np.zeros(1, dtype=complex)
    for ck in c[::-1]:
        acc = np.convolve(acc, np.array([x0, 1.0 + 0.0j]))[:order]
        if acc.size == 0:
            acc = np.zeros(1, dtype=complex)
        acc[0] += ck
    out[: acc.size] = acc
    return out


def find_zeros(rn):
    """All zeros of the differential with multiplicity.

    Roots of ``A^2 - B^2 f`` carry the full divisor: at a non-branch root the
    multiplicity splits between the sheets by the vanishing orders of
    ``A + B Y``; at a branch point the divisor multiplicity equals the root
    multiplicity of the resultant polynomial. The count with multiplicity
    must be ``2g - 1 + n`` for the exact pole order ``n``.
    """
    cached = rn._extras.get("zeros")
    if cached is not None:
        return cached
    curve = rn.curve
    g = curve.genus
    a, b = rn.expr.a, rn.expr.b
    n_exact = rn.singular.exact_order()
    expected = 2 * g - 1 + n_exact
    p = np.zeros(1, dtype=complex)
    if a.size:
        p = np.convolve(a, a)
    if b.size:
        q = np.convolve(np.convolve(b, b), curve.f_coeffs)
        m = max(p.size, q.size)
        pp = np.zeros(m, dtype=complex)
        pp[: p.size] += p
        pp[: q.size] -= q
        p = pp
    # trim trailing coefficients that are pure roundoff
    scale = np.abs(p).max(initial=0.0)
    if scale == 0.0:
        rn._extras["zeros"] = []
        return []
    nz = np.nonzero(np.abs(p) > 1e-13 * scale)[0]
    p = p[: nz[-1] + 1]
    roots = np.roots(p[::-1]) if p.size > 1 else np.zeros(0, dtype=complex)

    # cluster roots
    rts = sorted(roots, key=lambda z: (z.real, z.imag))
    clusters = []
    for z in rts:
        placed = False
        for cl in clusters:
            c0 = cl[0]
            if abs(z - c0) < 1e-5 * max(1.0, abs(c0)):
                cl.append(z)
                placed = True
                break
        if not placed:
            clusters.append([z])

    zeros = []
    for cl in clusters:
        center = complex(np.mean(cl))
        mult = len(cl)
        bidx = None
        for k, lam in enumerate(curve.branch_points):
            if abs(center - lam) < 1e-6 * max(1.0, abs(lam), curve.scale):
                bidx = k
                break
        if bidx is not None:
            lam = curve.branch_points[bidx]
            zeros.append(CriticalPoint(SurfacePoint(lam, 0.0), mult,
                                       at_branch=True, branch_index=bidx))
            continue
        if mult == 1:
            y0 = complex(np.sqrt(complex(curve.f(center))))
            va = np.polynomial.polynomial.polyval(center, a) if a.size else 0.0
            vb = np.polynomial.polynomial.polyval(center, b) if b.size else 0.0
            y = y0 if abs(va + vb * y0) <= abs(va - vb * y0) else -y0
            zeros.append(CriticalPoint(SurfacePoint(center, y), 1))
        else:
            for k, yval in _local_orders(curve, center, a, b, mult):
                if k > 0:
                    zeros.append(CriticalPoint(SurfacePoint(center, yval), k))

    total = sum(z.multiplicity for z in zeros)
    if total != expected:
        raise CountMismatch(
            f"found zero divisor of degree {total}, expected 2g-1+n = {expected}"
        )
    zeros.sort(key=lambda z: (z.point.x.real, z.point.x.imag,
                              z.point.y.real, z.point.y.imag))
    rn._extras["zeros"] = zeros
    return zeros


# -- the abelian integral -----------------------------------------------------------


class AbelianIntegrator:
    """Canonical-path evaluation of ``F(p) = int^p psi`` on the zero-constant
    branch at the marked point."""

    def __init__(self, rn, order=60):
        self.rn = rn
        self.curve = rn.curve
        self.exp = expand_at_infinity(rn.curve, rn.expr, order)
        res = abs(self.exp.residue())
        if res > 1e-9 * (1.0 + rn.singular.max_abs()):
            raise QuadratureFailure(f"residue {res:g} should vanish")
        self.rho_t = 1.0 / math.sqrt(self.curve.chart_radius)
        self.t_base = 0.5 * self.rho_t * cmath.exp(0.35j)
        self.x_base = 1.0 / self.t_base**2
        self.y_base = self.curve.chart_y(self.t_base)
        self.f_base = self.exp.antiderivative_eval(self.t_base)

    def f_series_at(self, t):
        return self.exp.antiderivative_eval(t)

    # path construction ------------------------------------------------------

    def _waypoints(self, x_to, bump=0.0):
        curve = self.curve
        pts = [self.x_base]
        if bump != 0.0:
            e = (x_to - self.x_base)
            pts.append(0.5 * (self.x_base + x_to) + bump * 1j * e)
        pts.append(x_to)
        for _ in range(6):
            changed = False
            out = [pts[0]]
            for a0, b0 in zip(pts, pts[1:]):
                e = b0 - a0
                le = abs(e)
                if le == 0:
                    continue
                eh = e / le
                best = None
                for lam in curve.branch_points:
                    gap = min(abs(lam - mu) for mu in curve.branch_points
                              if mu != lam)
                    delta = 0.3 * gap
                    if min(abs(lam - a0), abs(lam - b0)) < 1.2 * delta:
                        continue  # endpoint legitimately close (ring targets)
                    h = ((lam - a0) * eh.conjugate()).imag
                    tpar = ((lam - a0) * eh.conjugate()).real
                    if abs(h) < delta and 0.0 < tpar < le:
                        if best is None or abs(h) < best[0]:
                            side = -1.0 if h >= 0 else 1.0
                            via = a0 + tpar * eh + side * delta * 1j * eh
                            best = (abs(h), via)
                if best is not None:
                    out.append(best[1])
                    changed = True
                out.append(b0)
            pts = out
            if not changed:
                break
        return pts

    def _integrate_waypoints(self, pts, y_start):
        """Integrate psi along the polygonal path; returns (value, y_end)."""
        curve = self.curve
        total = 0.0 + 0.0j
        y = y_start
        for a0, b0 in zip(pts, pts[1:]):
            piece = seg(a0, b0)
            gd = build_guide(curve, piece, y)
            v, _ = integrate_piece(curve, self.rn.expr.w, piece, gd,
                                   curve.tol.quad_piece)
            total += v
            y = gd.y_end
        return total, y

    def f_at(self, x_t, y_t, bump=0.0, prepend_cycle=None):
        """``F`` at a surface point, canonical path (optionally perturbed).

        ``prepend_cycle`` adds a closed basis cycle before the path, which
        shifts the value by that cycle's (real) period; used by tests of the
        single-valuedness of ``Im F``.
        """
        total = self.f_base
        if prepend_cycle is not None:
            from .differentials import period
            total = total + period(self.curve, self.rn.expr, prepend_cycle)[0]
        pts = self._waypoints(x_t, bump=bump)
        v, y_end = self._integrate_waypoints(pts, self.y_base)
        total += v
        if abs(y_end - y_t) > abs(y_end + y_t):
            # arrived on the other sheet: extend around the nearest branch point
            lam = min(self.curve.branch_points, key=lambda l: abs(l - x_t))
            total += self._flip_loop(x_t, y_end, lam)
            y_end = -y_end
            if abs(y_end - y_t) > 1e-5 * (1.0 + abs(y_t)):
                raise QuadratureFailure("sheet adjustment failed to land on target")
        return total

    def _flip_loop(self, x0, y0, lam):
        """Integral over a small loop from ``x0`` around ``lam`` and back,
        flipping the sheet."""
        curve = self.curve
        gap = min(abs(lam - mu) for mu in curve.branch_points if mu != lam)
        rad = min(0.3 * gap, 0.5 * abs(x0 - lam))
        e = (lam - x0) / abs(lam - x0)
        entry = lam - rad * e
        th0 = cmath.phase(-e)
        total = 0.0 + 0.0j
        y = y0
        pieces = [seg(x0, entry)]
        from .quadrature import arc
        pieces.append(arc(lam, rad, th0, th0 + 2 * math.pi))
        pieces.append(seg(entry, x0))
        for piece in pieces:
            gd = build_guide(curve, piece, y)
            v, _ = integrate_piece(curve, self.rn.expr.w, piece, gd,
                                   curve.tol.quad_piece)
            total += v
            y = gd.y_end
        if abs(y + y0) > 1e-6 * (1.0 + abs(y0)):
            raise QuadratureFailure("flip loop did not change the sheet")
        return total

    def f_at_branch_zero(self, branch_index, bump=0.0):
        """``F`` at a zero sitting on a branch point, via an s-chart tail."""
        curve = self.curve
        lam = curve.branch_points[branch_index]
        gap = min(abs(lam - mu) for mu in curve.branch_points if mu != lam)
        ring = 0.2 * gap
        e = (self.x_base - lam) / abs(self.x_base - lam)
        x_ring = lam + ring * e
        pts = self._waypoints(x_ring, bump=bump)
        v, y_end = self._integrate_waypoints(pts, self.y_base)
        # s with lam + s^2 = x_ring and s*v(s^2) matching the arrival sheet
        s_ring = cmath.sqrt(x_ring - lam)
        h = _taylor(curve.f_coeffs, lam, 2 * curve.genus + 2)[1:]
        hval = np.polynomial.polynomial.polyval(s_ring**2, h)
        vval = cmath.sqrt(hval)
        if abs(s_ring * vval - y_end) > abs(s_ring * vval + y_end):
            s_ring = -s_ring
        a, b = self.rn.expr.a, self.rn.expr.b

        def tail(u):
            s = s_ring * (1.0 - u)
            x = lam + s * s
            hv = np.polynomial.polynomial.polyval(s * s, h)
            vv = np.sqrt(hv.astype(complex)) if hasattr(hv, "astype") else np.sqrt(complex(hv))
            # keep the branch of v continuous (h stays away from 0 on the ring)
            flip = np.abs(vv - vval) > np.abs(vv + vval)
            vv = np.where(flip, -vv, vv)
            va = np.polynomial.polynomial.polyval(x, a) if a.size else 0.0
            vb = np.polynomial.polynomial.polyval(x, b) if b.size else 0.0
            return (2.0 * va / vv + 2.0 * vb * s) * (-s_ring)

        vt, _ = adaptive_line_integral(tail, curve.tol.quad_piece)
        return self.f_base + v + vt


def _integrator(rn):
    it = rn._extras.get("integrator")
    if it is None:
        it = AbelianIntegrator(rn)
        rn._extras["integrator"] = it
    return it


def abelian_integral(rn, waypoints, y_start, bump=0.0):
    """Integral of psi along an explicit polygonal path (library surface for
    custom paths; canonical-path values come from critical_values)."""
    it = _integrator(rn)
    pts = list(map(complex, waypoints))
    total = 0.0 + 0.0j
    y = complex(y_start)
    curve = rn.curve
    for a0, b0 in zip(pts, pts[1:]):
        piece = seg(a0, b0)
        gd = build_guide(curve, piece, y)
        v, _ = integrate_piece(curve, rn.expr.w, piece, gd, curve.tol.quad_piece)
        total += v
        y = gd.y_end
    return total


def critical_values(rn, zeros=None, stratum_epsilon=None, bump=0.0):
    """Complete the zeros with critical values, sorted by decreasing ``f``.

    The normalization shift makes the multiplicity-weighted sum of the
    (finite) critical values vanish; with ``stratum_epsilon`` set, zeros
    within that chart distance of the marked point are excluded from the
    normalization set (they still receive values).
    """
    if zeros is None:
        zeros = find_zeros(rn)
    it = _integrator(rn)
    raw = []
    for z in zeros:
        if z.at_branch:
            val = it.f_at_branch_zero(z.branch_index, bump=bump)
        else:
            val = it.f_at(z.point.x, z.point.y, bump=bump)
        raw.append(val)
    finite = []
    for z, val in zip(zeros, raw):
        ax = abs(z.point.x)
        near = (stratum_epsilon is not None and ax > 0
                and ax ** -0.5 < stratum_epsilon)
        if not near:
            finite.extend([val] * z.multiplicity)
    shift = -np.mean(finite) if finite else 0.0
    for z, val in zip(zeros, raw):
        z.phi = complex(val + shift)
        z.f = float(z.phi.imag)
    order = sorted(
        range(len(zeros)),
        key=lambda i: (-zeros[i].f, zeros[i].phi.real, i),
    )
    out = [zeros[i] for i in order]
    for s, z in enumerate(out):
        z.index = s
    rn._extras["phi_shift"] = complex(shift)
    rn._extras["critical_points"] = out
    return out


# -- ray tracing ------------------------------------------------------------------------


class RayTrace:
    """One traced imaginary ray. ``points``/``ys`` are the accepted steps,
    ``phis`` the single-valued harmonic coordinate along them.

    Near branch points the tracer works in the local chart ``x = lam + s^2``
    where the flow field stays analytic; ``chord_modes[k]`` records, for the
    chord ``points[k] -> points[k+1]``, either -1 (x chart) or the branch
    index, and ``s_chords[k]`` holds the corresponding ``(s0, s1)`` pair so
    line integrals along the trace can be taken in the right chart.
    """

    __slots__ = ("kind", "zero_index", "dir_index", "points", "ys", "phis",
                 "terminal", "terminal_data", "t_end", "asymptotic_real",
                 "re_drift", "sector", "chord_modes", "s_chords")

    def __init__(self, kind, zero_index, dir_index):
        self.kind = kind
        self.zero_index = zero_index
        self.dir_index = dir_index
        self.points = None
        self.ys = None
        self.phis = None
        self.terminal = "budget"
        self.terminal_data = None
        self.t_end = None
        self.asymptotic_real = None
        self.re_drift = 0.0
        self.sector = None
        self.chord_modes = None
        self.s_chords = None

    def to_json(self):
        return {
            "kind": self.kind,
            "zero_index": self.zero_index,
            "dir_index": self.dir_index,
            "terminal": self.terminal,
            "terminal_data": self.terminal_data,
            "sector": self.sector,
            "asymptotic_real": self.asymptotic_real,
            "re_drift": self.re_drift,
            "n_points": 0 if self.points is None else int(len(self.points)),
            "points": [[z.real, z.imag] for z in
                       (self.points if self.points is not None else [])],
        }


# Cash-Karp embedded Runge-Kutta 4(5) coefficients
_CK_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (3 / 10, -9 / 10, 6 / 5),
    (-11 / 54, 5 / 2, -70 / 27, 35 / 27),
    (1631 / 55296, 175 / 512, 575 / 13824, 44275 / 110592, 253 / 4096),
)
_CK_B5 = (37 / 378, 0.0, 250 / 621, 125 / 594, 0.0, 512 / 1771)
_CK_B4 = (2825 / 27648, 0.0, 18575 / 48384, 13525 / 55296, 277 / 14336, 1 / 4)


class _FlowContext:
    """Shared data for tracing rays of one differential."""

    def __init__(self, rn, cps):
        self.rn = rn
        self.curve = rn.curve
        self.cps = cps
        self.it = _integrator(rn)
        self.a = tuple(rn.expr.a.tolist())
        self.b = tuple(rn.expr.b.tolist())
        self.fc = tuple(rn.curve.f_coeffs.tolist())
        self.lams = tuple(rn.curve.branch_points)
        self.gaps = tuple(
            min(abs(l - m) for m in self.lams if m != l) for l in self.lams
        )
        self.h_polys = tuple(
            tuple(_taylor(rn.curve.f_coeffs, l, 2 * rn.curve.genus + 2)[1:].tolist())
            for l in self.lams
        )
        fs = [z.f for z in cps]
        spread = max(fs) - min(fs) if fs else 0.0
        margin = 1.0 + 0.1 * spread
        self.phi_up = (max(fs) if fs else 0.0) + margin
        self.phi_dn = (min(fs) if fs else 0.0) - margin
        zx = [abs(z.point.x) for z in cps]
        self.r_exit = max(3.0 * rn.curve.chart_radius,
                          1.25 * max(zx, default=0.0))
        locs = [z.point for z in cps]
        dists = []
        for i in range(len(locs)):
            for j in range(i + 1, len(locs)):
                d = abs(locs[i].x - locs[j].x) + abs(locs[i].y - locs[j].y)
                if d > 0:
                    dists.append(d)
        base = min(dists) if dists else 1.0
        self.capture = rn.curve.tol.ray_capture_rel * base
        self.tol = rn.curve.tol

    def psi(self, x, y):
        va = 0.0 + 0.0j
        for c in reversed(self.a):
            va = va * x + c
        vb = 0.0 + 0.0j
        for c in reversed(self.b):
            vb = vb * x + c
        return va / y + vb

    def f(self, x):
        v = 0.0 + 0.0j
        for c in reversed(self.fc):
            v = v * x + c
        return v

    def h(self, k, u):
        v = 0.0 + 0.0j
        for c in reversed(self.h_polys[k]):
            v = v * u + c
        return v

    def ab(self, x):
        va = 0.0 + 0.0j
        for c in reversed(self.a):
            va = va * x + c
        vb = 0.0 + 0.0j
        for c in reversed(self.b):
            vb = vb * x + c
        return va, vb

    def d_branch(self, x):
        return min(abs(x - l) for l in self.lams)

    def nearest_branch(self, x):
        k = min(range(len(self.lams)), key=lambda i: abs(x - self.lams[i]))
        return k, abs(x - self.lams[k])

    def match_y(self, x, y_ref):
        y = cmath.sqrt(self.f(x))
        if abs(y - y_ref) > abs(y + y_ref):
            y = -y
        return y


def _local_quadratic(ctx, z):
    """Coefficient ``a`` with ``F - phi ~ a * (local coord)^2`` at a simple
    zero, in the x chart off branch points and in the s chart on them."""
    x0, y0 = z.point.x, z.point.y
    a, b = ctx.rn.expr.a, ctx.rn.expr.b
    if z.at_branch:
        lam = ctx.curve.branch_points[z.branch_index]
        vb = np.polynomial.polynomial.polyval(lam, b) if b.size else 0.0
        return complex(vb)  # F - phi = B(lam) s^2 + O(s^3)
    da = np.polynomial.polynomial.polyder(a) if a.size else np.zeros(0)
    db = np.polynomial.polynomial.polyder(b) if b.size else np.zeros(0)
    gp = 0.0 + 0.0j
    if len(da):
        gp += np.polynomial.polynomial.polyval(x0, da)
    if len(db):
        gp += np.polynomial.polynomial.polyval(x0, db) * y0
    if b.size:
        gp += (np.polynomial.polynomial.polyval(x0, b)
               * ctx.curve.df(x0) / (2 * y0))
    return complex(gp / (2 * y0))


def _launch_states(ctx, s):
    """Launch points for the four rays of simple zero ``s``: list of
    (dir_index, upward, x0, y0, phi0)."""
    z = ctx.cps[s]
    acoef = _local_quadratic(ctx, z)
    others = [
        abs(z.point.x - w.point.x) + abs(z.point.y - w.point.y)
        for t, w in enumerate(ctx.cps) if t != s
    ]
    if z.at_branch:
        lam0 = ctx.curve.branch_points[z.branch_index]
        d_br = min(abs(lam0 - l) for l in ctx.lams if l != lam0)
    else:
        d_br = ctx.d_branch(z.point.x)
    dmin = min(others + [d_br, ctx.curve.scale])
    out = []
    for upward in (True, False):
        half = math.pi / 2 if upward else -math.pi / 2
        for k in (0, 1):
            theta = (half - cmath.phase(acoef)) / 2 + k * math.pi
            if z.at_branch:
                ell = math.sqrt(ctx.tol.ray_launch_offset * dmin)
                s0 = ell * cmath.exp(1j * theta)
                lam = ctx.curve.branch_points[z.branch_index]
                x0 = lam + s0 * s0
                h = _taylor(ctx.curve.f_coeffs, lam, 2 * ctx.curve.genus + 2)[1:]
                vv = cmath.sqrt(complex(
                    np.polynomial.polynomial.polyval(s0 * s0, h)))
                y0 = s0 * vv
                loc = s0
            else:
                ell = ctx.tol.ray_launch_offset * dmin
                loc = ell * cmath.exp(1j * theta)
                x0 = z.point.x + loc
                y0 = ctx.match_y(x0, z.point.y)
            phi0 = z.f + (acoef * loc * loc).imag
            out.append((k, upward, x0, y0, phi0))
    return out


def trace_from(ctx, x0, y0, phi0, upward, zero_index=None, dir_index=None,
               kind=None):
    """Integrate one imaginary ray from a starting point.

    The flow is ``dx/dtau = +- i / psi`` with ``tau`` the (signed) harmonic
    coordinate ``Phi``; ``y`` is re-projected onto the curve after every
    accepted step. Inside a disk around each branch point the integration
    switches to the local chart ``x = lam + s^2`` (field
    ``ds/dtau = +- i v / (2 (A + B s v))`` with ``y = s v``), which is
    analytic through the ramification point; rays crossing branch points are
    routine on symmetric curves.

    Termination: deep inside the chart disk with ``Phi`` beyond all critical
    levels (marked point), entering the capture ball of a zero at the
    matching ``Phi`` level (zero hit), step underflow, or the step budget.
    """
    tol = ctx.tol
    sgn = 1.0 if upward else -1.0
    tr = RayTrace(kind or ("up" if upward else "down"), zero_index, dir_index)
    pts = [complex(x0)]
    ys = [complex(y0)]
    phis = [float(phi0)]
    chord_modes = []
    s_chords = []
    x, y, phi = complex(x0), complex(y0), float(phi0)
    h = None
    launch_guard = 3.0 * ctx.capture
    steps = 0
    zs = ctx.cps
    mode = -1            # -1: x chart; >= 0: s chart at that branch point
    s_cur = None
    v_cur = None

    def surface_dist(k):
        w = zs[k]
        return abs(x - w.point.x) + abs(y - w.point.y)

    while steps < tol.ray_max_steps:
        steps += 1
        if mode < 0:
            kb, db = ctx.nearest_branch(x)
            if db < 0.12 * ctx.gaps[kb]:
                # enter the branch chart
                s_cur = cmath.sqrt(x - ctx.lams[kb])
                if s_cur == 0:
                    s_cur = 1e-300
                v_cur = y / s_cur
                vh = cmath.sqrt(ctx.h(kb, s_cur * s_cur))
                if abs(v_cur - vh) > abs(v_cur + vh):
                    s_cur, v_cur = -s_cur, -v_cur
                mode = kb
                h = None
                continue
            vmag = abs(1.0 / ctx.psi(x, y))
            cap = 0.2 * db / vmag
            dz = min((surface_dist(k) for k in range(len(zs))),
                     default=math.inf)
            if dz > 0:
                cap = min(cap, 0.25 * max(dz, 0.2 * ctx.capture) / vmag)
            cap = min(cap, 0.15 * (abs(x) + 1.0) / vmag)
            h = cap if h is None else min(h, cap)
            if h * vmag < 1e-14 * (abs(x) + 1.0):
                near = min((surface_dist(k) for k in range(len(zs))),
                           default=math.inf)
                if near < 5.0 * ctx.capture:
                    k = min(range(len(zs)), key=surface_dist)
                    tr.terminal = "zero"
                    tr.terminal_data = int(k)
                    break
                raise StiffnessFailure(
                    f"ray step underflow at x={x:.6g}")
            ks = []
            bad = False
            for st in range(6):
                xa = x
                for aa, kk in zip(_CK_A[st], ks):
                    xa = xa + h * aa * kk
                ya = ctx.match_y(xa, y)
                psv = ctx.psi(xa, ya)
                if psv == 0:
                    bad = True
                    break
                ks.append(sgn * 1j / psv)
            if bad:
                h *= 0.5
                continue
            x5 = x
            x4 = x
            for bb5, bb4, kk in zip(_CK_B5, _CK_B4, ks):
                x5 = x5 + h * bb5 * kk
                x4 = x4 + h * bb4 * kk
            err = abs(x5 - x4)
            # error target relative to the step's arc length (an F-increment
            # error per unit Phi), floored at the roundoff level of x
            atol = (tol.ray_tol_per_phi * h * abs(ks[0])
                    + 3e-15 * (1.0 + abs(x)))
            if err > atol:
                h = max(0.1 * h, 0.9 * h * (atol / (err + 1e-300)) ** 0.2)
                continue
            y_new = ctx.match_y(x5, y)
            x, y = x5, y_new
            chord_modes.append(-1)
            s_chords.append(None)
        else:
            kb = mode
            lam = ctx.lams[kb]
            if abs(s_cur) ** 2 >= 0.2 * ctx.gaps[kb]:
                mode = -1
                h = None
                continue
            s_scale = math.sqrt(0.2 * ctx.gaps[kb])

            def fs(s, v):
                va, vb = ctx.ab(lam + s * s)
                den = 2.0 * (va + vb * s * v)
                if den == 0:
                    return None
                return sgn * 1j * v / den

            k1 = fs(s_cur, v_cur)
            if k1 is None:
                # sitting exactly on a zero in the branch chart
                near = min((surface_dist(k) for k in range(len(zs))),
                           default=math.inf)
                k = min(range(len(zs)), key=surface_dist)
                tr.terminal = "zero"
                tr.terminal_data = int(k)
                break
            vmag_s = abs(k1)
            cap = 0.25 * s_scale / vmag_s
            dz = min((surface_dist(k) for k in range(len(zs))),
                     default=math.inf)
            dxds = abs(2.0 * s_cur) + 1e-3 * s_scale
            if dz > 0:
                cap = min(cap, 0.25 * max(dz, 0.2 * ctx.capture)
                          / (vmag_s * dxds))
            h = cap if h is None else min(h, cap)
            if h * vmag_s < 1e-14 * s_scale:
                near = min((surface_dist(k) for k in range(len(zs))),
                           default=math.inf)
                if near < 5.0 * ctx.capture:
                    k = min(range(len(zs)), key=surface_dist)
                    tr.terminal = "zero"
                    tr.terminal_data = int(k)
                    break
                raise StiffnessFailure(
                    f"ray step underflow at branch chart {kb}")
            ks = []
            bad = False
            for st in range(6):
                sa = s_cur
                for aa, kk in zip(_CK_A[st], ks):
                    sa = sa + h * aa * kk
                va = cmath.sqrt(ctx.h(kb, sa * sa))
                if abs(va - v_cur) > abs(va + v_cur):
                    va = -va
                kv = fs(sa, va)
                if kv is None:
                    bad = True
                    break
                ks.append(kv)
            if bad:
                h *= 0.5
                continue
            s5 = s_cur
            s4 = s_cur
            for bb5, bb4, kk in zip(_CK_B5, _CK_B4, ks):
                s5 = s5 + h * bb5 * kk
                s4 = s4 + h * bb4 * kk
            err = abs(s5 - s4)
            atol = tol.ray_tol_per_phi * h * abs(ks[0]) + 3e-15 * s_scale
            if err > atol:
                h = max(0.1 * h, 0.9 * h * (atol / (err + 1e-300)) ** 0.2)
                continue
            s_prev = s_cur
            v5 = cmath.sqrt(ctx.h(kb, s5 * s5))
            if abs(v5 - v_cur) > abs(v5 + v_cur):
                v5 = -v5
            s_cur, v_cur = s5, v5
            x = lam + s_cur * s_cur
            y = s_cur * v_cur
            chord_modes.append(kb)
            s_chords.append((s_prev, s_cur))
        # accepted step (both charts)
        phi += sgn * h
        pts.append(x)
        ys.append(y)
        phis.append(phi)
        if err > 0:
            h = min(5.0 * h, 0.9 * h * (atol / err) ** 0.2)
        else:
            h = 5.0 * h
        if abs(x) >= ctx.r_exit and (
            (upward and phi >= ctx.phi_up) or (not upward and phi <= ctx.phi_dn)
        ):
            tr.terminal = "marked"
            break
        for k, w in enumerate(zs):
            d = abs(x - w.point.x) + abs(y - w.point.y)
            if zero_index is not None and k == zero_index:
                if len(pts) < 3 or d < launch_guard:
                    continue
            if d < ctx.capture and abs(phi - w.f) < 1e-6 * max(1.0, abs(w.f)):
                tr.terminal = "zero"
                tr.terminal_data = int(k)
                break
        if tr.terminal == "zero":
            break
    tr.points = np.array(pts, dtype=complex)
    tr.ys = np.array(ys, dtype=complex)
    tr.phis = np.array(phis, dtype=float)
    tr.chord_modes = chord_modes
    tr.s_chords = s_chords
    # drift monitor: Re of the chartwise line integral should vanish
    if len(pts) > 2:
        val, _ = trace_line_integral(ctx.curve, ctx.rn.expr, tr, 1e-9)
        tr.re_drift = abs(val.real)
    if tr.terminal == "marked":
        ch = to_infinity_chart(ctx.curve, SurfacePoint(x, y))
        tr.t_end = ch.t
        tr.asymptotic_real = float(ctx.it.f_series_at(ch.t).real)
        tr.sector = _sector_index(ctx, ch.t, upward)
    return tr


def _integrate_s_run(curve, diff, lam, s_pts, v_start, tol):
    """Line integral of the differential along an s-chart path.

    In the chart ``x = lam + s^2``, ``y = s v(s^2)`` the pullback is
    ``(2 A(x)/v + 2 B(x) s) ds``, analytic through ``s = 0``.
    """
    h = _taylor(curve.f_coeffs, lam, 2 * curve.genus + 2)[1:]
    # vertex values of v, continued from v_start
    vs = []
    v_ref = complex(v_start)
    for s in s_pts:
        v = complex(np.sqrt(complex(np.polynomial.polynomial.polyval(s * s, h))))
        if abs(v - v_ref) > abs(v + v_ref):
            v = -v
        vs.append(v)
        v_ref = v
    s_pts = np.asarray(s_pts, dtype=complex)
    vs = np.asarray(vs, dtype=complex)
    from .quadrature import _gl
    u8, w8 = _gl(8)
    u4, w4 = _gl(4)
    s0, s1 = s_pts[:-1], s_pts[1:]
    v0, v1 = vs[:-1], vs[1:]
    ds = (s1 - s0)[:, None]

    def vals(un, wn):
        sg = s0[:, None] + un[None, :] * ds
        vref = v0[:, None] + un[None, :] * (v1 - v0)[:, None]
        vv = np.sqrt(np.polynomial.polynomial.polyval(sg * sg, h))
        flip = np.abs(vv - vref) > np.abs(vv + vref)
        vv = np.where(flip, -vv, vv)
        xg = lam + sg * sg
        va = (np.polynomial.polynomial.polyval(xg, diff.a)
              if diff.a.size else np.zeros_like(xg))
        vb = (np.polynomial.polynomial.polyval(xg, diff.b)
              if diff.b.size else np.zeros_like(xg))
        integ = (2.0 * va / vv + 2.0 * vb * sg) * ds
        return integ @ wn

    i8 = vals(u8, w8)
    i4 = vals(u4, w4)
    return complex(i8.sum()), float(np.abs(i8 - i4).sum())


def trace_line_integral(curve, diff, tr, tol):
    """Integral of ``diff`` along a trace, respecting the chart of each chord."""
    total = 0.0 + 0.0j
    err = 0.0
    modes = tr.chord_modes
    n = len(modes)
    k = 0
    while k < n:
        m = modes[k]
        k1 = k
        while k1 + 1 < n and modes[k1 + 1] == m:
            k1 += 1
        if m == -1:
            v, e = integrate_polyline(curve, diff.w,
                                      tr.points[k : k1 + 2],
                                      tr.ys[k : k1 + 2], tol)
        else:
            s_pts = [tr.s_chords[k][0]] + [tr.s_chords[i][1]
                                           for i in range(k, k1 + 1)]
            s_first = s_pts[0] if s_pts[0] != 0 else s_pts[1]
            v_start = tr.ys[k] / s_first if s_first != 0 else 1.0
            if v_start == 0:
                v_start = cmath.sqrt(ctx_h_fallback(curve, m, s_first))
            v, e = _integrate_s_run(curve, diff, curve.branch_points[m],
                                    s_pts, v_start, tol)
        total += v
        err += e
        k = k1 + 1
    return total, err


def ctx_h_fallback(curve, k, s):
    h = _taylor(curve.f_coeffs, curve.branch_points[k], 2 * curve.genus + 2)[1:]
    return complex(np.polynomial.polynomial.polyval(s * s, h))


def _sector_index(ctx, t_end, upward):
    sing = ctx.rn.singular
    m = sing.exact_order()
    if m == 0:
        return 0
    c_lead = -sing.r[m - 1] / m  # leading term of F: c_lead * t^-m
    target = math.pi / 2 if upward else -math.pi / 2
    th = cmath.phase(t_end)
    base = (cmath.phase(c_lead) - target) / m
    k = round((base - th) * m / (2 * math.pi))
    return int(k % m)


def trace_ray(rn, s, upward=True, dir_index=0, cps=None):
    """Trace one of the four rays of simple zero ``s`` (index in the sorted
    critical-point list)."""
    if cps is None:
        cps = rn._extras.get("critical_points") or critical_values(rn)
    ctx = _flow_context(rn, cps)
    for k, up, x0, y0, phi0 in _launch_states(ctx, s):
        if up == upward and k == dir_index:
            return trace_from(ctx, x0, y0, phi0, up, zero_index=s, dir_index=k)
    raise ValueError("no such ray")


def _flow_context(rn, cps):
    ctx = rn._extras.get("flow_context")
    if ctx is None or ctx.cps is not cps:
        ctx = _FlowContext(rn, cps)
        rn._extras["flow_context"] = ctx
    return ctx


# -- separatrix graph ---------------------------------------------------------------


class GraphEdge:
    """One edge of the separatrix graph: a downward ray of a zero, oriented
    by increasing ``Phi`` (marked point toward the zero)."""

    __slots__ = ("zero_index", "dir_index", "trace", "jump", "jump_spread",
                 "jump_samples")

    def __init__(self, zero_index, dir_index, trace):
        self.zero_index = zero_index
        self.dir_index = dir_index
        self.trace = trace
        self.jump = None
        self.jump_spread = None
        self.jump_samples = []

    def to_json(self):
        return {
            "zero_index": self.zero_index,
            "dir_index": self.dir_index,
            "terminal": self.trace.terminal,
            "jump": None if self.jump is None else [self.jump.real, self.jump.imag],
            "jump_spread": self.jump_spread,
        }


class SeparatrixGraph:
    """Vertices: the zeros plus the marked point. Edges: downward rays with
    their jump values; ``up_rays`` holds the ascending rays feeding the dual
    cycles."""

    def __init__(self, rn, cps, edges, up_rays, generic, events, components):
        self.rn = rn
        self.critical_points = cps
        self.edges = edges
        self.up_rays = up_rays
        self.generic = generic
        self.nongeneric_events = list(events)
        self.components = components

    def to_json(self):
        return {
            "generic": self.generic,
            "components": self.components,
            "nongeneric_events": self.nongeneric_events,
            "zeros": [z.to_json() for z in self.critical_points],
            "edges": [e.to_json() for e in self.edges],
            "up_rays": [t.to_json() for t in self.up_rays],
        }


def _f_at_offset(ctx, x, y):
    """``F`` at an off-graph point via its upward ray (series branch at the
    marked point, no global shift)."""
    tr = trace_from(ctx, x, y, 0.0, True)
    if tr.terminal != "marked":
        return None, tr
    f_end = ctx.it.f_series_at(tr.t_end)
    dphi = tr.phis[-1] - tr.phis[0]
    return f_end - 1j * dphi, tr


def build_graph(rn, jump_samples=3):
    """Trace all rays of all simple zeros and assemble the graph.

    Jump values are measured by evaluating ``F`` on both sides of each edge
    at interior sample points (each evaluation is an upward trace to the
    marked point). Multiple zeros are reported as non-generic and excluded
    from ray tracing.
    """
    cps = rn._extras.get("critical_points") or critical_values(rn)
    ctx = _flow_context(rn, cps)
    events = []
    edges = []
    up_rays = []
    merges = []
    for s, z in enumerate(cps):
        if z.multiplicity > 1:
            events.append({"type": "multiple_zero", "zero_index": s,
                           "multiplicity": z.multiplicity})
            continue
        for k, upward, x0, y0, phi0 in _launch_states(ctx, s):
            tr = trace_from(ctx, x0, y0, phi0, upward, zero_index=s,
                            dir_index=k)
            if tr.terminal == "zero":
                events.append({"type": "saddle_connection", "zero_index": s,
                               "dir_index": k, "upward": upward,
                               "other_zero": tr.terminal_data})
                merges.append((s, tr.terminal_data))
            elif tr.terminal == "budget":
                events.append({"type": "budget", "zero_index": s,
                               "dir_index": k, "upward": upward})
            if upward:
                up_rays.append(tr)
            else:
                edges.append(GraphEdge(s, k, tr))
    # jumps
    for e in edges:
        tr = e.trace
        if tr.terminal != "marked" or len(tr.points) < 8:
            continue
        samples = []
        npts = len(tr.points)
        for frac in np.linspace(0.25, 0.75, jump_samples):
            k = int(frac * (npts - 1))
            k = min(max(k, 1), npts - 2)
            p = tr.points[k]
            tangent = tr.points[k - 1] - tr.points[k + 1]  # increasing Phi
            tangent /= abs(tangent)
            dloc = min(ctx.d_branch(p),
                       min(abs(p - w.point.x) + abs(tr.ys[k] - w.point.y)
                           for w in cps), 1.0)
            eps = 1e-3 * dloc
            nrm = 1j * tangent
            vals = []
            for sgn in (+1.0, -1.0):
                q = p + sgn * eps * nrm
                yq = ctx.match_y(q, tr.ys[k])
                fv, _ = _f_at_offset(ctx, q, yq)
                vals.append(fv)
            if vals[0] is None or vals[1] is None:
                continue
            # remove the known first-order offset bias:
            # F(p + d) - F(p - d) = jump + 2 psi(p) d + O(d^3)
            bias = 2.0 * ctx.psi(p, tr.ys[k]) * (eps * nrm)
            samples.append(vals[0] - vals[1] - bias)
        if samples:
            e.jump_samples = samples
            e.jump = complex(np.mean(samples))
            e.jump_spread = float(max(abs(s - e.jump) for s in samples))
    # components: zeros merged by saddle connections
    parent = list(range(len(cps)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for s, t in merges:
        parent[find(s)] = find(t)
    components = len({find(i) for i in range(len(cps))})
    generic = (not events) and all(
        e.trace.terminal == "marked" for e in edges
    ) and all(t.terminal == "marked" for t in up_rays)
    return SeparatrixGraph(rn, cps, edges, up_rays, generic, events, components)


# -- dual cycles -------------------------------------------------------------------------


class DualCycle:
    """The closed loop from the two ascending rays of one zero.

    The contour descends ray ``i``, ascends ray ``j``, and closes through the
    chart disk; its period is ``r_i - r_j``, checked against direct contour
    integration, and its homology class comes from the period-lattice solve.
    """

    __slots__ = ("zero_index", "i", "j", "ray_i", "ray_j", "period",
                 "period_direct", "direct_error", "imag_error", "homology",
                 "class_residual")

    def __init__(self, zero_index, i, j, ray_i, ray_j):
        self.zero_index = zero_index
        self.i = i
        self.j = j
        self.ray_i = ray_i
        self.ray_j = ray_j
        self.period = None
        self.period_direct = None
        self.direct_error = None
        self.imag_error = None
        self.homology = None
        self.class_residual = None

    def to_json(self):
        return {
            "zero_index": self.zero_index,
            "rays": [self.i, self.j],
            "period": self.period,
            "period_direct": None if self.period_direct is None else
                [self.period_direct.real, self.period_direct.imag],
            "direct_error": self.direct_error,
            "homology": None if self.homology is None else list(self.homology.coeffs),
        }


def _t_connector_pieces(t_from, t_to):
    """Radial-arc-radial connector between two chart points."""
    r_mid = 0.5 * (abs(t_from) + abs(t_to))
    a_from = cmath.phase(t_from)
    a_to = cmath.phase(t_to)
    da = (a_to - a_from + math.pi) % (2 * math.pi) - math.pi
    return [
        ("seg", t_from, r_mid * cmath.exp(1j * a_from)),
        ("arc", r_mid, a_from, a_from + da),
        ("seg", r_mid * cmath.exp(1j * a_to), t_to),
    ]


def _integrate_t_pieces(curve, diff, pieces, tol):
    s = curve.chart_series(80)
    gg = 2 * curve.genus + 1
    total = 0.0 + 0.0j
    err = 0.0

    def w_of_t(t):
        x = t ** -2.0
        y = np.polynomial.polynomial.polyval(t, s) * t ** (-gg)
        return diff.w(x, y) * (-2.0) * t ** -3.0

    for p in pieces:
        if p[0] == "seg":
            _, t0, t1 = p

            def fn(u, t0=t0, t1=t1):
                t = t0 + u * (t1 - t0)
                return w_of_t(t) * (t1 - t0)
        else:
            _, r, a0, a1 = p

            def fn(u, r=r, a0=a0, a1=a1):
                th = a0 + u * (a1 - a0)
                t = r * np.exp(1j * th)
                return w_of_t(t) * 1j * (a1 - a0) * t

        v, e = adaptive_line_integral(fn, tol)
        total += v
        err += e
    return total, err


def _dual_contour_integral(rn, diff, ray_i, ray_j, tol):
    """Integral of ``diff`` over the dual contour (descend i, ascend j,
    close in the chart).

    The rays launch a small offset away from the zero, so the contour is
    closed there by the short chord between the two launch points (in the
    branch chart when the zero sits on a branch point).
    """
    curve = rn.curve
    v1, e1 = trace_line_integral(curve, diff, ray_i, tol)
    v2, e2 = trace_line_integral(curve, diff, ray_j, tol)
    pieces = _t_connector_pieces(ray_j.t_end, ray_i.t_end)
    v3, e3 = _integrate_t_pieces(curve, diff, pieces, tol)
    mi = ray_i.chord_modes[0] if ray_i.chord_modes else -1
    mj = ray_j.chord_modes[0] if ray_j.chord_modes else -1
    if mi >= 0 and mi == mj:
        s_i = ray_i.s_chords[0][0]
        s_j = ray_j.s_chords[0][0]
        v_start = ray_i.ys[0] / s_i if s_i != 0 else 1.0
        v0, e0 = _integrate_s_run(curve, diff, curve.branch_points[mi],
                                  [s_i, s_j], v_start, tol)
    else:
        v0, e0 = integrate_polyline(
            curve, diff.w,
            np.array([ray_i.points[0], ray_j.points[0]]),
            np.array([ray_i.ys[0], ray_j.ys[0]]), tol)
    return -v1 + v2 + v3 + v0, e1 + e2 + e3 + e0


def dual_cycles(rn, graph, period_threshold=1e-7):
    """Dual cycles with periods by both methods, classes, and ``|S|``.

    Returns ``(cycles, s_count)`` where ``s_count`` is the number of zeros
    with at least one nonvanishing dual period.
    """
    curve = rn.curve
    tolq = curve.tol.quad_piece
    by_zero = {}
    for tr in graph.up_rays:
        if tr.terminal == "marked":
            by_zero.setdefault(tr.zero_index, []).append(tr)
    table = rn._extras.get("holo_table")
    if table is None:
        from .differentials import basis_period_table
        table = basis_period_table(rn.curve, max(rn.n, 1))
        rn._extras["holo_table"] = table
    g = curve.genus
    holo = holomorphic_basis(curve)
    out = []
    s_zeros = set()
    for s in sorted(by_zero):
        rays = sorted(by_zero[s], key=lambda t: t.dir_index)
        if len(rays) < 2:
            continue
        ray_i, ray_j = rays[0], rays[1]
        dc = DualCycle(s, ray_i.dir_index, ray_j.dir_index, ray_i, ray_j)
        dc.period = float(ray_i.asymptotic_real - ray_j.asymptotic_real)
        v, e = _dual_contour_integral(rn, rn.expr, ray_i, ray_j, tolq)
        dc.period_direct = complex(v)
        dc.direct_error = float(e + abs(v.real - dc.period))
        dc.imag_error = float(abs(v.imag))
        vper = np.array(
            [_dual_contour_integral(rn, w, ray_i, ray_j, tolq)[0] for w in holo],
            dtype=complex,
        )
        dc.homology, dc.class_residual = class_from_periods(
            vper, table.periods[:g, :].T, curve.tol
        )
        out.append(dc)
        if abs(dc.period) > period_threshold:
            s_zeros.add(s)
    return out, len(s_zeros)


# -- span and weighted values ---------------------------------------------------------------


class SpanReport:
    def __init__(self, rank, full, classes):
        self.rank = int(rank)
        self.full = int(full)
        self.verdict = self.rank == self.full
        self.classes = classes

    def to_json(self):
        return {"rank": self.rank, "expected": self.full,
                "verdict": self.verdict,
                "classes": [list(c.coeffs) for c in self.classes]}


def _int_rank(rows):
    """Exact rank of an integer matrix (fraction-free elimination)."""
    m = [list(map(int, r)) for r in rows]
    if not m:
        return 0
    rank = 0
    cols = len(m[0])
    for c in range(cols):
        piv = None
        for r in range(rank, len(m)):
            if m[r][c] != 0:
                piv = r
                break
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][c] != 0:
                a, b = m[rank][c], m[r][c]
                m[r] = [a * m[r][k] - b * m[rank][k] for k in range(cols)]
        rank += 1
        if rank == len(m):
            break
    return rank


def span_check(duals, genus):
    """Rank over Q of the dual-cycle classes and the full-lattice verdict."""
    classes = [d.homology for d in duals if d.homology is not None]
    rank = _int_rank([c.coeffs for c in classes])
    return SpanReport(rank, 2 * genus, classes)


class WeightedReport:
    """Ordered imaginary parts of the weighted critical values on ``S``."""

    def __init__(self, entries, s_count):
        self.entries = entries  # list of dicts, sorted by decreasing g
        self.s_count = int(s_count)

    @property
    def g_values(self):
        return [e["g"] for e in self.entries]

    def to_json(self):
        return {"s_count": self.s_count, "entries": self.entries}


def weighted_values(rn, duals, cps=None, period_threshold=1e-7):
    """Weighted critical values ``phi_s / |pi_s|`` on the set ``S`` of zeros
    with a nonvanishing dual period, renormalized so the values on ``S`` sum
    to zero; imaginary parts sorted decreasingly."""
    if cps is None:
        cps = rn._extras.get("critical_points") or critical_values(rn)
    pis = {}
    for d in duals:
        if abs(d.period) > period_threshold:
            cur = pis.get(d.zero_index)
            if cur is None or abs(d.period) < cur:
                pis[d.zero_index] = abs(d.period)
    if not pis:
        raise EmptyS("no zero has a nonvanishing dual period (exact differential)")
    phis = {s: cps[s].phi for s in pis}
    shift = -np.mean(list(phis.values()))
    entries = []
    for s, pabs in pis.items():
        w = (phis[s] + shift) / pabs
        entries.append({
            "zero_index": s,
            "pi_abs": float(pabs),
            "weighted": [w.real, w.imag],
            "g": float(w.imag),
        })
    entries.sort(key=lambda e: (-e["g"], e["weighted"][0], e["zero_index"]))
    return WeightedReport(entries, len(pis))
