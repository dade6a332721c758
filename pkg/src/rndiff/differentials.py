"""Differentials on the odd model and their periods.

Every differential handled here is ``(A(x) + B(x) y) dx / y`` with polynomial
``A``, ``B``; this family is closed under the constructions we need:

* holomorphic basis: ``x^(j-1) dx/y``, ``j = 1..g``;
* second kind with poles only at the marked point: even pole orders come from
  ``x^(g+m) dx/y``, odd pole orders from ``x^a dx``, lower-order contamination
  removed by a triangular solve against the chart expansion.

In the chart ``x = t^-2`` one has ``dx = -2 t^-3 dt`` and
``1/y = t^(2g+1)/S(t)``, so a monomial ``x^a dx/y`` expands to
``-2 t^(2(g-a-1)) dt / S(t)`` (even powers only; never a residue) and
``x^a dx = -2 t^(-2a-3) dt`` exactly.
"""

import numpy as np

from .config import DEFAULT_TOL
from .errors import QuadratureFailure, NotPositiveDefinite
from .homology import standard_basis
from .quadrature import integrate_piece
from .series import LaurentDT, check_order, ps_inv


def _trim(c):
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    nz = np.nonzero(c)[0]
    if nz.size == 0:
        return np.zeros(0, dtype=complex)
    return c[: nz[-1] + 1].copy()


class DifferentialExpr:
    """``(A(x) + B(x) y) dx / y`` with exact polynomial coefficient vectors."""

    __slots__ = ("a", "b")

    def __init__(self, a=(), b=()):
        self.a = _trim(a)
        self.b = _trim(b)

    @property
    def deg_a(self):
        return self.a.size - 1

    @property
    def deg_b(self):
        return self.b.size - 1

    def is_zero(self):
        return self.a.size == 0 and self.b.size == 0

    def w(self, x, y):
        """The 1-form coefficient against ``dx``: ``(A(x) + B(x) y)/y``."""
        va = np.polynomial.polynomial.polyval(x, self.a) if self.a.size else 0.0
        vb = np.polynomial.polynomial.polyval(x, self.b) if self.b.size else 0.0
        return va / y + vb

    def __add__(self, other):
        n_a = max(self.a.size, other.a.size)
        n_b = max(self.b.size, other.b.size)
        a = np.zeros(n_a, dtype=complex)
        b = np.zeros(n_b, dtype=complex)
        a[: self.a.size] += self.a
        a[: other.a.size] += other.a
        b[: self.b.size] += self.b
        b[: other.b.size] += other.b
        return DifferentialExpr(a, b)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, c):
        return DifferentialExpr(self.a * c, self.b * c)

    __rmul__ = __mul__

    def to_json(self):
        return {
            "a": [[z.real, z.imag] for z in self.a],
            "b": [[z.real, z.imag] for z in self.b],
        }

    @classmethod
    def from_json(cls, obj):
        a = [complex(p[0], p[1]) for p in obj["a"]]
        b = [complex(p[0], p[1]) for p in obj["b"]]
        return cls(a, b)

    def __repr__(self):
        return f"DifferentialExpr(a={self.a.tolist()}, b={self.b.tolist()})"


class SingularPart:
    """Residue-free principal part ``sum_(i=1)^n r_i t^(-i-1) dt`` at the
    marked point. The residue slot does not exist by construction."""

    __slots__ = ("r",)

    def __init__(self, r):
        self.r = tuple(complex(v) for v in r)

    @property
    def n(self):
        return len(self.r)

    def is_trivial(self):
        return all(v == 0 for v in self.r)

    def max_abs(self):
        return max((abs(v) for v in self.r), default=0.0)

    def exact_order(self):
        """Largest ``i`` with ``r_i`` exactly nonzero (0 when trivial)."""
        for i in range(self.n, 0, -1):
            if self.r[i - 1] != 0:
                return i
        return 0

    def effective_order(self, c_rel=DEFAULT_TOL.stratum_c_rel):
        """Largest ``i`` with ``|r_i| > c``, ``c = c_rel * max|r|``."""
        c = c_rel * self.max_abs()
        for i in range(self.n, 0, -1):
            if abs(self.r[i - 1]) > c:
                return i
        return 0

    def scaled(self, lam):
        return SingularPart([lam * v for v in self.r])

    def to_json(self):
        return [[v.real, v.imag] for v in self.r]

    def __repr__(self):
        return f"SingularPart({list(self.r)})"


def holomorphic_basis(curve):
    """``x^(j-1) dx / y`` for ``j = 1..g``."""
    g = curve.genus
    out = []
    for j in range(g):
        a = np.zeros(j + 1, dtype=complex)
        a[j] = 1.0
        out.append(DifferentialExpr(a, ()))
    return out


def second_kind_basis(curve, n):
    """Differentials ``eta_i`` with chart principal part exactly ``t^(-i-1) dt``.

    Even ``i`` (odd pole order): ``eta_i = -x^((i-2)/2) dx / 2``, exact.
    Odd ``i`` (even pole order): triangular combination of ``x^(g+j) dx/y``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    g = curve.genus
    order = 2 * (n + 2)
    inv_s = ps_inv(curve.chart_series(order), order)
    sigma = inv_s[0::2]  # 1/S has even powers only
    out = []
    for i in range(1, n + 1):
        if i % 2 == 0:
            a_mon = (i - 2) // 2
            b = np.zeros(a_mon + 1, dtype=complex)
            b[a_mon] = -0.5
            out.append(DifferentialExpr((), b))
        else:
            m = (i - 1) // 2
            mat = np.zeros((m + 1, m + 1), dtype=complex)
            for k in range(m + 1):
                for j in range(k, m + 1):
                    mat[k, j] = -2.0 * sigma[j - k]
            rhs = np.zeros(m + 1, dtype=complex)
            rhs[m] = 1.0
            u = np.linalg.solve(mat, rhs)
            a = np.zeros(g + m + 1, dtype=complex)
            for j in range(m + 1):
                a[g + j] = u[j]
            out.append(DifferentialExpr(a, ()))
    return out


def expand_at_infinity(curve, diff, order):
    """Laurent expansion ``sum c_m t^m dt`` of the differential at the marked
    point, with coefficients through ``t^order dt``."""
    order = check_order(order)
    g = curve.genus
    da = diff.deg_a
    db = diff.deg_b
    m_min = 0
    if diff.a.size:
        m_min = min(m_min, 2 * (g - da - 1))
    if diff.b.size:
        m_min = min(m_min, -2 * db - 3)
    size = order - m_min + 1
    coeffs = np.zeros(size, dtype=complex)
    if diff.a.size:
        inv_s = ps_inv(curve.chart_series(size + 2), size + 2)
        for k, ak in enumerate(diff.a):
            if ak == 0:
                continue
            base = 2 * (g - k - 1)  # lowest power of this monomial
            for l in range(0, (order - base) // 2 + 1):
                idx = base + 2 * l - m_min
                if 0 <= idx < size:
                    coeffs[idx] += ak * (-2.0) * inv_s[2 * l]
    if diff.b.size:
        for k, bk in enumerate(diff.b):
            if bk == 0:
                continue
            idx = (-2 * k - 3) - m_min
            if 0 <= idx < size:
                coeffs[idx] += bk * (-2.0)
    return LaurentDT(m_min, coeffs)


def singular_part_of(curve, diff, n=None, tol_abs=1e-11):
    """Read the singular part off the chart expansion (residue asserted 0)."""
    exp = expand_at_infinity(curve, diff, 2)
    if abs(exp.residue()) > tol_abs * (1.0 + float(np.abs(exp.coeffs).max(initial=0.0))):
        raise ValueError(f"nonzero residue {exp.residue()!r}")
    if n is None:
        n = max(1, exp.pole_order() - 1)
    return SingularPart([exp.coeff(-i - 1) for i in range(1, n + 1)])


# -- periods --------------------------------------------------------------------------


def period(curve, diff, cycle, tol=None):
    """Contour integral of the differential over a cycle.

    Returns ``(value, error_estimate)``. Poles sit only at the marked point,
    which every cycle avoids by construction.
    """
    tol = tol or curve.tol
    total = 0.0 + 0.0j
    err = 0.0
    for p, gd in zip(cycle.pieces, cycle.guides()):
        v, e = integrate_piece(curve, diff.w, p, gd, tol.quad_piece)
        total += v
        err += e
    if err > 1e4 * tol.quad_total:
        raise QuadratureFailure(
            f"period error estimate {err:g} above budget {tol.quad_total:g}"
        )
    return total, err


def holomorphic_periods_over(curve, cycle):
    """Vector of the g holomorphic basis periods over one cycle."""
    return np.array(
        [period(curve, w, cycle)[0] for w in holomorphic_basis(curve)],
        dtype=complex,
    )


class PeriodTable:
    """Periods of a family of differentials over the standard basis cycles.

    ``periods[i, k]`` is the period of differential ``i`` over basis cycle
    ``k`` (cycles ordered ``A_1..A_g, B_1..B_g``); ``tau`` is the Riemann
    matrix of the normalized holomorphic basis. ``g`` rows are holomorphic;
    any further rows belong to second-kind basis elements.
    """

    def __init__(self, curve, diff_labels, periods, errors, tau=None):
        self.curve = curve
        self.diff_labels = list(diff_labels)
        self.periods = np.asarray(periods, dtype=complex)
        self.errors = np.asarray(errors, dtype=float)
        self.tau = None if tau is None else np.asarray(tau, dtype=complex)

    @property
    def holomorphic_periods(self):
        """(2g x g) matrix: row per basis cycle, column per holomorphic form."""
        g = self.curve.genus
        return self.periods[:g, :].T

    def to_json(self):
        out = {
            "cycles": [c.label for c in standard_basis(self.curve)],
            "differentials": self.diff_labels,
            "periods": [[[z.real, z.imag] for z in row] for row in self.periods],
            "errors": [list(map(float, row)) for row in self.errors],
        }
        if self.tau is not None:
            out["tau"] = [[[z.real, z.imag] for z in row] for row in self.tau]
        return out


def basis_period_table(curve, n):
    """Period table of the g holomorphic forms and n second-kind forms.

    Cached on the curve; the cache key is ``n`` (larger tables subsume
    smaller ones but are stored separately for simplicity).
    """
    key = ("basis_period_table", n)
    got = curve._extras.get(key)
    if got is not None:
        return got
    basis = standard_basis(curve)
    diffs = holomorphic_basis(curve) + (second_kind_basis(curve, n) if n >= 1 else [])
    labels = [f"omega{j + 1}" for j in range(curve.genus)] + [
        f"eta{i + 1}" for i in range(n)
    ]
    p = np.zeros((len(diffs), len(basis)), dtype=complex)
    e = np.zeros((len(diffs), len(basis)))
    for i, d in enumerate(diffs):
        for k, c in enumerate(basis):
            p[i, k], e[i, k] = period(curve, d, c)
    table = PeriodTable(curve, labels, p, e, tau=None)
    table.diffs = diffs
    curve._extras[key] = table
    return table


def period_matrix(curve):
    """Normalized period matrix of the curve.

    Normalizes the holomorphic basis so the A-periods are the identity,
    forms ``tau`` from the B-periods, and asserts the Riemann conditions:
    symmetry within tolerance and positive-definite imaginary part.
    """
    g = curve.genus
    table = basis_period_table(curve, 0)
    p = table.periods
    a_block = p[:, :g]
    b_block = p[:, g:]
    tau = np.linalg.solve(a_block, b_block)
    asym = float(np.abs(tau - tau.T).max())
    if asym > 100 * curve.tol.tau_symmetry:
        raise QuadratureFailure(
            f"tau asymmetry {asym:g}; period quadrature or basis failure"
        )
    tau = 0.5 * (tau + tau.T)
    eig = np.linalg.eigvalsh(tau.imag)
    if eig.min() <= 0:
        raise NotPositiveDefinite(
            f"Im(tau) not positive definite (min eigenvalue {eig.min():g})"
        )
    out = PeriodTable(curve, table.diff_labels, p, table.errors, tau=tau)
    out.diffs = table.diffs
    return out
