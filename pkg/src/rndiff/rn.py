"""The real-normalization solver.

Given a residue-free singular part ``sum r_i t^(-i-1) dt`` at the marked
point, there is a unique differential with that principal part whose periods
over every cycle are real. It is found as

    psi = sum_i r_i eta_i + sum_j c_j omega_j

with the complex ``c_j`` solving the 2g x 2g real linear system
``Im(period_k(psi)) = 0``; solvability follows from the positive-definite
imaginary part of the Riemann matrix.
"""

import numpy as np

from .config import DEFAULT_TOL
from .differentials import (
    DifferentialExpr,
    SingularPart,
    basis_period_table,
    expand_at_infinity,
    holomorphic_basis,
    period,
    second_kind_basis,
)
from .errors import IllConditioned, QuadratureFailure, TrivialSingularPart
from .homology import standard_basis


class RNDifferential:
    """A certified real-normalized differential of the second kind."""

    def __init__(self, curve, expr, singular, coeffs, periods, certificate):
        self.curve = curve
        self.expr = expr
        self.singular = singular
        self.coeffs = np.asarray(coeffs, dtype=complex)
        self.periods = np.asarray(periods, dtype=float)  # a_1..a_g, b_1..b_g
        self.certificate = float(certificate)
        self._extras = {}

    @property
    def n(self):
        return self.singular.n

    def to_json(self):
        return {
            "singular_part": self.singular.to_json(),
            "expr": self.expr.to_json(),
            "coefficients": [[c.real, c.imag] for c in self.coeffs],
            "periods": [float(p) for p in self.periods],
            "certificate": self.certificate,
        }

    def __repr__(self):
        return (
            f"RNDifferential(n={self.n}, certificate={self.certificate:.2e}, "
            f"periods={np.round(self.periods, 6).tolist()})"
        )


def rn_system(curve, n):
    """The real 2g x 2g matrix of the normalization conditions.

    Row ``k`` (cycle), columns ``j`` / ``g+j``: ``Im P[omega_j, k]`` and
    ``Re P[omega_j, k]``.
    """
    g = curve.genus
    table = basis_period_table(curve, n)
    p_holo = table.periods[:g, :]  # (g, 2g)
    m = np.zeros((2 * g, 2 * g))
    m[:, :g] = p_holo.T.imag
    m[:, g:] = p_holo.T.real
    return m, table


def solve_rn(curve, singular, allow_zero=False, certify=True, tol=None):
    """Solve for the unique real-normalized differential.

    ``certify=True`` re-integrates the assembled differential over every
    basis cycle, independently of the cached period table, and records the
    worst ``|Im period|`` as the certificate.
    """
    tol = tol or curve.tol
    if not isinstance(singular, SingularPart):
        singular = SingularPart(singular)
    g = curve.genus
    if singular.is_trivial():
        if not allow_zero:
            raise TrivialSingularPart(
                "all singular coefficients vanish; pass allow_zero=True for the"
                " zero differential"
            )
        zero = DifferentialExpr((), ())
        return RNDifferential(curve, zero, singular, np.zeros(g, dtype=complex),
                              np.zeros(2 * g), 0.0)
    n = singular.n
    m, table = rn_system(curve, n)
    cond = np.linalg.cond(m)
    if cond > tol.rn_condition_cap:
        raise IllConditioned(
            f"normalization system condition number {cond:.3g} exceeds cap"
        )
    r = np.asarray(singular.r, dtype=complex)
    psi0_periods = r @ table.periods[g:, :]  # (2g,)
    rhs = -psi0_periods.imag
    sol = np.linalg.solve(m, rhs)
    # one residual-correction pass
    resid = rhs - m @ sol
    sol = sol + np.linalg.solve(m, resid)
    c = sol[:g] + 1j * sol[g:]

    expr = DifferentialExpr((), ())
    etas = table.diffs[g:]
    omegas = table.diffs[:g]
    for ri, eta in zip(r, etas):
        if ri != 0:
            expr = expr + ri * eta
    for cj, om in zip(c, omegas):
        if cj != 0:
            expr = expr + cj * om

    total = psi0_periods + c @ table.periods[:g, :]
    if certify:
        cert = 0.0
        direct = np.zeros(2 * g, dtype=complex)
        for k, cyc in enumerate(standard_basis(curve)):
            direct[k], _ = period(curve, expr, cyc)
        cert = float(np.abs(direct.imag).max())
        periods_real = direct.real
        if cert > tol.rn_certificate:
            raise QuadratureFailure(
                f"real-normalization certificate {cert:g} above "
                f"{tol.rn_certificate:g}"
            )
    else:
        cert = float(np.abs(total.imag).max())
        periods_real = total.real
    return RNDifferential(curve, expr, singular, c, periods_real, cert)


class ExactnessResult:
    """Verdict of the exactness test, with the antiderivative when found.

    ``witness_u`` and ``witness_v`` are polynomial coefficient arrays with
    ``F = U(x) + V(x) y``; ``pole_order`` is the pole order of ``F`` at the
    marked point.
    """

    def __init__(self, exact, witness_u=None, witness_v=None, pole_order=None,
                 note=""):
        self.exact = bool(exact)
        self.witness_u = witness_u
        self.witness_v = witness_v
        self.pole_order = pole_order
        self.note = note

    def __bool__(self):
        return self.exact

    def to_json(self):
        out = {"exact": self.exact, "note": self.note}
        if self.exact and self.witness_u is not None:
            out["witness"] = {
                "u": [[z.real, z.imag] for z in self.witness_u],
                "v": [[z.real, z.imag] for z in self.witness_v],
                "pole_order": self.pole_order,
            }
        return out


def is_exact(rn, tol=None):
    """Exactness test with witness reconstruction.

    Exact means all 2g real periods vanish (below tolerance). The witness is
    a polynomial ``F = U(x) + V(x) y`` with ``dF = psi``: matching the two
    parts of ``psi = (A + B y) dx/y`` gives ``U' = B`` (always integrable)
    и ``A = V' f + V f'/2`` (a linear solve for ``V``).
    """
    tol = tol or rn.curve.tol
    if np.abs(rn.periods).max(initial=0.0) >= tol.exactness:
        return ExactnessResult(False, note="nonvanishing periods")
    curve = rn.curve
    a, b = rn.expr.a, rn.expr.b
    if rn.expr.is_zero():
        return ExactnessResult(True, np.zeros(0, complex), np.zeros(0, complex),
                               pole_order=0, note="zero differential")
    # U from B by termwise integration
    u = np.zeros(b.size + 1, dtype=complex)
    for k, bk in enumerate(b):
        u[k + 1] = bk / (k + 1)
    # V from A: columns of the map V -> V' f + V f'/2
    twog = 2 * curve.genus
    if a.size == 0:
        v = np.zeros(0, dtype=complex)
        resid = 0.0
    else:
        dv = max(a.size - 1 - twog, 0)
        fpol = curve.f_coeffs
        dfpol = np.polynomial.polynomial.polyder(fpol)
        nrows = max(a.size, dv + fpol.size)
        cols = []
        for k in range(dv + 1):
            col = np.zeros(nrows, dtype=complex)
            if k >= 1:
                tmp = k * fpol  # x^(k-1) * k * f
                col[k - 1 : k - 1 + tmp.size] += tmp
            tmp = 0.5 * dfpol
            col[k : k + tmp.size] += tmp
            cols.append(col)
        mat = np.stack(cols, axis=1)
        rhs = np.zeros(nrows, dtype=complex)
        rhs[: a.size] = a
        v, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
        resid = float(np.abs(mat @ v - rhs).max())
        scale = max(1.0, float(np.abs(a).max()))
        if resid > 1e-9 * scale:
            return ExactnessResult(
                True, None, None, None,
                note=f"witness reconstruction failed (residual {resid:.2e})",
            )
    pole = 0
    if u.size > 1:
        pole = 2 * (u.size - 1)
    if v.size > 0:
        pole = max(pole, 2 * (v.size - 1) + 2 * curve.genus + 1)
    return ExactnessResult(True, u, np.asarray(v, dtype=complex), pole_order=pole)


class StratumReport:
    """Effective pole order and zeros collapsing into the marked point."""

    def __init__(self, effective_order, near_marked_zeros, epsilon, c_value):
        self.effective_order = int(effective_order)
        self.near_marked_zeros = list(near_marked_zeros)
        self.epsilon = float(epsilon)
        self.c_value = float(c_value)

    def to_json(self):
        return {
            "effective_order": self.effective_order,
            "near_marked_zero_indices": [int(i) for i in self.near_marked_zeros],
            "epsilon": self.epsilon,
            "c": self.c_value,
        }


def stratum_report(rn, zeros, epsilon, c_rel=None):
    """Classify zeros within chart distance ``epsilon`` of the marked point
    and report the effective order (largest ``i`` with ``|r_i| > c``).

    ``zeros`` is the list from ``critical_flow.find_zeros``; chart distance
    of a zero at ``x`` is ``|x|^(-1/2)``.
    """
    tol = rn.curve.tol
    c_rel = c_rel if c_rel is not None else tol.stratum_c_rel
    m = rn.singular.effective_order(c_rel)
    near = []
    for i, z in enumerate(zeros):
        ax = abs(z.point.x)
        if ax > 0 and ax ** -0.5 < epsilon:
            near.append(i)
    return StratumReport(m, near, epsilon, c_rel * rn.singular.max_abs())


def verify_singular_part(rn, tol_abs=1e-9):
    """Recover the singular part from the chart expansion and compare."""
    exp = expand_at_infinity(rn.curve, rn.expr, 2)
    worst = 0.0
    for i, ri in enumerate(rn.singular.r, start=1):
        worst = max(worst, abs(exp.coeff(-i - 1) - ri))
    return worst <= tol_abs, worst
