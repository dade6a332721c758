"""Truncated power-series arithmetic in one variable.

Series are numpy complex arrays of coefficients, lowest order first, all
truncated at a common working order. Used for Laurent expansions of
differentials in the chart at the marked point and for local analysis at
branch points.
"""

import numpy as np

from .errors import SeriesDivergence

#: hard cap on requested expansion orders
MAX_ORDER = 400


def ps_trim(a, order):
    """Truncate or zero-pad ``a`` to exactly ``order`` coefficients."""
    a = np.asarray(a, dtype=complex)
    if a.size >= order:
        return a[:order].copy()
    out = np.zeros(order, dtype=complex)
    out[: a.size] = a
    return out


def ps_mul(a, b, order):
    """Product of two series, truncated to ``order`` terms."""
    a = ps_trim(a, order)
    b = ps_trim(b, order)
    return np.convolve(a, b)[:order]


def ps_inv(a, order):
    """Reciprocal series of ``a`` with ``a[0] != 0``."""
    a = ps_trim(a, order)
    if a[0] == 0:
        raise ZeroDivisionError("series has vanishing constant term")
    out = np.array([1.0 / a[0]], dtype=complex)
    # Newton iteration doubles the number of correct terms per pass.
    k = 1
    while k < order:
        k = min(2 * k, order)
        outk = ps_trim(out, k)
        out = ps_trim(2.0 * outk - ps_mul(a[:k], ps_mul(outk, outk, k), k), k)
    return ps_trim(out, order)


def ps_sqrt(a, order):
    """Principal square root series of ``a`` with ``a[0] != 0``.

    The constant term is the numpy principal branch of ``sqrt(a[0])``.
    """
    a = ps_trim(a, order)
    if a[0] == 0:
        raise ZeroDivisionError("series has vanishing constant term")
    out = np.array([np.sqrt(complex(a[0]))], dtype=complex)
    k = 1
    while k < order:
        k = min(2 * k, order)
        # Newton: out <- (out + a/out) / 2
        out = ps_trim(0.5 * (ps_trim(out, k) + ps_mul(a[:k], ps_inv(out, k), k)), k)
    return ps_trim(out, order)


def ps_eval(a, z):
    """Evaluate a coefficient array at ``z`` (Horner)."""
    acc = 0.0 + 0.0j
    for c in reversed(np.asarray(a, dtype=complex)):
        acc = acc * z + c
    return acc


class LaurentDT:
    """A finite Laurent expansion ``sum_m c_m t^m dt``.

    Stores the coefficient of ``t^m dt`` for ``m = offset .. offset+len-1``.
    """

    def __init__(self, offset, coeffs):
        coeffs = np.asarray(coeffs, dtype=complex)
        self.offset = int(offset)
        self.coeffs = coeffs

    def coeff(self, m):
        i = m - self.offset
        if 0 <= i < self.coeffs.size:
            return complex(self.coeffs[i])
        return 0.0 + 0.0j

    @property
    def min_order(self):
        return self.offset

    @property
    def max_order(self):
        return self.offset + self.coeffs.size - 1

    def pole_order(self, tol=0.0):
        """Order of the pole of the differential (0 if regular).

        A term ``t^{-k} dt`` with ``k >= 1`` and ``|c| > tol`` counts as a
        pole of order ``k``.
        """
        for m in range(self.offset, min(0, self.max_order + 1)):
            if abs(self.coeff(m)) > tol and m <= -1:
                return -m
        return 0

    def residue(self):
        return self.coeff(-1)

    def antiderivative_eval(self, t):
        """Evaluate the termwise antiderivative (constant term zero) at ``t``.

        Requires a vanishing residue; the ``t^{-1} dt`` term has no
        single-valued antiderivative.
        """
        if abs(self.residue()) > 1e-13 * (1.0 + float(np.abs(self.coeffs).max())):
            raise ValueError("nonzero residue; antiderivative is multivalued")
        acc = 0.0 + 0.0j
        for i, c in enumerate(self.coeffs):
            m = self.offset + i
            if m == -1 or c == 0:
                continue
            acc += c * t ** (m + 1) / (m + 1)
        return acc


def check_order(order):
    if order > MAX_ORDER:
        raise SeriesDivergence(
            f"requested order {order} exceeds truncation cap {MAX_ORDER}"
        )
    return int(order)
