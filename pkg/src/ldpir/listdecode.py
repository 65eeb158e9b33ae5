"""Weighted-degree bivariate interpolation and polynomial root extraction.

This is the decoding core of the bivariate list-decoding scheme.  Given k
order-1 samples (point, value, derivative), we fit a nonzero bivariate
polynomial Q(x, y) = sum_s q_s(x) y^s of (1, wt)-weighted degree at most D
that vanishes on every sample both directly and through its total derivative
along y.  Every polynomial f of degree at most wt that order-1 agrees with
enough samples then satisfies Q(x, f(x)) = 0 identically, so the candidate
retrievals are exactly the degree-bounded polynomial roots of Q in y, which
are peeled off coefficient by coefficient.
"""

from __future__ import annotations

import math
from typing import Sequence

from .errors import DuplicatePoint, InfeasibleParameters, NoSolution
from .field import FieldModulus
from .poly import HermiteSample, Poly, poly_roots


def monomial_count(alpha_weight: int, degree_cap: int) -> int:
    """Number of monomials x^a y^s with a + s*alpha_weight <= degree_cap."""
    if alpha_weight < 1 or degree_cap < 0:
        return 0
    rho = degree_cap // alpha_weight
    return sum(degree_cap - s * alpha_weight + 1 for s in range(rho + 1))


class WeightedBivariate:
    """Q(x, y) = sum_s q_s(x) y^s with deg(q_s) + s*alpha_weight <= degree_cap."""

    __slots__ = ("field", "alpha_weight", "degree_cap", "coeff_polys")

    def __init__(
        self,
        field: FieldModulus,
        alpha_weight: int,
        degree_cap: int,
        coeff_polys: Sequence[Poly],
    ):
        if alpha_weight < 1:
            raise ValueError("alpha_weight must be >= 1")
        polys = tuple(coeff_polys)
        for s, q in enumerate(polys):
            if not q.is_zero and q.degree + s * alpha_weight > degree_cap:
                raise ValueError(
                    f"coefficient {s} violates the weighted-degree cap"
                )
        if all(q.is_zero for q in polys):
            raise ValueError("all coefficients are zero")
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "alpha_weight", alpha_weight)
        object.__setattr__(self, "degree_cap", degree_cap)
        object.__setattr__(self, "coeff_polys", polys)

    def __setattr__(self, name, value):
        raise AttributeError("WeightedBivariate is immutable")

    def __reduce__(self):
        return (
            WeightedBivariate,
            (self.field, self.alpha_weight, self.degree_cap, self.coeff_polys),
        )

    @property
    def alpha_degree(self) -> int:
        return len(self.coeff_polys) - 1

    def eval_base(self, x: int, y: int) -> int:
        p = self.field.p
        acc = 0
        for q in reversed(self.coeff_polys):
            acc = (acc * y + q(x)) % p
        return acc

    def eval_derivative(self, x: int, y: int, dy: int) -> int:
        """Total derivative of Q along a curve through (x, y) with slope dy.

        Equals d/dx [Q(x, g(x))] at x whenever y = g(x) and dy = g'(x).
        """
        p = self.field.p
        total = 0
        for s, q in enumerate(self.coeff_polys):
            total += q.derivative()(x) * pow(y, s, p)
            if s:
                total += s * q(x) % p * pow(y, s - 1, p) % p * dy
        return total % p

    def compose(self, g: Poly) -> Poly:
        """Q(x, g(x)) as a univariate polynomial."""
        acc = Poly(self.field)
        gpow = Poly(self.field, [1])
        for s, q in enumerate(self.coeff_polys):
            if s:
                gpow = gpow.mul(g)
            if not q.is_zero:
                acc = acc.add(q.mul(gpow))
        return acc


def interpolate(
    samples: Sequence[HermiteSample],
    alpha_weight: int,
    degree_cap: int,
    field: FieldModulus,
) -> WeightedBivariate:
    """Fit a nonzero weighted-degree bivariate vanishing on all 2k constraints.

    For each sample both Q(point, value) = 0 and the total-derivative
    constraint at (point, value, derivative) are imposed.  Requires strictly
    more monomials than constraints, which guarantees a nonzero kernel
    vector; the canonical solution sets the highest-index free column of the
    echelon form to 1 and all other free columns to 0.
    """
    k = len(samples)
    p = field.p
    if len({s.point % p for s in samples}) != k:
        raise DuplicatePoint("evaluation points must be pairwise distinct")
    wt, cap = alpha_weight, degree_cap
    rho = cap // wt
    cols = [(s, a) for s in range(rho + 1) for a in range(cap - s * wt + 1)]
    num = len(cols)
    if num <= 2 * k:
        raise InfeasibleParameters(
            f"{num} monomials cannot satisfy {2 * k} constraints with a "
            f"nonzero polynomial (need num > 2k)"
        )

    rows: list[list[int]] = []
    for smp in samples:
        lam, val, der = smp.point % p, smp.value % p, smp.derivative % p
        xpow = [pow(lam, a, p) for a in range(cap + 1)]
        ypow = [pow(val, s, p) for s in range(rho + 1)]
        base_row = [xpow[a] * ypow[s] % p for (s, a) in cols]
        ext_row = []
        for s, a in cols:
            term = 0
            if s:
                term = s * xpow[a] % p * ypow[s - 1] % p * der
            if a:
                term += a * xpow[a - 1] % p * ypow[s]
            ext_row.append(term % p)
        rows.append(base_row)
        rows.append(ext_row)

    vec = _kernel_vector(rows, num, p)
    polys = []
    idx = 0
    for s in range(rho + 1):
        width = cap - s * wt + 1
        polys.append(Poly(field, vec[idx : idx + width]))
        idx += width
    return WeightedBivariate(field, wt, cap, polys)


def _kernel_vector(matrix: list[list[int]], ncols: int, p: int) -> list[int]:
    """A canonical nonzero kernel vector of the matrix over F_p."""
    echelon: list[list[int]] = []
    pivot_cols: list[int] = []
    for raw in matrix:
        row = raw[:]
        for erow, pcol in zip(echelon, pivot_cols):
            factor = row[pcol]
            if factor:
                row = [(x - factor * y) % p for x, y in zip(row, erow)]
        pcol = next((c for c in range(ncols) if row[c]), None)
        if pcol is None:
            continue
        inv = pow(row[pcol], p - 2, p)
        echelon.append([x * inv % p for x in row])
        pivot_cols.append(pcol)

    taken = set(pivot_cols)
    free = [c for c in range(ncols) if c not in taken]
    if not free:
        raise NoSolution("constraint matrix has full column rank")
    chosen = max(free)
    x = [0] * ncols
    x[chosen] = 1
    for i in sorted(range(len(echelon)), key=lambda i: -pivot_cols[i]):
        pcol, row = pivot_cols[i], echelon[i]
        acc = sum(row[c] * x[c] for c in range(pcol + 1, ncols) if x[c])
        x[pcol] = -acc % p
    return x


def polynomial_roots(
    Q: WeightedBivariate, max_degree: int, seed: int = 0
) -> list[Poly]:
    """All f with deg f <= max_degree and Q(x, f(x)) identically zero.

    Depth-first coefficient peeling: after stripping the largest common
    power of x, the constant term of any root must be a root of Q(0, y);
    for each such gamma the remaining coefficients are roots of the shifted
    polynomial Q(x, gamma + x*y).  Recursion depth is max_degree + 1 and the
    output is deduplicated and sorted by coefficient vector.
    """
    field = Q.field
    results = {
        Poly(field, cs)
        for cs in _peel(list(Q.coeff_polys), max_degree, field, seed)
    }
    return sorted(results, key=lambda f: (len(f.coeffs), f.coeffs))


def _peel(
    qs: list[Poly], budget: int, field: FieldModulus, seed: int
) -> list[tuple[int, ...]]:
    qs = _strip_common_x(qs, field)
    ring_const = Poly(field, [q.constant_term for q in qs])
    out: list[tuple[int, ...]] = []
    for gamma in poly_roots(ring_const, seed):
        if budget == 0:
            if _eval_at_const(qs, gamma, field).is_zero:
                out.append((gamma,))
        else:
            shifted = _shift_alpha(qs, gamma, field)
            for tail in _peel(shifted, budget - 1, field, seed):
                out.append((gamma,) + tail)
    return out


def _strip_common_x(qs: list[Poly], field: FieldModulus) -> list[Poly]:
    vals = []
    for q in qs:
        if not q.is_zero:
            vals.append(next(i for i, c in enumerate(q.coeffs) if c))
    if not vals:
        return qs
    e = min(vals)
    if e == 0:
        return qs
    return [Poly(field, q.coeffs[e:]) if not q.is_zero else q for q in qs]


def _eval_at_const(qs: list[Poly], gamma: int, field: FieldModulus) -> Poly:
    """Q(x, gamma) as a polynomial in x."""
    acc = Poly(field)
    gpow = 1
    for s, q in enumerate(qs):
        if s:
            gpow = gpow * gamma % field.p
        if not q.is_zero and gpow:
            acc = acc.add(q.scale(gpow))
    return acc


def _shift_alpha(qs: list[Poly], gamma: int, field: FieldModulus) -> list[Poly]:
    """Coefficients of T(x, y) = Q(x, gamma + x*y)."""
    p = field.p
    rho = len(qs) - 1
    out = []
    for u in range(rho + 1):
        acc = Poly(field)
        for s in range(u, rho + 1):
            coef = math.comb(s, u) * pow(gamma, s - u, p) % p
            if coef and not qs[s].is_zero:
                acc = acc.add(qs[s].scale(coef))
        out.append(acc.shift(u))
    return out
