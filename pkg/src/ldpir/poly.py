"""Univariate polynomials over F_p.

Covers what the decoders need: Horner evaluation, formal derivatives,
order-1 (value + first derivative) Hermite interpolation, root finding over
the whole field, and counting order-1 agreements between a polynomial and a
set of (point, value, derivative) samples.

Coefficients are canonical residues in ascending-degree order with no
trailing zeros; the zero polynomial has an empty coefficient tuple and
degree -1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DuplicatePoint, ZeroPolynomial
from .field import FieldModulus

# Exhaustive root scan is cheaper than factoring below this field size.
_SCAN_LIMIT = 1 << 16


@dataclass(frozen=True)
class HermiteSample:
    """One order-1 sample: claimed f(point) and f'(point) at an evaluation point."""

    point: int
    value: int
    derivative: int


class Poly:
    """Immutable univariate polynomial over a fixed prime field."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: FieldModulus, coeffs: Iterable[int] = ()):
        c = [x % field.p for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "coeffs", tuple(c))

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    @property
    def degree(self) -> int:
        """Degree of the polynomial; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def constant_term(self) -> int:
        return self.coeffs[0] if self.coeffs else 0

    def __call__(self, x: int) -> int:
        p = self.field.p
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % p
        return acc

    def derivative(self) -> "Poly":
        return Poly(
            self.field, (i * c for i, c in enumerate(self.coeffs) if i > 0)
        )

    def add(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Poly(self.field, out)

    def scale(self, c: int) -> "Poly":
        return Poly(self.field, (c * x for x in self.coeffs))

    def mul(self, other: "Poly") -> "Poly":
        if self.is_zero or other.is_zero:
            return Poly(self.field)
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(self.field, out)

    def shift(self, k: int) -> "Poly":
        """Multiply by x^k."""
        if self.is_zero:
            return self
        return Poly(self.field, (0,) * k + self.coeffs)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Poly)
            and self.field == other.field
            and self.coeffs == other.coeffs
        )

    def __hash__(self) -> int:
        return hash((self.field.p, self.coeffs))

    def __reduce__(self):
        return (Poly, (self.field, self.coeffs))

    def __repr__(self) -> str:
        return f"Poly({list(self.coeffs)} mod {self.field.p})"


def hermite_interpolate(
    samples: Sequence[HermiteSample], field: FieldModulus
) -> Poly:
    """The unique polynomial of degree <= 2h-1 matching h order-1 samples.

    Newton divided differences with every node listed twice; the first-order
    difference at a repeated node is the prescribed derivative.  Uniqueness:
    the difference of two solutions has a double root at each of the h nodes,
    so its degree would exceed 2h-1 unless it is zero.
    """
    if not samples:
        raise ValueError("need at least one sample")
    p = field.p
    if len({s.point % p for s in samples}) != len(samples):
        raise DuplicatePoint("evaluation points must be pairwise distinct")
    n = 2 * len(samples)
    z: list[int] = []
    col: list[int] = []
    for s in samples:
        z.extend((s.point % p, s.point % p))
        col.extend((s.value % p, s.value % p))

    newton = [col[0]]
    for r in range(1, n):
        nxt = []
        for i in range(n - r):
            if z[i + r] == z[i]:
                # only happens at r == 1 with i even: the repeated node
                nxt.append(samples[i // 2].derivative % p)
            else:
                step = (col[i + 1] - col[i]) * pow(z[i + r] - z[i], p - 2, p)
                nxt.append(step % p)
        col = nxt
        newton.append(col[0])

    # expand sum_r newton[r] * prod_{j<r} (x - z_j)
    result = [0] * n
    basis = [1]
    for r, c in enumerate(newton):
        for i, bc in enumerate(basis):
            result[i] = (result[i] + c * bc) % p
        if r < n - 1:
            basis = _mul_linear(basis, z[r], p)
    return Poly(field, result)


def _mul_linear(basis: list[int], node: int, p: int) -> list[int]:
    """basis(x) * (x - node)."""
    out = [0] * (len(basis) + 1)
    for i, b in enumerate(basis):
        out[i] = (out[i] - node * b) % p
        out[i + 1] = (out[i + 1] + b) % p
    return out


def order1_agreement_count(f: Poly, samples: Sequence[HermiteSample]) -> int:
    """Number of samples where both f(point) and f'(point) match."""
    df = f.derivative()
    p = f.field.p
    return sum(
        1
        for s in samples
        if f(s.point) == s.value % p and df(s.point) == s.derivative % p
    )


def poly_roots(f: Poly, seed: int = 0) -> list[int]:
    """All x in F_p with f(x) = 0, ascending, without multiplicities.

    Small fields are scanned exhaustively; larger fields go through
    gcd(x^p - x, f) followed by seeded equal-degree splitting, which
    terminates in expected polynomial time.
    """
    if f.is_zero:
        raise ZeroPolynomial("roots of the zero polynomial are undefined")
    p = f.field.p
    if f.degree == 0:
        return []
    if p <= _SCAN_LIMIT:
        xs = np.arange(p, dtype=np.int64)
        acc = np.zeros(p, dtype=np.int64)
        for c in reversed(f.coeffs):
            acc = (acc * xs + c) % p
        return [int(r) for r in xs[acc == 0]]
    return sorted(_roots_large(list(f.coeffs), p, seed))


# -- large-field path, on raw coefficient lists -------------------------------


def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmul(a: list[int], b: list[int], p: int) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _trim(out)


def _pmod(a: list[int], b: list[int], p: int) -> list[int]:
    a = a[:]
    db, lead_inv = len(b) - 1, pow(b[-1], p - 2, p)
    while a and len(a) - 1 >= db:
        q = a[-1] * lead_inv % p
        shift = len(a) - 1 - db
        for i, c in enumerate(b):
            a[shift + i] = (a[shift + i] - q * c) % p
        _trim(a)
    return a


def _pdiv(a: list[int], b: list[int], p: int) -> list[int]:
    a = a[:]
    out = [0] * (len(a) - len(b) + 1)
    lead_inv = pow(b[-1], p - 2, p)
    while a and len(a) >= len(b):
        q = a[-1] * lead_inv % p
        shift = len(a) - len(b)
        out[shift] = q
        for i, c in enumerate(b):
            a[shift + i] = (a[shift + i] - q * c) % p
        _trim(a)
    return _trim(out)


def _pgcd(a: list[int], b: list[int], p: int) -> list[int]:
    while b:
        a, b = b, _pmod(a, b, p)
    inv = pow(a[-1], p - 2, p)
    return [c * inv % p for c in a]


def _roots_large(coeffs: list[int], p: int, seed: int) -> list[int]:
    # gcd with x^p - x isolates the distinct linear factors
    xp = _ppowmod([0, 1], p, coeffs, p)
    xp_minus_x = xp + [0] * (2 - len(xp))
    xp_minus_x[1] = (xp_minus_x[1] - 1) % p
    xp_minus_x = _trim(xp_minus_x)
    if xp_minus_x:
        g = _pgcd(coeffs, xp_minus_x, p)
    else:
        inv = pow(coeffs[-1], p - 2, p)
        g = [c * inv % p for c in coeffs]
    roots: list[int] = []
    rng = np.random.Generator(np.random.Philox(seed))

    def split(g: list[int]) -> None:
        d = len(g) - 1
        if d <= 0:
            return
        if d == 1:
            roots.append(-g[0] * pow(g[1], p - 2, p) % p)
            return
        while True:
            delta = int(rng.integers(0, p))
            h = _ppowmod([delta, 1], (p - 1) // 2, g, p)
            h = h[:] if h else [0]
            h[0] = (h[0] - 1) % p
            h = _trim(h)
            if not h:
                continue
            f1 = _pgcd(g, h, p)
            if 0 < len(f1) - 1 < d:
                split(f1)
                split(_pdiv(g, f1, p))
                return

    split(g)
    return roots


def _ppowmod(base: list[int], e: int, mod: list[int], p: int) -> list[int]:
    result = [1]
    base = _pmod(base, mod, p)
    while e:
        if e & 1:
            result = _pmod(_pmul(result, base, p), mod, p)
        base = _pmod(_pmul(base, base, p), mod, p)
        e >>= 1
    return result
