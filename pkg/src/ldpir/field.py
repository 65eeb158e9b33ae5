"""Arithmetic in the prime field F_p for a configurable prime modulus.

Two views of the same field are provided.  `FieldModulus` is the arithmetic
context: it validates the prime once and exposes int-residue operations, which
is what the rest of the package uses in hot paths.  `FieldElement` wraps a
canonical residue together with its modulus and overloads the usual operators;
it is the convenient boundary type for scripts and tests.

Residues are always kept canonical (in `[0, p)`).  The modulus is capped below
2^63 so that a single product of two residues fits in a 127-bit intermediate
and, for p < 2^31, in an int64 numpy lane.
"""

from __future__ import annotations

# Witnesses making Miller-Rabin deterministic for all n < 2^64.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_MAX_MODULUS = 1 << 63

from .errors import DivisionByZero, ModulusMismatch


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for all n < 2^64."""
    if n < 2:
        return False
    for small in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % small == 0:
            return n == small
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class FieldModulus:
    """A validated prime modulus p with residue arithmetic helpers.

    Instances are immutable and safe to share between threads.
    """

    __slots__ = ("p", "bit_width")

    def __init__(self, p: int):
        if not isinstance(p, int):
            raise TypeError(f"modulus must be an int, got {type(p).__name__}")
        if not 2 < p < _MAX_MODULUS:
            raise ValueError(f"modulus must satisfy 2 < p < 2^63, got {p}")
        if not is_prime(p):
            raise ValueError(f"modulus {p} is not prime")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "bit_width", p.bit_length())

    def __setattr__(self, name, value):
        raise AttributeError("FieldModulus is immutable")

    # -- residue arithmetic -------------------------------------------------

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return a * b % self.p

    def neg(self, a: int) -> int:
        return -a % self.p

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise DivisionByZero(f"inverse of 0 mod {self.p}")
        return pow(a, self.p - 2, self.p)

    def pow(self, a: int, e: int) -> int:
        """a^e with the convention 0^0 = 1."""
        if e < 0:
            raise ValueError("exponent must be nonnegative")
        return pow(a % self.p, e, self.p)

    def reduce(self, a: int) -> int:
        return a % self.p

    # -- metadata ------------------------------------------------------------

    @property
    def element_width_bytes(self) -> int:
        """Bytes per element on the wire: ceil(bit_width / 8)."""
        return (self.bit_width + 7) // 8

    @property
    def fits_int64(self) -> bool:
        """True when a single product of two residues fits in int64."""
        return self.p < (1 << 31)

    def element(self, value: int) -> "FieldElement":
        return FieldElement(value, self)

    def __eq__(self, other) -> bool:
        return isinstance(other, FieldModulus) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("FieldModulus", self.p))

    def __reduce__(self):
        return (FieldModulus, (self.p,))

    def __repr__(self) -> str:
        return f"FieldModulus({self.p})"


class FieldElement:
    """A canonical residue in [0, p), bound to its modulus.

    Arithmetic between elements of different moduli raises ModulusMismatch;
    plain ints are lifted into the operand's field.
    """

    __slots__ = ("value", "field")

    def __init__(self, value: int, field: FieldModulus):
        object.__setattr__(self, "value", value % field.p)
        object.__setattr__(self, "field", field)

    def __setattr__(self, name, value):
        raise AttributeError("FieldElement is immutable")

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise ModulusMismatch(
                    f"mixed moduli {self.field.p} and {other.field.p}"
                )
            return other.value
        if isinstance(other, int):
            return other % self.field.p
        return NotImplemented

    def __add__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return FieldElement(self.value + b, self.field)

    __radd__ = __add__

    def __sub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return FieldElement(self.value - b, self.field)

    def __rsub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return FieldElement(b - self.value, self.field)

    def __mul__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return FieldElement(self.value * b, self.field)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value, self.field)

    def __truediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return FieldElement(self.value * self.field.inv(b), self.field)

    def __pow__(self, e: int):
        return FieldElement(self.field.pow(self.value, e), self.field)

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field.inv(self.value), self.field)

    def __eq__(self, other) -> bool:
        if isinstance(other, FieldElement):
            return self.field == other.field and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.field.p
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.field.p, self.value))

    def __reduce__(self):
        return (FieldElement, (self.value, self.field))

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"FieldElement({self.value} mod {self.field.p})"
