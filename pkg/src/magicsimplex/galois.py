"""Arithmetic in small Galois fields GF(p^m).

Elements are stored as reduced coefficient vectors ``(a0, a1, ..., a_{m-1})``
meaning ``a0 + a1 x + ... + a_{m-1} x^{m-1}`` modulo the field's irreducible
polynomial.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

# monic moduli, low-order coefficient first; the leading 1 is implicit
DEFAULT_MODULI = {
    (2, 2): (1, 1),      # x^2 + x + 1
    (2, 3): (1, 1, 0),   # x^3 + x + 1
    (3, 2): (1, 0),      # x^2 + 1
}

SUPPORTED_ORDERS = (2, 3, 4, 5, 7, 8, 9)


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % k for k in range(2, int(n ** 0.5) + 1))


def _poly_has_root(coeffs: tuple[int, ...], p: int) -> bool:
    # coeffs low-order first, monic (leading 1 implicit)
    full = list(coeffs) + [1]
    return any(sum(c * pow(x, i, p) for i, c in enumerate(full)) % p == 0 for x in range(p))


@dataclass(frozen=True)
class FieldSpec:
    """GF(p^m) defined by a monic irreducible polynomial of degree ``m``."""

    p: int
    m: int = 1
    modulus: tuple[int, ...] = ()

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if self.m < 1:
            raise ValueError("degree m must be positive")
        if self.m > 1:
            modulus = tuple(int(c) % self.p for c in self.modulus)
            if len(modulus) != self.m:
                raise ValueError(f"modulus must have {self.m} low-order coefficients")
            object.__setattr__(self, "modulus", modulus)
            # degree <= 3: irreducible iff no root in GF(p)
            if self.m > 3:
                raise ValueError("only m <= 3 is supported")
            if _poly_has_root(modulus, self.p):
                raise ValueError(f"modulus {modulus} + x^{self.m} is reducible over GF({self.p})")

    @classmethod
    def of_order(cls, q: int) -> "FieldSpec":
        """The field of order ``q`` with the package's fixed modulus."""
        for p in (2, 3, 5, 7):
            m, r = 0, q
            while r % p == 0:
                r //= p
                m += 1
            if r == 1 and m >= 1:
                return cls(p, m, DEFAULT_MODULI.get((p, m), ()))
        raise ValueError(f"{q} is not a prime power supported here")

    @property
    def order(self) -> int:
        return self.p ** self.m

    def element(self, coeffs) -> "FieldElement":
        if isinstance(coeffs, int):
            coeffs = [coeffs] + [0] * (self.m - 1)
        coeffs = tuple(int(c) % self.p for c in coeffs)
        if len(coeffs) != self.m:
            raise ValueError(f"expected {self.m} coefficients, got {len(coeffs)}")
        return FieldElement(self, coeffs)

    def zero(self) -> "FieldElement":
        return self.element(0)

    def one(self) -> "FieldElement":
        return self.element(1)

    def generator(self) -> "FieldElement":
        """The class of ``x`` (or 1 for prime fields)."""
        if self.m == 1:
            return self.one()
        return self.element([0, 1] + [0] * (self.m - 2))

    @cached_property
    def elements(self) -> tuple["FieldElement", ...]:
        return enumerate_field(self)


@dataclass(frozen=True)
class FieldElement:
    spec: FieldSpec
    coeffs: tuple[int, ...]

    def _check(self, other) -> "FieldElement":
        if isinstance(other, int):
            return self.spec.element(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        if other.spec != self.spec:
            raise ValueError("elements belong to different fields")
        return other

    def __add__(self, other):
        other = self._check(other)
        p = self.spec.p
        return FieldElement(self.spec, tuple((a + b) % p for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        p = self.spec.p
        return FieldElement(self.spec, tuple((-a) % p for a in self.coeffs))

    def __sub__(self, other):
        return self + (-self._check(other))

    def __mul__(self, other):
        other = self._check(other)
        p, m = self.spec.p, self.spec.m
        prod = [0] * (2 * m - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    prod[i + j] = (prod[i + j] + a * b) % p
        # x^m = -(modulus low-order part)
        for k in range(2 * m - 2, m - 1, -1):
            c = prod[k]
            if c:
                prod[k] = 0
                for i, r in enumerate(self.spec.modulus):
                    prod[k - m + i] = (prod[k - m + i] - c * r) % p
        return FieldElement(self.spec, tuple(prod[:m]))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result, base = self.spec.one(), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise ZeroDivisionError("zero has no multiplicative inverse")
        return self ** (self.spec.order - 2)

    def __truediv__(self, other):
        return self * self._check(other).inverse()

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def frobenius(self) -> "FieldElement":
        return self ** self.spec.p

    def trace(self) -> "FieldElement":
        """Absolute trace ``a + a^p + ... + a^(p^(m-1))``, an element of GF(p)."""
        total, term = self.spec.zero(), self
        for _ in range(self.spec.m):
            total = total + term
            term = term.frobenius()
        if any(total.coeffs[1:]):
            raise ArithmeticError(f"trace {total} escaped the prime subfield")
        return total

    def value(self) -> int:
        """Integer label 0..p-1 of a prime-subfield element."""
        if any(self.coeffs[1:]):
            raise ValueError(f"{self} is not in the prime subfield")
        return self.coeffs[0]

    def index(self) -> int:
        """Position of this element in :func:`enumerate_field` order."""
        return sum(c * self.spec.p ** i for i, c in enumerate(self.coeffs))

    def __int__(self):
        return self.index()

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                mono = "1" if i == 0 else "x" if i == 1 else f"x^{i}"
                terms.append(mono if c == 1 and i else f"{c}" if i == 0 else f"{c}{mono}")
        return " + ".join(reversed(terms)) or "0"


def enumerate_field(spec: FieldSpec) -> tuple[FieldElement, ...]:
    """All elements, zero first, ordered lexicographically on the coefficient
    vector read from the highest power down: GF(4) gives 0, 1, x, x + 1."""
    return tuple(
        FieldElement(spec, c[::-1]) for c in itertools.product(range(spec.p), repeat=spec.m)
    )


def trace(a: FieldElement) -> FieldElement:
    return a.trace()
