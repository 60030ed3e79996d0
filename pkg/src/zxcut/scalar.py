"""Exact arithmetic in Z[omega, 1/sqrt2] with omega = exp(i*pi/4)."""

from __future__ import annotations

import cmath
import math
from typing import Iterable

_OMEGA = cmath.exp(1j * math.pi / 4)
_POWERS = tuple(_OMEGA**j for j in range(4))


def _mul4(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, int, int, int]:
    # omega^4 = -1, so products wrap around with a sign flip
    r = [0, 0, 0, 0]
    for i in range(4):
        ai = a[i]
        if not ai:
            continue
        for j in range(4):
            bj = b[j]
            if not bj:
                continue
            k = i + j
            if k < 4:
                r[k] += ai * bj
            else:
                r[k - 4] -= ai * bj
    return (r[0], r[1], r[2], r[3])


def _times_sqrt2(c: tuple[int, ...]) -> tuple[int, int, int, int]:
    # sqrt2 = omega - omega^3
    c0, c1, c2, c3 = c
    return (c1 - c3, c0 + c2, c1 + c3, c2 - c0)


def _div_sqrt2(c: tuple[int, ...]) -> tuple[int, int, int, int] | None:
    y = _times_sqrt2(c)
    if any(v & 1 for v in y):
        return None
    return (y[0] >> 1, y[1] >> 1, y[2] >> 1, y[3] >> 1)


class Phase:
    """A multiple of pi/4, stored as an integer modulo 8."""

    __slots__ = ("numerator",)

    def __init__(self, numerator: int = 0) -> None:
        if isinstance(numerator, Phase):
            numerator = numerator.numerator
        if not isinstance(numerator, int) or isinstance(numerator, bool):
            raise ValueError(f"phase numerator must be an integer, got {numerator!r}")
        self.numerator = numerator % 8

    @classmethod
    def from_angle(cls, radians: float) -> Phase:
        q = radians / (math.pi / 4)
        n = round(q)
        if abs(q - n) > 1e-9:
            raise ValueError(f"angle {radians} is not a multiple of pi/4")
        return cls(n)

    def is_clifford(self) -> bool:
        return self.numerator % 2 == 0

    def is_t_like(self) -> bool:
        return self.numerator % 2 == 1

    def is_pauli(self) -> bool:
        return self.numerator % 4 == 0

    def __add__(self, other: Phase | int) -> Phase:
        return Phase(self.numerator + int(other))

    def __neg__(self) -> Phase:
        return Phase(-self.numerator)

    def __int__(self) -> int:
        return self.numerator

    def __index__(self) -> int:
        return self.numerator

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Phase):
            return self.numerator == other.numerator
        if isinstance(other, int):
            return self.numerator == other % 8
        return NotImplemented

    def __hash__(self) -> int:
        return hash(("Phase", self.numerator))

    def __repr__(self) -> str:
        return f"Phase({self.numerator})"

    def __str__(self) -> str:
        n = self.numerator
        if n == 0:
            return "0"
        if n == 4:
            return "π"
        g = math.gcd(n, 4)
        num, den = n // g, 4 // g
        return f"{'' if num == 1 else num}π/{den}"


class ExactScalar:
    """The number 2^(-k/2) * (c0 + c1 w + c2 w^2 + c3 w^3), kept canonical.

    Canonical means k >= 0 and no further factor of sqrt2 can be pulled out
    of the coefficients while k > 0.  Zero is always ``k = 0, (0, 0, 0, 0)``.
    """

    __slots__ = ("coeffs", "half_power")

    def __init__(self, coeffs: Iterable[int] = (1, 0, 0, 0), half_power: int = 0) -> None:
        c = tuple(int(x) for x in coeffs)
        if len(c) != 4:
            raise ValueError("ExactScalar needs exactly four coefficients")
        k = int(half_power)
        if c == (0, 0, 0, 0):
            k = 0
        else:
            while k < 0:
                c = _times_sqrt2(c)
                k += 1
            while k > 0:
                d = _div_sqrt2(c)
                if d is None:
                    break
                c = d
                k -= 1
        self.coeffs: tuple[int, int, int, int] = c  # type: ignore[assignment]
        self.half_power: int = k

    # constructors

    @classmethod
    def one(cls) -> ExactScalar:
        return cls((1, 0, 0, 0), 0)

    @classmethod
    def zero(cls) -> ExactScalar:
        return cls((0, 0, 0, 0), 0)

    @classmethod
    def from_int(cls, n: int) -> ExactScalar:
        return cls((n, 0, 0, 0), 0)

    @classmethod
    def omega_power(cls, j: int) -> ExactScalar:
        """omega^j for any integer j."""
        j %= 8
        c = [0, 0, 0, 0]
        c[j % 4] = -1 if j >= 4 else 1
        return cls(c, 0)

    @classmethod
    def sqrt2_power(cls, n: int) -> ExactScalar:
        """sqrt(2)^n; negative n gives the inverse powers."""
        return cls((1, 0, 0, 0), -n)

    @classmethod
    def phase_plus_one(cls, phase: Phase | int) -> ExactScalar:
        """1 + exp(i*phase*pi/4), the value of a degree-0 Z spider."""
        return cls.one() + cls.omega_power(int(phase))

    # arithmetic

    def __mul__(self, other: ExactScalar | int) -> ExactScalar:
        if isinstance(other, int):
            other = ExactScalar.from_int(other)
        if not isinstance(other, ExactScalar):
            return NotImplemented
        return ExactScalar(_mul4(self.coeffs, other.coeffs), self.half_power + other.half_power)

    __rmul__ = __mul__

    def __add__(self, other: ExactScalar | int) -> ExactScalar:
        if isinstance(other, int):
            other = ExactScalar.from_int(other)
        if not isinstance(other, ExactScalar):
            return NotImplemented
        a, b = self, other
        if a.half_power < b.half_power:
            a, b = b, a
        cb = b.coeffs
        for _ in range(a.half_power - b.half_power):
            cb = _times_sqrt2(cb)
        return ExactScalar(tuple(x + y for x, y in zip(a.coeffs, cb)), a.half_power)

    __radd__ = __add__

    def __neg__(self) -> ExactScalar:
        return ExactScalar(tuple(-x for x in self.coeffs), self.half_power)

    def __sub__(self, other: ExactScalar | int) -> ExactScalar:
        if isinstance(other, int):
            other = ExactScalar.from_int(other)
        return self + (-other)

    def __rsub__(self, other: int) -> ExactScalar:
        return ExactScalar.from_int(other) - self

    def conjugate(self) -> ExactScalar:
        # omega -> omega^-1 = -omega^3
        c0, c1, c2, c3 = self.coeffs
        return ExactScalar((c0, -c3, -c2, -c1), self.half_power)

    def is_zero(self) -> bool:
        return self.coeffs == (0, 0, 0, 0)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = ExactScalar.from_int(other)
        if not isinstance(other, ExactScalar):
            return NotImplemented
        return self.coeffs == other.coeffs and self.half_power == other.half_power

    def __hash__(self) -> int:
        return hash((self.coeffs, self.half_power))

    def __complex__(self) -> complex:
        z = sum(c * p for c, p in zip(self.coeffs, _POWERS))
        return complex(z) * 2.0 ** (-self.half_power / 2)

    def canonical(self) -> ExactScalar:
        return ExactScalar(self.coeffs, self.half_power)

    def __repr__(self) -> str:
        return f"ExactScalar({self.coeffs}, half_power={self.half_power})"

    def __str__(self) -> str:
        names = ("", "ω", "ω²", "ω³")
        parts = []
        for c, n in zip(self.coeffs, names):
            if c == 0:
                continue
            if n and abs(c) == 1:
                parts.append(("-" if c < 0 else "+") + n)
            else:
                parts.append(f"{c:+d}{n}")
        body = "".join(parts).lstrip("+") or "0"
        if self.half_power:
            return f"({body})/√2^{self.half_power}"
        return body

    def to_json(self) -> dict:
        return {"k": self.half_power, "coeffs": list(self.coeffs)}

    @classmethod
    def from_json(cls, obj: dict) -> ExactScalar:
        return cls(obj["coeffs"], obj["k"])
