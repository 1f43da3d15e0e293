"""Finite-field towers GF(p) <= GF(q) <= GF(n) with Frobenius automorphisms.

Elements of GF(n), n = p**alpha, are encoded as integers 0..n-1: the
polynomial c_0 + c_1 x + ... + c_{alpha-1} x^{alpha-1} is stored as
sum(c_i * p**i).  The defining polynomial is the Conway polynomial from
Frank Luebeck's database (shipped by the ``conway-polynomials`` package),
so every table built here is reproducible.

Multiplication goes through exp/log tables; for fields up to
``TABLE_LIMIT`` elements full addition/multiplication tables are also
built so that vectorised arithmetic is a single fancy-index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import conway_polynomials
import numpy as np

MAX_FIELD_SIZE = 2**16
TABLE_LIMIT = 1024


class FieldError(ValueError):
    """Raised for invalid tower parameters or element encodings."""


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    return all(p % d for d in range(3, math.isqrt(p) + 1, 2))


@lru_cache(maxsize=None)
def _conway_database():
    return conway_polynomials.database()


def conway_polynomial(p: int, alpha: int) -> tuple[int, ...]:
    """Coefficients (constant term first, monic) of the Conway polynomial C_{p,alpha}."""
    try:
        return tuple(int(c) for c in _conway_database()[p][alpha])
    except KeyError:
        raise FieldError(f"no Conway polynomial known for p={p}, degree {alpha}") from None


class FieldTower:
    """GF(p) <= GF(q) <= GF(n) with q = p**omega and n = p**alpha.

    Instances are immutable after construction; all tables are read-only
    numpy arrays and may be shared between threads.
    """

    def __init__(self, p: int, alpha: int, omega: int):
        if not is_prime(p):
            raise FieldError(f"p={p} is not prime")
        if alpha < 1 or omega < 1:
            raise FieldError("alpha and omega must be positive")
        if alpha % omega:
            raise FieldError(f"omega={omega} does not divide alpha={alpha}")
        if p**alpha > MAX_FIELD_SIZE:
            raise FieldError(f"GF({p}^{alpha}) exceeds the table bound {MAX_FIELD_SIZE}")
        self.p = p
        self.alpha = alpha
        self.omega = omega
        self.n = p**alpha
        self.q = p**omega
        self.poly = conway_polynomial(p, alpha)

        n = self.n
        powers = p ** np.arange(alpha, dtype=np.int64)
        self._powers = powers
        self.digits = (np.arange(n, dtype=np.int64)[:, None] // powers) % p
        self.digits.setflags(write=False)

        if alpha == 1:
            self.generator = (-self.poly[0]) % p
        else:
            self.generator = p  # the class of x

        exp = np.zeros(2 * (n - 1), dtype=np.int64)
        log = np.full(n, -1, dtype=np.int64)
        a = 1
        for i in range(n - 1):
            exp[i] = a
            if log[a] != -1:
                raise FieldError(f"Conway polynomial for GF({n}) is not primitive")
            log[a] = i
            a = self._times_generator(a)
        if a != 1:
            raise FieldError(f"Conway polynomial for GF({n}) is not primitive")
        exp[n - 1:] = exp[: n - 1]
        self.exp = exp
        self.log = log
        self.exp.setflags(write=False)
        self.log.setflags(write=False)

        # frob[i][a] = a^(p^i)
        frob = np.zeros((alpha, n), dtype=np.int64)
        nz = np.arange(1, n)
        for i in range(alpha):
            frob[i, nz] = exp[(log[nz] * p**i) % (n - 1)]
        self.frob = frob
        self.frob.setflags(write=False)

    def _times_generator(self, a: int) -> int:
        p, alpha = self.p, self.alpha
        if alpha == 1:
            return a * self.generator % p
        coeffs = [int(d) for d in self.digits[a]]
        top = coeffs[-1]
        shifted = [0] + coeffs[:-1]
        # x^alpha = -(c_0 + ... + c_{alpha-1} x^{alpha-1})
        out = [(shifted[i] - top * self.poly[i]) % p for i in range(alpha)]
        return sum(c * p**i for i, c in enumerate(out))

    def __repr__(self):
        return f"FieldTower(p={self.p}, alpha={self.alpha}, omega={self.omega})"

    def __eq__(self, other):
        return isinstance(other, FieldTower) and (self.p, self.alpha, self.omega) == (
            other.p,
            other.alpha,
            other.omega,
        )

    def __hash__(self):
        return hash((self.p, self.alpha, self.omega))

    # scalar arithmetic

    def check(self, a: int) -> int:
        if not 0 <= a < self.n:
            raise FieldError(f"{a} is not an element of GF({self.n})")
        return a

    def add(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        return int(((self.digits[a] + self.digits[b]) % self.p) @ self._powers)

    def neg(self, a: int) -> int:
        if self.p == 2:
            return a
        return int(((-self.digits[a]) % self.p) @ self._powers)

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in a finite field")
        return int(self.exp[(self.n - 1 - self.log[a]) % (self.n - 1)])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def power(self, a: int, e: int) -> int:
        if a == 0:
            return 1 if e == 0 else 0
        return int(self.exp[(self.log[a] * e) % (self.n - 1)])

    def frobenius(self, i: int, a: int) -> int:
        """a^(p^i); the exponent i is taken mod alpha."""
        return int(self.frob[i % self.alpha, a])

    def to_poly(self, a: int) -> str:
        """Human-readable polynomial form, e.g. ``x^2+2x+1``."""
        coeffs = [int(d) for d in self.digits[a]]
        terms = []
        for i in reversed(range(self.alpha)):
            c = coeffs[i]
            if c == 0:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            terms.append(f"{c}" if not mono else (mono if c == 1 else f"{c}{mono}"))
        return "+".join(terms) if terms else "0"

    # vectorised arithmetic on integer arrays

    @cached_property
    def add_table(self) -> np.ndarray:
        if self.n > TABLE_LIMIT:
            raise FieldError("addition table only built for small fields")
        a = np.arange(self.n)
        t = self._add_arrays(a[:, None], a[None, :])
        t.setflags(write=False)
        return t

    @cached_property
    def mul_table(self) -> np.ndarray:
        if self.n > TABLE_LIMIT:
            raise FieldError("multiplication table only built for small fields")
        a = np.arange(self.n)
        t = self._mul_arrays(a[:, None], a[None, :])
        t.setflags(write=False)
        return t

    @cached_property
    def neg_table(self) -> np.ndarray:
        t = ((-self.digits) % self.p) @ self._powers
        t.setflags(write=False)
        return t

    def _add_arrays(self, a, b):
        a, b = np.broadcast_arrays(np.asarray(a), np.asarray(b))
        if self.p == 2:
            return np.bitwise_xor(a, b).astype(np.int64)
        return ((self.digits[a] + self.digits[b]) % self.p) @ self._powers

    def _mul_arrays(self, a, b):
        a, b = np.broadcast_arrays(np.asarray(a), np.asarray(b))
        out = self.exp[(self.log[a] + self.log[b]) % (self.n - 1)] if self.n > 1 else a
        return np.where((a == 0) | (b == 0), 0, out)

    def vadd(self, a, b):
        if self.n <= TABLE_LIMIT:
            return self.add_table[a, b]
        return self._add_arrays(a, b)

    def vmul(self, a, b):
        if self.n <= TABLE_LIMIT:
            return self.mul_table[a, b]
        return self._mul_arrays(a, b)

    def vneg(self, a):
        return self.neg_table[a]

    def vsub(self, a, b):
        return self.vadd(a, self.neg_table[b])

    @cached_property
    def subgroup(self) -> GaloisSubgroup:
        return GaloisSubgroup(self)


def build_tower(p: int, alpha: int, omega: int) -> FieldTower:
    return FieldTower(p, alpha, omega)


@dataclass(frozen=True)
class GaloisSubgroup:
    """H = Gal(GF(n)/GF(q)), cyclic of order alpha/omega generated by x -> x^q."""

    tower: FieldTower
    exponents: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        t = self.tower
        object.__setattr__(
            self, "exponents", tuple(t.omega * i for i in range(t.alpha // t.omega))
        )

    @property
    def order(self) -> int:
        return len(self.exponents)

    @property
    def generator_exponent(self) -> int:
        return self.tower.omega

    def apply(self, exponent: int, a: int) -> int:
        return self.tower.frobenius(exponent, a)

    def orbit(self, a: int) -> frozenset[int]:
        return frozenset(self.tower.frobenius(e, a) for e in self.exponents)

    def images(self, a: int) -> list[int]:
        """phi(a) for every phi in H, in exponent order (with repeats)."""
        return [self.tower.frobenius(e, a) for e in self.exponents]


def frobenius_apply(tower: FieldTower, i: int, a: int) -> int:
    return tower.frobenius(i, tower.check(a))


def degree_over_subfield(tower: FieldTower, a: int) -> int:
    """Least d >= 1 with a^(q^d) = a; this is the size of the H-orbit of a."""
    tower.check(a)
    d, b = 1, tower.frobenius(tower.omega, a)
    while b != a:
        b = tower.frobenius(tower.omega, b)
        d += 1
    return d


def h_orbits(tower: FieldTower, nonzero: bool = True) -> list[tuple[int, ...]]:
    """H-orbits on GF(n) (or GF(n)* when ``nonzero``), each sorted, listed by minimum."""
    H = tower.subgroup
    seen = set()
    orbits = []
    for a in range(1 if nonzero else 0, tower.n):
        if a in seen:
            continue
        orb = tuple(sorted(H.orbit(a)))
        seen.update(orb)
        orbits.append(orb)
    return orbits


@dataclass(frozen=True)
class Transversal:
    representatives: tuple[int, ...]

    def __iter__(self):
        return iter(self.representatives)

    def __len__(self):
        return len(self.representatives)

    def __contains__(self, a):
        return a in self.representatives


def h_orbit_transversal(tower: FieldTower, H: GaloisSubgroup | None = None) -> Transversal:
    """Encoding-minimal representative of each H-orbit on GF(n) minus zero."""
    if H is not None and H.tower != tower:
        raise FieldError("subgroup belongs to a different tower")
    return Transversal(tuple(orb[0] for orb in h_orbits(tower)))


def burnside_orbit_count(tower: FieldTower) -> int:
    """Number of H-orbits on all of GF(n), by Burnside's lemma.

    The automorphism x -> x^(q^beta) fixes the subfield GF(q^gcd(r, beta)),
    r = |H|, so the count is (1/r) * sum_{beta=1}^{r} q^gcd(r, beta).
    """
    r = tower.alpha // tower.omega
    total = sum(tower.q ** math.gcd(r, beta) for beta in range(1, r + 1))
    count, rem = divmod(total, r)
    assert rem == 0
    return count
