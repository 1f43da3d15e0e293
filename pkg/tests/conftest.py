import functools

import pytest

from semilinear_ast.action import GroupSpec, label_all_triples
from semilinear_ast.gf import build_tower

# (p, alpha, omega, k)
MATRIX = [
    (2, 1, 1, 2),
    (3, 1, 1, 2),
    (5, 1, 1, 2),
    (2, 2, 1, 2),
    (2, 2, 2, 2),
    (3, 2, 1, 2),
    (2, 3, 1, 2),
    (2, 3, 3, 2),
    (2, 4, 2, 2),
    (2, 1, 1, 3),
    (3, 1, 1, 3),
    (2, 2, 1, 3),
]
K2 = [m for m in MATRIX if m[3] == 2]
SMALL = [m for m in MATRIX if (m[0] ** m[1]) ** m[3] <= 64]


@functools.lru_cache(maxsize=None)
def spec(p, alpha, omega, k, variant="asl"):
    return GroupSpec(variant, k, build_tower(p, alpha, omega))


@functools.lru_cache(maxsize=None)
def partition(p, alpha, omega, k, variant="asl"):
    return label_all_triples(spec(p, alpha, omega, k, variant))


def ids(m):
    return "-".join(map(str, m))


def poly_mulmod(a, b, f, p):
    """Product of coefficient lists a*b reduced mod the monic f, over GF(p)."""
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            prod[i + j] = (prod[i + j] + x * y) % p
    d = len(f) - 1
    for i in range(len(prod) - 1, d - 1, -1):
        c = prod[i]
        if c:
            for j in range(d + 1):
                prod[i - d + j] = (prod[i - d + j] - c * f[j]) % p
    out = prod[:d] + [0] * max(0, d - len(prod))
    return out


def to_coeffs(a, p, alpha):
    return [(a // p**i) % p for i in range(alpha)]


def from_coeffs(c, p):
    return sum(x * p**i for i, x in enumerate(c))


@pytest.fixture(params=MATRIX, ids=ids)
def matrix_spec(request):
    return request.param
