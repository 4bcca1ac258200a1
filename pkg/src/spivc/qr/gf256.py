"""Arithmetic in GF(2^8) with the QR field polynomial x^8 + x^4 + x^3 + x^2 + 1."""

PRIMITIVE = 0x11D

EXP = [0] * 512
LOG = [0] * 256

_x = 1
for _i in range(255):
    EXP[_i] = _x
    LOG[_x] = _i
    _x <<= 1
    if _x & 0x100:
        _x ^= PRIMITIVE
for _i in range(255, 512):
    EXP[_i] = EXP[_i - 255]
del _x, _i


def mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return EXP[LOG[a] + LOG[b]]


def div(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("division by zero in GF(256)")
    if a == 0:
        return 0
    return EXP[(LOG[a] - LOG[b]) % 255]


def inverse(a: int) -> int:
    return div(1, a)


def power(a: int, n: int) -> int:
    if a == 0:
        return 0 if n else 1
    return EXP[(LOG[a] * n) % 255]


def alpha_pow(n: int) -> int:
    return EXP[n % 255]


# Polynomials are lists of coefficients, highest degree first.

def poly_mul(p: list[int], q: list[int]) -> list[int]:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] ^= mul(a, b)
    return out


def poly_eval(p: list[int], x: int) -> int:
    """Horner evaluation."""
    y = 0
    for c in p:
        y = mul(y, x) ^ c
    return y
