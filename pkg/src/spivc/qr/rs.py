"""Reed-Solomon codes over GF(256) as used by QR symbols.

Codewords are byte lists with the first byte as the highest-degree
coefficient.  The generator polynomial has roots alpha^0 .. alpha^(ec_len-1).
Decoding computes syndromes, finds the error locator with Berlekamp-Massey,
locates errors by Chien search and evaluates them with Forney's formula.  A
result is only returned if the corrected word has all-zero syndromes, so
inconsistent error patterns raise instead of yielding a wrong message.
"""

from __future__ import annotations

from functools import lru_cache

from . import gf256 as gf


class ReedSolomonError(ValueError):
    """Block could not be corrected."""


@lru_cache(maxsize=None)
def generator_poly(ec_len: int) -> tuple[int, ...]:
    g = [1]
    for i in range(ec_len):
        g = gf.poly_mul(g, [1, gf.alpha_pow(i)])
    return tuple(g)


def rs_ec(data, ec_len: int) -> list[int]:
    """Error-correction codewords: remainder of data(x) * x^ec_len by the generator."""
    if ec_len < 1:
        raise ValueError("ec_len must be >= 1")
    gen = generator_poly(ec_len)
    rem = [0] * ec_len
    for byte in data:
        factor = byte ^ rem[0]
        rem = rem[1:] + [0]
        if factor:
            for i in range(ec_len):
                rem[i] ^= gf.mul(gen[i + 1], factor)
    return rem


def syndromes(codeword, ec_len: int) -> list[int]:
    return [gf.poly_eval(codeword, gf.alpha_pow(i)) for i in range(ec_len)]


def _berlekamp_massey(synd: list[int]) -> list[int]:
    """Error locator Lambda(x), coefficients lowest degree first."""
    c, b = [1], [1]
    length, shift, last = 0, 1, 1
    for n in range(len(synd)):
        d = synd[n]
        for i in range(1, length + 1):
            if i < len(c):
                d ^= gf.mul(c[i], synd[n - i])
        if d == 0:
            shift += 1
            continue
        coef = gf.div(d, last)
        update = [0] * shift + [gf.mul(coef, v) for v in b]
        new_c = c + [0] * max(0, len(update) - len(c))
        for i, v in enumerate(update):
            new_c[i] ^= v
        if 2 * length <= n:
            b, last = c, d
            length = n + 1 - length
            shift = 1
        else:
            shift += 1
        c = new_c
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    if len(c) - 1 != length:
        raise ReedSolomonError("error locator degree inconsistent with syndromes")
    return c


def _eval_low(p: list[int], x: int) -> int:
    y = 0
    for coef in reversed(p):
        y = gf.mul(y, x) ^ coef
    return y


def rs_correct(codeword, ec_len: int) -> tuple[list[int], int]:
    """Correct a received block in place of a copy; returns (codeword, error count)."""
    word = list(codeword)
    n = len(word)
    if n > 255:
        raise ValueError("codeword longer than 255 symbols")
    synd = syndromes(word, ec_len)
    if not any(synd):
        return word, 0

    locator = _berlekamp_massey(synd)
    n_err = len(locator) - 1
    if n_err > ec_len // 2:
        raise ReedSolomonError(f"{n_err} errors exceed capacity {ec_len // 2}")

    # Chien search: position j has locator X = alpha^(n-1-j); root at X^-1
    positions = []
    for j in range(n):
        x_inv = gf.alpha_pow(-(n - 1 - j))
        if _eval_low(locator, x_inv) == 0:
            positions.append(j)
    if len(positions) != n_err:
        raise ReedSolomonError("error locator roots do not match its degree")

    # Omega = S(x) Lambda(x) mod x^ec_len, lowest degree first
    omega = [0] * ec_len
    for i, s in enumerate(synd):
        if s == 0:
            continue
        for k, l in enumerate(locator):
            if i + k < ec_len:
                omega[i + k] ^= gf.mul(s, l)
    # formal derivative in characteristic 2 keeps odd-degree terms
    deriv = [locator[k] if k % 2 == 1 else 0 for k in range(1, len(locator))]

    for j in positions:
        x = gf.alpha_pow(n - 1 - j)
        x_inv = gf.inverse(x)
        denom = _eval_low(deriv, x_inv)
        if denom == 0:
            raise ReedSolomonError("zero derivative in Forney evaluation")
        word[j] ^= gf.mul(x, gf.div(_eval_low(omega, x_inv), denom))

    if any(syndromes(word, ec_len)):
        raise ReedSolomonError("correction left non-zero syndromes")
    return word, n_err
