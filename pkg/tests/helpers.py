"""Shared test utilities."""

import math
import random
from fractions import Fraction

from bnquant.seqgen import feasible_offset_interval

KN_GOLDEN = [1, 1, 2, 3, 5, 7, 9, 11, 13, 22, 25, 29, 41, 46, 51, 67, 73, 79, 99, 106,
            113, 137, 145, 172, 181, 191, 221, 232, 265, 277, 289]

KN_GOLDEN_SLOW = {
    32: 326, 33: 339, 34: 379, 35: 393, 36: 407, 37: 451, 38: 466, 39: 513, 40: 529,
    41: 545, 42: 596, 43: 613, 44: 667, 45: 685, 46: 742, 47: 761, 48: 781, 49: 841,
    50: 862, 51: 925, 52: 947, 53: 1013, 54: 1036, 55: 1059, 56: 1129, 57: 1153,
    58: 1226, 59: 1251, 60: 1327, 61: 1353, 62: 1379, 63: 1459,
}

SATISFIED_15 = [51, 61, 62, 63, 64, 67, 68, 69, 73, 74, 75, 76, 77, 78, 79, 80, 81, 82, 83, 85]


def random_rational(rnd: random.Random, lo, hi, den_max=1000) -> Fraction:
    den = rnd.randint(1, den_max)
    lo_num = math.ceil(Fraction(lo) * den)
    hi_num = math.floor(Fraction(hi) * den)
    return Fraction(rnd.randint(lo_num, hi_num), den)


def random_tb(rnd: random.Random, t_lo=0, t_hi=1, b_span=4):
    while True:
        t = random_rational(rnd, t_lo, t_hi)
        if t != 0:
            break
    return t, random_rational(rnd, -b_span, b_span)


def witness_affine(seq):
    """A canonical ``(t, b)`` generating ``seq``: middle of the offset interval, then of the slope interval."""
    s = tuple(seq)
    lo, hi = feasible_offset_interval(s)
    if lo is None and hi is None:
        b = Fraction(-1, 2)
    elif lo is None:
        b = hi - 1
    elif hi is None:
        b = lo + 1
    else:
        b = (lo + hi) / 2
    t_lo = max((si - 1 + b) / i for i, si in enumerate(s, 1))
    t_hi = min((si + b) / i for i, si in enumerate(s, 1))
    assert t_lo < t_hi, (s, b)
    return (t_lo + t_hi) / 2, b


def random_bn_layer(rnd: random.Random, name: str, a: int = 15, allow_negative_gamma: bool = True) -> dict:
    """JSON entry for a BN layer with decimal-string parameters."""
    def dec(lo, hi, places=3):
        return f"{rnd.uniform(lo, hi):.{places}f}"

    gamma = dec(0.2, 2.0)
    if allow_negative_gamma and rnd.random() < 0.2:
        gamma = "-" + gamma
    return {
        "name": name,
        "mu": dec(-1, 1),
        "sigma": dec(0.3, 3),
        "gamma": gamma,
        "beta": dec(-0.5, 0.8),
        "c": dec(-0.2, 0.2),
        "W": rnd.choice([1, 3, 7, 15]),
        "A": a,
        "y_min": 0,
        "y_max": 1,
    }


def random_model(seed: int, layers: int = 16, a: int = 15) -> dict:
    rnd = random.Random(seed)
    return {"layers": [random_bn_layer(rnd, f"bn{i}", a) for i in range(layers)]}
