"""Independent reference implementations used to pin expected values.

Everything here is written in the most literal way available (exact
rational arithmetic, explicit enumeration over subsets or outcomes) and
deliberately avoids the library code it is used to check.
"""

import itertools
import math
from fractions import Fraction

import numpy as np


def encode_oracle(q, ell: int, c: int) -> int:
    """Grid-round a rational and map it into Z_{2^ell}, two's complement."""
    scaled = Fraction(q) * 2 ** c
    num, den = scaled.numerator, scaled.denominator
    if num >= 0:
        r = (2 * num + den) // (2 * den)
    else:
        r = -((2 * -num + den) // (2 * den))
    assert abs(r) < 2 ** (ell - 1), "oracle input out of ring range"
    return r % 2 ** ell


def decode_oracle(raw: int, ell: int, c: int) -> Fraction:
    signed = raw - 2 ** ell if raw >= 2 ** (ell - 1) else raw
    return Fraction(signed, 2 ** c)


def dlap_pmf(z: int, alpha: float) -> float:
    """Two-sided geometric pmf (1-alpha)/(1+alpha) * alpha^|z|."""
    return (1.0 - alpha) / (1.0 + alpha) * alpha ** abs(z)


def polya_pmf(x: int, r: float, beta: float) -> float:
    """Negative binomial pmf C(x+r-1, x) (1-beta)^r beta^x."""
    coef = math.gamma(x + r) / (math.gamma(r) * math.factorial(x))
    return coef * (1.0 - beta) ** r * beta ** x


def ustat_bruteforce(rows, fn, k: int = 2) -> float:
    """Complete U-statistic by explicit subset enumeration."""
    vals = [fn(*combo) for combo in itertools.combinations(list(rows), k)]
    return sum(vals) / len(vals)


def kendall_fn(a, b) -> float:
    return float(np.sign(a[0] - b[0]) * np.sign(a[1] - b[1]))


def gini_fn(a, b) -> float:
    return abs(float(a) - float(b))


def dup_fn(a, b) -> float:
    return 1.0 if float(a) == float(b) else 0.0


def auc_fn(a, b) -> float:
    (s1, y1), (s2, y2) = a, b
    if y1 == y2:
        return 0.0
    if y1 > y2:
        pos, neg = s1, s2
    else:
        pos, neg = s2, s1
    return 1.0 if pos > neg else 0.0


def rand_fn(a, b) -> float:
    return 1.0 if (a[0] == b[1] and b[0] == a[1]) else 0.0


def randomizer_matrix(t: int, beta: float) -> np.ndarray:
    """Transition matrix M[x, y] = P[R(x) = y] of keep-or-uniform response."""
    return (1.0 - beta) * np.eye(t) + beta / t * np.ones((t, t))


def bell_debias_expectation(a: np.ndarray, beta: float) -> np.ndarray:
    """E[fhat(R(x), R(y))] for every true bin pair (x, y), by enumeration.

    Unbiasedness of the debiased estimator is equivalent to this sandwich
    reproducing A exactly.
    """
    t = a.shape[0]
    m = randomizer_matrix(t, beta)
    b = np.full(t, beta / t)
    # fhat(i, j) = (e_i - b)^T A (e_j - b) / (1-beta)^2
    fhat = np.empty((t, t))
    for i in range(t):
        for j in range(t):
            ei = np.zeros(t)
            ei[i] = 1.0
            ej = np.zeros(t)
            ej[j] = 1.0
            fhat[i, j] = (ei - b) @ a @ (ej - b) / (1.0 - beta) ** 2
    return m @ fhat @ m.T


def hoeffding_components_xy(grid: int = 2000) -> tuple[float, float]:
    """sigma1, sigma2 for f(x, y) = x*y with x, y ~ U(0, 1), by quadrature.

    sigma1 = Var_x(E_y[f]) and sigma2 = Var(f); midpoint rule on a grid.
    """
    xs = (np.arange(grid) + 0.5) / grid
    # E_y[x*y] = x/2; overall mean 1/4
    g = xs / 2.0
    sigma1 = float(np.mean(g ** 2) - np.mean(g) ** 2)
    prod = np.outer(xs, xs)
    sigma2 = float(np.mean(prod ** 2) - np.mean(prod) ** 2)
    return sigma1, sigma2


def balanced_reference_draw(n, k, m, cap, rng):
    """Sequential weighted draws without replacement over capacities.

    Mirrors the contract of the fast slot-array cores: each vertex draw
    picks proportionally to remaining capacity, repeats within an edge
    are rejected by redrawing, and duplicate edges are rejected whole.
    Used only at tiny sizes where running it to completion is cheap.
    """
    caps = [cap] * n
    seen = set()
    edges = []
    guard = 0
    while len(edges) < m:
        guard += 1
        assert guard < 100000, "reference sampler stuck"
        chosen = []
        while len(chosen) < k:
            total = sum(caps[v] for v in range(n) if v not in chosen)
            assert total > 0
            u = rng.random() * total
            acc = 0.0
            for v in range(n):
                if v in chosen:
                    continue
                acc += caps[v]
                if u < acc:
                    chosen.append(v)
                    break
        key = tuple(sorted(chosen))
        if key in seen:
            continue
        seen.add(key)
        edges.append(key)
        for v in key:
            caps[v] -= 1
    return edges
