"""Independent reference computations used by the tests.

Nothing here imports the package: continuants are exact integers, series
roots go through mpmath, and closed forms are written out directly.
"""

from __future__ import annotations

import itertools
import math

import mpmath as mp


# -- truncated continued fractions ---------------------------------------------
def continuants(word):
    """``(q_n, q_{n-1})`` for the word ``w`` (exact integers)."""
    q_prev, q = 0, 1
    for a in word:
        q_prev, q = q, a * q + q_prev
    return q, q_prev


def gauss_log_z(n_symbols: int, depth: int, t: float) -> tuple[float, float]:
    """``log`` of the inf- and sup-weighted depth-``depth`` partition sums.

    ``|phi_w'(x)| = 1/(q_n + x q_{n-1})^2`` lies between ``1/(q_n+q_{n-1})^2``
    and ``1/q_n^2`` on [0, 1].
    """
    lo = hi = None
    terms_lo, terms_hi = [], []
    for w in itertools.product(range(1, n_symbols + 1), repeat=depth):
        q, qp = continuants(w)
        terms_hi.append(-2.0 * t * math.log(q))
        terms_lo.append(-2.0 * t * math.log(q + qp))
    m_lo, m_hi = max(terms_lo), max(terms_hi)
    lo = m_lo + math.log(math.fsum(math.exp(x - m_lo) for x in terms_lo))
    hi = m_hi + math.log(math.fsum(math.exp(x - m_hi) for x in terms_hi))
    return lo, hi


def truncated_gauss_dimension(n_symbols: int = 2, depth: int = 10) -> dict:
    """Dimension of the continued fractions with digits in ``{1..n}``.

    Returns the certified bracket from the sub/super-multiplicative bounds
    ``(1/n) log Z_n^inf <= P <= (1/n) log Z_n^sup`` and the ratio estimate
    solving ``Z_depth^sup(t) = Z_{depth-1}^sup(t)``.
    """
    def bisect(f, a=0.0, b=2.0, it=60):
        for _ in range(it):
            m = 0.5 * (a + b)
            if f(m) > 0:
                a = m
            else:
                b = m
        return 0.5 * (a + b)

    upper = bisect(lambda t: gauss_log_z(n_symbols, depth, t)[1])   # P_sup >= P
    lower = bisect(lambda t: gauss_log_z(n_symbols, depth, t)[0])
    ratio = bisect(lambda t: gauss_log_z(n_symbols, depth, t)[1]
                   - gauss_log_z(n_symbols, depth - 1, t)[1])
    return {"lower": lower, "upper": upper, "ratio": ratio}


def gauss_alpha_plus(n: int) -> float:
    """``-log n / log(-n/2 + sqrt(n^2/4 + 1))``: the fixed point of ``x -> 1/(n+x)``."""
    return -math.log(n) / math.log(-n / 2 + math.sqrt(n * n / 4 + 1))


def glueroth_alpha_plus_formula(n: int) -> float:
    return n / math.log(n * (n + 1) * (n + 2) / 4)


def glueroth_symbol_ratio(e: int) -> float:
    """``psi/zeta`` on the fixed point of symbol ``e``: ``e / log(e(e+1)(e+2)/4)``."""
    return e / math.log(e * (e + 1) * (e + 2) / 4)


# -- self-similar series roots ---------------------------------------------------
mp.mp.dps = 30


def lueroth_ratio(e):
    return mp.mpf(1) / (e * (e + 1))


def glueroth_ratio(e):
    return mp.mpf(4) / (e * (e + 1) * (e + 2))


def series_free_energy(ratio, c, beta: float, t_lo: float, t_hi: float, terms: int | None = None):
    """Root in ``t`` of ``sum_e ratio(e)^t exp(beta c(e)) = 1`` by bisection in mpmath.

    ``terms`` truncates the sum (for exponentially decaying terms).
    """
    beta = mp.mpf(beta)

    def z(t):
        f = lambda e: ratio(e) ** t * mp.e ** (beta * c(e))  # noqa: E731
        if terms is not None:
            return mp.fsum(f(mp.mpf(e)) for e in range(1, terms + 1)) - 1
        return mp.nsum(f, [1, mp.inf]) - 1

    a, b = mp.mpf(t_lo), mp.mpf(t_hi)
    if not (z(a) > 0 > z(b)):
        raise ValueError("root not bracketed")
    for _ in range(55):
        m = (a + b) / 2
        if z(m) > 0:
            a = m
        else:
            b = m
    return float((a + b) / 2)


def finite_free_energy(ratios, values, beta: float) -> float:
    """Root of ``sum r_e^t exp(beta c_e) = 1`` for a finite list (bisection in mpmath)."""
    def z(t):
        return mp.fsum(mp.mpf(r) ** t * mp.e ** (mp.mpf(beta) * v) for r, v in zip(ratios, values)) - 1
    a, b = mp.mpf(-200), mp.mpf(200)
    for _ in range(200):
        m = (a + b) / 2
        if z(m) > 0:
            a = m
        else:
            b = m
    return float((a + b) / 2)


def logpower_flat(a: float) -> tuple[float, float]:
    """``(delta, eta)`` for ``r_e = a/((e+2) log(e+2)^2)`` and ``psi = -1``.

    ``sum r_e^t`` converges exactly for ``t >= 1``, so ``delta = 1``; at
    ``t = 1`` the pressure ``log sum r_e - beta`` is nonpositive exactly for
    ``beta >= eta = log sum r_e``.
    """
    f = lambda k: 1 / (k * mp.log(k) ** 2)  # noqa: E731
    total = mp.nsum(f, [3, mp.inf], method="euler-maclaurin")
    return 1.0, float(mp.log(a * total))
