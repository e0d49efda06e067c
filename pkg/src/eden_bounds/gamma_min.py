"""Expected minimum of k i.i.d. Gamma(n, 1) variables.

The corner of each level-n table is bounded by the fastest of ``k`` disjoint
straight paths of ``n`` edges, i.e. the minimum of ``k`` Gamma(n, 1) times.

With ``Q(t) = sum_{m<n} t^m / m!`` the survival function is ``Q(t) e^{-t}``
and

    E[min] = int_0^inf Q(t)^k e^{-kt} dt = sum_j c_j j! / k^(j+1),

where ``c_j`` are the coefficients of ``Q^k``.  The sum is evaluated exactly
in integers and converted to the nearest float above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import gmpy2
import mpmath

# Above this count the exact expansion is replaced by quadrature.
EXACT_COUNT_LIMIT = 10**5
# Largest polynomial degree (n-1)*k the exact path will attempt.
MAX_EXACT_DEGREE = 10**6
QUAD_FALLBACK_TOL = 1e-13


class GammaMinTooLarge(ValueError):
    """The exact rational evaluation would exceed the configured size limit."""


@dataclass(frozen=True)
class GammaMinQuery:
    shape_n: int
    count_k: int

    def __post_init__(self):
        if self.shape_n < 1 or self.count_k < 1:
            raise ValueError(
                f"shape_n and count_k must be >= 1, got {self.shape_n}, {self.count_k}")


def _round_up_ratio(num: int, den: int) -> float:
    """Smallest double >= num/den (num, den > 0)."""
    shift = max(0, 64 - (num.bit_length() - den.bit_length()))
    q, r = divmod(num << shift, den)
    if r:
        q += 1
    f = float(q)
    if int(f) < q:
        f = math.nextafter(f, math.inf)
    return math.ldexp(f, -shift)


def gamma_min_exact(n: int, k: int) -> tuple[int, int]:
    """Return ``(numerator, denominator)`` of E[min of k Gamma(n,1)] exactly.

    Uses ``b_j = B_j j!`` where ``B = A^k`` and ``A_i = (n-1)!/i!``.  The
    power-series recurrence for ``B`` carries over to ``b`` with small
    integer multipliers only, so no step multiplies two large numbers.
    """
    if (n - 1) * k > MAX_EXACT_DEGREE:
        raise GammaMinTooLarge(
            f"exact expansion of degree {(n - 1) * k} exceeds {MAX_EXACT_DEGREE}")
    lcm = math.factorial(n - 1)
    coef = [lcm // math.factorial(i) for i in range(n)]
    degree = (n - 1) * k
    b = [gmpy2.mpz(0)] * (degree + 1)
    b[0] = gmpy2.mpz(lcm) ** k
    acc_horner = b[0]
    for j in range(1, degree + 1):
        acc = gmpy2.mpz(0)
        falling = 1
        for i in range(1, min(j, n - 1) + 1):
            acc += ((k + 1) * i - j) * coef[i] * falling * b[j - i]
            falling *= j - i
        b[j], rem = divmod(acc, lcm)
        assert rem == 0
        acc_horner = acc_horner * k + b[j]
    den = gmpy2.mpz(lcm) ** k * gmpy2.mpz(k) ** (degree + 1)
    return int(acc_horner), int(den)


def _integrand_scale(n: int, k: int) -> float:
    # near t=0 the log-survival is about -t^n/n!, so mass sits within this width
    return (math.factorial(n) / k) ** (1.0 / n)


def gamma_min_quadrature(n: int, k: int, dps: int = 30) -> tuple[float, float]:
    """Tanh-sinh quadrature of ``int_0^inf (Q(t) e^{-t})^k dt``.

    Returns ``(value, error_estimate)``.  Independent of the exact expansion.
    """
    with mpmath.workdps(dps):
        facts = [mpmath.factorial(m) for m in range(n)]

        def integrand(t):
            q = mpmath.fsum(t**m / facts[m] for m in range(n))
            return mpmath.exp(k * (mpmath.log(q) - t))

        h = _integrand_scale(n, k)
        points = [0] + [h * 2.0**e for e in range(-3, 7)] + [mpmath.inf]
        value, err = mpmath.quad(integrand, points, error=True)
        return float(value), float(err)


@lru_cache(maxsize=256)
def _gamma_min_cached(n: int, k: int) -> float:
    if k >= EXACT_COUNT_LIMIT:
        value, err = gamma_min_quadrature(n, k, dps=40)
        return math.nextafter(value + max(err, QUAD_FALLBACK_TOL), math.inf)
    num, den = gamma_min_exact(n, k)
    return _round_up_ratio(num, den)


def gamma_min_expectation(q: GammaMinQuery | None = None, *,
                          shape_n: int | None = None,
                          count_k: int | None = None) -> float:
    """Upper-rounded E[min of count_k i.i.d. Gamma(shape_n, 1)]."""
    if q is None:
        q = GammaMinQuery(shape_n, count_k)
    return _gamma_min_cached(q.shape_n, q.count_k)
