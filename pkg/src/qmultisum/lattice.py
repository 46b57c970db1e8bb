"""Multi-index machinery: iteration domains in Z^r, symmetric functions,
and the cross-term products characteristic of A_r series, together with
the two product lemmas used to telescope them.

A multi-index is a plain tuple of ints; ``weight`` is the coordinate sum
|k| and ``e2`` the second elementary symmetric function.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterator, Sequence, Tuple, Union

from .errors import InfiniteDomainError, PoleError
from .numerics import Scalar, kernel_for

__all__ = [
    "MultiIndex",
    "Box",
    "Simplex",
    "Unilateral",
    "Bilateral",
    "SummationDomain",
    "weight",
    "e2",
    "iterate",
    "domain_size",
    "ar_cross_ratio",
    "check_telescoping_lemma",
    "check_milne_lem312",
    "validate_x_ratios",
]

MultiIndex = Tuple[int, ...]


@dataclass(frozen=True)
class Box:
    """0 <= k_i <= n_i componentwise."""
    n: MultiIndex

    @property
    def r(self) -> int:
        return len(self.n)


@dataclass(frozen=True)
class Simplex:
    """k_i >= 0 with 0 <= |k| <= N."""
    N: int
    r: int


@dataclass(frozen=True)
class Unilateral:
    """k_i >= 0, unbounded; admissible only through a truncation controller."""
    r: int


@dataclass(frozen=True)
class Bilateral:
    """k in Z^r, unbounded; admissible only through a truncation controller."""
    r: int


SummationDomain = Union[Box, Simplex, Unilateral, Bilateral]


def weight(k: Sequence[int]) -> int:
    """|k| = k_1 + ... + k_r."""
    return sum(k)


def e2(k: Sequence[int]) -> int:
    """Second elementary symmetric function sum_{i<j} k_i k_j (0 for r=1)."""
    total = 0
    r = len(k)
    for i in range(r):
        for j in range(i + 1, r):
            total += k[i] * k[j]
    return total


def iterate(domain: SummationDomain) -> Iterator[MultiIndex]:
    """Yield every lattice point of a finite domain once, lexicographically."""
    if isinstance(domain, Box):
        def box_points(prefix: tuple, axis: int):
            if axis == len(domain.n):
                yield prefix
                return
            for v in range(domain.n[axis] + 1):
                yield from box_points(prefix + (v,), axis + 1)
        return box_points((), 0)
    if isinstance(domain, Simplex):
        def simplex_points(prefix: tuple, remaining: int, axis: int):
            if axis == domain.r - 1:
                for v in range(remaining + 1):
                    yield prefix + (v,)
                return
            for v in range(remaining + 1):
                yield from simplex_points(prefix + (v,), remaining - v, axis + 1)
        return simplex_points((), domain.N, 0)
    raise InfiniteDomainError(f"cannot enumerate {type(domain).__name__} directly")


def domain_size(domain: SummationDomain) -> int:
    if isinstance(domain, Box):
        size = 1
        for ni in domain.n:
            size *= ni + 1
        return size
    if isinstance(domain, Simplex):
        return comb(domain.N + domain.r, domain.r)
    raise InfiniteDomainError(f"{type(domain).__name__} has no finite size")


def ar_cross_ratio(k: Sequence[int], x: Sequence[Scalar], q: Scalar) -> Scalar:
    """prod_{i<j} (1 - q^{k_i-k_j} x_i/x_j) / (1 - x_i/x_j).

    The empty product (r = 1) and k = 0 both give 1.  Raises PoleError
    when some x_i/x_j equals 1.
    """
    kernel = kernel_for(*x, q)
    with kernel.workprec():
        p = Scalar(kernel.one, kernel.prec)
        r = len(k)
        for i in range(r):
            for j in range(i + 1, r):
                ratio = x[i] / x[j]
                den = 1 - ratio
                if not den.value:
                    raise PoleError(f"x_{i + 1}/x_{j + 1} = 1 in cross-term product")
                p = p * (1 - q ** (k[i] - k[j]) * ratio) / den
        return p


def _fraction_poch(base: Fraction, q: Fraction, k: int) -> Fraction:
    """Exact (base)_k used by the lemma checks; raises ZeroDivisionError on poles."""
    if k >= 0:
        p = Fraction(1)
        for j in range(k):
            p *= 1 - base * q ** j
        return p
    p = Fraction(1)
    for j in range(1, -k + 1):
        p *= 1 - base * q ** -j
    return 1 / p


def _exact_inputs(x: Sequence[Scalar], q: Scalar):
    q_fr = q.to_fraction()
    x_fr = [xi.to_fraction() for xi in x]
    return x_fr, q_fr


def check_telescoping_lemma(k: Sequence[int], l: Sequence[int],
                            x: Sequence[Scalar], q: Scalar) -> bool:
    """Check the telescoping identity for the A_r cross-term products:

    prod_{i<j} (1 - q^{k_i-k_j} x_i/x_j)/(1 - q^{l_i-l_j} x_i/x_j)
      * prod_{i,j} (q^{l_i-k_j} x_i/x_j)_{k_i-l_i} / (q^{1+l_i-l_j} x_i/x_j)_{k_i-l_i}
    ==  (-1)^{|k|-|l|} q^{-binom(|k|-|l|, 2) - sum_i i (k_i - l_i)}

    Requires l <= k componentwise; evaluated exactly.
    """
    r = len(k)
    if any(l[i] > k[i] for i in range(r)):
        raise ValueError("telescoping lemma requires l <= k componentwise")
    x_fr, q_fr = _exact_inputs(x, q)
    try:
        lhs = Fraction(1)
        for i in range(r):
            for j in range(i + 1, r):
                num = 1 - q_fr ** (k[i] - k[j]) * x_fr[i] / x_fr[j]
                den = 1 - q_fr ** (l[i] - l[j]) * x_fr[i] / x_fr[j]
                lhs *= num / den
        for i in range(r):
            for j in range(r):
                lhs *= _fraction_poch(q_fr ** (l[i] - k[j]) * x_fr[i] / x_fr[j],
                                      q_fr, k[i] - l[i])
                lhs /= _fraction_poch(q_fr ** (1 + l[i] - l[j]) * x_fr[i] / x_fr[j],
                                      q_fr, k[i] - l[i])
    except ZeroDivisionError as exc:
        raise PoleError(f"telescoping lemma hit a vanishing denominator: {exc}") from exc
    diff = weight(k) - weight(l)
    exponent = -comb(diff, 2) - sum((i + 1) * (k[i] - l[i]) for i in range(r))
    rhs = Fraction(-1) ** diff * q_fr ** exponent
    return lhs == rhs


def check_milne_lem312(m: Sequence[int], x: Sequence[Scalar], q: Scalar) -> bool:
    """Check the product identity

    prod_{i,j} (q x_i/x_j)_{m_j - m_i}
      ==  (-1)^{(r-1)|m|} q^{-binom(|m|+1, 2) + r sum_i binom(m_i+1, 2)}
          q^{-sum_i (i-1) m_i} prod_i x_i^{|m| - r m_i}
          prod_{i<j} (1 - q^{m_j-m_i} x_i/x_j)/(1 - x_i/x_j),

    evaluated exactly.
    """
    r = len(m)
    x_fr, q_fr = _exact_inputs(x, q)
    total = weight(m)
    try:
        lhs = Fraction(1)
        for i in range(r):
            for j in range(r):
                lhs *= _fraction_poch(q_fr * x_fr[i] / x_fr[j], q_fr, m[j] - m[i])
        rhs = Fraction(-1) ** ((r - 1) * total)
        rhs *= q_fr ** (-comb(total + 1, 2) + r * sum(comb(mi + 1, 2) for mi in m))
        rhs *= q_fr ** (-sum(i * m[i] for i in range(r)))
        for i in range(r):
            rhs *= x_fr[i] ** (total - r * m[i])
        for i in range(r):
            for j in range(i + 1, r):
                rhs *= (1 - q_fr ** (m[j] - m[i]) * x_fr[i] / x_fr[j]) / (1 - x_fr[i] / x_fr[j])
    except ZeroDivisionError as exc:
        raise PoleError(f"product lemma hit a vanishing denominator: {exc}") from exc
    return lhs == rhs


def validate_x_ratios(x: Sequence[Scalar], q: Scalar, max_shift: int,
                      pole_floor: float = 0.0) -> None:
    """Fail fast when some x_i/x_j is (close to) an integer power q^t, |t| <= max_shift.

    Such ratios put a pole inside the cross-term products or the
    (q x_i/x_j)-type denominators mid-sum; checking once per evaluation
    gives a diagnosable error up front.
    """
    r = len(x)
    for i in range(r):
        for j in range(r):
            if i == j:
                continue
            ratio = (x[i] / x[j]).value
            power = ratio / ratio  # exact one of the right backend
            qv = q.value
            for t in range(0, max_shift + 1):
                for candidate, tag in ((power, t), (1 / power, -t)):
                    delta = ratio - candidate
                    if (delta == 0) or (pole_floor and abs(delta) < pole_floor * abs(candidate)):
                        raise PoleError(
                            f"x_{i + 1}/x_{j + 1} coincides with q^{tag}")
                power = power * qv
                if not power:
                    break
