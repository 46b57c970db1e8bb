"""Multidimensional matrix-inverse pairs and the inverse-relation engine.

Two explicit pairs of mutually inverse lower-triangular r-dimensional
matrices are provided:

* the general pair built from arbitrary scalar sequences a_t and c_j(t)
  (``f_general``/``g_general``),
* its q-hypergeometric specialization in the parameters (a, b, x_1..x_r, q)
  (``f_mmic``/``g_mmic``), reached from the general pair by
  a_t -> w a q^t, c_i(t) -> w x_i q^t with b = w^{r+1} x_1...x_r.

``verify_orthogonality`` checks sum_{n>=k>=l} f(n,k) g(k,l) = delta_{nl}
(and the dual with f, g swapped) over a finite bound box;
``inverse_relation_check`` replays the derivation that turns one A_r
summation theorem into another through this pair.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Sequence, Tuple, Union

from .errors import PoleError, RangeError
from .lattice import MultiIndex, weight
from .numerics import DEFAULT_CONFIG, NumericConfig, Scalar, qpoch

__all__ = [
    "GeometricSequence",
    "TableSequence",
    "SequenceSpec",
    "MatrixPair",
    "f_general",
    "g_general",
    "f_mmic",
    "g_mmic",
    "general_pair",
    "mmic_pair",
    "RelationReport",
    "verify_orthogonality",
    "inverse_relation_check",
]


@dataclass(frozen=True)
class GeometricSequence:
    """t -> base * ratio^t, evaluable at every integer t."""
    base: Scalar
    ratio: Scalar

    def at(self, t: int) -> Scalar:
        return self.base * self.ratio ** t


@dataclass(frozen=True)
class TableSequence:
    """Explicit values over the window [start, start + len(values))."""
    start: int
    values: Tuple[Scalar, ...]

    def at(self, t: int) -> Scalar:
        idx = t - self.start
        if not 0 <= idx < len(self.values):
            raise RangeError(
                f"sequence index {t} outside table window "
                f"[{self.start}, {self.start + len(self.values) - 1}]")
        return self.values[idx]


ScalarSequence = Union[GeometricSequence, TableSequence]


@dataclass(frozen=True)
class SequenceSpec:
    """The sequences (a_t) and (c_j(t)), j = 1..r, feeding the general pair."""
    a_seq: ScalarSequence
    c_seqs: Tuple[ScalarSequence, ...]

    @property
    def r(self) -> int:
        return len(self.c_seqs)


def _c_at_point(spec: SequenceSpec, k: Sequence[int]) -> list[Scalar]:
    return [spec.c_seqs[j].at(k[j]) for j in range(spec.r)]


def _c_product(cs: Sequence[Scalar]) -> Scalar:
    p = cs[0]
    for v in cs[1:]:
        p = p * v
    return p


def _checked_div(num: Scalar, den: Scalar, what: str) -> Scalar:
    if not den.value:
        raise PoleError(f"vanishing factor in {what}")
    return num / den


def f_general(n: MultiIndex, k: MultiIndex, spec: SequenceSpec) -> Scalar:
    """Entry f_{nk} of the general pair (defined for k <= n; f(n, n) = 1)."""
    r = spec.r
    K, N = weight(k), weight(n)
    ck = _c_at_point(spec, k)
    cprod = _c_product(ck)
    num = ck[0] / ck[0]  # backend one
    for t in range(K, N):
        at = spec.a_seq.at(t)
        num = num * (1 - at * cprod)
        for j in range(r):
            num = num * (at - ck[j])
    den = num / num
    for i in range(r):
        for t in range(k[i] + 1, n[i] + 1):
            ct = spec.c_seqs[i].at(t)
            den = den * (1 - ct * cprod)
            for j in range(r):
                den = den * (ct - ck[j])
    return _checked_div(num, den, f"f(n={n}, k={k})")


def g_general(k: MultiIndex, l: MultiIndex, spec: SequenceSpec) -> Scalar:
    """Entry g_{kl} of the general pair (defined for l <= k; g(k, k) = 1)."""
    r = spec.r
    K, L = weight(k), weight(l)
    ck = _c_at_point(spec, k)
    cl = _c_at_point(spec, l)
    cprod_k = _c_product(ck)
    cprod_l = _c_product(cl)
    aK = spec.a_seq.at(K)
    aL = spec.a_seq.at(L)
    v = ck[0] / ck[0]
    for i in range(r):
        for j in range(i + 1, r):
            v = v * _checked_div(cl[i] - cl[j], ck[i] - ck[j], f"g(k={k}, l={l})")
    v = v * _checked_div(1 - aL * cprod_l, 1 - aK * cprod_k, f"g(k={k}, l={l})")
    for j in range(r):
        v = v * _checked_div(aL - cl[j], aK - ck[j], f"g(k={k}, l={l})")
    num = v / v
    for t in range(L + 1, K + 1):
        at = spec.a_seq.at(t)
        num = num * (1 - at * cprod_k)
        for j in range(r):
            num = num * (at - ck[j])
    den = num / num
    for i in range(r):
        for t in range(l[i], k[i]):
            ct = spec.c_seqs[i].at(t)
            den = den * (1 - ct * cprod_k)
            for j in range(r):
                den = den * (ct - ck[j])
    return v * _checked_div(num, den, f"g(k={k}, l={l})")


def f_mmic(n: MultiIndex, k: MultiIndex, a: Scalar, b: Scalar,
           x: Sequence[Scalar], q: Scalar,
           cfg: NumericConfig = DEFAULT_CONFIG) -> Scalar:
    """Entry f_{nk} of the q-hypergeometric pair.

    f_{nk} = (a b q^{2|k|})_{|n|-|k|} prod_i (a q^{|k|-k_i}/x_i)_{|n|-|k|}
             / [ prod_i (b x_i q^{1+k_i+|k|})_{n_i-k_i}
                 prod_{i,j} (q^{1+k_i-k_j} x_i/x_j)_{n_i-k_i} ].
    """
    r = len(x)
    K, N = weight(k), weight(n)
    num = qpoch(a * b * q ** (2 * K), q, N - K, cfg)
    for i in range(r):
        num = num * qpoch(a * q ** (K - k[i]) / x[i], q, N - K, cfg)
    den = num / num
    for i in range(r):
        den = den * qpoch(b * x[i] * q ** (1 + k[i] + K), q, n[i] - k[i], cfg)
        for j in range(r):
            den = den * qpoch(q ** (1 + k[i] - k[j]) * x[i] / x[j], q, n[i] - k[i], cfg)
    return _checked_div(num, den, f"f(n={n}, k={k})")


def g_mmic(k: MultiIndex, l: MultiIndex, a: Scalar, b: Scalar,
           x: Sequence[Scalar], q: Scalar,
           cfg: NumericConfig = DEFAULT_CONFIG) -> Scalar:
    """Entry g_{kl} of the q-hypergeometric pair.

    Carries the sign (-1)^{|k|-|l|} and the power q^{binom(|k|-|l|, 2)}
    in front of the Pochhammer quotient.
    """
    r = len(x)
    K, L = weight(k), weight(l)
    sign = -1 if (K - L) % 2 else 1
    v = q ** comb(K - L, 2) * sign
    v = v * _checked_div(1 - a * b * q ** (2 * L), 1 - a * b * q ** (2 * K),
                         f"g(k={k}, l={l})")
    for i in range(r):
        v = v * _checked_div(1 - a * q ** (L - l[i]) / x[i],
                             1 - a * q ** (K - k[i]) / x[i], f"g(k={k}, l={l})")
    num = qpoch(a * b * q ** (1 + L + K), q, K - L, cfg)
    for i in range(r):
        num = num * qpoch(a * q ** (1 + L - k[i]) / x[i], q, K - L, cfg)
    den = num / num
    for i in range(r):
        den = den * qpoch(b * x[i] * q ** (l[i] + K), q, k[i] - l[i], cfg)
        for j in range(r):
            den = den * qpoch(q ** (1 + l[i] - l[j]) * x[i] / x[j], q, k[i] - l[i], cfg)
    return v * _checked_div(num, den, f"g(k={k}, l={l})")


@dataclass(frozen=True)
class MatrixPair:
    """A pair of entry functions claimed to be mutually inverse."""
    f: Callable[[MultiIndex, MultiIndex], Scalar]
    g: Callable[[MultiIndex, MultiIndex], Scalar]
    provenance: str


def general_pair(spec: SequenceSpec) -> MatrixPair:
    return MatrixPair(
        f=lambda n, k: f_general(n, k, spec),
        g=lambda k, l: g_general(k, l, spec),
        provenance="general",
    )


def mmic_pair(a: Scalar, b: Scalar, x: Sequence[Scalar], q: Scalar,
              cfg: NumericConfig = DEFAULT_CONFIG) -> MatrixPair:
    xs = tuple(x)
    return MatrixPair(
        f=lambda n, k: f_mmic(n, k, a, b, xs, q, cfg),
        g=lambda k, l: g_mmic(k, l, a, b, xs, q, cfg),
        provenance="mmic",
    )


@dataclass
class RelationReport:
    """Outcome of an orthogonality or inverse-relation sweep."""
    description: str
    checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def first_failure(self):
        return self.failures[0] if self.failures else None

    def __str__(self) -> str:
        state = "pass" if self.passed else f"FAIL ({len(self.failures)} failures)"
        return f"{self.description}: {self.checked} checks, {state}"


def _points_le(lo: MultiIndex, hi: MultiIndex):
    return itertools.product(*[range(a, b + 1) for a, b in zip(lo, hi)])


def _is_zero(value: Scalar, exact: bool, tol: float) -> bool:
    if exact:
        return value.value == 0
    return abs(value.value) <= tol


def verify_orthogonality(pair: MatrixPair, bound: MultiIndex,
                         cfg: NumericConfig = DEFAULT_CONFIG) -> RelationReport:
    """Check sum_{n>=k>=l} f_{nk} g_{kl} = delta_{nl} for all l <= n <= bound,
    together with the dual relation (f and g interchanged).

    Failures carry the full (n, l) pair and the residual value.
    """
    r = len(bound)
    report = RelationReport(f"orthogonality[{pair.provenance}] bound={bound}")
    f_cache: dict = {}
    g_cache: dict = {}

    def fv(n, k):
        key = (n, k)
        if key not in f_cache:
            f_cache[key] = pair.f(n, k)
        return f_cache[key]

    def gv(n, k):
        key = (n, k)
        if key not in g_cache:
            g_cache[key] = pair.g(n, k)
        return g_cache[key]

    exact = None
    tol = 100.0 * cfg.epsilon_tail
    zero = (0,) * r
    for n in _points_le(zero, bound):
        for l in _points_le(zero, n):
            s_fg = None
            s_gf = None
            for k in _points_le(l, n):
                term_fg = fv(n, k) * gv(k, l)
                term_gf = gv(n, k) * fv(k, l)
                s_fg = term_fg if s_fg is None else s_fg + term_fg
                s_gf = term_gf if s_gf is None else s_gf + term_gf
            if exact is None:
                exact = s_fg.is_exact
            delta = 1 if n == l else 0
            res_fg = s_fg - delta
            res_gf = s_gf - delta
            report.checked += 2
            if not _is_zero(res_fg, exact, tol):
                report.failures.append(("f.g", n, l, res_fg))
            if not _is_zero(res_gf, exact, tol):
                report.failures.append(("g.f", n, l, res_gf))
    return report


def _section4_a(k: MultiIndex, a: Scalar, b: Scalar, c: Scalar, d: Scalar,
                x: Sequence[Scalar], q: Scalar, cfg: NumericConfig) -> Scalar:
    """The sequence a_k whose f-transform is the A_r Jackson sum in disguise."""
    r = len(x)
    K = weight(k)
    v = qpoch(a * b, q, 2 * K, cfg) * qpoch(c, q, K, cfg)
    v = v / (qpoch(a * c * d, q, K, cfg) * qpoch(b * q / d, q, K, cfg))
    for i in range(r):
        v = v * qpoch(b * x[i], q, K, cfg) * qpoch(a / x[i], q, K - k[i], cfg)
        v = v * qpoch(d * x[i], q, k[i], cfg) * qpoch(b * x[i] * q / (a * c * d), q, k[i], cfg)
        v = v / (qpoch(b * x[i], q, k[i] + K, cfg) * qpoch(b * x[i] * q / c, q, k[i], cfg))
    v = v * q ** (comb(K, 2) - sum(comb(ki, 2) for ki in k)) * a ** K
    for i in range(r):
        v = v * x[i] ** (-k[i])
    for i in range(r):
        for j in range(r):
            v = v / qpoch(q * x[i] / x[j], q, k[i], cfg)
    return v


def _section4_b(n: MultiIndex, a: Scalar, b: Scalar, c: Scalar, d: Scalar,
                x: Sequence[Scalar], q: Scalar, cfg: NumericConfig) -> Scalar:
    """The closed form b_n matching _section4_a under the f/g pair."""
    r = len(x)
    N = weight(n)
    v = qpoch(a * b, q, N, cfg) * qpoch(a * d, q, N, cfg) * qpoch(b * q / (c * d), q, N, cfg)
    v = v / (qpoch(a * c * d, q, N, cfg) * qpoch(b * q / d, q, N, cfg))
    for i in range(r):
        v = v * qpoch(a * c / x[i], q, N, cfg) * qpoch(a / x[i], q, N - n[i], cfg)
        v = v / (qpoch(b * x[i] * q / c, q, n[i], cfg) * qpoch(a * c / x[i], q, N - n[i], cfg))
    for i in range(r):
        for j in range(r):
            v = v / qpoch(q * x[i] / x[j], q, n[i], cfg)
    return v


def inverse_relation_check(bound: MultiIndex, a: Scalar, b: Scalar, c: Scalar,
                           d: Scalar, x: Sequence[Scalar], q: Scalar,
                           cfg: NumericConfig = DEFAULT_CONFIG) -> RelationReport:
    """Replay the inverse-relation derivation over a bound box.

    First confirms sum_{0<=k<=n} f_{nk} a_k = b_n (the A_r Jackson sum,
    rearranged), then the dual sum_{0<=l<=k} g_{kl} b_l = a_k, which is the
    relation that produces the new multivariable 8phi7 summation.
    """
    r = len(bound)
    report = RelationReport(f"inverse-relations bound={bound}")
    zero = (0,) * r
    a_cache = {k: _section4_a(k, a, b, c, d, x, q, cfg) for k in _points_le(zero, bound)}
    b_cache = {n: _section4_b(n, a, b, c, d, x, q, cfg) for n in _points_le(zero, bound)}
    exact = a_cache[zero].is_exact
    tol = 100.0 * cfg.epsilon_tail
    for n in _points_le(zero, bound):
        s = None
        for k in _points_le(zero, n):
            term = f_mmic(n, k, a, b, x, q, cfg) * a_cache[k]
            s = term if s is None else s + term
        res = s - b_cache[n]
        report.checked += 1
        if not _is_zero(res, exact, tol):
            report.failures.append(("f-transform", n, res))
    for k in _points_le(zero, bound):
        s = None
        for l in _points_le(zero, k):
            term = g_mmic(k, l, a, b, x, q, cfg) * b_cache[l]
            s = term if s is None else s + term
        res = s - a_cache[k]
        report.checked += 1
        if not _is_zero(res, exact, tol):
            report.failures.append(("g-transform", k, res))
    return report
