"""Scalar arithmetic backends and q-shifted-factorial primitives.

Two numeric backends are supported:

* **exact** -- arbitrary-size rationals (``fractions.Fraction``); every
  operation is exact, which makes identity checks equality checks;
* **float** -- arbitrary-precision binary floats (``mpmath``), with a
  per-value precision of at least 64 bits.  Arithmetic between two float
  scalars is carried out at the larger of their precisions.

Backends never mix silently: combining an exact and a float :class:`Scalar`
raises :class:`~qmultisum.errors.BackendMismatchError`.  Plain Python ints
are accepted as operands, since integers are exact in both backends.

The q-shifted factorial ``(a)_k`` is taken with the convention

    (a)_k = prod_{j=0}^{k-1} (1 - a q^j)            for k >= 0,
    (a)_k = 1 / prod_{j=1}^{-k} (1 - a q^{-j})      for k < 0,

so that the inversion law ``(a)_{-n} (a q^{-n})_n = 1`` holds whenever no
factor vanishes, and ``(a)_k = (a)_inf / (a q^k)_inf`` for |q| < 1.
"""

from __future__ import annotations

import threading
from contextlib import nullcontext
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from mpmath import mp, mpf

from .errors import BackendMismatchError, NoConvergenceError, PoleError

__all__ = [
    "MIN_FLOAT_PRECISION",
    "NumericConfig",
    "DEFAULT_CONFIG",
    "Scalar",
    "qpoch",
    "qpoch_multi",
    "qpoch_inf",
    "reset_truncation_meta",
    "last_product_terms",
]

MIN_FLOAT_PRECISION = 64


@dataclass(frozen=True)
class NumericConfig:
    """Truncation and pole-detection knobs shared by every evaluator.

    epsilon_tail  -- tolerance used to cut off infinite products and series
    max_terms     -- hard cap on any single truncation length (product length,
                     shell index of a unilateral sum, half-width of a bilateral
                     window)
    pole_floor    -- minimum admissible magnitude of a denominator factor in
                     the float backend; exact zero is the criterion in the
                     exact backend
    """

    epsilon_tail: float = 1e-30
    max_terms: int = 2048
    pole_floor: float = 1e-15

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon_tail < 1.0:
            raise ValueError("epsilon_tail must lie strictly between 0 and 1")
        if self.max_terms < 8:
            raise ValueError("max_terms must be at least 8")
        if self.pole_floor <= 0.0:
            raise ValueError("pole_floor must be positive")


DEFAULT_CONFIG = NumericConfig()


class Scalar:
    """A number in the exact-rational or arbitrary-precision-float backend.

    Construct through :meth:`exact` or :meth:`floating`; the raw payload
    (a ``Fraction`` or an ``mpmath.mpf``) is available as ``.value`` for
    hot loops that manage the backend themselves.
    """

    __slots__ = ("value", "prec")

    def __init__(self, value, prec: int | None = None):
        self.value = value
        self.prec = prec

    # -- constructors -------------------------------------------------

    @classmethod
    def exact(cls, value: Union[int, str, Fraction], den: int | None = None) -> "Scalar":
        """Exact rational scalar; ``Scalar.exact(3, 4)`` is 3/4."""
        if den is not None:
            return cls(Fraction(value, den), None)
        return cls(Fraction(value), None)

    @classmethod
    def floating(cls, value, precision_bits: int = 256) -> "Scalar":
        """Arbitrary-precision float scalar (>= 64 bits).

        ``Fraction`` input is converted by one correctly-rounded division,
        so dyadic rationals convert exactly.
        """
        if precision_bits < MIN_FLOAT_PRECISION:
            raise ValueError(f"float precision must be >= {MIN_FLOAT_PRECISION} bits")
        with mp.workprec(precision_bits):
            if isinstance(value, Fraction):
                v = mpf(value.numerator) / value.denominator
            else:
                v = mpf(value)
        return cls(v, precision_bits)

    # -- introspection ------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.prec is None

    def to_fraction(self) -> Fraction:
        if self.prec is not None:
            raise BackendMismatchError("float scalar has no exact fraction form")
        return self.value

    def to_float(self) -> float:
        return float(self.value)

    def render(self) -> str:
        """Deterministic string form for report files."""
        if self.prec is None:
            return str(self.value)
        digits = int(self.prec * 0.30103) + 2
        return mp.nstr(self.value, digits)

    def __repr__(self) -> str:
        if self.prec is None:
            return f"Scalar({self.value})"
        return f"Scalar({self.render()}, prec={self.prec})"

    # -- arithmetic ----------------------------------------------------

    def _operand(self, other):
        """Return (raw other, result precision); None if unsupported."""
        if isinstance(other, Scalar):
            if (self.prec is None) != (other.prec is None):
                raise BackendMismatchError(
                    "cannot mix exact and float scalars in one expression")
            if self.prec is None:
                return other.value, None
            return other.value, max(self.prec, other.prec)
        if isinstance(other, int):
            return other, self.prec
        return None, None

    def _binary(self, other, op):
        raw, prec = self._operand(other)
        if raw is None:
            return NotImplemented
        if self.prec is None:
            return Scalar(op(self.value, raw), None)
        with mp.workprec(prec):
            return Scalar(op(self.value, raw), prec)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        raw, _ = self._operand(other)
        if raw is None:
            return NotImplemented
        if not raw:
            raise PoleError("division by zero scalar")
        return self._binary(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        if not self.value:
            raise PoleError("division by zero scalar")
        return self._binary(other, lambda a, b: b / a)

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0 and not self.value:
            raise PoleError("zero scalar raised to a negative power")
        if self.prec is None:
            return Scalar(self.value ** exponent, None)
        with mp.workprec(self.prec):
            return Scalar(self.value ** exponent, self.prec)

    def __neg__(self):
        return Scalar(-self.value, self.prec)

    def __abs__(self):
        return Scalar(abs(self.value), self.prec)

    # -- comparisons ----------------------------------------------------

    def _cmp_raw(self, other):
        if isinstance(other, Scalar):
            if (self.prec is None) != (other.prec is None):
                return None
            return other.value
        if isinstance(other, (int, float, Fraction)):
            return other
        return None

    def __eq__(self, other):
        raw = self._cmp_raw(other)
        if raw is None:
            return False
        return self.value == raw

    def __ne__(self, other):
        return not self.__eq__(other)

    def __lt__(self, other):
        raw = self._cmp_raw(other)
        if raw is None:
            return NotImplemented
        return self.value < raw

    def __le__(self, other):
        raw = self._cmp_raw(other)
        if raw is None:
            return NotImplemented
        return self.value <= raw

    def __gt__(self, other):
        raw = self._cmp_raw(other)
        if raw is None:
            return NotImplemented
        return self.value > raw

    def __ge__(self, other):
        raw = self._cmp_raw(other)
        if raw is None:
            return NotImplemented
        return self.value >= raw

    def __bool__(self) -> bool:
        return bool(self.value)


# ---------------------------------------------------------------------------
# raw kernels: backend-specific helpers for hot loops working on raw payloads
# ---------------------------------------------------------------------------


class ExactKernel:
    exact = True
    prec = None

    def __init__(self):
        self.one = Fraction(1)

    @staticmethod
    def workprec():
        return nullcontext()

    @staticmethod
    def convert(fr):
        return Fraction(fr)

    @staticmethod
    def bad_denominator(v, floor) -> bool:
        return v == 0


class FloatKernel:
    exact = False

    def __init__(self, prec: int):
        self.prec = prec
        self.one = mpf(1)

    def workprec(self):
        return mp.workprec(self.prec)

    def convert(self, fr):
        with mp.workprec(self.prec):
            if isinstance(fr, Fraction):
                return mpf(fr.numerator) / fr.denominator
            return mpf(fr)

    @staticmethod
    def bad_denominator(v, floor) -> bool:
        return abs(v) < floor


def kernel_for(*scalars: Scalar):
    """Kernel matching the (uniform) backend of the given scalars."""
    precs = [s.prec for s in scalars]
    if all(p is None for p in precs):
        return ExactKernel()
    if any(p is None for p in precs):
        raise BackendMismatchError("scalars come from different backends")
    return FloatKernel(max(precs))


class PochTable:
    """Memoized ladder of q-shifted factorials (base)_k for one base.

    Stores the ascending prefix products (base)_m for m >= 0 and the
    descending products prod_{j=1}^{m} (1 - base q^{-j}) for m >= 1, and
    keeps track of the first factor on either side that vanishes (exact)
    or dips below the pole floor (float).  ``value``/``inverse`` raise
    :class:`PoleError` only when such a factor is actually divided by:

    * ``value(k)`` with k < 0 divides by the descending product,
    * ``inverse(k)`` with k >= 0 divides by the ascending product.

    A vanishing factor that stays in a multiplicative position simply
    produces an (exact or approximate) zero, which is how terminating
    numerators and vanishing bilateral terms are meant to behave.
    """

    __slots__ = ("base", "q", "floor", "exact",
                 "_pos", "_posq", "_pos_bad", "_neg", "_negq", "_neg_bad")

    def __init__(self, base, q, kernel, floor: float):
        self.base = base
        self.q = q
        self.floor = floor
        self.exact = kernel.exact
        one = kernel.one
        self._pos = [one]
        self._posq = one
        self._pos_bad: int | None = None
        self._neg = [one]
        self._negq = one
        self._neg_bad: int | None = None

    def _factor_bad(self, f) -> bool:
        if self.exact:
            return f == 0
        return abs(f) < self.floor

    def _grow_pos(self, m: int) -> None:
        while len(self._pos) <= m:
            j = len(self._pos) - 1
            f = 1 - self.base * self._posq
            if self._pos_bad is None and self._factor_bad(f):
                self._pos_bad = j
            self._pos.append(self._pos[-1] * f)
            self._posq = self._posq * self.q

    def _grow_neg(self, m: int) -> None:
        while len(self._neg) <= m:
            j = len(self._neg)
            self._negq = self._negq / self.q
            f = 1 - self.base * self._negq
            if self._neg_bad is None and self._factor_bad(f):
                self._neg_bad = j
            self._neg.append(self._neg[-1] * f)

    def value(self, k: int):
        """(base)_k; PoleError when the value is infinite (k < 0 only)."""
        if k >= 0:
            self._grow_pos(k)
            return self._pos[k]
        m = -k
        self._grow_neg(m)
        if self._neg_bad is not None and self._neg_bad <= m:
            raise PoleError(
                f"(a)_{k} is infinite: factor 1 - a q^-{self._neg_bad} vanishes "
                f"for a = {self.base}")
        return 1 / self._neg[m]

    def inverse(self, k: int):
        """1/(base)_k; PoleError when (base)_k vanishes (k >= 0 only)."""
        if k >= 0:
            self._grow_pos(k)
            if self._pos_bad is not None and self._pos_bad < k:
                raise PoleError(
                    f"1/(a)_{k} undefined: factor 1 - a q^{self._pos_bad} vanishes "
                    f"for a = {self.base}")
            return 1 / self._pos[k]
        m = -k
        self._grow_neg(m)
        return self._neg[m]


# ---------------------------------------------------------------------------
# per-thread truncation metadata sink
# ---------------------------------------------------------------------------

_meta = threading.local()


def reset_truncation_meta() -> None:
    """Clear the per-thread record of infinite-product truncation lengths."""
    _meta.product_terms = 0


def _note_product_terms(j: int) -> None:
    _meta.product_terms = max(getattr(_meta, "product_terms", 0), j)


def last_product_terms() -> int:
    """Largest truncation length J used by qpoch_inf since the last reset."""
    return getattr(_meta, "product_terms", 0)


# ---------------------------------------------------------------------------
# public q-shifted-factorial operations
# ---------------------------------------------------------------------------


def _poch_raw(base, q, k: int, kernel, floor: float):
    """(base)_k on raw payloads; factors are accumulated in index order."""
    if k >= 0:
        p = kernel.one
        qj = kernel.one
        for _ in range(k):
            p = p * (1 - base * qj)
            qj = qj * q
        return p
    p = kernel.one
    qj = kernel.one
    for j in range(1, -k + 1):
        qj = qj / q
        f = 1 - base * qj
        if kernel.bad_denominator(f, floor):
            raise PoleError(
                f"(a)_{k} is infinite: factor 1 - a q^-{j} vanishes for a = {base}")
        p = p * f
    return 1 / p


def qpoch(a: Scalar, q: Scalar, k: int, cfg: NumericConfig = DEFAULT_CONFIG) -> Scalar:
    """q-shifted factorial (a)_k for any integer k.

    For k < 0 the finite reciprocal product is used, so the exact backend
    covers bilateral sums; |q| < 1 is required there for consistency with
    the infinite-product definition.
    """
    kernel = kernel_for(a, q)
    if k < 0 and not abs(q.value) < 1:
        raise ValueError("(a)_k with k < 0 requires |q| < 1")
    with kernel.workprec():
        return Scalar(_poch_raw(a.value, q.value, k, kernel, cfg.pole_floor),
                      kernel.prec)


def qpoch_multi(values: Sequence[Scalar], q: Scalar, k: int,
                cfg: NumericConfig = DEFAULT_CONFIG) -> Scalar:
    """Product (a_1, ..., a_m)_k := (a_1)_k ... (a_m)_k; empty product is 1."""
    if not values:
        one = Fraction(1) if q.prec is None else Scalar.floating(1, q.prec).value
        return Scalar(one, q.prec)
    kernel = kernel_for(*values, q)
    with kernel.workprec():
        p = kernel.one
        for a in values:
            p = p * _poch_raw(a.value, q.value, k, kernel, cfg.pole_floor)
        return Scalar(p, kernel.prec)


def _poch_inf_terms(base_mag: float, q_mag: float, cfg: NumericConfig) -> int:
    """Smallest J with |base| |q|^J / (1-|q|) < epsilon_tail; NoConvergence past cap."""
    t = base_mag / (1.0 - q_mag)
    j = 0
    while t >= cfg.epsilon_tail:
        t *= q_mag
        j += 1
        if j > cfg.max_terms:
            raise NoConvergenceError(
                f"(a)_inf needs more than max_terms={cfg.max_terms} factors")
    return j


def _poch_inf_raw(base, q, kernel, cfg: NumericConfig):
    """Truncated (base)_inf on raw payloads, with the truncation length."""
    j_stop = _poch_inf_terms(abs(float(base)), abs(float(q)), cfg)
    p = kernel.one
    qj = kernel.one
    for _ in range(j_stop):
        p = p * (1 - base * qj)
        qj = qj * q
    return p, j_stop


def qpoch_inf(a: Scalar, q: Scalar, cfg: NumericConfig = DEFAULT_CONFIG) -> Scalar:
    """(a)_inf = prod_{j>=0} (1 - a q^j), truncated at the tail tolerance.

    Float backend only; the exact backend refuses to approximate.  The
    truncation length J is recorded in the per-thread metadata sink.
    """
    kernel = kernel_for(a, q)
    if kernel.exact:
        raise BackendMismatchError("(a)_inf is not exactly representable; "
                                   "use the float backend")
    if not abs(q.value) < 1:
        raise ValueError("(a)_inf requires |q| < 1")
    with kernel.workprec():
        p, j_stop = _poch_inf_raw(a.value, q.value, kernel, cfg)
    _note_product_terms(j_stop)
    return Scalar(p, kernel.prec)
