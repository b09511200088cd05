"""Value types shared by every other module.

Two numeric modes are supported. ``float64`` stores masses as Python floats
and compares with the tolerances in :class:`Tolerances`. ``exact`` stores
masses as :class:`fractions.Fraction`, so sums and marginal checks are exact.
Entropies are always returned as floats.

State indices are 0-based everywhere. Prefix lengths (the ``j`` in
``sum(p[:j])``) are counts and run from 0 to ``len(p)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import AssertionFailure, IndexOutOfRange, InputError, NegativeMass, NotNormalized

Number = Union[float, Fraction]


class NumericMode(str, enum.Enum):
    FLOAT = "float64"
    EXACT = "exact"


@dataclass(frozen=True)
class Tolerances:
    """Numeric tolerances used in float64 mode.

    Attributes:
        mass: allowed deviation of sums and marginals from their targets.
        compare: slack granted to every bound inequality.
        snap: greedy residuals below this are treated as zero.
    """

    mass: float = 1e-9
    compare: float = 1e-9
    snap: float = 1e-12


DEFAULT_TOL = Tolerances()


def to_number(value, mode: NumericMode) -> Number:
    """Convert ``value`` to the scalar type of ``mode``.

    Strings of the form ``"a/b"`` or decimals are accepted. Floats converted
    to exact mode go through their shortest repr, so ``0.6`` becomes ``3/5``.
    """
    if mode is NumericMode.EXACT:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, (int, np.integer)):
            return Fraction(int(value))
        if isinstance(value, str):
            return Fraction(value.strip())
        return Fraction(repr(float(value)))
    if isinstance(value, str):
        return float(Fraction(value.strip()))
    return float(value)


def infer_mode(values: Iterable) -> NumericMode:
    for v in values:
        if isinstance(v, Fraction) or (isinstance(v, str) and "/" in v):
            return NumericMode.EXACT
    return NumericMode.FLOAT


@dataclass(frozen=True)
class Distribution:
    """A sorted probability vector.

    Construct through :func:`make_distribution` unless the input is already
    sorted and normalized; the constructor validates but never rearranges.
    """

    probs: tuple
    mode: NumericMode = NumericMode.FLOAT

    def __post_init__(self):
        probs = self.probs
        if not probs:
            raise InputError("a distribution needs at least one state")
        exact = self.mode is NumericMode.EXACT
        tol = 0 if exact else DEFAULT_TOL.mass
        for a, b in zip(probs, probs[1:]):
            if b > a:
                raise InputError(f"states are not sorted nonincreasing: {a} < {b}")
        if probs[-1] < 0:
            raise NegativeMass(f"negative mass {probs[-1]}")
        total = sum(probs) if exact else math.fsum(probs)
        if abs(total - 1) > tol:
            raise NotNormalized(f"masses sum to {float(total)!r}, not 1")

    def __len__(self) -> int:
        return len(self.probs)

    def __iter__(self):
        return iter(self.probs)

    def __getitem__(self, i):
        return self.probs[i]

    @cached_property
    def prefix(self) -> tuple:
        """Prefix sums with a leading zero; ``prefix[j] = sum(probs[:j])``."""
        zero = Fraction(0) if self.mode is NumericMode.EXACT else 0.0
        out = [zero]
        for x in self.probs:
            out.append(out[-1] + x)
        return tuple(out)

    @property
    def exact(self) -> bool:
        return self.mode is NumericMode.EXACT

    def padded(self, n: int) -> Distribution:
        if n <= len(self):
            return self
        zero = Fraction(0) if self.exact else 0.0
        return Distribution(self.probs + (zero,) * (n - len(self)), self.mode)

    def to_float(self) -> Distribution:
        if not self.exact:
            return self
        return Distribution(tuple(float(x) for x in self.probs), NumericMode.FLOAT)

    def as_array(self) -> np.ndarray:
        return np.array([float(x) for x in self.probs])


def make_distribution(
    values: Sequence,
    mode: NumericMode | str | None = None,
    renormalize: bool = False,
    tol: Tolerances = DEFAULT_TOL,
) -> Distribution:
    """Sort, validate and wrap raw masses.

    Raises:
        NegativeMass: some value is below ``-tol.mass``.
        NotNormalized: the values do not sum to 1 and ``renormalize`` is off.
    """
    values = list(values)
    if not values:
        raise InputError("a distribution needs at least one state")
    mode = infer_mode(values) if mode is None else NumericMode(mode)
    exact = mode is NumericMode.EXACT
    nums = [to_number(v, mode) for v in values]
    neg_tol = 0 if exact else tol.mass
    for x in nums:
        if x < -neg_tol or (not exact and math.isnan(x)):
            raise NegativeMass(f"negative or NaN mass {x}")
    zero = Fraction(0) if exact else 0.0
    nums = [x if x > 0 else zero for x in nums]
    total = sum(nums) if exact else math.fsum(nums)
    if renormalize:
        if total <= 0:
            raise NotNormalized("cannot renormalize a zero vector")
        nums = [x / total for x in nums]
    elif abs(total - 1) > (0 if exact else tol.mass):
        raise NotNormalized(f"masses sum to {float(total)!r}, not 1")
    nums.sort(reverse=True)
    return Distribution(tuple(nums), mode)


def prefix_sum(d: Distribution, i: int) -> Number:
    """Sum of the ``i`` largest states of ``d`` (``0 <= i <= len(d)``)."""
    if not 0 <= i <= len(d):
        raise IndexOutOfRange(f"prefix length {i} outside [0, {len(d)}]")
    return d.prefix[i]


@dataclass(frozen=True)
class Instance:
    """An ordered set of ``m`` marginals padded to a common support ``n``."""

    marginals: tuple[Distribution, ...]

    def __post_init__(self):
        if not self.marginals:
            raise InputError("an instance needs at least one marginal")
        n = len(self.marginals[0])
        mode = self.marginals[0].mode
        for p in self.marginals:
            if len(p) != n:
                raise InputError("marginals must share a support size; pad them first")
            if p.mode is not mode:
                raise InputError("marginals must share a numeric mode")

    @property
    def m(self) -> int:
        return len(self.marginals)

    @property
    def n(self) -> int:
        return len(self.marginals[0])

    @property
    def mode(self) -> NumericMode:
        return self.marginals[0].mode

    @property
    def exact(self) -> bool:
        return self.mode is NumericMode.EXACT

    def __iter__(self):
        return iter(self.marginals)

    def __len__(self) -> int:
        return self.m


def make_instance(
    rows: Sequence[Sequence],
    mode: NumericMode | str | None = None,
    renormalize: bool = False,
    tol: Tolerances = DEFAULT_TOL,
) -> Instance:
    rows = [list(r) for r in rows]
    if not rows:
        raise InputError("an instance needs at least one marginal")
    if mode is None:
        mode = infer_mode(v for r in rows for v in r)
    dists = [make_distribution(r, mode, renormalize, tol) for r in rows]
    n = max(len(d) for d in dists)
    return Instance(tuple(d.padded(n) for d in dists))


def rationalize(values: Sequence[float], denominator: int = 10**12) -> tuple[Fraction, ...]:
    """Round sorted float masses to multiples of ``1/denominator``.

    The rounding residue goes to the largest state so the result sums to
    exactly 1 and stays sorted (the residue is far below any state gap that
    matters at this granularity).
    """
    ks = [round(float(v) * denominator) for v in values]
    ks[0] += denominator - sum(ks)
    if ks[0] < 0:
        raise NotNormalized("masses cannot be rationalized to a unit sum")
    ks.sort(reverse=True)
    return tuple(Fraction(k, denominator) for k in ks)


def to_exact(instance: Instance, denominator: int = 10**12) -> Instance:
    if instance.exact:
        return instance
    return Instance(
        tuple(Distribution(rationalize(p.probs, denominator), NumericMode.EXACT) for p in instance)
    )


Cell = tuple[tuple[int, ...], Number]


@dataclass(frozen=True)
class Coupling:
    """A sparse joint distribution whose marginals should equal ``instance``.

    ``cells`` keeps construction order; ``cells[t] = (indices, mass)``.
    """

    cells: tuple[Cell, ...]
    instance: Instance

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def masses(self) -> tuple:
        return tuple(mass for _, mass in self.cells)

    def marginal(self, j: int) -> tuple:
        zero = Fraction(0) if self.instance.exact else 0.0
        out = [zero] * self.instance.n
        for idx, mass in self.cells:
            out[idx[j]] += mass
        return tuple(out)

    def conservation_error(self) -> Number:
        """Largest absolute deviation of any coupling marginal from its target."""
        worst = Fraction(0) if self.instance.exact else 0.0
        for j, p in enumerate(self.instance):
            for got, want in zip(self.marginal(j), p.probs):
                worst = max(worst, abs(got - want))
        return worst

    def validate(self, tol: Tolerances = DEFAULT_TOL) -> None:
        """Raise ``AssertionFailure`` unless masses are nonnegative and marginals conserved."""
        if any(mass < 0 for mass in self.masses):
            raise AssertionFailure("coupling has a negative cell")
        allowed = 0 if self.instance.exact else tol.mass
        err = self.conservation_error()
        if err > allowed:
            raise AssertionFailure(f"marginal conservation off by {float(err):.3e}")

    def as_dict(self) -> dict:
        return {idx: mass for idx, mass in self.cells}


def _masses_of(x) -> Iterable:
    if hasattr(x, "mass_array"):
        return x.mass_array
    if isinstance(x, Coupling):
        return x.masses
    if isinstance(x, Distribution):
        return x.probs
    if hasattr(x, "masses"):
        return x.masses
    return x


def entropy(x) -> float:
    """Shannon entropy in bits of a distribution, coupling or mass sequence.

    Zero (and, in float mode, negative round-off) masses contribute nothing.
    """
    xs = _masses_of(x)
    if isinstance(xs, np.ndarray):
        arr = xs.astype(float, copy=False)
    else:
        arr = np.fromiter((float(v) for v in xs), dtype=float)
    arr = arr[arr > 0]
    return float(-np.sum(arr * np.log2(arr)))
