"""Circular convolution of lattice PRVs over Z_{2n+1} by FFT."""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy import fft

from prv_composer.discretization.discretize import DiscretePrv, lattice_index
from prv_composer.errors import DomainError, NumericalGuardError, ParameterError
from prv_composer.mechanisms.prv import FloatArray

logger = logging.getLogger(__name__)

DEFAULT_CLAMP_THRESHOLD = 1e-8
# Fraction of a mesh within which a query point counts as sitting on an atom.
LATTICE_SNAP = 1e-9


@dataclass(frozen=True)
class ErrorLedger:
    """Error terms accumulated while composing."""

    trunc_mass: float = 0.0
    clamped_mass: float = 0.0
    compositions: int = 0

    def merge(self, other: "ErrorLedger") -> "ErrorLedger":
        return ErrorLedger(
            trunc_mass=self.trunc_mass + other.trunc_mass,
            clamped_mass=self.clamped_mass + other.clamped_mass,
            compositions=self.compositions + other.compositions,
        )

    def scaled(self, count: int) -> "ErrorLedger":
        return ErrorLedger(
            trunc_mass=count * self.trunc_mass,
            clamped_mass=count * self.clamped_mass,
            compositions=count * self.compositions,
        )

    def hoeffding_eta(self, mesh: float, eps_error: float) -> float:
        """Probability that k rounding errors of size <= mesh/2 sum beyond eps_error."""
        if self.compositions == 0:
            return 0.0
        return 2.0 * math.exp(-2.0 * eps_error**2 / (self.compositions * mesh**2))


@dataclass(frozen=True, eq=False)
class ComposedPrv:
    """Distribution of the circular sum, supported on ``total_shift + mesh * {-n, ..., n}``.

    ``total_shift`` is the residual in (-mesh/2, mesh/2] after whole bins were carried
    into the index domain; ``carry`` records how many.
    """

    mesh: float
    half_width: float
    probs: FloatArray
    total_shift: float = 0.0
    carry: int = 0
    q_finite: float = 1.0
    ledger: ErrorLedger = field(default_factory=ErrorLedger)
    # Suffix sums of p_j and p_j e^{-y_j}, with a trailing zero.
    _tail_probs: np.ndarray = field(init=False, repr=False)
    _tail_weighted: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        n = lattice_index(self.mesh, self.half_width)
        if self.probs.shape != (2 * n + 1,):
            raise ParameterError(
                f"expected {2 * n + 1} probabilities, got shape {self.probs.shape}"
            )
        if not 0.0 < self.q_finite <= 1.0:
            raise DomainError(f"finite-mass factor must lie in (0, 1], got {self.q_finite}")

        probs = self.probs.astype(np.longdouble)
        values = self.values.astype(np.longdouble)
        zero = np.zeros(1, dtype=np.longdouble)
        tail_probs = np.concatenate((np.cumsum(probs[::-1])[::-1], zero))
        tail_weighted = np.concatenate((np.cumsum((probs * np.exp(-values))[::-1])[::-1], zero))
        object.__setattr__(self, "_tail_probs", tail_probs)
        object.__setattr__(self, "_tail_weighted", tail_weighted)

    @property
    def n(self) -> int:
        return (self.probs.size - 1) // 2

    @property
    def values(self) -> FloatArray:
        return np.arange(-self.n, self.n + 1, dtype=np.float64) * self.mesh + self.total_shift

    def lattice_delta(self, eps: FloatArray) -> FloatArray:
        """sum over y_j > eps of p_j (1 - e^{eps - y_j}), without the infinity mass."""
        eps = np.asarray(eps, dtype=np.float64)
        index = np.searchsorted(self.values, eps + LATTICE_SNAP * self.mesh, side="right")
        scale = np.exp(eps.astype(np.longdouble))
        delta = self._tail_probs[index] - scale * self._tail_weighted[index]
        return np.clip(delta.astype(np.float64), 0.0, 1.0)


Composable = DiscretePrv | ComposedPrv


@dataclass(frozen=True)
class _Operand:
    probs: FloatArray
    shift: float
    q_finite: float
    ledger: ErrorLedger


def _operand(item: Composable) -> _Operand:
    if isinstance(item, DiscretePrv):
        return _Operand(
            probs=item.probs,
            shift=item.shift,
            q_finite=1.0 - item.mass_inf,
            ledger=ErrorLedger(trunc_mass=item.trunc_mass, compositions=1),
        )
    return _Operand(
        probs=item.probs,
        shift=item.total_shift,
        q_finite=item.q_finite,
        ledger=item.ledger,
    )


def _spectrum(probs: FloatArray) -> np.ndarray:
    # Index 0 of the lattice sits at the centre of probs; move it to position 0.
    return fft.rfft(fft.ifftshift(probs))


def _inverse(spectrum: np.ndarray, length: int) -> FloatArray:
    return np.asarray(fft.fftshift(fft.irfft(spectrum, n=length)), dtype=np.float64)


def _support(probs: FloatArray) -> tuple[int, int]:
    n = (probs.size - 1) // 2
    nonzero = np.flatnonzero(probs)
    return int(nonzero[0]) - n, int(nonzero[-1]) - n


def _reachable(operands: Sequence[tuple[_Operand, int]], length: int) -> np.ndarray | None:
    """Mask of positions the circular sum can reach, or None if it covers the whole ring."""
    supports = [(_support(op.probs), count) for op, count in operands]
    lo = sum(count * first for (first, _), count in supports)
    hi = sum(count * last for (_, last), count in supports)
    if hi - lo + 1 >= length:
        return None
    mask = np.zeros(length, dtype=bool)
    mask[(np.arange(lo, hi + 1) + (length - 1) // 2) % length] = True
    return mask


def _finalize(
    raw: FloatArray,
    mesh: float,
    half_width: float,
    shift: float,
    q_finite: float,
    ledger: ErrorLedger,
    clamp_threshold: float,
) -> ComposedPrv:
    negative = float(-raw[raw < 0.0].sum())
    if negative > clamp_threshold:
        raise NumericalGuardError(
            f"FFT produced {negative:.3e} of negative mass (threshold {clamp_threshold:.1e})"
        )
    probs = np.clip(raw, 0.0, None)
    probs /= probs.sum()

    carry = math.ceil(shift / mesh - 0.5)
    if carry:
        probs = np.roll(probs, carry)
    residual = shift - carry * mesh

    return ComposedPrv(
        mesh=mesh,
        half_width=half_width,
        probs=probs,
        total_shift=residual,
        carry=carry,
        q_finite=q_finite,
        ledger=ledger.merge(ErrorLedger(clamped_mass=negative)),
    )


def compose(
    items: Sequence[tuple[Composable, int]],
    clamp_threshold: float = DEFAULT_CLAMP_THRESHOLD,
) -> ComposedPrv:
    """Compose ``count`` copies of every item with one inverse transform.

    All items must share the same mesh and half-width. Shifts add up outside the
    index convolution and are carried back into it whole bins at a time.
    """
    if not items:
        raise ParameterError("nothing to compose")
    mesh = items[0][0].mesh
    half_width = items[0][0].half_width
    for item, count in items:
        if item.mesh != mesh or item.half_width != half_width:
            raise ParameterError(
                f"lattice mismatch: ({item.mesh}, {item.half_width}) vs ({mesh}, {half_width})"
            )
        if count < 1:
            raise ParameterError(f"composition counts must be positive, got {count}")

    operands = [(_operand(item), count) for item, count in items]
    shift = math.fsum(count * op.shift for op, count in operands)
    q_finite = math.prod(op.q_finite**count for op, count in operands)
    ledger = ErrorLedger()
    for op, count in operands:
        ledger = ledger.merge(op.ledger.scaled(count))

    length = operands[0][0].probs.size
    if len(operands) == 1 and operands[0][1] == 1:
        raw = operands[0][0].probs.copy()
    else:
        spectrum = np.ones(length // 2 + 1, dtype=np.complex128)
        for op, count in operands:
            spectrum *= _spectrum(op.probs) ** count
        raw = _inverse(spectrum, length)
        reachable = _reachable(operands, length)
        if reachable is not None:
            # Roundoff outside the reachable arc.
            stray = float(np.abs(raw[~reachable]).sum())
            raw[~reachable] = 0.0
            ledger = ledger.merge(ErrorLedger(clamped_mass=stray))

    logger.debug(
        f"composed {ledger.compositions} mechanisms from {len(operands)} spectra, length {length}"
    )
    return _finalize(raw, mesh, half_width, shift, q_finite, ledger, clamp_threshold)


def circular_convolve(
    a: Composable,
    b: Composable,
    clamp_threshold: float = DEFAULT_CLAMP_THRESHOLD,
) -> ComposedPrv:
    """Distribution of a + b with values reduced mod 2L into (-L, L]."""
    return compose([(a, 1), (b, 1)], clamp_threshold=clamp_threshold)


def self_compose(
    a: Composable,
    count: int,
    clamp_threshold: float = DEFAULT_CLAMP_THRESHOLD,
) -> ComposedPrv:
    """``count``-fold circular sum of ``a`` through a single powered spectrum."""
    return compose([(a, count)], clamp_threshold=clamp_threshold)
