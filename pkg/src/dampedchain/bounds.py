"""Explicit convergence-rate and deviation bounds for damped chains.

Five bound families are implemented, numbered as the CLI exposes them:

* family 1, ``stationary_gap_bound`` with whole-matrix constants:
  per-state bound on |pi(eps) - pi(0)| of the form
  ``eps * (|d_j - pi0_j| + c * rate / (1 - rate))``.
* family 2, the same formula with per-class constants and the d-limit as
  reference, for chains that split into several closed classes.
* family 5, ``coupling_bound``: ``(1 - Q(p, pi_eps)) * (1 - Q(P0))^n * (1 - eps)^n``
  on |p(n)_j - pi(eps)_j|, from the one-step maximal coupling.
* family 6, ``coupling_bound_multistep``: the block-of-N variant driven by the
  ergodicity coefficient ``Delta_N = (1 - Q(P0^N))^(1/N)``, with floor(n/N)*N
  in both exponents.
* family 7, ``coupling_bound_split``: the per-class version for singular
  chains, including the class-mass mismatch term.

The convention ``x^0 = 1`` applies throughout, including when x = 0.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import (
    DampedChain,
    DampingVector,
    Distribution,
    StochasticMatrix,
    build_damped_matrix,
    matrix_power,
)
from .coupling import overlap
from .errors import ContractionError, RegimeError, ValidationError
from .expansion import spectrum
from .stationary import stationary_direct
from .structure import ChainStructure, ClosedClass, Regime, class_mass, restrict

DEFAULT_DECAY_HORIZON = 200

# Deviations below this are indistinguishable from float rounding; the
# amplitude scan stops there instead of dividing noise by a tiny rate**n.
DECAY_NOISE_FLOOR = 1e-13


def _pow(base: float, exponent: int) -> float:
    return 1.0 if exponent == 0 else base**exponent


def min_row_overlap(entries: np.ndarray) -> float:
    """Smallest pairwise row overlap ``min_{i,j} sum_k min(A[i,k], A[j,k])``."""
    m = entries.shape[0]
    q = 1.0
    for i in range(m):
        mins = np.minimum(entries[i], entries[i + 1 :])
        if mins.size:
            q = min(q, float(mins.sum(axis=1).min()))
    return q


@dataclass(frozen=True)
class ErgodicityReport:
    """Ergodicity coefficient of the N-step matrix.

    ``delta = (1 - Q(P^N))^(1/N)`` where Q is the minimal pairwise row
    overlap. ``degenerate`` flags Q = 1 (identical rows), where delta is 0
    and powers of delta follow the 0^0 = 1 convention.
    """

    step: int
    overlap: float
    delta: float

    @property
    def degenerate(self) -> bool:
        return self.overlap >= 1.0

    def delta_pow(self, exponent: int) -> float:
        return _pow(self.delta, exponent)


def ergodicity_coefficient(P0: StochasticMatrix, N: int) -> ErgodicityReport:
    """Compute ``Delta_N`` from the N-step matrix by brute pairwise comparison.

    Equivalently the N-th root of the largest total-variation distance
    between rows of P0**N. Converges to the modulus of the second eigenvalue
    as N grows.
    """
    if N < 1:
        raise ValidationError("step count N must be at least 1")
    q = min_row_overlap(matrix_power(P0, N).entries)
    one_minus = max(0.0, 1.0 - q)
    # Identical rows leave 1 - q at summation-noise level; without snapping,
    # the N-th root would inflate that noise to a visibly nonzero delta.
    if one_minus <= 1e-12:
        return ErgodicityReport(N, 1.0, 0.0)
    return ErgodicityReport(N, q, one_minus ** (1.0 / N))


def class_ergodicity_coefficients(
    P0: StochasticMatrix, structure: ChainStructure, N: int
) -> tuple:
    """Per-closed-class ergodicity coefficients, computed on the restrictions."""
    return tuple(ergodicity_coefficient(restrict(P0, cls), N) for cls in structure.classes)


@dataclass(frozen=True)
class GeometricDecay:
    """Constants (amplitude, rate) with ``max_ij |P^n[i,j] - pi_j| <= amplitude * rate**n``."""

    amplitude: float
    rate: float

    def __post_init__(self):
        if not 0.0 <= self.rate < 1.0:
            raise ValidationError(f"decay rate must lie in [0, 1), got {self.rate}")
        if self.amplitude < 0.0:
            raise ValidationError("decay amplitude must be non-negative")

    @property
    def tail_factor(self) -> float:
        """The geometric tail sum factor ``amplitude * rate / (1 - rate)``."""
        return self.amplitude * self.rate / (1.0 - self.rate)


def estimate_decay(
    P0: StochasticMatrix,
    pi0: Distribution = None,
    horizon: int = DEFAULT_DECAY_HORIZON,
) -> GeometricDecay:
    """Empirical decay constants for a single-class aperiodic matrix.

    The rate is the second-largest eigenvalue modulus; the amplitude is the
    largest observed ratio ``max_ij |P^n[i,j] - pi_j| / rate**n`` over
    n <= horizon. The scan stops once deviations sink below the float noise
    floor, where the ratio would measure rounding error rather than decay.
    """
    rate = spectrum(P0).second_modulus
    if rate >= 1.0:
        raise ContractionError(
            f"second eigenvalue modulus {rate} is not below 1; no geometric decay"
        )
    if pi0 is None:
        pi0 = stationary_direct(P0).pi
    amplitude = 0.0
    power = P0.entries
    scale = 1.0
    for _ in range(1, horizon + 1):
        dev = float(np.max(np.abs(power - pi0.probs[np.newaxis, :])))
        if dev <= DECAY_NOISE_FLOOR:
            break
        scale *= rate
        if scale <= 0.0:
            break
        amplitude = max(amplitude, dev / scale)
        power = power @ P0.entries
    return GeometricDecay(amplitude, rate)


def estimate_decay_split(
    P0: StochasticMatrix, structure: ChainStructure, horizon: int = DEFAULT_DECAY_HORIZON
) -> GeometricDecay:
    """Worst-case decay constants over the closed classes (singular chains)."""
    if not structure.classes:
        raise RegimeError("no closed classes to estimate decay on")
    per_class = [
        estimate_decay(restrict(P0, cls), horizon=horizon) for cls in structure.classes
    ]
    return GeometricDecay(
        max(d.amplitude for d in per_class), max(d.rate for d in per_class)
    )


def stationary_gap_bound(
    decay: GeometricDecay,
    d: DampingVector,
    reference: Distribution,
    epsilon: float,
) -> np.ndarray:
    """Per-state bound ``eps * (|d_j - ref_j| + amplitude * rate / (1 - rate))``.

    With whole-matrix constants and the stationary distribution as reference
    this bounds |pi(eps) - pi(0)| (family 1); with per-class worst-case
    constants and the d-limit as reference it is the singular variant
    (family 2).
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValidationError(f"epsilon must lie in [0, 1], got {epsilon}")
    return epsilon * (np.abs(d.weights - reference.probs) + decay.tail_factor)


def coupling_bound(
    P0: StochasticMatrix,
    p: Distribution,
    pi_eps: Distribution,
    epsilon: float,
    n: int,
) -> float:
    """One-step coupling bound on ``max_j |p(n)_j - pi(eps)_j|`` (family 5)."""
    if not 0.0 < epsilon <= 1.0:
        raise ValidationError("coupling bounds require epsilon in (0, 1]")
    q_start = overlap(p.probs, pi_eps.probs)
    q0 = min_row_overlap(P0.entries)
    return (1.0 - q_start) * _pow((1.0 - q0) * (1.0 - epsilon), n)


def coupling_bound_multistep(
    P0: StochasticMatrix,
    p: Distribution,
    pi_eps: Distribution,
    epsilon: float,
    block: int,
    n: int,
) -> float:
    """Block-of-N coupling bound (family 6); reduces to family 5 at block = 1.

    Both geometric factors carry the exponent ``floor(n / block) * block``.
    """
    if block < 1:
        raise ValidationError("block length must be at least 1")
    report = ergodicity_coefficient(P0, block)
    q_start = overlap(p.probs, pi_eps.probs)
    exponent = (n // block) * block
    return (1.0 - q_start) * report.delta_pow(exponent) * _pow(1.0 - epsilon, exponent)


def _class_dist(values: np.ndarray, cls: ClosedClass, mass: float) -> np.ndarray:
    return values[list(cls.states)] / mass


@dataclass(frozen=True)
class SplitBoundContext:
    """Precomputed constants of the per-class coupling bound (family 7).

    Build once per (matrix, damping, start, epsilon, block) via
    :func:`split_bound_context`, then evaluate cheaply across a grid of step
    counts and states.
    """

    structure: ChainStructure
    epsilon: float
    block: int
    coupled: np.ndarray
    drift_scale: np.ndarray
    pi0_by_class: tuple
    deltas: tuple

    def bound(self, n: int, class_index: int, state: int) -> float:
        cls = self.structure.classes[class_index]
        local = cls.states.index(state)
        exponent = (n // self.block) * self.block
        geometric = self.coupled[class_index] * _pow(self.deltas[class_index], exponent)
        drift = self.drift_scale[class_index] * self.pi0_by_class[class_index][local]
        return (geometric + drift) * _pow(1.0 - self.epsilon, n)

    def bound_vector(self, n: int) -> np.ndarray:
        """Per-state bounds at step n, in natural state order."""
        m = sum(cls.size for cls in self.structure.classes)
        out = np.empty(m)
        for j, cls in enumerate(self.structure.classes):
            for state in cls.states:
                out[state] = self.bound(n, j, state)
        return out


def split_bound_context(
    P0: StochasticMatrix,
    d: DampingVector,
    p: Distribution,
    epsilon: float,
    block: int,
    structure: ChainStructure,
    pi_eps: Distribution = None,
) -> SplitBoundContext:
    """Assemble the constants of the family-7 bound.

    Requires the block-N ergodicity coefficient of every closed class to be
    strictly below 1. A class carrying no mass under ``p`` contributes no
    start-overlap term.
    """
    if structure.regime is not Regime.SINGULAR:
        raise RegimeError("the split bound applies to singular chains; use families 5/6")
    if not 0.0 < epsilon <= 1.0:
        raise ValidationError("coupling bounds require epsilon in (0, 1]")
    reports = class_ergodicity_coefficients(P0, structure, block)
    bad = [j for j, rep in enumerate(reports) if rep.delta >= 1.0]
    if bad:
        raise ContractionError(
            f"classes {bad} have Delta_{block} = 1; increase the block length"
        )
    if pi_eps is None:
        pi_eps = stationary_direct(build_damped_matrix(DampedChain(P0, d, epsilon))).pi

    f_d = class_mass(d.as_distribution(), structure)
    f_p = class_mass(p, structure)
    coupled = np.zeros(len(structure.classes))
    drift_scale = np.zeros(len(structure.classes))
    pi0_by_class = []
    for j, cls in enumerate(structure.classes):
        pi0_class = stationary_direct(restrict(P0, cls)).pi.probs
        pi0_by_class.append(pi0_class)
        pi_eps_class = _class_dist(pi_eps.probs, cls, f_d[j])
        coupled[j] = f_d[j] * (1.0 - overlap(pi_eps_class, pi0_class))
        if f_p[j] > 0.0:
            p_class = _class_dist(p.probs, cls, f_p[j])
            coupled[j] += f_p[j] * (1.0 - overlap(p_class, pi0_class))
        drift_scale[j] = abs(f_p[j] - f_d[j])
    return SplitBoundContext(
        structure,
        epsilon,
        block,
        coupled,
        drift_scale,
        tuple(pi0_by_class),
        tuple(rep.delta for rep in reports),
    )


def coupling_bound_split(
    P0: StochasticMatrix,
    d: DampingVector,
    p: Distribution,
    epsilon: float,
    block: int,
    n: int,
    structure: ChainStructure,
    class_index: int,
    state: int,
    pi_eps: Distribution = None,
) -> float:
    """Per-class coupling bound for singular chains (family 7).

    For ``state`` inside closed class j the bound on |p(n)_state - pi(eps)_state| is

        ( (f_d[j] (1 - Q(pi_eps^j, pi0^j)) + f_p[j] (1 - Q(p^j, pi0^j)))
            * Delta_j^(floor(n/N)*N)
          + |f_p[j] - f_d[j]| * pi0^j_state ) * (1 - eps)^n

    where superscript j denotes restriction to the class renormalized by the
    class mass, and f are class masses. For repeated evaluation over n or
    states build a :func:`split_bound_context` instead.
    """
    cls = structure.classes[class_index]
    if state not in cls.states:
        raise ValidationError(f"state {state} is not in class {class_index}")
    context = split_bound_context(P0, d, p, epsilon, block, structure, pi_eps)
    return context.bound(n, class_index, state)


@dataclass(frozen=True)
class BoundReport:
    """Bound family identifier, its constants, and evaluations on an n-grid."""

    family: str
    bound_id: str
    epsilon: float
    constants: dict = field(default_factory=dict)
    per_state: tuple = ()
    by_n: tuple = ()
