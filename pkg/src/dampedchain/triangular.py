"""Joint limits where the damping vanishes while time grows: eps -> 0, n -> infinity.

When n is coupled to eps so that ``eps * n -> t``, the n-step law of the
damped chain converges to an exponential mixture of the two one-sided limits:

    pi(t)_k = start_limit_k * exp(-t) + damped_limit_k * (1 - exp(-t)),

where ``start_limit`` is the eps-then-n limit (depends on the initial
distribution in the singular regime) and ``damped_limit`` is the n-then-eps
limit (the limit of the damped stationary laws). In the regular regime the
two coincide and the mixture is constant in t.

``triangular_bound`` gives a fully explicit finite-(eps, n) bound on the
distance between the n-step law and the mixture at t, and
``triangular_sweep`` produces trajectory-versus-mixture tables along a grid
of n for a fixed eps.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import DampedChain, DampingVector, Distribution, StochasticMatrix, build_damped_matrix
from .bounds import class_ergodicity_coefficients, ergodicity_coefficient, overlap
from .errors import ContractionError, RegimeError, ValidationError
from .stationary import limit_stationary, stationary_direct
from .structure import ChainStructure, Regime, class_mass, restrict, restrict_damping


@dataclass(frozen=True)
class TriangularLimit:
    """Mixture limit at a given t in [0, infinity].

    ``t = math.inf`` is the genuine limit case: the weight ``exp(-t)`` is then
    exactly 0 and the mixture equals the damped-side limit.
    """

    t: float
    values: np.ndarray
    start_limit: np.ndarray
    damped_limit: np.ndarray
    weight: float


def triangular_limit(
    P0: StochasticMatrix,
    d: DampingVector,
    p: Distribution,
    structure: ChainStructure,
    t: float,
) -> TriangularLimit:
    """Mixture of the two one-sided limits with weight ``exp(-t)``.

    ``t = 0`` returns the initial-distribution limit, ``t = math.inf`` the
    damping-side limit; a regular chain returns its unique stationary
    distribution for every t.
    """
    if t < 0.0 or math.isnan(t):
        raise ValidationError(f"t must lie in [0, infinity], got {t}")
    start_side = limit_stationary(P0, d, p, structure).probs
    damped_side = limit_stationary(P0, d, d.as_distribution(), structure).probs
    weight = math.exp(-t)
    values = start_side * weight + damped_side * (1.0 - weight)
    return TriangularLimit(t, values, start_side, damped_side, weight)


def triangular_bound(
    P0: StochasticMatrix,
    d: DampingVector,
    p: Distribution,
    structure: ChainStructure,
    epsilon: float,
    n: int,
    block: int,
    t: float,
) -> float:
    """Explicit bound on ``max_k |p_eps(n)_k - pi(t)_k|`` at finite (eps, n).

    Regular regime, two terms:

        (1 - Q(p, pi0)) * Delta^(floor(n/N)N)
          + (1 - Q(d, pi0)) * eps N / (1 - Delta^N).

    Singular regime adds, per state k in class j, the discretization term
    ``|f_p[j] - f_d[j]| * pi0^j_k * R`` with ``R = |(1 - eps)^n - exp(-t)|``,
    and the first two terms use class-local overlaps and coefficients. The
    returned value is the maximum of the per-state bounds. Requires the
    block-N ergodicity coefficient of every class to be below 1.
    """
    if not 0.0 < epsilon <= 1.0:
        raise ValidationError("the bound requires epsilon in (0, 1]")
    if structure.regime is Regime.UNSUPPORTED:
        raise RegimeError("triangular bounds require a regular or singular chain")

    exponent = (n // block) * block
    if structure.regime is Regime.REGULAR:
        rep = ergodicity_coefficient(P0, block)
        if rep.delta >= 1.0:
            raise ContractionError(f"Delta_{block} = 1; increase the block length")
        pi0 = stationary_direct(P0).pi.probs
        return (1.0 - overlap(p.probs, pi0)) * rep.delta_pow(exponent) + (
            1.0 - overlap(d.weights, pi0)
        ) * epsilon * block / (1.0 - rep.delta**block)

    reports = class_ergodicity_coefficients(P0, structure, block)
    bad = [j for j, rep in enumerate(reports) if rep.delta >= 1.0]
    if bad:
        raise ContractionError(f"classes {bad} have Delta_{block} = 1; increase the block length")
    f_p = class_mass(p, structure)
    f_d = class_mass(d.as_distribution(), structure)
    discretization = abs(_survival(epsilon, n) - math.exp(-t))

    worst = 0.0
    for j, cls in enumerate(structure.classes):
        idx = list(cls.states)
        pi0_class = stationary_direct(restrict(P0, cls)).pi.probs
        d_class = restrict_damping(d, cls).weights
        term1 = 0.0
        if f_p[j] > 0.0:
            p_class = p.probs[idx] / f_p[j]
            term1 = f_p[j] * (1.0 - overlap(p_class, pi0_class)) * reports[j].delta_pow(exponent)
        term2 = (
            f_d[j]
            * (1.0 - overlap(d_class, pi0_class))
            * epsilon
            * block
            / (1.0 - reports[j].delta**block)
        )
        drift = abs(f_p[j] - f_d[j]) * float(pi0_class.max()) * discretization
        worst = max(worst, term1 + term2 + drift)
    return worst


def _survival(epsilon: float, n: int) -> float:
    return (1.0 - epsilon) ** n


def steps_for(t: float, epsilon: float) -> int:
    """Step count whose product with epsilon lands nearest to t.

    The joint limit couples n to eps only through ``eps * n -> t``; this
    picks the canonical discretization ``n = round(t / eps)``. Sweeps report
    both n and eps*n so the rounding is always visible.
    """
    if not 0.0 < epsilon <= 1.0:
        raise ValidationError("epsilon must lie in (0, 1]")
    if t < 0.0 or math.isinf(t) or math.isnan(t):
        raise ValidationError(f"finite non-negative t required, got {t}")
    return round(t / epsilon)


@dataclass(frozen=True)
class SweepRow:
    """One sweep entry: n, eps*n, the n-step law, the mixture, relative errors.

    ``rel_error[k] = |mixture_k - damped_limit_k| / damped_limit_k`` measures
    how far the mixture still sits from its n-then-eps limit.
    """

    n: int
    eps_n: float
    trajectory: np.ndarray
    mixture: np.ndarray
    rel_error: np.ndarray
    bound: float


@dataclass(frozen=True)
class TriangularSweep:
    epsilon: float
    block: int
    rows: tuple

    @property
    def n_values(self) -> tuple:
        return tuple(row.n for row in self.rows)


def triangular_sweep(
    P0: StochasticMatrix,
    d: DampingVector,
    p: Distribution,
    structure: ChainStructure,
    epsilon: float,
    n_grid,
    block: int = 2,
) -> TriangularSweep:
    """Trajectory-versus-mixture comparison along a grid of step counts.

    For each n the sweep pairs the n-step law of the damped chain with the
    mixture at ``t = eps * n`` and evaluates the explicit bound. Trajectories
    are advanced incrementally, so a dense grid costs one vector-matrix
    product per step.
    """
    if not 0.0 < epsilon <= 1.0:
        raise ValidationError("sweep requires epsilon in (0, 1]")
    grid = sorted(set(int(n) for n in n_grid))
    if not grid or grid[0] < 0:
        raise ValidationError("n grid must be non-empty with non-negative entries")
    P_eps = build_damped_matrix(DampedChain(P0, d, epsilon))
    damped_side = limit_stationary(P0, d, d.as_distribution(), structure).probs

    rows = []
    v = p.probs
    step = 0
    for n in grid:
        for _ in range(n - step):
            v = v @ P_eps.entries
        step = n
        t = epsilon * n
        mix = triangular_limit(P0, d, p, structure, t)
        rel = np.abs(mix.values - damped_side) / damped_side
        bound = triangular_bound(P0, d, p, structure, epsilon, n, block, t)
        rows.append(SweepRow(n, t, v.copy(), mix.values, rel, bound))
    return TriangularSweep(epsilon, block, tuple(rows))
