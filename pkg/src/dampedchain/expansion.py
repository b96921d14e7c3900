"""Eigenvalue analysis and power-series expansion of the stationary law in epsilon.

For an aperiodic single-class base matrix the d-averaged trajectory admits the
decomposition

    (d P0^n)_j = pi0_j + sum_l rho_l^n c_{j,l}        (distinct rho_l, |rho_l| < 1)

and feeding it into the geometric-mixture series yields a power series

    pi(eps)_j = pi0_j + a_1[j] eps + a_2[j] eps^2 + ...

with coefficients

    a_1[j] = d_j - pi0_j + sum_l c_{j,l} rho_l / (1 - rho_l),
    a_n[j] = (-1)^(n-1) sum_l c_{j,l} rho_l^(n-1) / (1 - rho_l)^n   (n > 1).

The trajectory coefficients c are recovered from eigenvalues plus trajectory
samples by a Vandermonde solve, which avoids computing spectral projectors.
Eigenvalues and coefficients are complex in general; the final table is real,
and the imaginary residue is checked before being discarded.

In the singular regime the same construction runs per closed class with the
renormalized damping weights, and the class table is scaled by the class mass
of the damping vector.
"""

from dataclasses import dataclass

import numpy as np

from .core import DampingVector, Distribution, StochasticMatrix
from .errors import (
    IllConditionedError,
    RegimeError,
    SpectralStructureError,
    ValidationError,
)
from .stationary import stationary_direct
from .structure import ChainStructure, Regime, class_mass, restrict, restrict_damping

DEFAULT_CLUSTER_TOL = 1e-8
VANDERMONDE_COND_LIMIT = 1e12
IMAG_TOL = 1e-10
CONSTANT_MATCH_TOL = 1e-6


@dataclass(frozen=True)
class Spectrum:
    """All eigenvalues sorted by descending modulus, plus distinct representatives.

    ``distinct`` holds (representative, multiplicity) pairs after merging
    eigenvalues that agree within ``cluster_tol``; the representative is the
    cluster mean. The leading representative must be 1 within 1e-8 for any
    row-stochastic input.
    """

    eigenvalues: tuple
    distinct: tuple
    cluster_tol: float

    @property
    def second_modulus(self) -> float:
        """|rho_2|: modulus of the largest non-leading distinct eigenvalue."""
        if len(self.distinct) < 2:
            return 0.0
        return abs(self.distinct[1][0])


@dataclass(frozen=True)
class SpectralCoefficients:
    """Per-state decomposition of the d-averaged trajectory.

    ``constant`` is the limiting row (the stationary distribution);
    ``coeffs[l - 1, j]`` is the complex weight of ``rates[l - 1]**n`` in
    coordinate j.
    """

    constant: np.ndarray
    rates: tuple
    coeffs: np.ndarray

    def reconstruct(self, n: int) -> np.ndarray:
        """Evaluate ``constant + sum_l rates_l**n * coeffs_l`` (complex)."""
        out = self.constant.astype(complex).copy()
        for rho, row in zip(self.rates, self.coeffs):
            out += rho**n * row
        return out


@dataclass(frozen=True)
class ExpansionSeries:
    """Power series of pi(eps) around eps = 0: base plus coefficient table.

    ``coeffs[k - 1, j]`` multiplies eps**k for state j. Each coefficient row
    sums to zero because every pi(eps) is a probability vector.
    """

    base: Distribution
    coeffs: np.ndarray

    @property
    def order(self) -> int:
        return self.coeffs.shape[0]

    def evaluate(self, epsilon: float) -> np.ndarray:
        return evaluate_expansion(self, epsilon)

    def mass_defect(self, epsilon: float) -> float:
        return float(self.evaluate(epsilon).sum() - 1.0)


def spectrum(P0: StochasticMatrix, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> Spectrum:
    """All eigenvalues of P0, sorted and merged into distinct representatives.

    Dense nonsymmetric solve (Hessenberg + shifted QR via LAPACK). Sorting is
    by descending modulus with a deterministic (real, imag) tie-break;
    clustering is greedy against the running cluster mean.
    """
    eigs = np.linalg.eigvals(P0.entries)
    order = sorted(range(len(eigs)), key=lambda i: (-abs(eigs[i]), -eigs[i].real, -eigs[i].imag))
    eigs = [complex(eigs[i]) for i in order]

    groups = []
    for e in eigs:
        for g in groups:
            if abs(e - sum(g) / len(g)) <= cluster_tol:
                g.append(e)
                break
        else:
            groups.append([e])
    distinct = tuple((sum(g) / len(g), len(g)) for g in groups)

    leading = distinct[0][0]
    if abs(leading - 1.0) > 1e-8:
        raise SpectralStructureError(
            f"leading eigenvalue {leading} is not 1 within 1e-8; matrix is not row-stochastic enough"
        )
    # Snap the leading representative to exactly 1; it is 1 in exact arithmetic.
    distinct = ((1.0 + 0.0j, distinct[0][1]),) + distinct[1:]
    return Spectrum(tuple(eigs), distinct, cluster_tol)


def spectral_coefficients(
    P0: StochasticMatrix, d: DampingVector, spec: Spectrum
) -> SpectralCoefficients:
    """Fit trajectory samples against the distinct eigenvalues.

    For each state j, solves the square Vandermonde system
    ``sum_l rho_l**n c_{j,l} = (d P0^n)_j`` over n = 0..m_bar-1. The fitted
    constant must match the directly solved stationary distribution; a
    mismatch beyond 1e-6 means the trajectory carries polynomial-in-n terms,
    i.e. the matrix is defective, and no coefficient table exists.
    """
    rhos = np.array([rep for rep, _ in spec.distinct], dtype=complex)
    mbar = len(rhos)
    samples = np.empty((mbar, P0.dim))
    v = d.weights
    for n in range(mbar):
        samples[n] = v
        v = v @ P0.entries
    V = np.vander(rhos, N=mbar, increasing=True).T  # V[n, l] = rho_l**n
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > VANDERMONDE_COND_LIMIT:
        raise IllConditionedError(
            f"eigenvalue sample matrix has condition {cond:.3e} (> {VANDERMONDE_COND_LIMIT:.0e}); "
            "increase cluster_tol so nearby eigenvalues merge. The trajectory fit only "
            f"supports a modest number of distinct eigenvalues ({mbar} here)"
        )
    coeffs = np.linalg.solve(V, samples.astype(complex))

    pi0 = stationary_direct(P0).pi.probs
    mismatch = float(np.max(np.abs(coeffs[0] - pi0)))
    if mismatch > CONSTANT_MATCH_TOL:
        raise SpectralStructureError(
            f"fitted constant term deviates from the stationary distribution by {mismatch:.3e}; "
            "the matrix appears defective (non-semisimple), which this decomposition cannot handle"
        )
    return SpectralCoefficients(pi0, tuple(rhos[1:]), coeffs[1:])


def _expansion_table(d: np.ndarray, sc: SpectralCoefficients, cluster_tol: float, n_max: int) -> np.ndarray:
    for rho in sc.rates:
        if abs(1.0 - rho) < cluster_tol:
            raise RegimeError(
                "a non-leading eigenvalue sits at 1 within cluster_tol; the matrix is not a "
                "single aperiodic class -- reclassify the regime"
            )
    m = sc.constant.shape[0]
    table = np.zeros((n_max, m), dtype=complex)
    table[0] = d - sc.constant
    for rho, row in zip(sc.rates, sc.coeffs):
        table[0] += row * rho / (1.0 - rho)
    for n in range(2, n_max + 1):
        acc = np.zeros(m, dtype=complex)
        for rho, row in zip(sc.rates, sc.coeffs):
            acc += row * rho ** (n - 1) / (1.0 - rho) ** n
        table[n - 1] = (-1) ** (n - 1) * acc
    residue = float(np.max(np.abs(table.imag))) if table.size else 0.0
    if residue > IMAG_TOL:
        raise SpectralStructureError(
            f"imaginary residue {residue:.3e} in the coefficient table exceeds {IMAG_TOL:.0e}"
        )
    return table.real


def expansion(
    P0: StochasticMatrix,
    d: DampingVector,
    structure: ChainStructure,
    n_max: int = 2,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
) -> ExpansionSeries:
    """Power series of the damped stationary distribution around eps = 0.

    Regular regime: one decomposition on the whole matrix. Singular regime:
    per-class decompositions with renormalized damping, scaled by the class
    masses of d. Complex arithmetic is used throughout; the final table must
    be real up to an 1e-10 residue.
    """
    if n_max < 1:
        raise ValidationError("expansion order must be at least 1")
    if structure.regime is Regime.UNSUPPORTED:
        raise RegimeError("expansion requires a regular or singular chain")

    if structure.regime is Regime.REGULAR:
        spec = spectrum(P0, cluster_tol)
        if spec.distinct[0][1] > 1:
            raise RegimeError(
                "eigenvalue 1 has multiplicity above 1; the chain has several closed "
                "classes and must be treated as singular"
            )
        sc = spectral_coefficients(P0, d, spec)
        return ExpansionSeries(Distribution(sc.constant, P0.row_tol), _expansion_table(d.weights, sc, cluster_tol, n_max))

    masses = class_mass(d.as_distribution(), structure)
    base = np.zeros(P0.dim)
    coeffs = np.zeros((n_max, P0.dim))
    for j, cls in enumerate(structure.classes):
        sub = restrict(P0, cls)
        sub_d = restrict_damping(d, cls)
        spec = spectrum(sub, cluster_tol)
        if spec.distinct[0][1] > 1:
            raise RegimeError(f"closed class {cls.states} itself splits further; reclassify")
        sc = spectral_coefficients(sub, sub_d, spec)
        idx = list(cls.states)
        base[idx] = masses[j] * sc.constant
        coeffs[:, idx] = masses[j] * _expansion_table(sub_d.weights, sc, cluster_tol, n_max)
    return ExpansionSeries(Distribution(base, max(P0.row_tol, 1e-10)), coeffs)


def evaluate_expansion(series: ExpansionSeries, epsilon: float) -> np.ndarray:
    """Evaluate the truncated series at epsilon by Horner's rule.

    The value is a plain vector: truncation breaks exact normalization, so it
    need not sum to 1 (see ``ExpansionSeries.mass_defect``).
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValidationError(f"epsilon must lie in [0, 1], got {epsilon}")
    acc = np.zeros(series.base.dim)
    for row in series.coeffs[::-1]:
        acc = row + epsilon * acc
    return series.base.probs + epsilon * acc
