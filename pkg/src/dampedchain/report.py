"""Assembly of machine-readable analysis reports.

Reports are plain JSON with a fixed field order and two float conventions:
analysis values carry 12 significant digits, while input echoes (matrix,
damping, initial distribution) keep exact shortest round-trip floats so a
report can be re-ingested and reproduced bit for bit. State ids in reports
are 1-based, matching the edge-list input convention.
"""

import json
from importlib import resources

import numpy as np

from . import __version__
from ._parallel import map_ordered
from .bounds import (
    BoundReport,
    class_ergodicity_coefficients,
    coupling_bound,
    coupling_bound_multistep,
    ergodicity_coefficient,
    estimate_decay,
    estimate_decay_split,
    split_bound_context,
    stationary_gap_bound,
)
from .core import DampedChain, Distribution, build_damped_matrix
from .coupling import build_coupling_kernel, maximal_coupling, simulate_coupling_time
from .errors import RegimeError
from .expansion import expansion, spectrum
from .stationary import (
    limit_stationary,
    stationary_direct,
    stationary_power,
    stationary_series,
)
from .structure import Regime
from .triangular import triangular_sweep

SIGNIFICANT_DIGITS = 12


def rounded(x: float) -> float:
    """Fix a float to 12 significant digits for deterministic serialization."""
    return float(f"{float(x):.{SIGNIFICANT_DIGITS}g}")


def rounded_list(values) -> list:
    return [rounded(v) for v in np.asarray(values).ravel()]


def exact_list(values) -> list:
    return [float(v) for v in np.asarray(values).ravel()]


def structure_section(structure) -> dict:
    return {
        "regime": structure.regime.value,
        "classes": [
            {
                "states": [s + 1 for s in cls.states],
                "period": cls.period,
                "aperiodic": cls.aperiodic,
            }
            for cls in structure.classes
        ],
        "transient_states": [s + 1 for s in structure.transient_states],
    }


def _solution_entry(solution) -> dict:
    return {
        "method": solution.method.value,
        "pi": rounded_list(solution.pi.probs),
        "iterations_or_terms": solution.iterations_or_terms,
        "residual": rounded(solution.residual),
    }


def stationary_section(chain: DampedChain, structure, epsilons, tol: float) -> dict:
    def solve_at(eps):
        P_eps = build_damped_matrix(DampedChain(chain.p0, chain.damping, eps))
        entry = {"epsilon": rounded(eps)}
        entry["direct"] = _solution_entry(stationary_direct(P_eps, solver_tol=max(tol, 1e-10)))
        entry["power"] = _solution_entry(
            stationary_power(P_eps, Distribution.uniform(chain.dim), tol=min(tol, 1e-12))
        )
        if eps > 0.0:
            entry["series"] = _solution_entry(
                stationary_series(chain.p0, chain.damping, eps, tol=min(tol, 1e-12))
            )
        return entry

    section = {"by_epsilon": map_ordered(solve_at, epsilons)}
    if structure.regime is not Regime.UNSUPPORTED:
        limit = limit_stationary(chain.p0, chain.damping, chain.damping.as_distribution(), structure)
        section["limit"] = rounded_list(limit.probs)
    return section


def spectrum_section(chain: DampedChain, structure) -> dict:
    def spectrum_entry(P):
        spec = spectrum(P)
        return {
            "eigenvalues": [{"re": rounded(z.real), "im": rounded(z.imag)} for z in spec.eigenvalues],
            "distinct": [
                {"re": rounded(z.real), "im": rounded(z.imag), "multiplicity": mult}
                for z, mult in spec.distinct
            ],
            "second_modulus": rounded(spec.second_modulus),
        }

    if structure.regime is Regime.SINGULAR:
        from .structure import restrict

        return {
            "per_class": [spectrum_entry(restrict(chain.p0, cls)) for cls in structure.classes]
        }
    return spectrum_entry(chain.p0)


def expansion_section(chain: DampedChain, structure, order: int, epsilons) -> dict:
    series = expansion(chain.p0, chain.damping, structure, n_max=order)
    section = {
        "order": series.order,
        "base": rounded_list(series.base.probs),
        "coefficients": [rounded_list(row) for row in series.coeffs],
    }
    evaluations = []
    for eps in epsilons:
        values = series.evaluate(eps)
        evaluations.append(
            {
                "epsilon": rounded(eps),
                "values": rounded_list(values),
                "mass_defect": rounded(values.sum() - 1.0),
            }
        )
    if evaluations:
        section["evaluations"] = evaluations
    return section


def _bound_record(report: BoundReport) -> dict:
    record = {
        "family": report.family,
        "id": report.bound_id,
        "epsilon": rounded(report.epsilon),
        "constants": {k: rounded(v) for k, v in report.constants.items()},
    }
    if report.per_state:
        record["per_state"] = rounded_list(report.per_state)
    if report.by_n:
        record["by_n"] = [[n, rounded(v)] for n, v in report.by_n]
    return record


def bounds_section(
    chain: DampedChain,
    structure,
    p: Distribution,
    epsilon: float,
    block: int,
    families,
    horizon: int,
) -> dict:
    reports = []
    n_grid = list(range(0, horizon + 1))
    P_eps = build_damped_matrix(DampedChain(chain.p0, chain.damping, epsilon))
    pi_eps = stationary_direct(P_eps).pi

    for family in families:
        if family == "1":
            if structure.regime is not Regime.REGULAR:
                raise RegimeError("bound family 1 needs a regular chain; use family 2")
            decay = estimate_decay(chain.p0)
            reference = stationary_direct(chain.p0).pi
            values = stationary_gap_bound(decay, chain.damping, reference, epsilon)
            reports.append(
                BoundReport(
                    "stationary-gap",
                    "1",
                    epsilon,
                    {"amplitude": decay.amplitude, "rate": decay.rate},
                    tuple(values),
                )
            )
        elif family == "2":
            if structure.regime is not Regime.SINGULAR:
                raise RegimeError("bound family 2 needs a singular chain; use family 1")
            decay = estimate_decay_split(chain.p0, structure)
            reference = limit_stationary(
                chain.p0, chain.damping, chain.damping.as_distribution(), structure
            )
            values = stationary_gap_bound(decay, chain.damping, reference, epsilon)
            reports.append(
                BoundReport(
                    "stationary-gap-split",
                    "2",
                    epsilon,
                    {"amplitude": decay.amplitude, "rate": decay.rate},
                    tuple(values),
                )
            )
        elif family == "5":
            by_n = tuple(
                (n, coupling_bound(chain.p0, p, pi_eps, epsilon, n)) for n in n_grid
            )
            reports.append(BoundReport("coupling-onestep", "5", epsilon, {}, (), by_n))
        elif family == "6":
            by_n = tuple(
                (n, coupling_bound_multistep(chain.p0, p, pi_eps, epsilon, block, n))
                for n in n_grid
            )
            reports.append(
                BoundReport("coupling-multistep", "6", epsilon, {"block": block}, (), by_n)
            )
        elif family == "7":
            if structure.regime is not Regime.SINGULAR:
                raise RegimeError("bound family 7 needs a singular chain; use families 5/6")
            context = split_bound_context(
                chain.p0, chain.damping, p, epsilon, block, structure, pi_eps=pi_eps
            )
            reports.append(
                BoundReport(
                    "coupling-split",
                    "7",
                    epsilon,
                    {"block": block, "n": horizon},
                    tuple(context.bound_vector(horizon)),
                )
            )
        else:
            raise RegimeError(f"unknown bound family {family!r}; choose from 1, 2, 5, 6, 7")

    ergodicity = [
        {"N": N, "delta": rounded(ergodicity_coefficient(chain.p0, N).delta)}
        for N in range(1, 13)
    ]
    section = {"epsilon": rounded(epsilon), "reports": [_bound_record(r) for r in reports]}
    section["ergodicity"] = ergodicity
    if structure.regime is Regime.SINGULAR:
        section["class_ergodicity"] = [
            {"class": j + 1, "N": block, "delta": rounded(rep.delta)}
            for j, rep in enumerate(class_ergodicity_coefficients(chain.p0, structure, block))
        ]
    return section


def coupling_sim_section(
    chain: DampedChain,
    p: Distribution,
    epsilon: float,
    trials: int,
    seed: int,
    horizon: int,
) -> dict:
    P_eps = build_damped_matrix(DampedChain(chain.p0, chain.damping, epsilon))
    pi_eps = stationary_direct(P_eps).pi
    kernel = build_coupling_kernel(P_eps)
    start = maximal_coupling(p, pi_eps)
    estimate = simulate_coupling_time(kernel, start, trials, seed, horizon)
    bound = [coupling_bound(chain.p0, p, pi_eps, epsilon, n) for n in range(horizon + 1)]
    return {
        "epsilon": rounded(epsilon),
        "trials": trials,
        "seed": seed,
        "horizon": horizon,
        "generator": estimate.generator,
        "start_overlap": rounded(start.diagonal_mass),
        "tail": rounded_list(estimate.tail),
        "std_error": rounded_list(estimate.std_error),
        "onestep_bound": rounded_list(bound),
    }


def triangular_section(
    chain: DampedChain,
    structure,
    p: Distribution,
    epsilon: float,
    n_grid,
    block: int,
) -> dict:
    sweep = triangular_sweep(chain.p0, chain.damping, p, structure, epsilon, n_grid, block)
    return {
        "epsilon": rounded(epsilon),
        "block": sweep.block,
        "rows": [
            {
                "n": row.n,
                "eps_n": rounded(row.eps_n),
                "trajectory": rounded_list(row.trajectory),
                "mixture": rounded_list(row.mixture),
                "rel_error": rounded_list(row.rel_error),
                "bound": rounded(row.bound),
            }
            for row in sweep.rows
        ],
    }


def build_report(command: str, inputs_echo: dict, sections: dict) -> dict:
    report = {
        "tool": "dampedchain",
        "version": __version__,
        "command": command,
        "inputs": inputs_echo,
    }
    report.update(sections)
    return report


def serialize(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False)


def load_schema() -> dict:
    with resources.files("dampedchain.schemas").joinpath("report.schema.json").open() as fh:
        return json.load(fh)
