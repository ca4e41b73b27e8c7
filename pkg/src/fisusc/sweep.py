"""Parameter sweeps with CSV output.

A sweep fixes all but one model parameter, walks the remaining one over
a linear or logarithmic grid and records Fisher/quantum-Fisher matrices,
optimality ratios and susceptibility bounds per point.  Points where the
Fisher matrix is singular are recorded with an error message and the
sweep continues.
"""

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .fisher import SingularFisherError, fisher_bundle, qfi_matrix, r_metric
from .model import tensor_model
from .models import (PointSourceConfig, bell_povm, optimal_povm_point_sources,
                     point_source_model, qubit_phase_dephasing,
                     separable_povm, x_opt)
from .susceptibility import susceptibility_report

MODELS = ("phase-dephasing", "point-sources")
MEASUREMENTS = ("separable", "bell", "optimal-hg")
_MEASUREMENT_FOR_MODEL = {
    "phase-dephasing": ("separable", "bell"),
    "point-sources": ("optimal-hg",),
}


class SweepSpecError(ValueError):
    """The sweep specification is invalid."""


@dataclass(frozen=True)
class SweepSpec:
    """Declarative description of one sweep."""

    model: str
    measurement: str
    fixed: dict
    sweep_name: str
    start: float
    stop: float
    count: int
    scale: str = "log"
    oracle_samples: int = 0
    seed: int = 0
    out: str = "sweep.csv"
    workers: int = 1
    n_max: int = 20

    def validate(self):
        if self.model not in MODELS:
            raise SweepSpecError(f"unknown model {self.model!r}; choose from {MODELS}")
        if self.measurement not in MEASUREMENTS:
            raise SweepSpecError(
                f"unknown measurement {self.measurement!r}; choose from {MEASUREMENTS}")
        if self.measurement not in _MEASUREMENT_FOR_MODEL[self.model]:
            raise SweepSpecError(
                f"measurement {self.measurement!r} does not apply to model {self.model!r}")
        names = _param_names(self.model)
        if self.sweep_name not in names:
            raise SweepSpecError(f"sweep parameter {self.sweep_name!r} not in {names}")
        missing = [n for n in names if n != self.sweep_name and n not in self.fixed]
        if missing:
            raise SweepSpecError(f"missing fixed values for {missing}")
        unknown = [n for n in self.fixed if n not in names or n == self.sweep_name]
        if unknown:
            raise SweepSpecError(f"fixed parameters {unknown} are not sweepable names")
        if self.count < 2:
            raise SweepSpecError("count must be >= 2")
        if self.scale not in ("linear", "log"):
            raise SweepSpecError("scale must be 'linear' or 'log'")
        if self.scale == "log" and (self.start <= 0 or self.stop <= 0):
            raise SweepSpecError("log scale needs positive start/stop")
        if self.oracle_samples < 0 or self.workers < 1:
            raise SweepSpecError("oracle_samples must be >= 0 and workers >= 1")
        grid = self.grid()
        for value in (grid[0], grid[-1]):
            theta = _theta_for(self, value)
            model = _build_model(self, value)[0]
            if not model.in_domain(theta):
                raise SweepSpecError(
                    f"sweep endpoint {self.sweep_name} = {value} leaves the model domain")

    def grid(self):
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


def _param_names(model_id):
    return ("phi", "delta") if model_id == "phase-dephasing" else ("x_c", "dx", "q")


def _theta_for(spec, sweep_value):
    values = dict(spec.fixed)
    values[spec.sweep_name] = float(sweep_value)
    return np.array([values[n] for n in _param_names(spec.model)])


def build_model_povm(model_id, measurement, theta, n_max=20):
    """Model, measurement POVM and copy count at one parameter point.

    The Hermite-Gauss measurement is re-aligned to the intensity
    centroid of the supplied point, mirroring how the optimal
    measurement is defined; within a point the apparatus is fixed.
    Returns ``(model, povm, copies, single_copy_model)``.
    """
    if model_id == "phase-dephasing":
        base = qubit_phase_dephasing()
        if measurement == "bell":
            return tensor_model(base, 2), bell_povm(), 2, base
        return base, separable_povm(), 1, base
    cfg = PointSourceConfig(n_max=n_max, x_m=x_opt(*theta))
    model = point_source_model(cfg)
    return model, optimal_povm_point_sources(cfg), 1, model


def _build_model(spec, sweep_value):
    theta = _theta_for(spec, sweep_value)
    return build_model_povm(spec.model, spec.measurement, theta, spec.n_max)


def _upper_triangle(M):
    P = M.shape[0]
    return [M[i, j] for i in range(P) for j in range(i, P)]


def sweep_columns(spec):
    names = _param_names(spec.model)
    cols = ["sweep_value"]
    cols += [f"F_{names[i]}_{names[j]}" for i in range(len(names))
             for j in range(i, len(names))]
    cols += [f"Q_{names[i]}_{names[j]}" for i in range(len(names))
             for j in range(i, len(names))]
    cols += ["r_multi"]
    cols += [f"r_nuisance_{n}" for n in names]
    cols += ["sigma_lower", "sigma_upper"]
    cols += [f"sigma_{n}" for n in names]
    cols += ["oracle_best_X", "condition_number_F", "error"]
    return cols


def evaluate_point(spec, index, sweep_value):
    """One sweep row as a dict; numerical failures land in 'error'."""
    names = _param_names(spec.model)
    row = {c: "" for c in sweep_columns(spec)}
    row["sweep_value"] = float(sweep_value)
    try:
        model, povm, copies, single_copy = _build_model(spec, sweep_value)
        theta = _theta_for(spec, sweep_value)
        bundle = fisher_bundle(model, theta, povm)
        qfi = qfi_matrix(model, theta)
        F, Q = bundle.fisher, qfi.qfi
        for key, value in zip([f"F_{names[i]}_{names[j]}"
                               for i in range(len(names))
                               for j in range(i, len(names))], _upper_triangle(F)):
            row[key] = value
        for key, value in zip([f"Q_{names[i]}_{names[j]}"
                               for i in range(len(names))
                               for j in range(i, len(names))], _upper_triangle(Q)):
            row[key] = value
        if copies > 1:
            q_single = qfi_matrix(single_copy, theta).qfi
            row["r_multi"] = r_metric(F, q_single, m=copies)
        else:
            row["r_multi"] = r_metric(F, Q, m=1)
        Finv, Qinv = np.linalg.inv(F), np.linalg.inv(Q)
        for j, n in enumerate(names):
            row[f"r_nuisance_{n}"] = float(Finv[j, j] / Qinv[j, j])
        report = susceptibility_report(model, theta, povm,
                                       oracle_samples=spec.oracle_samples,
                                       seed=spec.seed + index)
        row["sigma_lower"] = report.sigma_lower
        row["sigma_upper"] = report.sigma_upper
        for n, s in zip(names, report.per_parameter_sigmas):
            row[f"sigma_{n}"] = s
        if spec.oracle_samples > 0:
            row["oracle_best_X"] = report.oracle_best
        row["condition_number_F"] = float(np.linalg.cond(F))
    except (SingularFisherError, ValueError) as err:
        row["error"] = str(err)
    return row


def _format_cell(value):
    if isinstance(value, str):
        return value
    return f"{value:.17g}"


def run_sweep(spec, out_path=None):
    """Run the sweep and write a CSV; returns the list of row dicts.

    Rows are ordered by sweep index regardless of worker scheduling and
    the output is byte-identical for identical (spec, seed).
    """
    spec.validate()
    grid = spec.grid()
    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            rows = list(pool.map(lambda iv: evaluate_point(spec, iv[0], iv[1]),
                                 enumerate(grid)))
    else:
        rows = [evaluate_point(spec, i, v) for i, v in enumerate(grid)]
    path = out_path or spec.out
    cols = sweep_columns(spec)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_format_cell(row[c]) for c in cols])
    return rows
