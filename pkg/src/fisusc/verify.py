"""Executable invariant suite.

`run_verify` exercises the cross-module invariants on deterministic
random instances and returns a machine-readable report: one named check
per invariant, each with a pass flag and a short detail string.  The
CLI maps the report onto exit codes.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import models
from .fisher import fisher_bundle, qfi_matrix, r_metric, r_nuisance, sld
from .linalg import eig_hermitian, hermitize, tensor, trace_norm
from .model import Povm, mix_povm, tensor_model, validate_povm
from .models import (POINT_SOURCE_WEIGHTS, PointSourceConfig, bell_povm,
                     hg_overlap, hg_overlap_closed_form,
                     optimal_povm_point_sources, point_source_model,
                     qubit_phase_dephasing, separable_povm, x_opt)
from .susceptibility import (a_tensor, diagonalize_frame, g_matrix,
                             sigma_lower, sigma_single, sigma_upper,
                             susceptibility_report, x_finite_mix,
                             x_from_extremal_sum, x_scalar, xi_matrix)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class VerifyReport:
    seed: int
    results: tuple

    @property
    def all_passed(self):
        return all(r.passed for r in self.results)

    def to_json(self):
        return json.dumps({
            "seed": self.seed,
            "all_passed": self.all_passed,
            "checks": [{"name": r.name, "passed": r.passed, "detail": r.detail}
                       for r in self.results],
        }, indent=2)


def _random_hermitian(rng, dim):
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return hermitize((z + z.conj().T) / 2.0)


def _qubit_instances(rng, n):
    model = qubit_phase_dephasing()
    for _ in range(n):
        yield model, np.array([rng.uniform(0, 2 * np.pi), rng.uniform(0.05, 1.5)])


def check_eig_reconstruction(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        dim = int(rng.integers(2, 17))
        H = _random_hermitian(rng, dim)
        w, V = eig_hermitian(H)
        err = float(np.max(np.abs(V @ np.diag(w) @ V.conj().T - H)))
        unit = float(np.max(np.abs(V.conj().T @ V - np.eye(dim))))
        worst = max(worst, err / (1e-10 * dim), unit / 1e-10)
    return worst <= 1.0, f"worst normalized error {worst:.3e}"


def check_trace_norm_bound(seed):
    rng = np.random.default_rng(seed)
    ok = True
    for _ in range(50):
        H = _random_hermitian(rng, int(rng.integers(2, 9)))
        ok &= trace_norm(H) >= abs(float(np.real(np.trace(H)))) - 1e-10
    return ok, "trace_norm >= |Tr| on 50 random Hermitians"


def check_tensor_associativity(seed):
    rng = np.random.default_rng(seed)
    A, B, C = (_random_hermitian(rng, d) for d in (2, 3, 2))
    err = float(np.max(np.abs(tensor(tensor(A, B), C) - tensor(A, tensor(B, C)))))
    # scalar products regroup, so equality holds to rounding only
    return err <= 1e-14, f"max deviation {err:.1e}"


def check_model_states(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    cfg = PointSourceConfig(n_max=20, x_m=0.0)
    ps = point_source_model(cfg)
    for i in range(50):
        if i % 2 == 0:
            model, theta = next(_qubit_instances(rng, 1))
        else:
            model, theta = ps, np.array([rng.uniform(-0.3, 0.3),
                                         rng.uniform(0.01, 1.0),
                                         rng.uniform(0.1, 0.9)])
        rho = model.state_at(theta)
        worst = max(worst, abs(float(np.real(np.trace(rho))) - 1.0) / 1e-10)
        worst = max(worst, max(0.0, -float(np.linalg.eigvalsh(rho)[0])) / 1e-10)
        for d in model.derivatives_at(theta):
            worst = max(worst, abs(float(np.real(np.trace(d)))) / 1e-9)
    return worst <= 1.0, f"worst normalized violation {worst:.3e}"


def check_fd_consistency(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for model, theta in _qubit_instances(rng, 10):
        analytic = model.derivatives_at(theta)
        h = 1e-5
        for j in range(model.n_params):
            up, dn = theta.copy(), theta.copy()
            up[j] += h
            dn[j] -= h
            fd = (model.state_at(up) - model.state_at(dn)) / (2 * h)
            worst = max(worst, float(np.max(np.abs(analytic[j] - fd))))
    return worst <= 1e-7, f"max |analytic - central difference| = {worst:.3e}"


def check_povm_validity(seed):
    reports = [validate_povm(p, 1e-9) for p in (separable_povm(), bell_povm())]
    cfg = PointSourceConfig(n_max=20, x_m=0.1)
    reports.append(validate_povm(optimal_povm_point_sources(cfg), 1e-9))
    mixed = mix_povm(separable_povm(), Povm([np.eye(2) / 4.0] * 4), 0.3)
    reports.append(validate_povm(mixed, 1e-9))
    ok = all(r.passed for r in reports)
    return ok, "; ".join(f"min_eig={r.min_eigenvalue:.1e},res={r.completeness_residual:.1e}"
                         for r in reports)


def check_qfi_dominates_fisher(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for model, theta in _qubit_instances(rng, 8):
        F = fisher_bundle(model, theta, separable_povm()).fisher
        Q = qfi_matrix(model, theta).qfi
        worst = min(worst, float(np.linalg.eigvalsh(Q - F)[0]))
    return worst >= -1e-8, f"min eig(Q - F) = {worst:.3e}"


def check_probability_sums(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for model, theta in _qubit_instances(rng, 8):
        bundle = fisher_bundle(model, theta, separable_povm())
        worst = max(worst, abs(float(np.sum(bundle.probabilities)) - 1.0))
        for d in bundle.derivatives:
            total = sum(float(np.real(np.trace(d @ E)))
                        for E in separable_povm().elements)
            worst = max(worst, abs(total))
    return worst <= 1e-10, f"worst residual {worst:.3e}"


def check_sld_residual(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for model, theta in _qubit_instances(rng, 8):
        rho = model.state_at(theta)
        for d in model.derivatives_at(theta):
            L = sld(rho, d)
            worst = max(worst, float(np.max(np.abs(2 * d - L @ rho - rho @ L))))
    return worst <= 1e-8, f"max SLD residual {worst:.3e}"


def check_r_bounds(seed):
    rng = np.random.default_rng(seed)
    ok, values = True, []
    for model, theta in _qubit_instances(rng, 6):
        F = fisher_bundle(model, theta, separable_povm()).fisher
        Q = qfi_matrix(model, theta).qfi
        r = r_metric(F, Q, m=1)
        rn = r_nuisance(F, Q, 0)
        values += [r, rn]
        ok &= r >= 1 - 1e-9 and rn >= 1 - 1e-9
    return ok, f"min r = {min(values):.6f}"


def check_self_noise_nullity(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for model, theta in _qubit_instances(rng, 6):
        bundle = fisher_bundle(model, theta, separable_povm())
        at = a_tensor(bundle)
        G = g_matrix(at, separable_povm())
        worst = max(worst, abs(x_scalar(bundle.fisher, G, model.n_params)))
    return worst <= 1e-9, f"max |X[M,M]| = {worst:.3e}"


def check_trace_identity(seed):
    rng = np.random.default_rng(seed)
    worst_tr, worst_cx = 0.0, 0.0
    noise = Povm([np.eye(2) / 4.0] * 4)
    for model, theta in _qubit_instances(rng, 6):
        bundle = fisher_bundle(model, theta, separable_povm())
        at = a_tensor(bundle)
        G = g_matrix(at, noise)
        x = x_scalar(bundle.fisher, G, model.n_params)
        worst_tr = max(worst_tr, abs(x - float(np.trace(xi_matrix(bundle.fisher, G)))))
        frame = diagonalize_frame(bundle, at)
        worst_cx = max(worst_cx, abs(x - x_from_extremal_sum(bundle, frame, noise)))
    return worst_tr <= 1e-10 and worst_cx <= 1e-9, \
        f"max |tr Xi - X| = {worst_tr:.3e}; max |convex-sum - X| = {worst_cx:.3e}"


def check_reparametrization_invariance(seed):
    rng = np.random.default_rng(seed)
    model = qubit_phase_dephasing()
    theta = np.array([0.9, 0.4])
    noise = Povm([np.eye(2) / 4.0] * 4)
    bundle = fisher_bundle(model, theta, separable_povm())
    x0 = x_scalar(bundle.fisher, g_matrix(a_tensor(bundle), noise), 2)
    worst = 0.0
    for _ in range(5):
        R = rng.standard_normal((2, 2))
        while abs(np.linalg.det(R)) < 0.2:
            R = rng.standard_normal((2, 2))
        F_new = R @ bundle.fisher @ R.T
        at = a_tensor(bundle)
        ops = np.einsum("ik,jl,aklxy->aijxy", R, R, at.operators)
        at_new = type(at)(operators=ops, kept_outcomes=at.kept_outcomes,
                          n_outcomes=at.n_outcomes, dim=at.dim)
        x1 = x_scalar(F_new, g_matrix(at_new, noise), 2)
        worst = max(worst, abs(x1 - x0))
    return worst <= 1e-8, f"max |X' - X| = {worst:.3e}"


def check_finite_eps_convergence(seed):
    model = qubit_phase_dephasing()
    theta = np.array([np.pi / 4, 0.2])
    target = separable_povm()
    noise = Povm([np.eye(2) / 4.0] * 4)
    bundle = fisher_bundle(model, theta, target)
    x = x_scalar(bundle.fisher, g_matrix(a_tensor(bundle), noise), 2)
    ratios = []
    for eps in (1e-2, 1e-3, 1e-4):
        ratios.append(abs(x_finite_mix(model, theta, target, noise, eps) - x) / eps)
    spread = max(ratios) / max(min(ratios), 1e-30)
    return spread < 1.5, f"|X_eps - X|/eps in [{min(ratios):.2f}, {max(ratios):.2f}]"


def check_bound_order_and_oracle(seed):
    model = qubit_phase_dephasing()
    ok, details = True, []
    for delta in (0.1, 0.4):
        theta = np.array([np.pi / 4, delta])
        report = susceptibility_report(model, theta, separable_povm(),
                                       oracle_samples=2000, seed=seed)
        ok &= report.sigma_lower <= report.sigma_upper + 1e-8
        ok &= report.sigma_lower - 1e-9 <= report.oracle_best <= report.sigma_upper + 1e-9
        details.append(f"SL={report.sigma_lower:.3f}<=X*={report.oracle_best:.3f}"
                       f"<=SU={report.sigma_upper:.3f}")
    return ok, "; ".join(details)


def check_p1_collapse(seed):
    from .model import StatisticalModel
    delta = 0.3

    def state_fn(v):
        e = np.exp(-1j * v[0] - delta)
        return 0.5 * np.array([[1.0, e], [np.conj(e), 1.0]])

    def deriv_fn(v):
        e = np.exp(-1j * v[0] - delta)
        return [0.5 * np.array([[0.0, -1j * e], [np.conj(-1j * e), 0.0]])]

    model = StatisticalModel(2, ("phi",), state_fn, derivative_fn=deriv_fn)
    theta = np.array([1.1])
    lo, _ = sigma_lower(model, theta, separable_povm())
    up, _ = sigma_upper(model, theta, separable_povm())
    sig = sigma_single(model, theta, separable_povm())
    worst = max(abs(lo - sig), abs(up - sig))
    return worst <= 1e-10, f"|Sigma_L - sigma| = {abs(lo-sig):.2e}, |Sigma_U - sigma| = {abs(up-sig):.2e}"


def check_outcome_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    model = qubit_phase_dephasing()
    theta = np.array([0.6, 0.25])
    target = separable_povm()
    noise = Povm([np.eye(2) / 4.0] * 4)
    perm = rng.permutation(4)
    target_p = Povm([target.elements[i] for i in perm])
    noise_p = Povm([noise.elements[i] for i in perm])
    b0 = fisher_bundle(model, theta, target)
    b1 = fisher_bundle(model, theta, target_p)
    x0 = x_scalar(b0.fisher, g_matrix(a_tensor(b0), noise), 2)
    x1 = x_scalar(b1.fisher, g_matrix(a_tensor(b1), noise_p), 2)
    lo0, _ = sigma_lower(model, theta, target)
    lo1, _ = sigma_lower(model, theta, target_p)
    up0, _ = sigma_upper(model, theta, target)
    up1, _ = sigma_upper(model, theta, target_p)
    worst = max(abs(x0 - x1), abs(lo0 - lo1), abs(up0 - up1))
    return worst <= 1e-9, f"max change under relabeling {worst:.2e}"


def check_zero_padding_invariance(seed):
    model = qubit_phase_dephasing()
    theta = np.array([0.6, 0.25])
    target = separable_povm()
    noise = Povm([np.eye(2) / 4.0] * 4)
    padded = Povm(list(noise.elements) + [np.zeros((2, 2))] * 2)
    bundle = fisher_bundle(model, theta, target)
    at = a_tensor(bundle)
    x0 = x_scalar(bundle.fisher, g_matrix(at, noise), 2)
    x1 = x_scalar(bundle.fisher, g_matrix(at, padded), 2)
    return abs(x0 - x1) == 0.0, f"|X(padded) - X| = {abs(x0-x1):.1e}"


def check_hg_orthonormality(seed, weights=None):
    w = POINT_SOURCE_WEIGHTS if weights is None else np.asarray(weights)
    gram_err = float(np.max(np.abs(w @ w.T - np.eye(4))))
    if gram_err > 1e-12:
        return False, f"weight rows not orthonormal: max|w w^T - I| = {gram_err:.2e}"
    from scipy.integrate import quad
    worst = 0.0
    for n in range(5):
        for m in range(n, 5):
            val, _ = quad(lambda x, n=n, m=m: models._hg_mode(n, x, 0.3)
                          * models._hg_mode(m, x, 0.3), -12.3, 12.9,
                          epsabs=1e-12, limit=200)
            worst = max(worst, abs(val - (1.0 if n == m else 0.0)))
    passed = worst <= 1e-10
    return passed, f"max|w w^T - I| = {gram_err:.2e}; mode Gram error {worst:.2e}"


def check_hg_quadrature_vs_closed_form(seed):
    worst = 0.0
    for n in (0, 1, 3, 6, 10):
        for d in (-3.0, -0.7, 0.0, 0.4, 2.1, 3.0):
            worst = max(worst, abs(hg_overlap(n, 0.2 + d, 0.2)
                                   - float(hg_overlap_closed_form(n, 0.2 + d, 0.2))))
    return worst <= 1e-10, f"max |quadrature - closed form| = {worst:.3e}"


def check_truncation_convergence(seed):
    theta = np.array([0.0, 0.4, 0.3])
    values = {}
    for n_max in (20, 30):
        cfg = PointSourceConfig(n_max=n_max, x_m=x_opt(*theta))
        model = point_source_model(cfg)
        povm = optimal_povm_point_sources(cfg)
        F = fisher_bundle(model, theta, povm).fisher
        lo, _ = sigma_lower(model, theta, povm)
        up, _ = sigma_upper(model, theta, povm)
        values[n_max] = (F, lo, up)
    dF = float(np.max(np.abs(values[20][0] - values[30][0]))
               / np.max(np.abs(values[30][0])))
    dlo = abs(values[20][1] - values[30][1]) / values[30][1]
    dup = abs(values[20][2] - values[30][2]) / values[30][2]
    worst = max(dF, dlo, dup)
    return worst < 1e-6, f"relative change n_max 20 -> 30: {worst:.2e}"


def check_two_copy_consistency(seed):
    model = qubit_phase_dephasing()
    theta = np.array([0.7, 0.3])
    double = tensor_model(model, 2)
    rho2 = double.state_at(theta)
    ok = abs(float(np.real(np.trace(rho2))) - 1.0) <= 1e-10
    Q1 = qfi_matrix(model, theta).qfi
    Q2 = qfi_matrix(double, theta).qfi
    add_err = float(np.max(np.abs(Q2 - 2 * Q1)))
    h = 1e-5
    up, dn = theta.copy(), theta.copy()
    up[0] += h
    dn[0] -= h
    fd = (double.state_at(up) - double.state_at(dn)) / (2 * h)
    fd_err = float(np.max(np.abs(double.derivatives_at(theta)[0] - fd)))
    return ok and add_err <= 1e-9 and fd_err <= 1e-8, \
        f"|Q2 - 2Q1| = {add_err:.2e}, product-rule vs FD {fd_err:.2e}"


CHECKS = [
    ("eig_reconstruction", check_eig_reconstruction),
    ("trace_norm_bound", check_trace_norm_bound),
    ("tensor_associativity", check_tensor_associativity),
    ("model_states", check_model_states),
    ("fd_consistency", check_fd_consistency),
    ("povm_validity", check_povm_validity),
    ("qfi_dominates_fisher", check_qfi_dominates_fisher),
    ("probability_sums", check_probability_sums),
    ("sld_residual", check_sld_residual),
    ("r_bounds", check_r_bounds),
    ("self_noise_nullity", check_self_noise_nullity),
    ("trace_identity", check_trace_identity),
    ("reparametrization_invariance", check_reparametrization_invariance),
    ("finite_eps_convergence", check_finite_eps_convergence),
    ("bound_order_and_oracle", check_bound_order_and_oracle),
    ("p1_collapse", check_p1_collapse),
    ("outcome_permutation_invariance", check_outcome_permutation_invariance),
    ("zero_padding_invariance", check_zero_padding_invariance),
    ("hg_orthonormality", check_hg_orthonormality),
    ("hg_quadrature_vs_closed_form", check_hg_quadrature_vs_closed_form),
    ("truncation_convergence", check_truncation_convergence),
    ("two_copy_consistency", check_two_copy_consistency),
]


def run_verify(seed=0):
    """Run every invariant check; returns a VerifyReport."""
    results = []
    for name, fn in CHECKS:
        try:
            passed, detail = fn(seed)
        except Exception as err:   # a crash is a failure, not an abort
            passed, detail = False, f"raised {type(err).__name__}: {err}"
        results.append(CheckResult(name=name, passed=bool(passed), detail=detail))
    return VerifyReport(seed=seed, results=tuple(results))
