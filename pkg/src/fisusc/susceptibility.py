"""Noise susceptibility of Fisher information.

Mixing a target POVM M with a noise POVM N as (1 - eps) M + eps N
changes the Fisher matrix at first order in eps.  This module computes:

* the matrix susceptibility  Xi[M, N] = I + F^-1 G[N]  and its scalar
  trace  X[M, N] = P + tr[F^-1 G[N]],
* the single-parameter worst-case susceptibility sigma[M] (closed form),
* lower/upper bounds Sigma_L <= Sigma[M] = max_N X[M, N] <= Sigma_U in
  the reparametrization that diagonalizes the Fisher matrix,
* a sampled search over noise POVMs that certifies the bounds.

The operator kernel is ``A_{a;jk} = l_{a,j} l_{a,k} rho - l_{a,j} d_k rho
- l_{a,k} d_j rho`` with ``G[N]_{jk} = sum_a Tr[A_{a;jk} N_a]``.

Lower-bound convention
----------------------
For a pair of outcomes (a', a'') the best two-outcome noise supported on
those slots gives exactly

    X* = P + (|L_a'|^2 + |L_a''|^2)/2 + ||sum_j (A~_{a';jj} - A~_{a'';jj}) / F~_jj||_1 / 2,

with the trace norm of the *summed* operator.  `sigma_lower` maximizes
X* over all outcome pairs; this value is attained by an explicit noise
POVM, so it is a certified lower bound on Sigma[M].  The variant that
sums per-parameter trace norms instead (moving the sum outside the
norm) is not a lower bound - it can exceed the exact maximum, which the
sampled search exposes - and is reported only as a diagnostic
(``sigma_lower_split``).
"""

from dataclasses import dataclass

import numpy as np

from .fisher import (FisherBundle, SingularFisherError, _checked_inverse,
                     fisher_bundle)
from .linalg import trace_norm
from .model import Povm, mix_povm

CLUSTER_RTOL = 1e-8
NOISE_ON_DROPPED_TOL = 1e-12
ORACLE_STRIPES = 16


@dataclass(frozen=True)
class ATensor:
    """Operators A_{a;jk} for the kept outcomes of a Fisher bundle.

    ``operators[i, j, k]`` is the (dim, dim) Hermitian operator for the
    i-th kept outcome and parameter pair (j, k); symmetric in (j, k).
    """

    operators: np.ndarray          # (E_kept, P, P, dim, dim) complex
    kept_outcomes: tuple
    n_outcomes: int
    dim: int

    @property
    def n_params(self):
        return self.operators.shape[1]


def a_tensor(bundle: FisherBundle) -> ATensor:
    """Build A_{a;jk} = l_j l_k rho - l_j d_k rho - l_k d_j rho."""
    rho = np.asarray(bundle.rho)
    derivs = np.stack(bundle.derivatives)            # (P, d, d)
    l = bundle.scores                                # (E, P)
    ll = np.einsum("aj,ak->ajk", l, l)
    ops = (np.einsum("ajk,xy->ajkxy", ll, rho)
           - np.einsum("aj,kxy->ajkxy", l, derivs)
           - np.einsum("ak,jxy->ajkxy", l, derivs))
    return ATensor(operators=ops, kept_outcomes=bundle.kept_outcomes,
                   n_outcomes=len(bundle.probabilities), dim=rho.shape[0])


def _aligned_noise_elements(atensor, noise):
    """Noise elements aligned to the kept outcome slots of the target.

    The noise POVM is padded with zero elements when shorter than the
    target (mix_povm convention).  Noise weight on outcomes the target
    drops (or does not have) lies outside the first-order model, so any
    such element with non-negligible norm is an error.
    """
    if noise.dim != atensor.dim:
        raise ValueError(f"noise dimension {noise.dim} != target dimension {atensor.dim}")
    kept = set(atensor.kept_outcomes)
    aligned = []
    for a, element in enumerate(noise.elements):
        if a in kept:
            aligned.append((a, element))
        elif float(np.max(np.abs(element))) > NOISE_ON_DROPPED_TOL:
            raise ValueError(
                f"noise element {a} acts on an outcome the target measurement "
                f"assigns vanishing probability; the first-order susceptibility "
                f"is undefined there")
    return aligned


def g_matrix(atensor: ATensor, noise: Povm):
    """G[N]_{jk} = sum_a Tr[A_{a;jk} N_a] over the kept outcomes."""
    P = atensor.n_params
    G = np.zeros((P, P))
    index_of = {a: i for i, a in enumerate(atensor.kept_outcomes)}
    for a, element in _aligned_noise_elements(atensor, noise):
        G += np.real(np.einsum("jkxy,yx->jk", atensor.operators[index_of[a]], element))
    return (G + G.T) / 2.0


def xi_matrix(F, G):
    """Matrix susceptibility Xi = I + F^-1 G."""
    Finv = _checked_inverse(F)
    return np.eye(F.shape[0]) + Finv @ G


def x_scalar(F, G, n_params):
    """Scalar susceptibility X = P + tr[F^-1 G] (equals tr Xi)."""
    Finv = _checked_inverse(F)
    return float(n_params) + float(np.einsum("ij,ji->", Finv, G))


def x_finite_mix(model, theta, target, noise, eps, p_cutoff=None):
    """Finite-eps determinant quotient (det F - det F_eps) / (eps det F).

    Converges linearly in eps to x_scalar; used as an independent check
    of the first-order formula.
    """
    kwargs = {} if p_cutoff is None else {"p_cutoff": p_cutoff}
    F0 = fisher_bundle(model, theta, target, **kwargs).fisher
    mixed = mix_povm(target, noise, eps)
    Fe = fisher_bundle(model, theta, mixed, **kwargs).fisher
    d0 = np.linalg.det(F0)
    return float((d0 - np.linalg.det(Fe)) / (eps * d0))


def sigma_single(model, theta, povm, p_cutoff=None):
    """Single-parameter worst-case susceptibility sigma[M].

    sigma = 1 + (l_n^2 + l_m^2 + ||A_n - A_m||_1) / (2 F) with n, m the
    outcomes of maximal and minimal score.
    """
    if model.n_params != 1:
        raise ValueError(
            f"sigma_single needs a single-parameter model, got P = {model.n_params}")
    kwargs = {} if p_cutoff is None else {"p_cutoff": p_cutoff}
    bundle = fisher_bundle(model, theta, povm, **kwargs)
    F = float(bundle.fisher[0, 0])
    if F <= 0.0:
        raise SingularFisherError(
            "measurement carries no information about the parameter (F = 0)")
    l = bundle.scores[:, 0]
    n, m = int(np.argmax(l)), int(np.argmin(l))
    rho, drho = bundle.rho, bundle.derivatives[0]
    A_n = l[n] ** 2 * rho - 2.0 * l[n] * drho
    A_m = l[m] ** 2 * rho - 2.0 * l[m] * drho
    return 1.0 + (l[n] ** 2 + l[m] ** 2 + trace_norm(A_n - A_m)) / (2.0 * F)


# ---------------------------------------------------------------------------
# Fisher-diagonalizing frame
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiagonalizedFrame:
    """Quantities in the parametrization that diagonalizes F.

    ``jacobian`` J is orthogonal with F~ = J F J^T diagonal; rows are the
    new parameter directions.  Scores, derivatives and the A tensor are
    transformed accordingly; ``L_vectors[a, j] = l~_{a,j} / sqrt(F~_jj)``.
    """

    jacobian: np.ndarray           # (P, P)
    tilde_fisher: np.ndarray       # (P,) diagonal entries, descending
    tilde_derivatives: tuple       # P operators
    tilde_scores: np.ndarray       # (E_kept, P)
    tilde_a: np.ndarray            # (E_kept, P, P, dim, dim)
    L_vectors: np.ndarray          # (E_kept, P)
    kept_outcomes: tuple


def _canonical_diagonalizer(F, cluster_rtol=CLUSTER_RTOL):
    """Deterministic orthogonal J with J F J^T diagonal (descending).

    Within clusters of (nearly) degenerate eigenvalues the eigenbasis
    returned by ``eigh`` is arbitrary and unstable; each cluster basis is
    replaced by the orthonormalized projections of the best-aligned
    coordinate axes, which is deterministic, stable under tiny
    perturbations, and reduces to the identity when F is proportional
    to it.  Column signs are fixed by making the largest component
    positive.
    """
    w, V = np.linalg.eigh(np.asarray(F, dtype=float))
    w, V = w[::-1].copy(), V[:, ::-1].copy()
    scale = max(float(np.max(np.abs(w))), 1e-300)
    clusters, start = [], 0
    for i in range(1, len(w)):
        if abs(w[i] - w[i - 1]) > cluster_rtol * scale:
            clusters.append(range(start, i))
            start = i
    clusters.append(range(start, len(w)))
    for idx in clusters:
        idx = list(idx)
        if len(idx) < 2:
            continue
        C = V[:, idx]
        proj = C @ C.T
        order = np.argsort(-np.diag(proj), kind="stable")
        axes = sorted(order[:len(idx)])
        U, _, Wt = np.linalg.svd(proj[:, axes], full_matrices=False)
        V[:, idx] = U @ Wt
    for c in range(V.shape[1]):
        lead = int(np.argmax(np.abs(V[:, c])))
        if V[lead, c] < 0:
            V[:, c] = -V[:, c]
    J = V.T
    return J, np.diag(J @ F @ J.T).copy()


def diagonalize_frame(bundle: FisherBundle, atensor: ATensor = None,
                      jacobian=None) -> DiagonalizedFrame:
    """Transform a Fisher bundle into the F-diagonalizing parametrization.

    ``jacobian`` overrides the canonical choice (it must still
    diagonalize F); this hook exists so that frame-dependence can be
    probed directly.
    """
    _checked_inverse(bundle.fisher)      # fail early when F is singular
    if atensor is None:
        atensor = a_tensor(bundle)
    if jacobian is None:
        J, fdiag = _canonical_diagonalizer(bundle.fisher)
    else:
        J = np.asarray(jacobian, dtype=float)
        Ft = J @ bundle.fisher @ J.T
        off = Ft - np.diag(np.diag(Ft))
        if float(np.max(np.abs(off))) > 1e-9 * max(1.0, float(np.max(np.abs(Ft)))):
            raise ValueError("supplied jacobian does not diagonalize the Fisher matrix")
        fdiag = np.diag(Ft).copy()
    derivs = np.stack(bundle.derivatives)
    tilde_derivs = tuple(np.einsum("k,kxy->xy", J[i], derivs)
                         for i in range(J.shape[0]))
    tilde_scores = bundle.scores @ J.T
    tilde_a = np.einsum("ik,jl,aklxy->aijxy", J, J, atensor.operators)
    L_vectors = tilde_scores / np.sqrt(fdiag)[None, :]
    return DiagonalizedFrame(jacobian=J, tilde_fisher=fdiag,
                             tilde_derivatives=tilde_derivs,
                             tilde_scores=tilde_scores, tilde_a=tilde_a,
                             L_vectors=L_vectors,
                             kept_outcomes=bundle.kept_outcomes)


def _pair_bound_terms(frame, i, j):
    """Certified two-outcome bound and its split (diagnostic) variant."""
    P = frame.tilde_fisher.size
    La, Lb = frame.L_vectors[i], frame.L_vectors[j]
    base = P + 0.5 * (La @ La + Lb @ Lb)
    diff_jj = [frame.tilde_a[i, k, k] - frame.tilde_a[j, k, k] for k in range(P)]
    combined = sum(d / f for d, f in zip(diff_jj, frame.tilde_fisher))
    certified = base + 0.5 * trace_norm(combined)
    split = base + sum(trace_norm(d) / (2.0 * f)
                       for d, f in zip(diff_jj, frame.tilde_fisher))
    return certified, split


def _sigma_lower_from_frame(frame):
    E = len(frame.kept_outcomes)
    if E < 2:
        raise SingularFisherError(
            "sigma_lower needs at least two kept outcomes")
    best, best_split, best_pair = -np.inf, -np.inf, None
    for i in range(E):
        for j in range(i + 1, E):
            certified, split = _pair_bound_terms(frame, i, j)
            if certified > best:
                best = certified
                best_pair = (frame.kept_outcomes[i], frame.kept_outcomes[j])
            if split > best_split:
                best_split = split
    return float(best), best_pair, float(best_split)


def _sigma_upper_from_frame(frame):
    P = frame.tilde_fisher.size
    sigmas = []
    for k in range(P):
        scores_k = frame.tilde_scores[:, k]
        n, m = int(np.argmax(scores_k)), int(np.argmin(scores_k))
        tn = trace_norm(frame.tilde_a[n, k, k] - frame.tilde_a[m, k, k])
        sigmas.append(1.0 + (scores_k[n] ** 2 + scores_k[m] ** 2 + tn)
                      / (2.0 * frame.tilde_fisher[k]))
    return float(np.sum(sigmas)), tuple(float(s) for s in sigmas)


def sigma_lower(model, theta, povm, p_cutoff=None):
    """Certified lower bound on Sigma[M], maximized over outcome pairs.

    Returns ``(Sigma_L, best_pair)`` with outcome indices of the
    maximizing pair (ties broken toward the lowest indices).
    """
    frame = _frame_for(model, theta, povm, p_cutoff)
    value, pair, _ = _sigma_lower_from_frame(frame)
    return value, pair


def sigma_upper(model, theta, povm, p_cutoff=None):
    """Upper bound Sigma_U = sum_j sigma_j and the per-parameter terms."""
    frame = _frame_for(model, theta, povm, p_cutoff)
    return _sigma_upper_from_frame(frame)


def _frame_for(model, theta, povm, p_cutoff=None):
    kwargs = {} if p_cutoff is None else {"p_cutoff": p_cutoff}
    bundle = fisher_bundle(model, theta, povm, **kwargs)
    return diagonalize_frame(bundle)


def x_from_extremal_sum(bundle: FisherBundle, frame: DiagonalizedFrame, noise: Povm):
    """X[M, N] assembled from the convex per-outcome functions f_a.

    With c_a = Tr[rho N_a], delta_{a,j} = 2 Tr[d~_j rho N_a] / sqrt(F~_jj)
    and L_a the normalized score vectors, X = P + sum_a f_a(L_a) where
    f_a(x) = c_a |x|^2 - x . delta_a.  This is a third independent route
    to the scalar susceptibility, used as an internal identity check.
    """
    P = frame.tilde_fisher.size
    atensor_like = ATensor(operators=frame.tilde_a,
                           kept_outcomes=frame.kept_outcomes,
                           n_outcomes=len(bundle.probabilities),
                           dim=bundle.rho.shape[0])
    index_of = {a: i for i, a in enumerate(frame.kept_outcomes)}
    total = 0.0
    sqrt_f = np.sqrt(frame.tilde_fisher)
    for a, element in _aligned_noise_elements(atensor_like, noise):
        i = index_of[a]
        c = float(np.real(np.trace(bundle.rho @ element)))
        delta = np.array([2.0 * float(np.real(np.trace(frame.tilde_derivatives[j] @ element)))
                          / sqrt_f[j] for j in range(P)])
        L = frame.L_vectors[i]
        total += c * float(L @ L) - float(L @ delta)
    return float(P) + total


# ---------------------------------------------------------------------------
# Sampled search over noise POVMs
# ---------------------------------------------------------------------------

def _k_operators(bundle, atensor):
    """K_a = sum_{jk} (F^-1)_{jk} A_{a;jk}; then X = P + sum_a Tr[K_a N_a]."""
    Finv = _checked_inverse(bundle.fisher)
    return np.einsum("jk,ajkxy->axy", Finv, atensor.operators)


def _haar_unitaries(rng, n, dim):
    z = (rng.standard_normal((n, dim, dim))
         + 1j * rng.standard_normal((n, dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    phases = np.einsum("nii->ni", r).copy()
    phases /= np.abs(phases)
    return q * phases[:, None, :]


def _materialize_noise(n_outcomes, dim, assignments):
    elements = [np.zeros((dim, dim), dtype=complex) for _ in range(n_outcomes)]
    for slot, op in assignments:
        elements[slot] = elements[slot] + op
    return Povm(elements, labels=[f"n{i}" for i in range(n_outcomes)])


def noise_search_oracle(model, theta, povm, n_samples, seed, p_cutoff=None):
    """Sampled maximization of X[M, N] over noise POVMs.

    Candidates:

    (a) structured two-outcome noise on every ordered pair of kept
        outcomes, with the first element the projector onto the positive
        part of K_a - K_b (these attain the certified pair bounds, so
        ``best_X >= Sigma_L`` always), and
    (b) ``n_samples`` random two-outcome POVMs {B, I - B} with
        B = U diag(u) U^dag for Haar-random U and uniform u in [0, 1],
        placed on a random pair of kept outcomes.

    The sample budget is split over fixed stripes with independently
    seeded generators, so the result is deterministic for a given seed
    regardless of evaluation order.

    Returns ``(best_X, best_noise)`` where ``best_noise`` is a Povm
    aligned with the target's outcomes (zero elsewhere).
    """
    if n_samples < 0:
        raise ValueError("n_samples must be >= 0")
    kwargs = {} if p_cutoff is None else {"p_cutoff": p_cutoff}
    bundle = fisher_bundle(model, theta, povm, **kwargs)
    atensor = a_tensor(bundle)
    K = _k_operators(bundle, atensor)
    kept = bundle.kept_outcomes
    if len(kept) < 2:
        raise SingularFisherError("the noise search needs at least two kept outcomes")
    E, dim = len(kept), bundle.rho.shape[0]
    P = bundle.n_params
    n_out = len(bundle.probabilities)
    traces = np.real(np.einsum("aii->a", K))
    eye = np.eye(dim, dtype=complex)

    best_x = -np.inf
    best_assign = None
    # (a) structured candidates
    for a in range(E):
        for b in range(E):
            if a == b:
                continue
            w, V = np.linalg.eigh(K[a] - K[b])
            pos = V[:, w > 0]
            B = pos @ pos.conj().T
            x = P + traces[b] + float(np.sum(w[w > 0]))
            if x > best_x:
                best_x = x
                best_assign = [(kept[a], B), (kept[b], eye - B)]

    # (b) random two-outcome samples, deterministic by seed-striding
    if n_samples > 0 and E >= 2:
        stripes = np.array_split(np.arange(n_samples), ORACLE_STRIPES)
        children = np.random.SeedSequence(seed).spawn(ORACLE_STRIPES)
        for stripe, child in zip(stripes, children):
            n = len(stripe)
            if n == 0:
                continue
            rng = np.random.default_rng(child)
            pairs = np.array([rng.choice(E, size=2, replace=False) for _ in range(n)])
            U = _haar_unitaries(rng, n, dim)
            u = rng.uniform(0.0, 1.0, size=(n, dim))
            B = np.einsum("nij,nj,nkj->nik", U, u, U.conj())
            D = K[pairs[:, 0]] - K[pairs[:, 1]]
            xs = P + traces[pairs[:, 1]] + np.real(np.einsum("nij,nji->n", D, B))
            i = int(np.argmax(xs))
            if xs[i] > best_x:
                best_x = float(xs[i])
                a, b = pairs[i]
                best_assign = [(kept[a], B[i]), (kept[b], eye - B[i])]

    return float(best_x), _materialize_noise(n_out, dim, best_assign)


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SusceptibilityReport:
    """Bounds on the measurement-noise susceptibility at one (model, theta, M)."""

    sigma_lower: float
    sigma_upper: float
    per_parameter_sigmas: tuple
    best_pair: tuple
    frame: DiagonalizedFrame
    oracle_best: float = None
    diagnostics: dict = None


def susceptibility_report(model, theta, povm, oracle_samples=0, seed=0,
                          p_cutoff=None):
    """Full susceptibility analysis: bounds, frame, optional sampled search.

    Diagnostics include ``sigma_lower_split`` (the per-parameter
    trace-norm variant of the pair bound) together with a flag when that
    variant exceeds the sampled maximum - evidence that it is not a
    lower bound on Sigma for this instance.
    """
    kwargs = {} if p_cutoff is None else {"p_cutoff": p_cutoff}
    bundle = fisher_bundle(model, theta, povm, **kwargs)
    atensor = a_tensor(bundle)
    frame = diagonalize_frame(bundle, atensor)
    lower, pair, lower_split = _sigma_lower_from_frame(frame)
    upper, sigmas = _sigma_upper_from_frame(frame)
    diagnostics = {
        "sigma_lower_split": lower_split,
        "condition_number_fisher": float(np.linalg.cond(bundle.fisher)),
        "kept_outcomes": bundle.kept_outcomes,
    }
    oracle_best = None
    if oracle_samples > 0:
        oracle_best, _ = noise_search_oracle(model, theta, povm,
                                             oracle_samples, seed, p_cutoff)
        diagnostics["split_exceeds_oracle"] = bool(
            lower_split > oracle_best + 1e-9 * max(1.0, abs(oracle_best)))
    return SusceptibilityReport(sigma_lower=lower, sigma_upper=upper,
                                per_parameter_sigmas=sigmas, best_pair=pair,
                                frame=frame, oracle_best=oracle_best,
                                diagnostics=diagnostics)
