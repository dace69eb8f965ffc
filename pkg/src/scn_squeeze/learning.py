"""Sequential variational learning of self-configuring layers.

Layer i is trained by maximizing the homodyne cost of port i over the
2(N-i)+1 parameters of that layer while layers 1..i-1 stay frozen.  At the
optimum the port carries the i-th most anti-squeezed supermode: the cost
reaches (1-p) e^{2 r_i} + p and the learned row matches the i-th supermode
up to sign.  Maximization uses adaptive-moment (Adam) gradient ascent with
either analytic gradients (exact mode) or central finite differences with
common random numbers (sampled mode).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ValidationError
from .gaussian import BlochMessiah, CovarianceMatrix, embed_orthogonal, hs_fidelity
from .homodyne import default_phase_grid, fit_interferogram, sample_interferogram
from .mesh import MeshCircuit, circuit_unitary, layer_from_params, row_jacobian
from .optimize import adam_maximize
from .seeding import rng_from, split_seed

__all__ = [
    "OptimizerConfig",
    "LearningRecord",
    "SampledSource",
    "learn_layer",
    "learn_network",
    "sparse_leakage",
    "iteration_scaling_study",
    "circuit_fidelity",
    "restricted_spectrum",
    "quadrature_rows",
]

INIT_SPREAD = 0.1  # radians around the identity configuration
DEGENERACY_GAP = 1e-6


@dataclass(frozen=True)
class OptimizerConfig:
    """Adaptive-moment ascent settings and convergence control."""

    step_size: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    max_iters: int = 2000
    convergence_window: int = 20
    convergence_rtol: float = 1e-6
    gradient_mode: str = "analytic"  # or "finite_difference"
    fd_step: float = 0.02

    def __post_init__(self):
        if self.step_size <= 0 or self.epsilon <= 0:
            raise ValidationError("step_size and epsilon must be positive")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValidationError("beta1, beta2 must lie in (0, 1)")
        if not (self.max_iters >= self.convergence_window >= 2):
            raise ValidationError("need max_iters >= convergence_window >= 2")
        if self.gradient_mode not in ("analytic", "finite_difference"):
            raise ValidationError(f"unknown gradient_mode {self.gradient_mode!r}")
        if self.fd_step <= 0:
            raise ValidationError("fd_step must be positive")


SAMPLED_DEFAULTS = dict(convergence_rtol=1e-3, convergence_window=50, gradient_mode="finite_difference")


@dataclass(frozen=True)
class LearningRecord:
    """Per-layer training trace."""

    layer_index: int
    cost_history: np.ndarray
    converged_at: int | None
    final_cost: float
    learned_row: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class SampledSource:
    """Homodyne-measurement cost provider with shot noise.

    Evaluating the cost records an interferogram with m samples per phase and
    fits it.  Noise depends deterministically on the evaluation seed, so
    evaluations sharing a seed share their shot noise (common random numbers).
    """

    gamma: CovarianceMatrix
    phases: np.ndarray = None
    m: int = 10_000
    method: str = "chi2"

    def __post_init__(self):
        grid = default_phase_grid() if self.phases is None else np.asarray(self.phases, dtype=float)
        object.__setattr__(self, "phases", grid)

    def cost(self, u_row: np.ndarray, port: int, eval_seed: int) -> float:
        o_rows = _embed_rows(u_row, port, self.gamma.n_modes)
        ifg = sample_interferogram(self.gamma, o_rows, port, self.phases, self.m, eval_seed, method=self.method)
        return fit_interferogram(ifg).a_xx


def quadrature_rows(u_row: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """x- and p-quadrature rows of the orthogonal embedding for one complex row."""
    return (
        np.concatenate([u_row.real, -u_row.imag]),
        np.concatenate([u_row.imag, u_row.real]),
    )


def _embed_rows(u_row: np.ndarray, port: int, n: int) -> np.ndarray:
    o = np.zeros((2 * n, 2 * n))
    o[port - 1], o[port - 1 + n] = quadrature_rows(u_row)
    return o


def _exact_cost_grad(gamma: np.ndarray, u_prev: np.ndarray, layer, n: int, want_grad: bool):
    w, jac = row_jacobian(layer, n)
    u_row = w @ u_prev
    o_x, _ = quadrature_rows(u_row)
    g_vec = gamma @ o_x
    cost = float(o_x @ g_vec)
    if not want_grad:
        return cost, None
    j_u = jac @ u_prev
    do_dp = np.concatenate([j_u.real, -j_u.imag], axis=1)  # (P, 2N)
    return cost, 2.0 * (do_dp @ g_vec)


def restricted_spectrum(gamma: CovarianceMatrix, u_prev: np.ndarray, layer_index: int) -> np.ndarray:
    """Descending Rayleigh-quotient spectrum reachable by layer ``layer_index``.

    The reachable rows span the circuit rows layer_index..N of the frozen
    prefix; the top value is the variational optimum for this layer.
    """
    rows = u_prev[layer_index - 1 :, :]
    cols = [quadrature_rows(r)[0] for r in rows] + [quadrature_rows(1j * r)[0] for r in rows]
    t = np.stack(cols, axis=1)
    return np.linalg.eigvalsh(t.T @ gamma.data @ t)[::-1]


def _optimize_layer(gamma_source, u_prev, layer_index, n, cfg, init_seed):
    rng = rng_from(init_seed)
    n_par = 2 * (n - layer_index) + 1
    params = rng.uniform(-INIT_SPREAD, INIT_SPREAD, size=n_par)

    exact = isinstance(gamma_source, CovarianceMatrix)
    if not exact and cfg.gradient_mode == "analytic":
        raise ParameterError("analytic gradients require an exact covariance source")
    gamma_mat = gamma_source.data if exact else None

    def evaluate(p, eval_seed, want_grad):
        layer = layer_from_params(layer_index, p)
        if exact and cfg.gradient_mode == "analytic":
            return _exact_cost_grad(gamma_mat, u_prev, layer, n, want_grad)
        # cost only; finite-difference gradient assembled by caller
        w, _ = row_jacobian(layer, n)
        u_row = w @ u_prev
        if exact:
            o_x, _ = quadrature_rows(u_row)
            return float(o_x @ gamma_mat @ o_x), None
        return gamma_source.cost(u_row, layer_index, eval_seed), None

    def fun(x, t):
        eval_seed = split_seed(init_seed, t)
        cost_t, grad = evaluate(x, eval_seed, True)
        if grad is None:
            # central differences, common random numbers across the +- probes
            grad = np.empty(n_par)
            for j in range(n_par):
                dp = np.zeros(n_par)
                dp[j] = cfg.fd_step
                c_plus, _ = evaluate(x + dp, eval_seed, False)
                c_minus, _ = evaluate(x - dp, eval_seed, False)
                grad[j] = (c_plus - c_minus) / (2.0 * cfg.fd_step)
        return cost_t, grad

    res = adam_maximize(fun, params, cfg)
    return res.x_best, res.f_best, res.history, res.converged_at


def learn_layer(
    gamma_source,
    circuit: MeshCircuit,
    layer_index: int,
    cfg: OptimizerConfig = OptimizerConfig(),
    init_seed: int = 0,
) -> tuple[MeshCircuit, LearningRecord]:
    """Train layer ``layer_index`` on top of the frozen layers 1..layer_index-1.

    Returns the circuit with the learned layer in place and the training
    record.  On non-convergence one restart with a fresh initialization is
    attempted; persistent failure is reported via converged_at = None.
    """
    n = circuit.n_modes
    gamma = gamma_source if isinstance(gamma_source, CovarianceMatrix) else gamma_source.gamma
    if gamma.n_modes != n:
        raise ParameterError("covariance and circuit mode counts differ")
    if not (1 <= layer_index <= n):
        raise ParameterError(f"layer_index {layer_index} out of range 1..{n}")
    if len(circuit.layers) < layer_index - 1:
        raise ParameterError(
            f"layers 1..{layer_index - 1} must be learned before layer {layer_index}"
        )
    prefix = MeshCircuit(n_modes=n, layers=circuit.layers[: layer_index - 1])
    u_prev = circuit_unitary(prefix)

    if isinstance(gamma_source, CovarianceMatrix):
        spectrum = restricted_spectrum(gamma_source, u_prev, layer_index)
        if len(spectrum) >= 2 and spectrum[0] - spectrum[1] < DEGENERACY_GAP:
            warnings.warn(
                f"top two reachable eigenvalues of layer {layer_index} are degenerate "
                f"(gap {spectrum[0] - spectrum[1]:.2e}); supermode identification is ill-posed",
                stacklevel=2,
            )

    attempts = []
    for restart, seed in enumerate([init_seed, split_seed(init_seed, 1)]):
        result = _optimize_layer(gamma_source, u_prev, layer_index, n, cfg, seed)
        attempts.append(result)
        if result[3] is not None:
            break
    best = max(attempts, key=lambda r: r[1])
    params, final_cost, hist, converged_at = best

    learned = layer_from_params(layer_index, params)
    w, _ = row_jacobian(learned, n)
    record = LearningRecord(
        layer_index=layer_index,
        cost_history=hist,
        converged_at=converged_at,
        final_cost=final_cost,
        learned_row=w @ u_prev,
    )
    return circuit.with_layer(learned), record


def circuit_fidelity(circuit: MeshCircuit, truth: BlochMessiah) -> float:
    """Hilbert-Schmidt fidelity between the circuit embedding and the ground-truth supermodes."""
    o_c = embed_orthogonal(circuit_unitary(circuit)).data
    o = embed_orthogonal(truth.unitary).data
    return hs_fidelity(o_c.T, o)


def learn_network(
    gamma_source,
    n_modes: int,
    n_layers: int,
    cfg: OptimizerConfig = OptimizerConfig(),
    seed: int = 0,
    ground_truth: BlochMessiah | None = None,
) -> tuple[MeshCircuit, list[LearningRecord], list[float]]:
    """Learn layers 1..n_layers sequentially.

    Returns the trained circuit, the per-layer records, and (when a ground
    truth is supplied) the fidelity after each layer.
    """
    if n_layers < 1:
        raise ParameterError("need at least one layer")
    if n_layers > n_modes:
        raise ParameterError("cannot have more layers than modes")
    circuit = MeshCircuit(n_modes=n_modes)
    records: list[LearningRecord] = []
    fidelity_history: list[float] = []
    for i in range(1, n_layers + 1):
        circuit, record = learn_layer(gamma_source, circuit, i, cfg, init_seed=split_seed(seed, i))
        records.append(record)
        if ground_truth is not None:
            fidelity_history.append(circuit_fidelity(circuit, ground_truth))
    return circuit, records, fidelity_history


def sparse_leakage(circuit: MeshCircuit, gamma: CovarianceMatrix) -> float:
    """Largest residual coupling between extracted ports and the unprocessed block."""
    n = gamma.n_modes
    n_layers = len(circuit.layers)
    if n_layers >= n:
        raise ParameterError("leakage is defined for sparse circuits (fewer layers than modes)")
    o_c = embed_orthogonal(circuit_unitary(circuit)).data
    b = o_c @ gamma.data @ o_c.T
    extracted = list(range(n_layers)) + list(range(n, n + n_layers))
    rest = [k for k in range(2 * n) if k not in extracted]
    return float(np.abs(b[np.ix_(extracted, rest)]).max())


def iteration_scaling_study(
    n_list: list[int],
    seeds: int,
    cfg: OptimizerConfig = OptimizerConfig(),
    base_seed: int = 0,
    r_range: tuple[float, float] = (0.1, 1.2),
    min_gap: float = 0.1,
    loss_p: float = 0.1,
) -> list[dict]:
    """Median layer-1 iterations-to-converge versus mode count (exact mode).

    Non-converged runs count at max_iters.  Returns one row per N with
    median and quartiles of the convergence iteration.
    """
    from .gaussian import make_covariance, random_bmd

    rows = []
    for n in n_list:
        # shrink the gap for large N so the constraint stays feasible
        gap = min(min_gap, 0.9 * (r_range[1] - r_range[0]) / n)
        iters = []
        for s in range(seeds):
            bmd_seed = split_seed(base_seed, n, s)
            bm = random_bmd(n, r_range[0], r_range[1], gap, loss_p=loss_p, seed=bmd_seed)
            gamma = make_covariance(bm)
            _, record = learn_layer(
                gamma, MeshCircuit(n_modes=n), 1, cfg, init_seed=split_seed(base_seed, n, s, 1)
            )
            iters.append(record.converged_at if record.converged_at is not None else cfg.max_iters)
        q1, med, q3 = np.percentile(iters, [25, 50, 75])
        rows.append({"n": n, "median_iters": float(med), "q1": float(q1), "q3": float(q3), "seeds": seeds})
    return rows
