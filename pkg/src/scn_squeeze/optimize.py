"""Generic adaptive-moment (Adam) ascent with plateau annealing.

Shared by layer learning and cavity inverse design.  The step size is halved
whenever the best value stagnates over the convergence window; convergence
is declared once stagnation persists at the smallest step.  The best iterate
seen is returned, not the last one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["AdamResult", "adam_maximize"]

STEP_DECAY_FLOOR = 2.0**-8


@dataclass(frozen=True)
class AdamResult:
    x_best: np.ndarray
    f_best: float
    history: np.ndarray
    converged_at: int | None


def adam_maximize(fun: Callable[[np.ndarray, int], tuple[float, np.ndarray]], x0: np.ndarray, cfg) -> AdamResult:
    """Maximize fun(x, iteration) -> (value, gradient) starting from x0.

    ``cfg`` is a learning.OptimizerConfig (step_size, beta1, beta2, epsilon,
    max_iters, convergence_window, convergence_rtol).
    """
    x = np.array(x0, dtype=float)
    m1 = np.zeros_like(x)
    m2 = np.zeros_like(x)
    step = cfg.step_size
    min_step = cfg.step_size * STEP_DECAY_FLOOR
    best_f = -np.inf
    best_x = x.copy()
    hist: list[float] = []
    best_hist: list[float] = []
    converged_at = None
    next_check = cfg.convergence_window

    for t in range(1, cfg.max_iters + 1):
        f, grad = fun(x, t)
        hist.append(f)
        if f > best_f:
            best_f = f
            best_x = x.copy()
        best_hist.append(best_f)

        m1 = cfg.beta1 * m1 + (1 - cfg.beta1) * grad
        m2 = cfg.beta2 * m2 + (1 - cfg.beta2) * grad**2
        m_hat = m1 / (1 - cfg.beta1**t)
        v_hat = m2 / (1 - cfg.beta2**t)
        x = x + step * m_hat / (np.sqrt(v_hat) + cfg.epsilon)

        if t >= next_check:
            gain = best_hist[-1] - best_hist[t - cfg.convergence_window]
            if gain <= cfg.convergence_rtol * abs(best_hist[-1]):
                if step > min_step:
                    step *= 0.5  # stagnated: anneal before declaring convergence
                    next_check = t + cfg.convergence_window
                else:
                    converged_at = t
                    break
    return AdamResult(x_best=best_x, f_best=best_f, history=np.array(hist), converged_at=converged_at)
