"""Augmented-Lagrangian solver for the discriminative block low-rank model.

The model decomposes a pixel matrix X into X = L + E where L is low-rank
within each column block (one block per superpixel) and E collects sparse
variations, while a negative global nuclear-norm term pushes the blocks'
subspaces apart:

    min  sum_i ||L_i||_*  +  lam ||E||_1  -  beta ||L||_*
    s.t. X = L + E

The global term is split off through an auxiliary variable J = L and
linearized at the previous iterate, so every subproblem has a closed form.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import SvdFailure
from .linalg import max_norm, nuclear_norm, nuclear_subgradient, soft_threshold, svt


@dataclass
class DlrrParams:
    """Solver weights and schedule.

    lam weighs the sparse-variation term, beta the global discriminability
    term (beta = 0 reduces to independent per-block robust PCA).  mu starts
    at mu0 and grows by rho each iteration up to mu_max; iteration stops when
    both residual max norms fall below eps.
    """

    lam: float
    beta: float = 1.0
    mu0: float = 1e-4
    rho: float = 1.1
    mu_max: float = 1e12
    eps: float = 1e-6
    max_iter: int = 500

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if self.rho <= 1:
            raise ValueError("rho must exceed 1")
        if not 0 < self.mu0 < self.mu_max:
            raise ValueError("need 0 < mu0 < mu_max")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class BlockPartition:
    """Disjoint column-index blocks covering all columns of the pixel matrix."""

    block_columns: list
    n_cols: int

    def __post_init__(self):
        self.block_columns = [
            np.asarray(cols, dtype=np.intp) for cols in self.block_columns
        ]
        if not self.block_columns:
            raise ValueError("partition needs at least one block")
        if any(cols.size == 0 for cols in self.block_columns):
            raise ValueError("every block must be non-empty")
        merged = np.concatenate(self.block_columns)
        if not np.array_equal(np.sort(merged), np.arange(self.n_cols)):
            raise ValueError("blocks must disjointly cover all columns exactly once")

    @property
    def n_blocks(self):
        return len(self.block_columns)

    @classmethod
    def from_labels(cls, labels):
        """Group columns by their label value (labels must be 0..S-1)."""
        labels = np.asarray(labels).ravel()
        count = int(labels.max()) + 1
        blocks = [np.flatnonzero(labels == i) for i in range(count)]
        return cls(blocks, labels.size)


@dataclass
class SolverState:
    """All iterates of the solver, shaped like X.

    scratch_W (per-block targets of the SVT step) and scratch_D (target of
    the elementwise shrink step) are retained for inspection.
    """

    L: np.ndarray
    E: np.ndarray
    J: np.ndarray
    Y1: np.ndarray
    Y2: np.ndarray
    mu: float
    iteration: int = 0
    scratch_W: list = field(default_factory=list)
    scratch_D: np.ndarray = None

    @classmethod
    def zeros(cls, shape, mu):
        z = lambda: np.zeros(shape, dtype=np.float64)
        return cls(L=z(), E=z(), J=z(), Y1=z(), Y2=z(), mu=mu)


@dataclass
class SolveTrace:
    """Per-iteration diagnostics: residual max norms, the augmented
    Lagrangian value, and the penalty weight in effect that iteration."""

    r1: list = field(default_factory=list)
    r2: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    mu: list = field(default_factory=list)

    @property
    def iterations(self):
        return len(self.r1)

    def append(self, r1, r2, objective, mu):
        self.r1.append(float(r1))
        self.r2.append(float(r2))
        self.objective.append(float(objective))
        self.mu.append(float(mu))


def update_L_blocks(state, x, partition):
    """Closed-form block update: each block's restored part is the singular
    value thresholding of W_i = ((X_i - E_i + Y1_i/mu) + (J_i + Y2_i/mu)) / 2
    at level 1/(2 mu).  Blocks touch disjoint columns, so update order is
    irrelevant."""
    mu = state.mu
    state.scratch_W = []
    for k, cols in enumerate(partition.block_columns):
        w = 0.5 * (
            (x[:, cols] - state.E[:, cols] + state.Y1[:, cols] / mu)
            + (state.J[:, cols] + state.Y2[:, cols] / mu)
        )
        try:
            state.L[:, cols] = svt(w, 1.0 / (2.0 * mu))
        except SvdFailure as exc:
            raise SvdFailure(f"block {k}: {exc}") from exc
        state.scratch_W.append(w)
    return state.L


def update_E(state, x, lam):
    """Elementwise shrink of D = X - L + Y1/mu at level lam/mu."""
    d = x - state.L + state.Y1 / state.mu
    state.scratch_D = d
    state.E = soft_threshold(d, lam / state.mu)
    return state.E


def update_J(state, beta):
    """Linearized update of the auxiliary variable: the concave global term
    is replaced by its tangent at the previous iteration's J, giving
    J = (beta/mu) * subgradient(J_prev) - Y2/mu + L."""
    if beta == 0.0:
        state.J = state.L - state.Y2 / state.mu
    else:
        grad = nuclear_subgradient(state.J)
        state.J = (beta / state.mu) * grad - state.Y2 / state.mu + state.L
    return state.J


def update_multipliers(state, x, rho, mu_max):
    """Dual ascent on both constraints, then grow the penalty weight."""
    state.Y1 = state.Y1 + state.mu * (x - state.L - state.E)
    state.Y2 = state.Y2 + state.mu * (state.J - state.L)
    state.mu = min(mu_max, rho * state.mu)
    return state.Y1, state.Y2, state.mu


def check_convergence(state, x, eps):
    """True iff both constraint residuals are within eps in max norm."""
    return (
        max_norm(x - state.L - state.E) <= eps
        and max_norm(state.L - state.J) <= eps
    )


def lagrangian_value(state, x, partition, params):
    """Augmented Lagrangian of the split model at the current iterate,
    evaluated with the multipliers and penalty weight in effect:
    model terms + <Y1, X-L-E> + <Y2, J-L> + (mu/2)(||X-L-E||_F^2 + ||J-L||_F^2).

    (The multiplier terms are written in inner-product form; completing the
    square instead would only add ||Y||_F^2 / (2 mu), a constant in the
    optimization variables that obscures convergence of the logged value.)"""
    val = sum(nuclear_norm(state.L[:, cols]) for cols in partition.block_columns)
    val += params.lam * float(np.abs(state.E).sum())
    if params.beta != 0.0:
        val -= params.beta * nuclear_norm(state.J)
    r1 = x - state.L - state.E
    r2 = state.J - state.L
    val += float(np.sum(state.Y1 * r1)) + float(np.sum(state.Y2 * r2))
    val += 0.5 * state.mu * (float(np.sum(r1 * r1)) + float(np.sum(r2 * r2)))
    return float(val)


def solve(x, partition, params, callback=None, log_objective=True):
    """Run the alternating closed-form updates from the all-zeros start.

    Per iteration: all block L_i updates, then E, then J, then the
    multipliers and mu, then the convergence test.  Returns
    (L, E, trace, converged); when max_iter is exhausted the last iterate is
    returned with converged=False.  `callback(state)` fires after each
    iteration; `log_objective=False` records NaN objectives and skips the
    extra SVDs they cost.
    """
    x = np.asarray(x, dtype=np.float64)
    if not np.isfinite(x).all():
        raise ValueError("x must be finite")
    if partition.n_cols != x.shape[1]:
        raise ValueError("partition does not match the matrix's column count")

    state = SolverState.zeros(x.shape, mu=params.mu0)
    trace = SolveTrace()
    converged = False
    for it in range(params.max_iter):
        state.iteration = it + 1
        update_L_blocks(state, x, partition)
        update_E(state, x, params.lam)
        update_J(state, params.beta)
        obj = lagrangian_value(state, x, partition, params) if log_objective else np.nan
        mu_used = state.mu
        update_multipliers(state, x, params.rho, params.mu_max)
        r1 = max_norm(x - state.L - state.E)
        r2 = max_norm(state.J - state.L)
        trace.append(r1, r2, obj, mu_used)
        if callback is not None:
            callback(state)
        if r1 <= params.eps and r2 <= params.eps:
            converged = True
            break
    return state.L, state.E, trace, converged
