"""Benchmark problem families with analytic gradients and paired oracles.

Two structured families ship here: compositions f = h(g(x)) of an outer
convex increasing function with a smooth gradient-dominated inner function
(covering f = ||x||_2^{2p}), and regression objectives f = ||Ax - b||_{2p}^{2p}
(covering f = ||x||_{2p}^{2p} via A = I, b = 0).  Both come with the
structure constants their oracles need, plus a scalar quartic toy problem.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import GradientOracle, Lfso, Vector, as_vector
from .errors import (AssumptionWarning, NoConvergenceWarning,
                     ShapeMismatchError, ZeroResidualError)
from .oracles import composition_lfso, ipow, lp_regression_lfso

SPECTRAL_REL_TOL = 1e-12
SPECTRAL_MAX_ITERS = 10_000


@dataclass(frozen=True)
class CompositionProblem:
    """f = h(g(x)) with g smooth (constant l_g) and gradient-dominated
    (constant mu_g), h increasing and convex with non-decreasing h''.

    ``p_tail`` records the small-t growth exponent of h' (h'(t) ~ t^p_tail);
    it is descriptive metadata, 0 for a linear outer function.
    """

    g: GradientOracle
    l_g: float
    mu_g: float
    h: Callable[[float], float]
    h_prime: Callable[[float], float]
    h_double_prime: Callable[[float], float]
    p_tail: int

    def __post_init__(self) -> None:
        if not (self.l_g > 0 and self.mu_g > 0):
            raise ValueError("l_g and mu_g must be positive")
        if self.mu_g > self.l_g:
            raise ValueError(f"mu_g ({self.mu_g}) cannot exceed l_g ({self.l_g})")
        if self.p_tail < 0:
            raise ValueError(f"p_tail must be >= 0, got {self.p_tail}")

    def objective(self) -> GradientOracle:
        """The composed objective with grad f = h'(g(x)) grad g(x)."""
        g = self.g
        h = self.h
        h_prime = self.h_prime
        return GradientOracle(
            dim=g.dim,
            eval=lambda x: float(h(float(g.eval(x)))),
            grad=lambda x: float(h_prime(float(g.eval(x)))) * g.grad(x),
        )


@dataclass(frozen=True, eq=False)
class LpRegressionProblem:
    """f(x) = ||Ax - b||_{2p}^{2p} with cached structure constants."""

    a: np.ndarray
    b: Vector
    p: int
    spec_norm: float
    max_row_norm: float
    cond: float

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def d(self) -> int:
        return self.a.shape[1]

    @property
    def theory_ok(self) -> bool:
        """Conditioning requirement for the Q-linear residual guarantee:
        full rank, n <= d, and cond(A)^4 < n / (n - 1)."""
        if self.n > self.d or not np.isfinite(self.cond):
            return False
        if self.n == 1:
            return True
        return self.cond ** 4 < self.n / (self.n - 1)

    def residual(self, x: Vector) -> Vector:
        return self.a @ x - self.b

    def objective(self) -> GradientOracle:
        a, b, p = self.a, self.b, int(self.p)
        two_p = 2 * p
        bound_coef = two_p * float(self.spec_norm) * float(np.sqrt(self.n))

        def value(x: Vector) -> float:
            return float(np.sum(ipow(a @ x - b, two_p)))

        def gradient(x: Vector) -> Vector:
            return two_p * (a.T @ ipow(a @ x - b, two_p - 1))

        def grad_norm_bound(x: Vector) -> float:
            res_inf = float(np.max(np.abs(a @ x - b)))
            return bound_coef * ipow(res_inf, two_p - 1)

        return GradientOracle(dim=self.d, eval=value, grad=gradient,
                              grad_norm_bound=grad_norm_bound)


class QuarticProblem:
    """Scalar f(x) = x^4 with the hand-derived oracle 24 x^2 + 24 R^2."""

    dim = 1

    def objective(self) -> GradientOracle:
        return GradientOracle(
            dim=1,
            eval=lambda x: float(ipow(float(x[0]), 4)),
            grad=lambda x: np.array([4.0 * ipow(float(x[0]), 3)]),
        )

    def lfso(self) -> Lfso:
        return Lfso(eval=lambda x, r: 24.0 * float(x[0]) ** 2 + 24.0 * float(r) ** 2)


def make_norm_power(d: int, p: int):
    """Problem f(x) = ||x||_2^{2p} as the composition of g = ||x||_2^2
    (l_g = mu_g = 2) with h(t) = t^p, paired with its oracle.
    """
    if d < 1 or p < 1:
        raise ValueError(f"need d >= 1 and p >= 1, got d={d}, p={p}")
    p = int(p)
    g = GradientOracle(dim=int(d),
                       eval=lambda x: float(x @ x),
                       grad=lambda x: 2.0 * x)
    if p == 1:
        h_double_prime = lambda t: 0.0
    else:
        h_double_prime = lambda t: p * (p - 1) * ipow(float(t), p - 2)
    problem = CompositionProblem(
        g=g, l_g=2.0, mu_g=2.0,
        h=lambda t: ipow(float(t), p),
        h_prime=lambda t: p * ipow(float(t), p - 1),
        h_double_prime=h_double_prime,
        p_tail=p - 1,
    )
    return problem, composition_lfso(problem)


def make_lp_regression(a: np.ndarray, b, p: int, theory_mode: bool = False):
    """Problem f(x) = ||Ax - b||_{2p}^{2p} paired with its oracle.

    Structure constants (||A||_2, max row norm, condition number) are
    computed once here and cached on the problem.  ``theory_mode`` warns if
    the conditioning requirement for the Q-linear guarantee fails; the
    solver still runs outside it.
    """
    a = np.asarray(a, dtype=np.float64)
    b = as_vector(b)
    if a.ndim != 2:
        raise ShapeMismatchError(f"matrix must be 2-D, got shape {a.shape}")
    if a.shape[0] != b.size:
        raise ShapeMismatchError(
            f"matrix has {a.shape[0]} rows but b has length {b.size}")
    if int(p) < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    problem = LpRegressionProblem(
        a=a, b=b, p=int(p),
        spec_norm=spectral_norm(a),
        max_row_norm=float(np.max(np.linalg.norm(a, axis=1))),
        cond=condition_number(a),
    )
    if theory_mode and not problem.theory_ok:
        warnings.warn(
            f"cond(A)^4 = {problem.cond ** 4:.6g} is not below "
            f"n/(n-1) = {problem.n / max(problem.n - 1, 1):.6g}; "
            "the Q-linear residual guarantee does not apply",
            AssumptionWarning, stacklevel=2)
    return problem, lp_regression_lfso(problem)


def _power_iteration_top(mult: Callable[[Vector], Vector], m: int,
                         rel_tol: float, max_iters: int):
    """Largest eigenvalue of a PSD operator given by ``mult``."""
    rng = np.random.default_rng(0)
    v = rng.standard_normal(m)
    v /= np.linalg.norm(v)
    lam_prev = 0.0
    for _ in range(max_iters):
        w = mult(v)
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0, True
        v = w / nw
        lam = float(v @ mult(v))
        if abs(lam - lam_prev) <= rel_tol * max(abs(lam), 1e-300):
            return lam, True
        lam_prev = lam
    return lam_prev, False


def spectral_norm(a: np.ndarray, rel_tol: float = SPECTRAL_REL_TOL,
                  max_iters: int = SPECTRAL_MAX_ITERS) -> float:
    """||A||_2 by power iteration on the smaller Gram matrix.

    Warns (and returns the best estimate) if the iteration hits its cap
    without the Rayleigh quotient settling.
    """
    a = np.asarray(a, dtype=np.float64)
    gram = a @ a.T if a.shape[0] <= a.shape[1] else a.T @ a
    lam, converged = _power_iteration_top(
        lambda v: gram @ v, gram.shape[0], rel_tol, max_iters)
    if not converged:
        warnings.warn(
            f"power iteration did not settle within {max_iters} iterations",
            NoConvergenceWarning, stacklevel=2)
    return float(np.sqrt(max(lam, 0.0)))


def condition_number(a: np.ndarray, rel_tol: float = SPECTRAL_REL_TOL,
                     max_iters: int = SPECTRAL_MAX_ITERS) -> float:
    """2-norm condition number sigma_max / sigma_min.

    The smallest singular value comes from power iteration on the inverse
    of the smaller Gram matrix, applied through a dense solve.  Returns
    inf for rank-deficient (numerically singular) matrices.
    """
    a = np.asarray(a, dtype=np.float64)
    sigma_max = spectral_norm(a, rel_tol, max_iters)
    if sigma_max == 0.0:
        return float("inf")
    gram = a @ a.T if a.shape[0] <= a.shape[1] else a.T @ a
    try:
        inv_lam, converged = _power_iteration_top(
            lambda v: np.linalg.solve(gram, v), gram.shape[0],
            rel_tol, max_iters)
    except np.linalg.LinAlgError:
        return float("inf")
    if not converged:
        warnings.warn(
            f"inverse power iteration did not settle within {max_iters} "
            "iterations", NoConvergenceWarning, stacklevel=2)
    if inv_lam <= 0.0:
        return float("inf")
    sigma_min = float(np.sqrt(1.0 / inv_lam))
    return sigma_max / sigma_min


def regression_constants(problem: LpRegressionProblem, eta: float):
    """Constants (c1, c2) of the closed-form regression iteration.

    With R_k = ||Ax_k - b||_inf and the gradient-norm bound in place of the
    exact norm, the inflated radius is c1 * ||Ax_k - b||_inf and the oracle
    value collapses to 2p * c2 * ||Ax_k - b||_inf^{2p-2}.  For p = 1, c1 = 1
    and c2 = ||A||_2^2 by convention.
    """
    p = int(problem.p)
    norm_a = float(problem.spec_norm)
    if p == 1:
        return 1.0, norm_a ** 2
    row_pow = ipow(float(problem.max_row_norm), 2 * p - 2)
    two_pow = float(2 ** (2 * p - 3))
    denom = (2 * p - 1) * norm_a * two_pow * (1.0 + row_pow)
    c1 = max(1.0, float(eta) * np.sqrt(problem.n) / denom)
    c2 = (2 * p - 1) * norm_a ** 2 * two_pow * (1.0 + row_pow * c1)
    return float(c1), float(c2)


def residual_iterate(problem: LpRegressionProblem, r: Vector,
                     eta: float) -> Vector:
    """One step of the residual-space form of the regression iteration:

        r_next = r - eta / (c2 ||r||_inf^{2p-2}) * A A^T r^{2p-1}.

    Must agree with mapping the x-space step through x -> Ax - b.
    """
    r = as_vector(r)
    if r.size != problem.n:
        raise ShapeMismatchError(
            f"residual has length {r.size}, expected {problem.n}")
    res_inf = float(np.max(np.abs(r)))
    if res_inf == 0.0:
        raise ZeroResidualError("residual is zero; already optimal")
    p = int(problem.p)
    _, c2 = regression_constants(problem, eta)
    scale = float(eta) / (c2 * ipow(res_inf, 2 * p - 2))
    return r - scale * (problem.a @ (problem.a.T @ ipow(r, 2 * p - 1)))


def load_regression_data(path):
    """Read (A, b) from plain text: first line "n d", then n rows of d
    floats, then b on one final line."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty data file")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError(f"{path}: first line must be 'n d', got {lines[0]!r}")
    n, d = int(header[0]), int(header[1])
    if len(lines) != n + 2:
        raise ValueError(
            f"{path}: expected {n} matrix rows plus b, found {len(lines) - 1} lines")
    rows = []
    for i, ln in enumerate(lines[1:n + 1], start=2):
        vals = [float(tok) for tok in ln.split()]
        if len(vals) != d:
            raise ValueError(f"{path}:{i}: expected {d} values, got {len(vals)}")
        rows.append(vals)
    b_vals = [float(tok) for tok in lines[n + 1].split()]
    if len(b_vals) != n:
        raise ValueError(
            f"{path}: b must have {n} values, got {len(b_vals)}")
    return np.array(rows, dtype=np.float64), np.array(b_vals, dtype=np.float64)
