"""Spectral decomposition bookkeeping and pseudo-arclength branch tracing.

Solution branches of -Delta_p u - Delta u - gamma*u^- = lambda*u bifurcate
from (lambda_k^which, 0): for p > 2 out of zero in the original variable, for
1 < p < 2 out of zero in the rescaled variable, which corresponds to
bifurcation from infinity of the original problem. A branch is traced by a
Keller predictor-corrector: the first step leaves the seed along the
half-eigenfunction with lambda frozen, later steps use the secant tangent,
and the corrector is a damped semismooth Newton method on the bordered
system (residual + arclength plane).

The Lyapunov-Schmidt split u = alpha*e_k + v with v orthogonal to e_k, the
spectral cones around +-e_k, and the fixed-point defect built from
T_lambda(u) = M^{-1}(lambda u) - (-Delta)^{-1}(lambda u) live here as well,
as instrumentation for the traced branches.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .config import SolverConfig
from .grid import (Field, Grid, h10_norm, inner_l2, l2_norm, laplacian_solve,
                   laplacian_solve_values)
from .halfeig import gamma_window, split_eigenvalues
from .monotone import SolveReport, SolverError, solve_monotone, solve_monotone_ball
from .quasilinear import (Jacobian, ProblemParams, jacobian_original,
                          jacobian_transformed, original_h10_norm,
                          residual_original, residual_transformed)
from .spectrum import closed_form_eigenvalue, eigenpair

logger = logging.getLogger("fucik_branch.continuation")


@dataclass(frozen=True, eq=False)
class LSDecomposition:
    """Split u = alpha*e_k + v with (e_k, v)_2 = 0."""

    alpha: float
    v: Field


@dataclass(frozen=True)
class ConeParams:
    """Localization window: |lambda - lambda_k^which| < rho, |(e_k,u)_2| > eta*||u||_2."""

    rho: float
    eta: float

    def __post_init__(self) -> None:
        if not (self.rho > 0.0 and self.eta > 0.0):
            raise ValueError("cone parameters must be positive")


@dataclass(frozen=True, eq=False)
class BranchPoint:
    """One accepted continuation point; norms refer to the traced variable.

    For a transformed trace (1 < p < 2) h12_original carries the
    back-transformed ||u||_{1,2}; it is None for p > 2. corrector_tol is the
    effective residual tolerance the corrector met at this point.
    """

    s: float
    lam: float
    u: Field
    alpha: float
    l2: float
    h12: float
    in_cone: bool
    corrector_tol: float
    h12_original: float | None = None


@dataclass(frozen=True)
class MeetsInfinity:
    kind: str = "MeetsInfinity"


@dataclass(frozen=True)
class MeetsTrivial:
    mu: float
    kind: str = "MeetsTrivial"


@dataclass(frozen=True)
class MaxSteps:
    kind: str = "MaxSteps"


@dataclass(frozen=True)
class CorrectorFailure:
    detail: str = ""
    kind: str = "CorrectorFailure"


Termination = MeetsInfinity | MeetsTrivial | MaxSteps | CorrectorFailure


@dataclass(frozen=True)
class BranchSeed:
    """Which bifurcation point to leave from and with which exponent."""

    k: int
    which: int
    gamma: float
    p: float

    def __post_init__(self) -> None:
        if not (isinstance(self.k, int) and self.k >= 1):
            raise ValueError(f"k must be a positive integer, got {self.k}")
        if self.which not in (1, 2):
            raise ValueError(f"which must be 1 or 2, got {self.which}")
        if self.gamma < 0.0:
            raise ValueError("gamma must be nonnegative")
        if not (self.p > 1.0 and self.p != 2.0):
            raise ValueError(f"p must lie in (1,2) or (2,inf), got {self.p}")


@dataclass(frozen=True, eq=False)
class Branch:
    seed: BranchSeed
    points: tuple[BranchPoint, ...]
    termination: Termination
    lambda_seed: float
    eta: float


@dataclass(frozen=True)
class LocalizationReport:
    """Largest radius around the seed inside which every point sits in its cone
    with the correct alpha sign; rho0 = inf when no point violates."""

    rho0: float
    checked: int
    violations: int


def decompose(u: Field, k: int) -> LSDecomposition:
    """Project u onto the k-th eigenvector and its L2 complement."""
    ek = eigenpair(u.grid, k).vector
    alpha = inner_l2(ek, u)
    return LSDecomposition(alpha=alpha, v=u - alpha * ek)


def recompose(alpha: float, v: Field, k: int) -> Field:
    ek = eigenpair(v.grid, k).vector
    return Field(v.grid, alpha * ek.values + v.values)


def cone_test(u: Field, k: int, cone: ConeParams, side: int) -> bool:
    """Membership of u in the open cone around +e_k (side +1) or -e_k (side -1)."""
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    nrm = l2_norm(u)
    if nrm == 0.0:
        raise ValueError("cone test is undefined for the zero field")
    proj = inner_l2(eigenpair(u.grid, k).vector, u)
    return proj > cone.eta * nrm if side == 1 else proj < -cone.eta * nrm


def _project_out(ek_vals: np.ndarray, vals: np.ndarray, h: float) -> np.ndarray:
    return vals - (h * float(np.dot(ek_vals, vals))) * ek_vals


def ls_residual(alpha: float, lam: float, v: Field, params: ProblemParams,
                k: int, config: SolverConfig | None = None
                ) -> tuple[float, Field]:
    """Defects of the reduced fixed-point system at (alpha, lam, v).

    With u = alpha*e_k + v and T(u) = M^{-1}(lam*u) - (-Delta)^{-1}(lam*u),
    returns (scalar defect, complement defect):
        alpha - alpha*lam/lambda_k - (T(u), e_k)_2
        v - P_k(lam*(-Delta)^{-1} v) - P_k(T(u))
    Both vanish exactly at solutions of the full equation. For 1 < p < 2 the
    same defects are formed for the transformed operator on its coercivity
    ball.
    """
    if config is None:
        config = SolverConfig(tol_abs=1e-12, tol_rel=1e-14)
    grid = v.grid
    ek = eigenpair(grid, k)
    u = recompose(alpha, v, k)
    rhs = Field(grid, lam * u.values)
    if params.p > 2.0:
        rep = solve_monotone(rhs, params, config, u0=u)
    else:
        radius = min(1.0, max(0.1, 2.0 * h10_norm(u)))
        rep = solve_monotone_ball(rhs, params, config, radius=radius, u0=u)
    t_vals = rep.solution.values - laplacian_solve_values(grid, rhs.values)
    h = grid.h
    scalar = alpha - alpha * lam / ek.value \
        - h * float(np.dot(t_vals, ek.vector.values))
    av = laplacian_solve_values(grid, lam * v.values)
    dv = v.values - _project_out(ek.vector.values, av, h) \
        - _project_out(ek.vector.values, t_vals, h)
    return scalar, Field(grid, dv)


class _CorrectorFailed(Exception):
    pass


class _TraceProblem:
    """Residual and generalized Jacobian of the traced equation at given lambda."""

    def __init__(self, grid: Grid, p: float, gamma: float, config: SolverConfig):
        self.grid = grid
        self.p = p
        self.gamma = gamma
        self.config = config
        self.transformed = p < 2.0

    def _params(self, lam: float, eps: float = 0.0) -> ProblemParams:
        return ProblemParams(p=self.p, gamma=self.gamma, lam=lam, eps_reg=eps)

    def residual(self, u_vals: np.ndarray, lam: float) -> np.ndarray:
        field = Field(self.grid, u_vals)
        if self.transformed:
            return residual_transformed(field, self._params(lam)).values
        return residual_original(field, self._params(lam)).values

    def jacobian(self, u_vals: np.ndarray, lam: float) -> Jacobian:
        field = Field(self.grid, u_vals)
        eps = 0.0
        if self.transformed:
            ext = np.concatenate(([0.0], u_vals, [0.0]))
            g = np.diff(ext) / self.grid.h
            eps = self.config.eps_reg_scale * (float(np.mean(np.abs(g))) + 1.0)
            return jacobian_transformed(field, self._params(lam, eps))
        return jacobian_original(field, self._params(lam))


def _corrector(prob: _TraceProblem, u0: np.ndarray, lam0: float,
               row_u: np.ndarray, row_lam: float, c0: float,
               config: SolverConfig) -> tuple[np.ndarray, float, int, float, float]:
    """Bordered Newton for F(u, lam) = 0 with <row_u, u>_2 + row_lam*lam = c0."""
    grid = prob.grid
    h = grid.h
    n = grid.n_interior
    u = u0.copy()
    lam = lam0
    for it in range(config.corrector_max_iter):
        r = prob.residual(u, lam)
        c = h * float(np.dot(row_u, u)) + row_lam * lam - c0
        rnorm = math.sqrt(h * float(np.dot(r, r)))
        scale = max(1.0, abs(lam) * math.sqrt(h * float(np.dot(u, u))))
        tol_eff = config.corrector_tol * scale
        if rnorm <= tol_eff and abs(c) <= tol_eff:
            return u, lam, it, rnorm, tol_eff
        jac = prob.jacobian(u, lam)
        a = np.empty((n + 1, n + 1))
        a[:n, :n] = jac.as_matrix()
        a[:n, n] = -u
        a[n, :n] = row_u  # constraint row prescaled by 1/h to keep O(1) entries
        a[n, n] = row_lam / h
        rhs = np.concatenate([-r, [-c / h]])
        try:
            delta = np.linalg.solve(a, rhs)
        except np.linalg.LinAlgError as exc:
            raise _CorrectorFailed(f"singular bordered system: {exc}")
        if not np.all(np.isfinite(delta)):
            raise _CorrectorFailed("non-finite Newton step")
        merit0 = h * float(np.dot(r, r)) + c * c
        t = 1.0
        accepted = False
        for _ in range(config.max_halvings + 1):
            u_try = u + t * delta[:n]
            lam_try = lam + t * delta[n]
            r_try = prob.residual(u_try, lam_try)
            c_try = h * float(np.dot(row_u, u_try)) + row_lam * lam_try - c0
            merit = h * float(np.dot(r_try, r_try)) + c_try * c_try
            if merit <= merit0 * (1.0 - config.armijo * t) ** 2 + 1e-300:
                u, lam = u_try, lam_try
                accepted = True
                break
            t *= 0.5
        if not accepted:
            raise _CorrectorFailed("corrector line search stalled")
    raise _CorrectorFailed(f"no corrector convergence in "
                           f"{config.corrector_max_iter} iterations")


def _trivial_candidates(grid: Grid, gamma: float) -> list[float]:
    """Half-eigenvalues of -u'' - gamma*u^- = lambda*u reachable at desk scale.

    The positive eigenfunction never feels the gamma term, so lambda_1 is
    always in the spectrum, and -e_1 contributes lambda_1 + gamma; higher
    pairs come from the split machinery where gamma is admissible.
    """
    lam1 = closed_form_eigenvalue(grid, 1)
    out = [lam1]
    if gamma > 0.0:
        out.append(lam1 + gamma)
    for j in range(2, min(12, grid.n_interior - 1)):
        if gamma > 0.0 and gamma >= gamma_window(grid, j).gamma_max:
            continue
        pair = split_eigenvalues(grid, j, gamma)
        out.extend([pair.lambda1, pair.lambda2])
    return out


def trace_branch(seed: BranchSeed, grid: Grid | None = None,
                 config: SolverConfig | None = None) -> Branch:
    """Trace the solution branch leaving (lambda_k^which, 0).

    For p > 2 the traced variable is u itself; for 1 < p < 2 it is the
    rescaled variable, and each point additionally reports the
    back-transformed original norm. The trace stops when the L2 norm exceeds
    norm_cap (MeetsInfinity), collapses below zero_cap next to a different
    half-eigenvalue (MeetsTrivial), the step budget runs out (MaxSteps), or
    the corrector fails after the allowed step halvings (CorrectorFailure).
    """
    if grid is None:
        grid = Grid()
    if config is None:
        config = SolverConfig()
    pair = split_eigenvalues(grid, seed.k, seed.gamma)
    lam_star = pair.lambda1 if seed.which == 1 else pair.lambda2
    vdir = pair.v1 if seed.which == 1 else pair.v2
    side = 1 if seed.which == 1 else -1
    ek = eigenpair(grid, seed.k)
    cone = ConeParams(rho=1.0, eta=pair.eta)
    prob = _TraceProblem(grid, seed.p, seed.gamma, config)

    a0 = config.alpha0 * inner_l2(ek.vector, vdir)
    try:
        u, lam, _, _, tol_eff = _corrector(
            prob, config.alpha0 * vdir.values, lam_star,
            ek.vector.values, 0.0, a0, config)
    except _CorrectorFailed as exc:
        raise SolverError(f"seed correction failed for {seed}: {exc}")

    def make_point(s: float, u_vals: np.ndarray, lam_val: float,
                   tol_val: float) -> BranchPoint:
        field = Field(grid, u_vals)
        h12 = h10_norm(field)
        h12_orig = None
        if prob.transformed and h12 > 0.0:
            h12_orig = original_h10_norm(field, seed.p)
        return BranchPoint(
            s=s, lam=lam_val, u=field, alpha=inner_l2(ek.vector, field),
            l2=l2_norm(field), h12=h12,
            in_cone=cone_test(field, seed.k, cone, side),
            corrector_tol=tol_val, h12_original=h12_orig)

    points = [make_point(0.0, u, lam, tol_eff)]
    t_u = vdir.values.copy()
    t_lam = 0.0
    ds = config.ds0
    s = 0.0
    termination: Termination | None = None
    candidates: list[float] | None = None

    while len(points) < config.max_steps and termination is None:
        halved = 0
        step_result = None
        while True:
            pred_u = u + ds * t_u
            pred_lam = lam + ds * t_lam
            c0 = grid.h * float(np.dot(t_u, pred_u)) + t_lam * pred_lam
            try:
                step_result = _corrector(prob, pred_u, pred_lam, t_u, t_lam,
                                         c0, config)
                break
            except _CorrectorFailed as exc:
                halved += 1
                if halved > config.max_halvings:
                    termination = CorrectorFailure(detail=str(exc))
                    break
                ds *= 0.5
        if step_result is None:
            break
        u_new, lam_new, iters, _, tol_eff = step_result
        du = u_new - u
        step_len = math.sqrt(grid.h * float(np.dot(du, du))
                             + (lam_new - lam) ** 2)
        if step_len <= 1e-14:
            termination = CorrectorFailure(detail="corrector stopped advancing")
            break
        s += step_len
        t_u = du / step_len
        t_lam = (lam_new - lam) / step_len
        u, lam = u_new, lam_new
        points.append(make_point(s, u, lam, tol_eff))
        if iters <= 3:
            ds = min(ds * 1.4, config.ds_max)
        elif iters >= config.corrector_max_iter - 3:
            ds = max(ds * 0.6, 1e-12)
        l2u = points[-1].l2
        if l2u > config.norm_cap:
            termination = MeetsInfinity()
        elif l2u < config.zero_cap:
            if candidates is None:
                candidates = _trivial_candidates(grid, seed.gamma)
            for mu in candidates:
                if abs(mu - lam_star) <= config.trivial_match_tol:
                    continue
                if abs(lam - mu) <= config.trivial_match_tol:
                    termination = MeetsTrivial(mu=mu)
                    break
    if termination is None:
        termination = MaxSteps()
    logger.info("branch %s: %d points, termination %s", seed, len(points),
                termination.kind)
    return Branch(seed=seed, points=tuple(points), termination=termination,
                  lambda_seed=lam_star, eta=pair.eta)


def localization_check(branch: Branch) -> LocalizationReport:
    """Empirical localization radius around the branch seed.

    A point violates if it leaves its side's cone or its alpha sign flips;
    rho0 is the distance of the nearest violating point to
    (lambda_k^which, 0) in the (lambda, ||u||_2) metric.
    """
    side = 1 if branch.seed.which == 1 else -1
    rho0 = math.inf
    violations = 0
    for pt in branch.points:
        alpha_ok = pt.alpha > 0.0 if side == 1 else pt.alpha < 0.0
        if pt.in_cone and alpha_ok:
            continue
        violations += 1
        rho0 = min(rho0, math.hypot(pt.lam - branch.lambda_seed, pt.l2))
    return LocalizationReport(rho0=rho0, checked=len(branch.points),
                              violations=violations)


def scaling_slope(branch: Branch, max_points: int = 25) -> float:
    """Log-log slope of |lambda - lambda_seed| against |alpha| near the seed."""
    xs = []
    ys = []
    for pt in branch.points[:max_points]:
        dev = abs(pt.lam - branch.lambda_seed)
        if dev > 1e-13 and abs(pt.alpha) > 0.0:
            xs.append(math.log(abs(pt.alpha)))
            ys.append(math.log(dev))
    if len(xs) < 3:
        return math.nan
    slope = np.polyfit(np.asarray(xs), np.asarray(ys), 1)[0]
    return float(slope)


def newton_at_lambda(u0: Field, params: ProblemParams,
                     config: SolverConfig | None = None) -> Field:
    """Square semismooth Newton for the original equation at frozen lambda.

    Damped on the L2 residual norm with a preconditioned-gradient fallback;
    used to probe regions where only the trivial solution exists.
    """
    if config is None:
        config = SolverConfig()
    grid = u0.grid
    h = grid.h
    u = u0.values.copy()

    def resid(vals: np.ndarray) -> np.ndarray:
        return residual_original(Field(grid, vals), params).values

    r = resid(u)
    for _ in range(config.max_iter):
        rnorm = math.sqrt(h * float(np.dot(r, r)))
        if rnorm <= config.tol_abs:
            return Field(grid, u)
        eps = 0.0
        if params.p < 2.0:
            ext = np.concatenate(([0.0], u, [0.0]))
            g = np.diff(ext) / h
            eps = max(params.eps_reg,
                      config.eps_reg_scale * (float(np.mean(np.abs(g))) + 1.0))
        jac = jacobian_original(Field(grid, u), ProblemParams(
            p=params.p, gamma=params.gamma, lam=params.lam, eps_reg=eps))
        stepped = False
        for d in (_try_solve(jac, r), -laplacian_solve_values(grid, r)):
            if d is None:
                continue
            t = 1.0
            for _ in range(config.max_halvings + 1):
                u_try = u + t * d
                r_try = resid(u_try)
                if math.sqrt(h * float(np.dot(r_try, r_try))) \
                        <= (1.0 - config.armijo * t) * rnorm:
                    u, r = u_try, r_try
                    stepped = True
                    break
                t *= 0.5
            if stepped:
                break
        if not stepped:
            raise SolverError("fixed-lambda Newton stalled "
                              f"(residual {rnorm:.3e})")
    raise SolverError("fixed-lambda Newton did not converge in "
                      f"{config.max_iter} iterations")


def _try_solve(jac: Jacobian, r: np.ndarray) -> np.ndarray | None:
    try:
        d = -jac.solve_values(r)
    except ValueError:
        return None
    return d if np.all(np.isfinite(d)) else None
