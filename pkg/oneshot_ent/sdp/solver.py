"""Primal-dual interior-point method on the homogeneous self-dual embedding.

Search direction is HKM with Mehrotra predictor-corrector; infeasible problems are detected
through the tau/kappa pair instead of a phase-one solve.
"""

import logging
import re
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from oneshot_ent.models import NumericSettings, SdpSolution, SdpStatus
from oneshot_ent.sdp.problem import CompiledSdp, SdpProblem

logger = logging.getLogger("oneshot-ent")

STEP_FRACTION = 0.95
REDUCED_ACCURACY = 1e3
OPTIMAL_GAP_BOUND = 1e-7
STALL_FEASIBILITY = 10.0
INFEASIBILITY_TOL = 1e-7


@dataclass
class _Iterate:
    X: list[np.ndarray]
    S: list[np.ndarray]
    y: np.ndarray
    tau: float
    kappa: float


def _sym(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


def _inner(left: list[np.ndarray], right: list[np.ndarray]) -> float:
    return float(sum(np.vdot(a, b) for a, b in zip(left, right)))


def _norm(blocks: list[np.ndarray]) -> float:
    return float(np.sqrt(sum(np.vdot(b, b) for b in blocks)))


class _Operator:
    def __init__(self, sdp: CompiledSdp):
        self.sdp = sdp
        self.at = [a.T.tocsr() for a in sdp.a]

    def apply(self, blocks: list[np.ndarray]) -> np.ndarray:
        out = np.zeros(self.sdp.n_constraints)
        for a, block in zip(self.sdp.a, blocks):
            out += a @ block.ravel()
        return out

    def adjoint(self, y: np.ndarray) -> list[np.ndarray]:
        return [_sym((at @ y).reshape(n, n)) for at, n in zip(self.at, self.sdp.sizes)]


def _max_step(Z: np.ndarray, dZ: np.ndarray) -> float:
    chol = linalg.cholesky(Z, lower=True)
    scaled = linalg.solve_triangular(chol, dZ, lower=True)
    scaled = linalg.solve_triangular(chol, scaled.T, lower=True)
    lam = linalg.eigvalsh(_sym(scaled))[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _scalar_step(value: float, delta: float) -> float:
    return np.inf if delta >= 0 else -value / delta


class _SchurSystem:
    def __init__(self, matrix: np.ndarray):
        self.matrix = matrix
        self.factor = None
        scale = max(float(np.max(np.abs(np.diag(matrix)), initial=0.0)), 1.0)
        for shift in (0.0, 1e-14 * scale, 1e-11 * scale, 1e-8 * scale):
            try:
                shifted = matrix + shift * np.eye(matrix.shape[0])
                self.factor = linalg.cho_factor(shifted, lower=True, check_finite=False)
                break
            except linalg.LinAlgError:
                continue
        if self.factor is None:
            logger.debug("Schur complement not positive definite; using least squares")

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self.factor is not None:
            return linalg.cho_solve(self.factor, rhs, check_finite=False)
        return linalg.lstsq(self.matrix, rhs)[0]


def _stalled_status(
    pres: float, dres: float, gap: float, pobj: float, settings: NumericSettings
) -> SdpStatus:
    """Classify an iterate the method could not improve on.

    Optimal only when the gap is within OPTIMAL_GAP_BOUND relative to the primal value; a
    loose iterate is reported as reduced accuracy and anything else stays non-converged.
    """
    scale = 1 + abs(pobj)
    feas = STALL_FEASIBILITY * settings.feas_tol
    if pres <= feas and dres <= feas and gap <= min(settings.gap_tol, OPTIMAL_GAP_BOUND) * scale:
        return SdpStatus.OPTIMAL
    loose = REDUCED_ACCURACY
    if (
        pres <= loose * settings.feas_tol
        and dres <= loose * settings.feas_tol
        and gap <= loose * settings.gap_tol * scale
    ):
        return SdpStatus.REDUCED_ACCURACY
    return SdpStatus.ITERATION_LIMIT


def _hsde(sdp: CompiledSdp, settings: NumericSettings, name: str) -> SdpSolution:
    op = _Operator(sdp)
    b, C = sdp.b, sdp.c
    m = sdp.n_constraints
    nu = sum(sdp.sizes) + 1.0
    norm_b, norm_c = float(np.linalg.norm(b)), _norm(C)

    it = _Iterate(
        X=[np.eye(n) for n in sdp.sizes],
        S=[np.eye(n) for n in sdp.sizes],
        y=np.zeros(m),
        tau=1.0,
        kappa=1.0,
    )
    status = SdpStatus.ITERATION_LIMIT
    pres = dres = gap = np.inf
    pobj = dobj = np.nan
    iteration = 0
    stopped_early = False

    def residuals(state: _Iterate):
        rp = op.apply(state.X) - b * state.tau
        aty = op.adjoint(state.y)
        rd = [c * state.tau - a - s for c, a, s in zip(C, aty, state.S)]
        cx = _inner(C, state.X)
        rg = float(b @ state.y) - cx - state.kappa
        return rp, rd, rg, aty, cx

    for iteration in range(1, settings.max_iterations + 1):
        rp, rd, rg, aty, cx = residuals(it)
        mu = (_inner(it.X, it.S) + it.tau * it.kappa) / nu
        by = float(b @ it.y)
        pobj, dobj = cx / it.tau, by / it.tau
        pres = float(np.linalg.norm(rp)) / it.tau / (1 + norm_b)
        dres = _norm(rd) / it.tau / (1 + norm_c)
        gap = abs(pobj - dobj)

        if (
            pres <= settings.feas_tol
            and dres <= settings.feas_tol
            and gap <= settings.gap_tol * (1 + abs(pobj))
        ):
            status = SdpStatus.OPTIMAL
            break
        tol_inf = max(settings.feas_tol, INFEASIBILITY_TOL)
        if it.kappa > it.tau and by > 0:
            if _norm([a + s for a, s in zip(aty, it.S)]) <= tol_inf * by:
                status = SdpStatus.PRIMAL_INFEASIBLE
                break
        if it.kappa > it.tau and cx < 0:
            if float(np.linalg.norm(op.apply(it.X))) <= tol_inf * (-cx):
                status = SdpStatus.DUAL_INFEASIBLE
                break

        try:
            sinv = [
                _sym(linalg.cho_solve(linalg.cho_factor(s, lower=True), np.eye(s.shape[0])))
                for s in it.S
            ]
            schur = np.zeros((m, m))
            for a, x, si in zip(sdp.a, it.X, sinv):
                if a.nnz == 0:
                    continue
                ak = np.asarray(a @ np.kron(x, si))
                schur += np.asarray(a @ ak.T).T
            system = _SchurSystem(_sym(schur))
            xcs = [x @ c @ si for x, c, si in zip(it.X, C, sinv)]
            u = op.apply(xcs)
            c_cc = float(sum(np.trace(c @ w) for c, w in zip(C, xcs)))
            v2 = system.solve(u + b)

            def direction(eta: float, R: list[np.ndarray], r_tk: float):
                r_prime = [r - eta * x @ d @ si for r, x, d, si in zip(R, it.X, rd, sinv)]
                h1 = -eta * rp - op.apply(r_prime)
                h2 = -eta * rg + _inner(C, r_prime) + r_tk / it.tau
                v1 = system.solve(h1)
                d_tau = (h2 - (b - u) @ v1) / ((b - u) @ v2 + c_cc + it.kappa / it.tau)
                dy = v1 + v2 * d_tau
                aty_d = op.adjoint(dy)
                dS = [c * d_tau - a + eta * d for c, a, d in zip(C, aty_d, rd)]
                dX = [_sym(r - x @ ds @ si) for r, x, ds, si in zip(R, it.X, dS, sinv)]
                d_kappa = (r_tk - it.kappa * d_tau) / it.tau
                return dX, dS, dy, float(d_tau), float(d_kappa)

            def step_length(dX, dS, d_tau, d_kappa) -> float:
                alpha = min(_scalar_step(it.tau, d_tau), _scalar_step(it.kappa, d_kappa))
                for x, dx in zip(it.X, dX):
                    alpha = min(alpha, _max_step(x, dx))
                for s, ds in zip(it.S, dS):
                    alpha = min(alpha, _max_step(s, ds))
                return alpha

            dXa, dSa, _, dta, dka = direction(1.0, [-x for x in it.X], -it.tau * it.kappa)
            alpha_a = min(1.0, step_length(dXa, dSa, dta, dka))
            mu_aff = (
                _inner(
                    [x + alpha_a * dx for x, dx in zip(it.X, dXa)],
                    [s + alpha_a * ds for s, ds in zip(it.S, dSa)],
                )
                + (it.tau + alpha_a * dta) * (it.kappa + alpha_a * dka)
            ) / nu
            sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3

            R = [
                sigma * mu * si - x - _sym(dxa @ dsa @ si)
                for si, x, dxa, dsa in zip(sinv, it.X, dXa, dSa)
            ]
            r_tk = sigma * mu - it.tau * it.kappa - dta * dka
            dX, dS, dy, d_tau, d_kappa = direction(1.0 - sigma, R, r_tk)
            alpha = min(1.0, STEP_FRACTION * step_length(dX, dS, d_tau, d_kappa))
        except (linalg.LinAlgError, ValueError) as e:
            logger.debug(f"SDP '{name}' stopped at iteration {iteration}: {e}")
            stopped_early = True
            break

        it = _Iterate(
            X=[_sym(x + alpha * dx) for x, dx in zip(it.X, dX)],
            S=[_sym(s + alpha * ds) for s, ds in zip(it.S, dS)],
            y=it.y + alpha * dy,
            tau=it.tau + alpha * d_tau,
            kappa=it.kappa + alpha * d_kappa,
        )
        if alpha < 1e-10:
            logger.debug(f"SDP '{name}' stalled at iteration {iteration} (step {alpha:.1e})")
            stopped_early = True
            break

    if status is SdpStatus.ITERATION_LIMIT and stopped_early:
        status = _stalled_status(pres, dres, gap, pobj, settings)
        logger.debug(f"SDP '{name}' stalled with status {status.value} (gap {gap:.1e})")

    sign = -1.0 if sdp.maximize else 1.0
    scale = 1.0 / it.tau if it.tau > 0 else 1.0
    return SdpSolution(
        status=status,
        primal_value=sign * pobj + sdp.offset,
        dual_value=sign * dobj + sdp.offset,
        iterations=iteration,
        primal_residual=pres,
        dual_residual=dres,
        gap=gap,
        name=name,
        primal=[x * scale for x in it.X],
        slack=[s * scale for s in it.S],
        dual=it.y * scale,
    )


def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name).strip("_") or "sdp"


def solve(problem: SdpProblem, settings: Optional[NumericSettings] = None) -> SdpSolution:
    settings = settings or NumericSettings()
    if settings.dump_dir is not None:
        problem.write_sdpa(settings.dump_dir / f"{_slug(problem.name)}.dat-s")

    started = time.perf_counter()
    solution = _hsde(problem.compile(), settings, problem.name)
    solution.accept_reduced = settings.accept_reduced
    logger.debug(
        f"SDP '{problem.name}': {solution.status.value} in {solution.iterations} iterations, "
        f"value {solution.primal_value:.10f}, gap {solution.gap:.1e}, "
        f"{1000 * (time.perf_counter() - started):.1f} ms"
    )
    return solution
