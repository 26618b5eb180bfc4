"""Bundled semidefinite solvers and their standard problem form.

Problems are stated in a linear-matrix-inequality primal form:

    maximize    objective . y
    subject to  eq_matrix @ y == eq_rhs
                const_k + sum_i y_i F_k[i]  is PSD   for every block k

with each block's variable dependence given sparsely as coordinate
triplets (row, col, var, coeff).  ``SdpProblem.to_json`` /
``from_json`` round-trip this form so external solvers can be swapped
in behind the same interface: a backend is anything callable as
``backend(problem) -> SdpSolution``.

Two deterministic backends are bundled:

* :class:`InteriorPointSdpSolver` (default) -- a log-det barrier
  path-following method.  A phase-I Newton run finds a strictly
  feasible point by shrinking an identity shift; phase II follows the
  central path with equality-constrained Newton steps, exploiting that
  variable-disjoint blocks (one per adversary branch) make the barrier
  Hessian block diagonal.  The duality gap of a centered iterate is
  bounded by mu * total block dimension, which drives termination.

* :class:`FirstOrderSdpSolver` -- an over-relaxed ADMM splitting whose
  two proximal steps are projection onto the PSD cone (by
  eigendecomposition) and onto the affine set (by a prefactorized
  least-squares KKT solve).  Adequate for small well-conditioned
  problems; guessing-probability relaxations near the maximal Bell
  value condition it badly, which is why it is not the default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, Infeasible, MaxIterations


@dataclass(frozen=True)
class SdpBlock:
    """One PSD block: const + sum_i y_i * coeff where entries (rows[j],
    cols[j]) pick up coeffs[j] * y[vars[j]].  Symmetry is the caller's
    responsibility (supply both triangles)."""

    dim: int
    const: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    vars: np.ndarray
    coeffs: np.ndarray

    def materialize(self, y: np.ndarray) -> np.ndarray:
        out = self.const.copy()
        np.add.at(out, (self.rows, self.cols), self.coeffs * y[self.vars])
        return out


@dataclass(frozen=True)
class SdpProblem:
    num_vars: int
    objective: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    blocks: tuple

    def __post_init__(self):
        if self.eq_matrix.shape != (len(self.eq_rhs), self.num_vars):
            raise DimensionMismatch("equality system shape mismatch")
        if self.objective.shape != (self.num_vars,):
            raise DimensionMismatch("objective length mismatch")

    @property
    def total_block_dim(self) -> int:
        return sum(b.dim for b in self.blocks)

    def to_json(self) -> str:
        return json.dumps({
            "num_vars": self.num_vars,
            "objective": self.objective.tolist(),
            "eq_matrix": self.eq_matrix.tolist(),
            "eq_rhs": self.eq_rhs.tolist(),
            "blocks": [{
                "dim": b.dim,
                "const": b.const.tolist(),
                "rows": b.rows.tolist(),
                "cols": b.cols.tolist(),
                "vars": b.vars.tolist(),
                "coeffs": b.coeffs.tolist(),
            } for b in self.blocks],
        })

    @classmethod
    def from_json(cls, text: str) -> "SdpProblem":
        d = json.loads(text)
        blocks = tuple(
            SdpBlock(
                dim=int(b["dim"]),
                const=np.array(b["const"], dtype=float),
                rows=np.array(b["rows"], dtype=np.intp),
                cols=np.array(b["cols"], dtype=np.intp),
                vars=np.array(b["vars"], dtype=np.intp),
                coeffs=np.array(b["coeffs"], dtype=float),
            ) for b in d["blocks"])
        return cls(
            num_vars=int(d["num_vars"]),
            objective=np.array(d["objective"], dtype=float),
            eq_matrix=np.array(d["eq_matrix"], dtype=float),
            eq_rhs=np.array(d["eq_rhs"], dtype=float),
            blocks=blocks,
        )


@dataclass(frozen=True)
class SdpSolution:
    objective: float
    primal_residual: float
    dual_gap_estimate: float
    iterations: int
    y: np.ndarray = field(repr=False, default=None)


# ---------------------------------------------------------------------------
# Interior-point backend (default)
# ---------------------------------------------------------------------------

class _BarrierMachine:
    """Gradient/Hessian machinery for sum_k log det M_k(y)."""

    def __init__(self, blocks):
        self.blocks = blocks
        # Per block: pair index arrays for the Hessian scatter.
        self._pairs = []
        for b in blocks:
            local_vars, local_idx = np.unique(b.vars, return_inverse=True)
            ne = len(b.rows)
            pair_flat = (local_idx[:, None] * len(local_vars) + local_idx[None, :]).ravel()
            coeff_outer = (b.coeffs[:, None] * b.coeffs[None, :]).ravel()
            self._pairs.append((local_vars, pair_flat, coeff_outer))

    def materialize(self, y):
        return [b.materialize(y) for b in self.blocks]

    @staticmethod
    def try_cholesky(mats):
        try:
            return [np.linalg.cholesky(m) for m in mats]
        except np.linalg.LinAlgError:
            return None

    def grad_logdet(self, num_vars, inverses):
        g = np.zeros(num_vars)
        for b, w in zip(self.blocks, inverses):
            np.add.at(g, b.vars, b.coeffs * w[b.rows, b.cols])
        return g

    def hessian_blocks(self, inverses):
        """Per-block (local_vars, local Hessian of -logdet, PSD)."""
        out = []
        for b, w, (local_vars, pair_flat, coeff_outer) in zip(
                self.blocks, inverses, self._pairs):
            q = w[np.ix_(b.cols, b.rows)]
            weights = (coeff_outer * (q * q.T).ravel())
            nh = len(local_vars)
            h = np.bincount(pair_flat, weights=weights, minlength=nh * nh)
            out.append((local_vars, h.reshape(nh, nh)))
        return out


def _group_components(num_vars, hessian_blocks):
    """Union variable groups of blocks that share variables."""
    parent = list(range(num_vars))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for local_vars, _ in hessian_blocks:
        root = find(int(local_vars[0]))
        for v in local_vars[1:]:
            rv = find(int(v))
            if rv != root:
                parent[rv] = root
    groups = {}
    for v in range(num_vars):
        groups.setdefault(find(v), []).append(v)
    return [np.array(g, dtype=np.intp) for g in groups.values()]


class _KktSolver:
    """Solve [H E^T; E 0] with H assembled from per-block pieces.

    H is factored component-wise (components = variable groups not
    linked through any PSD block), then the small equality system is
    eliminated through its Schur complement.
    """

    def __init__(self, num_vars, eq):
        self.num_vars = num_vars
        self.eq = eq

    def factor(self, hessian_blocks) -> bool:
        """Factor H; returns False when numerically exhausted."""
        comps = _group_components(self.num_vars, hessian_blocks)
        h_comp = {}
        pos_of = np.empty(self.num_vars, dtype=np.intp)
        comp_of = np.empty(self.num_vars, dtype=np.intp)
        for ci, comp in enumerate(comps):
            pos_of[comp] = np.arange(len(comp))
            comp_of[comp] = ci
            h_comp[ci] = np.zeros((len(comp), len(comp)))
        for local_vars, h in hessian_blocks:
            ci = comp_of[local_vars[0]]
            idx = pos_of[local_vars]
            h_comp[ci][np.ix_(idx, idx)] += h
        chols = {}
        for ci, comp in enumerate(comps):
            h = h_comp[ci]
            scale = max(float(np.max(np.diag(h))), 1e-300)
            chols[ci] = None
            for jitter in (1e-14, 1e-12, 1e-9, 1e-6):
                try:
                    chols[ci] = np.linalg.cholesky(
                        h + jitter * scale * np.eye(len(comp)))
                    break
                except np.linalg.LinAlgError:
                    continue
            if chols[ci] is None:
                return False
        self._comps = comps
        self._chols = chols
        return True

    def _h_solve(self, rhs):
        out = np.empty_like(rhs)
        for ci, comp in enumerate(self._comps):
            L = self._chols[ci]
            z = np.linalg.solve(L, rhs[comp])
            out[comp] = np.linalg.solve(L.T, z)
        return out

    def solve(self, grad, target):
        """Direction with H dy + E^T nu = grad and E dy = target."""
        hinv_g = self._h_solve(grad)
        if self.eq.shape[0] == 0:
            return hinv_g, np.zeros(0)
        hinv_et = np.stack([self._h_solve(row) for row in self.eq], axis=1)
        schur = self.eq @ hinv_et
        rhs = self.eq @ hinv_g - target
        nu = np.linalg.solve(schur, rhs)
        return hinv_g - hinv_et @ nu, nu


class InteriorPointSdpSolver:
    """Deterministic log-det barrier path-following solver."""

    def __init__(self, gap_tol: float = 1e-9, max_newton: int = 600,
                 mu_shrink: float = 0.2, feas_margin: float = 1e-8):
        self.gap_tol = gap_tol
        self.max_newton = max_newton
        self.mu_shrink = mu_shrink
        self.feas_margin = feas_margin

    def __call__(self, problem: SdpProblem) -> SdpSolution:
        return self.solve(problem)

    def solve(self, problem: SdpProblem) -> SdpSolution:
        c = problem.objective.astype(float)
        c_scale = max(np.linalg.norm(c), 1.0)
        eq = problem.eq_matrix.astype(float).copy()
        rhs = problem.eq_rhs.astype(float).copy()
        if len(rhs):
            row_norms = np.linalg.norm(eq, axis=1)
            if np.any(row_norms == 0.0):
                raise Infeasible("zero equality row")
            eq /= row_norms[:, None]
            rhs /= row_norms

        y0, steps1 = self._phase1(problem, eq, rhs)
        y, steps2, mu, nu, last_grad = self._phase2(problem, c / c_scale, eq, rhs, y0)
        iterations = steps1 + steps2

        primal = float(np.linalg.norm(eq @ y - rhs)) if len(rhs) else 0.0
        gap = float(mu * problem.total_block_dim * c_scale)
        return SdpSolution(
            objective=float(c @ y),
            primal_residual=primal,
            dual_gap_estimate=gap,
            iterations=iterations,
            y=y,
        )

    # phase I: maximize -s subject to M(y) + s I >= 0, eq constraints
    def _phase1(self, problem, eq, rhs):
        nv = problem.num_vars
        blocks = []
        for b in problem.blocks:
            diag = np.arange(b.dim, dtype=np.intp)
            blocks.append(SdpBlock(
                dim=b.dim, const=b.const,
                rows=np.concatenate([b.rows, diag]),
                cols=np.concatenate([b.cols, diag]),
                vars=np.concatenate([b.vars, np.full(b.dim, nv, dtype=np.intp)]),
                coeffs=np.concatenate([b.coeffs, np.ones(b.dim)]),
            ))
        machine = _BarrierMachine(tuple(blocks))
        eq_ext = np.hstack([eq, np.zeros((eq.shape[0], 1))])
        if len(rhs):
            y_feas, *_ = np.linalg.lstsq(eq, rhs, rcond=None)
        else:
            y_feas = np.zeros(nv)
        mats = [b.materialize(y_feas) for b in problem.blocks]
        lam_min = min(float(np.linalg.eigvalsh(0.5 * (m + m.T))[0]) for m in mats)
        if lam_min > self.feas_margin:
            return y_feas, 0
        y = np.append(y_feas, -lam_min + 1.0)
        c_ext = np.zeros(nv + 1)
        c_ext[nv] = -1.0

        def stop(yv):
            return yv[nv] < -self.feas_margin

        y, steps, mu, _, _ = self._barrier_loop(
            machine, c_ext, eq_ext, rhs, y, stop_early=stop, gap_tol=self.gap_tol)
        if not stop(y):
            raise Infeasible(
                f"no strictly feasible point found (slack {y[nv]:.3e})")
        return y[:nv], steps

    def _phase2(self, problem, c_n, eq, rhs, y0):
        machine = _BarrierMachine(problem.blocks)
        return self._barrier_loop(machine, c_n, eq, rhs, y0.copy(),
                                  stop_early=None, gap_tol=self.gap_tol)

    def _barrier_loop(self, machine, c_n, eq, rhs, y, stop_early, gap_tol):
        total_dim = sum(b.dim for b in machine.blocks)
        kkt = _KktSolver(len(y), eq)
        mu = max(1.0, abs(float(c_n @ y)))
        steps = 0
        nu = np.zeros(eq.shape[0])
        grad = None
        mu_floor = gap_tol / max(total_dim, 1)
        exhausted = False
        while steps < self.max_newton and not exhausted:
            # inner Newton iterations at this mu
            for _ in range(50):
                if stop_early is not None and stop_early(y):
                    return y, steps, mu, nu, grad
                mats = machine.materialize(y)
                chols = machine.try_cholesky(mats)
                if chols is None:
                    raise Infeasible("iterate left the cone; problem badly scaled")
                inverses = [_chol_inverse(L) for L in chols]
                grad = c_n + mu * machine.grad_logdet(len(y), inverses)
                hblocks = [(lv, mu * h) for lv, h in machine.hessian_blocks(inverses)]
                if not kkt.factor(hblocks):
                    # Numeric precision exhausted (degenerate optimum);
                    # the current iterate is centered at this mu.
                    exhausted = True
                    break
                target = (rhs - eq @ y) if len(rhs) else np.zeros(0)
                dy, nu = kkt.solve(grad, target)
                steps += 1
                decrement = float(grad @ dy - (eq.T @ nu) @ dy) if len(rhs) else float(grad @ dy)
                if decrement < 0:
                    decrement = 0.0
                t = self._line_search(machine, c_n, mu, y, dy, mats)
                if t == 0.0:
                    exhausted = True
                    break
                y = y + t * dy
                if decrement <= 0.1 * mu or steps >= self.max_newton:
                    break
            if mu <= mu_floor or exhausted:
                break
            mu = max(mu * self.mu_shrink, mu_floor * 0.999)
        if steps >= self.max_newton and mu > mu_floor:
            raise MaxIterations(
                f"barrier solver hit {steps} Newton steps (mu={mu:.2e})",
                solution=SdpSolution(
                    objective=float(c_n @ y), primal_residual=float("nan"),
                    dual_gap_estimate=float(mu * total_dim),
                    iterations=steps, y=y))
        return y, steps, mu, nu, grad

    @staticmethod
    def _line_search(machine, c_n, mu, y, dy, mats_at_y):
        def phi(yv):
            mats = machine.materialize(yv)
            chols = machine.try_cholesky(mats)
            if chols is None:
                return None
            logdet = sum(2.0 * float(np.sum(np.log(np.diag(L)))) for L in chols)
            return float(c_n @ yv) + mu * logdet

        base = phi(y)
        t = 1.0
        for _ in range(60):
            cand = phi(y + t * dy)
            if cand is not None and cand >= base - 1e-12:
                return t
            t *= 0.5
        return 0.0


def _chol_inverse(L: np.ndarray) -> np.ndarray:
    inv_l = np.linalg.solve(L, np.eye(L.shape[0]))
    return inv_l.T @ inv_l


# ---------------------------------------------------------------------------
# First-order splitting backend
# ---------------------------------------------------------------------------

ADMM_TOL = 1e-7
ADMM_MAX_ITER = 200_000
OVER_RELAXATION = 1.7
RHO_CHECK_EVERY = 100
RHO_RATIO = 10.0
RHO_SCALE = 2.0


def _psd_project(m: np.ndarray) -> np.ndarray:
    m = 0.5 * (m + m.T)
    w, v = np.linalg.eigh(m)
    if w[0] >= 0.0:
        return m
    pos = w > 0.0
    if not np.any(pos):
        return np.zeros_like(m)
    vp = v[:, pos]
    return (vp * w[pos]) @ vp.T


class FirstOrderSdpSolver:
    """Over-relaxed ADMM splitting between the PSD cone and the affine set."""

    def __init__(self, tol: float = ADMM_TOL, max_iterations: int = ADMM_MAX_ITER,
                 rho: float = 1.0):
        self.tol = tol
        self.max_iterations = max_iterations
        self.rho0 = rho

    def __call__(self, problem: SdpProblem) -> SdpSolution:
        return self.solve(problem)

    def solve(self, problem: SdpProblem) -> SdpSolution:
        m = problem.num_vars
        blocks = problem.blocks
        c = problem.objective.astype(float)
        c_scale = max(np.linalg.norm(c), 1.0)
        c_n = c / c_scale

        eq = problem.eq_matrix.astype(float).copy()
        rhs = problem.eq_rhs.astype(float).copy()
        row_norms = np.ones(len(rhs))
        if len(rhs):
            row_norms = np.linalg.norm(eq, axis=1)
            if np.any(row_norms == 0.0):
                raise Infeasible("zero equality row")
            eq /= row_norms[:, None]
            rhs /= row_norms

        diag = np.zeros(m)
        for b in blocks:
            np.add.at(diag, b.vars, b.coeffs ** 2)
        diag[diag == 0.0] = 1.0
        dinv = 1.0 / diag
        if len(rhs):
            kkt = eq @ (dinv[:, None] * eq.T)
            kkt_chol = np.linalg.cholesky(kkt + 1e-14 * np.eye(len(rhs)))

        rho = self.rho0
        y = np.zeros(m)
        zs = [_psd_project(b.materialize(y)) for b in blocks]
        us = [np.zeros((b.dim, b.dim)) for b in blocks]
        nu = np.zeros(len(rhs))
        prim = dual = np.inf
        it = 0
        for it in range(1, self.max_iterations + 1):
            g = c_n.copy()
            for b, z, u in zip(blocks, zs, us):
                q = z - u - b.const
                np.add.at(g, b.vars, rho * b.coeffs * q[b.rows, b.cols])
            if len(rhs):
                t = eq @ (dinv * g) - rho * rhs
                nu = np.linalg.solve(kkt_chol.T, np.linalg.solve(kkt_chol, t))
                y = dinv * (g - eq.T @ nu) / rho
            else:
                y = dinv * g / rho
            ms = [b.materialize(y) for b in blocks]
            zs_old = zs
            zs = []
            for b, mmat, z_old, u in zip(blocks, ms, zs_old, us):
                w = OVER_RELAXATION * mmat + (1.0 - OVER_RELAXATION) * z_old
                z_new = _psd_project(w + u)
                u += w - z_new
                zs.append(z_new)
            if it % 25 == 0 or it == self.max_iterations:
                prim_num = np.sqrt(sum(np.sum((mm - z) ** 2) for mm, z in zip(ms, zs)))
                prim_den = 1.0 + np.sqrt(sum(np.sum(mm ** 2) for mm in ms))
                prim = prim_num / prim_den
                dz = np.zeros(m)
                for b, z_new, z_old in zip(blocks, zs, zs_old):
                    dmat = z_new - z_old
                    np.add.at(dz, b.vars, b.coeffs * dmat[b.rows, b.cols])
                dual = rho * np.linalg.norm(dz) / (1.0 + np.linalg.norm(c_n))
                if prim < self.tol and dual < self.tol:
                    break
                if it % RHO_CHECK_EVERY == 0:
                    if prim > RHO_RATIO * dual:
                        rho *= RHO_SCALE
                        us = [u / RHO_SCALE for u in us]
                    elif dual > RHO_RATIO * prim:
                        rho /= RHO_SCALE
                        us = [u * RHO_SCALE for u in us]

        objective = float(c @ y)
        dual_obj = float(nu @ rhs) if len(rhs) else 0.0
        for b, u in zip(blocks, us):
            dual_obj += float(np.sum(-rho * u * b.const))
        solution = SdpSolution(
            objective=objective,
            primal_residual=float(prim),
            dual_gap_estimate=abs(c_scale * dual_obj - objective),
            iterations=it,
            y=y,
        )
        if prim > self.tol or dual > self.tol:
            raise MaxIterations(
                f"no convergence in {it} iterations "
                f"(primal {prim:.2e}, dual {dual:.2e})", solution=solution)
        return solution


def solve(problem: SdpProblem, backend=None, **options) -> SdpSolution:
    """Solve with the given backend (default: bundled interior point)."""
    if backend is None:
        backend = InteriorPointSdpSolver(**options)
    return backend(problem)
