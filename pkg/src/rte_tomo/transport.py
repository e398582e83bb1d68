"""Discrete transport: free streaming with absorption, scattering, traces.

The stationary problem is theta . grad u + sigma u - K u = J f in the outer
disk with zero inflow, where J broadcasts a source over directions and K
integrates against a scattering kernel.  Everything is discretized on a
pixel raster times a uniform direction grid.

The free-streaming inverse is a product-trapezoid march along rotated
coordinate frames.  Every linear primitive here carries an exact transpose
(gathers become scatters, the march recurrence reverses), so measurement
operators built from them have machine-precision adjoint pairings.

Boundary traces re-integrate the transport source along the exit chord with
the same attenuated quadrature used by the ray transform; a field produced
by a transport solve remembers its source for this purpose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._interp import BilinearGather
from .coefficients import AbsorptionField, ScatteringKernel, trig_basis
from .geometry import unit_vector

TWO_PI = 2.0 * math.pi

# Refuse the fixed-point solve when the scattering spectral radius estimate
# is above 1 minus this margin.
CONTRACTION_MARGIN = 1e-3


class NonConvergenceError(RuntimeError):
    """Raised when the scattering fixed point cannot be trusted to converge."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    residual_history: tuple
    spectral_radius_estimate: float
    converged: bool

    @property
    def scatter_terms(self):
        """Number of scattering applications folded into the solution."""
        return max(self.iterations - 1, 0)


class BoundaryGrid:
    """Uniform sample layout on outgoing boundary phase space.

    Boundary points at n_bdry uniform angles of the outer circle, paired
    with n_theta uniform directions.  The product measure weight per sample
    is |theta . nu| ds dtheta, zero on incoming pairs.
    """

    def __init__(self, geom, n_bdry, n_theta):
        self.geom = geom
        self.n_bdry = int(n_bdry)
        self.n_theta = int(n_theta)
        self.angles = TWO_PI * np.arange(self.n_bdry) / self.n_bdry
        self.points = geom.radius_outer * unit_vector(self.angles)
        self.theta_angles = TWO_PI * np.arange(self.n_theta) / self.n_theta
        self.theta_vecs = unit_vector(self.theta_angles)
        nu = self.points / geom.radius_outer
        self.normal_dot = nu @ self.theta_vecs.T          # (n_bdry, n_theta)
        self.outgoing = self.normal_dot > 0.0
        self.ds = TWO_PI * geom.radius_outer / self.n_bdry
        self.dtheta = TWO_PI / self.n_theta
        self.weights = np.abs(self.normal_dot)
        self.measure = np.where(self.outgoing, self.normal_dot, 0.0) * self.ds * self.dtheta


@dataclass
class BoundaryData:
    """Values on a BoundaryGrid, zero on incoming pairs."""

    bgrid: BoundaryGrid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.bgrid.n_bdry, self.bgrid.n_theta):
            raise ValueError("boundary value shape does not match the grid")
        self.values = np.where(self.bgrid.outgoing, self.values, 0.0)

    def dot(self, other):
        """Inner product in the outgoing boundary measure."""
        return float(np.sum(self.values * other.values * self.bgrid.measure))

    def norm(self):
        return math.sqrt(max(self.dot(self), 0.0))


@dataclass
class PhaseSpaceField:
    """Field u(x, theta) on raster pixels times the direction grid.

    ``source_f`` and ``source_scatter`` record, when known, the transport
    source whose free-streaming integral produced this field; boundary
    traces reuse them for an exit-chord quadrature instead of extrapolating
    raster values.
    """

    grid: object
    theta_angles: np.ndarray
    values: np.ndarray                # (n_theta, ny, nx)
    source_f: object = None           # raster or analytic phantom
    source_scatter: np.ndarray = None

    def __post_init__(self):
        n_theta = len(self.theta_angles)
        if self.values.shape != (n_theta, self.grid.ny, self.grid.nx):
            raise ValueError("phase-space value shape does not match grids")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("phase-space field has non-finite entries")

    @property
    def n_theta(self):
        return len(self.theta_angles)

    def norm(self):
        w = TWO_PI / self.n_theta * self.grid.pixel_area
        return math.sqrt(w * float(np.sum(self.values**2)))


def phase_norm(values, grid):
    """L2 norm over pixels times directions, values (n_theta, N, B) or similar."""
    n_theta = values.shape[0]
    w = TWO_PI / n_theta * grid.pixel_area
    return np.sqrt(w * np.sum(values**2, axis=tuple(range(values.ndim - 1))))


def _phantom_circles(phantom):
    if phantom is None or not hasattr(phantom, "jump_circles"):
        return []
    return list(phantom.jump_circles())


class TransportSolver:
    """Shared engine for the transport solve and its boundary measurements."""

    def __init__(self, geom, grid, sigma=None, kernel=None, n_theta=64,
                 n_bdry=256, h_ray=None, tol=1e-10, max_iter=200):
        if n_theta < 4:
            raise ValueError("n_theta must be at least 4")
        self.geom = geom
        self.grid = grid
        self.sigma = sigma if sigma is not None else AbsorptionField.zero(grid)
        self.kernel = kernel if kernel is not None else ScatteringKernel.zero(grid)
        if self.sigma.grid != grid or self.kernel.grid != grid:
            raise ValueError("coefficient grids do not match the solver grid")
        self.n_theta = int(n_theta)
        self.h_ray = h_ray if h_ray is not None else geom.radius_outer / 256.0
        self.tol = float(tol)
        self.max_iter = int(max_iter)
        self.theta_angles = TWO_PI * np.arange(self.n_theta) / self.n_theta
        self.theta_vecs = unit_vector(self.theta_angles)
        self.w_theta = TWO_PI / self.n_theta
        self.bgrid = BoundaryGrid(geom, n_bdry, self.n_theta)
        self._h_march = grid.hx
        self._mask_flat = grid.disk_mask(geom.radius_outer).reshape(-1).astype(float)
        self._omega_flat = grid.disk_mask(geom.radius_inner).reshape(-1)
        self._rot = None
        self._march_A = None
        self._k_tables = None
        self._rho = None
        self._chi_cache = {}

    # -- per-direction machinery ------------------------------------------

    def _build_rotations(self):
        grid = self.grid
        pts = grid.points_flat()
        to_list, back_list, sig_list = [], [], []
        for q in range(self.n_theta):
            th = self.theta_vecs[q]
            perp = np.array([-th[1], th[0]])
            X, Y = np.meshgrid(grid.xs, grid.ys)
            rot_pts = X[..., None] * th + Y[..., None] * perp
            to_list.append(BilinearGather.at_points(grid, rot_pts.reshape(-1, 2)).as_sparse())
            back_pts = np.stack([pts @ th, pts @ perp], axis=-1)
            back_list.append(BilinearGather.at_points(grid, back_pts).as_sparse())
            sig_list.append(self.sigma.sample(rot_pts, float(self.theta_angles[q])))
        self._rot = (to_list, back_list)
        h2 = 0.5 * self._h_march
        self._march_A = [np.exp(-h2 * (s[:, :-1] + s[:, 1:])) for s in sig_list]

    def _rotations(self):
        if self._rot is None:
            self._build_rotations()
        return self._rot

    def _k_matrices(self):
        if self._k_tables is None:
            keys = []
            for _, kappa in self.kernel.modes:
                for m in kappa.modes:
                    key = (m.order, m.phase)
                    if key not in keys:
                        keys.append(key)
            M = max(len(keys), 1)
            J = max(len(self.kernel.modes), 1)
            trig = np.zeros((M, self.n_theta))
            for i, (order, phase) in enumerate(keys):
                trig[i] = trig_basis(order, phase, self.theta_angles)
            ka = np.zeros((J, M, self.grid.n_pixels))
            theta_mat = np.zeros((J, self.n_theta))
            for j, (theta_poly, kappa) in enumerate(self.kernel.modes):
                theta_mat[j] = theta_poly.eval(self.theta_angles)
                for m in kappa.modes:
                    i = keys.index((m.order, m.phase))
                    ka[j, i] += m.raster.reshape(-1)
            self._k_tables = (trig, ka, theta_mat)
        return self._k_tables

    # -- linear primitives on (n_theta, N, B) arrays -----------------------

    def j_apply(self, f_flat):
        """Broadcast a pixel source over directions; f_flat is (N, B)."""
        return np.broadcast_to(f_flat, (self.n_theta,) + f_flat.shape).copy()

    def j_transpose(self, values):
        return values.sum(axis=0)

    def k_apply(self, values):
        if self.kernel.is_zero:
            return np.zeros_like(values)
        trig, ka, theta_mat = self._k_matrices()
        moments = self.w_theta * np.einsum("mq,qnb->mnb", trig, values)
        integrals = np.einsum("jmn,mnb->jnb", ka, moments)
        return np.einsum("jq,jnb->qnb", theta_mat, integrals)

    def k_transpose(self, values):
        if self.kernel.is_zero:
            return np.zeros_like(values)
        trig, ka, theta_mat = self._k_matrices()
        integrals = np.einsum("jq,qnb->jnb", theta_mat, values)
        moments = np.einsum("jmn,jnb->mnb", ka, integrals)
        return self.w_theta * np.einsum("mq,mnb->qnb", trig, moments)

    def _march(self, g_rot):
        ny, nx = self.grid.ny, self.grid.nx
        h2 = 0.5 * self._h_march
        u = np.zeros_like(g_rot)
        return u, h2, nx

    def t1_apply(self, values):
        """Free-streaming solve with absorption: u = T1^{-1} g, g = values."""
        ny, nx = self.grid.ny, self.grid.nx
        N = self.grid.n_pixels
        B = values.shape[2]
        to_list, back_list = self._rotations()
        out = np.empty_like(values)
        h2 = 0.5 * self._h_march
        for q in range(self.n_theta):
            g_rot = (to_list[q] @ values[q]).reshape(ny, nx, B)
            A = self._march_A[q]
            u = np.zeros_like(g_rot)
            for i in range(1, nx):
                Ai = A[:, i - 1, None]
                u[:, i] = Ai * (u[:, i - 1] + h2 * g_rot[:, i - 1]) + h2 * g_rot[:, i]
            back = back_list[q] @ u.reshape(N, B)
            out[q] = self._mask_flat[:, None] * back
        return out

    def t1_transpose(self, values):
        ny, nx = self.grid.ny, self.grid.nx
        N = self.grid.n_pixels
        B = values.shape[2]
        to_list, back_list = self._rotations()
        out = np.empty_like(values)
        h2 = 0.5 * self._h_march
        for q in range(self.n_theta):
            v = self._mask_flat[:, None] * values[q]
            v_rot = (back_list[q].T @ v).reshape(ny, nx, B)
            A = self._march_A[q]
            gbar = np.zeros_like(v_rot)
            c = np.zeros((ny, B))
            for i in range(nx - 1, 0, -1):
                c = c + v_rot[:, i]
                Ai = A[:, i - 1, None]
                gbar[:, i] += h2 * c
                gbar[:, i - 1] += h2 * Ai * c
                c = Ai * c
            out[q] = to_list[q].T @ gbar.reshape(N, B)
        return out

    # -- boundary trace -----------------------------------------------------

    def _chord_cells(self, q, circles):
        """Attenuated quadrature cells for all chords of direction q.

        Nodes sit on a lattice anchored at each exit point with step h_ray,
        refined at jump circles of an analytic source, then closed at the
        entry point.  Returns (outgoing indices, cell weights, midpoint
        gather, midpoint coordinates).
        """
        bg = self.bgrid
        out_idx = np.nonzero(bg.outgoing[:, q])[0]
        z = bg.points[out_idx]
        L = 2.0 * self.geom.radius_outer * bg.normal_dot[out_idx, q]
        th = self.theta_vecs[q]
        h = self.h_ray
        n_full = int(math.floor(L.max() / h + 1e-12))
        lattice = h * np.arange(n_full + 1)
        cols = [np.minimum(lattice[None, :], L[:, None]), L[:, None]]
        for cx, cy, r in circles:
            o = z - np.array([cx, cy])
            b = o @ th
            c = np.sum(o * o, axis=1) - r * r
            disc = b * b - c
            root = np.sqrt(np.maximum(disc, 0.0))
            for t in (-b - root, -b + root):
                back = -t
                ok = (disc > 0.0) & (back > 0.0) & (back < L)
                cols.append(np.where(ok, back, L)[:, None])
        nodes = np.sort(np.concatenate(cols, axis=1), axis=1)
        ang = float(self.theta_angles[q])
        positions = z[:, None, :] - nodes[..., None] * th
        delta = np.diff(nodes, axis=1)
        if self.sigma.is_zero:
            weights = delta
        else:
            sig = self.sigma.sample(positions, ang)
            seg = 0.5 * delta * (sig[:, :-1] + sig[:, 1:])
            G = np.concatenate([np.zeros((len(z), 1)), np.cumsum(seg, axis=1)], axis=1)
            E = np.exp(-G)
            weights = 0.5 * delta * (E[:, :-1] + E[:, 1:])
        mids = z[:, None, :] - (nodes[:, :-1] + 0.5 * delta)[..., None] * th
        gather = BilinearGather.at_points(self.grid, mids.reshape(-1, 2))
        return out_idx, weights, gather, mids

    def trace_phase(self, scatter, f_part):
        """Exit-chord quadrature of the transport source.

        scatter: (n_theta, N, B) raster source or None; f_part: (N, B)
        raster or an analytic phantom broadcast over directions.  Returns
        boundary values (n_bdry, n_theta, B).
        """
        analytic = f_part is not None and not isinstance(f_part, np.ndarray)
        circles = _phantom_circles(f_part) if analytic else []
        B = scatter.shape[2] if scatter is not None else (
            1 if analytic else f_part.shape[1])
        bg = self.bgrid
        out = np.zeros((bg.n_bdry, self.n_theta, B))
        for q in range(self.n_theta):
            out_idx, weights, gather, mids = self._chord_cells(q, circles)
            n_c, n_cells = weights.shape
            vals = np.zeros((n_c * n_cells, B))
            if analytic:
                vals += np.asarray(f_part(mids), dtype=float).reshape(-1, 1)
            elif f_part is not None:
                vals += gather.apply(f_part)
            if scatter is not None:
                vals += gather.apply(scatter[q])
            cellw = (weights.reshape(-1, 1) * vals).reshape(n_c, n_cells, B)
            out[out_idx, q] = cellw.sum(axis=1)
        return out

    def trace_transpose(self, cot):
        """Exact transpose of trace_phase on full phase-space sources."""
        N = self.grid.n_pixels
        B = cot.shape[2]
        out = np.zeros((self.n_theta, N, B))
        for q in range(self.n_theta):
            out_idx, weights, gather, _ = self._chord_cells(q, [])
            n_c, n_cells = weights.shape
            flat = (weights[..., None] * cot[out_idx, q][:, None, :]).reshape(-1, B)
            out[q] = gather.apply_transpose(flat)
        return out

    def chi_values(self, spec):
        """Cutoff evaluated on the boundary grid, cached per cutoff."""
        if spec not in self._chi_cache:
            from .geometry import cutoff_boundary_values
            bg = self.bgrid
            self._chi_cache[spec] = cutoff_boundary_values(
                spec, bg.angles[:, None], bg.normal_dot)
        return self._chi_cache[spec]

    # -- spectral estimate and fixed point ----------------------------------

    def spectral_radius(self, steps=30, seed=0):
        """Power-iteration estimate of the scattering contraction rate.

        Runs on the square of (K T1^{-1}) and returns the square root of the
        final growth ratio.
        """
        if self._rho is not None:
            return self._rho
        if self.kernel.is_zero:
            self._rho = 0.0
            return 0.0
        rng = np.random.default_rng(seed)
        v = rng.standard_normal((self.n_theta, self.grid.n_pixels, 1))
        v /= phase_norm(v, self.grid)
        ratio = 0.0
        for _ in range(steps):
            w = self.k_apply(self.t1_apply(self.k_apply(self.t1_apply(v))))
            n = float(phase_norm(w, self.grid)[0])
            if n == 0.0:
                self._rho = 0.0
                return 0.0
            ratio = n
            v = w / n
        self._rho = math.sqrt(ratio)
        return self._rho

    def require_contraction(self):
        rho = self.spectral_radius()
        if rho >= 1.0 - CONTRACTION_MARGIN:
            report = SolveReport(iterations=0, residual_history=(),
                                 spectral_radius_estimate=rho, converged=False)
            raise NonConvergenceError(
                f"scattering spectral radius estimate {rho:.6f} is not "
                f"safely below 1; refusing the fixed-point solve", report)
        return rho

    def _f_flat(self, f, phantom):
        from .phantoms import rasterize
        if phantom is not None:
            raster = rasterize(phantom, self.grid, self.geom)
        else:
            raster = np.asarray(f, dtype=float)
            if raster.shape != (self.grid.ny, self.grid.nx):
                raise ValueError("source raster shape does not match the grid")
            outside = raster.reshape(-1)[~self._omega_flat]
            if np.any(outside != 0.0):
                raise ValueError("source must vanish outside the inner disk")
        return raster.reshape(-1, 1)

    def solve(self, f=None, phantom=None):
        """Source iteration for u = T1^{-1}(K u + J f).

        Returns (PhaseSpaceField, SolveReport).  Refuses to iterate when the
        spectral radius estimate is not safely below one; raises
        NonConvergenceError carrying the report if max_iter is exhausted.
        """
        f_flat = self._f_flat(f, phantom)
        jf = self.j_apply(f_flat)
        if self.kernel.is_zero:
            u = self.t1_apply(jf)
            report = SolveReport(iterations=1, residual_history=(),
                                 spectral_radius_estimate=0.0, converged=True)
            return self._make_field(u, phantom if phantom is not None else f_flat,
                                    None), report
        rho = self.require_contraction()
        u = self.t1_apply(jf)
        scale = float(phase_norm(u, self.grid)[0])
        if scale == 0.0:
            report = SolveReport(iterations=1, residual_history=(),
                                 spectral_radius_estimate=rho, converged=True)
            return self._make_field(u, phantom if phantom is not None else f_flat,
                                    None), report
        history = []
        scatter = None
        for it in range(2, self.max_iter + 1):
            scatter = self.k_apply(u)
            g = jf + scatter
            u_next = self.t1_apply(g)
            res = float(phase_norm(u_next - u, self.grid)[0])
            res /= max(float(phase_norm(u_next, self.grid)[0]), 1e-300)
            history.append(res)
            u = u_next
            if res < self.tol:
                report = SolveReport(iterations=it, residual_history=tuple(history),
                                     spectral_radius_estimate=rho, converged=True)
                return self._make_field(u, phantom if phantom is not None else f_flat,
                                        scatter), report
        report = SolveReport(iterations=self.max_iter, residual_history=tuple(history),
                             spectral_radius_estimate=rho, converged=False)
        raise NonConvergenceError(
            f"fixed point did not reach tolerance {self.tol:g} in "
            f"{self.max_iter} iterations", report)

    def _make_field(self, values, source_f, scatter):
        if isinstance(source_f, np.ndarray):
            source_f = source_f.reshape(self.grid.ny, self.grid.nx)
        return PhaseSpaceField(
            grid=self.grid,
            theta_angles=self.theta_angles,
            values=values[..., 0].reshape(self.n_theta, self.grid.ny, self.grid.nx),
            source_f=source_f,
            source_scatter=scatter[..., 0] if scatter is not None else None,
        )

    # -- measurement operator ------------------------------------------------

    def measurement(self, spec, f=None, phantom=None):
        """Partial boundary measurement chi * (trace of the solved field)."""
        field, report = self.solve(f=f, phantom=phantom)
        scatter = None
        if field.source_scatter is not None:
            scatter = field.source_scatter[..., None]
        src = field.source_f
        if isinstance(src, np.ndarray):
            src = src.reshape(-1, 1)
        b = self.trace_phase(scatter, src)[..., 0]
        values = self.chi_values(spec) * b
        return BoundaryData(bgrid=self.bgrid, values=values), report

    def xv_apply(self, f_flat, spec, n_terms):
        """chi * trace of sum_{j<=n_terms} (K T1^{-1})^j J f, fixed length."""
        jf = self.j_apply(f_flat)
        acc = jf.copy()
        y = jf
        for _ in range(n_terms):
            y = self.k_apply(self.t1_apply(y))
            acc += y
        b = self.trace_phase(acc, None)
        return self.chi_values(spec)[..., None] * b

    def xv_apply_auto(self, f_flat, spec):
        """Like xv_apply but chooses the series length from the tolerance."""
        self.require_contraction()
        jf = self.j_apply(f_flat)
        acc = jf.copy()
        y = jf
        n_terms = 0
        scale = np.maximum(phase_norm(jf, self.grid), 1e-300)
        if self.kernel.is_zero or float(scale.max()) <= 1e-300:
            return self.xv_apply(f_flat, spec, 0), 0
        for _ in range(self.max_iter):
            y = self.k_apply(self.t1_apply(y))
            acc += y
            n_terms += 1
            if float((phase_norm(y, self.grid) / scale).max()) < self.tol:
                break
        else:
            report = SolveReport(iterations=self.max_iter, residual_history=(),
                                 spectral_radius_estimate=self.spectral_radius(),
                                 converged=False)
            raise NonConvergenceError("scattering series did not settle", report)
        b = self.trace_phase(acc, None)
        return self.chi_values(spec)[..., None] * b, n_terms

    def xv_transpose(self, cot, spec, n_terms):
        """Exact transpose of xv_apply at matched series length."""
        w = self.trace_transpose(self.chi_values(spec)[..., None] * cot)
        acc = w.copy()
        y = w
        for _ in range(n_terms):
            y = self.t1_transpose(self.k_transpose(y))
            acc += y
        return self.j_transpose(acc)


# ---------------------------------------------------------------------------
# free-function interface
# ---------------------------------------------------------------------------


def apply_J(f, grid, n_theta=64, geom=None):
    """Broadcast a pixel source raster over the direction grid."""
    raster = np.asarray(f, dtype=float)
    if raster.shape != (grid.ny, grid.nx):
        raise ValueError("source raster shape does not match the grid")
    if geom is not None:
        outside = raster[~grid.disk_mask(geom.radius_inner)]
        if np.any(outside != 0.0):
            raise ValueError("source must vanish outside the inner disk")
    angles = TWO_PI * np.arange(n_theta) / n_theta
    return PhaseSpaceField(grid=grid, theta_angles=angles,
                           values=np.broadcast_to(raster, (n_theta,) + raster.shape).copy())


def apply_K(kernel, u):
    """Angular scattering integral applied slice by slice."""
    solver = TransportSolver(geom=_grid_geom(u.grid), grid=u.grid,
                             kernel=kernel, n_theta=u.n_theta, n_bdry=8)
    vals = solver.k_apply(u.values.reshape(u.n_theta, -1, 1))
    return PhaseSpaceField(grid=u.grid, theta_angles=u.theta_angles,
                           values=vals[..., 0].reshape(u.values.shape))


def _grid_geom(grid):
    from .geometry import DiskGeometry
    return DiskGeometry(radius_inner=0.5 * grid.half_width,
                        radius_outer=grid.half_width)


def apply_T1_inverse(sigma, geom, g, h_ray=None):
    """Free-streaming inverse of a phase-space source field."""
    solver = TransportSolver(geom=geom, grid=g.grid, sigma=sigma,
                             n_theta=g.n_theta, n_bdry=8, h_ray=h_ray)
    vals = solver.t1_apply(g.values.reshape(g.n_theta, -1, 1))
    return PhaseSpaceField(grid=g.grid, theta_angles=g.theta_angles,
                           values=vals[..., 0].reshape(g.values.shape),
                           source_scatter=g.values.reshape(g.n_theta, -1))


def solve_forward(sigma, kernel, geom, f, grid=None, n_theta=64, n_bdry=256,
                  h_ray=None, tol=1e-10, max_iter=200, phantom=None):
    """Solve the transport problem for a source raster or analytic phantom."""
    if grid is None:
        grid = sigma.grid
    solver = TransportSolver(geom=geom, grid=grid, sigma=sigma, kernel=kernel,
                             n_theta=n_theta, n_bdry=n_bdry, h_ray=h_ray,
                             tol=tol, max_iter=max_iter)
    return solver.solve(f=f, phantom=phantom)


def trace_plus(u, geom, n_bdry=256, h_ray=None, sigma=None):
    """Outgoing boundary trace of a phase-space field.

    Fields carrying their transport source are traced by re-integrating the
    source along each exit chord, which lands exactly on the boundary.  Bare
    fields fall back to sampling one march step inside the boundary and
    attenuating over the remaining step.
    """
    if sigma is None:
        sigma = AbsorptionField.zero(u.grid)
    solver = TransportSolver(geom=geom, grid=u.grid, sigma=sigma,
                             n_theta=u.n_theta, n_bdry=n_bdry, h_ray=h_ray)
    if u.source_f is not None or u.source_scatter is not None:
        scatter = None
        if u.source_scatter is not None:
            scatter = u.source_scatter[..., None]
        src = u.source_f
        if isinstance(src, np.ndarray):
            src = src.reshape(-1, 1)
        values = solver.trace_phase(scatter, src)[..., 0]
        return BoundaryData(bgrid=solver.bgrid, values=values)
    bg = solver.bgrid
    from ._interp import bilinear_sample
    from .coefficients import ray_absorption
    step = u.grid.hx
    values = np.zeros((bg.n_bdry, u.n_theta))
    for q in range(u.n_theta):
        th = solver.theta_vecs[q]
        out_idx = np.nonzero(bg.outgoing[:, q])[0]
        pts = bg.points[out_idx] - step * th
        samples = bilinear_sample(u.grid, u.values[q], pts)
        if not sigma.is_zero:
            att = np.array([
                math.exp(-float(ray_absorption(sigma, geom, p, th, [step],
                                               solver.h_ray)[0]))
                for p in pts])
            samples = samples * att
        values[out_idx, q] = samples
    return BoundaryData(bgrid=bg, values=values)


def measure_XV(spec, sigma, kernel, geom, f, grid=None, n_theta=64, n_bdry=256,
               h_ray=None, tol=1e-10, max_iter=200, phantom=None):
    """Partial-data measurement: cutoff times the outgoing trace of the solve."""
    if grid is None:
        grid = sigma.grid
    solver = TransportSolver(geom=geom, grid=grid, sigma=sigma, kernel=kernel,
                             n_theta=n_theta, n_bdry=n_bdry, h_ray=h_ray,
                             tol=tol, max_iter=max_iter)
    bd, _ = solver.measurement(spec, f=f, phantom=phantom)
    return bd
