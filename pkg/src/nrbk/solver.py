"""Time marching for the radial modal wave equation on a truncated annulus.

The radial interval [inner, outer] maps to [-1, 1] and the trial space
is spanned by phi_k = L_k + L_(k+1) for k = 0..N-1.  Every basis member
vanishes at the inner end (Dirichlet data enters through a linear
lifting) and takes the value 2 at the outer end, where the absorbing
rule couples all coefficients through the rank-one matrix of ones plus
a kernel convolution of the boundary signal sum_j v_j.

Time integration is the implicit Newmark scheme.  The convolution's
current panel is treated by the trapezoid rule: half of it rides
implicitly inside the factored system matrix, the rest is the deferred
history supplied by the recursive convolver, so each step costs one
back-substitution and O(1) kernel work regardless of the step count.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.special import roots_jacobi

from .convolution import KernelConvolver
from .errors import AssemblyError, ConfigurationError, IntegrationError
from .kernel import KernelParams, build_kernel, eval_sigma

__all__ = [
    "ModalProblem",
    "SpectralOperator",
    "NewmarkState",
    "ModalSolution",
    "assemble",
    "lift_dirichlet",
    "newmark_init",
    "newmark_step",
    "solve_mode",
    "solve_modes",
    "energy_diagnostics",
    "discrete_norms",
    "lobatto_grid",
    "synthesize_field",
    "dump_snapshot_csv",
    "dump_synthesis_csv",
]

# agreement required between a Gauss rule and its node-doubled refinement
_DOUBLING_GATE = 1e-12

# tolerance for "is this time on the step grid", relative to the time
_GRID_SNAP = 1e-9


def _legendre_table(x, degree):
    """Values and derivatives of L_0..L_degree at the points x.

    Three-term recurrence for the values; the derivative recurrence
    L'_(k+1) = L'_(k-1) + (2k+1) L_k rides along.  Shapes (len(x), degree+1).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    vals = np.empty((x.size, degree + 1))
    slopes = np.empty_like(vals)
    vals[:, 0] = 1.0
    slopes[:, 0] = 0.0
    if degree >= 1:
        vals[:, 1] = x
        slopes[:, 1] = 1.0
    for k in range(1, degree):
        vals[:, k + 1] = ((2 * k + 1) * x * vals[:, k] - k * vals[:, k - 1]) / (k + 1)
        slopes[:, k + 1] = slopes[:, k - 1] + (2 * k + 1) * vals[:, k]
    return vals, slopes


def lobatto_grid(degree):
    """Legendre-Gauss-Lobatto points and weights, degree+1 nodes on [-1, 1]."""
    if degree < 1:
        raise ConfigurationError("the Lobatto grid needs at least two nodes")
    x = np.empty(degree + 1)
    x[0] = -1.0
    x[-1] = 1.0
    if degree > 1:
        # interior nodes are the zeros of L'_degree, i.e. Jacobi(1,1) roots
        x[1:-1] = roots_jacobi(degree - 1, 1.0, 1.0)[0]
    end = _legendre_table(x, degree)[0][:, degree]
    w = 2.0 / (degree * (degree + 1) * end * end)
    return x, w


@dataclass(frozen=True)
class ModalProblem:
    """One angular mode of the exterior problem, truncated to an annulus.

    dirichlet, if given, supplies the inner boundary trace: any object
    with value(t), slope(t) and accel(t); complex values run both real
    marches at once.  forcing(radii, t) and the initial data callables
    must accept an array of radii.  robin_data(t) is the inhomogeneous
    term of the absorbing boundary rule; leave it None for genuinely
    outgoing fields.
    """

    mode: int
    dim: int
    inner_radius: float
    outer_radius: float
    speed: float
    dirichlet: object = None
    forcing: object = None
    initial_value: object = None
    initial_slope: object = None
    robin_data: object = None

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ConfigurationError("dim must be 2 or 3")
        if self.mode != int(self.mode):
            raise ConfigurationError("mode index must be an integer")
        if not 0.0 < self.inner_radius < self.outer_radius:
            raise ConfigurationError("radii must satisfy 0 < inner < outer")
        if not self.speed > 0.0:
            raise ConfigurationError("wave speed must be positive")

    @property
    def angular_factor(self):
        """Coefficient of the 1/r^2 zero-order term: n^2 or n(n+1)."""
        n = abs(self.mode)
        return float(n * n) if self.dim == 2 else float(n * (n + 1))

    def kernel_params(self):
        return KernelParams(dim=self.dim, n=abs(self.mode),
                            radius=self.outer_radius, speed=self.speed)


def _gauss_blocks(dim, offset, degree, poly_points, frac_points):
    """All quadrature-built blocks of the operator.

    Polynomial integrands (mass, stiffness, their lifting columns, the
    load matrix) use the poly_points rule; the (x+c0)^(d-3) weighted
    blocks use frac_points, which only differs for d=2 where that
    weight is rational.  Returns a dict of arrays.
    """
    x, w = np.polynomial.legendre.leggauss(poly_points)
    vals, slopes = _legendre_table(x, degree)
    phi = vals[:, :-1] + vals[:, 1:]
    dphi = slopes[:, :-1] + slopes[:, 1:]
    ring = (x + offset) ** (dim - 1)
    lift = 0.5 * (1.0 - x)

    def symm(a):
        return 0.5 * (a + a.T)

    blocks = {
        "mass": symm(phi.T @ (phi * (w * ring)[:, None])),
        "stiffness": symm(dphi.T @ (dphi * (w * ring)[:, None])),
        "lift_mass": phi.T @ (w * ring * lift),
        # the lifting slope is the constant -1/2
        "lift_stiff": dphi.T @ (w * ring * -0.5),
        "load": phi.T @ (vals * (w * ring)[:, None]),
    }
    xf, wf = np.polynomial.legendre.leggauss(frac_points)
    vf = _legendre_table(xf, degree)[0]
    phif = vf[:, :-1] + vf[:, 1:]
    fracw = (xf + offset) ** (dim - 3)
    blocks["fractional"] = symm(phif.T @ (phif * (wf * fracw)[:, None]))
    blocks["lift_frac"] = phif.T @ (wf * fracw * 0.5 * (1.0 - xf))
    return blocks


class SpectralOperator:
    """Assembled spatial operator, shared by every mode of one geometry.

    Only the zero-order angular factor and the boundary kernel differ
    between modes, so a single instance serves a whole family.  All
    fields are fixed after assembly; treat instances as read-only.
    """

    def __init__(self, dim, inner_radius, outer_radius, speed, degree, blocks):
        self.dim = int(dim)
        self.inner_radius = float(inner_radius)
        self.outer_radius = float(outer_radius)
        self.speed = float(speed)
        self.degree = int(degree)
        width = self.outer_radius - self.inner_radius
        self.offset = (self.outer_radius + self.inner_radius) / width
        self.gradient_scale = 2.0 * self.speed / width
        ring = (1.0 + self.offset) ** (self.dim - 1)
        self.damping = 8.0 * self.speed * ring / width
        self.restoring = (4.0 * self.speed ** 2 * (self.dim - 1) * ring
                          / (self.outer_radius * width))
        self.coupling = self.speed * self.damping
        self.mass = blocks["mass"]
        self.stiffness = blocks["stiffness"]
        self.fractional = blocks["fractional"]
        self.lift_mass = blocks["lift_mass"]
        self.lift_stiff = blocks["lift_stiff"]
        self.lift_frac = blocks["lift_frac"]
        self.load_matrix = blocks["load"]
        self.ones = np.ones(self.degree)
        self.lobatto_x, self.lobatto_w = lobatto_grid(self.degree)
        # nodal values -> interpolant's Legendre coefficients; the last
        # diagonal norm is the discrete one, which is what makes the
        # transform exactly invert evaluation on the grid
        table = _legendre_table(self.lobatto_x, self.degree)[0]
        gamma = (table * table * self.lobatto_w[:, None]).sum(axis=0)
        self._analysis = (table * self.lobatto_w[:, None] / gamma).T

    def reference_coords(self, r):
        """Map radii to the reference interval."""
        r = np.asarray(r, dtype=float)
        width = self.outer_radius - self.inner_radius
        return (2.0 * r - (self.outer_radius + self.inner_radius)) / width

    def radii(self, x):
        """Map reference coordinates to radii."""
        x = np.asarray(x, dtype=float)
        width = self.outer_radius - self.inner_radius
        return 0.5 * (width * x + self.outer_radius + self.inner_radius)

    @property
    def lobatto_radii(self):
        return self.radii(self.lobatto_x)

    def basis_table(self, x):
        """phi_k and phi_k' at the points x; two (len(x), degree) arrays."""
        vals, slopes = _legendre_table(x, self.degree)
        return vals[:, :-1] + vals[:, 1:], slopes[:, :-1] + slopes[:, 1:]

    def lifting_values(self, x):
        """The lifting function (1-x)/2 at reference coordinates."""
        return 0.5 * (1.0 - np.atleast_1d(np.asarray(x, dtype=float)))

    def interpolate(self, values):
        """Legendre coefficients of the Lobatto-grid interpolant."""
        return self._analysis @ np.asarray(values)

    def project(self, values, tol=1e-10):
        """Basis coefficients of the interpolant of real nodal data.

        The basis spans exactly the degree-N polynomials vanishing at
        x = -1, so data with a nonzero inner-end interpolant cannot be
        represented and is rejected.
        """
        coeffs = self.interpolate(np.asarray(values, dtype=float))
        signs = (-1.0) ** np.arange(self.degree + 1)
        inner = float(signs @ coeffs)
        scale = max(1.0, float(np.max(np.abs(values))))
        if abs(inner) > tol * scale:
            raise ConfigurationError(
                "initial data must vanish at the inner boundary after "
                "lifting subtraction; interpolant leaves %.3e there" % inner)
        out = np.empty(self.degree)
        acc = 0.0
        for k in range(self.degree):
            acc = coeffs[k] - acc
            out[k] = acc
        return out


def assemble(problem, degree, quad_degree=None):
    """Build the shared spatial operator for the problem's geometry.

    The default Gauss rule (degree+4 nodes) integrates every polynomial
    entry exactly with margin; the d=2 fractional weight is smooth
    rational on the interval and gets 2*degree+16 nodes.  Every block
    is rebuilt on node-doubled rules and the two versions must agree
    before the operator is accepted.
    """
    if degree != int(degree) or degree < 4:
        raise ConfigurationError("polynomial degree must be an integer >= 4")
    degree = int(degree)
    base = degree + 4 if quad_degree is None else int(quad_degree)
    if base < 2:
        raise ConfigurationError("quadrature rule needs at least two nodes")
    width = problem.outer_radius - problem.inner_radius
    offset = (problem.outer_radius + problem.inner_radius) / width
    frac = base if problem.dim == 3 else max(2 * degree + 16, base)
    coarse = _gauss_blocks(problem.dim, offset, degree, base, frac)
    fine = _gauss_blocks(problem.dim, offset, degree, 2 * base, 2 * frac)
    # node positions carry O(eps) error and the integrands' derivatives
    # grow like degree^2 near the endpoints, so even exact rules disagree
    # by about eps * degree^2 in relative terms; the gate allows for that
    rounding = 64.0 * np.finfo(float).eps * degree * degree
    for name in coarse:
        scale = max(1.0, float(np.max(np.abs(fine[name]))))
        gap = float(np.max(np.abs(coarse[name] - fine[name])))
        if gap > (_DOUBLING_GATE + rounding) * scale:
            raise AssemblyError(
                "%s block moved %.3e under node doubling; "
                "raise quad_degree" % (name, gap))
    return SpectralOperator(problem.dim, problem.inner_radius,
                            problem.outer_radius, problem.speed, degree, fine)


def _columns(z):
    """A complex scalar as the real pair [re, im]."""
    z = complex(z)
    return np.array([z.real, z.imag])


def lift_dirichlet(problem, operator):
    """Build the load assembler with the Dirichlet lifting folded in.

    Substituting v = w + G(t) * (1-x)/2 moves three lifting channels to
    the right side (mass column times G'', stiffness and fractional
    columns times G); the flux the lifting would send through the outer
    boundary cancels exactly against the divergence term because the
    lifting vanishes there, so no boundary channel appears.  An
    inhomogeneous absorbing-rule datum adds its own rank-one channel.

    The returned rhs(t) has shape (degree, 2): real and imaginary load
    columns.  With no data, no forcing and no rule datum every channel
    is zero and the homogeneous system is untouched.
    """
    op = operator
    grad2 = op.gradient_scale ** 2
    beta = problem.angular_factor
    data = problem.dirichlet
    forcing = problem.forcing
    rho = problem.robin_data
    radii = op.lobatto_radii
    lift_rigid = grad2 * (op.lift_stiff + beta * op.lift_frac)

    def rhs(t):
        out = np.zeros((op.degree, 2))
        if forcing is not None:
            coeffs = op.interpolate(np.asarray(forcing(radii, t), dtype=complex))
            loads = op.load_matrix @ coeffs
            out[:, 0] += loads.real
            out[:, 1] += loads.imag
        if data is not None:
            out -= np.outer(op.lift_mass, _columns(data.accel(t)))
            out -= np.outer(lift_rigid, _columns(data.value(t)))
        if rho is not None:
            out += 0.5 * op.coupling * np.outer(op.ones, _columns(rho(t)))
        return out

    return rhs


class NewmarkState:
    """Mutable marching state for one mode.

    Columns of v, vdot, vddot hold the real and imaginary parts.  The
    convolution history lives in the convolver, whose scalar signal is
    sum_j v_j, i.e. half the boundary value of the numerical solution.
    """

    def __init__(self, operator, problem, dt, theta, vartheta, convolver,
                 sigma0, sigma_dt, rhs, lu, stiff_full, rank_coeff,
                 v, vdot, vddot):
        self.operator = operator
        self.problem = problem
        self.dt = float(dt)
        self.theta = float(theta)
        self.vartheta = float(vartheta)
        self.step_index = 0
        self.convolver = convolver
        self.sigma0 = sigma0
        self.sigma_dt = sigma_dt
        self.rhs = rhs
        self.lu = lu
        self.stiff_full = stiff_full
        self.rank_coeff = rank_coeff
        self.v = v
        self.vdot = vdot
        self.vddot = vddot

    @property
    def time(self):
        return self.step_index * self.dt

    def boundary_value(self):
        """Numerical solution at the outer radius, as a complex number."""
        s = self.v.sum(axis=0)
        return 2.0 * complex(s[0], s[1])

    def history_columns(self):
        """Deferred-history term of the coming step, as a real pair.

        A state without a convolver (reduced test configurations with
        the absorbing terms disabled) has no history.
        """
        if self.convolver is None:
            return np.zeros(2)
        z = complex(self.convolver.deferred_history(self.dt))
        return np.array([z.real, z.imag])

    def energy(self):
        """Discrete interior energy of the current state."""
        op = self.operator
        kin = float(np.sum(self.vdot * (op.mass @ self.vdot)))
        pot = float(np.sum(self.v * (self.stiff_full @ self.v)))
        return kin + pot


def _check_stability(theta, vartheta, allow_unstable):
    if allow_unstable:
        return
    if vartheta < 0.5 or theta < 0.25 * (0.5 + vartheta) ** 2:
        raise ConfigurationError(
            "scheme parameters are outside the unconditional stability "
            "region (need vartheta >= 1/2 and theta >= (1/2+vartheta)^2/4); "
            "pass allow_unstable=True to force them")


def _check_geometry(operator, problem):
    same = (operator.dim == problem.dim
            and operator.inner_radius == problem.inner_radius
            and operator.outer_radius == problem.outer_radius
            and operator.speed == problem.speed)
    if not same:
        raise ConfigurationError(
            "operator was assembled for a different geometry")


def newmark_init(operator, problem, dt, theta=0.25, vartheta=0.5,
                 allow_unstable=False):
    """Prepare the marching state: factor the system, project the data.

    The factored matrix is M + vartheta*dt*B + theta*dt^2*C where B is
    the rank-one damping and C carries the stiffness, the rank-one
    restoring term, and the implicit half of the convolution's current
    trapezoid panel, whose coefficient is -coupling*(dt/2)*sigma(0).
    The initial acceleration solves the mass system against the t=0
    residual; the convolution history is empty there.
    """
    if not dt > 0.0:
        raise ConfigurationError("dt must be positive")
    _check_stability(theta, vartheta, allow_unstable)
    _check_geometry(operator, problem)
    op = operator
    kernel = build_kernel(problem.kernel_params())
    convolver = KernelConvolver(kernel, panel_rule="trapezoidal")
    sigma0 = float(eval_sigma(kernel, 0.0))
    sigma_dt = float(eval_sigma(kernel, dt))
    beta = problem.angular_factor
    grad2 = op.gradient_scale ** 2
    stiff_full = grad2 * (op.stiffness + beta * op.fractional)
    rank_one = np.outer(op.ones, op.ones)
    rank_coeff = op.restoring - op.coupling * 0.5 * dt * sigma0
    system = (op.mass + vartheta * dt * op.damping * rank_one
              + theta * dt * dt * (stiff_full + rank_coeff * rank_one))
    lu = lu_factor(system, check_finite=False)
    if not np.all(np.isfinite(lu[0])) or np.min(np.abs(np.diag(lu[0]))) == 0.0:
        raise ConfigurationError("marching system matrix is singular")

    rhs = lift_dirichlet(problem, op)
    lift_nodes = op.lifting_values(op.lobatto_x)
    g0 = complex(problem.dirichlet.value(0.0)) if problem.dirichlet else 0.0j
    g1 = complex(problem.dirichlet.slope(0.0)) if problem.dirichlet else 0.0j

    def nodal(f):
        if f is None:
            return np.zeros(op.degree + 1, dtype=complex)
        return np.asarray(f(op.lobatto_radii), dtype=complex)

    w0 = nodal(problem.initial_value) - g0 * lift_nodes
    w1 = nodal(problem.initial_slope) - g1 * lift_nodes
    v = np.stack([op.project(w0.real), op.project(w0.imag)], axis=1)
    vdot = np.stack([op.project(w1.real), op.project(w1.imag)], axis=1)
    resid = (rhs(0.0)
             - op.damping * np.outer(op.ones, vdot.sum(axis=0))
             - stiff_full @ v
             - op.restoring * np.outer(op.ones, v.sum(axis=0)))
    vddot = np.linalg.solve(op.mass, resid)
    return NewmarkState(op, problem, dt, theta, vartheta, convolver,
                        sigma0, sigma_dt, rhs, lu, stiff_full, rank_coeff,
                        v, vdot, vddot)


def newmark_step(state):
    """Advance one step: solve for the new acceleration, march the history."""
    op = state.operator
    dt = state.dt
    t_next = (state.step_index + 1) * dt
    old_sum = state.v.sum(axis=0)
    history = (0.5 * dt * state.sigma_dt * old_sum
               + state.history_columns())
    load = state.rhs(t_next) + op.coupling * np.outer(op.ones, history)
    # overflow on a diverging run is expected; the guard below reports it
    with np.errstate(over="ignore", invalid="ignore"):
        pred_v = (state.v + dt * state.vdot
                  + (0.5 - state.theta) * dt * dt * state.vddot)
        pred_vdot = state.vdot + (1.0 - state.vartheta) * dt * state.vddot
        resid = (load
                 - op.damping * np.outer(op.ones, pred_vdot.sum(axis=0))
                 - state.stiff_full @ pred_v
                 - state.rank_coeff * np.outer(op.ones, pred_v.sum(axis=0)))
        acc = lu_solve(state.lu, resid, check_finite=False)
    with np.errstate(over="ignore", invalid="ignore"):
        state.v = pred_v + state.theta * dt * dt * acc
        state.vdot = pred_vdot + state.vartheta * dt * acc
    state.vddot = acc
    state.step_index += 1
    new_sum = state.v.sum(axis=0)
    if state.convolver is not None:
        state.convolver.convolve_step(complex(old_sum[0], old_sum[1]),
                                      complex(new_sum[0], new_sum[1]), dt)
    if not np.all(np.isfinite(acc)):
        raise IntegrationError(
            "time integration diverged at step %d" % state.step_index,
            step=state.step_index)
    return state


class ModalSolution:
    """March results for one mode: boundary trace, snapshots, evaluation."""

    def __init__(self, problem, operator, dt, steps, boundary, snapshots,
                 energy=None):
        self.problem = problem
        self.operator = operator
        self.dt = float(dt)
        self.steps = int(steps)
        self.boundary_trace = boundary
        self.snapshots = snapshots
        self.energy = energy

    @property
    def times(self):
        return np.arange(self.steps + 1) * self.dt

    def _index(self, time):
        idx = int(round(time / self.dt))
        if abs(idx * self.dt - time) > _GRID_SNAP * max(1.0, abs(time)):
            raise ConfigurationError("time %r is not on the step grid" % (time,))
        if idx not in self.snapshots:
            raise ConfigurationError("no snapshot stored at t=%r" % (time,))
        return idx

    def coefficients(self, time):
        """Stored complex coefficient vector at a snapshot time."""
        return self.snapshots[self._index(time)][0]

    def evaluate(self, time, r):
        """Numerical mode profile at the given radii (complex array)."""
        idx = self._index(time)
        coeffs = self.snapshots[idx][0]
        x = self.operator.reference_coords(r)
        phi, _ = self.operator.basis_table(x)
        out = phi @ coeffs
        if self.problem.dirichlet is not None:
            g = complex(self.problem.dirichlet.value(idx * self.dt))
            out = out + g * self.operator.lifting_values(x)
        return out

    def lobatto_values(self, time):
        """Profile on the operator's Lobatto radii."""
        return self.evaluate(time, self.operator.lobatto_radii)


def _sample_indices(sample_times, dt, steps):
    wanted = {0, steps}
    for t in sample_times:
        idx = int(round(float(t) / dt))
        if abs(idx * dt - float(t)) > _GRID_SNAP * max(1.0, abs(float(t))):
            raise ConfigurationError(
                "sample time %r is not on the step grid" % (t,))
        if not 0 <= idx <= steps:
            raise ConfigurationError(
                "sample time %r lies outside the march" % (t,))
        wanted.add(idx)
    return wanted


def _step_count(horizon, dt):
    steps = int(round(horizon / dt))
    if steps < 1 or abs(steps * dt - horizon) > _GRID_SNAP * max(1.0, horizon):
        raise ConfigurationError("horizon must be a positive multiple of dt")
    return steps


def solve_mode(problem, degree, dt, horizon, sample_times=(), theta=0.25,
               vartheta=0.5, operator=None, quad_degree=None,
               record_energy=False, allow_unstable=False):
    """March one mode to the horizon on the reference (single-system) path.

    Snapshots of the coefficient vector are kept at t=0, the horizon,
    and every requested sample time (which must sit on the step grid).
    """
    if operator is None:
        operator = assemble(problem, degree, quad_degree)
    elif operator.degree != degree:
        raise ConfigurationError("operator degree does not match the request")
    steps = _step_count(horizon, dt)
    wanted = _sample_indices(sample_times, dt, steps)
    state = newmark_init(operator, problem, dt, theta, vartheta,
                         allow_unstable=allow_unstable)
    boundary = np.empty(steps + 1, dtype=complex)
    boundary[0] = state.boundary_value()
    snapshots = {}
    energy = np.empty(steps + 1) if record_energy else None

    def complex_pair(state_):
        v = state_.v[:, 0] + 1j * state_.v[:, 1]
        vdot = state_.vdot[:, 0] + 1j * state_.vdot[:, 1]
        return v, vdot

    if 0 in wanted:
        snapshots[0] = complex_pair(state)
    if record_energy:
        energy[0] = state.energy()
    for m in range(steps):
        newmark_step(state)
        boundary[m + 1] = state.boundary_value()
        if state.step_index in wanted:
            snapshots[state.step_index] = complex_pair(state)
        if record_energy:
            energy[state.step_index] = state.energy()
    return ModalSolution(problem, operator, dt, steps, boundary, snapshots,
                         energy=energy)


def _shared_temporal(problems):
    """The single pulse shared by all boundary data, or None if mixed.

    The stacked path computes the pulse once per step and scales it by
    each mode's spatial coefficient, so it requires every mode's data
    to expose the same (amplitude, frequency) exponential sum.
    """
    temporal = None
    for p in problems:
        data = p.dirichlet
        if data is None:
            continue
        shape = getattr(data, "temporal", None)
        spatial = getattr(data, "spatial", None)
        if shape is None or spatial is None:
            return None
        if temporal is None:
            temporal = tuple(shape)
        elif tuple(shape) != temporal:
            return None
    return temporal if temporal is not None else ()


class _BatchMarcher:
    """Stacked Newmark march for modes sharing one operator.

    One (K, N, N) batched product per step replaces K separate solves;
    the kernel recursions run on zero-padded rate arrays so every mode
    advances in the same vector operation.  The per-mode systems are
    mass-dominated and well conditioned at desk scale, so the factored
    solve is replaced by precomputed inverses, which is what lets the
    whole step stay inside numpy.
    """

    def __init__(self, problems, operator, dt, theta, vartheta, temporal):
        op = operator
        count = len(problems)
        degree = op.degree
        self.problems = problems
        self.operator = op
        self.dt = float(dt)
        self.theta = float(theta)
        self.vartheta = float(vartheta)
        kernels = [build_kernel(p.kernel_params()) for p in problems]
        width = max(k.rates.size for k in kernels)
        self.rates = np.zeros((count, width), dtype=complex)
        self.weights = np.zeros((count, width), dtype=complex)
        for i, k in enumerate(kernels):
            self.rates[i, :k.rates.size] = k.rates
            self.weights[i, :k.rates.size] = k.sigma_weights
        self.sigma0 = np.array([float(eval_sigma(k, 0.0)) for k in kernels])
        self.sigma_dt = np.array([float(eval_sigma(k, dt)) for k in kernels])
        self.decay = np.exp(self.rates * dt)[:, :, None]
        self.decayed_weights = (self.weights * self.decay[:, :, 0])
        self.half_dt = 0.5 * dt
        self.values = np.zeros((count, width, 2), dtype=complex)

        grad2 = op.gradient_scale ** 2
        betas = np.array([p.angular_factor for p in problems])
        self.betas = betas
        self.stiff_full = (grad2 * op.stiffness[None, :, :]
                           + (grad2 * betas)[:, None, None]
                           * op.fractional[None, :, :])
        self.rank_coeff = (op.restoring
                           - op.coupling * 0.5 * dt * self.sigma0)
        rank_one = np.outer(op.ones, op.ones)
        systems = (op.mass + vartheta * dt * op.damping * rank_one
                   + theta * dt * dt
                   * (self.stiff_full + self.rank_coeff[:, None, None]
                      * rank_one))
        try:
            self.inverses = np.linalg.inv(systems)
        except np.linalg.LinAlgError:
            raise ConfigurationError("marching system matrix is singular")

        # shared pulse: value, slope and curvature close in one exponential sum
        self.pulse_amps = np.array([a for a, _ in temporal], dtype=complex)
        self.pulse_freqs = np.array([f for _, f in temporal], dtype=complex)
        self.spatials = np.array(
            [complex(p.dirichlet.spatial) if p.dirichlet is not None else 0.0j
             for p in problems])
        self.lift_rigid = grad2 * (op.lift_stiff[None, :]
                                   + betas[:, None] * op.lift_frac[None, :])

        self.v = np.zeros((count, degree, 2))
        self.vdot = np.zeros((count, degree, 2))
        load0 = self._loads(0.0)
        self.vddot = np.linalg.solve(op.mass, load0)

    def _pulse(self, t):
        """Shared pulse value and curvature at time t."""
        ph = np.exp(1j * self.pulse_freqs * t)
        value = self.pulse_amps @ ph
        curve = -(self.pulse_amps * self.pulse_freqs ** 2) @ ph
        return value, curve

    def _loads(self, t):
        """Lifting channels for all modes at time t, shape (K, N, 2)."""
        if self.pulse_amps.size == 0:
            return np.zeros((len(self.problems), self.operator.degree, 2))
        value, curve = self._pulse(t)
        g = self.spatials * value
        gdd = self.spatials * curve
        g_cols = np.stack([g.real, g.imag], axis=1)
        gdd_cols = np.stack([gdd.real, gdd.imag], axis=1)
        out = -self.operator.lift_mass[None, :, None] * gdd_cols[:, None, :]
        out -= self.lift_rigid[:, :, None] * g_cols[:, None, :]
        return out

    def boundary(self):
        s = self.v.sum(axis=1)
        return 2.0 * (s[:, 0] + 1j * s[:, 1])

    def step(self, index):
        op = self.operator
        dt = self.dt
        old_sum = self.v.sum(axis=1)
        deferred = np.einsum("kw,kwc->kc", self.decayed_weights,
                             self.values).real
        history = 0.5 * dt * self.sigma_dt[:, None] * old_sum + deferred
        load = self._loads((index + 1) * dt)
        load += op.coupling * history[:, None, :]
        # overflow on a diverging run is expected; the guard below reports it
        with np.errstate(over="ignore", invalid="ignore"):
            pred_v = (self.v + dt * self.vdot
                      + (0.5 - self.theta) * dt * dt * self.vddot)
            pred_vdot = self.vdot + (1.0 - self.vartheta) * dt * self.vddot
            resid = load
            resid -= op.damping * pred_vdot.sum(axis=1)[:, None, :]
            resid -= np.matmul(self.stiff_full, pred_v)
            resid -= (self.rank_coeff[:, None]
                      * pred_v.sum(axis=1))[:, None, :]
            acc = np.matmul(self.inverses, resid)
            self.v = pred_v + self.theta * dt * dt * acc
            self.vdot = pred_vdot + self.vartheta * dt * acc
            self.vddot = acc
            new_sum = self.v.sum(axis=1)
            # fused trapezoid panel: decay acts on history plus the left end
            self.values += self.half_dt * old_sum[:, None, :]
            self.values *= self.decay
            self.values += self.half_dt * new_sum[:, None, :]
        if not np.all(np.isfinite(new_sum)):
            raise IntegrationError(
                "time integration diverged at step %d" % (index + 1),
                step=index + 1)

    def run(self, steps, wanted):
        count = len(self.problems)
        boundary = np.empty((steps + 1, count), dtype=complex)
        boundary[0] = self.boundary()
        snapshots = {i: {} for i in range(count)}

        def record(idx):
            v = self.v[:, :, 0] + 1j * self.v[:, :, 1]
            vdot = self.vdot[:, :, 0] + 1j * self.vdot[:, :, 1]
            for i in range(count):
                snapshots[i][idx] = (v[i].copy(), vdot[i].copy())

        if 0 in wanted:
            record(0)
        for m in range(steps):
            self.step(m)
            boundary[m + 1] = self.boundary()
            if m + 1 in wanted:
                record(m + 1)
        return [ModalSolution(self.problems[i], self.operator, self.dt,
                              steps, boundary[:, i].copy(), snapshots[i])
                for i in range(count)]


def solve_modes(problems, degree, dt, horizon, sample_times=(), theta=0.25,
                vartheta=0.5, quad_degree=None, allow_unstable=False):
    """March a family of modes sharing one geometry.

    Modes whose load reduces to shared-pulse boundary data (no forcing,
    no initial data, no rule datum) march together on the stacked fast
    path; anything richer falls back to per-mode reference marches.
    The returned list parallels the input.
    """
    problems = list(problems)
    if not problems:
        return []
    head = problems[0]
    for p in problems[1:]:
        if (p.dim, p.inner_radius, p.outer_radius, p.speed) != \
                (head.dim, head.inner_radius, head.outer_radius, head.speed):
            raise ConfigurationError("stacked modes must share the geometry")
    _check_stability(theta, vartheta, allow_unstable)
    operator = assemble(head, degree, quad_degree)
    steps = _step_count(horizon, dt)
    wanted = _sample_indices(sample_times, dt, steps)
    simple = all(p.forcing is None and p.robin_data is None
                 and p.initial_value is None and p.initial_slope is None
                 for p in problems)
    temporal = _shared_temporal(problems) if simple else None
    if temporal is not None:
        marcher = _BatchMarcher(problems, operator, dt, theta, vartheta,
                                temporal)
        return marcher.run(steps, wanted)
    return [solve_mode(p, degree, dt, horizon, sample_times=sample_times,
                       theta=theta, vartheta=vartheta, operator=operator,
                       allow_unstable=allow_unstable)
            for p in problems]


def energy_diagnostics(solution):
    """Per-step discrete interior energy recorded during the march."""
    if solution.energy is None:
        raise ConfigurationError(
            "march was run without record_energy; nothing to report")
    return solution.energy


def discrete_norms(operator, values):
    """Lobatto-grid L2 and max norms of nodal values on the interval."""
    w = operator.lobatto_w
    mags = np.abs(np.asarray(values))
    return float(np.sqrt(np.sum(w * mags * mags))), float(np.max(mags))


def synthesize_field(solutions, time, r, phi):
    """Real field from nonnegative modes assuming conjugate symmetry.

    r and phi must have matching shapes; each solution contributes its
    profile times exp(i*mode*phi), doubled for positive modes to stand
    in for the conjugate negative mode.
    """
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if r.shape != phi.shape:
        raise ConfigurationError("radius and angle grids must match")
    total = np.zeros(r.shape, dtype=complex)
    for sol in solutions:
        n = sol.problem.mode
        if n < 0:
            raise ConfigurationError(
                "field synthesis expects modes n >= 0 only")
        term = sol.evaluate(time, r.ravel()).reshape(r.shape) \
            * np.exp(1j * n * phi)
        total += term if n == 0 else term + np.conj(term)
    return total.real


def dump_snapshot_csv(stream, rows):
    """Write one mode's profile rows (t, r, value) with value complex."""
    stream.write("t,r,value\n")
    for t, r, value in rows:
        z = complex(value)
        stream.write("%.17g,%.17g,%.17g%+.17gj\n" % (t, r, z.real, z.imag))


def dump_synthesis_csv(stream, rows):
    """Write synthesized-field rows (t, r, phi, U)."""
    stream.write("t,r,phi,U\n")
    for t, r, phi, value in rows:
        stream.write("%.17g,%.17g,%.17g,%.17g\n" % (t, r, phi, value))
