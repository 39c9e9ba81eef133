# beltrami_scope/fields.py
"""Vector fields on the solid torus and the vector calculus used to test them."""

import abc
import logging

import numpy as np
from scipy import special
from scipy.interpolate import RegularGridInterpolator

from beltrami_scope.config import (
    CORE_PATCH_FRACTION,
    CURL_TOL_ANALYTIC,
    CURL_TOL_SAMPLED,
    DIV_TOL_ANALYTIC,
    DIV_TOL_SAMPLED,
    FD_STEP_MIN,
    FD_STEP_RELATIVE,
    LAMBDA_ZERO_RELATIVE,
    VANISHING_FIELD_FLOOR,
)
from beltrami_scope.errors import (
    FieldDataError,
    StepUnderflowError,
    VanishingFieldError,
)
from beltrami_scope.geometry import TWO_PI, MetricField, TubeChart, VolumeForm, as_points
from beltrami_scope.reports import BeltramiReport

logger = logging.getLogger(__name__)


class VectorField(abc.ABC):
    """A vector field evaluated in Cartesian components on batches of points."""

    analytic = True

    def __call__(self, points) -> np.ndarray:
        pts = as_points(points)
        values = np.asarray(self._evaluate(pts), dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(values)):
            raise FieldDataError(f"{self.describe()['kind']} produced non-finite values.")
        return values

    @abc.abstractmethod
    def _evaluate(self, points: np.ndarray) -> np.ndarray: ...

    @abc.abstractmethod
    def describe(self) -> dict: ...

    @property
    def lattice_step(self) -> float | None:
        """Finite-difference step matched to sampled data, None for analytic fields."""
        return None


def evaluate(field: VectorField, point) -> np.ndarray:
    return field(point)


# --- Analytic Families ---


class ConstantField(VectorField):
    def __init__(self, vector):
        self.vector = np.asarray(vector, dtype=float)

    def _evaluate(self, points):
        return np.broadcast_to(self.vector, points.shape)

    def describe(self):
        return {"kind": "constant", "vector": self.vector.tolist()}


class AffineField(VectorField):
    """X(p) = A p + b."""

    def __init__(self, matrix, offset=(0.0, 0.0, 0.0)):
        self.matrix = np.asarray(matrix, dtype=float)
        self.offset = np.asarray(offset, dtype=float)

    def _evaluate(self, points):
        return points @ self.matrix.T + self.offset

    def describe(self):
        return {"kind": "affine", "matrix": self.matrix.tolist(), "offset": self.offset.tolist()}


class TubeField(VectorField):
    """X = f(r) e_theta + g(r) e_z; tangent to every torus r = const."""

    def __init__(self, swirl, axial, name: str = "tube", params: dict | None = None):
        self.swirl = swirl
        self.axial = axial
        self.name = name
        self.params = params or {}

    def _evaluate(self, points):
        x, y = points[:, 0], points[:, 1]
        r = np.hypot(x, y)
        ratio = self.swirl(r) / np.where(r < 1e-12, 1e-12, r)
        return np.column_stack((-y * ratio, x * ratio, self.axial(r)))

    def profiles(self, r) -> tuple[np.ndarray, np.ndarray]:
        return self.swirl(np.asarray(r, dtype=float)), self.axial(np.asarray(r, dtype=float))

    def describe(self):
        return {"kind": self.name, **self.params}


def twisted_tube() -> TubeField:
    """sin(r) e_theta + cos(r) e_z.

    Its dual 1-form is a contact form, but the field is not a curl eigenfield in the
    flat metric: curl X = sin(r) e_theta + (sin(r)/r + cos(r)) e_z. Use it for disc
    counts, boundary foliations and orbit searches, not where a Beltrami verdict is needed.
    """
    return TubeField(np.sin, np.cos, "twisted-tube")


class LundquistField(TubeField):
    """J1(k r) e_theta + J0(k r) e_z, a curl eigenfield with eigenvalue k."""

    def __init__(self, scale: float = 1.0):
        self.scale = float(scale)
        super().__init__(
            lambda r: special.j1(self.scale * r),
            lambda r: special.j0(self.scale * r),
            "lundquist",
            {"scale": self.scale},
        )


# --- Combinators ---


class Scaled(VectorField):
    def __init__(self, factor: float, field: VectorField):
        self.factor = float(factor)
        self.field = field
        self.analytic = field.analytic

    def _evaluate(self, points):
        return self.factor * self.field(points)

    def describe(self):
        return {"kind": "scaled", "factor": self.factor, "field": self.field.describe()}

    @property
    def lattice_step(self):
        return self.field.lattice_step


class Sum(VectorField):
    def __init__(self, first: VectorField, second: VectorField):
        self.first = first
        self.second = second
        self.analytic = first.analytic and second.analytic

    def _evaluate(self, points):
        return self.first(points) + self.second(points)

    def describe(self):
        return {"kind": "sum", "first": self.first.describe(), "second": self.second.describe()}

    @property
    def lattice_step(self):
        steps = [s for s in (self.first.lattice_step, self.second.lattice_step) if s is not None]
        return min(steps) if steps else None


class Perturbed(VectorField):
    """base + amplitude * (fixed-seed trigonometric polynomial, periodic in z)."""

    def __init__(
        self,
        field: VectorField,
        amplitude: float,
        chart: TubeChart,
        seed: int = 0,
        modes: int = 6,
    ):
        self.field = field
        self.amplitude = float(amplitude)
        self.chart = chart
        self.seed = int(seed)
        self.analytic = field.analytic
        rng = np.random.default_rng(self.seed)
        self._waves = rng.integers(-2, 3, size=(modes, 3)).astype(float)
        self._coeffs = rng.standard_normal((modes, 3)) / np.sqrt(modes)
        self._phases = rng.uniform(0.0, TWO_PI, size=modes)

    def _evaluate(self, points):
        scaled = np.column_stack(
            (points[:, 0] / self.chart.R, points[:, 1] / self.chart.R, TWO_PI * points[:, 2] / self.chart.L)
        )
        wave = np.cos(scaled @ self._waves.T + self._phases)
        return self.field(points) + self.amplitude * (wave @ self._coeffs)

    def describe(self):
        return {
            "kind": "perturbed",
            "amplitude": self.amplitude,
            "seed": self.seed,
            "field": self.field.describe(),
        }

    @property
    def lattice_step(self):
        return self.field.lattice_step


# --- Sampled Data ---


class SampledGrid(VectorField):
    """Vectors on the (r, theta, z) lattice, stored in the (e_r, e_theta, e_z) frame.

    The lattice is r_i = R i / (N_r - 1), theta_j = 2 pi j / N_theta,
    z_k = L k / N_z. Interpolation is trilinear with theta and z wrapped;
    inside r < CORE_PATCH_FRACTION * R the Cartesian components are
    interpolated instead so the result stays smooth across the core.
    """

    analytic = False

    def __init__(
        self,
        values,
        chart: TubeChart,
        metric_tag: str = "euclidean",
        method: str = "linear",
    ):
        values = np.asarray(values, dtype=float)
        if values.ndim != 4 or values.shape[-1] != 3:
            raise FieldDataError(f"Grid values must have shape (N_r, N_theta, N_z, 3), got {values.shape}.")
        if min(values.shape[:3]) < 4:
            raise FieldDataError(f"Grid needs at least 4 nodes per axis, got {values.shape[:3]}.")
        if not np.all(np.isfinite(values)):
            raise FieldDataError("Grid contains non-finite values.")
        self.values = values
        self.chart = chart
        self.metric_tag = metric_tag
        self.method = method
        n_r, n_theta, n_z, _ = values.shape
        self.r_nodes = np.linspace(0.0, chart.R, n_r)
        self.theta_nodes = TWO_PI * np.arange(n_theta) / n_theta
        self.z_nodes = chart.L * np.arange(n_z) / n_z

        axes = (
            self.r_nodes,
            np.append(self.theta_nodes, TWO_PI),
            np.append(self.z_nodes, chart.L),
        )
        wrapped = np.pad(values, ((0, 0), (0, 1), (0, 1), (0, 0)), mode="wrap")
        cos_t = np.cos(axes[1])[None, :, None]
        sin_t = np.sin(axes[1])[None, :, None]
        cartesian = np.stack(
            (
                wrapped[..., 0] * cos_t - wrapped[..., 1] * sin_t,
                wrapped[..., 0] * sin_t + wrapped[..., 1] * cos_t,
                wrapped[..., 2],
            ),
            axis=-1,
        )
        self._cylindrical = RegularGridInterpolator(axes, wrapped, method=method, bounds_error=False, fill_value=None)
        self._cartesian = RegularGridInterpolator(axes, cartesian, method=method, bounds_error=False, fill_value=None)

    @classmethod
    def from_field(
        cls,
        field: VectorField,
        chart: TubeChart,
        shape: tuple[int, int, int],
        metric_tag: str = "euclidean",
    ) -> "SampledGrid":
        n_r, n_theta, n_z = shape
        r = np.linspace(0.0, chart.R, n_r)
        theta = TWO_PI * np.arange(n_theta) / n_theta
        z = chart.L * np.arange(n_z) / n_z
        rr, tt, zz = np.meshgrid(r, theta, z, indexing="ij")
        cyl = np.column_stack((rr.ravel(), tt.ravel(), zz.ravel()))
        vectors = field(chart.to_cartesian(cyl))
        c, s = np.cos(cyl[:, 1]), np.sin(cyl[:, 1])
        frame_values = np.column_stack(
            (
                vectors[:, 0] * c + vectors[:, 1] * s,
                -vectors[:, 0] * s + vectors[:, 1] * c,
                vectors[:, 2],
            )
        )
        return cls(frame_values.reshape(n_r, n_theta, n_z, 3), chart, metric_tag)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.values.shape[:3]

    @property
    def lattice_step(self):
        return float(self.r_nodes[1] - self.r_nodes[0])

    def _evaluate(self, points):
        r = np.hypot(points[:, 0], points[:, 1])
        theta = np.mod(np.arctan2(points[:, 1], points[:, 0]), TWO_PI)
        z = np.mod(points[:, 2], self.chart.L)
        query = np.column_stack((r, theta, z))
        framed = self._cylindrical(query)
        c, s = np.cos(theta), np.sin(theta)
        out = np.column_stack(
            (framed[:, 0] * c - framed[:, 1] * s, framed[:, 0] * s + framed[:, 1] * c, framed[:, 2])
        )
        core = r < CORE_PATCH_FRACTION * self.chart.R
        if np.any(core):
            out[core] = self._cartesian(query[core])
        return out

    def describe(self):
        n_r, n_theta, n_z = self.shape
        return {"kind": "grid", "N_r": n_r, "N_theta": n_theta, "N_z": n_z, "metric": self.metric_tag}


# --- Contact Form ---


class DualOneForm:
    """alpha = g(X, .)"""

    def __init__(self, field: VectorField, g: MetricField):
        self.field = field
        self.g = g

    def covector(self, points) -> np.ndarray:
        pts = as_points(points)
        return self.g.lower(pts, self.field(pts))

    def __call__(self, points, vectors) -> np.ndarray:
        pts = as_points(points)
        return self.g.pair(pts, self.field(pts), vectors)


# --- Vector Calculus ---


def fd_step(field: VectorField, chart: TubeChart | None = None) -> float:
    length = chart.R if chart is not None else 1.0
    step = field.lattice_step
    if step is None:
        step = max(FD_STEP_MIN, FD_STEP_RELATIVE * length)
    if not 0.0 < step < 0.25 * length:
        raise StepUnderflowError(
            f"Finite-difference step {step:.3g} does not fit the chart (R={length}).",
            step=step,
            radius=length,
        )
    return step


def _stencil_derivatives(func, points: np.ndarray, step: float) -> np.ndarray:
    """Central differences: out[n, k, j] = d_j func_k at points[n]."""
    n = len(points)
    offsets = np.concatenate([points + step * e for e in np.eye(3)] + [points - step * e for e in np.eye(3)])
    values = func(offsets).reshape(2, 3, n, -1)
    return np.moveaxis((values[0] - values[1]) / (2.0 * step), 0, -1)


def _curl_of_covector(jac: np.ndarray) -> np.ndarray:
    return np.column_stack(
        (
            jac[:, 2, 1] - jac[:, 1, 2],
            jac[:, 0, 2] - jac[:, 2, 0],
            jac[:, 1, 0] - jac[:, 0, 1],
        )
    )


def _d_alpha(field: VectorField, g: MetricField, points: np.ndarray, chart: TubeChart | None) -> np.ndarray:
    """d(g(X, .)) as its Hodge vector in the coordinate volume dx ^ dy ^ dz."""
    step = fd_step(field, chart)
    jac = _stencil_derivatives(lambda p: g.lower(p, field(p)), points, step)
    return _curl_of_covector(jac)


def curl(
    field: VectorField,
    g: MetricField,
    mu: VolumeForm,
    points,
    chart: TubeChart | None = None,
) -> np.ndarray:
    """The vector W with mu(W, ., .) = d(g(X, .))."""
    pts = as_points(points)
    return _d_alpha(field, g, pts, chart) / mu.signed_density(pts)[:, None]


def divergence(
    field: VectorField,
    g: MetricField,
    mu: VolumeForm,
    points,
    chart: TubeChart | None = None,
) -> np.ndarray:
    pts = as_points(points)
    step = fd_step(field, chart)
    jac = _stencil_derivatives(lambda p: mu.density(p)[:, None] * field(p), pts, step)
    return np.trace(jac, axis1=1, axis2=2) / mu.density(pts)


def _require_nonvanishing(field: VectorField, g: MetricField, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    vectors = field(points)
    norms = g.norm(points, vectors)
    if np.any(norms < VANISHING_FIELD_FLOOR):
        worst = int(np.argmin(norms))
        raise VanishingFieldError(
            "Field vanishes at a sample point.",
            point=points[worst].tolist(),
            norm=float(norms[worst]),
        )
    return vectors, norms


def _fit_lambda(field, g, mu, points, chart) -> tuple[float, float]:
    vectors, norms = _require_nonvanishing(field, g, points)
    w = curl(field, g, mu, points, chart)
    lam = float(np.sum(g.pair(points, w, vectors)) / np.sum(norms**2))
    residual = float(np.max(g.norm(points, w - lam * vectors) / norms))
    return lam, residual


def estimate_lambda(
    field: VectorField,
    g: MetricField,
    mu: VolumeForm,
    points,
    chart: TubeChart | None = None,
) -> tuple[float, float]:
    """Least-squares eigenvalue and the worst relative residual |curl X - lambda X| / |X|."""
    return _fit_lambda(field, g, mu, as_points(points), chart)


def beltrami_residuals(
    field: VectorField,
    g: MetricField,
    mu: VolumeForm,
    points,
    chart: TubeChart | None = None,
    curl_tol: float | None = None,
    div_tol: float | None = None,
) -> BeltramiReport:
    pts = as_points(points)
    if curl_tol is None:
        curl_tol = CURL_TOL_ANALYTIC if field.analytic else CURL_TOL_SAMPLED
    if div_tol is None:
        div_tol = DIV_TOL_ANALYTIC if field.analytic else DIV_TOL_SAMPLED

    div_residual = float(np.max(np.abs(divergence(field, g, mu, pts, chart))))
    norms = g.norm(pts, field(pts))
    vanishing = norms < VANISHING_FIELD_FLOOR
    if np.any(vanishing):
        worst = int(np.argmin(norms))
        raise VanishingFieldError(
            f"Field vanishes at {int(np.sum(vanishing))} of {len(pts)} sample points.",
            vanishing_count=int(np.sum(vanishing)),
            sample_count=len(pts),
            point=pts[worst].tolist(),
        )
    lam, curl_residual = _fit_lambda(field, g, mu, pts, chart)
    passed = curl_residual < curl_tol and div_residual < div_tol
    logger.debug(
        "Beltrami fit over %d samples: lambda=%.8g curl=%.3g div=%.3g", len(pts), lam, curl_residual, div_residual
    )
    return BeltramiReport(
        lambda_estimate=lam,
        curl_residual=curl_residual,
        div_residual=div_residual,
        curl_tolerance=curl_tol,
        div_tolerance=div_tol,
        sample_count=len(pts),
        passed=passed,
    )


def contact_volume_sign(
    field: VectorField,
    g: MetricField,
    mu: VolumeForm,
    points,
    chart: TubeChart | None = None,
) -> int:
    """Common sign of alpha ^ d(alpha) against mu; 0 when mixed or vanishing."""
    pts = as_points(points)
    _require_nonvanishing(field, g, pts)
    alpha = DualOneForm(field, g).covector(pts)
    d_alpha = _d_alpha(field, g, pts, chart)
    twist = np.einsum("ni,ni->n", alpha, d_alpha) / np.einsum("ni,ni->n", alpha, alpha)
    length = chart.R if chart is not None else 1.0
    floor = LAMBDA_ZERO_RELATIVE / length
    if np.all(twist > floor):
        return mu.orientation
    if np.all(twist < -floor):
        return -mu.orientation
    return 0


def reeb_residual(
    field: VectorField,
    g: MetricField,
    points,
    chart: TubeChart | None = None,
) -> float:
    """max |d(alpha)(X, .)|_g / |X|_g^2; zero exactly when X spans the kernel of d(alpha)."""
    pts = as_points(points)
    vectors, norms = _require_nonvanishing(field, g, pts)
    interior = np.cross(_d_alpha(field, g, pts, chart), vectors)
    dual = g.raise_index(pts, interior)
    size = np.sqrt(np.maximum(np.einsum("ni,ni->n", interior, dual), 0.0))
    return float(np.max(size / norms**2))


def l2_energy(
    field: VectorField,
    g: MetricField,
    mu: VolumeForm,
    chart: TubeChart,
    resolution: tuple[int, int, int] = (32, 32, 16),
) -> float:
    """(1/2) integral of |X|_g^2 d mu by the midpoint rule in (r, theta, z)."""
    n_r, n_theta, n_z = resolution
    dr, dtheta, dz = chart.R / n_r, TWO_PI / n_theta, chart.L / n_z
    r = (np.arange(n_r) + 0.5) * dr
    theta = (np.arange(n_theta) + 0.5) * dtheta
    z = (np.arange(n_z) + 0.5) * dz
    rr, tt, zz = np.meshgrid(r, theta, z, indexing="ij")
    cyl = np.column_stack((rr.ravel(), tt.ravel(), zz.ravel()))
    pts = chart.to_cartesian(cyl)
    vectors = field(pts)
    density = g.pair(pts, vectors, vectors) * mu.density(pts) * cyl[:, 0]
    return float(0.5 * np.sum(density) * dr * dtheta * dz)


def sample_points(
    chart: TubeChart,
    n_r: int = 5,
    n_theta: int = 8,
    n_z: int = 4,
    r_fraction: float = 0.8,
) -> np.ndarray:
    """Deterministic interior sample set, kept away from r = R so stencils stay inside."""
    r = r_fraction * chart.R * (np.arange(n_r) + 0.5) / n_r
    theta = TWO_PI * (np.arange(n_theta) + 0.25) / n_theta
    z = chart.L * (np.arange(n_z) + 0.5) / n_z
    rr, tt, zz = np.meshgrid(r, theta, z, indexing="ij")
    return chart.to_cartesian(np.column_stack((rr.ravel(), tt.ravel(), zz.ravel())))
