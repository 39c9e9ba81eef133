# beltrami_scope/disc_index.py
"""Self-linking number of a transverse meridian and the index I of a Beltrami field.

The meridian bounds a disc D. X is projected g-orthogonally onto the tangent
planes of D; the rest points p of the projected field X_D are located and
weighted by sigma(p) * Ind(X_D; p), where sigma(p) is the sign of X against
the oriented disc normal. The self-linking number is that weighted sum times
the calibration sign S_STAR.
"""

import logging
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from beltrami_scope import boundary
from beltrami_scope.config import (
    BOUNDARY_GRID,
    BSCOPE_THREADS,
    BUMP_RETRY_FRACTION,
    DISC_SCAN_RESOLUTION,
    LAMBDA_ZERO_RELATIVE,
    MERGE_RADIUS,
    NEWTON_MAX_ITER,
    NEWTON_TOLERANCE,
    PERTURB_RETRY_AMPLITUDE,
    S_STAR,
    SIGMA_FLOOR,
    WINDING_RADIUS_CAP,
    WINDING_SAMPLES,
)
from beltrami_scope.errors import (
    BoundaryDegenerateError,
    DegenerateSingularityError,
    NonGenericFieldError,
    NotBeltramiError,
    NotInvariantError,
    NotTransverseError,
    SigmaContradictionError,
    WindingError,
)
from beltrami_scope.fields import (
    Perturbed,
    VectorField,
    beltrami_residuals,
    contact_volume_sign,
    l2_energy,
    sample_points,
)
from beltrami_scope.geometry import TWO_PI, MeridionalDisc, MetricField, TubeChart, VolumeForm, orient_boundary
from beltrami_scope.reports import BoundaryClassification, Conventions, IndexReport, SingularityRecord, SlkResult

logger = logging.getLogger(__name__)

# Cells with a corner-to-corner angle jump this large are re-walked along a finer boundary.
_REFINE_JUMP = 0.5 * np.pi
_MAX_EDGE_SAMPLES = 512
_ORPHAN_LIMIT = 4
_NEWTON_FD_STEP = 1e-7
_RANK_DROP = 1e-6


class PlanarField:
    """A plain (u, v) -> 2-vector field, placed on the plane z = 0."""

    def __init__(self, func: Callable[[np.ndarray], np.ndarray]):
        self.func = func

    def __call__(self, uv) -> np.ndarray:
        uv = np.asarray(uv, dtype=float).reshape(-1, 2)
        return np.asarray(self.func(uv), dtype=float).reshape(-1, 2)

    def embed(self, uv) -> np.ndarray:
        uv = np.asarray(uv, dtype=float).reshape(-1, 2)
        return np.column_stack((uv, np.zeros(len(uv))))


class ProjectedField:
    """X_D = X - g(X, n) n, in coordinates along the parameter tangents (d/du, d/dv)."""

    def __init__(self, field: VectorField, disc: MeridionalDisc, g: MetricField):
        self.field = field
        self.disc = disc
        self.g = g

    def decompose(self, uv) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Frame coordinates of X_D, the normal component g(X, n) and the unit normal n."""
        uv = np.asarray(uv, dtype=float).reshape(-1, 2)
        pts = self.disc.embed(uv)
        t_u, t_v = self.disc.tangents(uv)
        normal = self.disc.frame(self.g, uv)[2]
        vectors = self.field(pts)
        gram = np.empty((len(uv), 2, 2))
        gram[:, 0, 0] = self.g.pair(pts, t_u, t_u)
        gram[:, 0, 1] = gram[:, 1, 0] = self.g.pair(pts, t_u, t_v)
        gram[:, 1, 1] = self.g.pair(pts, t_v, t_v)
        rhs = np.column_stack((self.g.pair(pts, vectors, t_u), self.g.pair(pts, vectors, t_v)))
        coords = np.linalg.solve(gram, rhs[..., None])[..., 0]
        return coords, self.g.pair(pts, vectors, normal), normal

    def __call__(self, uv) -> np.ndarray:
        return self.decompose(uv)[0]

    def tangential(self, uv) -> np.ndarray:
        """X_D as a Cartesian vector."""
        coords = self(uv)
        t_u, t_v = self.disc.tangents(uv)
        return coords[:, 0:1] * t_u + coords[:, 1:2] * t_v

    def reconstruct(self, uv) -> np.ndarray:
        _, normal_part, normal = self.decompose(uv)
        return self.tangential(uv) + normal_part[:, None] * normal

    def embed(self, uv) -> np.ndarray:
        return self.disc.embed(uv)


def project_to_disc(field: VectorField, disc: MeridionalDisc, g: MetricField) -> ProjectedField:
    # Touch the frame once so a degenerate embedding fails here, not mid-scan.
    disc.frame(g, np.zeros((1, 2)))
    return ProjectedField(field, disc, g)


# --- Winding Numbers ---


def _wrapped(delta: np.ndarray) -> np.ndarray:
    return np.mod(delta + np.pi, TWO_PI) - np.pi


def poincare_index(
    F: Callable[[np.ndarray], np.ndarray],
    center=(0.0, 0.0),
    radius: float = 0.1,
    samples: int = WINDING_SAMPLES,
    max_samples: int = 1 << 16,
) -> int:
    """Winding number of F along the counterclockwise circle of the given radius."""
    center = np.asarray(center, dtype=float)
    n = max(8, int(samples))
    while True:
        t = np.linspace(0.0, TWO_PI, n, endpoint=False)
        ring = center + radius * np.column_stack((np.cos(t), np.sin(t)))
        values = F(ring)
        norms = np.hypot(values[:, 0], values[:, 1])
        if np.min(norms) <= SIGMA_FLOOR * max(float(np.max(norms)), 1e-300):
            raise WindingError(
                "Field vanishes on the winding circle.",
                center=center.tolist(),
                radius=radius,
            )
        angles = np.arctan2(values[:, 1], values[:, 0])
        steps = _wrapped(np.diff(np.append(angles, angles[0])))
        if np.max(np.abs(steps)) < np.pi / 2:
            break
        if n >= max_samples:
            raise WindingError("Winding did not resolve under refinement.", center=center.tolist(), radius=radius)
        n *= 2
    turns = float(np.sum(steps)) / TWO_PI
    index = int(round(turns))
    if abs(turns - index) > 1e-6:
        raise WindingError(f"Non-integer winding {turns:.9f}.", center=center.tolist(), radius=radius)
    return index


def boundary_winding(F: Callable[[np.ndarray], np.ndarray], samples: int = 256) -> int:
    return poincare_index(F, (0.0, 0.0), 1.0, samples)


# --- Singularity Search ---


def _cell_windings(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Winding around every lattice cell and the largest edge angle jump of each cell."""
    angles = np.arctan2(values[..., 1], values[..., 0])
    along_u = _wrapped(np.diff(angles, axis=0))  # edge (i, j) -> (i + 1, j)
    along_v = _wrapped(np.diff(angles, axis=1))  # edge (i, j) -> (i, j + 1)
    circulation = along_u[:, :-1] + along_v[1:, :] - along_u[:, 1:] - along_v[:-1, :]
    windings = np.rint(circulation / TWO_PI).astype(int)
    jumps = np.maximum.reduce(
        [np.abs(along_u[:, :-1]), np.abs(along_u[:, 1:]), np.abs(along_v[:-1, :]), np.abs(along_v[1:, :])]
    )
    return windings, jumps


def _square_winding(F, u0: float, v0: float, side: float, per_edge: int = 8) -> int | None:
    """Winding along the counterclockwise boundary of one lattice cell; None if it never resolves."""
    while per_edge <= _MAX_EDGE_SAMPLES:
        s = side * np.arange(per_edge) / per_edge
        low, high = np.full(per_edge, v0), np.full(per_edge, v0 + side)
        path = np.concatenate(
            (
                np.column_stack((u0 + s, low)),
                np.column_stack((np.full(per_edge, u0 + side), v0 + s)),
                np.column_stack((u0 + side - s, high)),
                np.column_stack((np.full(per_edge, u0), v0 + side - s)),
            )
        )
        values = F(path)
        angles = np.arctan2(values[:, 1], values[:, 0])
        steps = _wrapped(np.diff(np.append(angles, angles[0])))
        if np.max(np.abs(steps)) < _REFINE_JUMP:
            return int(np.rint(np.sum(steps) / TWO_PI))
        per_edge *= 2
    return None


def _jacobian(F, point: np.ndarray) -> np.ndarray:
    h = _NEWTON_FD_STEP
    stencil = point + np.array([[h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]])
    values = F(stencil)
    return np.column_stack(((values[0] - values[1]) / (2 * h), (values[2] - values[3]) / (2 * h)))


def _newton(F, start: np.ndarray, tolerance: float, scale: float) -> tuple[np.ndarray, float]:
    point = start.copy()
    residual = float(np.linalg.norm(F(point)[0]))
    for _ in range(NEWTON_MAX_ITER):
        if residual < tolerance:
            return point, residual
        value = F(point)[0]
        step = np.linalg.lstsq(_jacobian(F, point), -value, rcond=None)[0]
        damping = 1.0
        while damping > 1e-6:
            trial = point + damping * step
            trial_residual = float(np.linalg.norm(F(trial)[0]))
            if trial_residual < residual:
                break
            damping *= 0.5
        else:
            break
        point, residual = trial, trial_residual
    if residual < tolerance:
        return point, residual
    raise DegenerateSingularityError(
        "Newton refinement did not converge.",
        start=start.tolist(),
        residual=residual / scale,
    )


def find_singularities(
    F,
    resolution: int = DISC_SCAN_RESOLUTION,
    merge_radius: float = MERGE_RADIUS,
    tolerance: float = NEWTON_TOLERANCE,
) -> list[SingularityRecord]:
    """Rest points of a planar field on the closed unit disc, positions only."""
    spacing = 2.0 / (resolution - 1)
    # Offset the lattice so symmetric fields do not vanish on a node.
    nodes = np.linspace(-1.0, 1.0, resolution) + 0.3183 * spacing
    uu, vv = np.meshgrid(nodes, nodes, indexing="ij")
    values = F(np.column_stack((uu.ravel(), vv.ravel()))).reshape(resolution, resolution, 2)
    windings, jumps = _cell_windings(values)
    centers = nodes[:-1] + spacing / 2.0
    cu, cv = np.meshgrid(centers, centers, indexing="ij")
    inside = np.hypot(cu, cv) < 1.0
    scale = float(np.median(np.hypot(values[..., 0], values[..., 1])[:-1, :-1][inside]))
    absolute_tol = tolerance * max(scale, 1e-300)

    unresolved = np.zeros_like(inside)
    for i, j in zip(*np.nonzero(inside & (jumps >= _REFINE_JUMP))):
        refined = _square_winding(F, nodes[i], nodes[j], spacing)
        if refined is None:
            unresolved[i, j] = True
            windings[i, j] = 0
        else:
            windings[i, j] = refined

    candidates = (windings != 0) & inside
    near_candidate = np.zeros_like(candidates)
    for i, j in zip(*np.nonzero(candidates)):
        near_candidate[max(0, i - 2) : i + 3, max(0, j - 2) : j + 3] = True
    orphans = unresolved & ~near_candidate
    if np.count_nonzero(orphans) >= _ORPHAN_LIMIT:
        raise NonGenericFieldError(
            "Projected field vanishes along a curve; bump the disc or perturb the field.",
            orphan_cells=int(np.count_nonzero(orphans)),
        )

    records: list[SingularityRecord] = []
    for i, j in zip(*np.nonzero(candidates)):
        start = np.array([centers[i], centers[j]])
        point, residual = _newton(F, start, absolute_tol, scale)
        if np.hypot(*point) > 1.0:
            logger.info("Dropping rest point outside the disc at %s", point.tolist())
            continue
        if any(np.hypot(point[0] - r.uv[0], point[1] - r.uv[1]) < merge_radius for r in records):
            continue
        singular_values = np.linalg.svd(_jacobian(F, point), compute_uv=False)
        if singular_values[0] > 1e-3 * scale and singular_values[1] < _RANK_DROP * singular_values[0]:
            raise NonGenericFieldError(
                "Rest point with a rank-one Jacobian; the zero set is a curve.",
                uv=point.tolist(),
            )
        condition = float(singular_values[0] / max(singular_values[1], 1e-300))
        records.append(
            SingularityRecord(
                uv=(float(point[0]), float(point[1])),
                position=tuple(float(c) for c in F.embed(point)[0]),
                jacobian_condition=condition,
                residual=residual,
            )
        )
    records.sort(key=lambda r: (round(r.uv[0], 9), round(r.uv[1], 9)))
    return records


def winding_radius(record: SingularityRecord, records: list[SingularityRecord], merge_radius: float = MERGE_RADIUS) -> float:
    others = [np.hypot(record.uv[0] - r.uv[0], record.uv[1] - r.uv[1]) for r in records if r is not record]
    radius = min([WINDING_RADIUS_CAP] + [0.5 * d for d in others])
    return max(radius, 10.0 * merge_radius)


def _kind(index: int) -> str:
    return {1: "elliptic", -1: "hyperbolic"}.get(index, "higher-order")


def classify_singularities(
    F, records: list[SingularityRecord], samples: int = WINDING_SAMPLES
) -> list[SingularityRecord]:
    """Fill the Poincare index, kind and circle radius of every record."""

    def fill(record: SingularityRecord) -> SingularityRecord:
        radius = winding_radius(record, records)
        index = poincare_index(F, record.uv, radius, samples)
        return record.model_copy(update={"poincare_index": index, "kind": _kind(index), "winding_radius": radius})

    with ThreadPoolExecutor(max_workers=BSCOPE_THREADS) as pool:
        return list(pool.map(fill, records))


def sigma(field: VectorField, disc: MeridionalDisc, g: MetricField, record: SingularityRecord) -> int:
    uv = np.asarray(record.uv).reshape(1, 2)
    point = disc.embed(uv)
    normal = disc.frame(g, uv)[2]
    vector = field(point)
    relative = float(g.pair(point, vector, normal)[0] / g.norm(point, vector)[0])
    if abs(relative) < 10.0 * SIGMA_FLOOR:
        raise SigmaContradictionError(
            "X is tangent to the disc at a rest point of X_D.",
            uv=list(record.uv),
            relative_normal_component=relative,
        )
    return 1 if relative > 0 else -1


def compute_slk(
    field: VectorField,
    disc: MeridionalDisc,
    g: MetricField,
    resolution: int = DISC_SCAN_RESOLUTION,
    winding_samples: int = WINDING_SAMPLES,
    require_transverse: bool = True,
) -> SlkResult:
    """slk = S_STAR * sum of sigma * Ind over the rest points of X_D.

    With require_transverse=False the disc is used as oriented, which lets
    disc-only fixtures with a non-transverse boundary through.
    """
    oriented = orient_boundary(disc, field, g) if require_transverse else disc
    F = project_to_disc(field, oriented, g)
    records = classify_singularities(F, find_singularities(F, resolution), winding_samples)
    records = [r.model_copy(update={"sigma": sigma(field, oriented, g, r)}) for r in records]

    total_index = sum(r.poincare_index for r in records)
    winding = boundary_winding(F)
    if total_index != winding:
        raise NonGenericFieldError(
            "Rest point indices do not add up to the boundary winding.",
            index_sum=total_index,
            boundary_winding=winding,
        )
    weighted = sum(r.sigma * r.poincare_index for r in records)
    logger.info("Disc scan found %d rest points, weighted sum %d", len(records), weighted)
    return SlkResult(
        slk=S_STAR * weighted,
        weighted_sum=weighted,
        s_star=S_STAR,
        records=records,
        boundary_winding=winding,
        orientation=oriented.orientation,
        disc=oriented.describe(),
    )


# --- Index ---


def index_value(lambda_sign: int, slk: int | None, transversal: bool) -> int:
    """I = 0 if lambda = 0, Sign(lambda) * slk + 1 with a transverse meridian, else Sign(lambda)."""
    if lambda_sign == 0:
        return 0
    if transversal:
        if slk is None:
            raise ValueError("A transverse meridian needs its self-linking number.")
        return lambda_sign * slk + 1
    return lambda_sign


def lambda_sign(value: float, chart: TubeChart) -> int:
    """Sign of the eigenvalue estimate; |lambda| below LAMBDA_ZERO_RELATIVE / R counts as zero."""
    if abs(value) < LAMBDA_ZERO_RELATIVE / chart.R:
        return 0
    return 1 if value > 0 else -1


def witness_disc(classification: BoundaryClassification, chart: TubeChart, template: MeridionalDisc) -> MeridionalDisc:
    """A disc whose boundary is the witness meridian, keeping the template's bump and tilt."""
    z = np.asarray(classification.witness_z)
    if classification.witness_kind == "circle":
        return MeridionalDisc(chart, z0=float(z[0]), bump=template.bump, tilt=0.0)
    center = float(np.mean(z))
    return MeridionalDisc(chart, z0=center, bump=template.bump, lift=tuple(float(v) for v in z - center))


def _slk_with_retries(
    field: VectorField,
    disc: MeridionalDisc,
    g: MetricField,
    chart: TubeChart,
    resolution: int,
    winding_samples: int,
    retries: list[str],
) -> tuple[SlkResult, MeridionalDisc]:
    try:
        return compute_slk(field, disc, g, resolution, winding_samples), disc
    except NonGenericFieldError as err:
        logger.warning("Disc is not generic (%s); retrying with a bumped disc.", err)
    bumped = disc.bumped(disc.bump + BUMP_RETRY_FRACTION * chart.R)
    retries.append(f"bumped disc to {bumped.bump:g}")
    try:
        return compute_slk(field, bumped, g, resolution, winding_samples), bumped
    except NonGenericFieldError:
        if not field.analytic:
            raise
        logger.warning("Bumped disc still not generic; retrying with a perturbed field.")
    retries.append(f"perturbed field at amplitude {PERTURB_RETRY_AMPLITUDE:g}")
    perturbed = Perturbed(field, PERTURB_RETRY_AMPLITUDE, chart)
    return compute_slk(perturbed, bumped, g, resolution, winding_samples), bumped


def compute_index(
    field: VectorField,
    g: MetricField,
    mu: VolumeForm,
    chart: TubeChart,
    disc: MeridionalDisc | None = None,
    *,
    resolution: int = DISC_SCAN_RESOLUTION,
    winding_samples: int = WINDING_SAMPLES,
    boundary_grid: int | None = None,
    curl_tol: float | None = None,
    div_tol: float | None = None,
    assume_lambda_sign: int | None = None,
    energy: bool = True,
) -> IndexReport:
    """Run the full pipeline: invariance, eigenvalue, boundary trichotomy, disc count, index."""
    disc = disc or MeridionalDisc(chart)
    warnings: list[str] = []
    retries: list[str] = []

    invariance = boundary.check_invariance(field, g, chart)
    if not invariance.passed:
        raise NotInvariantError(
            "Field is not tangent to the boundary torus.", max_radial=invariance.max_radial
        )

    beltrami = None
    if assume_lambda_sign is None:
        samples = sample_points(chart)
        beltrami = beltrami_residuals(field, g, mu, samples, chart, curl_tol, div_tol)
        estimate = beltrami.lambda_estimate
        sign = lambda_sign(estimate, chart)
        if beltrami.passed and sign != 0:
            contact = contact_volume_sign(field, g, mu, samples, chart)
            if contact != sign:
                warnings.append(f"contact sign {contact} disagrees with Sign(lambda) = {sign}")
        source = "estimated"
    else:
        estimate, sign, source = None, int(assume_lambda_sign), "assumed"

    grid = boundary_grid or BOUNDARY_GRID
    classification = boundary.classify_boundary(boundary.boundary_foliation(field, g, chart, (grid, grid)))
    if beltrami is not None:
        warnings.extend(boundary.reeb_component_sanity(classification, beltrami.passed))

    slk = None
    literal = None
    if sign == 0:
        branch = "zero-eigenvalue"
        index = 0
    elif classification.kind == "TransversalExists" or classification.kind == "Degenerate":
        try:
            orient_boundary(disc, field, g)
        except NotTransverseError:
            if classification.kind != "TransversalExists":
                raise BoundaryDegenerateError(
                    "Boundary foliation is unresolved and the chosen disc is not transverse.",
                    **classification.diagnostics,
                )
            disc = witness_disc(classification, chart, disc)
            retries.append(f"switched to the {classification.witness_kind} witness meridian")
        slk, disc = _slk_with_retries(field, disc, g, chart, resolution, winding_samples, retries)
        branch = "transverse-meridian"
        index = index_value(sign, slk.slk, True)
        literal = sign * (1 + slk.weighted_sum)
    else:
        branch = "no-transverse-meridian"
        index = index_value(sign, None, False)

    passed = beltrami is None or beltrami.passed
    verdict = ("OrbitForced" if index != 0 else "Inconclusive") if passed else None
    return IndexReport(
        lambda_estimate=estimate,
        lambda_sign=sign,
        lambda_sign_source=source,
        beltrami=beltrami,
        invariance=invariance,
        disc=disc.describe(),
        slk=slk,
        boundary=classification,
        branch=branch,
        index=index,
        verdict=verdict,
        energy=l2_energy(field, g, mu, chart, (16, 16, 8)) if energy else None,
        retries=retries,
        warnings=warnings,
        conventions=Conventions(s_star=S_STAR, literal_sum_index=literal),
    )


def require_beltrami(report: IndexReport) -> IndexReport:
    if report.beltrami is not None and not report.beltrami.passed:
        raise NotBeltramiError(
            "Field failed the Beltrami check; verdict withheld.",
            curl_residual=report.beltrami.curl_residual,
            div_residual=report.beltrami.div_residual,
        )
    return report
