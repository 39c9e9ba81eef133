# beltrami_scope/verify.py
"""Independent checks on the disc count: a Gauss-linking push-off oracle and a closed-orbit hunt."""

import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.integrate import solve_ivp

from beltrami_scope.config import (
    BSCOPE_THREADS,
    ORACLE_RESIDUAL_MAX,
    ORACLE_SAMPLES,
    ORBIT_CLOSURE_MAX,
    ORBIT_MAX_PERIOD_FACTOR,
    ORBIT_SEEDS,
    ORBIT_TOLERANCE,
    PUSH_OFF_FRACTION,
    S_STAR,
)
from beltrami_scope.disc_index import compute_slk
from beltrami_scope.errors import OracleUnavailableError, StiffnessError
from beltrami_scope.fields import LundquistField, VectorField
from beltrami_scope.geometry import TWO_PI, MeridionalDisc, MetricField, TubeChart, orient_boundary
from beltrami_scope.reports import (
    CalibrationResult,
    CalibrationRun,
    CrossValidation,
    IndexReport,
    OracleResult,
    OrbitRecord,
)

logger = logging.getLogger(__name__)

_SECTION_SHARE = 0.3
_RAY_STEPS = 200
_NEWTON_STEPS = 20


@dataclasses.dataclass
class PolyCurve:
    """Polygonal curve in lifted coordinates (z is not wrapped)."""

    points: np.ndarray
    chart: TubeChart
    closed: bool = False

    def segment_lengths(self) -> np.ndarray:
        pts = np.vstack((self.points, self.points[:1])) if self.closed else self.points
        return np.linalg.norm(np.diff(pts, axis=0), axis=1)

    def winding_turns(self) -> tuple[float, float]:
        """Raw (meridian, longitude) turns accumulated along the curve."""
        pts = np.vstack((self.points, self.points[:1])) if self.closed else self.points
        r = np.hypot(pts[:, 0], pts[:, 1])
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        steps = np.mod(np.diff(theta) + np.pi, TWO_PI) - np.pi
        steps[(r[:-1] < 1e-12) | (r[1:] < 1e-12)] = 0.0
        return float(np.sum(steps) / TWO_PI), float((pts[-1, 2] - pts[0, 2]) / self.chart.L)

    def winding(self) -> tuple[int, int]:
        m, n = self.winding_turns()
        return int(round(m)), int(round(n))


# --- Linking Oracle ---


def gauss_linking(first: np.ndarray, second: np.ndarray) -> float:
    """Linking number of two closed polygons by summing exact segment-pair solid angles."""
    ls = np.vstack((first, first[:1]))
    ks = np.vstack((second, second[:1]))
    l0, l1 = ls[None, :-1, :], ls[None, 1:, :]
    k0, k1 = ks[:-1, None, :], ks[1:, None, :]
    a, b, c, d = l0 - k0, l0 - k1, l1 - k1, l1 - k0
    p = np.einsum("ijk,ijk->ij", a, np.cross(b, c))
    an, bn, cn, dn = (np.linalg.norm(v, axis=-1) for v in (a, b, c, d))

    def dot(u, v):
        return np.einsum("ijk,ijk->ij", u, v)

    d1 = an * bn * cn + dot(a, b) * cn + dot(b, c) * an + dot(c, a) * bn
    d2 = an * dn * cn + dot(a, d) * cn + dot(d, c) * an + dot(c, a) * dn
    return float(np.sum(np.arctan2(p, d1) + np.arctan2(p, d2)) / TWO_PI)


def _contact_projection(g: MetricField, pts: np.ndarray, vectors: np.ndarray, fields: np.ndarray) -> np.ndarray:
    weight = g.pair(pts, vectors, fields) / g.pair(pts, fields, fields)
    return vectors - weight[:, None] * fields


def _ray_section(field: VectorField, disc: MeridionalDisc, g: MetricField, uv_rim: np.ndarray) -> tuple[np.ndarray, str]:
    """A section of ker(alpha) over the disc, carried outward along rays from the centre."""
    centre = disc.embed(np.zeros((1, 2)))
    x0 = field(centre)
    for name, ref in (("e_x", (1.0, 0.0, 0.0)), ("e_y", (0.0, 1.0, 0.0)), ("e_z", (0.0, 0.0, 1.0))):
        ref = np.asarray(ref).reshape(1, 3)
        start = _contact_projection(g, centre, ref, x0)
        if g.norm(centre, start)[0] > 1e-3 * g.norm(centre, ref)[0]:
            break
    else:
        raise OracleUnavailableError("No reference vector projects onto the contact plane at the centre.")

    section = np.repeat(start / g.norm(centre, start)[0], len(uv_rim), axis=0)
    for s in np.linspace(0.0, 1.0, _RAY_STEPS + 1)[1:]:
        pts = disc.embed(s * uv_rim)
        section = _contact_projection(g, pts, section, field(pts))
        size = g.norm(pts, section)
        if np.min(size) < 0.5:
            raise OracleUnavailableError("Contact planes turn too fast along the rays.", ray_fraction=float(s))
        section /= size[:, None]
    return section, name


def slk_pushoff_oracle(
    field: VectorField,
    disc: MeridionalDisc,
    g: MetricField,
    push_fraction: float = PUSH_OFF_FRACTION,
    samples: int = ORACLE_SAMPLES,
) -> OracleResult:
    """slk as the linking number of the meridian with its push-off along a section of ker(alpha)."""
    oriented = orient_boundary(disc, field, g)
    distance = push_fraction * disc.chart.R
    for attempt in range(2):
        t = TWO_PI * np.arange(samples) / samples
        uv = oriented.boundary_parameters(t)
        curve = oriented.embed(uv)
        section, name = _ray_section(field, oriented, g, uv)
        push = curve + distance * section / np.linalg.norm(section, axis=1)[:, None]
        raw = gauss_linking(curve, push)
        rounded = int(round(raw))
        if abs(raw - rounded) < ORACLE_RESIDUAL_MAX:
            return OracleResult(
                slk=rounded,
                raw_linking=raw,
                rounding_residual=abs(raw - rounded),
                section=name,
                push_distance=distance,
            )
        logger.warning("Linking integral %.4f is far from an integer; doubling samples.", raw)
        samples *= 2
    raise OracleUnavailableError("Linking integral did not settle on an integer.", raw_linking=raw)


# --- Flowlines ---


def _flow(field: VectorField):
    def rhs(_, state):
        point = state[:3].reshape(1, 3)
        vector = field(point)[0]
        x, y = state[0], state[1]
        spin = (x * vector[1] - y * vector[0]) / max(x * x + y * y, 1e-24)
        return np.append(vector, spin)

    return rhs


def integrate_flowline(
    field: VectorField,
    start,
    duration: float,
    chart: TubeChart,
    tolerance: float = 1e-9,
) -> PolyCurve:
    start = np.asarray(start, dtype=float).ravel()
    run = solve_ivp(
        _flow(field),
        (0.0, duration),
        np.append(start, 0.0),
        method="DOP853",
        rtol=tolerance,
        atol=tolerance * chart.R,
        dense_output=True,
    )
    if not run.success:
        raise StiffnessError(f"Flowline integration failed: {run.message}", start=start.tolist())
    length = float(np.sum(np.linalg.norm(np.diff(run.y[:3].T, axis=0), axis=1)))
    count = max(2, int(np.ceil(length / (0.04 * chart.R))) + 1)
    points = run.sol(np.linspace(0.0, duration, count))[:3].T
    r = np.hypot(points[:, 0], points[:, 1])
    outside = r > chart.R
    if np.any(outside):
        logger.warning("Clipping %d flowline points that drifted outside r = R.", int(outside.sum()))
        points[outside, :2] *= (chart.R / r[outside])[:, None]
    return PolyCurve(points, chart)


# --- Closed Orbits ---


@dataclasses.dataclass(frozen=True)
class _Section:
    kind: str  # "meridian" (half-plane theta = 0) or "disc" (plane z = z0)
    z0: float

    def point(self, q: np.ndarray) -> np.ndarray:
        if self.kind == "meridian":
            return np.array([q[0], 0.0, q[1]])
        return np.array([q[0], q[1], self.z0])


def _first_return(field, section: _Section, q: np.ndarray, chart: TubeChart, max_period: float, tol: float):
    """Return point, elapsed time and the lifted end state of one pass around the section."""
    start = np.append(section.point(q), 0.0)
    if section.kind == "meridian":
        events = [lambda t, s: s[3] - TWO_PI, lambda t, s: s[3] + TWO_PI]
    else:
        events = [lambda t, s: s[2] - start[2] - chart.L, lambda t, s: s[2] - start[2] + chart.L]
    for event in events:
        event.terminal = True
    run = solve_ivp(
        _flow(field), (0.0, max_period), start, method="DOP853", rtol=tol, atol=tol * chart.R, events=events
    )
    hits = [(ts[0], ys[0]) for ts, ys in zip(run.t_events, run.y_events) if len(ts)]
    if not run.success or not hits:
        return None
    elapsed, state = min(hits, key=lambda hit: hit[0])
    if section.kind == "meridian":
        image = np.array([np.hypot(state[0], state[1]), state[2]])
    else:
        image = state[:2].copy()
    return image, elapsed, state


def _gap(section: _Section, image: np.ndarray, q: np.ndarray, chart: TubeChart) -> np.ndarray:
    delta = image - q
    if section.kind == "meridian":
        delta[1] = chart.wrap_dz(delta[1])
    return delta


def _hunt(field, section: _Section, q0: np.ndarray, chart: TubeChart, max_period: float, tol: float) -> OrbitRecord | None:
    q = q0.copy()
    h = 1e-6 * chart.R
    for _ in range(_NEWTON_STEPS):
        ret = _first_return(field, section, q, chart, max_period, tol)
        if ret is None:
            return None
        gap = _gap(section, ret[0], q, chart)
        if np.linalg.norm(gap) < ORBIT_TOLERANCE * max(1.0, chart.R):
            break
        jac = np.empty((2, 2))
        for k in range(2):
            nudged = q.copy()
            nudged[k] += h
            shifted = _first_return(field, section, nudged, chart, max_period, tol)
            if shifted is None:
                return None
            jac[:, k] = (_gap(section, shifted[0], nudged, chart) - gap) / h
        q = q + np.linalg.lstsq(jac, -gap, rcond=None)[0]
        if section.kind == "meridian" and not 0.0 < q[0] <= chart.R:
            return None
        if section.kind == "disc" and np.hypot(*q) > chart.R:
            return None
    else:
        return None

    image, period, state = ret
    closure = float(np.linalg.norm(gap))
    if closure >= ORBIT_CLOSURE_MAX * max(1.0, chart.R):
        return None
    turns_m = state[3] / TWO_PI
    turns_n = (state[2] - section.point(q)[2]) / chart.L
    m, n = int(round(turns_m)), int(round(turns_n))
    if abs(turns_m - m) > 1e-3 or abs(turns_n - n) > 1e-3:
        logger.warning("Orbit with non-integer winding (%.4f, %.4f) ignored.", turns_m, turns_n)
        return None
    orbit = integrate_flowline(field, section.point(q), period, chart, tol)
    return OrbitRecord(
        initial_point=tuple(float(c) for c in section.point(q)),
        period=float(period),
        winding=(m, n),
        closure_residual=closure,
        mean_radius=float(np.mean(np.hypot(orbit.points[:, 0], orbit.points[:, 1]))),
        contractible=n == 0,
    )


def orbit_seeds(chart: TubeChart, count: int = ORBIT_SEEDS) -> np.ndarray:
    """Seeds stratified in (r, z) on the half-plane theta = 0."""
    side = max(1, int(round(np.sqrt(count))))
    r = chart.R * (np.arange(side) + 0.5) / side
    z = chart.L * np.arange(side) / side
    rr, zz = np.meshgrid(r, z, indexing="ij")
    return np.column_stack((rr.ravel(), np.zeros(rr.size), zz.ravel()))


def _choose_section(field: VectorField, seed: np.ndarray) -> _Section | None:
    vector = field(seed)[0]
    size = np.linalg.norm(vector)
    if abs(vector[1]) >= abs(vector[2]) and abs(vector[1]) > _SECTION_SHARE * size:
        return _Section("meridian", 0.0)
    if abs(vector[2]) > _SECTION_SHARE * size:
        return _Section("disc", float(seed[2]))
    return None


def find_closed_orbits(
    field: VectorField,
    chart: TubeChart,
    seeds: np.ndarray | None = None,
    max_period: float | None = None,
    tolerance: float = 1e-11,
) -> list[OrbitRecord]:
    """Multi-start return-map search; contractible orbits first."""
    seeds = orbit_seeds(chart) if seeds is None else np.asarray(seeds, dtype=float).reshape(-1, 3)
    max_period = max_period or ORBIT_MAX_PERIOD_FACTOR * chart.L

    def search(seed):
        section = _choose_section(field, seed)
        if section is None:
            logger.debug("No transverse section at seed %s", seed.tolist())
            return None
        q0 = np.array([np.hypot(seed[0], seed[1]), seed[2]]) if section.kind == "meridian" else seed[:2].copy()
        try:
            return _hunt(field, section, q0, chart, max_period, tolerance)
        except StiffnessError as err:
            logger.debug("Seed %s discarded: %s", seed.tolist(), err)
            return None

    with ThreadPoolExecutor(max_workers=BSCOPE_THREADS) as pool:
        found = [orbit for orbit in pool.map(search, seeds) if orbit is not None]

    unique: list[OrbitRecord] = []
    for orbit in found:
        if any(
            o.winding == orbit.winding
            and np.linalg.norm(np.subtract(o.initial_point, orbit.initial_point)) < 1e-5 * chart.R
            for o in unique
        ):
            continue
        unique.append(orbit)
    unique.sort(key=lambda o: (not o.contractible, o.period))
    return unique


def cross_validate(
    report: IndexReport,
    field: VectorField,
    chart: TubeChart,
    seeds: np.ndarray | None = None,
    max_period: float | None = None,
) -> CrossValidation:
    if report.index == 0:
        return CrossValidation(
            status="inconclusive",
            message="Index is zero; the index is not sharp, so no orbit is forced.",
            orbits_found=0,
        )
    orbits = find_closed_orbits(field, chart, seeds, max_period)
    witnesses = [o for o in orbits if o.contractible]
    if witnesses:
        return CrossValidation(
            status="confirmed",
            message="Contractible closed orbit found.",
            orbits_found=len(orbits),
            witness=witnesses[0],
        )
    return CrossValidation(
        status="unconfirmed",
        message="No contractible orbit within the search budget; the nonzero index still forces one.",
        orbits_found=len(orbits),
    )


def calibrate(resolutions: tuple[int, ...] = (128, 256)) -> CalibrationResult:
    """Fix the sign relating sum sigma * Ind to the linking oracle on the Lundquist field at R = 1."""
    chart = TubeChart(1.0, TWO_PI)
    field = LundquistField(1.0)
    g = MetricField.euclidean()
    disc = MeridionalDisc(chart)
    oracle = slk_pushoff_oracle(field, disc, g).slk
    runs = []
    for resolution in resolutions:
        weighted = compute_slk(field, disc, g, resolution=resolution).weighted_sum
        runs.append(
            CalibrationRun(
                resolution=resolution,
                weighted_sum=weighted,
                oracle_slk=oracle,
                s_star=oracle * weighted,
            )
        )
    signs = {run.s_star for run in runs}
    return CalibrationResult(
        s_star=runs[0].s_star,
        stable=len(signs) == 1 and S_STAR in signs,
        runs=runs,
    )
