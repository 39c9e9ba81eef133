# beltrami_scope/reports.py
"""Result models shared by the compute modules and serialized into the JSON report."""

from typing import Literal

from pydantic import BaseModel, Field


class BeltramiReport(BaseModel):
    lambda_estimate: float = Field(description="Least-squares eigenvalue of curl X = lambda X.")
    curl_residual: float = Field(description="max |curl X - lambda X|_g / |X|_g over samples.")
    div_residual: float = Field(description="max |div_mu X| over samples.")
    curl_tolerance: float
    div_tolerance: float
    sample_count: int
    passed: bool


class InvarianceReport(BaseModel):
    """Tangency of X to the boundary torus."""

    max_radial: float = Field(description="max |g(X, e_r)| / |X|_g on the boundary.")
    tolerance: float
    passed: bool


class SingularityRecord(BaseModel):
    uv: tuple[float, float] = Field(description="Disc parameter of the rest point.")
    position: tuple[float, float, float] = Field(description="Cartesian point on the disc.")
    poincare_index: int = 0
    sigma: int = Field(0, description="Sign of g(X, n) at the rest point; 0 until filled.")
    kind: Literal["elliptic", "hyperbolic", "higher-order", "unclassified"] = "unclassified"
    jacobian_condition: float = Field(description="Condition number of dF at the refined zero.")
    winding_radius: float = 0.0
    residual: float = Field(description="|F| at the refined position.")


class SlkResult(BaseModel):
    slk: int
    weighted_sum: int = Field(description="sum of sigma * Ind before the calibration sign.")
    s_star: int
    records: list[SingularityRecord]
    boundary_winding: int = Field(description="Winding of X_D along the disc boundary.")
    orientation: int = Field(description="+1 if the boundary runs counterclockwise in (u, v).")
    disc: dict[str, float | int | bool]


class BoundaryClassification(BaseModel):
    kind: Literal["TransversalExists", "MeridionalFoliation", "ReebComponent", "Degenerate"]
    witness_kind: Literal["circle", "graph"] | None = None
    witness_z: list[float] | None = Field(
        None, description="Witness meridian z(theta) sampled on the theta grid."
    )
    witness_min_angle: float | None = None
    closed_leaves: list[float] = Field(
        default_factory=list, description="z-positions of closed meridional leaves at theta = 0."
    )
    diagnostics: dict[str, float | str] = Field(default_factory=dict)


class Conventions(BaseModel):
    s_star: int
    curl: str = "mu(curl X, ., .) = d(g(X, .))"
    index_formula: str = "Sign(lambda) * slk + 1 (transverse), Sign(lambda) (none), 0 (lambda = 0)"
    literal_sum_index: int | None = Field(
        None, description="Sign(lambda) * (1 + sum sigma * Ind), recorded for comparison only."
    )
    disc_orientation: str = "boundary oriented so that alpha(gamma') > 0; normal by outward-first rule"


class IndexReport(BaseModel):
    lambda_estimate: float | None = Field(description="None when the sign was assumed, not measured.")
    lambda_sign: int
    lambda_sign_source: Literal["estimated", "assumed"] = "estimated"
    beltrami: BeltramiReport | None = None
    invariance: InvarianceReport | None = None
    disc: dict[str, float | int | bool]
    slk: SlkResult | None = None
    boundary: BoundaryClassification | None = None
    branch: Literal["zero-eigenvalue", "transverse-meridian", "no-transverse-meridian"]
    index: int
    verdict: Literal["OrbitForced", "Inconclusive"] | None = Field(
        description="Withheld (None) when the Beltrami check failed."
    )
    energy: float | None = None
    retries: list[str] = Field(default_factory=list)
    warnings: list[str] = Field(default_factory=list)
    conventions: Conventions


class OracleResult(BaseModel):
    slk: int
    raw_linking: float
    rounding_residual: float
    section: Literal["e_x", "e_y", "e_z"] = Field(
        description="Reference vector projected onto the contact plane at the disc centre."
    )
    push_distance: float


class OrbitRecord(BaseModel):
    initial_point: tuple[float, float, float]
    period: float
    winding: tuple[int, int] = Field(description="(meridian m, longitude n) winding.")
    closure_residual: float
    mean_radius: float
    contractible: bool


class CrossValidation(BaseModel):
    status: Literal["confirmed", "unconfirmed", "inconclusive"]
    message: str
    orbits_found: int
    witness: OrbitRecord | None = None


class CalibrationRun(BaseModel):
    resolution: int
    weighted_sum: int
    oracle_slk: int
    s_star: int


class CalibrationResult(BaseModel):
    s_star: int
    stable: bool
    runs: list[CalibrationRun]
