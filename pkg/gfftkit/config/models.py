"""Run configuration data models."""

from pathlib import Path

from pydantic import BaseModel, Field, field_validator, model_validator

from ..core.timefns import FunctionFamily


class SpaceSection(BaseModel):
    """The pair (a, b) and the time grid."""

    a_family: FunctionFamily = FunctionFamily.ZERO
    a_params: list[float] = Field(default_factory=list)
    b_family: FunctionFamily = FunctionFamily.LINEAR
    b_params: list[float] = Field(default_factory=lambda: [1.0])
    T: float = Field(default=1.0, gt=0)
    grid_n: int = 1024

    @field_validator("a_family", "b_family", mode="before")
    def validate_family(cls, v: str | FunctionFamily) -> FunctionFamily:
        if isinstance(v, str):
            return FunctionFamily(v)
        return v

    @field_validator("grid_n")
    def validate_grid_n(cls, v: int) -> int:
        if v <= 0 or v % 2:
            raise ValueError("grid_n must be even and positive")
        return v

    @model_validator(mode="after")
    def validate_origin(self) -> "SpaceSection":
        for name in ("a", "b"):
            family = getattr(self, f"{name}_family")
            params = getattr(self, f"{name}_params")
            if family is FunctionFamily.POLY and params and params[0] != 0.0:
                raise ValueError(f"{name}_params: constant term must be zero")
        return self


class OperatorsSection(BaseModel):
    """Kernel polynomials (ascending powers of t)."""

    phi1_poly: list[float] = Field(default_factory=lambda: [1.0])
    phi2_poly: list[float] = Field(default_factory=lambda: [0.0])
    phi_poly: list[float] | None = None


class AtomSpec(BaseModel):
    coef_re: float = 1.0
    coef_im: float = 0.0
    z_poly: list[float] = Field(default_factory=lambda: [0.0])

    @property
    def coef(self) -> complex:
        return complex(self.coef_re, self.coef_im)


class MeasureSection(BaseModel):
    atoms: list[AtomSpec] = Field(default_factory=list)


class ThetaPoint(BaseModel):
    weight_re: float = 1.0
    weight_im: float = 0.0
    v: list[float]

    @property
    def weight(self) -> complex:
        return complex(self.weight_re, self.weight_im)


class ThetaSection(BaseModel):
    """A discrete measure ν on ℝ^d and the d directions it is read along."""

    points: list[ThetaPoint] = Field(default_factory=list)
    directions: list[str]

    @model_validator(mode="after")
    def validate_dimensions(self) -> "ThetaSection":
        d = len(self.directions)
        for index, point in enumerate(self.points):
            if len(point.v) != d:
                raise ValueError(
                    f"points[{index}].v has length {len(point.v)}, expected {d}"
                )
        return self


class RunSection(BaseModel):
    q0: float = Field(default=0.5, gt=0)
    q1: float = 1.0
    q2: float = -1.0
    samples: int = Field(default=100_000, ge=100)
    seed: int = Field(default=0, ge=0)
    n_list: list[int] = Field(default_factory=lambda: [2, 4, 8, 16])
    rho1: float = Field(default=1.0, gt=0)
    rho2: float = Field(default=1.0, gt=0)
    lambda_re: float = Field(default=1.0, gt=0)
    lambda_im: float = 0.0
    basis_size: int = Field(default=16, ge=1, le=64)
    out: Path | None = None

    # element names from [elements]
    g1: str | None = None
    g2: str | None = None
    g: str | None = None
    w: str | None = None
    x0: str | None = None
    y1: str | None = None
    y2: str | None = None

    @field_validator("n_list")
    def validate_n_list(cls, v: list[int]) -> list[int]:
        if not v or any(n < 1 for n in v):
            raise ValueError("n_list entries must be positive")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("n_list must be strictly ascending")
        return v

    @model_validator(mode="after")
    def validate_q(self) -> "RunSection":
        for name in ("q1", "q2"):
            q = getattr(self, name)
            if abs(q) <= self.q0:
                raise ValueError(
                    f"|{name}| = {abs(q)} must exceed q0 = {self.q0} "
                    "(the boundary point must lie in Γ_q0)"
                )
        if max(self.n_list) > self.basis_size:
            raise ValueError("basis_size must cover the largest entry of n_list")
        return self


class RunConfig(BaseModel):
    """One experiment: a space, a functional, operators and run parameters."""

    space: SpaceSection = Field(default_factory=SpaceSection)
    elements: dict[str, list[float]] = Field(default_factory=dict)
    operators: OperatorsSection = Field(default_factory=OperatorsSection)
    measure: MeasureSection = Field(default_factory=MeasureSection)
    theta: ThetaSection | None = None
    run: RunSection = Field(default_factory=RunSection)

    @model_validator(mode="after")
    def validate_references(self) -> "RunConfig":
        names = [
            getattr(self.run, key)
            for key in ("g1", "g2", "g", "w", "x0", "y1", "y2")
            if getattr(self.run, key) is not None
        ]
        if self.theta is not None:
            names.extend(self.theta.directions)
        missing = sorted({n for n in names if n not in self.elements})
        if missing:
            raise ValueError(f"unknown element names: {', '.join(missing)}")
        return self
