"""
Strict JSON run configuration.

Unknown keys are rejected everywhere; shorthand strings are accepted for the
metric (``"identity"``), the oracle (``"clifford"``) and the group
(``"torus-2"``) and expanded to their full form, which is what reports echo.
"""
from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import exprlang
from .errors import ConfigError, CoverEmbedError

__all__ = ["RunConfig", "parse_config", "load_config", "effective", "config_hash"]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class MetricSpec(_Strict):
    family: Literal["identity", "constant", "conformal", "revolution", "expression"]
    matrix: Optional[List[List[float]]] = None
    f: Optional[str] = None
    R: Optional[float] = None
    rho: Optional[float] = None
    entries: Optional[List[str]] = None

    @model_validator(mode="after")
    def _family_fields(self):
        fam = self.family
        allowed = {
            "identity": set(),
            "constant": {"matrix"},
            "conformal": {"f"},
            "revolution": {"R", "rho"},
            "expression": {"entries"},
        }[fam]
        extra = {k for k in ("matrix", "f", "R", "rho", "entries") if getattr(self, k) is not None} - allowed
        if extra:
            raise ValueError(f"fields {sorted(extra)} do not apply to family {fam!r}")
        if fam == "constant" and self.matrix is None:
            raise ValueError("constant family needs 'matrix'")
        if fam == "expression" and not self.entries:
            raise ValueError("expression family needs 'entries'")
        if fam == "revolution":
            R = 2.0 if self.R is None else self.R
            rho = 1.0 if self.rho is None else self.rho
            if not R > rho > 0:
                raise ValueError(f"revolution metric needs R > rho > 0, got R={R}, rho={rho}")
            return self.model_copy(update={"R": R, "rho": rho})
        if fam == "conformal" and self.f is None:
            return self.model_copy(update={"f": "0.3*sin(2*pi*x1)"})
        return self


class GeneratorSpec(_Strict):
    A: List[List[int]]
    v: List[Union[int, float, str]]

    @field_validator("v")
    @classmethod
    def _rational(cls, v):
        out = []
        for t in v:
            if isinstance(t, str):
                try:
                    Fraction(t)
                except (ValueError, ZeroDivisionError):
                    raise ValueError(f"cannot read {t!r} as a rational number") from None
            out.append(t)
        return out


class GroupSpec(_Strict):
    name: Optional[str] = None
    generators: Optional[List[GeneratorSpec]] = None

    @model_validator(mode="after")
    def _one_of(self):
        if (self.name is None) == (self.generators is None):
            raise ValueError("give exactly one of 'name' or 'generators'")
        return self


class SplitSpec(_Strict):
    fraction: float = Field(0.5, gt=0.0, lt=1.0)
    resolution: Optional[int] = Field(None, ge=2)


class OracleSpec(_Strict):
    name: Literal["clifford", "clifford-general", "revolution", "warped", "expression"]
    R: Optional[float] = None
    rho: Optional[float] = None
    components: Optional[List[str]] = None
    candidates: Optional[List[List[int]]] = None

    @model_validator(mode="after")
    def _fields(self):
        if self.name == "expression" and not self.components:
            raise ValueError("expression oracle needs 'components'")
        if self.name != "expression" and self.components is not None:
            raise ValueError("'components' only applies to the expression oracle")
        if self.name == "revolution":
            R = 2.0 if self.R is None else self.R
            rho = 1.0 if self.rho is None else self.rho
            if not R > rho > 0:
                raise ValueError(f"revolution oracle needs R > rho > 0, got R={R}, rho={rho}")
            return self.model_copy(update={"R": R, "rho": rho})
        if self.R is not None or self.rho is not None:
            raise ValueError("'R'/'rho' only apply to the revolution oracle")
        return self


class SpiralSpec(_Strict):
    r_in: float = Field(1.0, gt=0.0)
    r_out: float = 2.0
    k: float = Field(1.0, gt=0.0)
    tol: float = Field(1e-10, gt=0.0)

    @model_validator(mode="after")
    def _annulus(self):
        if not self.r_out > self.r_in:
            raise ValueError("need r_out > r_in")
        if self.k * (self.r_out - self.r_in) / 4.0 >= 1.0:
            raise ValueError("speed budget violated: k (r_out - r_in) / 4 must be < 1")
        return self


class VerifySpec(_Strict):
    seed: int = Field(0, ge=0)
    samples: int = Field(1000, ge=1)
    window: float = Field(5.0, gt=0.0)
    bound_window: float = Field(1000.0, gt=0.0)
    bound_samples: int = Field(10_000, ge=1)
    injectivity_pairs: int = Field(10_000, ge=2)
    domain_floor: float = Field(0.1, gt=0.0)
    image_floor: float = Field(1e-4, gt=0.0)
    shift_radius: int = Field(10, ge=1)
    properness_samples: int = Field(100, ge=1)
    translations: int = Field(100, ge=1)
    pullback_tol: float = Field(1e-8, gt=0.0)
    fd_tol: float = Field(1e-6, gt=0.0)
    equivariance_tol: float = Field(1e-9, gt=0.0)


class ExportSpec(_Strict):
    window: float = Field(2.0, gt=0.0)
    resolution: int = Field(128, ge=2)
    coords: List[int] = Field(default_factory=lambda: [0, 1, 2])
    samples: int = Field(1000, ge=1)

    @field_validator("coords")
    @classmethod
    def _triple(cls, v):
        if len(v) != 3 or min(v) < 0:
            raise ValueError("coords must be three non-negative indices")
        return v


class RunConfig(_Strict):
    n: int = Field(ge=1)
    metric: MetricSpec
    oracle: OracleSpec
    group: Optional[GroupSpec] = None
    split: SplitSpec = SplitSpec()
    spiral: SpiralSpec = SpiralSpec()
    verify: VerifySpec = VerifySpec()
    export: ExportSpec = ExportSpec()

    @model_validator(mode="before")
    @classmethod
    def _shorthand(cls, data):
        if not isinstance(data, dict):
            return data
        data = dict(data)
        if isinstance(data.get("metric"), str):
            data["metric"] = {"family": data["metric"]}
        if isinstance(data.get("oracle"), str):
            data["oracle"] = {"name": data["oracle"]}
        if isinstance(data.get("group"), str):
            data["group"] = {"name": data["group"]}
        return data

    @model_validator(mode="after")
    def _cross_references(self):
        n = self.n
        m = self.metric
        if m.family == "constant":
            if len(m.matrix) != n or any(len(r) != n for r in m.matrix):
                raise ValueError(f"metric.matrix must be {n}x{n}")
        if m.family == "revolution" and n != 2:
            raise ValueError("metric.family 'revolution' requires n = 2")
        if m.family == "expression" and len(m.entries) != n * (n + 1) // 2:
            raise ValueError(f"metric.entries needs {n * (n + 1) // 2} upper-triangle entries for n={n}")
        for label, texts in (("metric.f", [m.f] if m.f else []),
                             ("metric.entries", m.entries or []),
                             ("oracle.components", self.oracle.components or [])):
            for i, t in enumerate(texts):
                try:
                    exprlang.parse(t, n)
                except CoverEmbedError as exc:
                    raise ValueError(f"{label}[{i}]: {exc}") from None
        o = self.oracle
        if o.name in ("revolution", "warped") and n != 2:
            raise ValueError(f"oracle.name {o.name!r} is only defined for n = 2 (config has n = {n})")
        if o.candidates is not None and any(len(a) != n for a in o.candidates):
            raise ValueError(f"oracle.candidates vectors must have {n} entries")
        group = self.group or GroupSpec(name=f"torus-{n}")
        if group.name is not None:
            gdim = _named_group_dimension(group.name)
            if gdim != n:
                raise ValueError(f"group.name {group.name!r} acts on R^{gdim}, config has n = {n}")
        else:
            for i, g in enumerate(group.generators):
                if len(g.A) != n or any(len(r) != n for r in g.A) or len(g.v) != n:
                    raise ValueError(f"group.generators[{i}] must act on R^{n}")
        if self.group is None:
            return self.model_copy(update={"group": group})
        return self


def _named_group_dimension(name):
    if name in ("pg", "pgg"):
        return 2
    if name.startswith("torus-"):
        try:
            return int(name.split("-", 1)[1])
        except ValueError:
            pass
    raise ValueError(f"unknown group {name!r}")


def _format_errors(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"])
        msg = e["msg"].removeprefix("Value error, ")
        lines.append(f"{loc}: {msg}" if loc else msg)
    return "; ".join(lines)


def parse_config(text: str | dict) -> RunConfig:
    """Validate JSON text (or an already-decoded dict) into a :class:`RunConfig`."""
    if isinstance(text, (str, bytes)):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    else:
        data = text
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc)) from None


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def effective(cfg: RunConfig) -> dict:
    """Fully expanded config as plain JSON data."""
    return cfg.model_dump(mode="json")


def config_hash(cfg: RunConfig) -> str:
    blob = json.dumps(effective(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
