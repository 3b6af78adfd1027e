"""
Settings for the CT-MHD solver

Process-wide settings come from the environment (a .env file is honoured).
Per-run settings are plain-text `key = value` files parsed into RunConfig.
"""
import os
from pathlib import Path
from typing import Dict, Iterable, List, Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from core.errors import ConfigError

load_dotenv()

TRUE_WORDS = {"on", "true", "yes", "1"}
FALSE_WORDS = {"off", "false", "no", "0"}


def _env_flag(name: str, default: bool) -> bool:
    value = os.getenv(name)
    if value is None:
        return default
    return value.strip().lower() in TRUE_WORDS


class Settings:
    LOG_LEVEL = os.getenv("CT_MHD_LOG_LEVEL", "INFO").upper()
    OUTPUT_DIR = os.getenv("CT_MHD_OUTPUT_DIR", "output")
    PROGRESS = _env_flag("CT_MHD_PROGRESS", True)
    CHUNK_SIZE = int(os.getenv("CT_MHD_CHUNK_SIZE", "65536"))
    LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


settings = Settings()


class LimiterConfig(BaseModel):
    """Artificial-resistivity limiter block (`limiter.*` keys)."""
    model_config = ConfigDict(extra="forbid")

    enabled: bool = True
    lambda_self: float = Field(1000.0, gt=0)
    lambda_nbr: float = Field(1.0, gt=0)
    e: float = Field(4.0, ge=1)
    eta_mode: Optional[Literal["advection", "mhd"]] = None
    eta_scale: float = Field(1.0, gt=0)


class RunConfig(BaseModel):
    """One simulation run."""
    model_config = ConfigDict(extra="forbid")

    problem: str
    nx: int = Field(gt=0)
    ny: Optional[int] = Field(None, gt=0)
    nz: Optional[int] = Field(None, gt=0)
    grid: Optional[Literal["cartesian", "colella", "shocktube-blend", "cloud-inclusion"]] = None
    beta: Optional[float] = None
    quadrature: int = Field(2, ge=2, le=3)
    cfl: Optional[float] = Field(None, gt=0)
    t_final: Optional[float] = Field(None, ge=0)
    max_steps: int = Field(1_000_000, gt=0)
    dt_max: float = Field(1.0, gt=0)
    corrector: bool = True
    integrator: Literal["ssprk3", "euler"] = "ssprk3"
    potential_solver: Literal["rusanov", "force"] = "rusanov"
    ct25d_full: Optional[bool] = None
    weno: bool = True
    limiter: LimiterConfig = Field(default_factory=LimiterConfig)
    output_dir: str = Field(default_factory=lambda: settings.OUTPUT_DIR)
    output_every: int = Field(0, ge=0)
    output_formats: List[Literal["csv", "vtk", "curves"]] = Field(default_factory=lambda: ["csv"])
    levels: int = Field(3, ge=2)
    reference_cells: int = Field(10_000, gt=1)

    @field_validator("output_formats", mode="before")
    @classmethod
    def _split_formats(cls, value):
        if isinstance(value, str):
            return [part.strip() for part in value.split(",") if part.strip()]
        return value

    @field_validator("corrector", "weno", "ct25d_full", mode="before")
    @classmethod
    def _switch(cls, value):
        return _parse_switch(value)


def _parse_switch(value):
    if isinstance(value, str):
        word = value.strip().lower()
        if word in TRUE_WORDS:
            return True
        if word in FALSE_WORDS:
            return False
    return value


REQUIRED_KEYS = ("problem", "nx")


def parse_key_values(lines: Iterable[str], source: str = "<config>") -> Dict[str, object]:
    """
    Parse `key = value` lines into a (possibly nested) dictionary

    Args:
        lines: Raw text lines; `#` starts a comment
        source: Name used in error messages

    Returns:
        Dictionary with dotted keys folded into sub-dictionaries
    """
    data: Dict[str, object] = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line, f"expected 'key = value' ({source}, line {number})")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("<empty>", f"missing key ({source}, line {number})")
        target = data
        *parents, leaf = key.split(".")
        for parent in parents:
            target = target.setdefault(parent, {})
            if not isinstance(target, dict):
                raise ConfigError(key, "conflicts with a scalar key")
        target[leaf] = _parse_switch(value) if leaf == "enabled" else value
    return data


def build_run_config(data: Dict[str, object]) -> RunConfig:
    """Validate a parsed dictionary, naming the offending key on failure."""
    for key in REQUIRED_KEYS:
        if key not in data:
            raise ConfigError(key, "missing required key")
    try:
        return RunConfig(**data)
    except ValidationError as exc:
        first = exc.errors()[0]
        key = ".".join(str(part) for part in first["loc"] if not isinstance(part, int))
        raise ConfigError(key or "<config>", first["msg"]) from exc


def load_run_config(path, overrides: Optional[Iterable[str]] = None) -> RunConfig:
    """
    Read a run configuration file

    Args:
        path: Path to the key = value file
        overrides: Extra `key=value` strings applied on top

    Returns:
        Validated RunConfig
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config file ({exc.strerror})") from exc

    data = parse_key_values(text.splitlines(), source=str(path))
    if overrides:
        extra = parse_key_values(overrides, source="--set")
        limiter = {**data.get("limiter", {}), **extra.pop("limiter", {})}
        data.update(extra)
        if limiter:
            data["limiter"] = limiter
    return build_run_config(data)
