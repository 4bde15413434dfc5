import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from src.boost import BoostDomainError, make_boost
from src.export import OutputFormat

REQUIRED_FIELDS = ["command", "v"]
# commands that never build boost parameters
SPEED_FREE_COMMANDS = ["cattaneo"]

COMMANDS = ["dispersion", "kernel", "green", "evolve", "sample", "verify", "cutoff", "cattaneo"]
FRAMES = ["rest", "boosted"]
DEFAULT_VERIFY_SPEEDS = [0.25, 0.5, 0.75]
RUNS_DIR = Path("runs")

logger = logging.getLogger("run_config")


class RunConfigError(Exception):
    """Raised when a run configuration is missing or has an invalid field"""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


@dataclass
class RunConfig:
    """One command invocation: what to compute, on which grid, and where to write it"""
    command: str
    v: Union[float, List[float], None] = None
    times: List[float] = field(default_factory=lambda: [0.0])
    frame: str = "boosted"
    xmin: float = -6.0
    xmax: float = 6.0
    nx: int = 241
    shift: bool = False
    kmax: float = 8.0
    n: int = 400
    nk: int = 64
    vmin: float = 0.01
    vmax: float = 0.99
    profile: Optional[str] = None
    function: str = "gaussian"
    window: int = 20
    seed: int = 0
    oracle: bool = False
    tolerance: Optional[float] = None
    poison_branch: bool = False
    width: float = 5.0
    h: float = 0.05
    steps: int = 100
    out: Optional[str] = None
    format: str = OutputFormat.CSV.value

    @property
    def speeds(self) -> List[float]:
        if self.v is None:
            return []
        return list(self.v) if isinstance(self.v, list) else [self.v]

    @classmethod
    def from_dict(cls, data: Dict[str, Any], defaults: Optional[Dict[str, Any]] = None) -> "RunConfig":
        optional = ["v"] if data.get("command") in SPEED_FREE_COMMANDS else []
        missing_fields = [name for name in REQUIRED_FIELDS if name not in data and name not in optional]
        if missing_fields:
            raise RunConfigError(missing_fields[0], f"Missing required fields: {', '.join(missing_fields)}")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise RunConfigError(unknown[0], "unknown field")

        merged = {key: value for key, value in (defaults or {}).items() if key in known}
        merged.update(data)
        cfg = cls(**merged)
        cfg.validate()
        return cfg

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str, defaults: Optional[Dict[str, Any]] = None) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise RunConfigError("config", f"invalid JSON: {e}")
        if not isinstance(data, dict):
            raise RunConfigError("config", "a run file must hold a JSON object")
        return cls.from_dict(data, defaults)

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise RunConfigError("command", f"unknown command '{self.command}', expected one of {', '.join(COMMANDS)}")

        if self.v is None and self.command not in SPEED_FREE_COMMANDS:
            raise RunConfigError("v", "Missing required fields: v")
        if self.v is not None and not self.speeds:
            raise RunConfigError("v", "at least one boost speed is required")
        for speed in self.speeds:
            try:
                make_boost(speed)
            except BoostDomainError as e:
                raise RunConfigError("v", str(e))

        if self.frame not in FRAMES:
            raise RunConfigError("frame", f"expected one of {', '.join(FRAMES)}, got '{self.frame}'")
        if self.format not in [f.value for f in OutputFormat]:
            raise RunConfigError("format", f"expected csv or json, got '{self.format}'")
        if not all(isinstance(t, (int, float)) and math.isfinite(t) for t in self.times) or not self.times:
            raise RunConfigError("times", "need one or more finite times")
        if not self.xmax > self.xmin:
            raise RunConfigError("xmax", f"must exceed xmin={self.xmin}")
        for name in ("nx", "n", "nk"):
            if getattr(self, name) < 2:
                raise RunConfigError(name, f"must be at least 2, got {getattr(self, name)}")
        for name in ("window", "steps"):
            if getattr(self, name) < 1:
                raise RunConfigError(name, f"must be at least 1, got {getattr(self, name)}")
        for name in ("kmax", "width", "h"):
            if not getattr(self, name) > 0.0:
                raise RunConfigError(name, f"must be positive, got {getattr(self, name)}")
        if not 0.0 < self.vmin < self.vmax < 1.0:
            raise RunConfigError("vmin", f"need 0 < vmin < vmax < 1, got [{self.vmin}, {self.vmax}]")
        if self.tolerance is not None and not self.tolerance > 0.0:
            raise RunConfigError("tolerance", f"must be positive, got {self.tolerance}")
        if self.command == "verify" and self.tolerance is not None and self.tolerance < 1.0:
            raise RunConfigError("tolerance", f"verify takes a tolerance scale of at least 1, got {self.tolerance}")
        if self.command == "evolve" and not self.profile:
            raise RunConfigError("profile", "evolve needs a profile file")


def load_defaults(path: Union[str, Path] = RUNS_DIR / "general.json") -> Dict[str, Any]:
    """Shared defaults from runs/general.json, empty when the file is absent"""
    path = Path(path)
    if not path.exists():
        return {}
    try:
        return json.loads(path.read_text()).get("defaults", {})
    except json.JSONDecodeError as e:
        raise RunConfigError("config", f"{path} is not valid JSON: {e}")


def load_run(path: Union[str, Path], defaults: Optional[Dict[str, Any]] = None) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise RunConfigError("config", f"cannot read {path}: {e}")
    try:
        return RunConfig.from_json(text, defaults)
    except Exception:
        logger.error(f"Could not load run file {path}")
        raise


def list_runs(directory: Union[str, Path] = RUNS_DIR) -> List[str]:
    return sorted(p.stem for p in Path(directory).glob("*.json") if p.stem != "general")
