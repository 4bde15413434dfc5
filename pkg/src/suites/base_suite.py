import logging
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional

from src.boost import BoostParams, make_boost

logger = logging.getLogger("suites")


@dataclass
class CheckResult:
    suite: str
    check: str
    v: Optional[float]
    passed: bool
    measured: float
    threshold: float
    detail: str = ""
    seconds: float = 0.0


@dataclass
class Outcome:
    """What a check handler measured; passed defaults to measured <= threshold"""
    measured: float
    threshold: float
    passed: Optional[bool] = None
    detail: str = ""

    def __post_init__(self):
        if self.passed is None:
            self.passed = bool(self.measured <= self.threshold)


def at_least(measured: float, threshold: float, detail: str = "") -> Outcome:
    return Outcome(measured=measured, threshold=threshold, passed=bool(measured >= threshold), detail=detail)


@dataclass
class Check:
    name: str
    description: str
    handler: Callable[[], Outcome]


class BaseSuite(ABC):
    """A named group of checks bound to one boost speed

    Suites whose checks do not depend on v set per_speed to False and are run
    once per verification.
    """
    per_speed: bool = True

    def __init__(self, config: Dict[str, Any]):
        try:
            self.checks: Dict[str, Check] = {}
            self.config = self.validate_config(config)
            self.p: BoostParams = make_boost(self.config["v"])
            self.scale: float = self.config.get("tolerance_scale", 1.0)
            self.register_checks()
        except Exception as e:
            logger.error(f"Could not initialize the {self.name} suite")
            raise e

    @property
    @abstractmethod
    def name(self) -> str:
        pass

    def validate_config(self, config: Dict[str, Any]) -> Dict[str, Any]:
        if "v" not in config:
            raise KeyError("Missing required parameter: v")
        scale = config.get("tolerance_scale", 1.0)
        if not scale >= 1.0:
            raise ValueError(f"tolerance_scale must be at least 1, got {scale}")
        return config

    @abstractmethod
    def register_checks(self) -> None:
        """Populate self.checks with name -> Check"""
        pass

    def _register(self, name: str, description: str, handler: Callable[[], Outcome]) -> None:
        self.checks[name] = Check(name=name, description=description, handler=handler)

    def tol(self, value: float) -> float:
        """A tolerance widened by the suite's tolerance scale"""
        return value * self.scale

    def run_check(self, check_name: str) -> CheckResult:
        if check_name not in self.checks:
            raise KeyError(f"Unknown check: {check_name}")
        check = self.checks[check_name]
        v = self.p.v if self.per_speed else None
        started = time.perf_counter()
        try:
            outcome = check.handler()
        except Exception as e:
            logger.debug(f"{self.name}.{check_name} raised {type(e).__name__}: {e}")
            return CheckResult(
                suite=self.name,
                check=check_name,
                v=v,
                passed=False,
                measured=float("nan"),
                threshold=float("nan"),
                detail=f"{type(e).__name__}: {e}",
                seconds=time.perf_counter() - started,
            )
        return CheckResult(
            suite=self.name,
            check=check_name,
            v=v,
            passed=bool(outcome.passed),
            measured=float(outcome.measured),
            threshold=float(outcome.threshold),
            detail=outcome.detail,
            seconds=time.perf_counter() - started,
        )

    def run_all(self) -> List[CheckResult]:
        return [self.run_check(name) for name in self.checks]
