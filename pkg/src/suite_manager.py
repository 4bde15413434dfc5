import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Type

from src.suites.bandlimited_suite import BandlimitedSuite
from src.suites.base_suite import BaseSuite, CheckResult
from src.suites.boost_suite import BoostSuite
from src.suites.kernel_suite import KernelSuite
from src.suites.kinetic_suite import CattaneoSuite, KineticSuite
from src.suites.oracle_suite import OracleSuite
from src.suites.special_suite import SpecialSuite

logger = logging.getLogger("suite_manager")

SUITE_NAMES = ["boost", "special", "kernel", "bandlimited", "oracle", "kinetic", "cattaneo"]
NEAR_LUMINAL_SPEED = 0.95
NEAR_LUMINAL_SCALE = 100.0


@dataclass
class VerificationReport:
    header: Dict[str, Any]
    results: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    @property
    def failures(self) -> List[CheckResult]:
        return [result for result in self.results if not result.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "header": self.header,
            "passed": self.passed,
            "results": [asdict(result) for result in self.results],
        }

    def to_json(self) -> str:
        # NaN is not JSON; failed checks that raised carry no measurement
        payload = self.to_dict()
        for result in payload["results"]:
            for key in ("measured", "threshold"):
                if result[key] != result[key]:
                    result[key] = None
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


class SuiteManager:
    def __init__(self, speeds: List[float], poison_branch: bool = False, tolerance_scale: Optional[float] = None, suites: Optional[List[str]] = None):
        self.speeds = list(speeds)
        self.poison_branch = poison_branch
        self.tolerance_scale = tolerance_scale
        self.suite_names = list(suites) if suites else list(SUITE_NAMES)
        unknown = [name for name in self.suite_names if self._suite_name_to_type(name) is None]
        if unknown:
            raise KeyError(f"Unknown suites: {', '.join(unknown)}")

    @staticmethod
    def _suite_name_to_type(suite_name: str) -> Optional[Type[BaseSuite]]:
        if suite_name == "boost":
            return BoostSuite
        elif suite_name == "special":
            return SpecialSuite
        elif suite_name == "kernel":
            return KernelSuite
        elif suite_name == "bandlimited":
            return BandlimitedSuite
        elif suite_name == "oracle":
            return OracleSuite
        elif suite_name == "kinetic":
            return KineticSuite
        elif suite_name == "cattaneo":
            return CattaneoSuite

        return None

    def scale_for(self, v: float) -> float:
        """Tolerance scale at speed v: explicit override, else relaxed near v = 1"""
        if self.tolerance_scale is not None:
            return self.tolerance_scale
        return NEAR_LUMINAL_SCALE if v >= NEAR_LUMINAL_SPEED else 1.0

    def header(self) -> Dict[str, Any]:
        relaxed = [v for v in self.speeds if self.scale_for(v) > 1.0]
        header: Dict[str, Any] = {
            "speeds": self.speeds,
            "suites": self.suite_names,
            "poison_branch": self.poison_branch,
            "tolerance_scales": {str(v): self.scale_for(v) for v in self.speeds},
        }
        if relaxed:
            header["note"] = (
                f"tolerances multiplied by {max(self.scale_for(v) for v in relaxed):g} at v = "
                f"{', '.join(str(v) for v in relaxed)} (near-luminal conditioning)"
            )
        if self.poison_branch:
            header["note_poison"] = "dispersion square-root sign flipped for k~ > 0 in the oracle realness check"
        return header

    def _make_suite(self, name: str, v: float) -> BaseSuite:
        suite_class = self._suite_name_to_type(name)
        return suite_class({"v": v, "tolerance_scale": self.scale_for(v), "poison_branch": self.poison_branch})

    def run(self) -> VerificationReport:
        report = VerificationReport(header=self.header())
        for name in self.suite_names:
            suite_class = self._suite_name_to_type(name)
            speeds = self.speeds if suite_class.per_speed else [min(self.speeds)]
            for v in speeds:
                try:
                    suite = self._make_suite(name, v)
                except Exception as e:
                    logger.error(f"Failed to initialize suite {name} at v={v}: {e}")
                    report.results.append(CheckResult(suite=name, check="init", v=v, passed=False,
                                                      measured=float("nan"), threshold=float("nan"), detail=str(e)))
                    continue
                for result in suite.run_all():
                    marker = "✅" if result.passed else "❌"
                    logger.debug(f"{marker} {result.suite}.{result.check} v={result.v}: {result.measured:.3g} vs {result.threshold:.3g}")
                    report.results.append(result)
        return report
