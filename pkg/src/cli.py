import sys
import html
import logging
import argparse
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from difflib import get_close_matches
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from prompt_toolkit import print_formatted_text
from prompt_toolkit.formatted_text import HTML
from prompt_toolkit.styles import Style

from src.bandlimited import (
    Provenance,
    ProfileError,
    ProfileFormatError,
    SpacetimeGrid,
    check_bounds,
    coefficient_spectrum,
    evolve_profile,
    l2_norm,
    random_profile,
    read_profile,
    reference_function,
    sample_function,
    write_profile,
)
from src.boost import (
    BoostError,
    Branch,
    Direction,
    Frame,
    admissible_mask,
    boost_point,
    cutoff_closure_residual,
    cutoff_frequency,
    dispersion,
    locate_cutoff_minimum,
    make_boost,
    solve_cutoff,
)
from src.export import DataTable, ExportError, OutputFormat, write_table
from src.helpers import print_h_bar, thread_count
from src.kernel import KernelError, KernelOverflowError, green_boosted, green_fourier, heat_kernel, kernel_boosted, kernel_rest
from src.kinetic import KineticError, evolve_two_stream, fick_gaussian, gaussian_two_stream, write_two_stream
from src.oracle import OracleError, band_energy_fraction, oracle_evolve, oracle_kernel, oracle_kernel_contour
from src.run_config import DEFAULT_VERIFY_SPEEDS, RunConfig, RunConfigError, list_runs, load_defaults, load_run
from src.suite_manager import SuiteManager
from src.special import SpecialFunctionError

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_USAGE = 2

OUTPUT_DIR = Path("output")

STYLE = Style.from_dict({
    'prompt': 'ansicyan bold',
    'command': 'ansigreen',
    'error': 'ansired bold',
    'success': 'ansigreen bold',
    'warning': 'ansiyellow',
})


@dataclass
class Command:
    """Dataclass to represent a CLI command"""
    name: str
    description: str
    tips: List[str]
    handler: Callable[[RunConfig], int]
    aliases: List[str] = None

    def __post_init__(self):
        if self.aliases is None:
            self.aliases = []


class BoostDiffCLI:
    def __init__(self):
        self._initialize_commands()
        self.parser = self._build_parser()

    def _initialize_commands(self) -> None:
        """Initialize all CLI commands"""
        self.commands: Dict[str, Command] = {}

        self._register_command(
            Command(
                name="dispersion",
                description="Tabulates both boosted dispersion branches and their admissibility.",
                tips=["Format: dispersion --v 0.5 --kmax 8 --n 400",
                      "The admissible column flips at |k~| = lambda."],
                handler=self.cmd_dispersion,
                aliases=['disp']
            )
        )
        self._register_command(
            Command(
                name="kernel",
                description="Evaluates the fundamental solution on a grid, one slice per time.",
                tips=["Format: kernel --v 0.5 --frame rest --t 0 --xmin -6 --xmax 6",
                      "Add --oracle for a quadrature column and the max discrepancy.",
                      "--shift moves each boosted window by v*t."],
                handler=self.cmd_kernel,
            )
        )
        self._register_command(
            Command(
                name="green",
                description="Evaluates the boosted Green function and its spatial Fourier transform.",
                tips=["Format: green --v 0.5 --t 1 --kmax 8 --n 200",
                      "The Fourier table is written next to --out with a _fourier suffix."],
                handler=self.cmd_green,
            )
        )
        self._register_command(
            Command(
                name="evolve",
                description="Evolves a band-limited profile forward or backward with the sampling formula.",
                tips=["Format: evolve --v 0.5 --profile gaussian.profile --t 0 --t 0.25 --t -0.25",
                      "Build a profile file with 'sample'."],
                handler=self.cmd_evolve,
            )
        )
        self._register_command(
            Command(
                name="sample",
                description="Builds a profile file by sampling a named reference function.",
                tips=["Format: sample --v 0.5 --function gaussian --window 20 --out gaussian.profile",
                      "Functions: gaussian, quartic, sinc, zero, random (coefficients drawn with --seed)."],
                handler=self.cmd_sample,
            )
        )
        self._register_command(
            Command(
                name="verify",
                description="Runs every verification suite and writes a machine-readable report.",
                tips=["Without --v the suites run at v = 0.25, 0.5 and 0.75.",
                      "--poison-branch flips the dispersion square root; the realness check must fail.",
                      "--tol overrides the tolerance scale (default 1, or 100 for v >= 0.95)."],
                handler=self.cmd_verify,
                aliases=['check']
            )
        )
        self._register_command(
            Command(
                name="cutoff",
                description="Tabulates lambda(v), the cutoff frequency and the growth rate over a range of speeds.",
                tips=["Format: cutoff --v 0.5 --vmin 0.01 --vmax 0.99 --nk 99"],
                handler=self.cmd_cutoff,
            )
        )
        self._register_command(
            Command(
                name="cattaneo",
                description="Evolves a Gaussian in the two-stream model and compares it with Fick diffusion.",
                tips=["Format: cattaneo --width 5 --h 0.05 --steps 100"],
                handler=self.cmd_cattaneo,
            )
        )

    def _register_command(self, command: Command) -> None:
        """Register a command and its aliases"""
        self.commands[command.name] = command
        for alias in command.aliases:
            self.commands[alias] = command

    def _build_parser(self) -> argparse.ArgumentParser:
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument("--config", help="JSON run file; explicit flags override it")
        common.add_argument("--v", type=float, nargs="+", help="boost speed(s) in (0,1)")
        common.add_argument("--t", type=float, action="append", dest="times", help="time (repeatable)")
        common.add_argument("--xmin", type=float)
        common.add_argument("--xmax", type=float)
        common.add_argument("--nx", type=int)
        common.add_argument("--frame", choices=["rest", "boosted"])
        common.add_argument("--shift", action="store_true", default=None, help="shift boosted windows by v*t")
        common.add_argument("--kmax", type=float)
        common.add_argument("--n", type=int, help="number of wavenumbers")
        common.add_argument("--nk", type=int, help="number of speeds for 'cutoff'")
        common.add_argument("--vmin", type=float)
        common.add_argument("--vmax", type=float)
        common.add_argument("--profile", help="profile file (index<TAB>value lines)")
        common.add_argument("--function", help="reference function for 'sample'")
        common.add_argument("--window", type=int, help="largest sampling index")
        common.add_argument("--seed", type=int, help="generator seed for --function random")
        common.add_argument("--oracle", action="store_true", default=None, help="add a quadrature cross-check column")
        common.add_argument("--tol", type=float, dest="tolerance")
        common.add_argument("--poison-branch", action="store_true", default=None, dest="poison_branch")
        common.add_argument("--width", type=float, help="Gaussian width for 'cattaneo'")
        common.add_argument("--h", type=float, help="grid spacing for 'cattaneo'")
        common.add_argument("--steps", type=int)
        common.add_argument("--format", choices=[f.value for f in OutputFormat])
        common.add_argument("--out", help="output file")

        runs = list_runs()
        parser = argparse.ArgumentParser(
            prog="boostdiff",
            description="Boosted diffusion: kernels, evolution and verification.",
            epilog=f"Run files in runs/: {', '.join(runs)} (use --config runs/<name>.json)" if runs else None,
        )
        subparsers = parser.add_subparsers(dest="command", required=True)
        for name, command in self.commands.items():
            if name != command.name:
                continue
            subparsers.add_parser(
                name,
                parents=[common],
                aliases=command.aliases,
                help=command.description,
                description=command.description,
                epilog="\n".join(command.tips),
                formatter_class=argparse.RawDescriptionHelpFormatter,
            )
        return parser

    def _get_command_suggestions(self, command: str, max_suggestions: int = 3) -> List[str]:
        """Get command suggestions based on string similarity"""
        return get_close_matches(command, self.commands.keys(), n=max_suggestions, cutoff=0.6)

    def _handle_unknown_command(self, command: str) -> int:
        logger.warning(f"Unknown command: '{command}'")
        suggestions = self._get_command_suggestions(command)
        if suggestions:
            logger.info("Did you mean one of these?")
            for suggestion in suggestions:
                logger.info(f"  - {suggestion}")
        logger.info("Use --help to see all available commands.")
        return EXIT_USAGE

    def _build_config(self, args: argparse.Namespace) -> RunConfig:
        command = self.commands[args.command].name
        overrides = {
            key: value for key, value in vars(args).items()
            if key not in ("command", "config") and value is not None
        }
        if "v" in overrides:
            speeds = overrides["v"]
            overrides["v"] = speeds[0] if len(speeds) == 1 and command != "verify" else speeds
        overrides["command"] = command

        defaults = load_defaults()
        if args.config:
            base = load_run(args.config, defaults).to_dict()
            base.update(overrides)
            return RunConfig.from_dict(base)
        if command == "verify" and "v" not in overrides:
            overrides["v"] = list(DEFAULT_VERIFY_SPEEDS)
        return RunConfig.from_dict(overrides, defaults)

    def run(self, argv: Optional[List[str]] = None) -> int:
        argv = list(sys.argv[1:] if argv is None else argv)
        if argv and not argv[0].startswith("-") and argv[0] not in self.commands:
            return self._handle_unknown_command(argv[0])
        try:
            args = self.parser.parse_args(argv)
        except SystemExit as e:
            return EXIT_OK if e.code in (0, None) else EXIT_USAGE

        try:
            cfg = self._build_config(args)
        except RunConfigError as e:
            logger.error(f"❌ Invalid configuration, {e}")
            return EXIT_USAGE

        command = self.commands[cfg.command]
        try:
            return command.handler(cfg)
        except KernelOverflowError as e:
            logger.error(f"❌ {e}")
            return EXIT_USAGE
        except ProfileFormatError as e:
            logger.error(f"❌ Cannot read profile {cfg.profile}: {e}")
            return EXIT_USAGE
        except (BoostError, KernelError, ProfileError, OracleError, KineticError, SpecialFunctionError, ExportError) as e:
            logger.error(f"❌ {type(e).__name__}: {e}")
            return EXIT_USAGE
        except OSError as e:
            logger.error(f"❌ {e}")
            return EXIT_USAGE

    ###################
    # Helper Functions
    ###################
    def _output_path(self, cfg: RunConfig, stem: str) -> Path:
        if cfg.out:
            return Path(cfg.out)
        return OUTPUT_DIR / f"{stem}.{cfg.format}"

    def _write(self, table: DataTable, path: Path, cfg: RunConfig) -> None:
        write_table(table, path, OutputFormat(cfg.format))
        logger.info(f"✅ Wrote {table.rows} rows to {path}")

    def _map_times(self, work: Callable[[float], Any], times: List[float]) -> List[Any]:
        """Evaluate each time slice on the worker pool, results in input order"""
        workers = min(thread_count(), len(times))
        if workers <= 1:
            return [work(t) for t in times]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(work, times))

    def _print_report_line(self, passed: bool, text: str) -> None:
        if not sys.stdout.isatty():
            logger.info(f"{'PASS' if passed else 'FAIL'} {text}")
            return
        tag = "<success>PASS</success>" if passed else "<error>FAIL</error>"
        print_formatted_text(HTML(f"{tag} {html.escape(text)}"), style=STYLE)

    ###################
    # Command functions
    ###################
    def cmd_dispersion(self, cfg: RunConfig) -> int:
        p = make_boost(cfg.v)
        k = np.linspace(-cfg.kmax, cfg.kmax, cfg.n)
        stable = np.asarray(dispersion(k, p, Branch.STABLE))
        unstable = np.asarray(dispersion(k, p, Branch.UNSTABLE))
        admissible = np.asarray(admissible_mask(k, p))
        table = DataTable(
            metadata={"command": "dispersion", "v": p.v, "lambda": p.cutoff},
            columns={
                "k": k,
                "re_omega_minus": stable.real,
                "im_omega_minus": stable.imag,
                "re_omega_plus": unstable.real,
                "im_omega_plus": unstable.imag,
                "admissible": admissible,
            },
        )
        self._write(table, self._output_path(cfg, "dispersion"), cfg)
        if np.any(admissible):
            logger.info(f"lambda = {p.cutoff:.12g}, largest admissible |k~| on the grid: {float(np.max(np.abs(k[admissible]))):.6g}")
        return EXIT_OK

    def cmd_kernel(self, cfg: RunConfig) -> int:
        p = make_boost(cfg.v)
        frame = Frame(cfg.frame)
        grid = SpacetimeGrid(frame=frame, times=tuple(cfg.times), xmin=cfg.xmin, xmax=cfg.xmax, nx=cfg.nx, shift=cfg.shift)

        def evaluate(t: float):
            x = grid.positions_at(t, p)
            try:
                if frame == Frame.REST:
                    values = np.asarray(kernel_rest(np.full(x.shape, t), x, p))
                    reference = np.asarray(oracle_kernel_contour(t, x, p)) if cfg.oracle else None
                else:
                    values = np.asarray(kernel_boosted(np.full(x.shape, t), x, p))
                    reference = np.asarray(oracle_kernel(t, x, p)) if cfg.oracle else None
            except KernelOverflowError as e:
                logger.error(f"❌ Kernel overflow at t = {t}: {e}")
                raise
            return t, x, values, reference

        try:
            slices = self._map_times(evaluate, list(grid.times))
        except KernelOverflowError:
            return EXIT_USAGE

        columns = {
            "time": np.concatenate([np.full(x.shape, t) for t, x, _, _ in slices]),
            "x": np.concatenate([x for _, x, _, _ in slices]),
            "value": np.concatenate([values for _, _, values, _ in slices]),
        }
        status = EXIT_OK
        if cfg.oracle:
            columns["oracle"] = np.concatenate([reference for _, _, _, reference in slices])
            discrepancy = float(np.max(np.abs(columns["value"] - columns["oracle"])))
            logger.info(f"max |closed form - oracle| = {discrepancy:.3e}")
            if cfg.tolerance is not None and discrepancy > cfg.tolerance:
                logger.error(f"❌ Oracle discrepancy exceeds --tol {cfg.tolerance:g}")
                status = EXIT_VERIFICATION_FAILED
        table = DataTable(
            metadata={
                "command": "kernel",
                "v": p.v,
                "lambda": p.cutoff,
                "frame": frame.value,
                "times": list(grid.times),
                "provenance": Provenance.CLOSED_FORM.value,
            },
            columns=columns,
        )
        self._write(table, self._output_path(cfg, f"kernel_{frame.value}"), cfg)
        return status

    def cmd_green(self, cfg: RunConfig) -> int:
        p = make_boost(cfg.v)
        x = np.linspace(cfg.xmin, cfg.xmax, cfg.nx)
        k = np.linspace(-cfg.kmax, cfg.kmax, cfg.n)

        rows = []
        for t in cfg.times:
            t_rest, x_rest = boost_point(np.full(x.shape, t), x, p, Direction.BOOSTED_TO_REST)
            rows.append((t, np.asarray(green_boosted(np.full(x.shape, t), x, p)), np.asarray(heat_kernel(t_rest, x_rest))))
        table = DataTable(
            metadata={"command": "green", "v": p.v, "lambda": p.cutoff, "frame": Frame.BOOSTED.value, "times": list(cfg.times)},
            columns={
                "time": np.concatenate([np.full(x.shape, t) for t, _, _ in rows]),
                "x": np.tile(x, len(rows)),
                "green": np.concatenate([g for _, g, _ in rows]),
                "rest_heat_kernel": np.concatenate([h for _, _, h in rows]),
            },
        )
        path = self._output_path(cfg, "green")
        self._write(table, path, cfg)

        fourier_times = [t for t in cfg.times if t != 0.0]
        if len(fourier_times) < len(cfg.times):
            logger.warning("Skipping t~ = 0 in the Fourier table: no branch is selected there")
        if not fourier_times:
            return EXIT_OK
        transforms = [np.asarray(green_fourier(np.full(k.shape, t), k, p)) for t in fourier_times]
        fourier = DataTable(
            metadata={"command": "green", "v": p.v, "lambda": p.cutoff, "times": fourier_times},
            columns={
                "time": np.concatenate([np.full(k.shape, t) for t in fourier_times]),
                "k": np.tile(k, len(fourier_times)),
                "re_g": np.concatenate([g.real for g in transforms]),
                "im_g": np.concatenate([g.imag for g in transforms]),
                "abs_g": np.concatenate([np.abs(g) for g in transforms]),
                "admissible": np.tile(np.abs(k) <= p.cutoff, len(fourier_times)),
            },
        )
        self._write(fourier, path.with_name(f"{path.stem}_fourier{path.suffix}"), cfg)
        return EXIT_OK

    def cmd_evolve(self, cfg: RunConfig) -> int:
        p = make_boost(cfg.v)
        prof = read_profile(cfg.profile)
        grid = SpacetimeGrid(frame=Frame.BOOSTED, times=tuple(cfg.times), xmin=cfg.xmin, xmax=cfg.xmax, nx=cfg.nx, shift=cfg.shift)
        phi = coefficient_spectrum(prof)
        extent = float(np.max(np.abs(prof.positions))) if prof.indices.size else 0.0

        def evaluate(t: float):
            x = grid.positions_at(t, p)
            field = evolve_profile(prof, t, x, p)
            reference = oracle_evolve(phi, t, x, p, extent=extent).values if cfg.oracle else None
            return field, reference

        results = self._map_times(evaluate, list(grid.times))
        columns = {
            "time": np.concatenate([np.full(f.positions.shape, f.time) for f, _ in results]),
            "x": np.concatenate([f.positions for f, _ in results]),
            "value": np.concatenate([f.values for f, _ in results]),
        }
        status = EXIT_OK
        if cfg.oracle:
            columns["oracle"] = np.concatenate([reference for _, reference in results])
            discrepancy = float(np.max(np.abs(columns["value"] - columns["oracle"])))
            logger.info(f"max |sampling formula - oracle| = {discrepancy:.3e}")
            if cfg.tolerance is not None and discrepancy > cfg.tolerance:
                logger.error(f"❌ Oracle discrepancy exceeds --tol {cfg.tolerance:g}")
                status = EXIT_VERIFICATION_FAILED

        print_h_bar()
        for field, _ in results:
            fraction = band_energy_fraction(phi, field.time, p) if not prof.is_zero() else 0.0
            logger.info(f"t~ = {field.time:+.4g}: max |dn| = {field.max_norm():.6g}, band-edge energy fraction = {fraction:.6g}")
        print_h_bar()

        table = DataTable(
            metadata={
                "command": "evolve",
                "v": p.v,
                "lambda": p.cutoff,
                "frame": Frame.BOOSTED.value,
                "times": list(grid.times),
                "profile": cfg.profile,
                "provenance": Provenance.CLOSED_FORM.value,
            },
            columns=columns,
        )
        self._write(table, self._output_path(cfg, "evolve"), cfg)
        return status

    def cmd_sample(self, cfg: RunConfig) -> int:
        p = make_boost(cfg.v)
        if cfg.function == "random":
            prof = random_profile(np.random.default_rng(cfg.seed), p, cfg.window)
        else:
            prof = sample_function(reference_function(cfg.function, p), p, cfg.window, decaying=True)
        path = Path(cfg.out) if cfg.out else OUTPUT_DIR / f"{cfg.function}.profile"
        path.parent.mkdir(parents=True, exist_ok=True)
        write_profile(prof, path)
        logger.info(f"✅ Wrote {prof.indices.size} coefficients to {path}")
        logger.info(f"l2 norm {l2_norm(prof, p):.12g}, truncation bound {prof.truncation_bound}")
        if not prof.is_zero():
            report = check_bounds(prof, p)
            logger.info(f"pointwise: max {report.max_abs:.6g} <= {report.pointwise_bound:.6g} {'✅' if report.pointwise_ok else '❌'}")
            logger.info(f"spread: {report.spread:.6g} >= {report.spread_bound:.6g} {'✅' if report.spread_ok else '❌'}")
            for note in report.notes:
                logger.info(f"  {note}")
        return EXIT_OK

    def cmd_verify(self, cfg: RunConfig) -> int:
        manager = SuiteManager(cfg.speeds, poison_branch=cfg.poison_branch, tolerance_scale=cfg.tolerance)
        report = manager.run()

        print_h_bar()
        for key, value in report.header.items():
            logger.info(f"{key}: {value}")
        print_h_bar()
        for result in report.results:
            where = f" v={result.v}" if result.v is not None else ""
            text = f"{result.suite}.{result.check}{where}: {result.measured:.3g} (threshold {result.threshold:.3g})"
            if result.detail:
                text += f" {result.detail}"
            self._print_report_line(result.passed, text)
        print_h_bar()

        path = Path(cfg.out) if cfg.out else OUTPUT_DIR / "verify.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(report.to_json())
        logger.info(f"Report written to {path}")
        if report.passed:
            logger.info(f"✅ All {len(report.results)} checks passed")
            return EXIT_OK
        logger.error(f"❌ {len(report.failures)} of {len(report.results)} checks failed")
        return EXIT_VERIFICATION_FAILED

    def cmd_cutoff(self, cfg: RunConfig) -> int:
        speeds = np.linspace(cfg.vmin, cfg.vmax, cfg.nk)
        boosts = [make_boost(v) for v in speeds]
        table = DataTable(
            metadata={"command": "cutoff", "vmin": cfg.vmin, "vmax": cfg.vmax},
            columns={
                "v": speeds,
                "gamma": np.array([b.gamma for b in boosts]),
                "lambda": np.array([b.cutoff for b in boosts]),
                "lambda_numeric": np.array([solve_cutoff(b) for b in boosts]),
                "omega": np.array([cutoff_frequency(b) for b in boosts]),
                "growth_rate": np.array([b.growth_rate for b in boosts]),
                "closure_residual": np.array([cutoff_closure_residual(b) for b in boosts]),
            },
        )
        self._write(table, self._output_path(cfg, "cutoff"), cfg)
        p = make_boost(cfg.v)
        logger.info(f"v = {p.v}: lambda = {p.cutoff:.12g}, omega = {cutoff_frequency(p):.12g}, growth rate = {p.growth_rate:.12g}")
        v_min, lambda_min = locate_cutoff_minimum()
        logger.info(f"smallest cutoff lambda = {lambda_min:.12g} at v = {v_min:.9g}")
        return EXIT_OK

    def cmd_cattaneo(self, cfg: RunConfig) -> int:
        half = int(round(10.0 * cfg.width / cfg.h)) + cfg.steps
        grid = cfg.h * np.arange(-half, half + 1)
        state = gaussian_two_stream(grid, cfg.width)
        initial = state.particle_number()
        final = evolve_two_stream(state, cfg.h, cfg.steps)
        expected = fick_gaussian(grid, cfg.width, final.time)
        error = float(np.linalg.norm(final.density - expected) / np.linalg.norm(expected))
        write_two_stream(final, self._output_path(cfg, "cattaneo").with_suffix(".csv"))
        logger.info(f"t = {final.time:.6g}: particle number drift {abs(final.particle_number() - initial) / initial:.3e}")
        logger.info(f"relative L2 distance to Fick diffusion: {error:.4%}")
        return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format='%(message)s')
    return BoostDiffCLI().run(argv)
