"""Command-line entry point: run scenarios, export DOT snapshots, verify goldens."""

import argparse
import difflib
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

from app.config import settings
from app.schemas.common import InvariantViolation, ScenarioError
from app.schemas.scenario import Scenario
from app.services import dot_export, report_service, simulation_service
from app.utils.scenario_parser import parse_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SCENARIO_ERROR = 1
EXIT_INVARIANT_VIOLATION = 2


def _guarded(command: Callable[[], int]) -> int:
    """Map process-level failures to exit codes, diagnostics on stderr."""
    try:
        return command()
    except InvariantViolation as e:
        logger.error(f"Invariant violated: {e.code}: {e.message}")
        return EXIT_INVARIANT_VIOLATION
    except ScenarioError as e:
        logger.error(f"Scenario error: {e.code}: {e.message}")
        return EXIT_SCENARIO_ERROR
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_SCENARIO_ERROR


def cmd_run(
    scenario_path: str | Path,
    report_path: str | Path,
    dot_dir: str | Path | None = None,
) -> int:
    """
    Run a scenario and write its report, plus one DOT file per snapshot.

    Returns:
        0 on success, 1 on a scenario error, 2 on an invariant violation
    """

    def command() -> int:
        scenario = parse_scenario(scenario_path)
        world, log = simulation_service.run(scenario)
        report = report_service.build_report(scenario.name, world, log)
        _write(Path(report_path), report_service.render_report(report))
        if dot_dir is not None:
            for label, dot in world.snapshots.items():
                _write(Path(dot_dir) / f"{label}.dot", dot)
        logger.info(f"Wrote report for {scenario.name} to {report_path}")
        return EXIT_OK

    return _guarded(command)


def cmd_dot(scenario_path: str | Path, at_tick: int, out_path: str | Path) -> int:
    """
    Export the statement graph as it stood after every event at or before a tick.

    Ticks past the last event clamp to the final state.

    Returns:
        0 on success, 1 on a bad tick or scenario error, 2 on an invariant violation
    """

    def command() -> int:
        if at_tick < 0:
            raise ScenarioError(
                code="BAD_TICK",
                message=f"Tick must be non-negative, got {at_tick}",
                details={"tick": at_tick},
            )
        scenario = parse_scenario(scenario_path)
        prefix = Scenario(
            name=scenario.name,
            events=tuple(e for e in scenario.events if e.at <= at_tick),
        )
        world, _ = simulation_service.run(prefix)
        _write(Path(out_path), dot_export.export_dot(world.dag))
        return EXIT_OK

    return _guarded(command)


def cmd_verify(fixture_dir: str | Path, update: bool = False) -> int:
    """
    Rerun every scenario in a directory and compare outputs with its goldens.

    Goldens live at `<dir>/golden/<scenario>/report.json` and `<label>.dot`.
    With update=True the goldens are rewritten instead.

    Returns:
        0 iff every output matches, 1 on a mismatch or scenario error, 2 on an
        invariant violation
    """

    def command() -> int:
        root = Path(fixture_dir)
        scenarios = sorted(root.glob("*.scn"))
        if not scenarios:
            raise ScenarioError(
                code="SCENARIO_NOT_FOUND",
                message=f"No scenarios in {root}",
                details={"path": str(root)},
            )

        mismatched: list[Path] = []
        for path in scenarios:
            scenario = parse_scenario(path)
            world, log = simulation_service.run(scenario)
            report = report_service.build_report(scenario.name, world, log)
            outputs = {"report.json": report_service.render_report(report)}
            outputs.update({f"{label}.dot": dot for label, dot in world.snapshots.items()})

            golden_dir = root / settings.GOLDEN_DIR_NAME / scenario.name
            if update:
                for name, text in outputs.items():
                    _write(golden_dir / name, text)
                logger.info(f"Updated {len(outputs)} goldens for {scenario.name}")
                continue

            for name, text in outputs.items():
                golden = golden_dir / name
                if not _matches(golden, text):
                    mismatched.append(golden)
            stale = sorted(p for p in golden_dir.glob("*.dot") if p.name not in outputs)
            for golden in stale:
                print(f"unexpected golden {golden}", file=sys.stderr)
            mismatched.extend(stale)

        if mismatched:
            print(f"{len(mismatched)} golden file(s) differ:", file=sys.stderr)
            for golden in mismatched:
                print(f"  {golden}", file=sys.stderr)
            return EXIT_SCENARIO_ERROR
        logger.info(f"All goldens match for {len(scenarios)} scenario(s)")
        return EXIT_OK

    return _guarded(command)


def _matches(golden: Path, actual: str) -> bool:
    if not golden.is_file():
        print(f"missing golden {golden}", file=sys.stderr)
        return False
    expected = golden.read_text(encoding="utf-8")
    if expected == actual:
        return True
    diff = difflib.unified_diff(
        expected.splitlines(keepends=True),
        actual.splitlines(keepends=True),
        fromfile=str(golden),
        tofile="actual",
    )
    sys.stderr.writelines(diff)
    return False


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser for the `proofchain` command."""
    parser = argparse.ArgumentParser(
        prog="proofchain",
        description="Deterministic simulator for collaborative proof formalization",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run a scenario and write its report")
    run.add_argument("scenario", help="Scenario file")
    run.add_argument("--report", required=True, help="Report output path")
    run.add_argument("--dot-dir", help="Directory for snapshot DOT files")

    dot = commands.add_parser("dot", help="Export the graph as of a tick")
    dot.add_argument("scenario", help="Scenario file")
    dot.add_argument("--tick", type=int, required=True, help="Tick to export")
    dot.add_argument("--out", required=True, help="DOT output path")

    verify = commands.add_parser("verify", help="Compare fixtures against their goldens")
    verify.add_argument("fixture_dir", nargs="?", default=settings.FIXTURE_DIR)
    verify.add_argument("--update", action="store_true", help="Rewrite the goldens")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Console script entry point; returns the process exit code."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on bad usage; 2 is reserved for invariant violations
        return EXIT_OK if e.code in (0, None) else EXIT_SCENARIO_ERROR
    logging.basicConfig(
        level=settings.LOG_LEVEL.upper(),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )

    if args.command == "run":
        return cmd_run(args.scenario, args.report, args.dot_dir)
    if args.command == "dot":
        return cmd_dot(args.scenario, args.tick, args.out)
    return cmd_verify(args.fixture_dir, update=args.update)


if __name__ == "__main__":
    sys.exit(main())
