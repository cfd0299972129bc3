"""Line-oriented scenario files.

Each non-comment line is::

    tick | actor | action | arg | rest

with at most five fields; the last one keeps any further `|`. Lines
starting with `#` and blank lines are skipped, and `include <file>`
inlines another scenario relative to the including file.
"""

import logging
import re
from pathlib import Path
from typing import NoReturn

from app.schemas.common import ScenarioError, raise_protocol_error
from app.schemas.scenario import EventAction, Scenario, ScenarioEvent

logger = logging.getLogger(__name__)

LABEL_REGEX = re.compile(r"@([A-Za-z0-9_][A-Za-z0-9_\-']*)")


def parse_scenario(path: str | Path) -> Scenario:
    """
    Read and parse a scenario file.

    Raises:
        ScenarioError: SCENARIO_NOT_FOUND, INCLUDE_CYCLE or SCENARIO_SYNTAX
    """
    path = Path(path)
    events = _read_events(path, stack=())
    scenario = Scenario(
        name=path.stem,
        events=tuple(e.model_copy(update={"index": i}) for i, e in enumerate(events)),
    )
    _check_ticks(scenario)
    logger.debug(f"Parsed {path} ({len(scenario.events)} events)")
    return scenario


def parse_scenario_text(text: str, name: str = "inline", base_dir: Path | None = None) -> Scenario:
    """Parse scenario text; includes resolve against base_dir (default: cwd)."""
    events = _parse_lines(text, origin=name, base_dir=base_dir or Path.cwd(), stack=())
    scenario = Scenario(
        name=name,
        events=tuple(e.model_copy(update={"index": i}) for i, e in enumerate(events)),
    )
    _check_ticks(scenario)
    return scenario


def _read_events(path: Path, stack: tuple[Path, ...]) -> list[ScenarioEvent]:
    resolved = path.resolve()
    if resolved in stack:
        raise ScenarioError(
            code="INCLUDE_CYCLE",
            message=f"{path} includes itself",
            details={"path": str(path)},
        )
    try:
        text = path.read_text(encoding="utf-8")
    except (FileNotFoundError, IsADirectoryError) as e:
        raise ScenarioError(
            code="SCENARIO_NOT_FOUND",
            message=f"Cannot read scenario {path}",
            details={"path": str(path)},
        ) from e
    return _parse_lines(text, origin=str(path), base_dir=path.parent, stack=(*stack, resolved))


def _parse_lines(
    text: str,
    origin: str,
    base_dir: Path,
    stack: tuple[Path, ...],
) -> list[ScenarioEvent]:
    events: list[ScenarioEvent] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("include "):
            events.extend(_read_events(base_dir / line[len("include ") :].strip(), stack))
            continue

        fields = [f.strip() for f in line.split("|", 4)]
        if len(fields) < 3:
            _syntax(origin, number, "expected 'tick | actor | action [| args]'")
        tick, actor, action = fields[:3]
        if not tick.isdigit():
            _syntax(origin, number, f"tick {tick!r} is not a non-negative integer")
        if not actor:
            _syntax(origin, number, "actor is empty")
        if action not in {a.value for a in EventAction}:
            _syntax(origin, number, f"unknown action {action!r}")
        events.append(
            ScenarioEvent(
                at=int(tick),
                index=len(events),
                actor=actor,
                action=EventAction(action),
                args=tuple(fields[3:]),
            )
        )
    return events


def _check_ticks(scenario: Scenario) -> None:
    previous = 0
    for event in scenario.events:
        if event.at < previous:
            raise ScenarioError(
                code="SCENARIO_SYNTAX",
                message=f"Event {event.index} at tick {event.at} precedes tick {previous}",
                details={"index": event.index, "tick": event.at},
            )
        previous = event.at


def _syntax(origin: str, number: int, problem: str) -> NoReturn:
    raise ScenarioError(
        code="SCENARIO_SYNTAX",
        message=f"{origin}:{number}: {problem}",
        details={"origin": origin, "line": number},
    )


def parse_pairs(text: str) -> list[tuple[str, str]]:
    """
    Parse whitespace-separated key=value pairs, in order, repeats kept.

    Raises:
        ProtocolError: BAD_ARGUMENT on a token without '='
    """
    pairs: list[tuple[str, str]] = []
    for token in text.split():
        key, sep, value = token.partition("=")
        if not sep or not key:
            raise_protocol_error(
                code="BAD_ARGUMENT",
                message=f"Expected key=value, got {token!r}",
                details={"token": token},
            )
        pairs.append((key, value))
    return pairs


def parse_kv(text: str) -> dict[str, str]:
    """
    Parse whitespace-separated key=value pairs into a mapping.

    Raises:
        ProtocolError: BAD_ARGUMENT on a token without '=' or a repeated key
    """
    mapping: dict[str, str] = {}
    for key, value in parse_pairs(text):
        if key in mapping:
            raise_protocol_error(
                code="BAD_ARGUMENT",
                message=f"Argument {key}= given more than once",
                details={"argument": key},
            )
        mapping[key] = value
    return mapping


def split_csv(text: str) -> list[str]:
    """Comma-separated names, stripped, empties dropped."""
    return [item.strip() for item in text.split(",") if item.strip()]


def expand_blob(text: str, labels: dict[str, str]) -> str:
    """
    Turn a one-line blob argument into blob text.

    Declarations are separated by ';' and each `@label` is replaced by the
    content address stored under that label.

    Raises:
        ProtocolError: UNKNOWN_LABEL
    """

    def resolve(match: re.Match[str]) -> str:
        label = match.group(1)
        if label not in labels:
            raise_protocol_error(
                code="UNKNOWN_LABEL",
                message=f"No blob stored under label @{label}",
                details={"label": label},
            )
        return labels[label]

    declarations = [d.strip() for d in text.split(";") if d.strip()]
    return "\n".join(LABEL_REGEX.sub(resolve, d) for d in declarations) + "\n"
