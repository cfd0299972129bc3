"""Render the statement graph as Graphviz DOT text."""

from collections.abc import Iterable
from pathlib import Path

from jinja2 import Environment, FileSystemLoader
from pydantic import BaseModel

from app.config import settings
from app.models.proof_dag import TRUE_STATEMENT, ProofDag, ProofTree, StatementStatus

TEMPLATE_DIR = Path(__file__).resolve().parent.parent / "templates"

_env = Environment(
    loader=FileSystemLoader(TEMPLATE_DIR),
    autoescape=False,
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
)


class DotNode(BaseModel):
    name: str
    attrs: str


class DotEdge(BaseModel):
    source: str
    target: str
    attrs: str


def _quote(name: str) -> str:
    return name.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(
    dag: ProofDag,
    highlight: ProofTree | Iterable[str] | None = None,
    graph_name: str | None = None,
) -> str:
    """
    Render the graph deterministically.

    Statements appear in insertion order: proven ones solid, open ones
    dotted, green when an AI tool filed a justification for them. Each
    justification draws one edge per premise (or one to True when it has
    none), in insertion order; edges whose premises are not all proven are
    dashed, AI-authored ones green, and highlighted ones thicker.

    Args:
        dag: Graph to render
        highlight: A proof tree or justification ids to emphasise
        graph_name: Overrides settings.DOT_GRAPH_NAME

    Returns:
        DOT text ending with a newline
    """
    if highlight is None:
        highlighted: frozenset[str] = frozenset()
    elif isinstance(highlight, ProofTree):
        highlighted = highlight.justification_ids
    else:
        highlighted = frozenset(highlight)

    ai_targets = {j.target for j in dag.justifications.values() if j.ai_authored}

    nodes = []
    for name, status in dag.statements.items():
        attrs = "style=solid" if status == StatementStatus.PROVEN else "style=dotted"
        if name in ai_targets:
            attrs += ", color=green"
        nodes.append(DotNode(name=_quote(name), attrs=attrs))

    edges = []
    for j in dag.justifications.values():
        closed = all(dag.statements.get(p) == StatementStatus.PROVEN for p in j.premises)
        attrs = f'label="{_quote(j.id)}", style={"solid" if closed else "dashed"}'
        if j.ai_authored:
            attrs += ", color=green"
        if j.id in highlighted:
            attrs += ", penwidth=2"
        for premise in j.premises or (TRUE_STATEMENT,):
            edges.append(DotEdge(source=_quote(j.target), target=_quote(premise), attrs=attrs))

    template = _env.get_template("proof_dag.dot.j2")
    return template.render(
        graph_name=_quote(graph_name or settings.DOT_GRAPH_NAME),
        nodes=nodes,
        edges=edges,
    )
