"""Tests for DOT rendering of the statement graph."""

from app.models.proof_dag import ProofDag
from app.models.world import World
from app.services import proof_dag_service
from app.services.dot_export import export_dot


class TestExportDot:
    def test_empty_graph(self):
        assert export_dot(ProofDag()) == (
            'digraph "proof_dag" {\n'
            "  node [shape=circle];\n"
            '  "True" [style=solid];\n'
            "}\n"
        )

    def test_graph_name_override(self):
        assert export_dot(ProofDag(), graph_name="fig").startswith('digraph "fig" {\n')

    def test_insertion_sort_with_highlight(self, sort_world: World):
        tree = proof_dag_service.proof_trees(sort_world.dag, "sort_prog")[0]
        assert export_dot(sort_world.dag, highlight=tree) == (
            'digraph "proof_dag" {\n'
            "  node [shape=circle];\n"
            '  "True" [style=solid];\n'
            '  "sort_prog" [style=solid];\n'
            '  "sort_base" [style=solid, color=green];\n'
            '  "sort_prog_IH" [style=solid];\n'
            '  "sort_prog" -> "sort_base" [label="ct01", style=solid, penwidth=2];\n'
            '  "sort_prog" -> "sort_prog_IH" [label="ct01", style=solid, penwidth=2];\n'
            '  "sort_base" -> "True" '
            '[label="A-sort_base", style=solid, color=green, penwidth=2];\n'
            '  "sort_prog_IH" -> "True" [label="ct03", style=solid, penwidth=2];\n'
            "}\n"
        )

    def test_open_premises_are_dotted_and_dashed(self, world: World, contribute):
        contribute("C", "ct00", "target: sort_prog; kind: conjecture")
        contribute(
            "P", "ct01", "target: sort_prog; kind: partial; premises: sort_base, sort_prog_IH"
        )
        dot = export_dot(world.dag)
        assert '"sort_base" [style=dotted];' in dot
        assert '"sort_prog" -> "sort_base" [label="ct01", style=dashed];' in dot
        assert "penwidth" not in dot

    def test_deterministic(self, sort_world: World):
        assert export_dot(sort_world.dag) == export_dot(sort_world.dag.model_copy(deep=True))

    def test_quotes_are_escaped(self):
        dag = ProofDag()
        dag.statements['say "hi"'] = dag.statements["True"]
        assert '"say \\"hi\\"" [style=solid];' in export_dot(dag)
