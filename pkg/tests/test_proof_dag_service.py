"""Tests for statement graph validation, ingestion and proof-tree enumeration."""

from collections.abc import Callable
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.models.proof_dag import TRUE_STATEMENT, Justification, ProofDag, StatementStatus
from app.models.registry import ContentStore
from app.models.world import World
from app.schemas.common import ProtocolError
from app.schemas.proof_dag import ValidationReason
from app.schemas.record import Filetype
from app.services import (
    client_service,
    content_store,
    proof_dag_service,
    registry_service,
    simulation_service,
)

STATEMENTS = ["s0", "s1", "s2", "s3", "s4"]


def record_for(store: ContentStore, blob: str, record_id: str = "r", filetype=None, **fields):
    address = content_store.put(store, blob)
    kind_filetypes = {
        "conjecture": Filetype.CONJECTURE,
        "partial": Filetype.PARTIAL_PROOF,
        "complete": Filetype.COMPLETED_PROOF,
        "tactic": Filetype.TACTIC,
        "definition": Filetype.DEFINITION,
    }
    kind = blob.split("kind:")[1].split()[0]
    return registry_service.build_record(
        record_id=record_id,
        author=fields.pop("author", "P"),
        file=address,
        coq_ver="8.12",
        filetype=filetype or kind_filetypes[kind],
        submitted_at=0,
        **fields,
    )


def build_dag(specs: list[tuple[str, str, tuple[str, ...], str]]) -> ProofDag:
    """Graph from (id, target, premises, author) rows, statuses recomputed."""
    dag = ProofDag()
    for seq, (jid, target, premises, author) in enumerate(specs):
        for statement in (target, *premises):
            dag.statements.setdefault(statement, StatementStatus.OPEN)
        dag.justifications[jid] = Justification(
            id=jid,
            target=target,
            premises=premises,
            contribution=f"addr-{jid}",
            author=author,
            seq=seq,
        )
    proven = proof_dag_service.closure(dag.justifications.values())
    for statement in dag.statements:
        if statement in proven:
            dag.statements[statement] = StatementStatus.PROVEN
    return dag


def least_closed_set(justifications: list[Justification]) -> set[str]:
    """Intersection of every statement set that contains True and is closed under the rules."""
    mentioned = {j.target for j in justifications}
    mentioned.update(p for j in justifications for p in j.premises)
    universe = sorted(mentioned)
    result = set(universe) | {TRUE_STATEMENT}
    for size in range(len(universe) + 1):
        for subset in combinations(universe, size):
            closed = set(subset) | {TRUE_STATEMENT}
            if all(j.target in closed for j in justifications if set(j.premises) <= closed):
                result &= closed
    return result


def brute_force_tree_count(dag: ProofDag, target: str) -> int:
    """Count justification subsets that form a minimal, acyclic proof of the target."""
    all_ids = list(dag.justifications)
    count = 0
    for size in range(1, len(all_ids) + 1):
        for subset in combinations(all_ids, size):
            chosen = [dag.justifications[jid] for jid in subset]
            targets = [j.target for j in chosen]
            if len(set(targets)) != len(targets) or target not in targets:
                continue
            by_target = {j.target: j for j in chosen}
            if not set(targets) <= proof_dag_service.closure(chosen):
                continue
            reached, stack = set(), [target]
            while stack:
                statement = stack.pop()
                if statement in reached or statement == TRUE_STATEMENT:
                    continue
                reached.add(statement)
                if statement in by_target:
                    stack.extend(by_target[statement].premises)
            if reached == set(targets):
                count += 1
    return count


def derivable(
    by_target: dict[str, list[Justification]],
    statement: str,
    path: frozenset[str] = frozenset(),
    known: set[str] | None = None,
) -> bool:
    """
    Search every derivation of a statement, refusing to repeat one on a path.

    Statements already derived are remembered in `known`; a derived statement
    stays derivable whatever path reaches it.
    """
    known = set() if known is None else known
    if statement == TRUE_STATEMENT or statement in known:
        return True
    if statement in path:
        return False
    inner = path | {statement}
    for j in by_target.get(statement, []):
        if all(derivable(by_target, p, inner, known) for p in j.premises):
            known.add(statement)
            return True
    return False


justification_rows = st.lists(
    st.tuples(
        st.sampled_from(STATEMENTS),
        st.lists(st.sampled_from(STATEMENTS), max_size=3, unique=True),
    ),
    min_size=1,
    max_size=7,
)

STATEMENT_POOL = [f"s{i}" for i in range(20)]

large_justification_rows = st.lists(
    st.tuples(
        st.sampled_from(STATEMENT_POOL),
        st.lists(st.sampled_from(STATEMENT_POOL), max_size=3, unique=True),
    ),
    min_size=1,
    max_size=30,
)


class TestValidate:
    def test_valid_conjecture(self):
        dag, store = ProofDag(), ContentStore()
        record = record_for(store, "target: x\nkind: conjecture\n")
        blob = content_store.get(store, record.file)
        assert proof_dag_service.validate(dag, store, record, blob).valid

    def test_unresolved_import(self):
        dag, store = ProofDag(), ContentStore()
        blob = f"target: x\nkind: conjecture\nimports: {'0' * 64}\n"
        record = record_for(store, blob)
        result = proof_dag_service.validate(dag, store, record, blob)
        assert result.reasons == (ValidationReason.UNRESOLVED_IMPORT,)
        assert str(result) == "Invalid(UNRESOLVED_IMPORT)"

    def test_unhosted_import_is_unresolved(self):
        dag, store = ProofDag(), ContentStore()
        library = content_store.put(store, "target: Arith\nkind: definition\n")
        content_store.set_hosted(store, library, False)
        blob = f"target: x\nkind: conjecture\nimports: {library}\n"
        result = proof_dag_service.validate(dag, store, record_for(store, blob), blob)
        assert ValidationReason.UNRESOLVED_IMPORT in result.reasons

    def test_unknown_target(self):
        dag, store = ProofDag(), ContentStore()
        blob = "target: nowhere\nkind: complete\n"
        result = proof_dag_service.validate(dag, store, record_for(store, blob), blob)
        assert result.reasons == (ValidationReason.UNKNOWN_TARGET,)

    def test_restated_conjecture(self):
        dag, store = ProofDag(), ContentStore()
        blob = "target: x\nkind: conjecture\n"
        proof_dag_service.ingest(dag, store, record_for(store, blob), blob)
        again = "target: x\nkind: conjecture\n# again\n"
        result = proof_dag_service.validate(dag, store, record_for(store, again, "r2"), again)
        assert result.reasons == (ValidationReason.STATEMENT_EXISTS,)

    def test_reserved_target(self):
        dag, store = ProofDag(), ContentStore()
        blob = "target: True\nkind: conjecture\n"
        result = proof_dag_service.validate(dag, store, record_for(store, blob), blob)
        assert ValidationReason.RESERVED_TARGET in result.reasons

    def test_kind_filetype_mismatch(self):
        dag, store = ProofDag(), ContentStore()
        blob = "target: x\nkind: conjecture\n"
        record = record_for(store, blob, filetype=Filetype.TACTIC)
        result = proof_dag_service.validate(dag, store, record, blob)
        assert result.reasons == (ValidationReason.INCONSISTENT_KIND,)

    def test_partial_without_premises(self):
        dag, store = ProofDag(), ContentStore()
        conjecture = "target: x\nkind: conjecture\n"
        proof_dag_service.ingest(dag, store, record_for(store, conjecture), conjecture)
        blob = "target: x\nkind: partial\n"
        result = proof_dag_service.validate(dag, store, record_for(store, blob, "r2"), blob)
        assert result.reasons == (ValidationReason.INCONSISTENT_KIND,)

    def test_self_support_and_bad_premise(self):
        dag, store = ProofDag(), ContentStore()
        conjecture = "target: x\nkind: conjecture\n"
        proof_dag_service.ingest(dag, store, record_for(store, conjecture), conjecture)
        blob = "target: x\nkind: partial\npremises: x, 9lives\n"
        result = proof_dag_service.validate(dag, store, record_for(store, blob, "r2"), blob)
        assert result.reasons == (ValidationReason.SELF_SUPPORT, ValidationReason.BAD_PREMISE_ID)

    def test_same_content_twice(self):
        dag, store = ProofDag(), ContentStore()
        blob = "target: x\nkind: conjecture\n"
        proof_dag_service.ingest(dag, store, record_for(store, blob), blob)
        result = proof_dag_service.validate(dag, store, record_for(store, blob, "r2"), blob)
        assert ValidationReason.DUPLICATE_CONTENT in result.reasons

    def test_self_import_is_cyclic(self):
        dag, store = ProofDag(), ContentStore()
        blob = "target: x\nkind: conjecture\n"
        record = record_for(store, blob, imports=(content_store.address_of(blob),))
        result = proof_dag_service.validate(dag, store, record, blob)
        assert ValidationReason.CYCLIC_IMPORT in result.reasons

    def test_unparseable_blob(self):
        dag, store = ProofDag(), ContentStore()
        record = record_for(store, "target: x\nkind: conjecture\n")
        with pytest.raises(ProtocolError) as exc_info:
            proof_dag_service.validate(dag, store, record, "garbage")
        assert exc_info.value.code == "PARSE_ERROR"


class TestIngest:
    def test_conjecture_then_proof(self):
        dag, store = ProofDag(), ContentStore()
        conjecture = "target: x\nkind: conjecture\n"
        proof_dag_service.ingest(dag, store, record_for(store, conjecture), conjecture)
        assert dag.statements["x"] == StatementStatus.OPEN
        assert dag.conjectures == ["x"]

        proof = "target: x\nkind: complete\n"
        proof_dag_service.ingest(dag, store, record_for(store, proof, "r2"), proof)
        assert proof_dag_service.is_proven(dag, "x")
        assert dag.justifications["r2"].premises == ()

    def test_invalid_contribution_leaves_graph_unchanged(self):
        dag, store = ProofDag(), ContentStore()
        blob = "target: x\nkind: complete\n"
        with pytest.raises(ProtocolError) as exc_info:
            proof_dag_service.ingest(dag, store, record_for(store, blob), blob)
        assert exc_info.value.code == "INVALID_CONTRIBUTION"
        assert exc_info.value.details["reasons"] == ["UNKNOWN_TARGET"]
        assert list(dag.statements) == [TRUE_STATEMENT]
        assert not dag.imports

    def test_premises_are_added_open(self, sort_world: World):
        dag = sort_world.dag
        assert list(dag.statements) == [TRUE_STATEMENT, "sort_prog", "sort_base", "sort_prog_IH"]
        assert dag.introduced_by["sort_base"] == sort_world.labels["ct01"]

    def test_ai_flag(self, sort_world: World):
        assert sort_world.dag.justifications["A-sort_base"].ai_authored
        assert not sort_world.dag.justifications["ct01"].ai_authored

    def test_duplicate_signature_flagged(self):
        dag, store = ProofDag(), ContentStore()
        first = "target: even_sq\nkind: conjecture\nsignature: forall n, even n -> even (n*n)\n"
        second = "target: sq_even\nkind: conjecture\nsignature: forall m, even m -> even (m*m)\n"
        proof_dag_service.ingest(dag, store, record_for(store, first), first)
        proof_dag_service.ingest(dag, store, record_for(store, second, "r2"), second)
        assert dag.duplicates == {"sq_even": "even_sq"}
        restated = "forall k, even k -> even (k*k)"
        assert proof_dag_service.detect_duplicate(dag, restated) == "even_sq"
        assert proof_dag_service.detect_duplicate(dag, "forall k, odd k") is None

    def test_tactic_adds_no_statement(self):
        dag, store = ProofDag(), ContentStore()
        blob = "target: div_conq_split\nkind: tactic\n"
        proof_dag_service.ingest(dag, store, record_for(store, blob), blob)
        assert list(dag.statements) == [TRUE_STATEMENT]
        assert record_for(store, blob).file in dag.imports


class TestStatus:
    def test_closure_needs_every_premise(self):
        dag = build_dag([("j1", "a", ("b", "c"), "P"), ("j2", "b", (), "P")])
        assert not proof_dag_service.is_proven(dag, "a")
        assert proof_dag_service.is_proven(dag, "b")

    def test_alternative_justification_suffices(self):
        dag = build_dag(
            [("j1", "a", ("b",), "P"), ("j2", "a", ("c",), "Q"), ("j3", "c", (), "Q")]
        )
        assert proof_dag_service.is_proven(dag, "a")

    def test_cycle_is_not_a_proof(self):
        dag = build_dag([("j1", "a", ("b",), "P"), ("j2", "b", ("a",), "P")])
        assert proof_dag_service.open_statements(dag) == ["a", "b"]

    def test_unknown_statement(self):
        with pytest.raises(ProtocolError) as exc_info:
            proof_dag_service.is_proven(ProofDag(), "ghost")
        assert exc_info.value.code == "UNKNOWN_STATEMENT"

    def test_true_is_proven(self):
        assert proof_dag_service.is_proven(ProofDag(), TRUE_STATEMENT)

    @settings(max_examples=1000, deadline=None)
    @given(justification_rows)
    def test_closure_matches_least_closed_set(self, rows):
        justifications = [
            Justification(
                id=f"j{i}", target=t, premises=tuple(p), contribution="x", author="P", seq=i
            )
            for i, (t, p) in enumerate(rows)
        ]
        assert proof_dag_service.closure(justifications) == least_closed_set(justifications)

    @settings(max_examples=1000, deadline=None)
    @given(large_justification_rows)
    def test_status_matches_derivation_search(self, rows):
        dag = build_dag([(f"j{i}", t, tuple(p), "P") for i, (t, p) in enumerate(rows)])
        by_target: dict[str, list[Justification]] = {}
        for j in dag.justifications.values():
            by_target.setdefault(j.target, []).append(j)
        known: set[str] = set()
        for statement in dag.statements:
            proven = proof_dag_service.is_proven(dag, statement)
            assert proven == derivable(by_target, statement, known=known)
            assert (proof_dag_service.gap_frontier(dag, statement) == []) == proven

    @settings(max_examples=200, deadline=None)
    @given(justification_rows)
    def test_ingest_never_reopens_a_statement(self, rows):
        world = simulation_service.new_world()
        for statement in STATEMENTS:
            address = client_service.publish(
                world, f"c-{statement}", f"target: {statement}\nkind: conjecture\n"
            )
            client_service.submit(world, "C", f"c-{statement}", address)

        for i, (target, premises) in enumerate(rows):
            before = {s for s, status in world.dag.statements.items() if status == "Proven"}
            blob = f"# attempt {i}\ntarget: {target}\n"
            if premises:
                blob += f"kind: partial\npremises: {', '.join(premises)}\n"
            else:
                blob += "kind: complete\n"
            client_service.submit(world, "P", f"r{i}", client_service.publish(world, f"r{i}", blob))
            after = {s for s, status in world.dag.statements.items() if status == "Proven"}
            assert before <= after


class TestGapFrontier:
    def test_open_chain(self, world: World, contribute: Callable):
        contribute("C", "ct00", "target: sort_prog; kind: conjecture")
        contribute(
            "P", "ct01", "target: sort_prog; kind: partial; premises: sort_base, sort_prog_IH"
        )
        frontier = proof_dag_service.gap_frontier(world.dag, "sort_prog")
        assert frontier == ["sort_base", "sort_prog", "sort_prog_IH"]

        contribute("A", "base", "target: sort_base; kind: complete; imports: @ct01")
        assert proof_dag_service.gap_frontier(world.dag, "sort_prog") == [
            "sort_prog",
            "sort_prog_IH",
        ]

    def test_proven_target_has_no_gaps(self, sort_world: World):
        assert proof_dag_service.gap_frontier(sort_world.dag, "sort_prog") == []


class TestProofTrees:
    def test_single_tree(self, sort_world: World):
        trees = proof_dag_service.proof_trees(sort_world.dag, "sort_prog")
        assert len(trees) == 1
        assert trees[0].key == "A-sort_base+ct01+ct03"
        assert trees[0].contributors == ("P", "A", "Q")

    def test_open_target_has_no_trees(self):
        dag = build_dag([("j1", "a", ("b",), "P")])
        assert proof_dag_service.proof_trees(dag, "a") == []

    def test_true_has_the_empty_tree(self):
        trees = proof_dag_service.proof_trees(ProofDag(), TRUE_STATEMENT)
        assert [t.key for t in trees] == [""]

    def test_alternatives_multiply(self):
        dag = build_dag(
            [
                ("j1", "a", ("b", "c"), "P"),
                ("j2", "b", (), "Q"),
                ("j3", "b", (), "R"),
                ("j4", "c", (), "S"),
                ("j5", "a", ("c",), "T"),
            ]
        )
        keys = [t.key for t in proof_dag_service.proof_trees(dag, "a")]
        assert keys == ["j1+j2+j4", "j1+j3+j4", "j4+j5"]

    def test_shared_premise_is_chosen_once(self):
        dag = build_dag(
            [("j1", "a", ("b", "c"), "P"), ("j2", "b", ("d",), "P"), ("j3", "c", ("d",), "P"),
             ("j4", "d", (), "Q")]
        )
        trees = proof_dag_service.proof_trees(dag, "a")
        assert len(trees) == 1
        assert trees[0].choices == {"a": "j1", "b": "j2", "c": "j3", "d": "j4"}

    def test_cyclic_alternative_is_skipped(self):
        dag = build_dag(
            [("j1", "a", ("b",), "P"), ("j2", "b", ("a",), "P"), ("j3", "b", (), "Q")]
        )
        assert [t.key for t in proof_dag_service.proof_trees(dag, "a")] == ["j1+j3"]

    @settings(max_examples=100, deadline=None)
    @given(justification_rows)
    def test_count_matches_brute_force(self, rows):
        dag = build_dag([(f"j{i}", t, tuple(p), "P") for i, (t, p) in enumerate(rows)])
        for target in STATEMENTS:
            if target in dag.statements:
                trees = proof_dag_service.proof_trees(dag, target)
                assert len(trees) == brute_force_tree_count(dag, target)
                assert len({t.key for t in trees}) == len(trees)
                assert all(proof_dag_service.verify_tree(dag, t, target) for t in trees)

    @settings(max_examples=300, deadline=None)
    @given(justification_rows, st.randoms(use_true_random=False))
    def test_trees_do_not_depend_on_insertion_order(self, rows, rng):
        specs = [(f"j{i}", t, tuple(p), "P") for i, (t, p) in enumerate(rows)]
        shuffled = list(specs)
        rng.shuffle(shuffled)
        dag, reordered = build_dag(specs), build_dag(shuffled)
        assert dag.statements == reordered.statements
        for target in dag.statements:
            keys = sorted(t.key for t in proof_dag_service.proof_trees(dag, target))
            assert keys == sorted(t.key for t in proof_dag_service.proof_trees(reordered, target))


class TestTreeFromJustifications:
    def test_builds_named_tree(self, sort_world: World):
        tree = proof_dag_service.tree_from_justifications(
            sort_world.dag, ["ct03", "ct01", "A-sort_base"], "sort_prog"
        )
        assert tree.key == "A-sort_base+ct01+ct03"

    def test_incomplete_tree(self, sort_world: World):
        with pytest.raises(ProtocolError) as exc_info:
            proof_dag_service.tree_from_justifications(
                sort_world.dag, ["ct01", "A-sort_base"], "sort_prog"
            )
        assert exc_info.value.code == "TREE_DOES_NOT_PROVE_TARGET"

    def test_extra_justification_is_not_minimal(self):
        dag = build_dag([("j1", "a", (), "P"), ("j2", "b", (), "P")])
        with pytest.raises(ProtocolError):
            proof_dag_service.tree_from_justifications(dag, ["j1", "j2"], "a")

    def test_verify_rejects_wrong_root(self, sort_world: World):
        tree = proof_dag_service.proof_trees(sort_world.dag, "sort_prog")[0]
        assert not proof_dag_service.verify_tree(sort_world.dag, tree, "sort_base")
