"""Client-layer semantics over the AND-OR statement graph."""

import logging
from collections.abc import Iterable, Iterator

from app.models.proof_dag import (
    TRUE_STATEMENT,
    Justification,
    ProofDag,
    ProofTree,
    StatementStatus,
)
from app.models.registry import ContentStore
from app.schemas.common import raise_protocol_error
from app.schemas.proof_dag import ValidationReason, ValidationResult
from app.schemas.record import KIND_FILETYPES, Contribution, ContributionKind, Record
from app.services import content_store
from app.utils.blob_parser import is_statement_id, parse_contribution
from app.utils.signature import canonicalize

logger = logging.getLogger(__name__)

PROOF_KINDS = frozenset({ContributionKind.PARTIAL, ContributionKind.COMPLETE})
PREMISE_FREE_KINDS = frozenset(
    {
        ContributionKind.CONJECTURE,
        ContributionKind.COMPLETE,
        ContributionKind.TACTIC,
        ContributionKind.DEFINITION,
    }
)


def import_list(record: Record, contribution: Contribution) -> tuple[str, ...]:
    """Imports declared by the blob followed by any extra ones on the record."""
    seen = dict.fromkeys(contribution.imports)
    for address in record.imports:
        seen.setdefault(address, None)
    return tuple(seen)


def validate(
    dag: ProofDag,
    store: ContentStore,
    record: Record,
    blob: bytes | str | Contribution,
) -> ValidationResult:
    """
    Decide whether a contribution may enter the statement graph.

    Args:
        dag: Current statement graph
        store: Content store used to resolve imports
        record: Registry record pointing at the blob
        blob: Raw blob or an already parsed contribution

    Returns:
        ValidationResult listing every failed check

    Raises:
        ProtocolError: PARSE_ERROR if the blob does not parse
    """
    contribution = blob if isinstance(blob, Contribution) else parse_contribution(blob)
    reasons: list[ValidationReason] = []

    def fail(reason: ValidationReason) -> None:
        if reason not in reasons:
            reasons.append(reason)

    imports = import_list(record, contribution)
    for address in imports:
        if address == record.file:
            fail(ValidationReason.CYCLIC_IMPORT)
        elif not content_store.contains(store, address):
            fail(ValidationReason.UNRESOLVED_IMPORT)
    if _reaches(dag, imports, record.file):
        fail(ValidationReason.CYCLIC_IMPORT)

    if record.file in dag.imports:
        fail(ValidationReason.DUPLICATE_CONTENT)

    kind = contribution.kind
    target = contribution.target
    if record.filetype not in KIND_FILETYPES[kind]:
        fail(ValidationReason.INCONSISTENT_KIND)
    if kind in PREMISE_FREE_KINDS and contribution.premises:
        fail(ValidationReason.INCONSISTENT_KIND)
    if kind == ContributionKind.PARTIAL and not contribution.premises:
        fail(ValidationReason.INCONSISTENT_KIND)

    if kind == ContributionKind.CONJECTURE or kind in PROOF_KINDS:
        if target == TRUE_STATEMENT:
            fail(ValidationReason.RESERVED_TARGET)
        elif kind == ContributionKind.CONJECTURE and target in dag.statements:
            fail(ValidationReason.STATEMENT_EXISTS)
        elif kind in PROOF_KINDS and target not in dag.statements:
            fail(ValidationReason.UNKNOWN_TARGET)

    if target in contribution.premises:
        fail(ValidationReason.SELF_SUPPORT)
    if any(not is_statement_id(p) for p in contribution.premises):
        fail(ValidationReason.BAD_PREMISE_ID)

    return ValidationResult(reasons=tuple(reasons))


def ingest(
    dag: ProofDag,
    store: ContentStore,
    record: Record,
    blob: bytes | str | Contribution,
    ai_authored: bool = False,
    axiom: bool = False,
) -> ProofDag:
    """
    Add a validated contribution to the graph and recompute proven statuses.

    Args:
        dag: Graph to mutate
        store: Content store used by validation
        record: Registry record of the contribution
        blob: Raw blob or parsed contribution
        ai_authored: Author is a registered AI tool
        axiom: Contribution comes from the bootstrap library

    Returns:
        The same graph, mutated

    Raises:
        ProtocolError: PARSE_ERROR, or INVALID_CONTRIBUTION if validation fails
    """
    contribution = blob if isinstance(blob, Contribution) else parse_contribution(blob)
    result = validate(dag, store, record, contribution)
    if not result.valid:
        raise_protocol_error(
            code="INVALID_CONTRIBUTION",
            message=f"Record {record.record_id} is {result}",
            details={"record_id": record.record_id, "reasons": list(result.reasons)},
        )

    kind = contribution.kind
    target = contribution.target
    for premise in contribution.premises:
        if premise not in dag.statements:
            dag.statements[premise] = StatementStatus.OPEN
            dag.introduced_by[premise] = record.file

    if kind == ContributionKind.CONJECTURE:
        dag.statements[target] = StatementStatus.OPEN
        dag.introduced_by[target] = record.file
        dag.conjectures.append(target)
    elif kind in PROOF_KINDS:
        dag.justifications[record.record_id] = Justification(
            id=record.record_id,
            target=target,
            premises=contribution.premises,
            contribution=record.file,
            author=record.author,
            seq=len(dag.justifications),
            ai_authored=ai_authored,
            axiom=axiom,
        )

    dag.imports[record.file] = import_list(record, contribution)

    if contribution.signature and (kind == ContributionKind.CONJECTURE or kind in PROOF_KINDS):
        canonical = canonicalize(contribution.signature)
        original = dag.signature_index.get(canonical)
        if original is None:
            dag.signature_index[canonical] = target
        elif original != target:
            dag.duplicates[target] = original
            logger.warning(f"Statement {target} restates {original} (record {record.record_id})")

    _recompute(dag)
    logger.info(
        f"Ingested {record.record_id} ({kind}) targeting {target}; "
        f"{len(open_statements(dag))} statements open"
    )
    return dag


def closure(justifications: Iterable[Justification]) -> set[str]:
    """Least fixpoint: statements provable from the given justifications alone."""
    pending = list(justifications)
    proven = {TRUE_STATEMENT}
    changed = True
    while changed:
        changed = False
        remaining = []
        for j in pending:
            if j.target in proven:
                continue
            if all(p in proven for p in j.premises):
                proven.add(j.target)
                changed = True
            else:
                remaining.append(j)
        pending = remaining
    return proven


def _recompute(dag: ProofDag) -> None:
    proven = closure(dag.justifications.values())
    for statement in dag.statements:
        if statement in proven:
            dag.statements[statement] = StatementStatus.PROVEN


def _require_statement(dag: ProofDag, statement: str) -> None:
    if statement not in dag.statements:
        raise_protocol_error(
            code="UNKNOWN_STATEMENT",
            message=f"Statement {statement!r} is not in the graph",
            details={"statement": statement},
        )


def _reaches(dag: ProofDag, starts: Iterable[str], goal: str) -> bool:
    stack = list(starts)
    seen: set[str] = set()
    while stack:
        address = stack.pop()
        if address == goal:
            return True
        if address in seen:
            continue
        seen.add(address)
        stack.extend(dag.imports.get(address, ()))
    return False


def is_proven(dag: ProofDag, statement: str) -> bool:
    """
    Whether a statement closes down to True.

    Raises:
        ProtocolError: UNKNOWN_STATEMENT
    """
    _require_statement(dag, statement)
    return dag.statements[statement] == StatementStatus.PROVEN


def gap_frontier(dag: ProofDag, target: str) -> list[str]:
    """
    Open statements that still stand between a target and a proof.

    Walks justifications from the target through open statements only, so
    the still-open chain head itself is part of the frontier.

    Raises:
        ProtocolError: UNKNOWN_STATEMENT
    """
    _require_statement(dag, target)
    if dag.statements[target] == StatementStatus.PROVEN:
        return []

    frontier: set[str] = set()
    stack = [target]
    while stack:
        statement = stack.pop()
        if statement in frontier:
            continue
        frontier.add(statement)
        for j in dag.justifications_for(statement):
            for premise in j.premises:
                if dag.statements.get(premise) == StatementStatus.OPEN:
                    stack.append(premise)
    return sorted(frontier)


def open_statements(dag: ProofDag) -> list[str]:
    """Every open statement, sorted."""
    return sorted(s for s, status in dag.statements.items() if status == StatementStatus.OPEN)


def proof_trees(dag: ProofDag, target: str) -> list[ProofTree]:
    """
    Enumerate every distinct minimal proof tree of a target.

    Trees are ordered by the latest justification they use (so the first
    completed proof comes first), then by their sorted justification ids.

    Returns:
        Proof trees; empty if the target is unknown or open
    """
    if dag.statements.get(target) != StatementStatus.PROVEN:
        return []
    if target == TRUE_STATEMENT:
        return [ProofTree(root=TRUE_STATEMENT)]

    usable: dict[str, list[Justification]] = {}
    for j in dag.justifications.values():
        if all(dag.statements.get(p) == StatementStatus.PROVEN for p in j.premises):
            usable.setdefault(j.target, []).append(j)

    trees = []
    for choices in _choose(usable, {}, [target]):
        if _acyclic(dag, choices, target):
            trees.append(_tree(dag, target, choices))

    def order(tree: ProofTree) -> tuple[int, tuple[str, ...]]:
        seqs = [dag.justifications[jid].seq for jid in tree.choices.values()]
        return (max(seqs), tuple(sorted(tree.choices.values())))

    return sorted(trees, key=order)


def _choose(
    usable: dict[str, list[Justification]],
    choices: dict[str, str],
    pending: list[str],
) -> Iterator[dict[str, str]]:
    while pending and (pending[0] == TRUE_STATEMENT or pending[0] in choices):
        pending = pending[1:]
    if not pending:
        yield dict(choices)
        return
    statement, rest = pending[0], pending[1:]
    for j in usable.get(statement, []):
        choices[statement] = j.id
        yield from _choose(usable, choices, rest + list(j.premises))
        del choices[statement]


def _acyclic(dag: ProofDag, choices: dict[str, str], root: str) -> bool:
    visiting: set[str] = set()
    done: set[str] = set()

    def visit(statement: str) -> bool:
        if statement == TRUE_STATEMENT or statement in done:
            return True
        if statement in visiting:
            return False
        visiting.add(statement)
        jid = choices.get(statement)
        if jid is None:
            return False
        for premise in dag.justifications[jid].premises:
            if not visit(premise):
                return False
        visiting.discard(statement)
        done.add(statement)
        return True

    return visit(root) and done == set(choices)


def _tree(dag: ProofDag, root: str, choices: dict[str, str]) -> ProofTree:
    chosen = sorted((dag.justifications[jid] for jid in choices.values()), key=lambda j: j.seq)
    contributors = dict.fromkeys(j.author for j in chosen if not j.axiom)
    return ProofTree(root=root, choices=dict(choices), contributors=tuple(contributors))


def verify_tree(dag: ProofDag, tree: ProofTree, target: str) -> bool:
    """
    Re-validate a proof tree against the graph.

    The tree must be rooted at the target, use only justifications present
    in the graph for the statements they are filed under, close every leaf
    at True, and contain nothing unreachable from the root.
    """
    if tree.root != target:
        return False
    if target == TRUE_STATEMENT:
        return not tree.choices
    for statement, jid in tree.choices.items():
        j = dag.justifications.get(jid)
        if j is None or j.target != statement:
            return False
    return _acyclic(dag, dict(tree.choices), target)


def tree_from_justifications(
    dag: ProofDag,
    justification_ids: Iterable[str],
    target: str,
) -> ProofTree:
    """
    Build the proof tree named by a set of justification ids.

    Raises:
        ProtocolError: TREE_DOES_NOT_PROVE_TARGET if the ids do not form one
    """
    choices: dict[str, str] = {}
    ids = list(dict.fromkeys(justification_ids))
    for jid in ids:
        j = dag.justifications.get(jid)
        if j is None or j.target in choices:
            raise_protocol_error(
                code="TREE_DOES_NOT_PROVE_TARGET",
                message=f"Justifications {ids} do not form a proof tree of {target}",
                details={"target": target, "justifications": ids},
            )
        choices[j.target] = jid

    tree = _tree(dag, target, choices)
    if not verify_tree(dag, tree, target):
        raise_protocol_error(
            code="TREE_DOES_NOT_PROVE_TARGET",
            message=f"Justifications {ids} do not form a proof tree of {target}",
            details={"target": target, "justifications": ids},
        )
    return tree


def detect_duplicate(dag: ProofDag, signature: str) -> str | None:
    """Statement already filed under the same canonical signature, if any."""
    return dag.signature_index.get(canonicalize(signature))
