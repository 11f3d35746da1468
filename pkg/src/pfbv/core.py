"""Domain model for pseudo-formal proofs.

A proof is an ordered sequence of modules (premises, conclusion, proof text)
equipped with two graphs over the same node set:

* an acyclic *invocation* graph: edge ``a -> b`` when the proof text of
  ``a`` uses the conclusion of ``b``;
* a *scope* forest: ``child -> parent`` when a module inherits the premises
  of another (a lemma inheriting its proposition's setting, and so on).

Proofs are immutable after construction and every operation here is a pure
function, so they are safe to share across worker threads.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    BadLemmaPrefix,
    CycleInDependencyGraph,
    DanglingEdge,
    DuplicateId,
    ForwardReference,
    InvalidModuleId,
    ScopeNotForest,
    UnknownId,
)

#: Multiplier applied to the theoretical context bound L*(D+L+1) when checking
#: measured context lengths; absorbs labels, separators and the statement text
#: that the serialization repeats.
CONTEXT_OVERHEAD = 4


class ModuleKind(Enum):
    THEOREM = "theorem"
    PROPOSITION = "proposition"
    LEMMA = "lemma"


@dataclass(frozen=True, order=True)
class ModuleId:
    """Identity of a proof module: a kind plus a dotted index.

    The index is ``""`` for the sole unnumbered theorem of a single-theorem
    document, a bare numeral for theorems and propositions, and a
    single-dotted numeral (``"2.3"``) for lemmas.
    """

    kind: ModuleKind
    index: str = ""

    def __post_init__(self):
        dots = self.index.count(".")
        if self.kind is ModuleKind.LEMMA:
            if dots != 1:
                raise InvalidModuleId(f"lemma index must have exactly one dot: {self.index!r}")
            major, minor = self.index.split(".")
            if not (major.isdigit() and minor.isdigit()):
                raise InvalidModuleId(f"lemma index must be numeric: {self.index!r}")
        else:
            if self.index and not self.index.isdigit():
                raise InvalidModuleId(f"{self.kind.value} index must be numeric: {self.index!r}")
            if self.kind is ModuleKind.PROPOSITION and not self.index:
                raise InvalidModuleId("proposition requires an index")

    @property
    def lemma_prefix(self) -> str:
        return self.index.split(".")[0] if self.kind is ModuleKind.LEMMA else ""

    def label(self) -> str:
        """Human-readable label, e.g. ``"Lemma 2.3"`` or ``"Theorem"``."""
        name = self.kind.value.capitalize()
        return f"{name} {self.index}" if self.index else name

    def short(self) -> str:
        """Compact form used in traces and fixtures: ``T``, ``P1``, ``L2.3``."""
        return self.kind.value[0].upper() + self.index

    @classmethod
    def parse(cls, text: str) -> "ModuleId":
        """Parse a compact form (``"T"``, ``"T2"``, ``"P1"``, ``"L2.3"``)."""
        text = text.strip()
        if not text:
            raise InvalidModuleId("empty module id")
        kind = {"T": ModuleKind.THEOREM, "P": ModuleKind.PROPOSITION, "L": ModuleKind.LEMMA}.get(text[0])
        if kind is None:
            raise InvalidModuleId(f"unknown module kind prefix: {text!r}")
        return cls(kind, text[1:])

    def __str__(self) -> str:
        return self.short()


@dataclass(frozen=True)
class ProofModule:
    """One (premises, conclusion, proof) unit.

    ``premises`` and ``proof`` may be empty; the conclusion never is.
    """

    id: ModuleId
    premises: str
    conclusion: str
    proof: str = ""

    def __post_init__(self):
        if not self.conclusion.strip():
            raise InvalidModuleId(f"{self.id}: conclusion must be non-empty")

    @property
    def max_field_len(self) -> int:
        return max(len(self.premises), len(self.conclusion), len(self.proof))


Edge = tuple[ModuleId, ModuleId]


@dataclass(frozen=True)
class PseudoFormalProof:
    """A validated module sequence with its invocation DAG and scope forest.

    Construct through :func:`build_proof`; direct instantiation skips
    validation.  ``scope_parent`` maps child -> parent; ``invokes`` holds
    edges (invoker, invoked).
    """

    modules: tuple[ProofModule, ...]
    scope_parent: dict[ModuleId, ModuleId] = field(default_factory=dict)
    invokes: frozenset[Edge] = frozenset()

    def __eq__(self, other):
        if not isinstance(other, PseudoFormalProof):
            return NotImplemented
        return (
            self.modules == other.modules
            and self.scope_parent == other.scope_parent
            and self.invokes == other.invokes
        )

    def __hash__(self):
        return hash((self.modules, tuple(sorted(self.scope_parent.items())), self.invokes))

    # -- lookups ---------------------------------------------------------

    def module(self, id: ModuleId) -> ProofModule:
        try:
            return self._by_id[id]
        except KeyError:
            raise UnknownId(f"no module {id}") from None

    @property
    def _by_id(self) -> dict[ModuleId, ProofModule]:
        # cached on first use; the instance is frozen so this is safe
        cache = self.__dict__.get("_by_id_cache")
        if cache is None:
            cache = {m.id: m for m in self.modules}
            object.__setattr__(self, "_by_id_cache", cache)
        return cache

    def doc_position(self, id: ModuleId) -> int:
        self.module(id)
        pos = self.__dict__.get("_pos_cache")
        if pos is None:
            pos = {m.id: i for i, m in enumerate(self.modules)}
            object.__setattr__(self, "_pos_cache", pos)
        return pos[id]

    def ancestors(self, id: ModuleId) -> list[ModuleId]:
        """Scope ancestors of ``id``, root first."""
        self.module(id)
        chain: list[ModuleId] = []
        cur = self.scope_parent.get(id)
        while cur is not None:
            chain.append(cur)
            cur = self.scope_parent.get(cur)
        chain.reverse()
        return chain

    def dependencies(self, id: ModuleId) -> list[ModuleId]:
        """Direct invocation targets of ``id`` in document order."""
        self.module(id)
        targets = [dst for src, dst in self.invokes if src == id]
        targets.sort(key=self.doc_position)
        return targets

    def invokers(self, id: ModuleId) -> list[ModuleId]:
        sources = [src for src, dst in self.invokes if dst == id]
        sources.sort(key=self.doc_position)
        return sources


@dataclass(frozen=True)
class ModuleContext:
    """Everything a block check of one module is allowed to see.

    Ancestor premises are listed root first; dependency statements in
    document order.  Own fields are verbatim copies.
    """

    id: ModuleId
    ancestor_premises: tuple[tuple[ModuleId, str], ...]
    dependency_statements: tuple[tuple[ModuleId, str, str], ...]
    own_premises: str
    own_conclusion: str
    own_proof: str


@dataclass(frozen=True)
class GoodnessReport:
    """Size accounting for a proof: scope depth, block lengths, out-degrees,
    the induced context bound and the measured per-module context lengths."""

    depth: int
    max_block_len: int
    max_out_degree: int
    context_bound: int
    per_module_context_len: dict[ModuleId, int]
    overhead_constant: int = CONTEXT_OVERHEAD
    violations: tuple[str, ...] = ()
    shared_scope_candidates: tuple[ModuleId, ...] = ()

    @property
    def allowed_context_len(self) -> int:
        return self.overhead_constant * self.context_bound

    def bound_violations(self) -> list[ModuleId]:
        limit = self.allowed_context_len
        return [m for m, n in self.per_module_context_len.items() if n > limit]

    def within_bound(self) -> bool:
        return not self.bound_violations()

    def to_json_dict(self) -> dict:
        return {
            "depth": self.depth,
            "max_block_len": self.max_block_len,
            "max_out_degree": self.max_out_degree,
            "context_bound": self.context_bound,
            "overhead_constant": self.overhead_constant,
            "allowed_context_len": self.allowed_context_len,
            "per_module_context_len": {
                str(m): n for m, n in sorted(self.per_module_context_len.items(), key=lambda kv: str(kv[0]))
            },
            "within_bound": self.within_bound(),
            "violations": list(self.violations),
            "shared_scope_candidates": [str(m) for m in self.shared_scope_candidates],
        }


# --------------------------------------------------------------------------
# construction


def build_proof(
    modules,
    scope_edges=(),
    invoke_edges=(),
) -> PseudoFormalProof:
    """Validate and assemble a proof.

    ``scope_edges`` are (child, parent) pairs; ``invoke_edges`` are
    (invoker, invoked) pairs.  Raises :class:`DuplicateId`,
    :class:`DanglingEdge`, :class:`ScopeNotForest`,
    :class:`CycleInDependencyGraph`, :class:`BadLemmaPrefix` or
    :class:`ForwardReference` when the corresponding invariant fails.
    """
    modules = tuple(modules)
    seen: set[ModuleId] = set()
    for m in modules:
        if m.id in seen:
            raise DuplicateId(f"duplicate module id {m.id}")
        seen.add(m.id)

    prop_indices = {m.id.index for m in modules if m.id.kind is ModuleKind.PROPOSITION}
    for m in modules:
        if m.id.kind is ModuleKind.LEMMA and m.id.lemma_prefix not in prop_indices:
            raise BadLemmaPrefix(f"{m.id}: no proposition {m.id.lemma_prefix}")

    def check_endpoint(mid: ModuleId, edge):
        if mid not in seen:
            raise DanglingEdge(f"edge {edge[0]} -> {edge[1]} names unknown module {mid}")

    scope_parent: dict[ModuleId, ModuleId] = {}
    for child, parent in scope_edges:
        check_endpoint(child, (child, parent))
        check_endpoint(parent, (child, parent))
        if child in scope_parent and scope_parent[child] != parent:
            raise ScopeNotForest(f"{child} has two scope parents: {scope_parent[child]} and {parent}")
        scope_parent[child] = parent

    # walk parent pointers; revisiting a node on the same walk is a cycle
    for start in scope_parent:
        slow: list[ModuleId] = []
        cur: ModuleId | None = start
        while cur is not None:
            if cur in slow:
                cycle = slow[slow.index(cur):] + [cur]
                raise ScopeNotForest("scope cycle: " + " -> ".join(str(m) for m in cycle))
            slow.append(cur)
            cur = scope_parent.get(cur)

    invokes: set[Edge] = set()
    for src, dst in invoke_edges:
        check_endpoint(src, (src, dst))
        check_endpoint(dst, (src, dst))
        invokes.add((src, dst))

    cycle = _find_cycle(seen, invokes)
    if cycle is not None:
        raise CycleInDependencyGraph(cycle)

    pos = {m.id: i for i, m in enumerate(modules)}
    for src, dst in invokes:
        if scope_parent.get(src) == scope_parent.get(dst) and pos[dst] >= pos[src]:
            raise ForwardReference(
                f"{src} invokes {dst} at the same scope level but {dst} does not precede it"
            )

    return PseudoFormalProof(modules=modules, scope_parent=scope_parent, invokes=frozenset(invokes))


def _find_cycle(nodes: set[ModuleId], edges: set[Edge]) -> list[ModuleId] | None:
    """Return one invocation cycle as a node list, or None."""
    out: dict[ModuleId, list[ModuleId]] = {n: [] for n in nodes}
    for src, dst in edges:
        out[src].append(dst)
    WHITE, GREY, BLACK = 0, 1, 2
    color = {n: WHITE for n in nodes}
    parent: dict[ModuleId, ModuleId] = {}

    for root in nodes:
        if color[root] != WHITE:
            continue
        stack = [(root, iter(out[root]))]
        color[root] = GREY
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if color[nxt] == GREY:
                    cycle = [nxt, node]
                    cur = node
                    while cur != nxt:
                        cur = parent[cur]
                        cycle.append(cur)
                    cycle.reverse()
                    return cycle
                if color[nxt] == WHITE:
                    color[nxt] = GREY
                    parent[nxt] = node
                    stack.append((nxt, iter(out[nxt])))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                stack.pop()
    return None


# --------------------------------------------------------------------------
# operations


def realize_premises(proof: PseudoFormalProof, id: ModuleId) -> str:
    """Full premises of ``id``: every scope ancestor's premises root first,
    then the module's own.  Empty blocks contribute nothing."""
    own = proof.module(id)
    parts = [proof.module(a).premises for a in proof.ancestors(id)]
    parts.append(own.premises)
    return "\n\n".join(p for p in parts if p)


def verification_order(proof: PseudoFormalProof) -> list[ModuleId]:
    """Order in which blocks are checked: every invoked module strictly
    before its invoker, ties broken by document order."""
    pos = {m.id: i for i, m in enumerate(proof.modules)}
    pending = {m.id: 0 for m in proof.modules}
    waiting_on: dict[ModuleId, list[ModuleId]] = {m.id: [] for m in proof.modules}
    for src, dst in proof.invokes:
        pending[src] += 1
        waiting_on[dst].append(src)

    ready = [(pos[m], m) for m, n in pending.items() if n == 0]
    heapq.heapify(ready)
    order: list[ModuleId] = []
    while ready:
        _, mid = heapq.heappop(ready)
        order.append(mid)
        for src in waiting_on[mid]:
            pending[src] -= 1
            if pending[src] == 0:
                heapq.heappush(ready, (pos[src], src))
    return order


def module_context(proof: PseudoFormalProof, id: ModuleId) -> ModuleContext:
    """Assemble the context a block check of ``id`` sees: ancestor premises
    (root first), statements of direct invocation targets (document order),
    and the module's own fields."""
    own = proof.module(id)
    ancestors = tuple((a, proof.module(a).premises) for a in proof.ancestors(id))
    deps = tuple(
        (d, proof.module(d).premises, proof.module(d).conclusion)
        for d in proof.dependencies(id)
    )
    return ModuleContext(
        id=id,
        ancestor_premises=ancestors,
        dependency_statements=deps,
        own_premises=own.premises,
        own_conclusion=own.conclusion,
        own_proof=own.proof,
    )


def serialize_context(ctx: ModuleContext) -> str:
    """Canonical text form of a module context, used both for display and
    for measuring context lengths against the size bound."""
    lines: list[str] = ["SCOPE PREMISES:"]
    if ctx.ancestor_premises:
        for mid, premises in ctx.ancestor_premises:
            lines.append(f"[{mid.label()}] {premises}")
    else:
        lines.append("(none)")
    lines.append("INVOKED STATEMENTS:")
    if ctx.dependency_statements:
        for mid, premises, conclusion in ctx.dependency_statements:
            lines.append(f"[{mid.label()}] {premises} |- {conclusion}")
    else:
        lines.append("(none)")
    lines.append("PREMISES:")
    lines.append(ctx.own_premises)
    lines.append("CONCLUSION:")
    lines.append(ctx.own_conclusion)
    lines.append("PROOF:")
    lines.append(ctx.own_proof)
    return "\n".join(lines)


def scope_depth(proof: PseudoFormalProof) -> int:
    return max((len(proof.ancestors(m.id)) for m in proof.modules), default=0)


def goodness_report(
    proof: PseudoFormalProof,
    depth_limit: int | None = None,
    block_len_limit: int | None = None,
    out_degree_limit: int | None = None,
) -> GoodnessReport:
    """Measure the proof against the short-context desiderata.

    The context bound is ``L*(D+L+1)`` for measured depth ``D`` and maximum
    block length ``L``; measured context lengths are expected to stay within
    ``CONTEXT_OVERHEAD`` times that.  Optional caller limits on depth, block
    length and out-degree are reported as violations, not errors.
    """
    depth = scope_depth(proof)
    max_len = max((m.max_field_len for m in proof.modules), default=0)
    out_deg: dict[ModuleId, int] = {m.id: 0 for m in proof.modules}
    for src, _ in proof.invokes:
        out_deg[src] += 1
    max_out = max(out_deg.values(), default=0)
    per_module = {
        m.id: len(serialize_context(module_context(proof, m.id))) for m in proof.modules
    }

    violations: list[str] = []
    if depth_limit is not None and depth > depth_limit:
        violations.append(f"scope depth {depth} exceeds limit {depth_limit}")
    if block_len_limit is not None and max_len > block_len_limit:
        violations.append(f"max block length {max_len} exceeds limit {block_len_limit}")
    if out_degree_limit is not None and max_out > out_degree_limit:
        violations.append(f"max out-degree {max_out} exceeds limit {out_degree_limit}")

    shared = tuple(
        m.id
        for m in proof.modules
        if m.id.kind is ModuleKind.PROPOSITION
        and sum(1 for s in proof.invokers(m.id) if s.kind is ModuleKind.THEOREM) > 1
    )

    return GoodnessReport(
        depth=depth,
        max_block_len=max_len,
        max_out_degree=max_out,
        context_bound=max_len * (depth + max_len + 1),
        per_module_context_len=per_module,
        violations=tuple(violations),
        shared_scope_candidates=shared,
    )
