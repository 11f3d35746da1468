"""Seeded random generators for proofs and module sets.

Used by the test suite (round-trip, graph-validity and context-bound
checks) and by the demo scripts.  Everything is driven by a caller-supplied
``random.Random``, so runs replay exactly.
"""

from __future__ import annotations

import random

from .core import ModuleId, ModuleKind, ProofModule, PseudoFormalProof, build_proof
from .textio import structural_edges

_VOCAB = (
    "let be a finite group subset measure bounded sequence compact "
    "converges integral norm open closed dense linear map kernel image "
    "prime ideal ring field extension degree polynomial root continuous "
    "function metric space complete therefore hence obtain apply estimate "
    "inequality holds every exists unique positive nonzero element"
).split()


def words(rng: random.Random, n: int) -> str:
    return " ".join(rng.choice(_VOCAB) for _ in range(n))


def text_of_len(rng: random.Random, target: int) -> str:
    """Roughly ``target`` characters of word salad (never more)."""
    if target <= 0:
        return ""
    out: list[str] = []
    size = 0
    while True:
        w = rng.choice(_VOCAB)
        extra = len(w) + (1 if out else 0)
        if size + extra > target:
            break
        out.append(w)
        size += extra
    return " ".join(out) if out else "x" * max(1, min(target, 1))


def random_proof(
    rng: random.Random,
    multi: bool = False,
    max_props: int = 4,
    max_lemmas: int = 3,
    max_words: int = 20,
) -> PseudoFormalProof:
    """A random proof in canonical document order with structural edges.

    Round-trips through serialize -> parse -> to_proof by construction: the
    text is tag-free and the edges are exactly the structural ones.
    """
    def text(min_words=1):
        return words(rng, rng.randint(min_words, max_words))

    modules: list[ProofModule] = []
    n_theorems = rng.randint(1, 3) if multi else 1
    for t in range(1, n_theorems + 1):
        tid = ModuleId(ModuleKind.THEOREM, str(t) if multi else "")
        premises = text() if rng.random() < 0.8 else ""
        modules.append(ProofModule(tid, premises, text(), text()))

    n_props = rng.randint(1, max_props)
    for p in range(1, n_props + 1):
        pid = ModuleId(ModuleKind.PROPOSITION, str(p))
        premises = text() if rng.random() < 0.7 else ""
        modules.append(ProofModule(pid, premises, text(), text()))
        for l in range(1, rng.randint(0, max_lemmas) + 1):
            lid = ModuleId(ModuleKind.LEMMA, f"{p}.{l}")
            premises = text() if rng.random() < 0.5 else ""
            modules.append(ProofModule(lid, premises, text(), text()))

    scope, invoke = structural_edges(modules)
    return build_proof(modules, scope, invoke)


def random_good_proof(
    rng: random.Random,
    max_depth: int = 3,
    max_block_len: int = 500,
    max_out_degree: int = 5,
) -> PseudoFormalProof:
    """A random proof with bounded scope depth, block lengths and
    out-degrees, exercising arbitrary forests (including lemma chains for
    depth 3) rather than the canonical two-layer shape."""
    modules: list[ProofModule] = []

    def block(lo=10):
        return text_of_len(rng, rng.randint(lo, max_block_len))

    theorem = ModuleId(ModuleKind.THEOREM, "")
    modules.append(ProofModule(theorem, block(), block(), block()))

    scope: list[tuple[ModuleId, ModuleId]] = []
    depth_of = {theorem: 0}
    n_props = rng.randint(1, 4)
    for p in range(1, n_props + 1):
        pid = ModuleId(ModuleKind.PROPOSITION, str(p))
        modules.append(ProofModule(pid, block(), block(), block()))
        depth_of[pid] = 0
        if max_depth >= 1:
            scope.append((pid, theorem))
            depth_of[pid] = 1
        prev_lemma: ModuleId | None = None
        for l in range(1, rng.randint(0, 3) + 1):
            lid = ModuleId(ModuleKind.LEMMA, f"{p}.{l}")
            modules.append(ProofModule(lid, block(), block(), block()))
            depth_of[lid] = 0
            if (
                prev_lemma is not None
                and depth_of[prev_lemma] + 1 <= max_depth
                and rng.random() < 0.5
            ):
                scope.append((lid, prev_lemma))  # lemma chain: depth up to max_depth
                depth_of[lid] = depth_of[prev_lemma] + 1
            elif max_depth >= 2:
                scope.append((lid, pid))
                depth_of[lid] = depth_of[pid] + 1
            prev_lemma = lid

    # bounded fan-out to strictly earlier modules: acyclic and never a
    # same-level forward reference
    invoke: list[tuple[ModuleId, ModuleId]] = []
    for i, m in enumerate(modules):
        if i == 0:
            continue
        n_edges = rng.randint(0, min(max_out_degree, i))
        targets = rng.sample(range(i), n_edges)
        invoke += [(m.id, modules[j].id) for j in targets]

    return build_proof(modules, scope, invoke)


def random_module_set(rng: random.Random, n_props: int = 4, n_lemmas: int = 4):
    """Modules plus valid random scope/invoke edges (edges only point to
    document-earlier modules, so the instance is always clean)."""
    modules: list[ProofModule] = [
        ProofModule(ModuleId(ModuleKind.THEOREM, ""), "t-pre", "t-concl", "t-proof")
    ]
    props = rng.randint(1, n_props)
    for p in range(1, props + 1):
        modules.append(ProofModule(ModuleId(ModuleKind.PROPOSITION, str(p)), "", f"p{p}", f"q{p}"))
    for l in range(1, rng.randint(0, n_lemmas) + 1):
        prefix = rng.randint(1, props)
        mid = ModuleId(ModuleKind.LEMMA, f"{prefix}.{l}")
        modules.append(ProofModule(mid, "", f"l{l}", f"m{l}"))

    scope: list[tuple[ModuleId, ModuleId]] = []
    for i in range(1, len(modules)):
        if rng.random() < 0.8:
            parent = rng.randrange(i)
            scope.append((modules[i].id, modules[parent].id))

    invoke: list[tuple[ModuleId, ModuleId]] = []
    for i in range(1, len(modules)):
        for j in rng.sample(range(i), rng.randint(0, min(3, i))):
            invoke.append((modules[i].id, modules[j].id))

    return modules, scope, invoke


def seed_cycle(rng: random.Random, modules, invoke):
    """Return invoke edges plus a seeded invocation cycle."""
    ids = [m.id for m in modules]
    if len(ids) < 2:
        a = b = ids[0]
    else:
        a, b = rng.sample(ids, 2)
    return list(invoke) + [(a, b), (b, a)]


def seed_double_parent(rng: random.Random, modules, scope):
    """Return scope edges plus a node with two distinct parents."""
    ids = [m.id for m in modules]
    child = rng.choice(ids)
    parents = [i for i in ids if i != child]
    if len(parents) < 2:
        # degenerate set: fall back to a scope self-cycle, also not a forest
        return [e for e in scope if e[0] != child] + [(child, child)]
    p1, p2 = rng.sample(parents, 2)
    return [e for e in scope if e[0] != child] + [(child, p1), (child, p2)]
