import random

import pytest

from pfbv.core import (
    ModuleId,
    ModuleKind,
    ProofModule,
    build_proof,
    goodness_report,
    module_context,
    realize_premises,
    serialize_context,
    verification_order,
)
from pfbv.errors import (
    BadLemmaPrefix,
    CycleInDependencyGraph,
    DanglingEdge,
    DuplicateId,
    ForwardReference,
    InvalidModuleId,
    ScopeNotForest,
    UnknownId,
)
from pfbv.synth import random_good_proof, random_module_set, seed_cycle, seed_double_parent

T = ModuleId(ModuleKind.THEOREM, "")
P1 = ModuleId(ModuleKind.PROPOSITION, "1")
P2 = ModuleId(ModuleKind.PROPOSITION, "2")
L11 = ModuleId(ModuleKind.LEMMA, "1.1")


def chain_proof(premises=("A", "B", "C")):
    modules = [
        ProofModule(T, premises[0], "t", "pt"),
        ProofModule(P1, premises[1], "p", "pp"),
        ProofModule(L11, premises[2], "l", "pl"),
    ]
    return build_proof(modules, [(P1, T), (L11, P1)], [(T, P1), (P1, L11)])


# --- module ids -------------------------------------------------------------

def test_module_id_labels():
    assert T.label() == "Theorem"
    assert ModuleId(ModuleKind.THEOREM, "2").short() == "T2"
    assert P1.label() == "Proposition 1"
    assert L11.short() == "L1.1"
    assert ModuleId.parse("L1.1") == L11


@pytest.mark.parametrize(
    "kind,index",
    [
        (ModuleKind.LEMMA, "1"),
        (ModuleKind.LEMMA, "1.2.3"),
        (ModuleKind.LEMMA, "a.b"),
        (ModuleKind.PROPOSITION, ""),
        (ModuleKind.PROPOSITION, "x"),
        (ModuleKind.THEOREM, "1.1"),
    ],
)
def test_bad_indices_rejected(kind, index):
    with pytest.raises(InvalidModuleId):
        ModuleId(kind, index)


def test_empty_conclusion_rejected():
    with pytest.raises(InvalidModuleId):
        ProofModule(P1, "", "   ", "p")


# --- build_proof ------------------------------------------------------------

def test_build_minimal_chain():
    proof = chain_proof()
    assert len(proof.modules) == 3
    assert proof.scope_parent[L11] == P1
    assert (T, P1) in proof.invokes


def test_two_cycle_rejected():
    modules = [ProofModule(P1, "", "a", "x"), ProofModule(P2, "", "b", "y")]
    with pytest.raises(CycleInDependencyGraph) as exc:
        build_proof(modules, [], [(P1, P2), (P2, P1)])
    assert {P1, P2} <= set(exc.value.cycle)


def test_two_scope_parents_rejected():
    modules = [
        ProofModule(T, "", "t", ""),
        ProofModule(P1, "", "a", ""),
        ProofModule(P2, "", "b", ""),
        ProofModule(L11, "", "l", ""),
    ]
    with pytest.raises(ScopeNotForest):
        build_proof(modules, [(L11, P1), (L11, P2)], [])


def test_scope_cycle_rejected():
    modules = [ProofModule(P1, "", "a", ""), ProofModule(P2, "", "b", "")]
    with pytest.raises(ScopeNotForest):
        build_proof(modules, [(P1, P2), (P2, P1)], [])


def test_dangling_edge_rejected():
    modules = [ProofModule(P1, "", "a", "")]
    with pytest.raises(DanglingEdge):
        build_proof(modules, [], [(P1, P2)])
    with pytest.raises(DanglingEdge):
        build_proof(modules, [(P2, P1)], [])


def test_duplicate_id_rejected():
    modules = [ProofModule(P1, "", "a", ""), ProofModule(P1, "", "b", "")]
    with pytest.raises(DuplicateId):
        build_proof(modules, [], [])


def test_lemma_without_proposition_rejected():
    modules = [ProofModule(ModuleId(ModuleKind.LEMMA, "3.1"), "", "l", "")]
    with pytest.raises(BadLemmaPrefix):
        build_proof(modules, [], [])


def test_same_level_forward_invocation_rejected():
    # P1 invoking P2 at the same level points forward in document order
    modules = [ProofModule(P1, "", "a", ""), ProofModule(P2, "", "b", "")]
    with pytest.raises(ForwardReference):
        build_proof(modules, [], [(P1, P2)])


def test_cross_level_forward_invocation_allowed():
    # the theorem statement precedes its propositions but lives one level up
    proof = chain_proof()
    assert (T, P1) in proof.invokes


# --- realize_premises --------------------------------------------------------

def test_realize_premises_root():
    proof = chain_proof()
    assert realize_premises(proof, T) == "A"


def test_realize_premises_chain_order():
    proof = chain_proof()
    assert realize_premises(proof, L11) == "A\n\nB\n\nC"


def test_realize_premises_skips_empty_blocks():
    proof = chain_proof(premises=("A", "", "C"))
    assert realize_premises(proof, L11) == "A\n\nC"


def test_realize_premises_unknown_id():
    proof = chain_proof()
    with pytest.raises(UnknownId):
        realize_premises(proof, ModuleId(ModuleKind.LEMMA, "9.9"))


def test_realize_premises_matches_naive_walk():
    # oracle: follow parent pointers up, then reverse
    rng = random.Random(7)
    for _ in range(25):
        modules, scope, invoke = random_module_set(rng, n_props=6, n_lemmas=4)
        proof = build_proof(modules, scope, invoke)
        parent = dict(scope)
        for m in modules:
            chain = [m.id]
            cur = m.id
            while cur in parent:
                cur = parent[cur]
                chain.append(cur)
            chain.reverse()
            expected = "\n\n".join(
                proof.module(x).premises for x in chain if proof.module(x).premises
            )
            assert realize_premises(proof, m.id) == expected


# --- verification_order -------------------------------------------------------

def test_order_chain():
    proof = chain_proof()
    assert verification_order(proof) == [L11, P1, T]


def test_order_single_module():
    proof = build_proof([ProofModule(P1, "", "a", "")], [], [])
    assert verification_order(proof) == [P1]


def brute_force_order_ok(proof, order):
    index = {mid: i for i, mid in enumerate(order)}
    for src, dst in proof.invokes:
        if index[dst] >= index[src]:
            return False
    return True


def test_order_random_dags():
    rng = random.Random(21)
    for _ in range(50):
        modules, scope, invoke = random_module_set(rng, n_props=8, n_lemmas=4)
        proof = build_proof(modules, scope, invoke)
        order = verification_order(proof)
        assert sorted(order, key=str) == sorted((m.id for m in modules), key=str)
        assert brute_force_order_ok(proof, order)


def test_order_ties_broken_by_document_order():
    # no edges at all: verification order is document order
    modules = [ProofModule(P1, "", "a", ""), ProofModule(P2, "", "b", "")]
    proof = build_proof(modules, [], [])
    assert verification_order(proof) == [P1, P2]


# --- module_context ------------------------------------------------------------

def theorem_with_two_props():
    modules = [
        ProofModule(T, "t-pre", "t-concl", "t-proof"),
        ProofModule(P1, "a-pre", "a-concl", "a-proof"),
        ProofModule(P2, "b-pre", "b-concl", "b-proof"),
    ]
    return build_proof(modules, [(P1, T), (P2, T)], [(T, P1), (T, P2)])


def test_context_of_root_with_deps():
    proof = theorem_with_two_props()
    ctx = module_context(proof, T)
    assert ctx.ancestor_premises == ()
    assert [d[0] for d in ctx.dependency_statements] == [P1, P2]
    assert ctx.dependency_statements[0][2] == "a-concl"


def test_context_cross_checks_realize_premises():
    proof = chain_proof()
    ctx = module_context(proof, L11)
    assert [a[0] for a in ctx.ancestor_premises] == [T, P1]
    assert ctx.dependency_statements == ()
    joined = "\n\n".join(
        [p for _, p in ctx.ancestor_premises if p] + ([ctx.own_premises] if ctx.own_premises else [])
    )
    assert joined == realize_premises(proof, L11)


def test_context_ignores_unrelated_modules():
    # swap two modules unrelated to L1.1 and edit another: byte-identical context
    L12 = ModuleId(ModuleKind.LEMMA, "1.2")
    L13 = ModuleId(ModuleKind.LEMMA, "1.3")
    base = [
        ProofModule(T, "tp", "tc", "tpr"),
        ProofModule(P1, "pp", "pc", "ppr"),
        ProofModule(L11, "lp", "lc", "lpr"),
        ProofModule(L12, "x", "xc", "xpr"),
        ProofModule(L13, "y", "yc", "ypr"),
    ]
    scope = [(P1, T), (L11, P1), (L12, P1), (L13, P1)]
    invoke = [(T, P1), (P1, L11), (P1, L12), (P1, L13)]
    before = serialize_context(module_context(build_proof(base, scope, invoke), L11))

    swapped = [base[0], base[1], base[2], base[4], base[3]]  # swap L1.2 and L1.3
    after_swap = serialize_context(module_context(build_proof(swapped, scope, invoke), L11))
    assert after_swap == before

    edited = list(base)
    edited[3] = ProofModule(L12, "EDITED", "DIFFERENT", "TEXT")
    after_edit = serialize_context(module_context(build_proof(edited, scope, invoke), L11))
    assert after_edit == before


# --- goodness_report -------------------------------------------------------------

def test_goodness_single_module_arithmetic():
    block = "x" * 40
    proof = build_proof([ProofModule(P1, block, block, block)], [], [])
    report = goodness_report(proof)
    assert report.depth == 0
    assert report.max_block_len == 40
    assert report.context_bound == 40 * 41
    assert report.allowed_context_len == 4 * 40 * 41
    assert report.within_bound()


def test_goodness_deep_chain_flags_depth_limit():
    n = 8
    ids = [ModuleId(ModuleKind.PROPOSITION, str(i)) for i in range(1, n + 1)]
    modules = [ProofModule(mid, "p", "c", "r") for mid in ids]
    scope = [(ids[i], ids[i - 1]) for i in range(1, n)]
    proof = build_proof(modules, scope, [])
    report = goodness_report(proof, depth_limit=3)
    assert report.depth == n - 1
    assert any("depth" in v for v in report.violations)


def test_goodness_flags_shared_propositions():
    T1 = ModuleId(ModuleKind.THEOREM, "1")
    T2 = ModuleId(ModuleKind.THEOREM, "2")
    modules = [
        ProofModule(T1, "", "t1", "x"),
        ProofModule(T2, "", "t2", "y"),
        ProofModule(P1, "", "p1", "z"),
    ]
    proof = build_proof(modules, [(P1, T1)], [(T1, P1), (T2, P1), (T2, T1)])
    report = goodness_report(proof)
    assert report.shared_scope_candidates == (P1,)


def test_goodness_generated_good_proofs_within_bound():
    rng = random.Random(5)
    for _ in range(20):
        proof = random_good_proof(rng)
        report = goodness_report(proof)
        assert report.depth <= 3
        assert report.within_bound(), report.to_json_dict()
        for m in proof.modules:
            assert len(proof.ancestors(m.id)) <= report.depth


# --- graph validity on random instances ------------------------------------------

def test_random_clean_instances_accepted_and_violations_rejected():
    rng = random.Random(99)
    for i in range(100):
        modules, scope, invoke = random_module_set(rng)
        proof = build_proof(modules, scope, invoke)
        assert brute_force_order_ok(proof, verification_order(proof))
        if i % 2 == 0:
            with pytest.raises(CycleInDependencyGraph):
                build_proof(modules, scope, seed_cycle(rng, modules, invoke))
        else:
            with pytest.raises(ScopeNotForest):
                build_proof(modules, seed_double_parent(rng, modules, scope), invoke)
