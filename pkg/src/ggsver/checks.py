"""Per-claim checks on finite quotients, each returning a structured verdict.

Every check evaluates one identity or containment exactly inside the level-N
leaf action of a session.  The statements about the infinite group project
onto each finite level, so a verdict only ever asserts "verified at level N";
a failure comes with a witness that can be re-checked by sifting alone.

Checks whose hypotheses exclude the given defining data report "skipped" with
the hypothesis named; checks run below the depth where they say anything
report "vacuous".
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .ggs import GGSSpec, GroupSession, build, is_constant, normalize
from .permgroups import PermGroup, commutator_subgroup, equals, generate
from .portraits import (
    Perm,
    commutator,
    directed,
    embed_at_vertex,
    rooted,
    subtree_embed,
    subtree_section,
    vertex_word,
)

__all__ = [
    "VacuousCheck",
    "Verdict",
    "Report",
    "HAS_CSP",
    "CONSTANT_VECTOR_EXCEPTION",
    "classify_csp",
    "check_abelianization",
    "check_gamma3_product",
    "check_key_congruence",
    "check_regular_branch",
    "check_stab1_derived_in_gamma3",
    "check_subdirect",
    "check_psi2_second_derived",
    "check_rank_growth",
    "check_derived_contains_stab",
    "check_second_derived_contains_stab",
    "CHECKS",
    "run_all",
    "default_depth",
]

HOLDS = "holds"
FAILS = "fails"
SKIPPED = "skipped"
VACUOUS = "vacuous"

HAS_CSP = "HasCSP"
CONSTANT_VECTOR_EXCEPTION = "ConstantVectorException"

CONSTANT_HYPOTHESIS = (
    "hypothesis not met: the defining data is the constant-vector group, "
    "which this statement excludes"
)


class VacuousCheck(Exception):
    """The requested depth is too small for the check to say anything."""


@dataclass
class Verdict:
    claim_id: str
    level: int
    status: str
    details: dict = field(default_factory=dict)
    reason: str | None = None
    witness: object = None

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    def to_jsonable(self) -> dict:
        w = self.witness
        if isinstance(w, Perm):
            w = {"perm": w.tolist()}
        return {
            "id": self.claim_id,
            "status": self.status,
            "level": self.level,
            "details": self.details,
            "reason": self.reason,
            "witness": w,
        }


@dataclass
class Report:
    p: int
    vectors: list
    label: str | None
    depth: int
    classification: str
    verdicts: list
    wall_times: dict

    @property
    def failed(self) -> list:
        return [v for v in self.verdicts if v.status == FAILS]

    def verdict(self, claim_id: str) -> Verdict:
        for v in self.verdicts:
            if v.claim_id == claim_id:
                return v
        raise KeyError(claim_id)

    def to_jsonable(self, include_timings: bool = True) -> dict:
        checks = []
        for v in self.verdicts:
            entry = v.to_jsonable()
            if include_timings:
                entry["wall_time"] = self.wall_times.get(v.claim_id, 0.0)
            checks.append(entry)
        return {
            "spec": {"p": self.p, "vectors": self.vectors, "label": self.label},
            "depth": self.depth,
            "classification": self.classification,
            "classification_note": (
                "definitional from the defining vectors; the per-level checks "
                "in this report are the finite-level evidence"
            ),
            "checks": checks,
        }


def classify_csp(spec: GGSSpec) -> str:
    """Constant vector is the lone exception; everything else has the
    congruence subgroup property."""
    return CONSTANT_VECTOR_EXCEPTION if is_constant(spec) else HAS_CSP


class _Workspace:
    """Shared sessions and subgroup handles for one verification run."""

    def __init__(self, session: GroupSession):
        self.base = session
        self._sessions = {session.depth: session}
        self._derived: dict[int, PermGroup] = {}
        self._gamma3: dict[int, PermGroup] = {}
        self._st1 = None
        self._st1_derived = None
        self._second = None

    def session(self, depth: int) -> GroupSession:
        got = self._sessions.get(depth)
        if got is None:
            got = build(self.base.spec, depth, allow_large=True)
            self._sessions[depth] = got
        return got

    def group(self, depth: int) -> PermGroup:
        return self.session(depth).G

    def derived(self, depth: int) -> PermGroup:
        got = self._derived.get(depth)
        if got is None:
            got = self.group(depth).derived()
            self._derived[depth] = got
        return got

    def gamma3(self, depth: int) -> PermGroup:
        """Third lower-central term [[G,G],G] of the level-`depth` group."""
        got = self._gamma3.get(depth)
        if got is None:
            g = self.group(depth)
            got = commutator_subgroup(self.derived(depth), g, g)
            self._gamma3[depth] = got
        return got

    def st1(self) -> PermGroup:
        if self._st1 is None:
            self._st1 = self.base.G.level_stabilizer(1)
        return self._st1

    def st1_derived(self) -> PermGroup:
        # st(1) is normal here, so closing its generator commutators under
        # the three ambient generators already yields its derived subgroup
        if self._st1_derived is None:
            st1 = self.st1()
            self._st1_derived = commutator_subgroup(st1, st1, self.base.G)
        return self._st1_derived

    def second_derived(self) -> PermGroup:
        if self._second is None:
            d = self.derived(self.base.depth)
            self._second = commutator_subgroup(d, d, self.base.G)
        return self._second

    def block_product(self, small: PermGroup) -> PermGroup:
        """Block-diagonal product of p copies of a level-(N-1) subgroup,
        acting on the level-N leaves."""
        p = self.base.spec.p
        n = self.base.depth
        gens = []
        for j in range(p):
            for g in small.generators:
                gens.append(subtree_embed(g, p, (j,), n))
        return generate(self.base.degree, gens, prime=p)


def _ws(session, ws):
    return ws if ws is not None else _Workspace(session)


def _require_depth(session, minimum, what):
    if session.depth < minimum:
        raise VacuousCheck(
            f"{what} needs depth at least {minimum}, got {session.depth}"
        )


def _equality_verdict(claim_id, session, lhs, rhs, details):
    """Two-sided comparison with a sifting witness on failure."""
    details = dict(details)
    details["lhs_exponent"] = lhs.order_exponent
    details["rhs_exponent"] = rhs.order_exponent
    missing = rhs.containment_witness(lhs)
    if missing is not None:
        return Verdict(claim_id, session.depth, FAILS, details, witness=missing)
    missing = lhs.containment_witness(rhs)
    if missing is not None:
        return Verdict(claim_id, session.depth, FAILS, details, witness=missing)
    return Verdict(claim_id, session.depth, HOLDS, details)


def check_abelianization(session: GroupSession, ws=None) -> Verdict:
    """Index of the derived subgroup is p**(r+1) and the quotient is
    elementary abelian (Frattini equals derived)."""
    ws = _ws(session, ws)
    spec = session.spec
    g = session.G
    d = ws.derived(session.depth)
    index_exp = g.order_exponent - d.order_exponent
    frattini_eq = equals(g.frattini(), d)
    details = {
        "order_exponent": g.order_exponent,
        "derived_exponent": d.order_exponent,
        "index_exponent": index_exp,
        "expected_index_exponent": spec.r + 1,
        "frattini_equals_derived": frattini_eq,
    }
    ok = index_exp == spec.r + 1 and frattini_eq
    if ok:
        return Verdict("abelianization", session.depth, HOLDS, details)
    return Verdict(
        "abelianization", session.depth, FAILS, details, witness=dict(details)
    )


def check_gamma3_product(session: GroupSession, ws=None) -> Verdict:
    """The first-level sections of the third lower-central term of the
    level-1 stabilizer fill the full product of p lower-central copies."""
    spec = session.spec
    if is_constant(spec):
        return Verdict(
            "gamma3_product", session.depth, SKIPPED, reason=CONSTANT_HYPOTHESIS
        )
    _require_depth(session, 3, "the lower-central product identity")
    ws = _ws(session, ws)
    g = session.G
    lhs = commutator_subgroup(ws.st1_derived(), ws.st1(), g)
    rhs = ws.block_product(ws.gamma3(session.depth - 1))
    return _equality_verdict("gamma3_product", session, lhs, rhs, {})


def check_key_congruence(session: GroupSession, ws=None) -> Verdict:
    """Product of conjugate-commutators of the reduced first generator lands
    on a first-slot commutator, modulo the product of lower-central copies.

    With the first row reduced to (1, *, ..., *, m), the product over
    k = 0..p-1 of [b^(a^-k), b^(a^(1-k))]^(m^k) agrees with the tuple
    ([a, b]^(1-m), 1, ..., 1) up to the block product of third lower-central
    terms; this needs m != 1 and is skipped otherwise.
    """
    spec = session.spec
    norm = normalize(spec)
    if norm.case == "symmetric":
        if is_constant(spec):
            return Verdict(
                "key_congruence",
                session.depth,
                SKIPPED,
                reason=(
                    "hypothesis not met: m != 1 is required and the constant "
                    "vector forces m = 1"
                ),
            )
        return Verdict(
            "key_congruence",
            session.depth,
            SKIPPED,
            reason=(
                "hypothesis not met: every row is symmetric after reduction, "
                "so no generator of shape (1, ..., m) with m != 1 exists"
            ),
        )
    row = norm.spec.vectors[0]
    m = row[-1]
    if row[0] != 1 or m == 1:
        return Verdict(
            "key_congruence",
            session.depth,
            SKIPPED,
            reason=(
                "hypothesis not met: row operations cannot reach a first row "
                "with leading entry 1 and last entry different from 1"
            ),
        )
    _require_depth(session, 3, "the commutator-product congruence")
    ws = _ws(session, ws)
    p = spec.p
    n = session.depth

    a = session.a
    # the reduced first generator is the directed automorphism of the
    # transformed row; it lies in the same group
    b1 = directed(norm.spec, n, 1)
    w = None
    for k in range(p):
        left = b1.conjugated_by(a ** (-k % p))
        right = b1.conjugated_by(a ** ((1 - k) % p))
        term = commutator(left, right) ** pow(m, k, p)
        w = term if w is None else w * term
    small = commutator(rooted(p, n - 1, 1), directed(norm.spec, n - 1, 1))
    target = embed_at_vertex(small ** ((1 - m) % p), (0,), n)
    delta = w * target.inverse()

    gamma = ws.gamma3(n - 1)
    details = {"m": m, "reduced_row": list(row)}
    for j, part in enumerate(delta.psi()):
        q = part.to_perm(n - 1)
        if not gamma.contains(q):
            details["failing_slot"] = j
            return Verdict(
                "key_congruence", session.depth, FAILS, details, witness=q
            )
    return Verdict("key_congruence", session.depth, HOLDS, details)


def check_regular_branch(session: GroupSession, ws=None) -> Verdict:
    """First-level sections of the derived subgroup of the level-1 stabilizer
    fill the full product of p derived-subgroup copies."""
    spec = session.spec
    if is_constant(spec):
        return Verdict(
            "regular_branch", session.depth, SKIPPED, reason=CONSTANT_HYPOTHESIS
        )
    _require_depth(session, 3, "the branch identity")
    ws = _ws(session, ws)
    details = {}
    if spec.r == 1:
        details["mode"] = "extended: r=1 non-constant"
    lhs = ws.st1_derived()
    rhs = ws.block_product(ws.derived(session.depth - 1))
    return _equality_verdict("regular_branch", session, lhs, rhs, details)


def check_stab1_derived_in_gamma3(session: GroupSession, ws=None) -> Verdict:
    """The derived subgroup of the level-1 stabilizer sits inside the third
    lower-central term; no exclusions."""
    ws = _ws(session, ws)
    gamma = ws.gamma3(session.depth)
    lhs = ws.st1_derived()
    details = {
        "stab1_derived_exponent": lhs.order_exponent,
        "gamma3_exponent": gamma.order_exponent,
    }
    missing = gamma.containment_witness(lhs)
    if missing is not None:
        return Verdict(
            "stab1_derived_in_gamma3",
            session.depth,
            FAILS,
            details,
            witness=missing,
        )
    return Verdict("stab1_derived_in_gamma3", session.depth, HOLDS, details)


def check_subdirect(session: GroupSession, ws=None) -> Verdict:
    """Every first-level projection of the derived subgroup is the whole
    level-(N-1) group."""
    spec = session.spec
    if is_constant(spec):
        return Verdict(
            "subdirect", session.depth, SKIPPED, reason=CONSTANT_HYPOTHESIS
        )
    _require_depth(session, 3, "the subdirect projection check")
    ws = _ws(session, ws)
    p = spec.p
    n = session.depth
    d = ws.derived(n)
    full = ws.group(n - 1)
    details = {"full_exponent": full.order_exponent, "projection_exponents": []}
    for j in range(p):
        sections = [subtree_section(g, p, (j,)) for g in d.generators]
        proj = generate(full.degree, sections, prime=p)
        details["projection_exponents"].append(proj.order_exponent)
        if not equals(proj, full):
            missing = proj.containment_witness(full)
            details["failing_slot"] = j
            return Verdict(
                "subdirect", session.depth, FAILS, details, witness=missing
            )
    return Verdict("subdirect", session.depth, HOLDS, details)


def check_psi2_second_derived(session: GroupSession, ws=None) -> Verdict:
    """Each level-2 embedded copy of the depth-(N-2) derived subgroup lies in
    the second derived subgroup; needs at least two directed generators."""
    spec = session.spec
    if spec.r < 2:
        return Verdict(
            "psi2_second_derived",
            session.depth,
            SKIPPED,
            reason="hypothesis not met: needs at least two directed generators",
        )
    _require_depth(session, 3, "the level-2 second-derived containment")
    ws = _ws(session, ws)
    p = spec.p
    n = session.depth
    second = ws.second_derived()
    if n - 2 >= 2:
        sub_gens = ws.derived(n - 2).generators
    else:
        sub_gens = ()  # the depth-1 group is cyclic, so its derived part is trivial
    details = {
        "second_derived_exponent": second.order_exponent,
        "inner_derived_generators": len(sub_gens),
    }
    for k in range(p * p):
        word = vertex_word(k, 2, p)
        for h in sub_gens:
            emb = subtree_embed(h, p, word, n)
            if not second.contains(emb):
                details["failing_vertex"] = list(word)
                return Verdict(
                    "psi2_second_derived",
                    session.depth,
                    FAILS,
                    details,
                    witness=emb,
                )
    return Verdict("psi2_second_derived", session.depth, HOLDS, details)


def check_rank_growth(session: GroupSession, ws=None) -> Verdict:
    """Minimal generator counts grow along levels: rank at level n is at
    least n for n = 2..r+1, with equality r+1 at level r+1."""
    ws = _ws(session, ws)
    spec = session.spec
    top = min(session.depth, spec.r + 1)
    ranks = []
    ok = True
    for n in range(2, top + 1):
        rk = ws.group(n).rank()
        ranks.append([n, rk])
        if rk < n:
            ok = False
    if spec.r + 1 <= session.depth and ranks and ranks[-1][1] != spec.r + 1:
        ok = False
    details = {"ranks": ranks, "expected_terminal_rank": spec.r + 1}
    if ok:
        return Verdict("rank_growth", session.depth, HOLDS, details)
    return Verdict(
        "rank_growth", session.depth, FAILS, details, witness=dict(details)
    )


def check_derived_contains_stab(session: GroupSession, ws=None) -> Verdict:
    """The level-(r+1) stabilizer sits inside the derived subgroup."""
    spec = session.spec
    if session.depth < spec.r + 2:
        raise VacuousCheck(
            f"the level-{spec.r + 1} stabilizer is trivial or everything at "
            f"depth {session.depth}; need depth at least {spec.r + 2}"
        )
    ws = _ws(session, ws)
    st = session.G.level_stabilizer(spec.r + 1)
    d = ws.derived(session.depth)
    details = {
        "stabilizer_level": spec.r + 1,
        "stabilizer_exponent": st.order_exponent,
        "derived_exponent": d.order_exponent,
    }
    missing = d.containment_witness(st)
    if missing is not None:
        return Verdict(
            "derived_contains_stab", session.depth, FAILS, details, witness=missing
        )
    return Verdict("derived_contains_stab", session.depth, HOLDS, details)


def check_second_derived_contains_stab(session: GroupSession, ws=None) -> Verdict:
    """The level-(r+3) stabilizer sits inside the second derived subgroup."""
    spec = session.spec
    if is_constant(spec):
        return Verdict(
            "second_derived_contains_stab",
            session.depth,
            SKIPPED,
            reason=CONSTANT_HYPOTHESIS,
        )
    if session.depth < spec.r + 4:
        raise VacuousCheck(
            f"the level-{spec.r + 3} stabilizer is trivial or everything at "
            f"depth {session.depth}; need depth at least {spec.r + 4}"
        )
    ws = _ws(session, ws)
    st = session.G.level_stabilizer(spec.r + 3)
    second = ws.second_derived()
    details = {
        "stabilizer_level": spec.r + 3,
        "stabilizer_exponent": st.order_exponent,
        "second_derived_exponent": second.order_exponent,
    }
    missing = second.containment_witness(st)
    if missing is not None:
        return Verdict(
            "second_derived_contains_stab",
            session.depth,
            FAILS,
            details,
            witness=missing,
        )
    return Verdict(
        "second_derived_contains_stab", session.depth, HOLDS, details
    )


CHECKS = {
    "abelianization": check_abelianization,
    "gamma3_product": check_gamma3_product,
    "key_congruence": check_key_congruence,
    "regular_branch": check_regular_branch,
    "stab1_derived_in_gamma3": check_stab1_derived_in_gamma3,
    "subdirect": check_subdirect,
    "psi2_second_derived": check_psi2_second_derived,
    "rank_growth": check_rank_growth,
    "derived_contains_stab": check_derived_contains_stab,
    "second_derived_contains_stab": check_second_derived_contains_stab,
}


def default_depth(spec: GGSSpec) -> int:
    """Deep enough for the second-derived containment, inside the leaf cap."""
    from .ggs import DEGREE_CAP

    cap = 0
    d = 1
    while d * spec.p <= DEGREE_CAP:
        d *= spec.p
        cap += 1
    return min(spec.r + 4, cap)


def run_all(spec: GGSSpec, depth=None, checks=None, label=None) -> Report:
    """Build one session, run every requested check against it, and fold the
    verdicts into a report."""
    if depth is None:
        depth = default_depth(spec)
    if checks is None:
        chosen = list(CHECKS)
    else:
        unknown = [c for c in checks if c not in CHECKS]
        if unknown:
            raise KeyError(f"unknown checks: {', '.join(unknown)}")
        chosen = [c for c in CHECKS if c in set(checks)]
    session = build(spec, depth, allow_large=True)
    ws = _Workspace(session)
    verdicts = []
    times = {}
    for cid in chosen:
        fn = CHECKS[cid]
        t0 = time.perf_counter()
        try:
            v = fn(session, ws)
        except VacuousCheck as exc:
            v = Verdict(cid, depth, VACUOUS, reason=str(exc))
        times[cid] = time.perf_counter() - t0
        verdicts.append(v)
    return Report(
        p=spec.p,
        vectors=[list(v) for v in spec.vectors],
        label=label,
        depth=depth,
        classification=classify_csp(spec),
        verdicts=verdicts,
        wall_times=times,
    )
