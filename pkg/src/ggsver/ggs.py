"""Defining data for multi-GGS groups and assembly of finite quotients.

A group in this family acts on the p-regular rooted tree (p an odd prime) and
is generated by the rooted cycle `a` together with r directed generators, one
per row of an r x (p-1) matrix over F_p whose rows must be linearly
independent.  Building at depth N yields the permutation group induced on the
p**N leaves, which is exactly the level-N quotient of the infinite group.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .portraits import (
    Automorphism,
    Perm,
    directed,
    identity,
    is_odd_prime,
    restrict_to_level,
    rooted,
)
from .permgroups import PermGroup, generate

__all__ = [
    "SpecError",
    "NotPrime",
    "NotOdd",
    "BadLength",
    "DependentVectors",
    "NormalizationImpossible",
    "GGSSpec",
    "Normalization",
    "GroupSession",
    "validate",
    "is_constant",
    "is_symmetric",
    "normalize",
    "build",
    "DEGREE_CAP",
]

DEGREE_CAP = 100_000


class SpecError(ValueError):
    """Defining data rejected; subclasses say why."""


class NotPrime(SpecError):
    pass


class NotOdd(SpecError):
    pass


class BadLength(SpecError):
    pass


class DependentVectors(SpecError):
    def __init__(self, message, certificate):
        super().__init__(message)
        self.certificate = tuple(certificate)


class NormalizationImpossible(SpecError):
    def __init__(self, message, step):
        super().__init__(message)
        self.step = step


@dataclass(frozen=True)
class GGSSpec:
    """Validated defining data: an odd prime and independent rows over F_p."""

    p: int
    vectors: tuple[tuple[int, ...], ...]

    @property
    def r(self) -> int:
        return len(self.vectors)


def _row_reduce(rows, p):
    """Gaussian elimination over F_p with a tracked transform.

    Returns (rank, echelon rows, transform); when some combination of the
    input rows vanishes, the transform row that produced it is a dependency
    certificate.
    """
    m = [list(row) for row in rows]
    r = len(m)
    width = len(m[0]) if r else 0
    t = [[1 if i == j else 0 for j in range(r)] for i in range(r)]
    rank = 0
    for col in range(width):
        pivot = None
        for i in range(rank, r):
            if m[i][col] % p:
                pivot = i
                break
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        t[rank], t[pivot] = t[pivot], t[rank]
        inv = pow(m[rank][col], -1, p)
        m[rank] = [(inv * x) % p for x in m[rank]]
        t[rank] = [(inv * x) % p for x in t[rank]]
        for i in range(r):
            if i != rank and m[i][col] % p:
                f = m[i][col]
                m[i] = [(x - f * y) % p for x, y in zip(m[i], m[rank])]
                t[i] = [(x - f * y) % p for x, y in zip(t[i], t[rank])]
        rank += 1
    return rank, m, t


def validate(p, vectors) -> GGSSpec:
    """Accept defining data or raise a structured rejection.

    Entries are reduced mod p.  Independence is decided by Gaussian
    elimination; the DependentVectors error carries a vanishing combination.
    """
    p = int(p)
    if p == 2:
        raise NotOdd("the arity prime must be odd")
    if not is_odd_prime(p):
        raise NotPrime(f"{p} is not prime")
    rows = [tuple(int(x) % p for x in v) for v in vectors]
    if not rows:
        raise BadLength("at least one defining vector is required")
    for i, row in enumerate(rows):
        if len(row) != p - 1:
            raise BadLength(
                f"vector {i + 1} has length {len(row)}, expected {p - 1}"
            )
    rank, echelon, transform = _row_reduce(rows, p)
    if rank < len(rows):
        # the transform row that produced a zero echelon row is the certificate
        for i, row in enumerate(echelon):
            if all(x % p == 0 for x in row):
                cert = transform[i]
                raise DependentVectors(
                    "defining vectors are linearly dependent: "
                    + " + ".join(
                        f"{c}*v{j + 1}" for j, c in enumerate(cert) if c % p
                    )
                    + " = 0",
                    certificate=cert,
                )
        raise DependentVectors("defining vectors are linearly dependent", ())
    return GGSSpec(p=p, vectors=tuple(rows))


def is_constant(spec: GGSSpec) -> bool:
    """One directed generator whose vector has all entries equal."""
    if spec.r != 1:
        return False
    v = spec.vectors[0]
    return all(x == v[0] for x in v)


def is_symmetric(vector) -> bool:
    """Palindrome test: entry j equals entry p-j throughout."""
    v = tuple(vector)
    return v == v[::-1]


@dataclass(frozen=True)
class Normalization:
    """Row-reduced defining data plus the invertible transform reaching it."""

    spec: GGSSpec
    transform: tuple[tuple[int, ...], ...]
    case: str
    steps: tuple[str, ...]


def normalize(spec: GGSSpec) -> Normalization:
    """Row-reduce the defining vectors to the shapes the case split expects.

    Allowed moves replace directed generators without changing the generated
    group: scaling a row (a power of the generator), adding a multiple of one
    row to another (a product of generators), and reordering rows.  When every
    row is symmetric the target is a leading 1 in the first row, rows of shape
    (0, *, ..., *, 0) below it, and a 0 in the first row at the first slot
    where the second row is nonzero.  Otherwise the target is a first row
    (1, *, ..., *, m); m != 1 is reached whenever the first and last columns
    differ somewhere on the row space.
    """
    p = spec.p
    rows = [list(v) for v in spec.vectors]
    r = len(rows)
    t = [[1 if i == j else 0 for j in range(r)] for i in range(r)]
    steps: list[str] = []

    def scale(i, k):
        rows[i] = [(k * x) % p for x in rows[i]]
        t[i] = [(k * x) % p for x in t[i]]
        steps.append(f"scale row {i + 1} by {k}")

    def add(i, j, k):
        rows[i] = [(x + k * y) % p for x, y in zip(rows[i], rows[j])]
        t[i] = [(x + k * y) % p for x, y in zip(t[i], t[j])]
        steps.append(f"add {k} * row {j + 1} to row {i + 1}")

    def swap(i, j):
        rows[i], rows[j] = rows[j], rows[i]
        t[i], t[j] = t[j], t[i]
        steps.append(f"swap rows {i + 1} and {j + 1}")

    if all(is_symmetric(v) for v in rows):
        case = "symmetric"
        lead = next((i for i, v in enumerate(rows) if v[0] % p), None)
        if lead is None:
            raise NormalizationImpossible(
                "every row starts with 0, so no leading 1 is reachable",
                step="leading entry",
            )
        if lead != 0:
            swap(0, lead)
        if rows[0][0] != 1:
            scale(0, pow(rows[0][0], -1, p))
        for i in range(1, r):
            if rows[i][0] % p:
                add(i, 0, (-rows[i][0]) % p)
        if r >= 2:
            j = next(idx for idx, x in enumerate(rows[1]) if x % p)
            if rows[0][j] % p:
                add(0, 1, (-rows[0][j] * pow(rows[1][j], -1, p)) % p)
    else:
        case = "non-symmetric"
        pick = None
        for i, v in enumerate(rows):
            if v[0] % p and (v[0] - v[-1]) % p:
                pick = i
                break
        if pick is None:
            for i in range(r):
                for j in range(r):
                    if i == j:
                        continue
                    for k in range(1, p):
                        v0 = (rows[i][0] + k * rows[j][0]) % p
                        vl = (rows[i][-1] + k * rows[j][-1]) % p
                        if v0 and (v0 - vl) % p:
                            add(i, j, k)
                            pick = i
                            break
                    if pick is not None:
                        break
                if pick is not None:
                    break
        if pick is None:
            # first and last columns agree on the whole row space; settle for
            # a non-symmetric first row with leading entry 1
            pick = next(i for i, v in enumerate(rows) if not is_symmetric(v))
            if rows[pick][0] % p == 0:
                donor = next(
                    (j for j, v in enumerate(rows) if v[0] % p), None
                )
                if donor is None:
                    raise NormalizationImpossible(
                        "every row starts with 0, so no leading 1 is reachable",
                        step="leading entry",
                    )
                for k in range(1, p):
                    cand = [
                        (x + k * y) % p for x, y in zip(rows[pick], rows[donor])
                    ]
                    if not is_symmetric(cand):
                        add(pick, donor, k)
                        break
        if pick != 0:
            swap(0, pick)
        if rows[0][0] != 1:
            scale(0, pow(rows[0][0], -1, p))
        for i in range(1, r):
            if rows[i][0] != 1:
                add(i, 0, (1 - rows[i][0]) % p)

    new_spec = validate(p, [tuple(v) for v in rows])
    return Normalization(
        spec=new_spec,
        transform=tuple(tuple(row) for row in t),
        case=case,
        steps=tuple(steps),
    )


@dataclass(frozen=True, eq=False)
class GroupSession:
    """A defining-data object built at a fixed depth.

    Holds the generator portraits, their leaf permutations and the chain
    handle for the induced group on the p**depth leaves.  Immutable.
    """

    spec: GGSSpec
    depth: int
    a: Automorphism
    b: tuple[Automorphism, ...]
    G: PermGroup

    @property
    def degree(self) -> int:
        return self.spec.p ** self.depth

    @property
    def generators(self) -> tuple[Automorphism, ...]:
        return (self.a,) + self.b

    def summary(self) -> dict:
        """Canonical run summary; byte-identical across repeated builds."""
        info = self.G.chain_summary()
        return {
            "p": self.spec.p,
            "vectors": [list(v) for v in self.spec.vectors],
            "depth": self.depth,
            "order_exponent": info["order_exponent"],
            "base_points": info["base_points"],
            "orbit_lengths": info["orbit_lengths"],
            "generator_images": [g.tolist() for g in self.G.generators],
        }

    def summary_bytes(self) -> bytes:
        return json.dumps(self.summary(), sort_keys=True, separators=(",", ":")).encode()


def build(spec: GGSSpec, depth: int, allow_large: bool = False) -> GroupSession:
    """Assemble generators and the leaf-action handle at the given depth.

    Depths with more than DEGREE_CAP leaves are refused unless allow_large is
    set.  Construction checks that truncating the leaf permutations to any
    intermediate level matches building directly at that level, and that the
    level-1 image is the full cycle.
    """
    if not isinstance(spec, GGSSpec):
        raise SpecError("build expects validated defining data")
    if depth < 2:
        raise SpecError("sessions need depth at least 2")
    p = spec.p
    degree = p**depth
    if degree > DEGREE_CAP and not allow_large:
        raise SpecError(
            f"{p}^{depth} = {degree} leaves exceeds the cap of {DEGREE_CAP}; "
            "pass allow_large to override"
        )
    a = rooted(p, depth, 1)
    b = tuple(directed(spec, depth, i) for i in range(1, spec.r + 1))
    gens = [g.to_perm(depth) for g in (a,) + b]
    G = PermGroup(degree, gens, prime=p)

    # level-1 image is the full cycle generated by a
    cycle = rooted(p, 1, 1).to_perm(1)
    if restrict_to_level(gens[0], p, 1) != cycle:
        raise AssertionError("rooted generator does not induce the cycle at level 1")
    for g in gens[1:]:
        if not restrict_to_level(g, p, 1).is_identity():
            raise AssertionError("directed generator moves a level-1 vertex")

    # truncation of the leaf action agrees with building at a smaller depth
    for m in range(1, depth):
        for aut, perm in zip((a,) + b, gens):
            if restrict_to_level(perm, p, m) != aut.truncate(m).to_perm(m):
                raise AssertionError(
                    "level restriction disagrees with direct construction"
                )

    return GroupSession(spec=spec, depth=depth, a=a, b=b, G=G)
