"""Depth-bounded automorphisms of the p-regular rooted tree.

A depth-N portrait stores a permutation of the p first-level subtrees plus p
child portraits of depth N-1; depth 0 is the identity leaf.  Level-m vertices
are words of m digits in {0, ..., p-1}, indexed by their base-p value with the
most significant digit first, so the subtree below a vertex occupies a
contiguous index block at every deeper level.

Products compose left to right: (f * g) sends a vertex v to g(f(v)), and the
same convention is used for the induced leaf permutations.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "DegreeMismatch",
    "NotLevel1Stabilized",
    "Perm",
    "Automorphism",
    "identity",
    "rooted",
    "directed",
    "embed_at_vertex",
    "commutator",
    "vertex_index",
    "vertex_word",
    "is_odd_prime",
    "level_of_degree",
    "restrict_to_level",
    "subtree_section",
    "subtree_embed",
]


class DegreeMismatch(ValueError):
    """Operands live on different point sets."""


class NotLevel1Stabilized(ValueError):
    """First-level sections need a trivial root permutation."""


_RANGES: dict[int, np.ndarray] = {}


def _arange(n: int) -> np.ndarray:
    r = _RANGES.get(n)
    if r is None:
        r = np.arange(n, dtype=np.intp)
        r.setflags(write=False)
        _RANGES[n] = r
    return r


def is_odd_prime(n: int) -> bool:
    """Deterministic trial division; arities here are single digits."""
    if n < 3 or n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class Perm:
    """Permutation of {0, ..., n-1} stored as its image array.

    Products act left to right: (p * q)(x) = q(p(x)).
    """

    __slots__ = ("images", "_key")

    def __init__(self, images):
        arr = np.array(images, dtype=np.intp)
        if arr.ndim != 1:
            raise ValueError("images must be a flat sequence")
        n = arr.shape[0]
        if n and (
            arr.min() < 0 or arr.max() >= n or np.bincount(arr, minlength=n).max() > 1
        ):
            raise ValueError("images do not form a permutation of 0..n-1")
        arr.setflags(write=False)
        self.images = arr
        self._key = None

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "Perm":
        # arr must already be a valid intp image array; takes ownership
        obj = object.__new__(cls)
        arr.setflags(write=False)
        obj.images = arr
        obj._key = None
        return obj

    @classmethod
    def identity(cls, n: int) -> "Perm":
        return cls._wrap(_arange(n))

    @property
    def degree(self) -> int:
        return int(self.images.shape[0])

    def __mul__(self, other):
        if not isinstance(other, Perm):
            return NotImplemented
        if other.degree != self.degree:
            raise DegreeMismatch(
                f"cannot compose degree {self.degree} with degree {other.degree}"
            )
        return Perm._wrap(other.images[self.images])

    def __pow__(self, n: int) -> "Perm":
        if n < 0:
            return self.inverse() ** (-n)
        result = Perm.identity(self.degree)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def inverse(self) -> "Perm":
        inv = np.empty_like(self.images)
        inv[self.images] = _arange(self.degree)
        return Perm._wrap(inv)

    __invert__ = inverse

    def __call__(self, point: int) -> int:
        return int(self.images[point])

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.images, _arange(self.degree)))

    def first_moved(self):
        moved = np.flatnonzero(self.images != _arange(self.degree))
        return int(moved[0]) if moved.size else None

    def order(self) -> int:
        k = 1
        cur = self
        while not cur.is_identity():
            cur = cur * self
            k += 1
        return k

    def tolist(self) -> list[int]:
        return [int(x) for x in self.images]

    def _bytes(self) -> bytes:
        if self._key is None:
            self._key = self.images.tobytes()
        return self._key

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Perm):
            return NotImplemented
        return self.degree == other.degree and self._bytes() == other._bytes()

    def __hash__(self):
        return hash((self.degree, self._bytes()))

    def __repr__(self):
        if self.degree <= 16:
            return f"Perm({self.tolist()})"
        return f"<Perm degree={self.degree}>"


def vertex_index(word, p: int) -> int:
    """Base-p value of a digit word, most significant digit first."""
    k = 0
    for d in word:
        d = int(d)
        if not 0 <= d < p:
            raise ValueError(f"digit {d} out of range for arity {p}")
        k = k * p + d
    return k


def vertex_word(index: int, level: int, p: int) -> tuple[int, ...]:
    """Inverse of vertex_index at a fixed level."""
    if not 0 <= index < p**level:
        raise ValueError(f"index {index} out of range for level {level}")
    digits = []
    for _ in range(level):
        digits.append(index % p)
        index //= p
    return tuple(reversed(digits))


class Automorphism:
    """Portrait of a tree automorphism, truncated at a fixed depth.

    Immutable; sub-portraits may be shared between values.
    """

    __slots__ = ("p", "depth", "root_perm", "children", "_hash", "_ident")

    def __init__(self, root_perm, children=()):
        root = tuple(int(x) for x in root_perm)
        p = len(root)
        if sorted(root) != list(range(p)):
            raise ValueError("root label is not a permutation")
        kids = tuple(children)
        if kids:
            if len(kids) != p:
                raise ValueError(f"expected {p} children, got {len(kids)}")
            d = kids[0].depth
            for c in kids:
                if not isinstance(c, Automorphism) or c.p != p or c.depth != d:
                    raise ValueError("children must share arity and depth")
            depth = d + 1
        else:
            if root != tuple(range(p)):
                raise ValueError("a depth-0 leaf carries no action")
            depth = 0
        self.p = p
        self.depth = depth
        self.root_perm = root
        self.children = kids
        self._hash = None
        self._ident = None

    @classmethod
    def _make(cls, p, depth, root, kids) -> "Automorphism":
        obj = object.__new__(cls)
        obj.p = p
        obj.depth = depth
        obj.root_perm = root
        obj.children = kids
        obj._hash = None
        obj._ident = None
        return obj

    def is_identity(self) -> bool:
        if self._ident is None:
            if self.root_perm != tuple(range(self.p)):
                self._ident = False
            else:
                self._ident = all(c.is_identity() for c in self.children)
        return self._ident

    def __mul__(self, other):
        if not isinstance(other, Automorphism):
            return NotImplemented
        if other.p != self.p or other.depth != self.depth:
            raise DegreeMismatch("portraits must share arity and depth")
        if self.is_identity():
            return other
        if other.is_identity():
            return self
        root = tuple(other.root_perm[x] for x in self.root_perm)
        kids = tuple(
            self.children[d] * other.children[self.root_perm[d]]
            for d in range(self.p)
        )
        return Automorphism._make(self.p, self.depth, root, kids)

    def inverse(self) -> "Automorphism":
        if self.is_identity():
            return self
        p = self.p
        inv_root = [0] * p
        for d, x in enumerate(self.root_perm):
            inv_root[x] = d
        kids = tuple(self.children[inv_root[d]].inverse() for d in range(p))
        return Automorphism._make(p, self.depth, tuple(inv_root), kids)

    __invert__ = inverse

    def __pow__(self, n: int) -> "Automorphism":
        if n < 0:
            return self.inverse() ** (-n)
        result = identity(self.p, self.depth)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def conjugated_by(self, h: "Automorphism") -> "Automorphism":
        return h.inverse() * self * h

    def apply(self, word) -> tuple[int, ...]:
        """Image of a vertex, given as a digit word."""
        if len(word) > self.depth:
            raise ValueError("vertex deeper than the portrait")
        cur = self
        out = []
        for d in word:
            d = int(d)
            if not 0 <= d < self.p:
                raise ValueError(f"digit {d} out of range for arity {self.p}")
            out.append(cur.root_perm[d])
            cur = cur.children[d]
        return tuple(out)

    def section(self, word) -> "Automorphism":
        """Portrait induced on the subtree rooted at the given vertex."""
        if len(word) > self.depth:
            raise ValueError("vertex deeper than the portrait")
        cur = self
        for d in word:
            d = int(d)
            if not 0 <= d < self.p:
                raise ValueError(f"digit {d} out of range for arity {self.p}")
            cur = cur.children[d]
        return cur

    def psi(self) -> tuple["Automorphism", ...]:
        """The p first-level sections, in vertex order."""
        if self.depth < 1:
            raise ValueError("sections need depth at least 1")
        if self.root_perm != tuple(range(self.p)):
            raise NotLevel1Stabilized("portrait moves a level-1 vertex")
        return self.children

    def to_perm(self, level: int) -> Perm:
        """Induced permutation of the p**level vertices at the given level."""
        if level < 0 or level > self.depth:
            raise ValueError("level outside the portrait depth")
        return Perm._wrap(self._perm_array(level))

    def _perm_array(self, level: int) -> np.ndarray:
        if level == 0:
            return np.zeros(1, dtype=np.intp)
        if self.is_identity():
            return _arange(self.p**level)
        if level == 1:
            return np.array(self.root_perm, dtype=np.intp)
        block = self.p ** (level - 1)
        out = np.empty(self.p * block, dtype=np.intp)
        for d in range(self.p):
            out[d * block : (d + 1) * block] = (
                self.root_perm[d] * block + self.children[d]._perm_array(level - 1)
            )
        return out

    def truncate(self, depth: int) -> "Automorphism":
        """Cut the portrait down to a smaller depth."""
        if depth > self.depth or depth < 0:
            raise ValueError("truncation depth outside the portrait depth")
        if depth == self.depth:
            return self
        if depth == 0 or self.is_identity():
            return identity(self.p, depth)
        kids = tuple(c.truncate(depth - 1) for c in self.children)
        return Automorphism._make(self.p, depth, self.root_perm, kids)

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Automorphism):
            return NotImplemented
        if (
            self.p != other.p
            or self.depth != other.depth
            or self.root_perm != other.root_perm
        ):
            return False
        if (
            self._hash is not None
            and other._hash is not None
            and self._hash != other._hash
        ):
            return False
        return all(a == b for a, b in zip(self.children, other.children))

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(
                (self.p, self.depth, self.root_perm, tuple(hash(c) for c in self.children))
            )
        return self._hash

    def __repr__(self):
        tag = "identity" if self.is_identity() else f"root={self.root_perm}"
        return f"<Automorphism p={self.p} depth={self.depth} {tag}>"


_IDENTITY_CACHE: dict[tuple[int, int], Automorphism] = {}


def identity(p: int, depth: int) -> Automorphism:
    """The trivial portrait of the given depth."""
    if not is_odd_prime(p):
        raise ValueError(f"arity must be an odd prime, got {p}")
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    got = _IDENTITY_CACHE.get((p, depth))
    if got is not None:
        return got
    trivial = tuple(range(p))
    cur = _IDENTITY_CACHE.get((p, 0))
    if cur is None:
        cur = Automorphism._make(p, 0, trivial, ())
        cur._ident = True
        _IDENTITY_CACHE[(p, 0)] = cur
    for d in range(1, depth + 1):
        nxt = _IDENTITY_CACHE.get((p, d))
        if nxt is None:
            nxt = Automorphism._make(p, d, trivial, (cur,) * p)
            nxt._ident = True
            _IDENTITY_CACHE[(p, d)] = nxt
        cur = nxt
    return cur


def rooted(p: int, depth: int, power: int = 1) -> Automorphism:
    """Power of the arity cycle: digit d goes to d + power at level 1."""
    if not is_odd_prime(p):
        raise ValueError(f"arity must be an odd prime, got {p}")
    if depth < 1:
        raise ValueError("rooted automorphisms need depth at least 1")
    power = power % p
    if power == 0:
        return identity(p, depth)
    root = tuple((d + power) % p for d in range(p))
    sub = identity(p, depth - 1)
    return Automorphism._make(p, depth, root, (sub,) * p)


def directed(spec, depth: int, i: int) -> Automorphism:
    """Directed generator number i of a defining-data object.

    Child j < p-1 acts as the cycle raised to the (j+1)-th vector entry; the
    last child repeats the generator one level down.  At depth 1 everything
    truncates away and the result is the identity.
    """
    p = spec.p
    vectors = spec.vectors
    if not 1 <= i <= len(vectors):
        raise ValueError(f"generator index {i} out of range 1..{len(vectors)}")
    if depth < 1:
        raise ValueError("directed generators need depth at least 1")
    vec = vectors[i - 1]
    trivial = tuple(range(p))
    cur = identity(p, 0)
    for d in range(1, depth + 1):
        if d == 1:
            kids = (identity(p, 0),) * p
        else:
            kids = tuple(rooted(p, d - 1, e) for e in vec) + (cur,)
        cur = Automorphism._make(p, d, trivial, kids)
    return cur


def embed_at_vertex(g: Automorphism, word, depth: int) -> Automorphism:
    """Act as g on the subtree at the given vertex, trivially elsewhere."""
    word = tuple(int(d) for d in word)
    if depth - len(word) != g.depth:
        raise ValueError(
            f"element of depth {g.depth} does not fit at a level-{len(word)} "
            f"vertex of a depth-{depth} tree"
        )
    if not word:
        return g
    d0 = word[0]
    if not 0 <= d0 < g.p:
        raise ValueError(f"digit {d0} out of range for arity {g.p}")
    sub = embed_at_vertex(g, word[1:], depth - 1)
    kids = tuple(
        sub if d == d0 else identity(g.p, depth - 1) for d in range(g.p)
    )
    return Automorphism._make(g.p, depth, tuple(range(g.p)), kids)


def commutator(f: Automorphism, g: Automorphism) -> Automorphism:
    return f.inverse() * g.inverse() * f * g


def level_of_degree(degree: int, p: int) -> int:
    """The N with degree = p**N; rejects anything else."""
    n = 0
    d = 1
    while d < degree:
        d *= p
        n += 1
    if d != degree:
        raise ValueError(f"{degree} is not a power of {p}")
    return n


def restrict_to_level(perm: Perm, p: int, m: int) -> Perm:
    """Quotient a leaf permutation to its action on the level-m blocks."""
    n = level_of_degree(perm.degree, p)
    if not 0 <= m <= n:
        raise ValueError("level outside the leaf depth")
    bs = p ** (n - m)
    blocks = perm.images.reshape(p**m, bs) // bs
    heads = blocks[:, 0]
    if not (blocks == heads[:, None]).all():
        raise ValueError("permutation does not preserve the level blocks")
    return Perm(heads)


def subtree_section(perm: Perm, p: int, word) -> Perm:
    """Permutation induced on the leaf block below a vertex."""
    n = level_of_degree(perm.degree, p)
    word = tuple(int(d) for d in word)
    if len(word) > n:
        raise ValueError("vertex deeper than the leaf level")
    bs = p ** (n - len(word))
    start = vertex_index(word, p) * bs
    seg = perm.images[start : start + bs]
    target = int(seg[0]) // bs
    out = seg - target * bs
    if out.min() < 0 or out.max() >= bs:
        raise ValueError("permutation does not map the block onto a block")
    return Perm(out)


def subtree_embed(perm: Perm, p: int, word, level: int) -> Perm:
    """Inverse of subtree_section: act on one leaf block, fix the rest."""
    n = level
    word = tuple(int(d) for d in word)
    bs = p ** (n - len(word))
    if perm.degree != bs:
        raise ValueError(
            f"block of size {bs} cannot hold a permutation of degree {perm.degree}"
        )
    start = vertex_index(word, p) * bs
    out = _arange(p**n).copy()
    out[start : start + bs] = start + perm.images
    return Perm._wrap(out)
