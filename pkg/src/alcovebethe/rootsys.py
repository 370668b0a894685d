"""Irreducible crystallographic root systems, Weyl groups, and the fundamental alcove.

Normalization convention used throughout the package: short roots have
squared length 2; long roots have squared length 4 in the doubly-laced
families B/C/F and 6 in G2; simply-laced families have a single length 2.
Every derived quantity (coroots, weights, spectral points, Hessians)
inherits this convention.
"""

from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass, field
from itertools import product

import numpy as np

__all__ = [
    "CartanLabel",
    "RootSystem",
    "WeylGroup",
    "DominantWeight",
    "build_root_system",
    "weyl_group",
    "weyl_order",
    "alcove_vertices",
    "dominant_weights",
    "dominant_weight",
    "DEFAULT_WEYL_CAP",
]

# Full enumeration is refused above this Weyl-group order unless the caller
# raises the cap explicitly (covers every rank <= 4 group incl. F4).
DEFAULT_WEYL_CAP = 100_000

_MIN_RANK = {"A": 1, "B": 2, "C": 2, "D": 4, "E": 6, "F": 4, "G": 2}
_MAX_RANK = {"A": None, "B": None, "C": None, "D": None, "E": 8, "F": 4, "G": 2}

_LABEL_RE = re.compile(r"^([A-G])\s*(\d+)$")


@dataclass(frozen=True)
class CartanLabel:
    """A Cartan type, e.g. B3: family letter plus rank."""

    family: str
    rank: int

    def __post_init__(self):
        if self.family not in _MIN_RANK:
            raise ValueError(f"unknown family {self.family!r}: must be one of A-G")
        lo = _MIN_RANK[self.family]
        hi = _MAX_RANK[self.family]
        if self.rank < lo:
            raise ValueError(f"{self.family}{self.rank} inadmissible: family {self.family} requires rank >= {lo}")
        if hi is not None and self.rank > hi:
            raise ValueError(f"{self.family}{self.rank} inadmissible: family {self.family} requires rank <= {hi}")

    @classmethod
    def parse(cls, text: str) -> "CartanLabel":
        m = _LABEL_RE.match(text.strip())
        if not m:
            raise ValueError(f"cannot parse Cartan label {text!r} (expected e.g. 'A2', 'G2')")
        return cls(m.group(1), int(m.group(2)))

    def __str__(self) -> str:
        return f"{self.family}{self.rank}"


def cartan_matrix(label: CartanLabel) -> np.ndarray:
    """Integer Cartan matrix C[i][j] = <alpha_i, alpha_j^vee> in Bourbaki numbering."""
    n = label.rank
    fam = label.family
    C = 2 * np.eye(n, dtype=int)

    def link(i, j, cij=-1, cji=-1):
        C[i, j] = cij
        C[j, i] = cji

    if fam in "ABC":
        for i in range(n - 1):
            link(i, i + 1)
        if fam == "B" and n >= 2:
            link(n - 2, n - 1, -2, -1)  # alpha_n short
        if fam == "C" and n >= 2:
            link(n - 2, n - 1, -1, -2)  # alpha_n long
    elif fam == "D":
        for i in range(n - 2):
            link(i, i + 1)
        link(n - 3, n - 1)
    elif fam == "E":
        # chain 1-3-4-5-...-n with 2 attached to 4 (Bourbaki)
        chain = [0] + list(range(2, n))
        for a, b in zip(chain, chain[1:]):
            link(a, b)
        link(1, 3)
    elif fam == "F":
        link(0, 1)
        link(1, 2, -2, -1)  # alpha_1, alpha_2 long; alpha_3, alpha_4 short
        link(2, 3)
    elif fam == "G":
        link(0, 1, -1, -3)  # alpha_1 short, alpha_2 long
    return C


def simple_root_norms2(label: CartanLabel) -> np.ndarray:
    """Squared lengths of the simple roots under the package normalization."""
    n = label.rank
    fam = label.family
    if fam in "ADE":
        return np.full(n, 2, dtype=int)
    if fam == "B":
        d = np.full(n, 4, dtype=int)
        d[n - 1] = 2
        return d
    if fam == "C":
        d = np.full(n, 2, dtype=int)
        d[n - 1] = 4
        return d
    if fam == "F":
        return np.array([4, 4, 2, 2], dtype=int)
    if fam == "G":
        return np.array([2, 6], dtype=int)
    raise AssertionError(fam)


_POSITIVE_COUNT = {
    "A": lambda n: n * (n + 1) // 2,
    "B": lambda n: n * n,
    "C": lambda n: n * n,
    "D": lambda n: n * (n - 1),
    "E": lambda n: {6: 36, 7: 63, 8: 120}[n],
    "F": lambda n: 24,
    "G": lambda n: 6,
}

_WEYL_ORDER = {
    "A": lambda n: math.factorial(n + 1),
    "B": lambda n: 2**n * math.factorial(n),
    "C": lambda n: 2**n * math.factorial(n),
    "D": lambda n: 2 ** (n - 1) * math.factorial(n),
    "E": lambda n: {6: 51840, 7: 2903040, 8: 696729600}[n],
    "F": lambda n: 1152,
    "G": lambda n: 12,
}


def positive_root_count(label: CartanLabel) -> int:
    return _POSITIVE_COUNT[label.family](label.rank)


def weyl_order(label: CartanLabel) -> int:
    return _WEYL_ORDER[label.family](label.rank)


@dataclass(eq=False)
class RootSystem:
    """Realization of an irreducible root system in R^n.

    Positive roots are stored both as integer coefficient vectors over the
    simple basis and as Euclidean vectors (rows).  Length classes are sorted
    by squared length, so class 0 is the short class.
    """

    label: CartanLabel
    dim: int
    cartan: np.ndarray            # (n, n) int, C[i][j] = <alpha_i, alpha_j^vee>
    simple_roots: np.ndarray      # (n, n) rows
    simple_coroots: np.ndarray    # (n, n) rows
    positive_roots: np.ndarray    # (m, n) rows
    positive_coroots: np.ndarray  # (m, n) rows
    pos_coeffs: np.ndarray        # (m, n) int, root = coeffs @ simple_roots
    pos_norms2: np.ndarray        # (m,) int
    highest_index: int
    marks: np.ndarray             # (n,) int, highest = marks @ simple_roots
    rho: np.ndarray
    fundamental_weights: np.ndarray    # (n, n) rows, <w_j, alpha_i^vee> = delta
    fundamental_coweights: np.ndarray  # (n, n) rows, <alpha_i, w_j^vee> = delta
    class_norms2: tuple            # squared lengths, ascending
    class_of_pos: np.ndarray       # (m,) class index per positive root
    class_of_simple: np.ndarray    # (n,) class index per simple root

    @property
    def highest_root(self) -> np.ndarray:
        return self.positive_roots[self.highest_index]

    @property
    def alpha0(self) -> np.ndarray:
        return -self.highest_root

    @property
    def n_positive(self) -> int:
        return len(self.positive_roots)

    @property
    def n_classes(self) -> int:
        return len(self.class_norms2)

    @property
    def highest_class(self) -> int:
        return int(self.class_of_pos[self.highest_index])

    def describe_positive(self, idx: int) -> str:
        return f"root {tuple(int(c) for c in self.pos_coeffs[idx])} of {self.label}"

    def to_json_dict(self) -> dict:
        """Plain-data view with vectors as float lists (golden-file friendly)."""
        return {
            "label": str(self.label),
            "dim": self.dim,
            "normalization": "short roots have squared length 2",
            "simple_roots": self.simple_roots.tolist(),
            "positive_roots": self.positive_roots.tolist(),
            "coroots": self.positive_coroots.tolist(),
            "highest_root": self.highest_root.tolist(),
            "alpha0": self.alpha0.tolist(),
            "rho": self.rho.tolist(),
            "marks": self.marks.tolist(),
            "fundamental_weights": self.fundamental_weights.tolist(),
            "fundamental_coweights": self.fundamental_coweights.tolist(),
            "length_classes": [
                {
                    "norm_sq": int(q),
                    "positive_roots": [int(i) for i in np.flatnonzero(self.class_of_pos == c)],
                }
                for c, q in enumerate(self.class_norms2)
            ],
        }


def _close_roots(C: np.ndarray) -> list:
    """All roots as integer coefficient tuples, by closure under simple reflections."""
    n = len(C)
    simple = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    seen = set(simple)
    queue = deque(simple)
    while queue:
        c = queue.popleft()
        for i in range(n):
            # <beta, alpha_i^vee> = sum_j c_j C[j][i]
            p = sum(cj * C[j, i] for j, cj in enumerate(c))
            r = list(c)
            r[i] -= p
            r = tuple(r)
            if r not in seen:
                seen.add(r)
                queue.append(r)
    return sorted(seen)


def build_root_system(label) -> RootSystem:
    """Construct the root system for an admissible Cartan label.

    Accepts a CartanLabel or a string like "B3".  The Euclidean realization is
    the Cholesky factor of the Gram matrix of the simple roots, so vectors
    live in R^rank.
    """
    if isinstance(label, str):
        label = CartanLabel.parse(label)
    n = label.rank
    C = cartan_matrix(label)
    d = simple_root_norms2(label)

    # Gram matrix of simple roots: (a_i, a_j) = C[i][j] * |a_j|^2 / 2 (integer valued)
    gram2 = C * d[np.newaxis, :]
    if not np.array_equal(gram2, gram2.T):
        raise AssertionError(f"inconsistent Cartan data for {label}")
    gram = gram2 / 2.0
    L = np.linalg.cholesky(gram)
    simple = L

    all_coeffs = _close_roots(C)
    pos_coeffs = np.array([c for c in all_coeffs if min(c) >= 0], dtype=int)
    if len(all_coeffs) != 2 * len(pos_coeffs):
        raise AssertionError(f"root closure of {label} is not symmetric")
    expected = positive_root_count(label)
    if len(pos_coeffs) != expected:
        raise AssertionError(f"{label}: closure found {len(pos_coeffs)} positive roots, expected {expected}")
    # sort by height then lexicographically for a deterministic layout
    order = sorted(range(len(pos_coeffs)), key=lambda i: (int(pos_coeffs[i].sum()), tuple(pos_coeffs[i])))
    pos_coeffs = pos_coeffs[order]

    pos_norms2 = np.einsum("ri,ij,rj->r", pos_coeffs, gram2 // 2, pos_coeffs)
    pos_roots = pos_coeffs @ simple
    pos_coroots = 2.0 * pos_roots / pos_norms2[:, None]

    heights = pos_coeffs.sum(axis=1)
    highest_index = int(np.argmax(heights))
    if (heights == heights[highest_index]).sum() != 1:
        raise AssertionError(f"{label}: highest root is not unique")
    marks = pos_coeffs[highest_index].copy()

    rho = 0.5 * pos_roots.sum(axis=0)

    simple_coroots = 2.0 * simple / d[:, None]
    # rows w_j with <w_j, alpha_i^vee> = delta_ij (and the coweight analogue)
    fundamental_weights = np.linalg.inv(simple_coroots.T)
    fundamental_coweights = np.linalg.inv(simple.T)

    class_norms2 = tuple(sorted(set(int(q) for q in pos_norms2)))
    if len(class_norms2) > 2:
        raise AssertionError(f"{label}: more than two root length classes")
    class_of_pos = np.array([class_norms2.index(int(q)) for q in pos_norms2], dtype=int)
    class_of_simple = np.array([class_norms2.index(int(q)) for q in d], dtype=int)

    return RootSystem(
        label=label,
        dim=n,
        cartan=C,
        simple_roots=simple,
        simple_coroots=simple_coroots,
        positive_roots=pos_roots,
        positive_coroots=pos_coroots,
        pos_coeffs=pos_coeffs,
        pos_norms2=pos_norms2,
        highest_index=highest_index,
        marks=marks,
        rho=rho,
        fundamental_weights=fundamental_weights,
        fundamental_coweights=fundamental_coweights,
        class_norms2=class_norms2,
        class_of_pos=class_of_pos,
        class_of_simple=class_of_simple,
    )


@dataclass(eq=False)
class WeylGroup:
    """Full Weyl group as orthogonal matrices, elements[0] = identity."""

    elements: np.ndarray    # (N, n, n)
    generators: np.ndarray  # (n, n, n) simple reflections

    @property
    def order(self) -> int:
        return len(self.elements)


def _matrix_key(M: np.ndarray) -> tuple:
    # fixed 1e-9 rounding keeps the closure exact at the ranks we enumerate
    return tuple(np.round(M, 9).ravel())


def weyl_group(rs: RootSystem, cap: int = DEFAULT_WEYL_CAP) -> WeylGroup:
    """Enumerate the Weyl group by breadth-first closure over simple reflections.

    Refuses when the classical order exceeds `cap`, so an accidental E8
    request cannot run away.
    """
    known = weyl_order(rs.label)
    if known > cap:
        raise ValueError(
            f"Weyl group of {rs.label} has order {known}, exceeding the cap {cap}; raise the cap to enumerate"
        )
    n = rs.dim
    gens = np.array([np.eye(n) - np.outer(rs.simple_roots[i], rs.simple_coroots[i]) for i in range(n)])
    identity = np.eye(n)
    elements = [identity]
    seen = {_matrix_key(identity)}
    queue = deque([identity])
    while queue:
        w = queue.popleft()
        for s in gens:
            m = s @ w
            key = _matrix_key(m)
            if key not in seen:
                seen.add(key)
                elements.append(m)
                queue.append(m)
        if len(elements) > known:
            raise AssertionError(f"Weyl closure of {rs.label} exceeded the classical order {known}")
    if len(elements) != known:
        raise AssertionError(f"Weyl closure of {rs.label} found {len(elements)} elements, expected {known}")
    return WeylGroup(elements=np.array(elements), generators=gens)


def alcove_vertices(rs: RootSystem) -> np.ndarray:
    """Vertices of the closed fundamental alcove: 0 and the coweights over the marks."""
    verts = np.zeros((rs.dim + 1, rs.dim))
    verts[1:] = rs.fundamental_coweights / rs.marks[:, None]
    return verts


@dataclass(frozen=True)
class DominantWeight:
    """Nonnegative integer combination of the fundamental weights."""

    coeffs: tuple
    vector: np.ndarray = field(compare=False, repr=False)

    @property
    def height(self) -> int:
        return int(sum(self.coeffs))

    @property
    def is_strict(self) -> bool:
        return min(self.coeffs) >= 1

    def __str__(self) -> str:
        return "+".join(f"{c}w{j + 1}" for j, c in enumerate(self.coeffs))


def dominant_weight(rs: RootSystem, coeffs) -> DominantWeight:
    coeffs = tuple(int(c) for c in coeffs)
    if len(coeffs) != rs.dim:
        raise ValueError(f"expected {rs.dim} coefficients, got {len(coeffs)}")
    if min(coeffs) < 0:
        raise ValueError(f"dominant weight needs nonnegative coefficients, got {coeffs}")
    vec = np.asarray(coeffs, dtype=float) @ rs.fundamental_weights
    return DominantWeight(coeffs=coeffs, vector=vec)


def dominant_weights(rs: RootSystem, height_bound: int, strict: bool = False) -> list:
    """All dominant weights with coefficient sum <= height_bound.

    strict=True restricts to strictly dominant weights (every coefficient >= 1).
    Sorted by Euclidean norm, ties broken lexicographically on coefficients.
    """
    if height_bound < 0:
        raise ValueError(f"height bound must be >= 0, got {height_bound}")
    lo = 1 if strict else 0
    out = []
    for coeffs in product(range(lo, height_bound + 1), repeat=rs.dim):
        if sum(coeffs) <= height_bound:
            out.append(dominant_weight(rs, coeffs))
    out.sort(key=lambda w: (round(float(np.linalg.norm(w.vector)), 9), w.coeffs))
    return out
