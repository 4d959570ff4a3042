"""Factor graphs, symbolic codebook templates, template instantiation and
unit-norm normalization.

A template assigns to every (user, symbol, resource) slot either zero or a
signed reference to one of the complex design parameters a_1..a_T.  Slots are
stored as a (J, M, K) integer array: 0 means a structural zero, +t means +a_t
and -t means -a_t (t is 1-based).  Both built-in templates place antipodal
one-dimensional constellations [a_i, a_j, -a_j, -a_i] on each resource a user
occupies, with the parameter pairs chosen so that constellations colliding on
a resource never share a parameter (the Latin property).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import (
    CodebookFormatError,
    CodebookSet,
    DegenerateParameterError,
    MalformedParameterError,
    SystemConfig,
    _frozen,
)

NORMALIZE_TOL = 1e-9
NORMALIZE_MAX_SWEEPS = 200


@dataclass(frozen=True)
class FactorGraph:
    """Binary K x J matrix linking resources (rows) to users (columns), with
    the per-row and per-column degrees derived from it."""

    F: np.ndarray
    row_degrees: np.ndarray = field(init=False)
    col_degrees: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        F = np.asarray(self.F, dtype=np.int64)
        if F.ndim != 2:
            raise ValueError("factor matrix must be 2-D")
        if not np.isin(F, (0, 1)).all():
            raise ValueError("factor matrix entries must be 0 or 1")
        object.__setattr__(self, "F", _frozen(F))
        object.__setattr__(self, "row_degrees", _frozen(F.sum(axis=1)))
        object.__setattr__(self, "col_degrees", _frozen(F.sum(axis=0)))

    @property
    def K(self) -> int:
        return self.F.shape[0]

    @property
    def J(self) -> int:
        return self.F.shape[1]

    def resource_users(self, k: int) -> np.ndarray:
        """Indices of the users colliding on resource k."""
        return np.flatnonzero(self.F[k])

    def user_resources(self, j: int) -> np.ndarray:
        """Indices of the resources occupied by user j."""
        return np.flatnonzero(self.F[:, j])


def has_four_cycle(g: FactorGraph) -> bool:
    """True iff two resources share two or more users (a length-4 cycle in
    the bipartite graph, which degrades message-passing detection)."""
    overlap = g.F @ g.F.T
    np.fill_diagonal(overlap, 0)
    return bool((overlap >= 2).any())


@dataclass(frozen=True)
class StructureTemplate:
    """Symbolic codebook skeleton: signed parameter placements plus the
    factor graph they realize."""

    name: str
    num_params: int
    slots: np.ndarray  # (J, M, K) of 0 / +-t
    graph: FactorGraph

    def __post_init__(self) -> None:
        slots = np.asarray(self.slots, dtype=np.int64)
        if slots.ndim != 3:
            raise ValueError("slots must be a (J, M, K) array")
        J, M, K = slots.shape
        if self.graph.F.shape != (K, J):
            raise ValueError("slots and factor matrix dimensions disagree")
        if np.abs(slots).max(initial=0) > self.num_params:
            raise ValueError("slot references a parameter beyond num_params")
        object.__setattr__(self, "slots", _frozen(slots))
        self._check_supports()
        self._check_antipodal()
        self._check_latin()

    @property
    def J(self) -> int:
        return self.slots.shape[0]

    @property
    def M(self) -> int:
        return self.slots.shape[1]

    @property
    def K(self) -> int:
        return self.slots.shape[2]

    def _check_supports(self) -> None:
        used = (self.slots != 0).any(axis=1).T.astype(np.int64)  # (K, J)
        if not np.array_equal(used, self.graph.F):
            raise ValueError(f"template {self.name}: slots do not match F")
        # every codeword must individually occupy the full user support
        per_cw = (self.slots != 0).astype(np.int64)  # (J, M, K)
        if not (per_cw == per_cw[:, :1, :]).all():
            raise ValueError(
                f"template {self.name}: codewords of one user differ in support"
            )

    def _check_antipodal(self) -> None:
        if not np.array_equal(self.slots, -self.slots[:, ::-1, :]):
            raise ValueError(
                f"template {self.name}: symbols m and M-1-m are not negations"
            )

    def _check_latin(self) -> None:
        for k in range(self.K):
            groups = []
            for j in self.graph.resource_users(k):
                groups.append(set(np.abs(self.slots[j, :, k])) - {0})
            for i in range(len(groups)):
                for l in range(i + 1, len(groups)):
                    if groups[i] & groups[l]:
                        raise ValueError(
                            f"template {self.name}: resource {k} assigns a "
                            f"shared parameter to two colliding users"
                        )

    def codeword_params(self, j: int, m: int) -> np.ndarray:
        """1-based parameter indices appearing in codeword (j, m)."""
        return np.abs(self.slots[j, m][self.slots[j, m] != 0])

    def system_config(self) -> SystemConfig:
        g = self.graph
        return SystemConfig(
            J=self.J,
            K=self.K,
            M=self.M,
            N=int(g.col_degrees.max()),
            d_f=int(g.row_degrees.max()),
        )


# --- built-in layouts -----------------------------------------------------
#
# Row m of each user block is codeword m; entry k is the signed 1-based
# parameter placed on resource k.  The 6x4 system pairs parameters as
# (a1,a2), (a3,a4), (a5,a6); users 3 and 5 carry the dimension-permuted
# variant [-a4, a3, -a3, a4] of the (a3,a4) constellation on their first
# resource.  The 12x6 system adds the pair (a7,a8) and uses the permuted
# placements inside users 3 and 6.

_F_6X4 = [
    [1, 0, 1, 0, 1, 0],
    [0, 1, 1, 0, 0, 1],
    [1, 0, 0, 1, 0, 1],
    [0, 1, 0, 1, 1, 0],
]

_SLOTS_6X4 = [
    [[+1, 0, +3, 0], [+2, 0, +4, 0], [-2, 0, -4, 0], [-1, 0, -3, 0]],
    [[0, +3, 0, +1], [0, +4, 0, +2], [0, -4, 0, -2], [0, -3, 0, -1]],
    [[-4, +5, 0, 0], [+3, +6, 0, 0], [-3, -6, 0, 0], [+4, -5, 0, 0]],
    [[0, 0, +1, +5], [0, 0, +2, +6], [0, 0, -2, -6], [0, 0, -1, -5]],
    [[+5, 0, 0, -4], [+6, 0, 0, +3], [-6, 0, 0, -3], [-5, 0, 0, +4]],
    [[0, +1, +5, 0], [0, +2, +6, 0], [0, -2, -6, 0], [0, -1, -5, 0]],
]

_F_8X4 = [
    [1, 0, 1, 0, 1, 0, 1, 0],
    [0, 1, 1, 0, 0, 1, 1, 0],
    [1, 0, 0, 1, 0, 1, 0, 1],
    [0, 1, 0, 1, 1, 0, 0, 1],
]

_F_12X6 = [
    [1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, 0, 0, 0, 1, 1, 1, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, 0, 0, 1, 1, 1, 0, 0],
    [0, 0, 1, 0, 1, 0, 0, 1, 0, 0, 1, 0],
    [0, 0, 0, 1, 0, 1, 0, 0, 1, 0, 0, 1],
    [0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 1, 1],
]

_SLOTS_12X6 = [
    # user 1: resources 1,2 with pairs (a1,a2) / (a3,a4)
    [[+1, +3, 0, 0, 0, 0], [+2, +4, 0, 0, 0, 0],
     [-2, -4, 0, 0, 0, 0], [-1, -3, 0, 0, 0, 0]],
    # user 2: resources 1,3 with (a3,a4) / (a5,a6)
    [[+3, 0, +5, 0, 0, 0], [+4, 0, +6, 0, 0, 0],
     [-4, 0, -6, 0, 0, 0], [-3, 0, -5, 0, 0, 0]],
    # user 3: resources 1,4 with (a5,a6) / permuted (a7,a8)
    [[+5, 0, 0, -8, 0, 0], [+6, 0, 0, +7, 0, 0],
     [-6, 0, 0, -7, 0, 0], [-5, 0, 0, +8, 0, 0]],
    # user 4: resources 1,5 with (a7,a8) / (a1,a2)
    [[+7, 0, 0, 0, +1, 0], [+8, 0, 0, 0, +2, 0],
     [-8, 0, 0, 0, -2, 0], [-7, 0, 0, 0, -1, 0]],
    # user 5: resources 2,4 with (a5,a6) / (a3,a4)
    [[0, +5, 0, +3, 0, 0], [0, +6, 0, +4, 0, 0],
     [0, -6, 0, -4, 0, 0], [0, -5, 0, -3, 0, 0]],
    # user 6: resources 2,5 with (a7,a8) / permuted (a3,a4)
    [[0, +7, 0, 0, -4, 0], [0, +8, 0, 0, +3, 0],
     [0, -8, 0, 0, -3, 0], [0, -7, 0, 0, +4, 0]],
    # user 7: resources 2,6 with (a1,a2) / (a5,a6)
    [[0, +1, 0, 0, 0, +5], [0, +2, 0, 0, 0, +6],
     [0, -2, 0, 0, 0, -6], [0, -1, 0, 0, 0, -5]],
    # user 8: resources 3,4 with (a7,a8) / (a1,a2)
    [[0, 0, +7, +1, 0, 0], [0, 0, +8, +2, 0, 0],
     [0, 0, -8, -2, 0, 0], [0, 0, -7, -1, 0, 0]],
    # user 9: resources 3,5 with (a1,a2) / (a5,a6)
    [[0, 0, +1, 0, +5, 0], [0, 0, +2, 0, +6, 0],
     [0, 0, -2, 0, -6, 0], [0, 0, -1, 0, -5, 0]],
    # user 10: resources 3,6 with (a3,a4) / (a1,a2)
    [[0, 0, +3, 0, 0, +1], [0, 0, +4, 0, 0, +2],
     [0, 0, -4, 0, 0, -2], [0, 0, -3, 0, 0, -1]],
    # user 11: resources 4,6 with (a5,a6) / (a7,a8)
    [[0, 0, 0, +5, 0, +7], [0, 0, 0, +6, 0, +8],
     [0, 0, 0, -6, 0, -8], [0, 0, 0, -5, 0, -7]],
    # user 12: resources 5,6 with (a7,a8) / (a3,a4)
    [[0, 0, 0, 0, +7, +3], [0, 0, 0, 0, +8, +4],
     [0, 0, 0, 0, -8, -4], [0, 0, 0, 0, -7, -3]],
]

_BUILTIN = {
    "6x4": (6, _SLOTS_6X4, _F_6X4),
    "12x6": (8, _SLOTS_12X6, _F_12X6),
}


def factor_matrix_6x4() -> np.ndarray:
    return np.asarray(_F_6X4, dtype=np.int64)


def factor_matrix_8x4() -> np.ndarray:
    return np.asarray(_F_8X4, dtype=np.int64)


def factor_matrix_12x6() -> np.ndarray:
    return np.asarray(_F_12X6, dtype=np.int64)


def builtin_template(name: str) -> StructureTemplate:
    """Return one of the shipped layouts ("6x4" or "12x6")."""
    try:
        num_params, slots, F = _BUILTIN[name]
    except KeyError:
        raise KeyError(
            f"unknown template {name!r}; available: {sorted(_BUILTIN)}"
        ) from None
    return StructureTemplate(
        name=name,
        num_params=num_params,
        slots=np.asarray(slots),
        graph=FactorGraph(np.asarray(F)),
    )


def instantiate(template: StructureTemplate, a: Sequence[complex]) -> CodebookSet:
    """Fill the template slots with concrete parameter values: slot +-t
    becomes +-a_t.  Linear in a."""
    a = np.asarray(a, dtype=np.complex128).ravel()
    if a.size != template.num_params:
        raise MalformedParameterError(
            f"template {template.name} needs {template.num_params} parameters, "
            f"got {a.size}"
        )
    padded = np.concatenate(([0.0 + 0.0j], a))  # index 0 = structural zero
    books = np.sign(template.slots) * padded[np.abs(template.slots)]
    return CodebookSet(
        config=template.system_config(),
        books=books,
        factor_matrix=template.graph.F,
    )


def codeword_norms(template: StructureTemplate, a: np.ndarray) -> np.ndarray:
    """(J, M) Euclidean norms of the codewords instantiate(template, a)
    would produce."""
    mag2 = np.concatenate(([0.0], np.abs(np.asarray(a)) ** 2))
    return np.sqrt(mag2[np.abs(template.slots)].sum(axis=2))


def normalize(
    template: StructureTemplate,
    a: Sequence[complex],
    tol: float = NORMALIZE_TOL,
    max_sweeps: int = NORMALIZE_MAX_SWEEPS,
) -> tuple[np.ndarray, float]:
    """Rescale the parameters so every codeword has unit Euclidean norm.

    Cyclic projection: visit codewords in (user ascending, symbol ascending)
    order and divide each codeword's parameters by its current norm, sweeping
    until the worst deviation |norm - 1| drops below ``tol`` or ``max_sweeps``
    sweeps elapse.  Returns the adjusted parameters and the final residual.
    Phases are never touched, only magnitudes.
    """
    a = np.asarray(a, dtype=np.complex128).ravel().copy()
    if a.size != template.num_params:
        raise MalformedParameterError(
            f"template {template.name} needs {template.num_params} parameters, "
            f"got {a.size}"
        )
    param_sets = [
        [np.abs(template.slots[j, m][template.slots[j, m] != 0]) - 1
         for m in range(template.M)]
        for j in range(template.J)
    ]
    residual = np.inf
    for _ in range(max_sweeps):
        for j in range(template.J):
            for m in range(template.M):
                ids = param_sets[j][m]
                norm = np.sqrt((np.abs(a[ids]) ** 2).sum())
                if norm == 0.0:
                    raise DegenerateParameterError(
                        f"codeword ({j}, {m}) has zero norm during normalization"
                    )
                a[ids] /= norm
        residual = float(np.abs(codeword_norms(template, a) - 1.0).max())
        if residual < tol:
            break
    return a, residual


def derive_8x4(base: CodebookSet) -> CodebookSet:
    """Extend a 6x4 set to 8 users on the same 4 resources: users 7 and 8
    reuse the constellation values of users 4 and 3 respectively, placed on
    the repeated factor-matrix columns (user 7 on resources {1,2}, user 8 on
    resources {3,4})."""
    cfg = base.config
    if (cfg.J, cfg.K, cfg.M) != (6, 4, 4):
        raise ValueError(
            f"base must be a 6-user, 4-resource, M=4 set, got "
            f"J={cfg.J}, K={cfg.K}, M={cfg.M}"
        )
    F = factor_matrix_8x4()
    books = np.zeros((8, cfg.M, 4), dtype=np.complex128)
    books[:6] = base.books
    # user 7 (index 6): values of base user 4 (support rows {2,3}) moved to
    # rows {0,1}; user 8 (index 7): values of base user 3 (rows {0,1}) moved
    # to rows {2,3}.  Nonzero values keep their within-support order.
    books[6, :, 0] = base.books[3, :, 2]
    books[6, :, 1] = base.books[3, :, 3]
    books[7, :, 2] = base.books[2, :, 0]
    books[7, :, 3] = base.books[2, :, 1]
    return CodebookSet.from_books(books, F)


# --- template JSON files ---------------------------------------------------

def template_to_dict(template: StructureTemplate) -> dict:
    """Serialize a template; slots are 0 or {"p": 0-based index, "s": +-1}."""
    slots = []
    for j in range(template.J):
        book = []
        for m in range(template.M):
            row = []
            for k in range(template.K):
                s = int(template.slots[j, m, k])
                row.append(0 if s == 0 else {"p": abs(s) - 1, "s": 1 if s > 0 else -1})
            book.append(row)
        slots.append(book)
    return {
        "name": template.name,
        "num_params": template.num_params,
        "F": template.graph.F.tolist(),
        "slots": slots,
    }


def template_from_dict(doc: dict) -> StructureTemplate:
    try:
        name = str(doc["name"])
        num_params = int(doc["num_params"])
        F = np.asarray(doc["F"], dtype=np.int64)
        raw = doc["slots"]
    except (KeyError, TypeError, ValueError) as exc:
        raise CodebookFormatError(f"missing or invalid template field: {exc}") from exc
    try:
        slots = np.array(
            [
                [
                    [
                        0 if cell == 0 else int(cell["s"]) * (int(cell["p"]) + 1)
                        for cell in row
                    ]
                    for row in book
                ]
                for book in raw
            ],
            dtype=np.int64,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CodebookFormatError(f"malformed slot entry: {exc}") from exc
    try:
        return StructureTemplate(
            name=name, num_params=num_params, slots=slots, graph=FactorGraph(F)
        )
    except ValueError as exc:
        raise CodebookFormatError(str(exc)) from exc


def write_template_json(template: StructureTemplate, path: str | Path) -> None:
    Path(path).write_text(json.dumps(template_to_dict(template)) + "\n")


def read_template_json(path: str | Path) -> StructureTemplate:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CodebookFormatError(f"cannot parse {path}: {exc}") from exc
    return template_from_dict(doc)
