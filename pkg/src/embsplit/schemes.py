"""Catalog of embedded splitting and composition methods, plus coefficient conversions.

Estimator weights are derived from each entry's recipe (order, symmetry
template, pins) by :func:`embsplit.estgen.derive_weights`; the printed values
are kept alongside as ``reference_weights`` for cross-checking.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .estgen import EstimatorWeights, SchemeSpec, derive_weights
from .opalg import Family, Role

SCHEME_FILE_VERSION = 1


@dataclass(frozen=True)
class EstimatorRecipe:
    """How to derive one estimator: target order, weight template and pins.

    ``symmetry`` entries are ``(i, j, sign)`` meaning ``w_j = sign * w_i``.
    """

    order: int
    symmetry: tuple[tuple[int, int, int], ...] = ()
    pins: tuple[tuple[int, float], ...] = ()
    note: str = ""

    def pins_dict(self) -> dict[int, float]:
        return dict(self.pins)


@dataclass(frozen=True)
class EmbeddedMethod:
    name: str
    scheme: SchemeSpec
    main_order: int
    recipes: tuple[EstimatorRecipe, ...]
    estimators: tuple[EstimatorWeights, ...]
    reference_weights: tuple[np.ndarray | None, ...] = ()
    notes: str = ""
    symmetric: bool = True

    @property
    def estimator_orders(self) -> tuple[int, ...]:
        return tuple(e.order for e in self.estimators)

    @property
    def n_stages(self) -> int:
        return self.scheme.n_stages

    def fevals_per_step(self, cost: dict) -> int:
        return int(sum(cost.get(r, 0) for r, _ in self.scheme.stages))


def symmetric_pairs(n_outputs: int, period: int, sign: int = 1) -> tuple[tuple[int, int, int], ...]:
    """Pairs ``(i, period - i, sign)`` for ``1 <= i < period - i < n_outputs``."""
    return tuple((i, period - i, sign) for i in range(1, n_outputs) if i < period - i < n_outputs)


def build_method(
    name: str,
    scheme: SchemeSpec,
    main_order: int,
    recipes: Sequence[EstimatorRecipe],
    reference_weights: Sequence[Sequence[float] | None] = (),
    notes: str = "",
) -> EmbeddedMethod:
    estimators = tuple(
        derive_weights(scheme, r.order, r.symmetry, r.pins_dict()) for r in recipes
    )
    refs = tuple(None if w is None else np.asarray(w, dtype=float) for w in reference_weights)
    return EmbeddedMethod(
        name, scheme, main_order, tuple(recipes), estimators, refs, notes, scheme.is_time_symmetric(1e-12)
    )


def ss_scheme(alphas: Sequence[float], order: int) -> SchemeSpec:
    return SchemeSpec(Family.SS, [(Role.S2, a) for a in alphas], order)


def methodadjoint_scheme(alphas: Sequence[float], order: int) -> SchemeSpec:
    if len(alphas) % 2:
        raise ValueError("method-adjoint compositions need an even number of coefficients")
    roles = [Role.ADJOINT_CHI, Role.BASIC_CHI] * (len(alphas) // 2)
    return SchemeSpec(Family.METHOD_ADJOINT, list(zip(roles, alphas)), order)


def splitting_scheme(a: Sequence[float], b: Sequence[float], order: int) -> SchemeSpec:
    """Alternating splitting; the longer list supplies both end stages."""
    if len(b) == len(a) + 1:
        first, rest, outer, inner = Role.FLOW_B, Role.FLOW_A, b, a
    elif len(a) == len(b) + 1:
        first, rest, outer, inner = Role.FLOW_A, Role.FLOW_B, a, b
    else:
        raise ValueError(f"splitting lists must differ in length by one, got {len(a)} and {len(b)}")
    stages = []
    for i, c in enumerate(inner):
        stages += [(first, outer[i]), (rest, c)]
    stages.append((first, outer[-1]))
    return SchemeSpec(Family.SPLITTING, stages, order)


def splitting_coefficients(scheme: SchemeSpec) -> tuple[list[float], list[float]]:
    if scheme.family is not Family.SPLITTING:
        raise ValueError("not a splitting scheme")
    a = [c for r, c in scheme.stages if r is Role.FLOW_A]
    b = [c for r, c in scheme.stages if r is Role.FLOW_B]
    return a, b


def _palindrome(half: Sequence[float], middle: float | None = None) -> list[float]:
    half = list(half)
    mid = [] if middle is None else [middle]
    return half + mid + half[::-1]


def splitting_from_methodadjoint(alphas: Sequence[float]) -> tuple[list[float], list[float]]:
    """Merge ``chi* = A after B`` and ``chi = B after A`` flows into a B-first splitting."""
    alphas = [float(x) for x in alphas]
    if len(alphas) % 2 or not alphas:
        raise ValueError(f"need an even, nonzero number of coefficients, got {len(alphas)}")
    s = len(alphas) // 2
    al = [0.0] + alphas + [0.0]  # 1-based with alpha_{2s+1} = 0
    b = [al[1]]
    a = []
    for j in range(1, s + 1):
        a.append(al[2 * j] + al[2 * j - 1])
        b.append(al[2 * j + 1] + al[2 * j])
    return a, b


def methodadjoint_from_splitting(a: Sequence[float], b: Sequence[float], tol: float = 1e-12) -> list[float]:
    """Inverse of :func:`splitting_from_methodadjoint` (backward recursion)."""
    a = [float(x) for x in a]
    b = [float(x) for x in b]
    s = len(a)
    if len(b) != s + 1:
        raise ValueError(f"expected len(b) == len(a) + 1, got {len(a)} and {len(b)}")
    if abs(sum(a) - sum(b)) > tol:
        raise ValueError(f"sum(a) = {sum(a)!r} differs from sum(b) = {sum(b)!r}")
    al = [0.0] * (2 * s + 1)
    al[2 * s] = b[s]
    for j in range(s, 0, -1):
        al[2 * j - 1] = a[j - 1] - al[2 * j]
        al[2 * j - 2] = b[j - 1] - al[2 * j - 1]
    if abs(al[0]) > tol:
        raise ValueError(f"inconsistent coefficients: alpha_0 = {al[0]!r}")
    return al[1:]


def splitting_from_ss(alphas: Sequence[float], strang_variant: str = "BAB") -> tuple[list[float], list[float]]:
    """Expand each Strang stage and merge neighbouring same-flow exponentials.

    Returns ``(a, b)``. For ``"BAB"`` the B list is one longer and holds the
    merged half steps; for ``"ABA"`` the roles are swapped.
    """
    alphas = [float(x) for x in alphas]
    halves = [alphas[0] / 2]
    halves += [(x + y) / 2 for x, y in zip(alphas, alphas[1:])]
    halves.append(alphas[-1] / 2)
    if strang_variant == "BAB":
        return alphas, halves
    if strang_variant == "ABA":
        return halves, alphas
    raise ValueError(f"unknown Strang variant {strang_variant!r}")


def replicate_halved(scheme: SchemeSpec, m: int = 2) -> SchemeSpec:
    """One step of the result over ``h`` equals ``m`` steps of ``scheme`` over ``h/m``."""
    if scheme.family is not Family.SS:
        raise ValueError("replicate_halved applies to SS compositions")
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    stages = [(r, c / m) for r, c in scheme.stages] * m
    return SchemeSpec(Family.SS, stages, scheme.declared_order)


# --- coefficient tables ------------------------------------------------------

SUZUKI_ALPHAS = (
    1 / (4 - 4 ** (1 / 3)),
    1 / (4 - 4 ** (1 / 3)),
    1 / (1 - 4 ** (2 / 3)),
    1 / (4 - 4 ** (1 / 3)),
    1 / (4 - 4 ** (1 / 3)),
)
_MCL = 1 / (6 - 6 ** (1 / 3))
MCLACHLAN_ALPHAS = (_MCL, _MCL, _MCL, 1 / (1 - 6 ** (2 / 3)), _MCL, _MCL, _MCL)

_YOSHIDA6_HALF = (0.78451361047755726382, 0.23557321335935813369, -1.17767998417887100695)
YOSHIDA6_ALPHAS = tuple(_palindrome(_YOSHIDA6_HALF, 1 - 2 * sum(_YOSHIDA6_HALF)))

_SS65_HALF = (
    0.21375583945878254555,
    0.18329381407425713911,
    0.17692819473098943795,
    -0.44329082681170215849,
    0.11728560432865935385,
)
SS65_ALPHAS = tuple(_palindrome(_SS65_HALF, 1 - 2 * sum(_SS65_HALF)))

_KL8_HALF = (
    0.13020248308889008088,
    0.56116298177510838456,
    -0.38947496264484728641,
    0.15884190655515560090,
    -0.39590389413323757734,
    0.18453964097831570709,
    0.25837438768632204729,
    0.29501172360931029887,
)
KAHAN_LI8_ALPHAS = tuple(_palindrome(_KL8_HALF, 1 - 2 * sum(_KL8_HALF)))

_MA_HALF = (
    0.08298440641740484666,
    0.16231455076686615333,
    0.23399525073150184666,
    0.37087741497957699562,
    -0.40993371990192559562,
    0.05976209700657575333,
)
METHOD_ADJOINT_ALPHAS = tuple(_palindrome(_MA_HALF))


def _symmetric_splitting(b123, a12):
    b1, b2, b3 = b123
    a1, a2 = a12
    a = [a1, a2, 0.5 - (a1 + a2)]
    a = a + a[::-1]
    b = _palindrome((b1, b2, b3), 1 - 2 * (b1 + b2 + b3))
    return tuple(a), tuple(b)


PRK6_A, PRK6_B = _symmetric_splitting(
    (0.07920369643119565, 0.35317290604977372, -0.04206508035771952),
    (0.209515106613361, -0.143851773179818),
)
RKN6_A, RKN6_B = _symmetric_splitting(
    (0.082984406417404, 0.396309801498368, -0.039056304922348),
    (0.245298957184271, 0.604872665711078),
)


def _sym_weights(w0: float, half: Sequence[float], period: int, n: int, sign: int = 1) -> np.ndarray:
    w = np.zeros(n)
    w[0] = w0
    for i, v in enumerate(half, start=1):
        w[i] = v
        if period - i != i:
            w[period - i] = sign * v
    return w


YOSHIDA6_REF = (-0.90983233007647709242, 2.16331188722978237305, 0.55695580387159066608)
SS65_REF = (
    -4.70925883588386976399,
    24.61043285614692442695,
    -19.39218824966918044634,
    6.17441462307605721006,
    -5.68340039366993142668,
)
KL8_REF5 = (
    -2.77811433347582461058,
    1.43336350604816157334,
    -2.35490307436226712937,
    0.27249477875971647996,
    3.09204406313073660493,
    1.33511505989947708172,
    0.0,
    0.0,
)
KL8_REF3 = {1: 1.828514038642564624, 7: -0.828514038642564624}
MA_REF = (
    1.48889386198802799037,
    -0.03049911761922725390,
    -0.32603028933442750875,
    -0.05468276894167474320,
    -0.02746220037522580999,
    -0.10043897143494534902,
)
PRK6_REF = (1.0, 0.43458657385433203071, -0.43458657385433203071, 0.27273581001405423884, -0.27273581001405423884)
RKN6_REF = (1.0, 0.43541552923952936004, -0.43541552923952936004, -0.17978889668391821731, 0.17978889668391821731)


@functools.lru_cache(maxsize=None)
def catalog() -> tuple[EmbeddedMethod, ...]:
    """The eight embedded methods with derived estimator weights."""
    out = []

    sch = ss_scheme(SUZUKI_ALPHAS, 4)
    out.append(build_method(
        "SS5-4(3)", sch, 4,
        [EstimatorRecipe(3, symmetric_pairs(5, 5))],
        [_sym_weights(-1.0, _closed_form_ss5(SUZUKI_ALPHAS), 5, 5)],
        "Suzuki 5-stage fourth-order composition",
    ))

    sch = ss_scheme(MCLACHLAN_ALPHAS, 4)
    out.append(build_method(
        "SS7-4(3)", sch, 4,
        [EstimatorRecipe(3, symmetric_pairs(7, 7), note="free parameter w_3 set by minimal norm")],
        [None],
        "McLachlan 7-stage fourth-order composition; estimator has one free parameter",
    ))

    sch = ss_scheme(YOSHIDA6_ALPHAS, 6)
    out.append(build_method(
        "SS7-6(4)", sch, 6,
        [EstimatorRecipe(4, symmetric_pairs(7, 7, -1))],
        [_sym_weights(1.0, YOSHIDA6_REF, 7, 7, -1)],
        "Yoshida 7-stage sixth-order composition, antisymmetric estimator template",
    ))

    sch = ss_scheme(SS65_ALPHAS, 6)
    out.append(build_method(
        "SS11-6(5)", sch, 6,
        [EstimatorRecipe(5, symmetric_pairs(11, 11))],
        [_sym_weights(-1.0, SS65_REF, 11, 11)],
        "Sofroniou-Spaletta 11-stage sixth-order composition",
    ))

    sch = ss_scheme(KAHAN_LI8_ALPHAS, 8)
    ref3 = np.zeros(17)
    ref3[0] = -1.0
    for i, v in KL8_REF3.items():
        ref3[i] = ref3[17 - i] = v
    out.append(build_method(
        "SS17-8(5)(3)", sch, 8,
        [
            EstimatorRecipe(
                5, symmetric_pairs(17, 17), ((7, 0.0), (8, 0.0), (6, KL8_REF5[5])),
                note="w_7 = w_8 = 0 leave a one-parameter family; w_6 pinned to the printed value",
            ),
            EstimatorRecipe(3, symmetric_pairs(17, 17), tuple((i, 0.0) for i in (2, 3, 4, 5, 6, 8))),
        ],
        [_sym_weights(-1.0, KL8_REF5, 17, 17), ref3],
        "Kahan-Li 17-stage eighth-order composition with fifth- and third-order estimators",
    ))

    sch = methodadjoint_scheme(METHOD_ADJOINT_ALPHAS, 4)
    out.append(build_method(
        "MA6-4(3)", sch, 4,
        [EstimatorRecipe(3, symmetric_pairs(12, 12))],
        [_sym_weights(-1.0, MA_REF, 12, 12)],
        "6-stage method-adjoint composition (same map as RKN6-4(3), different outputs)",
    ))

    sch = splitting_scheme(PRK6_A, PRK6_B, 4)
    out.append(build_method(
        "PRK6-4(3)", sch, 4,
        [EstimatorRecipe(3, symmetric_pairs(13, 13), ((6, 0.0),))],
        [_sym_weights(-1.0, PRK6_REF, 13, 13)],
        "6-stage fourth-order splitting",
    ))

    sch = splitting_scheme(RKN6_A, RKN6_B, 4)
    out.append(build_method(
        "RKN6-4(3)", sch, 4,
        [EstimatorRecipe(3, symmetric_pairs(13, 13), ((6, 0.0),))],
        [_sym_weights(-1.0, RKN6_REF, 13, 13)],
        "6-stage fourth-order splitting for second-order systems",
    ))
    return tuple(out)


def _closed_form_ss5(alphas: Sequence[float]) -> tuple[float, float]:
    g1 = alphas[0]
    g2 = alphas[0] + alphas[1]
    w1 = g2 * (1 - g2) / (g1 * (g1 - 1) - g2 * (g2 - 1))
    return w1, 1.0 - w1


def get_method(name: str) -> EmbeddedMethod:
    for m in catalog():
        if m.name == name:
            return m
    raise KeyError(f"unknown method {name!r}; known: {', '.join(m.name for m in catalog())}")


def doubled_triple_jump() -> EmbeddedMethod:
    """Real fourth-order triple jump taken twice with halved steps, 4(3) pair."""
    a1 = 1 / (2 - 2 ** (1 / 3))
    base = ss_scheme((a1, 1 - 2 * a1, a1), 4)
    sch = replicate_halved(base, 2)
    return build_method(
        "SS6-4(3)-TJ2", sch, 4,
        [EstimatorRecipe(3, symmetric_pairs(6, 6), ((3, 0.0),))],
        [None],
        "triple jump applied twice as one step",
    )


# --- scheme files --------------------------------------------------------------

def scheme_to_dict(scheme: SchemeSpec, recipes: Sequence[EstimatorRecipe] = (), name: str | None = None) -> dict:
    d: dict = {"version": SCHEME_FILE_VERSION}
    if name:
        d["name"] = name
    d["family"] = scheme.family.value
    d["declared_order"] = scheme.declared_order
    d["stages"] = [{"role": r.value, "coeff": c} for r, c in scheme.stages]
    d["estimators"] = [
        {
            "order": r.order,
            "symmetry": [list(p) for p in r.symmetry],
            "pins": {str(k): v for k, v in r.pins},
        }
        for r in recipes
    ]
    return d


def method_to_dict(method: EmbeddedMethod) -> dict:
    return scheme_to_dict(method.scheme, method.recipes, method.name)


def scheme_from_dict(d: dict) -> tuple[SchemeSpec, list[EstimatorRecipe], str | None]:
    try:
        family = Family(d["family"])
        stages = [(Role(s["role"]), float(s["coeff"])) for s in d["stages"]]
        order = int(d["declared_order"])
    except KeyError as exc:
        raise ValueError(f"scheme file is missing field {exc}") from None
    recipes = []
    for e in d.get("estimators", []):
        sym = tuple(
            (int(p[0]), int(p[1]), int(p[2]) if len(p) > 2 else 1) for p in e.get("symmetry", [])
        )
        pins = tuple((int(k), float(v)) for k, v in e.get("pins", {}).items())
        recipes.append(EstimatorRecipe(int(e["order"]), sym, pins))
    return SchemeSpec(family, stages, order), recipes, d.get("name")


def save_scheme_file(path: str | Path, method: EmbeddedMethod) -> None:
    Path(path).write_text(json.dumps(method_to_dict(method), indent=2) + "\n", encoding="utf-8")


def load_scheme_file(path: str | Path) -> tuple[SchemeSpec, list[EstimatorRecipe], str | None]:
    return scheme_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
