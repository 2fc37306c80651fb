"""Finite-alphabet probability tables and exact information measures.

Tables are dense numpy arrays with one axis per named variable.  The
helpers here build the one-block law ``P_U P_AB P_{X1|UA} P_{X2|UB} P_{Y|X1X2}``
and the two-block law in which the auxiliaries of the current block are
generated from the previous block through a pair of feedback kernels.

Variables of the previous block carry a ``t`` suffix (``Ut``, ``At``, ...),
primed auxiliaries a ``p`` (``Ap``, ``Bp``, ``Apt``, ...).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from macfb.errors import DimensionError, MacfbError

#: Masses below this are treated as exact zeros inside log terms.
ZERO_MASS = 1e-15
#: Normalisation tolerance for joint and conditional tables.
SUM_TOL = 1e-9

CURRENT_BLOCK = ("U", "A", "B", "X1", "X2", "Y")
PREVIOUS_BLOCK = ("Ut", "At", "Bt", "X1t", "X2t", "Yt")
#: The previous-block state shared by both encoders and the decoder.
PREVIOUS_STATE = ("Ut", "At", "Bt", "Yt")

EXTENDED_CURRENT = ("U", "Ap", "Bp", "A", "B", "X1", "X2", "Y")
EXTENDED_PREVIOUS = ("Ut", "Apt", "Bpt", "At", "Bt", "X1t", "X2t", "Yt")

_UNITS = {"nats": 1.0, "bits": 1.0 / math.log(2.0)}


def unit_scale(unit):
    """Multiplier converting nats into `unit`."""
    try:
        return _UNITS[unit]
    except KeyError:
        raise MacfbError(f"unknown unit {unit!r}; expected 'bits' or 'nats'") from None


@dataclass(frozen=True)
class VariableSpec:
    """A named random variable on ``{0, ..., size - 1}``."""

    name: str
    size: int

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise MacfbError(f"variable name must be a non-empty string, got {self.name!r}")
        if int(self.size) != self.size or self.size < 1:
            raise MacfbError(f"alphabet size of {self.name} must be a positive integer")
        object.__setattr__(self, "size", int(self.size))

    def to_dict(self):
        return {"name": self.name, "size": self.size}


def _as_specs(variables) -> tuple[VariableSpec, ...]:
    specs = []
    for v in variables:
        if isinstance(v, VariableSpec):
            specs.append(v)
        elif isinstance(v, dict):
            specs.append(VariableSpec(v["name"], v["size"]))
        else:
            name, size = v
            specs.append(VariableSpec(name, size))
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise MacfbError(f"duplicate variable names in {names}")
    return tuple(specs)


def _as_names(group) -> tuple[str, ...]:
    if group is None:
        return ()
    if isinstance(group, str):
        return (group,)
    return tuple(group)


class JointTable:
    """Probability mass function over a tuple of finite-alphabet variables.

    Parameters
    ----------
    variables : sequence of VariableSpec or (name, size) pairs
        Axis order of the table.
    probabilities : array_like
        Either an array of shape ``(size_1, ..., size_k)`` or its row-major
        flattening.
    """

    __slots__ = ("variables", "p")

    def __init__(self, variables, probabilities):
        self.variables = _as_specs(variables)
        shape = tuple(v.size for v in self.variables)
        p = np.asarray(probabilities, dtype=float)
        if p.size != math.prod(shape):
            raise DimensionError(
                f"table over {self.names} needs {math.prod(shape)} entries, got {p.size}"
            )
        p = p.reshape(shape)
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise MacfbError(f"table over {self.names} has negative or non-finite entries")
        total = float(p.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise MacfbError(f"table over {self.names} sums to {total!r}, not 1")
        self.p = p

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.p.shape

    def size_of(self, name):
        return self.variables[self.axis(name)].size

    def axis(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise MacfbError(f"unknown variable {name!r}; table has {self.names}") from None

    def to_dict(self):
        return {
            "variables": [v.to_dict() for v in self.variables],
            "probabilities": self.p.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data["variables"], data["probabilities"])

    def __repr__(self):
        return f"JointTable({', '.join(f'{v.name}:{v.size}' for v in self.variables)})"


class CondTable:
    """Conditional law of ``target`` given ``given``.

    The array has the ``given`` axes first, then the ``target`` axes.  For
    every conditioning tuple the target slice is a probability vector.
    """

    __slots__ = ("given", "target", "p")

    def __init__(self, given, target, probabilities):
        self.given = _as_specs(given)
        self.target = _as_specs(target)
        names = [v.name for v in self.given + self.target]
        if len(set(names)) != len(names):
            raise MacfbError(f"given and target overlap in {names}")
        shape = tuple(v.size for v in self.given + self.target)
        p = np.asarray(probabilities, dtype=float)
        if p.size != math.prod(shape):
            raise DimensionError(
                f"conditional table {self._label()} needs {math.prod(shape)} entries, got {p.size}"
            )
        p = p.reshape(shape)
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise MacfbError(f"conditional table {self._label()} has negative or non-finite entries")
        axes = tuple(range(len(self.given), len(shape)))
        sums = p.sum(axis=axes) if axes else p
        if np.any(np.abs(sums - 1.0) > SUM_TOL):
            raise MacfbError(f"conditional table {self._label()} has a slice not summing to 1")
        self.p = p

    def _label(self):
        g = ",".join(v.name for v in self.given)
        t = ",".join(v.name for v in self.target)
        return f"P({t}|{g})"

    @property
    def given_sizes(self):
        return tuple(v.size for v in self.given)

    @property
    def target_sizes(self):
        return tuple(v.size for v in self.target)

    def to_dict(self):
        return {
            "given": [v.to_dict() for v in self.given],
            "target": [v.to_dict() for v in self.target],
            "probabilities": self.p.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data["given"], data["target"], data["probabilities"])

    def __repr__(self):
        return f"CondTable({self._label()})"


def _expect(table, factor, given_sizes, target_sizes):
    if table.given_sizes != tuple(given_sizes) or table.target_sizes != tuple(target_sizes):
        raise DimensionError(
            f"{factor}: expected given sizes {tuple(given_sizes)} and target sizes "
            f"{tuple(target_sizes)}, got {table.given_sizes} and {table.target_sizes}"
        )


def _expect_joint(table, factor, sizes):
    if table.shape != tuple(sizes):
        raise DimensionError(f"{factor}: expected shape {tuple(sizes)}, got {table.shape}")


@dataclass(frozen=True, eq=False)
class InputLaw:
    """Factored input law ``P_U P_AB P_{X1|UA} P_{X2|UB}`` plus the channel."""

    p_u: JointTable
    p_ab: JointTable
    p_x1_given_ua: CondTable
    p_x2_given_ub: CondTable
    channel: CondTable

    def __post_init__(self):
        if len(self.p_u.variables) != 1:
            raise DimensionError("p_u: must be a table over a single variable")
        if len(self.p_ab.variables) != 2:
            raise DimensionError("p_ab: must be a table over two variables")
        if len(self.channel.given) != 2 or len(self.channel.target) != 1:
            raise DimensionError("channel: must be a law of one output given two inputs")
        nu = self.p_u.shape[0]
        na, nb = self.p_ab.shape
        nx1, nx2 = self.channel.given_sizes
        _expect(self.p_x1_given_ua, "p_x1_given_ua", (nu, na), (nx1,))
        _expect(self.p_x2_given_ub, "p_x2_given_ub", (nu, nb), (nx2,))

    @property
    def sizes(self) -> dict[str, int]:
        nx1, nx2 = self.channel.given_sizes
        return {
            "U": self.p_u.shape[0],
            "A": self.p_ab.shape[0],
            "B": self.p_ab.shape[1],
            "X1": nx1,
            "X2": nx2,
            "Y": self.channel.target_sizes[0],
        }

    @classmethod
    def from_arrays(cls, p_u, p_ab, p_x1_given_ua, p_x2_given_ub, channel):
        """Build a law from plain arrays, naming the axes conventionally.

        ``p_x1_given_ua`` has shape ``(|U|, |A|, |X1|)``, ``channel`` has
        shape ``(|X1|, |X2|, |Y|)``, and so on.
        """
        p_u = np.asarray(p_u, float)
        p_ab = np.asarray(p_ab, float)
        px1 = np.asarray(p_x1_given_ua, float)
        px2 = np.asarray(p_x2_given_ub, float)
        ch = np.asarray(channel, float)
        if p_u.ndim != 1 or p_ab.ndim != 2 or px1.ndim != 3 or px2.ndim != 3 or ch.ndim != 3:
            raise DimensionError("from_arrays: unexpected array ranks")
        nu, (na, nb) = p_u.shape[0], p_ab.shape
        nx1, nx2, ny = ch.shape
        return cls(
            JointTable([("U", nu)], p_u),
            JointTable([("A", na), ("B", nb)], p_ab),
            CondTable([("U", px1.shape[0]), ("A", px1.shape[1])], [("X1", px1.shape[2])], px1),
            CondTable([("U", px2.shape[0]), ("B", px2.shape[1])], [("X2", px2.shape[2])], px2),
            CondTable([("X1", nx1), ("X2", nx2)], [("Y", ny)], ch),
        )

    def to_dict(self):
        return {
            "p_u": self.p_u.to_dict(),
            "p_ab": self.p_ab.to_dict(),
            "p_x1_given_ua": self.p_x1_given_ua.to_dict(),
            "p_x2_given_ub": self.p_x2_given_ub.to_dict(),
            "channel": self.channel.to_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            JointTable.from_dict(data["p_u"]),
            JointTable.from_dict(data["p_ab"]),
            CondTable.from_dict(data["p_x1_given_ua"]),
            CondTable.from_dict(data["p_x2_given_ub"]),
            CondTable.from_dict(data["channel"]),
        )


@dataclass(frozen=True, eq=False)
class ExtendedInputLaw:
    """Input law with two auxiliary pairs: ``P_U P_{A'B'AB} P_{X1|UA'A} P_{X2|UB'B}``."""

    p_u: JointTable
    p_apbpab: JointTable
    p_x1_given_uapa: CondTable
    p_x2_given_ubpb: CondTable
    channel: CondTable

    def __post_init__(self):
        if len(self.p_u.variables) != 1:
            raise DimensionError("p_u: must be a table over a single variable")
        if len(self.p_apbpab.variables) != 4:
            raise DimensionError("p_apbpab: must be a table over (A', B', A, B)")
        if len(self.channel.given) != 2 or len(self.channel.target) != 1:
            raise DimensionError("channel: must be a law of one output given two inputs")
        nu = self.p_u.shape[0]
        nap, nbp, na, nb = self.p_apbpab.shape
        nx1, nx2 = self.channel.given_sizes
        _expect(self.p_x1_given_uapa, "p_x1_given_uapa", (nu, nap, na), (nx1,))
        _expect(self.p_x2_given_ubpb, "p_x2_given_ubpb", (nu, nbp, nb), (nx2,))

    @property
    def sizes(self) -> dict[str, int]:
        nap, nbp, na, nb = self.p_apbpab.shape
        nx1, nx2 = self.channel.given_sizes
        return {
            "U": self.p_u.shape[0],
            "Ap": nap,
            "Bp": nbp,
            "A": na,
            "B": nb,
            "X1": nx1,
            "X2": nx2,
            "Y": self.channel.target_sizes[0],
        }

    @classmethod
    def from_arrays(cls, p_u, p_apbpab, p_x1_given_uapa, p_x2_given_ubpb, channel):
        p_u = np.asarray(p_u, float)
        paux = np.asarray(p_apbpab, float)
        px1 = np.asarray(p_x1_given_uapa, float)
        px2 = np.asarray(p_x2_given_ubpb, float)
        ch = np.asarray(channel, float)
        if p_u.ndim != 1 or paux.ndim != 4 or px1.ndim != 4 or px2.ndim != 4 or ch.ndim != 3:
            raise DimensionError("from_arrays: unexpected array ranks")
        nap, nbp, na, nb = paux.shape
        return cls(
            JointTable([("U", p_u.shape[0])], p_u),
            JointTable([("Ap", nap), ("Bp", nbp), ("A", na), ("B", nb)], paux),
            CondTable([("U", px1.shape[0]), ("Ap", px1.shape[1]), ("A", px1.shape[2])],
                      [("X1", px1.shape[3])], px1),
            CondTable([("U", px2.shape[0]), ("Bp", px2.shape[1]), ("B", px2.shape[2])],
                      [("X2", px2.shape[3])], px2),
            CondTable([("X1", ch.shape[0]), ("X2", ch.shape[1])], [("Y", ch.shape[2])], ch),
        )

    def to_dict(self):
        return {
            "p_u": self.p_u.to_dict(),
            "p_apbpab": self.p_apbpab.to_dict(),
            "p_x1_given_uapa": self.p_x1_given_uapa.to_dict(),
            "p_x2_given_ubpb": self.p_x2_given_ubpb.to_dict(),
            "channel": self.channel.to_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            JointTable.from_dict(data["p_u"]),
            JointTable.from_dict(data["p_apbpab"]),
            CondTable.from_dict(data["p_x1_given_uapa"]),
            CondTable.from_dict(data["p_x2_given_ubpb"]),
            CondTable.from_dict(data["channel"]),
        )


def _product(factors, out_names):
    """Outer product of named arrays, returned with axes in `out_names` order."""
    letters = {}
    for name in out_names:
        letters[name] = chr(ord("a") + len(letters))
    operands, subs = [], []
    for array, names in factors:
        for n in names:
            if n not in letters:
                raise DimensionError(f"factor axis {n!r} does not appear in the output")
        subs.append("".join(letters[n] for n in names))
        operands.append(array)
    spec = ",".join(subs) + "->" + "".join(letters[n] for n in out_names)
    return np.einsum(spec, *operands, optimize=True)


def _single_block_factors(law, names):
    u, a, b, x1, x2, y = names
    return [
        (law.p_u.p, (u,)),
        (law.p_ab.p, (a, b)),
        (law.p_x1_given_ua.p, (u, a, x1)),
        (law.p_x2_given_ub.p, (u, b, x2)),
        (law.channel.p, (x1, x2, y)),
    ]


def build_single_block(law: InputLaw) -> JointTable:
    """Joint law of ``(U, A, B, X1, X2, Y)`` for one block."""
    sizes = law.sizes
    p = _product(_single_block_factors(law, CURRENT_BLOCK), CURRENT_BLOCK)
    return JointTable([(n, sizes[n]) for n in CURRENT_BLOCK], p)


def build_two_block(law: InputLaw, fb) -> JointTable:
    """Joint law of the previous and the current block.

    The previous block is distributed as :func:`build_single_block`; the
    current auxiliaries are drawn through ``fb.q_a(A | Ut, At, Bt, Yt, X1t)``
    and ``fb.q_b(B | Ut, At, Bt, Yt, X2t)``; the rest of the current block
    follows ``P_U P_{X1|UA} P_{X2|UB}`` and the channel.  Consistency of `fb`
    is not checked here.

    Axes are ordered ``Ut, At, Bt, Yt, X1t, X2t, U, A, B, X1, X2, Y``.
    """
    s = law.sizes
    state = (s["U"], s["A"], s["B"], s["Y"])
    _expect(fb.q_a, "q_a", state + (s["X1"],), (s["A"],))
    _expect(fb.q_b, "q_b", state + (s["X2"],), (s["B"],))
    out = PREVIOUS_STATE + ("X1t", "X2t") + CURRENT_BLOCK
    tilde = dict(zip(CURRENT_BLOCK, PREVIOUS_BLOCK))
    factors = [(build_single_block(law).p, PREVIOUS_BLOCK)]
    factors += [
        (fb.q_a.p, PREVIOUS_STATE + ("X1t", "A")),
        (fb.q_b.p, PREVIOUS_STATE + ("X2t", "B")),
        (law.p_u.p, ("U",)),
        (law.p_x1_given_ua.p, ("U", "A", "X1")),
        (law.p_x2_given_ub.p, ("U", "B", "X2")),
        (law.channel.p, ("X1", "X2", "Y")),
    ]
    p = _product(factors, out)
    sizes = {**s, **{tilde[k]: v for k, v in s.items()}}
    return JointTable([(n, sizes[n]) for n in out], p)


def build_single_block_extended(law: ExtendedInputLaw) -> JointTable:
    """Joint law of ``(U, A', B', A, B, X1, X2, Y)`` for one block."""
    s = law.sizes
    factors = [
        (law.p_u.p, ("U",)),
        (law.p_apbpab.p, ("Ap", "Bp", "A", "B")),
        (law.p_x1_given_uapa.p, ("U", "Ap", "A", "X1")),
        (law.p_x2_given_ubpb.p, ("U", "Bp", "B", "X2")),
        (law.channel.p, ("X1", "X2", "Y")),
    ]
    return JointTable([(n, s[n]) for n in EXTENDED_CURRENT], _product(factors, EXTENDED_CURRENT))


def build_two_block_extended(law: ExtendedInputLaw, fb) -> JointTable:
    """Two-block joint law with primed auxiliaries.

    The feedback kernels are positional: ``fb.q_a_given`` is
    ``Q(A | Ut, At, Bt, Yt, Apt)`` and ``fb.q_ap_given`` is
    ``Q(A' | A, X1t, Ut, At, Bt, Yt, Apt)``; the B side mirrors this with
    ``Bpt`` and ``X2t``.

    Axes are ordered ``Ut, At, Bt, Yt, Apt, Bpt, X1t, X2t`` followed by
    ``U, Ap, Bp, A, B, X1, X2, Y``.
    """
    s = law.sizes
    state = (s["U"], s["A"], s["B"], s["Y"])
    _expect(fb.q_a_given, "q_a_given", state + (s["Ap"],), (s["A"],))
    _expect(fb.q_ap_given, "q_ap_given", (s["A"], s["X1"]) + state + (s["Ap"],), (s["Ap"],))
    _expect(fb.q_b_given, "q_b_given", state + (s["Bp"],), (s["B"],))
    _expect(fb.q_bp_given, "q_bp_given", (s["B"], s["X2"]) + state + (s["Bp"],), (s["Bp"],))
    out = PREVIOUS_STATE + ("Apt", "Bpt", "X1t", "X2t") + EXTENDED_CURRENT
    tilde = dict(zip(EXTENDED_CURRENT, EXTENDED_PREVIOUS))
    factors = [
        (build_single_block_extended(law).p, EXTENDED_PREVIOUS),
        (fb.q_a_given.p, PREVIOUS_STATE + ("Apt", "A")),
        (fb.q_ap_given.p, ("A", "X1t") + PREVIOUS_STATE + ("Apt", "Ap")),
        (fb.q_b_given.p, PREVIOUS_STATE + ("Bpt", "B")),
        (fb.q_bp_given.p, ("B", "X2t") + PREVIOUS_STATE + ("Bpt", "Bp")),
        (law.p_u.p, ("U",)),
        (law.p_x1_given_uapa.p, ("U", "Ap", "A", "X1")),
        (law.p_x2_given_ubpb.p, ("U", "Bp", "B", "X2")),
        (law.channel.p, ("X1", "X2", "Y")),
    ]
    sizes = {**s, **{tilde[k]: v for k, v in s.items()}}
    return JointTable([(n, sizes[n]) for n in out], _product(factors, out))


def _marginal_array(joint: JointTable, keep: Sequence[str]) -> np.ndarray:
    axes = [joint.axis(n) for n in keep]
    if len(set(axes)) != len(axes):
        raise MacfbError(f"repeated variable in {tuple(keep)}")
    drop = tuple(i for i in range(joint.p.ndim) if i not in axes)
    m = joint.p.sum(axis=drop) if drop else joint.p
    # remaining axes are in table order; permute to the requested order
    remaining = sorted(axes)
    return np.transpose(m, [remaining.index(a) for a in axes])


def marginalize(joint: JointTable, keep_vars) -> JointTable:
    """Marginal table over `keep_vars`, with axes in the order given."""
    keep = _as_names(keep_vars)
    m = _marginal_array(joint, keep)
    return JointTable([joint.variables[joint.axis(n)] for n in keep], m)


def _groups(joint, *groups):
    names = [_as_names(g) for g in groups]
    flat = [n for g in names for n in g]
    for n in flat:
        joint.axis(n)
    if len(set(flat)) != len(flat):
        raise MacfbError(f"variable groups {tuple(names)} are not disjoint")
    return names


def cond_mutual_info(joint: JointTable, x_vars, y_vars, z_vars=(), unit="nats") -> float:
    """Conditional mutual information ``I(X; Y | Z)``.

    Evaluated as the direct sum of ``p(x,y,z) log[p(x,y,z) p(z) / (p(x,z) p(y,z))]``
    over cells with mass above :data:`ZERO_MASS`.

    Parameters
    ----------
    joint : JointTable
    x_vars, y_vars, z_vars : str or sequence of str
        Disjoint variable groups; `z_vars` may be empty.
    unit : {'nats', 'bits'}
    """
    x, y, z = _groups(joint, x_vars, y_vars, z_vars)
    scale = unit_scale(unit)
    if not x or not y:
        return 0.0
    m = _marginal_array(joint, x + y + z)
    nx = math.prod(joint.size_of(n) for n in x)
    ny = math.prod(joint.size_of(n) for n in y)
    m = m.reshape(nx, ny, -1)
    pxz = m.sum(axis=1)
    pyz = m.sum(axis=0)
    pz = pxz.sum(axis=0)
    mask = m > ZERO_MASS
    num = m * pz[None, None, :]
    den = pxz[:, None, :] * pyz[None, :, :]
    terms = np.zeros_like(m)
    terms[mask] = m[mask] * np.log(num[mask] / den[mask])
    return float(terms.sum()) * scale


def cond_entropy(joint: JointTable, y_vars, z_vars=(), unit="nats") -> float:
    """Conditional entropy ``H(Y | Z)``."""
    y, z = _groups(joint, y_vars, z_vars)
    scale = unit_scale(unit)
    if not y:
        return 0.0
    m = _marginal_array(joint, y + z)
    ny = math.prod(joint.size_of(n) for n in y)
    m = m.reshape(ny, -1)
    pz = m.sum(axis=0)
    mask = m > ZERO_MASS
    ratio = np.ones_like(m)
    ratio[mask] = m[mask] / np.broadcast_to(pz, m.shape)[mask]
    return float(-(m[mask] * np.log(ratio[mask])).sum()) * scale


def entropy(joint: JointTable, vars_=None, unit="nats") -> float:
    """Entropy of the variables `vars_` (all variables when omitted)."""
    return cond_entropy(joint, joint.names if vars_ is None else vars_, (), unit)


def binary_entropy(x, unit="nats"):
    """Binary entropy ``-x ln x - (1-x) ln(1-x)``, with ``h(0) = h(1) = 0``.

    Accepts scalars or arrays.  Values outside ``[0, 1]`` by more than
    1e-12 raise :class:`MacfbError`.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < -1e-12) or np.any(arr > 1 + 1e-12) or np.any(~np.isfinite(arr)):
        raise MacfbError(f"binary entropy argument outside [0, 1]: {x!r}")
    arr = np.clip(arr, 0.0, 1.0)
    out = np.zeros_like(arr)
    inner = (arr > 0) & (arr < 1)
    p = arr[inner]
    out[inner] = -p * np.log(p) - (1 - p) * np.log1p(-p)
    out = out * unit_scale(unit)
    return float(out) if out.ndim == 0 else out


def deterministic_cond(given: Iterable, target, fn) -> CondTable:
    """Conditional table putting all mass on ``fn(*given_values)``."""
    given = _as_specs(given)
    target = _as_specs([target])[0]
    p = np.zeros(tuple(v.size for v in given) + (target.size,))
    for idx in np.ndindex(*p.shape[:-1]):
        p[idx + (int(fn(*idx)),)] = 1.0
    return CondTable(given, [target], p)
