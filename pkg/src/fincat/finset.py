"""Finite sets, maps between them, and brute-force (co)limit machinery.

Atoms are integers or tokens.  Everything here enumerates in a canonical
sorted order so repeated runs produce identical output: integers sort
before tokens, map tables are keyed by sorted domain atoms, limit elements
are printable tuple encodings, and colimit classes are named after their
least tagged atom.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping

DEFAULT_ENUM_CAP = 10**6

# characters that would make the textual map encoding ambiguous
_RESERVED = ("{", "}", ",", "->")


class CapExceededError(Exception):
    """An enumeration would exceed the configured cap."""


class EncodingError(Exception):
    """An atom cannot be embedded in the textual encoding."""


def atom_key(a):
    """Sort key placing integers before tokens."""
    if isinstance(a, int) and not isinstance(a, bool):
        return (0, a)
    return (1, str(a))


class FinSetObj:
    """Immutable finite set of atoms."""

    __slots__ = ("atoms",)

    def __init__(self, atoms: Iterable = ()):
        object.__setattr__(self, "atoms", tuple(sorted(set(atoms), key=atom_key)))

    def __contains__(self, a):
        return a in self.atoms

    def __iter__(self):
        return iter(self.atoms)

    def __len__(self):
        return len(self.atoms)

    def __eq__(self, other):
        return isinstance(other, FinSetObj) and self.atoms == other.atoms

    def __hash__(self):
        return hash(self.atoms)

    def __repr__(self):
        return "{" + ",".join(str(a) for a in self.atoms) + "}"

    def __setattr__(self, *_):
        raise AttributeError("FinSetObj is immutable")


class FinSetMap:
    """Total map between finite sets; equality is extensional."""

    __slots__ = ("dom", "cod", "table")

    def __init__(self, dom: FinSetObj, cod: FinSetObj, table: Mapping):
        table = dict(table)
        missing = [a for a in dom if a not in table]
        if missing:
            raise ValueError(f"map not total: missing {missing[0]!r}")
        extra = [a for a in table if a not in dom]
        if extra:
            raise ValueError(f"map defined outside its domain at {extra[0]!r}")
        bad = [a for a, b in table.items() if b not in cod]
        if bad:
            raise ValueError(f"map value {table[bad[0]]!r} not in codomain")
        object.__setattr__(self, "dom", dom)
        object.__setattr__(self, "cod", cod)
        object.__setattr__(self, "table", table)

    def __call__(self, a):
        return self.table[a]

    def _key(self):
        return (self.dom.atoms, self.cod.atoms, tuple(sorted(self.table.items(), key=lambda kv: atom_key(kv[0]))))

    def __eq__(self, other):
        return isinstance(other, FinSetMap) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return encode_map(self, strict=False)

    def __setattr__(self, *_):
        raise AttributeError("FinSetMap is immutable")


def identity_map(x: FinSetObj) -> FinSetMap:
    return FinSetMap(x, x, {a: a for a in x})


def compose_maps(g: FinSetMap, f: FinSetMap) -> FinSetMap:
    """g after f."""
    if f.cod != g.dom:
        raise ValueError("maps not composable")
    return FinSetMap(f.dom, g.cod, {a: g.table[f.table[a]] for a in f.dom})


def encode_map(m: FinSetMap, strict: bool = True) -> str:
    """Canonical one-line encoding "{a->x,b->y}" keyed by sorted domain."""
    if strict:
        for a in list(m.dom) + list(m.cod):
            s = str(a)
            if any(r in s for r in _RESERVED):
                raise EncodingError(f"atom {a!r} contains reserved characters")
    items = sorted(m.table.items(), key=lambda kv: atom_key(kv[0]))
    return "{" + ",".join(f"{a}->{b}" for a, b in items) + "}"


def decode_map(text: str, dom: FinSetObj, cod: FinSetObj) -> FinSetMap:
    """Inverse of encode_map given the intended dom and cod."""
    body = text.strip()
    if not (body.startswith("{") and body.endswith("}")):
        raise EncodingError(f"not a map encoding: {text!r}")
    body = body[1:-1].strip()
    table = {}
    if body:
        for entry in body.split(","):
            if "->" not in entry:
                raise EncodingError(f"bad map entry {entry!r}")
            a, b = entry.split("->", 1)
            table[_match_atom(a.strip(), dom)] = _match_atom(b.strip(), cod)
    return FinSetMap(dom, cod, table)


def _match_atom(token: str, among: FinSetObj):
    for a in among:
        if str(a) == token:
            return a
    raise EncodingError(f"atom {token!r} not in {among!r}")


def tuple_atom(assignment: Mapping) -> str:
    """Canonical element of a limit: "(j1=x, j2=y)" over sorted indices."""
    items = sorted(assignment.items(), key=lambda kv: str(kv[0]))
    return "(" + ", ".join(f"{j}={x}" for j, x in items) + ")"


def class_atom(j, x) -> str:
    """Canonical tagged atom of a disjoint union."""
    return f"[{j}:{x}]"


def enumerate_maps(x: FinSetObj, y: FinSetObj, cap: int = DEFAULT_ENUM_CAP) -> list:
    """All maps x -> y in lexicographic order over the sorted domain."""
    count = len(y) ** len(x)
    if count > cap:
        raise CapExceededError(f"{count} maps exceed cap {cap}")
    dom_atoms = list(x)
    out = []
    for values in itertools.product(list(y), repeat=len(dom_atoms)):
        out.append(FinSetMap(x, y, dict(zip(dom_atoms, values))))
    return out


def limit_finset(d, cap: int = DEFAULT_ENUM_CAP):
    """Limit of a finite-set valued diagram: compatible families.

    Returns (carrier, projections); the carrier's atoms are the canonical
    tuple encodings and projections is a dict from diagram objects to maps.
    The empty diagram has the one-point carrier {"()"}.
    """
    from .core import FinSetCat

    if not isinstance(d.target, FinSetCat):
        raise ValueError("limit_finset needs a finite-set valued diagram")
    shape = d.source
    objs = sorted(shape.objects)
    sizes = 1
    for j in objs:
        sizes *= max(len(d.object_map[j]), 1)
    if sizes > cap:
        raise CapExceededError(f"{sizes} candidate families exceed cap {cap}")
    families = []
    pools = [list(d.object_map[j]) for j in objs]
    if any(len(d.object_map[j]) == 0 for j in objs):
        pools = None  # some component empty: no families
    if pools is not None:
        for combo in itertools.product(*pools):
            fam = dict(zip(objs, combo))
            ok = True
            for f in shape.sorted_morphisms():
                j, j2 = shape.dom(f), shape.cod(f)
                if d.morphism_map[f].table[fam[j]] != fam[j2]:
                    ok = False
                    break
            if ok:
                families.append(fam)
    carrier = FinSetObj(tuple_atom(fam) for fam in families)
    projections = {}
    for j in objs:
        projections[j] = FinSetMap(
            carrier, d.object_map[j], {tuple_atom(fam): fam[j] for fam in families}
        )
    return carrier, projections


def colimit_finset(d):
    """Colimit of a finite-set valued diagram: tagged union modulo the
    relation generated by the diagram's maps.

    Returns (carrier, injections); class representatives are the least
    tagged atom, written "[j:x]".
    """
    from .core import FinSetCat

    if not isinstance(d.target, FinSetCat):
        raise ValueError("colimit_finset needs a finite-set valued diagram")
    shape = d.source
    tagged = [(j, x) for j in sorted(shape.objects) for x in d.object_map[j]]
    parent = {t: t for t in tagged}

    def find(t):
        while parent[t] != t:
            parent[t] = parent[parent[t]]
            t = parent[t]
        return t

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for f in shape.sorted_morphisms():
        j, j2 = shape.dom(f), shape.cod(f)
        for x in d.object_map[j]:
            union((j, x), (j2, d.morphism_map[f].table[x]))

    classes = {}
    for t in tagged:
        classes.setdefault(find(t), []).append(t)
    rep_atom = {}
    for root, members in classes.items():
        least = min(members, key=lambda t: (str(t[0]), atom_key(t[1])))
        for m in members:
            rep_atom[m] = class_atom(*least)
    carrier = FinSetObj(set(rep_atom.values()))
    injections = {}
    for j in sorted(shape.objects):
        injections[j] = FinSetMap(
            d.object_map[j], carrier, {x: rep_atom[(j, x)] for x in d.object_map[j]}
        )
    return carrier, injections


def enumerate_nattrans_finset(f, g, cap: int = DEFAULT_ENUM_CAP) -> list:
    """All natural transformations between finite-set valued functors.

    Components are assigned object by object in sorted order with early
    pruning: a partial assignment is dropped as soon as some naturality
    square with both endpoints assigned fails.  Output order is the
    lexicographic order of the component choices.
    """
    from .core import FinSetCat, NatTransVal

    if f.source != g.source:
        raise ValueError("functors have different sources")
    if not (isinstance(f.target, FinSetCat) and isinstance(g.target, FinSetCat)):
        raise ValueError("both functors must be finite-set valued")
    shape = f.source
    objs = sorted(shape.objects)
    candidates = {}
    total = 1
    for c in objs:
        candidates[c] = enumerate_maps(f.object_map[c], g.object_map[c], cap)
        total *= max(len(candidates[c]), 1)
        if total > cap:
            raise CapExceededError(f"natural transformation search space exceeds cap {cap}")

    mors_between = {}
    for h in shape.sorted_morphisms():
        mors_between.setdefault((shape.dom(h), shape.cod(h)), []).append(h)

    out = []
    assignment = {}

    def squares_ok(c):
        for i in objs[: objs.index(c) + 1]:
            for pair in ((i, c), (c, i)):
                for h in mors_between.get(pair, ()):
                    dm, cm = pair
                    if dm not in assignment or cm not in assignment:
                        continue
                    lhs = compose_maps(g.morphism_map[h], assignment[dm])
                    rhs = compose_maps(assignment[cm], f.morphism_map[h])
                    if lhs != rhs:
                        return False
        return True

    def extend(i):
        if i == len(objs):
            out.append(NatTransVal(f, g, dict(assignment)))
            return
        c = objs[i]
        for comp in candidates[c]:
            assignment[c] = comp
            if squares_ok(c):
                extend(i + 1)
            del assignment[c]

    extend(0)
    return out


def nattrans_key(t) -> tuple:
    """Canonical sort/identity key for a finite-set valued transformation."""
    return tuple(
        (c, encode_map(t.components[c], strict=False)) for c in sorted(t.components)
    )
