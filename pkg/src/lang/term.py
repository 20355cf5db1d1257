"""
Plain λ-terms with de Bruijn indices.

Terms are immutable dataclasses, so they hash and compare structurally and can
be shared between threads. Every operation here is a pure function; the e-graph
code treats this module as ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

from src.errors import UnderflowError

WILDCARD = "_"


@dataclass(frozen=True)
class Bvar:
    index: int
    tag: Optional[str] = None


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Lam:
    binder_type: "Term"
    body: "Term"


@dataclass(frozen=True)
class All:
    binder_type: "Term"
    body: "Term"


@dataclass(frozen=True)
class Let:
    binder_type: "Term"
    value: "Term"
    body: "Term"


@dataclass(frozen=True)
class Sym:
    name: str

    def __post_init__(self):
        if self.name == "eps":
            raise ValueError("'eps' is the erased proof term, not a symbol name")


@dataclass(frozen=True)
class Lit:
    value: int


@dataclass(frozen=True)
class Eps:
    pass


@dataclass(frozen=True)
class Meta:
    """A pattern metavariable ``?name``. Only legal inside patterns."""
    name: str


Term = Union[Bvar, App, Lam, All, Let, Sym, Lit, Eps]
Pattern = Union[Term, Meta]

EPS = Eps()


# --- Structure ---

def children(t):
    """Children in position order: App fn=0 arg=1; Lam/All type=0 body=1; Let type=0 value=1 body=2."""
    if isinstance(t, App):
        return (t.fn, t.arg)
    if isinstance(t, (Lam, All)):
        return (t.binder_type, t.body)
    if isinstance(t, Let):
        return (t.binder_type, t.value, t.body)
    return ()


def binders_at(t, i):
    """Number of binders entered when stepping from ``t`` into child ``i``."""
    if isinstance(t, (Lam, All)) and i == 1:
        return 1
    if isinstance(t, Let) and i == 2:
        return 1
    return 0


def with_children(t, kids):
    if isinstance(t, App):
        return App(kids[0], kids[1])
    if isinstance(t, Lam):
        return Lam(kids[0], kids[1])
    if isinstance(t, All):
        return All(kids[0], kids[1])
    if isinstance(t, Let):
        return Let(kids[0], kids[1], kids[2])
    return t


def size(t):
    return 1 + sum(size(c) for c in children(t))


def map_vars(t, fn: Callable[[Bvar, int], object], depth=0):
    """Rebuilds ``t`` with every Bvar replaced by ``fn(bvar, depth)``."""
    if isinstance(t, Bvar):
        return fn(t, depth)
    kids = children(t)
    if not kids:
        return t
    return with_children(t, [map_vars(c, fn, depth + binders_at(t, i)) for i, c in enumerate(kids)])


def has_meta(t):
    return isinstance(t, Meta) or any(has_meta(c) for c in children(t))


def has_let(t):
    return isinstance(t, Let) or any(has_let(c) for c in children(t))


def head_symbol(t):
    """Leftmost symbol of the application spine, or None."""
    while isinstance(t, App):
        t = t.fn
    return t.name if isinstance(t, Sym) else None


# --- Free variables and shifting ---

def fvars_term(t, depth=0):
    if isinstance(t, Bvar):
        return {t.index - depth} if t.index >= depth else set()
    out = set()
    for i, c in enumerate(children(t)):
        out |= fvars_term(c, depth + binders_at(t, i))
    return out


def shift_term(t, offset, cutoff=0):
    if offset == 0:
        return t

    def shift_var(v, depth):
        if v.index - depth < cutoff:
            return v
        if v.index + offset < 0:
            raise UnderflowError(f"Shifting {v.index} by {offset} underflows")
        return Bvar(v.index + offset, v.tag)

    return map_vars(t, shift_var)


def instantiate(body, value):
    """body[0̂ ↦ value]: the binder above ``body`` disappears."""
    def replace(v, depth):
        if v.index == depth:
            return shift_term(value, depth, 0)
        if v.index > depth:
            return Bvar(v.index - 1, v.tag)
        return v

    return map_vars(body, replace)


# --- Reductions ---

def beta_step(t) -> Optional[Term]:
    if isinstance(t, App) and isinstance(t.fn, Lam):
        return instantiate(t.fn.body, t.arg)
    return None


def is_var_zero(t):
    return isinstance(t, Bvar) and t.index == 0


def eta_step(t) -> Optional[Term]:
    if isinstance(t, Lam) and isinstance(t.body, App) and is_var_zero(t.body.arg):
        f = t.body.fn
        if 0 not in fvars_term(f):
            return shift_term(f, -1, 0)
    return None


def zeta_reduce(t):
    kids = children(t)
    if not kids:
        return t
    kids = [zeta_reduce(c) for c in kids]
    if isinstance(t, Let):
        return instantiate(kids[2], kids[1])
    return with_children(t, kids)


def erase_proofs(t, proof_heads):
    if not proof_heads:
        return t
    if head_symbol(t) in proof_heads:
        return EPS
    kids = children(t)
    if not kids:
        return t
    return with_children(t, [erase_proofs(c, proof_heads) for c in kids])


def annotate_bound_vars(t, _binders=()):
    """
    Tags every Bvar whose binder type is closed with that type's canonical print.
    ``_binders`` holds, innermost first, the tag for each enclosing binder (None = untagged).
    """
    from src.lang.syntax import print_term

    if isinstance(t, Bvar):
        if t.index < len(_binders) and _binders[t.index] is not None:
            return Bvar(t.index, _binders[t.index])
        return t
    kids = children(t)
    if not kids:
        return t
    out = []
    for i, c in enumerate(kids):
        if binders_at(t, i):
            ty = t.binder_type
            closed = not fvars_term(ty) and ty != Sym(WILDCARD) and not has_meta(ty)
            tag = print_term(ty) if closed else None
            out.append(annotate_bound_vars(c, (tag,) + tuple(_binders)))
        else:
            out.append(annotate_bound_vars(c, _binders))
    return with_children(t, out)


def normalize(t, proof_heads=frozenset(), annotate=False):
    """The encoding pipeline: ζ-reduce, erase proofs, optionally tag bound variables."""
    t = erase_proofs(zeta_reduce(t), proof_heads)
    return annotate_bound_vars(t) if annotate else t


# --- Positions ---

def subterm_at(t, pos):
    for i in pos:
        kids = children(t)
        if i < 0 or i >= len(kids):
            return None
        t = kids[i]
    return t


def replace_at(t, pos, new):
    if not pos:
        return new
    kids = list(children(t))
    i = pos[0]
    kids[i] = replace_at(kids[i], pos[1:], new)
    return with_children(t, kids)


def positions(t, prefix=()):
    """All positions of ``t`` in preorder."""
    yield prefix
    for i, c in enumerate(children(t)):
        yield from positions(c, prefix + (i,))
