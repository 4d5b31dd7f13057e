"""Compile abstract models into flat concrete models.

Each abstract variable is refined through its representation tree into a
block of scalar variables laid out in the global flattening order, together
with structural constraints that cut the block down to the image of ``phi``.
Symmetry-breaking constraints are then generated either by the delayed
method (one lex constraint per symmetry, read straight off the block) or by
the classical method, which builds an exact re-sorted image of the block in
auxiliary variables and channels it to the original.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from . import concrete as C
from .errors import (
    DuplicateName, NotTwoDimensional, UnknownTag, UnsupportedConstraint,
    UnsupportedReprAtConstraintLevel,
)
from .groups import SymCombo, generators
from .reprs import (
    BoolEnc, Encoder, FunctionAsMatrix, FunctionAsMatrixDummy, IntEnc, MatrixEnc, MSetExplicitWithRepetition,
    MSetOccurrence, RelationAsMatrix, ReprTree, SetExplicit, SetOccurrence, TupleEnc,
    UnnamedEnc, complete_repr, encoder,
)
from .types import BoolT, IntT, MatrixT, SetT, Size, TypeExpr, UnnamedT, tags_of

PRIMARY = "primary"
CHANNEL = "channel"      # auxiliaries introduced by problem constraints
SYMBREAK = "symbreak"    # auxiliaries introduced by symmetry breaking


# ---------------------------------------------------------------------------
# Abstract models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LineSum:
    """Every line of a 2-D Boolean variable sums to ``value``.

    ``axis`` is ``"rows"`` (first index) or ``"cols"`` (second index).
    """

    var: str
    axis: str
    value: Union[int, Fraction]


@dataclass(frozen=True)
class LineDot:
    """Every pair of distinct lines of a 2-D Boolean variable has dot product ``value``."""

    var: str
    axis: str
    value: Union[int, Fraction]


@dataclass
class AbstractModel:
    unnamed: dict = field(default_factory=dict)       # tag -> size, declaration order
    variables: list = field(default_factory=list)     # (name, TypeExpr)
    constraints: list = field(default_factory=list)
    family: Optional[tuple] = None                    # ("bibd", v, b, k, form)

    def add_unnamed(self, tag: str, size: int) -> UnnamedT:
        if tag in self.unnamed or tag in self.var_names():
            raise DuplicateName(f"{tag} is declared twice")
        self.unnamed[tag] = size
        return UnnamedT(tag, size)

    def add_variable(self, name: str, t: TypeExpr) -> None:
        if name in self.var_names() or name in self.unnamed:
            raise DuplicateName(f"{name} is declared twice")
        for tag, size in tags_of(t).items():
            if self.unnamed.get(tag) != size:
                raise UnknownTag(f"unnamed type {tag} is not declared")
        self.variables.append((name, t))

    def var_names(self) -> list:
        return [n for n, _ in self.variables]

    def var_type(self, name: str) -> TypeExpr:
        for n, t in self.variables:
            if n == name:
                return t
        raise KeyError(name)

    def tags(self) -> list:
        return list(self.unnamed.items())


def _params(v: int, b: int, k: int):
    r = Fraction(b * k, v)
    lam = r * (k - 1) / (v - 1) if v > 1 else Fraction(0)
    return tuple(int(x) if x.denominator == 1 else x for x in (r, lam))


def bibd_params(v: int, b: int, k: int) -> dict:
    """Replication ``r = bk/v`` and pair count ``lambda = r(k-1)/(v-1)``.

    Non-integral values are kept as fractions; such instances have no solutions.
    """
    r, lam = _params(v, b, k)
    return {"v": v, "b": b, "k": k, "r": r, "lambda": lam}


def bibd_model(v: int, b: int, k: int, form: str) -> AbstractModel:
    """One of the three BIBD formulations: ``high``, ``low`` or ``matrix``."""
    if min(v, b, k) < 1 or k > v:
        raise ValueError(f"bad BIBD parameters {v}-{b}-{k}")
    r, lam = _params(v, b, k)
    m = AbstractModel(family=("bibd", v, b, k, form))
    if form == "high":
        obj = m.add_unnamed("Obj", v)
        m.add_variable("bibd", SetT(Size(b), SetT(Size(k), obj)))
        m.constraints += [LineSum("bibd", "cols", r), LineDot("bibd", "cols", lam)]
    elif form in ("low", "matrix"):
        if form == "low":
            index = (m.add_unnamed("Obj", v), m.add_unnamed("Blocks", b))
        else:
            index = (IntT(1, v), IntT(1, b))
        m.add_variable("m", MatrixT(index, BoolT()))
        m.constraints += [LineSum("m", "cols", k), LineSum("m", "rows", r),
                          LineDot("m", "rows", lam)]
    else:
        raise ValueError(f"unknown BIBD model {form!r}")
    return m


# ---------------------------------------------------------------------------
# Concrete models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    id: int
    name: str
    lo: int
    hi: int
    role: str = PRIMARY

    def domain_text(self) -> str:
        return "bool" if (self.lo, self.hi) == (0, 1) else f"{self.lo}..{self.hi}"


@dataclass(frozen=True)
class View:
    """A scalar read through an injective entry map, or a constant.

    ``images[v - lo]`` is the value seen when the variable takes ``v``.
    """

    var: Optional[int]
    images: Optional[tuple] = None
    const: Optional[int] = None

    @classmethod
    def constant(cls, c: int) -> "View":
        return cls(None, None, c)

    def value(self, assignment, lo: int) -> int:
        if self.var is None:
            return self.const
        v = assignment[self.var]
        return v if self.images is None else self.images[v - lo]

    def compose(self, images: Optional[tuple], lo: int) -> "View":
        """The view ``images`` applied after this one."""
        if images is None:
            return self
        if self.var is None:
            return View.constant(images[self.const - lo])
        if self.images is None:
            return View(self.var, images)
        composed = tuple(images[x - lo] for x in self.images)
        if composed == tuple(range(lo, lo + len(composed))):
            return View(self.var)
        return View(self.var, composed)

    def text(self) -> str:
        if self.var is None:
            return str(self.const)
        if self.images is None:
            return f"x{self.var}"
        return f"x{self.var}@[{','.join(map(str, self.images))}]"


@dataclass(frozen=True)
class LexLeq:
    lhs: tuple
    rhs: tuple
    strict: bool = False

    def __post_init__(self):
        if len(self.lhs) != len(self.rhs):
            raise ValueError("lex constraint sides differ in length")

    def vars(self):
        return {w.var for w in self.lhs + self.rhs if w.var is not None}

    def holds(self, a, model) -> bool:
        lo = model.lo_of
        x = tuple(w.value(a, lo(w)) for w in self.lhs)
        y = tuple(w.value(a, lo(w)) for w in self.rhs)
        return x < y if self.strict else x <= y

    def text(self) -> str:
        op = "<lex" if self.strict else "<=lex"
        return (f"lex [{' '.join(w.text() for w in self.lhs)}] {op} "
                f"[{' '.join(w.text() for w in self.rhs)}]")


@dataclass(frozen=True)
class LinearEq:
    terms: tuple          # (coefficient, var id)
    rhs: Union[int, Fraction]

    def vars(self):
        return {v for _, v in self.terms}

    def holds(self, a, model) -> bool:
        return sum(c * a[v] for c, v in self.terms) == self.rhs

    def text(self) -> str:
        return f"sum [{_terms_text(self.terms)}] = {self.rhs}"


@dataclass(frozen=True)
class LinearLeq:
    terms: tuple
    rhs: Union[int, Fraction]

    def vars(self):
        return {v for _, v in self.terms}

    def holds(self, a, model) -> bool:
        return sum(c * a[v] for c, v in self.terms) <= self.rhs

    def text(self) -> str:
        return f"sum [{_terms_text(self.terms)}] <= {self.rhs}"


def _terms_text(terms) -> str:
    return " ".join(f"x{v}" if c == 1 else f"{c}*x{v}" for c, v in terms)


@dataclass(frozen=True)
class AllDifferent:
    vars_: tuple

    def vars(self):
        return set(self.vars_)

    def holds(self, a, model) -> bool:
        vals = [a[v] for v in self.vars_]
        return len(set(vals)) == len(vals)

    def text(self) -> str:
        return "alldiff [" + " ".join(f"x{v}" for v in self.vars_) + "]"


@dataclass(frozen=True)
class IndexedEq:
    """``rows[index - 1][j] == target[j]`` for every column ``j``."""

    rows: tuple
    index: int
    target: tuple

    def vars(self):
        out = {v for row in self.rows for v in row} | {self.index}
        return out | {w.var for w in self.target if w.var is not None}

    def holds(self, a, model) -> bool:
        row = self.rows[a[self.index] - 1]
        return all(a[v] == w.value(a, model.lo_of(w)) for v, w in zip(row, self.target))

    def text(self) -> str:
        rows = " | ".join(" ".join(f"x{v}" for v in r) for r in self.rows)
        return (f"element [{rows}] [x{self.index}] = "
                f"[{' '.join(w.text() for w in self.target)}]")


@dataclass(frozen=True)
class VectorOrdered:
    """Consecutive rows are in (strictly) ascending lex order."""

    rows: tuple
    strict: bool

    def vars(self):
        return {v for row in self.rows for v in row}

    def holds(self, a, model) -> bool:
        vals = [tuple(a[v] for v in row) for row in self.rows]
        if self.strict:
            return all(p < q for p, q in zip(vals, vals[1:]))
        return all(p <= q for p, q in zip(vals, vals[1:]))

    def text(self) -> str:
        rows = " | ".join(" ".join(f"x{v}" for v in r) for r in self.rows)
        return f"{'increasing' if self.strict else 'nondecreasing'} [{rows}]"


@dataclass(frozen=True)
class ConjunctionVar:
    """``z <-> (x and y)`` over Booleans."""

    z: int
    x: int
    y: int

    def vars(self):
        return {self.z, self.x, self.y}

    def holds(self, a, model) -> bool:
        return a[self.z] == (a[self.x] & a[self.y])

    def text(self) -> str:
        return f"x{self.z} <-> x{self.x} /\\ x{self.y}"


@dataclass
class Block:
    """The scalar variables refining one abstract variable."""

    name: str
    type: TypeExpr
    repr: ReprTree
    ids: tuple

    @property
    def enc(self) -> Encoder:
        return encoder(self.type, self.repr)


@dataclass
class ConcreteModel:
    vars: list = field(default_factory=list)
    blocks: list = field(default_factory=list)
    structural: list = field(default_factory=list)
    problem: list = field(default_factory=list)
    symbreak: list = field(default_factory=list)
    tags: list = field(default_factory=list)

    def new_var(self, name: str, lo: int, hi: int, role: str = PRIMARY) -> int:
        v = Var(len(self.vars), name, lo, hi, role)
        self.vars.append(v)
        return v.id

    def lo_of(self, view: View) -> int:
        return self.vars[view.var].lo if view.var is not None else 0

    @property
    def constraints(self) -> list:
        return self.structural + self.problem + self.symbreak

    def primary_ids(self) -> list:
        return [v.id for v in self.vars if v.role == PRIMARY]

    def block(self, name: str) -> Block:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    @property
    def num_vars(self) -> int:
        return len(self.vars)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    @property
    def num_aux_vars(self) -> int:
        return sum(1 for v in self.vars if v.role == SYMBREAK)

    def stats(self) -> dict:
        return {"num_vars": self.num_vars, "num_constraints": self.num_constraints,
                "num_aux_vars": self.num_aux_vars}

    def holds(self, assignment, which: Optional[Sequence] = None) -> bool:
        """Evaluate constraints on a full assignment (a sequence indexed by id)."""
        cons = self.constraints if which is None else which
        return all(c.holds(assignment, self) for c in cons)

    def extend_channels(self, primary_values: Sequence[int]) -> list:
        """Full assignment from primary values when only channel auxiliaries
        exist; symmetry-breaking auxiliaries are left as ``None``."""
        a = [None] * len(self.vars)
        for vid, x in zip(self.primary_ids(), primary_values):
            a[vid] = x
        for c in self.problem:
            if isinstance(c, ConjunctionVar):
                a[c.z] = a[c.x] & a[c.y]
        return a

    def dump(self) -> str:
        """Canonical text form, one declaration or constraint per line."""
        lines = []
        for v in self.vars:
            lines.append(f"var x{v.id} {v.name} {v.domain_text()} {v.role}")
        for b in self.blocks:
            lines.append(f"block {b.name} : {b.type} as {b.repr} = "
                         f"x{b.ids[0]}..x{b.ids[-1]}" if b.ids else f"block {b.name} empty")
        for kind, cons in (("struct", self.structural), ("problem", self.problem),
                           ("symbreak", self.symbreak)):
            lines.extend(f"{kind} {c.text()}" for c in cons)
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Refinement of variables
# ---------------------------------------------------------------------------

_CONSTRAINT_LEVEL = (BoolEnc, IntEnc, UnnamedEnc, TupleEnc, MatrixEnc, SetOccurrence,
                     MSetOccurrence, SetExplicit, MSetExplicitWithRepetition,
                     FunctionAsMatrix, FunctionAsMatrixDummy, RelationAsMatrix)


def _split(ids: Sequence, w: int) -> list:
    return [tuple(ids[i:i + w]) for i in range(0, len(ids), w)] if w else []


def structural_constraints(enc: Encoder, ids: Sequence[int]) -> list:
    """Constraints whose solutions over ``ids`` are exactly the image of ``phi``."""
    if not isinstance(enc, _CONSTRAINT_LEVEL):
        raise UnsupportedReprAtConstraintLevel(
            f"{enc.name} for {enc.t} is only supported at value level")
    ids = tuple(ids)
    if isinstance(enc, (BoolEnc, IntEnc, UnnamedEnc, RelationAsMatrix)):
        return []
    if isinstance(enc, TupleEnc):
        out = []
        for ch, (a, b) in zip(enc.children, zip(enc._cuts, enc._cuts[1:])):
            out += structural_constraints(ch, ids[a:b])
        return out
    if isinstance(enc, FunctionAsMatrixDummy):
        if not enc.t.total:
            return []
        return [LinearLeq(((1, v),), enc.dummy - 1) for v in ids]
    if isinstance(enc, (SetOccurrence, MSetOccurrence)):
        size = enc.t.size
        terms = tuple((1, v) for v in ids)
        if size is None:
            return []
        return [LinearEq(terms, size.n) if size.exact else LinearLeq(terms, size.n)]
    blocks = _split(ids, enc.child.width)
    out = []
    for b in blocks:
        out += structural_constraints(enc.child, b)
    if isinstance(enc, SetExplicit) and len(blocks) > 1:
        out.append(VectorOrdered(tuple(blocks), True))
    elif isinstance(enc, MSetExplicitWithRepetition):
        if len(blocks) > 1:
            out.append(VectorOrdered(tuple(blocks), False))
        m = enc.t.occ_bound
        for i in range(len(blocks) - m):
            out.append(LexLeq(_views(blocks[i]), _views(blocks[i + m]), strict=True))
    return out


def _views(ids) -> tuple:
    return tuple(View(v) for v in ids)


def refine_variable(model: ConcreteModel, name: str, t: TypeExpr, r=None,
                    structural: bool = True) -> Block:
    """Add the scalar block and structural constraints for one variable.

    With ``structural=False`` the block is laid out for any representation
    but left unconstrained; such models are only evaluated, never solved.
    """
    tree = complete_repr(t, r)
    enc = encoder(t, tree)
    ids = [model.new_var(n, s.lo, s.hi)
           for n, s in zip(C.names(enc.ctype, name), C.scalars(enc.ctype))]
    if structural:
        model.structural += structural_constraints(enc, ids)
    block = Block(name, t, tree, tuple(ids))
    model.blocks.append(block)
    return block


def combos_for(model: ConcreteModel, strategy: str, all_cap: Optional[int] = None) -> list:
    kw = {} if all_cap is None else {"all_cap": all_cap}
    return generators(model.tags, strategy, **kw)


# ---------------------------------------------------------------------------
# Symmetry breaking
# ---------------------------------------------------------------------------

def _lhs(model: ConcreteModel) -> tuple:
    return tuple(View(v) for b in model.blocks for v in b.ids)


def new_rhs(model: ConcreteModel, g: SymCombo) -> tuple:
    """Views of ``X'^g``: positions re-indexed through ``g^-1``, entries mapped by ``g``."""
    out = []
    for b in model.blocks:
        for src, images in C.transform_plan(b.enc.ctype, g):
            out.append(View(b.ids[src], images))
    return tuple(out)


def _trivial(lhs, rhs) -> bool:
    return lhs == rhs


def gen_symbreak_new(model: ConcreteModel, combos) -> list:
    """One lex constraint ``X' <=lex transform(g, X')`` per combo."""
    lhs = _lhs(model)
    out = []
    for g in combos:
        rhs = new_rhs(model, g)
        if not _trivial(lhs, rhs):
            out.append(LexLeq(lhs, rhs))
    return out


def _image(model: ConcreteModel, enc: Encoder, src: Sequence[View], g: SymCombo,
           out_cons: list, label: str) -> list:
    """Views holding exactly ``phi(x^g)`` given views of ``phi(x)``.

    Exact layouts just permute and relabel; sorted explicit layouts get an
    auxiliary block, a permutation and element channeling.
    """
    if enc.exact:
        lo = C.scalars(enc.ctype)
        return [src[s].compose(m, lo[s].lo) for s, m in C.transform_plan(enc.ctype, g)]
    if isinstance(enc, TupleEnc):
        out = []
        for i, (ch, (a, b)) in enumerate(zip(enc.children, zip(enc._cuts, enc._cuts[1:]))):
            out += _image(model, ch, src[a:b], g, out_cons, f"{label}.{i + 1}")
        return out
    if isinstance(enc, (MatrixEnc, FunctionAsMatrix)):
        w = enc.child.width
        cells = _split(list(src), w)
        out = []
        for i, s in enumerate(C.index_plan(enc.ctype.dims, g)):
            out += _image(model, enc.child, cells[s], g, out_cons, f"{label}[{i + 1}]")
        return out
    if isinstance(enc, (SetExplicit, MSetExplicitWithRepetition)):
        w = enc.child.width
        images = [_image(model, enc.child, cell, g, out_cons, f"{label}[{i + 1}]")
                  for i, cell in enumerate(_split(list(src), w))]
        # permutation first: completion search branches on it before the block
        perm = [model.new_var(f"{label}.p[{i + 1}]", 1, enc.k, SYMBREAK)
                for i in range(enc.k)]
        aux = [model.new_var(n, s.lo, s.hi, SYMBREAK)
               for n, s in zip(C.names(enc.ctype, label), C.scalars(enc.ctype))]
        out_cons += structural_constraints(enc, aux)
        rows = tuple(_split(aux, w))
        if enc.k > 1:
            out_cons.append(AllDifferent(tuple(perm)))
        for p, img in zip(perm, images):
            out_cons.append(IndexedEq(rows, p, tuple(img)))
        return [View(v) for v in aux]
    raise UnsupportedReprAtConstraintLevel(f"{enc.name} cannot be re-sorted at constraint level")


def gen_symbreak_old(model: ConcreteModel, combos) -> list:
    """Classical lex-leader ``X' <=lex phi(x^g)`` with the image built exactly.

    Where every layer is exact the image is the delayed transform itself, so
    the output coincides with :func:`gen_symbreak_new`.
    """
    lhs = _lhs(model)
    out = []
    for gi, g in enumerate(combos, 1):
        cons = []
        rhs = []
        for b in model.blocks:
            rhs += _image(model, b.enc, [View(v) for v in b.ids], g, cons, f"{b.name}#g{gi}")
        rhs = tuple(rhs)
        if _trivial(lhs, rhs) and not cons:
            continue
        out += cons
        out.append(LexLeq(lhs, rhs))
    return out


def gen_double_lex(model: ConcreteModel, block: Block) -> list:
    """Lex-ordered consecutive rows and consecutive columns of a 2-D matrix."""
    enc = block.enc
    if not (isinstance(enc, MatrixEnc) and len(enc.ctype.dims) == 2
            and isinstance(enc.child, (BoolEnc, IntEnc, UnnamedEnc))):
        raise NotTwoDimensional(f"double-lex needs a 2-D matrix of scalars, not {block.type}")
    nrows, ncols = (d.size for d in enc.ctype.dims)
    grid = _split(block.ids, ncols)
    out = [LexLeq(_views(grid[i]), _views(grid[i + 1])) for i in range(nrows - 1)]
    cols = list(zip(*grid))
    out += [LexLeq(_views(cols[j]), _views(cols[j + 1])) for j in range(ncols - 1)]
    return out


# ---------------------------------------------------------------------------
# Problem constraints
# ---------------------------------------------------------------------------

def _grid(block: Block) -> list:
    """Rows of Boolean variables for a variable that refines to a 2-D 0/1 grid."""
    enc = block.enc
    if isinstance(enc, MatrixEnc) and len(enc.ctype.dims) == 2 and isinstance(enc.child, BoolEnc):
        return _split(block.ids, enc.ctype.dims[1].size)
    if (isinstance(enc, (SetExplicit, MSetExplicitWithRepetition))
            and isinstance(enc.child, SetOccurrence) and len(enc.child.ctype.dims) == 1):
        return _split(block.ids, enc.child.width)
    raise UnsupportedConstraint(f"line constraints need a 2-D Boolean refinement, not {block.type}")


def _lines(block: Block, axis: str) -> list:
    grid = _grid(block)
    if axis == "rows":
        return grid
    if axis == "cols":
        return [tuple(c) for c in zip(*grid)]
    raise UnsupportedConstraint(f"unknown axis {axis!r}")


def refine_problem_constraints(model: ConcreteModel, abstract: AbstractModel) -> list:
    out = []
    for con in abstract.constraints:
        block = model.block(con.var)
        lines = _lines(block, con.axis)
        if isinstance(con, LineSum):
            out += [LinearEq(tuple((1, v) for v in line), con.value) for line in lines]
        elif isinstance(con, LineDot):
            for (i, a), (j, b) in itertools.combinations(enumerate(lines, 1), 2):
                zs = []
                for pos, (x, y) in enumerate(zip(a, b), 1):
                    z = model.new_var(f"{con.var}.{con.axis}{i}*{j}[{pos}]", 0, 1, CHANNEL)
                    out.append(ConjunctionVar(z, x, y))
                    zs.append(z)
                out.append(LinearEq(tuple((1, z) for z in zs), con.value))
        else:
            raise UnsupportedConstraint(f"unsupported constraint {con!r}")
    return out


# ---------------------------------------------------------------------------
# Whole-model compilation
# ---------------------------------------------------------------------------

METHODS = ("none", "new", "old", "doublelex")


def compile_model(abstract: AbstractModel, reprs: Optional[dict] = None,
                  method: str = "none", gens: str = "consecutive",
                  combos: Optional[list] = None, all_cap: Optional[int] = None,
                  structural: bool = True) -> ConcreteModel:
    """Refine every variable (declaration order), its problem constraints and
    the chosen symmetry breaking.  ``combos`` overrides the generator strategy."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    reprs = reprs or {}
    model = ConcreteModel(tags=abstract.tags())
    for name, t in abstract.variables:
        refine_variable(model, name, t, reprs.get(name), structural)
    model.problem = refine_problem_constraints(model, abstract)
    if method in ("new", "old"):
        if combos is None:
            combos = combos_for(model, gens, all_cap)
        gen = gen_symbreak_new if method == "new" else gen_symbreak_old
        model.symbreak = gen(model, combos)
    elif method == "doublelex":
        for b in model.blocks:
            model.symbreak += gen_double_lex(model, b)
    return model
