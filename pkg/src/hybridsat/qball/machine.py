"""Instruction-level reversible machine over bit-register and trit cells.

A tape is a flat list of slots.  A bit register occupies one slot holding an
integer modulo 2^width; a trit register occupies one slot per trit, each modulo
3.  Every instruction adds something to exactly one destination (or a field of
trits) that is a function of slots it does not write, so its inverse is the
matching subtraction.  Calls run a sub-program forwards or backwards under a
predicate that the callee never writes.

Programs are compiled to Python source on first use.  Compiled subroutines can
memoize on the values of every slot they touch; because a program is a
deterministic function of that footprint the cache is exact.
"""

from __future__ import annotations

import itertools
import math
import operator
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

# --------------------------------------------------------------------- layout


class LedgerError(RuntimeError):
    """An ancilla was left nonzero at a subroutine boundary."""


class AlphabetError(ValueError):
    pass


@dataclass(frozen=True)
class Register:
    name: str
    kind: str  # "bits" or "trits"
    start: int
    length: int  # slots: 1 for bits, number of trits for trits
    width: int  # bits per slot (trits count as 2 qubits each)

    @property
    def slot(self) -> int:
        if self.kind != "bits":
            raise TypeError(f"{self.name} is a trit register")
        return self.start

    @property
    def slots(self) -> range:
        return range(self.start, self.start + self.length)

    @property
    def qubits(self) -> int:
        return self.width if self.kind == "bits" else 2 * self.length

    def __getitem__(self, i) -> int:
        if self.kind != "trits":
            raise TypeError(f"{self.name} is a bit register")
        if not 0 <= i < self.length:
            raise IndexError(f"{self.name}[{i}]")
        return self.start + i


class Layout:
    def __init__(self):
        self.registers: dict[str, Register] = {}
        self.modulus: list[int] = []

    def bits(self, name: str, width: int) -> Register:
        if width < 1:
            raise ValueError(f"register {name} needs width >= 1")
        reg = Register(name, "bits", len(self.modulus), 1, width)
        self._add(reg, [1 << width])
        return reg

    def trits(self, name: str, length: int) -> Register:
        reg = Register(name, "trits", len(self.modulus), length, 2)
        self._add(reg, [3] * length)
        return reg

    def _add(self, reg, mods):
        if reg.name in self.registers:
            raise ValueError(f"duplicate register {reg.name}")
        self.registers[reg.name] = reg
        self.modulus.extend(mods)

    def __getitem__(self, name) -> Register:
        return self.registers[name]

    def __contains__(self, name) -> bool:
        return name in self.registers

    @property
    def num_slots(self) -> int:
        return len(self.modulus)

    @property
    def qubits(self) -> int:
        return sum(r.qubits for r in self.registers.values())

    def new_tape(self) -> list[int]:
        return [0] * self.num_slots

    def check_alphabet(self, tape: Sequence[int]) -> None:
        if len(tape) != self.num_slots:
            raise AlphabetError(f"tape has {len(tape)} slots, layout has {self.num_slots}")
        for i, (v, m) in enumerate(zip(tape, self.modulus)):
            if not 0 <= v < m:
                raise AlphabetError(f"slot {i} holds {v}, alphabet size {m}")

    def slot_name(self, s: int) -> str:
        for reg in self.registers.values():
            if reg.start <= s < reg.start + reg.length:
                return reg.name if reg.kind == "bits" else f"{reg.name}[{s - reg.start}]"
        raise IndexError(s)


# ----------------------------------------------------------------- predicates

_OPS = {"==": operator.eq, "!=": operator.ne, "<=": operator.le, ">=": operator.ge,
        "<": operator.lt, ">": operator.gt}


@dataclass(frozen=True)
class Lin:
    """sum(c * t[s]) op const."""

    terms: tuple[tuple[int, int], ...]
    op: str
    const: int

    def __post_init__(self):
        if self.op not in _OPS:
            raise ValueError(f"bad comparison {self.op}")

    @property
    def slots(self) -> set[int]:
        return {s for _, s in self.terms}

    def code(self) -> str:
        parts = []
        for c, s in self.terms:
            parts.append(f"t[{s}]" if c == 1 else f"{c}*t[{s}]")
        lhs = " + ".join(parts) if parts else "0"
        return f"({lhs} {self.op} {self.const})"

    def holds(self, t) -> bool:
        return _OPS[self.op](sum(c * t[s] for c, s in self.terms), self.const)


@dataclass(frozen=True)
class Bit:
    """Bit ``bit`` of t[slot] equals ``value``."""

    slot: int
    bit: int
    value: int

    @property
    def slots(self) -> set[int]:
        return {self.slot}

    def code(self) -> str:
        return f"((t[{self.slot}] >> {self.bit}) & 1) == {self.value}"


Pred = tuple  # conjunction of Lin / Bit terms


def eq(slot: int, value: int) -> Lin:
    return Lin(((1, slot),), "==", value)


def pred_slots(pred: Pred) -> set[int]:
    out = set()
    for term in pred:
        out |= term.slots
    return out


def pred_code(pred: Pred) -> str:
    return " and ".join(term.code() for term in pred)


# --------------------------------------------------------------- instructions


@dataclass(frozen=True)
class Add:
    """t[dst] += const + sum(c * t[s]) modulo the destination alphabet."""

    dst: int
    const: int = 0
    terms: tuple[tuple[int, int], ...] = ()
    pred: Pred = ()

    def reads(self) -> set[int]:
        return {s for _, s in self.terms} | pred_slots(self.pred)

    def writes(self) -> set[int]:
        return {self.dst}


@dataclass(frozen=True)
class CopyField:
    """t[dst] += digits field[pos .. pos+len-2] read most significant first.

    ``len`` counts the trailing separator, so a block of l digits has len = l+1.
    Out-of-range (pos, len) leaves t[dst] unchanged.  This is the single-dispatch
    form of the controlled copy family over all (position, length) pairs.
    """

    dst: int
    field_start: int
    field_len: int
    pos: int
    ln: int
    pred: Pred = ()
    sign: int = 1

    def reads(self) -> set[int]:
        return set(range(self.field_start, self.field_start + self.field_len)) | {self.pos, self.ln} | pred_slots(self.pred)

    def writes(self) -> set[int]:
        return {self.dst}


@dataclass(frozen=True)
class WriteField:
    """Add the low t[ln] bits of t[src] (most significant first) into trits field[pos..],
    then add 2 to the trit after them, turning a zero into a separator.

    Identity when the digits plus separator would not fit in the field.
    """

    field_start: int
    field_len: int
    src: int
    pos: int
    ln: int
    pred: Pred = ()
    sign: int = 1

    def reads(self) -> set[int]:
        return {self.src, self.pos, self.ln} | pred_slots(self.pred)

    def writes(self) -> set[int]:
        return set(range(self.field_start, self.field_start + self.field_len))


@dataclass(frozen=True)
class Compare:
    """Trit t[dst] += 1 if t[a] < t[b], 2 if t[b] < t[a], 0 if equal."""

    dst: int
    a: int
    b: int
    pred: Pred = ()
    sign: int = 1

    def reads(self) -> set[int]:
        return {self.a, self.b} | pred_slots(self.pred)

    def writes(self) -> set[int]:
        return {self.dst}


@dataclass(frozen=True, eq=False)
class Call:
    program: "Program"
    inverse: bool = False
    pred: Pred = ()

    def reads(self) -> set[int]:
        return self.program.footprint | pred_slots(self.pred)

    def writes(self) -> set[int]:
        return self.program.written


Instruction = Add | CopyField | WriteField | Compare | Call


# ------------------------------------------------------------------- programs

_ids = itertools.count()


class Program:
    """A named instruction list with a declared ancilla ledger.

    ``ancillas`` are slots that must be zero on entry and are guaranteed zero
    on exit.  ``kind`` tags the subroutine family for statistics.
    """

    def __init__(self, name: str, instrs: Iterable[Instruction] = (), ancillas: Iterable[int] = (),
                 kind: str = "", cacheable: bool = False):
        self.id = next(_ids)
        self.name = name
        self.instrs: list[Instruction] = []
        self.ancillas = tuple(sorted(set(ancillas)))
        self.kind = kind or name.split("_")[0]
        self.cacheable = cacheable
        self._footprint: set[int] = set()
        self._written: set[int] = set()
        self._gates = None
        self._product = None
        self._elem = None
        for ins in instrs:
            self.append(ins)

    def append(self, ins: Instruction) -> None:
        if isinstance(ins, Call) and ins.program is self:
            raise ValueError("a program cannot call itself")
        w = ins.writes()
        clash = w & ins.reads() if not isinstance(ins, Call) else w & pred_slots(ins.pred)
        if clash:
            raise ValueError(f"{self.name}: instruction {type(ins).__name__} writes slots it reads: {sorted(clash)}")
        self.instrs.append(ins)
        self._footprint |= ins.reads() | w
        self._written |= w
        self._gates = self._product = self._elem = None

    def extend(self, instrs: Iterable[Instruction]) -> None:
        for ins in instrs:
            self.append(ins)

    @property
    def footprint(self) -> set[int]:
        return self._footprint

    @property
    def written(self) -> set[int]:
        return self._written

    def __len__(self) -> int:
        return len(self.instrs)

    def __repr__(self) -> str:
        return f"Program({self.name!r}, {len(self.instrs)} instrs)"

    # gate accounting ----------------------------------------------------

    def gate_count(self) -> int:
        """Instruction count with every call expanded."""
        if self._gates is None:
            self._gates = sum(i.program.gate_count() if isinstance(i, Call) else 1 for i in self.instrs)
        return self._gates

    def product_gate_count(self) -> int:
        """Like gate_count, but copy/write dispatches are charged as the full
        product of controlled copies over every (position, length) pair."""
        if self._product is None:
            total = 0
            for i in self.instrs:
                if isinstance(i, Call):
                    total += i.program.product_gate_count()
                elif isinstance(i, (CopyField, WriteField)):
                    total += _product_copies(i.field_len)
                else:
                    total += 1
            self._product = total
        return self._product

    def elementary_estimate(self, modulus: Sequence[int]) -> int:
        """Conservative elementary-gate estimate: a w-bit add under a p-term control
        costs about 4*w*(p+1) Toffoli-class gates."""
        if self._elem is None:
            total = 0
            for i in self.instrs:
                if isinstance(i, Call):
                    total += i.program.elementary_estimate(modulus) + 2 * len(i.pred)
                elif isinstance(i, Add):
                    w = max(1, (modulus[i.dst] - 1).bit_length())
                    total += 4 * w * (len(i.pred) + len(i.terms) + 1)
                elif isinstance(i, (CopyField, WriteField)):
                    total += 4 * _product_copies(i.field_len)
                else:
                    total += 16 * max(1, (modulus[i.a] - 1).bit_length())
            self._elem = total
        return self._elem

    def subprograms(self) -> list["Program"]:
        """All programs reachable through calls, callees before callers, self last."""
        seen: dict[int, Program] = {}

        def visit(p):
            if p.id in seen:
                return
            for i in p.instrs:
                if isinstance(i, Call):
                    visit(i.program)
            seen[p.id] = p

        visit(self)
        return list(seen.values())


def _product_copies(field_len: int) -> int:
    # sum over start j and length l of the l single-trit copies in U(j, l)
    lmax = max(1, field_len.bit_length() + 1)
    return sum(l for j in range(field_len) for l in range(1, lmax + 1) if j + l <= field_len)


def invert(ins: Instruction) -> Instruction:
    if isinstance(ins, Call):
        return Call(ins.program, not ins.inverse, ins.pred)
    if isinstance(ins, Add):
        return Add(ins.dst, -ins.const, tuple((-c, s) for c, s in ins.terms), ins.pred)
    return replace(ins, sign=-ins.sign)


def inverse_instrs(instrs: Sequence[Instruction]) -> list[Instruction]:
    return [invert(i) for i in reversed(instrs)]


# ------------------------------------------------------------------- codegen


class _Compiler:
    def __init__(self, machine: "Machine"):
        self.m = machine

    def source(self, prog: Program, inverse: bool, fname: str) -> str:
        mod = self.m.modulus
        lines = [f"def {fname}(t):"]
        body = []
        seq = list(reversed(prog.instrs)) if inverse else prog.instrs
        for ins in seq:
            body.extend(self._instr(ins, inverse, mod))
        use_cache = self.m.memoize and prog.cacheable and bool(prog.written)
        cache = "C_" + fname
        if use_cache:
            fp = sorted(prog.footprint)
            wr = sorted(prog.written)
            key = "(" + ", ".join(f"t[{s}]" for s in fp) + ",)"
            lines.append(f"    key = {key}")
            lines.append(f"    hit = {cache}.get(key)")
            lines.append("    if hit is not None:")
            lines.append("        " + ", ".join(f"t[{s}]" for s in wr) + (", = hit" if len(wr) == 1 else " = hit"))
            lines.append("        return")
        lines.extend("    " + b for b in body)
        if use_cache:
            lines.append(f"    if len({cache}) > LIMIT:")
            lines.append(f"        {cache}.clear()")
            lines.append(f"    {cache}[key] = (" + ", ".join(f"t[{s}]" for s in sorted(prog.written)) + ",)")
        if len(lines) == 1:
            lines.append("    pass")
        return "\n".join(lines) + "\n"

    @staticmethod
    def _wrap(pred, stmts):
        if not pred:
            return stmts
        return [f"if {pred_code(pred)}:"] + ["    " + s for s in stmts]

    def _instr(self, ins, inverse, mod):
        if isinstance(ins, Call):
            inv = ins.inverse != inverse
            fn = self.m._fn_name(ins.program, inv)
            stmts = [f"{fn}(t)"]
            if self.m.check_ledger and ins.program.ancillas:
                anc = ins.program.ancillas
                zero = " or ".join(f"t[{a}]" for a in anc)
                stmts = [f"_z = not ({zero})", f"{fn}(t)",
                         f"if _z and ({zero}):",
                         f"    raise LedgerError({ins.program.name!r} + (' inverse' if {inv} else ''))"]
            return self._wrap(ins.pred, stmts)
        if isinstance(ins, Add):
            sign = "-" if inverse else "+"
            m = mod[ins.dst]
            expr = str(ins.const) if ins.const else ""
            for c, s in ins.terms:
                piece = f"t[{s}]" if c == 1 else f"{c}*t[{s}]"
                expr = f"{expr} + {piece}" if expr else piece
            if not expr:
                return []
            red = f" & {m - 1}" if m & (m - 1) == 0 else f" % {m}"
            return self._wrap(ins.pred, [f"t[{ins.dst}] = (t[{ins.dst}] {sign} ({expr})){red}"])
        sign = "-" if inverse != (ins.sign < 0) else "+"
        if isinstance(ins, Compare):
            m = mod[ins.dst]
            a, b = ins.a, ins.b
            stmt = f"t[{ins.dst}] = (t[{ins.dst}] {sign} (1 if t[{a}] < t[{b}] else 2 if t[{b}] < t[{a}] else 0)) % {m}"
            return self._wrap(ins.pred, [stmt])
        if isinstance(ins, CopyField):
            m = mod[ins.dst]
            fs, fl = ins.field_start, ins.field_len
            stmts = [
                f"_p = t[{ins.pos}]; _l = t[{ins.ln}]",
                f"if _l >= 2 and _p + _l - 1 <= {fl}:",
                "    _v = 0",
                f"    for _i in range({fs} + _p, {fs} + _p + _l - 1):",
                "        _v = 2 * _v + t[_i]",
                f"    t[{ins.dst}] = (t[{ins.dst}] {sign} _v) % {m}",
            ]
            return self._wrap(ins.pred, stmts)
        if isinstance(ins, WriteField):
            fs, fl = ins.field_start, ins.field_len
            stmts = [
                f"_p = t[{ins.pos}]; _l = t[{ins.ln}]; _s = t[{ins.src}]",
                f"if _p + _l < {fl}:",
                "    for _i in range(_l):",
                f"        _c = {fs} + _p + _i",
                f"        t[_c] = (t[_c] {sign} ((_s >> (_l - 1 - _i)) & 1)) % 3",
                f"    _c = {fs} + _p + _l",
                f"    t[_c] = (t[_c] {sign} 2) % 3",
            ]
            return self._wrap(ins.pred, stmts)
        raise TypeError(f"unknown instruction {ins!r}")


class Machine:
    """Compiles and runs programs over a fixed layout.

    memoize: enable exact per-subroutine result caches.
    check_ledger: after each call whose callee ancillas were zero on entry,
    raise LedgerError unless they are zero again.
    """

    def __init__(self, layout: Layout, memoize: bool = True, check_ledger: bool = True,
                 cache_limit: int = 200_000):
        self.layout = layout
        self.modulus = layout.modulus
        self.memoize = memoize
        self.check_ledger = check_ledger
        self.cache_limit = cache_limit
        self._fns: dict[tuple[int, bool], object] = {}
        self._caches: dict[tuple[int, bool], dict] = {}
        self._ns: dict = {"LedgerError": LedgerError, "LIMIT": cache_limit}
        self._compiler = _Compiler(self)

    def _fn_name(self, prog: Program, inverse: bool) -> str:
        return f"p{prog.id}_{'i' if inverse else 'f'}"

    def compile(self, prog: Program) -> None:
        for p in prog.subprograms():
            for inv in (False, True):
                key = (p.id, inv)
                if key in self._fns:
                    continue
                name = self._fn_name(p, inv)
                cache: dict = {}
                self._caches[key] = cache
                self._ns["C_" + name] = cache
                src = self._compiler.source(p, inv, name)
                exec(compile(src, f"<{p.name}{' inverse' if inv else ''}>", "exec"), self._ns)  # noqa: S102
                self._fns[key] = self._ns[name]

    def function(self, prog: Program, inverse: bool = False):
        key = (prog.id, inverse)
        if key not in self._fns:
            self.compile(prog)
        return self._fns[key]

    def run(self, prog: Program, tape: list[int], inverse: bool = False, check: bool | None = None) -> list[int]:
        """Run in place and return the tape.  Checks the top-level ledger when the
        program's ancillas were zero on entry."""
        fn = self.function(prog, inverse)
        check = self.check_ledger if check is None else check
        zero = check and not any(tape[a] for a in prog.ancillas)
        fn(tape)
        if zero and any(tape[a] for a in prog.ancillas):
            bad = [self.layout.slot_name(a) for a in prog.ancillas if tape[a]]
            raise LedgerError(f"{prog.name}: ancillas left nonzero: {bad[:8]}")
        return tape

    def clear_caches(self) -> None:
        for c in self._caches.values():
            c.clear()

    def cache_entries(self) -> int:
        return sum(len(c) for c in self._caches.values())


def random_tape(layout: Layout, rng) -> list[int]:
    return [rng.randrange(m) for m in layout.modulus]


def counter_width(max_value: int) -> int:
    """ceil(log2(max_value + 1)) + 1 bits for a counter ranging over 0..max_value."""
    return max(1, math.ceil(math.log2(max_value + 1))) + 1
