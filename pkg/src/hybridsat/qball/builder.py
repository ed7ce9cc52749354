"""Reversible programs for QBall_1 (choices -> efficient set encoding) and QBall_2
(set encoding -> formula value), with all their subroutines.

One builder owns one tape layout for a fixed (formula, r).  Subroutine programs
are created on demand and shared, so every Extract_k on a given block with a
given index operand exists once.

Tape registers
  s            r trits, s_i - 1 for choice s_i in {1,2,3}
  P<l>         permanent set block holding 2^l elements (bits of i choose which are live)
  S<l>         scratch block of 2^l elements used while merging
  utmp, ucmp   union scratch: encoding under construction and comparison trits
  v            Calculate output / Merge input
  cval avk adiff uc1 uc2   value-width work registers
  ecnt jc pos len ccnt uj1 uj2 gcnt   counters
  gres gchk q0 q1 q2 cres actl sat    single bits
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from ..cnf import Formula
from .machine import (
    Add, Bit, Call, Compare, CopyField, Layout, Lin, Machine, Program, Register, WriteField,
    counter_width, eq, inverse_instrs,
)
from .reference import decode_set, effenc_blocks, encode_set, set_capacity, trailing_zeros


def _ge(terms, c):
    return Lin(tuple(terms), ">=", c)


class QBallBuilder:
    def __init__(self, f: Formula, r: int):
        if r < 1:
            raise ValueError("r must be >= 1")
        if r > f.num_vars:
            raise ValueError(f"r={r} exceeds n={f.num_vars}")
        for c in f.clauses:
            if len(c) > 3:
                raise ValueError("QBall circuits take clauses of width <= 3")
        self.f = f
        self.n = n = f.num_vars
        self.r = r
        self.L = L = len(f.clauses)
        self.max_value = n + r  # dummies run up to n + r
        self.sentinel = self.max_value + 1
        self.levels = r.bit_length() - 1  # largest l with 2^l <= r
        self.kmax = 1 << self.levels
        self.value_width = (self.sentinel).bit_length()
        self._progs: dict[tuple, Program] = {}

        lay = self.layout = Layout()
        self.s = lay.trits("s", r)
        self.P = [lay.trits(f"P{l}", self.cap(1 << l)) for l in range(self.levels + 1)]
        self.S = [lay.trits(f"S{l}", self.cap(1 << l)) for l in range(self.levels)]
        if self.levels:
            self.utmp = lay.trits("utmp", self.cap(self.kmax))
            self.ucmp = lay.trits("ucmp", self.kmax)
        w = self.value_width
        self.v = lay.bits("v", w)
        self.cval = lay.bits("cval", w)
        self.avk = lay.bits("avk", w)
        self.adiff = lay.bits("adiff", w)
        if self.levels:
            self.uc = [lay.bits("uc1", w), lay.bits("uc2", w)]
        capmax = max(reg.length for reg in self.P + self.S + ([self.utmp] if self.levels else []))
        self.ecnt = lay.bits("ecnt", counter_width(self.kmax + 1))
        self.jc = lay.bits("jc", counter_width(self.kmax + 1))
        self.pos = lay.bits("pos", counter_width(capmax))
        self.len = lay.bits("len", counter_width(max(capmax + 1, w)))
        self.ccnt = lay.bits("ccnt", counter_width(self.kmax))
        if self.levels:
            self.uj = [lay.bits("uj1", counter_width(self.kmax // 2 + 1)),
                       lay.bits("uj2", counter_width(self.kmax // 2 + 1))]
        self.gcnt = lay.bits("gcnt", counter_width(L + 1))
        self.gres = lay.bits("gres", 1)
        self.gchk = lay.bits("gchk", 1)
        self.q = [lay.bits(f"q{p}", 1) for p in range(3)]
        self.cres = lay.bits("cres", 1)
        self.actl = lay.bits("actl", 1)
        self.sat = lay.bits("sat", 1)

        self.persistent = set(self.s.slots) | {sl for blk in self.P for sl in blk.slots}
        self._qball1 = None
        self._merge_items: dict[int, list] = {}

    # ------------------------------------------------------------ helpers

    def cap(self, k: int) -> int:
        return set_capacity(k, self.max_value)

    def _memo(self, key, make):
        prog = self._progs.get(key)
        if prog is None:
            prog = make()
            self._progs[key] = prog
        return prog

    def _anc(self, *regs) -> list[int]:
        out = []
        for r in regs:
            if isinstance(r, Register):
                out.extend(r.slots)
            else:
                out.extend(r)
        return out

    def workspace(self) -> list[int]:
        """Every slot that is neither a choice trit nor a permanent block."""
        return [s for s in range(self.layout.num_slots) if s not in self.persistent and s != self.sat.slot]

    def effenc_registers(self, i: int) -> list[tuple[Register, int]]:
        """(block register, element count) pairs holding EffEnc V_i."""
        return [(self.P[l], 1 << l) for l in range(self.levels, -1, -1) if (i >> l) & 1]

    # ------------------------------------------------------- Shift/Extract

    def u1_pos(self, E: Register, k: int, j) -> Program:
        """pos += index where element j's digits start: counts trits while fewer than j-1
        separators have gone by.  Works for j = k+1 too (start of the free tail)."""

        def make():
            jc, pos = self.jc.slot, self.pos.slot
            if isinstance(j, int):
                pred = Lin(((1, jc),), ">=", k + 2 - j)
            else:
                pred = _ge(((1, jc), (1, j.slot)), k + 2)
            p = Program(f"u1pos_{E.name}_k{k}_j{_jname(j)}", kind="U1", ancillas=[jc])
            p.append(Add(jc, k))
            for idx in range(E.length):
                p.append(Add(pos, 1, pred=(pred,)))
                p.append(Add(jc, -1, pred=(eq(E[idx], 2),)))
            return p

        return self._memo(("u1pos", E.name, k, _jkey(j)), make)

    def u1_len(self, E: Register, k: int, j) -> Program:
        """len += number of trits of element j including its separator."""

        def make():
            jc, ln = self.jc.slot, self.len.slot
            if isinstance(j, int):
                pred = Lin(((1, jc),), "==", j - 1)
            else:
                pred = Lin(((1, jc), (-1, j.slot)), "==", -1)
            p = Program(f"u1len_{E.name}_k{k}_j{_jname(j)}", kind="U1", ancillas=[jc])
            for idx in range(E.length):
                p.append(Add(ln, 1, pred=(pred,)))
                p.append(Add(jc, 1, pred=(eq(E[idx], 2),)))
            p.append(Add(jc, -k))
            return p

        return self._memo(("u1len", E.name, k, _jkey(j)), make)

    def shift(self, E: Register, k: int, out: Register) -> Program:
        """out += y_j - y_{j-1} with j held in ecnt."""

        def make():
            j = self.ecnt
            up, ul = self.u1_pos(E, k, j), self.u1_len(E, k, j)
            p = Program(f"shift_{E.name}_k{k}_{out.name}", kind="Shift",
                        ancillas=self._anc(self.jc, self.pos, self.len))
            p.extend([
                Call(up), Call(ul),
                CopyField(out.slot, E.start, E.length, self.pos.slot, self.len.slot),
                Call(ul, inverse=True), Call(up, inverse=True),
            ])
            return p

        return self._memo(("shift", E.name, k, out.name), make)

    def extract(self, E: Register, k: int, j, out: Register) -> Program:
        """out += y_j for the k-element set encoded in E; j is a constant or a register.
        j outside 1..k adds nothing."""

        def make():
            ecnt = self.ecnt.slot
            p = Program(f"extract_{E.name}_k{k}_j{_jname(j)}_{out.name}", kind="Extract",
                        ancillas=self._anc(self.ecnt, self.jc, self.pos, self.len), cacheable=True)
            if isinstance(j, int) and not 1 <= j <= k:
                return p
            if isinstance(j, int):
                pred = (Lin(((1, ecnt),), "<=", j),)
            else:
                pred = (Lin(((1, ecnt), (-1, j.slot)), "<=", 0), Lin(((1, j.slot),), "<=", k))
            sh = self.shift(E, k, out)
            p.append(Add(ecnt, 1))
            for _ in range(k):
                p.append(Call(sh, pred=pred))
                p.append(Add(ecnt, 1))
            p.append(Add(ecnt, -(k + 1)))
            return p

        return self._memo(("extract", E.name, k, _jkey(j), out.name), make)

    def contains(self, E: Register, k: int, value: int, out: Register) -> Program:
        """out ^= [value in S] for the k-element set in E."""

        def make():
            ccnt, cres, cval = self.ccnt.slot, self.cres.slot, self.cval.slot
            X = []
            for jj in range(1, k + 1):
                ex = self.extract(E, k, jj, self.cval)
                X.extend([
                    Call(ex, pred=(eq(ccnt, 0),)),
                    Add(cres, 1, pred=(eq(cval, value),)),
                    Call(ex, inverse=True, pred=(eq(ccnt, 0),)),
                    Add(ccnt, 1, pred=(eq(cres, 1),)),
                ])
            p = Program(f"contains_{E.name}_k{k}_v{value}_{out.name}", kind="Contains",
                        ancillas=self._anc(self.ccnt, self.cres, self.cval, self.ecnt, self.jc, self.pos, self.len),
                        cacheable=True)
            p.extend(X)
            p.append(Add(out.slot, 0, ((1, cres),)))
            p.extend(inverse_instrs(X))
            return p

        return self._memo(("contains", E.name, k, value, out.name), make)

    # ---------------------------------------------------- calculate phase

    def _lookup_vars(self, variables, i, pred=()):
        """Contains calls that set q_p = [variables[p] in V_{i-1}]."""
        out = []
        for p, var in enumerate(variables):
            for E, k in self.effenc_registers(i - 1):
                out.append(Call(self.contains(E, k, var, self.q[p]), pred=pred))
        return out

    def check(self, j: int, i: int) -> Program:
        """gchk ^= C_j(V_{i-1})."""

        def make():
            clause = self.f.clauses[j]
            Y = []
            for p, lit in enumerate(clause):
                Y.extend(Call(self.contains(E, k, abs(lit), self.q[p])) for E, k in self.effenc_registers(i - 1))
                if lit < 0:
                    Y.append(Add(self.q[p].slot, 1))
            p = Program(f"check_j{j + 1}_i{i}", kind="Check",
                        ancillas=self._anc(*self.q, self.ccnt, self.cres, self.cval, self.ecnt, self.jc,
                                           self.pos, self.len),
                        cacheable=True)
            p.extend(Y)
            g = self.gchk.slot
            p.append(Add(g, 1))
            p.append(Add(g, 1, pred=tuple(eq(self.q[pp].slot, 0) for pp in range(len(clause)))))
            p.extend(inverse_instrs(Y))
            return p

        return self._memo(("check", j, i), make)

    def g_step(self, j: int, i: int) -> Program:
        def make():
            gc, gr, gk = self.gcnt.slot, self.gres.slot, self.gchk.slot
            ch = self.check(j, i)
            p = Program(f"G_j{j + 1}_i{i}", kind="G")
            p.extend([
                Call(ch, pred=(eq(gc, 0),)),
                Add(gr, 1, pred=(eq(gk, 0), eq(gc, 0))),
                Call(ch, inverse=True, pred=(eq(gc, 0),)),
                Add(gc, 1, pred=(eq(gr, 1),)),
            ])
            return p

        return self._memo(("G", j, i), make)

    def g_chain(self, i: int) -> Program:
        """gcnt = L+1-j_min (0 if none) and gres = 1 - F(x(V_{i-1}))."""

        def make():
            p = Program(f"gchain_i{i}", kind="GChain", cacheable=True)
            for j in range(self.L):
                p.append(Call(self.g_step(j, i)))
            return p

        return self._memo(("gchain", i), make)

    def select(self, i: int) -> Program:
        """v += v_{j,i}(V_{i-1}, s_i) where gcnt = L+1-j, or n+i when gcnt = 0."""

        def make():
            n, L = self.n, self.L
            gc, v = self.gcnt.slot, self.v.slot
            si = self.s[i - 1]
            p = Program(f"select_i{i}", kind="Select",
                        ancillas=self._anc(*self.q, self.ccnt, self.cres, self.cval, self.ecnt, self.jc,
                                           self.pos, self.len),
                        cacheable=True)
            p.append(Add(v, n + i, pred=(eq(gc, 0),)))
            for j, clause in enumerate(self.f.clauses):
                cj = (eq(gc, L - j),)
                sv = sorted(abs(l) for l in clause)
                Z = self._lookup_vars(sv, i, pred=cj)
                p.extend(Z)
                for bits in itertools.product((0, 1), repeat=len(sv)):
                    free = [var for var, b in zip(sv, bits) if b == 0]
                    qpred = tuple(eq(self.q[pp].slot, b) for pp, b in enumerate(bits))
                    for sval in (1, 2, 3):
                        target = free[sval - 1] if sval <= len(free) else n + i
                        p.append(Add(v, target, pred=cj + qpred + (eq(si, sval - 1),)))
                p.extend(inverse_instrs(Z))
            return p

        return self._memo(("select", i), make)

    def calculate(self, i: int) -> Program:
        def make():
            ch = self.g_chain(i)
            anc = [s for s in self.workspace() if s != self.v.slot]
            p = Program(f"calculate_i{i}", kind="Calculate", ancillas=anc, cacheable=True)
            p.extend([Call(ch), Call(self.select(i)), Call(ch, inverse=True)])
            return p

        return self._memo(("calculate", i), make)

    # -------------------------------------------------------- merge phase

    def append(self, k: int, src: Register, E: Register) -> Program:
        """E: enc S -> enc S + {src} for a k-element S whose maximum is below src."""

        def make():
            w = self.value_width
            adiff, ln, actl = self.adiff.slot, self.len.slot, self.actl.slot
            scan = []
            for b in range(w - 1, -1, -1):
                scan.append(Add(actl, 1, pred=(Bit(adiff, b, 1), eq(ln, 0))))
                scan.append(Add(ln, 1, pred=(eq(actl, 1),)))
            scan.append(Add(actl, 1))
            head = [
                Call(self.extract(E, k, k, self.avk)),
                Add(adiff, 0, ((1, src.slot), (-1, self.avk.slot))),
            ] + scan
            p = Program(f"append_k{k}_{src.name}_{E.name}", kind="Append",
                        ancillas=self._anc(self.avk, self.adiff, self.len, self.actl, self.pos, self.jc,
                                           self.ecnt),
                        cacheable=True)
            p.extend(head)
            p.append(Call(self.u1_pos(E, k, k + 1)))
            p.append(WriteField(E.start, E.length, adiff, self.pos.slot, ln))
            p.append(Call(self.u1_pos(E, k + 1, k + 1), inverse=True))
            tail = inverse_instrs(head)
            # the set now has k+1 elements, so undo the extraction with Extract_{k+1}
            tail[-1] = Call(self.extract(E, k + 1, k, self.avk), inverse=True)
            p.extend(tail)
            return p

        return self._memo(("append", k, src.name, E.name), make)

    def union(self, k1: int, k2: int, E1: Register, E2: Register, Eout: Register) -> Program:
        """Eout += enc(S1 | S2) for disjoint S1 (k1 elements in E1) and S2 (k2 in E2)."""

        def make():
            K = k1 + k2
            uj, uc = self.uj, self.uc
            X = [Add(uj[0].slot, 1), Add(uj[1].slot, 1)]
            for js in range(K):
                step = []
                for b, (E, kb) in enumerate(((E1, k1), (E2, k2))):
                    step.append(Call(self.extract(E, kb, uj[b], uc[b]),
                                     pred=(Lin(((1, uj[b].slot),), "<=", kb),)))
                    step.append(Add(uc[b].slot, self.sentinel, pred=(eq(uj[b].slot, kb + 1),)))
                X.extend(step)
                X.append(Compare(self.ucmp[js], uc[0].slot, uc[1].slot))
                for b in range(2):
                    X.append(Call(self.append(js, uc[b], self.utmp), pred=(eq(self.ucmp[js], b + 1),)))
                X.extend(inverse_instrs(step))
                for b in range(2):
                    X.append(Add(uj[b].slot, 1, pred=(eq(self.ucmp[js], b + 1),)))
            p = Program(f"union_{k1}_{k2}_{E1.name}_{E2.name}_{Eout.name}", kind="Union",
                        ancillas=self._anc(self.uj[0], self.uj[1], self.uc[0], self.uc[1], self.ucmp, self.utmp,
                                           self.avk, self.adiff, self.len, self.actl, self.pos, self.jc, self.ecnt),
                        cacheable=True)
            p.extend(X)
            for idx in range(Eout.length):
                # utmp past cap(K) stays zero for a K-element union
                p.append(Add(Eout[idx], 0, ((1, self.utmp[idx]),)))
            p.extend(inverse_instrs(X))
            return p

        return self._memo(("union", k1, k2, E1.name, E2.name, Eout.name), make)

    def _merge_anc(self):
        return [s for s in self.workspace() if s != self.v.slot]

    def build_qball1(self) -> Program:
        """|s>|0> -> |s>|EffEnc V(s)>: r rounds of Calculate_i then Merge_i."""
        if self._qball1 is not None:
            return self._qball1
        top: list = []  # top-level calls, two per round
        end_of_merge = {0: 0}
        for i in range(1, self.r + 1):
            top.append(Call(self.calculate(i)))
            merge = self._build_merge(i, top)
            top.append(Call(merge))
            end_of_merge[i] = len(top)
        anc = self.workspace()
        p = Program(f"qball1_n{self.n}_r{self.r}", kind="QBall1", ancillas=anc)
        p.extend(top)
        self._qball1 = p
        return p

    def _build_merge(self, i: int, top: list) -> Program:
        g = trailing_zeros(i)
        first = self.P[0] if g == 0 else self.S[0]
        items = [
            Call(self.append(0, self.v, first)),
            # the appended singleton hands v back: subtract it from v
            Call(self.extract(first, 1, 1, self.v), inverse=True),
        ]
        for l in range(g):
            src2 = self.S[0] if l == 0 else self.S[l]
            target = self.S[l + 1] if l + 1 < g else self.P[g]
            items.append(Call(self.union(1 << l, 1 << l, self.P[l], src2, target)))
            start = 2 * (i - (1 << (l + 1)))  # index in top just after Merge_{i-2^(l+1)}
            seg = Program(f"segment_i{i}_l{l}", kind="Segment", cacheable=True)
            seg.extend(top[start:])  # rounds i-2^(l+1)+1 .. i-1 and Calculate_i
            seg.extend(items[:-1])  # this merge so far, before the union
            items.append(Call(seg, inverse=True))
        p = Program(f"merge_i{i}", kind="Merge", ancillas=self._merge_anc(), cacheable=True)
        p.extend(items)
        self._merge_items[i] = items
        self._progs[("merge", i)] = p
        return p

    def merge(self, i: int) -> Program:
        self.build_qball1()
        return self._progs[("merge", i)]

    def build_qball2(self) -> Program:
        """|EffEnc V>|0> -> |EffEnc V>|F(x(V))> on the sat bit."""

        def make():
            ch = self.g_chain(self.r + 1)
            p = Program(f"qball2_n{self.n}_r{self.r}", kind="QBall2", ancillas=self.workspace(), cacheable=True)
            p.extend([Call(ch), Add(self.sat.slot, 1, pred=(eq(self.gres.slot, 0),)), Call(ch, inverse=True)])
            return p

        return self._memo(("qball2",), make)

    # ------------------------------------------------------------ tapes

    def tape_for(self, s) -> list[int]:
        if len(s) != self.r or any(x not in (1, 2, 3) for x in s):
            raise ValueError(f"choice vector must have {self.r} entries in 1..3")
        t = self.layout.new_tape()
        for idx, x in enumerate(s):
            t[self.s[idx]] = x - 1
        return t

    def write_set(self, t: list[int], E: Register, elements) -> None:
        code = encode_set(sorted(elements))
        if len(code) > E.length:
            raise ValueError(f"{sorted(elements)} needs {len(code)} trits, {E.name} holds {E.length}")
        for idx in range(E.length):
            t[E[idx]] = code[idx] if idx < len(code) else 0

    def read_set(self, t, E: Register) -> list[int]:
        return decode_set([t[s] for s in E.slots])

    def write_effenc(self, t: list[int], v_rounds) -> None:
        """Store v_1..v_i (round order) as EffEnc V_i."""
        pos = 0
        for E, k in self.effenc_registers(len(v_rounds)):
            self.write_set(t, E, v_rounds[pos:pos + k])
            pos += k

    def read_effenc(self, t, i: int | None = None) -> list[int]:
        i = self.r if i is None else i
        out = []
        for E, k in self.effenc_registers(i):
            out.extend(self.read_set(t, E))
        return sorted(out)

    def machine(self, memoize: bool = True, check_ledger: bool = True) -> Machine:
        return Machine(self.layout, memoize=memoize, check_ledger=check_ledger)

    # ------------------------------------------------------------ stats

    def stats(self) -> dict:
        q1 = self.build_qball1()
        q2 = self.build_qball2()
        per_kind: dict[str, int] = {}
        for prog in q1.subprograms() + q2.subprograms():
            per_kind.setdefault(prog.kind, 0)
        for kind in per_kind:
            progs = [p for p in set(q1.subprograms() + q2.subprograms()) if p.kind == kind]
            per_kind[kind] = max(p.gate_count() for p in progs)
        anc1 = len(q1.ancillas)
        return {
            "n": self.n,
            "r": self.r,
            "clauses": self.L,
            "cells": self.layout.num_slots,
            "qubits": self.layout.qubits,
            "ancilla_slots": anc1,
            "ancilla_qubits": sum(2 if self.layout.modulus[s] == 3 else (self.layout.modulus[s] - 1).bit_length()
                                  for s in q1.ancillas),
            "gates_qball1": q1.gate_count(),
            "gates_qball2": q2.gate_count(),
            "product_gates_qball1": q1.product_gate_count(),
            "elementary_estimate_qball1": q1.elementary_estimate(self.layout.modulus),
            "max_gates_per_subroutine": per_kind,
            "registers": {name: {"kind": reg.kind, "length": reg.length, "qubits": reg.qubits}
                          for name, reg in self.layout.registers.items()},
        }


def _jkey(j):
    return j if isinstance(j, int) else ("reg", j.name)


def _jname(j):
    return str(j) if isinstance(j, int) else j.name


def qubit_breakdown(builder: QBallBuilder) -> dict[str, int]:
    groups = {"choices": 0, "set_blocks": 0, "union_scratch": 0, "values": 0, "counters": 0, "flags": 0}
    for name, reg in builder.layout.registers.items():
        if name == "s":
            groups["choices"] += reg.qubits
        elif name[0] in "PS" and name[1:].isdigit():
            groups["set_blocks"] += reg.qubits
        elif name in ("utmp", "ucmp"):
            groups["union_scratch"] += reg.qubits
        elif name in ("v", "cval", "avk", "adiff", "uc1", "uc2"):
            groups["values"] += reg.qubits
        elif reg.width == 1:
            groups["flags"] += reg.qubits
        else:
            groups["counters"] += reg.qubits
    return groups
