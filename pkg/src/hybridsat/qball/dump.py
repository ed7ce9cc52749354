"""Line-oriented listing of a program and everything it calls, with the register map.

    # hybridsat reversible listing v1
    reg s trits start=0 length=3
    reg gcnt bits start=40 width=6
    prog 0 u1pos_P0_k1_j1 kind=U1 cacheable=0 ancillas=41
      add dst=41 c=1
      add dst=42 c=1 if=lin:1*41:>=:2
    end
    root 12

Predicates are ';'-joined terms, each ``lin:c*slot,c*slot:op:const`` or
``bit:slot:bit:value``.  Programs are numbered in listing order, callees first,
so the text for a given program is stable across runs.
"""

from __future__ import annotations

from .machine import Add, Bit, Call, Compare, CopyField, Layout, Lin, Program, WriteField

HEADER = "# hybridsat reversible listing v1"


class DumpError(ValueError):
    pass


def _pred(pred) -> str:
    parts = []
    for term in pred:
        if isinstance(term, Lin):
            terms = ",".join(f"{c}*{s}" for c, s in term.terms)
            parts.append(f"lin:{terms}:{term.op}:{term.const}")
        else:
            parts.append(f"bit:{term.slot}:{term.bit}:{term.value}")
    return ";".join(parts)


def _instr(ins, ids) -> str:
    if isinstance(ins, Add):
        out = [f"add dst={ins.dst} c={ins.const}"]
        if ins.terms:
            out.append("t=" + ",".join(f"{c}*{s}" for c, s in ins.terms))
    elif isinstance(ins, CopyField):
        out = [f"copy dst={ins.dst} fs={ins.field_start} fl={ins.field_len} pos={ins.pos} ln={ins.ln} sign={ins.sign}"]
    elif isinstance(ins, WriteField):
        out = [f"write fs={ins.field_start} fl={ins.field_len} src={ins.src} pos={ins.pos} ln={ins.ln} sign={ins.sign}"]
    elif isinstance(ins, Compare):
        out = [f"cmp dst={ins.dst} a={ins.a} b={ins.b} sign={ins.sign}"]
    elif isinstance(ins, Call):
        out = [f"call p={ids[ins.program.id]} inv={int(ins.inverse)}"]
    else:
        raise DumpError(f"cannot list {ins!r}")
    if ins.pred:
        out.append("if=" + _pred(ins.pred))
    return " ".join(out)


def dump_program(prog: Program, layout: Layout) -> str:
    lines = [HEADER]
    for reg in layout.registers.values():
        if reg.kind == "bits":
            lines.append(f"reg {reg.name} bits start={reg.start} width={reg.width}")
        else:
            lines.append(f"reg {reg.name} trits start={reg.start} length={reg.length}")
    subs = prog.subprograms()
    ids = {p.id: idx for idx, p in enumerate(subs)}
    for idx, p in enumerate(subs):
        anc = ",".join(str(a) for a in p.ancillas)
        lines.append(f"prog {idx} {p.name} kind={p.kind} cacheable={int(p.cacheable)} ancillas={anc}")
        lines.extend("  " + _instr(ins, ids) for ins in p.instrs)
        lines.append("end")
    lines.append(f"root {ids[prog.id]}")
    return "\n".join(lines) + "\n"


def _kv(tokens) -> dict[str, str]:
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise DumpError(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        out[k] = v
    return out


def _terms(text: str):
    if not text:
        return ()
    out = []
    for part in text.split(","):
        c, s = part.split("*")
        out.append((int(c), int(s)))
    return tuple(out)


def _parse_pred(text: str):
    if not text:
        return ()
    out = []
    for part in text.split(";"):
        kind, rest = part.split(":", 1)
        if kind == "lin":
            terms, op, const = rest.rsplit(":", 2)
            out.append(Lin(_terms(terms), op, int(const)))
        elif kind == "bit":
            s, b, v = rest.split(":")
            out.append(Bit(int(s), int(b), int(v)))
        else:
            raise DumpError(f"unknown predicate term {part!r}")
    return tuple(out)


def parse_program(text: str) -> tuple[Program, Layout]:
    """Inverse of dump_program: returns the root program and a fresh layout."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise DumpError("missing listing header")
    layout = Layout()
    progs: list[Program] = []
    cur = None
    root = None
    for lineno, raw in enumerate(lines[1:], 2):
        line = raw.strip()
        if not line:
            continue
        try:
            head, *rest = line.split()
            if head == "reg":
                name, kind, *kv = rest
                kv = _kv(kv)
                reg = layout.bits(name, int(kv["width"])) if kind == "bits" else layout.trits(name, int(kv["length"]))
                if reg.start != int(kv["start"]):
                    raise DumpError(f"register {name} expected at {kv['start']}, got {reg.start}")
            elif head == "prog":
                idx, name, *kv = rest
                kv = _kv(kv)
                if int(idx) != len(progs):
                    raise DumpError("programs out of order")
                anc = [int(a) for a in kv["ancillas"].split(",") if a]
                cur = Program(name, ancillas=anc, kind=kv["kind"], cacheable=kv["cacheable"] == "1")
            elif head == "end":
                progs.append(cur)
                cur = None
            elif head == "root":
                root = progs[int(rest[0])]
            else:
                kv = _kv(rest)
                pred = _parse_pred(kv.get("if", ""))
                if head == "add":
                    ins = Add(int(kv["dst"]), int(kv["c"]), _terms(kv.get("t", "")), pred)
                elif head == "copy":
                    ins = CopyField(int(kv["dst"]), int(kv["fs"]), int(kv["fl"]), int(kv["pos"]), int(kv["ln"]),
                                    pred, int(kv["sign"]))
                elif head == "write":
                    ins = WriteField(int(kv["fs"]), int(kv["fl"]), int(kv["src"]), int(kv["pos"]), int(kv["ln"]),
                                     pred, int(kv["sign"]))
                elif head == "cmp":
                    ins = Compare(int(kv["dst"]), int(kv["a"]), int(kv["b"]), pred, int(kv["sign"]))
                elif head == "call":
                    ins = Call(progs[int(kv["p"])], kv["inv"] == "1", pred)
                else:
                    raise DumpError(f"unknown instruction {head!r}")
                if cur is None:
                    raise DumpError("instruction outside a program")
                cur.append(ins)
        except (KeyError, IndexError, ValueError) as exc:
            if isinstance(exc, DumpError):
                raise DumpError(f"line {lineno}: {exc}") from None
            raise DumpError(f"line {lineno}: malformed listing line {line!r}") from exc
    if root is None:
        raise DumpError("listing has no root")
    return root, layout
