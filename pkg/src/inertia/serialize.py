"""JSON artifacts for verdicts, certificates and witnesses.

Integers are written as strings and rationals as ``"a/b"`` so that no
precision is lost; keys are sorted and there are no timestamps, so equal
inputs give byte-identical documents.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Dict, List, Sequence

from .certificate import A0Description, CaseA, CaseB, EndoScalars
from .classifier import EndoReport, LiftedCertificate, Verdict
from .endo import Endomorphism, SlotAction
from .groups import OMEGA, Cyclic, Element, GroupDescriptor, Localized, PrimeSet, Prufer, SubgroupHandle
from .witness import CoordTemplate, GenTemplate, Growth, NonInertialWitness

SCHEMA_VERSION = "1"


class SchemaError(ValueError):
    pass


def _q(x) -> str:
    return str(Fraction(x))


def _uq(s) -> Fraction:
    if not isinstance(s, str):
        raise SchemaError(f"expected a numeric string, got {s!r}")
    try:
        return Fraction(s)
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


def _i(x) -> str:
    return str(int(x))


def _ui(s) -> int:
    q = _uq(s)
    if q.denominator != 1:
        raise SchemaError(f"expected an integer, got {s}")
    return int(q)


def _key(k) -> List[str]:
    return [_i(k[0]), _i(k[1])]


def _ukey(k):
    if not isinstance(k, list) or len(k) != 2:
        raise SchemaError(f"bad key {k!r}")
    return (_ui(k[0]), _ui(k[1]))


# ------------------------------------------------------------------ groups


def _primeset(pi: PrimeSet):
    return "ALL" if pi.is_all else [_i(p) for p in pi.sorted()]


def _uprimeset(x) -> PrimeSet:
    if x == "ALL":
        return PrimeSet.all()
    return PrimeSet(frozenset(_ui(p) for p in x))


def group_to_json(A: GroupDescriptor) -> Dict[str, Any]:
    slots = []
    for atom, m in A.slots:
        if isinstance(atom, Cyclic):
            a = {"type": "cyclic", "p": _i(atom.p), "e": _i(atom.e)}
        elif isinstance(atom, Prufer):
            a = {"type": "prufer", "p": _i(atom.p)}
        else:
            a = {"type": "localized", "pi": _primeset(atom.pi)}
        slots.append({"atom": a, "mult": "w" if m is OMEGA else _i(m)})
    out: Dict[str, Any] = {"slots": slots, "text": str(A)}
    if A.presentation is not None:
        out["presentation"] = {
            "ngens": _i(A.presentation.ngens),
            "relations": [[_i(x) for x in r] for r in A.presentation.relations],
        }
    return out


def group_from_json(d: Dict[str, Any]) -> GroupDescriptor:
    try:
        if "presentation" in d:
            pres = d["presentation"]
            A = GroupDescriptor.from_presentation([[_ui(x) for x in r] for r in pres["relations"]], _ui(pres["ngens"]))
        else:
            slots = []
            for s in d["slots"]:
                a = s["atom"]
                if a["type"] == "cyclic":
                    atom = Cyclic(_ui(a["p"]), _ui(a["e"]))
                elif a["type"] == "prufer":
                    atom = Prufer(_ui(a["p"]))
                elif a["type"] == "localized":
                    atom = Localized(_uprimeset(a["pi"]))
                else:
                    raise SchemaError(f"unknown atom type {a['type']!r}")
                slots.append((atom, OMEGA if s["mult"] == "w" else _ui(s["mult"])))
            A = GroupDescriptor(tuple(slots))
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed group: {exc}") from None
    if group_to_json(A)["slots"] != d["slots"]:
        raise SchemaError("group slots do not match the presentation")
    return A


def element_to_json(x: Element) -> List[List[str]]:
    return [[_i(s), _i(c), _q(v)] for (s, c), v in x.coords]


def element_from_json(A: GroupDescriptor, d) -> Element:
    return A.element({(_ui(s), _ui(c)): _uq(v) for s, c, v in d})


# ------------------------------------------------------------ endomorphisms


def endo_to_json(phi: Endomorphism) -> Dict[str, Any]:
    acts = []
    for s, a in enumerate(phi.actions):
        if a is not None:
            acts.append({"slot": _i(s), "matrix": [[_q(x) for x in row] for row in a.matrix]})
    return {
        "actions": acts,
        "cross": [[_key(s), _key(t), _q(q)] for s, t, q in phi.cross],
        "finitary": [[_key(s), element_to_json(e)] for s, e in phi.finitary],
    }


def endo_from_json(A: GroupDescriptor, d: Dict[str, Any]) -> Endomorphism:
    try:
        acts = {_ui(a["slot"]): SlotAction.of([[_uq(x) for x in row] for row in a["matrix"]]) for a in d["actions"]}
        cross = [(_ukey(s), _ukey(t), _uq(q)) for s, t, q in d["cross"]]
        fin = {_ukey(s): element_from_json(A, e) for s, e in d["finitary"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed endomorphism: {exc}") from None
    return Endomorphism.build(A, acts, cross, fin)


# ------------------------------------------------------------- certificates


def _a0(a0: A0Description):
    return {
        "modes": [[_i(s), m] for s, m in a0.modes],
        "overrides": [[_key(k), _i(v)] for k, v in a0.overrides],
    }


def _ua0(d) -> A0Description:
    return A0Description(
        tuple((_ui(s), m) for s, m in d["modes"]),
        tuple((_ukey(k), _ui(v)) for k, v in d["overrides"]),
    )


def certificate_to_json(cert) -> Dict[str, Any]:
    if isinstance(cert, CaseA):
        return {"kind": "A", "a0": _a0(cert.a0), "multipliers": [_i(m) for m in cert.multipliers]}
    if isinstance(cert, CaseB):
        return {
            "kind": "B",
            "pi": _primeset(cert.pi),
            "pi1": _primeset(cert.pi1),
            "B": [_i(s) for s in cert.B],
            "D": [_i(s) for s in cert.D],
            "C": [_i(s) for s in cert.C],
            "V": [[_key(k), _i(v)] for k, v in cert.V],
            "r": _i(cert.r),
            "scalars": [
                {
                    "mn": _q(sc.mn),
                    "B": [[_i(s), _i(b)] for s, b in sc.B],
                    "D": [[_i(s), _q(a)] for s, a in sc.D],
                    "C": [[_i(p), _q(g)] for p, g in sc.C],
                }
                for sc in cert.scalars
            ],
            "a0": _a0(cert.a0),
        }
    if isinstance(cert, LiftedCertificate):
        return {
            "kind": "lifted",
            "base": certificate_to_json(cert.base),
            "index": _i(cert.index),
            "kernelOrder": _i(cert.kernel_order),
        }
    raise SchemaError(f"cannot serialize certificate {type(cert).__name__}")


def certificate_from_json(d: Dict[str, Any]):
    try:
        kind = d["kind"]
        if kind == "A":
            return CaseA(_ua0(d["a0"]), tuple(_ui(m) for m in d["multipliers"]))
        if kind == "B":
            scalars = tuple(
                EndoScalars(
                    _uq(sc["mn"]),
                    tuple((_ui(s), _ui(b)) for s, b in sc["B"]),
                    tuple((_ui(s), _uq(a)) for s, a in sc["D"]),
                    tuple((_ui(p), _uq(g)) for p, g in sc["C"]),
                )
                for sc in d["scalars"]
            )
            return CaseB(
                _uprimeset(d["pi"]),
                _uprimeset(d["pi1"]),
                tuple(_ui(s) for s in d["B"]),
                tuple(_ui(s) for s in d["D"]),
                tuple(_ui(s) for s in d["C"]),
                tuple((_ukey(k), _ui(v)) for k, v in d["V"]),
                _ui(d["r"]),
                scalars,
                _ua0(d["a0"]),
            )
        if kind == "lifted":
            return LiftedCertificate(certificate_from_json(d["base"]), _ui(d["index"]), _ui(d["kernelOrder"]))
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed certificate: {exc}") from None
    raise SchemaError(f"unknown certificate kind {d.get('kind')!r}")


# ---------------------------------------------------------------- witnesses


def _growth(g: Growth):
    return {
        "kind": g.kind,
        "coeff": _q(g.coeff),
        "base": _i(g.base),
        "slope": _i(g.slope),
        "offset": _i(g.offset),
        "factors": [_i(f) for f in g.factors],
        "rank": _i(g.rank),
        "formula": g.describe(),
    }


def _ugrowth(d) -> Growth:
    return Growth(
        d["kind"], _uq(d["coeff"]), _ui(d["base"]), _ui(d["slope"]), _ui(d["offset"]),
        tuple(_ui(f) for f in d["factors"]), _ui(d["rank"]),
    )


def _template(t: GenTemplate):
    return {
        "repeat": t.repeat,
        "minIndex": _i(t.min_index),
        "coords": [
            {
                "slot": [_i(x) for x in c.slot],
                "copy": [_i(x) for x in c.copy],
                "num": _i(c.num),
                "base": _i(c.base),
                "exp": [_i(x) for x in c.exp],
            }
            for c in t.coords
        ],
    }


def _utemplate(d) -> GenTemplate:
    coords = tuple(
        CoordTemplate(
            tuple(_ui(x) for x in c["slot"]),
            tuple(_ui(x) for x in c["copy"]),
            _ui(c["num"]),
            _ui(c["base"]),
            tuple(_ui(x) for x in c["exp"]),
        )
        for c in d["coords"]
    )
    return GenTemplate(coords, bool(d["repeat"]), _ui(d["minIndex"]))


def witness_to_json(w: NonInertialWitness) -> Dict[str, Any]:
    return {
        "kind": w.kind,
        "mode": w.mode,
        "endo": endo_to_json(w.endo),
        "generators": [_template(t) for t in w.generators],
        "growth": _growth(w.growth),
        "exact": w.exact,
        "verifiedTo": _i(w.verified_to),
        "maxIndex": None if w.max_index is None else _i(w.max_index),
        "note": w.note,
    }


def witness_from_json(A: GroupDescriptor, d: Dict[str, Any]) -> NonInertialWitness:
    try:
        return NonInertialWitness(
            d["kind"],
            d["mode"],
            endo_from_json(A, d["endo"]),
            tuple(_utemplate(t) for t in d["generators"]),
            _ugrowth(d["growth"]),
            bool(d["exact"]),
            _ui(d["verifiedTo"]),
            None if d["maxIndex"] is None else _ui(d["maxIndex"]),
            d.get("note", ""),
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed witness: {exc}") from None


# ---------------------------------------------------------------- documents


def verdict_document(A: GroupDescriptor, endos: Sequence[Endomorphism], verdict: Verdict, K: int) -> Dict[str, Any]:
    return {
        "schemaVersion": SCHEMA_VERSION,
        "type": "verdict",
        "precision": _i(K),
        "group": group_to_json(A),
        "endos": [endo_to_json(e) for e in endos],
        "rin": verdict.rin,
        "lin": verdict.lin,
        "certificate": None if verdict.certificate is None else certificate_to_json(verdict.certificate),
        "witness": None if verdict.witness is None else witness_to_json(verdict.witness),
        "reports": [
            {"rin": r.rin, "lin": r.lin, "reason": r.reason, "scalar": None if r.scalar is None else _q(r.scalar)}
            for r in verdict.reports
        ],
    }


def witness_document(w: NonInertialWitness, K: int) -> Dict[str, Any]:
    return {
        "schemaVersion": SCHEMA_VERSION,
        "type": "witness",
        "precision": _i(K),
        "group": group_to_json(w.ambient),
        "witness": witness_to_json(w),
    }


def read_document(d: Dict[str, Any]):
    """Return ``(group, endos, certificate, witness)``; a witness document
    has the witness's endomorphism as its only endomorphism."""
    if not isinstance(d, dict):
        raise SchemaError("document must be a JSON object")
    if d.get("schemaVersion") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schemaVersion {d.get('schemaVersion')!r}")
    kind = d.get("type")
    if kind not in ("verdict", "witness"):
        raise SchemaError(f"unknown document type {kind!r}")
    try:
        A = group_from_json(d["group"])
        if kind == "witness":
            wit = witness_from_json(A, d["witness"])
            return A, [wit.endo], None, wit
        endos = [endo_from_json(A, e) for e in d["endos"]]
        cert = None if d["certificate"] is None else certificate_from_json(d["certificate"])
        wit = None if d["witness"] is None else witness_from_json(A, d["witness"])
    except KeyError as exc:
        raise SchemaError(f"missing field {exc}") from None
    return A, endos, cert, wit


def handle_to_json(X: SubgroupHandle) -> Dict[str, Any]:
    return {
        "generators": [element_to_json(g) for g in X.generators],
        "divisible": [[element_to_json(g), _primeset(pi)] for g, pi in X.divisible],
        "label": X.label,
    }


def handle_from_json(A: GroupDescriptor, d: Dict[str, Any]) -> SubgroupHandle:
    return SubgroupHandle(
        A,
        tuple(element_from_json(A, g) for g in d["generators"]),
        tuple((element_from_json(A, g), _uprimeset(pi)) for g, pi in d["divisible"]),
        d.get("label", ""),
    )


def verdict_from_document(d: Dict[str, Any]) -> Verdict:
    A, endos, cert, wit = read_document(d)
    reports = tuple(
        EndoReport(r["rin"], r["lin"], r["reason"], None if r["scalar"] is None else _uq(r["scalar"])) for r in d["reports"]
    )
    return Verdict(bool(d["rin"]), bool(d["lin"]), cert, wit, reports)


def dumps(doc: Dict[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def loads(text: str) -> Dict[str, Any]:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from None


__all__ = [
    "SCHEMA_VERSION",
    "SchemaError",
    "group_to_json",
    "group_from_json",
    "endo_to_json",
    "endo_from_json",
    "certificate_to_json",
    "certificate_from_json",
    "witness_to_json",
    "witness_from_json",
    "verdict_document",
    "witness_document",
    "element_to_json",
    "element_from_json",
    "handle_to_json",
    "handle_from_json",
    "read_document",
    "verdict_from_document",
    "dumps",
    "loads",
]
