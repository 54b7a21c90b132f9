"""Command-line front end.

Exit codes: 0 when the checked property holds, 1 when it fails, 2 on any
input error (parse errors, schema errors, caps).
"""

from __future__ import annotations

import json
import sys
from typing import List, Optional, Sequence

import click
import numpy as np

from . import __version__
from . import oracle as O
from .certificate import CaseA, CaseB, validate_certificate
from .classifier import LiftedCertificate, classify_general
from .endo import Endomorphism, IllDefined
from .gallery import ENTRIES, get_entry
from .grammar import parse_endo, parse_group
from .groups import GroupDescriptor, section_order
from .serialize import (
    SchemaError,
    dumps,
    loads,
    read_document,
    verdict_document,
    witness_document,
)
from .witness import DEFAULT_K, NonInertialWitness, WitnessRefused, primary_lin_witness, verify_witness

DEFAULT_SEED = 0


class InputError(click.ClickException):
    exit_code = 2


def _group(text: str) -> GroupDescriptor:
    try:
        return parse_group(text)
    except ValueError as exc:
        raise InputError(f"group {text!r}: {exc}")


def _endos(A: GroupDescriptor, texts: Sequence[str]) -> List[Endomorphism]:
    out = []
    for t in texts:
        try:
            out.append(parse_endo(t, A).require())
        except ValueError as exc:
            raise InputError(f"endomorphism {t!r}: {exc}")
    return out


def _emit(doc, out: Optional[str]):
    text = dumps(doc)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _describe_certificate(cert) -> str:
    if isinstance(cert, CaseA):
        return f"case A: multipliers {', '.join(map(str, cert.multipliers))} on a subgroup of finite index"
    if isinstance(cert, CaseB):
        return (
            f"case B: pi={cert.pi} pi1={cert.pi1} bounded slots {[s + 1 for s in cert.B]}, "
            f"divisible slots {[s + 1 for s in cert.D]}, rest {[s + 1 for s in cert.C]}, r={cert.r}"
        )
    if isinstance(cert, LiftedCertificate):
        return f"lifted (index {cert.index}, kernel order {cert.kernel_order}) from " + _describe_certificate(cert.base)
    return type(cert).__name__


def _describe_witness(w: NonInertialWitness) -> str:
    return f"{w.kind} witness ({w.mode}), section orders {w.growth.describe()}, verified to i={w.verified_to}"


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(version=__version__, prog_name="inertia")
def main():
    """Decide inertia of endomorphisms of abelian groups and check the results."""


# ------------------------------------------------------------------ classify


@main.command()
@click.argument("group")
@click.argument("endos", nargs=-1, required=True)
@click.option("--lin", is_flag=True, help="Use left inertia (LIN) for the exit code.")
@click.option("--json", "as_json", is_flag=True, help="Print the verdict document as JSON.")
@click.option("--precision", "-K", default=DEFAULT_K, show_default=True, type=click.IntRange(1), help="Witness verification depth.")
@click.option("--out", type=click.Path(dir_okay=False), help="Write the JSON document to a file.")
def classify(group, endos, lin, as_json, precision, out):
    """Classify the family ENDOS of endomorphisms of GROUP."""
    A = _group(group)
    phis = _endos(A, endos)
    try:
        v = classify_general(A, phis, K=precision)
    except (ValueError, IllDefined) as exc:
        raise InputError(str(exc))
    doc = verdict_document(A, phis, v, precision)
    if as_json or out:
        _emit(doc, out)
    if not as_json:
        click.echo(f"group: {A}")
        for t, r in zip(endos, v.reports):
            click.echo(f"  {t}: rin={str(r.rin).lower()} lin={str(r.lin).lower()} ({r.reason})")
        click.echo(f"rin={str(v.rin).lower()} lin={str(v.lin).lower()}")
        if v.certificate is not None:
            click.echo("certificate: " + _describe_certificate(v.certificate))
        if v.witness is not None:
            click.echo("witness: " + _describe_witness(v.witness))
    ok = v.lin if lin else v.rin
    sys.exit(0 if ok else 1)


# ------------------------------------------------------------------- witness


@main.command()
@click.argument("group")
@click.argument("endo")
@click.option("--lin", is_flag=True, help="Look for a left-inertia witness (periodic groups).")
@click.option("--json", "as_json", is_flag=True, help="Print the witness document as JSON.")
@click.option("--precision", "-K", default=DEFAULT_K, show_default=True, type=click.IntRange(1))
@click.option("--out", type=click.Path(dir_okay=False))
def witness(group, endo, lin, as_json, precision, out):
    """Build and verify a witness that ENDO is not inertial on GROUP."""
    A = _group(group)
    (phi,) = _endos(A, [endo])
    if lin:
        try:
            w = primary_lin_witness(phi, precision)
        except WitnessRefused as exc:
            click.echo(f"no witness: {exc}")
            sys.exit(1)
        except ValueError as exc:
            raise InputError(str(exc))
    else:
        v = classify_general(A, [phi], K=precision)
        if v.rin:
            click.echo("no witness: the endomorphism is right-inertial")
            sys.exit(1)
        w = v.witness
    res = verify_witness(w, phi, precision)
    if as_json or out:
        _emit(witness_document(w, precision), out)
    if not as_json:
        click.echo(_describe_witness(w))
        top = precision if w.max_index is None else min(precision, w.max_index)
        for i in range(1, top + 1):
            X = w.member(i)
            Y = X.image(phi.apply)
            size = section_order(X, Y) if w.mode == "RIN" else section_order(Y, X)
            click.echo(f"  i={i:>3}  section={size}  claim={w.growth.value(i)}")
        click.echo("verified" if res.ok else f"FAILED at i={res.first_bad}: {res.detail}")
    sys.exit(0 if res.ok else 1)


# -------------------------------------------------------------------- verify


def verify_document(doc, K: Optional[int] = None):
    """Independent re-validation of a JSON document; returns (ok, message)."""
    A, endos, cert, wit = read_document(doc)
    K = K or int(doc.get("precision", DEFAULT_K))
    if doc["type"] == "verdict":
        if doc["rin"] and cert is None:
            return False, "rin=true without a certificate"
        if not doc["rin"] and wit is None:
            return False, "rin=false without a witness"
    if cert is not None:
        if isinstance(cert, LiftedCertificate):
            return False, "lifted certificates refer to another group and cannot be checked here"
        res = validate_certificate(cert, A, endos, K)
        if not res.ok:
            return False, f"certificate invalid: {res.reason}"
    if wit is not None:
        if not any(wit.endo == e for e in endos):
            return False, "witness endomorphism is not in the family"
        res = verify_witness(wit, wit.endo, K)
        if not res.ok:
            return False, f"witness fails at index {res.first_bad}: {res.detail}"
    return True, "ok"


@main.command()
@click.argument("file", type=click.File("r"))
@click.option("--precision", "-K", type=click.IntRange(1), default=None, help="Override the document's depth.")
def verify(file, precision):
    """Re-validate a certificate or witness document written by classify or witness."""
    try:
        doc = loads(file.read())
        ok, msg = verify_document(doc, precision)
    except (SchemaError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"schema mismatch: {exc}")
    click.echo(("PASS: " if ok else "FAIL: ") + msg)
    sys.exit(0 if ok else 1)


# -------------------------------------------------------------------- oracle


PRESETS = ("swap", "swap-cycle", "shear", "mult:<k>")


def _finite_endo(G: O.FiniteAbelianGroup, A: GroupDescriptor, text: str) -> O.FiniteEndo:
    n = G.n
    if text == "swap":
        if n < 2:
            raise InputError("swap needs two coordinates")
        cols = []
        for j in range(n):
            t = {0: 1, 1: 0}.get(j, j)
            cols.append([int(i == t) for i in range(n)])
        return O.FiniteEndo.from_columns(G, cols)
    if text == "swap-cycle":
        return O.FiniteEndo.from_columns(G, [[int(i == (j + 1) % n) for i in range(n)] for j in range(n)])
    if text == "shear":
        if n < 2:
            raise InputError("shear needs two coordinates")
        cols = [[int(i == j) for i in range(n)] for j in range(n)]
        cols[1][0] = 1
        return O.FiniteEndo.from_columns(G, cols)
    if text.startswith("mult:"):
        return O.FiniteEndo.multiplication(G, int(text[5:]))
    return O.FiniteEndo.from_endomorphism(G, _endos(A, [text])[0])


def _oracle_setup(group, cap):
    A = _group(group)
    if not A.is_finite:
        raise InputError("the oracle needs a finite group")
    G = O.FiniteAbelianGroup.from_descriptor(A)
    if G.order > cap:
        raise InputError(f"|G| = {G.order} exceeds the cap {cap}")
    return A, G


def _family(G, A, endo, random, seed):
    try:
        fam = [_finite_endo(G, A, e) for e in endo]
    except ValueError as exc:
        raise InputError(str(exc))
    rng = np.random.default_rng(seed)
    fam += [O.random_endo(G, rng) for _ in range(random)]
    return fam


@main.group()
def oracle():
    """Exhaustive computations on finite abelian groups."""


_cap = click.option("--cap", default=O.DEFAULT_CAP, show_default=True, type=click.IntRange(1), help="Largest group order.")
_endo = click.option("--endo", multiple=True, help=f"Endomorphism: a preset ({', '.join(PRESETS)}) or grammar text.")
_random = click.option("--random", default=0, type=click.IntRange(0), help="Add this many random endomorphisms.")
_seed = click.option("--seed", default=DEFAULT_SEED, show_default=True, type=int, help="Seed for --random.")
_json = click.option("--json", "as_json", is_flag=True, help="Print JSON.")


@oracle.command()
@click.argument("group")
@_cap
@_json
@click.option("--list", "list_all", is_flag=True, help="Print every subgroup's generators.")
def subgroups(group, cap, as_json, list_all):
    """Count (and optionally list) the subgroups of GROUP."""
    A, G = _oracle_setup(group, cap)
    n = O.count_subgroups(G, cap)
    indep = O.count_subgroups_independent(G)
    payload = {"schemaVersion": "1", "type": "subgroups", "group": str(A), "count": str(n), "formulaCount": str(indep)}
    if list_all:
        table = O.enumerate_subgroups(G, cap)
        payload["subgroups"] = [
            {"order": str(s.order), "generators": [[str(c) for c in G.decode(g)] for g in s.gens]} for s in table.subgroups
        ]
    if as_json:
        click.echo(json.dumps(payload, sort_keys=True, indent=2))
    else:
        click.echo(f"{A}: {n} subgroups (independent count {indep})")
        for s in payload.get("subgroups", []):
            click.echo(f"  order {s['order']}: " + " ".join("(" + ",".join(g) + ")" for g in s["generators"]))
    sys.exit(0 if n == indep else 1)


@oracle.command()
@click.argument("group")
@_endo
@_random
@_seed
@_cap
@_json
@click.option("--check", is_flag=True, help="Recompute every closure by the direct route as well.")
def bounds(group, endo, random, seed, cap, as_json, check):
    """Closure bound log|X^phi/X| <= m^2 for every subgroup X, one line per endomorphism."""
    A, G = _oracle_setup(group, cap)
    if G.prime is None:
        raise InputError("bounds need a p-group")
    fam = _family(G, A, endo, random, seed)
    if not fam:
        raise InputError("give --endo or --random")
    labels = list(endo) + [f"random#{i}" for i in range(random)]
    res = O.closure_bounds(G, fam, cap, check)
    rows = [{"endo": lab, "m": str(r.m), "worst": str(r.worst), "holds": r.holds} for lab, r in zip(labels, res)]
    if as_json:
        click.echo(json.dumps({"schemaVersion": "1", "type": "bounds", "group": str(A), "results": rows}, sort_keys=True, indent=2))
    else:
        for r in rows:
            click.echo(f"{r['endo']}: m={r['m']} worst={r['worst']} holds={str(r['holds']).lower()}")
    sys.exit(0 if all(r.holds for r in res) else 1)


@oracle.command()
@click.argument("group")
@_endo
@_random
@_seed
@_cap
@_json
@click.option("--check", is_flag=True, help="Recompute every closure by the direct route as well.")
def fs(group, endo, random, seed, cap, as_json, check):
    """Exact maximum of |X^Phi / X_Phi| for the family Phi given by --endo/--random."""
    A, G = _oracle_setup(group, cap)
    fam = _family(G, A, endo, random, seed)
    m = O.fs_bound(G, fam, cap, check)
    if as_json:
        click.echo(json.dumps({"schemaVersion": "1", "type": "fs", "group": str(A), "m": str(m)}, sort_keys=True, indent=2))
    else:
        click.echo(f"{A}: max |X^Phi/X_Phi| = {m}")
    sys.exit(0)


# ------------------------------------------------------------------- gallery


def _param(value: str):
    if "," in value:
        return [int(x) for x in value.split(",") if x]
    return int(value)


@main.command()
@click.argument("name", required=False)
@click.option("--param", "params", multiple=True, metavar="KEY=VALUE", help="Entry parameter, e.g. p=3 or s=1,0,2.")
@click.option("--list", "list_all", is_flag=True, help="List the entries.")
@_json
def gallery(name, params, list_all, as_json):
    """Print a gallery entry and re-run its checks."""
    if list_all or not name:
        for n in sorted(ENTRIES):
            click.echo(n)
        sys.exit(0)
    kw = {}
    for p in params:
        if "=" not in p:
            raise InputError(f"parameter {p!r} is not KEY=VALUE")
        k, v = p.split("=", 1)
        try:
            kw[k.strip()] = _param(v.strip())
        except ValueError:
            raise InputError(f"parameter {p!r} is not an integer or list")
    try:
        entry = get_entry(name, **kw)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(str(exc))
    results = entry.run()
    v = entry.verdict()
    if as_json:
        doc = {
            "schemaVersion": "1",
            "type": "gallery",
            "name": entry.name,
            "group": str(entry.group),
            "expected": {"rin": entry.expected.rin, "lin": entry.expected.lin},
            "verdict": {"rin": v.rin, "lin": v.lin},
            "checks": results,
        }
        click.echo(json.dumps(doc, sort_keys=True, indent=2))
    else:
        click.echo(f"{entry.name}: {entry.topic}")
        click.echo(f"  group: {entry.group}")
        click.echo(f"  expected rin={str(entry.expected.rin).lower()} lin={str(entry.expected.lin).lower()}")
        click.echo(f"  verdict  rin={str(v.rin).lower()} lin={str(v.lin).lower()}")
        for k, ok in results.items():
            click.echo(f"  {'PASS' if ok else 'FAIL'} {k}")
    sys.exit(0 if all(results.values()) else 1)


if __name__ == "__main__":
    main()
