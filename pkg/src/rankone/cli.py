"""Command line front-end: sharded enumeration, census ladders, local probes and invariant suites."""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import heapq
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path

from . import suites
from .arith import FactorizationError
from .census import CensusEntry, bound_nsat, final_proportion, fit_growth, tally
from .curves import CurveModel, SingularCurve, minimal_model, normalize
from .family import (
    FamilySpec,
    all_curves_family,
    builtin_family_F,
    count_curves,
    enumerate_curves,
    family_from_text,
    family_members,
    family_to_text,
    is_member,
    make_shards,
)
from .localdata import (
    Inconclusive,
    UnsupportedLocalCase,
    classify_reduction,
    local_mass,
    local_quotient,
)
from .parity import (
    DEFAULT_D,
    check_criteria,
    read_selmer_csv,
    relative_sign_direct,
    root_number,
    root_number_twist,
)
from .pfaffian import SkewQuintuple, locally_soluble_at, points_mod_p

log = logging.getLogger("rankone")

EXIT_OK, EXIT_INVARIANT, EXIT_INPUT = 0, 1, 2
DEFAULT_LADDER = "1e6,1e7,1e8,1e9,1e10"
SCHEMA_PATH = Path(__file__).with_name("schemas") / "curve_record.schema.json"


class InputError(ValueError):
    pass


# ---------------------------------------------------------------- parsing


def parse_height(s) -> int:
    try:
        d = Decimal(str(s).strip())
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a height: {s!r}")
    if d != d.to_integral_value() or d < 1:
        raise argparse.ArgumentTypeError(f"height must be a positive integer: {s!r}")
    return int(d)


def parse_ladder(s) -> list[int]:
    xs = [parse_height(x) for x in str(s).split(",") if x.strip()]
    if not xs:
        raise argparse.ArgumentTypeError("empty ladder")
    if any(a >= b for a, b in zip(xs, xs[1:])):
        raise argparse.ArgumentTypeError("ladder must be strictly increasing")
    return xs


def positive_int(s) -> int:
    n = int(s)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def load_family(selector: str) -> FamilySpec:
    if selector == "all":
        return all_curves_family()
    if selector == "F":
        return builtin_family_F()
    path = Path(selector)
    if not path.is_file():
        raise InputError(f"family file not found: {selector}")
    try:
        return family_from_text(path.read_text())
    except (configparser.Error, KeyError, ValueError) as exc:
        raise InputError(f"bad family file {selector}: {exc}")


def load_selmer(path):
    if path is None:
        return {}
    if not Path(path).is_file():
        raise InputError(f"Selmer data not found: {path}")
    try:
        return read_selmer_csv(path)
    except (KeyError, ValueError) as exc:
        raise InputError(f"bad Selmer file {path}: {exc}")


def read_config(path) -> dict:
    """Key-value file whose keys are the long flag names (height-max = 1e8)."""
    p = Path(path)
    if not p.is_file():
        raise InputError(f"config file not found: {path}")
    text = p.read_text()
    if not text.lstrip().startswith("["):
        text = "[rankone]\n" + text
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise InputError(f"bad config file {path}: {exc}")
    out = {}
    for section in cp.sections():
        for k, v in cp[section].items():
            out[k.replace("-", "_")] = v
    return out


# --------------------------------------------------------------- records


def curve_record(E: CurveModel, F: FamilySpec) -> dict:
    mm = minimal_model(E)
    reduction = {str(ell): classify_reduction(E, ell).kind for ell in mm.delta_min.primes}
    return {
        "A": E.A,
        "B": E.B,
        "H": E.height,
        "Delta": E.delta,
        "Delta1_factors": mm.delta_min.odd_part().as_list(),
        "conductor_odd_part": mm.conductor_odd_part,
        "reduction": reduction,
        "w": root_number(E).w,
        "in_F": bool(is_member(F, E, quick=True).member),
    }


def record_line(rec: dict) -> bytes:
    return (json.dumps(rec, separators=(",", ":")) + "\n").encode()


def record_key(line: bytes) -> tuple[int, int, int, int]:
    r = json.loads(line)
    return (r["H"], abs(r["A"]), r["A"], r["B"])


# ---------------------------------------------------------- checkpoints


class CheckpointMismatch(RuntimeError):
    pass


@dataclass
class Checkpoint:
    shard: int
    X: int
    a_lo: int
    a_hi: int
    family: str  # sha256 of the family text
    cursor: list | None = None  # last written (A, B)
    records: int = 0
    bytes: int = 0
    sha256: str = hashlib.sha256().hexdigest()
    done: bool = False
    tally: dict | None = None

    def matches(self, other: "Checkpoint") -> bool:
        return (self.shard, self.X, self.a_lo, self.a_hi, self.family) == (
            other.shard, other.X, other.a_lo, other.a_hi, other.family
        )


def _fresh_tally() -> dict:
    return {"N": 0, "in_F": 0, "w_plus": 0, "w_minus": 0, "w_unknown": 0}


def _count(t: dict, rec: dict) -> None:
    t["N"] += 1
    t["in_F"] += rec["in_F"]
    t[{1: "w_plus", -1: "w_minus", None: "w_unknown"}[rec["w"]]] += 1


def _write_json_atomic(path: Path, obj) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def _family_hash(F: FamilySpec) -> str:
    return hashlib.sha256(family_to_text(F).encode()).hexdigest()


def shard_paths(out: Path, index: int) -> tuple[Path, Path]:
    d = out / "shards"
    return d / f"shard-{index:04d}.jsonl", d / f"shard-{index:04d}.ckpt.json"


def _resume(data: Path, ck: Checkpoint):
    """Truncate the shard file to the checkpointed length and verify its hash."""
    if not data.exists():
        raise CheckpointMismatch(f"{data} missing")
    with open(data, "r+b") as fh:
        fh.truncate(ck.bytes)
        h = hashlib.sha256()
        while chunk := fh.read(1 << 20):
            h.update(chunk)
    if h.hexdigest() != ck.sha256:
        raise CheckpointMismatch(f"{data} does not match its checkpoint")
    return h


def run_shard(shard, F: FamilySpec, out: Path, every: int = 1000, stop_after: int | None = None) -> Checkpoint:
    """Write one shard, resuming from its checkpoint when one is present.

    ``stop_after`` abandons the run after that many new records without a
    final checkpoint, which is how an interrupted run looks on disk.
    """
    data, ckpath = shard_paths(out, shard.index)
    data.parent.mkdir(parents=True, exist_ok=True)
    want = Checkpoint(shard.index, shard.X, shard.a_lo, shard.a_hi, _family_hash(F), tally=_fresh_tally())
    ck = want
    h = hashlib.sha256()
    if ckpath.exists():
        old = Checkpoint(**json.loads(ckpath.read_text()))
        if old.matches(want):
            try:
                h = _resume(data, old)
                ck = old
            except CheckpointMismatch as exc:
                log.warning("%s; restarting shard %d", exc, shard.index)
                h, ck = hashlib.sha256(), want
    if ck.done:
        return ck
    if ck is want:
        data.write_bytes(b"")
        _write_json_atomic(ckpath, ck.__dict__)
    cursor = None
    if ck.cursor is not None:
        A, B = ck.cursor
        cursor = CurveModel(A, B).sort_key
    written = 0
    with open(data, "ab") as fh:
        for E in enumerate_curves(shard.X, F, shard):
            if cursor is not None and E.sort_key <= cursor:
                continue
            rec = curve_record(E, F if not F.is_all else builtin_family_F())
            line = record_line(rec)
            fh.write(line)
            h.update(line)
            ck.records += 1
            ck.bytes += len(line)
            ck.cursor = [E.A, E.B]
            _count(ck.tally, rec)
            written += 1
            if stop_after is not None and written >= stop_after:
                fh.flush()
                return ck
            if ck.records % every == 0:
                fh.flush()
                os.fsync(fh.fileno())
                ck.sha256 = h.hexdigest()
                _write_json_atomic(ckpath, ck.__dict__)
        fh.flush()
        os.fsync(fh.fileno())
    ck.sha256 = h.hexdigest()
    ck.done = True
    _write_json_atomic(ckpath, ck.__dict__)
    return ck


def merge_shards(out: Path, n: int) -> tuple[int, str]:
    """k-way merge of the shard files into curves.jsonl; returns (records, sha256)."""
    files = [open(shard_paths(out, i)[0], "rb") for i in range(n)]
    h = hashlib.sha256()
    count = 0
    try:
        with open(out / "curves.jsonl", "wb") as dst:
            for line in heapq.merge(*files, key=record_key):
                dst.write(line)
                h.update(line)
                count += 1
    finally:
        for fh in files:
            fh.close()
    return count, h.hexdigest()


def cmd_enumerate(args, stop_after: int | None = None) -> int:
    if args.height_max is None:
        raise InputError("--height-max is required")
    if args.height_max < 27:
        raise InputError("--height-max must be at least 27")
    F = load_family(args.family)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    shards = make_shards(args.height_max, args.shards)
    totals = _fresh_tally()
    for sh in shards:
        ck = run_shard(sh, F, out, args.checkpoint_every, stop_after)
        if not ck.done:
            log.info("shard %d interrupted after %d records", sh.index, ck.records)
            return EXIT_OK
        for k in totals:
            totals[k] += ck.tally[k]
        log.info("shard %d: %d records", sh.index, ck.records)
    records, digest = merge_shards(out, len(shards))
    bad = records != totals["N"]
    if not F.is_all:
        bad |= totals["in_F"] != records
    manifest = {
        "X": args.height_max,
        "family": F.name,
        "family_sha256": _family_hash(F),
        "shards": len(shards),
        "records": records,
        "curves_sha256": digest,
        "tally": totals,
        "schema": SCHEMA_PATH.name,
    }
    _write_json_atomic(out / "manifest.json", manifest)
    print(json.dumps(manifest, indent=1))
    return EXIT_INVARIANT if bad else EXIT_OK


# ---------------------------------------------------------------- census


def ladder_point(X: int, F: FamilySpec, selmer: dict, p: int = 5) -> dict:
    N_all = count_curves(X)
    if F.is_all:
        t = tally(X, [])
        t.N, t.N_parity_unknown = N_all, N_all
    else:
        entries = []
        for E in family_members(X, F):
            s = selmer.get((E.A, E.B))
            entries.append(
                CensusEntry(E.A, E.B, root_number(E).w, s.s5 if s else None, s.s5_twist if s else None)
            )
        t = tally(X, entries)
    b = bound_nsat(t, p)
    return {"X": X, "N_all": N_all, "N_family": t.N, "ratio": t.N / N_all if N_all else 0.0,
            "tally": t.to_json(), "bounds": b.to_json()}


def plot_growth(points: list[dict], fit_all, fit_fam, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4.5))
    xs = [pt["X"] for pt in points]
    ax.loglog(xs, [pt["N_all"] for pt in points], "o", label="all curves")
    fam = [(pt["X"], pt["N_family"]) for pt in points if pt["N_family"] > 0]
    if fam:
        ax.loglog(*zip(*fam), "s", label="family")
    for fit in (fit_all, fit_fam):
        if fit is not None:
            ys = [math.exp(fit.intercept) * x**fit.slope for x in xs]
            ax.loglog(xs, ys, "-", lw=1, label=f"fit, slope {fit.slope:.4f}")
    ref = points[-1]["N_all"] * (xs[0] / xs[-1]) ** (5 / 6)
    ax.loglog([xs[0], xs[-1]], [ref, points[-1]["N_all"]], ":", color="gray", label="slope 5/6")
    ax.set_xlabel("height bound X")
    ax.set_ylabel("curves with H < X")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_density(points: list[dict], path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx([pt["X"] for pt in points], [pt["ratio"] for pt in points], "o-")
    ax.set_xlabel("height bound X")
    ax.set_ylabel("family / all")
    ax.set_ylim(bottom=0)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


CSV_FIELDS = [
    "X", "N_all", "N_family", "ratio", "N_even", "N_odd", "N_parity_unknown", "coverage",
    "coverage_twist", "ntilde1_upper", "ntilde1_twist_upper", "nsat_lower", "nsat_twist_lower",
    "combined_chain_lower", "combined_lower", "worst_case", "tally_consistent",
]


def cmd_census(args) -> int:
    F = load_family(args.family)
    selmer = load_selmer(args.selmer)
    ladder = args.ladder
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    points = []
    for X in ladder:
        log.info("census at X = %d", X)
        points.append(ladder_point(X, F, selmer))
    fit_all = fit_growth(ladder, [pt["N_all"] for pt in points]) if len(ladder) > 1 else None
    fam_counts = [pt["N_family"] for pt in points]
    fit_fam = None
    if not F.is_all and sum(c > 0 for c in fam_counts) >= 2:
        fit_fam = fit_growth(ladder, fam_counts)
    top = points[-1]
    report = {
        "family": F.name,
        "ladder": ladder,
        "points": points,
        "growth_all": None if fit_all is None else {"slope": fit_all.slope, "constant": fit_all.constant},
        "growth_family": None if fit_fam is None else {"slope": fit_fam.slope, "constant": fit_fam.constant},
        "final_proportion": final_proportion(Fraction(top["N_family"], top["N_all"]), 1).to_json(),
        "selmer_records": len(selmer),
    }
    if len(points) > 1:
        a, b = points[-2]["ratio"], points[-1]["ratio"]
        gap = abs(a - b) / max(a, b) if max(a, b) > 0 else None
        report["density"] = {"ratios": [a, b], "relative_gap": gap,
                             "stable_within_20pct": gap is not None and gap <= 0.2 and min(a, b) > 0}
    inconsistent = sum(pt["tally"]["inconsistent_records"] for pt in points)
    (out / "census.json").write_text(json.dumps(report, indent=1) + "\n")
    with open(out / "census.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, CSV_FIELDS)
        w.writeheader()
        for pt in points:
            t, b = pt["tally"], pt["bounds"]
            row = {k: pt[k] for k in ("X", "N_all", "N_family", "ratio")}
            row.update({k: t[k] for k in ("N_even", "N_odd", "N_parity_unknown", "coverage", "coverage_twist")})
            row.update({k: b[k] for k in CSV_FIELDS[9:]})
            w.writerow(row)
    if len(points) > 1:
        plot_growth(points, fit_all, fit_fam, out / "growth.png")
        if not F.is_all:
            plot_density(points, out / "density.png")
    print(json.dumps({k: report[k] for k in ("growth_all", "growth_family", "final_proportion")}, indent=1))
    return EXIT_INVARIANT if inconsistent else EXIT_OK


# ---------------------------------------------------------------- verify


def validate_database(out: Path, F: FamilySpec) -> suites.SuiteResult:
    """Re-derive every record of curves.jsonl and check its schema and order."""
    res = suites.SuiteResult("curve database re-derivation")
    path = out / "curves.jsonl"
    try:
        import jsonschema

        validator = jsonschema.Draft202012Validator(json.loads(SCHEMA_PATH.read_text()))
    except ImportError:
        validator = None
    last = None
    F_ref = F if not F.is_all else builtin_family_F()
    with open(path, "rb") as fh:
        for line in fh:
            rec = json.loads(line)
            errs = [e.message for e in validator.iter_errors(rec)] if validator else []
            E = CurveModel(rec["A"], rec["B"])
            key = E.sort_key
            ok = not errs and rec == curve_record(E, F_ref) and (last is None or key > last)
            if not F.is_all:
                ok &= rec["in_F"] and rec["conductor_odd_part"] is not None
                ok &= all(e == 1 for _, e in rec["Delta1_factors"])
            last = key
            res.record(ok, {"record": rec, "schema_errors": errs})
    return res


def run_suites(seed: int, scale: float = 1.0) -> list[suites.SuiteResult]:
    n = lambda k: max(1, int(k * scale))  # noqa: E731
    return [
        suites.opposite_signs(n(500), DEFAULT_D),
        suites.kummer_away(n(1000), seed),
        suites.kummer_at_p(n(1000), seed),
        suites.residue_ring_equivalence(n(500), seed),
        suites.perturbation_pairs(n(200), seed),
    ]


def run_pfaffian_suites(seed: int, scale: float = 1.0) -> list[suites.SuiteResult]:
    n = lambda k: max(1, int(k * scale))  # noqa: E731
    return [
        suites.pf_squared(n(10**4), seed),
        suites.det_vanishes(n(100), seed),
        suites.scalar_trivial(11, seed),
        suites.equivariance(n(100), seed),
    ]


def _report_suites(results, out: Path, name: str) -> int:
    body = {"suites": [r.to_json() for r in results], "ok": all(r.ok for r in results)}
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(json.dumps(body, indent=1) + "\n")
    for r in results:
        print(f"{'PASS' if r.ok else 'FAIL'}  {r.passed}/{r.total}  {r.name}")
    return EXIT_OK if body["ok"] else EXIT_INVARIANT


def cmd_verify(args) -> int:
    out = Path(args.out)
    results = run_suites(args.seed, args.scale)
    if (out / "curves.jsonl").exists():
        results.append(validate_database(out, load_family(args.family)))
    return _report_suites(results, out, "verify.json")


def cmd_pfaffian(args) -> int:
    out = Path(args.out)
    if args.quintuple is None:
        return _report_suites(run_pfaffian_suites(args.seed, args.scale), out, "pfaffian.json")
    path = Path(args.quintuple)
    if not path.is_file():
        raise InputError(f"quintuple file not found: {path}")
    try:
        v = SkewQuintuple.from_json(json.loads(path.read_text()))
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"bad quintuple file {path}: {exc}")
    body = {"points": {}, "solubility": {}}
    for p in args.primes:
        ps = points_mod_p(v.reduce(p), p)
        body["points"][str(p)] = {"count": len(ps.points), "all_smooth": ps.all_smooth,
                                  "degenerate": ps.degenerate, "in_hasse_window": ps.in_hasse_window()}
        r = locally_soluble_at(v, p)
        body["solubility"][str(p)] = {"verdict": r.verdict, "witness": r.witness, "flags": list(r.flags)}
    out.mkdir(parents=True, exist_ok=True)
    (out / "pfaffian.json").write_text(json.dumps(body, indent=1, default=str) + "\n")
    print(json.dumps(body, indent=1, default=str))
    return EXIT_OK


# ----------------------------------------------------------------- local


def cmd_local(args) -> int:
    if args.mass:
        if args.ell is None:
            raise InputError("--mass needs --ell")
        F = load_family(args.family)
        m = local_mass(F, args.ell, args.p, k=args.depth)
        body = {"family": F.name, "ell": args.ell, "p": args.p, "ratio": str(m.ratio),
                "stderr": m.stderr, "used": m.used, "skipped": m.skipped, "mode": m.mode}
        print(json.dumps(body, indent=1))
        return EXIT_OK
    if args.curve is None:
        raise InputError("--curve A,B is required")
    try:
        A, B = (int(x) for x in args.curve.split(","))
        E = normalize(A, B)
    except (ValueError, SingularCurve) as exc:
        raise InputError(f"bad curve {args.curve!r}: {exc}")
    selmer = load_selmer(args.selmer).get((E.A, E.B))
    mm = minimal_model(E)
    w = root_number(E)
    body = {
        "curve": [E.A, E.B],
        "H": E.height,
        "minimal_discriminant": str(mm.delta_min),
        "conductor_odd_part": mm.conductor_odd_part,
        "reduction": {str(ell): classify_reduction(E, ell).kind for ell in mm.delta_min.primes},
        "w": w.w,
        "w_note": w.reason,
        "in_F": is_member(builtin_family_F(), E).verdicts,
        "twist_sign": {"chi_route": root_number_twist(E, DEFAULT_D).relative_sign,
                       "direct_route": relative_sign_direct(E, DEFAULT_D).relative_sign},
        "criteria": {},
    }
    for which in ("crit1", "crit2"):
        rep = check_criteria(E, which, selmer, args.p)
        body["criteria"][which] = {"verdicts": rep.verdicts, "support": rep.support}
    if args.ell is not None:
        try:
            body["local_quotient"] = local_quotient(E, args.ell, args.p).to_json()
        except (UnsupportedLocalCase, Inconclusive) as exc:
            body["local_quotient"] = {"error": str(exc)}
    print(json.dumps(body, indent=1, default=str))
    return EXIT_OK


def cmd_family_show(args) -> int:
    sys.stdout.write(family_to_text(load_family(args.which)))
    return EXIT_OK


# ------------------------------------------------------------------ main


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key-value file mirroring these flags")
    common.add_argument("--height-max", type=parse_height)
    common.add_argument("--family", default="F", help="all, F, or a family file")
    common.add_argument("--shards", type=positive_int, default=1)
    common.add_argument("--selmer", help="CSV with columns A, B, s5, s5_twist, ...")
    common.add_argument("--out", default="rankone-out")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--ladder", type=parse_ladder, default=DEFAULT_LADDER)
    common.add_argument("--checkpoint-every", type=positive_int, default=1000)
    common.add_argument("--scale", type=float, default=1.0, help="multiplier on suite case counts")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="rankone", description=__doc__)
    sub = ap.add_subparsers(dest="verb", required=True)
    sub.add_parser("enumerate", parents=[common], help="sharded, resumable curve database").set_defaults(
        func=cmd_enumerate)
    sub.add_parser("census", parents=[common], help="counts, bounds and growth fit over a ladder").set_defaults(
        func=cmd_census)
    sub.add_parser("verify", parents=[common], help="invariant suites").set_defaults(func=cmd_verify)
    loc = sub.add_parser("local", parents=[common], help="local data of one curve, or a local mass")
    loc.add_argument("--curve", help="A,B")
    loc.add_argument("--ell", type=int)
    loc.add_argument("--p", type=int, default=5)
    loc.add_argument("--mass", action="store_true")
    loc.add_argument("--depth", type=int, default=2)
    loc.set_defaults(func=cmd_local)
    fam = sub.add_parser("family", help="family definitions")
    fam_sub = fam.add_subparsers(dest="action", required=True)
    show = fam_sub.add_parser("show", parents=[common])
    show.add_argument("which", help="F, all, or a family file")
    show.set_defaults(func=cmd_family_show)
    pf = sub.add_parser("pfaffian", parents=[common], help="Pfaffian suites, or points of one quintuple")
    pf.add_argument("--quintuple", help="JSON file of a quintuple over Z")
    pf.add_argument("--primes", type=lambda s: [int(x) for x in s.split(",")], default=[3, 5, 7])
    pf.set_defaults(func=cmd_pfaffian)
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv) -> argparse.Namespace:
    args = ap.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    cfg = read_config(args.config)
    known = set(vars(args))
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise InputError(f"unknown config keys: {', '.join(unknown)}")
    # flags given on the command line win over the file
    given = {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    for k, v in cfg.items():
        if k in given:
            continue
        action = next((a for a in _actions(ap) if a.dest == k), None)
        if action is not None and action.type is not None:
            try:
                v = action.type(v)
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise InputError(f"config key {k}: {exc}")
        elif action is not None and isinstance(action, argparse._StoreTrueAction):
            v = v.strip().lower() in ("1", "true", "yes", "on")
        setattr(args, k, v)
    return args


def _actions(ap: argparse.ArgumentParser):
    for a in ap._actions:
        yield a
        if isinstance(a, argparse._SubParsersAction):
            for p in a.choices.values():
                yield from _actions(p)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = _apply_config(ap, argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        if isinstance(args.ladder, str):
            args.ladder = parse_ladder(args.ladder)
        return args.func(args)
    except InputError as exc:
        print(f"rankone: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FactorizationError as exc:
        print(f"rankone: factorization budget exhausted: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
