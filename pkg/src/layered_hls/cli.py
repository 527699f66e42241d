"""Command-line driver: ``layered-hls synth | db | sim | verify | bench``.

Exit codes: 0 success, 1 usage error, 2 compile/simulation error,
3 verification failure, 4 I/O error (including a corrupt database file).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import benchmarks
from .errors import AdjacencyError, DatabaseIoError, FormatError, HlsError, VectorError
from .estimator import (
    CostModel, GNUPLOT_SCRIPT, format_table, load_cost_model, report_csv, report_dat,
)
from .frontend import parse
from .macrodb import MacroDatabase, load, save
from .pe_model import read_placement, validate_adjacency
from .pipeline import MODES, compare_conditions, register_operators, synthesize
from .netlist import parse_netlist
from .simulator import check_equivalence, random_vectors, read_vectors, simulate, write_results

DB_ENV = "LAYERED_HLS_DB"
EXIT_OK, EXIT_USAGE, EXIT_COMPILE, EXIT_VERIFY, EXIT_IO = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    """Resolved options shared by the subcommands."""
    mode: str = "operator"
    limits: dict[str, int | None] = field(default_factory=dict)
    cost_path: Path | None = None
    db_path: Path | None = None
    placement_path: Path | None = None
    out_dir: Path = Path("build")
    seed: int = 0

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        db = getattr(args, "db", None) or os.environ.get(DB_ENV)
        cost = getattr(args, "cost", None)
        placement = getattr(args, "placement", None)
        return cls(
            mode=getattr(args, "mode", "operator"),
            limits=_parse_limits(getattr(args, "limit", None) or []),
            cost_path=Path(cost).resolve() if cost else None,
            db_path=Path(db).resolve() if db else None,
            placement_path=Path(placement).resolve() if placement else None,
            out_dir=Path(getattr(args, "output", None) or "build").resolve(),
            seed=getattr(args, "seed", 0) or 0,
        )

    def model(self) -> CostModel:
        return load_cost_model(_read(self.cost_path)) if self.cost_path else CostModel()

    def database(self, *, must_exist: bool) -> MacroDatabase:
        if self.db_path is None:
            if must_exist:
                raise UsageError(f"no database given (use --db or set {DB_ENV})")
            return MacroDatabase()
        if not self.db_path.exists():
            if must_exist:
                raise DatabaseIoError(f"database {self.db_path} does not exist")
            return MacroDatabase()
        try:
            return load(self.db_path)
        except FormatError as exc:
            exc.source_path = str(self.db_path)
            raise


def _parse_limits(items: list[str]) -> dict[str, int | None]:
    limits: dict[str, int | None] = {}
    for item in items:
        cls, sep, value = item.partition("=")
        if not sep or not cls:
            raise UsageError(f"--limit expects <class>=<n>, got {item!r}")
        if value == "inf":
            limits[cls] = None
        elif value.isdigit() and int(value) >= 1:
            limits[cls] = int(value)
        else:
            raise UsageError(f"--limit value must be a positive integer or 'inf', got {value!r}")
    return limits


def _read(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _parse_source(path: str, entry: str | None = None):
    try:
        return parse(_read(path), entry)
    except HlsError as exc:
        exc.source_path = path
        raise


# ---------------------------------------------------------------------------
# subcommands

def cmd_synth(args) -> int:
    cfg = RunConfig.from_args(args)
    program = _parse_source(args.file, args.entry)
    model = cfg.model()
    db = cfg.database(must_exist=False)
    placement = read_placement(_read(cfg.placement_path)) if cfg.placement_path else None
    result = synthesize(program, cfg.mode, db, limits=cfg.limits, model=model,
                        placement=placement, num_pes=args.num_pes,
                        benchmark=Path(args.file).stem)
    bad = validate_adjacency(result.array)
    if bad:
        raise AdjacencyError("bypass between non-adjacent PEs: "
                             + ", ".join(f"{a}->{b}" for a, b, _ in bad))
    stem = f"{Path(args.file).stem}.{cfg.mode}"
    _write(cfg.out_dir / f"{stem}.fsmd", result.text)
    _write(cfg.out_dir / f"{stem}.sched", result.schedule.dump())
    _write(cfg.out_dir / f"{stem}.bind", result.binding.dump(result.schedule))
    _write(cfg.out_dir / f"{stem}.csv", report_csv([result.report]))
    r = result.report
    print(f"{cfg.out_dir / stem}.fsmd: {r.cycles} states, {len(result.binding.units)} units, "
          f"lut={r.lut_total} lut_excl_basic={r.lut_excl_basic} regbits={r.register_bits} "
          f"n={result.array.n} m={result.array.m}")
    return EXIT_OK


def cmd_db_register(args) -> int:
    cfg = RunConfig.from_args(args)
    if cfg.db_path is None:
        raise UsageError(f"no database given (use --db or set {DB_ENV})")
    program = _parse_source(args.file)
    db = cfg.database(must_exist=False)
    blocks = register_operators(program, db, cfg.model(), replace=not args.no_replace)
    save(db, cfg.db_path)
    for b in blocks:
        print(f"registered {b.signature} latency={b.latency_cycles} lut={b.lut_cost} "
              f"regbits={b.register_bits} rev={b.revision}")
    if not blocks:
        print("no operator functions found")
    return EXIT_OK


def cmd_db_list(args) -> int:
    db = RunConfig.from_args(args).database(must_exist=True)
    for b in db.sorted_entries():
        print(f"{b.signature} latency={b.latency_cycles} lut={b.lut_cost} "
              f"regbits={b.register_bits} digest={b.body_digest} rev={b.revision}")
    return EXIT_OK


def cmd_sim(args) -> int:
    netlist = parse_netlist(_read(args.file))
    ports = [(p.name, p.width) for p in netlist.inputs]
    if args.vectors:
        vectors = read_vectors(_read(args.vectors))
        if not vectors:
            raise VectorError(f"{args.vectors} contains no vectors")
    else:
        vectors = random_vectors(ports, args.random, args.seed)
    results = [simulate(netlist, v) for v in vectors]
    text = write_results(results)
    if args.output:
        _write(Path(args.output), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = RunConfig.from_args(args)
    program = _parse_source(args.file, args.entry)
    db = cfg.database(must_exist=False)
    result = synthesize(program, cfg.mode, db, limits=cfg.limits, model=cfg.model())
    verdict = check_equivalence(program, result.netlist, args.random, cfg.seed)
    print(f"{args.file} [{cfg.mode}]: {verdict}")
    return EXIT_OK if verdict.passed else EXIT_VERIFY


def cmd_bench(args) -> int:
    cfg = RunConfig.from_args(args)
    model = cfg.model()
    db = cfg.database(must_exist=False) if cfg.db_path else None
    programs = {name: benchmarks.load(name) for name in benchmarks.NAMES}
    reports = compare_conditions(programs, db, model)
    _write(cfg.out_dir / "figure4.csv", report_csv(reports))
    _write(cfg.out_dir / "figure4.dat", report_dat(reports))
    _write(cfg.out_dir / "figure4.gp", GNUPLOT_SCRIPT)
    sys.stdout.write(format_table(reports))
    cell = {(r.benchmark, r.condition): r for r in reports}
    flat_ratio = cell[("cascade", "flat")].lut_total / cell[("single", "flat")].lut_total
    print(f"flat cascade/single lut ratio: {flat_ratio:.3f}")
    for bench in benchmarks.NAMES:
        op, frra = cell[(bench, "operator")].lut_total, cell[(bench, "frra")].lut_total
        print(f"{bench}: operator uses {100 * (1 - op / frra):.1f}% fewer LUTs than frra")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="layered-hls", description="Layered-PE high-level synthesis toolchain")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="synthesize a .cyb program into an .fsmd netlist")
    s.add_argument("file")
    s.add_argument("--mode", choices=MODES, default="operator")
    s.add_argument("--db", help=f"macro database (default: ${DB_ENV})")
    s.add_argument("--limit", action="append", metavar="CLASS=N",
                   help="resource limit override, e.g. mul=2 or alu=inf")
    s.add_argument("--cost", help="cost-model config file")
    s.add_argument("--placement", help="placement file with 'place <unit> <pe>' lines")
    s.add_argument("--num-pes", type=int, default=None)
    s.add_argument("--entry", help="entry function (default: top or the unique uncalled function)")
    s.add_argument("-o", "--output", default="build", help="output directory")
    s.set_defaults(func=cmd_synth)

    d = sub.add_parser("db", help="manage the macro database")
    dsub = d.add_subparsers(dest="db_command", required=True, parser_class=_Parser)
    r = dsub.add_parser("register", help="register every operator function of a source")
    r.add_argument("file")
    r.add_argument("--db")
    r.add_argument("--cost")
    r.add_argument("--no-replace", action="store_true",
                   help="fail instead of replacing an entry whose body changed")
    r.set_defaults(func=cmd_db_register)
    ls = dsub.add_parser("list", help="print database entries")
    ls.add_argument("--db")
    ls.set_defaults(func=cmd_db_list)

    m = sub.add_parser("sim", help="simulate an .fsmd netlist")
    m.add_argument("file")
    src = m.add_mutually_exclusive_group(required=True)
    src.add_argument("--vectors", help="vector file with 'in <port> = <int>' lines")
    src.add_argument("--random", type=int, help="number of random vectors")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("-o", "--output", help="result file (default: stdout)")
    m.set_defaults(func=cmd_sim)

    v = sub.add_parser("verify", help="check netlist against the reference interpreter")
    v.add_argument("file")
    v.add_argument("--mode", choices=MODES, default="operator")
    v.add_argument("--db")
    v.add_argument("--limit", action="append", metavar="CLASS=N")
    v.add_argument("--cost")
    v.add_argument("--random", type=int, default=100)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--entry")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="run a built-in experiment")
    b.add_argument("experiment", choices=["figure4"])
    b.add_argument("--db")
    b.add_argument("--cost")
    b.add_argument("-o", "--output", default="build")
    b.set_defaults(func=cmd_bench)
    return p


def _report(exc: HlsError) -> str:
    where = getattr(exc, "source_path", None)
    loc = ""
    if where and exc.line is not None:
        loc = f"{where}:{exc.line}:{exc.col}: "
    elif exc.line is not None:
        loc = f"{exc.line}:{exc.col}: "
    return f"error[{exc.module}]: {loc}{exc.message}"


def run(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "random", None) is not None and args.random < 0:
            raise UsageError("--random must be >= 0")
        return args.func(args)
    except UsageError as exc:
        print(f"error[cli]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DatabaseIoError, FormatError) as exc:
        print(_report(exc), file=sys.stderr)
        return EXIT_IO
    except HlsError as exc:
        print(_report(exc), file=sys.stderr)
        return EXIT_COMPILE
    except OSError as exc:
        print(f"error[cli]: {exc.filename or ''}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    except UnicodeDecodeError as exc:
        print(f"error[cli]: input is not UTF-8 text ({exc.reason})", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
