"""Reproducible experiment driver.

Every experiment is described by a flat JSON config (one level, no
nesting) with a mandatory integer seed for anything stochastic; results
are CSV/JSON files plus a manifest echoing the full config, the library
version, and the wall-clock time.  Re-running an archived config
reproduces the output files bit-for-bit.

Exit codes: 0 success, 2 config/schema violation, 3 exactness cap
exceeded, 4 eigensolver non-convergence, 5 validation checks failed,
1 anything else.  The only environment knobs are STRINGNET_WORKERS (numba
thread count) and STRINGNET_BACKEND (kernel backend; both backends
produce identical outputs).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, automaton, opcompile, oracle, paths, spectral, tensors
from .geometry import build_brickwork
from .zn import PauliFactor, PauliString

EXIT_OK = 0
EXIT_GENERIC = 1
EXIT_SCHEMA = 2
EXIT_CAP = 3
EXIT_CONVERGENCE = 4
EXIT_VALIDATION = 5


class ConfigError(Exception):
    pass


def _fmt(x: float) -> str:
    return repr(float(x))


def _load_config(path: str, experiment: str, required: list[str], optional: dict) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a flat JSON object")
    for v in cfg.values():
        if isinstance(v, (dict, list)) and not _is_observable(v):
            raise ConfigError("config must be flat (observable specs excepted)")
    if cfg.get("experiment") != experiment:
        raise ConfigError(f"config experiment {cfg.get('experiment')!r} != {experiment!r}")
    missing = [k for k in required if k not in cfg]
    if missing:
        raise ConfigError(f"missing config keys: {missing}")
    out = dict(optional)
    out.update(cfg)
    return out


def _is_observable(v) -> bool:
    return isinstance(v, dict) and all(
        isinstance(val, list) and len(val) == 2 for val in v.values()
    )


def _write_manifest(out_path: Path, cfg: dict, t_start: float, outputs: list[str]) -> None:
    manifest = {
        "config": cfg,
        "version": __version__,
        "wall_clock_s": time.time() - t_start,
        "outputs": outputs,
    }
    out_path.with_suffix(out_path.suffix + ".manifest.json").write_text(
        json.dumps(manifest, indent=1, sort_keys=True)
    )


def _resolve_rule(cfg: dict) -> automaton.StochasticRule:
    name = cfg["rule"]
    if name == "wq":
        return automaton.rule_from_single_line(paths.fixed_point_wq(), sub_sites=4)
    if name == "wp":
        return automaton.rule_from_single_line(paths.fixed_point_wp(), sub_sites=4)
    if name == "z9":
        return automaton.rule_from_single_line(tensors.toric_code_single_line(9), sub_sites=4)
    if name in paths.REGISTRY:
        g = cfg.get("g")
        if g is None:
            raise ConfigError("path rules need a 'g' value")
        t = paths.evaluate_path(name, float(g))
        spec = paths.REGISTRY[name]
        w = opcompile.reduce_double_to_single(t) if spec.tensor_kind == "double-line" else t
        return automaton.rule_from_single_line(w, sub_sites=4 if spec.modulus == 9 else 2)
    raise ConfigError(f"unknown rule {name!r}")


def _parse_observable(spec: dict, modulus: int) -> PauliString:
    factors = {}
    for edge, (z, x) in spec.items():
        factors[int(edge)] = PauliFactor(int(z) % modulus, int(x) % modulus)
    return PauliString(modulus, factors)


def run_path_scan(cfg: dict) -> int:
    t_start = time.time()
    name = cfg["path"]
    if name not in paths.REGISTRY:
        raise ConfigError(f"unknown path {name!r}")
    grid = paths.path_grid(name, int(cfg["points"]), int(cfg["refine"]))
    rows = spectral.path_scan(name, grid, int(cfg["L"]), seed=int(cfg["seed"]))
    out = Path(cfg["out"])
    with out.open("w") as f:
        f.write("path,g,L,eta2_abs,xi,mode,residual\n")
        for g, eta2, xi, _mult, mode, residual in rows:
            f.write(
                f"{name},{_fmt(g)},{int(cfg['L'])},{_fmt(eta2)},{_fmt(xi)},{mode},{_fmt(residual)}\n"
            )
    _write_manifest(out, cfg, t_start, [str(out)])
    print(f"path-scan {name}: {len(rows)} grid points -> {out}")
    return EXIT_OK


def run_sample(cfg: dict) -> int:
    t_start = time.time()
    name = cfg["path"]
    spec = paths.REGISTRY[name]
    if spec.tensor_kind != "single-line" or spec.modulus == 9:
        raise ConfigError("sample supports the N<=4 single-line paths")
    w = paths.evaluate_path(name, float(cfg["g"]))
    width, depth = int(cfg["width"]), int(cfg["depth"])
    patch = build_brickwork(width, 2 * depth)
    op = _parse_observable(cfg["observable"], spec.modulus)
    compiled = opcompile.compile_single_line(patch, w, op)
    rule = automaton.rule_from_single_line(w)
    boundary = automaton.uniform_boundary(width, spec.modulus)
    stats = automaton.estimate_diagonal(
        rule, compiled, patch.layout(), boundary, width, int(cfg["samples"]), int(cfg["seed"]),
        depth=depth,
    )
    exact = None
    if cfg["check_oracle"]:
        state = oracle.contract_brickwork_single(patch, w)
        exact = oracle.exact_expectation(state, compiled)
    out = Path(cfg["out"])
    with out.open("w") as f:
        if exact is None:
            f.write("re,im,stderr,samples,seed\n")
            f.write(
                f"{_fmt(stats.estimate.real)},{_fmt(stats.estimate.imag)},"
                f"{_fmt(stats.standard_error)},{stats.samples},{stats.seed}\n"
            )
        else:
            f.write("re,im,stderr,samples,seed,exact_re,exact_im\n")
            f.write(
                f"{_fmt(stats.estimate.real)},{_fmt(stats.estimate.imag)},"
                f"{_fmt(stats.standard_error)},{stats.samples},{stats.seed},"
                f"{_fmt(exact.real)},{_fmt(exact.imag)}\n"
            )
    _write_manifest(out, cfg, t_start, [str(out)])
    print(f"sample {name} g={cfg['g']}: {stats.estimate:.6f} +/- {stats.standard_error:.2e}")
    return EXIT_OK


def _correlator_header(cfg: dict) -> str:
    keys = ["rule", "g", "k", "x", "width", "rmax", "samples", "seed", "t0", "nref", "geometry"]
    parts = [f"{k}={cfg[k]}" for k in keys if cfg.get(k) is not None]
    return "# " + " ".join(parts)


def run_correlator(cfg: dict) -> int:
    t_start = time.time()
    rule = _resolve_rule(cfg)
    width = int(cfg["width"])
    boundary = automaton.uniform_boundary(width, rule.site_dim)
    t0 = cfg.get("t0")
    table = automaton.time_correlator(
        rule, int(cfg["k"]), int(cfg["x"]), int(cfg["rmax"]), boundary, width,
        int(cfg["samples"]), int(cfg["seed"]),
        t0=None if t0 is None else int(t0),
        geometry=cfg["geometry"], n_ref=int(cfg["nref"]),
    )
    out = Path(cfg["out"])
    header = _correlator_header(cfg)
    lines = []
    if out.exists() and out.stat().st_size > 0:
        first = out.read_text().splitlines()[0]
        if first != header:
            raise ConfigError("append target has different parameters; refusing to mix")
    else:
        lines.append(header)
        lines.append("r,re,im,stderr")
    for i, r in enumerate(table.r):
        lines.append(
            f"{int(r)},{_fmt(table.estimate[i].real)},{_fmt(table.estimate[i].imag)},"
            f"{_fmt(table.standard_error[i])}"
        )
    with out.open("a") as f:
        f.write("\n".join(lines) + "\n")
    _write_manifest(out, cfg, t_start, [str(out)])
    print(f"correlator {cfg['rule']}: r=1..{cfg['rmax']} -> {out}")
    return EXIT_OK


def read_correlator_csv(path: str) -> automaton.CorrelatorTable:
    rows = []
    params = {}
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            for part in line[1:].split():
                if "=" in part:
                    k, v = part.split("=", 1)
                    params[k] = v
            continue
        if not line or line.startswith("r,"):
            continue
        r, re, im, err = line.split(",")
        rows.append((int(r), float(re), float(im), float(err)))
    rows.sort()
    r = np.array([x[0] for x in rows])
    est = np.array([complex(x[1], x[2]) for x in rows])
    err = np.array([x[3] for x in rows])
    return automaton.CorrelatorTable(
        r, est, err, int(params.get("samples", 0)), int(params.get("seed", 0)),
        int(params.get("k", 0)), int(params.get("x", 0)),
    )


def run_fit(cfg: dict) -> int:
    t_start = time.time()
    table = read_correlator_csv(cfg["input"])
    window = None
    if cfg.get("window_lo") is not None and cfg.get("window_hi") is not None:
        window = (int(cfg["window_lo"]), int(cfg["window_hi"]))
    exponent, err, window = automaton.fit_power_law(table, window=window)
    out = Path(cfg["out"])
    out.write_text(
        "exponent,exponent_stderr,window_lo,window_hi\n"
        f"{_fmt(exponent)},{_fmt(err)},{window[0]},{window[1]}\n"
    )
    _write_manifest(out, cfg, t_start, [str(out)])
    print(f"fit {cfg['input']}: exponent {exponent:.4f} +/- {err:.4f} on r in {window}")
    return EXIT_OK


def run_validate(cfg: dict) -> int:
    t_start = time.time()
    which = cfg["paths"]
    names = list(paths.REGISTRY) if which == "all" else [which]
    points = int(cfg["points"])
    failures = []
    report = []
    for name in names:
        if name not in paths.REGISTRY:
            raise ConfigError(f"unknown path {name!r}")
        spec = paths.REGISTRY[name]
        worst = 0.0
        for g in paths.path_grid(name, points):
            t = paths.evaluate_path(name, float(g))
            res = tensors.check_isometry(t).max_residual
            worst = max(worst, res)
            if res > 1e-12:
                failures.append(f"{name} g={g}: isometry residual {res:.2e}")
        report.append(f"{name}: isometry worst residual {worst:.2e} over {points} points")
        # declared virtual symmetries along the segment
        if name == "tc-ds":
            for g in paths.path_grid(name, 21):
                a = paths.path_tc_ds(float(g))
                if g >= 0 and not tensors.check_virtual_symmetry(a, tensors.X_LOOP_TRIVIAL).holds:
                    failures.append(f"tc-ds g={g}: X-loop-trivial violated")
                if g <= 0 and not tensors.check_virtual_symmetry(a, tensors.X_LOOP_CZ).holds:
                    failures.append(f"tc-ds g={g}: X-loop-CZ violated")
        elif name == "set-frac":
            for g in paths.path_grid(name, 21):
                w = paths.path_set_frac(float(g))
                want = "trivial" if g > 0 else ("nontrivial" if g < 0 else "both")
                got = tensors.classify_symmetry_action(w)
                if got != want:
                    failures.append(f"set-frac g={g}: classified {got}, expected {want}")
        if spec.tensor_kind == "single-line":
            for g in paths.path_grid(name, 21):
                w = paths.evaluate_path(name, float(g))
                if not tensors.check_virtual_symmetry(w, tensors.Z_LOOP).holds and name == "dipole-seg1":
                    failures.append(f"{name} g={g}: Z-loop violated")
        # conservation at the critical end
        crit = {"tc-ds": ("tc-ds", 0.0), "z22-z4-seg1": ("z22-z4", 0.0),
                "z22-z4-seg2": ("z22-z4", 0.0), "set-frac": ("set-frac", 0.0),
                "dipole-seg2": ("wq", 1.0), "dipole-seg3": ("wp", 1.0)}.get(name)
        if crit:
            tag, g = crit
            t = paths.evaluate_path(name, g)
            w = opcompile.reduce_double_to_single(t) if spec.tensor_kind == "double-line" else t
            bad = paths.conservation_violations(w, paths.gate_charge_vector(tag))
            if bad:
                failures.append(f"{name}: {bad} charge-violating transitions at its critical end")
            report.append(f"{name}: conservation table clean at g={g}")
    out = Path(cfg["out"])
    out.write_text("\n".join(report + (["FAILURES:"] + failures if failures else ["all checks passed"])) + "\n")
    _write_manifest(out, cfg, t_start, [str(out)])
    for line in report:
        print(line)
    if failures:
        for line in failures:
            print("FAIL:", line, file=sys.stderr)
        return EXIT_VALIDATION
    print("validate: all checks passed")
    return EXIT_OK


def run_oracle_check(cfg: dict) -> int:
    t_start = time.time()
    rng = np.random.default_rng(int(cfg["seed"]))
    cases = int(cfg["cases"])
    from .geometry import SquareTorus

    failures = []
    worst = 0.0
    for case in range(cases):
        n = int(rng.choice([2, 3]))
        patch = build_brickwork(4, 3 if n == 2 else 2)
        m = rng.normal(size=(n * n, n * n)) + 1j * rng.normal(size=(n * n, n * n))
        m /= np.sqrt(np.sum(np.abs(m) ** 2, axis=1))[:, None]
        w = tensors.WSingleLine(n, m)
        state = oracle.contract_brickwork_single(patch, w)
        wt = int(rng.integers(1, 4))
        edges = rng.choice(patch.n_edges, size=wt, replace=False)
        factors = {}
        for e in edges:
            z, x = int(rng.integers(0, n)), int(rng.integers(0, n))
            factors[int(e)] = PauliFactor(z if z + x else 1, x)
        op = PauliString(n, factors)
        direct = oracle.exact_expectation(state, op)
        compiled = opcompile.compile_single_line(patch, w, op)
        via = oracle.exact_expectation(state, compiled)
        dev = abs(direct - via)
        worst = max(worst, dev)
        if dev > 1e-10:
            failures.append(f"case {case}: compiler deviates {dev:.2e}")
    torus = SquareTorus(2, 2)
    ham = oracle.build_parent_hamiltonian_terms(2, torus, "tc")
    psi = oracle.contract_torus_single(torus, tensors.toric_code_single_line(2)).amplitudes
    psi = psi / np.linalg.norm(psi)
    res = max(
        max(np.linalg.norm(ham.a_term(v, psi)) for v in range(ham.n_vertices)),
        max(np.linalg.norm(ham.bp_term(p, psi)) for p in range(ham.n_plaquettes)),
    )
    if res > 1e-12:
        failures.append(f"parent Hamiltonian residual {res:.2e}")
    out = Path(cfg["out"])
    lines = [
        f"compiler-oracle equivalence: {cases - len(failures)}/{cases} cases, worst {worst:.2e}",
        f"parent Hamiltonian (N=2, 2x2 torus) residual: {res:.2e}",
    ] + (["FAILURES:"] + failures if failures else ["all checks passed"])
    out.write_text("\n".join(lines) + "\n")
    _write_manifest(out, cfg, t_start, [str(out)])
    print("\n".join(lines))
    return EXIT_VALIDATION if failures else EXIT_OK


SCHEMAS = {
    "path-scan": (run_path_scan, ["path", "L", "seed", "out"], {"points": 101, "refine": 0}),
    "sample": (run_sample, ["path", "g", "width", "depth", "samples", "seed", "observable", "out"],
               {"check_oracle": False}),
    "correlator": (
        run_correlator,
        ["rule", "k", "x", "width", "rmax", "samples", "seed", "out"],
        {"t0": None, "nref": 1, "geometry": "offset", "g": None},
    ),
    "fit": (run_fit, ["input", "out"], {"window_lo": None, "window_hi": None}),
    "validate": (run_validate, ["paths", "out"], {"points": 101}),
    "oracle-check": (run_oracle_check, ["cases", "seed", "out"], {}),
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="stringnet",
        description="string-net isoTNS paths, automata, and exact cross-checks",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in SCHEMAS:
        p = sub.add_parser(name, help=f"run the {name} experiment from a JSON config")
        p.add_argument("--config", required=True, help="flat JSON config file")
    args = parser.parse_args(argv)
    runner, required, optional = SCHEMAS[args.experiment]
    try:
        cfg = _load_config(args.config, args.experiment, required, optional)
        return runner(cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except oracle.CapExceededError as e:
        print(f"cap exceeded: {e}", file=sys.stderr)
        return EXIT_CAP
    except spectral.ConvergenceError as e:
        print(f"non-convergence: {e}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_GENERIC


if __name__ == "__main__":
    sys.exit(main())
