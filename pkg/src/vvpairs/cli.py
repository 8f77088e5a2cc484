"""Command-line interface.

Settings come from an optional flat ``key = value`` config file (``#``
starts a comment) and are overridden by command-line flags. Recognized
keys: ``orders``, ``bell``, ``werner_p``, ``target_concurrence``,
``dark_rate``, ``n``, ``seed``, ``out``, ``method``.

Every command writes into its own output directory and records the
resolved configuration in ``manifest.json``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy

from . import __version__, measure, metrics, optics, render, targets, tomo
from .qcore import DensityMatrix, order_basis

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


class NumericalFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    orders: Tuple[int, int] = (1, 1)
    bell: str = "psi-"
    werner_p: Optional[float] = None
    dark_rate: Optional[float] = None
    n_per_setting: int = 10_000
    seed: int = 0
    output_dir: str = "runs"
    method: str = "mle"

    def __post_init__(self):
        m1, m2 = self.orders
        if int(m1) != m1 or int(m2) != m2 or m1 == 0 or m2 == 0:
            raise ValueError(f"orders must be nonzero integers, got {self.orders}")
        object.__setattr__(self, "orders", (int(m1), int(m2)))
        object.__setattr__(self, "bell", optics.normalize_bell_label(self.bell))
        if self.werner_p is not None and not (1 / 3 - 1e-12 <= self.werner_p <= 1.0):
            raise ValueError("werner_p must lie in [1/3, 1]")
        if self.dark_rate is not None and self.dark_rate < 0:
            raise ValueError("dark_rate must be nonnegative")
        if self.n_per_setting <= 0:
            raise ValueError("n must be positive")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.method not in ("mle", "linear", "both"):
            raise ValueError("method must be mle, linear or both")

    def content(self) -> dict:
        """Settings that determine results (everything except the output path)."""
        doc = asdict(self)
        doc.pop("output_dir")
        doc["orders"] = list(self.orders)
        return doc

    def digest(self) -> str:
        blob = json.dumps(self.content(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def parse_orders(text: str) -> Tuple[int, int]:
    parts = [p for p in text.replace("(", "").replace(")", "").replace(" ", "").split(",") if p]
    if len(parts) != 2:
        raise ValueError(f"orders must look like '1,5', got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise ValueError(f"orders must be integers, got {text!r}") from None


def read_config_file(path: str) -> Dict[str, str]:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


_KEYS = {"orders", "bell", "werner_p", "target_concurrence", "dark_rate", "n", "seed", "out", "method"}


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    raw: Dict[str, str] = {}
    if getattr(args, "config", None):
        raw = read_config_file(args.config)
        unknown = set(raw) - _KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for key in _KEYS:
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = str(value)
    if "werner_p" in raw and "target_concurrence" in raw:
        raise ValueError("give either werner_p or target_concurrence, not both")
    werner = None
    if "target_concurrence" in raw:
        werner = metrics.werner_p_from_concurrence(float(raw["target_concurrence"]))
    elif "werner_p" in raw and raw["werner_p"].lower() != "none":
        werner = float(raw["werner_p"])
    kwargs = dict(werner_p=werner)
    if "orders" in raw:
        kwargs["orders"] = parse_orders(raw["orders"])
    if "bell" in raw:
        kwargs["bell"] = raw["bell"]
    if "dark_rate" in raw:
        kwargs["dark_rate"] = float(raw["dark_rate"])
    if "n" in raw:
        kwargs["n_per_setting"] = int(float(raw["n"]))
    if "seed" in raw:
        kwargs["seed"] = int(raw["seed"])
    if "out" in raw:
        kwargs["output_dir"] = raw["out"]
    if "method" in raw:
        kwargs["method"] = raw["method"]
    return ExperimentConfig(**kwargs)


# ---------------------------------------------------------------------------
# helpers


def make_state(cfg: ExperimentConfig) -> DensityMatrix:
    m1, m2 = cfg.orders
    if cfg.werner_p is None:
        return optics.bell_vv(m1, m2, cfg.bell).density()
    return optics.werner_vv(m1, m2, cfg.werner_p, cfg.bell)


def state_to_json(rho: DensityMatrix, orders: Tuple[int, int], **extra) -> str:
    doc = {
        "orders": list(orders),
        "basis": [[list(lab) for lab in label] for label in rho.basis.labels],
        "re": rho.matrix.real.tolist(),
        "im": rho.matrix.imag.tolist(),
    }
    doc.update(extra)
    return json.dumps(doc, indent=1)


def read_state(path: str) -> Tuple[DensityMatrix, Tuple[int, int]]:
    doc = json.loads(Path(path).read_text())
    m1, m2 = doc["orders"]
    basis = order_basis(m1).tensor(order_basis(m2))
    return DensityMatrix(basis, np.array(doc["re"]) + 1j * np.array(doc["im"]), atol=1e-8), (m1, m2)


def subspace_note(m: int) -> str:
    return "pi-mode {pi+, pi-}" if m < 0 else "VV {radial, azimuthal}"


def fmt(x: float, digits: int = 6) -> str:
    return f"{x:.{digits}f}"


def write_csv(path: Path, header: Sequence[str], rows: List[Sequence]) -> None:
    lines = [",".join(header)] + [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


class Run:
    """Output directory of one command invocation."""

    def __init__(self, command: str, cfg: ExperimentConfig, extra: Optional[dict] = None):
        self.dir = Path(cfg.output_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        manifest = {
            "command": command,
            "config": cfg.content(),
            "config_hash": cfg.digest(),
            "seed": cfg.seed,
            "versions": {
                "vvpairs": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "python": platform.python_version(),
            },
        }
        if extra:
            manifest["options"] = extra
        (self.dir / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")

    def path(self, name: str) -> Path:
        return self.dir / name


# ---------------------------------------------------------------------------
# commands


def cmd_generate(cfg: ExperimentConfig, args) -> int:
    run = Run("generate", cfg)
    rho = make_state(cfg)
    m1, m2 = cfg.orders
    conc, weight = metrics.intersystem_concurrence(rho, m1, m2)
    pur = metrics.purity(rho)
    run.path("state.json").write_text(state_to_json(
        rho, cfg.orders, bell=cfg.bell, werner_p=cfg.werner_p,
        subspace=[subspace_note(m1), subspace_note(m2)]))
    print(f"orders            {m1},{m2}")
    print(f"subspace basis    photon 1: {subspace_note(m1)}; photon 2: {subspace_note(m2)}")
    print(f"concurrence       {fmt(conc.value)}")
    print(f"subspace weight   {fmt(weight)}")
    print(f"purity            {fmt(pur)}")
    return EXIT_OK


def _load_or_make(cfg, args):
    if getattr(args, "state", None):
        rho, orders = read_state(args.state)
        return rho, orders
    return make_state(cfg), cfg.orders


def cmd_tomo(cfg: ExperimentConfig, args) -> int:
    rho, (m1, m2) = _load_or_make(cfg, args)
    run = Run("tomo", cfg, {"noiseless": bool(args.noiseless)})
    settings = measure.tomography_settings(m1, m2)
    dark = cfg.dark_rate or 0.0
    if args.noiseless:
        data = tomo.TomographyData.expected(rho, settings, cfg.n_per_setting)
    else:
        records = measure.simulate_counts(rho, settings, cfg.n_per_setting, dark, cfg.seed)
        measure.records_to_csv(records, run.path("counts.csv"))
        if dark > 0:
            records = measure.dark_correct(records)
        data = tomo.TomographyData.from_records(records)
    methods = ["mle", "linear"] if cfg.method == "both" else [cfg.method]
    status = EXIT_OK
    for method in methods:
        if method == "mle":
            res = tomo.mle_reconstruct(data)
        else:
            res = tomo.linear_result(data)
        f = metrics.fidelity(rho, res.rho)
        run.path(f"tomo_{method}.json").write_text(res.to_json(target=rho))
        print(f"{method:6s} fidelity {f:.6f}  iterations {res.iterations}  converged {res.converged}")
        if not res.converged:
            print(f"error: {method} reconstruction did not converge", file=sys.stderr)
            status = EXIT_NUMERICAL
    return status


def _chsh_rows(rho, m1, m2, n, dark, seed):
    ana = measure.chsh_S(rho, m1, m2)
    settings = measure.chsh_settings(m1, m2)
    records = measure.simulate_counts(rho, settings, n, dark, seed)
    raw = measure.chsh_S_from_counts(records)
    corr = measure.chsh_S_from_counts(measure.dark_correct(records))
    return ana, raw, corr, records


CHSH_HEADER = ("m1", "m2", "S_analytic", "S_raw", "sigma_raw", "S_corrected", "sigma_corrected")


def cmd_chsh(cfg: ExperimentConfig, args) -> int:
    rho, (m1, m2) = _load_or_make(cfg, args)
    dark = cfg.dark_rate or 0.0
    run = Run("chsh", cfg)
    ana, raw, corr, records = _chsh_rows(rho, m1, m2, cfg.n_per_setting, dark, cfg.seed)
    measure.records_to_csv(records, run.path("counts.csv"))
    write_csv(run.path("chsh.csv"), CHSH_HEADER, [[m1, m2, fmt(ana.S), fmt(raw.S), fmt(raw.sigma_S),
                                                   fmt(corr.S), fmt(corr.sigma_S)]])
    print(f"S analytic        {ana.S:.6f}")
    print(f"S raw             {raw.S:.6f} +- {raw.sigma_S:.6f}")
    print(f"S corrected       {corr.S:.6f} +- {corr.sigma_S:.6f}")
    return EXIT_OK


def cmd_concurrence_dist(cfg: ExperimentConfig, args) -> int:
    rho, (m1, m2) = _load_or_make(cfg, args)
    if args.mixed:
        rho = DensityMatrix(rho.basis, np.eye(16) / 16)
    photon = args.photon
    m_proj = m2 if photon == 2 else m1
    projs = metrics.load_projectors(m_proj, args.projectors)
    run = Run("concurrence-dist", cfg, {"photon": photon, "projectors": args.projectors,
                                        "mixed": bool(args.mixed)})
    dist = metrics.concurrence_distribution(rho, projs, photon)
    rows = [[e.label, fmt(e.concurrence), fmt(e.probability), e.region] for e in dist.entries]
    write_csv(run.path("distribution.csv"), ("label", "concurrence", "probability", "region"), rows)
    ent = [e.concurrence for e in dist.entries if e.region == "entangled"]
    sep = [e.concurrence for e in dist.entries if e.region == "separable"]
    print(f"projected photon  {photon} ({len(projs)} projectors)")
    print(f"entangled region  {len(ent)}" + (f"  values {fmt(min(ent))}..{fmt(max(ent))}" if ent else ""))
    print(f"separable region  {len(sep)}" + (f"  values {fmt(min(sep))}..{fmt(max(sep))}" if sep else ""))
    return EXIT_OK


def parse_mode(text: str):
    """Mode string: ``r<m>`` radial, ``t<m>`` azimuthal, ``p+<m>`` / ``p-<m>`` pi-modes."""
    text = text.strip()
    try:
        if text.startswith(("p+", "p-")):
            return optics.pi_mode(int(text[2:]), text[1])
        if text[0] in "rt":
            return optics.vv_state(int(text[1:]), "radial" if text[0] == "r" else "azimuthal")
    except (ValueError, IndexError):
        pass
    raise ValueError(f"invalid mode string {text!r}; use r<m>, t<m>, p+<m> or p-<m>")


def cmd_render(cfg: ExperimentConfig, args) -> int:
    state = parse_mode(args.mode)
    run = Run("render", cfg, {"mode": args.mode, "polarizer": args.polarizer,
                              "size": args.size, "extent": args.extent})
    field = render.transverse_field(state, args.size, args.extent)
    if args.polarizer is None or str(args.polarizer).lower() == "none":
        image = field.intensity
    else:
        image = render.polarizer_intensity(field, np.deg2rad(float(args.polarizer)))
    analysis = render.petal_analysis(image)
    render.write_ppm(run.path("intensity.ppm"), image)
    render.write_profile_csv(run.path("profile.csv"), analysis)
    for name, plane in render.stokes_map(field).planes().items():
        render.write_grid_csv(run.path(f"stokes_{name}.csv"), plane)
    print(f"petals            {analysis.count}")
    print(f"uniform           {analysis.uniform}")
    return EXIT_OK


def cmd_reproduce_tables(cfg: ExperimentConfig, args) -> int:
    run = Run("reproduce-tables", cfg)
    dark = 0.01 if cfg.dark_rate is None else cfg.dark_rate
    conc_rows, chsh_rows, tomo_rows, dist_rows = [], [], [], []
    status = EXIT_OK
    for idx, (m1, m2) in enumerate(targets.ORDER_PAIRS):
        target = targets.TARGET_CONCURRENCE[(m1, m2)]
        p = metrics.werner_p_from_concurrence(target)
        rho = optics.werner_vv(m1, m2, p, cfg.bell)
        seed = cfg.seed + 1000 * idx
        conc, weight = metrics.intersystem_concurrence(rho, m1, m2)
        conc_rows.append([m1, m2, target, fmt(p), fmt(conc.value), fmt(weight)])

        ana, raw, corr, _ = _chsh_rows(rho, m1, m2, cfg.n_per_setting, dark, seed)
        ref_raw, ref_corr = targets.REFERENCE_S[(m1, m2)]
        chsh_rows.append([m1, m2, fmt(ana.S), fmt(raw.S), fmt(raw.sigma_S), fmt(corr.S),
                          fmt(corr.sigma_S), ref_raw, ref_corr])

        settings = measure.tomography_settings(m1, m2)
        records = measure.simulate_counts(rho, settings, cfg.n_per_setting, 0.0, seed + 1)
        res = tomo.mle_reconstruct(records)
        if not res.converged:
            status = EXIT_NUMERICAL
        tomo_rows.append([m1, m2, cfg.n_per_setting, fmt(metrics.fidelity(rho, res.rho)),
                          res.iterations, int(res.converged)])

        for photon in (1, 2):
            projs = metrics.load_projectors(m2 if photon == 2 else m1)
            dist = metrics.concurrence_distribution(rho, projs, photon)
            ent = [e.concurrence for e in dist.entries if e.region == "entangled"]
            sep = [e.concurrence for e in dist.entries if e.region == "separable"]
            dist_rows.append([m1, m2, photon, len(ent), len(sep), fmt(min(ent)), fmt(max(ent)),
                              fmt(max(sep))])
        print(f"({m1},{m2})  C={conc.value:.4f}  S={ana.S:.4f}  S_raw={raw.S:.4f}+-{raw.sigma_S:.4f}"
              f"  S_corr={corr.S:.4f}+-{corr.sigma_S:.4f}  F={tomo_rows[-1][3]}")

    write_csv(run.path("table_concurrence.csv"),
              ("m1", "m2", "target", "werner_p", "concurrence", "subspace_weight"), conc_rows)
    write_csv(run.path("table_chsh.csv"), CHSH_HEADER + ("reference_raw", "reference_corrected"),
              chsh_rows)
    write_csv(run.path("table_tomography.csv"),
              ("m1", "m2", "n_per_setting", "fidelity", "iterations", "converged"), tomo_rows)
    write_csv(run.path("table_distribution.csv"),
              ("m1", "m2", "projected_photon", "n_entangled", "n_separable", "min_entangled",
               "max_entangled", "max_separable"), dist_rows)
    return status


COMMANDS = {
    "generate": cmd_generate,
    "tomo": cmd_tomo,
    "chsh": cmd_chsh,
    "concurrence-dist": cmd_concurrence_dist,
    "render": cmd_render,
    "reproduce-tables": cmd_reproduce_tables,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--orders", help="VV orders of the two photons, e.g. 1,5 (use --orders=1,-1)")
    common.add_argument("--bell", help="psi-, psi+, phi- or phi+")
    noise = common.add_mutually_exclusive_group()
    noise.add_argument("--werner-p", dest="werner_p", help="Werner weight in [1/3, 1]")
    noise.add_argument("--target-concurrence", dest="target_concurrence", type=float,
                       help="set the Werner weight from an intersystem concurrence")
    common.add_argument("--dark-rate", dest="dark_rate", type=float)
    common.add_argument("--n", type=float, help="expected counts per setting")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--method", choices=("mle", "linear", "both"))

    parser = argparse.ArgumentParser(prog="vvpairs", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="write the source state")
    p = sub.add_parser("tomo", parents=[common], help="simulate 1296-setting tomography")
    p.add_argument("--state", help="state JSON written by 'generate'")
    p.add_argument("--noiseless", action="store_true", help="use expected counts instead of Poisson draws")
    p = sub.add_parser("chsh", parents=[common], help="CHSH test in the VV space")
    p.add_argument("--state")
    p = sub.add_parser("concurrence-dist", parents=[common], help="intrasystem concurrence distribution")
    p.add_argument("--state")
    p.add_argument("--projectors", help="projector set file (default: packaged 34-state set)")
    p.add_argument("--photon", type=int, choices=(1, 2), default=2, help="photon that is projected")
    p.add_argument("--mixed", action="store_true", help="replace the state by I/16")
    p = sub.add_parser("render", parents=[common], help="render a single-photon mode")
    p.add_argument("--mode", default="r1", help="r<m>, t<m>, p+<m> or p-<m>")
    p.add_argument("--polarizer", default=None, help="polarizer angle in degrees, or none")
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--extent", type=float, default=3.0)
    sub.add_parser("reproduce-tables", parents=[common], help="run all five order pairs")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        if cfg.output_dir == "runs":
            cfg = replace(cfg, output_dir=str(Path("runs") / args.command))
        return COMMANDS[args.command](cfg, args)
    except NumericalFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
