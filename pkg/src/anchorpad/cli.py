"""Batch CLI: `anchorpad run` executes the pipeline over align-rate x seed
grids, `anchorpad ablation` runs the padding on/off comparison. Settings come
from an optional flat `key = value` config file; flags override file keys.

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from .pipeline import (
    ConfigError,
    ExperimentConfig,
    StageError,
    SyntheticSpec,
    emit_report,
    run_ablation,
    run_batch,
)

_BOOL_KEYS = {"use_encoder", "ipt", "dump_matrices"}
_INT_KEYS = {"n_anchors", "epochs", "latent_width", "restarts"}
_FLOAT_KEYS = {"missing_rate", "radius", "alpha", "margin", "range_factor", "learning_rate", "neg_ratio", "sigma"}
_LIST_FLOAT_KEYS = {"align_rates"}
_LIST_INT_KEYS = {"seeds", "schedule"}
_STR_KEYS = {"dataset", "out_dir", "synthetic"}
_ALL_KEYS = _BOOL_KEYS | _INT_KEYS | _FLOAT_KEYS | _LIST_FLOAT_KEYS | _LIST_INT_KEYS | _STR_KEYS


def _parse_bool(value: str, key: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"config key '{key}' expects a boolean, got '{value}'")


def parse_config_file(path: str) -> dict:
    """Flat `key = value` file; '#' starts a comment, blank lines ignored."""
    values: dict = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _ALL_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown config key '{key}'")
        try:
            if key in _BOOL_KEYS:
                values[key] = _parse_bool(value, key)
            elif key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key in _LIST_FLOAT_KEYS:
                values[key] = tuple(float(tok) for tok in value.split(",") if tok.strip())
            elif key in _LIST_INT_KEYS:
                values[key] = tuple(int(tok) for tok in value.split(",") if tok.strip())
            else:
                values[key] = value
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for '{key}': {exc}") from exc
    return values


def parse_synthetic_spec(text: str) -> SyntheticSpec:
    """Spec string `k,n,d1,d2,sep` (two views)."""
    parts = [tok.strip() for tok in text.split(",")]
    if len(parts) != 5:
        raise ConfigError(f"--synthetic expects 'k,n,d1,d2,sep', got '{text}'")
    try:
        k, n, d1, d2 = (int(p) for p in parts[:4])
        sep = float(parts[4])
    except ValueError as exc:
        raise ConfigError(f"bad --synthetic value '{text}': {exc}") from exc
    return SyntheticSpec(k=k, n=n, dims=(d1, d2), separation=sep)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anchorpad", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in (
        ("run", "run the pipeline over all align rates and seeds"),
        ("ablation", "run paired padding on/off arms over all align rates and seeds"),
    ):
        p = sub.add_parser(name, help=desc)
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--dataset", help="dataset directory (view<i>.csv + labels.csv)")
        p.add_argument("--synthetic", help="synthetic spec: k,n,d1,d2,sep")
        p.add_argument("--align-rate", dest="align_rates", type=float, action="append", metavar="R")
        p.add_argument("--missing-rate", dest="missing_rate", type=float)
        p.add_argument("--seed", dest="seeds", type=int, action="append", metavar="S")
        p.add_argument("--no-ipt", dest="no_ipt", action="store_true", help="discard unmatched rows instead of padding")
        p.add_argument("--anchors", dest="n_anchors", type=int)
        p.add_argument("--out", dest="out_dir", metavar="DIR")
        p.add_argument("--dump-matrices", dest="dump_matrices", action="store_true")
        p.add_argument("--identity-encoder", dest="identity_encoder", action="store_true", help="skip encoder training")
        p.add_argument("--epochs", type=int)
        p.add_argument("--restarts", type=int)
    return parser


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    values = parse_config_file(args.config) if args.config else {}
    if args.dataset:
        values["dataset"] = args.dataset
        values.pop("synthetic", None)
    if args.synthetic:
        values["synthetic"] = args.synthetic
        values.pop("dataset", None)
    for key in ("align_rates", "seeds", "missing_rate", "n_anchors", "out_dir", "epochs", "restarts"):
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = tuple(flag) if isinstance(flag, list) else flag
    if args.no_ipt:
        values["ipt"] = False
    if args.dump_matrices:
        values["dump_matrices"] = True
    if args.identity_encoder:
        values["use_encoder"] = False

    synthetic = None
    if "synthetic" in values and values["synthetic"]:
        spec = values.pop("synthetic")
        synthetic = spec if isinstance(spec, SyntheticSpec) else parse_synthetic_spec(spec)
    dataset_path = values.pop("dataset", None)

    try:
        config = ExperimentConfig(dataset_path=dataset_path, synthetic=synthetic, **values)
    except TypeError as exc:
        raise ConfigError(f"bad configuration: {exc}") from exc
    config.validate()
    return config


def _print_summary(records, out) -> None:
    print(f"{'dataset':<28} {'align':>6} {'ipt':>4} {'seed':>5} {'acc':>7} {'nmi':>7} {'ari':>7} {'f1':>7}", file=out)
    for rec in sorted(records, key=lambda r: r.sort_key()):
        print(
            f"{rec.dataset:<28} {rec.align_rate:>6g} {int(rec.ipt):>4} {rec.seed:>5} "
            f"{rec.report.acc:>7.4f} {rec.report.nmi:>7.4f} {rec.report.ari:>7.4f} {rec.report.f1_weighted:>7.4f}",
            file=out,
        )
    for (align, ipt) in sorted({(r.align_rate, r.ipt) for r in records}, key=lambda t: (t[0], not t[1])):
        accs = [r.report.acc for r in records if r.align_rate == align and r.ipt == ipt]
        print(
            f"align={align:g} ipt={int(ipt)}: mean acc {np.mean(accs):.4f} +/- {np.std(accs):.4f} over {len(accs)} seed(s)",
            file=out,
        )


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        config = build_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "ablation":
            records = run_ablation(config)
        else:
            records = run_batch(config)
        csv_path, json_path = emit_report(records, config.out_dir, config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except StageError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    _print_summary(records, sys.stdout)
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
