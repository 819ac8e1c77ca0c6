"""Command-line interface: ingest, train, sample, random, score.

Exit codes: 0 success, 2 usage error, 3 data error (unreadable/invalid
inputs, checkpoint or registry mismatches), 4 runtime error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .chem import (
    CorpusError,
    MoleculeError,
    SmilesError,
    TemplateError,
    load_building_blocks,
    load_templates,
    parse_smiles,
    write_smiles,
)
from .checkpoint import CheckpointError, load_checkpoint
from .config import ConfigError, RunConfig
from .env import (
    EnvConfigError,
    SynthesisEnv,
    build_index,
    random_search,
    write_episode_csv,
    write_quantile_csv,
    write_routes,
)
from .features import descriptor_vector
from .scoring import (
    DataFileError,
    ExternalScorerError,
    FragmentTable,
    Scorer,
    ad_inside,
    build_sa_table,
    fit_ad_model,
    make_scorer,
)
from .trainer import TrainConfig, Trainer

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_RUNTIME = 4

_DATA_ERRORS = (
    ConfigError,
    CorpusError,
    TemplateError,
    SmilesError,
    MoleculeError,
    DataFileError,
    CheckpointError,
    EnvConfigError,
    FileNotFoundError,
)


class _UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

_FLAG_TO_KEY = {
    "blocks": "blocks",
    "templates": "templates",
    "out": "out",
    "scorer": "scorer",
    "steps": "steps",
    "budget": "budget",
    "seed": "seed",
    "k": "k",
    "checkpoint": "checkpoint",
    "resume": "resume",
    "starts": "starts",
}


def _add_common(parser: argparse.ArgumentParser, flags: list[str]) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument(
        "--print-config",
        action="store_true",
        help="echo the effective configuration and exit",
    )
    for flag in flags:
        kwargs: dict = {}
        if flag in ("steps", "budget", "seed", "k"):
            kwargs["type"] = int
        parser.add_argument(f"--{flag}", **kwargs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pgfs",
        description="Forward-synthesis molecule generation with TD3.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate inputs, build index artifacts")
    _add_common(p, ["blocks", "templates", "out"])

    p = sub.add_parser("train", help="train the agent")
    _add_common(
        p,
        ["blocks", "templates", "out", "scorer", "steps", "budget", "seed",
         "k", "checkpoint", "resume"],
    )

    p = sub.add_parser("sample", help="greedy inference from a checkpoint")
    _add_common(
        p,
        ["blocks", "templates", "out", "scorer", "seed", "k", "checkpoint",
         "starts"],
    )

    p = sub.add_parser("random", help="random-search baseline")
    _add_common(
        p,
        ["blocks", "templates", "out", "scorer", "budget", "seed", "k",
         "starts"],
    )

    p = sub.add_parser("score", help="score a file of SMILES")
    p.add_argument("smiles_file", help="one SMILES per line")
    _add_common(p, ["scorer", "out"])
    return parser


def _effective_config(args: argparse.Namespace) -> RunConfig:
    config = (
        RunConfig.from_file(args.config) if args.config else RunConfig()
    )
    overrides = {}
    for flag, key in _FLAG_TO_KEY.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    config.apply(overrides)
    return config


# ---------------------------------------------------------------------------
# shared setup
# ---------------------------------------------------------------------------


def _load_corpus(config: RunConfig):
    blocks_path = config.blocks_path()
    templates_path = config.templates_path()
    for path in (blocks_path, templates_path):
        if not path.exists():
            raise ConfigError(f"input file does not exist: {path}")
    records, report = load_building_blocks(str(blocks_path))
    templates = load_templates(str(templates_path))
    return records, report, templates


def _build_scorer(config: RunConfig, records) -> Scorer:
    sa_table = None
    if config.scorer == "plogp":
        table_path = config.sa_table_path()
        if table_path.exists():
            sa_table = FragmentTable.from_text(
                table_path.read_text(encoding="utf-8")
            )
        else:
            sa_table = build_sa_table([r.mol for r in records])
    return make_scorer(config.scorer, sa_table=sa_table, floor=config.floor_reward)


def _build_env(config: RunConfig, records, templates, scorer: Scorer) -> SynthesisEnv:
    index = build_index(records, templates, min_compat=config.min_compat)
    return SynthesisEnv(
        index,
        scorer,
        max_steps=config.max_steps,
        k=config.k,
        floor_reward=scorer.floor,
        seed=[config.seed, 2],
    )


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.out) if config.out else Path("pgfs_out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _resolve_starts(config: RunConfig, env: SynthesisEnv) -> tuple[list[int] | None, int | None]:
    """--starts is either an episode count or a file of start SMILES.

    Returns (start_block_indices, episode_count); exactly one is non-None.
    """
    if config.starts is None:
        return None, None
    raw = config.starts
    try:
        count = int(raw)
    except ValueError:
        pass
    else:
        if count < 1:
            raise ConfigError(f"--starts count must be positive, got {count}")
        return None, count
    path = Path(raw)
    if not path.exists():
        raise ConfigError(f"starts file does not exist: {path}")
    by_smiles = {
        rec.smiles: i for i, rec in enumerate(env.index.blocks)
    }
    indices: list[int] = []
    errors: list[str] = []
    for lineno, line in enumerate(
        path.read_text(encoding="utf-8").splitlines(), start=1
    ):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        smiles = text.split()[0]
        try:
            canonical = write_smiles(parse_smiles(smiles))
        except (SmilesError, MoleculeError) as exc:
            errors.append(f"{path}:{lineno}: cannot parse {smiles!r}: {exc}")
            continue
        idx = by_smiles.get(canonical)
        if idx is None:
            errors.append(
                f"{path}:{lineno}: {smiles!r} is not in the building-block corpus"
            )
        elif not env.index.template_mask(env.index.blocks[idx].mol).any():
            errors.append(f"{path}:{lineno}: {smiles!r} admits no templates")
        else:
            indices.append(idx)
    if errors:
        for err in errors:
            print(err, file=sys.stderr)
        raise ConfigError(f"{len(errors)} bad start line(s) in {path}")
    if not indices:
        raise ConfigError(f"starts file {path} contains no usable starts")
    return indices, None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_ingest(config: RunConfig) -> int:
    out = _out_dir(config)
    records, report, templates = _load_corpus(config)
    index = build_index(records, templates, min_compat=config.min_compat)
    sa_table = build_sa_table([r.mol for r in records])

    (out / "blocks_kept.smi").write_text(
        "".join(f"{r.smiles}\t{r.identifier}\n" for r in records),
        encoding="utf-8",
    )
    (out / "norm_stats.txt").write_text(index.stats.to_text(), encoding="utf-8")
    (out / "sa_table.txt").write_text(sa_table.to_text(), encoding="utf-8")
    report_text = (
        report.summary()
        + "\n"
        + index.report()
        + f"\nregistry_hash\t{index.registry_hash()}\n"
    )
    (out / "ingest_report.txt").write_text(report_text, encoding="utf-8")
    print(report.summary())
    print(index.report())
    print(f"artifacts written to {out}")
    return EXIT_OK


def cmd_train(config: RunConfig, explicit_budget: bool) -> int:
    if explicit_budget:
        raise _UsageError("--budget applies to 'random'; use --steps for training")
    out = _out_dir(config)
    records, _, templates = _load_corpus(config)
    scorer = _build_scorer(config, records)
    env = _build_env(config, records, templates, scorer)
    checkpoint_path = config.checkpoint or str(out / "checkpoint.ckpt")
    trainer = Trainer(
        env,
        config.train_config(),
        metrics_path=str(out / "metrics.csv"),
        checkpoint_path=checkpoint_path,
        episodes_path=str(out / "episodes.csv"),
    )
    try:
        if config.resume:
            meta = trainer.restore(config.resume)
            print(
                f"resumed from {config.resume} at step {meta['global_step']}"
            )
        summary = trainer.train()
    finally:
        scorer.close()
    print(
        f"trained {summary['steps']} steps over {summary['episodes']} episodes; "
        f"final eval reward {summary['final_eval_reward']}"
    )
    print(f"checkpoint: {checkpoint_path}")
    return EXIT_OK


def cmd_sample(config: RunConfig) -> int:
    if not config.checkpoint:
        raise _UsageError("sample requires --checkpoint")
    out = _out_dir(config)
    records, _, templates = _load_corpus(config)
    scorer = _build_scorer(config, records)
    env = _build_env(config, records, templates, scorer)

    meta, _ = load_checkpoint(
        config.checkpoint, expect_registry_hash=env.registry_hash()
    )
    echo = dict(meta["config"])
    echo.pop("tau_anneal_steps_resolved", None)
    for key in ("f_hidden", "pi_hidden", "q_hidden"):
        echo[key] = tuple(echo[key])
    train_cfg = TrainConfig(**echo)
    trainer = Trainer(env, train_cfg)
    try:
        trainer.restore(config.checkpoint)
        starts, count = _resolve_starts(config, env)
        episodes = trainer.evaluate(episodes=count, starts=starts)
    finally:
        scorer.close()

    write_episode_csv(episodes, str(out / "episodes.csv"))
    write_routes(episodes, str(out / "routes.txt"))
    for i, ep in enumerate(episodes):
        print(
            f"episode {i}: max reward {ep.max_reward!r} "
            f"final product {ep.final_product or '(none)'}"
        )
    rewards = [ep.max_reward for ep in episodes]
    print(
        f"{len(episodes)} episodes; mean max reward {float(np.mean(rewards))!r}; "
        f"best {float(np.max(rewards))!r}"
    )
    return EXIT_OK


def cmd_random(config: RunConfig) -> int:
    out = _out_dir(config)
    records, _, templates = _load_corpus(config)
    scorer = _build_scorer(config, records)
    env = _build_env(config, records, templates, scorer)
    starts, _ = _resolve_starts(config, env)
    rng = np.random.default_rng([config.seed, 3])
    try:
        episodes = random_search(
            env.index,
            scorer,
            config.budget,
            rng,
            max_steps=config.max_steps,
            floor_reward=scorer.floor,
            starts=starts,
        )
    finally:
        scorer.close()
    write_episode_csv(episodes, str(out / "episodes.csv"))
    write_quantile_csv(episodes, str(out / "quantiles.csv"))
    rewards = [ep.max_reward for ep in episodes]
    print(
        f"random search: {config.budget} reaction attempts, "
        f"{len(episodes)} episodes, median max reward "
        f"{float(np.median(rewards))!r}, best {float(np.max(rewards))!r}"
    )
    return EXIT_OK


def cmd_score(config: RunConfig, smiles_file: str) -> int:
    path = Path(smiles_file)
    if not path.exists():
        raise ConfigError(f"input file does not exist: {path}")

    sa_table = None
    if config.scorer == "plogp":
        table_path = config.sa_table_path()
        if table_path.exists():
            sa_table = FragmentTable.from_text(
                table_path.read_text(encoding="utf-8")
            )
        else:
            records, _, _ = _load_corpus(config)
            sa_table = build_sa_table([r.mol for r in records])
    scorer = make_scorer(config.scorer, sa_table=sa_table, floor=config.floor_reward)

    ad_model = None
    if config.ad_reference:
        ref_path = Path(config.ad_reference)
        if not ref_path.exists():
            raise ConfigError(
                f"AD reference file does not exist: {ref_path}"
            )
        ref_records, _ = load_building_blocks(str(ref_path))
        ref_matrix = np.array([descriptor_vector(r.mol) for r in ref_records])
        ad_model = fit_ad_model(ref_matrix)

    header = "smiles,score" + (",in_domain" if ad_model is not None else "")
    rows: list[str] = []
    errors: list[str] = []
    try:
        for lineno, line in enumerate(
            path.read_text(encoding="utf-8").splitlines(), start=1
        ):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            smiles = text.split()[0]
            try:
                mol = parse_smiles(smiles)
                score = float(scorer([mol])[0])
            except (SmilesError, MoleculeError) as exc:
                errors.append(f"{path}:{lineno}: {smiles!r}: {exc}")
                continue
            row = f"{smiles},{score!r}"
            if ad_model is not None:
                inside = ad_inside(descriptor_vector(mol), ad_model)
                row += f",{1 if inside else 0}"
            rows.append(row)
    finally:
        scorer.close()

    text = header + "\n" + "".join(row + "\n" for row in rows)
    if config.out:
        (_out_dir(config) / "scores.csv").write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    for err in errors:
        print(err, file=sys.stderr)
    return EXIT_DATA if errors else EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _effective_config(args)
        if args.print_config:
            sys.stdout.write(config.to_text())
            return EXIT_OK
        if args.command == "ingest":
            return cmd_ingest(config)
        if args.command == "train":
            return cmd_train(config, explicit_budget=args.budget is not None)
        if args.command == "sample":
            return cmd_sample(config)
        if args.command == "random":
            return cmd_random(config)
        if args.command == "score":
            return cmd_score(config, args.smiles_file)
        raise _UsageError(f"unknown command {args.command!r}")
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, ArithmeticError, ExternalScorerError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
