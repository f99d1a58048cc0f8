"""Command line: ``advpolicy train | eval | analyze``.

analyze writes a fixed layout under --out::

    models/                 copies of the analyzed model files
    attacks/<label>/        attacks.csv and one eta_NNN.csv grid per state
    spectra/<label>/        profile.csv (f,energy), per-state log-power grids and
                            graymaps, or a SKIPPED marker when no attack succeeded
    maps/<label>/           kmap/hmap as CSV grid and P2 graymap
    metrics.csv             map_kind, policy_label, sparsity, entropy
    comparison.csv          spectral centroid per policy (two or more models)
"""

import argparse
import logging
import math
import os
import shutil
import sys
from pathlib import Path

from . import env as grid
from . import fourier, io, sensitivity, trainer
from .nn import ShapeError, load_model, save_model
from .perturb import DEFAULT_EPSILON, TRAIN_EPSILON, AttackConfig, minimal_perturbation

log = logging.getLogger("advpolicy")


class CommandError(Exception):
    pass


def _load_env(path):
    if path is None:
        return grid.default_spec()
    if not os.path.isfile(path):
        raise CommandError(f"env file not found: {path}")
    try:
        return grid.load_spec(path)
    except (ValueError, TypeError, KeyError) as exc:
        raise CommandError(f"invalid env file {path}: {exc}") from exc


def _load_net(path, spec):
    if not os.path.isfile(path):
        raise CommandError(f"model file not found: {path}")
    try:
        net = load_model(path)
    except (ValueError, KeyError) as exc:
        raise CommandError(f"invalid model file {path}: {exc}") from exc
    if net.input_shape != spec.observation_shape or net.action_count != spec.action_count:
        raise CommandError(
            f"model {path} expects {net.input_shape} inputs / {net.action_count} actions; "
            f"env renders {spec.observation_shape} / {spec.action_count}"
        )
    return net


def _out_dir(path):
    try:
        Path(path).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CommandError(f"cannot create output directory {path}: {exc}") from exc
    if not os.access(path, os.W_OK):
        raise CommandError(f"output directory not writable: {path}")
    return Path(path)


def cmd_train(args):
    spec = _load_env(args.env)
    eps = TRAIN_EPSILON if args.eps is None else args.eps
    attack = AttackConfig(
        epsilon=eps,
        alpha=eps / 4 if args.alpha is None else args.alpha,
        steps=10 if args.attack_steps is None else args.attack_steps,
    )
    config = trainer.TrainConfig(
        total_steps=args.steps,
        learning_rate=args.lr,
        adversarial=args.adversarial,
        attack_config=attack,
        seed=args.seed,
    )
    out = _out_dir(args.out)

    def progress(rec):
        if rec.episode_index % 100 == 0:
            log.info("episode %d return %.3f epsilon %.3f", rec.episode_index, rec.episode_return, rec.epsilon)

    net, records = trainer.train(spec, config, progress=progress)
    save_model(net, out / "model.json")
    io.write_table(
        out / "train_log.csv",
        ["episode_index", "return", "steps", "epsilon"],
        [(r.episode_index, r.episode_return, r.steps, r.epsilon) for r in records],
    )
    print(f"wrote {out / 'model.json'} ({len(records)} episodes)")


def cmd_eval(args):
    spec = _load_env(args.env)
    if not args.model:
        raise CommandError("--model is required")
    net = _load_net(args.model[0], spec)
    attack = None
    if args.attack_eps is not None:
        eps = args.attack_eps
        attack = AttackConfig(
            epsilon=eps,
            alpha=(eps / 4 if args.alpha is None else args.alpha) if eps > 0 else 0.0,
            steps=10 if args.attack_steps is None else args.attack_steps,
        )
    report = trainer.evaluate(net, spec, args.episodes, attack=attack)
    out = _out_dir(args.out)
    rows = [(k, r) for k, r in enumerate(report.episode_returns)]
    rows.append(("mean", report.mean_return))
    io.write_table(out / "eval.csv", ["episode", "return"], rows)
    print(f"mean return over {report.episodes} episodes: {report.mean_return:.6f}")
    return report


def _labels(paths):
    labels = []
    for p in paths:
        base = label = Path(p).stem
        k = 1
        while label in labels:
            k += 1
            label = f"{base}_{k}"
        labels.append(label)
    return labels


def _analyze_policy(net, label, spec, args, out, map_override):
    eps = DEFAULT_EPSILON if args.eps is None else args.eps
    inner = AttackConfig(
        epsilon=eps,
        alpha=eps / 10 if args.alpha is None else args.alpha,
        steps=50 if args.attack_steps is None else args.attack_steps,
    )
    states = trainer.analysis_states(net, spec, args.rollout)
    log.info("%s: analyzing %d states", label, len(states))

    attack_dir = _out_dir(out / "attacks" / label)
    results = [minimal_perturbation(net, s, eps, inner, args.bisect) for s in states]
    io.write_table(
        attack_dir / "attacks.csv",
        ["state_index", "success", "epsilon_used", "linf", "l2", "original_action", "perturbed_action"],
        [
            (k, r.success, r.epsilon_used, r.linf_norm, r.l2_norm, r.original_action, r.perturbed_action)
            for k, r in enumerate(results)
        ],
    )
    for k, r in enumerate(results):
        io.write_grid(attack_dir / f"eta_{k:03d}.csv", r.eta)

    spectra_dir = _out_dir(out / "spectra" / label)
    profiles = []
    for k, r in enumerate(results):
        if not r.success:
            continue
        spectrum = fourier.dft2(r.eta)
        io.write_grid(spectra_dir / f"spectrum_{k:03d}.csv", fourier.log_power(spectrum))
        io.write_pgm(spectra_dir / f"spectrum_{k:03d}.pgm", fourier.log_power(spectrum))
        profiles.append(fourier.energy_by_max_frequency(spectrum))
    centroid = math.nan
    if profiles:
        profile = fourier.average_profiles(profiles)
        io.write_table(spectra_dir / "profile.csv", ["f", "energy"], enumerate(profile.energies))
        if profile.energies.sum() > 0:
            centroid = fourier.spectral_centroid(profile)
    else:
        (spectra_dir / "SKIPPED").write_text("no successful perturbation within epsilon_max\n")

    maps_dir = _out_dir(out / "maps" / label)
    if map_override is not None:
        k_map = sensitivity.SensitivityMap("K", map_override, len(states))
        h_map = sensitivity.SensitivityMap("H", map_override, len(states), args.temperature)
    else:
        k_map = sensitivity.kmap(net, states)
        h_map = sensitivity.hmap(net, states, args.temperature)
    metrics = []
    for name, m in (("kmap", k_map), ("hmap", h_map)):
        io.write_grid(maps_dir / f"{name}.csv", m.values)
        io.write_pgm(maps_dir / f"{name}.pgm", m.values)
        try:
            s = sensitivity.sparsity(m)
        except ValueError:
            log.warning("%s %s map is identically zero; sparsity undefined", label, m.kind)
            s = math.nan
        metrics.append((m.kind, label, s, sensitivity.entropy(m)))

    successes = sum(r.success for r in results)
    mean_eps = sum(r.epsilon_used for r in results if r.success) / successes if successes else math.nan
    return metrics, (label, len(states), successes, mean_eps, centroid)


def cmd_analyze(args):
    spec = _load_env(args.env)
    if not args.model:
        raise CommandError("at least one --model is required")
    nets = [_load_net(p, spec) for p in args.model]
    map_override = None
    if args.map_override is not None:
        if not os.path.isfile(args.map_override):
            raise CommandError(f"map override not found: {args.map_override}")
        map_override = io.read_grid(args.map_override)
        if map_override.shape != spec.observation_shape:
            raise CommandError(f"map override is {map_override.shape}, observations are {spec.observation_shape}")
    out = _out_dir(args.out)
    models_dir = _out_dir(out / "models")
    labels = _labels(args.model)

    metrics, comparison = [], []
    for path, net, label in zip(args.model, nets, labels):
        shutil.copyfile(path, models_dir / f"{label}.json")
        m, c = _analyze_policy(net, label, spec, args, out, map_override)
        metrics.extend(m)
        comparison.append(c)
    io.write_table(out / "metrics.csv", ["map_kind", "policy_label", "sparsity", "entropy"], metrics)
    if len(nets) > 1:
        io.write_table(
            out / "comparison.csv",
            ["policy_label", "states", "successes", "mean_epsilon_used", "spectral_centroid"],
            comparison,
        )
    for label, n, succ, mean_eps, centroid in comparison:
        print(f"{label}: {succ}/{n} states flipped, mean radius {mean_eps:.6g}, spectral centroid {centroid:.6g}")
    for kind, label, s, h in metrics:
        print(f"{label} {kind}: sparsity {s:.6g} entropy {h:.6g}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="advpolicy",
        description="Train grid-world Q-network policies and analyze their adversarial vulnerabilities.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def shared(p):
        p.add_argument("--env", help="GridSpec JSON file (default: built-in 8x8 map)")
        p.add_argument("--model", action="append", default=[], help="model file (repeatable for analyze)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--eps", type=float, help="attack radius (train: 8/255, analyze: 1/255)")
        p.add_argument("--alpha", type=float, help="PGD step size (analyze: at --eps, scaled with each probe)")
        p.add_argument("--attack-steps", type=int, help="PGD iterations")
        return p

    p = shared(sub.add_parser("train", help="train a vanilla or adversarially trained policy"))
    p.add_argument("--adversarial", action="store_true", help="perturb training states with PGD")
    p.add_argument("--steps", type=int, default=trainer.TrainConfig.total_steps, help="environment steps")
    p.add_argument("--lr", type=float, default=trainer.TrainConfig.learning_rate)
    p.set_defaults(func=cmd_train)

    p = shared(sub.add_parser("eval", help="greedy evaluation, optionally under PGD"))
    p.add_argument("--episodes", type=int, default=10)
    p.add_argument("--attack-eps", type=float, help="evaluate under PGD with this radius")
    p.set_defaults(func=cmd_eval)

    p = shared(sub.add_parser("analyze", help="minimal perturbations, spectra, KMAP/HMAP, metrics"))
    p.add_argument("--bisect", type=int, default=12, help="bisection iterations on the radius")
    p.add_argument("--rollout", type=int, default=30, help="states per policy")
    p.add_argument("--temperature", type=float, default=1.0, help="HMAP softmax temperature")
    p.add_argument("--map-override", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        args.func(args)
    except (CommandError, ShapeError, ValueError, OSError) as exc:
        print(f"advpolicy {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
