"""
Command-line surface: ``attack``, ``bench`` and ``train``.

Every failure prints one line to stderr,
``error code=<n> kind=<Error> message="..."``, and returns the exit code
(2 bad flags, 3 data/model load failure, 4 numeric failure).
"""
import argparse
import logging
import sys
from typing import Optional, Sequence

import numpy as np
from pydantic import ValidationError

from custom_utilities.custom_exception import ConfigError, CustomException, DataLoadError
from dto.request_dto.attack import AttackConfig
from dto.request_dto.bench import BenchSpec
from dto.request_dto.training import OptimizerConfig
from dto.response_dto.bench import BENCH_COLUMNS, AttackSummary
from enums.attacks import AttackKind, InitPolicy, StepRule
from enums.autodiff import GradMode
from enums.cli import ExitCode
from enums.training import OptimizerKind
from repository.report_repository import ReportRepository
from services.advtrain.adv_training_service import fit_clean
from services.attacks.attack_service import accuracy, bim, evaluate_loss, fgsm, pgd
from services.bench.bench_service import BenchService, num_classes_of, take_batch

logger = logging.getLogger(__name__)

bench_service = BenchService()
report_repository = ReportRepository()


class CliParser(argparse.ArgumentParser):
    """Raises instead of exiting so every flag error takes the single-line path."""

    def error(self, message):
        raise ConfigError(f"{message}; {self.format_usage().strip()}")


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def int_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def build_parser(default_seed: int = 0) -> CliParser:
    parser = CliParser(prog="semigrad", description="Semi-backward adversarial perturbation toolkit")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    attack = commands.add_parser("attack", help="run one attack and report its cost")
    attack.add_argument("--model", default="mlp-3x64", help="preset name or .sgck checkpoint")
    attack.add_argument("--data", default="synthetic", help="synthetic[:k=v,...], IDX pair or CSV")
    attack.add_argument("--attack", choices=[kind.value for kind in AttackKind], default="pgd")
    attack.add_argument("--eps", type=float, default=8 / 255)
    attack.add_argument("--eta", type=float, default=None)
    attack.add_argument("--steps", type=positive_int, default=10)
    attack.add_argument("--mode", choices=[mode.value for mode in GradMode], default="semi")
    attack.add_argument("--step-rule", choices=["signed", "raw"], default="signed")
    attack.add_argument("--init", choices=["zero", "uniform"], default="zero")
    attack.add_argument("--clamp", type=float, nargs=2, metavar=("LO", "HI"), default=[0.0, 1.0])
    attack.add_argument("--no-clamp", action="store_true")
    attack.add_argument("--batch", type=positive_int, default=16)
    attack.add_argument("--fit-epochs", type=non_negative_int, default=0, help="clean training before attacking")
    attack.add_argument("--seed", type=non_negative_int, default=default_seed)
    attack.add_argument("--out", default=None, help="CSV report path")

    bench = commands.add_parser("bench", help="time full vs semi attacks over a grid")
    bench.add_argument("--spec", default=None, help="TOML file with BenchSpec fields")
    bench.add_argument("--models", nargs="+", default=None)
    bench.add_argument("--batch", type=int_list, default=None, help="batch sizes, e.g. 4,8,16")
    bench.add_argument("--K", type=int_list, default=None, help="attack steps, e.g. 10,25,50")
    bench.add_argument("--repeats", type=int, default=None)
    bench.add_argument("--warmup", type=int, default=None)
    bench.add_argument("--eps", type=float, default=None)
    bench.add_argument("--data", default=None)
    bench.add_argument("--seed", type=non_negative_int, default=None)
    bench.add_argument("--out", default="bench.csv")

    train = commands.add_parser("train", help="adversarial training with the requires-grad toggle")
    train.add_argument("--model", default="mlp-3x64")
    train.add_argument("--data", default="synthetic:n=256,classes=2,dim=16")
    train.add_argument("--K", type=int_list, default=[1, 2, 5, 10])
    train.add_argument("--epochs", type=positive_int, default=1)
    train.add_argument("--toggle-semi", choices=["on", "off", "both"], default="both")
    train.add_argument("--verify", action="store_true", help="check bitwise-equal models across toggles")
    train.add_argument("--optimizer", choices=["sgd", "momentum"], default="sgd")
    train.add_argument("--lr", type=float, default=0.05)
    train.add_argument("--momentum", type=float, default=0.9)
    train.add_argument("--batch", type=positive_int, default=32)
    train.add_argument("--eps", type=float, default=0.1)
    train.add_argument("--eta", type=float, default=None)
    train.add_argument("--seed", type=non_negative_int, default=default_seed)
    train.add_argument("--out", default=None, help="CSV of per-epoch rows")
    train.add_argument("--save", default=None, help="checkpoint path for the last trained model")
    return parser


def cmd_attack(args: argparse.Namespace) -> int:
    features, labels = bench_service.datasets.load(args.data)
    model = bench_service.load_model(args.model, features.shape[1:], num_classes_of(labels), args.seed)
    if args.fit_epochs:
        fit_clean(model, features, labels, args.fit_epochs, seed=args.seed)
    x, y = take_batch(features, labels, args.batch)

    cfg = AttackConfig(
        epsilon=args.eps, eta=args.eta, steps=args.steps, mode=GradMode(args.mode),
        step_rule=StepRule.SIGNED_GRAD if args.step_rule == "signed" else StepRule.RAW_GRAD,
        init=InitPolicy.ZERO if args.init == "zero" else InitPolicy.UNIFORM_RANDOM,
        clamp_range=None if args.no_clamp else tuple(args.clamp), seed=args.seed,
    )
    kind = AttackKind(args.attack)
    if kind is AttackKind.FGSM:
        result = fgsm(model, x, y, cfg.epsilon, cfg.mode, cfg.clamp_range)
    elif kind is AttackKind.BIM:
        result = bim(model, x, y, cfg)
    else:
        result = pgd(model, x, y, cfg)

    summary = AttackSummary(
        model=args.model, attack=kind.value, mode=cfg.mode.value, batch=x.shape[0],
        epsilon=cfg.epsilon, steps=1 if kind is AttackKind.FGSM else cfg.steps,
        perturbation_sha256=result.perturbation_digest,
        linf=float(np.max(np.abs(result.perturbation.data))),
        clean_loss=evaluate_loss(model, x, y), final_loss=result.final_loss,
        clean_accuracy=accuracy(model, x, y), adversarial_accuracy=accuracy(model, result.adversarial, y),
        fwd_flops=result.cost.forward_flops, bwd_flops=result.cost.backward_flops,
        peak_bytes=result.cost.peak_bytes, param_grad_bytes=result.cost.param_grad_bytes,
        wall_ns=result.cost.wall_ns_median,
    )
    print(" ".join(f"{key}={value}" for key, value in summary.model_dump().items()))
    if args.out:
        report_repository.write_rows(args.out, [summary])
    return ExitCode.OK


def cmd_bench(args: argparse.Namespace) -> int:
    overrides = dict(
        models=args.models, batch_sizes=args.batch, steps=args.K, repeats=args.repeats,
        warmup=args.warmup, epsilon=args.eps, data=args.data, seed=args.seed,
    )
    if args.spec:
        spec = BenchSpec.from_toml(args.spec, **overrides)
    else:
        spec = BenchSpec(**{key: value for key, value in overrides.items() if value is not None})
    rows = bench_service.run_bench(spec)
    report_repository.write_rows(args.out, rows, columns=BENCH_COLUMNS)
    for row in rows:
        if row.speedup is not None:
            claim = f"{row.speedup:.3f}x" if row.status == "ok" else "noisy"
            print(f"{row.model} batch={row.batch} K={row.K} speedup={claim} flop_ratio={row.flop_ratio:.4f}")
    return ExitCode.OK


def cmd_train(args: argparse.Namespace) -> int:
    toggles = {"on": [True], "off": [False], "both": [True, False]}[args.toggle_semi]
    optimizer = OptimizerConfig(
        kind=OptimizerKind.SGD if args.optimizer == "sgd" else OptimizerKind.SGD_MOMENTUM,
        lr=args.lr, momentum=args.momentum if args.optimizer == "momentum" else 0.0,
    )
    reports = bench_service.run_training(
        args.model, args.data, args.K, args.epochs, toggles, optimizer, args.batch,
        args.eps, args.eta, args.seed, verify=args.verify, save_path=args.save,
    )
    if args.out:
        report_repository.write_rows(args.out, reports)
    for report in reports:
        print(f"epoch={report.epoch} K={report.steps} semi={report.toggle_semi} "
              f"flops={report.total_flops} wall_ns={report.wall_ns} loss={report.mean_loss:.6f}")
    if args.verify:
        print("models identical")
    return ExitCode.OK


COMMANDS = {"attack": cmd_attack, "bench": cmd_bench, "train": cmd_train}


def run(argv: Optional[Sequence[str]] = None, default_seed: int = 0) -> int:
    try:
        args = build_parser(default_seed).parse_args(argv)
        return int(COMMANDS[args.command](args))
    except ValidationError as exc:
        error = ConfigError(f"invalid configuration: {exc.errors()[0]['loc']} {exc.errors()[0]['msg']}")
    except CustomException as exc:
        error = exc
    except ValueError as exc:
        error = ConfigError(str(exc))
    except OSError as exc:
        error = DataLoadError(exc.strerror or str(exc), path=exc.filename)
    logger.debug("command failed", exc_info=True)
    print(error.to_line(), file=sys.stderr)
    return int(error.exit_code)
