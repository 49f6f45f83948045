"""End-to-end pipelines: data, teachers, assembly, student, reports.

A pipeline run is fully determined by one 64-bit seed: stage seeds are
derived as splitmix64(seed + stage index), with stage 0 the data, 1 and
2 the two teachers, and 3 the student. Teacher knowledge enters student
training only as assembled target matrices, so no teacher parameters
are resident once assembly is done; adding teachers changes the
one-shot assembly cost, never the per-epoch training work.

Reports are written both as an aligned text table and as one
tab-separated row per (strategy, seed). Without the opt-in timing mode
all report content is a pure function of (config, seeds) and the files
are byte-identical across runs; with timing enabled the epoch-seconds
column holds wall-clock measurements and that guarantee is waived.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import config as cfg
from .datagen import DataParams, Dataset, SyntheticData, gen_dataset
from .ensemble import TargetSet, TeacherBank, build_targets
from .errors import StageError, ValidationError
from .formats import fmt_float, load_all_views, load_logits
from .rng import SplitMix64, derive_seed
from .trainer import StudentModel, evaluate, forward, init_student, train

STAGE_DATA = 0
STAGE_TEACHER_A = 1
STAGE_TEACHER_B = 2
STAGE_STUDENT = 3

TEACHER_A_ID = "teacher-A"
TEACHER_B_ID = "teacher-B"


@dataclass
class RunConfig:
    """A DistillConfig plus data parameters and file bindings."""

    distill: cfg.DistillConfig = field(default_factory=cfg.DistillConfig)
    data: DataParams = field(default_factory=DataParams)
    teacher_paths: list[str] = field(default_factory=list)
    data_dir: str | None = None

    @property
    def seed(self) -> int:
        return self.distill.seed

    def with_strategy_seed(self, strategy: str, seed: int) -> "RunConfig":
        return replace(self, distill=self.distill.with_(strategy=strategy, seed=seed))


@dataclass
class PipelineRow:
    strategy: str
    tau: float
    seed: int
    top1: float
    epoch_seconds: float | None
    loss_trace: list[float]
    model: StudentModel
    teacher_test_acc: dict[str, float]


@dataclass
class AblationReport:
    rows: list[PipelineRow]
    failures: list[tuple[str, int, str]] = field(default_factory=list)

    def mean_top1(self, strategy: str) -> float:
        vals = [r.top1 for r in self.rows if r.strategy == strategy]
        if not vals:
            raise ValidationError(f"no rows for strategy {strategy}")
        return float(np.mean(vals))


def _strategy_rank(tag: str) -> int:
    return cfg.STRATEGIES.index(tag)


def train_plain(dataset: Dataset, config: cfg.DistillConfig, stage_seed: int) -> StudentModel:
    prng = SplitMix64(derive_seed(stage_seed, 0))
    model = init_student(dataset.dim, config.hidden_dim, dataset.n_classes, prng)
    plain = config.with_(strategy=cfg.NONE, seed=derive_seed(stage_seed, 1))
    train(model, dataset.features, dataset.labels, TargetSet(cfg.NONE), plain)
    return model


def _teacher_ids_for(strategy: str) -> list[str]:
    if strategy == cfg.NONE:
        return []
    if strategy == cfg.KD_SINGLE:
        return [TEACHER_A_ID]
    return [TEACHER_A_ID, TEACHER_B_ID]


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, str(exc)) from exc


def _obtain_data(rc: RunConfig, caches: dict | None) -> SyntheticData:
    if rc.data_dir is not None:
        return load_all_views(rc.data_dir)
    key = ("data", rc.seed)
    if caches is not None and key in caches:
        return caches[key]
    data = gen_dataset(derive_seed(rc.seed, STAGE_DATA), rc.data)
    if caches is not None:
        caches[key] = data
    return data


def _obtain_teacher_logits(
    rc: RunConfig, data: SyntheticData, caches: dict | None
) -> tuple[TeacherBank | None, dict[str, float]]:
    """Teacher logits on the training samples, plus teacher test accuracy.

    Dumps given in the run config win; otherwise teachers are trained
    in-process on their clean modality (A for the first, B for the
    second), seeded by their stage index so retraining is bit-exact.
    """
    strategy = rc.distill.strategy
    if rc.teacher_paths:
        dumps = [load_logits(p) for p in rc.teacher_paths]
        n, c = data.train_dark.n, data.train_dark.n_classes
        for dump in dumps:
            if dump.n != n or dump.c != c:
                raise ValidationError(
                    f"teacher dump {dump.teacher_id!r} is {dump.n}x{dump.c}, "
                    f"training data needs {n}x{c}"
                )
        bank = TeacherBank([d.rows for d in dumps], [d.teacher_id for d in dumps])
        return bank, {}
    ids = _teacher_ids_for(strategy)
    if not ids:
        return None, {}
    mats, accs = [], {}
    for teacher_id in ids:
        stage = STAGE_TEACHER_A if teacher_id == TEACHER_A_ID else STAGE_TEACHER_B
        train_view = data.train_a if teacher_id == TEACHER_A_ID else data.train_b
        test_view = data.test_a if teacher_id == TEACHER_A_ID else data.test_b
        key = ("teacher", rc.seed, teacher_id)
        if caches is not None and key in caches:
            model = caches[key]
        else:
            model = train_plain(train_view, rc.distill, derive_seed(rc.seed, stage))
            if caches is not None:
                caches[key] = model
        mats.append(forward(model, train_view.features))
        accs[teacher_id] = evaluate(model, test_view.features, test_view.labels)
    return TeacherBank(mats, ids), accs


def run_pipeline(rc: RunConfig, timing: bool = False, caches: dict | None = None) -> PipelineRow:
    """One (strategy, seed) cell: data -> teachers -> targets -> student."""
    data = _stage("generate-data", _obtain_data, rc, caches)
    bank, teacher_accs = _stage("teachers", _obtain_teacher_logits, rc, data, caches)

    def _targets() -> TargetSet:
        if rc.distill.strategy == cfg.NONE:
            return TargetSet(cfg.NONE)
        return build_targets(bank, data.train_dark.labels, rc.distill)

    targets = _stage("assemble-targets", _targets)

    def _student():
        stage_seed = derive_seed(rc.seed, STAGE_STUDENT)
        prng = SplitMix64(derive_seed(stage_seed, 0))
        model = init_student(
            data.train_dark.dim, rc.distill.hidden_dim, data.train_dark.n_classes, prng
        )
        run_cfg = rc.distill.with_(seed=derive_seed(stage_seed, 1))
        result = train(model, data.train_dark.features, data.train_dark.labels, targets, run_cfg)
        return model, result

    model, result = _stage("train-student", _student)
    top1 = _stage("evaluate", evaluate, model, data.test_dark.features, data.test_dark.labels)
    epoch_seconds = None
    if timing and result.epoch_seconds:
        epoch_seconds = float(np.mean(result.epoch_seconds))
    return PipelineRow(
        strategy=rc.distill.strategy,
        tau=rc.distill.tau,
        seed=rc.seed,
        top1=top1,
        epoch_seconds=epoch_seconds,
        loss_trace=result.loss_trace,
        model=model,
        teacher_test_acc=teacher_accs,
    )


def run_ablation(
    base: RunConfig,
    strategies: list[str],
    seeds: list[int],
    timing: bool = False,
) -> AblationReport:
    """Cross-product of strategies and seeds, reported in canonical order.

    Per-seed data and teacher models are cached across strategies; the
    cache only reuses values that deterministic retraining would
    reproduce bit-exactly, so reports do not depend on cell order.
    Failed cells are recorded and the report still covers the rest.
    """
    if not strategies or not seeds:
        raise ValidationError("need at least one strategy and one seed")
    for tag in strategies:
        if tag not in cfg.STRATEGIES:
            raise ValidationError(f"unknown strategy {tag!r}")
    caches: dict = {}
    rows, failures = [], []
    for tag in sorted(strategies, key=_strategy_rank):
        for seed in seeds:
            rc = base.with_strategy_seed(tag, seed)
            try:
                rows.append(run_pipeline(rc, timing=timing, caches=caches))
            except Exception as exc:  # cell isolation: report partial results
                failures.append((tag, seed, str(exc)))
    rows.sort(key=lambda r: (_strategy_rank(r.strategy), r.tau, r.seed))
    return AblationReport(rows=rows, failures=failures)


# ---------------------------------------------------------------------------
# report rendering


def _fmt_seconds(value: float | None) -> str:
    return "NA" if value is None else fmt_float(value)


def report_machine_text(report: AblationReport) -> str:
    lines = ["#report v1"]
    for r in report.rows:
        lines.append(
            "\t".join(
                [r.strategy, fmt_float(r.tau), str(r.seed), fmt_float(r.top1), _fmt_seconds(r.epoch_seconds)]
            )
        )
    for tag, seed, message in report.failures:
        lines.append("\t".join([tag, "-", str(seed), "FAILED", message.replace("\t", " ")]))
    return "\n".join(lines) + "\n"


def report_table_text(report: AblationReport) -> str:
    """Aligned per-strategy summary: mean top-1 plus the per-seed values."""
    groups: dict[tuple[str, float], list[PipelineRow]] = {}
    for r in report.rows:
        groups.setdefault((r.strategy, r.tau), []).append(r)
    header = ["strategy", "tau", "mean_top1", "per_seed_top1", "epoch_seconds"]
    body = []
    for (tag, tau), rows in sorted(groups.items(), key=lambda kv: (_strategy_rank(kv[0][0]), kv[0][1])):
        mean = float(np.mean([r.top1 for r in rows]))
        per_seed = ",".join(f"{r.seed}:{r.top1:.4f}" for r in rows)
        secs = [r.epoch_seconds for r in rows if r.epoch_seconds is not None]
        body.append(
            [tag, fmt_float(tau), f"{mean:.4f}", per_seed, _fmt_seconds(float(np.mean(secs)) if secs else None)]
        )
    for tag, seed, _ in report.failures:
        body.append([tag, "-", "FAILED", f"seed {seed}", "-"])
    widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    for row in body:
        lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# cost probe


@dataclass
class CostProbe:
    epochs: int
    per_epoch_seconds: dict[str, float]
    pkd_kd_ratio: float
    assembly_flops: dict[str, int]
    peak_rss_kb: int | None


def assembly_flop_estimate(n: int, k: int, c: int) -> int:
    """Floating-op count of one-shot weighting plus assembly.

    Per (sample, teacher): softened distribution for weighting (~4C),
    cross-entropy against the reference (~3C), normalization (~2), and
    the weighted sum at assembly temperature (~6C). The count depends
    only on (N, K, C); training epochs never enter.
    """
    if k == 0:
        return 0
    per_pair = 4 * c + 3 * c + 6 * c
    return n * k * (per_pair + 2)


def cost_probe(rc: RunConfig, epochs: int = 5, repeats: int = 3) -> CostProbe:
    """Compare per-epoch training wall-time across NONE, KD_SINGLE, PKD.

    All three strategies train on identical data with the same seed and
    the same single-target loss shape, so the only cost difference KD
    could introduce is the one-shot assembly before epoch 0. Timing is
    a measurement, so it is made sturdy against scheduler noise: each
    run drops its first epoch as warmup and keeps a low quantile of the
    rest, strategies are interleaved within every repeat with the
    KD/PKD order alternating between repeats, and the reported ratio is
    the median over the paired repeats. Assembly flop counts are
    analytic and depend only on matrix sizes, never on epochs.
    """
    if epochs < 2:
        raise ValidationError("cost probe needs at least 2 epochs (first is warmup)")
    if repeats < 1:
        raise ValidationError("cost probe needs at least one repeat")
    caches: dict = {}
    data = _obtain_data(rc, caches)
    n, c = data.train_dark.n, data.train_dark.n_classes
    tags = (cfg.NONE, cfg.KD_SINGLE, cfg.PKD)
    prepared = {}
    flops = {}
    for tag in tags:
        cell = replace(rc, distill=rc.distill.with_(strategy=tag, epochs=epochs))
        bank, _ = _obtain_teacher_logits(cell, data, caches)
        targets = (
            TargetSet(cfg.NONE)
            if tag == cfg.NONE
            else build_targets(bank, data.train_dark.labels, cell.distill)
        )
        prepared[tag] = (cell.distill, targets)
        flops[tag] = assembly_flop_estimate(n, 0 if tag == cfg.NONE else bank.k, c)

    def timed_run(tag: str) -> float:
        config, targets = prepared[tag]
        stage_seed = derive_seed(rc.seed, STAGE_STUDENT)
        prng = SplitMix64(derive_seed(stage_seed, 0))
        model = init_student(data.train_dark.dim, config.hidden_dim, c, prng)
        run_cfg = config.with_(seed=derive_seed(stage_seed, 1))
        result = train(model, data.train_dark.features, data.train_dark.labels, targets, run_cfg)
        # low quantile of the post-warmup epochs: scheduler spikes only
        # fatten the right tail, the floor is the honest per-epoch cost
        return float(np.quantile(result.epoch_seconds[1:], 0.25))

    # interleave the strategies within each repeat so machine drift hits
    # all of them alike, and alternate the KD/PKD order between repeats
    # so monotone drift biases the paired ratio both ways equally
    medians = {tag: [] for tag in tags}
    ratios = []
    for rep in range(repeats):
        order = tags if rep % 2 == 0 else (cfg.NONE, cfg.PKD, cfg.KD_SINGLE)
        for tag in order:
            medians[tag].append(timed_run(tag))
        ratios.append(medians[cfg.PKD][-1] / medians[cfg.KD_SINGLE][-1])
    per_epoch = {tag: float(np.median(vals)) for tag, vals in medians.items()}
    peak = _peak_rss_kb()
    return CostProbe(
        epochs=epochs,
        per_epoch_seconds=per_epoch,
        pkd_kd_ratio=float(np.median(ratios)),
        assembly_flops=flops,
        peak_rss_kb=peak,
    )


def _peak_rss_kb() -> int | None:
    try:
        import resource

        return int(resource.getrusage(resource.RUSAGE_SELF).ru_maxrss)
    except Exception:
        return None


def cost_probe_text(probe: CostProbe) -> str:
    lines = [f"epochs timed: {probe.epochs} (first excluded as warmup)"]
    for tag in (cfg.NONE, cfg.KD_SINGLE, cfg.PKD):
        lines.append(
            f"{tag:10s} per-epoch {probe.per_epoch_seconds[tag]:.6f}s  "
            f"assembly-flops {probe.assembly_flops[tag]}"
        )
    lines.append(f"PKD / KD_SINGLE per-epoch ratio: {probe.pkd_kd_ratio:.3f}")
    if probe.peak_rss_kb is not None:
        lines.append(f"peak RSS: {probe.peak_rss_kb} kB (best effort)")
    return "\n".join(lines) + "\n"
