"""
Training loop: AdamW + warmup/cosine schedule, per-epoch validation,
early stopping on per-second validation accuracy.
"""
import csv
import logging
import math
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.errors import ConfigMismatchError, DivergedLossError, NonFiniteError, PipelineIOError
from core.round_store import RoundRecord, Split
from core.tensor import Tape, make_rng, ops, restore_rng, rng_state
from core.utils import predicted_classes
from modules.event_fusion.v1 import EventVocab
from modules.spacetime_model.v1 import ModelConfig, decays, init_weights
from .checkpoint import Checkpoint, config_hash, save_checkpoint
from .config import TrainConfig
from .data import Classifier, RoundData, sample_examples
from .early_stopping import EarlyStopping
from .optimizer import AdamState, adamw_step
from .schedule import lr_at

logger = logging.getLogger(__name__)

HISTORY_FILE = "history.csv"
BEST_CHECKPOINT = "best.ckpt"
LAST_CHECKPOINT = "last.ckpt"


class EpochRecord(BaseModel):
    epoch: int
    train_loss: float
    val_accuracy: float
    lr: float


class TrainResult(BaseModel):
    """Best checkpoint and the per-epoch history"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    best_epoch: int
    best_val_accuracy: float
    stopped_epoch: int
    total_steps: int
    rejected_steps: int
    history: List[EpochRecord]
    best_checkpoint: Optional[Checkpoint] = Field(default=None, exclude=True)


def resolve_schedule(cfg: TrainConfig, n_train: int) -> TrainConfig:
    """Fill total_steps from the dataset size; shrink warmup when it would not fit"""
    if cfg.total_steps is not None:
        return cfg
    steps_per_epoch = math.ceil(n_train / cfg.batch_size)
    total = cfg.epochs * steps_per_epoch
    warmup = cfg.warmup_steps
    if warmup >= total:
        warmup = total // 10
        logger.warning(f"warmup_steps {cfg.warmup_steps} >= total_steps {total}; using {warmup}")
    return cfg.model_copy(update={"total_steps": total, "warmup_steps": warmup})


def optimizer_update(
    params: Dict[str, np.ndarray],
    grads: Dict[str, Optional[np.ndarray]],
    state: AdamState,
    lr: float,
    cfg: TrainConfig,
    decays: Callable[[str], bool]
) -> bool:
    """
    Apply one AdamW step; False when it was rejected for a non-finite gradient.

    A rejected step leaves weights, moments and state.step untouched, so the
    learning-rate schedule does not move either.
    """
    try:
        adamw_step(params, grads, state, lr, cfg, decays)
    except NonFiniteError as e:
        logger.warning(f"Optimizer step rejected at step {state.step}: {e}")
        return False
    return True


def run_config(model_cfg: ModelConfig, train_cfg: TrainConfig, map_id: str) -> Dict[str, object]:
    """Configuration snapshot stored in checkpoints"""
    return {
        "model": model_cfg.model_dump(mode="json"),
        "train": train_cfg.model_dump(mode="json"),
        "events_enabled": train_cfg.events_enabled,
        "map_id": map_id
    }


def validation_seconds(duration_s: int, stride: int) -> List[int]:
    return list(range(1, duration_s + 1, stride))


def validation_accuracy(
    classifier: Classifier,
    data: RoundData,
    records: Sequence[RoundRecord],
    stride: int = 5,
    batch_size: int = 16,
    threads: int = 1
) -> float:
    """
    Per-second accuracy averaged over evaluated seconds, on a stride.

    Accuracy at second t is correct / rounds lasting at least t seconds.
    """
    correct: Dict[int, int] = {}
    alive: Dict[int, int] = {}
    for record in records:
        seconds = validation_seconds(record.duration_s, stride)
        logits = classifier.predict_logits(data.reader(record), data.events_for(record), seconds, batch_size, threads)
        hits = predicted_classes(logits) == record.outcome.label
        for t, hit in zip(seconds, hits):
            alive[t] = alive.get(t, 0) + 1
            correct[t] = correct.get(t, 0) + int(hit)
    if not alive:
        return 0.0
    return float(np.mean([correct[t] / alive[t] for t in sorted(alive)]))


def write_history(path: Path, history: Sequence[EpochRecord]) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["epoch", "train_loss", "val_accuracy", "lr"])
            for row in history:
                writer.writerow([row.epoch, repr(row.train_loss), repr(row.val_accuracy), repr(row.lr)])
    except OSError as e:
        raise PipelineIOError(f"cannot write {path}: {e}")


def _snapshot(classifier: Classifier, state: AdamState, config: dict, rngs: Dict[str, np.random.Generator], meta: dict) -> Checkpoint:
    params = {name: t.data for name, t in classifier.weights.items()}
    return Checkpoint(
        config=config,
        params=params,
        m=state.m,
        v=state.v,
        step=state.step,
        rng_state={name: rng_state(rng) for name, rng in rngs.items()},
        meta=meta
    )


def train(
    data: RoundData,
    model_cfg: ModelConfig,
    cfg: TrainConfig,
    out_dir: Optional[Path] = None,
    threads: int = 1,
    resume: Optional[Checkpoint] = None
) -> TrainResult:
    """
    Train Model A (cfg.events_enabled False) or Model B.

    Args:
        data: Dataset with non-empty train and val splits
        model_cfg: Model configuration
        cfg: Training configuration
        out_dir: Where history.csv, best.ckpt and last.ckpt go (nothing written when None)
        threads: Worker threads for clip assembly
        resume: Continue from a checkpoint written under the same configuration

    Returns:
        TrainResult; best.ckpt holds the weights of the best validation epoch

    Raises:
        EmptySplitError: train or val split is empty
        DivergedLossError: training loss became NaN or infinite
        ConfigMismatchError: resume checkpoint written under another configuration
    """
    train_records = data.require_split(Split.TRAIN)
    val_records = data.require_split(Split.VAL)
    cfg = resolve_schedule(cfg, len(train_records))
    config = run_config(model_cfg, cfg, data.map_spec.map_id)

    weights = init_weights(model_cfg, cfg.seed, cfg.events_enabled, data.map_spec)
    vocab = EventVocab.for_map(data.map_spec) if cfg.events_enabled else None
    classifier = Classifier(weights, model_cfg, vocab)
    params = {name: t.data for name, t in weights.items()}
    state = AdamState.zeros(params)
    rngs = {"sample": make_rng(cfg.seed, "sample"), "dropout": make_rng(cfg.seed, "dropout")}
    history: List[EpochRecord] = []
    stopper = EarlyStopping(cfg.patience)
    first_epoch = 1

    if resume is not None:
        if resume.config_hash != config_hash(config):
            raise ConfigMismatchError("resume checkpoint was written under a different configuration")
        weights.load_arrays({k: v.astype(np.float64) for k, v in resume.params.items()})
        state = AdamState({k: v.astype(np.float64) for k, v in resume.m.items()},
                          {k: v.astype(np.float64) for k, v in resume.v.items()}, resume.step)
        rngs = {name: restore_rng(s) for name, s in resume.rng_state.items()}
        history = [EpochRecord(**row) for row in resume.meta.get("history", [])]
        for row in history:
            stopper.update(row.epoch, row.val_accuracy)
        first_epoch = len(history) + 1
        logger.info(f"Resuming at epoch {first_epoch}, step {state.step}")

    steps_per_epoch = math.ceil(len(train_records) / cfg.batch_size)
    model_name = "Model B" if cfg.events_enabled else "Model A"
    logger.info(f"=== Training {model_name}: {len(train_records)} train / {len(val_records)} val rounds, "
                f"{cfg.epochs} epochs x {steps_per_epoch} steps ===")

    best: Optional[Checkpoint] = None
    rejected = 0
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

    for epoch in range(first_epoch, cfg.epochs + 1):
        losses = []
        lr = lr_at(state.step, cfg)
        for _ in range(steps_per_epoch):
            examples = sample_examples(train_records, rngs["sample"], cfg.batch_size)
            clips, samples = classifier.prepare(
                [data.reader(r) for r, _ in examples],
                [data.events_for(r) for r, _ in examples],
                [t for _, t in examples],
                threads
            )
            labels = np.array([r.outcome.label for r, _ in examples])

            weights.zero_grad()
            try:
                with Tape() as tape:
                    loss = ops.cross_entropy_with_logits(
                        classifier.logits(clips, samples, training=True, rng=rngs["dropout"]), labels
                    )
                    value = loss.item()
                    tape.backward(loss)
            except NonFiniteError as e:
                raise DivergedLossError(f"loss diverged at step {state.step} (epoch {epoch}): {e}")
            if not math.isfinite(value):
                raise DivergedLossError(f"loss is {value} at step {state.step} (epoch {epoch})")

            lr = lr_at(state.step, cfg)
            grads = {name: t.grad for name, t in weights.items()}
            if not optimizer_update(params, grads, state, lr, cfg, decays):
                rejected += 1
            losses.append(value)

        val_acc = validation_accuracy(classifier, data, val_records, cfg.val_stride_s, cfg.batch_size, threads)
        history.append(EpochRecord(epoch=epoch, train_loss=float(np.mean(losses)), val_accuracy=val_acc, lr=lr))
        improved = stopper.update(epoch, val_acc)
        logger.info(f"Epoch {epoch}: train_loss={history[-1].train_loss:.4f} val_accuracy={val_acc:.4f} "
                    f"lr={lr:.3e}{' *' if improved else ''}")

        meta = {"epoch": epoch, "val_accuracy": val_acc, "history": [h.model_dump() for h in history]}
        if improved:
            best = _snapshot(classifier, state, config, rngs, meta)
            if out_dir is not None:
                save_checkpoint(best, out_dir / BEST_CHECKPOINT)
        if out_dir is not None:
            save_checkpoint(_snapshot(classifier, state, config, rngs, meta), out_dir / LAST_CHECKPOINT)
            write_history(out_dir / HISTORY_FILE, history)
        if stopper.should_stop:
            logger.info(f"Early stopping at epoch {epoch}: no improvement for {cfg.patience} epochs")
            break

    logger.info(f"=== {model_name} done: best epoch {stopper.best_epoch} val_accuracy={stopper.best_score} ===")
    return TrainResult(
        best_epoch=stopper.best_epoch,
        best_val_accuracy=stopper.best_score if stopper.best_score is not None else 0.0,
        stopped_epoch=stopper.last_epoch,
        total_steps=cfg.total_steps,
        rejected_steps=rejected,
        history=history,
        best_checkpoint=best
    )
