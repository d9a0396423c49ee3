# experiment/campaign.py
from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import django
from django.apps import apps
from django.conf import settings
from joblib import Parallel, delayed

from experiment.config import ExperimentConfig
from experiment.engine import run_one
from gp_core.exceptions import MogpError, ParseError
from metrics.results import read_result, write_result

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
MANIFEST_FORMAT = 1

STATUS_OK = "ok"
STATUS_FAILED = "failed"


@dataclass(frozen=True)
class CampaignTask:
    cfg: ExperimentConfig
    run_index: int
    path: Path

    @property
    def run_id(self) -> str:
        return self.cfg.run_id(self.run_index)


@dataclass
class ManifestEntry:
    run_id: str
    dataset: str
    method: str
    thresholds: str
    run_index: int
    seed: int
    path: str
    status: str
    resumed: bool = False
    error: Optional[str] = None


@dataclass
class CampaignManifest:
    root: Path
    entries: list[ManifestEntry] = field(default_factory=list)

    @property
    def path(self) -> Path:
        return self.root / MANIFEST_NAME

    @property
    def failed(self) -> list[ManifestEntry]:
        return [e for e in self.entries if e.status != STATUS_OK]

    @property
    def executed(self) -> list[ManifestEntry]:
        return [e for e in self.entries if e.status == STATUS_OK and not e.resumed]

    def counts(self) -> dict[str, int]:
        return {
            "total": len(self.entries),
            "ok": sum(e.status == STATUS_OK for e in self.entries),
            "failed": len(self.failed),
            "resumed": sum(e.resumed for e in self.entries),
        }

    def write(self) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        payload = {
            "format": MANIFEST_FORMAT,
            "counts": self.counts(),
            "entries": [asdict(e) for e in self.entries],
        }
        tmp = self.path.with_name(self.path.name + f".{os.getpid()}.tmp")
        tmp.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        os.replace(tmp, self.path)
        return self.path

    def result_path(self, entry: ManifestEntry) -> Path:
        return self.root / entry.path


def load_manifest(path: Path | str) -> CampaignManifest:
    """Acepta el archivo manifest.json o el directorio que lo contiene."""
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ParseError(f"manifest not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: invalid manifest ({e.msg})", e.lineno) from e
    if payload.get("format") != MANIFEST_FORMAT:
        raise ParseError(f"{path}: unsupported manifest format")
    try:
        entries = [ManifestEntry(**e) for e in payload["entries"]]
    except (KeyError, TypeError) as e:
        raise ParseError(f"{path}: malformed manifest entry ({e})") from e
    return CampaignManifest(root=path.parent, entries=entries)


# =========================
# Planificación y ejecución
# =========================

def plan(configs: Sequence[ExperimentConfig], root: Path) -> list[CampaignTask]:
    tasks: dict[str, CampaignTask] = {}
    for cfg in configs:
        for run_index in range(cfg.runs):
            task = CampaignTask(cfg, run_index, cfg.result_path(run_index, root))
            tasks.setdefault(task.run_id, task)
    return list(tasks.values())


def _existing_is_valid(task: CampaignTask) -> bool:
    if not task.path.exists():
        return False
    try:
        result = read_result(task.path)
    except (ParseError, MogpError, OSError):
        logger.warning("campaign: invalid result file %s, re-running", task.path)
        return False
    return result.run_id == task.run_id and result.seed == task.cfg.seed_for(task.run_index)


def _entry(task: CampaignTask, root: Path, status: str, *, resumed: bool = False, error: str | None = None) -> ManifestEntry:
    return ManifestEntry(
        run_id=task.run_id,
        dataset=task.cfg.dataset,
        method=task.cfg.method,
        thresholds=task.cfg.thresholds_label,
        run_index=task.run_index,
        seed=task.cfg.seed_for(task.run_index),
        path=str(task.path.relative_to(root)),
        status=status,
        resumed=resumed,
        error=error,
    )


def execute_task(task: CampaignTask, root: Path, trace: bool = False) -> ManifestEntry:
    """Una corrida; los errores quedan en la entrada, nunca se propagan."""
    if not apps.ready:
        # worker de loky: settings heredado por env, falta LOGGING
        django.setup()
    try:
        result = run_one(task.cfg, task.run_index, trace=trace)
        write_result(result, task.path)
    except Exception as e:
        logger.exception("campaign: run %s failed", task.run_id)
        return _entry(task, root, STATUS_FAILED, error=f"{type(e).__name__}: {e}")
    return _entry(task, root, STATUS_OK)


def run_campaign(
    configs: Iterable[ExperimentConfig],
    parallelism: Optional[int] = None,
    *,
    root: Path | str | None = None,
    trace: bool = False,
) -> CampaignManifest:
    """
    Ejecuta todas las corridas con a lo sumo `parallelism` procesos. Las que
    ya tienen un resultado válido en disco se saltan (reanudable).
    """
    root = Path(root) if root is not None else Path(settings.MOGP_RESULTS_DIR)
    parallelism = max(1, parallelism or settings.MOGP_PARALLELISM)
    tasks = plan(list(configs), root)

    done: dict[str, ManifestEntry] = {}
    pending: list[CampaignTask] = []
    for task in tasks:
        if _existing_is_valid(task):
            done[task.run_id] = _entry(task, root, STATUS_OK, resumed=True)
        else:
            pending.append(task)
    logger.info("campaign: %d runs planned, %d already done, parallelism=%d", len(tasks), len(done), parallelism)

    if pending:
        entries = Parallel(n_jobs=parallelism)(delayed(execute_task)(task, root, trace) for task in pending)
        done.update((e.run_id, e) for e in entries)

    manifest = CampaignManifest(root=root, entries=[done[t.run_id] for t in tasks])
    manifest.write()
    counts = manifest.counts()
    logger.info(
        "campaign: %d ok (%d resumed), %d failed -> %s",
        counts["ok"], counts["resumed"], counts["failed"], manifest.path,
    )
    return manifest
