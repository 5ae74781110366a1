"""HTTP service: classify signatures, queue rejects for expert triage,
fold expert labels back into the corpus and retrain on demand.

State is kept in plain append-only files: a triage journal that is
replayed on startup and a labeled-dataset file that grows with every
expert decision.  The active model is swapped atomically under a lock.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from .corpus import LabeledDataset, LabeledItem, load_dataset
from .enrich import ReferenceEnricher
from .evaluation import EvalReport, arc_csv, cross_validate
from .features import FeatureSchema, fit_schema, transform_matrix
from .learn import DeepEnsemble, TrainConfig, make_classifier, smote
from .reject import RejectingClassifier
from .rules import LABELS, RuleSet
from .sigparse import RuleParseError, parse_rule

__all__ = ["TriageItem", "ServiceState", "create_app"]


@dataclass
class TriageItem:
    id: str
    rule: str
    ref_text: str
    per_class_scores: dict[str, float]
    top_score: float
    ensemble_score_std: float | None
    status: str  # pending | labeled
    created_at: float
    assigned_label: str | None = None
    labeled_at: float | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "rule": self.rule,
            "ref_text": self.ref_text,
            "per_class_scores": self.per_class_scores,
            "top_score": self.top_score,
            "ensemble_score_std": self.ensemble_score_std,
            "status": self.status,
            "created_at": self.created_at,
            "assigned_label": self.assigned_label,
            "labeled_at": self.labeled_at,
        }


class TriageStore:
    """Append-only journal of rejected signatures and their labels."""

    def __init__(self, journal_path):
        self.journal_path = Path(journal_path)
        self._lock = threading.Lock()
        self.items: dict[str, TriageItem] = {}
        self._order: list[str] = []
        self._counter = 0
        self._replay()

    def _replay(self) -> None:
        if not self.journal_path.exists():
            return
        with open(self.journal_path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                if record["event"] == "rejected":
                    item = TriageItem(
                        id=record["id"],
                        rule=record["rule"],
                        ref_text=record.get("ref_text", ""),
                        per_class_scores=record["per_class_scores"],
                        top_score=record["top_score"],
                        ensemble_score_std=record.get("ensemble_score_std"),
                        status="pending",
                        created_at=record["created_at"],
                    )
                    self.items[item.id] = item
                    self._order.append(item.id)
                    self._counter = max(self._counter, int(item.id.split("-")[1]) + 1)
                elif record["event"] == "labeled":
                    item = self.items[record["id"]]
                    item.status = "labeled"
                    item.assigned_label = record["label"]
                    item.labeled_at = record["labeled_at"]

    def _append(self, record: dict) -> None:
        with open(self.journal_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record) + "\n")
            fh.flush()

    def add_rejected(
        self, rule: str, ref_text: str, scores: dict, top_score: float, std: float | None
    ) -> TriageItem:
        with self._lock:
            item = TriageItem(
                id=f"t-{self._counter:06d}",
                rule=rule,
                ref_text=ref_text,
                per_class_scores=scores,
                top_score=top_score,
                ensemble_score_std=std,
                status="pending",
                created_at=time.time(),
            )
            self._counter += 1
            self.items[item.id] = item
            self._order.append(item.id)
            record = {"event": "rejected", **item.to_dict()}
            record.pop("status")
            record.pop("assigned_label")
            record.pop("labeled_at")
            self._append(record)
            return item

    def label(self, item_id: str, label: str) -> TriageItem:
        with self._lock:
            if item_id not in self.items:
                raise KeyError(item_id)
            item = self.items[item_id]
            if item.status == "labeled":
                raise ValueError("already labeled")
            item.status = "labeled"
            item.assigned_label = label
            item.labeled_at = time.time()
            self._append(
                {"event": "labeled", "id": item_id, "label": label, "labeled_at": item.labeled_at}
            )
            return item

    def pending(self) -> list[TriageItem]:
        ordered = [self.items[i] for i in self._order if self.items[i].status == "pending"]
        return list(reversed(ordered))  # newest first

    def labeled(self) -> list[TriageItem]:
        return [self.items[i] for i in self._order if self.items[i].status == "labeled"]


@dataclass
class _Bundle:
    model: object
    schema: FeatureSchema
    report: EvalReport | None
    trained_on: int
    trained_at: float
    class_counts: dict[str, int]


class ServiceState:
    """Everything the endpoints operate on."""

    def __init__(
        self,
        *,
        ruleset: RuleSet,
        base_dataset_path,
        journal_path,
        labeled_path,
        layout: str = "mcf",
        model_kind: str = "mlp",
        tau: float = 0.5,
        cfg: TrainConfig | None = None,
        enricher: ReferenceEnricher | None = None,
        eval_folds: int = 3,
    ):
        self.ruleset = ruleset
        self.base_dataset_path = Path(base_dataset_path)
        self.labeled_path = Path(labeled_path)
        self.layout = layout
        self.model_kind = model_kind
        self.tau = tau
        self.cfg = cfg or TrainConfig()
        self.enricher = enricher or ReferenceEnricher(mode="offline")
        self.eval_folds = eval_folds
        self.triage = TriageStore(journal_path)
        self._swap_lock = threading.Lock()
        self._retrain_lock = threading.Lock()
        self.bundle: _Bundle | None = None

    # -- training -----------------------------------------------------------

    def _training_items(self) -> list[LabeledItem]:
        items = list(load_dataset(self.base_dataset_path).items)
        if self.labeled_path.exists():
            items.extend(load_dataset(self.labeled_path).items)
        return items

    def retrain(self) -> _Bundle:
        """Retrain on base + triage-labeled data; atomic bundle swap."""
        if not self._retrain_lock.acquire(blocking=False):
            raise RuntimeError("retrain already in progress")
        try:
            dataset = LabeledDataset(self._training_items())
            pairs = dataset.pairs()
            labels = np.asarray(dataset.labels())
            schema = fit_schema(pairs, self.ruleset)
            X = transform_matrix(pairs, schema, self.layout)
            report = cross_validate(
                lambda: make_classifier(self.model_kind, self.cfg),
                X,
                labels,
                k=self.eval_folds,
                seed=self.cfg.rng_seed,
                smote_k=self.cfg.smote_k,
            )
            X_bal, y_bal = smote(X, labels, k=self.cfg.smote_k, seed=self.cfg.rng_seed)
            model = make_classifier(self.model_kind, self.cfg)
            model.fit(X_bal, y_bal)
            bundle = _Bundle(
                model=model,
                schema=schema,
                report=report,
                trained_on=len(dataset),
                trained_at=time.time(),
                class_counts=dataset.class_counts(),
            )
            with self._swap_lock:
                self.bundle = bundle
            return bundle
        finally:
            self._retrain_lock.release()

    def active_bundle(self) -> _Bundle:
        with self._swap_lock:
            if self.bundle is None:
                raise RuntimeError("no trained model available")
            return self.bundle

    # -- classification ------------------------------------------------------

    def classify_rule(self, rule_text: str) -> dict:
        sig = parse_rule(rule_text)
        bundle = self.active_bundle()
        ref_text = " ".join(
            resolved.text
            for ref in sig.references
            if (resolved := self.enricher.resolve(ref)).text
        )
        x = transform_matrix([(sig, ref_text)], bundle.schema, self.layout)
        classifier = RejectingClassifier(bundle.model, self.tau)
        decision = classifier.decide(x)[0]
        std = None
        if isinstance(bundle.model, DeepEnsemble):
            std = float(bundle.model.score_std(x)[0])
        result = {
            "status": "rejected" if decision.rejected else "classified",
            "label": None if decision.rejected else str(decision.label),
            "top_score": decision.top_score,
            "scores": decision.scores,
            "ensemble_score_std": std,
            "tau": self.tau,
        }
        if decision.rejected:
            item = self.triage.add_rejected(
                rule_text, ref_text, decision.scores, decision.top_score, std
            )
            result["triage_id"] = item.id
        return result

    def record_label(self, item_id: str, label: str) -> TriageItem:
        item = self.triage.label(item_id, label)
        record = LabeledItem(
            id=item.id,
            raw_rule=item.rule,
            label=label,
            ref_text=item.ref_text,
            provenance="manual",
        )
        with open(self.labeled_path, "a", encoding="utf-8") as fh:
            fh.write(
                json.dumps(
                    {
                        "id": record.id,
                        "rule": record.raw_rule,
                        "label": record.label,
                        "ref_text": record.ref_text,
                        "provenance": record.provenance,
                    }
                )
                + "\n"
            )
        return item


class ClassifyRequest(BaseModel):
    rule: str


class LabelRequest(BaseModel):
    label: str


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="sigtriage")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.service = state

    @app.post("/classify")
    def classify(request: ClassifyRequest):
        try:
            return state.classify_rule(request.rule)
        except RuleParseError as exc:
            raise HTTPException(status_code=400, detail=f"unparseable rule: {exc}")

    @app.get("/triage")
    def triage():
        return {"items": [item.to_dict() for item in state.triage.pending()]}

    @app.post("/triage/{item_id}/label")
    def label(item_id: str, request: LabelRequest):
        if request.label not in LABELS:
            raise HTTPException(status_code=400, detail=f"label must be one of {LABELS}")
        try:
            item = state.record_label(item_id, request.label)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown triage id")
        except ValueError:
            raise HTTPException(status_code=409, detail="item already labeled")
        return item.to_dict()

    @app.post("/retrain")
    def retrain():
        try:
            bundle = state.retrain()
        except RuntimeError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {
            "trained_on": bundle.trained_on,
            "trained_at": bundle.trained_at,
            "model_kind": state.model_kind,
            "layout": state.layout,
        }

    @app.get("/report")
    def report():
        bundle = state.active_bundle()
        if bundle.report is None:
            raise HTTPException(status_code=404, detail="no evaluation report yet")
        doc = bundle.report.to_dict()
        doc["trained_on"] = bundle.trained_on
        doc["trained_at"] = bundle.trained_at
        doc["tau"] = state.tau
        doc["classes"] = [str(c) for c in bundle.model.classes_]
        doc["class_counts"] = bundle.class_counts
        return doc

    @app.get("/arc", response_class=PlainTextResponse)
    def arc():
        bundle = state.active_bundle()
        if bundle.report is None:
            raise HTTPException(status_code=404, detail="no evaluation report yet")
        return arc_csv(bundle.report.arc)

    return app
