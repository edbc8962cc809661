"""Executes the experimental protocol against chat-completion-style VLM
endpoints: for each stimulus x condition x run, send the fixed Hungarian
system prompt, the base64 image and the condition's question; persist raw
responses resumably.

Requests run concurrently up to max_inflight; persistence goes through a
single writer, and already-persisted (item, condition, run) triples are
skipped on resume, so re-running a completed batch issues zero requests.
"""

from __future__ import annotations

import base64
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import httpx

from .corpus import (
    FocusCondition,
    SourceKind,
    StimulusItem,
    TrialRecord,
    append_trial,
    load_trials,
)
from .errors import AuthMissing, EndpointError

logger = logging.getLogger(__name__)

API_KEY_ENV = "FOKUSZ_API_KEY"

# Fixed Hungarian system prompt sent verbatim with every query.
SYSTEM_PROMPT = (
    "Egy kísérlet résztvevője vagy, válaszolj egy rövid egész mondattal a "
    "következő kérdésre a képről, amit adni fogok. A válaszodban említsd "
    "meg mindkét szereplőt és a cselekvést, vagy eseményt, amelyet az egyik "
    "a másikkal csinál! Fogalmazz tömören!"
)

DEFAULT_RUNS = 30
DEFAULT_TIMEOUT = 60.0
DEFAULT_MAX_ATTEMPTS = 3

RETRYABLE_STATUS = {408, 429, 500, 502, 503, 504}


@dataclass
class RunConfig:
    endpoint: str
    model: str
    runs: int = DEFAULT_RUNS
    conditions: tuple[FocusCondition, ...] = (
        FocusCondition.OBJECT_FOCUS,
        FocusCondition.SUBJECT_FOCUS,
    )
    base_seed: int = 0            # run r uses seed base_seed + r
    max_inflight: int = 4
    max_attempts: int = DEFAULT_MAX_ATTEMPTS
    backoff_base: float = 0.5     # seconds; doubles per retry
    timeout: float = DEFAULT_TIMEOUT
    send_seed: bool = True

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.max_inflight < 1:
            raise ValueError("max_inflight must be >= 1")
        if not self.conditions:
            raise ValueError("need at least one condition")


@dataclass
class RunSummary:
    planned: int
    skipped: int = 0
    succeeded: int = 0
    failed: list = field(default_factory=list)   # (item_id, condition, run, error)
    requests_issued: int = 0

    @property
    def complete(self) -> bool:
        return self.skipped + self.succeeded == self.planned


def build_request_body(
    config: RunConfig, stimulus: StimulusItem, condition: FocusCondition, seed: Optional[int]
) -> dict:
    """Assemble the documented request JSON for one query."""
    with open(stimulus.image_ref, "rb") as fh:
        image_b64 = base64.b64encode(fh.read()).decode("ascii")
    body = {
        "model": config.model,
        "messages": [
            {"role": "system", "content": SYSTEM_PROMPT},
            {
                "role": "user",
                "content": [
                    {"type": "image", "data": image_b64},
                    {"type": "text", "text": stimulus.question(condition)},
                ],
            },
        ],
    }
    if config.send_seed and seed is not None:
        body["seed"] = seed
    return body


def _extract_text(payload: dict) -> str:
    try:
        return payload["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        raise EndpointError(f"unexpected response shape: {payload!r}") from None


def _post_with_retries(client: httpx.Client, config: RunConfig, body: dict, key: tuple) -> tuple[str, int]:
    attempts = 0
    last_error = None
    while attempts < config.max_attempts:
        attempts += 1
        try:
            response = client.post(config.endpoint, json=body, timeout=config.timeout)
            if response.status_code == 200:
                return _extract_text(response.json()), attempts
            last_error = f"HTTP {response.status_code}"
            if response.status_code not in RETRYABLE_STATUS:
                break
        except httpx.HTTPError as exc:
            last_error = f"{type(exc).__name__}: {exc}"
        if attempts < config.max_attempts:
            time.sleep(config.backoff_base * (2 ** (attempts - 1)))
    error = EndpointError(f"{key}: giving up after {attempts} attempts ({last_error})")
    error.attempts = attempts
    raise error


def run_experiment(
    config: RunConfig,
    stimuli: Sequence[StimulusItem],
    out_path: Path | str,
    api_key: Optional[str] = None,
    resume: bool = True,
) -> RunSummary:
    """Run the full stimulus x condition x run grid; persist to JSONL.

    Failures after retry exhaustion are recorded in the summary per trial
    and do not abort the batch.
    """
    api_key = api_key or os.environ.get(API_KEY_ENV)
    if not api_key:
        raise AuthMissing(f"set {API_KEY_ENV} or pass api_key")
    out_path = Path(out_path)

    plan = [
        (stimulus, condition, run)
        for run in range(config.runs)
        for condition in config.conditions
        for stimulus in stimuli
    ]
    done: set[tuple] = set()
    if resume and out_path.exists():
        for rec in load_trials(out_path):
            done.add((rec.item_id, rec.condition, rec.run_index))

    summary = RunSummary(planned=len(plan))
    pending = []
    for stimulus, condition, run in plan:
        if (stimulus.item_id, condition, run) in done:
            summary.skipped += 1
        else:
            pending.append((stimulus, condition, run))

    headers = {"Authorization": f"Bearer {api_key}"}

    def one(client, job):
        stimulus, condition, run = job
        seed = config.base_seed + run
        body = build_request_body(config, stimulus, condition, seed)
        text, attempts = _post_with_retries(
            client, config, body, (stimulus.item_id, condition.value, run)
        )
        record = TrialRecord(
            trial_id=f"{config.model}:{run}:{condition.value}:{stimulus.item_id}",
            source_id=config.model,
            source_kind=SourceKind.VLM,
            run_index=run,
            condition=condition,
            item_id=stimulus.item_id,
            response_text=text,
            seed=seed,
        )
        return record, attempts

    out_path.parent.mkdir(parents=True, exist_ok=True)
    with httpx.Client(headers=headers) as client:
        with ThreadPoolExecutor(max_workers=config.max_inflight) as pool:
            futures = {pool.submit(one, client, job): job for job in pending}
            for future in as_completed(futures):
                stimulus, condition, run = futures[future]
                try:
                    record, attempts = future.result()
                except (EndpointError, OSError) as exc:
                    logger.warning("trial failed: %s", exc)
                    summary.failed.append((stimulus.item_id, condition.value, run, str(exc)))
                    summary.requests_issued += getattr(exc, "attempts", 1)
                    continue
                append_trial(record, out_path)   # single writer: this loop only
                summary.succeeded += 1
                summary.requests_issued += attempts
    return summary
