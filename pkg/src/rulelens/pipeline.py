"""Run orchestration: configuration, the four pipeline stages, artifact
persistence, and the recovery/bias experiment suites.

Artifacts are row-oriented JSONL (with a self-describing header line) plus a
JSON report; configs are TOML. Every stochastic step derives its stream from
the run seed, so a rerun with the same config yields byte-identical JSONL
and JSON artifacts. The report path also renders matplotlib figures next to
the delimited output.
"""
from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

from .captioning import (
    ChangeCaption,
    caption_changes,
    corrupt_caption,
    diff_scenes,
    independent_caption,
)
from .classifier import RuleClassifier, classify
from .concepts import Concept, ConceptError, concept_from_string, parse_concept
from .counterfactual import CounterfactualPair, build_pair_set
from .figures import bias_probe_figure, candidate_metrics_figure, recovery_summary_figure
from .render import render_svg
from .scene import Scene, WorldConfig
from .summarizer import (
    CandidateExplanation,
    dedupe,
    llm_summarize,
    mine_candidates,
    mine_independent,
)
from .verification import (
    DEFAULT_DI_THRESHOLD,
    OracleEditor,
    build_validation_set,
    coarse_filter,
    evaluate,
    rank,
)
from .wire import EndpointConfig

SCHEMA_VERSION = 1

ARTIFACTS = {
    "scenes": "scenes.jsonl",
    "pairs": "pairs.jsonl",
    "captions": "captions.jsonl",
    "candidates": "candidates.jsonl",
    "report": "report.json",
}

DEFAULT_RECOVERY_RULES = (
    "color=cyan",
    "color=purple",
    "material=metal",
    "material=rubber",
    "color=red&material=metal",
    "color=yellow&material=rubber",
)


class UsageError(ValueError):
    """Bad configuration or arguments."""


class StageError(RuntimeError):
    """Missing or inconsistent prior-stage artifacts, or a stage failure."""


def parse_rule(text: str) -> Concept:
    """Accept either the canonical `field=value&...` form or a controlled
    vocabulary phrase; reject anything that stays opaque."""
    try:
        concept = concept_from_string(text) if "=" in text else parse_concept(text)
    except ConceptError as exc:
        raise UsageError(f"bad rule {text!r}: {exc}") from exc
    if concept.is_opaque():
        raise UsageError(f"rule {text!r} is outside the concept grammar")
    return concept


@dataclass
class RunConfig:
    world: WorldConfig = field(default_factory=WorldConfig)
    base_rule: str = "color=cyan"
    bias_rule: Optional[str] = None
    presence_class: int = 1
    n_pairs: int = 100
    budget: int = 3
    noise: dict = field(default_factory=lambda: {"p_drop": 0.0, "p_swap": 0.0, "p_spurious": 0.0})
    summarizer: str = "miner"        # miner | llm
    captions: str = "change"         # change | independent
    max_arity: int = 3
    top_k: int = 20
    di_threshold: float = DEFAULT_DI_THRESHOLD
    ranking_key: str = "cace"        # cace | pns
    n_validation_1: int = 100
    n_validation_0: int = 100
    probes: tuple = ()               # extra user-proposed concepts for stage 4
    seed: int = 0

    def __post_init__(self):
        if self.summarizer not in ("miner", "llm"):
            raise UsageError("summarizer must be 'miner' or 'llm'")
        if self.captions not in ("change", "independent"):
            raise UsageError("captions must be 'change' or 'independent'")
        if self.ranking_key not in ("cace", "pns"):
            raise UsageError("ranking_key must be 'cace' or 'pns'")

    def model(self) -> RuleClassifier:
        bias = parse_rule(self.bias_rule) if self.bias_rule else None
        return RuleClassifier(
            base_rule=parse_rule(self.base_rule),
            bias_rule=bias,
            presence_class=self.presence_class,
        )

    def to_dict(self) -> dict:
        return {
            "world": self.world.to_dict(),
            "classifier": {
                "base_rule": self.base_rule,
                "bias_rule": self.bias_rule,
                "presence_class": self.presence_class,
            },
            "pipeline": {
                "n_pairs": self.n_pairs,
                "budget": self.budget,
                "summarizer": self.summarizer,
                "captions": self.captions,
                "max_arity": self.max_arity,
                "top_k": self.top_k,
                "di_threshold": self.di_threshold,
                "ranking_key": self.ranking_key,
                "n_validation_1": self.n_validation_1,
                "n_validation_0": self.n_validation_0,
                "probes": list(self.probes),
                "seed": self.seed,
            },
            "noise": dict(self.noise),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        world = WorldConfig.from_dict(d.get("world", {}))
        cl = d.get("classifier", {})
        pl = d.get("pipeline", {})
        return cls(
            world=world,
            base_rule=cl.get("base_rule", "color=cyan"),
            bias_rule=cl.get("bias_rule") or None,
            presence_class=int(cl.get("presence_class", 1)),
            n_pairs=int(pl.get("n_pairs", 100)),
            budget=int(pl.get("budget", 3)),
            noise=dict(d.get("noise", {"p_drop": 0.0, "p_swap": 0.0, "p_spurious": 0.0})),
            summarizer=pl.get("summarizer", "miner"),
            captions=pl.get("captions", "change"),
            max_arity=int(pl.get("max_arity", 3)),
            top_k=int(pl.get("top_k", 20)),
            di_threshold=float(pl.get("di_threshold", DEFAULT_DI_THRESHOLD)),
            ranking_key=pl.get("ranking_key", "cace"),
            n_validation_1=int(pl.get("n_validation_1", 100)),
            n_validation_0=int(pl.get("n_validation_0", 100)),
            probes=tuple(pl.get("probes", ())),
            seed=int(pl.get("seed", 0)),
        )

    @classmethod
    def from_toml(cls, path) -> "RunConfig":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            return cls.from_dict(tomllib.load(fh))

    def config_hash(self) -> str:
        return _hash_dict(self.to_dict())

    @property
    def run_id(self) -> str:
        return self.config_hash()

    def stage_hash(self, stage: int) -> str:
        """Hash of the configuration a given stage's output depends on, so a
        later stage can be rerun with changed downstream knobs while the
        untouched upstream artifacts still verify."""
        d = self.to_dict()
        parts: dict = {"world": d["world"], "classifier": d["classifier"]}
        pl = d["pipeline"]
        parts["stage1"] = {k: pl[k] for k in ("n_pairs", "budget", "seed")}
        if stage >= 2:
            parts["stage2"] = {"captions": pl["captions"], "noise": d["noise"]}
        if stage >= 3:
            parts["stage3"] = {k: pl[k] for k in ("summarizer", "max_arity", "top_k")}
        if stage >= 4:
            parts["stage4"] = {k: pl[k] for k in (
                "di_threshold", "ranking_key", "n_validation_1", "n_validation_0", "probes")}
        return _hash_dict(parts)


def _hash_dict(d: dict) -> str:
    blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:12]


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _write_jsonl(path: Path, schema: str, stage_hash: str, rows: Sequence[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dumps({"schema": schema, "schema_version": SCHEMA_VERSION,
                         "stage_hash": stage_hash}) + "\n")
        for row in rows:
            fh.write(_dumps(row) + "\n")


def _read_jsonl(path: Path, schema: str, expected_hash: Optional[str] = None) -> List[dict]:
    if not path.exists():
        raise StageError(f"missing artifact {path.name}; run the earlier stage first")
    with open(path, "r", encoding="utf-8") as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines or lines[0].get("schema") != schema:
        raise StageError(f"{path.name} is not a {schema} artifact")
    header = lines[0]
    if expected_hash is not None and header.get("stage_hash") != expected_hash:
        raise StageError(
            f"{path.name} was produced under a different configuration "
            f"(stage hash {header.get('stage_hash')} != expected {expected_hash})")
    return lines[1:]


def prepare_run_dir(config: RunConfig, out_root, name: Optional[str] = None) -> Path:
    run_dir = Path(out_root) / (name or config.run_id)
    run_dir.mkdir(parents=True, exist_ok=True)
    with open(run_dir / "config.json", "w", encoding="utf-8") as fh:
        fh.write(_dumps({
            "schema": "rulelens/config",
            "schema_version": SCHEMA_VERSION,
            "run_id": config.run_id,
            "config": config.to_dict(),
        }) + "\n")
    return run_dir


def load_run_config(run_dir) -> RunConfig:
    path = Path(run_dir) / "config.json"
    if not path.exists():
        raise StageError(f"no config.json under {run_dir}")
    with open(path, "r", encoding="utf-8") as fh:
        return RunConfig.from_dict(json.load(fh)["config"])


# ---------------------------------------------------------------- stage 1

def generate_scene_set(config: RunConfig) -> List[tuple]:
    """Sample the counterfactual query set, balanced over predicted classes
    where the world permits."""
    model = config.model()
    rng = random.Random(f"scenes:{config.seed}")
    n = config.n_pairs
    want = {1: n // 2, 0: n - n // 2}
    picked: List[tuple] = []
    overflow: List[tuple] = []
    draws = 0
    max_draws = 500_000
    while (want[0] > 0 or want[1] > 0) and draws < max_draws:
        scene = _sample(rng, config.world)
        draws += 1
        label = classify(model, scene)
        if want[label] > 0:
            want[label] -= 1
            picked.append((scene, label))
        elif len(overflow) < n:
            overflow.append((scene, label))
    while (want[0] > 0 or want[1] > 0) and overflow:
        scene, label = overflow.pop(0)
        want[1 if want[1] > 0 else 0] -= 1
        picked.append((scene, label))
    return picked[:n]


def _sample(rng: random.Random, world: WorldConfig) -> Scene:
    from .scene import sample_scene

    return sample_scene(rng.getrandbits(48), world)


def run_gen(config: RunConfig, run_dir) -> Path:
    """Persist the sampled scene set (scenes.jsonl)."""
    run_dir = Path(run_dir)
    rows = [{"scene": s.to_dict(), "label": lbl} for s, lbl in generate_scene_set(config)]
    _write_jsonl(run_dir / ARTIFACTS["scenes"], "rulelens/scenes", config.stage_hash(1), rows)
    return run_dir / ARTIFACTS["scenes"]


def run_stage1(config: RunConfig, run_dir) -> Path:
    """Counterfactual search over the scene set (pairs.jsonl)."""
    run_dir = Path(run_dir)
    scenes_path = run_dir / ARTIFACTS["scenes"]
    if not scenes_path.exists():
        run_gen(config, run_dir)
    rows = _read_jsonl(scenes_path, "rulelens/scenes", config.stage_hash(1))
    scenes = [Scene.from_dict(r["scene"]) for r in rows]
    result = build_pair_set(scenes, config.model(), budget=config.budget, seed=config.seed)
    out_rows: List[dict] = [p.to_dict() for p in result.pairs]
    out_rows.extend({"failure": f} for f in result.failures)
    _write_jsonl(run_dir / ARTIFACTS["pairs"], "rulelens/pairs", config.stage_hash(1), out_rows)
    return run_dir / ARTIFACTS["pairs"]


def read_pairs(run_dir, config: RunConfig) -> List[CounterfactualPair]:
    rows = _read_jsonl(Path(run_dir) / ARTIFACTS["pairs"], "rulelens/pairs", config.stage_hash(1))
    return [CounterfactualPair.from_dict(r) for r in rows if "failure" not in r]


# ---------------------------------------------------------------- stage 2

def run_stage2(config: RunConfig, run_dir) -> Path:
    """Caption the pairs (captions.jsonl): change captions (optionally run
    through the corruption model) or per-image independent captions."""
    run_dir = Path(run_dir)
    pairs = read_pairs(run_dir, config)
    rows: List[dict] = []
    if config.captions == "change":
        noisy = any(float(v) > 0 for v in config.noise.values())
        for i, pair in enumerate(pairs):
            events = diff_scenes(pair.source, pair.target)
            caption = caption_changes(events, (pair.from_label, pair.to_label))
            if noisy:
                seed = _derive_seed(config.seed, f"noise:{i}")
                caption = corrupt_caption(caption, config.noise, seed,
                                          grid_w=config.world.grid_w,
                                          grid_h=config.world.grid_h)
            rows.append({"pair_index": i, **caption.to_dict()})
    else:
        for i, pair in enumerate(pairs):
            rows.append({"pair_index": i, "role": "source", "label": pair.from_label,
                         "caption": independent_caption(pair.source)})
            rows.append({"pair_index": i, "role": "target", "label": pair.to_label,
                         "caption": independent_caption(pair.target)})
    _write_jsonl(run_dir / ARTIFACTS["captions"], "rulelens/captions", config.stage_hash(2), rows)
    return run_dir / ARTIFACTS["captions"]


def _derive_seed(seed: int, tag: str) -> int:
    blob = hashlib.sha256(f"{seed}:{tag}".encode("utf-8")).digest()
    return int.from_bytes(blob[:8], "big")


# ---------------------------------------------------------------- stage 3

def run_stage3(config: RunConfig, run_dir, endpoint: Optional[EndpointConfig] = None,
               transport=None) -> Path:
    """Summarize the captions into candidate explanations (candidates.jsonl)."""
    run_dir = Path(run_dir)
    rows = _read_jsonl(run_dir / ARTIFACTS["captions"], "rulelens/captions", config.stage_hash(2))
    if config.captions == "change":
        evidence = [ChangeCaption.from_dict(r) for r in rows]
        if not evidence:
            raise StageError("no captions to summarize; stage 1 produced no pairs")
        if config.summarizer == "miner":
            candidates = mine_candidates(
                evidence, max_arity=config.max_arity, top_k=config.top_k,
                grid_w=config.world.grid_w, grid_h=config.world.grid_h)
        else:
            endpoint = endpoint or EndpointConfig.from_env("LLM")
            candidates = llm_summarize(
                endpoint, evidence, transport=transport,
                transcript_dir=run_dir / "transcripts")
    else:
        labeled = [(r["caption"], int(r["label"])) for r in rows]
        if not labeled:
            raise StageError("no captions to summarize; stage 1 produced no pairs")
        candidates = mine_independent(
            labeled, top_k=config.top_k,
            grid_w=config.world.grid_w, grid_h=config.world.grid_h)
    candidates = dedupe(candidates)
    _write_jsonl(run_dir / ARTIFACTS["candidates"], "rulelens/candidates",
                 config.stage_hash(3), [c.to_dict() for c in candidates])
    return run_dir / ARTIFACTS["candidates"]


# ---------------------------------------------------------------- stage 4

def run_stage4(config: RunConfig, run_dir) -> Path:
    """Verify candidates: coarse DI filter, causal evaluation, ranking,
    report.json plus gallery SVGs and a metrics figure."""
    run_dir = Path(run_dir)
    rows = _read_jsonl(run_dir / ARTIFACTS["candidates"], "rulelens/candidates",
                       config.stage_hash(3))
    candidates = dedupe(
        [CandidateExplanation.from_dict(r) for r in rows]
        + [CandidateExplanation(target_class=1, concept=parse_rule(p), origin="user")
           for p in config.probes]
    )
    model = config.model()
    vset = build_validation_set(
        model, config.world, n1=config.n_validation_1, n0=config.n_validation_0,
        seed=config.seed)
    editor = OracleEditor(world=config.world)

    coarse = coarse_filter(candidates, vset, threshold=config.di_threshold)
    passing = [c.candidate for c in coarse if c.passed]
    di_by_key = {c.candidate.key(): c for c in coarse}
    evaluated = rank(evaluate(passing, vset, editor=editor, model=model, seed=config.seed),
                     key=config.ranking_key)

    ranked_rows = []
    for ev in evaluated:
        cand = ev.candidate
        row = {
            "concept": cand.concept.to_string(),
            "target_class": cand.target_class,
            "origin": cand.origin,
            "support": dict(cand.support),
        }
        row.update(ev.report.to_dict())
        ranked_rows.append(row)
    coarse_rows = [{
        "concept": c.candidate.concept.to_string(),
        "target_class": c.candidate.target_class,
        "origin": c.candidate.origin,
        "di": c.di,
        "degenerate": c.degenerate,
        "passed": c.passed,
        "skipped_reason": c.skipped_reason,
    } for c in coarse]

    gallery = _write_gallery(run_dir, config, evaluated)

    report = {
        "schema": "rulelens/report",
        "schema_version": SCHEMA_VERSION,
        "run_id": config.run_id,
        "stage_hash": config.stage_hash(4),
        "config": config.to_dict(),
        "ranking_key": config.ranking_key,
        "di_threshold": config.di_threshold,
        "seed": config.seed,
        "validation": {"n1": vset.n1, "n0": vset.n0},
        "counts": {
            "candidates": len(candidates),
            "passed_coarse": len(passing),
            "evaluated": len(evaluated),
        },
        "coarse": coarse_rows,
        "ranked": ranked_rows,
        "artifacts": {name: fname for name, fname in ARTIFACTS.items()},
        "gallery": gallery,
        "figures": {"metrics": "figures/metrics.png"},
    }
    with open(run_dir / ARTIFACTS["report"], "w", encoding="utf-8") as fh:
        fh.write(_dumps(report) + "\n")

    figures_dir = run_dir / "figures"
    figures_dir.mkdir(exist_ok=True)
    candidate_metrics_figure(ranked_rows, figures_dir / "metrics.png",
                             title=f"run {config.run_id}", di_threshold=config.di_threshold)
    return run_dir / ARTIFACTS["report"]


def _write_gallery(run_dir: Path, config: RunConfig, evaluated, max_items: int = 6) -> dict:
    gallery_dir = run_dir / "gallery"
    gallery_dir.mkdir(exist_ok=True)
    manifest: dict = {"pairs": [], "interventions": []}
    try:
        pairs = read_pairs(run_dir, config)
    except StageError:
        pairs = []
    for i, pair in enumerate(pairs[:max_items]):
        pid = f"pair-{i:04d}"
        (gallery_dir / f"{pid}-before.svg").write_text(render_svg(pair.source), encoding="utf-8")
        (gallery_dir / f"{pid}-after.svg").write_text(render_svg(pair.target), encoding="utf-8")
        manifest["pairs"].append({
            "id": pid,
            "before": f"gallery/{pid}-before.svg",
            "after": f"gallery/{pid}-after.svg",
            "from_label": pair.from_label,
            "to_label": pair.to_label,
        })
    if evaluated:
        top = evaluated[0]
        for i, rec in enumerate(top.result.records[:max_items]):
            iid = f"intervention-{i:04d}"
            (gallery_dir / f"{iid}-before.svg").write_text(render_svg(rec.scene), encoding="utf-8")
            (gallery_dir / f"{iid}-after.svg").write_text(render_svg(rec.edited), encoding="utf-8")
            manifest["interventions"].append({
                "id": iid,
                "concept": top.candidate.concept.to_string(),
                "before": f"gallery/{iid}-before.svg",
                "after": f"gallery/{iid}-after.svg",
                "presence": rec.presence,
                "y_base": rec.y_base,
                "y_flipped": rec.y_flipped,
                "ice": (rec.y_base - rec.y_flipped) if rec.presence else (rec.y_flipped - rec.y_base),
            })
    with open(gallery_dir / "gallery.json", "w", encoding="utf-8") as fh:
        fh.write(_dumps(manifest) + "\n")
    return manifest


def run_all(config: RunConfig, out_root, name: Optional[str] = None,
            endpoint: Optional[EndpointConfig] = None, transport=None) -> Path:
    run_dir = prepare_run_dir(config, out_root, name=name)
    run_gen(config, run_dir)
    run_stage1(config, run_dir)
    run_stage2(config, run_dir)
    run_stage3(config, run_dir, endpoint=endpoint, transport=transport)
    run_stage4(config, run_dir)
    return run_dir


def load_report(run_dir) -> dict:
    path = Path(run_dir) / ARTIFACTS["report"]
    if not path.exists():
        raise StageError(f"no report.json under {run_dir}")
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------- suites

def _planted_metrics(report: dict, planted: Concept) -> Optional[dict]:
    for row in report["ranked"]:
        if row["concept"] == planted.to_string():
            return row
    return None


def is_overspecification(candidate: Concept, planted: Concept) -> bool:
    return (not candidate.is_opaque()
            and set(candidate.conjuncts) >= set(planted.conjuncts))


def run_recovery_trial(rule: str, out_root, seed: int = 0, n_pairs: int = 100,
                       caption_mode: str = "change", noise: Optional[dict] = None,
                       name: Optional[str] = None) -> dict:
    """Full pipeline for one planted rule; reports whether the rule ranked
    first and the unidirectionality of the true/overspecified candidates."""
    config = RunConfig(
        base_rule=rule,
        n_pairs=n_pairs,
        captions=caption_mode,
        noise=dict(noise or {"p_drop": 0.0, "p_swap": 0.0, "p_spurious": 0.0}),
        seed=_derive_seed(seed, f"trial:{rule}:{caption_mode}"),
    )
    run_dir = run_all(config, out_root, name=name)
    report = load_report(run_dir)
    planted = parse_rule(rule)
    ranked = report["ranked"]
    top = ranked[0] if ranked else None
    planted_row = _planted_metrics(report, planted)
    overspec_rows = [
        row for row in ranked
        if is_overspecification(concept_from_string(row["concept"]), planted)
    ]
    return {
        "rule": rule,
        "caption_mode": caption_mode,
        "run_id": report["run_id"],
        "run_dir": str(run_dir),
        "recovered": bool(top and top["concept"] == planted.to_string()),
        "top_concept": top["concept"] if top else None,
        "planted_cace": planted_row["cace"] if planted_row else None,
        "planted_pns": planted_row["pns_y1"] if planted_row else None,
        "planted_pns_y0": planted_row["pns_y0"] if planted_row else None,
        "n_candidates": report["counts"]["candidates"],
        "n_evaluated": report["counts"]["evaluated"],
        "max_overspec_pns_y0": max((r["pns_y0"] for r in overspec_rows), default=None),
        "max_overspec_gap": max((abs(r["pns_y1"] - r["cace"]) for r in overspec_rows),
                                default=None),
    }


def run_recovery_suite(out_root, rules: Sequence[str] = DEFAULT_RECOVERY_RULES,
                       seed: int = 0, n_pairs: int = 100,
                       caption_mode: str = "change",
                       noise: Optional[dict] = None) -> dict:
    """The rule reverse-engineering protocol over a set of planted rules."""
    trials = []
    for rule in rules:
        safe = rule.replace("&", "+").replace("=", "-")
        trials.append(run_recovery_trial(
            rule, out_root, seed=seed, n_pairs=n_pairs,
            caption_mode=caption_mode, noise=noise,
            name=f"recover-{caption_mode}-{safe}"))
    return {
        "schema": "rulelens/recovery-summary",
        "schema_version": SCHEMA_VERSION,
        "caption_mode": caption_mode,
        "seed": seed,
        "n_pairs": n_pairs,
        "recovered": sum(t["recovered"] for t in trials),
        "total": len(trials),
        "trials": trials,
    }


def recovery_markdown(change_summary: dict, ablation_summary: Optional[dict] = None) -> str:
    lines = [
        "| rule | recovered | top concept | CaCE | PNS |"
        + (" abl. recovered |" if ablation_summary else ""),
        "|---|---|---|---|---|" + ("---|" if ablation_summary else ""),
    ]
    abl_by_rule = {t["rule"]: t for t in ablation_summary["trials"]} if ablation_summary else {}
    for t in change_summary["trials"]:
        cace = f'{t["planted_cace"]:.3f}' if t["planted_cace"] is not None else "n/a"
        pns = f'{t["planted_pns"]:.3f}' if t["planted_pns"] is not None else "n/a"
        row = (f'| {t["rule"]} | {"yes" if t["recovered"] else "no"} '
               f'| {t["top_concept"]} | {cace} | {pns} |')
        if ablation_summary:
            abl = abl_by_rule.get(t["rule"])
            row += f' {"yes" if abl and abl["recovered"] else "no"} |'
        lines.append(row)
    lines.append("")
    lines.append(f'recovered {change_summary["recovered"]}/{change_summary["total"]}'
                 + (f' (ablation {ablation_summary["recovered"]}/{ablation_summary["total"]})'
                    if ablation_summary else ""))
    return "\n".join(lines) + "\n"


def run_recovery_suite_with_ablation(out_root, rules: Sequence[str] = DEFAULT_RECOVERY_RULES,
                                     seed: int = 0, n_pairs: int = 100,
                                     include_ablation: bool = True) -> dict:
    out_root = Path(out_root)
    change = run_recovery_suite(out_root, rules=rules, seed=seed, n_pairs=n_pairs,
                                caption_mode="change")
    ablation = None
    if include_ablation:
        ablation = run_recovery_suite(out_root, rules=rules, seed=seed, n_pairs=n_pairs,
                                      caption_mode="independent")
    summary = {
        "schema": "rulelens/recovery-suite",
        "schema_version": SCHEMA_VERSION,
        "change": change,
        "ablation": ablation,
    }
    with open(out_root / "recovery_summary.json", "w", encoding="utf-8") as fh:
        fh.write(_dumps(summary) + "\n")
    with open(out_root / "recovery_summary.md", "w", encoding="utf-8") as fh:
        fh.write(recovery_markdown(change, ablation))
    recovery_summary_figure(change["trials"], out_root / "recovery_summary.png")
    return summary


REGION_PROBES = ("region=left", "region=right", "region=near")


def run_bias_suite(out_root, base_rule: str = "color=red", bias_rule: str = "region=left",
                   seed: int = 0, n_pairs: int = 100, cace_threshold: float = 0.2) -> dict:
    """Audit a bias-injected classifier against its unbiased control.

    The report flags whether the planted bias concept surfaces in the ranked
    output with a causal effect above the threshold, and whether the control
    keeps every region concept below the DI threshold. Region probes are
    evaluated explicitly in both runs so the comparison is substantive.
    """
    out_root = Path(out_root)
    world = WorldConfig(min_objects=3, max_objects=4)  # keeps both classes samplable
    common = dict(
        world=world, base_rule=base_rule, n_pairs=n_pairs,
        probes=REGION_PROBES, seed=_derive_seed(seed, "bias"),
    )
    biased_cfg = RunConfig(bias_rule=bias_rule, **common)
    control_cfg = RunConfig(bias_rule=None, **common)
    biased_dir = run_all(biased_cfg, out_root, name="bias-injected")
    control_dir = run_all(control_cfg, out_root, name="bias-control")
    biased_report = load_report(biased_dir)
    control_report = load_report(control_dir)

    bias_concept = parse_rule(bias_rule).to_string()
    bias_row = next((r for r in biased_report["ranked"] if r["concept"] == bias_concept), None)
    di_threshold = biased_cfg.di_threshold
    surfaced = bool(bias_row and bias_row["cace"] > cace_threshold
                    and (bias_row["di"] or 0.0) >= di_threshold)

    def region_rows(report):
        # pure laterality concepts only: a conjunction like color=red&region=left
        # correlates through its attribute part, which says nothing about a
        # positional bias
        out = []
        for r in report["coarse"]:
            parts = r["concept"].split("&")
            if parts and all(p.startswith("region=") for p in parts):
                out.append(r)
        return out

    control_regions = region_rows(control_report)
    control_clean = all((r["di"] or 0.0) < di_threshold for r in control_regions)

    probes = []
    biased_coarse = {r["concept"]: r for r in region_rows(biased_report)}
    control_coarse = {r["concept"]: r for r in control_regions}
    for probe in REGION_PROBES:
        probes.append({
            "concept": probe,
            "di_biased": (biased_coarse.get(probe) or {}).get("di"),
            "di_control": (control_coarse.get(probe) or {}).get("di"),
        })

    summary = {
        "schema": "rulelens/bias-summary",
        "schema_version": SCHEMA_VERSION,
        "base_rule": base_rule,
        "bias_rule": bias_rule,
        "cace_threshold": cace_threshold,
        "di_threshold": di_threshold,
        "bias_surfaced": surfaced,
        "bias_row": bias_row,
        "control_clean": control_clean,
        "control_region_rows": control_regions,
        "biased_run": biased_report["run_id"],
        "control_run": control_report["run_id"],
        "probes": probes,
    }
    with open(out_root / "bias_summary.json", "w", encoding="utf-8") as fh:
        fh.write(_dumps(summary) + "\n")
    bias_probe_figure(probes, out_root / "bias_summary.png", di_threshold=di_threshold)
    return summary
