"""Falsification campaigns: test each claim of the growth algorithm against
the exact oracles, persist disagreements as replayable JSONL records."""

from __future__ import annotations

import enum
import itertools
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import IO, Any, Iterator, Sequence

from .graph import Graph, edge, reduce_to_tsp, tour_cost
from .growth import (
    ALL_ZERO_SHORTCUT,
    GrowthState,
    Provider,
    Verdict,
    construct_tour,
    decide_hamiltonian,
    default_order,
    insertion_context,
    predict_cost,
    select_initial_quad,
    shuffled_order,
)
from .moves import DEFAULT_MAX_TOURS, InvariantViolation, moer_closure, oer_closure
from .oracle import (
    ENUMERATION_CAP,
    HELD_KARP_CAP,
    Regime,
    count_hamiltonian_cycles,
    exact_optimizing_edges,
    hc_exists,
    held_karp,
    is_connected,
    opt_graph,
)
from .rng import SplitMix64, trial_seed

SCHEMA_VERSION = 1
QUAD_COUNT_CAP = 10
EXHAUSTIVE_CAP = 8

RECORD_FIELDS = (
    "schema_version",
    "campaign",
    "kind",
    "trial_seed",
    "n",
    "graph_edges",
    "vertex_order",
    "step_m",
    "expected",
    "actual",
    "witness",
)


class Campaign(enum.Enum):
    TABLE1 = "table1"
    CLOSURE = "closure"
    ENDTOEND = "endtoend"
    QUAD = "quad"
    CONNECTIVITY = "connectivity"


class ReplayError(ValueError):
    pass


class CampaignAborted(RuntimeError):
    def __init__(self, message: str, report: "CampaignReport"):
        super().__init__(message)
        self.report = report


# -- Generators -----------------------------------------------------------


def gen_gnp(n: int, p: float, seed: int) -> Graph:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    rng = SplitMix64(seed)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return Graph.from_edges(n, pairs)


def gen_planted_hamiltonian(n: int, extra_p: float, seed: int) -> Graph:
    """A seeded random Hamiltonian cycle plus independent extra edges."""
    if n < 3:
        raise ValueError(f"planted cycle needs n >= 3, got {n}")
    if not 0.0 <= extra_p <= 1.0:
        raise ValueError(f"extra_p must lie in [0, 1], got {extra_p}")
    rng = SplitMix64(seed)
    perm = list(range(n))
    rng.shuffle(perm)
    cycle = {edge(perm[i], perm[(i + 1) % n]) for i in range(n)}
    extra = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in cycle and rng.random() < extra_p]
    return Graph.from_edges(n, sorted(cycle) + extra)


def labeled_connected_graphs(n: int) -> Iterator[Graph]:
    """Every connected labeled graph on n vertices, in edge-mask order."""
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        g = Graph(n, frozenset(p for i, p in enumerate(pairs) if mask >> i & 1))
        if g.is_connected():
            yield g


@dataclass(frozen=True)
class Gnp:
    p: float


@dataclass(frozen=True)
class Planted:
    extra_p: float


@dataclass(frozen=True)
class Exhaustive:
    pass


@dataclass(frozen=True)
class GraphList:
    graphs: tuple[Graph, ...]


@dataclass
class ExperimentConfig:
    campaign: Campaign
    n_range: tuple[int, int] = (5, 8)
    generator: Gnp | Planted | Exhaustive | GraphList = Gnp(0.5)
    trials: int | None = 100  # None: everything the generator yields
    master_seed: int = 0
    order_policy: str = "default"  # or "shuffle"
    max_tours: int = DEFAULT_MAX_TOURS

    def echo(self) -> dict:
        gen = self.generator
        if isinstance(gen, Gnp):
            g = {"model": "gnp", "p": gen.p}
        elif isinstance(gen, Planted):
            g = {"model": "planted", "extra_p": gen.extra_p}
        elif isinstance(gen, Exhaustive):
            g = {"model": "exhaustive"}
        else:
            g = {"model": "list", "count": len(gen.graphs)}
        return {
            "campaign": self.campaign.value,
            "n_range": list(self.n_range),
            "generator": g,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "order_policy": self.order_policy,
            "max_tours": self.max_tours,
        }


@dataclass(frozen=True)
class Trial:
    index: int
    seed: int
    graph: Graph
    order_seed: int


def iter_trials(cfg: ExperimentConfig) -> Iterator[Trial]:
    lo, hi = cfg.n_range
    gen = cfg.generator
    if isinstance(gen, (Exhaustive, GraphList)):
        if isinstance(gen, Exhaustive):
            if hi > EXHAUSTIVE_CAP:
                raise ValueError(f"exhaustive enumeration capped at n={EXHAUSTIVE_CAP}")
            source = itertools.chain.from_iterable(labeled_connected_graphs(n) for n in range(lo, hi + 1))
        else:
            source = iter(gen.graphs)
        for i, g in enumerate(source):
            if cfg.trials is not None and i >= cfg.trials:
                return
            seed = trial_seed(cfg.master_seed, i)
            yield Trial(i, seed, g, SplitMix64(seed).next_u64())
        return
    for i in range(cfg.trials or 0):
        seed = trial_seed(cfg.master_seed, i)
        rng = SplitMix64(seed)
        n = lo + rng.below(hi - lo + 1)
        gseed = rng.next_u64()
        if isinstance(gen, Gnp):
            g = gen_gnp(n, gen.p, gseed)
        else:
            g = gen_planted_hamiltonian(n, gen.extra_p, gseed)
        yield Trial(i, seed, g, rng.next_u64())


# -- Per-trial verification -----------------------------------------------


@dataclass
class Event:
    kind: str
    step_m: int | None
    expected: Any
    actual: Any
    witness: Any = None


@dataclass
class TrialOutcome:
    status: str  # "agree" | "discrepancy" | "skip"
    order: list[int] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)
    skip_reason: str | None = None
    counters: dict[str, int] = field(default_factory=dict)


def _skip(reason: str) -> TrialOutcome:
    return TrialOutcome("skip", skip_reason=reason)


def _finish(order, events, counters) -> TrialOutcome:
    return TrialOutcome("discrepancy" if events else "agree", list(order or []), events, None, counters)


def _edges(es) -> list[list[int]]:
    return [list(e) for e in sorted(es)]


def _resolve(c, n, order):
    if order is None:
        return default_order(c, n)
    return list(order)


def verify_table1(g: Graph, order: Sequence[int] | None = None) -> TrialOutcome:
    """Growth-rule prediction from the exact optimizing edges versus the
    Held-Karp optimum, at every step."""
    if g.n > ENUMERATION_CAP:
        return _skip("capacity")
    if g.n < 4:
        return _skip("too_small")
    c = reduce_to_tsp(g)
    order = _resolve(c, g.n, order)
    if order is None:
        return _skip("shortcut")
    events, checked = [], 0
    for m in range(4, g.n):
        es = exact_optimizing_edges(c, order[:m])
        state = GrowthState(list(order[:m]), es.optimum, es, None, Provider.ORACLE)
        ctx = insertion_context(state, c, order[m])
        predicted = predict_cost(es.optimum, es, ctx)
        truth = held_karp(c, order[: m + 1])
        checked += 1
        if predicted != truth:
            events.append(Event("cost_mismatch", m, truth, predicted, {
                "vertex": order[m], "d_star": ctx.d_star, "omega_size": len(ctx.omega),
                "c_star": es.optimum, "h_size": len(es.witnesses),
            }))
    return _finish(order, events, {"steps_checked": checked, "steps_agree": checked - len(events)})


def _run_closure(c, seed, optimum, max_tours):
    if optimum >= 1:
        return oer_closure(c, seed, max_tours=max_tours)
    return moer_closure(c, seed, max_tours=max_tours)


def _first_optimal(es, c):
    return next(t for _, t in sorted(es.witnesses.items()) if tour_cost(c, t) == es.optimum)


def verify_closure(g: Graph, order: Sequence[int] | None = None, max_tours: int = DEFAULT_MAX_TOURS) -> TrialOutcome:
    """Closure edge sets versus the exact optimizing edges: the quad from one
    optimal tour, then each grown sub-problem from its constructed tour."""
    if g.n > ENUMERATION_CAP:
        return _skip("capacity")
    if g.n < 4:
        return _skip("too_small")
    c = reduce_to_tsp(g)
    order = _resolve(c, g.n, order)
    if order is None:
        return _skip("shortcut")
    events = []
    counters = {"steps_checked": 0, "steps_complete": 0, "edges_validated": 0, "budget_exhausted": 0}

    def check(m, truth, seed):
        res = _run_closure(c, seed, truth.optimum, max_tours)
        found = res.edge_set.edges
        counters["steps_checked"] += 1
        counters["edges_validated"] += len(found)
        counters["budget_exhausted"] += not res.complete
        if not found <= truth.edges:
            raise InvariantViolation(f"closure found non-optimizing edges {sorted(found - truth.edges)}")
        missing = truth.edges - found
        if missing:
            events.append(Event("closure_incomplete", m, _edges(truth.edges), _edges(found), {
                "seed": list(seed), "missing": _edges(missing), "optimum": truth.optimum,
                "fixpoint": res.complete,
            }))
        else:
            counters["steps_complete"] += 1

    truth = exact_optimizing_edges(c, order[:4])
    check(4, truth, _first_optimal(truth, c))
    for m in range(4, g.n):
        state = GrowthState(list(order[:m]), truth.optimum, truth, _first_optimal(truth, c), Provider.ORACLE)
        v = order[m]
        ctx = insertion_context(state, c, v)
        predicted = predict_cost(truth.optimum, truth, ctx)
        built = construct_tour(state, c, v, ctx, predicted)
        truth = exact_optimizing_edges(c, order[: m + 1])
        seed = built.tour
        if built.cost != truth.optimum:
            events.append(Event("construction_mismatch", m, truth.optimum, built.cost, {
                "tour": list(built.tour), "predicted": predicted, "case": built.case,
            }))
            seed = _first_optimal(truth, c)
        check(m + 1, truth, seed)
    return _finish(order, events, counters)


def verify_connectivity(g: Graph, order: Sequence[int] | None = None) -> TrialOutcome:
    """Connectivity of the optimizing-vertex graph for every prefix in the
    positive regime; zero-regime prefixes are vacuous."""
    if g.n > ENUMERATION_CAP:
        return _skip("capacity")
    if g.n < 4:
        return _skip("too_small")
    c = reduce_to_tsp(g)
    order = _resolve(c, g.n, order)
    if order is None:
        return _skip("shortcut")
    events = []
    counters = {"prefixes_checked": 0, "prefixes_vacuous": 0}
    for m in range(4, g.n + 1):
        es = exact_optimizing_edges(c, order[:m])
        if es.regime is Regime.ZERO:
            counters["prefixes_vacuous"] += 1
            continue
        counters["prefixes_checked"] += 1
        og = opt_graph(es)
        if not is_connected(og):
            events.append(Event("optgraph_disconnected", m, True, False, {
                "links": _edges(og.links), "optimum": es.optimum,
            }))
    return _finish(order, events, counters)


def verify_quad_shortcut(g: Graph) -> TrialOutcome:
    """When every quad has a cost-0 tour, the graph should have at least two
    Hamiltonian cycles."""
    if g.n < 4:
        return _skip("not_applicable")
    if g.n > QUAD_COUNT_CAP:
        return _skip("capacity")
    c = reduce_to_tsp(g)
    if select_initial_quad(c, g.n) is not ALL_ZERO_SHORTCUT:
        return _skip("not_applicable")
    count = count_hamiltonian_cycles(g)
    events = []
    if count == 0:
        events.append(Event("verdict_mismatch", None, 0, "multiple", {"hamiltonian_cycles": 0}))
    elif count == 1:
        events.append(Event("shortcut_claim_violated", None, 1, "multiple", {"hamiltonian_cycles": 1}))
    return _finish([], events, {"shortcut_fired": 1, "hamiltonian_cycles": count})


def verify_end_to_end(
    g: Graph, order: Sequence[int] | None = None, max_tours: int = DEFAULT_MAX_TOURS
) -> TrialOutcome:
    """Closure-driven verdict versus the backtracking oracle."""
    if g.n > HELD_KARP_CAP:
        return _skip("capacity")
    decision = decide_hamiltonian(g, order, Provider.CLOSURE, max_tours)
    truth = hc_exists(g)
    claimed = decision.verdict is not Verdict.NOT_HAMILTONIAN
    state = decision.final_state
    used = list(state.subset) if state is not None and not state.shortcut else []
    events = []
    counters = {"witnesses_validated": int(decision.witness is not None), "edges_validated": 0,
                "construction_mismatches": 0}
    if state is not None:
        for row in state.trace:
            counters["edges_validated"] += row.h_next_size
            if row.construction_mismatch:
                counters["construction_mismatches"] += 1
                events.append(Event("construction_mismatch", row.m, row.predicted, row.constructed, {
                    "vertex": row.vertex, "case": row.case, "d_star": row.d_star,
                }))
    if claimed != truth:
        events.append(Event("verdict_mismatch", None, truth, decision.verdict.value, {
            "final_cost": decision.final_cost,
        }))
    return _finish(used, events, counters)


def run_trial(campaign: Campaign, g: Graph, order: Sequence[int] | None, max_tours: int = DEFAULT_MAX_TOURS) -> TrialOutcome:
    if campaign is Campaign.TABLE1:
        return verify_table1(g, order)
    if campaign is Campaign.CLOSURE:
        return verify_closure(g, order, max_tours)
    if campaign is Campaign.CONNECTIVITY:
        return verify_connectivity(g, order)
    if campaign is Campaign.QUAD:
        return verify_quad_shortcut(g)
    return verify_end_to_end(g, order, max_tours)


# -- Records --------------------------------------------------------------


@dataclass
class DiscrepancyRecord:
    schema_version: int
    campaign: str
    kind: str
    trial_seed: int
    n: int
    graph_edges: list[list[int]]
    vertex_order: list[int]
    step_m: int | None
    expected: Any
    actual: Any
    witness: Any

    def to_json(self) -> str:
        d = asdict(self)
        return json.dumps({k: d[k] for k in RECORD_FIELDS}, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "DiscrepancyRecord":
        if not isinstance(d, dict):
            raise ReplayError("record must be a JSON object")
        missing = [k for k in RECORD_FIELDS if k not in d]
        if missing:
            raise ReplayError(f"record lacks fields {missing}")
        return cls(**{k: d[k] for k in RECORD_FIELDS})

    @classmethod
    def from_json(cls, line: str) -> "DiscrepancyRecord":
        return cls.from_dict(json.loads(line))

    def graph(self) -> Graph:
        return Graph.from_edges(self.n, self.graph_edges)


def _normalize(value):
    """JSON round trip, so in-memory records compare equal to parsed ones."""
    return json.loads(json.dumps(value))


def to_records(campaign: Campaign, seed: int, g: Graph, outcome: TrialOutcome) -> list[DiscrepancyRecord]:
    edges = _edges(g.edges)
    return [
        DiscrepancyRecord(
            SCHEMA_VERSION, campaign.value, ev.kind, seed, g.n, edges, list(outcome.order),
            ev.step_m, _normalize(ev.expected), _normalize(ev.actual), _normalize(ev.witness),
        )
        for ev in outcome.events
    ]


@dataclass
class ReplayResult:
    reproduced: bool
    record: DiscrepancyRecord
    regenerated: list[DiscrepancyRecord]


def replay(record: DiscrepancyRecord, max_tours: int = DEFAULT_MAX_TOURS) -> ReplayResult:
    """Re-run the trial embedded in ``record`` and check that an identical
    record comes out."""
    if record.schema_version != SCHEMA_VERSION:
        raise ReplayError(f"unsupported schema_version {record.schema_version}")
    try:
        campaign = Campaign(record.campaign)
    except ValueError:
        raise ReplayError(f"unknown campaign {record.campaign!r}") from None
    g = record.graph()
    order = record.vertex_order or None
    outcome = run_trial(campaign, g, order, max_tours)
    again = to_records(campaign, record.trial_seed, g, outcome)
    return ReplayResult(any(r == record for r in again), record, again)


# -- Campaigns ------------------------------------------------------------


@dataclass
class CampaignReport:
    config: dict
    trials: int = 0
    agreements: int = 0
    discrepant_trials: int = 0
    skips: dict[str, int] = field(default_factory=dict)
    discrepancies: dict[str, int] = field(default_factory=dict)
    counters: dict[str, int] = field(default_factory=dict)
    runtime_s: float = 0.0

    @property
    def skipped(self) -> int:
        return sum(self.skips.values())

    @property
    def total_discrepancies(self) -> int:
        return sum(self.discrepancies.values())

    def agreement_rate(self) -> float | None:
        judged = self.agreements + self.discrepant_trials
        return self.agreements / judged if judged else None

    def step_rate(self, done: str, total: str) -> float | None:
        t = self.counters.get(total, 0)
        return self.counters.get(done, 0) / t if t else None

    def as_dict(self) -> dict:
        out = {
            "config": self.config,
            "trials": self.trials,
            "agreements": self.agreements,
            "discrepant_trials": self.discrepant_trials,
            "skips": dict(sorted(self.skips.items())),
            "discrepancies": dict(sorted(self.discrepancies.items())),
            "counters": dict(sorted(self.counters.items())),
            "agreement_rate": self.agreement_rate(),
        }
        if "steps_checked" in self.counters:
            key = "steps_complete" if "steps_complete" in self.counters else "steps_agree"
            out["step_agreement_rate"] = self.step_rate(key, "steps_checked")
        out["runtime_s"] = round(self.runtime_s, 3)
        return out

    def to_text(self) -> str:
        return json.dumps(self.as_dict(), indent=2) + "\n"


def _work(args) -> TrialOutcome:
    campaign, g, order, max_tours = args
    return run_trial(campaign, g, order, max_tours)


def _trial_order(cfg: ExperimentConfig, t: Trial):
    if cfg.order_policy == "shuffle" and cfg.campaign is not Campaign.QUAD and t.graph.n >= 4:
        return shuffled_order(reduce_to_tsp(t.graph), t.graph.n, t.order_seed)
    return None


def run_campaign(cfg: ExperimentConfig, sink: IO[str] | None = None, workers: int = 1) -> CampaignReport:
    """Run every trial of ``cfg``; records go to ``sink`` in trial order.

    Output bytes depend only on ``cfg``; trials may run in worker processes.
    """
    if cfg.order_policy not in ("default", "shuffle"):
        raise ValueError(f"unknown order policy {cfg.order_policy!r}")
    started = time.perf_counter()
    report = CampaignReport(cfg.echo())
    trials = list(iter_trials(cfg))
    jobs = [(cfg.campaign, t.graph, _trial_order(cfg, t), cfg.max_tours) for t in trials]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            outcomes = pool.map(_work, jobs, chunksize=max(1, len(jobs) // (workers * 8)))
            outcomes = list(outcomes)
    else:
        outcomes = map(_work, jobs)
    for t, outcome in zip(trials, outcomes):
        report.trials += 1
        for k, v in outcome.counters.items():
            report.counters[k] = report.counters.get(k, 0) + v
        if outcome.status == "skip":
            report.skips[outcome.skip_reason] = report.skips.get(outcome.skip_reason, 0) + 1
            continue
        if outcome.status == "agree":
            report.agreements += 1
            continue
        report.discrepant_trials += 1
        for rec in to_records(cfg.campaign, t.seed, t.graph, outcome):
            report.discrepancies[rec.kind] = report.discrepancies.get(rec.kind, 0) + 1
            if sink is not None:
                try:
                    sink.write(rec.to_json() + "\n")
                except OSError as exc:
                    report.runtime_s = time.perf_counter() - started
                    raise CampaignAborted(f"sink write failed: {exc}", report) from exc
    report.runtime_s = time.perf_counter() - started
    return report


def read_records(stream: IO[str]) -> list[DiscrepancyRecord]:
    out = []
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            out.append(DiscrepancyRecord.from_json(line))
        except (json.JSONDecodeError, TypeError) as exc:
            raise ReplayError(f"line {lineno}: malformed record ({exc})") from None
    return out
