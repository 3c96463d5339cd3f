"""Model selection by minimising the risk bound."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

from .bounds import BoundInputs, BoundReport, Variant, risk_bound
from .capacity import finite_vcd
from .mixing import BlockingPlan, MixingProfile, beta_at, choose_blocks


@dataclass(frozen=True)
class CandidateModel:
    """One fitted predictor entering the comparison.

    ``plan`` may be omitted, in which case it is chosen for the candidate's
    own memory ``d`` and sample size ``n``.  ``neg_loglik`` and
    ``n_params`` only feed the informational AIC column.
    """

    name: str
    vcd: int
    train_err: float
    d: int = 0
    delta_d: float = 0.0
    n: Optional[int] = None
    plan: Optional[BlockingPlan] = None
    neg_loglik: Optional[float] = None
    n_params: Optional[int] = None
    report: Optional[BoundReport] = None


def aic(neg_loglik: float, n_params: int) -> float:
    return 2.0 * neg_loglik + 2.0 * n_params


@dataclass
class SrmResult:
    ranked: List[CandidateModel]
    aic_delta: List[Optional[float]]
    baseline: Optional[str]

    @property
    def winner(self) -> CandidateModel:
        return self.ranked[0]

    @property
    def all_trivial(self) -> bool:
        return all(c.report.trivial for c in self.ranked)

    def rows(self) -> List[dict]:
        out = []
        for c, da in zip(self.ranked, self.aic_delta):
            r = c.report
            out.append(dict(
                model=c.name, train=c.train_err, delta_d=c.delta_d, penalty=r.penalty_eps,
                aic_delta=da, bound=r.total_bound, mu=r.plan.mu, a=r.plan.a, d=r.plan.d,
                vcd=c.vcd, trivial=r.trivial, selected=c is self.winner,
            ))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["model", "train", "aic_delta", "bound", "selected", "delta_d", "penalty",
                "mu", "a", "d", "vcd", "trivial"]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in self.rows():
            w.writerow({k: _fmt(row[k]) for k in cols})
        return buf.getvalue()

    def to_text(self) -> str:
        header = f"{'model':<12}{'train':>12}{'AIC delta':>12}{'bound':>12}  selected"
        lines = [header, "-" * len(header)]
        for row in self.rows():
            lines.append(
                f"{row['model']:<12}{_fmt(row['train']):>12}{_fmt(row['aic_delta']):>12}"
                f"{_fmt(row['bound']):>12}  {'*' if row['selected'] else ''}"
                + ("  (trivial)" if row["trivial"] else "")
            )
        return "\n".join(lines)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _evaluate(c: CandidateModel, eta: float, M: float, profile: Optional[MixingProfile],
              variant: Variant) -> CandidateModel:
    h = finite_vcd(c.vcd)
    plan = c.plan
    if plan is None:
        if c.n is None or profile is None:
            raise ValueError(f"{c.name}: need either a blocking plan or (n, profile)")
        plan = choose_blocks(c.n, c.d, profile, eta, h, M, variant)
    elif profile is not None and plan.a > plan.d:
        plan = replace(plan, beta_gap=beta_at(profile, plan.a - plan.d))
    report = risk_bound(BoundInputs(plan, h, eta, M, c.train_err, c.delta_d), variant)
    return replace(c, plan=plan, report=report)


def srm_select(
    candidates: Sequence[CandidateModel],
    eta: float = 0.15,
    M: float = 1.0,
    profile: Optional[MixingProfile] = None,
    variant: Variant = "as-printed",
    baseline: Optional[str] = None,
) -> SrmResult:
    """Rank candidates by risk bound, ties broken by smaller VC dimension
    then name.  The AIC column is reported against ``baseline`` (default: the
    candidate named "Mean" if present)."""
    if not candidates:
        raise ValueError("need at least one candidate")
    evaluated = [_evaluate(c, eta, M, profile, variant) for c in candidates]
    ranked = sorted(evaluated, key=lambda c: (c.report.total_bound, c.vcd, c.name))
    names = [c.name for c in ranked]
    if baseline is None:
        baseline = "Mean" if "Mean" in names else None
    base = next((c for c in ranked if c.name == baseline), None)
    deltas: List[Optional[float]] = []
    for c in ranked:
        if base is None or None in (c.neg_loglik, c.n_params, base.neg_loglik, base.n_params):
            deltas.append(None)
        else:
            deltas.append(aic(c.neg_loglik, c.n_params) - aic(base.neg_loglik, base.n_params))
    return SrmResult(ranked, deltas, baseline)


def candidates_from_config(cfg: dict) -> List[CandidateModel]:
    """Candidates from a parsed config mapping (list under ``candidates``)."""
    out = []
    for item in cfg["candidates"]:
        plan = None
        if "mu" in item:
            plan = BlockingPlan(int(item["mu"]), int(item["a"]), int(item.get("d", 0)),
                                int(item["n"]), float(item.get("beta", 0.0)))
        out.append(CandidateModel(
            name=str(item["name"]), vcd=int(item["vcd"]), train_err=float(item["train"]),
            d=int(item.get("d", 0)), delta_d=float(item.get("delta_d", 0.0)),
            n=item.get("n"), plan=plan, neg_loglik=item.get("neg_loglik"),
            n_params=item.get("n_params"),
        ))
    return out
