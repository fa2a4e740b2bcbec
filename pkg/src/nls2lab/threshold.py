"""Empirical scattering-threshold estimation: run classification, amplitude
bisection along a fixed data shape, and the L-curve scan.

Any finite-time verdict is heuristic: scattering is an infinite-time
statement, and these classifiers only read the tail behavior of space-time
norm accumulators over the simulated window.  Every verdict-producing object
carries a ``heuristic`` marker for that reason.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import DiagnosticSeries, Outcome, SolverConfig, State, evolve
from .errors import BracketInvalidError, NoNegativeEigenvalueError
from .observables import energy as energy_report
from .spectral import Field, fh_half_norm, lp_norm, sobolev_seminorm

SCATTERS = "Scatters"
NONSCATTER = "NonScatter"
UNDECIDED = "Undecided"


@dataclass
class ClassifierConfig:
    """Tail-decay classifier constants (all tunable; the defaults come from
    the splitting-order convergence study, not from any analytic source)."""

    r_scatter: float = 0.5  # per-unit-time increment decay ratio below which
    # an accumulator counts as saturating
    r_grow: float = 0.9  # ratio above which it counts as plateau/growth
    plateau_floor: float = 0.01  # minimum tail fraction for a NonScatter call
    zero_level: float = 1e-28  # accumulators below this are identically zero


@dataclass
class RunVerdict:
    verdict: str
    verdict_u: str
    verdict_v: str
    evidence: dict = field(default_factory=dict)
    heuristic: bool = True

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "verdict_u": self.verdict_u,
            "verdict_v": self.verdict_v,
            "evidence": self.evidence,
            "heuristic": self.heuristic,
        }


@dataclass
class ThresholdEstimate:
    v0_descriptor: dict
    shape_descriptor: dict
    ell_lower: float
    ell_upper: float
    runs: list
    analytic_bounds: list
    flagged: bool = False

    def to_dict(self) -> dict:
        return {
            "v0_descriptor": self.v0_descriptor,
            "shape_descriptor": self.shape_descriptor,
            "ell_lower": self.ell_lower,
            "ell_upper": self.ell_upper,
            "runs": [
                {"amplitude": a, **verdict.to_dict()} for a, verdict in self.runs
            ],
            "analytic_bounds": [b.to_dict() for b in self.analytic_bounds],
            "flagged": self.flagged,
        }


@dataclass
class LCurve:
    ell_values: list
    L_values: list
    saturated: list  # False where some run in the family blew up

    def to_dict(self) -> dict:
        return {
            "ell_values": self.ell_values,
            "L_values": self.L_values,
            "saturated": self.saturated,
        }


def _accumulator_verdict(times, accum, cfg: ClassifierConfig):
    total = accum[-1]
    if total < cfg.zero_level:
        return SCATTERS, {"rate": None, "tail_fraction": 0.0}
    t0, t1 = times[0], times[-1]
    tmid = 0.5 * (t0 + t1)
    idx = [i for i, t in enumerate(times) if t >= tmid]
    if len(idx) < 3:
        return UNDECIDED, {"rate": None, "tail_fraction": None}
    i_mid = idx[0]
    tail_fraction = (accum[-1] - accum[i_mid]) / total

    ts, ds = [], []
    for i in idx[:-1]:
        dt = times[i + 1] - times[i]
        d = (accum[i + 1] - accum[i]) / dt
        if d > 0:
            ts.append(0.5 * (times[i] + times[i + 1]))
            ds.append(d)
    if len(ds) < 3:
        # increments already died out inside the window
        return SCATTERS, {"rate": 0.0, "tail_fraction": tail_fraction}
    slope = np.polyfit(ts, np.log(ds), 1)[0]
    ratio = float(np.exp(slope))
    ev = {"rate": ratio, "tail_fraction": tail_fraction}
    if ratio <= cfg.r_scatter:
        return SCATTERS, ev
    if tail_fraction > cfg.plateau_floor and ratio >= cfg.r_grow:
        return NONSCATTER, ev
    return UNDECIDED, ev


def _combine(verdicts):
    if any(v == NONSCATTER for v in verdicts):
        return NONSCATTER
    if all(v == SCATTERS for v in verdicts):
        return SCATTERS
    return UNDECIDED


def classify_run(
    series: DiagnosticSeries, outcome: Outcome, cfg: ClassifierConfig | None = None
) -> RunVerdict:
    """Heuristic scattering verdict for one completed (or blown-up) run.

    Blowup is NonScatter outright.  Otherwise each space-time accumulator's
    last-half increments are fitted for a per-unit-time decay ratio;
    saturating accumulators vote Scatters, plateau/growth votes NonScatter,
    and anything in between stays Undecided."""
    cfg = cfg or ClassifierConfig()
    if outcome.blew_up:
        ev = {"blowup": True, "t_blowup": outcome.t}
        return RunVerdict(NONSCATTER, NONSCATTER, NONSCATTER, ev)
    t = series.times
    vu_s, ev_su = _accumulator_verdict(t, series.s_norm_u_accum, cfg)
    vu_w, ev_wu = _accumulator_verdict(t, series.w_norm_u_accum, cfg)
    vv_s, ev_sv = _accumulator_verdict(t, series.s_norm_v_accum, cfg)
    vv_w, ev_wv = _accumulator_verdict(t, series.w_norm_v_accum, cfg)
    verdict_u = _combine([vu_s, vu_w])
    verdict_v = _combine([vv_s, vv_w])
    if verdict_u == SCATTERS and verdict_v == SCATTERS:
        verdict = SCATTERS
    elif NONSCATTER in (verdict_u, verdict_v):
        verdict = NONSCATTER
    else:
        verdict = UNDECIDED
    evidence = {
        "blowup": False,
        "s_u": ev_su,
        "w_u": ev_wu,
        "s_v": ev_sv,
        "w_v": ev_wv,
        "final_linf": series.linf[-1],
        "final_w_proxy_u": series.final_w_proxy("u"),
        "final_w_proxy_v": series.final_w_proxy("v"),
    }
    return RunVerdict(verdict, verdict_u, verdict_v, evidence)


def with_default_blowup(cfg: SolverConfig, state: State, factor: float = 1e3):
    """Fill in absolute blowup thresholds at `factor` times the initial
    sup-norm and Sobolev size when the config leaves them infinite."""
    out = cfg
    if not np.isfinite(cfg.blowup_linf):
        linf0 = max(lp_norm(state.u, np.inf), lp_norm(state.v, np.inf))
        out = replace(out, blowup_linf=factor * max(linf0, 1e-12))
    if not np.isfinite(cfg.blowup_hs):
        hs0 = sobolev_seminorm(state.u, 1.0) + sobolev_seminorm(state.v, 1.0)
        out = replace(out, blowup_hs=factor * max(hs0, 1e-12))
    return out


def run_and_classify(
    u0: Field,
    v0: Field,
    cfg: SolverConfig,
    classifier: ClassifierConfig | None = None,
):
    state = State(u0.copy(), v0.copy(), 0.0)
    cfg = with_default_blowup(cfg, state)
    final, series, outcome = evolve(state, cfg)
    verdict = classify_run(series, outcome, classifier)
    return verdict, series, outcome


def normalize_shape(shape: Field) -> Field:
    """Rescale so fh_half_norm(shape) = 1; amplitudes then equal the
    weighted-norm size of the u-data."""
    nrm = fh_half_norm(shape)
    if nrm == 0.0:
        raise ValueError("shape has zero weighted norm")
    return Field(shape.grid, shape.values / nrm)


def _attach_bounds(v0: Field):
    from .criterion import eigenvalue_bound, scan_theta

    try:
        res = scan_theta(v0)
        return [eigenvalue_bound(v0, res)]
    except NoNegativeEigenvalueError:
        return []


def bisect_threshold(
    v0: Field,
    shape: Field,
    a_lo: float,
    a_hi: float,
    cfg: SolverConfig,
    max_bisections: int = 8,
    classifier: ClassifierConfig | None = None,
    analytic_bounds: bool = True,
) -> ThresholdEstimate:
    """Bisection on the amplitude along a fixed shape direction.

    This estimates a one-dimensional slice of the threshold: the true
    infimum runs over all shapes.  Undecided verdicts never tighten the
    bracket; they push the probe toward the upper end and flag the result."""
    shape = normalize_shape(shape)
    if not 0 <= a_lo < a_hi:
        raise BracketInvalidError(f"need 0 <= a_lo < a_hi, got {a_lo}, {a_hi}")

    runs = []

    def probe(a):
        u0 = Field(shape.grid, a * shape.values)
        verdict, _, _ = run_and_classify(u0, v0, cfg, classifier)
        runs.append((float(a), verdict))
        return verdict.verdict

    if probe(a_lo) != SCATTERS:
        raise BracketInvalidError(f"lower endpoint {a_lo} did not scatter")
    if probe(a_hi) != NONSCATTER:
        raise BracketInvalidError(f"upper endpoint {a_hi} still scatters")

    lo, hi = a_lo, a_hi
    flagged = False
    mid = 0.5 * (lo + hi)
    for _ in range(max_bisections):
        v = probe(mid)
        if v == SCATTERS:
            lo = mid
            mid = 0.5 * (lo + hi)
        elif v == NONSCATTER:
            hi = mid
            mid = 0.5 * (lo + hi)
        else:
            flagged = True
            mid = 0.5 * (mid + hi)
            if hi - mid < 1e-3 * hi:
                break

    bounds = _attach_bounds(v0) if analytic_bounds else []
    return ThresholdEstimate(
        v0_descriptor={},
        shape_descriptor={},
        ell_lower=lo,
        ell_upper=hi,
        runs=runs,
        analytic_bounds=bounds,
        flagged=flagged,
    )


def scan_L_curve(
    v0: Field,
    shapes,
    ell_grid,
    cfg: SolverConfig,
    classifier: ClassifierConfig | None = None,
    max_workers: int = 4,
) -> LCurve:
    """For each amplitude, the largest final W-type proxy norm over the
    shape family (completed runs only); blowups clear the saturated flag,
    standing in for an infinite supremum."""
    shapes = [normalize_shape(s) for s in shapes]

    def one_run(args):
        ell, shape = args
        u0 = Field(shape.grid, ell * shape.values)
        state = State(u0, v0.copy(), 0.0)
        run_cfg = with_default_blowup(cfg, state)
        _, series, outcome = evolve(state, run_cfg)
        proxy = series.final_w_proxy("u") + series.final_w_proxy("v")
        return outcome, proxy

    jobs = [(ell, shape) for ell in ell_grid for shape in shapes]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(one_run, jobs))

    L_values, saturated = [], []
    nshapes = len(shapes)
    for i, ell in enumerate(ell_grid):
        chunk = results[i * nshapes : (i + 1) * nshapes]
        ok = [p for (out, p) in chunk if not out.blew_up]
        blew = any(out.blew_up for (out, _) in chunk)
        L_values.append(max(ok) if ok else float("nan"))
        saturated.append(not blew)
    return LCurve(list(map(float, ell_grid)), L_values, saturated)
