"""Monte Carlo experiments and channel analyses.

Runs batches of noisy protocol shots through the compiled check graphs
and the matching decoder, tallies logical error classes, and provides the
derived analyses: merge-duration and bridge-length sweeps, logical CNOT
channel estimation with a factorized three-parameter fit, symmetry
partner comparison, threshold estimation from distance crossings, and
the memory X/Z correlation measure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import checkgraph, classify, protocol
from .noise import NoiseParams

#: Shots per engine batch; stop rules are evaluated at batch boundaries so
#: tallies are independent of worker count and batch scheduling.
BATCH_SIZE = 2048

#: Canonical order of the 16 two-qubit logical classes.
CNOT_CLASSES = tuple(
    str(classify.LogicalClass(x, z))
    for x in classify.CNOT_X_PARTS for z in classify.CNOT_Z_PARTS)

#: Partner classes under time reversal + layout mirror + X<->Z relabeling.
SYMMETRY_PARTNER_PAIRS = (
    ("X1", "Z2"), ("X2", "Z1"), ("X1X2", "Z1Z2"),
    ("X1*Z1", "X2*Z2"), ("X1X2*Z2", "X1*Z1Z2"), ("X1X2*Z1", "X2*Z1Z2"))
SYMMETRY_FIXED_CLASSES = ("I", "X1*Z2", "X2*Z1", "X1X2*Z1Z2")


@dataclass
class StopRule:
    """Either a fixed shot count, or run until `min_failures` failures
    have been seen (checked at batch boundaries), capped at `cap` shots."""
    fixed_shots: int | None = None
    min_failures: int | None = None
    cap: int = 10**7

    def __post_init__(self):
        if (self.fixed_shots is None) == (self.min_failures is None):
            raise ValueError(
                "exactly one of fixed_shots / min_failures must be set")
        if self.fixed_shots is not None and self.fixed_shots < 1:
            raise ValueError("fixed_shots must be positive")
        if self.min_failures is not None and (
                self.min_failures < 1 or self.cap < 1):
            raise ValueError("min_failures and cap must be positive")


@dataclass
class TallyTable:
    counts: dict
    shots: int
    seed: int
    spec: protocol.ProtocolSpec
    noise: NoiseParams
    capped: bool = False
    homology_violations: int | None = None

    @property
    def failures(self):
        return self.shots - self.counts.get("I", 0) - self.counts.get(
            "none", 0)

    def provenance(self):
        return {"protocol": json.loads(self.spec.to_json()),
                "noise": {"model": self.noise.model, "p": self.noise.p,
                          "q": self.noise.q},
                "seed": self.seed, "shots": self.shots,
                "capped": self.capped}


def _class_lookup(pair):
    """Map (z-graph comp mask, x-graph comp mask) -> class label string."""
    kind = pair.spec.kind
    zc, xc = pair.zgraph.comps, pair.xgraph.comps
    if kind == "cnot":
        z_table, x_table = classify.mask_tables(pair)

        def lookup(mz, mx):
            xp, zp = z_table[mz], x_table[mx]
            if xp is None or zp is None:
                raise ValueError(f"unpaired boundary parities {mz:b}/{mx:b}")
            return str(classify.LogicalClass(xp, zp))
    else:
        def parities(comps, mask):
            return {c: (mask >> i) & 1 for i, c in enumerate(comps)}

        if kind == "memory":
            def lookup(mz, mx):
                return classify.classify_memory(parities(zc, mz),
                                                parities(xc, mx))
        else:  # zz / xx
            def lookup(mz, mx):
                flags = classify.classify_zz(parities(zc, mz),
                                             parities(xc, mx))
                return "+".join(sorted(flags)) if flags else "none"
    return lookup


def run_shots(spec, noise, stop_rule, master_seed, check_homology=False,
              pair=None):
    """Sample, decode, and classify shots; returns a TallyTable.

    Shot i always uses shot index i, so the tally is deterministic for a
    fixed seed regardless of batching.
    """
    if pair is None:
        pair = checkgraph.compile(spec, noise)
    engine = pair.engine()
    lookup = _class_lookup(pair)
    counts = {}
    shots = 0
    violations = 0
    limit = (stop_rule.fixed_shots if stop_rule.fixed_shots is not None
             else stop_rule.cap)
    while shots < limit:
        n = min(BATCH_SIZE, limit - shots)
        mz, mx, viol = engine.run(master_seed, shots, n, check_homology)
        violations += viol
        keys = (mz.astype(np.int64) << 32) | mx.astype(np.int64)
        uniq, cnt = np.unique(keys, return_counts=True)
        for key, c in zip(uniq.tolist(), cnt.tolist()):
            label = lookup(key >> 32, key & 0xFFFFFFFF)
            counts[label] = counts.get(label, 0) + c
        shots += n
        if stop_rule.min_failures is not None:
            ok = counts.get("I", 0) + counts.get("none", 0)
            if shots - ok >= stop_rule.min_failures:
                break
    fails = shots - counts.get("I", 0) - counts.get("none", 0)
    capped = (stop_rule.min_failures is not None
              and fails < stop_rule.min_failures)
    tally = TallyTable(counts=counts, shots=shots, seed=master_seed,
                       spec=spec, noise=noise, capped=capped)
    if check_homology:
        tally.homology_violations = violations
    return tally


def wilson_interval(k, n, confidence=0.95):
    """Wilson score interval for a binomial proportion."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= k <= n:
        raise ValueError("k must lie in [0, n]")
    from scipy.stats import norm
    z = norm.ppf(0.5 + confidence / 2.0)
    phat = k / n
    denom = 1.0 + z * z / n
    centre = (phat + z * z / (2 * n)) / denom
    half = (z / denom) * math.sqrt(
        phat * (1 - phat) / n + z * z / (4 * n * n))
    low = 0.0 if k == 0 else max(0.0, float(centre - half))
    high = 1.0 if k == n else min(1.0, float(centre + half))
    return (low, high)


# ---------------------------------------------------------------------------
# Joint-ZZ sweeps
# ---------------------------------------------------------------------------

def _zz_point(tally):
    """(P_L, P_L CI, timelike fraction, fraction CI) of a joint-ZZ tally."""
    n = tally.shots
    fails = tally.failures
    timelike = sum(c for label, c in tally.counts.items()
                   if "timelike" in label)
    p_l = fails / n
    ci = wilson_interval(fails, n)
    if fails:
        frac = timelike / fails
        frac_ci = wilson_interval(timelike, fails)
    else:
        frac, frac_ci = None, (None, None)
    return p_l, ci, frac, frac_ci


def sweep_h2(d, w, h1, h3, noise, h2_list, stop_rule, master_seed):
    """Logical error rate and timelike fraction versus merge duration."""
    rows = []
    for h2 in h2_list:
        spec = protocol.build_zz(d, w, h1, h2, h3)
        tally = run_shots(spec, noise, stop_rule, master_seed)
        p_l, ci, frac, frac_ci = _zz_point(tally)
        rows.append({"h2": h2, "shots": tally.shots,
                     "failures": tally.failures,
                     "p_l": p_l, "p_l_low": ci[0], "p_l_high": ci[1],
                     "timelike_fraction": frac,
                     "timelike_low": frac_ci[0],
                     "timelike_high": frac_ci[1],
                     "capped": tally.capped})
    return rows


def sweep_w(d, h2, noise, w_list, stop_rule, master_seed, h1=1, h3=1):
    """Timelike fraction versus bridge length at fixed merge duration."""
    rows = []
    for w in w_list:
        spec = protocol.build_zz(d, w, h1, h2, h3)
        tally = run_shots(spec, noise, stop_rule, master_seed)
        p_l, ci, frac, frac_ci = _zz_point(tally)
        rows.append({"w": w, "shots": tally.shots,
                     "failures": tally.failures,
                     "p_l": p_l, "p_l_low": ci[0], "p_l_high": ci[1],
                     "timelike_fraction": frac,
                     "timelike_low": frac_ci[0],
                     "timelike_high": frac_ci[1],
                     "capped": tally.capped})
    return rows


def saturation_h2(rows, factor=1.1):
    """Smallest h2 whose P_L is within `factor` of the sweep's plateau
    (the minimum over the sweep); None if the sweep has no failures."""
    usable = [r for r in rows if r["failures"] > 0]
    if not usable:
        return None
    plateau = min(r["p_l"] for r in usable)
    for r in sorted(usable, key=lambda r: r["h2"]):
        if r["p_l"] <= factor * plateau:
            return r["h2"]
    return None


def timelike_crossing_h2(rows):
    """h2 where the timelike fraction crosses 0.5 (linear interpolation);
    None if it never crosses within the sweep."""
    pts = [(r["h2"], r["timelike_fraction"]) for r in rows
           if r["timelike_fraction"] is not None]
    pts.sort()
    for (h_a, f_a), (h_b, f_b) in zip(pts, pts[1:]):
        if (f_a - 0.5) * (f_b - 0.5) <= 0 and f_a != f_b:
            return h_a + (0.5 - f_a) * (h_b - h_a) / (f_b - f_a)
    return None


# ---------------------------------------------------------------------------
# Analytic model
# ---------------------------------------------------------------------------

@dataclass
class AnalyticModel:
    """Multiplicities of the shortest spacelike (A) and timelike (B)
    logical error strings."""
    A: float = 1.0
    B: float = 1.0

    def __post_init__(self):
        if self.A < 1 or self.B < 1:
            raise ValueError("multiplicities must be >= 1")


def estimate_optimal_h2(d, p, q):
    """Merge duration balancing spacelike and timelike error terms in the
    small-rate limit: (d+1)*ln(p)/ln(q) - 1."""
    if not (0 < p < 0.5 and 0 < q < 0.5):
        raise ValueError("p and q must lie in (0, 0.5)")
    return (d + 1) * math.log(p) / math.log(q) - 1


def predict_logical_rate(model, p, q, d, h2):
    """Leading-order logical error rate A*p^((d+1)/2) + B*q^((h2+1)/2)."""
    return (model.A * p ** ((d + 1) / 2)
            + model.B * q ** ((h2 + 1) / 2))


# ---------------------------------------------------------------------------
# CNOT channel estimation and factorized fit
# ---------------------------------------------------------------------------

@dataclass
class ChannelEstimate:
    probs: dict          # class label -> (estimate, ci_low, ci_high)
    shots: int
    tally: TallyTable | None = None


def estimate_cnot_channel(tally):
    """Frequencies of the 16 two-qubit logical classes with Wilson CIs."""
    if tally.spec.kind != "cnot":
        raise ValueError("channel estimation requires a CNOT tally")
    probs = {}
    for label in CNOT_CLASSES:
        k = tally.counts.get(label, 0)
        low, high = wilson_interval(k, tally.shots)
        probs[label] = (k / tally.shots, low, high)
    return ChannelEstimate(probs=probs, shots=tally.shots, tally=tally)


#: Factorized connection model: each class probability is the product of
#: an X-part factor and a Z-part factor drawn from (p0, p1, p2, p3).
_PX_FACTOR = {"I": 0, "X1": 3, "X1X2": 1, "X2": 2}
_PZ_FACTOR = {"I": 0, "Z1": 2, "Z2": 3, "Z1Z2": 1}


def factorized_class_probs(p1, p2, p3):
    """The 16 class probabilities of the factorized connection model."""
    p = (1.0 - p1 - p2 - p3, p1, p2, p3)
    out = {}
    for x in classify.CNOT_X_PARTS:
        for z in classify.CNOT_Z_PARTS:
            label = str(classify.LogicalClass(x, z))
            out[label] = p[_PX_FACTOR[x]] * p[_PZ_FACTOR[z]]
    return out


@dataclass
class ConnectionFit:
    p1: float
    p2: float
    p3: float
    objective: float
    dof: int
    chi_square_per_dof: float
    converged: bool

    @property
    def p0(self):
        return 1.0 - self.p1 - self.p2 - self.p3


def fit_connection_params(estimate):
    """Least-squares fit of the factorized (p1, p2, p3) connection model
    to a 16-class channel estimate, weighted by binomial variances."""
    from scipy.optimize import minimize

    n = estimate.shots
    if n < 1:
        raise ValueError("estimate has no shots")
    phat = {g: estimate.probs[g][0] for g in CNOT_CLASSES}
    sigma2 = {}
    floor = 1.0 / n
    for g, p in phat.items():
        sigma2[g] = max(p * (1 - p) / n, floor * floor)

    def objective(params):
        p1, p2, p3 = params
        if min(p1, p2, p3) < 0 or p1 + p2 + p3 > 1:
            return 1e18 * (1 + abs(p1) + abs(p2) + abs(p3))
        model = factorized_class_probs(p1, p2, p3)
        return sum((phat[g] - model[g]) ** 2 / sigma2[g]
                   for g in CNOT_CLASSES)

    # Marginal frequencies as the starting point (p3 ~ X1 marginal, etc.).
    def marginal(table, idx):
        return sum(phat[str(classify.LogicalClass(x, z))]
                   for x in classify.CNOT_X_PARTS
                   for z in classify.CNOT_Z_PARTS
                   if table == "x" and _PX_FACTOR[x] == idx
                   or table == "z" and _PZ_FACTOR[z] == idx)

    start = [0.5 * (marginal("x", i) + marginal("z", i)) for i in (1, 2, 3)]
    res = minimize(objective, start, method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-10,
                            "maxiter": 20000, "maxfev": 20000})
    p1, p2, p3 = (max(0.0, v) for v in res.x)
    dof = len(CNOT_CLASSES) - 3
    return ConnectionFit(p1=p1, p2=p2, p3=p3, objective=float(res.fun),
                         dof=dof, chi_square_per_dof=float(res.fun) / dof,
                         converged=bool(res.success))


def symmetry_partner_check(tally):
    """Counts of symmetry-partner class pairs compared as
    z = |k1 - k2| / sqrt(k1 + k2); fixed-point classes reported as
    self-partners with z = 0, empty pairs as 'no data'."""
    if tally.spec.kind != "cnot":
        raise ValueError("partner check requires a CNOT tally")
    out = []
    for a, b in SYMMETRY_PARTNER_PAIRS:
        k1 = tally.counts.get(a, 0)
        k2 = tally.counts.get(b, 0)
        if k1 + k2 == 0:
            out.append(((a, b), "no data"))
        else:
            out.append(((a, b), abs(k1 - k2) / math.sqrt(k1 + k2)))
    for c in SYMMETRY_FIXED_CLASSES:
        out.append(((c, c), 0.0))
    return out


# ---------------------------------------------------------------------------
# Threshold estimation
# ---------------------------------------------------------------------------

def _family_spec(kind, d):
    if kind == "memory":
        return protocol.build_memory(d, d)
    if kind == "cnot":
        return protocol.build_cnot(d, 1, 1, d, 1)
    if kind in ("zz", "xx"):
        builder = protocol.build_zz if kind == "zz" else protocol.build_xx
        return builder(d, 1, 1, d, 1)
    raise ValueError(f"unknown protocol family {kind!r}")


@dataclass
class ThresholdEstimate:
    crossing: float | None      # mean crossing, or None if no crossing
    spread: float               # max - min over distance pairs
    crossings: list             # per adjacent-d-pair crossings
    curves: dict                # d -> list of (p, P_L, shots, failures)
    message: str = ""


def find_threshold(kind, d_list, model, p_grid, stop_rule, master_seed,
                   q_rule=None, shots_by_d=None):
    """Estimate the threshold by interpolating log P_L crossings between
    adjacent fault distances.  `q_rule` maps p to q (default: the noise
    model's own default); `shots_by_d` optionally overrides the stop rule
    per distance."""
    if len(d_list) < 2:
        raise ValueError("need at least two distances")
    if len(p_grid) < 3:
        raise ValueError("need at least three grid points")
    curves = {}
    for d in sorted(d_list):
        spec = _family_spec(kind, d)
        rule = stop_rule
        if shots_by_d and d in shots_by_d:
            rule = StopRule(fixed_shots=shots_by_d[d])
        pts = []
        for p in p_grid:
            q = q_rule(p) if q_rule else None
            noise = NoiseParams(model, p, q)
            tally = run_shots(spec, noise, rule, master_seed)
            pts.append((p, tally.failures / tally.shots, tally.shots,
                        tally.failures))
        curves[d] = pts

    def logp(p_l, shots):
        return math.log(max(p_l, 0.5 / shots))

    ds = sorted(d_list)
    crossings = []
    for d1, d2 in zip(ds, ds[1:]):
        diffs = []
        for (p, pl1, n1, _), (_, pl2, n2, _) in zip(curves[d1], curves[d2]):
            diffs.append((p, logp(pl1, n1) - logp(pl2, n2)))
        for (pa, ya), (pb, yb) in zip(diffs, diffs[1:]):
            if ya == yb:
                continue
            if ya * yb <= 0 and (ya != 0 or yb != 0):
                crossings.append(pa + (0 - ya) * (pb - pa) / (yb - ya))
                break
    if not crossings:
        return ThresholdEstimate(crossing=None, spread=0.0, crossings=[],
                                 curves=curves, message="no crossing")
    mean = sum(crossings) / len(crossings)
    spread = max(crossings) - min(crossings)
    return ThresholdEstimate(crossing=mean, spread=spread,
                             crossings=crossings, curves=curves)


# ---------------------------------------------------------------------------
# Memory channel correlation
# ---------------------------------------------------------------------------

@dataclass
class MemoryChannelEstimate:
    p_i: float
    p_x: float
    p_y: float
    p_z: float
    m: float | None             # None when no failures were observed

    @property
    def m_defined(self):
        return self.m is not None


def correlation_measure(tally):
    """X/Z correlation measure M = |P_I*P_Y - P_X*P_Z| / (P_X+P_Y+P_Z)
    of a memory tally; M is undefined (None) without failures."""
    if tally.spec.kind != "memory":
        raise ValueError("correlation measure requires a memory tally")
    n = tally.shots
    p_i = tally.counts.get("I", 0) / n
    p_x = tally.counts.get("X", 0) / n
    p_y = tally.counts.get("Y", 0) / n
    p_z = tally.counts.get("Z", 0) / n
    denom = p_x + p_y + p_z
    m = abs(p_i * p_y - p_x * p_z) / denom if denom > 0 else None
    return MemoryChannelEstimate(p_i=p_i, p_x=p_x, p_y=p_y, p_z=p_z, m=m)


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def format_value(v):
    """Canonical CSV cell: floats at 10 significant digits."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def write_csv(path, header, rows):
    """Rows are dicts keyed by the header names; deterministic output."""
    import csv
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(row.get(h)) for h in header])


def write_json(path, payload):
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True, default=str)
        f.write("\n")
