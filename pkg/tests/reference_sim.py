"""Independent brute-force reference evaluator used as an oracle.

Everything here is recomputed from scratch at every step with deliberately
naive code paths and hard-coded constants: synopsis means are recomputed from
the raw vector prefix, window maxima from list slices, the forecaster by
re-running its recurrences over the epoch's quanta, and the fuzzy output via
an explicit 27-entry consequent table. Nothing is imported from the package
under test.
"""

import math

# Default engine geometry, frozen independently.
UPPER = {
    "low": (0.0, 0.0, 0.2, 0.45),
    "medium": (0.2, 0.45, 0.55, 0.8),
    "high": (0.55, 0.8, 1.0, 1.0),
}
LOWER_HEIGHT = 0.9
LABELS = ("low", "medium", "high")

# Rank-average consequents, written out longhand.
CONSEQUENT = {
    ("low", "low", "low"): "low",
    ("low", "low", "medium"): "low",
    ("low", "medium", "low"): "low",
    ("medium", "low", "low"): "low",
    ("low", "low", "high"): "medium",
    ("low", "high", "low"): "medium",
    ("high", "low", "low"): "medium",
    ("low", "medium", "medium"): "medium",
    ("medium", "low", "medium"): "medium",
    ("medium", "medium", "low"): "medium",
    ("low", "medium", "high"): "medium",
    ("low", "high", "medium"): "medium",
    ("medium", "low", "high"): "medium",
    ("medium", "high", "low"): "medium",
    ("high", "low", "medium"): "medium",
    ("high", "medium", "low"): "medium",
    ("medium", "medium", "medium"): "medium",
    ("low", "high", "high"): "medium",
    ("high", "low", "high"): "medium",
    ("high", "high", "low"): "medium",
    ("medium", "medium", "high"): "medium",
    ("medium", "high", "medium"): "medium",
    ("high", "medium", "medium"): "medium",
    ("medium", "high", "high"): "high",
    ("high", "medium", "high"): "high",
    ("high", "high", "medium"): "high",
    ("high", "high", "high"): "high",
}


def ref_trapezoid(x, a, b, c, d):
    if x < a or x > d:
        return 0.0
    if b <= x <= c:
        return 1.0
    if x < b:
        return (x - a) / (b - a)
    return (d - x) / (d - c)


def ref_membership(x, label):
    hi = ref_trapezoid(x, *UPPER[label])
    lo = LOWER_HEIGHT * ref_trapezoid(x, *UPPER[label])
    return lo, hi


def ref_centroid(label, grid_points=101):
    num = 0.0
    den = 0.0
    for i in range(grid_points):
        x = i / (grid_points - 1)
        lo, hi = ref_membership(x, label)
        w = (lo + hi) / 2.0
        num += x * w
        den += w
    return num / den


_CENTROIDS = {label: ref_centroid(label) for label in LABELS}


def ref_pod(x1, x2, x3):
    """Explicit rule-by-rule evaluation of the inference output."""
    mems = {}
    for pos, x in enumerate((x1, x2, x3)):
        x = min(1.0, max(0.0, x))
        for label in LABELS:
            mems[(pos, label)] = ref_membership(x, label)
    num = 0.0
    den = 0.0
    for l1 in LABELS:
        for l2 in LABELS:
            for l3 in LABELS:
                lo = min(mems[(0, l1)][0], mems[(1, l2)][0], mems[(2, l3)][0])
                hi = min(mems[(0, l1)][1], mems[(1, l2)][1], mems[(2, l3)][1])
                mass = (lo + hi) / 2.0
                num += mass * _CENTROIDS[CONSEQUENT[(l1, l2, l3)]]
                den += mass
    if den <= 0.0:
        return 0.0
    return min(1.0, max(0.0, num / den))


def ref_holt(quanta, alpha, beta):
    """Re-run the smoothing recurrences over the whole epoch series."""
    v = quanta[0]
    b = quanta[1] - quanta[0]
    for e in quanta[1:]:
        v_new = alpha * e + (1.0 - alpha) * (v + b)
        b = beta * (v_new - v) + (1.0 - beta) * b
        v = v_new
    return v, b


def ref_forecast(quanta, alpha, beta, k=3):
    v, b = ref_holt(quanta, alpha, beta)
    return [max(0.0, v + (i + 1) * b) for i in range(k)]


def reference_trace(vectors, policy, T, theta, alpha=0.5, beta=0.5, window=50, N=1):
    """Step-by-step re-derivation of one experiment window.

    Returns one dict per dissemination event with keys
    (node, step, t_star, cause, magnitude, g), in step order.
    """
    dims = len(vectors[0])
    nodes = []
    for node_id in range(1, N + 1):
        offset = (node_id - 1) % T
        nodes.append(
            {
                "id": node_id,
                "ingested": [list(vectors[node_id - 1])],
                "last_sent": None,
                "epoch_quanta": [],
                "all_quanta": [],
                "t": 1,
                "deadline": offset if offset > 0 else T,
            }
        )
    for node in nodes:
        raw = node["ingested"]
        node["last_sent"] = [sum(v[dim] for v in raw) / len(raw) for dim in range(dims)]
    events = []
    for s in range(1, T + 1):
        for idx, node in enumerate(nodes):
            node["ingested"].append(list(vectors[s * N + idx]))
            raw = node["ingested"]
            mean = [sum(v[dim] for v in raw) / len(raw) for dim in range(dims)]
            q = sum(abs(mean[dim] - node["last_sent"][dim]) for dim in range(dims))
            node["epoch_quanta"].append(q)
            node["all_quanta"].append(q)
            wmax = max(node["all_quanta"][-window:])

            def norm(value):
                scale = wmax if wmax > 1e-9 else 1e-9
                return min(1.0, max(0.0, value / scale))

            triggered = False
            cause = None
            g = None
            epoch = node["epoch_quanta"]
            if policy == "UDDM":
                if len(epoch) >= 3:
                    pod_p = ref_pod(norm(epoch[-3]), norm(epoch[-2]), norm(epoch[-1]))
                    if len(epoch) >= 2:
                        fc = ref_forecast(epoch, alpha, beta)
                        pod_f = ref_pod(norm(fc[0]), norm(fc[1]), norm(fc[2]))
                    else:
                        pod_f = pod_p
                    g = math.sqrt(pod_p * pod_f)
                    triggered = g > theta
                    cause = "threshold"
            elif policy == "BM":
                triggered = q > 0.0
                cause = "any-change"
            elif policy == "PM":
                if len(epoch) >= 2:
                    fc = ref_forecast(epoch, alpha, beta)
                    g = (norm(fc[0]) + norm(fc[1]) + norm(fc[2])) / 3.0
                    triggered = g > theta
                    cause = "prediction"
            else:
                raise ValueError(policy)

            if triggered:
                fired_cause = cause
            elif node["t"] >= node["deadline"]:
                fired_cause = "deadline"
            else:
                node["t"] += 1
                continue
            events.append(
                {
                    "node": node["id"],
                    "step": s,
                    "t_star": node["t"],
                    "cause": fired_cause,
                    "magnitude": q,
                    "g": g,
                }
            )
            node["last_sent"] = list(mean)
            node["epoch_quanta"] = []
            node["t"] = 1
            node["deadline"] = T
    return events
