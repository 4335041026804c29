"""Closed-form fronthaul signaling counts and the pipelined latency model.

Counts are exact integers in units of real symbols per coherence block. For
the sequential algorithms every inter-AP link carries the same load; for
centralized processing the signaling accumulates toward the CPU and the
reported per-link figure is the load on the final link, 2*tau_c*N*L.
"""

from dataclasses import dataclass

from .errors import UsageError

ALGORITHMS = ("centralized", "oslp", "nlmmse", "smr", "rls")


@dataclass
class FronthaulRow:
    algorithm: str
    data_reals_per_block: int     # shared for every data channel use
    stats_reals_per_block: int    # shared once per coherence block
    total_per_link: int
    total_network: int


def _check(K, tau_c, tau_p, N, L):
    if any(int(v) != v or v < 0 for v in (K, tau_c, tau_p, N, L)):
        raise UsageError("fronthaul: parameters must be nonnegative integers")
    if tau_p > tau_c:
        raise UsageError("fronthaul: tau_p must not exceed tau_c")


def fronthaul_count(algorithm, K, tau_c, tau_p, N, L):
    """Per-link and network-wide fronthaul load of one algorithm."""
    _check(K, tau_c, tau_p, N, L)
    K, tau_c, tau_p, N, L = int(K), int(tau_c), int(tau_p), int(N), int(L)
    seq_data = 2 * K * (tau_c - tau_p)
    if algorithm == "centralized":
        total = 2 * tau_c * N * L
        return FronthaulRow(algorithm, total, 0, total, total)
    if algorithm == "oslp":
        stats = K * K
    elif algorithm == "nlmmse":
        stats = 2 * K * K + K
    elif algorithm == "smr":
        stats = K
    elif algorithm == "rls":
        stats = K * K
    else:
        raise UsageError(f"fronthaul_count: unknown algorithm {algorithm!r}")
    per_link = seq_data + stats
    return FronthaulRow(algorithm, seq_data, stats, per_link, per_link * L)


def savings_vs_centralized(K, tau_c, tau_p, N, L):
    """Fraction of per-link signaling saved by the sequential optimal scheme."""
    cent = fronthaul_count("centralized", K, tau_c, tau_p, N, L).total_per_link
    seq = fronthaul_count("oslp", K, tau_c, tau_p, N, L).total_per_link
    if cent == 0:
        raise UsageError("savings_vs_centralized: centralized load is zero")
    return 1.0 - seq / cent


def latency_blocks(t_u, L):
    """Latency in AP-processing time blocks for t_u data channel uses.

    Returns (pipelined, naive): the pipeline overlaps consecutive uses for
    t_u + L blocks total, against t_u * L if each use traversed the whole
    stripe before the next entered.
    """
    if t_u < 1 or L < 1:
        raise UsageError("latency_blocks: t_u and L must be >= 1")
    return int(t_u) + int(L), int(t_u) * int(L)


def fronthaul_report(K, tau_c, tau_p, N, L):
    """All algorithm rows plus the sequential-vs-centralized savings."""
    rows = {alg: fronthaul_count(alg, K, tau_c, tau_p, N, L) for alg in ALGORITHMS}
    return {
        "parameters": {"K": int(K), "tau_c": int(tau_c), "tau_p": int(tau_p),
                       "N": int(N), "L": int(L)},
        "rows": {
            alg: {
                "data_reals_per_block": row.data_reals_per_block,
                "stats_reals_per_block": row.stats_reals_per_block,
                "total_per_link": row.total_per_link,
                "total_network": row.total_network,
            }
            for alg, row in rows.items()
        },
        "savings_vs_centralized": savings_vs_centralized(K, tau_c, tau_p, N, L),
    }
