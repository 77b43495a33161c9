"""Pure-Python scheduling engine.

`solve_dp` runs the stage-partitioning dynamic program; `enumerate_all`
is the brute-force twin used as a verification oracle.  Both walk the same
numeric tables (see problem.py) with identical accumulation order, so their
floating-point results agree exactly.

DP state: (kernels scheduled, devices used per type, last-stage allocation).
Each state keeps a dominance-pruned frontier of elements.  An element's
last-stage partial time t_last and longest-earlier-stage time t_max only
ever influence the future through max(t_max, t_last + c) where c ranges
over the boundary transfer occupancies into each possible next stage
allocation, so each element stores that small "profile" vector plus its
accumulated dynamic energy; mid-chain the profile has one entry per device
allocation, and at the final boundary it collapses to the single
host-egress entry (the finished period).  Componentwise dominance on
(profile, energy) is exact for both the period and the energy objective,
and it discards every element hidden behind a pipeline bottleneck.  A
single table therefore answers both objectives exactly.
"""
from __future__ import annotations

from typing import List, Tuple

Candidate = Tuple[float, float, Tuple[int, ...], Tuple[Tuple[int, int, int], ...]]


def solve_dp(p) -> List[Candidate]:
    """All Pareto-surviving complete schedules, as (period, energy, usage,
    stages) candidates."""
    n, n_usage, host = p.n, p.n_usage, p.host
    n_ep = host + 1
    n_slots = n_usage * n_ep
    radix = [1] * p.n_types
    for t in range(p.n_types - 2, -1, -1):
        radix[t] = radix[t + 1] * (p.avail[t + 1] + 1)

    # Global element store; element 0 is the empty-pipeline root (its
    # profile is never read: stage-0 insertions use the root branch).
    # Mid-chain profiles are host-egress-free (host entry pinned to 0.0);
    # at the final boundary only the host entry is meaningful.
    el_prof = [[0.0] * n_ep]
    el_edyn = [0.0]
    el_parent = [-1]
    el_j = [0]
    el_opt = [-1]

    # cells[i] maps (usage_index * n_ep + last_option) -> element ids,
    # kept sorted by ascending accumulated dynamic energy.
    cells: List[List[List[int]]] = [
        [[] for _ in range(n_slots)] for _ in range(n + 1)]
    cells[0][0 * n_ep + host].append(0)
    # usage counts per usage_index, decoded once
    usage_of = []
    for idx in range(n_usage):
        rem = idx
        counts = []
        for t in range(p.n_types):
            counts.append(rem // radix[t])
            rem %= radix[t]
        usage_of.append(tuple(counts))

    comm = p.comm
    pxfer = p.pxfer

    for i in range(1, n + 1):
        level = cells[i]
        comm_i = comm[i]
        last = i == n
        for j in range(1, i + 1):
            a = i - j
            prev_level = cells[a]
            comm_a = comm[a]
            for o, (t_idx, c) in enumerate(p.options):
                if not p.range_allowed(a, i, o):
                    continue
                exec_t = p.s_exec[o][a][i]
                edyn_t = c * p.s_edyn[o][a][i]
                step = c * radix[t_idx]
                comm_io = comm_i[o]
                for u_prev in range(n_usage):
                    if usage_of[u_prev][t_idx] + c > p.avail[t_idx]:
                        continue
                    base = u_prev * n_ep
                    u_new = u_prev + step
                    for lo in range(n_ep):
                        prev_elems = prev_level[base + lo]
                        if not prev_elems:
                            continue
                        t_in = comm_a[lo][o]
                        t_new = exec_t + t_in
                        slot = level[u_new * n_ep + o]
                        # Batch skip: every candidate from this parent
                        # cell has profile >= the parent-independent floor
                        # and energy >= the cell minimum (slots are sorted
                        # by energy, float addition is monotone), so one
                        # probe can discard the whole batch.  Dominated
                        # candidates never mutate the slot, so skipping
                        # them is exact.
                        floor = [0.0] * n_ep
                        if last:
                            floor[host] = t_new + comm_io[host]
                        else:
                            for k in range(host):
                                floor[k] = t_new + comm_io[k]
                        first = prev_elems[0]
                        if lo == host and a == 0:
                            e_lb = (el_edyn[first] + edyn_t) \
                                + pxfer[o] * t_in
                        else:
                            e_lb = ((el_edyn[first] + pxfer[lo] * t_in)
                                    + edyn_t) + pxfer[o] * t_in
                        skip = False
                        for eid in slot:
                            if el_edyn[eid] > e_lb:
                                break
                            if all(el_prof[eid][k] <= floor[k]
                                   for k in range(n_ep)):
                                skip = True
                                break
                        if skip:
                            continue
                        for e in prev_elems:
                            if lo == host and a == 0:
                                t_max_new = 0.0
                                e_new = (el_edyn[e] + edyn_t) \
                                    + pxfer[o] * t_in
                            else:
                                t_max_new = el_prof[e][o]
                                e_new = ((el_edyn[e] + pxfer[lo] * t_in)
                                         + edyn_t) + pxfer[o] * t_in
                            prof = [0.0] * n_ep
                            if last:
                                v = floor[host]
                                prof[host] = v if v > t_max_new else t_max_new
                            else:
                                for k in range(host):
                                    v = floor[k]
                                    prof[k] = v if v > t_max_new else t_max_new
                            # dominance-pruned insertion, slot sorted by
                            # energy: only lower-energy elements can
                            # dominate the newcomer and only higher-energy
                            # ones can be displaced by it.
                            dominated = False
                            pos = len(slot)
                            for s_idx, eid in enumerate(slot):
                                if el_edyn[eid] > e_new:
                                    pos = s_idx
                                    break
                                ep_ = el_prof[eid]
                                if all(ep_[k] <= prof[k]
                                       for k in range(n_ep)):
                                    dominated = True
                                    break
                            if dominated:
                                continue
                            w = pos
                            for s_idx in range(pos, len(slot)):
                                eid = slot[s_idx]
                                ep_ = el_prof[eid]
                                if not all(ep_[k] >= prof[k]
                                           for k in range(n_ep)):
                                    slot[w] = eid
                                    w += 1
                            del slot[w:]
                            eid = len(el_edyn)
                            el_prof.append(prof)
                            el_edyn.append(e_new)
                            el_parent.append(e)
                            el_j.append(j)
                            el_opt.append(o)
                            slot.insert(pos, eid)

    out: List[Candidate] = []
    final = cells[n]
    for u_idx in range(n_usage):
        usage = usage_of[u_idx]
        p_static = 0.0
        for t in range(p.n_types):
            p_static += usage[t] * p.pstat[t]
        for o in range(host):
            t_out = comm[n][o][host]
            for e in final[u_idx * n_ep + o]:
                period = el_prof[e][host]
                e_fin = el_edyn[e] + pxfer[o] * t_out
                stages = []
                cur, pos = e, n
                while cur > 0:
                    stages.append((pos - el_j[cur], pos, el_opt[cur]))
                    pos -= el_j[cur]
                    cur = el_parent[cur]
                stages.reverse()
                out.append((period, p_static * period + e_fin, usage,
                            tuple(stages)))
    return out


def enumerate_all(p) -> List[Candidate]:
    """Every complete schedule, evaluated with the DP's arithmetic."""
    out: List[Candidate] = []
    usage = [0] * p.n_types
    stages: List[Tuple[int, int, int]] = []

    def recurse(a, lo, t_last, t_max, e_dyn):
        if a == p.n:
            o = stages[-1][2]
            t_out = p.comm[p.n][o][p.host]
            t_fin = t_last + t_out
            period = t_max if t_max > t_fin else t_fin
            e_fin = e_dyn + p.pxfer[o] * t_out
            p_static = 0.0
            for t in range(p.n_types):
                p_static += usage[t] * p.pstat[t]
            out.append((period, p_static * period + e_fin, tuple(usage),
                        tuple(stages)))
            return
        comm_a = p.comm[a]
        for j in range(1, p.n - a + 1):
            b = a + j
            for o, (t_idx, c) in enumerate(p.options):
                if usage[t_idx] + c > p.avail[t_idx]:
                    continue
                if not p.range_allowed(a, b, o):
                    continue
                t_in = comm_a[lo][o]
                t_new = p.s_exec[o][a][b] + t_in
                edyn_t = c * p.s_edyn[o][a][b]
                if lo == p.host:
                    t_max_new = t_max
                    e_new = (e_dyn + edyn_t) + p.pxfer[o] * t_in
                else:
                    upd = t_last + t_in
                    t_max_new = t_max if t_max > upd else upd
                    e_new = ((e_dyn + p.pxfer[lo] * t_in) + edyn_t) \
                        + p.pxfer[o] * t_in
                usage[t_idx] += c
                stages.append((a, b, o))
                recurse(b, o, t_new, t_max_new, e_new)
                stages.pop()
                usage[t_idx] -= c

    recurse(0, p.host, 0.0, 0.0, 0.0)
    return out
