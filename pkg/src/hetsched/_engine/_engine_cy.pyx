# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Cython scheduling engine.

A typed transliteration of engine_py.solve_dp: identical accumulation order
and a dominance relation proven equivalent, so both backends return
bit-identical candidates.  Two slot-local observations speed up the hot
loop without changing results: all profile columns of one slot share the
same transfer-occupancy set, and for functions max(m, l + c) pointwise
comparison over a c-interval is decided at the interval endpoints — so
dominance needs only the extreme columns, which are cached next to each
element's energy in a contiguous per-slot array.  The exhaustive search is
only ever run on tiny instances, so it is shared with the pure-Python
engine.
"""
from libc.math cimport INFINITY as INF
from libcpp.vector cimport vector

from .engine_py import enumerate_all  # noqa: F401  (re-exported)


cdef struct Entry:
    double e      # accumulated dynamic energy
    double pmin   # profile at the smallest transfer occupancy
    double pmax   # profile at the largest transfer occupancy
    int eid


def solve_dp(p):
    """All Pareto-surviving complete schedules, as (period, energy, usage,
    stages) candidates."""
    cdef int n = p.n
    cdef int n_types = p.n_types
    cdef int host = p.host
    cdef int n_opts = host
    cdef int n_usage = p.n_usage
    cdef int n_ep = host + 1
    cdef int n_slots = n_usage * n_ep

    cdef vector[int] avail
    cdef int t
    for t in range(n_types):
        avail.push_back(p.avail[t])

    cdef vector[int] radix
    radix.resize(n_types, 1)
    for t in range(n_types - 2, -1, -1):
        radix[t] = radix[t + 1] * (avail[t + 1] + 1)

    cdef vector[int] opt_type, opt_count
    cdef int o
    for o in range(n_opts):
        opt_type.push_back(p.options[o][0])
        opt_count.push_back(p.options[o][1])

    # usage counts per usage_index, decoded once
    cdef vector[int] usage_counts  # n_usage * n_types
    cdef int idx, rem
    for idx in range(n_usage):
        rem = idx
        for t in range(n_types):
            usage_counts.push_back(rem // radix[t])
            rem %= radix[t]

    # flattened numeric tables
    cdef int stride = n + 1
    cdef vector[double] exec_f, edyn_f
    exec_f.resize(n_opts * stride * stride)
    edyn_f.resize(n_opts * stride * stride)
    cdef int a, b
    for o in range(n_opts):
        for a in range(stride):
            for b in range(stride):
                exec_f[(o * stride + a) * stride + b] = p.s_exec[o][a][b]
                edyn_f[(o * stride + a) * stride + b] = p.s_edyn[o][a][b]
    cdef vector[double] comm_f
    comm_f.resize(stride * n_ep * n_ep)
    cdef int so, do_
    for b in range(stride):
        for so in range(n_ep):
            for do_ in range(n_ep):
                comm_f[(b * n_ep + so) * n_ep + do_] = p.comm[b][so][do_]
    cdef vector[double] pxfer, pstat
    for o in range(n_ep):
        pxfer.push_back(p.pxfer[o])
    for t in range(n_types):
        pstat.push_back(p.pstat[t])
    cdef vector[int] pref  # allowed_prefix, n_opts * stride
    for o in range(n_opts):
        for a in range(stride):
            pref.push_back(p.allowed_prefix[o][a])

    # extreme transfer-occupancy columns per (boundary, option); at the
    # final boundary only the host column exists
    cdef vector[int] kmin_t, kmax_t
    kmin_t.resize(stride * n_opts)
    kmax_t.resize(stride * n_opts)
    cdef int k, kmn, kmx
    cdef double v
    for b in range(stride):
        for o in range(n_opts):
            if b == n:
                kmin_t[b * n_opts + o] = host
                kmax_t[b * n_opts + o] = host
                continue
            kmn = 0
            kmx = 0
            for k in range(1, n_opts):
                v = comm_f[(b * n_ep + o) * n_ep + k]
                if v < comm_f[(b * n_ep + o) * n_ep + kmn]:
                    kmn = k
                if v > comm_f[(b * n_ep + o) * n_ep + kmx]:
                    kmx = k
            kmin_t[b * n_opts + o] = kmn
            kmax_t[b * n_opts + o] = kmx

    # global element store; element 0 is the empty-pipeline root (its
    # fields are never read: stage-0 insertions use the root branch).
    # An element's full profile is max(el_m, el_l + c) for the outgoing
    # transfer occupancy c, so only those two scalars are kept.
    cdef vector[double] el_m, el_l
    cdef vector[double] el_edyn
    cdef vector[int] el_parent, el_j, el_opt
    el_m.push_back(0.0)
    el_l.push_back(0.0)
    el_edyn.push_back(0.0)
    el_parent.push_back(-1)
    el_j.push_back(0)
    el_opt.push_back(-1)

    # cells[i * n_slots + (usage_index * n_ep + last_option)], each slot
    # sorted by ascending accumulated dynamic energy
    cdef vector[vector[Entry]] cells
    cells.resize((n + 1) * n_slots)
    cdef Entry root
    root.e = 0.0
    root.pmin = 0.0
    root.pmax = 0.0
    root.eid = 0
    cells[0 * n_slots + 0 * n_ep + host].push_back(root)

    cdef int i, j, t_idx, c, step, u_prev, u_new, lo, e, eid, w, m, sz
    cdef int pos, s_idx, slot_len, cbase, q
    cdef double exec_t, edyn_t, t_in, t_new, t_max_new, e_new
    cdef double f_min, f_max, np_min, np_max, thr
    cdef bint last, is_root, full_dom
    cdef vector[Entry]* prev_elems
    cdef vector[Entry]* slot
    cdef Entry ent
    cdef Entry* ep_

    for i in range(1, n + 1):
        last = i == n
        for j in range(1, i + 1):
            a = i - j
            for o in range(n_opts):
                if pref[o * stride + i] - pref[o * stride + a] != j:
                    continue
                t_idx = opt_type[o]
                c = opt_count[o]
                exec_t = exec_f[(o * stride + a) * stride + i]
                edyn_t = c * edyn_f[(o * stride + a) * stride + i]
                step = c * radix[t_idx]
                kmn = kmin_t[i * n_opts + o]
                kmx = kmax_t[i * n_opts + o]
                cbase = (i * n_ep + o) * n_ep
                for u_prev in range(n_usage):
                    if usage_counts[u_prev * n_types + t_idx] + c > avail[t_idx]:
                        continue
                    u_new = u_prev + step
                    for lo in range(n_ep):
                        prev_elems = &cells[a * n_slots + u_prev * n_ep + lo]
                        if prev_elems.size() == 0:
                            continue
                        t_in = comm_f[(a * n_ep + lo) * n_ep + o]
                        t_new = exec_t + t_in
                        slot = &cells[i * n_slots + u_new * n_ep + o]
                        # Parent-independent profile floors: every
                        # candidate from this batch has profile
                        # max(t_max_new, floor).  Whether a slot element
                        # dominates a candidate then only depends on the
                        # scalar t_max_new, via a single threshold T
                        # folded over the energy prefix.  Child energies
                        # are nondecreasing across the batch (parents are
                        # energy-sorted and float addition is monotone),
                        # so the prefix pointer q only moves forward and
                        # each slot element is folded once per batch.
                        f_min = t_new + comm_f[cbase + kmn]
                        f_max = t_new + comm_f[cbase + kmx]
                        is_root = lo == host and a == 0
                        thr = INF
                        full_dom = False
                        q = 0
                        sz = <int>prev_elems.size()
                        for m in range(sz):
                            e = prev_elems[0][m].eid
                            if is_root:
                                t_max_new = 0.0
                                e_new = (el_edyn[e] + edyn_t) \
                                    + pxfer[o] * t_in
                            else:
                                t_max_new = el_l[e] + t_in
                                if el_m[e] > t_max_new:
                                    t_max_new = el_m[e]
                                e_new = ((el_edyn[e] + pxfer[lo] * t_in)
                                         + edyn_t) + pxfer[o] * t_in
                            slot_len = <int>slot.size()
                            while q < slot_len:
                                ep_ = &slot[0][q]
                                if ep_.e > e_new:
                                    break
                                if ep_.pmin <= f_min:
                                    if ep_.pmax <= f_max:
                                        # dominates every possible
                                        # candidate of this batch
                                        full_dom = True
                                        break
                                    v = ep_.pmax
                                elif ep_.pmax <= f_max:
                                    v = ep_.pmin
                                else:
                                    v = ep_.pmin if ep_.pmin > ep_.pmax \
                                        else ep_.pmax
                                if v < thr:
                                    thr = v
                                q += 1
                            if full_dom:
                                break
                            if t_max_new >= thr:
                                continue
                            np_min = f_min if f_min > t_max_new else t_max_new
                            np_max = f_max if f_max > t_max_new else t_max_new
                            # survivors displace dominated higher-energy
                            # elements, then enter at the sorted position
                            # q; the next child's prefix advance folds
                            # them into T like any other slot element
                            w = q
                            for s_idx in range(q, slot_len):
                                ep_ = &slot[0][s_idx]
                                if not (ep_.pmin >= np_min
                                        and ep_.pmax >= np_max):
                                    slot[0][w] = slot[0][s_idx]
                                    w += 1
                            slot.resize(w)
                            eid = <int>el_edyn.size()
                            el_m.push_back(t_max_new)
                            el_l.push_back(t_new)
                            el_edyn.push_back(e_new)
                            el_parent.push_back(e)
                            el_j.push_back(j)
                            el_opt.push_back(o)
                            ent.e = e_new
                            ent.pmin = np_min
                            ent.pmax = np_max
                            ent.eid = eid
                            slot.insert(slot.begin() + q, ent)

    out = []
    cdef int u_idx, cur
    cdef double t_out, period, e_fin, p_static
    for u_idx in range(n_usage):
        usage = tuple(usage_counts[u_idx * n_types + t] for t in range(n_types))
        p_static = 0.0
        for t in range(n_types):
            p_static += usage_counts[u_idx * n_types + t] * pstat[t]
        for o in range(n_opts):
            t_out = comm_f[(n * n_ep + o) * n_ep + host]
            slot = &cells[n * n_slots + u_idx * n_ep + o]
            for m in range(<int>slot.size()):
                e = slot[0][m].eid
                period = el_l[e] + t_out
                if el_m[e] > period:
                    period = el_m[e]
                e_fin = el_edyn[e] + pxfer[o] * t_out
                stages = []
                cur = e
                pos = n
                while cur > 0:
                    stages.append((pos - el_j[cur], pos, el_opt[cur]))
                    pos -= el_j[cur]
                    cur = el_parent[cur]
                stages.reverse()
                out.append((period, p_static * period + e_fin, usage,
                            tuple(stages)))
    return out
