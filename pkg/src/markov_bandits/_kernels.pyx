# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled simulation loops for UCB-M and RCA-M.

Mirrors ``_fallback.simulate`` operation for operation: same uniform
consumption, same floating-point evaluation order, same tie-breaking.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt, INFINITY

cnp.import_array()

cdef enum:
    UCBM = 0
    RCAM_ADAPTIVE = 2


cdef inline Py_ssize_t draw(const double[:, :, ::1] cum, Py_ssize_t arm, Py_ssize_t x,
                            Py_ssize_t ns, double u) noexcept nogil:
    cdef Py_ssize_t j = 0
    while j < ns - 1 and not (u < cum[arm, x, j]):
        j += 1
    return j


def simulate(int policy, const double[:, :, ::1] cum_active, const double[:, :, ::1] cum_passive,
             const double[:, ::1] rewards, const long[::1] nstates, const long[::1] init_states,
             const double[:, ::1] uniforms, int M, double L, bint restless,
             const long[::1] checkpoints, recorder=None, tie_rng=None):
    if recorder is not None or tie_rng is not None:
        raise ValueError("recording runs are only supported by the pure-Python kernel")
    cdef Py_ssize_t K = nstates.shape[0]
    cdef Py_ssize_t S = cum_active.shape[1]
    cdef Py_ssize_t C = checkpoints.shape[0]
    cdef long n = checkpoints[C - 1] if C > 0 else 0

    reward_out = np.zeros(C)
    plays_out = np.zeros((C, K), dtype=np.int64)
    completed_out = np.zeros((C, K), dtype=np.int64)
    blocks_out = np.zeros((C, K), dtype=np.int64)
    lbe_out = np.zeros(C, dtype=np.int64)
    sb2_out = np.zeros((K, S, S), dtype=np.int64)
    cdef double[::1] r_o = reward_out
    cdef cnp.int64_t[:, ::1] p_o = plays_out
    cdef cnp.int64_t[:, ::1] c_o = completed_out
    cdef cnp.int64_t[:, ::1] b_o = blocks_out
    cdef cnp.int64_t[::1] l_o = lbe_out
    cdef cnp.int64_t[:, :, ::1] sb2 = sb2_out

    state_a = np.array(init_states, dtype=np.int64)
    plays_a = np.zeros(K, dtype=np.int64)
    chosen_a = np.zeros(K, dtype=np.uint8)
    g_a = np.zeros(K)
    sums_a = np.zeros(K)
    # RCA-M bookkeeping
    gamma_a = np.full(K, -1, dtype=np.int64)
    T2_a = np.zeros(K, dtype=np.int64)
    r2_a = np.zeros(K)
    never_a = np.ones(K, dtype=np.uint8)
    insb2_a = np.zeros(K, dtype=np.uint8)
    blocks_a = np.zeros(K, dtype=np.int64)
    completed_a = np.zeros(K, dtype=np.int64)
    bplays_a = np.zeros(K, dtype=np.int64)
    prev_a = np.full(K, -1, dtype=np.int64)
    excl_a = np.zeros((K, S), dtype=np.int64)
    seen_a = np.zeros((K, S), dtype=np.uint8)

    cdef cnp.int64_t[::1] state = state_a
    cdef cnp.int64_t[::1] plays = plays_a
    cdef cnp.uint8_t[::1] chosen = chosen_a
    cdef double[::1] g = g_a
    cdef double[::1] sums = sums_a
    cdef cnp.int64_t[::1] gamma = gamma_a
    cdef cnp.int64_t[::1] T2 = T2_a
    cdef double[::1] r2 = r2_a
    cdef cnp.uint8_t[::1] never = never_a
    cdef cnp.uint8_t[::1] insb2 = insb2_a
    cdef cnp.int64_t[::1] blocks = blocks_a
    cdef cnp.int64_t[::1] completed = completed_a
    cdef cnp.int64_t[::1] bplays = bplays_a
    cdef cnp.int64_t[::1] prev = prev_a
    cdef cnp.int64_t[:, ::1] excl = excl_a
    cdef cnp.uint8_t[:, ::1] seen = seen_a

    cdef long slot, t2 = 0, last_block_end = 0
    cdef Py_ssize_t i, j, s, c = 0, best, nA = 0, need, x, ns
    cdef double total = 0.0, r, bestv, mean, pad, lt
    cdef bint any_sb2
    cdef long kbest

    with nogil:
        for slot in range(1, n + 1):
            # ---- decision
            if policy == UCBM:
                for i in range(K):
                    chosen[i] = 0
                if slot <= K:
                    for j in range(M):
                        chosen[(slot - 1 + j) % K] = 1
                else:
                    lt = log(<double>(slot - 1))
                    for i in range(K):
                        mean = sums[i] / plays[i]
                        pad = sqrt(L * lt / plays[i])
                        g[i] = mean + pad
                    for j in range(M):
                        best = -1
                        for i in range(K):
                            if chosen[i] == 0 and (best < 0 or g[i] > bestv):
                                best = i
                                bestv = g[i]
                        chosen[best] = 1
            else:
                for i in range(K):
                    if nA >= M:
                        break
                    if never[i] and not chosen[i]:
                        chosen[i] = 1
                        nA += 1
                        bplays[i] = 0
                        for s in range(S):
                            seen[i, s] = 0
                need = M - nA
                if need > 0:
                    lt = log(<double>t2) if t2 > 0 else 0.0
                    for i in range(K):
                        if not chosen[i]:
                            if T2[i] == 0:
                                g[i] = INFINITY
                            else:
                                mean = r2[i] / T2[i]
                                pad = sqrt(L * lt / T2[i])
                                g[i] = mean + pad
                    for j in range(need):
                        best = -1
                        for i in range(K):
                            if chosen[i] == 0 and (best < 0 or g[i] > bestv):
                                best = i
                                bestv = g[i]
                        chosen[best] = 1
                        nA += 1
                        bplays[best] = 0
                        for s in range(S):
                            seen[best, s] = 0
                        if policy == RCAM_ADAPTIVE and not never[best]:
                            ns = nstates[best]
                            kbest = 0
                            for s in range(1, ns):
                                if excl[best, s] < excl[best, kbest]:
                                    kbest = s
                            if kbest != gamma[best]:
                                gamma[best] = kbest
                                T2[best] = 0
                                r2[best] = 0.0

            # ---- nature
            if restless:
                for i in range(K):
                    if chosen[i]:
                        state[i] = draw(cum_active, i, state[i], nstates[i], uniforms[i, slot])
                    else:
                        state[i] = draw(cum_passive, i, state[i], nstates[i], uniforms[i, slot])
            else:
                for i in range(K):
                    if chosen[i]:
                        state[i] = draw(cum_active, i, state[i], nstates[i], uniforms[i, plays[i] + 1])

            # ---- observation
            for i in range(K):
                if not chosen[i]:
                    continue
                x = state[i]
                r = rewards[i, x]
                total += r
                plays[i] += 1
                if policy == UCBM:
                    sums[i] += r
                    continue
                bplays[i] += 1
                ns = nstates[i]
                for s in range(ns):
                    if s != x and not seen[i, s]:
                        excl[i, s] += 1
                seen[i, x] = 1
                if never[i]:
                    gamma[i] = x
                    T2[i] += 1
                    r2[i] += r
                    never[i] = 0
                    insb2[i] = 1
                    prev[i] = x
                elif x != gamma[i] and insb2[i]:
                    T2[i] += 1
                    r2[i] += r
                    sb2[i, prev[i], x] += 1
                    prev[i] = x
                elif x == gamma[i] and not insb2[i]:
                    T2[i] += 1
                    r2[i] += r
                    insb2[i] = 1
                    prev[i] = x
                elif x == gamma[i]:
                    sb2[i, prev[i], x] += 1
                    insb2[i] = 0
                    chosen[i] = 0
                    nA -= 1
                    blocks[i] += 1
                    completed[i] += bplays[i]
                    last_block_end = slot
            if policy != UCBM:
                any_sb2 = False
                for i in range(K):
                    if insb2[i]:
                        any_sb2 = True
                        break
                if any_sb2:
                    t2 += 1

            # ---- checkpoints
            while c < C and checkpoints[c] == slot:
                r_o[c] = total
                for i in range(K):
                    p_o[c, i] = plays[i]
                    if policy == UCBM:
                        c_o[c, i] = plays[i]
                    else:
                        c_o[c, i] = completed[i]
                        b_o[c, i] = blocks[i]
                l_o[c] = last_block_end
                c += 1

    return {
        "reward": reward_out,
        "plays": plays_out,
        "completed": completed_out,
        "blocks": blocks_out,
        "last_block_end": lbe_out,
        "sb2_transitions": sb2_out,
    }
