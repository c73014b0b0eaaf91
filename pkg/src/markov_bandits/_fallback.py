"""Pure-Python simulation kernel.

Same signature and bit-identical results as the compiled ``_kernels``
module; it drives the reference :mod:`~markov_bandits.policies` classes
directly, so it doubles as the cross-check for the compiled loop.
"""

from __future__ import annotations

import numpy as np

from .markov import sample_index
from .policies import RcaM, UcbM, sb2_matrix

UCBM, RCAM, RCAM_ADAPTIVE = 0, 1, 2


def simulate(policy, cum_active, cum_passive, rewards, nstates, init_states, uniforms,
             M, L, restless, checkpoints, recorder=None, tie_rng=None):
    K = len(nstates)
    n = int(checkpoints[-1]) if len(checkpoints) else 0
    act = [cum_active[i, : nstates[i], : nstates[i]].tolist() for i in range(K)]
    pas = [cum_passive[i, : nstates[i], : nstates[i]].tolist() for i in range(K)]
    rew = [rewards[i, : nstates[i]].tolist() for i in range(K)]
    u = np.asarray(uniforms).tolist()
    state = [int(s) for s in init_states]
    plays = [0] * K

    if policy == UCBM:
        pol = UcbM(K, M, L)
    else:
        pol = RcaM(K, M, L, adaptive=policy == RCAM_ADAPTIVE, rng=tie_rng, record=recorder is not None)

    C = len(checkpoints)
    out = {
        "reward": np.zeros(C),
        "plays": np.zeros((C, K), dtype=np.int64),
        "completed": np.zeros((C, K), dtype=np.int64),
        "blocks": np.zeros((C, K), dtype=np.int64),
        "last_block_end": np.zeros(C, dtype=np.int64),
    }
    total = 0.0
    c = 0
    for slot in range(1, n + 1):
        chosen = set(pol.select().arms)
        if restless:
            for i in range(K):
                rows = act[i] if i in chosen else pas[i]
                state[i] = sample_index(rows[state[i]], u[i][slot])
        else:
            for i in chosen:
                state[i] = sample_index(act[i][state[i]], u[i][plays[i] + 1])
        obs = {}
        for i in sorted(chosen):
            r = rew[i][state[i]]
            total += r
            plays[i] += 1
            obs[i] = (state[i], r)
        pol.observe(obs)
        if recorder is not None:
            recorder(slot, obs, state)
        while c < C and checkpoints[c] == slot:
            out["reward"][c] = total
            out["plays"][c] = plays
            if policy == UCBM:
                out["completed"][c] = plays
            else:
                out["completed"][c] = pol.completed_plays
                out["blocks"][c] = pol.blocks
                out["last_block_end"][c] = pol.last_block_end
            c += 1
    S = cum_active.shape[1]
    if policy == UCBM:
        out["sb2_transitions"] = np.zeros((K, S, S), dtype=np.int64)
    else:
        out["sb2_transitions"] = np.stack([sb2_matrix(pol, i, S) for i in range(K)])
    out["policy"] = pol
    return out
