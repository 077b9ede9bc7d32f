"""Pure-Python slot loop, used when the compiled kernel is not built."""


def run_chunk(u, state, params, t0, slots, nb, batch_sums, counts):
    """Advance the system over ``len(u)`` slots, tallying slots with index >= 0.

    ``u`` holds four uniforms per slot: action, delivery, source move,
    channel move. ``state`` is ``[x, xhat, h, age]`` and is updated in place.
    """
    x, xhat, h, age = (int(v) for v in state)
    th0, th1, th2, p1r, p0p, px0, px1, ph0, ph1, c1, c2, c3 = params.tolist()
    costs = (0.0, c1, c2, c3)
    sums = batch_sums.tolist()
    n_act = counts.tolist()
    t = t0
    for ua, ud, ux, uh in u.tolist():
        if ua < th0:
            a = 0
        elif ua < th1:
            a = 1
        elif ua < th2:
            a = 2
        else:
            a = 3
        delivered = 0
        if a == 1:
            if h == 1 and ud < p1r:
                delivered = 1
        elif a == 3:
            if h == 1 or ud < p0p:
                delivered = 1
        if delivered:
            xhat = x
            age = x
        else:
            age += 1
        if t >= 0:
            row = sums[t * nb // slots]
            row[0] += 1.0 if x != xhat else 0.0
            row[1] += float(age)
            row[2] += costs[a]
            row[3] += float(delivered)
            row[4] += 1.0 if xhat == 0 else 0.0
            n_act[a] += 1
        if x == 0:
            if ux < px0:
                x = 1
        elif ux < px1:
            x = 0
        if h == 0:
            if uh < ph0:
                h = 1
        elif uh < ph1:
            h = 0
        t += 1
    batch_sums[:] = sums
    counts[:] = n_act
    state[:] = (x, xhat, h, age)
