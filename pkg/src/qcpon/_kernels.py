"""Scalar/loop kernels behind the finite-key chain and the band enumeration.

Everything here is numba-njit compatible (see :mod:`qcpon._accel`): plain
floats, ``math`` calls, fixed-size tuples.  The public modules wrap these
functions with typed containers and input validation; the optimizer and the
sweeps call them directly.

The Chernoff inversions are solved in shifted coordinates of the two
Lambert-W branches.  With t = ln(eps/2)/chi, the bounds are

    E^L = chi * u,   u  = -W0(-e^(t-1)),  ln(u) - u  = t - 1,  u  in (0, 1]
    E^U = chi * u',  u' = -W-1(-e^(t-1)), ln(u')- u' = t - 1,  u' >= 1

and the substitutions s = 1-u resp. sigma = u'-1 keep full relative accuracy
near the branch point (large chi), where evaluating W on the raw float
argument -e^(t-1) would lose half the mantissa to cancellation.
"""

import math

from ._accel import njit

LN2 = 0.6931471805599453
TWO_PI = 6.283185307179586
INV_E = 0.36787944117144233


# ---------------------------------------------------------------------------
# elementary pieces
# ---------------------------------------------------------------------------


@njit(cache=True)
def entropy_bits(p):
    """Shannon binary entropy h(p) in bits; h(0) = h(1) = 0 by continuity."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -(p * math.log(p) + (1.0 - p) * math.log1p(-p)) / LN2


@njit(cache=True)
def gain(y0, eta, a):
    """Detection probability Q_a = 1 - (1-y0) e^(-eta a) of intensity a."""
    x = eta * a
    return -math.expm1(-x) + y0 * math.exp(-x)


@njit(cache=True)
def error_gain(y0, eta, ed, a):
    """Error-weighted gain E_a Q_a = y0/2 + ed (1 - e^(-eta a))."""
    return 0.5 * y0 + ed * (-math.expm1(-eta * a))


# ---------------------------------------------------------------------------
# Lambert-W branch solves in shifted coordinates
# ---------------------------------------------------------------------------


@njit(cache=True)
def _sum_neglog1p_minus(s):
    """log1p(-s) + s = -(s^2/2 + s^3/3 + ...) by series, full relative
    precision for s <= 0.02 where the direct form cancels."""
    acc = 0.0
    p = s * s
    for k in range(2, 11):
        acc += p / k
        p *= s
    return -acc


@njit(cache=True)
def _sum_log1p_minus(s):
    """log1p(s) - s = -s^2/2 + s^3/3 - ... by series, for s <= 0.02."""
    acc = 0.0
    p = s * s
    sign = -1.0
    for k in range(2, 11):
        acc += sign * p / k
        p *= s
        sign = -sign
    return acc


@njit(cache=True)
def solve_rel_lower(t):
    """u in (0,1] with ln(u) - u = t - 1, i.e. u = -W0(-e^(t-1)); t < 0."""
    if t >= 0.0:
        return 1.0
    if t < -700.0:
        return 0.0  # e^(t-1) underflows; so does chi*u downstream
    if t > -1.0:
        # near the branch point: solve log1p(-s) + s = t for s = 1-u
        s = math.sqrt(-2.0 * t)
        series = s < 0.02  # cancellation-free path for very large chi
        if s > 0.9:
            s = 0.9
        for _ in range(80):
            if series:
                f = _sum_neglog1p_minus(s) - t
            else:
                f = math.log1p(-s) + s - t
            step = f * (1.0 - s) / s
            s_new = s + step
            if s_new <= 0.0:
                s_new = 0.5 * s
            elif s_new >= 1.0:
                s_new = 0.5 * (s + 1.0)
            ds = abs(s_new - s)
            s = s_new
            if ds <= 1e-16 * (1.0 + s):
                break
        return 1.0 - s
    # deep tail: u small, Newton on ln(u) - u after a fixed-point warm start
    u = math.exp(t - 1.0)
    if u < 1e-300:
        return u
    for _ in range(4):
        u = math.exp(t - 1.0 + u)
    for _ in range(80):
        g = math.log(u) - u - (t - 1.0)
        step = -g * u / (1.0 - u)
        u_new = u + step
        if u_new <= 0.0:
            u_new = 0.5 * u
        elif u_new >= 1.0:
            u_new = 0.5 * (u + 1.0)
        du = abs(u_new - u)
        u = u_new
        if du <= 1e-16 * u:
            break
    return u


@njit(cache=True)
def solve_rel_upper(t):
    """u' >= 1 with ln(u') - u' = t - 1, i.e. u' = -W-1(-e^(t-1)); t < 0."""
    if t >= 0.0:
        return 1.0
    if t > -1.0:
        # near the branch point: solve log1p(sig) - sig = t for sig = u'-1
        sig = math.sqrt(-2.0 * t)
        series = sig < 0.02
        for _ in range(80):
            if series:
                h = _sum_log1p_minus(sig) - t
            else:
                h = math.log1p(sig) - sig - t
            step = h * (1.0 + sig) / sig
            sig_new = sig + step
            if sig_new <= 0.0:
                sig_new = 0.5 * sig
            dsig = abs(sig_new - sig)
            sig = sig_new
            if dsig <= 1e-16 * (1.0 + sig):
                break
        return 1.0 + sig
    # deep tail: sig ~ -t + log1p(sig)
    sig = -t
    for _ in range(6):
        sig = -t + math.log1p(sig)
    for _ in range(80):
        h = math.log1p(sig) - sig - t
        step = h * (1.0 + sig) / sig
        sig_new = sig + step
        if sig_new <= 0.0:
            sig_new = 0.5 * sig
        dsig = abs(sig_new - sig)
        sig = sig_new
        if dsig <= 1e-16 * (1.0 + sig):
            break
    return 1.0 + sig


# ---------------------------------------------------------------------------
# Lambert W on raw arguments (Halley iteration, branch-point series seeds)
# ---------------------------------------------------------------------------


@njit(cache=True)
def lambert_w0_raw(x):
    """Principal branch W0(x), x >= -1/e.  Residual <= ~1e-12*max(1,|x|)."""
    if x == 0.0:
        return 0.0
    p2 = 2.0 * (math.e * x + 1.0)
    if p2 <= 0.0:
        return -1.0  # branch point (caller has checked the domain)
    if p2 < 0.5:
        # series seed in p = sqrt(2(ex+1))
        p = math.sqrt(p2)
        w = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0)))
    elif x < 1.5:
        w = x / (1.0 + x)  # crude but inside the Halley basin
    else:
        lx = math.log(x)
        w = lx - math.log(lx)
    for _ in range(100):
        ew = math.exp(w)
        r = w * ew - x
        w1 = w + 1.0
        denom = ew * w1 - (w + 2.0) * r / (2.0 * w1)
        dw = r / denom
        w -= dw
        if abs(dw) <= 1e-16 * (1.0 + abs(w)):
            break
    return w


@njit(cache=True)
def lambert_wm1_raw(x):
    """Lower branch W-1(x), -1/e <= x < 0.  Residual <= ~1e-12*max(1,|x|)."""
    p2 = 2.0 * (math.e * x + 1.0)
    if p2 <= 0.0:
        return -1.0
    if p2 < 0.5:
        p = math.sqrt(p2)
        w = -1.0 - p * (1.0 - p * (1.0 / 3.0 - p * (11.0 / 72.0)))
    else:
        # x -> 0-: W-1 ~ ln(-x) - ln(-ln(-x))
        lx = math.log(-x)
        w = lx - math.log(-lx)
    for _ in range(100):
        ew = math.exp(w)
        r = w * ew - x
        w1 = w + 1.0
        denom = ew * w1 - (w + 2.0) * r / (2.0 * w1)
        dw = r / denom
        w -= dw
        if abs(dw) <= 1e-16 * (1.0 + abs(w)):
            break
    return w


# ---------------------------------------------------------------------------
# Chernoff machinery
# ---------------------------------------------------------------------------


@njit(cache=True)
def chernoff_lower(chi, eps):
    """E^L[chi]: lower confidence bound on the mean of an observed count."""
    if chi <= 0.0:
        return 0.0
    t = math.log(0.5 * eps) / chi
    return chi * solve_rel_lower(t)


@njit(cache=True)
def chernoff_upper(chi, eps):
    """E^U[chi]: upper confidence bound; chi = 0 gives -ln(eps/2)."""
    if chi <= 0.0:
        return -math.log(0.5 * eps)
    t = math.log(0.5 * eps) / chi
    return chi * solve_rel_upper(t)


@njit(cache=True)
def observed_lower(mean, eps):
    """Largest m <= mean with Pr[X < m] <= eps for X of the given mean.

    Lower-tail Chernoff bound (e^-d / (1-d)^(1-d))^mean = eps solved for
    d via the W-1 branch; the argument ln(1+c), c = ln(eps)/mean, is exact
    so no branch-point accuracy is lost.
    """
    if mean <= 0.0:
        return 0.0
    c = math.log(eps) / mean
    if c <= -1.0:
        return 0.0  # mean below ln(1/eps): nothing above zero is guaranteed
    tp = math.log1p(c)
    up = solve_rel_upper(tp)
    return mean * math.exp(1.0 - up)


@njit(cache=True)
def sampling_gamma(a, b, c, d):
    """Random-sampling deviation term for the phase-error estimate.

    a: failure probability, b: observed error rate in the sampled basis,
    c: sampled-basis count, d: target-basis count.  Returns -1.0 when a
    count is non-positive (caller must zero the key).
    """
    if c <= 0.0 or d <= 0.0:
        return -1.0
    if b <= 0.0 or b >= 1.0:
        return math.sqrt((c + d) / (c * d) * 2.0 * math.log(1.0 / a))
    v = b * (1.0 - b)
    arg = (c + d) / (TWO_PI * c * d * v * a * a)
    if arg <= 1.0:
        return 0.0
    return math.sqrt((c + d) * v / (c * d) * math.log(arg))


# ---------------------------------------------------------------------------
# decoy-state single-photon bounds (shared by the public ops and the chain)
# ---------------------------------------------------------------------------


@njit(cache=True)
def yield_lower_from_bounds(el_mw, eu_ms, eu_mv, n_s, n_w, n_v, mu, nu):
    """Single-photon yield lower bound from the three detection-mean bounds.

    n_s, n_w, n_v are the pulse counts q^a N^zeta of the three intensities.
    Clamped to [0, 1].
    """
    y1 = (mu / (mu * nu - nu * nu)) * (
        (el_mw / n_w) * math.exp(nu)
        - (eu_ms / n_s) * math.exp(mu) * (nu * nu) / (mu * mu)
        - (eu_mv / n_v) * (mu * mu - nu * nu) / (mu * mu)
    )
    if y1 < 0.0:
        return 0.0
    if y1 > 1.0:
        return 1.0
    return y1


@njit(cache=True)
def m1_lower_from_yield(y1, n_zeta, mu, nu, qs, qw):
    """Single-photon detection count bound M1 from the yield bound."""
    return y1 * n_zeta * (math.exp(-mu) * mu * qs + math.exp(-nu) * nu * qw)


@njit(cache=True)
def p1_signal(mu, nu, qs, qw):
    """Probability that a single-photon pulse came from the signal state."""
    a = qs * math.exp(-mu) * mu
    b = qw * math.exp(-nu) * nu
    return a / (a + b)


@njit(cache=True)
def bit_error_upper_from_bounds(eu_emw, el_emv, y1, n_w, n_v, nu):
    """Single-photon bit-error upper bound, clamped to [0, 1/2].

    Requires y1 > 0 (caller zeroes the key otherwise).
    """
    e1 = ((eu_emw / n_w) * math.exp(nu) - el_emv / n_v) / (y1 * nu)
    if e1 < 0.0:
        return 0.0
    if e1 > 0.5:
        return 0.5
    return e1


@njit(cache=True)
def observables_basis(eta, y0, ed, n_zeta, mu, nu, qs, qw):
    """Asymptotic no-eavesdropper observables of one basis.

    Returns (n_s, n_w, n_v, m_s, m_w, m_v, em_s, em_w, em_v).
    """
    qv = 1.0 - qs - qw
    n_s = qs * n_zeta
    n_w = qw * n_zeta
    n_v = qv * n_zeta
    m_s = n_s * gain(y0, eta, mu)
    m_w = n_w * gain(y0, eta, nu)
    m_v = n_v * y0
    em_s = n_s * error_gain(y0, eta, ed, mu)
    em_w = n_w * error_gain(y0, eta, ed, nu)
    em_v = n_v * 0.5 * y0
    return n_s, n_w, n_v, m_s, m_w, m_v, em_s, em_w, em_v


@njit(cache=True)
def basis_bounds(n_s, n_w, n_v, m_s, m_w, m_v, em_w, em_v, mu, nu, qs, qw, eps):
    """Decoy bounds of one basis from its observables.

    Returns (y1, m1, m1s, e1b, eps_uses); e1b is -1.0 when y1 = 0.
    """
    n_zeta = n_s + n_w + n_v
    el_mw = chernoff_lower(m_w, eps)
    eu_ms = chernoff_upper(m_s, eps)
    eu_mv = chernoff_upper(m_v, eps)
    eu_emw = chernoff_upper(em_w, eps)
    el_emv = chernoff_lower(em_v, eps)
    y1 = yield_lower_from_bounds(el_mw, eu_ms, eu_mv, n_s, n_w, n_v, mu, nu)
    m1 = m1_lower_from_yield(y1, n_zeta, mu, nu, qs, qw)
    m1s = observed_lower(p1_signal(mu, nu, qs, qw) * m1, eps)
    uses = 6
    if y1 > 0.0:
        e1b = bit_error_upper_from_bounds(eu_emw, el_emv, y1, n_w, n_v, nu)
    else:
        e1b = -1.0
    return y1, m1, m1s, e1b, uses


@njit(cache=True)
def finite_key_chain(eta, y0, ed, f_ec, eps, n_pulses, mu, nu, qs, qw, pz):
    """Full finite-key evaluation of one channel at fixed protocol parameters.

    Returns (rate_per_pulse, k_total, k_z, k_x,
             y1_z, y1_x, m1s_z, m1s_x, e1b_z, e1b_x, e1ps_z, e1ps_x,
             eps_uses).
    """
    px = 1.0 - pz
    uses = 0.0

    # basis Z
    nz = pz * pz * n_pulses
    n_s_z, n_w_z, n_v_z, m_s_z, m_w_z, m_v_z, em_s_z, em_w_z, em_v_z = observables_basis(
        eta, y0, ed, nz, mu, nu, qs, qw
    )
    y1_z, _m1_z, m1s_z, e1b_z, u = basis_bounds(
        n_s_z, n_w_z, n_v_z, m_s_z, m_w_z, m_v_z, em_w_z, em_v_z, mu, nu, qs, qw, eps
    )
    uses += u

    # basis X
    nx = px * px * n_pulses
    n_s_x, n_w_x, n_v_x, m_s_x, m_w_x, m_v_x, em_s_x, em_w_x, em_v_x = observables_basis(
        eta, y0, ed, nx, mu, nu, qs, qw
    )
    y1_x, _m1_x, m1s_x, e1b_x, u = basis_bounds(
        n_s_x, n_w_x, n_v_x, m_s_x, m_w_x, m_v_x, em_w_x, em_v_x, mu, nu, qs, qw, eps
    )
    uses += u

    k_z = 0.0
    k_x = 0.0
    e1ps_z = 1.0
    e1ps_x = 1.0

    # Z key needs the X-basis bit error (random sampling across bases)
    if m1s_z > 0.0 and m1s_x > 0.0 and e1b_x >= 0.0:
        g = sampling_gamma(eps, e1b_x, m1s_x, m1s_z)
        uses += 1.0
        e1ps_z = e1b_x + g
        if e1ps_z > 0.5:
            e1ps_z = 0.5
        qber_z = em_s_z / m_s_z
        k_z = m1s_z * (1.0 - entropy_bits(e1ps_z)) - f_ec * m_s_z * entropy_bits(qber_z)
        if k_z < 0.0:
            k_z = 0.0

    if m1s_x > 0.0 and m1s_z > 0.0 and e1b_z >= 0.0:
        g = sampling_gamma(eps, e1b_z, m1s_z, m1s_x)
        uses += 1.0
        e1ps_x = e1b_z + g
        if e1ps_x > 0.5:
            e1ps_x = 0.5
        qber_x = em_s_x / m_s_x
        k_x = m1s_x * (1.0 - entropy_bits(e1ps_x)) - f_ec * m_s_x * entropy_bits(qber_x)
        if k_x < 0.0:
            k_x = 0.0

    k_total = k_z + k_x
    rate = k_total / n_pulses
    return (rate, k_total, k_z, k_x, y1_z, y1_x, m1s_z, m1s_x,
            e1b_z, e1b_x, e1ps_z, e1ps_x, uses)


@njit(cache=True)
def finite_key_rate(eta, y0, ed, f_ec, eps, n_pulses, mu, nu, qs, qw, pz):
    """Per-pulse secret-key rate only (optimizer inner loop)."""
    out = finite_key_chain(eta, y0, ed, f_ec, eps, n_pulses, mu, nu, qs, qw, pz)
    return out[0]


@njit(cache=True)
def rate_on_grid(eta, y0, ed, f_ec, eps, n_pulses, mu, nu, qs, qw, pz, coord, values, out):
    """Evaluate the rate along one coordinate axis (0=mu..4=pz) in one call.

    Fills ``out`` with the rates and returns the summed eps-invocation count.
    """
    uses = 0.0
    for i in range(values.shape[0]):
        v = values[i]
        m, n, s, w, p = mu, nu, qs, qw, pz
        if coord == 0:
            m = v
        elif coord == 1:
            n = v
        elif coord == 2:
            s = v
        elif coord == 3:
            w = v
        else:
            p = v
        res = finite_key_chain(eta, y0, ed, f_ec, eps, n_pulses, m, n, s, w, p)
        out[i] = res[0]
        uses += res[12]
    return uses


@njit(cache=True)
def asymptotic_rate(eta, y0, ed, f_ec, mu, qs, pz):
    """Asymptotic (N -> infinity) per-pulse decoy-state rate.

    Exact Poisson single-photon statistics; the decoy intensities drop out.
    """
    px = 1.0 - pz
    y1 = y0 + eta - y0 * eta
    if y1 <= 0.0:
        return 0.0
    e1 = (0.5 * y0 + ed * eta) / y1
    q_mu = gain(y0, eta, mu)
    e_mu_q = error_gain(y0, eta, ed, mu)
    term = mu * math.exp(-mu) * y1 * (1.0 - entropy_bits(min(e1, 0.5))) - f_ec * q_mu * entropy_bits(
        e_mu_q / q_mu
    )
    if term < 0.0:
        return 0.0
    return (pz * pz + px * px) * qs * term


# ---------------------------------------------------------------------------
# seven-band enumeration
# ---------------------------------------------------------------------------


@njit(cache=True)
def _rect_sum(sat, d1, r0, r1, c0, c1):
    """Block sum of rows [r0,r1) x cols [c0,c1) from the summed-area table."""
    return sat[r1 * d1 + c1] - sat[r0 * d1 + c1] - sat[r1 * d1 + c0] + sat[r0 * d1 + c0]


@njit(cache=True)
def layout_objective(sat, d, x1, v1, x2, v2, x3, v3, gap_pos, gap_len):
    """Raman objective of one band layout via the summed-area table.

    Bands run Q1 C1 Q2 C2 Q3 C3 left to right with the unused block of
    ``gap_len`` channels inserted after band ``gap_pos`` (1..5).  Rows of
    the table index classical wavelengths, columns quantum ones.
    """
    d1 = d + 1
    p = 0
    sq1 = p
    eq1 = p + x1
    p = eq1
    if gap_pos == 1:
        p += gap_len
    sc1 = p
    ec1 = p + v1
    p = ec1
    if gap_pos == 2:
        p += gap_len
    sq2 = p
    eq2 = p + x2
    p = eq2
    if gap_pos == 3:
        p += gap_len
    sc2 = p
    ec2 = p + v2
    p = ec2
    if gap_pos == 4:
        p += gap_len
    sq3 = p
    eq3 = p + x3
    p = eq3
    if gap_pos == 5:
        p += gap_len
    sc3 = p
    ec3 = p + v3

    obj = 0.0
    obj += _rect_sum(sat, d1, sc1, ec1, sq1, eq1)
    obj += _rect_sum(sat, d1, sc1, ec1, sq2, eq2)
    obj += _rect_sum(sat, d1, sc1, ec1, sq3, eq3)
    obj += _rect_sum(sat, d1, sc2, ec2, sq1, eq1)
    obj += _rect_sum(sat, d1, sc2, ec2, sq2, eq2)
    obj += _rect_sum(sat, d1, sc2, ec2, sq3, eq3)
    obj += _rect_sum(sat, d1, sc3, ec3, sq1, eq1)
    obj += _rect_sum(sat, d1, sc3, ec3, sq2, eq2)
    obj += _rect_sum(sat, d1, sc3, ec3, sq3, eq3)
    return obj


@njit(cache=True)
def seven_band_search(sat, d, n_qkd, n_data):
    """Enumerate all band splits and gap positions, keep the minimum.

    Iteration order (X1, X2, V1, V2, gap) with a strict '<' update keeps
    the lexicographically smallest argmin among exact ties.  Returns
    (x1, x2, v1, v2, gap, objective, cases_examined).
    """
    gap_len = d - n_qkd - n_data
    best = math.inf
    bx1 = bx2 = bv1 = bv2 = bg = -1
    cases = 0
    for x1 in range(n_qkd + 1):
        for x2 in range(n_qkd - x1 + 1):
            x3 = n_qkd - x1 - x2
            for v1 in range(n_data + 1):
                for v2 in range(n_data - v1 + 1):
                    v3 = n_data - v1 - v2
                    for g in range(1, 6):
                        cases += 1
                        obj = layout_objective(sat, d, x1, v1, x2, v2, x3, v3, g, gap_len)
                        if obj < best:
                            best = obj
                            bx1 = x1
                            bx2 = x2
                            bv1 = v1
                            bv2 = v2
                            bg = g
    return bx1, bx2, bv1, bv2, bg, best, cases
