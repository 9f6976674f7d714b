"""Fixed-step RK4 integration with located events.

The integrator works on ``y = [q, v]``. Between events the set of active
constraint rows (strings, welds, engaged travel stops, sticking contacts)
is fixed; it and the sliding directions define a *mode*. Within a mode the
accelerations are ``P Q`` and the multipliers ``S Q`` for precomputed
``P``/``S``. When every force is linear in the state, one RK4 step is an
affine map, computed once per mode.

Events inside a step (travel stops, collisions, a sliding contact coming
to rest) are located by bisection on the sub-step length, handled, and the
step is finished from the event state.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import SimulationError
from .model import Affine, CompiledModel, row_vector

VTOL = 1e-9  # relative speed treated as rest
GAP_TOL = 1e-9  # contact distance for simultaneous impulses
BISECT = 48
MAX_EVENTS = 200  # per step
POST_STOP = 150  # samples kept after a travel stop spike
SPIKE_TOL = 1e-6


@dataclass
class Mode:
    key: tuple
    rows: np.ndarray
    stick_rows: dict  # contact index -> row index
    slide: np.ndarray
    P: np.ndarray | None = None
    S: np.ndarray | None = None
    linear: bool = False
    Lq: np.ndarray | None = None
    lq: np.ndarray | None = None
    Lm: np.ndarray | None = None
    lm: np.ndarray | None = None
    steps: dict = field(default_factory=dict)


def _solve_rows(M: np.ndarray, A: np.ndarray):
    Minv = np.linalg.inv(M)
    if len(A) == 0:
        return Minv, np.zeros((0, len(M)))
    K = A @ Minv @ A.T
    S = np.linalg.pinv(K, rcond=1e-10) @ A @ Minv
    P = Minv - Minv @ A.T @ S
    return P, S


@dataclass
class RunResult:
    Y: np.ndarray
    QDD: np.ndarray
    TENS: np.ndarray
    FRIC: np.ndarray
    stops: list  # (sample index, limit id)
    diagnostic: str = ""


class Integrator:
    def __init__(self, model: CompiledModel):
        self.m = model
        n = self.n = model.n
        self.dt = model.dt
        self.Kq = np.zeros((n, n))
        self.Kv = np.zeros((n, n))
        self.f = np.zeros(n)
        self.fns = []
        for term in model.forces:
            if term.fn is not None:
                self.fns.append(term.fn)
                continue
            if term.Kq is not None:
                self.Kq += term.Kq
            if term.Kv is not None:
                self.Kv += term.Kv
            if term.f is not None:
                self.f += term.f
        self.linear = not self.fns and not model.variable_mass
        self.has_Kq, self.has_Kv = bool(self.Kq.any()), bool(self.Kv.any())
        self.M0 = model.mass_matrix()
        if model.variable_mass:
            # M(t) = M_fixed + sum over variable bodies of m_b(t) J_b^T J_b
            varying = [b for b in model.bodies if b.mass_fn is not None]
            self.var_terms = [(b.mass_fn, model.jacobian(b).T @ model.jacobian(b)) for b in varying]
            self.M_fixed = self.M0 - sum(b.mass * B for b, (_, B) in zip(varying, self.var_terms))

        self.rope_index = [i for i, s in enumerate(model.strings) if s.stiffness is None]
        base = [row_vector(model.strings[i].terms, n) for i in self.rope_index]
        base += [row_vector(w, n) for w in model.welds]
        self.base_rows = np.array(base).reshape(len(base), n)

        self.coulomb = []  # (contact index, row, limit)
        for ci, c in enumerate(model.contacts):
            if c.mode == "coulomb" and c.mu > 0 and c.normal_load > 0:
                self.coulomb.append((ci, row_vector(c.terms, n), c.mu * c.normal_load))
        self.G = np.array([r for _, r, _ in self.coulomb]).reshape(len(self.coulomb), n)
        self.limit_rows = np.array([row_vector(L.terms, n) for L in model.limits]).reshape(len(model.limits), n)
        self.lo = np.array([L.lo for L in model.limits])
        self.hi = np.array([L.hi for L in model.limits])
        self._setup_collisions()

        self.modes: dict = {}
        self.phase = 0
        self.active: frozenset = frozenset()
        self.fstate: tuple = (0,) * len(self.coulomb)
        self.mode: Mode | None = None
        self.spike = np.zeros(n)
        self.stop_hits: list = []

    # -- collisions ---------------------------------------------------------

    def _setup_collisions(self):
        n = self.n
        m = self.m
        sph, ax = [], []
        for c in m.collisions:
            Ja = m.jacobian(m.body(c.a)) if c.a else np.zeros((3, n))
            Jb = m.jacobian(m.body(c.b)) if c.b else np.zeros((3, n))
            pa = m.body(c.a).kin.p0 if c.a else np.zeros(3)
            pb = m.body(c.b).kin.p0 if c.b else np.zeros(3)
            if c.kind == "sphere":
                sph.append((Jb - Ja, pb - pa, c.radius_a + c.radius_b, c.restitution))
            else:
                if c.a is None:
                    G, g0 = Jb[0], pb[0] - c.radius_b - c.wall_x
                elif c.b is None:
                    G, g0 = -Ja[0], c.wall_x - pa[0] - c.radius_a
                else:
                    G, g0 = Jb[0] - Ja[0], pb[0] - pa[0] - c.radius_a - c.radius_b
                ax.append((G, g0, c.restitution))
        self.sD = np.array([s[0] for s in sph]).reshape(len(sph), 3, n)
        self.sd0 = np.array([s[1] for s in sph]).reshape(len(sph), 3)
        self.sR = np.array([s[2] for s in sph])
        self.se = np.array([s[3] for s in sph])
        self.aG = np.array([a[0] for a in ax]).reshape(len(ax), n)
        self.ag0 = np.array([a[1] for a in ax])
        self.ae = np.array([a[2] for a in ax])
        self.has_collisions = bool(sph or ax)

    def _contacts(self, y):
        """Gap, approach rate, generalized normal row and restitution per collision pair."""
        q, v = y[: self.n], y[self.n:]
        gaps, rates, rows, es = [], [], [], []
        if len(self.sR):
            d = self.sd0 + self.sD @ q
            dist = np.linalg.norm(d, axis=1)
            nrm = d / dist[:, None]
            G = np.einsum("pi,pin->pn", nrm, self.sD)
            gaps.append(dist - self.sR)
            rates.append(G @ v)
            rows.append(G)
            es.append(self.se)
        if len(self.ag0):
            gaps.append(self.ag0 + self.aG @ q)
            rates.append(self.aG @ v)
            rows.append(self.aG)
            es.append(self.ae)
        return np.concatenate(gaps), np.concatenate(rates), np.vstack(rows), np.concatenate(es)

    def _resolve_collisions(self, y):
        n = self.n
        v = y[n:].copy()
        W = self._inverse_mass(y)
        for _ in range(10000):
            gap, rate, G, e = self._contacts(np.concatenate([y[:n], v]))
            hit = (gap <= GAP_TOL) & (rate < 0)
            if not hit.any():
                break
            i = int(np.argmin(np.where(hit, rate, np.inf)))
            k = G[i] @ W @ G[i]
            if k <= 0:
                break
            v = v + W @ G[i] * (-(1 + e[i]) * rate[i] / k)
        else:
            raise SimulationError("collision resolution did not converge")
        return np.concatenate([y[:n], v])

    # -- modes --------------------------------------------------------------

    def _mass(self, t):
        if not self.m.variable_mass:
            return self.M0
        M = self.M_fixed.copy()
        for fn, B in self.var_terms:
            M += float(fn(t)) * B
        return M

    def _inverse_mass(self, y, t=None):
        """Inverse mass restricted to the current constraint set."""
        M = self._mass(self.t if t is None else t)
        P, _ = _solve_rows(M, self.mode.rows)
        return P

    def _get_mode(self, active, fstate) -> Mode:
        key = (active, fstate)
        mode = self.modes.get(key)
        if mode is not None:
            return mode
        n = self.n
        rows = [self.base_rows] + [self.limit_rows[sorted(active)]] if active else [self.base_rows]
        stick = {}
        slide = np.zeros(n)
        extra = []
        for k, ((ci, g, lim), s) in enumerate(zip(self.coulomb, fstate)):
            if s == 0:
                stick[k] = len(self.base_rows) + len(active) + len(extra)
                extra.append(g)
            else:
                slide -= lim * s * g
        if extra:
            rows.append(np.array(extra))
        A = np.vstack(rows) if rows else np.zeros((0, n))
        mode = Mode(key, A, stick, slide)
        if not self.m.variable_mass:
            mode.P, mode.S = _solve_rows(self.M0, A)
        if self.linear:
            KK = np.hstack([self.Kq, self.Kv])
            ff = self.f + slide
            mode.linear = True
            mode.Lq, mode.lq = mode.P @ KK, mode.P @ ff
            mode.Lm, mode.lm = mode.S @ KK, mode.S @ ff
        self.modes[key] = mode
        return mode

    def _set_mode(self):
        self.mode = self._get_mode(self.active, self.fstate)

    def accel(self, t, y, mode=None):
        mode = mode or self.mode
        n = self.n
        if mode.linear:
            return mode.Lq @ y + mode.lq, mode.Lm @ y + mode.lm
        q, v = y[:n], y[n:]
        Q = self.f + mode.slide
        if self.has_Kq:
            Q = Q + self.Kq @ q
        if self.has_Kv:
            Q = Q + self.Kv @ v
        for fn in self.fns:
            Q = Q + fn(t, q, v, self.phase)
        if self.m.variable_mass:
            P, S = _solve_rows(self._mass(t), mode.rows)
        else:
            P, S = mode.P, mode.S
        return P @ Q, S @ Q

    def _decide_friction(self, t, y):
        """Choose stick or slide for every Coulomb contact at state ``y``."""
        if not self.coulomb:
            self.fstate = ()
            self._set_mode()
            return
        v = y[self.n:]
        vrel = self.G @ v
        state = [int(np.sign(x)) if abs(x) > VTOL else 0 for x in vrel]
        resting = [k for k, x in enumerate(vrel) if abs(x) <= VTOL]
        # flip the worst inconsistency until sticking forces fit inside the
        # friction cone and every contact set sliding accelerates its own way
        for _ in range(4 * len(state) + 4):
            mode = self._get_mode(self.active, tuple(state))
            qdd, mu = self.accel(t, y, mode)
            worst, flip = 0.0, None
            for k in resting:
                lim = self.coulomb[k][2]
                if state[k] == 0:
                    F = -mu[mode.stick_rows[k]]
                    excess = abs(F) / lim - 1
                    if excess > 1e-9 and excess > worst:
                        worst, flip = excess, (k, -int(np.sign(F)))
                else:
                    arel = state[k] * (self.G[k] @ qdd)
                    if arel < -1e-12 and -arel > worst:
                        worst, flip = -arel, (k, 0)
            if flip is None:
                break
            state[flip[0]] = flip[1]
        self.fstate = tuple(state)
        self._set_mode()

    # -- stepping -----------------------------------------------------------

    def _deriv(self, t, y):
        qdd, _ = self.accel(t, y)
        return np.concatenate([y[self.n:], qdd])

    def _rk4(self, t, y, h, k1=None):
        if k1 is None:
            k1 = self._deriv(t, y)
        k2 = self._deriv(t + h / 2, y + h / 2 * k1)
        k3 = self._deriv(t + h / 2, y + h / 2 * k2)
        k4 = self._deriv(t + h, y + h * k3)
        return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    def _linear_map(self, h):
        mode = self.mode
        hit = mode.steps.get(h)
        if hit is None:
            n2 = 2 * self.n
            A = np.zeros((n2, n2))
            A[: self.n, self.n:] = np.eye(self.n)
            A[self.n:] = mode.Lq
            b = np.concatenate([np.zeros(self.n), mode.lq])
            hA = h * A
            T = np.eye(n2) + hA / 2 + hA @ hA / 6 + hA @ hA @ hA / 24
            hit = (np.eye(n2) + h * T @ A, h * T @ b)
            mode.steps[h] = hit
        return hit

    def _step(self, t, y, h, k1=None):
        if self.mode.linear and h == self.dt:
            Phi, phi = self._linear_map(h)
            return Phi @ y + phi
        return self._rk4(t, y, h, k1)

    def _violations(self, y):
        n = self.n
        q, v = y[:n], y[n:]
        out = {}
        if len(self.lo):
            val = self.limit_rows @ q
            bad = (val < self.lo) | (val > self.hi)
            if self.active:
                bad[list(self.active)] = False
            if bad.any():
                out["limit"] = np.flatnonzero(bad)
        if self.has_collisions:
            gap, rate, _, _ = self._contacts(y)
            if ((gap < 0) & (rate < 0)).any():
                out["collision"] = True
        if self.coulomb:
            vrel = self.G @ v
            # a saturated contact held at rest by other rows jitters around zero
            cross = [k for k, s in enumerate(self.fstate) if s != 0 and s * vrel[k] < -VTOL]
            if cross:
                out["rest"] = cross
        return out

    def _handle(self, t, y):
        n = self.n
        viol = self._violations(y)
        v_before = y[n:].copy()
        if "limit" in viol:
            self.active = self.active | frozenset(int(j) for j in viol["limit"])
            self._set_mode()
            # inelastic stop: remove the approach velocity along every active row
            P = self._inverse_mass(y, t)
            y = np.concatenate([y[:n], P @ self._mass(t) @ y[n:]])
            self.stop_hits.extend(self.m.limits[int(j)].id for j in viol["limit"])
            self.spike += y[n:] - v_before
        if "collision" in viol:
            y = self._resolve_collisions(y)
        if "rest" in viol:
            for k in viol["rest"]:
                g = self.coulomb[k][1]
                A = np.vstack([self.mode.rows, g])
                P, _ = _solve_rows(self._mass(t), A)
                y = np.concatenate([y[:n], P @ self._mass(t) @ y[n:]])
        self._decide_friction(t, y)
        return y

    def _advance(self, t0, y, h, k1=None):
        """Advance one sample interval; ``k1`` is the derivative at (t0, y) if known."""
        t, rem = t0, h
        count = 0
        while rem > 1e-12 * h:
            step = rem
            sched = None
            for te, _name in self.m.events[self.phase:]:
                if te <= t + 1e-12 * h:
                    self.phase += 1  # reached exactly at the end of the previous step
                elif te <= t + rem * (1 + 1e-12):
                    step, sched = min(te - t, rem), te
                break
            y1 = self._step(t, y, step, k1 if t == t0 else None)
            self.t = t
            if not self._violations(y1):
                y, t, rem = y1, t + step, rem - step
                if sched is not None:
                    self.phase += 1
                    self._decide_friction(t, y)
                continue
            lo, hi = 0.0, 1.0
            for _ in range(BISECT):
                mid = 0.5 * (lo + hi)
                if self._violations(self._rk4(t, y, mid * step)):
                    hi = mid
                else:
                    lo = mid
            y = self._rk4(t, y, hi * step)
            t, rem = t + hi * step, rem - hi * step
            y = self._handle(t, y)
            count += 1
            if count > MAX_EVENTS:
                raise SimulationError(f"more than {MAX_EVENTS} events within one step at t={t0:.6g}")
        # a sticking contact may need more friction than it can hold
        if any(s == 0 for s in self.fstate):
            _, mu = self.accel(t, y)
            for k, row in self.mode.stick_rows.items():
                if abs(mu[row]) > self.coulomb[k][2] * (1 + 1e-9):
                    self._decide_friction(t, y)
                    break
        return y

    def run(self, stop_after_spike: bool = True) -> RunResult:
        m = self.m
        n = self.n
        N = int(round(m.horizon / m.dt))
        if N < 1:
            raise SimulationError("zero-length horizon")
        Y = np.zeros((N + 1, 2 * n))
        QDD = np.zeros((N + 1, n))
        nc = len(m.contacts)
        TENS = np.zeros((N + 1, len(self.rope_index)))
        FRIC = np.zeros((N + 1, nc))
        mode_at: list = [None] * (N + 1)
        spikes = np.zeros((N + 1, n))
        stops = []
        y = np.concatenate([m.q0, m.v0])
        self.t = 0.0
        self.active = frozenset()
        self._set_mode()
        self._decide_friction(0.0, y)
        stop_at = None
        diagnostic = ""
        last = N
        for k in range(N + 1):
            t = k * m.dt
            Y[k] = y
            mode_at[k] = (self.mode, self.phase)
            k1 = None
            if not self.mode.linear:
                QDD[k], mu = self.accel(t, y)
                self._readout(k, mu, self.mode, TENS, FRIC)
                k1 = np.concatenate([y[n:], QDD[k]])
            if k == N or (stop_at is not None and k >= stop_at):
                last = k
                break
            self.spike = np.zeros(n)
            self.stop_hits = []
            try:
                y_new = self._advance(t, y, m.dt, k1)
            except SimulationError as exc:
                diagnostic = str(exc)
                last = k
                break
            if not np.all(np.isfinite(y_new)):
                diagnostic = f"non-finite state after t={t:.6g}"
                last = k
                break
            if self.stop_hits:
                stops.extend((k + 1, sid) for sid in self.stop_hits)
                if np.abs(self.spike).max() > SPIKE_TOL:
                    spikes[k + 1] += self.spike / m.dt
                    if stop_after_spike and stop_at is None:
                        stop_at = k + 1 + POST_STOP
            y = y_new
        # accelerations of linear modes, evaluated in bulk
        groups: dict = {}
        for k in range(last + 1):
            mode = mode_at[k][0]
            if mode.linear:
                groups.setdefault(id(mode), (mode, []))[1].append(k)
        for mode, ks in groups.values():
            idx = np.array(ks)
            QDD[idx] = Y[idx] @ mode.Lq.T + mode.lq
            mus = Y[idx] @ mode.Lm.T + mode.lm
            for j, k in enumerate(ks):
                self._readout(k, mus[j], mode, TENS, FRIC)
        QDD += spikes
        sl = slice(0, last + 1)
        return RunResult(Y[sl], QDD[sl], TENS[sl], FRIC[sl], stops, diagnostic)

    def _readout(self, k, mu, mode, TENS, FRIC):
        nr = len(self.rope_index)
        if nr:
            TENS[k] = mu[:nr]
        state = mode.key[1]
        for j, (ci, g, lim) in enumerate(self.coulomb):
            if state[j] == 0:
                FRIC[k, ci] = -mu[mode.stick_rows[j]]
            else:
                FRIC[k, ci] = -lim * state[j]
