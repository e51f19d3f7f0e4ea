"""Implicit sub-solvers for the splitting scheme.

Each step assembles one monolithic linear system over all subdomains
(bulk, fractures, intersections) and solves it with the direct sparse
path. Flow uses TPFA with the aperture-dependent coupling law; heat and
solute share a generic implicit Euler upwind/TPFA transport solve.

Boundary conventions follow the flow problem: segments with an essential
pressure condition also carry the essential temperature/solute data on
inflow, while walls are no-flux throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import constitutive as cl
from .constitutive import PhysParams
from .discretize import (COUPLING, INTERSECT, Topology,
                         boundary_transmissibilities, transmissibilities)
from .errors import WellPosednessError
from .linsolve import assemble_arrays, solve

DIRICHLET = "dirichlet"
OUTFLOW = "outflow"
FLUX = "flux"
PRESSURE = "pressure"


@dataclass(frozen=True)
class SegmentBC:
    """Boundary data of one named segment, one entry per equation.

    Each entry is (kind, value); values may be callables of time.
    Flow kinds: ``pressure`` (essential) or ``flux`` (outward normal
    flux datum). Transport kinds (heat, solute): ``dirichlet``
    (essential value, also used for advective inflow), ``outflow``
    (advective upwind only) or ``flux`` (outward total flux datum).
    """

    flow: tuple = (FLUX, 0.0)
    heat: tuple = (FLUX, 0.0)
    solute: tuple = (FLUX, 0.0)


BoundarySpec = dict  # tag -> SegmentBC


@dataclass
class FieldState:
    """Primary fields as flat per-dof arrays (bulk, fractures,
    intersections concatenated); ``pore`` holds porosity on bulk dofs
    and aperture / cross-section on lower-dimensional dofs."""

    p: np.ndarray
    theta: np.ndarray
    u: np.ndarray
    w: np.ndarray
    pore: np.ndarray
    w_prev: np.ndarray
    react_prev: np.ndarray | None = None   # last reaction increment of w
    conn_flux: np.ndarray | None = None
    bnd_flux: np.ndarray | None = None

    def copy(self) -> "FieldState":
        return FieldState(
            p=self.p.copy(), theta=self.theta.copy(), u=self.u.copy(),
            w=self.w.copy(), pore=self.pore.copy(), w_prev=self.w_prev.copy(),
            react_prev=None if self.react_prev is None else self.react_prev.copy(),
            conn_flux=None if self.conn_flux is None else self.conn_flux.copy(),
            bnd_flux=None if self.bnd_flux is None else self.bnd_flux.copy())


def value_at(v, t: float) -> float:
    return float(v(t)) if callable(v) else float(v)


def _resolve_bc(top: Topology, bc: BoundarySpec, equation: str, t: float):
    """Per-boundary-face (kind, value) arrays for one equation."""
    kinds = []
    values = np.empty(len(top.b_dof))
    for i, tag in enumerate(top.b_tag):
        if tag not in bc:
            raise WellPosednessError(f"no boundary condition for segment {tag!r}")
        kind, val = getattr(bc[tag], equation)
        kinds.append(kind)
        values[i] = value_at(val, t)
    return kinds, values


# ---------------------------------------------------------------------------
# flow


def flow_coefficients(top: Topology, pore_star, params: PhysParams):
    """Per-dof mobility and per-connection interface resistance for the
    Darcy solve, evaluated at the extrapolated pore fractions."""
    lay = top.layout
    coef = np.ones(lay.ndof)
    coef[lay.is_bulk] = cl.kozeny_permeability(
        pore_star[lay.is_bulk], params) / params.mu
    eps_f = pore_star[lay.is_frac]
    coef[lay.is_frac] = eps_f * cl.cubic_law(
        eps_f, params.kgamma0, params.epsgamma0) / params.mu

    resist = np.zeros(top.n_conn)
    cpl = top.kind == COUPLING
    if np.any(cpl):
        eps = pore_star[top.low_dof[cpl]]
        kappa = cl.cubic_law(eps, params.kappagamma0, params.epsgamma0)
        resist[cpl] = _interface_resistance(eps, kappa, params.mu)
    isc = top.kind == INTERSECT
    if np.any(isc):
        eps = pore_star[top.low_dof[isc]]
        kappa = cl.cubic_law(eps, params.kappaiota0, params.epsiota0)
        resist[isc] = _interface_resistance(eps, kappa, params.mu)
    return coef, resist


def _interface_resistance(eps, kappa, scale):
    """scale*eps/kappa with a blocked (infinite) interface at zero
    permeability; the transmissibility then collapses to zero and the
    lower-dimensional object decouples."""
    eps = np.asarray(eps, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    out = np.full(eps.shape, np.inf)
    ok = kappa > 0
    out[ok] = scale * eps[ok] / kappa[ok]
    return out


def darcy_step(top: Topology, pore_star, pore_n, params: PhysParams,
               bc: BoundarySpec, dt: float, t: float, source=None):
    """Implicit Euler Darcy solve over all subdomains.

    The pore-fraction change acts as an additional source. Returns
    (pressure, connection fluxes, boundary fluxes); fluxes are positive
    from ci to cj / outward.
    """
    lay = top.layout
    coef, resist = flow_coefficients(top, pore_star, params)
    t_conn = transmissibilities(top, coef, resist)
    t_bnd = boundary_transmissibilities(top, coef)

    kinds, values = _resolve_bc(top, bc, "flow", t)
    if not any(k == PRESSURE for k in kinds):
        raise WellPosednessError(
            "flow problem needs at least one essential pressure segment")

    rhs = -(np.asarray(pore_star) - np.asarray(pore_n)) * lay.measure / dt
    if source is not None:
        rhs = rhs + np.asarray(source, dtype=float)

    rows = [top.ci, top.ci, top.cj, top.cj]
    cols = [top.ci, top.cj, top.cj, top.ci]
    vals = [t_conn, -t_conn, t_conn, -t_conn]
    for i, kind in enumerate(kinds):
        d = top.b_dof[i]
        if kind == PRESSURE:
            rows.append([d]); cols.append([d]); vals.append([t_bnd[i]])
            rhs[d] += t_bnd[i] * values[i]
        elif kind == FLUX:
            rhs[d] -= values[i] * top.b_area[i]
        else:
            raise WellPosednessError(f"unknown flow boundary kind {kind!r}")

    system = assemble_arrays(np.concatenate([np.atleast_1d(r) for r in rows]),
                             np.concatenate([np.atleast_1d(c) for c in cols]),
                             np.concatenate([np.atleast_1d(v) for v in vals]),
                             lay.ndof, rhs)
    p = solve(system, tol=1e-10)

    conn_flux = t_conn * (p[top.ci] - p[top.cj])
    bnd_flux = np.empty(len(top.b_dof))
    for i, kind in enumerate(kinds):
        if kind == PRESSURE:
            bnd_flux[i] = t_bnd[i] * (p[top.b_dof[i]] - values[i])
        else:
            bnd_flux[i] = values[i] * top.b_area[i]
    return p, conn_flux, bnd_flux


# ---------------------------------------------------------------------------
# generic implicit upwind/TPFA transport


def transport_step(top: Topology, coef, resist, acc_new, acc_old, x_old,
                   conn_flux, bnd_flux, adv_scale, kinds, values, dt,
                   source=None, reaction_diag=None, reaction_rhs=None):
    """One implicit Euler step of

        acc_new*x - acc_old*x_old + dt*(div of advective+diffusive flux)
            = dt*source

    with upstream advective face values and TPFA diffusion. Returns
    (x_new, boundary total fluxes) where the boundary fluxes are the
    outward advective+diffusive fluxes consistent with the solve, for
    mass audits.
    """
    lay = top.layout
    t_conn = transmissibilities(top, coef, resist)
    t_bnd = boundary_transmissibilities(top, coef)
    f = adv_scale * np.asarray(conn_flux, dtype=float)
    fb = adv_scale * np.asarray(bnd_flux, dtype=float)
    fp, fm = np.maximum(f, 0.0), np.minimum(f, 0.0)

    rhs = np.asarray(acc_old, dtype=float) * np.asarray(x_old, dtype=float)
    if source is not None:
        rhs = rhs + dt * np.asarray(source, dtype=float)

    diag = np.asarray(acc_new, dtype=float).copy()
    if reaction_diag is not None:
        diag = diag + dt * np.asarray(reaction_diag, dtype=float)
    if reaction_rhs is not None:
        rhs = rhs + dt * np.asarray(reaction_rhs, dtype=float)

    rows = [np.arange(lay.ndof),
            top.ci, top.ci, top.cj, top.cj,       # diffusion
            top.ci, top.ci, top.cj, top.cj]       # advection (upwind)
    cols = [np.arange(lay.ndof),
            top.ci, top.cj, top.cj, top.ci,
            top.ci, top.cj, top.cj, top.ci]
    vals = [diag,
            dt * t_conn, -dt * t_conn, dt * t_conn, -dt * t_conn,
            dt * fp, dt * fm, -dt * fm, -dt * fp]

    brows, bcols, bvals = [], [], []
    for i, kind in enumerate(kinds):
        d = top.b_dof[i]
        g = values[i]
        if kind == DIRICHLET:
            brows.append(d); bcols.append(d); bvals.append(dt * t_bnd[i])
            rhs[d] += dt * t_bnd[i] * g
            if fb[i] >= 0:
                brows.append(d); bcols.append(d); bvals.append(dt * fb[i])
            else:
                rhs[d] -= dt * fb[i] * g
        elif kind == OUTFLOW:
            if fb[i] >= 0:
                brows.append(d); bcols.append(d); bvals.append(dt * fb[i])
            else:
                rhs[d] -= dt * fb[i] * g
        elif kind == FLUX:
            rhs[d] -= dt * g * top.b_area[i]
        else:
            raise WellPosednessError(f"unknown transport boundary kind {kind!r}")

    system = assemble_arrays(
        np.concatenate(rows + [np.asarray(brows, dtype=int)]),
        np.concatenate(cols + [np.asarray(bcols, dtype=int)]),
        np.concatenate(vals + [np.asarray(bvals, dtype=float)]),
        lay.ndof, rhs)
    x = solve(system, tol=1e-10)

    bnd_total = np.zeros(len(top.b_dof))
    for i, kind in enumerate(kinds):
        d = top.b_dof[i]
        g = values[i]
        adv = fb[i] * x[d] if fb[i] >= 0 else fb[i] * g
        if kind == DIRICHLET:
            bnd_total[i] = t_bnd[i] * (x[d] - g) + adv
        elif kind == OUTFLOW:
            bnd_total[i] = adv
        else:
            bnd_total[i] = g * top.b_area[i]
    return x, bnd_total


# ---------------------------------------------------------------------------
# heat and solute wrappers


def heat_step(top: Topology, state: FieldState, conn_flux, bnd_flux,
              pore_star, pore_n, params: PhysParams, bc: BoundarySpec,
              dt: float, t: float, source=None):
    """Implicit Euler heat solve with effective properties evaluated at
    the extrapolated pore fractions."""
    lay = top.layout
    coef = np.ones(lay.ndof)
    coef[lay.is_bulk] = cl.effective_conductivity(pore_star[lay.is_bulk], params)
    coef[lay.is_frac] = pore_star[lay.is_frac] * params.lambdaw

    resist = _transport_resistances(top, pore_star, params.lambdaw, params.lambdaw)

    acc_new = np.empty(lay.ndof)
    acc_old = np.empty(lay.ndof)
    acc_new[lay.is_bulk] = cl.effective_heat_capacity(
        pore_star[lay.is_bulk], params) * lay.measure[lay.is_bulk]
    acc_old[lay.is_bulk] = cl.effective_heat_capacity(
        pore_n[lay.is_bulk], params) * lay.measure[lay.is_bulk]
    low = ~lay.is_bulk
    acc_new[low] = params.rhow_cw * pore_star[low] * lay.measure[low]
    acc_old[low] = params.rhow_cw * pore_n[low] * lay.measure[low]

    kinds, values = _resolve_bc(top, bc, "heat", t)
    theta, bnd_total = transport_step(
        top, coef, resist, acc_new, acc_old, state.theta, conn_flux, bnd_flux,
        params.rhow_cw, kinds, values, dt, source=source)
    return theta, bnd_total


def solute_ad_step(top: Topology, state: FieldState, conn_flux, bnd_flux,
                   pore_star, pore_n, params: PhysParams, bc: BoundarySpec,
                   dt: float, t: float, source=None):
    """Implicit Euler advection-diffusion solve for the solute with the
    reaction term set to zero."""
    lay = top.layout
    coef = np.ones(lay.ndof)
    coef[lay.is_bulk] = pore_star[lay.is_bulk] * params.d
    coef[lay.is_frac] = pore_star[lay.is_frac] * params.dgamma

    resist = _transport_resistances(top, pore_star, params.deltagamma,
                                    params.deltagamma)

    acc_new = pore_star * top.layout.measure
    acc_old = pore_n * top.layout.measure

    kinds, values = _resolve_bc(top, bc, "solute", t)
    u, bnd_total = transport_step(
        top, coef, resist, acc_new, acc_old, state.u, conn_flux, bnd_flux,
        1.0, kinds, values, dt, source=source)
    return u, bnd_total


def _transport_resistances(top: Topology, pore_star, normal_coef_gamma,
                           normal_coef_iota):
    """Interface resistance eps/coef on couplings and intersections."""
    resist = np.zeros(top.n_conn)
    for kind, ncoef in ((COUPLING, normal_coef_gamma),
                        (INTERSECT, normal_coef_iota)):
        m = top.kind == kind
        if np.any(m):
            resist[m] = _interface_resistance(
                pore_star[top.low_dof[m]], np.full(np.count_nonzero(m), ncoef),
                1.0)
    return resist
