"""Period matrices assembled from open-segment integrals.

A cycle is a list of pieces ``(start, end, labels, coef)``: the straight
segment between branch points ``start`` and ``end`` (1-based, 0 for infinity)
integrated with the radical label that continues from ``labels[0]`` just
after leaving ``start``.  ``labels[-1]`` is the expected label on arrival and
is checked against the continuation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .algebra import HYPERELLIPTIC, CurveSpec
from .cohomology import DifferentialBasis, first_kind_basis, second_kind_basis
from .quad import TOL, Integrand, integrate_ray, integrate_segment
from .sheets import LabelRun, PathSegment, SheetAtlas, build_atlas, line, polygon_labels, track

log = logging.getLogger(__name__)

TAU_GATE = 1e-6
LEGENDRE_GATE = 1e-6
TEMPLATE_CLOSURE = 1e-6


class PlanError(ValueError):
    pass


class PeriodGateError(RuntimeError):
    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class Piece:
    start: int
    end: int
    labels: tuple[int, ...]
    coef: complex = 1.0

    @classmethod
    def parse(cls, start: int, end: int, labels: str, coef: complex = 1.0) -> "Piece":
        """Labels as printed for trigonal curves, '3-1' means 3 becoming 1 (1-based)."""
        return cls(start, end, tuple(int(k) - 1 for k in labels.split("-")), coef)

    def __str__(self):
        lab = "-".join(str(k + 1) for k in self.labels)
        c = "" if self.coef == 1 else f"{self.coef.real:g}*" if not isinstance(self.coef, complex) or self.coef.imag == 0 else f"{self.coef}*"
        return f"{c}A[{lab}]_{self.start},{self.end}"


Cycle = tuple[Piece, ...]


@dataclass(frozen=True)
class HomologyPlan:
    a_cycles: tuple[Cycle, ...]
    b_cycles: tuple[Cycle, ...]
    name: str = "manual"

    @property
    def genus(self) -> int:
        return len(self.a_cycles)

    def pieces(self):
        for cyc in (*self.a_cycles, *self.b_cycles):
            yield from cyc

    def to_dict(self) -> dict:
        return {"name": self.name,
                "a_cycles": [[str(p) for p in c] for c in self.a_cycles],
                "b_cycles": [[str(p) for p in c] for c in self.b_cycles]}


# -- segment integrals ---------------------------------------------------------

@dataclass
class SegmentTable:
    """Cached integrals of the first and second kind bases over pieces."""

    atlas: SheetAtlas
    tol: float = TOL
    first: DifferentialBasis | None = None
    second: DifferentialBasis | None = None
    _runs: dict = field(default_factory=dict)
    _vals: dict = field(default_factory=dict)

    def __post_init__(self):
        curve = self.atlas.curve
        self.first = self.first or first_kind_basis(curve)
        if self.second is None:
            try:
                self.second = second_kind_basis(curve)
            except NotImplementedError:
                self.second = None
        sol = self.atlas.solutions
        self._int1 = Integrand(sol, self.first.evaluate)
        self._int2 = Integrand(sol, self.second.evaluate) if self.second is not None else None

    def segment(self, i: int, j: int) -> PathSegment:
        e = self.atlas.e
        N = self.atlas.N
        if i == 0 and j == 1:
            return self.atlas.base_path[0]
        if i == N and j == 0:
            return self.atlas.base_path[-1]
        if 0 in (i, j):
            raise PlanError(f"rays are available only as (0,1) and ({N},0); got ({i},{j})")
        return PathSegment(e[i - 1], e[j - 1], i, j, "finite-line")

    def run(self, i: int, j: int, label: int) -> LabelRun:
        """Label run along the piece, oriented from i to j."""
        key = (i, j, label)
        if key in self._runs:
            return self._runs[key]
        atlas = self.atlas
        sol = atlas.solutions
        e = atlas.e
        r = atlas.detour
        if i == 0:  # inward along the left ray: label is the one far away
            tr = track(sol, line(e[0] - atlas.r_inf, e[0] - r), label)
            out = LabelRun(tuple(tr.labels), tuple(atlas.r_inf - b * (atlas.r_inf - r) for b in tr.breaks))
        elif j == 0:
            tr = track(sol, line(e[-1] + r, e[-1] + atlas.r_inf), label)
            out = LabelRun(tuple(tr.labels), tuple(r + b * (atlas.r_inf - r) for b in tr.breaks))
        else:
            a, b = e[i - 1], e[j - 1]
            L = abs(b - a)
            others = np.delete(e, [i - 1, j - 1])
            if others.size:
                t = np.clip(((others - a) * np.conj(b - a)).real / L ** 2, 0, 1)
                if np.min(np.abs(a + (b - a) * t - others)) < 1e-6 * max(1.0, L):
                    raise PlanError(f"segment {i}->{j} passes through another branch point")
            tr = track(sol, line(a, b), label, r / L, 1 - r / L)
            out = LabelRun(tuple(tr.labels), tuple(tr.breaks))
        self._runs[key] = out
        return out

    def integral(self, i: int, j: int, label: int, kind: str = "first") -> np.ndarray:
        key = (i, j, label, kind)
        if key in self._vals:
            return self._vals[key]
        integrand = self._int1 if kind == "first" else self._int2
        if integrand is None:
            raise NotImplementedError("no second kind basis for this curve")
        run = self.run(i, j, label)
        r = self.atlas.detour  # tracking starts this far from branch points
        if i == 0:  # stored ray points outward: integrate outward and negate
            seg = self.segment(0, 1)
            outward = LabelRun(run.labels[::-1], tuple(b for b in run.breaks[::-1]))
            val = -integrate_ray(integrand, seg, outward, tol=self.tol, anchor_radius=r,
                                 far_radius=self.atlas.r_inf).value
        elif j == 0:
            val = integrate_ray(integrand, self.segment(i, 0), run, tol=self.tol, anchor_radius=r,
                                far_radius=self.atlas.r_inf).value
        else:
            val = integrate_segment(integrand, self.segment(i, j), run, tol=self.tol, anchor_radius=r).value
        self._vals[key] = np.asarray(val)
        return self._vals[key]

    def check_piece(self, p: Piece) -> None:
        run = self.run(p.start, p.end, p.labels[0])
        if run.end != p.labels[-1]:
            raise PlanError(f"{p}: continuation arrives with label {run.end + 1}, plan expects {p.labels[-1] + 1}")

    def combine(self, pieces, kind: str = "first") -> np.ndarray:
        total = 0
        for p in pieces:
            total = total + p.coef * self.integral(p.start, p.end, p.labels[0], kind)
        return np.asarray(total)


def validate_plan(table: SegmentTable, plan: HomologyPlan) -> None:
    """Every piece must follow the continuation, and cycles must chain at vertices."""
    atlas = table.atlas
    if plan.genus != atlas.curve.genus or len(plan.b_cycles) != plan.genus:
        raise PlanError("plan must have g a-cycles and g b-cycles")
    for p in plan.pieces():
        table.check_piece(p)
    for cyc in (*plan.a_cycles, *plan.b_cycles):
        for p, q in zip(cyc, cyc[1:]):
            if p.end != q.start or p.end == 0:
                continue
            arrive, leave = table.run(p.start, p.end, p.labels[0]).end, q.labels[0]
            pair = atlas.points[p.end - 1].pair
            if arrive != leave and not (arrive in pair and leave in pair):
                raise PlanError(f"{p} then {q}: label {arrive + 1} cannot become {leave + 1} at B{p.end}")


def homology_plan_hyperelliptic(atlas: SheetAtlas) -> HomologyPlan:
    curve = atlas.curve
    if curve.kind != HYPERELLIPTIC:
        raise PlanError("not a hyperelliptic atlas")
    if curve.case != 1:
        raise NotImplementedError("period assembly needs deg P = 2g + 1")
    g = curve.genus
    # piece k joins e_k and e_{k+1}; a sign change inside a segment is carried by its label run
    lab = [(run.start,) if run.start == run.end else (run.start, run.end) for run in atlas.sheets["a"]]
    a = tuple((Piece(2 * k - 1, 2 * k, lab[2 * k - 1], 2.0),) for k in range(1, g + 1))
    b = tuple(tuple(Piece(2 * j, 2 * j + 1, lab[2 * j], -2.0) for j in range(k, g + 1)) for k in range(1, g + 1))
    return HomologyPlan(a, b, "hyperelliptic")


_C34 = {
    "a": [
        [(2, 3, "1"), (3, 2, "3")],
        [(4, 5, "3-1-2"), (5, 4, "1-3-2")],
        [(6, 7, "2-3"), (7, 6, "2-1")],
    ],
    "b": [
        [(8, 7, "3"), (7, 5, "2"), (5, 3, "1"), (3, 6, "3-2"), (6, 8, "1-2")],
        [(1, 2, "3"), (2, 4, "1-2"), (4, 2, "3-2"), (2, 1, "2")],
        [(8, 7, "3"), (7, 8, "2")],
    ],
}


def homology_plan_trigonal34(atlas: SheetAtlas, table: SegmentTable | None = None) -> HomologyPlan:
    """Canonical cycles for (3,4) curves laid out like the reference example.

    Cuts join B2B3, B4B5, B6B7 and B8 through infinity to B1.  Labels are
    checked against the continuation; a mismatch means the branch
    configuration differs and a manual plan is needed.
    """
    curve = atlas.curve
    if curve.kind == HYPERELLIPTIC or curve.s != 4 or atlas.N != 8:
        raise PlanError("the (3,4) template needs a (3,4) curve with 8 finite branch points")
    # the cycles wind between B2k (below the axis) and B2k+1 (above it)
    im = atlas.e.imag
    if not all(im[2 * k - 1] < 0 < im[2 * k] for k in (1, 2, 3)):
        raise PlanError("the (3,4) template needs B2, B4, B6 below and B3, B5, B7 above the real axis; "
                        "supply a manual plan")
    plan = HomologyPlan(
        tuple(tuple(Piece.parse(*p) for p in c) for c in _C34["a"]),
        tuple(tuple(Piece.parse(*p) for p in c) for c in _C34["b"]),
        "trigonal34",
    )
    table = table or SegmentTable(atlas)
    try:
        validate_plan(table, plan)
    except PlanError as exc:
        raise PlanError(f"branch configuration does not fit the (3,4) template ({exc}); supply a manual plan") from exc
    # the cycles assume the lower and upper polygons bound no branch point
    loops = {k: v for k, v in closure_residuals(table).items() if k.startswith(("lower_", "upper_"))}
    if max(loops.values()) > TEMPLATE_CLOSURE:
        raise PlanError(f"lower or upper polygon does not close ({max(loops.values()):.3g}); supply a manual plan")
    return plan


def homology_plan(atlas: SheetAtlas, table: SegmentTable | None = None) -> HomologyPlan:
    if atlas.curve.kind == HYPERELLIPTIC:
        return homology_plan_hyperelliptic(atlas)
    return homology_plan_trigonal34(atlas, table)


# -- closure identities -----------------------------------------------------------

def _base_pieces(atlas: SheetAtlas, sheet: str) -> list[Piece]:
    N = atlas.N
    runs = atlas.sheets[sheet]
    out = [Piece(0, 1, (runs[0].start, runs[0].end))]
    out += [Piece(k, k + 1, (runs[k].start, runs[k].end)) for k in range(1, N)]
    out.append(Piece(N, 0, (runs[N].start, runs[N].end)))
    return out


def _loop_pieces(table: SegmentTable, ids, label: int, turn: str = "ccw") -> list[Piece]:
    """Pieces of a polygon continued from ``label``; rays mapped to stored orientation."""
    return [_ray_or(table, Piece(i, j, labs)) for i, j, labs in polygon_labels(table.atlas, ids, label, turn)]


def base_path_image(table: SegmentTable, sheet: str, i: int, kind: str = "first") -> np.ndarray:
    """Integral from infinity to e_i (1-based) along the base path on ``sheet``."""
    pieces = _base_pieces(table.atlas, sheet)[:i]
    return table.combine(pieces, kind) if pieces else np.zeros(table.first.size, dtype=complex)


def route_image(table: SegmentTable, ids, label: int, kind: str = "first", turn: str = "ccw") -> np.ndarray:
    """Integral along a polygon of branch points (leading 0 = ray from infinity)."""
    return table.combine(_loop_pieces(table, ids, label, turn), kind)


def c34_lower_ids() -> list[int]:
    return [0, 1, 2, 4, 6, 8, 0]


def c34_upper_ids() -> list[int]:
    return [0, 8, 7, 5, 3, 1, 0]


def closure_residuals(table: SegmentTable) -> dict[str, float]:
    """Residuals of the zero combinations of first kind segment integrals.

    Hyperelliptic: the two involution identities.  Trigonal: the base path on
    every sheet closes through infinity, and for the (3,4) layout also the
    lower path B1 B2 B4 B6 B8 and the upper path B8 B7 B5 B3 B1, with labels
    obtained by continuation.
    """
    atlas = table.atlas
    curve = atlas.curve
    out: dict[str, float] = {}
    if curve.kind == HYPERELLIPTIC:
        g = curve.genus
        lab = [run.start for run in atlas.sheets["a"]]
        odd = sum(table.integral(2 * k - 1, 2 * k, lab[2 * k - 1]) for k in range(1, g + 1))
        odd = odd + table.integral(2 * g + 1, 0, lab[2 * g + 1])
        even = table.integral(0, 1, lab[0]) + sum(table.integral(2 * k, 2 * k + 1, lab[2 * k]) for k in range(1, g + 1))
        out["involution_odd"] = float(np.max(np.abs(odd)))
        out["involution_even"] = float(np.max(np.abs(even)))
        return out
    for s in atlas.sheets:
        out[f"base_path_{s}"] = float(np.max(np.abs(table.combine(_base_pieces(atlas, s)))))
    if curve.s == 4 and atlas.N == 8:
        lower = []
        for k, s in enumerate(atlas.sheets):
            v = table.combine(_loop_pieces(table, c34_lower_ids(), k))
            lower.append(v)
            out[f"lower_{s}"] = float(np.max(np.abs(v)))
        out["lower_dependence"] = float(np.max(np.abs(lower[0] + lower[1] + lower[2])))
        for k in range(atlas.n_sheets):
            v = table.combine(_loop_pieces(table, c34_upper_ids(), k))
            out[f"upper_{k + 1}"] = float(np.max(np.abs(v)))
    return out


def _ray_or(table: SegmentTable, p: Piece) -> Piece:
    """Map reversed ray pieces onto the stored orientation."""
    N = table.atlas.N
    if p.start == 0 and p.end == N:  # from +inf inwards = minus the outward ray
        return Piece(N, 0, _outward_label(table, N, p.labels[0]), -p.coef)
    if p.start == 1 and p.end == 0:  # from B1 out to -inf = minus the inward ray
        return Piece(0, 1, _inward_label(table, p.labels[0]), -p.coef)
    return p


def _outward_label(table: SegmentTable, i: int, far_label: int) -> tuple[int, ...]:
    """Start label of the outward right ray whose far end carries ``far_label``."""
    for lab in range(table.atlas.n_sheets):
        if table.run(i, 0, lab).end == far_label:
            return (lab,)
    raise PlanError("no ray label reaches the requested far label")


def _inward_label(table: SegmentTable, near_label: int) -> tuple[int, ...]:
    """Far label of the inward left ray arriving at B1 with ``near_label``."""
    for lab in range(table.atlas.n_sheets):
        if table.run(0, 1, lab).end == near_label:
            return (lab,)
    raise PlanError("no ray label reaches the requested label at B1")


# -- period set ------------------------------------------------------------------------

@dataclass
class PeriodSet:
    omega: np.ndarray
    omega_p: np.ndarray
    eta: np.ndarray | None
    eta_p: np.ndarray | None
    tau: np.ndarray
    kappa: np.ndarray | None
    diagnostics: dict
    plan: HomologyPlan
    atlas: SheetAtlas = None
    table: SegmentTable = None

    @property
    def genus(self) -> int:
        return self.omega.shape[0]

    def to_dict(self) -> dict:
        def mat(m):
            if m is None:
                return None
            return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]

        return {"omega": mat(self.omega), "omega_p": mat(self.omega_p), "eta": mat(self.eta),
                "eta_p": mat(self.eta_p), "tau": mat(self.tau), "kappa": mat(self.kappa),
                "diagnostics": self.diagnostics, "plan": self.plan.to_dict()}


def legendre_residual(omega, omega_p, eta, eta_p) -> float:
    """max |Omega^t J Omega - 2 pi i J| for Omega = [[w, w'], [eta, eta']]."""
    g = omega.shape[0]
    Om = np.block([[omega, omega_p], [eta, eta_p]])
    J = np.block([[np.zeros((g, g)), -np.eye(g)], [np.eye(g), np.zeros((g, g))]])
    return float(np.max(np.abs(Om.T @ J @ Om - 2j * np.pi * J)))


def compute_periods(curve: CurveSpec, atlas: SheetAtlas | None = None, plan: HomologyPlan | None = None,
                    tol: float = TOL, gates: bool = True) -> PeriodSet:
    atlas = atlas or build_atlas(curve)
    if plan is None and atlas.curve.kind == HYPERELLIPTIC:
        plan = homology_plan_hyperelliptic(atlas)  # refuses unsupported degrees before any integration
    table = SegmentTable(atlas, tol)
    plan = plan or homology_plan(atlas, table)
    validate_plan(table, plan)
    g = plan.genus
    omega = np.column_stack([table.combine(c) for c in plan.a_cycles])
    omega_p = np.column_stack([table.combine(c) for c in plan.b_cycles])
    if table.second is not None:
        eta = np.column_stack([table.combine(c, "second") for c in plan.a_cycles])
        eta_p = np.column_stack([table.combine(c, "second") for c in plan.b_cycles])
    else:
        eta = eta_p = None
    tau = np.linalg.solve(omega, omega_p)
    diag: dict = {
        "tau_asymmetry": float(np.max(np.abs(tau - tau.T))),
        "im_tau_min_eig": float(np.min(np.linalg.eigvalsh(0.5 * (tau.imag + tau.imag.T)))),
        "omega_condition": float(np.linalg.cond(omega)),
        "closure": closure_residuals(table),
    }
    kappa = None
    if eta is not None:
        kappa = eta @ np.linalg.inv(omega)
        diag["kappa_asymmetry"] = float(np.max(np.abs(kappa - kappa.T)))
        diag["legendre_residual"] = legendre_residual(omega, omega_p, eta, eta_p)
    ps = PeriodSet(omega, omega_p, eta, eta_p, tau, kappa, diag, plan, atlas, table)
    if gates:
        if diag["tau_asymmetry"] > TAU_GATE:
            raise PeriodGateError(f"tau is not symmetric ({diag['tau_asymmetry']:.3e})", diag)
        if diag["im_tau_min_eig"] <= 0:
            raise PeriodGateError("Im tau is not positive definite", diag)
        if diag.get("legendre_residual", 0.0) > LEGENDRE_GATE:
            raise PeriodGateError(f"Legendre relation fails ({diag['legendre_residual']:.3e})", diag)
    return ps
