"""End-to-end runs: parse a target configuration, build the table,
write artifacts, and emit a machine-readable verification report.

Report lines have the fixed shape

    CHECK <name> <measured> <bound> PASS|FAIL

with measured and bound as hexfloats, so downstream tooling can diff
reports bit-for-bit.  The run exits successfully iff every check
passes.
"""

from __future__ import annotations

import cmath
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .chi import build_chi, leftover_prefix_bound, save_table
from .engine import ContourSpec, Evaluator, default_contour
from .errors import FormatError
from .generator import build_generator, eval_generator
from .mellin import (QClosedForm, eval_q, fourier_inverse_numeric,
                     mellin_inverse_closed, partial_fractions)
from .powerlog import PowerLogSum
from .targets import (ResiduePlan, StripMode, TargetPoint, TargetSpec,
                      build_residue_plan, parse_complex, validate_spec)

EPS_Q = 1e-3
RESIDUE_TOL_FLOOR = 0.05


@dataclass
class RunConfig:
    """A full run request: targets, mode, scale, and output paths."""

    zeroes: list[tuple[complex, int]] = field(default_factory=list)
    poles: list[tuple[complex, int]] = field(default_factory=list)
    mode: StripMode = field(default_factory=StripMode.unconditional)
    x_max: float = 1.0e6
    out_dir: str = "."
    eps_q: float = EPS_Q
    fourier_check: bool = False
    controls: list[complex] = field(default_factory=list)


def parse_config(text: str) -> RunConfig:
    """Parse the line-oriented `key = value` run format.

    Recognized keys: mode (unconditional|rh), xmax, out, eps_q,
    fourier_check (on|off), zero / pole (complex location, optional
    `x<multiplicity>`), control (complex).  '#' starts a comment.
    """
    cfg = RunConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            if key in ("zero", "pole"):
                mult = 1
                if " x" in value:
                    value, mult_s = value.rsplit(" x", 1)
                    mult = int(mult_s)
                loc = parse_complex(value.strip())
                (cfg.zeroes if key == "zero" else cfg.poles).append((loc, mult))
            elif key == "mode":
                cfg.mode = StripMode(value)
            elif key == "xmax":
                cfg.x_max = float(value)
            elif key == "out":
                cfg.out_dir = value
            elif key == "eps_q":
                cfg.eps_q = float(value)
            elif key == "fourier_check":
                cfg.fourier_check = value.lower() in ("on", "true", "1", "yes")
            elif key == "control":
                cfg.controls.append(parse_complex(value))
            else:
                raise FormatError(f"line {lineno}: unknown key {key!r}")
        except (ValueError, FormatError) as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
    return cfg


def config_to_plan(cfg: RunConfig) -> ResiduePlan:
    spec = TargetSpec(
        zeroes=tuple(TargetPoint(loc, m) for loc, m in cfg.zeroes),
        poles=tuple(TargetPoint(loc, m) for loc, m in cfg.poles),
        mode=cfg.mode,
    )
    return build_residue_plan(validate_spec(spec))


@dataclass
class CheckRow:
    name: str
    measured: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.measured <= self.bound

    def line(self) -> str:
        verdict = "PASS" if self.ok else "FAIL"
        return (f"CHECK {self.name} {float(self.measured).hex()} "
                f"{float(self.bound).hex()} {verdict}")


def _write_ledger_csv(path: str, ev: Evaluator) -> None:
    led, a = ev.ledger, ev.assignment
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("j,x_j,re_r,im_r,B_j,carry\n")
        for b in a.blocks:
            j = b.j
            fh.write(
                f"{j},{led.xs[j]!r},{led.r[j].real!r},{led.r[j].imag!r},"
                f"{led.B[j]!r},{int(b.carry)}\n"
            )


def _write_block_stats_csv(path: str, ev: Evaluator) -> None:
    a = ev.assignment
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("j,x_j,x_next,primes_in_block,chosen,c_j\n")
        counts = np.bincount(a.block_of_prime, minlength=len(a.blocks))
        chosen = np.bincount(a.block_of_prime[a.chosen_mask],
                             minlength=len(a.blocks))
        for b in a.blocks:
            fh.write(
                f"{b.j},{a.xs[b.j]!r},{a.xs[b.j + 1]!r},"
                f"{counts[b.j]},{chosen[b.j]},{b.c!r}\n"
            )


def _seeded_points(n: int, seed: int = 7) -> list[complex]:
    rng = np.random.default_rng(seed)
    return [complex(1.2 + 1.3 * rng.random(), -8.0 + 16.0 * rng.random())
            for _ in range(n)]


def run_checks(ev: Evaluator, cfg: RunConfig) -> list[CheckRow]:
    """All verification checks against a built evaluator."""
    rows: list[CheckRow] = []
    a, led, plan = ev.assignment, ev.ledger, ev.plan

    # greedy invariants
    defect = 0.0
    for b in a.blocks:
        v = led.r[b.j] + b.Q
        if abs(v) > 0:
            defect = max(defect, abs(v - abs(v) * cmath.exp(1j * b.c)))
    rows.append(CheckRow("phase_correctness", defect, 1e-12))

    worst = 0.0
    for b in a.blocks:
        if not b.carry:
            worst = max(worst, abs(led.r[b.j + 1]) / math.log(a.xs[b.j + 1]))
    rows.append(CheckRow("checkpoint_bound", worst, 1.0 + 1e-12))

    ncarries = sum(b.carry for b in a.blocks)
    late_carries = sum(b.carry for b in a.blocks if a.xs[b.j] >= 100.0)
    rows.append(CheckRow("carries_at_scale", float(late_carries), 0.0))
    rows.append(CheckRow("carries_total", float(ncarries),
                         float(len(a.blocks))))

    rows.append(CheckRow("leftover_bound", leftover_prefix_bound(a),
                         1.0 + 1e-12))

    # the two F routes at seeded points with Re s > 1
    dev = 0.0
    for s in _seeded_points(10):
        f1 = ev.continuation_F(s)
        f2 = ev.F_global(s)
        dev = max(dev, abs(f1 - f2) / max(1.0, abs(f2)))
    rows.append(CheckRow("identity_two_routes", dev, 1e-9))

    if plan.entries:
        G = ev.generator

        # envelope bound |w_i g_i G1| <= |m_i| / 2^(i+1) on a strip grid
        sig = np.linspace(plan.mode.alpha + 0.01, 3.0, 24)
        tau = np.linspace(-30.0, 30.0, 49)
        zz = (sig[:, None] + 1j * tau[None, :]).ravel()
        worst_env = 0.0
        from .generator import envelope_G1, eval_block
        for i, blk in enumerate(G.blocks):
            keep = np.abs(zz - blk.z0) > 2.0 * 0.02
            vals = np.abs(blk.weight * eval_block(blk, zz[keep])
                          * envelope_G1(zz[keep]))
            cap = abs(blk.residue) / 2.0 ** (i + 1)
            far = np.abs(zz[keep] - blk.z0) > 1.0
            if far.any():
                worst_env = max(worst_env, float(np.max(vals[far]) / cap))
        rows.append(CheckRow("envelope_grid", worst_env, 1.0 + 1e-9))

        # generator residues by contour against the plan (closed form)
        locs = [e.location for e in plan.entries]
        res_dev = 0.0
        for e in plan.entries:
            spec = default_contour(e.location, locs)
            z = spec.points()
            th = 2.0 * np.pi * np.arange(spec.nodes) / spec.nodes
            res = spec.radius / spec.nodes * np.sum(
                eval_generator(G, z) * np.exp(1j * th))
            res_dev = max(res_dev, abs(res - e.residue))
        rows.append(CheckRow("generator_residues", res_dev, 1e-8))

        if cfg.fourier_check:
            qn = fourier_inverse_numeric(G, eps_q=cfg.eps_q)
            xg = np.linspace(math.e + 1e-6, 60.0, 400)
            closed = eval_q(ev.q, xg)
            numeric = np.array([qn.eval_qx(float(x)) for x in xg])
            rows.append(CheckRow(
                "two_route_q",
                float(np.max(np.abs(closed - numeric))),
                cfg.eps_q,
            ))
            yg = np.linspace(-8.0, -1e-3, 200)
            causal = float(np.max(np.abs(
                np.array([qn.eval_phi(float(y)) for y in yg]))))
            rows.append(CheckRow("causality", causal, cfg.eps_q))

        # per-target residues of the continued g~
        for e in plan.entries:
            res, err = ev.residue_at(e.location)
            tol = max(RESIDUE_TOL_FLOOR, 2.0 * err)
            rows.append(CheckRow(
                f"residue_{e.index}", abs(res - e.residue), tol))

    # control contours: no target inside, residue must vanish
    for k, c in enumerate(cfg.controls):
        res, err = ev.residue_at(c, ContourSpec(c, 0.02))
        tol = max(RESIDUE_TOL_FLOOR, 2.0 * err)
        rows.append(CheckRow(f"control_{k}", abs(res), tol))

    # zeta cross-routes on the convergent half-plane
    s = 2.0 + 0.7j
    zd, td = ev.zeta_dirichlet(s, n_terms=min(200_000, int(ev.X)))
    ze, te = ev.zeta_euler(s)
    rows.append(CheckRow("zeta_cross_route", abs(zd - ze),
                         max(1e-6, 2.0 * (td + te))))

    # logarithmic-derivative against a finite difference of log zeta
    h = 1e-5
    lz_p, _ = ev.log_zeta_euler(s + h)
    lz_m, _ = ev.log_zeta_euler(s - h)
    fd = (lz_p - lz_m) / (2.0 * h)
    g, gb = ev.log_derivative_g(s)
    rows.append(CheckRow("log_derivative_fd", abs(g - fd),
                         max(1e-6, 2.0 * gb + 1e-4)))
    return rows


def run_pipeline(cfg: RunConfig, write_artifacts: bool = True):
    """Build everything for a config; returns (evaluator, rows, report).

    Artifacts written to cfg.out_dir: chi table, remainder ledger CSV,
    block statistics CSV, residue CSV, and the check report.
    """
    plan = config_to_plan(cfg)
    if plan.entries:
        G = build_generator(plan)
        q = mellin_inverse_closed(partial_fractions(G), shift=True)
    else:
        G = build_generator(plan)
        q = QClosedForm(PowerLogSum.from_terms([]), True)
    assignment, ledger = build_chi(q, cfg.mode, cfg.x_max, plan=plan)
    ev = Evaluator(assignment, ledger, q, G, plan)

    rows = run_checks(ev, cfg)
    report_lines = [r.line() for r in rows]
    report = "\n".join(report_lines) + "\n"

    if write_artifacts:
        os.makedirs(cfg.out_dir, exist_ok=True)
        save_table(assignment, ledger, os.path.join(cfg.out_dir, "chi.tbl"))
        _write_ledger_csv(os.path.join(cfg.out_dir, "ledger.csv"), ev)
        _write_block_stats_csv(os.path.join(cfg.out_dir, "blocks.csv"), ev)
        with open(os.path.join(cfg.out_dir, "residues.csv"), "w",
                  encoding="utf-8") as fh:
            fh.write("index,re_location,im_location,planned,measured_re,"
                     "measured_im,error_bound\n")
            for e in plan.entries:
                res, err = ev.residue_at(e.location)
                fh.write(f"{e.index},{e.location.real!r},"
                         f"{e.location.imag!r},{e.residue},"
                         f"{res.real!r},{res.imag!r},{err!r}\n")
        with open(os.path.join(cfg.out_dir, "report.txt"), "w",
                  encoding="utf-8") as fh:
            fh.write(report)
    return ev, rows, report
