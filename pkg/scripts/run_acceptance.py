#!/usr/bin/env python3
"""
Acceptance experiments for the CT-MHD solver

Runs the convergence studies, the derivative-limiter test, the shock tube
rate study, the cloud-shock robustness run and the temporal order check, and
logs the measured numbers next to their targets. Desk scale: expect tens of
minutes for the full set.
"""
import logging
import os
import sys

import click
import numpy as np

# Add project root to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config.settings import RunConfig, settings  # noqa: E402
from core.convergence import eoc, l1_error, run_convergence  # noqa: E402
from core.errors import SolverError  # noqa: E402
from core.reconstruction import derivative_averages, reconstruct  # noqa: E402
from core.simulation import run_simulation  # noqa: E402
from core.timestepper import ConstrainedTransportSolver  # noqa: E402

logger = logging.getLogger("acceptance")


def _report(name: str, passed: bool, detail: str):
    logger.info(f"{'✅' if passed else '❌'} {name}: {detail}")
    return passed


def alfven_convergence(grid: str = "cartesian", beta: float = 0.0, nx: int = 32, levels: int = 3,
                       low: float = 2.7, high: float = 3.3) -> bool:
    config = RunConfig(problem="alfven2.5d", nx=nx, grid=grid, beta=beta, levels=levels, output_formats=[])
    report = run_convergence(config)
    report.render()
    orders = report.final_orders()
    worst = min(orders.values())
    return _report(f"Alfven 2.5D {grid} EOC", all(low <= o <= high for o in orders.values()),
                   f"min EOC {worst:.2f}, rho error {report.errors[-1][0]:.3e}")


def alfven3d_convergence(nx: int = 16) -> bool:
    config = RunConfig(problem="alfven3d", nx=nx, levels=2, output_formats=[])
    report = run_convergence(config)
    report.render()
    orders = report.final_orders()
    return _report("Alfven 3D EOC", all(2.6 <= o <= 3.4 for o in orders.values()),
                   f"min EOC {min(orders.values()):.2f}")


def derivative_limiter() -> bool:
    """Hat advection with and without the resistivity limiter."""
    results = {}
    for enabled in (True, False):
        config = RunConfig(problem="advect1d", nx=200, cfl=0.7, t_final=1.0, output_formats=[],
                           limiter={"enabled": enabled})
        result = run_simulation(config, write=False)
        state = result.state
        solver = ConstrainedTransportSolver(state.grid, result.problem, result.config)
        solver.fill_ghosts(state)
        polys = reconstruct(state.a[[2]], solver.operator)
        derivative = derivative_averages(polys, state.grid)[0]
        values = state.interior_a[2]
        band = 1.0 / 0.075
        results[enabled] = (float(values.max() - 2.0) / 2.0, float(np.max(np.abs(derivative)) - band) / (2 * band))

    overshoot, derivative_excess = results[True]
    plain_excess = results[False][1]
    ok = overshoot <= 0.01 and derivative_excess <= 0.05 and plain_excess > derivative_excess
    return _report("Derivative limiter", ok,
                   f"overshoot {overshoot:.3%}, derivative excess {derivative_excess:.3%} "
                   f"(plain WENO {plain_excess:.3%})")


def shocktube_rate() -> bool:
    config = RunConfig(problem="shocktube", nx=100, grid="shocktube-blend", beta=1.0 / 15.0, levels=3,
                       output_formats=[])
    report = run_convergence(config)
    report.render()
    rate = report.final_orders()["Bx"]
    return _report("Shock tube B1 rate", abs(rate - 1.0 / 3.0) <= 0.15, f"observed order {rate:.2f}")


def cloud_shock() -> bool:
    config = RunConfig(problem="cloudshock2.5d", nx=128, output_formats=[])
    try:
        result = run_simulation(config, write=False)
    except SolverError as exc:
        return _report("Cloud-shock robustness", False, str(exc))
    history = result.diagnostics
    div = history["div_max"].to_numpy()[1:]
    ok = bool(history["min_rho"].min() > 0 and history["min_p"].min() > 0 and div[-1] <= 5 * np.median(div))
    _report("Cloud-shock robustness", ok, f"final div {div[-1]:.3e}, median {np.median(div):.3e}")

    try:
        run_simulation(config.model_copy(update={"corrector": False}), write=False)
        logger.info("Cloud-shock without corrector completed; inspect the output for degradation")
    except SolverError as exc:
        logger.info(f"Cloud-shock without corrector failed as expected: {exc}")
    return ok


def temporal_order(nx: int = 64) -> bool:
    """Self-convergence in dt on a fixed grid: one short run per step size."""
    states = []
    for dt in (0.004, 0.002, 0.001):
        config = RunConfig(problem="alfven2.5d", nx=nx, t_final=0.032, cfl=100.0, dt_max=dt, output_formats=[])
        states.append(run_simulation(config, write=False).state)
    grid = states[-1].grid
    coarse = l1_error(states[0].interior_q, states[1].interior_q, grid)[0]
    fine = l1_error(states[1].interior_q, states[2].interior_q, grid)[0]
    order = float(eoc(coarse, fine))
    return _report("Temporal order", 2.7 <= order <= 3.3, f"self-convergence order {order:.2f}")


CHECKS = {
    "alfven": alfven_convergence,
    "alfven-mapped": lambda: alfven_convergence("colella", 0.1),
    "alfven3d": alfven3d_convergence,
    "limiter": derivative_limiter,
    "shocktube": shocktube_rate,
    "cloudshock": cloud_shock,
    "temporal": temporal_order,
}


@click.command()
@click.argument("checks", nargs=-1, type=click.Choice(sorted(CHECKS)))
@click.option("--log-level", default=None, help="Logging level (default from CT_MHD_LOG_LEVEL).")
def main(checks, log_level):
    """Run the selected acceptance checks (default: all)."""
    logging.basicConfig(level=(log_level or settings.LOG_LEVEL).upper(), format=settings.LOG_FORMAT)
    selected = list(checks) or list(CHECKS)
    outcomes = {name: CHECKS[name]() for name in selected}
    failed = [name for name, ok in outcomes.items() if not ok]
    if failed:
        logger.error(f"❌ Failed: {', '.join(failed)}")
        sys.exit(1)
    logger.info("✅ All selected acceptance checks passed")


if __name__ == "__main__":
    main()
