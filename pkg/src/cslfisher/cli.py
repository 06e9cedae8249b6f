"""Command-line front end.

Verbs: transient (time-resolved strategy comparison), steady-sweep
(steady-state sweep over a parameter), alpha (print the mass-scaling
factor and the resulting collapse rate), validate (run the invariant
checks on a config without emitting data).

Exit codes: 0 success, 2 config error, 3 physics error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .config import ConfigError, key_table_text, load_config, parse_config_text, serialize_config
from .csl import alpha_factor, diffusion_rate_from_alpha
from .dynamics import (
    NonHurwitzError,
    build_diffusion,
    build_drift,
    evolve,
    initial_state,
    is_hurwitz,
)
from .estimation import point_fisher
from .gaussian import PhysicalityError, check_physicality, is_symplectic
from .scenarios import emit_csv, run_steady_sweep, run_transient

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PHYSICS = 3
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cslfisher",
        description="Fisher-information precision limits for collapse-rate "
                    "estimation in a two-cavity optomechanical system.",
        epilog="config keys (units in brackets):\n" + key_table_text(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)

    def add_common(p, needs_out):
        p.add_argument("--config", required=True, help="path to a config file")
        if needs_out:
            p.add_argument("--out", required=True, help="path for the CSV output")
            p.add_argument("--strategy", choices=("classical", "quantum", "both"),
                           default="both", help="which strategy columns to compute")

    add_common(sub.add_parser("transient",
                              help="time-resolved comparison of the two strategies"), True)
    add_common(sub.add_parser("steady-sweep",
                              help="steady-state sweep over a parameter"), True)
    add_common(sub.add_parser("alpha",
                              help="print the mass-scaling factor and collapse rate"), False)
    add_common(sub.add_parser("validate",
                              help="run the invariant checks on a config"), False)
    return parser


def _cmd_transient(args) -> int:
    table = run_transient(load_config(args.config), strategy=args.strategy)
    emit_csv(table, args.out)
    print(f"wrote {len(table)} rows to {args.out}")
    return EXIT_OK


def _cmd_steady_sweep(args) -> int:
    table = run_steady_sweep(load_config(args.config), strategy=args.strategy)
    emit_csv(table, args.out)
    print(f"wrote {len(table)} rows to {args.out}")
    return EXIT_OK


def _cmd_alpha(args) -> int:
    config = load_config(args.config)
    if config.csl is None:
        raise ConfigError("the alpha verb needs the csl.* section in the config")
    alpha = alpha_factor(config.csl_density, config.csl.r_c)
    rate = diffusion_rate_from_alpha(config.csl, alpha)
    print(f"alpha = {alpha:.12g}")
    print(f"lambda_csl = {rate:.12g} 1/s")
    return EXIT_OK


def _cmd_validate(args) -> int:
    config = load_config(args.config)
    round_trip = parse_config_text(serialize_config(config))
    if round_trip != config:
        raise ConfigError("canonical serialization does not round-trip")
    print("ok: config parses and round-trips")

    from .config import effective_system
    from .scenarios import _epr_spec, _local_spec

    params = effective_system(config)
    print(f"ok: effective collapse rate {params.lambda_csl:.6g} 1/s")

    A = build_drift(params)
    if not is_hurwitz(A):
        raise NonHurwitzError("drift matrix is not Hurwitz stable")
    print("ok: drift matrix is Hurwitz stable")

    for noise in (config.noise.as_thermal(), config.noise.as_tms()):
        D = build_diffusion(params, noise)
        if np.linalg.eigvalsh(D).min() < -1e-12:
            raise PhysicalityError(f"diffusion matrix for {noise.kind} noise "
                                   "is not positive semidefinite")
    print("ok: diffusion matrices are positive semidefinite")

    from .gaussian import Mode, beam_splitter_transform

    S = beam_splitter_transform(config.measurement.phi_bs, 3, Mode.CAVITY1, Mode.CAVITY2)
    if not is_symplectic(S):
        raise PhysicalityError("beam-splitter transform is not symplectic")
    print("ok: beam-splitter transform is symplectic")

    sigma0, sens0 = initial_state(params)
    print("ok: pre-drive initial state is physical")

    if config.grid.mode == "time":
        times = np.linspace(config.grid.start, config.grid.stop, config.grid.steps)
        for noise in (config.noise.as_thermal(), config.noise.as_tms()):
            traj = evolve(A, build_diffusion(params, noise), sigma0, times, sens0)
            for spec in (_local_spec(config), _epr_spec(config)):
                for t, sig, sen in zip(traj.times, traj.sigmas, traj.sensitivities):
                    cfi, qfi, _ = point_fisher(sig, sen, spec)
                    if np.isfinite(qfi) and cfi > qfi * (1 + 1e-9):
                        raise PhysicalityError(
                            f"classical exceeds quantum Fisher information at t={t:.3e}")
        print("ok: trajectories stay physical; classical <= quantum Fisher information")
    else:
        from .dynamics import steady_state

        sigma, sens = steady_state(A, build_diffusion(params, config.noise))
        if not check_physicality(sigma):
            raise PhysicalityError("steady state is not physical")
        print("ok: steady state solves with physical covariance")
    print("validate: all checks passed")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "transient": _cmd_transient,
        "steady-sweep": _cmd_steady_sweep,
        "alpha": _cmd_alpha,
        "validate": _cmd_validate,
    }
    try:
        return handlers[args.verb](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PhysicalityError, NonHurwitzError, ArithmeticError) as exc:
        print(f"physics error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
