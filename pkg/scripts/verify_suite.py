"""Run the verification suite over a set of resource profiles and tabulate verdicts.

    python scripts/verify_suite.py [--n 1025] [--count 40] [--out results/]
"""

import argparse
import json
from pathlib import Path

from loglab import ResourceProfile, run_verification
from loglab.sweep import log_spaced
from loglab.verify import STATEMENTS

PROFILES = {
    "sine_offset": ResourceProfile.sine_offset(1.5, 0.4),
    "linear": ResourceProfile.linear(0.0, 1.0),
    "shifted_ramp": ResourceProfile.shifted_ramp(0.25),
    "mirrored_ramp": ResourceProfile.linear(1.0, -1.0),
    "single_peak": ResourceProfile.single_peak(),
    "lifted_peak": ResourceProfile.single_peak(0.5, 1.0),
    "cosine_offset": ResourceProfile.cosine_offset(1.0, 1.0),
    "strong_cosine": ResourceProfile.cosine_offset(1.0, 3.0),
}
SHORT = {"not-applicable": "n/a", "inconclusive": "inc"}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1025)
    ap.add_argument("--count", type=int, default=40, help="number of log-spaced mu in [1e-2, 1e2]")
    ap.add_argument("--out", type=Path, help="directory for one JSON report per profile")
    args = ap.parse_args()

    mus = log_spaced(1e-2, 1e2, args.count)
    print(f"{'profile':<15}" + "".join(f"{s:>21}" for s in STATEMENTS))
    for name, profile in PROFILES.items():
        report = run_verification(profile, n=args.n, mu_values=mus)
        cells = [SHORT.get(report.verdicts[s].status, report.verdicts[s].status) for s in STATEMENTS]
        print(f"{name:<15}" + "".join(f"{c:>21}" for c in cells))
        if args.out:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / f"{name}.json").write_text(json.dumps(report.as_dict(), indent=2, default=str))


if __name__ == "__main__":
    main()
