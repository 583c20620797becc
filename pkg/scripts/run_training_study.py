"""Re-run the training-effectiveness study at desk scale.

Two modes in one pass:

  1. analyze the bundled reference datasets (reproduces the published
     doubling-rate and rank-test tables), and
  2. simulate a fresh cohort pair from the fitted curves with the given
     seed and compare the groups the same way.

Usage: python scripts/run_training_study.py [--seed N] [--out DIR]
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from opnav import reports, study  # noqa: E402
from opnav.analytics import compare_groups  # noqa: E402
from opnav.simulate import CohortConfig, GroupSpec, simulate_cohort  # noqa: E402


def describe(title: str, report) -> None:
    print(f"== {title}")
    print(f"   mean rate {study.GROUP_TRADITIONAL}: "
          f"{report.doubling_a.mean_rate * 100:.2f}%")
    print(f"   mean rate {study.GROUP_ASSISTED}:    "
          f"{report.doubling_b.mean_rate * 100:.2f}%")
    for level, test in zip(report.levels, report.tests):
        decision = "REJECT" if test.reject else "RETAIN"
        print(f"   level {level:>2}: u={test.u:g} z={test.z:.6f} "
              f"p={test.p_two_tailed:.6f} {decision}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--out", default="study-output")
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    matrix_a = reports.read_setup_matrix(study.data_text("traditional.csv"))
    matrix_b = reports.read_setup_matrix(study.data_text("assisted.csv"))
    reference = compare_groups(matrix_a, matrix_b, levels=study.LEVELS)
    describe("bundled reference datasets", reference)
    (out / "reference_summary.json").write_text(
        reports.to_json(reports.comparison_summary(
            reference, study.GROUP_TRADITIONAL, study.GROUP_ASSISTED
        )),
        encoding="utf-8",
    )

    curve_a, curve_b = study.reference_curves()
    config = CohortConfig(
        groups=(GroupSpec(study.GROUP_TRADITIONAL, curve_a),
                GroupSpec(study.GROUP_ASSISTED, curve_b)),
        seed=args.seed,
    )
    dataset = simulate_cohort(config)
    simulated = compare_groups(
        dataset.groups[study.GROUP_TRADITIONAL],
        dataset.groups[study.GROUP_ASSISTED],
        levels=study.LEVELS,
    )
    describe(f"fresh simulated cohorts (seed {args.seed})", simulated)
    (out / "simulated_summary.json").write_text(
        reports.to_json(reports.comparison_summary(
            simulated, study.GROUP_TRADITIONAL, study.GROUP_ASSISTED
        )),
        encoding="utf-8",
    )
    for name, matrix in dataset.groups.items():
        (out / f"simulated_{name}.csv").write_text(
            reports.write_setup_matrix(matrix), encoding="utf-8"
        )
    print(f"wrote summaries and matrices to {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
