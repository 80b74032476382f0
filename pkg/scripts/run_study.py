"""End-to-end demo: dataset -> grid -> scores -> report.

Generates a small synthetic dataset, runs the full 111 x 6 grid over it,
scores every output with all three metrics and writes the report tables.
Everything lands under the chosen work directory.
"""

import argparse
import subprocess
import sys
from pathlib import Path


def run(*cmd: str, ok_codes: tuple[int, ...] = (0,)) -> None:
    print("+", " ".join(cmd))
    code = subprocess.run(cmd, check=False).returncode
    if code not in ok_codes:
        raise SystemExit(f"step failed with exit code {code}: {' '.join(cmd)}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--workdir", default="study")
    ap.add_argument("--videos", type=int, default=2)
    ap.add_argument("--frames", type=int, default=12)
    ap.add_argument("--size", type=int, default=96)
    ap.add_argument("--jobs", type=int, default=0)
    args = ap.parse_args()

    work = Path(args.workdir)
    data = work / "dataset"
    out = work / "outputs"
    here = Path(__file__).parent

    run(sys.executable, str(here / "make_demo_dataset.py"),
        "--out", str(data), "--videos", str(args.videos),
        "--frames", str(args.frames), "--size", str(args.size))
    run(sys.executable, "-m", "stackfuse.cli", "run",
        "--input", str(data), "--output", str(out),
        *( ["--jobs", str(args.jobs)] if args.jobs else [] ))
    # the bundled niqe model needs 96x96 inputs; degenerate grid outputs
    # may also fail individual metrics, which score records and reports
    metrics = ["piqe", "brisque"] + (["niqe"] if args.size >= 96 else [])
    run(sys.executable, "-m", "stackfuse.cli", "score",
        "--input", str(out / "manifest.csv"),
        "--output", str(work / "scores.csv"),
        *[arg for m in metrics for arg in ("--metric", m)],
        ok_codes=(0, 1))
    run(sys.executable, "-m", "stackfuse.cli", "report",
        "--scores", str(work / "scores.csv"),
        "--manifest", str(out / "manifest.csv"),
        "--output", str(work / "report"))
    print(f"done; see {work}/report")


if __name__ == "__main__":
    main()
