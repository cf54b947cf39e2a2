"""End-to-end command-line workflow on a CSV file: k-sweep, test, endpoint and QQ data.

Run:  python3 demos/04_cli_workflow.py
"""

import json
import tempfile
from pathlib import Path

from trunctail import ParentModel, TruncationSpec, cli, magnitude_to_energy, sample_truncated

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "sizes.csv"
    # Synthetic sizes from a Pareto cut at its 99% quantile (true endpoint 100).
    sizes = sample_truncated(ParentModel.pareto(), TruncationSpec.at_level(0.99), 500, seed=5)
    path.write_text("id,size\n" + "\n".join(f"{i},{v!r}" for i, v in enumerate(sizes.tolist())) + "\n")

    print("$ trunctail fit sizes.csv --column size --k-range 250:252 --p 0.01")
    cli.main(["fit", str(path), "--column", "size", "--k-range", "250:252", "--p", "0.01"])

    print("\n$ trunctail test sizes.csv --column size --k-range 250:252")
    cli.main(["test", str(path), "--column", "size", "--k-range", "250:252"])

    out = Path(tmp) / "end.json"
    print("\n$ trunctail endpoint sizes.csv --column size --k-range 200:300 --format json --out end.json")
    cli.main(["endpoint", str(path), "--column", "size", "--k-range", "200:300", "--format", "json", "--out", str(out)])
    ends = sorted(r["endpoint"] for r in json.loads(out.read_text()) if r["odds"] > 0)
    if ends:
        print(f"median endpoint over k = 200..300: {ends[len(ends) // 2]:.3f}")

    out = Path(tmp) / "qq.json"
    cli.main(["qq", str(path), "--column", "size", "--kind", "pareto", "--k", "250", "--format", "json", "--out", str(out)])
    qq = json.loads(out.read_text())
    print(f"\nQQ data: {len(qq['points'])} points, model overlay with {len(qq['model'])} points")

    print("\n$ trunctail convert 2 3 --to energy")
    cli.main(["convert", "2", "3", "--to", "energy"])
    print(f"(library check: magnitude 3 -> {magnitude_to_energy(3.0):.1f})")
