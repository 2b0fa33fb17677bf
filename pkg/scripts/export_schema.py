"""Export the scenario JSON Schema to packages/shared-schemas/scenario.schema.json."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
ENGINE_PATH = ROOT / "apps" / "engine"
SCHEMA_PATH = ROOT / "packages" / "shared-schemas" / "scenario.schema.json"

# Ensure the engine package is importable when executed from repo root
sys.path.insert(0, str(ENGINE_PATH))


def export_schema(output_path: Path) -> Path:
    from nabasin.core.types import Scenario

    schema = Scenario.model_json_schema()
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(json.dumps(schema, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return output_path


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Export the nabasin scenario JSON Schema")
    parser.add_argument(
        "--output",
        type=Path,
        default=SCHEMA_PATH,
        help="Destination file (default: packages/shared-schemas/scenario.schema.json)",
    )
    args = parser.parse_args(argv)

    output_path = export_schema(args.output.resolve())
    try:
        shown = output_path.relative_to(ROOT)
    except ValueError:
        shown = output_path
    print(f"Wrote scenario schema to {shown}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
