"""Regenerate oracle_values.json from the finite-difference oracle alone (no shooting code).

    python tests/fixtures/generate_oracle_fixtures.py
"""
from pathlib import Path

from slspectra.jsonio import dumps
from slspectra.oracle import OracleConfig, fd_spectrum, fd_transfer_extrapolated
from slspectra.potential import Potential

CASES = {
    "cos2": Potential([2.0]),
    "cos2_sin1": Potential([2.0], [1.0]),
}


def main():
    cfg = OracleConfig(meshes=(2.0**-11, 2.0**-12, 2.0**-13), levels=6)
    out = {"meshes": list(cfg.meshes), "cases": {}}
    for name, q in CASES.items():
        entry = {"cos": q.cos_coeffs.tolist(), "sin": q.sin_coeffs.tolist()}
        for tag in ("DD", "NN", "DN", "ND", "PER2", "PER4"):
            r = fd_spectrum(q, tag, cfg)
            entry[tag] = {"values": r.values.tolist(), "error": r.error.tolist()}
        vals, err = fd_transfer_extrapolated(q, 9.0)
        entry["transfer_lam9"] = {"values": vals.tolist(), "error": err.tolist()}
        out["cases"][name] = entry
    Path(__file__).with_name("oracle_values.json").write_text(dumps(out) + "\n")


if __name__ == "__main__":
    main()
