"""Runs every g2lab command on a small config and validates each report.json
against the bundled JSON schema."""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

CONFIGS = {
    "sphere7": "command = sphere7-analyze\nsphere7.samples = 20000\nsphere7.zero_samples = 10\nseed = 3\n",
    "r3": "command = flow-run\nbianchi = [0, 0, 0]\ns0 = 0.5\nspan = [0.2, 0.6]\nintegrator.step = 1e-3\n"
          "tolerance.closed_form = 1e-6\nformat = json\n",
    "su2": "command = flow-run\nbianchi = [1, 1, 1]\ns0 = 0.5\nintegrator.step = 1e-4\n"
           "integrator.rho_min = 1e-15\nintegrator.u_min = 1e-6\n",
    "eta": "command = eta-init\nbianchi = [1, 1, 1]\ns0 = 0.5\n"
           "eta.coefficients = [[1, 0, 0], [0, 1, 0], [0, 0, -1]]\n",
}


def run(binary, work, name, text, extra=()):
    cfg = work / f"{name}.cfg"
    cfg.write_text(text)
    out = work / name
    proc = subprocess.run([binary, "--config", str(cfg), "--output", str(out), *extra],
                          capture_output=True, text=True)
    if proc.returncode not in (0, 1):
        sys.exit(f"{name}: exit {proc.returncode}\n{proc.stdout}{proc.stderr}")
    return out


def main():
    binary, schema_path = sys.argv[1], sys.argv[2]
    schema = json.loads(pathlib.Path(schema_path).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    with tempfile.TemporaryDirectory() as tmp:
        work = pathlib.Path(tmp)
        outputs = {name: run(binary, work, name, text) for name, text in CONFIGS.items()}
        verify_cfg = ("command = flow-verify\nbianchi = [1, 1, 1]\n"
                      f"trajectory = \"{outputs['su2'] / 'trajectory.csv'}\"\n")
        outputs["verify"] = run(binary, work, "verify", verify_cfg)
        for name, out in outputs.items():
            report = json.loads((out / "report.json").read_text())
            errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
            for e in errors:
                print(f"{name}: {'/'.join(map(str, e.path))}: {e.message}")
            if errors:
                sys.exit(1)
            print(f"{name}: {report['command']} report valid (pass={report['pass']})")


if __name__ == "__main__":
    main()
